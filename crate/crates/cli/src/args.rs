use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "exfree", version, about = "Exchange-free single-qubit computation simulator")]
pub struct Cli {
    /// Run every entry of a JSON run descriptor instead of a subcommand.
    #[arg(long, global = true)]
    pub runs_descriptor: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One phase unit on |H> or |V>.
    PhaseUnit(PhaseUnitArgs),
    /// Phase-unit survival over an (M, N) grid, as CSV rows `M,N,k,survival`.
    Sweep(SweepArgs),
    /// Compile a 2x2 unitary into Bob's program.
    Decompose(DecomposeArgs),
    /// Run a Bob program on an input state.
    RunUnitary(RunUnitaryArgs),
    /// Build the Kraus channels and check them against the displayed sets and the simulator.
    KrausVerify(KrausVerifyArgs),
    /// The direct Ry(k pi/M) protocol.
    RySimple(RySimpleArgs),
    /// Send a dit through a dit-mode unit and read it back.
    Dit(DitArgs),
    /// Verification table of the classically controlled-controlled-U network.
    Ccu(CcuArgs),
}

impl Command {
    pub fn out_path(&self) -> Option<&Path> {
        let out = match self {
            Command::PhaseUnit(a) => &a.out,
            Command::Sweep(a) => &a.out,
            Command::Decompose(a) => &a.out,
            Command::RunUnitary(a) => &a.out,
            Command::KrausVerify(a) => &a.out,
            Command::RySimple(a) => &a.out,
            Command::Dit(a) => &a.out,
            Command::Ccu(a) => &a.out,
        };
        out.as_deref()
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Cycles {
    /// Outer cycles.
    #[arg(long = "M", default_value_t = 10)]
    pub m: usize,
    /// Inner cycles per outer cycle.
    #[arg(long = "N", default_value_t = 10)]
    pub n: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Phase,
    Dit,
    DelayOnly,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    H,
    V,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct PhaseUnitArgs {
    #[command(flatten)]
    pub cycles: Cycles,
    /// Resolution: each pass adds pi/L.
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Mode::Phase)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Pol::H)]
    pub input: Pol,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Values of M and N: `5..40:5`, `5..40` or `5,10,20`.
    #[arg(long)]
    pub grid: String,
    /// Separate values for N; defaults to `--grid`.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long = "L", default_value_t = 20)]
    pub l: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Eight reals `re00,im00,re01,im01,re10,im10,re11,im11`.
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub equalize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunUnitaryArgs {
    /// Program JSON, inline or as a file path.
    #[arg(long)]
    pub program: String,
    /// Four reals `re_h,im_h,re_v,im_v`.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0,0")]
    pub state: String,
    #[command(flatten)]
    pub cycles: Cycles,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KrausVerifyArgs {
    #[command(flatten)]
    pub cycles: Cycles,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Include the whole-run Kraus operators in the report.
    #[arg(long)]
    pub dump: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RySimpleArgs {
    #[command(flatten)]
    pub cycles: Cycles,
    #[arg(long)]
    pub k: usize,
    /// Arbitrary input `re_h,im_h,re_v,im_v`; runs both branches and the final beamsplitter.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DitArgs {
    #[command(flatten)]
    pub cycles: Cycles,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CcuArgs {
    /// Eight reals `re00,im00,re01,im01,re10,im10,re11,im11`.
    #[arg(long, allow_hyphen_values = true)]
    pub u: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
