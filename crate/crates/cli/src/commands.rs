use std::fmt;

use exfree::gates::{dist_up_to_global_phase, Op2, C64};
use exfree::kraus::{build_outer_channels, verify};
use exfree::phase_unit::{run_phase_unit, send_dit, survival_surface, InputPol, PhaseUnitConfig, UnitMode};
use exfree::protocol::{compile, program_error, quantization_bound, run_protocol, BobProgram};
use exfree::remote_circuit::ccu_table;
use exfree::ry_direct::{run_ry_direct, run_ry_direct_arbitrary, RyDirectConfig};
use exfree::{bob_tag_weight, CycleConfig, PolState};
use serde_json::{json, Value};

use crate::args::{self, Command, Format, Mode, Pol};

const EXACT: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Invariant(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Invariant(_) => "invariant",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Invariant(m) => f.write_str(m),
        }
    }
}

impl From<exfree::Error> for CliError {
    fn from(e: exfree::Error) -> Self {
        match e {
            exfree::Error::Invariant(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub enum Output {
    Json(Value),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(v) => serde_json::to_string_pretty(v).unwrap() + "\n",
            Output::Csv(s) => s.clone(),
        }
    }

    pub fn ok(&self) -> bool {
        match self {
            Output::Json(v) => v["ok"].as_bool().unwrap_or(false),
            Output::Csv(_) => true,
        }
    }
}

/// Puts `"ok"` first, then the fields of `body`.
fn report(ok: bool, body: Value) -> Output {
    let mut map = serde_json::Map::new();
    map.insert("ok".into(), json!(ok));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    Output::Json(Value::Object(map))
}

fn reals<const K: usize>(s: &str, what: &str) -> Result<[f64; K], CliError> {
    let parsed: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let v = parsed.map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
    v.try_into()
        .map_err(|v: Vec<f64>| CliError::Validation(format!("{what}: expected {K} numbers, got {}", v.len())))
}

/// `a..b:step`, `a..b` or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Validation(format!("grid {s:?} is not `a..b[:step]` or a comma list"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let values = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1),
        };
        let lo = num(lo)?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn load_program(s: &str) -> Result<BobProgram, CliError> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).map_err(|e| CliError::Validation(format!("cannot read program {s}: {e}")))?
    };
    let prog: BobProgram =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad program JSON: {e}")))?;
    prog.validate()?;
    Ok(prog)
}

fn cycle(c: &args::Cycles) -> Result<CycleConfig, CliError> {
    Ok(CycleConfig::new(c.m, c.n)?)
}

pub fn run(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::PhaseUnit(a) => phase_unit(a),
        Command::Sweep(a) => sweep(a),
        Command::Decompose(a) => decompose(a),
        Command::RunUnitary(a) => run_unitary(a),
        Command::KrausVerify(a) => kraus_verify(a),
        Command::RySimple(a) => ry_simple(a),
        Command::Dit(a) => dit(a),
        Command::Ccu(a) => ccu(a),
    }
}

fn phase_unit(a: &args::PhaseUnitArgs) -> Result<Output, CliError> {
    let mode = match a.mode {
        Mode::Phase => UnitMode::Phase,
        Mode::Dit => UnitMode::Dit,
        Mode::DelayOnly => UnitMode::DelayOnly,
    };
    let (pol, input) = match a.input {
        Pol::H => (InputPol::H, PolState::horizontal()),
        Pol::V => (InputPol::V, PolState::vertical()),
    };
    let cfg = PhaseUnitConfig::new(cycle(&a.cycles)?, a.l, a.k)?.with_mode(mode)?.with_input(pol);
    let r = run_phase_unit(&cfg)?;
    let expected = input.scale(C64::from_polar(1.0, r.phase));
    let error = r.out_state.distance(&expected);
    let tag = bob_tag_weight(&r.out_state);
    Ok(report(error <= EXACT && tag <= EXACT, json!({
                "M": a.cycles.m,
        "N": a.cycles.n,
        "L": a.l,
        "k": a.k,
        "mode": mode,
        "input": pol,
        "survival": r.survival_prob,
        "exit_bin": r.exit_bin,
        "phase": r.phase,
        "phase_over_pi": r.phase / std::f64::consts::PI,
        "out_state": r.out_state,
        "error": error,
        "tag_weight": tag,
        "bin_probs": r.bin_probs,
    })))
}

fn sweep(a: &args::SweepArgs) -> Result<Output, CliError> {
    let ms = parse_grid(&a.grid)?;
    let ns = match &a.n_grid {
        Some(g) => parse_grid(g)?,
        None => ms.clone(),
    };
    let grid: Vec<(usize, usize)> = ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect();
    let points = survival_surface(&grid, a.k, a.l)?;
    Ok(match a.format {
        Format::Csv => {
            let mut csv = String::from("M,N,k,survival\n");
            for p in &points {
                csv.push_str(&format!("{},{},{},{:?}\n", p.outer, p.inner, p.k, p.survival));
            }
            Output::Csv(csv)
        }
        Format::Json => report(true, json!({ "L": a.l, "points": points })),
    })
}

fn decompose(a: &args::DecomposeArgs) -> Result<Output, CliError> {
    let u = Op2::from_reals(reals(&a.u, "--u")?)?;
    let compiled = compile(&u, a.l)?;
    let prog = compiled.program.with_equalize(a.equalize);
    let error = program_error(&u, &prog)?;
    let bound = quantization_bound(a.l);
    let mut body = serde_json::to_value(prog).unwrap();
    let obj = body.as_object_mut().unwrap();
    obj.insert("angles".into(), serde_json::to_value(compiled.angles).unwrap());
    obj.insert("error".into(), json!(error));
    obj.insert("bound".into(), json!(bound));
    Ok(report(error <= bound, body))
}

fn run_unitary(a: &args::RunUnitaryArgs) -> Result<Output, CliError> {
    let prog = load_program(&a.program)?;
    let input = PolState::from_reals(reals(&a.state, "--state")?)?;
    if (input.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(CliError::Validation(format!("input state has norm² {}", input.norm_sqr())));
    }
    let r = run_protocol(&input, &prog, &cycle(&a.cycles)?)?;
    let expected = input.apply(&prog.unitary()?);
    let error = r.out_state.distance_up_to_phase(&expected);
    let tag = bob_tag_weight(&r.out_state);
    let stages: Vec<Value> = r
        .stages
        .iter()
        .map(|s| json!({ "stage": s.stage, "k": s.k, "survival": s.rotator.survival_prob, "exit_bin": s.rotator.exit_bin }))
        .collect();
    Ok(report(error <= 1e-10 && tag <= EXACT, json!({
                "program": prog,
        "out_state": r.out_state,
        "expected_state": expected,
        "error": error,
        "survival": r.total_survival,
        "exit_bin_total": r.exit_bin_total,
        "tag_weight": tag,
        "stages": stages,
    })))
}

fn kraus_verify(a: &args::KrausVerifyArgs) -> Result<Output, CliError> {
    let checked = verify(a.cycles.m, a.cycles.n)?;
    let mut body = json!({ "tol": a.tol });
    let obj = body.as_object_mut().unwrap();
    if let Value::Object(fields) = serde_json::to_value(&checked).unwrap() {
        obj.extend(fields);
    }
    if a.dump {
        let ch = build_outer_channels(a.cycles.m, a.cycles.n)?;
        obj.insert("channels".into(), json!({ "block": ch.block.to_json(), "pass": ch.pass.to_json() }));
    }
    Ok(report(checked.ok(a.tol), body))
}

fn ry_simple(a: &args::RySimpleArgs) -> Result<Output, CliError> {
    let cfg = RyDirectConfig::new(cycle(&a.cycles)?, a.k)?;
    let amp = cfg.closed_form_amplitude();
    if let Some(s) = &a.state {
        let input = PolState::from_reals(reals(s, "--state")?)?;
        let r = run_ry_direct_arbitrary(&input, &cfg)?;
        let expected = input.apply(&exfree::gates::ry(cfg.angle())?);
        let error = r.out_state.distance_up_to_phase(&expected);
        return Ok(report(error <= EXACT, json!({
                        "angle": cfg.angle(),
            "out_state": r.out_state,
            "expected_state": expected,
            "error": error,
            "success_prob": r.success_prob,
            "failure_prob": r.failure_prob,
            "branch_survival": r.branch_survival,
            "expected_runs": r.expected_runs(),
        })));
    }
    let r = run_ry_direct(&cfg)?;
    let error = r.out_state.distance(&cfg.target_state());
    let survival_error = (r.survival_prob - amp * amp).abs();
    let tag = bob_tag_weight(&r.out_state);
    Ok(report(error <= EXACT && survival_error <= EXACT && tag <= EXACT, json!({
                "M": a.cycles.m,
        "N": a.cycles.n,
        "k": a.k,
        "angle": cfg.angle(),
        "out_state": r.out_state,
        "target_state": cfg.target_state(),
        "error": error,
        "survival": r.survival_prob,
        "closed_form_survival": amp * amp,
        "tag_weight": tag,
    })))
}

fn dit(a: &args::DitArgs) -> Result<Output, CliError> {
    let cfg = PhaseUnitConfig::new(cycle(&a.cycles)?, a.l, a.k)?.with_mode(UnitMode::Dit)?;
    let r = send_dit(&cfg)?;
    Ok(report(r.bin == a.k, json!({
                "L": a.l,
        "sent": a.k,
        "bin": r.bin,
        "survival": r.survival_prob,
        "bin_probs": r.bin_probs,
    })))
}

fn ccu(a: &args::CcuArgs) -> Result<Output, CliError> {
    let u = Op2::from_reals(reals(&a.u, "--u")?)?;
    let rows = ccu_table(&u)?;
    let worst = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    let v = exfree::remote_circuit::sqrt_unitary(&u)?;
    Ok(report(worst <= EXACT, json!({
                "sqrt_error": dist_up_to_global_phase(&(v * v), &u),
        "max_distance": worst,
        "rows": rows,
    })))
}
