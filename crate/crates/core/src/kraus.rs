//! The run as a quantum channel on occupation modes.
//!
//! Modes: `a2` is Alice's outer arm (`H`), `a1` her inner arm (`V`), `b` Bob's
//! channel. Only the vacuum and one-photon states are kept. A two-mode sector is
//! ordered `[|00⟩, |1 0⟩, |0 1⟩]` with the first-named mode written first.
//!
//! Channels are built by composing Bob's action with the beamsplitter couplings,
//! then tracing out `b` from a vacuum start. The results are compared with the
//! displayed operator sets term by term and with the pure-state simulator.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{C64, ONE, ZERO};
use crate::interferometer::{outer_run, BlockPolicy, CycleConfig, CycleIndex, LossLedger, LossSite};
use crate::json::Cplx;
use crate::state::PolState;

pub type CMat = DMatrix<C64>;

/// Kraus operators with Frobenius norm below this are dropped after composition.
pub const PRUNE_TOL: f64 = 1e-14;

/// Ordered occupation labels of a sector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    labels: Vec<String>,
}

impl Basis {
    pub fn single_mode(mode: &str) -> Self {
        Basis {
            labels: vec![format!("|0_{mode}⟩"), format!("|1_{mode}⟩")],
        }
    }

    pub fn two_mode(first: &str, second: &str) -> Self {
        Basis {
            labels: vec![
                format!("|0_{first}0_{second}⟩"),
                format!("|1_{first}0_{second}⟩"),
                format!("|0_{first}1_{second}⟩"),
            ],
        }
    }

    pub fn b() -> Self {
        Basis::single_mode("b")
    }

    pub fn a1() -> Self {
        Basis::single_mode("a1")
    }

    pub fn a1_b() -> Self {
        Basis::two_mode("a1", "b")
    }

    pub fn a2_a1() -> Self {
        Basis::two_mode("a2", "a1")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn check_same(&self, other: &Basis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.labels.join(","),
                right: other.labels.join(","),
            })
        }
    }
}

/// `|row⟩⟨col|` scaled by `c` in a `dim`-dimensional basis.
pub fn ketbra(dim: usize, row: usize, col: usize, c: C64) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(row, col)] = c;
    m
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A density operator on a labelled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    basis: Basis,
    m: CMat,
}

impl DensityOp {
    /// Validates hermiticity, trace `≤ 1` and positivity.
    pub fn new(basis: Basis, m: CMat) -> Result<Self> {
        if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{}, basis has {} states",
                m.nrows(),
                m.ncols(),
                basis.dim()
            )));
        }
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = m.trace().re;
        if tr > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("density trace {tr} exceeds 1")));
        }
        let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {min_eig}")));
        }
        Ok(DensityOp { basis, m })
    }

    pub fn pure(basis: Basis, amps: &[C64]) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a {}-state basis",
                amps.len(),
                basis.dim()
            )));
        }
        let v = DMatrix::from_column_slice(amps.len(), 1, amps);
        DensityOp::new(basis, &v * v.adjoint())
    }

    pub fn basis_state(basis: Basis, i: usize) -> Result<Self> {
        let d = basis.dim();
        if i >= d {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range")));
        }
        DensityOp::new(basis, ketbra(d, i, i, ONE))
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

/// A finite Kraus set `{X_i}` acting as `ρ ↦ Σ X_i ρ X_i†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    basis: Basis,
    ops: Vec<CMat>,
    pruned_mass: f64,
}

impl KrausChannel {
    /// Validates dimensions and `Σ X†X ≤ I` to `1e-10`.
    pub fn new(basis: Basis, ops: Vec<CMat>) -> Result<Self> {
        let d = basis.dim();
        if ops.is_empty() {
            return Err(Error::InvalidArgument("a channel needs at least one operator".into()));
        }
        if let Some(op) = ops.iter().find(|o| o.nrows() != d || o.ncols() != d) {
            return Err(Error::InvalidArgument(format!(
                "Kraus operator is {}x{}, basis has {d} states",
                op.nrows(),
                op.ncols()
            )));
        }
        let ch = KrausChannel {
            basis,
            ops,
            pruned_mass: 0.0,
        };
        let gap = CMat::identity(d, d) - ch.completeness();
        let min_eig = SymmetricEigen::new(gap).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::Invariant(format!(
                "Kraus set increases trace (Σ X†X exceeds I by {:.3e})",
                -min_eig
            )));
        }
        Ok(ch)
    }

    pub fn identity(basis: Basis) -> Self {
        let d = basis.dim();
        KrausChannel {
            basis,
            ops: vec![CMat::identity(d, d)],
            pruned_mass: 0.0,
        }
    }

    pub fn unitary(basis: Basis, u: CMat) -> Result<Self> {
        KrausChannel::new(basis, vec![u])
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Total `‖X‖²_F` of operators dropped by pruning so far.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    /// `Σ X_i† X_i`.
    pub fn completeness(&self) -> CMat {
        let d = self.basis.dim();
        self.ops.iter().fold(CMat::zeros(d, d), |acc, x| acc + x.adjoint() * x)
    }

    /// Largest entry of `|I − Σ X†X|`; zero for a trace-preserving set.
    pub fn completeness_deficit(&self) -> f64 {
        let d = self.basis.dim();
        (CMat::identity(d, d) - self.completeness())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `Σ X_i m X_i†` for any operator `m`, not only density matrices.
    pub fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        let d = self.basis.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::BasisMismatch {
                left: self.basis.labels.join(","),
                right: format!("{}x{} matrix", m.nrows(), m.ncols()),
            });
        }
        Ok(self.ops.iter().fold(CMat::zeros(d, d), |acc, x| acc + x * m * x.adjoint()))
    }

    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        self.basis.check_same(&rho.basis)?;
        Ok(DensityOp {
            basis: self.basis.clone(),
            m: self.apply_matrix(&rho.m)?,
        })
    }

    /// `self ∘ other`: `other` acts first. Products below [`PRUNE_TOL`] are dropped.
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        self.basis.check_same(&other.basis)?;
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for x in &self.ops {
            for y in &other.ops {
                ops.push(x * y);
            }
        }
        let mut ch = KrausChannel {
            basis: self.basis.clone(),
            ops,
            pruned_mass: self.pruned_mass + other.pruned_mass,
        };
        ch.prune(PRUNE_TOL);
        Ok(ch)
    }

    /// `n`-fold composition; `power(0)` is the identity channel.
    pub fn power(&self, n: usize) -> KrausChannel {
        let mut acc = KrausChannel::identity(self.basis.clone());
        for _ in 0..n {
            acc = self.compose(&acc).expect("same basis");
        }
        acc
    }

    /// Drops operators with Frobenius norm below `tol`, keeping at least one.
    pub fn prune(&mut self, tol: f64) {
        let d = self.basis.dim();
        let mut dropped = 0.0;
        self.ops.retain(|x| {
            let n2 = x.norm_squared();
            if n2.sqrt() < tol {
                dropped += n2;
                false
            } else {
                true
            }
        });
        self.pruned_mass += dropped;
        if self.ops.is_empty() {
            self.ops.push(CMat::zeros(d, d));
        }
    }

    /// Replaces operators proportional to one another by a single operator of the
    /// combined weight. The channel is unchanged.
    pub fn merge_parallel(&mut self) {
        let mut merged: Vec<(CMat, f64)> = Vec::new();
        for x in self.ops.drain(..) {
            let n2 = x.norm_squared();
            if n2 == 0.0 {
                continue;
            }
            let unit = &x / real(n2.sqrt());
            match merged.iter_mut().find(|(u, _)| u.dotc(&unit).norm() > 1.0 - 1e-12) {
                Some((_, w)) => *w += n2,
                None => merged.push((unit, n2)),
            }
        }
        self.ops = merged.into_iter().map(|(u, w)| u * real(w.sqrt())).collect();
        if self.ops.is_empty() {
            let d = self.basis.dim();
            self.ops.push(CMat::zeros(d, d));
        }
    }

    /// Basis labels and operator entries as `{re, im}` objects.
    pub fn to_json(&self) -> serde_json::Value {
        let ops: Vec<Vec<Vec<Cplx>>> = self
            .ops
            .iter()
            .map(|x| {
                (0..x.nrows())
                    .map(|r| (0..x.ncols()).map(|c| Cplx::from(x[(r, c)])).collect())
                    .collect()
            })
            .collect();
        serde_json::json!({
            "basis": self.basis.labels,
            "ops": ops,
            "completeness_deficit": self.completeness_deficit(),
        })
    }
}

/// Bob blocks: `{|0_b⟩⟨1_b|, |0_b⟩⟨0_b|}`.
pub fn bob_block() -> KrausChannel {
    KrausChannel {
        basis: Basis::b(),
        ops: vec![ketbra(2, 0, 1, ONE), ketbra(2, 0, 0, ONE)],
        pruned_mass: 0.0,
    }
}

/// Bob's not-blocking set read literally as projectors, `{|1_b⟩⟨1_b|, |0_b⟩⟨0_b|}`.
/// It dephases `b`, which would destroy the interference the inner chain relies on.
pub fn bob_pass_projective() -> KrausChannel {
    KrausChannel {
        basis: Basis::b(),
        ops: vec![ketbra(2, 1, 1, ONE), ketbra(2, 0, 0, ONE)],
        pruned_mass: 0.0,
    }
}

/// Bob reflects the channel mode back coherently: the identity on `b`.
pub fn bob_pass() -> KrausChannel {
    KrausChannel::identity(Basis::b())
}

const SECTOR: [(usize, usize); 3] = [(0, 0), (1, 0), (0, 1)];

/// Extends a single-mode operator to a two-mode sector, identity on the other mode.
fn lift(x: &CMat, on_first: bool) -> CMat {
    CMat::from_fn(3, 3, |r, c| {
        let pick = |s: (usize, usize)| if on_first { s } else { (s.1, s.0) };
        let (ar, or) = pick(SECTOR[r]);
        let (ac, oc) = pick(SECTOR[c]);
        if or == oc {
            x[(ar, ac)]
        } else {
            ZERO
        }
    })
}

fn lift_channel(ch: &KrausChannel, basis: Basis, on_first: bool) -> KrausChannel {
    KrausChannel {
        basis,
        ops: ch.ops.iter().map(|x| lift(x, on_first)).collect(),
        pruned_mass: ch.pruned_mass,
    }
}

/// `Ry(θ)` between the two modes of a sector, acting on the one-photon states in
/// (first, second) order and as identity on vacuum.
pub fn coupling(theta: f64) -> CMat {
    let (s, c) = (theta / 2.0).sin_cos();
    let mut m = CMat::identity(3, 3);
    m[(1, 1)] = real(c);
    m[(1, 2)] = real(-s);
    m[(2, 1)] = real(s);
    m[(2, 2)] = real(c);
    m
}

/// Reduces a channel on `(a1, b)` to `a1`, starting `b` in vacuum and tracing it out.
fn trace_out_b(ch: &KrausChannel) -> Result<KrausChannel> {
    // Embed a1 with b in vacuum.
    let embed = CMat::from_fn(3, 2, |r, c| if r == c { ONE } else { ZERO });
    // Projections onto b = 0 and b = 1.
    let p0 = CMat::from_fn(2, 3, |r, c| if r == c { ONE } else { ZERO });
    let p1 = ketbra(3, 0, 2, ONE).rows(0, 2).into_owned();
    let mut ops = Vec::with_capacity(2 * ch.ops.len());
    for k in &ch.ops {
        ops.push(&p0 * k * &embed);
        ops.push(&p1 * k * &embed);
    }
    let mut out = KrausChannel::new(Basis::a1(), ops)?;
    out.pruned_mass = ch.pruned_mass;
    out.prune(PRUNE_TOL);
    Ok(out)
}

/// `(Bob ∘ Ry(π/N))^N` on `(a1, b)`, then `b` traced out.
pub fn inner_channel(n: usize, bob: &KrausChannel) -> Result<KrausChannel> {
    build_inner(n, bob, false)
}

fn build_inner(n: usize, bob: &KrausChannel, merge: bool) -> Result<KrausChannel> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let r = KrausChannel::unitary(Basis::a1_b(), coupling(PI / n as f64))?;
    let step = lift_channel(bob, Basis::a1_b(), false).compose(&r)?;
    if !merge {
        return trace_out_b(&step.power(n));
    }
    let mut acc = KrausChannel::identity(Basis::a1_b());
    for _ in 0..n {
        acc = step.compose(&acc)?;
        acc.merge_parallel();
    }
    let mut out = trace_out_b(&acc)?;
    out.merge_parallel();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerChannels {
    pub block: KrausChannel,
    pub pass: KrausChannel,
}

/// The inner-chain channels on `a1` for Bob blocking and not blocking, unmerged so
/// each absorption time keeps its own operator.
pub fn build_inner_channels(n: usize) -> Result<InnerChannels> {
    let block = inner_channel(n, &bob_block())?;
    let pass = inner_channel(n, &bob_pass())?;
    for ch in [&block, &pass] {
        if ch.pruned_mass > 1e-12 {
            return Err(Error::Invariant(format!("pruned mass {:.3e}", ch.pruned_mass)));
        }
    }
    Ok(InnerChannels { block, pass })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuterChannels {
    pub block: KrausChannel,
    pub pass: KrausChannel,
}

fn outer_channel(m: usize, inner: &KrausChannel) -> Result<KrausChannel> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let mut a1 = inner.clone();
    a1.merge_parallel();
    let r = KrausChannel::unitary(Basis::a2_a1(), coupling(PI / m as f64))?;
    let step = lift_channel(&a1, Basis::a2_a1(), false).compose(&r)?;
    let mut acc = KrausChannel::identity(Basis::a2_a1());
    for _ in 0..m {
        acc = step.compose(&acc)?;
        acc.merge_parallel();
    }
    if acc.pruned_mass > 1e-12 {
        return Err(Error::Invariant(format!("pruned mass {:.3e}", acc.pruned_mass)));
    }
    Ok(acc)
}

/// The whole-run channels on `(a2, a1)`: `(A1 ∘ Ry(π/M))^M` for each policy.
pub fn build_outer_channels(m: usize, n: usize) -> Result<OuterChannels> {
    Ok(OuterChannels {
        block: outer_channel(m, &build_inner(n, &bob_block(), true)?)?,
        pass: outer_channel(m, &build_inner(n, &bob_pass(), true)?)?,
    })
}

/// Coefficients of the blocked whole-run channel.
///
/// `c1 = |⟨a2|S|a2⟩|`, `c2 = |⟨a1|S|a1⟩|`, `c3 = |⟨a1|S|a2⟩|`, `c4 = |⟨a2|S|a1⟩|` for
/// the surviving operator `S`; `loss_a2`, `loss_a1` are the quadrature sums of the
/// operators sending each one-photon state to vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub loss_a2: f64,
    pub loss_a1: f64,
}

impl Coefficients {
    /// Largest gap between the loss weights and `√(1−c1²−c3²)`, `√(1−c2²−c4²)`.
    pub fn completeness_error(&self) -> f64 {
        let la2 = (1.0 - self.c1 * self.c1 - self.c3 * self.c3).max(0.0).sqrt();
        let la1 = (1.0 - self.c2 * self.c2 - self.c4 * self.c4).max(0.0).sqrt();
        (la2 - self.loss_a2).abs().max((la1 - self.loss_a1).abs())
    }
}

/// Splits a whole-run channel into its surviving operator and the vacuum-bound rest.
fn split_survivor(ch: &KrausChannel) -> Result<(CMat, Vec<&CMat>)> {
    let idx = ch
        .ops
        .iter()
        .position(|x| (x[(0, 0)] - ONE).norm() < 1e-10)
        .ok_or_else(|| Error::Invariant("no operator preserves the vacuum".into()))?;
    let rest = ch.ops.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, x)| x).collect();
    Ok((ch.ops[idx].clone(), rest))
}

pub fn coefficients_of(block: &KrausChannel) -> Result<Coefficients> {
    let (s, rest) = split_survivor(block)?;
    let quad = |col: usize| rest.iter().map(|x| x[(0, col)].norm_sqr()).sum::<f64>().sqrt();
    Ok(Coefficients {
        c1: s[(1, 1)].norm(),
        c2: s[(2, 2)].norm(),
        c3: s[(2, 1)].norm(),
        c4: s[(1, 2)].norm(),
        loss_a2: quad(1),
        loss_a1: quad(2),
    })
}

pub fn coefficients(m: usize, n: usize) -> Result<Coefficients> {
    coefficients_of(&outer_channel(m, &build_inner(n, &bob_block(), true)?)?)
}

/// One displayed operator `coeff·|row⟩⟨col|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub row: usize,
    pub col: usize,
    pub coeff: f64,
}

/// The displayed inner-chain set with Bob blocking.
pub fn displayed_a1_block(n: usize) -> Vec<Term> {
    let (s, c) = (PI / (2.0 * n as f64)).sin_cos();
    vec![
        Term { row: 1, col: 1, coeff: c.powi(n as i32) },
        Term { row: 0, col: 0, coeff: 1.0 },
        Term { row: 0, col: 1, coeff: c.powi(n as i32 - 1) * s },
    ]
}

/// The displayed inner-chain set with Bob not blocking.
pub fn displayed_a1_pass() -> Vec<Term> {
    vec![Term { row: 0, col: 1, coeff: 1.0 }, Term { row: 0, col: 0, coeff: 1.0 }]
}

/// The displayed whole-run set with Bob not blocking.
pub fn displayed_a12_pass(m: usize) -> Vec<Term> {
    let r = (PI / (2.0 * m as f64)).cos().powi(m as i32);
    vec![
        Term { row: 1, col: 1, coeff: r },
        Term { row: 0, col: 1, coeff: (1.0 - r * r).sqrt() },
        Term { row: 0, col: 2, coeff: 1.0 },
        Term { row: 0, col: 0, coeff: 1.0 },
    ]
}

/// The displayed whole-run set with Bob blocking, for given coefficients.
pub fn displayed_a12_block(c: &Coefficients) -> Vec<Term> {
    vec![
        Term { row: 1, col: 1, coeff: c.c1 },
        Term { row: 2, col: 2, coeff: c.c2 },
        Term { row: 2, col: 1, coeff: c.c3 },
        Term { row: 1, col: 2, coeff: c.c4 },
        Term { row: 0, col: 0, coeff: 1.0 },
        Term { row: 0, col: 1, coeff: (1.0 - c.c1 * c.c1 - c.c3 * c.c3).max(0.0).sqrt() },
        Term { row: 0, col: 2, coeff: (1.0 - c.c2 * c.c2 - c.c4 * c.c4).max(0.0).sqrt() },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermMatch {
    pub term: Term,
    /// `min |coeff − |X_(row,col)||` over constructed operators `X`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub matches: Vec<TermMatch>,
    pub max_deviation: f64,
    /// `max |I − Σ D†D|` over the displayed operators.
    pub displayed_completeness_deficit: f64,
}

/// Finds each displayed term among the entries of the constructed operators.
///
/// A Kraus operator is only defined up to a phase, so moduli are compared.
pub fn match_terms(displayed: &[Term], ch: &KrausChannel) -> TermReport {
    let d = ch.basis.dim();
    let matches: Vec<TermMatch> = displayed
        .iter()
        .map(|&term| {
            let deviation = ch
                .ops
                .iter()
                .map(|x| (x[(term.row, term.col)].norm() - term.coeff).abs())
                .fold(f64::INFINITY, f64::min);
            TermMatch { term, deviation }
        })
        .collect();
    let max_deviation = matches.iter().map(|m| m.deviation).fold(0.0, f64::max);
    let disp = KrausChannel {
        basis: ch.basis.clone(),
        ops: displayed.iter().map(|t| ketbra(d, t.row, t.col, real(t.coeff))).collect(),
        pruned_mass: 0.0,
    };
    TermReport {
        matches,
        max_deviation,
        displayed_completeness_deficit: disp.completeness_deficit(),
    }
}

fn sector_photon(i: usize) -> PolState {
    match i {
        1 => PolState::horizontal(),
        _ => PolState::vertical(),
    }
}

/// Runs the pure-state simulator on each sector basis state and assembles the
/// density-matrix image of `rho`. Each ledger event is its own environment mode.
pub fn simulator_density(cfg: &CycleConfig, policy: BlockPolicy, rho: &CMat) -> Result<CMat> {
    if rho.nrows() != 3 || rho.ncols() != 3 {
        return Err(Error::InvalidArgument("expected a 3x3 operator on (a2, a1)".into()));
    }
    // out[i]: surviving amplitudes on the sector; loss[i]: lost amplitude per event.
    let mut out = [[ZERO; 3]; 3];
    let mut loss: [BTreeMap<(LossSite, CycleIndex), C64>; 3] = Default::default();
    out[0][0] = ONE;
    for i in 1..3 {
        let mut ledger = LossLedger::new();
        let s = outer_run(&sector_photon(i), cfg, policy, &mut ledger)?;
        out[i] = [ZERO, s.amp_h(), s.amp_v()];
        for e in ledger.events() {
            *loss[i].entry((e.site, e.at)).or_insert(ZERO) += e.amplitude;
        }
    }
    let mut res = CMat::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let w = rho[(i, j)];
            if w == ZERO {
                continue;
            }
            for r in 0..3 {
                for c in 0..3 {
                    res[(r, c)] += w * out[i][r] * out[j][c].conj();
                }
            }
            let lost: C64 = loss[i]
                .iter()
                .map(|(k, a)| a * loss[j].get(k).copied().unwrap_or(ZERO).conj())
                .sum();
            res[(0, 0)] += w * lost;
        }
    }
    Ok(res)
}

/// Largest entry-wise gap between the channel and the simulator over all nine
/// matrix units `|i⟩⟨j|` of the `(a2, a1)` sector.
pub fn simulator_deviation(ch: &KrausChannel, cfg: &CycleConfig, policy: BlockPolicy) -> Result<f64> {
    Basis::a2_a1().check_same(&ch.basis)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let unit = ketbra(3, i, j, ONE);
            let a = ch.apply_matrix(&unit)?;
            let b = simulator_density(cfg, policy, &unit)?;
            worst = worst.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausReport {
    #[serde(rename = "M")]
    pub outer: usize,
    #[serde(rename = "N")]
    pub inner: usize,
    pub a1_block: TermReport,
    pub a1_pass: TermReport,
    pub a12_pass: TermReport,
    pub coefficients: Coefficients,
    pub simulator_deviation_block: f64,
    pub simulator_deviation_pass: f64,
    pub max_completeness_deficit: f64,
}

impl KrausReport {
    /// The constructed channels agree with the simulator and the displayed inner
    /// sets to `tol`, and the coefficient completeness relations hold.
    pub fn ok(&self, tol: f64) -> bool {
        self.a1_block.max_deviation <= tol
            && self.a1_pass.max_deviation <= tol
            && self.simulator_deviation_block <= tol
            && self.simulator_deviation_pass <= tol
            && self.coefficients.completeness_error() <= tol
            && self.max_completeness_deficit <= tol
    }
}

/// Builds every channel for `(M, N)` and checks it against the displayed sets and
/// the simulator.
pub fn verify(m: usize, n: usize) -> Result<KrausReport> {
    let cfg = CycleConfig::new(m, n)?;
    let inner = build_inner_channels(n)?;
    let block = outer_channel(m, &inner.block)?;
    let pass = outer_channel(m, &inner.pass)?;
    let coefficients = coefficients_of(&block)?;
    let max_completeness_deficit = [&inner.block, &inner.pass, &block, &pass]
        .iter()
        .map(|c| c.completeness_deficit())
        .fold(0.0, f64::max);
    Ok(KrausReport {
        outer: m,
        inner: n,
        a1_block: match_terms(&displayed_a1_block(n), &inner.block),
        a1_pass: match_terms(&displayed_a1_pass(), &inner.pass),
        a12_pass: match_terms(&displayed_a12_pass(m), &pass),
        coefficients,
        simulator_deviation_block: simulator_deviation(&block, &cfg, BlockPolicy::BlockAll)?,
        simulator_deviation_pass: simulator_deviation(&pass, &cfg, BlockPolicy::BlockNone)?,
        max_completeness_deficit,
    })
}
