//! Exact 2×2 polarisation operators.
//!
//! Every matrix here is written in the fixed basis order `(H, V)`:
//!
//! ```text
//! Rx(θ) = [[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]] = exp(-iθσx/2)
//! Ry(θ) = [[cos θ/2,   -sin θ/2], [  sin θ/2, cos θ/2]] = exp(-iθσy/2)
//! Rz(θ) = diag(exp(-iθ/2), exp(iθ/2))                    = exp(-iθσz/2)
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Default absolute tolerance for operator and state comparisons.
pub const TOL: f64 = 1e-12;

/// A 2×2 complex operator on one polarisation qubit, basis order `(H, V)`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Op2 {
    #[serde(with = "crate::json::matrix2")]
    m: [[C64; 2]; 2],
}

impl fmt::Debug for Op2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Op2 {
    pub const IDENTITY: Op2 = Op2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Op2 { m }
    }

    pub const fn from_rows(a: C64, b: C64, c: C64, d: C64) -> Self {
        Op2 { m: [[a, b], [c, d]] }
    }

    /// Builds an operator from eight reals `re00, im00, re01, im01, re10, im10, re11, im11`.
    pub fn from_reals(v: [f64; 8]) -> Result<Self> {
        for x in v {
            finite("matrix entry", x)?;
        }
        Ok(Op2::from_rows(
            C64::new(v[0], v[1]),
            C64::new(v[2], v[3]),
            C64::new(v[4], v[5]),
            C64::new(v[6], v[7]),
        ))
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let m = &self.m;
        [
            m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re,
            m[1][1].im,
        ]
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Op2::from_rows(a, ZERO, ZERO, d)
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.m;
        Op2::from_rows(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Op2::from_rows(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ conj(self_ij) · other_ij`.
    pub fn inner(&self, other: &Op2) -> C64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn sub(&self, other: &Op2) -> Op2 {
        let (a, b) = (&self.m, &other.m);
        Op2::from_rows(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }

    /// Frobenius norm of `U†U − I`.
    pub fn unitarity_error(&self) -> f64 {
        self.dagger().mul(*self).sub(&Op2::IDENTITY).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Applies the operator to an amplitude pair `(H, V)`.
    pub fn apply(&self, h: C64, v: C64) -> (C64, C64) {
        (
            self.m[0][0] * h + self.m[0][1] * v,
            self.m[1][0] * h + self.m[1][1] * v,
        )
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Op2 {
        let mut base = *self;
        let mut acc = Op2::IDENTITY;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub(crate) fn rot_x(theta: f64) -> Op2 {
        let (s, c) = (theta / 2.0).sin_cos();
        Op2::from_rows(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
    }

    pub(crate) fn rot_y(theta: f64) -> Op2 {
        let (s, c) = (theta / 2.0).sin_cos();
        Op2::from_rows(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
    }

    pub(crate) fn rot_z(theta: f64) -> Op2 {
        Op2::diag(C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0))
    }
}

impl Mul for Op2 {
    type Output = Op2;

    fn mul(self, rhs: Op2) -> Op2 {
        let (a, b) = (&self.m, &rhs.m);
        Op2::from_rows(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// `exp(-iθσx/2)`.
pub fn rx(theta: f64) -> Result<Op2> {
    Ok(Op2::rot_x(finite("theta", theta)?))
}

/// `exp(-iθσy/2)`; a half-wave plate in this basis.
pub fn ry(theta: f64) -> Result<Op2> {
    Ok(Op2::rot_y(finite("theta", theta)?))
}

/// `exp(-iθσz/2)`; a phase rotation.
pub fn rz(theta: f64) -> Result<Op2> {
    Ok(Op2::rot_z(finite("theta", theta)?))
}

/// Quarter-wave plate aligned at −π/4: `Rx(−π/2) = exp(iπσx/4)`.
pub fn qwp() -> Op2 {
    Op2::rot_x(-PI / 2.0)
}

/// Adjoint of [`qwp`]: `Rx(π/2)`.
pub fn qwp_dagger() -> Op2 {
    Op2::rot_x(PI / 2.0)
}

pub fn pauli_x() -> Op2 {
    Op2::from_rows(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Op2 {
    Op2::from_rows(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Op2 {
    Op2::diag(ONE, -ONE)
}

pub fn hadamard() -> Op2 {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    Op2::from_rows(s, s, s, -s)
}

/// Polarisation flip `H ↔ V`: a half-wave plate at 45°, global phase dropped.
pub fn flip() -> Op2 {
    pauli_x()
}

/// Frobenius distance between `u` and `v` minimised over a global phase on `v`.
///
/// The optimal phase is `arg⟨v, u⟩`. The residual is evaluated directly, not via
/// `‖u‖² + ‖v‖² − 2|⟨v,u⟩|`.
pub fn dist_up_to_global_phase(u: &Op2, v: &Op2) -> f64 {
    let overlap = v.inner(u);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    u.sub(&v.scale(phase)).frobenius_norm()
}

/// Haar-random element of U(2): a uniform point on S³ as an SU(2) element times a
/// uniform global phase.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Op2 {
    let q = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            break q.map(|x| x / n);
        }
    };
    let a = C64::new(q[0], q[1]);
    let b = C64::new(q[2], q[3]);
    let su2 = Op2::from_rows(a, -b.conj(), b, a.conj());
    su2.scale(C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
}

/// Checks `u` is unitary to `tol`, returning the `NotUnitary` error otherwise.
pub fn require_unitary(u: &Op2, tol: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::NotUnitary {
            deviation: f64::INFINITY,
        });
    }
    let deviation = u.unitarity_error();
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::NotUnitary { deviation })
    }
}
