//! Single-photon polarisation state with a Bob-visit tag.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Result};
use crate::gates::{Op2, C64, ONE, ZERO};

/// Amplitudes `a|H⟩ + b|V⟩` of one photon, possibly sub-normalised by loss.
///
/// `tag_h`/`tag_v` are the parts of `amp_h`/`amp_v` carried by a spatial mode that
/// has held amplitude returned from Bob's channel. Every linear element acts on the
/// amplitudes and the tags alike, so the tag stays a sub-decomposition of the state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolState {
    #[serde(with = "crate::json::complex")]
    amp_h: C64,
    #[serde(with = "crate::json::complex")]
    amp_v: C64,
    #[serde(with = "crate::json::complex")]
    tag_h: C64,
    #[serde(with = "crate::json::complex")]
    tag_v: C64,
}

impl PolState {
    pub fn new(amp_h: C64, amp_v: C64) -> Self {
        PolState {
            amp_h,
            amp_v,
            tag_h: ZERO,
            tag_v: ZERO,
        }
    }

    /// A state given as four reals `re_h, im_h, re_v, im_v`.
    pub fn from_reals(v: [f64; 4]) -> Result<Self> {
        for x in v {
            finite("state amplitude", x)?;
        }
        Ok(PolState::new(C64::new(v[0], v[1]), C64::new(v[2], v[3])))
    }

    pub(crate) fn with_tags(amp_h: C64, amp_v: C64, tag_h: C64, tag_v: C64) -> Self {
        PolState {
            amp_h,
            amp_v,
            tag_h,
            tag_v,
        }
    }

    pub fn horizontal() -> Self {
        PolState::new(ONE, ZERO)
    }

    pub fn vertical() -> Self {
        PolState::new(ZERO, ONE)
    }

    pub fn zero() -> Self {
        PolState::new(ZERO, ZERO)
    }

    pub fn amp_h(&self) -> C64 {
        self.amp_h
    }

    pub fn amp_v(&self) -> C64 {
        self.amp_v
    }

    pub fn tag_h(&self) -> C64 {
        self.tag_h
    }

    pub fn tag_v(&self) -> C64 {
        self.tag_v
    }

    pub fn amplitudes(&self) -> (C64, C64) {
        (self.amp_h, self.amp_v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_h.norm_sqr() + self.amp_v.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Squared norm of the tagged sub-amplitudes.
    pub fn tag_weight(&self) -> f64 {
        self.tag_h.norm_sqr() + self.tag_v.norm_sqr()
    }

    pub fn apply(&self, op: &Op2) -> PolState {
        let (h, v) = op.apply(self.amp_h, self.amp_v);
        let (th, tv) = op.apply(self.tag_h, self.tag_v);
        PolState::with_tags(h, v, th, tv)
    }

    pub fn scale(&self, s: C64) -> PolState {
        PolState::with_tags(self.amp_h * s, self.amp_v * s, self.tag_h * s, self.tag_v * s)
    }

    /// Superposes two states occupying the same mode.
    pub fn add(&self, other: &PolState) -> PolState {
        PolState::with_tags(
            self.amp_h + other.amp_h,
            self.amp_v + other.amp_v,
            self.tag_h + other.tag_h,
            self.tag_v + other.tag_v,
        )
    }

    /// The `H` part alone, as a polarising beamsplitter's transmitted port.
    pub fn h_part(&self) -> PolState {
        PolState::with_tags(self.amp_h, ZERO, self.tag_h, ZERO)
    }

    /// The `V` part alone, as a polarising beamsplitter's reflected port.
    pub fn v_part(&self) -> PolState {
        PolState::with_tags(ZERO, self.amp_v, ZERO, self.tag_v)
    }

    /// Marks the whole state as having shared a mode with Bob-returned amplitude.
    pub(crate) fn taint(&self) -> PolState {
        PolState::with_tags(self.amp_h, self.amp_v, self.amp_h, self.amp_v)
    }

    /// Rescales to unit norm; a zero state is returned unchanged.
    pub fn normalized(&self) -> PolState {
        let n = self.norm();
        if n > 0.0 {
            self.scale(C64::new(1.0 / n, 0.0))
        } else {
            *self
        }
    }

    /// Removes the global phase so the first amplitude with modulus above `1e-12`
    /// is real and non-negative.
    pub fn canonical(&self) -> PolState {
        let lead = if self.amp_h.norm() > 1e-12 {
            self.amp_h
        } else {
            self.amp_v
        };
        if lead.norm() > 0.0 {
            self.scale(lead.conj() / lead.norm())
        } else {
            *self
        }
    }

    /// `min_φ ‖self − e^{iφ} other‖` over the amplitudes.
    pub fn distance_up_to_phase(&self, other: &PolState) -> f64 {
        let overlap = other.amp_h.conj() * self.amp_h + other.amp_v.conj() * self.amp_v;
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        let dh = self.amp_h - other.amp_h * phase;
        let dv = self.amp_v - other.amp_v * phase;
        (dh.norm_sqr() + dv.norm_sqr()).sqrt()
    }

    /// Plain Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &PolState) -> f64 {
        ((self.amp_h - other.amp_h).norm_sqr() + (self.amp_v - other.amp_v).norm_sqr()).sqrt()
    }
}

/// Squared norm of the tagged part of `state`: the weight that has been to Bob.
pub fn bob_tag_weight(state: &PolState) -> f64 {
    state.tag_weight()
}
