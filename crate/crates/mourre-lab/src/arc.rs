//! Arcs of the unit circle described by phases in `[0, 2π)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::normalize_phase;

/// Counter-clockwise arc from `low` to `high`; wraps through 0 when `low > high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseArc {
    low: f64,
    high: f64,
    full: bool,
}

impl PhaseArc {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !low.is_finite() || !high.is_finite() {
            return Err(Error::Domain("arc endpoints must be finite".into()));
        }
        let (l, h) = (normalize_phase(low), normalize_phase(high));
        if l == h {
            return Err(Error::Domain(format!("degenerate arc: low = high = {l}")));
        }
        Ok(Self { low: l, high: h, full: false })
    }

    pub fn full() -> Self {
        Self { low: 0.0, high: 0.0, full: true }
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn wraps(&self) -> bool {
        !self.full && self.low > self.high
    }

    pub fn width(&self) -> f64 {
        if self.full {
            TAU
        } else {
            normalize_phase(self.high - self.low)
        }
    }

    pub fn midpoint(&self) -> f64 {
        normalize_phase(self.low + self.width() / 2.0)
    }

    /// Offset of `phase` from `low`, measured counter-clockwise.
    pub fn offset(&self, phase: f64) -> f64 {
        normalize_phase(phase - self.low)
    }

    /// Closed-arc membership.
    pub fn contains(&self, phase: f64) -> bool {
        self.full || self.offset(phase) <= self.width() || normalize_phase(phase) == self.high
    }

    /// Open-arc membership.
    pub fn contains_strictly(&self, phase: f64) -> bool {
        if self.full {
            return true;
        }
        let o = self.offset(phase);
        o > 0.0 && o < self.width()
    }

    /// Distance from `phase` to the nearest endpoint.
    pub fn endpoint_distance(&self, phase: f64) -> f64 {
        if self.full {
            return f64::INFINITY;
        }
        crate::linalg::phase_distance(phase, self.low).min(crate::linalg::phase_distance(phase, self.high))
    }

    /// Arc grown by `delta` on each side (capped at the full circle).
    pub fn enlarged(&self, delta: f64) -> Self {
        if self.full || self.width() + 2.0 * delta >= TAU {
            return Self::full();
        }
        Self { low: normalize_phase(self.low - delta), high: normalize_phase(self.high + delta), full: false }
    }

    /// Arc shrunk by `delta` on each side; `None` when nothing remains.
    pub fn shrunk(&self, delta: f64) -> Option<Self> {
        if self.full {
            return Some(*self);
        }
        if 2.0 * delta >= self.width() {
            return None;
        }
        Some(Self { low: normalize_phase(self.low + delta), high: normalize_phase(self.high - delta), full: false })
    }

    /// Intersection of two non-wrapping arcs.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.full {
            return Some(*other);
        }
        if other.full {
            return Some(*self);
        }
        assert!(!self.wraps() && !other.wraps(), "intersection is defined for non-wrapping arcs");
        let l = self.low.max(other.low);
        let h = self.high.min(other.high);
        (l < h).then_some(Self { low: l, high: h, full: false })
    }
}

impl std::fmt::Display for PhaseArc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.full {
            write!(f, "[0, 2pi)")
        } else {
            write!(f, "[{}, {}]", self.low, self.high)
        }
    }
}
