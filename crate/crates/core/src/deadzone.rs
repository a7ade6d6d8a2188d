//! Non-symmetric dead-zone input nonlinearity.
//!
//! The dead-zone maps a commanded input `u` to an effective input `υ`:
//!
//! ```text
//!        ⎧ m_l (u − δ_l)   u ≤ δ_l
//! Υ(u) = ⎨ 0               δ_l < u < δ_r
//!        ⎩ m_r (u − δ_r)   u ≥ δ_r
//! ```
//!
//! For control design the same map is written as `Υ(u) = m(u) [u − d(u)]`,
//! where `m(u)` picks the slope by the sign of `u` and `d(u)` is a bounded
//! disturbance-like term. [`DeadZoneSpec::slope`] and
//! [`DeadZoneSpec::disturbance`] expose the two pieces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Break points (volts) and slopes of a non-symmetric dead-zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeadZone", into = "RawDeadZone")]
pub struct DeadZoneSpec {
    delta_l: f64,
    delta_r: f64,
    m_l: f64,
    m_r: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeadZone {
    delta_l: f64,
    delta_r: f64,
    m_l: f64,
    m_r: f64,
}

impl TryFrom<RawDeadZone> for DeadZoneSpec {
    type Error = Error;

    fn try_from(raw: RawDeadZone) -> Result<Self> {
        DeadZoneSpec::new(raw.delta_l, raw.delta_r, raw.m_l, raw.m_r)
    }
}

impl From<DeadZoneSpec> for RawDeadZone {
    fn from(dz: DeadZoneSpec) -> Self {
        RawDeadZone {
            delta_l: dz.delta_l,
            delta_r: dz.delta_r,
            m_l: dz.m_l,
            m_r: dz.m_r,
        }
    }
}

impl DeadZoneSpec {
    /// Builds a dead-zone, rejecting parameters with the wrong sign
    /// structure (`δ_l < 0 < δ_r`, `m_l, m_r > 0`).
    pub fn new(delta_l: f64, delta_r: f64, m_l: f64, m_r: f64) -> Result<Self> {
        if !(delta_l.is_finite() && delta_l < 0.0) {
            return Err(Error::invalid("delta_l", "must be finite and negative"));
        }
        if !(delta_r.is_finite() && delta_r > 0.0) {
            return Err(Error::invalid("delta_r", "must be finite and positive"));
        }
        if !(m_l.is_finite() && m_l > 0.0) {
            return Err(Error::invalid("m_l", "must be finite and positive"));
        }
        if !(m_r.is_finite() && m_r > 0.0) {
            return Err(Error::invalid("m_r", "must be finite and positive"));
        }
        Ok(Self {
            delta_l,
            delta_r,
            m_l,
            m_r,
        })
    }

    pub fn delta_l(&self) -> f64 {
        self.delta_l
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn m_l(&self) -> f64 {
        self.m_l
    }

    pub fn m_r(&self) -> f64 {
        self.m_r
    }

    /// Dead-zone output `υ = Υ(u)`.
    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        if u <= self.delta_l {
            self.m_l * (u - self.delta_l)
        } else if u >= self.delta_r {
            self.m_r * (u - self.delta_r)
        } else {
            0.0
        }
    }

    /// Slope `m(u)`; zero belongs to the left branch.
    #[inline]
    pub fn slope(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.m_l
        } else {
            self.m_r
        }
    }

    /// Disturbance term `d(u)`, equal to `u` inside the band and to the
    /// nearest break point outside it.
    #[inline]
    pub fn disturbance(&self, u: f64) -> f64 {
        if u <= self.delta_l {
            self.delta_l
        } else if u >= self.delta_r {
            self.delta_r
        } else {
            u
        }
    }

    /// True when the parameters lie inside `bounds`.
    pub fn within(&self, bounds: &DeadZoneBounds) -> bool {
        (bounds.delta_l_min..=bounds.delta_l_max).contains(&self.delta_l)
            && (bounds.delta_r_min..=bounds.delta_r_max).contains(&self.delta_r)
            && (bounds.m_l_min..=bounds.m_l_max).contains(&self.m_l)
            && (bounds.m_r_min..=bounds.m_r_max).contains(&self.m_r)
    }
}

/// Known bounds on the (otherwise unknown) dead-zone parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct DeadZoneBounds {
    delta_l_min: f64,
    delta_l_max: f64,
    delta_r_min: f64,
    delta_r_max: f64,
    m_l_min: f64,
    m_l_max: f64,
    m_r_min: f64,
    m_r_max: f64,
}

/// Bounds as written in scenario files: `[min, max]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    delta_l: [f64; 2],
    delta_r: [f64; 2],
    m_l: [f64; 2],
    m_r: [f64; 2],
}

impl TryFrom<RawBounds> for DeadZoneBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        DeadZoneBounds::new(raw.delta_l, raw.delta_r, raw.m_l, raw.m_r)
    }
}

impl From<DeadZoneBounds> for RawBounds {
    fn from(b: DeadZoneBounds) -> Self {
        RawBounds {
            delta_l: [b.delta_l_min, b.delta_l_max],
            delta_r: [b.delta_r_min, b.delta_r_max],
            m_l: [b.m_l_min, b.m_l_max],
            m_r: [b.m_r_min, b.m_r_max],
        }
    }
}

impl DeadZoneBounds {
    /// Each argument is a `[min, max]` pair.
    pub fn new(delta_l: [f64; 2], delta_r: [f64; 2], m_l: [f64; 2], m_r: [f64; 2]) -> Result<Self> {
        let ordered = |[lo, hi]: [f64; 2]| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ordered(delta_l) || delta_l[1] >= 0.0 {
            return Err(Error::invalid(
                "delta_l",
                "bounds must satisfy min <= max < 0",
            ));
        }
        if !ordered(delta_r) || delta_r[0] <= 0.0 {
            return Err(Error::invalid(
                "delta_r",
                "bounds must satisfy 0 < min <= max",
            ));
        }
        if !ordered(m_l) || m_l[0] <= 0.0 {
            return Err(Error::invalid("m_l", "bounds must satisfy 0 < min <= max"));
        }
        if !ordered(m_r) || m_r[0] <= 0.0 {
            return Err(Error::invalid("m_r", "bounds must satisfy 0 < min <= max"));
        }
        Ok(Self {
            delta_l_min: delta_l[0],
            delta_l_max: delta_l[1],
            delta_r_min: delta_r[0],
            delta_r_max: delta_r[1],
            m_l_min: m_l[0],
            m_l_max: m_l[1],
            m_r_min: m_r[0],
            m_r_max: m_r[1],
        })
    }

    /// Bound `δ` on `|d(u)|`: `max{−δ_l,min, δ_r,max}`.
    pub fn disturbance_bound(&self) -> f64 {
        (-self.delta_l_min).max(self.delta_r_max)
    }

    /// Smallest slope over both sides.
    pub fn m_min(&self) -> f64 {
        self.m_l_min.min(self.m_r_min)
    }

    /// Largest slope over both sides.
    pub fn m_max(&self) -> f64 {
        self.m_l_max.max(self.m_r_max)
    }
}
