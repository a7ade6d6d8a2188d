//! Zero-order TSK estimator for the dead-zone term `d(u)`.
//!
//! Rule `r` reads "if û is Û_r then d̂ = D̂_r". The output is the normalized
//! firing-strength average `d̂(û) = D̂ᵀ Ψ(û)`, and the consequents follow the
//! adaptation law `dD̂/dt = −γ s Ψ(û)`.

use crate::error::{Error, Result};

/// Membership function of a single rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Membership {
    /// Full membership up to `top`, falling to zero at `foot > top`.
    ShoulderLeft {
        top: f64,
        foot: f64,
    },
    Triangular {
        left: f64,
        peak: f64,
        right: f64,
    },
    /// Zero up to `foot`, full membership from `top > foot` onward.
    ShoulderRight {
        foot: f64,
        top: f64,
    },
    /// Fires everywhere; used when the family has a single rule.
    Universal,
}

impl Membership {
    #[inline]
    pub fn grade(&self, x: f64) -> f64 {
        match *self {
            Membership::ShoulderLeft { top, foot } => {
                if x <= top {
                    1.0
                } else if x >= foot {
                    0.0
                } else {
                    (foot - x) / (foot - top)
                }
            }
            Membership::Triangular { left, peak, right } => {
                if x <= left || x >= right {
                    0.0
                } else if x <= peak {
                    (x - left) / (peak - left)
                } else {
                    (right - x) / (right - peak)
                }
            }
            Membership::ShoulderRight { foot, top } => {
                if x >= top {
                    1.0
                } else if x <= foot {
                    0.0
                } else {
                    (x - foot) / (top - foot)
                }
            }
            Membership::Universal => 1.0,
        }
    }
}

/// Centers used for the hydraulic valve example, in volts.
pub const DEFAULT_CENTERS: [f64; 7] = [-0.5, -0.1, -0.05, 0.0, 0.05, 0.1, 0.5];

/// Strong fuzzy partition over a sorted set of centers: triangles with feet
/// on the neighbouring centers, trapezoidal shoulders on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFamily {
    centers: Vec<f64>,
    sets: Vec<Membership>,
}

impl MembershipFamily {
    pub fn from_centers(centers: &[f64]) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("centers", "at least one center is required"));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("centers", "centers must be finite"));
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "centers",
                "centers must be strictly increasing",
            ));
        }
        let n = centers.len();
        let sets = if n == 1 {
            vec![Membership::Universal]
        } else {
            (0..n)
                .map(|r| {
                    if r == 0 {
                        Membership::ShoulderLeft {
                            top: centers[0],
                            foot: centers[1],
                        }
                    } else if r == n - 1 {
                        Membership::ShoulderRight {
                            foot: centers[n - 2],
                            top: centers[n - 1],
                        }
                    } else {
                        Membership::Triangular {
                            left: centers[r - 1],
                            peak: centers[r],
                            right: centers[r + 1],
                        }
                    }
                })
                .collect()
        };
        Ok(Self {
            centers: centers.to_vec(),
            sets,
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sets(&self) -> &[Membership] {
        &self.sets
    }

    /// Writes the normalized firing vector `Ψ(û)` into `out`.
    pub fn firing_weights_into(&self, u_hat: f64, out: &mut [f64]) -> Result<()> {
        if out.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: out.len(),
            });
        }
        let mut total = 0.0;
        for (w, set) in out.iter_mut().zip(&self.sets) {
            *w = set.grade(u_hat);
            total += *w;
        }
        if !(total > 0.0) {
            return Err(Error::DegeneratePartition { input: u_hat });
        }
        for w in out.iter_mut() {
            *w /= total;
        }
        Ok(())
    }

    /// Normalized firing vector `Ψ(û)`.
    pub fn firing_weights(&self, u_hat: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.firing_weights_into(u_hat, &mut out)?;
        Ok(out)
    }
}

/// Adaptive TSK compensator: membership family, consequents `D̂` and rate `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyCompensator {
    family: MembershipFamily,
    d_hat: Vec<f64>,
    gamma: f64,
    psi: Vec<f64>,
}

impl FuzzyCompensator {
    /// Compensator with all consequents at zero.
    pub fn new(family: MembershipFamily, gamma: f64) -> Result<Self> {
        let d_hat = vec![0.0; family.len()];
        Self::with_consequents(family, d_hat, gamma)
    }

    pub fn with_consequents(family: MembershipFamily, d_hat: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid("gamma", "must be finite and non-negative"));
        }
        if d_hat.len() != family.len() {
            return Err(Error::Dimension {
                expected: family.len(),
                got: d_hat.len(),
            });
        }
        if d_hat.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("d_hat", "consequents must be finite"));
        }
        let psi = vec![0.0; family.len()];
        Ok(Self {
            family,
            d_hat,
            gamma,
            psi,
        })
    }

    pub fn family(&self) -> &MembershipFamily {
        &self.family
    }

    pub fn consequents(&self) -> &[f64] {
        &self.d_hat
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `d̂(û) = D̂ᵀ Ψ(û)`.
    pub fn estimate(&self, u_hat: f64) -> Result<f64> {
        let psi = self.family.firing_weights(u_hat)?;
        Ok(crate::sliding::dot(&self.d_hat, &psi))
    }

    /// One explicit-Euler step of `dD̂/dt = −γ s Ψ(û)`.
    ///
    /// Non-finite `s` or `û` leave the consequents untouched and return an
    /// error so the caller can flag the sample.
    pub fn adapt(&mut self, s: f64, u_hat: f64, dt: f64) -> Result<()> {
        if !s.is_finite() {
            return Err(Error::NonFinite {
                what: "sliding variable",
            });
        }
        if !u_hat.is_finite() {
            return Err(Error::NonFinite {
                what: "equivalent control",
            });
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if self.gamma == 0.0 || s == 0.0 {
            return Ok(());
        }
        self.family.firing_weights_into(u_hat, &mut self.psi)?;
        let rate = self.gamma * s * dt;
        for (d, &psi) in self.d_hat.iter_mut().zip(&self.psi) {
            if psi > 0.0 {
                *d -= rate * psi;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn family() -> MembershipFamily {
        MembershipFamily::from_centers(&DEFAULT_CENTERS).unwrap()
    }

    #[test]
    fn one_hot_at_centers() {
        let fam = family();
        for (r, &c) in DEFAULT_CENTERS.iter().enumerate() {
            let psi = fam.firing_weights(c).unwrap();
            for (k, &p) in psi.iter().enumerate() {
                assert_eq!(p, if k == r { 1.0 } else { 0.0 }, "center {c}, rule {k}");
            }
        }
    }

    #[test]
    fn midway_splits_evenly() {
        let psi = family().firing_weights(0.3).unwrap();
        assert!((psi[5] - 0.5).abs() < 1e-12);
        assert!((psi[6] - 0.5).abs() < 1e-12);
        let psi = family().firing_weights(-0.025).unwrap();
        assert!((psi[2] - 0.5).abs() < 1e-12);
        assert!((psi[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shoulders_saturate_outside() {
        let fam = family();
        assert_eq!(fam.firing_weights(-40.0).unwrap()[0], 1.0);
        assert_eq!(fam.firing_weights(6.5).unwrap()[6], 1.0);
    }

    #[test]
    fn rejects_unsorted_centers() {
        assert!(MembershipFamily::from_centers(&[0.0, 0.0]).is_err());
        assert!(MembershipFamily::from_centers(&[1.0, 0.0]).is_err());
        assert!(MembershipFamily::from_centers(&[]).is_err());
        assert_eq!(
            MembershipFamily::from_centers(&[0.3])
                .unwrap()
                .firing_weights(9.0)
                .unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn estimate_examples() {
        let zero = FuzzyCompensator::new(family(), 1.2).unwrap();
        assert_eq!(zero.estimate(0.07).unwrap(), 0.0);
        let flat = FuzzyCompensator::with_consequents(family(), vec![0.8; 7], 1.2).unwrap();
        assert!((flat.estimate(0.07).unwrap() - 0.8).abs() < 1e-15);
        let ramp: Vec<f64> = (0..7).map(|r| r as f64).collect();
        let comp = FuzzyCompensator::with_consequents(family(), ramp, 1.2).unwrap();
        assert_eq!(comp.estimate(0.05).unwrap(), 4.0);
    }

    #[test]
    fn adapt_examples() {
        let mut comp = FuzzyCompensator::new(family(), 1.2).unwrap();
        comp.adapt(0.0, 0.05, 0.0025).unwrap();
        assert!(comp.consequents().iter().all(|&d| d == 0.0));

        let mut smc = FuzzyCompensator::new(family(), 0.0).unwrap();
        smc.adapt(3.0, 0.05, 0.0025).unwrap();
        assert!(smc.consequents().iter().all(|&d| d == 0.0));

        comp.adapt(1.0, 0.05, 0.0025).unwrap();
        assert!((comp.consequents()[4] + 0.003).abs() < 1e-15);
        assert_eq!(comp.consequents().iter().filter(|&&d| d != 0.0).count(), 1);
    }

    #[test]
    fn adapt_rejects_non_finite() {
        let mut comp = FuzzyCompensator::new(family(), 1.2).unwrap();
        let before = comp.clone();
        assert!(comp.adapt(f64::NAN, 0.0, 0.0025).is_err());
        assert!(comp.adapt(1.0, f64::INFINITY, 0.0025).is_err());
        assert!(comp.adapt(1.0, 0.0, 0.0).is_err());
        assert_eq!(comp, before);
    }

    proptest! {
        #[test]
        fn partition_of_unity(u in -10.0..10.0f64) {
            let psi = family().firing_weights(u).unwrap();
            let sum: f64 = psi.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(psi.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }

        #[test]
        fn estimate_bounded_by_consequents(
            d in prop::collection::vec(-3.0..3.0f64, 7),
            u in -2.0..2.0f64,
        ) {
            let comp = FuzzyCompensator::with_consequents(family(), d.clone(), 1.0).unwrap();
            let est = comp.estimate(u).unwrap();
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(est >= lo - 1e-12 && est <= hi + 1e-12);
        }

        #[test]
        fn adapt_touches_only_firing_rules(
            s in -5.0..5.0f64, u in -1.0..1.0f64, gamma in 0.0..5.0f64,
        ) {
            let dt = 0.0025;
            let mut comp = FuzzyCompensator::new(family(), gamma).unwrap();
            let psi = family().firing_weights(u).unwrap();
            comp.adapt(s, u, dt).unwrap();
            let mut total = 0.0;
            for (d, p) in comp.consequents().iter().zip(&psi) {
                if *p == 0.0 {
                    prop_assert_eq!(*d, 0.0);
                }
                total += d.abs();
            }
            prop_assert!(total <= gamma * s.abs() * dt * (1.0 + 1e-12));
        }

        #[test]
        fn estimate_is_continuous(
            d in prop::collection::vec(-3.0..3.0f64, 7),
            u in -1.0..1.0f64,
        ) {
            let comp = FuzzyCompensator::with_consequents(family(), d.clone(), 1.0).unwrap();
            let h = 1e-9;
            // slope is at most spread / smallest center gap
            let spread = 6.0;
            let jump = (comp.estimate(u + h).unwrap() - comp.estimate(u).unwrap()).abs();
            prop_assert!(jump <= spread / 0.05 * h * 1.01 + 1e-12);
        }
    }
}
