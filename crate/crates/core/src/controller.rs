//! The adaptive fuzzy sliding mode control law.
//!
//! ```text
//! û = b̂m⁻¹ (−f̂(x) + x_d^(n) − c̄ᵀx̃)
//! u = û + d̂(û) − K φ(s, φ)
//! K = β b̂m⁻¹ (η + F(x)) + δ + |d̂(û)| + (β − 1)|û|
//! ```
//!
//! With `φ(s, φ) = sgn(s)` the law is discontinuous; the saturation and tanh
//! interpolations trade exact tracking for a boundary layer of width `φ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyCompensator;
use crate::sliding::{SurfaceSpec, SwitchingFn};

/// Scalar function of the state vector.
pub type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// What the controller knows about the plant.
#[derive(Clone)]
pub struct ModelEstimate {
    drift: StateFn,
    drift_bound: StateFn,
    bm_hat: f64,
    beta: f64,
}

impl fmt::Debug for ModelEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelEstimate")
            .field("bm_hat", &self.bm_hat)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

impl ModelEstimate {
    /// `drift` is `f̂`, `drift_bound` is `F ≥ |f̂ − f|`, `bm_hat` the estimate
    /// of the product of input gain and dead-zone slope, `beta ≥ 1` the
    /// ratio bounding `b̂m / bm` from both sides.
    pub fn new(drift: StateFn, drift_bound: StateFn, bm_hat: f64, beta: f64) -> Result<Self> {
        if !(bm_hat.is_finite() && bm_hat > 0.0) {
            return Err(Error::invalid("bm_hat", "must be finite and positive"));
        }
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::invalid("beta", "must be finite and at least 1"));
        }
        Ok(Self {
            drift,
            drift_bound,
            bm_hat,
            beta,
        })
    }

    /// Geometric-mean estimate `b̂m = √(b_max m_max b_min m_min)` with
    /// `β = √(b_max m_max / (b_min m_min))`.
    pub fn from_bounds(
        drift: StateFn,
        drift_bound: StateFn,
        b: [f64; 2],
        m: [f64; 2],
    ) -> Result<Self> {
        let (lo, hi) = product_range(b, m)?;
        Self::new(drift, drift_bound, (lo * hi).sqrt(), (hi / lo).sqrt())
    }

    /// Estimate with a given nominal `b̂m`; `β` is the smallest ratio that
    /// still satisfies `β⁻¹ ≤ b̂m / bm ≤ β` over the bounds.
    pub fn nominal(
        drift: StateFn,
        drift_bound: StateFn,
        bm_hat: f64,
        b: [f64; 2],
        m: [f64; 2],
    ) -> Result<Self> {
        let (lo, hi) = product_range(b, m)?;
        if !(bm_hat.is_finite() && bm_hat > 0.0) {
            return Err(Error::invalid("bm_hat", "must be finite and positive"));
        }
        let beta = (hi / bm_hat).max(bm_hat / lo).max(1.0);
        Self::new(drift, drift_bound, bm_hat, beta)
    }

    pub fn bm_hat(&self) -> f64 {
        self.bm_hat
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn drift(&self, x: &[f64]) -> f64 {
        (self.drift)(x)
    }

    pub fn drift_bound(&self, x: &[f64]) -> f64 {
        (self.drift_bound)(x)
    }
}

fn product_range(b: [f64; 2], m: [f64; 2]) -> Result<(f64, f64)> {
    let ok = |[lo, hi]: [f64; 2]| lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi;
    if !ok(b) {
        return Err(Error::invalid("b_bounds", "must satisfy 0 < min <= max"));
    }
    if !ok(m) {
        return Err(Error::invalid("m_bounds", "must satisfy 0 < min <= max"));
    }
    Ok((b[0] * m[0], b[1] * m[1]))
}

/// How the switching gain is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainMode {
    /// Recomputed every tick from the current state.
    Online,
    /// Held at a fixed value.
    Frozen(f64),
}

#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub model: ModelEstimate,
    pub surface: SurfaceSpec,
    pub switching: SwitchingFn,
    /// Reaching margin `η > 0`.
    pub eta: f64,
    /// Dead-zone disturbance bound `δ ≥ 0`.
    pub delta_bound: f64,
    pub compensator_on: bool,
    pub gain: GainMode,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::invalid("eta", "must be finite and positive"));
        }
        if !(self.delta_bound.is_finite() && self.delta_bound >= 0.0) {
            return Err(Error::invalid(
                "delta_bound",
                "must be finite and non-negative",
            ));
        }
        if let GainMode::Frozen(k) = self.gain {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::invalid("frozen_gain", "must be finite and positive"));
            }
        }
        Ok(())
    }
}

/// Desired trajectory and its derivatives `[x_d, x_d', …, x_d^(n)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample {
    pub derivs: Vec<f64>,
}

impl ReferenceSample {
    pub fn new(derivs: Vec<f64>) -> Self {
        Self { derivs }
    }

    /// `x_d^(n)`.
    pub fn top(&self) -> f64 {
        *self
            .derivs
            .last()
            .expect("reference has at least one entry")
    }
}

/// Intermediate quantities of one control evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub s: f64,
    pub u_hat: f64,
    pub d_hat: f64,
    pub gain: f64,
    pub switch: f64,
}

/// Stateless evaluator of the control law; the adaptive part lives in the
/// [`FuzzyCompensator`] passed to each call.
#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
}

impl Controller {
    pub fn new(cfg: ControllerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Tracking error vector `x̃ = x − x_d` (first `n` entries of the reference).
    pub fn tracking_error(&self, x: &[f64], reference: &ReferenceSample) -> Result<Vec<f64>> {
        let n = self.cfg.surface.order();
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
        if reference.derivs.len() != n + 1 {
            return Err(Error::Dimension {
                expected: n + 1,
                got: reference.derivs.len(),
            });
        }
        Ok(x.iter()
            .zip(&reference.derivs)
            .map(|(a, b)| a - b)
            .collect())
    }

    /// `û = b̂m⁻¹ (−f̂(x) + x_d^(n) − c̄ᵀx̃)`.
    pub fn equivalent_control(&self, x: &[f64], reference: &ReferenceSample) -> Result<f64> {
        let err = self.tracking_error(x, reference)?;
        self.equivalent_from_error(x, &err, reference)
    }

    fn equivalent_from_error(
        &self,
        x: &[f64],
        err: &[f64],
        reference: &ReferenceSample,
    ) -> Result<f64> {
        let f_hat = self.cfg.model.drift(x);
        if !f_hat.is_finite() {
            return Err(Error::NonFinite {
                what: "drift estimate",
            });
        }
        let feedback = self.cfg.surface.sdot_feedback(err)?;
        let u_hat = (-f_hat + reference.top() - feedback) / self.cfg.model.bm_hat();
        if !u_hat.is_finite() {
            return Err(Error::NonFinite {
                what: "equivalent control",
            });
        }
        Ok(u_hat)
    }

    /// Switching gain `K`. Returns the frozen value when configured so.
    pub fn robust_gain(&self, x: &[f64], u_hat: f64, d_hat: f64) -> f64 {
        match self.cfg.gain {
            GainMode::Frozen(k) => k,
            GainMode::Online => {
                let m = &self.cfg.model;
                let beta = m.beta();
                beta / m.bm_hat() * (self.cfg.eta + m.drift_bound(x))
                    + self.cfg.delta_bound
                    + d_hat.abs()
                    + (beta - 1.0) * u_hat.abs()
            }
        }
    }

    /// Control output `u = û + d̂(û) − K φ(s, φ)` for the current state.
    pub fn control(
        &self,
        comp: &FuzzyCompensator,
        x: &[f64],
        reference: &ReferenceSample,
    ) -> Result<(f64, Diagnostics)> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "state" });
        }
        let err = self.tracking_error(x, reference)?;
        let s = self.cfg.surface.sliding_variable(&err)?;
        let u_hat = self.equivalent_from_error(x, &err, reference)?;
        let d_hat = if self.cfg.compensator_on {
            comp.estimate(u_hat)?
        } else {
            0.0
        };
        let gain = self.robust_gain(x, u_hat, d_hat);
        let switch = self.cfg.switching.eval(s);
        let u = u_hat + d_hat - gain * switch;
        Ok((
            u,
            Diagnostics {
                s,
                u_hat,
                d_hat,
                gain,
                switch,
            },
        ))
    }

    /// One controller tick: compute `u` from the current consequents, then
    /// adapt them over `dt`.
    pub fn step(
        &self,
        comp: &mut FuzzyCompensator,
        x: &[f64],
        reference: &ReferenceSample,
        dt: f64,
    ) -> Result<(f64, Diagnostics)> {
        let (u, diag) = self.control(comp, x, reference)?;
        if self.cfg.compensator_on {
            comp.adapt(diag.s, diag.u_hat, dt)?;
        }
        Ok((u, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{MembershipFamily, DEFAULT_CENTERS};
    use crate::sliding::SwitchingKind;

    fn zero() -> StateFn {
        Arc::new(|_| 0.0)
    }

    fn cfg(bm_hat: f64, beta: f64, kind: SwitchingKind) -> ControllerConfig {
        ControllerConfig {
            model: ModelEstimate::new(zero(), zero(), bm_hat, beta).unwrap(),
            surface: SurfaceSpec::new(3, 8.0).unwrap(),
            switching: SwitchingFn::new(kind, 1.0).unwrap(),
            eta: 0.1,
            delta_bound: 1.1,
            compensator_on: true,
            gain: GainMode::Online,
        }
    }

    fn comp(gamma: f64) -> FuzzyCompensator {
        FuzzyCompensator::new(
            MembershipFamily::from_centers(&DEFAULT_CENTERS).unwrap(),
            gamma,
        )
        .unwrap()
    }

    fn reference() -> ReferenceSample {
        ReferenceSample::new(vec![0.1, 0.2, 0.3, 4.0])
    }

    #[test]
    fn equivalent_control_examples() {
        let ctl = Controller::new(cfg(2.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let r = reference();
        let on_ref = [0.1, 0.2, 0.3];
        assert_eq!(ctl.equivalent_control(&on_ref, &r).unwrap(), 2.0);

        let doubled = Controller::new(cfg(4.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let x = [0.3, -0.1, 0.7];
        let a = ctl.equivalent_control(&x, &r).unwrap();
        let b = doubled.equivalent_control(&x, &r).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12);

        // f̂ chosen to cancel x_d^(n) − c̄ᵀx̃ exactly
        let mut c = cfg(2.0, 1.0, SwitchingKind::Saturation);
        let surface = c.surface.clone();
        let rr = r.clone();
        c.model = ModelEstimate::new(
            Arc::new(move |x: &[f64]| {
                let e: Vec<f64> = x.iter().zip(&rr.derivs).map(|(a, b)| a - b).collect();
                rr.top() - surface.sdot_feedback(&e).unwrap()
            }),
            zero(),
            2.0,
            1.0,
        )
        .unwrap();
        let ctl = Controller::new(c).unwrap();
        assert!(ctl.equivalent_control(&x, &r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_finite_drift_is_fault() {
        let mut c = cfg(2.0, 1.0, SwitchingKind::Saturation);
        c.model = ModelEstimate::new(Arc::new(|_| f64::NAN), zero(), 2.0, 1.0).unwrap();
        let ctl = Controller::new(c).unwrap();
        assert!(matches!(
            ctl.equivalent_control(&[0.0; 3], &reference()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn gain_examples() {
        let mut c = cfg(150.0, 1.0, SwitchingKind::Saturation);
        c.delta_bound = 0.0;
        let ctl = Controller::new(c).unwrap();
        assert!((ctl.robust_gain(&[0.0; 3], 5.0, 0.0) - 0.1 / 150.0).abs() < 1e-15);

        let ctl = Controller::new(cfg(150.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let k = ctl.robust_gain(&[0.0; 3], -7.3, 0.0);
        assert!((k - (1.1 + 0.1 / 150.0)).abs() < 1e-14);

        let ctl = Controller::new(cfg(150.0, 1.2, SwitchingKind::Saturation)).unwrap();
        let base = ctl.robust_gain(&[0.0; 3], 1.0, 0.5);
        assert!(ctl.robust_gain(&[0.0; 3], 2.0, 0.5) >= base);
        assert!(ctl.robust_gain(&[0.0; 3], 1.0, -0.9) >= base);
    }

    #[test]
    fn frozen_gain_is_returned() {
        let mut c = cfg(150.0, 1.2, SwitchingKind::Saturation);
        c.gain = GainMode::Frozen(3.5);
        let ctl = Controller::new(c).unwrap();
        assert_eq!(ctl.robust_gain(&[1.0; 3], 100.0, 1.0), 3.5);
        let mut bad = cfg(150.0, 1.2, SwitchingKind::Saturation);
        bad.gain = GainMode::Frozen(0.0);
        assert!(Controller::new(bad).is_err());
    }

    #[test]
    fn control_degenerate_forms() {
        let ctl = Controller::new(cfg(2.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let r = reference();
        // s = 0: x̃ = 0
        let (u, d) = ctl.control(&comp(1.2), &[0.1, 0.2, 0.3], &r).unwrap();
        assert_eq!(d.s, 0.0);
        assert_eq!(u, d.u_hat);

        let x = [0.12, 0.2, 0.3];
        let (u, d) = ctl.control(&comp(1.2), &x, &r).unwrap();
        assert!((u - (d.u_hat - d.gain * (d.s / 1.0).clamp(-1.0, 1.0))).abs() < 1e-12);
    }

    #[test]
    fn sign_switching_subtracts_full_gain() {
        let ctl = Controller::new(cfg(2.0, 1.0, SwitchingKind::Sign)).unwrap();
        let consequents = vec![0.4; 7];
        let fam = MembershipFamily::from_centers(&DEFAULT_CENTERS).unwrap();
        let comp = FuzzyCompensator::with_consequents(fam, consequents, 1.2).unwrap();
        let (u, d) = ctl.control(&comp, &[0.5, 0.2, 0.3], &reference()).unwrap();
        assert!(d.s > 0.0);
        assert!((u - (d.u_hat + 0.4 - d.gain)).abs() < 1e-12);
    }

    #[test]
    fn compensator_off_ignores_consequents() {
        let mut c = cfg(2.0, 1.0, SwitchingKind::Saturation);
        c.compensator_on = false;
        let ctl = Controller::new(c).unwrap();
        let fam = MembershipFamily::from_centers(&DEFAULT_CENTERS).unwrap();
        let mut comp = FuzzyCompensator::with_consequents(fam, vec![0.4; 7], 1.2).unwrap();
        let before = comp.clone();
        let x = [0.12, 0.2, 0.3];
        let (u, d) = ctl.step(&mut comp, &x, &reference(), 0.0025).unwrap();
        assert_eq!(d.d_hat, 0.0);
        assert!((u - (d.u_hat - d.gain * d.switch)).abs() < 1e-12);
        assert_eq!(comp, before);
    }

    #[test]
    fn step_adapts_after_output() {
        let ctl = Controller::new(cfg(2.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let r = reference();
        let x = [0.12, 0.2, 0.3];

        let mut frozen = comp(0.0);
        let (u0, _) = ctl.step(&mut frozen, &x, &r, 0.0025).unwrap();
        assert_eq!(frozen, comp(0.0));
        assert_eq!(u0, ctl.control(&comp(0.0), &x, &r).unwrap().0);

        let mut c = comp(1.2);
        let (u1, d1) = ctl.step(&mut c, &x, &r, 0.0025).unwrap();
        assert_eq!(u1, u0);
        let (u2, _) = ctl.step(&mut c, &x, &r, 0.0025).unwrap();
        // û = 2 sits in the right shoulder, so d̂ moved by −γ s dt.
        let expected = -1.2 * d1.s * 0.0025;
        assert!((c.estimate(d1.u_hat).unwrap() - 2.0 * expected).abs() < 1e-15);
        assert!(u2 != u1);
    }

    #[test]
    fn on_surface_leaves_compensator() {
        let ctl = Controller::new(cfg(2.0, 1.0, SwitchingKind::Saturation)).unwrap();
        let mut c = comp(1.2);
        ctl.step(&mut c, &[0.1, 0.2, 0.3], &reference(), 0.0025)
            .unwrap();
        assert_eq!(c, comp(1.2));
    }
}
