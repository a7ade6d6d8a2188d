//! Truth models used by the simulator.
//!
//! Every plant is a chain of integrators closed by
//! `x^(n) = f(x) + b(x, u) Υ(u)`, with `Υ` the dead-zone. The controller never
//! sees these objects; only the simulator and its monitors do.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::controller::StateFn;
use crate::deadzone::DeadZoneSpec;
use crate::error::{Error, Result};
use crate::sliding::sgn;

/// Input gain at one state, with a flag raised when a physical limit had to
/// be clamped to keep the value real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub value: f64,
    pub clamped: bool,
}

pub trait Plant: Send + Sync {
    /// System order `n`; the state is `[x, x', …, x^(n−1)]`.
    fn order(&self) -> usize;

    fn dead_zone(&self) -> &DeadZoneSpec;

    /// Drift term `f(x)`.
    fn drift(&self, x: &[f64]) -> f64;

    /// Gain multiplying the dead-zone output `υ`. May depend on the sign of
    /// the commanded input.
    fn gain(&self, x: &[f64], u: f64) -> GainSample;

    /// Highest derivative `x^(n)` under input `u`.
    fn top_derivative(&self, x: &[f64], u: f64) -> (f64, bool) {
        let g = self.gain(x, u);
        (
            self.drift(x) + g.value * self.dead_zone().apply(u),
            g.clamped,
        )
    }

    /// Full state derivative. Returns `true` when the gain was clamped.
    fn derivative(&self, x: &[f64], u: f64, out: &mut [f64]) -> bool {
        let n = self.order();
        out[..n - 1].copy_from_slice(&x[1..n]);
        let (top, clamped) = self.top_derivative(x, u);
        out[n - 1] = top;
        clamped
    }
}

/// `x^(n) = f(x) + b(x) Υ(u)` with user-supplied `f` and `b`.
#[derive(Clone)]
pub struct GenericPlant {
    order: usize,
    f: StateFn,
    b: StateFn,
    dz: DeadZoneSpec,
}

impl fmt::Debug for GenericPlant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericPlant")
            .field("order", &self.order)
            .field("dz", &self.dz)
            .finish_non_exhaustive()
    }
}

impl GenericPlant {
    pub fn new(order: usize, f: StateFn, b: StateFn, dz: DeadZoneSpec) -> Result<Self> {
        if order < 1 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        Ok(Self { order, f, b, dz })
    }
}

impl Plant for GenericPlant {
    fn order(&self) -> usize {
        self.order
    }

    fn dead_zone(&self) -> &DeadZoneSpec {
        &self.dz
    }

    fn drift(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gain(&self, x: &[f64], _u: f64) -> GainSample {
        GainSample {
            value: (self.b)(x),
            clamped: false,
        }
    }
}

/// Physical parameters of the valve-controlled symmetric cylinder driving a
/// mass-spring-damper load. SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydraulicParams {
    /// Nominal supply pressure `P_s` (Pa).
    pub supply_pressure: f64,
    /// Relative amplitude `ε` of the supply modulation `P_s (1 + ε sin x)`.
    #[serde(default)]
    pub supply_modulation: f64,
    /// Fluid density `ρ` (kg/m³).
    pub density: f64,
    /// Discharge coefficient `C_d`.
    pub discharge_coeff: f64,
    /// Orifice area gradient `w` (m).
    pub orifice_gradient: f64,
    /// Ram area `A_p` (m²).
    pub piston_area: f64,
    /// Total leakage coefficient `C_tp` (m³/(s·Pa)).
    pub leakage_coeff: f64,
    /// Effective bulk modulus `β_e` (Pa).
    pub bulk_modulus: f64,
    /// Total compressed volume `V_t` (m³).
    pub total_volume: f64,
    /// Piston plus load mass `M_t` (kg).
    pub mass: f64,
    /// Viscous damping `B_t` (N·s/m).
    pub damping: f64,
    /// Load spring `K_s` (N/m).
    pub spring: f64,
    /// Valve dead-zone; slopes are the valve gains `k_l`, `k_r` (m/V).
    pub valve: DeadZoneSpec,
}

impl HydraulicParams {
    /// Values of the valve/cylinder test rig used throughout the examples.
    pub fn reference_rig() -> Self {
        Self {
            supply_pressure: 7.0e6,
            supply_modulation: 0.0,
            density: 850.0,
            discharge_coeff: 0.6,
            orifice_gradient: 2.5e-2,
            piston_area: 3.0e-4,
            leakage_coeff: 2.0e-12,
            bulk_modulus: 700.0e6,
            total_volume: 6.0e-5,
            mass: 250.0,
            damping: 100.0,
            spring: 75.0,
            valve: DeadZoneSpec::new(-1.1, 0.9, 1.8e-6, 2.2e-6).expect("valid valve"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("supply_pressure", self.supply_pressure),
            ("density", self.density),
            ("discharge_coeff", self.discharge_coeff),
            ("orifice_gradient", self.orifice_gradient),
            ("piston_area", self.piston_area),
            ("leakage_coeff", self.leakage_coeff),
            ("bulk_modulus", self.bulk_modulus),
            ("total_volume", self.total_volume),
            ("mass", self.mass),
            ("damping", self.damping),
            ("spring", self.spring),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(key, "must be finite and positive"));
            }
        }
        if !(self.supply_modulation.is_finite() && (0.0..1.0).contains(&self.supply_modulation)) {
            return Err(Error::invalid("supply_modulation", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// `[a0, a1, a2]` of the linear part `−aᵀx`.
    pub fn a_coeffs(&self) -> [f64; 3] {
        let vm = self.total_volume * self.mass;
        let k = 4.0 * self.bulk_modulus;
        // Leakage pole `4 β_e C_tp / V_t`, shared by a0 and a2.
        let leak = k * self.leakage_coeff / self.total_volume;
        let a0 = leak * self.spring / self.mass;
        let a1 = self.spring / self.mass
            + k * self.piston_area * self.piston_area / vm
            + k * self.leakage_coeff * self.damping / vm;
        let a2 = self.damping / self.mass + leak;
        [a0, a1, a2]
    }

    /// `4 β_e A_p C_d w / (V_t M_t)`, the pressure-independent part of the gain.
    pub fn flow_gain(&self) -> f64 {
        4.0 * self.bulk_modulus * self.piston_area / (self.total_volume * self.mass)
            * self.discharge_coeff
            * self.orifice_gradient
    }

    /// Supply pressure at displacement `x`.
    pub fn supply_at(&self, x: f64) -> f64 {
        self.supply_pressure * (1.0 + self.supply_modulation * x.sin())
    }

    /// Load pressure `(M_t ẍ + B_t ẋ + K_s x) / A_p`.
    pub fn load_pressure(&self, state: &[f64]) -> f64 {
        (self.mass * state[2] + self.damping * state[1] + self.spring * state[0]) / self.piston_area
    }

    /// Gain without the valve slope; the radicand is clamped at zero.
    fn pressure_gain(&self, state: &[f64], u: f64) -> GainSample {
        let radicand =
            (self.supply_at(state[0]) - sgn(u) * self.load_pressure(state)) / self.density;
        let clamped = radicand < 0.0;
        GainSample {
            value: self.flow_gain() * radicand.max(0.0).sqrt(),
            clamped,
        }
    }

    /// Range of the pressure gain for supply pressures in `[p_min, p_max]`
    /// and load pressures up to `load_fraction` of the supply.
    pub fn gain_range(&self, supply: [f64; 2], load_fraction: f64) -> [f64; 2] {
        let g = |p: f64| self.flow_gain() * (p / self.density).sqrt();
        [
            g(supply[0] * (1.0 - load_fraction)),
            g(supply[1] * (1.0 + load_fraction)),
        ]
    }
}

/// Third-order electro-hydraulic actuator
/// `x''' = −aᵀx + b(x, u) u − b(x, u) d(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicPlant {
    params: HydraulicParams,
    a: [f64; 3],
}

impl HydraulicPlant {
    pub fn new(params: HydraulicParams) -> Result<Self> {
        params.validate()?;
        let a = params.a_coeffs();
        Ok(Self { params, a })
    }

    pub fn params(&self) -> &HydraulicParams {
        &self.params
    }

    pub fn a(&self) -> [f64; 3] {
        self.a
    }

    /// `b(x, u)` including the valve slope `m(u)`.
    pub fn input_gain(&self, state: &[f64], u: f64) -> GainSample {
        let g = self.params.pressure_gain(state, u);
        GainSample {
            value: g.value * self.params.valve.slope(u),
            clamped: g.clamped,
        }
    }
}

impl Plant for HydraulicPlant {
    fn order(&self) -> usize {
        3
    }

    fn dead_zone(&self) -> &DeadZoneSpec {
        &self.params.valve
    }

    fn drift(&self, x: &[f64]) -> f64 {
        -(self.a[0] * x[0] + self.a[1] * x[1] + self.a[2] * x[2])
    }

    fn gain(&self, x: &[f64], u: f64) -> GainSample {
        self.params.pressure_gain(x, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn rig() -> HydraulicPlant {
        HydraulicPlant::new(HydraulicParams::reference_rig()).unwrap()
    }

    #[test]
    fn a_coefficients() {
        let [a0, a1, a2] = rig().a();
        assert!((a0 - 28.0).abs() < 1e-12);
        assert!((a1 - 16_837.633_333_333_33).abs() < 1e-8);
        assert!((a2 - 93.733_333_333_333).abs() < 1e-10);
    }

    #[test]
    fn gain_at_rest() {
        let g = rig().input_gain(&[0.0; 3], 1.5);
        let hand = 5.6e7 * 1.5e-2 * 2.2e-6 * (7.0e6f64 / 850.0).sqrt();
        assert!((g.value - hand).abs() < 1e-9 * hand);
        assert!((g.value - 167.7).abs() < 0.1);
        assert!(!g.clamped);

        let left = rig().input_gain(&[0.0; 3], -1.5).value;
        assert!((g.value / left - 2.2 / 1.8).abs() < 1e-12);
    }

    #[test]
    fn zero_radicand_and_clamp() {
        let mut p = HydraulicParams::reference_rig();
        p.piston_area = 0.5;
        p.spring = 2.0;
        let plant = HydraulicPlant::new(p).unwrap();
        // K_s x / A_p = P_s exactly
        let x = 1.75e6;
        let g = plant.input_gain(&[x, 0.0, 0.0], 1.0);
        assert_eq!(g.value, 0.0);
        assert!(!g.clamped);
        let g = plant.input_gain(&[2.0 * x, 0.0, 0.0], 1.0);
        assert_eq!(g.value, 0.0);
        assert!(g.clamped);
        // u = 0 drops the load term
        let g = plant.input_gain(&[2.0 * x, 0.0, 0.0], 0.0);
        assert!(g.value > 0.0 && !g.clamped);
    }

    #[test]
    fn dead_band_at_rest_is_equilibrium() {
        let mut out = [1.0; 3];
        rig().derivative(&[0.0; 3], 0.5, &mut out);
        assert_eq!(out, [0.0; 3]);
    }

    #[test]
    fn disturbance_form_matches_dead_zone_form() {
        let plant = rig();
        let dz = plant.params().valve;
        let state = [0.2, 0.03, -0.01];
        for u in [-4.0, -1.1, -0.3, 0.0, 0.9, 2.5, 6.0] {
            let b = plant.input_gain(&state, u).value;
            let split = plant.drift(&state) + b * u - b * dz.disturbance(u);
            let (ours, _) = plant.top_derivative(&state, u);
            assert!((split - ours).abs() <= 1e-9 * (1.0 + split.abs()), "u={u}");
        }
    }

    #[test]
    fn autonomous_branch_is_linear_relaxation() {
        let plant = rig();
        let state = [0.1, -0.2, 0.3];
        let mut out = [0.0; 3];
        plant.derivative(&state, 0.0, &mut out);
        let a = plant.a();
        assert_eq!(out[0], -0.2);
        assert_eq!(out[1], 0.3);
        assert_eq!(out[2], -(a[0] * 0.1 - a[1] * 0.2 + a[2] * 0.3));
    }

    #[test]
    fn modulated_supply_stays_in_band() {
        let mut p = HydraulicParams::reference_rig();
        p.supply_modulation = 0.2;
        for k in 0..10_000 {
            let x = -50.0 + k as f64 * 0.01;
            let ps = p.supply_at(x);
            assert!((5.6e6 - 1e-6..=8.4e6 + 1e-6).contains(&ps));
        }
    }

    #[test]
    fn gain_positive_outside_band() {
        let plant = rig();
        for u in [-3.0, -1.2, 1.0, 4.0] {
            assert!(plant.input_gain(&[0.1, 0.05, 0.0], u).value > 0.0);
        }
    }

    // Characteristic polynomial p³ + a2 p² + a1 p + a0 is Hurwitz
    // (Routh: all positive and a2 a1 > a0), so the unforced load decays.
    #[test]
    fn unforced_dynamics_are_stable() {
        let [a0, a1, a2] = rig().a();
        assert!(a0 > 0.0 && a1 > 0.0 && a2 > 0.0);
        assert!(a2 * a1 > a0);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let mut p = HydraulicParams::reference_rig();
        p.mass = 0.0;
        assert!(HydraulicPlant::new(p).is_err());
        let mut p = HydraulicParams::reference_rig();
        p.supply_modulation = 1.5;
        assert!(HydraulicPlant::new(p).is_err());
    }

    #[test]
    fn generic_integrator_chain() {
        let dz = DeadZoneSpec::new(-1e-300, 1e-300, 1.0, 1.0).unwrap();
        let plant = GenericPlant::new(3, Arc::new(|_| 0.0), Arc::new(|_| 1.0), dz).unwrap();
        let mut out = [0.0; 3];
        plant.derivative(&[1.0, 2.0, 3.0], 0.7, &mut out);
        assert_eq!(out, [2.0, 3.0, 0.7]);
        assert_eq!(plant.dead_zone().apply(-0.25), -0.25);
    }
}
