use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::Controller;
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyCompensator;
use crate::plant::Plant;
use crate::sliding::dot;

use super::integrate::Rk4;
use super::reference::SineReference;
use super::trace::{fault, Sample, SimTrace};

/// Run length and the two sampling rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    /// Simulated time (s).
    pub duration: f64,
    /// Controller rate (Hz); also the trace rate.
    pub controller_rate: f64,
    /// Plant integration rate (Hz); an integer multiple of the controller rate.
    pub plant_rate: f64,
}

impl Timing {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid("duration", "must be finite and positive"));
        }
        if !(self.controller_rate.is_finite() && self.controller_rate > 0.0) {
            return Err(Error::invalid(
                "controller_rate",
                "must be finite and positive",
            ));
        }
        if !(self.plant_rate.is_finite() && self.plant_rate > 0.0) {
            return Err(Error::invalid("plant_rate", "must be finite and positive"));
        }
        let ratio = self.plant_rate / self.controller_rate;
        if ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::invalid(
                "plant_rate",
                "must be an integer multiple of controller_rate",
            ));
        }
        Ok(())
    }

    pub fn substeps(&self) -> usize {
        (self.plant_rate / self.controller_rate).round() as usize
    }

    pub fn ticks(&self) -> usize {
        (self.duration * self.controller_rate).round() as usize
    }

    pub fn controller_dt(&self) -> f64 {
        1.0 / self.controller_rate
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state diverged at t = {t} s")]
    Diverged { t: f64, trace: Box<SimTrace> },
    #[error("controller fault at t = {t} s: {source}")]
    Controller {
        t: f64,
        source: Error,
        trace: Box<SimTrace>,
    },
    #[error(transparent)]
    Config(#[from] Error),
}

impl SimError {
    /// Samples recorded before the failure, if any.
    pub fn partial_trace(&self) -> Option<&SimTrace> {
        match self {
            SimError::Diverged { trace, .. } | SimError::Controller { trace, .. } => Some(trace),
            SimError::Config(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trace: SimTrace,
    pub final_state: Vec<f64>,
    pub final_consequents: Vec<f64>,
}

/// Closed loop of a truth plant and the adaptive controller.
#[derive(Debug, Clone)]
pub struct Simulation<P> {
    pub plant: P,
    pub controller: Controller,
    pub compensator: FuzzyCompensator,
    pub reference: SineReference,
    pub timing: Timing,
    pub initial_state: Vec<f64>,
}

impl<P: Plant> Simulation<P> {
    pub fn validate(&self) -> Result<()> {
        self.timing.validate()?;
        let n = self.plant.order();
        if self.controller.config().surface.order() != n {
            return Err(Error::invalid(
                "lambda",
                "surface order differs from plant order",
            ));
        }
        if self.initial_state.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.initial_state.len(),
            });
        }
        if self.initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial_state", "must be finite"));
        }
        Ok(())
    }

    /// Runs the loop: control is computed at each controller tick and held
    /// while the plant advances by `substeps` fourth-order Runge–Kutta steps.
    pub fn run(&self) -> Result<SimOutput, SimError> {
        self.validate()?;
        let n = self.plant.order();
        let dt = self.timing.controller_dt();
        let substeps = self.timing.substeps();
        let h = dt / substeps as f64;
        let ticks = self.timing.ticks();
        let cfg = self.controller.config();
        let dz = *self.plant.dead_zone();

        let mut comp = self.compensator.clone();
        let mut x = self.initial_state.clone();
        let mut rk = Rk4::new(n);
        let mut trace = SimTrace {
            dt,
            samples: Vec::with_capacity(ticks),
        };

        for k in 0..ticks {
            let t = k as f64 * dt;
            let reference = self.reference.sample(t, n);
            let consequents = comp.consequents().to_vec();
            let (u, diag) = match self.controller.step(&mut comp, &x, &reference, dt) {
                Ok(out) => out,
                Err(source) => {
                    return Err(SimError::Controller {
                        t,
                        source,
                        trace: Box::new(trace),
                    })
                }
            };

            let err: Vec<f64> = x
                .iter()
                .zip(&reference.derivs)
                .map(|(a, b)| a - b)
                .collect();
            let gain = self.plant.gain(&x, u);
            let (top, _) = self.plant.top_derivative(&x, u);
            let s_dot = top - reference.top() + dot(cfg.surface.c_bar(), &err);
            let mut flags = if gain.clamped { fault::CAVITATION } else { 0 };
            let state = x.clone();

            let plant = &self.plant;
            for _ in 0..substeps {
                rk.step(&mut x, h, |state, dx| {
                    if plant.derivative(state, u, dx) {
                        flags |= fault::CAVITATION;
                    }
                });
            }

            trace.samples.push(Sample {
                t,
                state,
                reference: reference.derivs,
                err,
                s: diag.s,
                s_dot,
                u,
                u_hat: diag.u_hat,
                upsilon: dz.apply(u),
                d_hat: diag.d_hat,
                d: dz.disturbance(u),
                gain: diag.gain,
                bm: gain.value * dz.slope(u),
                consequents,
                v: 0.0,
                fault: flags,
            });

            if x.iter().any(|v| !v.is_finite()) {
                return Err(SimError::Diverged {
                    t: t + dt,
                    trace: Box::new(trace),
                });
            }
        }

        let final_consequents = comp.consequents().to_vec();
        fill_surrogate(&mut trace, &comp, &final_consequents);
        Ok(SimOutput {
            trace,
            final_state: x,
            final_consequents,
        })
    }
}

/// Fills `V = ½ s² + (bm / 2γ) |D̂ − D̂*|²` with `D̂*` taken as the final
/// consequents of the run. Without adaptation only `½ s²` remains.
fn fill_surrogate(trace: &mut SimTrace, comp: &FuzzyCompensator, d_star: &[f64]) {
    let gamma = comp.gamma();
    for s in &mut trace.samples {
        let mut v = 0.5 * s.s * s.s;
        if gamma > 0.0 {
            let dist: f64 = s
                .consequents
                .iter()
                .zip(d_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            v += s.bm / (2.0 * gamma) * dist;
        }
        s.v = v;
    }
}
