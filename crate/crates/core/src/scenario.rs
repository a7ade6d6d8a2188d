//! Scenario files: every number needed to reproduce a closed-loop run.
//!
//! Scenarios are TOML documents with the sections `[plant]`, `[plant.valve]`,
//! `[estimate]`, `[controller]`, `[reference]` and `[sim]`. Unknown keys are
//! rejected, and every error carries the dotted path of the offending key.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{Controller, ControllerConfig, GainMode, ModelEstimate};
use crate::deadzone::DeadZoneBounds;
use crate::error::Error;
use crate::fuzzy::{FuzzyCompensator, MembershipFamily, DEFAULT_CENTERS};
use crate::plant::{HydraulicParams, HydraulicPlant};
use crate::sim::{
    monitors, Metrics, MonitorReport, MonitorSpec, SimError, SimOutput, Simulation, SineReference,
    Timing,
};
use crate::sliding::{SurfaceSpec, SwitchingFn, SwitchingKind};

const CASE1: &str = include_str!("../presets/case1.toml");
const CASE2: &str = include_str!("../presets/case2.toml");

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["case1", "case2"];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{path}`: {message}")]
    Key { path: String, message: String },
}

/// What the controller is told about the rig.
/// Failure of [`Scenario::run`].
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A finished run with its summary.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: SimOutput,
    pub metrics: Metrics,
    pub monitors: Option<MonitorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSettings {
    /// Supply pressure `P̂_s` used for `b̂` (Pa).
    pub supply_pressure: f64,
    /// Nominal valve gain `k̂_v` (m/V). Without it `b̂m` is the geometric
    /// mean of the gain bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valve_gain: Option<f64>,
    /// Range `[min, max]` the true supply pressure may take (Pa).
    pub supply_range: [f64; 2],
    /// Largest load pressure, as a fraction of supply, covered by the gain bounds.
    pub load_fraction: f64,
    /// Constant bound `F` on the drift-model error.
    #[serde(default)]
    pub drift_bound: f64,
    /// Bounds on the unknown dead-zone parameters.
    pub dead_zone: DeadZoneBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSettings {
    /// Surface bandwidth `λ` (1/s).
    pub lambda: f64,
    /// Reaching margin `η`.
    pub eta: f64,
    /// Boundary-layer thickness `φ`.
    pub phi: f64,
    #[serde(default)]
    pub switching: SwitchingKind,
    /// Adaptation rate `γ`; zero gives plain sliding mode control.
    pub gamma: f64,
    #[serde(default = "yes")]
    pub compensator: bool,
    #[serde(default = "default_centers")]
    pub centers: Vec<f64>,
    /// Initial consequents; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consequents: Option<Vec<f64>>,
    /// Fixed switching gain instead of the online law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen_gain: Option<f64>,
}

fn yes() -> bool {
    true
}

fn default_centers() -> Vec<f64> {
    DEFAULT_CENTERS.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    /// Simulated time (s).
    pub duration: f64,
    /// Controller and trace rate (Hz).
    pub controller_rate: f64,
    /// Plant integration rate (Hz).
    pub plant_rate: f64,
    #[serde(default = "origin")]
    pub initial_state: Vec<f64>,
    /// Leading fraction of the run excluded from post-transient metrics.
    #[serde(default = "default_transient")]
    pub transient_fraction: f64,
}

impl SimSettings {
    pub fn timing(&self) -> Timing {
        Timing {
            duration: self.duration,
            controller_rate: self.controller_rate,
            plant_rate: self.plant_rate,
        }
    }
}

fn origin() -> Vec<f64> {
    vec![0.0; 3]
}

fn default_transient() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub plant: HydraulicParams,
    pub estimate: EstimateSettings,
    pub controller: ControllerSettings,
    pub reference: SineReference,
    pub sim: SimSettings,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    /// Deserializes and validates an already parsed document.
    pub fn from_table(table: toml::Table) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table))
            .map_err(|e| {
                let path = e.path().to_string();
                ScenarioError::Key {
                    path,
                    message: e.into_inner().to_string(),
                }
            })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("scenario is always representable as TOML")
    }

    /// Checks every cross-field invariant by building the runtime objects.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let t = self.sim.transient_fraction;
        if !(t.is_finite() && (0.0..1.0).contains(&t)) {
            return Err(key_error("sim.transient_fraction", "must lie in [0, 1)"));
        }
        self.build().map(|_| ())
    }

    /// Truth plant, controller and compensator wired into a simulation.
    pub fn build(&self) -> Result<Simulation<HydraulicPlant>, ScenarioError> {
        let plant = HydraulicPlant::new(self.plant.clone()).map_err(|e| scoped("plant", e))?;
        let est = &self.estimate;
        let supply_ok = est.supply_range[0] > 0.0 && est.supply_range[0] <= est.supply_range[1];
        if !supply_ok {
            return Err(key_error(
                "estimate.supply_range",
                "must satisfy 0 < min <= max",
            ));
        }
        if !(est.load_fraction.is_finite() && (0.0..1.0).contains(&est.load_fraction)) {
            return Err(key_error("estimate.load_fraction", "must lie in [0, 1)"));
        }
        if !(est.drift_bound.is_finite() && est.drift_bound >= 0.0) {
            return Err(key_error(
                "estimate.drift_bound",
                "must be finite and non-negative",
            ));
        }
        let b_range = self.plant.gain_range(est.supply_range, est.load_fraction);
        let m_range = [est.dead_zone.m_min(), est.dead_zone.m_max()];
        let a = plant.a();
        let drift = Arc::new(move |x: &[f64]| -(a[0] * x[0] + a[1] * x[1] + a[2] * x[2]));
        let bound = est.drift_bound;
        let drift_bound = Arc::new(move |_: &[f64]| bound);
        let model = match est.valve_gain {
            Some(kv) => {
                if !(est.supply_pressure.is_finite() && est.supply_pressure > 0.0) {
                    return Err(key_error(
                        "estimate.supply_pressure",
                        "must be finite and positive",
                    ));
                }
                let bm_hat =
                    self.plant.flow_gain() * (est.supply_pressure / self.plant.density).sqrt() * kv;
                ModelEstimate::nominal(drift, drift_bound, bm_hat, b_range, m_range)
            }
            None => ModelEstimate::from_bounds(drift, drift_bound, b_range, m_range),
        }
        .map_err(|e| scoped("estimate", e))?;

        let c = &self.controller;
        let surface = SurfaceSpec::new(3, c.lambda).map_err(|e| scoped("controller", e))?;
        let switching =
            SwitchingFn::new(c.switching, c.phi).map_err(|e| scoped("controller", e))?;
        let cfg = ControllerConfig {
            model,
            surface,
            switching,
            eta: c.eta,
            delta_bound: est.dead_zone.disturbance_bound(),
            compensator_on: c.compensator,
            gain: match c.frozen_gain {
                Some(k) => GainMode::Frozen(k),
                None => GainMode::Online,
            },
        };
        let controller = Controller::new(cfg).map_err(|e| match e {
            Error::Invalid { key, reason } if key == "delta_bound" => {
                key_error("estimate.dead_zone", &reason)
            }
            e => scoped("controller", e),
        })?;
        let family =
            MembershipFamily::from_centers(&c.centers).map_err(|e| scoped("controller", e))?;
        let compensator = match &c.consequents {
            Some(d) => FuzzyCompensator::with_consequents(family, d.clone(), c.gamma),
            None => FuzzyCompensator::new(family, c.gamma),
        }
        .map_err(|e| match e {
            Error::Invalid { key, reason } if key == "d_hat" => {
                key_error("controller.consequents", &reason)
            }
            Error::Dimension { expected, got } => key_error(
                "controller.consequents",
                &format!("expected {expected} entries, got {got}"),
            ),
            e => scoped("controller", e),
        })?;

        let r = &self.reference;
        if !(r.amplitude.is_finite() && r.frequency.is_finite()) {
            return Err(key_error(
                "reference",
                "amplitude and frequency must be finite",
            ));
        }

        let sim = Simulation {
            plant,
            controller,
            compensator,
            reference: self.reference,
            timing: self.sim.timing(),
            initial_state: self.sim.initial_state.clone(),
        };
        sim.validate().map_err(|e| match e {
            Error::Dimension { expected, got } => key_error(
                "sim.initial_state",
                &format!("expected {expected} entries, got {got}"),
            ),
            Error::Invalid { key, reason } if key == "lambda" => {
                key_error("controller.lambda", &reason)
            }
            e => scoped("sim", e),
        })?;
        Ok(sim)
    }

    /// Same scenario without adaptation (`γ = 0`). With the default zero
    /// consequents this is plain sliding mode control.
    pub fn baseline(&self) -> Self {
        let mut smc = self.clone();
        smc.controller.gamma = 0.0;
        smc.name = format!("{}-smc", self.name);
        smc
    }

    /// Smooth-law region bounds `ζᵢ λ^(i−n+1) φ`.
    pub fn region(&self) -> Result<Vec<f64>, ScenarioError> {
        let surface =
            SurfaceSpec::new(3, self.controller.lambda).map_err(|e| scoped("controller", e))?;
        Ok(surface.convergence_region(self.controller.phi))
    }

    /// Monitor settings for a run that ended with `final_consequents`.
    pub fn monitor_spec(&self, final_consequents: Vec<f64>) -> Result<MonitorSpec, ScenarioError> {
        let c = &self.controller;
        Ok(MonitorSpec {
            eta: c.eta,
            phi: c.phi,
            layer: match c.switching {
                SwitchingKind::Sign => 0.0,
                _ => c.phi,
            },
            region: self.region()?,
            transient_fraction: self.sim.transient_fraction,
            family: MembershipFamily::from_centers(&c.centers)
                .map_err(|e| scoped("controller", e))?,
            gamma: c.gamma,
            adaptive: c.compensator,
            final_consequents,
        })
    }

    /// Builds, runs and summarises the scenario.
    pub fn run(&self) -> Result<RunReport, RunError> {
        self.validate()?;
        let output = self.build()?.run()?;
        let metrics = Metrics::compute(&output.trace, self.sim.transient_fraction, &self.region()?);
        let spec = self.monitor_spec(output.final_consequents.clone())?;
        let monitors = monitors(&output.trace, &spec);
        Ok(RunReport {
            output,
            metrics,
            monitors,
        })
    }

    /// Like [`with_override`](Self::with_override), with `text` read as a
    /// TOML value (`0.5`, `"sign"`, `[0, 0, 0]`); bare words become strings.
    pub fn with_override_text(&self, key: &str, text: &str) -> Result<Self, ScenarioError> {
        let value = toml::from_str::<toml::Table>(&format!("v = {text}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(text.to_string()));
        self.with_override(key, value)
    }

    /// Returns a copy with the dotted `key` set to `value`, re-validated.
    pub fn with_override(&self, key: &str, value: toml::Value) -> Result<Self, ScenarioError> {
        let mut root = self.to_table();
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts
            .pop()
            .filter(|p| !p.is_empty())
            .ok_or_else(|| key_error(key, "empty key"))?;
        let mut table = &mut root;
        for part in parts {
            table = table
                .get_mut(part)
                .and_then(|v| v.as_table_mut())
                .ok_or_else(|| key_error(key, "no such section"))?;
        }
        table.insert(last.to_string(), value);
        Self::from_table(root)
    }
}

fn key_error(path: &str, message: &str) -> ScenarioError {
    ScenarioError::Key {
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn scoped(section: &str, e: Error) -> ScenarioError {
    match e {
        Error::Invalid { key, reason } => ScenarioError::Key {
            path: format!("{section}.{key}"),
            message: reason,
        },
        other => ScenarioError::Key {
            path: section.to_string(),
            message: other.to_string(),
        },
    }
}

/// Bundled scenario by name (`case1`, `case2`).
pub fn preset(name: &str) -> Option<Scenario> {
    let text = match name {
        "case1" => CASE1,
        "case2" => CASE2,
        _ => return None,
    };
    Some(Scenario::from_toml(text).expect("bundled presets are valid"))
}

/// Source text of a bundled scenario.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(CASE1),
        "case2" => Some(CASE2),
        _ => None,
    }
}
