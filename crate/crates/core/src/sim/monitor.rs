//! Runtime checks of the closed-loop guarantees.
//!
//! Each tick records the true `ṡ` right after the new control is applied, so
//! the continuous-time rate of the Lyapunov surrogate
//!
//! ```text
//! V = ½ s² + (bm / 2γ) |D̂ − D̂*|²,   V̇ = s ṡ − bm s (d̂(û) − d̂*(û))
//! ```
//!
//! can be evaluated exactly at every sample. With `D̂* = 0` the switching
//! gain bounds `V̇ ≤ −η|s|` for any trajectory; the final consequents of the
//! run are also reported as an anchor, for comparison.
//!
//! Smooth laws only promise this outside the boundary layer, so the rate
//! checks skip samples with `|s|` at or below [`MonitorSpec::layer`].

use crate::fuzzy::MembershipFamily;
use crate::sliding::dot;

use super::metrics::transient_end;
use super::trace::{Sample, SimTrace};

/// Slack for a surrogate increase over one controller period.
pub const INTEGRATOR_TOLERANCE: f64 = 1e-9;

/// Everything the monitors need besides the trace.
#[derive(Debug, Clone)]
pub struct MonitorSpec {
    pub eta: f64,
    pub phi: f64,
    /// Half-width of the band where rate checks are skipped: zero for the
    /// sign law, `φ` for the smooth ones.
    pub layer: f64,
    /// Smooth-law region bounds per derivative.
    pub region: Vec<f64>,
    pub transient_fraction: f64,
    pub family: MembershipFamily,
    pub gamma: f64,
    /// False for plain SMC runs, where the surrogate reduces to `½ s²`.
    pub adaptive: bool,
    /// Final consequents of the run.
    pub final_consequents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    /// Ticks outside the layer with `s ṡ > −η|s|`.
    pub sliding_violations: usize,
    /// Ticks where the surrogate anchored at `D̂* = 0` grows by more than
    /// [`INTEGRATOR_TOLERANCE`] over one period.
    pub surrogate_increases: usize,
    /// Same, anchored at the final consequents.
    pub surrogate_increases_final_anchor: usize,
    /// Consecutive samples of the recorded `V` column that increase.
    pub sampled_v_increases: usize,
    /// Post-transient fraction of samples with `|s| ≤ φ`.
    pub boundary_occupancy: f64,
    /// Post-transient fraction inside the smooth-law region, per derivative.
    pub region_occupancy: Vec<f64>,
}

impl MonitorReport {
    /// Flat `key = value` lines, in a fixed order.
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "sliding_violations = {}\nsurrogate_increases = {}\nsurrogate_increases_final_anchor = {}\nsampled_v_increases = {}\nboundary_occupancy = {}\n",
            self.sliding_violations,
            self.surrogate_increases,
            self.surrogate_increases_final_anchor,
            self.sampled_v_increases,
            self.boundary_occupancy,
        );
        for (i, f) in self.region_occupancy.iter().enumerate() {
            out.push_str(&format!("region_occupancy_{i} = {f}\n"));
        }
        out
    }
}

fn surrogate_rate(
    sample: &Sample,
    spec: &MonitorSpec,
    anchor: Option<&[f64]>,
    psi: &mut [f64],
) -> f64 {
    let base = sample.s * sample.s_dot;
    if !spec.adaptive || spec.gamma == 0.0 {
        return base;
    }
    let anchor_estimate = match anchor {
        None => 0.0,
        Some(d_star) => {
            spec.family
                .firing_weights_into(sample.u_hat, psi)
                .expect("valid family always fires");
            dot(d_star, psi)
        }
    };
    base - sample.bm * sample.s * (sample.d_hat - anchor_estimate)
}

/// Runs all monitors. Traces with fewer than two samples give `None`.
pub fn monitors(trace: &SimTrace, spec: &MonitorSpec) -> Option<MonitorReport> {
    if trace.len() < 2 {
        return None;
    }
    let mut psi = vec![0.0; spec.family.len()];
    let mut report = MonitorReport {
        sliding_violations: 0,
        surrogate_increases: 0,
        surrogate_increases_final_anchor: 0,
        sampled_v_increases: 0,
        boundary_occupancy: 0.0,
        region_occupancy: vec![0.0; spec.region.len()],
    };
    for s in trace.samples.iter().filter(|s| s.s.abs() > spec.layer) {
        if s.s * s.s_dot > -spec.eta * s.s.abs() {
            report.sliding_violations += 1;
        }
        if surrogate_rate(s, spec, None, &mut psi) * trace.dt > INTEGRATOR_TOLERANCE {
            report.surrogate_increases += 1;
        }
        let rate = surrogate_rate(s, spec, Some(&spec.final_consequents), &mut psi);
        if rate * trace.dt > INTEGRATOR_TOLERANCE {
            report.surrogate_increases_final_anchor += 1;
        }
    }
    report.sampled_v_increases = trace
        .samples
        .windows(2)
        .filter(|w| w[1].v > w[0].v + INTEGRATOR_TOLERANCE)
        .count();

    let post = &trace.samples[transient_end(trace, spec.transient_fraction)..];
    if !post.is_empty() {
        let frac = |count: usize| count as f64 / post.len() as f64;
        report.boundary_occupancy = frac(post.iter().filter(|s| s.s.abs() <= spec.phi).count());
        for (i, bound) in spec.region.iter().enumerate() {
            report.region_occupancy[i] =
                frac(post.iter().filter(|s| s.err[i].abs() <= *bound).count());
        }
    }
    Some(report)
}
