use std::fmt::Write as _;

use super::trace::{fault, Sample, SimTrace};

/// Scalar summary of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub samples: usize,
    pub post_transient_samples: usize,
    /// RMS of `x̃` after the transient window (m).
    pub rms_error: f64,
    /// Largest `|x̃|` after the transient window (m).
    pub max_abs_error: f64,
    /// `Σ |u_k − u_{k−1}|` over the whole run (V); the chattering index.
    pub control_total_variation: f64,
    /// RMS of `d̂(û) − d(u)` over the whole run and over its first and last quarters (V).
    pub compensation_rms: f64,
    pub compensation_rms_first_quarter: f64,
    pub compensation_rms_last_quarter: f64,
    /// Post-transient samples outside the smooth-law region, per derivative.
    pub region_violations: Vec<usize>,
    pub cavitation_samples: usize,
}

/// Index of the first post-transient sample.
pub fn transient_end(trace: &SimTrace, transient_fraction: f64) -> usize {
    let duration = trace.len() as f64 * trace.dt;
    let cutoff = transient_fraction * duration;
    trace
        .samples
        .iter()
        .position(|s| s.t >= cutoff - 1e-9 * trace.dt)
        .unwrap_or(trace.len())
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(acc, n), v| (acc + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

fn compensation_rms(samples: &[Sample]) -> f64 {
    rms(samples.iter().map(|s| s.d_hat - s.d))
}

impl Metrics {
    /// `region` holds the per-derivative bounds of the smooth-law region.
    pub fn compute(trace: &SimTrace, transient_fraction: f64, region: &[f64]) -> Self {
        let n = trace.len();
        let start = transient_end(trace, transient_fraction);
        let post = &trace.samples[start..];
        let quarter = n / 4;
        let region_violations = region
            .iter()
            .enumerate()
            .map(|(i, bound)| post.iter().filter(|s| s.err[i].abs() > *bound).count())
            .collect();
        Metrics {
            samples: n,
            post_transient_samples: post.len(),
            rms_error: rms(post.iter().map(|s| s.err[0])),
            max_abs_error: post.iter().map(|s| s.err[0].abs()).fold(0.0, f64::max),
            control_total_variation: trace
                .samples
                .windows(2)
                .map(|w| (w[1].u - w[0].u).abs())
                .sum(),
            compensation_rms: compensation_rms(&trace.samples),
            compensation_rms_first_quarter: compensation_rms(&trace.samples[..quarter]),
            compensation_rms_last_quarter: compensation_rms(&trace.samples[n - quarter..]),
            region_violations,
            cavitation_samples: trace
                .samples
                .iter()
                .filter(|s| s.fault & fault::CAVITATION != 0)
                .count(),
        }
    }

    /// Flat `key = value` lines, in a fixed order.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(
            out,
            "post_transient_samples = {}",
            self.post_transient_samples
        );
        let _ = writeln!(out, "rms_error = {}", self.rms_error);
        let _ = writeln!(out, "max_abs_error = {}", self.max_abs_error);
        let _ = writeln!(
            out,
            "control_total_variation = {}",
            self.control_total_variation
        );
        let _ = writeln!(out, "compensation_rms = {}", self.compensation_rms);
        let _ = writeln!(
            out,
            "compensation_rms_first_quarter = {}",
            self.compensation_rms_first_quarter
        );
        let _ = writeln!(
            out,
            "compensation_rms_last_quarter = {}",
            self.compensation_rms_last_quarter
        );
        for (i, v) in self.region_violations.iter().enumerate() {
            let _ = writeln!(out, "region_violations_{i} = {v}");
        }
        let _ = writeln!(out, "cavitation_samples = {}", self.cavitation_samples);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, err: f64, u: f64, d_hat: f64, d: f64) -> Sample {
        Sample {
            t,
            err: vec![err, 0.0],
            u,
            d_hat,
            d,
            ..Default::default()
        }
    }

    #[test]
    fn hand_computed_summary() {
        let trace = SimTrace {
            dt: 1.0,
            samples: vec![
                sample(0.0, 9.0, 0.0, 1.0, 0.0),
                sample(1.0, 3.0, 1.0, 0.0, 0.0),
                sample(2.0, -4.0, -1.0, 0.0, 0.0),
                sample(3.0, 0.0, 0.0, 0.5, 0.0),
            ],
        };
        let m = Metrics::compute(&trace, 0.25, &[3.5, 1.0]);
        assert_eq!(m.post_transient_samples, 3);
        assert!((m.rms_error - (25.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(m.max_abs_error, 4.0);
        assert_eq!(m.control_total_variation, 4.0);
        assert_eq!(m.compensation_rms_first_quarter, 1.0);
        assert_eq!(m.compensation_rms_last_quarter, 0.5);
        assert_eq!(m.region_violations, vec![1, 0]);
        let text = m.to_key_values();
        assert!(text.contains("max_abs_error = 4\n"));
        assert!(text.contains("region_violations_1 = 0\n"));
    }
}
