use serde::{Deserialize, Serialize};

use crate::controller::ReferenceSample;

/// Sinusoidal reference `x_d = A sin(ω t)` with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineReference {
    /// Amplitude `A` (m).
    pub amplitude: f64,
    /// Angular frequency `ω` (rad/s).
    pub frequency: f64,
}

impl SineReference {
    /// `[x_d, x_d', …, x_d^(order)]` at time `t`.
    pub fn sample(&self, t: f64, order: usize) -> ReferenceSample {
        let phase = self.frequency * t;
        let (sin, cos) = phase.sin_cos();
        let mut scale = self.amplitude;
        let derivs = (0..=order)
            .map(|k| {
                let v = match k % 4 {
                    0 => scale * sin,
                    1 => scale * cos,
                    2 => -scale * sin,
                    _ => -scale * cos,
                };
                scale *= self.frequency;
                v
            })
            .collect();
        ReferenceSample::new(derivs)
    }
}
