//! Sliding surface, switching functions and the smooth-law convergence region.
//!
//! The surface for an order-`n` system is `s = (d/dt + λ)^(n−1) x̃`, expanded
//! as `s = cᵀ x̃` over the error vector `x̃ = [x̃, x̃', …, x̃^(n−1)]`. The time
//! derivative is split as `ṡ = x̃^(n) + c̄ᵀ x̃`, so the controller only needs
//! the feedback part `c̄ᵀ x̃`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial row `[C(n−1, 0), …, C(n−1, n−1)]`.
pub fn binomial_coeffs(n: usize) -> Result<Vec<u64>> {
    if n < 1 {
        return Err(Error::invalid("n", "system order must be at least 1"));
    }
    let k = n - 1;
    let mut row = Vec::with_capacity(n);
    let mut c: u64 = 1;
    row.push(c);
    for i in 1..=k as u64 {
        c = c * (k as u64 + 1 - i) / i;
        row.push(c);
    }
    Ok(row)
}

/// Sliding surface of order `n` and bandwidth `λ`.
///
/// Coefficient vectors are built once; evaluation is two dot products.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    lambda: f64,
    c: Vec<f64>,
    c_bar: Vec<f64>,
}

impl SurfaceSpec {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        let binom = binomial_coeffs(n)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", "must be finite and positive"));
        }
        // c = [c_{n-1} λ^{n-1}, …, c_1 λ, c_0], aligned with [x̃, x̃', …].
        let c: Vec<f64> = (0..n)
            .map(|i| binom[n - 1 - i] as f64 * lambda.powi((n - 1 - i) as i32))
            .collect();
        let mut c_bar = vec![0.0; n];
        c_bar[1..].copy_from_slice(&c[..n - 1]);
        Ok(Self { lambda, c, c_bar })
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Full coefficient vector `c`; the last entry is always 1.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Shifted vector `c̄ = [0, c_{n-1} λ^{n-1}, …, c_1 λ]`.
    pub fn c_bar(&self) -> &[f64] {
        &self.c_bar
    }

    fn check(&self, err: &[f64]) -> Result<()> {
        if err.len() != self.order() {
            return Err(Error::Dimension {
                expected: self.order(),
                got: err.len(),
            });
        }
        Ok(())
    }

    /// `s = cᵀ x̃`.
    pub fn sliding_variable(&self, err: &[f64]) -> Result<f64> {
        self.check(err)?;
        Ok(dot(&self.c, err))
    }

    /// `c̄ᵀ x̃`, the error-feedback part of `ṡ`.
    pub fn sdot_feedback(&self, err: &[f64]) -> Result<f64> {
        self.check(err)?;
        Ok(dot(&self.c_bar, err))
    }

    /// Per-derivative bounds `ζ_i λ^(i−n+1) φ` of the region reached under
    /// a smooth switching law with boundary layer `φ`.
    pub fn convergence_region(&self, phi: f64) -> Vec<f64> {
        let n = self.order();
        zeta(n)
            .into_iter()
            .enumerate()
            .map(|(i, z)| z * self.lambda.powi(i as i32 - n as i32 + 1) * phi)
            .collect()
    }
}

/// The `ζ` sequence: `ζ_0 = 1`, `ζ_i = 1 + Σ_{j<i} C(i, j) ζ_j`.
pub fn zeta(n: usize) -> Vec<f64> {
    let mut z: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 {
            z.push(1.0);
            continue;
        }
        let row = binomial_coeffs(i + 1).expect("i + 1 >= 1");
        let sum: f64 = (0..i).map(|j| row[j] as f64 * z[j]).sum();
        z.push(1.0 + sum);
    }
    z
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Which interpolation replaces `sgn(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchingKind {
    Sign,
    #[default]
    Saturation,
    Tanh,
}

/// Switching function with boundary-layer thickness `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingFn {
    kind: SwitchingKind,
    phi: f64,
}

impl SwitchingFn {
    /// `phi` is ignored by [`SwitchingKind::Sign`] but must still be
    /// positive so that the convergence region stays defined.
    pub fn new(kind: SwitchingKind, phi: f64) -> Result<Self> {
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::invalid("phi", "must be finite and positive"));
        }
        Ok(Self { kind, phi })
    }

    pub fn kind(&self) -> SwitchingKind {
        self.kind
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self.kind {
            SwitchingKind::Sign => sgn(s),
            SwitchingKind::Saturation => (s / self.phi).clamp(-1.0, 1.0),
            SwitchingKind::Tanh => (s / self.phi).tanh(),
        }
    }
}

/// Three-valued sign: `sgn(0) = 0`.
#[inline]
pub fn sgn(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}
