/// Scratch space for the classical fourth-order Runge–Kutta step.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `x` by `h` under the autonomous field `f(x, dx)`.
    pub fn step<F>(&mut self, x: &mut [f64], h: f64, mut f: F)
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        f(x, &mut self.k1);
        offset(&mut self.tmp, x, 0.5 * h, &self.k1);
        f(&self.tmp, &mut self.k2);
        offset(&mut self.tmp, x, 0.5 * h, &self.k2);
        f(&self.tmp, &mut self.k3);
        offset(&mut self.tmp, x, h, &self.k3);
        f(&self.tmp, &mut self.k4);
        let ks = self.k1.iter().zip(&self.k2).zip(&self.k3).zip(&self.k4);
        for (xi, (((k1, k2), k3), k4)) in x.iter_mut().zip(ks) {
            *xi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
}

/// `out = x + c·k`
fn offset(out: &mut [f64], x: &[f64], c: f64, k: &[f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + c * ki;
    }
}
