use std::io::{self, Write};

/// Fault bits carried by each trace sample.
pub mod fault {
    /// The hydraulic gain radicand went negative and was clamped.
    pub const CAVITATION: u8 = 1;
}

/// One controller tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    /// Plant state `[x, x', …, x^(n−1)]` at the tick.
    pub state: Vec<f64>,
    /// `[x_d, …, x_d^(n)]`.
    pub reference: Vec<f64>,
    /// `x̃ = x − x_d`, length `n`.
    pub err: Vec<f64>,
    pub s: f64,
    /// True `ṡ` right after the new control is applied.
    pub s_dot: f64,
    pub u: f64,
    pub u_hat: f64,
    /// Dead-zone output `υ`.
    pub upsilon: f64,
    pub d_hat: f64,
    /// True dead-zone term `d(u)`.
    pub d: f64,
    pub gain: f64,
    /// True product of input gain and dead-zone slope at `(x, u)`.
    pub bm: f64,
    /// Consequents used for this tick's output (before adaptation).
    pub consequents: Vec<f64>,
    /// Lyapunov surrogate; filled in after the run.
    pub v: f64,
    pub fault: u8,
}

/// Controller-rate record of a closed-loop run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

pub const CSV_HEADER: &str = "t,x,xd,err,s,u,upsilon,dhat,d,K,V,fault";

impl SimTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for s in &self.samples {
            write_row(&mut w, s)?;
        }
        w.flush()
    }
}

pub(crate) fn write_row<W: Write>(w: &mut W, s: &Sample) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        s.t,
        s.state[0],
        s.reference[0],
        s.err[0],
        s.s,
        s.u,
        s.upsilon,
        s.d_hat,
        s.d,
        s.gain,
        s.v,
        s.fault
    )
}
