//! Fixed-step multirate closed-loop simulation.

mod engine;
mod integrate;
mod metrics;
mod monitor;
mod reference;
mod trace;

pub use engine::{SimError, SimOutput, Simulation, Timing};
pub use integrate::Rk4;
pub use metrics::{transient_end, Metrics};
pub use monitor::{monitors, MonitorReport, MonitorSpec, INTEGRATOR_TOLERANCE};
pub use reference::SineReference;
pub use trace::{fault, Sample, SimTrace, CSV_HEADER};
