//! Data generators: delayed transfer-function banks, switched ARX models,
//! PRBS and Gaussian excitation, and the two reference experiments.

mod excitation;
mod presets;
mod sarx;
mod schedule;
mod transfer;

pub use excitation::{gaussian_sequence, prbs, ExcitationKind, ExcitationSpec, Lfsr};
pub use presets::{example1_preset, example2_preset, Dataset, Preset, SimulatorSpec};
pub use sarx::{simulate_sarx, SarxMode, SarxModel, SarxRun};
pub use schedule::StepSchedule;
pub use transfer::{is_stable, simulate_mimo, MimoDelayedSystem, RationalChannel};
