pub mod degree;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod profile;
pub mod solver;
pub mod stray;

pub use degree::{boundary_phases, DegreeExpr, FieldParam, Offset, WindingNumber};
pub use error::{NeelError, Result};
pub use grid::Grid;
pub use profile::{degree_of, initial_ansatz, m_components, wall_locations, Profile, WallLocation};
pub use stray::SampledField;
pub use energy::{energy, equipartition_defect, gradient, localize, EnergyBreakdown, EnergyEvaluator};
pub use solver::{assess, continuation, minimize, multistart, recenter, Init, MinimizeConfig, MinimizeResult};
