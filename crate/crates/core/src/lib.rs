//! Level-set shape optimization driven by distributed shape derivatives on
//! structured P1 triangulations.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod fem;
pub mod io;
pub mod levelset;
pub mod mesh;
pub mod models;
pub mod ppl;
pub mod scalar;
pub mod velocity;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type Mesh = mesh::RectMesh<f64>;
pub type Space = fem::FunctionSpace<f64>;
pub type Field = fem::FemField<f64>;
pub type LevelSet = levelset::LevelSetField<f64>;
pub type Model = dyn models::ModelProblem<f64>;
pub type Compliance = models::Compliance<f64>;
pub type Heat = models::Heat<f64>;
pub type Logistic = models::Logistic<f64>;
pub type InverseElasticity = models::InverseElasticity<f64>;
pub type Outcome = driver::RunOutcome<f64>;
