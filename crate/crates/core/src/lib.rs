pub mod characteristics;
pub mod cli;
pub mod corrections;
pub mod expansion;
pub mod expr;
pub mod hugoniot;
pub mod model;
pub mod reference;
mod roots;
pub mod scalar;

pub type Spec = model::ProblemSpec<f64>;
pub type Solution = expansion::Expansion<f64>;
pub type Shock = hugoniot::ShockCurve<f64>;
pub type Grid = reference::GridSolution<f64>;
