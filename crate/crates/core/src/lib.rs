//! Discounted values, optimal stationary strategies and limit trajectories
//! of zero-sum absorbing and stochastic games.
//!
//! Everything is generic over the scalar type; the aliases below fix it to
//! `f64` or `f32`.

pub mod absorbing;
pub mod auxgame;
pub mod error;
pub mod matgame;
pub mod num;
pub mod scenarios;
pub mod stochgame;
pub mod trajectory;

pub use error::{Error, Result};
pub use num::{Extended, Scalar};

pub type Matrix64 = matgame::Matrix<f64>;
pub type MixedAction64 = matgame::MixedAction<f64>;
pub type AbsorbingGame64 = absorbing::AbsorbingGame<f64>;
pub type StationaryPair64 = absorbing::StationaryPair<f64>;
pub type StochasticGame64 = stochgame::StochasticGame<f64>;
pub type Trajectory64 = trajectory::Trajectory<f64>;
pub type AuxTriple64 = auxgame::AuxTriple<f64>;

pub type Matrix32 = matgame::Matrix<f32>;
pub type MixedAction32 = matgame::MixedAction<f32>;
pub type AbsorbingGame32 = absorbing::AbsorbingGame<f32>;
pub type Trajectory32 = trajectory::Trajectory<f32>;
