//! Fermat–Torricelli smoothing of time series followed by exact
//! interpolation of the smoothed nodes with sums of complex exponentials.
//!
//! Pipeline: [`series::validate`] → [`series::smooth`] (each sliding triple of
//! samples is replaced by its Fermat–Torricelli point) → [`expfit::fit`]
//! (`f(t) = Σ cⱼ·exp(λⱼ·t)` through the nodes) → [`expfit::evaluate_grid`].
//!
//! With the default `parallel` feature, batch operations run on rayon; results
//! are identical to the sequential variants.

pub mod error;
pub mod expfit;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod numerics;
mod par;
pub mod pipeline;
pub mod series;

pub use error::{Error, Result, Warning};
pub use expfit::{ExpModel, ExpTerm, ExponentSpec};
pub use geometry::{Point2, Triangle, TriangleClass};
pub use numerics::{CMatrix, Complex};
pub use series::{SmoothedSeries, TimeSeries};
