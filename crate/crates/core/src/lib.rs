//! Numerical toolkit for spinorial Yamabe-type equations: the planar bubble,
//! the curvature functional on surfaces, and a spectral min-max solver on
//! flat tori.

pub mod bubble;
pub mod clifford;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod quad;
pub mod torus;

pub use bubble::{BubbleParams, BubbleReport, RadialProfile};
pub use clifford::{CliffordRep2, Mat2, Spinor, C64};
pub use error::{Result, SylError};
pub use torus::{FourierSpinor, SolveResult, SolverConfig, TorusGrid};
