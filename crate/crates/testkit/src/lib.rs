//! Slow, independent reference solvers used to freeze expected values in the
//! dualdomain test suites. Nothing here shares code with the library under
//! test; everything works on dense matrices.

pub mod eig;
pub mod qp;
pub mod socp;
pub mod sparse;
