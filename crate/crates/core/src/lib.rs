//! Reconstruction of audio signals from partial, clipped and quantized
//! observations made in the time domain, in a Gabor time-frequency domain, or
//! in both at once.
//!
//! The crate is organised around the data flow of a reconstruction:
//!
//! * [`frame`] provides the Parseval tight Gabor frame (analysis `A`, synthesis
//!   `A*`) that links the two domains.
//! * [`degradation`] applies masking, hard clipping and mid-riser quantization
//!   and emits one [`Record`](degradation::Record) per observed entry.
//! * [`feasible`] turns records into box constraints and provides their
//!   projections and distance proxes.
//! * [`solver`] runs the Condat–Vũ primal-dual iteration on the resulting
//!   sparsity-regularized feasibility problem.
//! * [`codec`] is the two-domain encoder/decoder used for bit-budget
//!   experiments.

pub mod codec;
pub mod degradation;
pub mod error;
pub mod feasible;
pub mod frame;
mod linalg;
pub mod solver;

pub use num_complex::Complex64;

pub use codec::{decode, encode, sdr, tf_direct_baseline, Decoded, EncodeSpec, EncodedPayload};
pub use degradation::{ComplexRecord, QuantizerSpec, Record, Tag};
pub use error::{Error, Result};
pub use feasible::{BoxConstraint, ComplexBox};
pub use frame::{make_tight_frame, Coefficients, FrameSpec, WindowKind};
pub use solver::{
    solve_general, solve_tight, Algorithm, Mode, Model, Primal, ProblemSpec, Solution, SolveReport,
    SolverConfig,
};
