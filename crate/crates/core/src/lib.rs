//! Verification toolkit for Cayley and coassociative fibrations on twisted
//! connected sums: singular fibres of the quartic building block, K3 lattice
//! and period-domain matching, index bookkeeping from cone rate spectra,
//! weighted-norm asymptotics on gluing necks and the contraction scheme.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Matrix code reads better with explicit row/column indices.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod index;
pub mod intlinalg;
pub mod k3lattice;
pub mod model;
pub mod poly;
pub mod quartic;
pub mod report;
pub mod tcs;
pub mod verify;

pub use error::{Error, Result};
pub use poly::{ComplexRational, HomogeneousPoly, Poly, ProjectivePoint};
pub use report::{Check, RunReport};
