//! wfl: a small laboratory for finite frames and weavings over C^d.
//!
//! The crate builds frames, weaves pairs of frames under index partitions,
//! certifies woven-ness exactly by exhaustive partition enumeration, and
//! numerically verifies a family of Parseval-type identities and operator
//! inequalities for weavings and their duals, reporting residuals and slacks
//! for every evaluation.

pub mod error;
pub mod frames;
pub mod generators;
pub mod identities;
pub mod io;
pub mod linalg;
pub mod report;
pub mod weaving;

pub use error::{Error, Result};
pub use frames::{FrameBounds, FrameFamily};
pub use generators::{GenKind, GenSpec};
pub use identities::{AltDualContext, IdentityRecord};
pub use linalg::{CMatrix, CVector, C64};
pub use report::{Report, SigmaMode, VerifyConfig};
pub use weaving::{PartitionMask, WeavingContext, WovenCertificate};
