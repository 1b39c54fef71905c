//! Recovery of curves and surfaces given as zero level-sets of multidimensional
//! bandlimited trigonometric polynomials, and exact local kernel interpolation
//! of bandlimited functions on them.
//!
//! * [`freqset`]: integer frequency supports, Minkowski sums and shift sets.
//! * [`trigpoly`]: polynomials, exponential feature maps, Dirichlet kernel.
//! * [`zerosampler`]: random points on, and grid traces of, a zero set.
//! * [`recovery`]: null-space recovery, numerical rank, rank identities.
//! * [`interpolant`]: anchor selection and kernel interpolation on a surface.
//! * [`harness`]: seeded Monte Carlo experiments behind the `levelset` CLI.

pub mod error;
pub mod freqset;
pub mod harness;
pub mod interpolant;
pub mod recovery;
pub mod trigpoly;
pub mod zerosampler;

pub use error::{Error, Result};
pub use freqset::FrequencySet;
pub use interpolant::Interpolant;
pub use recovery::RecoveryResult;
pub use trigpoly::TrigPolynomial;
pub use zerosampler::SampleSet;
