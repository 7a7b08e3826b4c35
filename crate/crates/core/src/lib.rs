//! Exact computations with groups acting on hyperbolic spaces.
//!
//! Three concrete model spaces — the free-group tree, the integer-matrix
//! upper half-plane, and the lamplighter Bass–Serre tree — with Gromov
//! products, isometry and action classification, quantitative displacement
//! lemmas, subgroup handles with a recurrence checker, invariant random
//! subgroups from finite measure-preserving actions, the elliptic radical,
//! and a deterministic harness for the geometric-density dichotomy.

pub mod hyp;
pub mod irs;
pub mod isometry;
pub mod lamp;
pub mod lemmas;
pub mod mat2;
pub mod model;
pub mod models;
pub mod radical;
pub mod scalar;
pub mod subgroups;
pub mod surd;
pub mod word;

pub mod harness;

pub use model::{ball_elements, eval_word, ModelDescriptor, ModelKind, ModelSpace};
pub use models::{FreeGroupModel, HPoint, HalfPlaneModel, LamplighterModel, Ray};
pub use scalar::Scalar;
pub use word::Word;
