//! Zero-shot non-rigid shape matching for triangle meshes.
//!
//! Given a single source/target mesh pair, the library jointly optimizes a
//! learned feature extractor, a functional map between the truncated
//! Laplace-Beltrami bases of the two shapes, and a prism-based deformation
//! decoder regularized by the PriMo elastic energy. The result is a dense
//! point-to-point correspondence, produced with no training data beyond the
//! pair itself.
//!
//! The main entry point is [`trainer::fit_pair`]; see the `examples/`
//! directory for runnable demonstrations of each subsystem:
//!
//! - mesh loading and edge-graph geodesics ([`mesh`])
//! - cotangent Laplacian and spectral bases ([`spectral`])
//! - reverse-mode autodiff over dense tensors ([`autodiff`])
//! - the diffusion feature backbone ([`backbone`])
//! - functional-map prediction and soft point-to-point maps ([`fmap`])
//! - the prism decoder and vertex reconstruction ([`recon`])
//! - the PriMo elastic joint energy ([`primo`])
//! - the per-pair optimization loop ([`trainer`])
//! - spectral upsampling refinement ([`refine`])
//! - geodesic-error evaluation ([`eval`])

pub mod autodiff;
pub mod backbone;
pub mod cli;
pub mod eval;
pub mod fmap;
pub mod gradcheck;
pub mod mesh;
pub mod primo;
pub mod recon;
pub mod refine;
pub mod spectral;
pub mod synth;
pub mod trainer;

pub use autodiff::{Adam, Param, Tape, Tensor, Var};
pub use eval::{accuracy_curve, geodesic_error, ErrorReport, GroundTruth};
pub use fmap::{FunctionalMap, SoftP2P};
pub use mesh::{load_mesh, EdgeGraph, MeshFormat, TriMesh};
pub use refine::{refine_zoomout, PointMap};
pub use spectral::SpectralBasis;
pub use trainer::{fit_pair, FeatureMode, MatchConfig, MatchResult};
