//! Numerical laboratory for positive solutions of
//!
//! ```text
//! ∂t u − Δu + t^α |u|^{q−1} u = 0,      α > −1,  q > 1,
//! ```
//!
//! on radially symmetric domains. The crate provides
//!
//! * [`model`] — parameters, exact closed-form solutions (flat solution,
//!   pointwise absorption flow), the heat kernel, the similarity transform
//!   `T_m`, and kernel-power integrability diagnostics;
//! * [`profiles`] — self-similar profile ODE solvers: the 1-D barrier
//!   profile `W`, the radial very-singular profile `V` (by shooting and by
//!   variational minimization), the linear profiles `z1`/`z2`, asymptotic
//!   fits, and space-time evaluators built from the profiles;
//! * [`parabolic`] — a radial initial-value solver on a truncated ball
//!   (Strang splitting: exact absorption flow + implicit diffusion),
//!   with drivers for Dirac-data saturation and blow-up lateral data;
//! * [`trace`] — initial-trace measurement: moment trajectories,
//!   regular/singular classification, plateau and lower-bound checks,
//!   Harnack-constant fitting, singularity classification experiments;
//! * [`barriers`] — Keller–Osserman condition checking, the ψ time barrier
//!   by inversion, and the elliptic boundary blow-up solution;
//! * [`verify`] — the acceptance suites, runnable by name.

pub mod barriers;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod parabolic;
pub mod profiles;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use model::{AbsorptionParams, SimilarityTransform};
pub use parabolic::{Boundary, InitialDatum, RadialGrid, RadialSolution, TimeMesh};
pub use profiles::{FitResult, Profile, ProfileKind};
