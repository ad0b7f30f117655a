//! Gauss-type linking integrals on the rank-one model spaces `R^n`, `S^n`,
//! `H^n`, `CH^2` and `CP^2`, a right inverse of the exterior derivative given
//! by an integral kernel, and integer-valued topological oracles to check them.

pub mod dinv;
pub mod error;
pub mod kernels;
pub mod linking;
pub mod oracle;
pub mod quadrature;
pub mod spaces;
pub mod submanifolds;

pub use error::{Error, Result};
pub use spaces::{
    complex_structure, distance, exp, geodesic_velocity, log_unit, orthonormal_frame,
    parallel_transport, volume_form, Isometry, Space, SpaceKind, SpacePoint, Tangent,
};
pub use dinv::{d_inverse_eval, stokes_check, Covector, DinvOptions, DiskChain, FormField, StokesReport, StokesResolution};
pub use kernels::{kernel_for, KernelSpec, KernelWeights};
pub use linking::{convergence_run, linking_integral, ConvergenceRun, LinkingOptions, LinkingResult, Resolution};
pub use oracle::{oracle_linking, OracleResult};
pub use submanifolds::{builtin, Axis, Family, ParamSubmanifold};
