//! Numerical tolerances and limits shared by every module.
//!
//! All comparisons that are not exact go through one of these constants.

/// Residual orthogonality after a least-squares solve, relative to `‖y‖·‖φ_j‖`.
pub const TAU_ORTH: f64 = 1e-8;

/// Smallest admissible `|R_jj|` in Householder QR, relative to the largest
/// column norm of the system matrix.
pub const TAU_RANK: f64 = 1e-10;

/// Relative accuracy of extreme eigenvalues of small Gram matrices.
pub const TAU_EIG: f64 = 1e-9;

/// Jacobi sweeps before the eigen-iteration gives up.
pub const EIG_MAX_SWEEPS: usize = 64;

/// `r^n = y - y^n` must hold to this multiple of `max(‖y‖, ‖y^n‖, ‖r^n‖)` at
/// every iteration.
pub const RESIDUAL_IDENTITY: f64 = 1e-9;

/// Largest number of k-subsets `rip_exhaustive` will enumerate.
pub const RIP_ENUMERATION_LIMIT: u128 = 2_000_000;

/// Relative residual at which pursuits report convergence.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// Exact-recovery tolerance used by the experiment harness.
pub const DEFAULT_RECOVERY_TOL: f64 = 1e-4;

/// Relative slack granted to the lemma checks for floating-point rounding.
pub const LEMMA_SLACK: f64 = 1e-10;
