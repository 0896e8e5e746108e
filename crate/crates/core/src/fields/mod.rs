//! Grids, discrete fields, quadrature and differential operators.
//!
//! Two discretizations of ℝ^N are provided:
//!
//! * [`RadialGrid`]: radial functions on `[0, R_max]` for any dimension
//!   `N ≥ 3`, nodes offset by half a cell from the origin. Operators act on
//!   `v = r^{(N-1)/2} u`, which turns the radial Laplacian into a 1D second
//!   derivative plus a centrifugal term that vanishes for `N = 3`.
//! * [`CartesianGrid`]: periodic boxes in ℝ³ with transform-based
//!   (spectral) or finite-difference derivatives.

mod cartesian;
pub mod fft;
pub mod interp;
mod radial;

pub use cartesian::{CartesianField, CartesianGrid, DerivativeScheme};
pub use radial::{RadialField, RadialGrid};

/// Operations shared by the discretizations, used by the iterative solvers.
///
/// All inner products are weighted quadratures, so `inner(u, u)` is the
/// discrete `∫u²` and `inner(u, neg_laplacian(u))` the discrete `∫|∇u|²`.
pub trait Discretization: Send + Sync {
    fn len(&self) -> usize;
    fn weights(&self) -> &[f64];
    /// Discrete `-Δu`, self-adjoint with respect to [`Self::weights`].
    fn neg_laplacian(&self, u: &[f64]) -> Vec<f64>;
    /// Solve `(-Δ₂ + shift) x = f` with a spectrally equivalent operator.
    fn precondition(&self, f: &[f64], shift: f64) -> Vec<f64>;

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.weights();
        crate::par::sum(a.len(), |i| w[i] * a[i] * b[i])
    }

    fn kinetic(&self, u: &[f64]) -> f64 {
        self.inner(u, &self.neg_laplacian(u))
    }
}
