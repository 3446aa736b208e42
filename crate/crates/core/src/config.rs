use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the eigensolvers and the validity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute width at which bisection stops.
    pub eigenvalue_abs: f64,
    /// Maximum `‖Av − λv‖∞ / ‖v‖∞` accepted from inverse iteration.
    pub eigenvector_residual: f64,
    /// Column-sum slack for stochastic matrices.
    pub stochastic: f64,
    /// Most negative entry tolerated in a leading (Perron) vector before clipping.
    pub positivity: f64,
    pub max_bisection_steps: usize,
    pub max_inverse_iterations: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        eigenvalue_abs: 1e-13,
        eigenvector_residual: 1e-9,
        stochastic: 1e-12,
        positivity: 1e-10,
        max_bisection_steps: 200,
        max_inverse_iterations: 40,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
