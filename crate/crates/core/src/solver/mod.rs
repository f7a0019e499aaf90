//! Critical points of `J_λ` on the truncated space.
//!
//! * [`newton_solve`]: damped Newton on the residual with the analytic
//!   tridiagonal Jacobian.
//! * [`mountain_pass`]: saddle points between a low and a high endpoint.
//! * [`deflated_solve`]: Newton on a residual deflated at known solutions.
//! * [`window_continuation`], [`lambda_continuation`]: re-solving on a wider
//!   window or along a parameter sweep.
//! * [`solution_sequence`], [`critical_point_census`]: multi-start campaigns.

mod continuation;
mod deflation;
mod jacobian;
mod mountain_pass;
mod newton;
mod sequence;
mod set;
pub mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use continuation::{lambda_continuation, window_continuation, ContinuationOutcome, LambdaStep, BOUNDARY_ARTIFACT};
pub use deflation::{deflated_solve, deflated_solve_traced, DeflatedTrace, Deflation};
pub use jacobian::{jacobian, Tridiagonal};
pub use mountain_pass::{mountain_pass, mountain_pass_traced, MountainPassTrace, PathStep};
pub use newton::newton_solve;
pub use sequence::{
    acceptance_check, critical_point_census, default_starts, solution_sequence, AcceptanceCheck, SequenceOutcome, LEVEL_TOL,
};
pub use set::SolutionSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Convergence threshold on the ∞-norm of the residual.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Backtracking factor.
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Cap on `φ_p'` and `∂f/∂t` entries of the Jacobian.
    pub jacobian_cap: f64,
    /// Defaults to `p` when absent.
    pub deflation_exponent: Option<f64>,
    pub path_points: usize,
    /// Iteration budget of the mountain-pass path refinement.
    pub path_max_iter: usize,
    pub seed: u64,
    /// Largest amplitude of the geometric ladder `1, 2, 4, ...`.
    pub max_amplitude: f64,
    /// Acceptance threshold for `|u(k)|` and the tail mass beyond `floor(0.8K)`.
    pub tail_tol: f64,
    /// Extra half-width used by the window-continuation acceptance test.
    pub continuation_extra: usize,
    /// Largest accepted ∞-norm drift under window continuation.
    pub drift_tol: f64,
    /// Re-deflation attempts from a single starting profile.
    pub deflations_per_start: usize,
    /// Seeded random starting profiles added to the campaign.
    pub random_starts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-10,
            max_iter: 200,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            jacobian_cap: 1e8,
            deflation_exponent: None,
            path_points: 64,
            path_max_iter: 20_000,
            seed: 0,
            max_amplitude: 65_536.0,
            tail_tol: 1e-6,
            continuation_extra: 10,
            drift_tol: 1e-6,
            deflations_per_start: 4,
            random_starts: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("jacobian_cap", self.jacobian_cap),
            ("sufficient_decrease", self.sufficient_decrease),
            ("max_amplitude", self.max_amplitude),
            ("tail_tol", self.tail_tol),
            ("drift_tol", self.drift_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!("solver.shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if self.path_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "solver.path_points must be >= 3, got {}",
                self.path_points
            )));
        }
        if let Some(e) = self.deflation_exponent {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter(format!("solver.deflation_exponent must be positive, got {e}")));
            }
        }
        Ok(())
    }

    /// Amplitudes `1, 2, 4, ...` up to `max_amplitude`.
    pub fn amplitude_ladder(&self) -> Vec<f64> {
        std::iter::successors(Some(1.0_f64), |c| Some(2.0 * c))
            .take_while(|c| *c <= self.max_amplitude)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { path_points: 2, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { residual_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { shrink: 1.0, ..Default::default() }.validate().is_err());
        assert_eq!(SolverConfig { max_amplitude: 8.0, ..Default::default() }.amplitude_ladder(), vec![1.0, 2.0, 4.0, 8.0]);
    }
}
