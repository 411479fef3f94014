//! Numerical tolerances shared across modules.

/// Sum-to-one tolerance for probability vectors.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Default sup-norm residual target for equilibrium solves.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Default damping of the fixed-point update.
pub const SOLVER_DAMPING: f64 = 0.5;

pub const SOLVER_MAX_ITERATIONS: usize = 100_000;

pub const HOMOTOPY_STEPS: usize = 64;

/// Probabilities are floored here before taking logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Relative slack used when comparing a regret or Hurwicz value against its threshold.
/// Weak inequalities in the focal-set definitions must survive float rounding of the mean.
pub const THRESHOLD_SLACK: f64 = 1e-9;

/// Largest sup-norm gap between a forward-solved equilibrium and the observed frequencies
/// for which a calibration still counts as a fit.
pub const CALIBRATION_FIT_TOLERANCE: f64 = 1e-2;

/// Slack in the cross-player log-odds comparison.
pub const CROSS_PLAYER_TOLERANCE: f64 = 1e-6;

/// The full set of tolerances, for callers that want to override them in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub simplex: f64,
    pub solver: f64,
    pub threshold_slack: f64,
    pub calibration_fit: f64,
    pub cross_player: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            simplex: SIMPLEX_TOLERANCE,
            solver: SOLVER_TOLERANCE,
            threshold_slack: THRESHOLD_SLACK,
            calibration_fit: CALIBRATION_FIT_TOLERANCE,
            cross_player: CROSS_PLAYER_TOLERANCE,
        }
    }
}
