//! Frozen tolerances for every experiment verdict.

use serde_json::{json, Value};

/// Relative slack on energy comparisons between table cells.
pub const TABLE_RELATIVE: f64 = 1e-4;
/// Composite strict inequality is only judged for `h` at or above this.
pub const COMPOSITE_MIN_H: f64 = 0.95;
/// Decoupling limit of the splitting diagnostic.
pub const DECOUPLING_RELATIVE: f64 = 0.02;
/// Sign-pattern violation allowed by the structure check.
pub const STRUCTURE_VIOLATION: f64 = 1e-6;
/// Accepted log-corrected tail slope range.
pub const DECAY_SLOPE: (f64, f64) = (-2.5, -1.6);
/// Minimum wall-to-boundary gap for a tail fit.
pub const DECAY_MIN_GAP: f64 = 20.0;
/// Slack below the exponent `2/11` for the positive-part fit.
pub const L1_EXPONENT_SLACK: f64 = 0.05;
/// Wall-set diameter ratio across an `h` ladder.
pub const WIDTH_RATIO: f64 = 2.0;
/// Agreement of `aux_inf` with its numeric scan.
pub const AUX_INF: f64 = 1e-9;
/// Relative slack on quadrature-based inequality checks.
pub const QUADRATURE_RELATIVE: f64 = 1e-6;
/// Equipartition defect of converged minimisers.
pub const EQUIPARTITION: f64 = 0.02;

pub fn manifest() -> Value {
    json!({
        "table_relative": TABLE_RELATIVE,
        "composite_min_h": COMPOSITE_MIN_H,
        "decoupling_relative": DECOUPLING_RELATIVE,
        "structure_violation": STRUCTURE_VIOLATION,
        "decay_slope": [DECAY_SLOPE.0, DECAY_SLOPE.1],
        "decay_min_gap": DECAY_MIN_GAP,
        "l1_exponent_slack": L1_EXPONENT_SLACK,
        "width_ratio": WIDTH_RATIO,
        "aux_inf": AUX_INF,
        "quadrature_relative": QUADRATURE_RELATIVE,
        "equipartition": EQUIPARTITION,
    })
}
