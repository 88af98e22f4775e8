//! Thresholds that were calibrated once by a sweep and are now frozen.
//! The numbers live in `fixtures/calibration.toml`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CALIBRATION_TOML: &str = include_str!("../../fixtures/calibration.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub version: u32,
    /// Smallest `k` of `k_ladder` for which the coercivity ratio is at least
    /// 1/4 and `|B(E, G)| <= ‖G‖_ω²/16` on the calibration grid.
    pub k_star: f64,
    pub k_ladder: Vec<f64>,
    pub grid_n: Vec<usize>,
    pub grid_eps: Vec<f64>,
    /// Largest coercivity ratio deficit seen, for reference.
    pub min_coercivity_ratio: f64,
    pub max_form_error_ratio: f64,
    /// Anchor-value implied constant: allowed growth factor between the
    /// coarsest and finest mesh of a sweep.
    pub anchor_constant_growth: f64,
    /// Upper bound on `‖ω^{1/2}E‖_{coarse} k N^{1/2} / ‖G‖_ω` over N = 16..128.
    pub interpolation_constant_bound: f64,
    /// `M_4 / M_1` bound in the decay experiment.
    pub ring_ratio_bound: f64,
}

impl Calibration {
    pub fn embedded() -> Self {
        Self::from_toml(CALIBRATION_TOML).expect("embedded calibration file is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
