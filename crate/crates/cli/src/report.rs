//! JSON summary types. Field order is declaration order, and floats print
//! through the shortest round-trip form, so identical runs serialize to
//! identical bytes.

use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub gating: bool,
    /// "pass", "fail", or "skipped".
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub note: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn blocks(&self) -> bool {
        self.gating && self.status == "fail"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub field: String,
    pub exponent: f64,
    pub std_error: f64,
    pub n_points: usize,
    pub window_r_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub solver: String,
    pub n_records: usize,
    pub final_t: f64,
    pub final_radius: f64,
    pub final_max_rho: f64,
    pub fits: Vec<FitReport>,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub t: f64,
    pub n_cells: usize,
    pub max_abs_du: f64,
    pub max_abs_drho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub invocation: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossValidation>,
    pub all_pass: bool,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOrder {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub l1_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldOrders {
    pub field: String,
    pub differences: Vec<GridOrder>,
    pub observed_orders: Vec<f64>,
    /// The last entry of `observed_orders`: the finest-pair estimate.
    pub observed_order: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub grids: Vec<usize>,
    pub scheme: String,
    pub min_order: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<f64>,
    pub fields: Vec<FieldOrders>,
    pub all_pass: bool,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
