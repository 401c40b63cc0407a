use serde::{Deserialize, Serialize};

/// Raw JSON problem document. Every coefficient is an expression string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Characteristic speed of the `u` equation, a function of `u`.
    pub lambda: String,
    /// Characteristic speed of the `v` equation, a function of `u, v`.
    pub mu: String,
    pub f: String,
    pub g: String,
    /// Flux of `u`; its derivative must equal `lambda`.
    #[serde(rename = "Lambda")]
    pub u_flux: String,
    /// Second conserved density.
    #[serde(rename = "Phi")]
    pub density: String,
    /// Flux of the second conserved density.
    #[serde(rename = "Psi")]
    pub density_flux: String,
    pub initial: InitialConfig,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub numerics: NumericsSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u_left: String,
    pub u_right: String,
    pub v_left: String,
    pub v_right: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub dt: f64,
    #[serde(default = "default_fan_count")]
    pub fan_count: usize,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    #[serde(default = "default_fv_cells")]
    pub fv_cells: usize,
    #[serde(default = "default_fv_cfl")]
    pub fv_cfl: f64,
    pub fv_domain: [f64; 2],
    pub state_box: StateBoxSection,
    /// Number of equally spaced reference output times in `(0, T]`.
    #[serde(default = "default_fv_outputs")]
    pub fv_outputs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBoxSection {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

fn default_fan_count() -> usize {
    64
}

fn default_newton_tol() -> f64 {
    1e-13
}

fn default_newton_max_iter() -> usize {
    60
}

fn default_fv_cells() -> usize {
    2048
}

fn default_fv_cfl() -> f64 {
    0.9
}

fn default_fv_outputs() -> usize {
    4
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
