//! Scenario file schema (JSON, versioned, unknown fields rejected) and its
//! mapping onto core types.

use serde::{Deserialize, Serialize};

use gwp_core::coef::Coef;
use gwp_core::propagator::{ForceSpec, PulseSegment, SignBranch};
use gwp_core::state::GaussianState;
use gwp_core::trigger::QVariant;

pub const SCENARIO_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: String,
    pub units: Units,
    pub initial_state: StateSpec,
    pub task: Task,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub mass: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub x_center: f64,
    pub mean_momentum: f64,
    pub delta_sq: f64,
    pub tw: f64,
    /// Omit to leave the global phase untracked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Results document filename inside the output directory.
    #[serde(default = "default_results_name")]
    pub results: String,
    /// Trajectory CSV filename; omit to skip the trajectory table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    /// Fixed snapshot spacing; per-segment snapshots when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_dt: Option<f64>,
}

fn default_results_name() -> String {
    "results.json".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    /// Apply a segment schedule to the initial state.
    Evolve { segments: Vec<SegmentSpec> },
    /// Solve for the two-pulse pair reaching a target complex linewidth.
    DesignLinewidth {
        target: TargetSpec,
        omega: f64,
        t0: f64,
        /// Additionally solve `count` random feasible targets (seeded by
        /// --seed) and report the worst recovery error.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_targets: Option<usize>,
    },
    /// Solve the harmonic sandwich realizing inverse free flight.
    DesignInverseFree {
        t: f64,
        omega1: f64,
        omega2: f64,
        #[serde(default)]
        branch: BranchSpec,
    },
    /// Compile and run a state-selective trigger program.
    Trigger {
        trap_omega: f64,
        rabi: f64,
        k0: f64,
        k1: f64,
        alpha: f64,
        delta_t: f64,
        variant: VariantSpec,
        /// Split the kick into `blocks^2`-fold shorter blocks (total kick
        /// preserved); 1 = single sequence.
        #[serde(default = "one")]
        blocks: usize,
        fock_levels: usize,
        branches: Vec<BranchLabel>,
    },
    /// Run an inner task and cross-check it against the brute-force oracle.
    Verify {
        task: Box<Task>,
        #[serde(default)]
        oracle: OracleSpec,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub delta_y_sq: f64,
    pub tw: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BranchSpec {
    #[default]
    Upper,
    Lower,
}

impl From<BranchSpec> for SignBranch {
    fn from(b: BranchSpec) -> Self {
        match b {
            BranchSpec::Upper => SignBranch::Upper,
            BranchSpec::Lower => SignBranch::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantSpec {
    Basic,
    Improved,
    Realizable,
}

impl From<VariantSpec> for QVariant {
    fn from(v: VariantSpec) -> Self {
        match v {
            VariantSpec::Basic => QVariant::Basic,
            VariantSpec::Improved => QVariant::Improved,
            VariantSpec::Realizable => QVariant::Realizable,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BranchLabel {
    G0,
    G1,
    E,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    /// Grid points (power of two).
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Half-width in units of the largest packet spreading.
    #[serde(default = "default_padding")]
    pub padding: f64,
    /// Oracle time step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Minimum acceptable analytic-vs-oracle fidelity.
    #[serde(default = "default_fidelity_tol")]
    pub fidelity_tolerance: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            grid_n: default_grid_n(),
            padding: default_padding(),
            dt: default_dt(),
            fidelity_tolerance: default_fidelity_tol(),
        }
    }
}

fn default_grid_n() -> usize {
    2048
}
fn default_padding() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_fidelity_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Free { t: f64 },
    InverseFree { t: f64 },
    Harmonic { omega: f64, t: f64 },
    InverseHarmonic { omega: f64, t_prime: f64 },
    ForcedHarmonic { omega: f64, t: f64, force: ForceSpecDto },
    GeneralQuadratic { b: CoefSpec, c: CoefSpec, d: CoefSpec, f: CoefSpec, t: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSpecDto {
    pub shape: CoefSpec,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
}

fn default_quad_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefSpec {
    Zero,
    Constant { value: f64 },
    Cos { amp: f64, freq: f64, phase: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl From<&CoefSpec> for Coef {
    fn from(c: &CoefSpec) -> Self {
        match c {
            CoefSpec::Zero => Coef::Zero,
            CoefSpec::Constant { value } => Coef::Const(*value),
            CoefSpec::Cos { amp, freq, phase } => {
                Coef::Cos { amp: *amp, freq: *freq, phase: *phase }
            }
            CoefSpec::Table { times, values } => {
                Coef::Table { times: times.clone(), values: values.clone() }
            }
        }
    }
}

impl SegmentSpec {
    pub fn to_segment(&self) -> PulseSegment {
        match self {
            SegmentSpec::Free { t } => PulseSegment::Free { t: *t },
            SegmentSpec::InverseFree { t } => PulseSegment::InverseFree { t: *t },
            SegmentSpec::Harmonic { omega, t } => {
                PulseSegment::Harmonic { omega: *omega, t: *t }
            }
            SegmentSpec::InverseHarmonic { omega, t_prime } => {
                PulseSegment::InverseHarmonic { omega: *omega, t_prime: *t_prime }
            }
            SegmentSpec::ForcedHarmonic { omega, t, force } => PulseSegment::ForcedHarmonic {
                omega: *omega,
                t: *t,
                force: ForceSpec { shape: (&force.shape).into(), quad_tol: force.quad_tol },
            },
            SegmentSpec::GeneralQuadratic { b, c, d, f, t } => PulseSegment::GeneralQuadratic {
                b: b.into(),
                c: c.into(),
                d: d.into(),
                f: f.into(),
                t: *t,
            },
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, String> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if sc.version != SCENARIO_VERSION {
            return Err(format!(
                "unsupported scenario version {:?} (expected {:?})",
                sc.version, SCENARIO_VERSION
            ));
        }
        if !(sc.units.mass > 0.0) || !(sc.units.hbar > 0.0) {
            return Err("units: mass and hbar must be positive".into());
        }
        Ok(sc)
    }

    pub fn initial_state(&self) -> Result<GaussianState, gwp_core::Error> {
        GaussianState::new(
            self.units.mass,
            self.units.hbar,
            self.initial_state.x_center,
            self.initial_state.mean_momentum,
            self.initial_state.delta_sq,
            self.initial_state.tw,
            self.initial_state.phase,
        )
    }
}

/// State serialization for results documents and follow-up scenarios.
pub fn state_to_spec(s: &GaussianState) -> StateSpec {
    StateSpec {
        x_center: s.x_center(),
        mean_momentum: s.mean_momentum(),
        delta_sq: s.delta_sq(),
        tw: s.tw(),
        phase: s.phase(),
    }
}

/// The scenario schema as a human- and machine-readable JSON document.
pub fn schema_text() -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "version": SCENARIO_VERSION,
        "description": "gwp scenario file",
        "fields": {
            "version": "string, must be \"1\"",
            "units": { "mass": "f64 > 0", "hbar": "f64 > 0" },
            "initial_state": {
                "x_center": "f64", "mean_momentum": "f64",
                "delta_sq": "f64 > 0 (real linewidth part)",
                "tw": "f64 (imaginary linewidth part, time units)",
                "phase": "optional f64; omit for untracked global phase"
            },
            "task": {
                "evolve": { "segments": "[{kind: free|inverse_free|harmonic|inverse_harmonic|forced_harmonic|general_quadratic, ...}]" },
                "design_linewidth": { "target": { "delta_y_sq": "f64 > 0", "tw": "f64" }, "omega": "f64 > 0", "t0": "f64 >= 0", "random_targets": "optional usize" },
                "design_inverse_free": { "t": "f64 > 0", "omega1": "f64 > 0", "omega2": "f64 > 0", "branch": "upper|lower" },
                "trigger": { "trap_omega": "f64 > 0", "rabi": "f64 > 0", "k0": "f64", "k1": "f64", "alpha": "f64", "delta_t": "f64 > 0", "variant": "basic|improved|realizable", "blocks": "usize >= 1", "fock_levels": "usize >= 4", "branches": "[g0|g1|e]" },
                "verify": { "task": "inner task object", "oracle": { "grid_n": "power of two >= 256", "padding": "f64", "dt": "f64 > 0", "fidelity_tolerance": "f64" } }
            },
            "output": {
                "results": "results filename (default results.json)",
                "trajectory": "optional CSV filename",
                "snapshot_dt": "optional f64; per-segment snapshots when omitted"
            }
        },
        "coefficients": {
            "zero": {}, "constant": { "value": "f64" },
            "cos": { "amp": "f64", "freq": "f64", "phase": "f64" },
            "table": { "times": "[f64] strictly increasing", "values": "[f64]" }
        },
        "exit_codes": {
            "0": "success", "1": "io or usage error", "2": "schema error",
            "3": "solver infeasibility", "4": "numeric failure",
            "5": "verification tolerance failure"
        }
    }))
    .expect("static schema serializes")
}
