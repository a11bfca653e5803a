//! Experiment configuration: versioned JSON with strict schemas. Unknown
//! keys are rejected and parse errors carry the offending field path.

use serde::Deserialize;

use crate::matrixjson::MatrixJson;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level file layout; `params` is parsed per experiment kind.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    pub params: serde_json::Value,
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Filename prefix for emitted artifacts; defaults to the experiment name.
    #[serde(default)]
    pub prefix: Option<String>,
}

#[derive(Debug)]
pub enum Params {
    Channels(ChannelsParams),
    Timer(TimerParams),
    Switch(SwitchParams),
    Compile(CompileParams),
    Qa(QaParams),
    Condense(CondenseParams),
    Nogo(NogoParams),
    Spt(SptParams),
    Evolve(EvolveParams),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsParams {
    pub cases: usize,
    /// Random evolution times are drawn from `[t_min, t_max]`.
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimerParams {
    pub levels: usize,
    pub gamma: f64,
    /// Sample times for the occupation CSV.
    pub times: Vec<f64>,
    /// T values for the bound-comparison CSV (same tau as levels/gamma).
    pub ladder: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchParams {
    /// Register-level ladder.
    pub ladder: Vec<usize>,
    /// Measurement time (the switch fires at tau = 1).
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileParams {
    pub circuit: CircuitJson,
    /// Levels per stage ladder.
    pub ladder: Vec<usize>,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Optional pure target ket to measure distances against; defaults to
    /// the exact circuit output.
    #[serde(default)]
    pub target: Option<StateSpec>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    /// Per-site local dimensions (site 0 slowest).
    pub dims: Vec<usize>,
    pub layers: Vec<LayerJson>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct LayerJson {
    pub gates: Vec<GateJson>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct GateJson {
    pub support: Vec<usize>,
    pub unitary: MatrixJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaParams {
    pub path: PathSpec,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Filter truncation in units of the inverse gap; guarded against tails.
    #[serde(default = "default_t_cut")]
    pub t_cut_over_gap: f64,
    /// Shell decomposition request: (center, alpha).
    #[serde(default)]
    pub delta: Option<DeltaSpec>,
    #[serde(default)]
    pub patch: Option<PatchSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum PathSpec {
    SingleQubit,
    Uncoupled { n: usize },
    ParamagneticChain { n: usize, h0: f64, h1: f64, j: f64 },
    ParamagneticRing { n: usize, h0: f64, h1: f64, j: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaSpec {
    pub center: usize,
    pub alpha: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub region: Vec<usize>,
    pub omegas: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenseParams {
    pub n_sites: usize,
    pub times: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NogoParams {
    /// Depolarizing rate ladder.
    pub rates: Vec<f64>,
    pub t: f64,
    pub ell: usize,
    #[serde(default)]
    pub x_col: usize,
    #[serde(default)]
    pub y_row: usize,
    /// Optional GHZ probe ran alongside; results land in the summary.
    #[serde(default)]
    pub ghz: Option<GhzProbeSpec>,
    /// Random ground-space kets for the basis-generation check.
    #[serde(default)]
    pub generation_samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzProbeSpec {
    pub m: usize,
    pub n: usize,
    pub n_sites: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SptParams {
    pub sites_per_factor: usize,
    pub t_bridge: f64,
    pub times: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub model: ModelSpec,
    pub rho0: StateSpec,
    #[serde(default)]
    pub target: Option<StateSpec>,
    pub times: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    AmplitudeDamping {
        gamma: f64,
    },
    /// Product driver toward a single-site target on a uniform ring.
    ProductDriver {
        n_sites: usize,
        target: MatrixJson,
    },
    GhzCondense {
        n_sites: usize,
    },
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Basis { dims: Vec<usize>, index: usize },
    Ghz { levels: Vec<usize>, n_sites: usize, local_dim: usize },
    Ket { amplitudes: MatrixJson },
}

fn default_tol() -> f64 {
    1e-9
}

fn default_steps() -> usize {
    200
}

fn default_mode() -> String {
    "filtered_local".into()
}

fn default_t_cut() -> f64 {
    40.0
}

#[derive(Debug)]
pub struct Config {
    pub seed: u64,
    pub experiment: String,
    pub prefix: String,
    pub params: Params,
}

/// Parse and validate a config against the subcommand's experiment kind.
pub fn parse_config(text: &str, expected_experiment: &str) -> Result<Config, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| format!("config error at `{}`: {}", e.path(), e.inner()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "config error at `schema_version`: expected {SCHEMA_VERSION}, got {}",
            raw.schema_version
        ));
    }
    if raw.experiment != expected_experiment {
        return Err(format!(
            "config error at `experiment`: config says `{}` but the `{expected_experiment}` subcommand was invoked",
            raw.experiment
        ));
    }
    let parse_params = |v: serde_json::Value| -> Result<Params, String> {
        let wrap = |e: serde_path_to_error::Error<serde_json::Error>| {
            format!("config error at `params.{}`: {}", e.path(), e.inner())
        };
        let out = match expected_experiment {
            "channels" => Params::Channels(
                serde_path_to_error::deserialize(v).map_err(wrap)?,
            ),
            "timer" => Params::Timer(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "switch" => Params::Switch(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "compile" => Params::Compile(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "qa" => Params::Qa(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "condense" => Params::Condense(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "nogo" => Params::Nogo(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "spt" => Params::Spt(serde_path_to_error::deserialize(v).map_err(wrap)?),
            "evolve" => Params::Evolve(serde_path_to_error::deserialize(v).map_err(wrap)?),
            other => return Err(format!("unknown experiment kind `{other}`")),
        };
        Ok(out)
    };
    let prefix = raw
        .output
        .prefix
        .clone()
        .unwrap_or_else(|| raw.experiment.clone());
    Ok(Config {
        seed: raw.seed,
        experiment: raw.experiment,
        prefix,
        params: parse_params(raw.params)?,
    })
}
