//! Experiment configuration: declarative TOML with `[experiment]` and
//! `[pose]` sections plus `[[problems]]`, `[[algorithms]]`, and
//! `[[criteria]]` tables. Command-line flags override config keys.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use posebench::criteria::{
    CriterionConfig, EpsParams, EscMode, EscParams, IscParams, MgbmParams, OcdIndicator, OcdParams,
};
use posebench::optimizer::EvolverConfig;
use posebench::problems::{ProblemId, ProblemSpec};
use posebench::trace::Encoding;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    #[serde(default)]
    pose: RawPose,
    #[serde(default)]
    problems: Vec<RawProblem>,
    #[serde(default)]
    algorithms: Vec<RawAlgorithm>,
    #[serde(default)]
    criteria: Vec<RawCriterion>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    runs: usize,
    #[serde(default)]
    seed_base: u64,
    output_dir: Option<String>,
    /// Normalize snapshots with the problem's ideal/nadir before replay.
    #[serde(default = "default_true")]
    normalize: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPose {
    alpha: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    id: String,
    m: usize,
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    id: Option<String>,
    mu: usize,
    lambda: usize,
    fe_max: u64,
    sbx_eta: Option<f64>,
    sbx_prob: Option<f64>,
    pm_eta: Option<f64>,
    pm_prob: Option<f64>,
    encoding: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriterion {
    kind: String,
    name: Option<String>,
    // ocd
    window: Option<usize>,
    var_limit: Option<f64>,
    significance: Option<f64>,
    indicators: Option<Vec<String>>,
    // mgbm
    i_min: Option<f64>,
    r: Option<f64>,
    q: Option<f64>,
    x0: Option<f64>,
    p0: Option<f64>,
    // esc
    cells: Option<usize>,
    diss_tol: Option<f64>,
    mode: Option<String>,
    // epssc
    epsilon: Option<f64>,
    // isc / esc / epssc
    patience: Option<usize>,
}

/// One trace generator entry of the experiment.
#[derive(Debug, Clone)]
pub struct AlgorithmConfig {
    pub label: String,
    pub evolver: EvolverConfig,
    pub encoding: Encoding,
}

/// Fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub seed_base: u64,
    pub output_dir: PathBuf,
    pub normalize: bool,
    pub alpha: f64,
    pub delta: f64,
    pub problems: Vec<ProblemSpec>,
    pub algorithms: Vec<AlgorithmConfig>,
    pub criteria: Vec<(String, CriterionConfig)>,
    /// SHA-256 of the configuration file, stamped into every output file.
    pub config_hash: String,
}

/// Field overrides supplied on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub seed_base: Option<u64>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let config_hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        Self::resolve(raw, config_hash, overrides)
    }

    fn resolve(
        raw: RawConfig,
        config_hash: String,
        overrides: &Overrides,
    ) -> Result<Self, CliError> {
        if raw.experiment.runs < 1 {
            return Err(CliError::config("experiment.runs must be >= 1"));
        }
        if raw.problems.is_empty() {
            return Err(CliError::config(
                "at least one [[problems]] entry is required",
            ));
        }
        if raw.algorithms.is_empty() {
            return Err(CliError::config(
                "at least one [[algorithms]] entry is required",
            ));
        }
        if raw.criteria.is_empty() {
            return Err(CliError::config(
                "at least one [[criteria]] entry is required",
            ));
        }

        let output_dir = overrides
            .output_dir
            .clone()
            .or_else(|| raw.experiment.output_dir.as_ref().map(PathBuf::from))
            .ok_or_else(|| {
                CliError::config(
                    "output directory missing: set experiment.output_dir or pass --out",
                )
            })?;

        let alpha = overrides.alpha.or(raw.pose.alpha).unwrap_or(2.0);
        let delta = overrides.delta.or(raw.pose.delta).unwrap_or(0.0);
        if alpha.is_nan() || alpha < 1.0 {
            return Err(CliError::config(format!(
                "pose.alpha = {alpha} (must be >= 1)"
            )));
        }
        if delta.is_nan() || delta < 0.0 {
            return Err(CliError::config(format!(
                "pose.delta = {delta} (must be >= 0)"
            )));
        }

        let mut problems = Vec::new();
        for p in &raw.problems {
            let id: ProblemId =
                p.id.parse()
                    .map_err(|e| CliError::config(format!("[[problems]]: {e}")))?;
            let spec = match p.n {
                Some(n) => ProblemSpec::new(id, p.m, n),
                None => ProblemSpec::with_default_n(id, p.m),
            }
            .map_err(|e| CliError::config(format!("[[problems]] {id}: {e}")))?;
            if problems.contains(&spec) {
                return Err(CliError::config(format!(
                    "duplicate problem entry {id} with m = {}",
                    p.m
                )));
            }
            problems.push(spec);
        }

        let mut algorithms: Vec<AlgorithmConfig> = Vec::new();
        for a in &raw.algorithms {
            let label = a.id.clone().unwrap_or_else(|| {
                if a.lambda == 1 {
                    "nsga2-ss".into()
                } else {
                    "nsga2".into()
                }
            });
            if !valid_label(&label) {
                return Err(CliError::config(format!(
                    "algorithm id {label:?} may only contain letters, digits, '-' and '_'"
                )));
            }
            if algorithms.iter().any(|other| other.label == label) {
                return Err(CliError::config(format!(
                    "duplicate algorithm id {label:?}"
                )));
            }
            let mut evolver = EvolverConfig::new(a.mu, a.lambda, a.fe_max, 0);
            if let Some(v) = a.sbx_eta {
                evolver.sbx_eta = v;
            }
            if let Some(v) = a.sbx_prob {
                evolver.sbx_prob = v;
            }
            if let Some(v) = a.pm_eta {
                evolver.pm_eta = v;
            }
            evolver.pm_prob = a.pm_prob;
            evolver
                .validate()
                .map_err(|e| CliError::config(format!("[[algorithms]] {label}: {e}")))?;
            let encoding = match a.encoding.as_deref() {
                None => Encoding::Text,
                Some(text) => text.parse().map_err(|_| {
                    CliError::config(format!("[[algorithms]] {label}: unknown encoding {text:?}"))
                })?,
            };
            algorithms.push(AlgorithmConfig {
                label,
                evolver,
                encoding,
            });
        }

        let mut criteria = Vec::new();
        for c in &raw.criteria {
            let (name, config) = resolve_criterion(c)?;
            if criteria.iter().any(|(other, _)| *other == name) {
                return Err(CliError::config(format!(
                    "duplicate criterion name {name:?}"
                )));
            }
            criteria.push((name, config));
        }

        Ok(Self {
            runs: raw.experiment.runs,
            seed_base: overrides.seed_base.unwrap_or(raw.experiment.seed_base),
            output_dir,
            normalize: raw.experiment.normalize,
            alpha,
            delta,
            problems,
            algorithms,
            criteria,
            config_hash,
        })
    }

    /// Directory name of one run's archive.
    pub fn archive_name(problem: &ProblemSpec, algorithm: &str, seed: u64) -> String {
        format!("{}_m{}_{}_s{}", problem.id, problem.m, algorithm, seed)
    }

    pub fn archives_dir(&self) -> PathBuf {
        self.output_dir.join("archives")
    }

    /// Provenance line embedded at the top of every output file.
    pub fn provenance(&self) -> String {
        format!(
            "# posebench {} config=sha256:{}",
            env!("CARGO_PKG_VERSION"),
            self.config_hash
        )
    }
}

fn resolve_criterion(raw: &RawCriterion) -> Result<(String, CriterionConfig), CliError> {
    let reject_foreign = |allowed: &[&str]| -> Result<(), CliError> {
        let set_fields: &[(&str, bool)] = &[
            ("window", raw.window.is_some()),
            ("var_limit", raw.var_limit.is_some()),
            ("significance", raw.significance.is_some()),
            ("indicators", raw.indicators.is_some()),
            ("i_min", raw.i_min.is_some()),
            ("r", raw.r.is_some()),
            ("q", raw.q.is_some()),
            ("x0", raw.x0.is_some()),
            ("p0", raw.p0.is_some()),
            ("cells", raw.cells.is_some()),
            ("diss_tol", raw.diss_tol.is_some()),
            ("mode", raw.mode.is_some()),
            ("epsilon", raw.epsilon.is_some()),
            ("patience", raw.patience.is_some()),
        ];
        for (field, set) in set_fields {
            if *set && !allowed.contains(field) {
                return Err(CliError::config(format!(
                    "criterion {:?} does not take the {field:?} key",
                    raw.kind
                )));
            }
        }
        Ok(())
    };

    let config = match raw.kind.as_str() {
        "ocd" => {
            reject_foreign(&["window", "var_limit", "significance", "indicators"])?;
            let mut params = OcdParams::default();
            if let Some(v) = raw.window {
                params.window = v;
            }
            if let Some(v) = raw.var_limit {
                params.var_limit = v;
            }
            if let Some(v) = raw.significance {
                params.significance = v;
            }
            if let Some(names) = &raw.indicators {
                let mut indicators = Vec::new();
                for name in names {
                    indicators.push(match name.as_str() {
                        "hv" => OcdIndicator::Hv,
                        "epsilon" => OcdIndicator::Epsilon,
                        "r2" => OcdIndicator::R2,
                        other => {
                            return Err(CliError::config(format!(
                                "unknown ocd indicator {other:?} (expected hv, epsilon, r2)"
                            )))
                        }
                    });
                }
                params.indicators = indicators;
            }
            CriterionConfig::Ocd(params)
        }
        "mgbm" => {
            reject_foreign(&["i_min", "r", "q", "x0", "p0"])?;
            let mut params = MgbmParams::default();
            if let Some(v) = raw.i_min {
                params.i_min = v;
            }
            if let Some(v) = raw.r {
                params.r = v;
            }
            if let Some(v) = raw.q {
                params.q = v;
            }
            if let Some(v) = raw.x0 {
                params.x0 = v;
            }
            if let Some(v) = raw.p0 {
                params.p0 = v;
            }
            CriterionConfig::Mgbm(params)
        }
        "esc" => {
            reject_foreign(&["cells", "diss_tol", "mode", "patience"])?;
            let mut params = EscParams::default();
            if let Some(v) = raw.cells {
                params.cells_per_objective = v;
            }
            if let Some(v) = raw.diss_tol {
                params.diss_tol = v;
            }
            if let Some(v) = raw.patience {
                params.patience = v;
            }
            if let Some(mode) = &raw.mode {
                params.mode = match mode.as_str() {
                    "stability" => EscMode::Stability,
                    "threshold" => EscMode::Threshold,
                    other => {
                        return Err(CliError::config(format!(
                            "unknown esc mode {other:?} (expected stability or threshold)"
                        )))
                    }
                };
            }
            CriterionConfig::Esc(params)
        }
        "epssc" => {
            reject_foreign(&["epsilon", "patience"])?;
            let mut params = EpsParams::default();
            if let Some(v) = raw.epsilon {
                params.epsilon = v;
            }
            if let Some(v) = raw.patience {
                params.patience = v;
            }
            CriterionConfig::EpsProgress(params)
        }
        "isc" => {
            reject_foreign(&["patience"])?;
            let mut params = IscParams::default();
            if let Some(v) = raw.patience {
                params.patience = v;
            }
            CriterionConfig::Isc(params)
        }
        other => {
            return Err(CliError::config(format!(
                "unknown criterion kind {other:?} (expected ocd, mgbm, esc, epssc, isc)"
            )))
        }
    };

    let name = raw.name.clone().unwrap_or_else(|| raw.kind.clone());
    if !valid_label(&name) {
        return Err(CliError::config(format!(
            "criterion name {name:?} may only contain letters, digits, '-' and '_'"
        )));
    }

    // Parameter invariants are enforced by the criterion constructors; fail
    // now rather than mid-replay.
    let probe = posebench::RunMeta {
        m: 2,
        mu: 2,
        lambda: 1,
        t_max: 1,
        problem_id: "dtlz1".into(),
        algorithm_id: "probe".into(),
        seed: 0,
        encoding: Encoding::Text,
    };
    config
        .build(&probe)
        .map_err(|e| CliError::config(format!("criterion {name}: {e}")))?;

    Ok((name, config))
}
