//! Experiment specifications: every CLI invocation is normalized into an
//! `ExperimentSpec`, validated up front, then dispatched. A spec can also
//! be loaded directly from JSON via `--config`.

use serde::{Deserialize, Serialize};

use ergodia::CrossDist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputFormat::Csv => write!(f, "csv"),
            OutputFormat::Json => write!(f, "json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { path: None, format: OutputFormat::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub snr: f64,
    pub phase_bins: u32,
    pub uses: u64,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub exact: bool,
    /// Defaults to constant(snr); the resolved distribution is echoed in
    /// the output metadata.
    #[serde(default)]
    pub cross_dist: Option<CrossDist>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountParams {
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub snr: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    #[serde(rename = "Ks")]
    pub ks: Vec<usize>,
    pub snr: f64,
    pub eps: f64,
    pub cross_dist: CrossDist,
    pub trials: u64,
    /// Optional second artifact with one row per (K, trial).
    #[serde(default)]
    pub trial_output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityParams {
    pub snr: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InseparabilityParams {
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum CommandSpec {
    SimulateAlignment(AlignmentParams),
    ClassifyBottleneck(ClassifyParams),
    CountMinimal(CountParams),
    Bounds(BoundsParams),
    Scaling(ScalingParams),
    SeparabilityDemo(SeparabilityParams),
    InseparabilityDemo(InseparabilityParams),
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::SimulateAlignment(_) => "simulate-alignment",
            CommandSpec::ClassifyBottleneck(_) => "classify-bottleneck",
            CommandSpec::CountMinimal(_) => "count-minimal",
            CommandSpec::Bounds(_) => "bounds",
            CommandSpec::Scaling(_) => "scaling",
            CommandSpec::SeparabilityDemo(_) => "separability-demo",
            CommandSpec::InseparabilityDemo(_) => "inseparability-demo",
        }
    }

    /// Stochastic commands must carry a seed.
    pub fn needs_seed(&self) -> bool {
        matches!(self, CommandSpec::SimulateAlignment(_) | CommandSpec::Scaling(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub command: CommandSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn check_snr(snr: f64, diagnostics: &mut Vec<String>) {
    if !snr.is_finite() || snr <= 0.0 {
        diagnostics.push(format!("snr must be positive, got {snr}"));
    }
}

fn check_k(k: usize, diagnostics: &mut Vec<String>) {
    if k < 2 {
        diagnostics.push(format!("K must be at least 2, got {k}"));
    }
}

fn check_links(k: usize, links: &[(usize, usize)], diagnostics: &mut Vec<String>) {
    for &(r, t) in links {
        if r == t {
            diagnostics.push(format!("link {r}:{t} is a self-loop"));
        } else if r < 1 || t < 1 || r > k || t > k {
            diagnostics.push(format!("link {r}:{t} has an endpoint outside 1..={k}"));
        }
    }
}

/// Schema and range checks; an empty list means the spec is runnable.
pub fn validate(spec: &ExperimentSpec) -> Vec<String> {
    let mut diagnostics = Vec::new();
    if spec.command.needs_seed() && spec.seed.is_none() {
        diagnostics.push("seed required: pass --seed, set it in the config, or export ERGODIA_SEED".into());
    }
    match &spec.command {
        CommandSpec::SimulateAlignment(p) => {
            check_k(p.k, &mut diagnostics);
            check_snr(p.snr, &mut diagnostics);
            if p.phase_bins < 2 || p.phase_bins % 2 != 0 {
                diagnostics.push(format!("phase_bins must be even and at least 2, got {}", p.phase_bins));
            }
            if p.uses == 0 {
                diagnostics.push("uses must be at least 1".into());
            }
            if p.trials == 0 {
                diagnostics.push("trials must be at least 1".into());
            }
            if let Some(dist) = &p.cross_dist {
                if let Err(e) = dist.validate() {
                    diagnostics.push(e.to_string());
                }
            }
        }
        CommandSpec::ClassifyBottleneck(p) => {
            check_k(p.k, &mut diagnostics);
            check_links(p.k, &p.links, &mut diagnostics);
        }
        CommandSpec::CountMinimal(p) => {
            check_k(p.k, &mut diagnostics);
            if p.k % 2 != 0 {
                diagnostics.push(format!(
                    "the closed-form count covers even K only, got {}",
                    p.k
                ));
            }
        }
        CommandSpec::Bounds(p) => {
            check_k(p.k, &mut diagnostics);
            check_snr(p.snr, &mut diagnostics);
            if !p.eps.is_finite() || p.eps < 0.0 {
                diagnostics.push(format!("eps must be non-negative, got {}", p.eps));
            }
            check_links(p.k, &p.links, &mut diagnostics);
        }
        CommandSpec::Scaling(p) => {
            if p.ks.is_empty() {
                diagnostics.push("need at least one K".into());
            }
            for &k in &p.ks {
                check_k(k, &mut diagnostics);
            }
            check_snr(p.snr, &mut diagnostics);
            if !p.eps.is_finite() || p.eps <= 0.0 {
                diagnostics.push(format!("eps must be positive, got {}", p.eps));
            }
            if p.trials == 0 {
                diagnostics.push("trials must be at least 1".into());
            }
            if let Err(e) = p.cross_dist.validate() {
                diagnostics.push(e.to_string());
            }
        }
        CommandSpec::SeparabilityDemo(p) => {
            check_snr(p.snr, &mut diagnostics);
            if !p.alpha.is_finite() || p.alpha < 0.0 {
                diagnostics.push(format!("alpha must be non-negative, got {}", p.alpha));
            }
        }
        CommandSpec::InseparabilityDemo(p) => {
            check_snr(p.snr, &mut diagnostics);
        }
    }
    diagnostics
}
