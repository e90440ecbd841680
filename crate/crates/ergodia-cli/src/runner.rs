//! Dispatch from a validated `ExperimentSpec` to the library, plus the
//! CSV/JSON artifact rendering. Every artifact opens with a metadata
//! header (tool version, spec echo, seed, wall time); rerunning the same
//! spec with the same seed reproduces everything byte for byte except the
//! wall-time field.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use ergodia::{
    certificate, classify, count_minimal_states, ergodic_alignment_rate, minimal_link_count,
    run_alignment_trials, scaling_experiment, BottleneckGraph, CrossDist, MatchStats,
    NetworkConfig, PairingMode, RateBound,
};

use crate::spec::{CommandSpec, ExperimentSpec, OutputFormat, OutputSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A rendered artifact and where it should go.
pub struct Artifact {
    pub payload: String,
    pub output: OutputSpec,
}

pub struct RunOutcome {
    /// Short human-readable line for stdout (class name, count, summary).
    pub stdout_line: Option<String>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug)]
pub enum RunError {
    Invalid(Vec<String>),
    Runtime(String),
}

impl From<ergodia::Error> for RunError {
    fn from(e: ergodia::Error) -> Self {
        match e {
            ergodia::Error::Config(m) | ergodia::Error::Domain(m) => RunError::Invalid(vec![m]),
            ergodia::Error::Resource(m) => RunError::Runtime(m),
        }
    }
}

struct Meta {
    command: String,
    spec_echo: String,
    seed: Option<u64>,
    wall_time_s: f64,
}

impl Meta {
    fn csv_header(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# ergodia {TOOL_VERSION}\n# command: {}\n# spec: {}\n# seed: {}\n# wall_time_s: {:.3}\n",
            self.command, self.spec_echo, seed, self.wall_time_s
        )
    }

    fn json_value(&self) -> serde_json::Value {
        json!({
            "tool_version": TOOL_VERSION,
            "command": self.command,
            "spec": serde_json::from_str::<serde_json::Value>(&self.spec_echo).unwrap_or(serde_json::Value::Null),
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
        })
    }
}

fn render<T: Serialize>(meta: &Meta, format: OutputFormat, csv_body: &str, data: &T) -> String {
    match format {
        OutputFormat::Csv => format!("{}{}", meta.csv_header(), csv_body),
        OutputFormat::Json => {
            let document = json!({ "meta": meta.json_value(), "data": data });
            let mut text = serde_json::to_string_pretty(&document).expect("serializable");
            text.push('\n');
            text
        }
    }
}

fn fmt_f64(value: f64) -> String {
    format!("{value:.6}")
}

/// Executes a validated spec. The `seed` inside the spec must already be
/// resolved (flag, config file, or ERGODIA_SEED).
pub fn execute(spec: &ExperimentSpec) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let spec_echo = serde_json::to_string(spec).expect("spec is serializable");
    let mut meta = Meta {
        command: spec.command.name().to_string(),
        spec_echo,
        seed: spec.seed,
        wall_time_s: 0.0,
    };

    match &spec.command {
        CommandSpec::SimulateAlignment(p) => {
            let cross = p.cross_dist.clone().unwrap_or(CrossDist::Constant { value: p.snr });
            let seed = spec.seed.expect("validated");
            let config = NetworkConfig::new(p.k, p.snr, cross, p.phase_bins, seed)
                .map_err(RunError::from)?;
            let mode = if p.exact { PairingMode::Exact } else { PairingMode::Quantized };
            let stats = run_alignment_trials(&config, p.uses, mode, p.trials)?;
            let theory = ergodic_alignment_rate(p.snr)?;

            let mut body = String::new();
            write!(body, "K,snr,B,N,matched_fraction").unwrap();
            for user in 1..=p.k {
                write!(body, ",rate_user_{user}").unwrap();
            }
            writeln!(body, ",theory_rate").unwrap();
            for s in &stats {
                write!(
                    body,
                    "{},{},{},{},{}",
                    p.k,
                    p.snr,
                    p.phase_bins,
                    p.uses,
                    fmt_f64(s.matched_fraction)
                )
                .unwrap();
                for rate in &s.per_user_rate {
                    write!(body, ",{}", fmt_f64(*rate)).unwrap();
                }
                writeln!(body, ",{}", fmt_f64(theory)).unwrap();
            }

            let mean_rate =
                stats.iter().map(MatchStats::mean_rate).sum::<f64>() / stats.len() as f64;
            let mean_matched =
                stats.iter().map(|s| s.matched_fraction).sum::<f64>() / stats.len() as f64;
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "config": config,
                "mode": if p.exact { "exact" } else { "quantized" },
                "theory_rate": theory,
                "trials": stats,
            });
            let payload = render(&meta, spec.output.format, &body, &data);
            Ok(RunOutcome {
                stdout_line: Some(format!(
                    "mean_rate={mean_rate:.6} matched_fraction={mean_matched:.6} theory_rate={theory:.6}"
                )),
                artifacts: vec![Artifact { payload, output: spec.output.clone() }],
            })
        }

        CommandSpec::ClassifyBottleneck(p) => {
            let graph =
                BottleneckGraph::new(p.k, p.links.iter().copied()).map_err(RunError::from)?;
            let class = classify(&graph);
            let witness = certificate(&graph);
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "class": class,
                "fpm_witness": witness.unwrap_or_default(),
            });
            let payload = render(&meta, OutputFormat::Json, "", &data);
            Ok(RunOutcome {
                stdout_line: Some(class.to_string()),
                artifacts: vec![Artifact {
                    payload,
                    output: OutputSpec { path: spec.output.path.clone(), format: OutputFormat::Json },
                }],
            })
        }

        CommandSpec::CountMinimal(p) => {
            let count = count_minimal_states(p.k).map_err(RunError::from)?;
            let links = minimal_link_count(p.k).map_err(RunError::from)?;
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "K": p.k,
                "minimal_link_count": links,
                "count": count.to_string(),
            });
            let payload = render(&meta, OutputFormat::Json, "", &data);
            Ok(RunOutcome {
                stdout_line: Some(count.to_string()),
                artifacts: vec![Artifact {
                    payload,
                    output: OutputSpec { path: spec.output.path.clone(), format: OutputFormat::Json },
                }],
            })
        }

        CommandSpec::Bounds(p) => {
            let edges: BTreeSet<(usize, usize)> = p
                .links
                .iter()
                .map(|&(r, t)| (r.min(t), r.max(t)))
                .collect();
            let bounds = [
                RateBound::single_user(p.snr)?,
                RateBound::pair_bottleneck(p.snr, p.eps)?,
                RateBound::sum_minimal_state(p.k, p.snr)?,
                RateBound::achievable_ia(p.k, p.snr)?,
                RateBound::lp_outer(p.k, p.snr, p.eps, &edges)?,
            ];
            let items: Vec<serde_json::Value> = bounds
                .iter()
                .map(|b| {
                    json!({
                        "kind": b.kind,
                        "value_bits": b.value,
                        "provenance": b.provenance,
                    })
                })
                .collect();
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let payload = render(&meta, OutputFormat::Json, "", &items);
            Ok(RunOutcome {
                stdout_line: None,
                artifacts: vec![Artifact {
                    payload,
                    output: OutputSpec { path: spec.output.path.clone(), format: OutputFormat::Json },
                }],
            })
        }

        CommandSpec::Scaling(p) => {
            let seed = spec.seed.expect("validated");
            let outcome =
                scaling_experiment(&p.ks, &p.cross_dist, p.snr, p.eps, p.trials, seed)?;

            let mut summary_body = String::from(
                "K,trials,delta_hat,outer_per_user_mean,gap_mean,freq_gap_gt_eps,cheb_bound\n",
            );
            for r in &outcome.summary {
                writeln!(
                    summary_body,
                    "{},{},{},{},{},{},{}",
                    r.k,
                    r.trials,
                    fmt_f64(r.delta_hat),
                    fmt_f64(r.outer_per_user),
                    fmt_f64(r.gap_per_user),
                    fmt_f64(r.freq_gap_gt_eps),
                    fmt_f64(r.cheb_bound)
                )
                .unwrap();
            }

            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "summary": outcome.summary,
                "trials": outcome.trials,
            });
            let mut artifacts = vec![Artifact {
                payload: render(&meta, spec.output.format, &summary_body, &data),
                output: spec.output.clone(),
            }];

            if let Some(trial_output) = &p.trial_output {
                let mut trial_body =
                    String::from("K,trial,delta_hat,outer_per_user,inner_per_user,gap_per_user\n");
                for row in &outcome.trials {
                    writeln!(
                        trial_body,
                        "{},{},{},{},{},{}",
                        row.k,
                        row.trial,
                        fmt_f64(row.delta_hat),
                        fmt_f64(row.outer_per_user),
                        fmt_f64(row.inner_per_user),
                        fmt_f64(row.gap_per_user)
                    )
                    .unwrap();
                }
                artifacts.push(Artifact {
                    payload: render(&meta, trial_output.format, &trial_body, &outcome.trials),
                    output: trial_output.clone(),
                });
            }

            let degenerate = outcome.summary.iter().any(|r| r.degenerate);
            let stdout_line = degenerate.then(|| {
                "warning: cross distribution carries no eps-bottleneck mass (delta = 0)".to_string()
            });
            Ok(RunOutcome { stdout_line, artifacts })
        }

        CommandSpec::SeparabilityDemo(p) => {
            let (separate, joint, feasible) =
                ergodia::separability_example(p.snr, p.alpha)?;
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "separate_bits": separate,
                "joint_bits": joint,
                "joint_feasible": feasible,
            });
            let payload = render(&meta, OutputFormat::Json, "", &data);
            Ok(RunOutcome {
                stdout_line: Some(format!(
                    "separate={separate:.4} joint={joint:.4} feasible={feasible}"
                )),
                artifacts: vec![Artifact {
                    payload,
                    output: OutputSpec { path: spec.output.path.clone(), format: OutputFormat::Json },
                }],
            })
        }

        CommandSpec::InseparabilityDemo(p) => {
            let (separate, joint) = ergodia::inseparability_example(p.snr)?;
            meta.wall_time_s = start.elapsed().as_secs_f64();
            let data = json!({
                "separate_bits": separate,
                "joint_bits": joint,
            });
            let payload = render(&meta, OutputFormat::Json, "", &data);
            Ok(RunOutcome {
                stdout_line: Some(format!("separate={separate:.4} joint={joint:.4}")),
                artifacts: vec![Artifact {
                    payload,
                    output: OutputSpec { path: spec.output.path.clone(), format: OutputFormat::Json },
                }],
            })
        }
    }
}
