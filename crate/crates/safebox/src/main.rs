use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use safebox::case::{load_case, RuleDoc};
use safebox::dataset::{load_dataset, save_dataset};
use safebox::ratios::{load_ratios, save_ratios, RatiosFile};
use safebox::theory::{load_script, load_theory, Theory};
use safebox::{report, Error};
use safebox_core::assurance::{assess_case, render_tree};
use safebox_core::evaluation::{divergence_quadrants, evaluate, evaluate_by_split};
use safebox_core::logic::{check_bundle, check_script, derive_bounded, Axioms, DeriveVerdict, Verdict, DEFAULT_DEPTH};
use safebox_core::postproc::{self, learn_ratios, nms, LearnOptions, NmsConfig};

/// Safety-aware bounding-box post-processing and assurance checking.
///
/// Exit status: 0 on success, 1 when the tool ran but the claim failed
/// (rejected proof, goal not derivable, goal only upper-bounded), 2 on usage
/// or input errors.
#[derive(Parser)]
#[command(name = "safebox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn enlargement ratios from the training split of a dataset.
    Learn {
        dataset: PathBuf,
        /// Where to write the ratios JSON.
        #[arg(short, long)]
        output: PathBuf,
        /// Multiply the learned ratios by this factor (>= 1).
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Aggregate per-pair ratios by this quantile in (0, 1] instead of
        /// the maximum. Gives up guaranteed in-sample coverage.
        #[arg(long)]
        quantile: Option<f64>,
        /// Dataset identifier recorded in the output (default: file name).
        #[arg(long)]
        name: Option<String>,
    },
    /// Run NMS and then the learned enlargement on every image's predictions.
    Apply {
        dataset: PathBuf,
        /// Ratios JSON produced by `learn`.
        #[arg(long)]
        ratios: PathBuf,
        /// Where to write the post-processed dataset.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        nms: NmsArgs,
    },
    /// Evaluate safety (cover) and IoU, raw and after enlargement.
    Eval {
        dataset: PathBuf,
        /// Ratios JSON; without it only raw predictions are evaluated.
        #[arg(long)]
        ratios: Option<PathBuf>,
        /// Where to write the JSON report.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write per-pair rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Tolerance of the cover test.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Print the four IoU-versus-safety example cases.
    Quadrants,
    /// Check a proof script for a goal against an axiom set.
    Prove {
        /// Axiom-set JSON.
        axioms: PathBuf,
        /// Name of an axiom/conjecture in the file, or formula text.
        goal: String,
        /// Proof script, one command per line.
        script: PathBuf,
        #[command(flatten)]
        premises: PremiseArgs,
    },
    /// Search for a derivation of a goal by bounded forward chaining.
    Derive {
        /// Axiom-set JSON.
        axioms: PathBuf,
        /// Name of an axiom/conjecture in the file, or formula text.
        goal: String,
        /// Maximum nesting depth of instantiation terms.
        #[arg(long, default_value_t = DEFAULT_DEPTH, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        depth: usize,
        #[command(flatten)]
        premises: PremiseArgs,
    },
    /// Assurance-case operations.
    Case {
        #[command(subcommand)]
        command: CaseCommand,
    },
}

#[derive(Subcommand)]
enum CaseCommand {
    /// Combine evidence for every goal and check it logically entails the goal.
    Assess {
        case: PathBuf,
        /// Derivation depth for the soundness check.
        #[arg(long, default_value_t = DEFAULT_DEPTH, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        depth: usize,
        /// Override every goal's combination rule.
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        /// Where to write the JSON report.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RuleArg {
    Dempster,
    Yager,
}

#[derive(Args)]
struct NmsArgs {
    /// Suppress boxes overlapping a kept box with at least this IoU, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    iou_threshold: f64,
    /// Drop detections scoring below this, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    score_threshold: f64,
}

#[derive(Args)]
struct PremiseArgs {
    /// Comma-separated axioms/conjectures to use (default: all axioms).
    #[arg(long = "use", value_delimiter = ',')]
    using: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Error {
    Error::Usage(msg.to_string())
}

/// Resolves the goal and premises of a logic query.
fn query(axioms: &Path, goal: &str, premises: &PremiseArgs) -> Result<(Theory, Axioms, safebox_core::logic::Formula), Error> {
    let theory = load_theory(axioms)?;
    let fmt = |e| Error::Format {
        path: axioms.to_path_buf(),
        source: e,
    };
    let (name, formula) = theory.resolve_goal(goal).map_err(fmt)?;
    let selected = theory.premises(premises.using.as_deref(), name.as_deref()).map_err(fmt)?;
    Ok((theory, selected, formula))
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::Learn {
            dataset,
            output,
            margin,
            quantile,
            name,
        } => {
            let records = load_dataset(&dataset)?;
            let name = name.unwrap_or_else(|| {
                dataset
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let learned = learn_ratios(&records, &name, LearnOptions { margin, quantile }).map_err(usage)?;
            save_ratios(&output, &RatiosFile::from(&learned))?;
            if learned.is_empty_warning() {
                eprintln!("warning: no matched training pairs; ratios default to (1, 1)");
            }
            println!(
                "learned rw={} rh={} from {} pairs",
                learned.ratios.rw(),
                learned.ratios.rh(),
                learned.pairs()
            );
            Ok(true)
        }
        Command::Apply {
            dataset,
            ratios,
            output,
            nms: nms_args,
        } => {
            let cfg = NmsConfig::new(nms_args.iou_threshold, nms_args.score_threshold).map_err(usage)?;
            let ratios = load_ratios(&ratios)?
                .ratios()
                .map_err(|e| Error::Format { path: ratios, source: e })?;
            let mut records = load_dataset(&dataset)?;
            for r in &mut records {
                r.predictions = postproc::apply(ratios, &nms(&r.predictions, &cfg));
            }
            save_dataset(&output, &records)?;
            println!("post-processed {} images", records.len());
            Ok(true)
        }
        Command::Eval {
            dataset,
            ratios,
            output,
            csv,
            eps,
        } => {
            if !eps.is_finite() || eps < 0.0 {
                return Err(usage(format!("--eps must be finite and non-negative, got {eps}")));
            }
            let ratios = match ratios {
                Some(p) => Some(
                    load_ratios(&p)?
                        .ratios()
                        .map_err(|e| Error::Format { path: p, source: e })?,
                ),
                None => None,
            };
            let records = load_dataset(&dataset)?;
            let all = evaluate(&records, ratios, eps);
            let by_split = evaluate_by_split(&records, ratios, eps);
            if let Some(path) = output {
                report::save_report(&path, &all, &by_split)?;
            }
            if let Some(path) = csv {
                report::save_csv(&path, &all)?;
            }
            print!("{}", report::render_table(&all, &by_split));
            Ok(true)
        }
        Command::Quadrants => {
            print!("{}", report::render_quadrants(&divergence_quadrants()));
            Ok(true)
        }
        Command::Prove {
            axioms,
            goal,
            script,
            premises,
        } => {
            let (theory, selected, formula) = query(&axioms, &goal, &premises)?;
            let script = load_script(&script)?;
            match check_script(&theory.signature, &selected, &formula, &script) {
                Verdict::Accepted(trace) => {
                    print!("{trace}");
                    Ok(true)
                }
                Verdict::Rejected { step, reason } => {
                    println!("rejected at step {step}: {reason}");
                    Ok(false)
                }
            }
        }
        Command::Derive {
            axioms,
            goal,
            depth,
            premises,
        } => {
            let (theory, selected, formula) = query(&axioms, &goal, &premises)?;
            let names: Vec<&str> = selected.keys().map(String::as_str).collect();
            match derive_bounded(&theory.signature, &selected, &formula, depth) {
                Err(e) => {
                    println!("cannot decide: {e}");
                    Ok(false)
                }
                Ok(DeriveVerdict::NotDerivable { depth }) => {
                    println!("not derivable from {{{}}} at depth {depth}", names.join(", "));
                    Ok(false)
                }
                Ok(DeriveVerdict::Derivable(d)) => {
                    let bundle = d.to_scripts();
                    println!("derivable from {{{}}} at depth {depth}", names.join(", "));
                    for (name, f, script) in &bundle.lemmas {
                        print!("\nlemma {name}: {f}\n{script}");
                    }
                    print!("\ngoal: {}\n{}\n", bundle.goal, bundle.main);
                    match check_bundle(&theory.signature, &selected, &bundle) {
                        Ok(_) => {
                            println!("checker: accepted");
                            Ok(true)
                        }
                        Err(e) => {
                            println!("checker: {e}");
                            Ok(false)
                        }
                    }
                }
            }
        }
        Command::Case {
            command: CaseCommand::Assess {
                case,
                depth,
                rule,
                output,
            },
        } => {
            let mut loaded = load_case(&case)?;
            if let Some(rule) = rule {
                let rule = match rule {
                    RuleArg::Dempster => RuleDoc::Dempster,
                    RuleArg::Yager => RuleDoc::Yager,
                };
                for n in &mut loaded.nodes {
                    n.rule = rule.into();
                }
            }
            let report = assess_case(&loaded.nodes, &loaded.signature, &Axioms::new(), depth).map_err(|e| {
                Error::Format {
                    path: case.clone(),
                    source: safebox::FormatError::Schema(e.to_string()),
                }
            })?;
            if let Some(path) = output {
                std::fs::write(&path, safebox::case::report_to_json(&report))
                    .map_err(|source| Error::Io { path, source })?;
            }
            print!("{}", render_tree(&loaded.nodes, &report));
            Ok(report.goals.iter().all(|g| g.soundness.is_sound()))
        }
    }
}
