//! Command-line front door: simulate or encode data, inspect the grouping,
//! train a chain, predict, and evaluate.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use seqcomp::datagen::{encode_text, hmm_generate};
use seqcomp::dataset::{read_data_file, windowize, SequenceDataset};
use seqcomp::grouping::build_grouping;
use seqcomp::predict::{
    amlp, error_rate, parse_predictions_str, predict_dataset, write_predictions_string,
};
use seqcomp::sampler::{parse_chain_str, run_chain, write_chain_string, McmcConfig, PriorSpec};
use seqcomp::Law;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "seqcomp",
    version,
    about = "Bayesian logistic sequence prediction with compressed parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate sequences from the built-in 8-state hidden Markov model.
    SimulateHmm {
        /// Number of sequences (one case per line).
        #[arg(long, default_value_t = 5500)]
        sequences: usize,
        /// Length of each sequence.
        #[arg(long, default_value_t = 21)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a text file over {vowel, consonant, other} and window it into
    /// overlapping cases.
    EncodeText {
        /// Input text file.
        #[arg(long)]
        input: PathBuf,
        /// History length of the produced cases.
        #[arg(long, default_value_t = 20)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the compression structure of a training set.
    GroupStats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        order: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the posterior of the compressed parameters.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        order: usize,
        /// Prior law: cauchy or gaussian.
        #[arg(long, default_value = "cauchy")]
        prior: String,
        #[arg(long, default_value_t = 2000)]
        iters: u32,
        #[arg(long, default_value_t = 750)]
        burnin: u32,
        #[arg(long, default_value_t = 5)]
        thin: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predictive probabilities for a test set given a trained chain.
    Predict {
        /// Training data the chain was built from.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value = "cauchy")]
        prior: String,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Seed for the split draws.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error rate and average minus log probability of a predictions file.
    Evaluate {
        #[arg(long)]
        preds: PathBuf,
        /// Dataset file holding the true responses.
        #[arg(long)]
        truth: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep history lengths and emit a plot-ready table
    /// (order, groups, originals, ratio, train seconds, error rate, amlp).
    Experiment {
        /// Training data.
        #[arg(long)]
        data: PathBuf,
        /// Test data.
        #[arg(long)]
        test: PathBuf,
        /// Comma-separated history lengths.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,2,3,4,5,7,10,12,15,17,20"
        )]
        orders: Vec<usize>,
        #[arg(long, default_value = "cauchy")]
        prior: String,
        #[arg(long, default_value_t = 2000)]
        iters: u32,
        #[arg(long, default_value_t = 750)]
        burnin: u32,
        #[arg(long, default_value_t = 5)]
        thin: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn write_output(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_output(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateHmm {
            sequences,
            length,
            seed,
            out,
        } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let seqs = hmm_generate(sequences, length, &mut rng)?;
            let order = length - 1;
            let rows: Vec<Vec<u32>> = seqs;
            let ds = SequenceDataset::from_rows(&rows, order, None)?;
            let provenance = vec![
                format!("seqcomp {VERSION} simulate-hmm"),
                format!(
                    "cmd: simulate-hmm --sequences {sequences} --length {length} --seed {seed}"
                ),
            ];
            write_output(&out, &ds.to_file_string(&provenance))?;
            eprintln!("wrote {} cases to {}", ds.n_cases(), out.display());
            Ok(())
        }
        Command::EncodeText { input, order, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let states = encode_text(&text);
            let ds = windowize(&states, order)?;
            let provenance = vec![
                format!("seqcomp {VERSION} encode-text"),
                format!(
                    "cmd: encode-text --input {} --order {order} (encoded length {})",
                    input.display(),
                    states.len()
                ),
            ];
            write_output(&out, &ds.to_file_string(&provenance))?;
            eprintln!(
                "encoded {} states, wrote {} cases to {}",
                states.len(),
                ds.n_cases(),
                out.display()
            );
            Ok(())
        }
        Command::GroupStats { data, order, out } => {
            let ds = read_data_file(&data, Some(order), None)?;
            let grouping = build_grouping(&ds);
            let mut report = String::new();
            for g in 0..grouping.n_groups() {
                let sp = grouping.super_pattern(g);
                let _ = write!(report, "{} {} {}", g + 1, sp.b, sp.f);
                for v in &sp.suffix {
                    let _ = write!(report, " {v}");
                }
                let _ = writeln!(report, " {}", grouping.expression(g).len());
            }
            let _ = writeln!(
                report,
                "G={} originals={} ratio={:.6}",
                grouping.n_groups(),
                grouping.count_original_parameters(),
                grouping.compression_ratio()
            );
            emit(out.as_ref(), &report)
        }
        Command::Train {
            data,
            order,
            prior,
            iters,
            burnin,
            thin,
            seed,
            out,
        } => {
            let law = Law::parse(&prior)?;
            let ds = read_data_file(&data, Some(order), None)?;
            let grouping = build_grouping(&ds);
            let prior_spec = PriorSpec::standard(law);
            let config = McmcConfig {
                iters,
                burnin,
                thin,
                seed,
            };
            eprintln!(
                "training: N={} O={order} K={} G={} prior={}",
                ds.n_cases(),
                ds.k(),
                grouping.n_groups(),
                law.name()
            );
            let started = Instant::now();
            let record = run_chain(&ds, &grouping, &prior_spec, &config, None)?;
            let elapsed = started.elapsed().as_secs_f64();
            let mut content = format!(
                "# seqcomp {VERSION} train\n# cmd: train --data {} --order {order} --prior {} --iters {iters} --burnin {burnin} --thin {thin} --seed {seed}\n",
                data.display(),
                law.name()
            );
            content.push_str(&write_chain_string(&record));
            write_output(&out, &content)?;
            eprintln!(
                "retained {} draws in {elapsed:.1}s -> {}",
                record.draws.len(),
                out.display()
            );
            Ok(())
        }
        Command::Predict {
            data,
            order,
            prior,
            chain,
            test,
            seed,
            out,
        } => {
            let law = Law::parse(&prior)?;
            let train = read_data_file(&data, Some(order), None)?;
            let grouping = build_grouping(&train);
            let content = std::fs::read_to_string(&chain)
                .with_context(|| format!("reading {}", chain.display()))?;
            let record = parse_chain_str(&content, &chain.display().to_string())?;
            let test_ds = read_data_file(&test, Some(order), Some(train.k()))?;
            let prior_spec = PriorSpec::standard(law);
            let preds = predict_dataset(&test_ds, &record, &grouping, &prior_spec, seed)?;
            let provenance = vec![
                format!("seqcomp {VERSION} predict"),
                format!(
                    "cmd: predict --data {} --order {order} --prior {} --chain {} --test {} --seed {seed}",
                    data.display(),
                    law.name(),
                    chain.display(),
                    test.display()
                ),
            ];
            write_output(&out, &write_predictions_string(&preds, &provenance))?;
            eprintln!("wrote {} predictions to {}", preds.len(), out.display());
            Ok(())
        }
        Command::Evaluate { preds, truth, out } => {
            let content = std::fs::read_to_string(&preds)
                .with_context(|| format!("reading {}", preds.display()))?;
            let predictions = parse_predictions_str(&content, &preds.display().to_string())?;
            if predictions.is_empty() {
                bail!("{}: no predictions", preds.display());
            }
            let truth_ds = read_data_file(&truth, None, None)?;
            let err = error_rate(&predictions, truth_ds.responses())?;
            let a = amlp(&predictions, truth_ds.responses())?;
            emit(out.as_ref(), &format!("error_rate={err:.6} amlp={a:.6}\n"))
        }
        Command::Experiment {
            data,
            test,
            orders,
            prior,
            iters,
            burnin,
            thin,
            seed,
            out,
        } => {
            let law = Law::parse(&prior)?;
            let prior_spec = PriorSpec::standard(law);
            let mut table = format!(
                "# seqcomp {VERSION} experiment\n# cmd: experiment --data {} --test {} --orders {} --prior {} --iters {iters} --burnin {burnin} --thin {thin} --seed {seed}\n",
                data.display(),
                test.display(),
                orders
                    .iter()
                    .map(|o| o.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                law.name()
            );
            table.push_str("# order groups originals ratio train_seconds error_rate amlp\n");
            for &order in &orders {
                let train = read_data_file(&data, Some(order), None)?;
                let test_ds = read_data_file(&test, Some(order), Some(train.k()))?;
                let grouping = build_grouping(&train);
                let config = McmcConfig {
                    iters,
                    burnin,
                    thin,
                    seed,
                };
                let started = Instant::now();
                let record = run_chain(&train, &grouping, &prior_spec, &config, None)?;
                let train_secs = started.elapsed().as_secs_f64();
                let preds = predict_dataset(&test_ds, &record, &grouping, &prior_spec, seed)?;
                let err = error_rate(&preds, test_ds.responses())?;
                let a = amlp(&preds, test_ds.responses())?;
                let _ = writeln!(
                    table,
                    "{order} {} {} {:.6} {train_secs:.2} {err:.6} {a:.6}",
                    grouping.n_groups(),
                    grouping.count_original_parameters(),
                    grouping.compression_ratio()
                );
                eprintln!(
                    "order {order}: G={} ratio={:.4} err={err:.4} amlp={a:.4} ({train_secs:.1}s train)",
                    grouping.n_groups(),
                    grouping.compression_ratio()
                );
            }
            write_output(&out, &table)?;
            Ok(())
        }
    }
}
