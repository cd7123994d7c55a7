//! Test-time prediction and evaluation metrics.
//!
//! For a test history, each superpattern contributes the sum of its member
//! coefficients that the history expresses. Fully matched groups contribute
//! their compressed parameter; partially matched groups contribute a fresh
//! draw from the exact conditional distribution of the matched sub-sum given
//! the total; patterns expressed by no training case contribute one
//! aggregated prior draw per class. Probabilities average the softmax over
//! the retained posterior draws.

use crate::dataset::SequenceDataset;
use crate::error::{Result, SeqError};
use crate::grouping::{match_super_pattern, split_widths, Grouping, MatchResult};
use crate::sampler::{sampled_classes, ChainRecord, PriorSpec};
use crate::stabledist::{split_sample, stable_draw, sum_width, SplitSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Match structure of one test history against the grouping. The split
/// widths depend on the sampled sigma vector and are computed per draw.
#[derive(Debug, Clone)]
pub struct TestDecomposition {
    /// Per group: how many members the history expresses.
    pub matches: Vec<MatchResult>,
    /// Orders of the test case's patterns that no training case expresses:
    /// the contiguous top range of orders (empty when the history equals a
    /// training history).
    pub new_orders: Vec<usize>,
}

/// Matches every superpattern and determines the new-pattern orders.
pub fn decompose_test_case(history: &[u32], grouping: &Grouping) -> Result<TestDecomposition> {
    let order = grouping.order();
    let mut matches = Vec::with_capacity(grouping.n_groups());
    let mut max_matched_order = 0usize;
    for g in 0..grouping.n_groups() {
        let sp = grouping.super_pattern(g);
        let m = match_super_pattern(sp, history, order)?;
        if m.t_g > 0 {
            max_matched_order = max_matched_order.max(order + 1 - m.b_prime);
        }
        matches.push(m);
    }
    // Expressions nest along the suffix chain, so the training-expressed test
    // patterns are exactly the orders up to the longest matched one.
    let new_orders: Vec<usize> = (max_matched_order + 1..=order).collect();
    Ok(TestDecomposition {
        matches,
        new_orders,
    })
}

/// Random stream id for one `(test case, retained draw)` pair, so cases and
/// draws can be evaluated in any order, or in parallel, with identical
/// results.
fn stream_index(case_index: u64, n_draws: u64, draw: u64) -> u64 {
    case_index.wrapping_mul(n_draws).wrapping_add(draw)
}

/// Predictive class probabilities for one test history.
///
/// Averages the softmax over retained draws; within each draw, partially
/// matched groups are split with that draw's widths and new patterns get one
/// aggregated prior draw per class. Deterministic in `(seed, case_index)`.
pub fn predictive_probs(
    history: &[u32],
    record: &ChainRecord,
    grouping: &Grouping,
    prior: &PriorSpec,
    seed: u64,
    case_index: u64,
) -> Result<Vec<f64>> {
    if record.draws.is_empty() {
        return Err(SeqError::InvalidChain("no retained draws".into()));
    }
    if record.n_groups != grouping.n_groups() || record.order != grouping.order() {
        return Err(SeqError::InvalidChain(format!(
            "chain ({} groups, order {}) does not match grouping ({} groups, order {})",
            record.n_groups,
            record.order,
            grouping.n_groups(),
            grouping.order()
        )));
    }
    if record.law != prior.law {
        return Err(SeqError::InvalidChain(format!(
            "chain was sampled under {} priors but {} was requested",
            record.law.name(),
            prior.law.name()
        )));
    }
    let order = grouping.order();
    let k = record.n_classes;
    let law = record.law;
    let decomp = decompose_test_case(history, grouping)?;
    let n_draws = record.draws.len() as u64;
    let base = ChaCha20Rng::seed_from_u64(seed);

    let mut probs = vec![0.0f64; k];
    let mut l = vec![0.0f64; k];
    for (j, draw) in record.draws.iter().enumerate() {
        let mut rng = base.clone();
        rng.set_stream(stream_index(case_index, n_draws, j as u64));
        l.iter_mut().for_each(|v| *v = 0.0);
        let new_width = if decomp.new_orders.is_empty() {
            0.0
        } else {
            let widths: Vec<f64> = decomp.new_orders.iter().map(|&o| draw.sigma[o]).collect();
            sum_width(&widths, law)
        };
        for class in sampled_classes(k) {
            let mut acc = 0.0;
            for (g, m) in decomp.matches.iter().enumerate() {
                if m.t_g == 0 {
                    continue;
                }
                let sp = grouping.super_pattern(g);
                let s_gk = draw.s(g, class, k);
                if m.t_g == sp.n_members() {
                    acc += s_gk;
                } else {
                    let (s1, s2) = split_widths(sp, m.b_prime, &draw.sigma, law, order);
                    let spec = SplitSpec::new(s_gk, s1, s2, law)?;
                    acc += split_sample(&spec, &mut rng)?;
                }
            }
            if new_width > 0.0 {
                acc += stable_draw(new_width, law, &mut rng);
            }
            l[class] = acc;
        }
        // softmax
        let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = l.iter().map(|&v| (v - max).exp()).sum();
        for (c, &v) in l.iter().enumerate() {
            probs[c] += (v - max).exp() / denom;
        }
    }
    let nd = record.draws.len() as f64;
    probs.iter_mut().for_each(|p| *p /= nd);
    Ok(probs)
}

/// Predictive probabilities for every case of a test set, in parallel.
pub fn predict_dataset(
    test: &SequenceDataset,
    record: &ChainRecord,
    grouping: &Grouping,
    prior: &PriorSpec,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..test.n_cases())
        .into_par_iter()
        .map(|i| predictive_probs(test.history(i), record, grouping, prior, seed, i as u64))
        .collect()
}

/// Index (0-based) of the predicted class: argmax with ties broken toward
/// the smallest class code.
pub fn argmax_class(probs: &[f64]) -> usize {
    let mut best = 0;
    for (c, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = c;
        }
    }
    best
}

/// Fraction of test cases whose argmax class differs from the truth.
pub fn error_rate(predictions: &[Vec<f64>], truths: &[u32]) -> Result<f64> {
    check_lengths(predictions, truths)?;
    let wrong = predictions
        .iter()
        .zip(truths)
        .filter(|(p, &y)| argmax_class(p) != y as usize - 1)
        .count();
    Ok(wrong as f64 / truths.len() as f64)
}

/// Average minus log predictive probability of the true class. A zero
/// probability at the truth yields infinity (reported, not an error).
pub fn amlp(predictions: &[Vec<f64>], truths: &[u32]) -> Result<f64> {
    check_lengths(predictions, truths)?;
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, &y)| -p[y as usize - 1].ln())
        .sum();
    Ok(total / truths.len() as f64)
}

fn check_lengths(predictions: &[Vec<f64>], truths: &[u32]) -> Result<()> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(SeqError::InvalidArgument(format!(
            "predictions ({}) and truths ({}) must have equal nonzero length",
            predictions.len(),
            truths.len()
        )));
    }
    Ok(())
}

/// Serializes predictions: one line per case, the class probabilities then
/// the 1-based argmax class.
pub fn write_predictions_string(predictions: &[Vec<f64>], provenance: &[String]) -> String {
    let mut out = String::new();
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    for p in predictions {
        for v in p {
            let _ = write!(out, "{v:.16e} ");
        }
        let _ = writeln!(out, "{}", argmax_class(p) + 1);
    }
    out
}

/// Parses the predictions format (probabilities only; the trailing argmax
/// column is redundant and re-derived).
pub fn parse_predictions_str(content: &str, path: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(SeqError::Parse {
                path: path.into(),
                line: lineno + 1,
                msg: "expected at least one probability and the class".into(),
            });
        }
        let probs: std::result::Result<Vec<f64>, _> = fields[..fields.len() - 1]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect();
        match probs {
            Ok(p) => out.push(p),
            Err(e) => {
                return Err(SeqError::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}
