//! Uncompressed reference implementation.
//!
//! Keeps an explicit coefficient per training-expressed pattern and runs the
//! same sampling protocol over all of them. Only usable at desk scale; it
//! exists to validate the compressed path end-to-end: likelihoods must agree
//! exactly under the group-sum map, and posterior predictions must agree
//! statistically.

use crate::dataset::SequenceDataset;
use crate::error::{Result, SeqError};
use crate::grouping::Grouping;
use crate::predict::decompose_test_case;
use crate::sampler::{
    sampled_classes, McmcConfig, PriorSpec, MAX_STEPS, SIGMA_SWEEPS, W_SLICE_SIGMA,
};
use crate::slice::slice_sample_1d;
use crate::stabledist::{stable_draw, sum_width, Law};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::ln_gamma;

/// Explicit per-pattern parameterization derived from a grouping: patterns
/// are the union of all superpattern members.
#[derive(Debug, Clone)]
pub struct UncompressedModel {
    /// Pattern ids per group, ordered by member position `b..=f`.
    group_members: Vec<Vec<u32>>,
    /// Interaction order of each pattern.
    pattern_order: Vec<usize>,
    /// Owning group of each pattern (patterns inherit its expression).
    pattern_group: Vec<u32>,
    /// Per training case: the `O+1` patterns it expresses.
    case_patterns: Vec<Vec<u32>>,
    patterns_by_order: Vec<Vec<u32>>,
}

impl UncompressedModel {
    pub fn from_grouping(grouping: &Grouping) -> Self {
        let order = grouping.order();
        let mut group_members = Vec::with_capacity(grouping.n_groups());
        let mut pattern_order = Vec::new();
        let mut pattern_group = Vec::new();
        for g in 0..grouping.n_groups() {
            let sp = grouping.super_pattern(g);
            let mut members = Vec::with_capacity(sp.n_members());
            for t in sp.b..=sp.f {
                members.push(pattern_order.len() as u32);
                pattern_order.push(sp.member_order(t, order));
                pattern_group.push(g as u32);
            }
            group_members.push(members);
        }
        let mut case_patterns = vec![Vec::with_capacity(order + 1); grouping.n_cases()];
        for (g, members) in group_members.iter().enumerate() {
            for &i in grouping.expression(g) {
                case_patterns[i as usize].extend_from_slice(members);
            }
        }
        let mut patterns_by_order = vec![Vec::new(); order + 1];
        for (p, &o) in pattern_order.iter().enumerate() {
            patterns_by_order[o].push(p as u32);
        }
        UncompressedModel {
            group_members,
            pattern_order,
            pattern_group,
            case_patterns,
            patterns_by_order,
        }
    }

    pub fn n_patterns(&self) -> usize {
        self.pattern_order.len()
    }

    pub fn pattern_order(&self, p: usize) -> usize {
        self.pattern_order[p]
    }

    pub fn group_members(&self, g: usize) -> &[u32] {
        &self.group_members[g]
    }

    /// Sums a beta matrix (`P x K` row-major) into compressed parameters
    /// (`G x K` row-major).
    pub fn compress(&self, beta: &[f64], k: usize) -> Vec<f64> {
        let mut s = vec![0.0; self.group_members.len() * k];
        for (p, &g) in self.pattern_group.iter().enumerate() {
            for c in 0..k {
                s[g as usize * k + c] += beta[p * k + c];
            }
        }
        s
    }
}

/// Direct log-likelihood of an explicit beta matrix (`P x K` row-major).
pub fn oracle_log_likelihood(
    model: &UncompressedModel,
    beta: &[f64],
    data: &SequenceDataset,
) -> f64 {
    let k = data.k() as usize;
    let mut ll = 0.0;
    let mut row = vec![0.0f64; k];
    for i in 0..data.n_cases() {
        row.iter_mut().for_each(|v| *v = 0.0);
        for &p in &model.case_patterns[i] {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot += beta[p as usize * k + c];
            }
        }
        let y = data.response(i) as usize - 1;
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        ll += row[y] - max - denom.ln();
    }
    ll
}

/// One retained draw of the uncompressed chain.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDraw {
    pub iter: u32,
    pub sigma: Vec<f64>,
    /// `P x K` row-major coefficient matrix.
    pub beta: Vec<f64>,
}

/// Retained draws of the uncompressed sampler.
#[derive(Debug, Clone)]
pub struct OracleRecord {
    pub law: Law,
    pub order: usize,
    pub n_classes: usize,
    pub config: McmcConfig,
    pub draws: Vec<OracleDraw>,
}

/// Runs the sampling protocol over the explicit per-pattern coefficients.
///
/// Desk-scale only; guarded to small problems since the point is validation,
/// not performance.
#[allow(clippy::needless_range_loop)]
pub fn run_uncompressed_chain(
    data: &SequenceDataset,
    grouping: &Grouping,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<OracleRecord> {
    if data.n_cases() > 100 || data.order() > 5 {
        return Err(SeqError::InvalidArgument(format!(
            "uncompressed chain is desk-scale only (N <= 100, O <= 5), got N={}, O={}",
            data.n_cases(),
            data.order()
        )));
    }
    let model = UncompressedModel::from_grouping(grouping);
    let n = data.n_cases();
    let k = data.k() as usize;
    let order = data.order();
    let n_patterns = model.n_patterns();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut beta = vec![0.0f64; n_patterns * k];
    let mut sigma = prior.initial_sigma(order);
    let w_s = prior.slice_width();
    let law = prior.law;
    let ln_gamma_alpha = ln_gamma(prior.alpha);
    let responses: Vec<usize> = (0..n).map(|i| data.response(i) as usize - 1).collect();
    // expression of a pattern = expression of its group
    let expressions: Vec<&[u32]> = model
        .pattern_group
        .iter()
        .map(|&g| grouping.expression(g as usize))
        .collect();

    let mut cache = vec![0.0f64; n * k];
    let rebuild = |beta: &[f64], cache: &mut Vec<f64>| {
        cache.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            for &p in &model.case_patterns[i] {
                for c in 0..k {
                    cache[i * k + c] += beta[p as usize * k + c];
                }
            }
        }
    };
    rebuild(&beta, &mut cache);

    let mut draws = Vec::with_capacity(config.retained_count() as usize);
    for iter in 1..=config.iters {
        for p in 0..n_patterns {
            let width = sigma[model.pattern_order[p]];
            let expr = expressions[p];
            for class in sampled_classes(k) {
                let x0 = beta[p * k + class];
                let mut target = |v: f64| {
                    let mut out = match law {
                        Law::Gaussian => -v * v / (2.0 * width * width),
                        Law::Cauchy => -(width * width + v * v).ln(),
                    };
                    let delta = v - x0;
                    for &i in expr {
                        let row = &cache[i as usize * k..i as usize * k + k];
                        let y = responses[i as usize];
                        let mut max = f64::NEG_INFINITY;
                        for (c, &lv) in row.iter().enumerate() {
                            let lv = if c == class { lv + delta } else { lv };
                            if lv > max {
                                max = lv;
                            }
                        }
                        let mut sum = 0.0;
                        for (c, &lv) in row.iter().enumerate() {
                            let lv = if c == class { lv + delta } else { lv };
                            sum += (lv - max).exp();
                        }
                        let ly = if y == class { row[y] + delta } else { row[y] };
                        out += ly - max - sum.ln();
                    }
                    out
                };
                let x1 = slice_sample_1d(&mut target, x0, w_s, MAX_STEPS, &mut rng, false)?;
                if x1 != x0 {
                    beta[p * k + class] = x1;
                    let delta = x1 - x0;
                    for &i in expr {
                        cache[i as usize * k + class] += delta;
                    }
                }
            }
        }
        for _ in 0..SIGMA_SWEEPS {
            for o in 1..=order {
                let rate = prior.hyper_rate(o);
                let patterns = &model.patterns_by_order[o];
                let beta_ref = &beta;
                let mut target = |v: f64| {
                    let mut out = -(prior.alpha + 1.0) * v.ln() + prior.alpha * rate.ln()
                        - rate / v
                        - ln_gamma_alpha;
                    for &p in patterns {
                        for class in sampled_classes(k) {
                            let b = beta_ref[p as usize * k + class];
                            out += match law {
                                Law::Gaussian => -b * b / (2.0 * v * v) - v.ln(),
                                Law::Cauchy => v.ln() - (v * v + b * b).ln(),
                            };
                        }
                    }
                    out
                };
                sigma[o] = slice_sample_1d(
                    &mut target,
                    sigma[o],
                    W_SLICE_SIGMA,
                    MAX_STEPS,
                    &mut rng,
                    true,
                )?;
            }
        }
        rebuild(&beta, &mut cache);
        if iter > config.burnin && (iter - config.burnin).is_multiple_of(config.thin) {
            draws.push(OracleDraw {
                iter,
                sigma: sigma.clone(),
                beta: beta.clone(),
            });
        }
    }
    Ok(OracleRecord {
        law,
        order,
        n_classes: k,
        config: *config,
        draws,
    })
}

/// Predictive probabilities from the uncompressed chain: matched member
/// coefficients are summed directly; new patterns get one aggregated prior
/// draw per class, exactly as in the compressed predictor.
pub fn oracle_predictive_probs(
    history: &[u32],
    record: &OracleRecord,
    model: &UncompressedModel,
    grouping: &Grouping,
    seed: u64,
    case_index: u64,
) -> Result<Vec<f64>> {
    if record.draws.is_empty() {
        return Err(SeqError::InvalidChain("no retained draws".into()));
    }
    let k = record.n_classes;
    let law = record.law;
    let decomp = decompose_test_case(history, grouping)?;
    let n_draws = record.draws.len() as u64;
    let base = ChaCha20Rng::seed_from_u64(seed);
    let mut probs = vec![0.0f64; k];
    let mut l = vec![0.0f64; k];
    for (j, draw) in record.draws.iter().enumerate() {
        let mut rng = base.clone();
        rng.set_stream(case_index.wrapping_mul(n_draws).wrapping_add(j as u64));
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
                let members = model.group_members(g);
                // matched members are positions b_prime..=f
                for (idx, _) in (sp.b..=sp.f).enumerate().filter(|&(_, t)| t >= m.b_prime) {
                    acc += draw.beta[members[idx] as usize * k + class];
                }
            }
            if new_width > 0.0 {
                acc += stable_draw(new_width, law, &mut rng);
            }
            l[class] = acc;
        }
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

/// Draws every member coefficient from its prior and sums per group; used to
/// check the additive property of the stable priors end-to-end.
pub fn prior_group_sum_draw<R: rand::Rng + ?Sized>(
    grouping: &Grouping,
    g: usize,
    sigma: &[f64],
    law: Law,
    rng: &mut R,
) -> f64 {
    let sp = grouping.super_pattern(g);
    let order = grouping.order();
    (sp.b..=sp.f)
        .map(|t| stable_draw(sigma[order + 1 - t], law, rng))
        .sum()
}
