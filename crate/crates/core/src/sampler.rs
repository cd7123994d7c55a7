//! Markov chain sampling over compressed parameters and prior widths.
//!
//! One iteration slice-samples every compressed parameter `s[g][k]` once
//! (step width 20 under Cauchy priors, 10 under Gaussian), then performs 10
//! slice-sampling sweeps over the order widths `sigma_1..sigma_O` (step
//! width 1, positive support); the expansion budget is 50 steps throughout.
//! The default schedule runs 2000 iterations, discards the first 750 and
//! keeps every 5th draw afterwards.

use crate::dataset::SequenceDataset;
use crate::error::{Result, SeqError};
use crate::grouping::{group_width, Grouping};
use crate::slice::slice_sample_1d;
use crate::stabledist::{stable_log_pdf, Law};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::function::gamma::ln_gamma;
use std::fmt::Write as _;

/// Slice-sampler step width for compressed parameters under Cauchy priors.
pub const W_SLICE_CAUCHY: f64 = 20.0;
/// Slice-sampler step width for compressed parameters under Gaussian priors.
pub const W_SLICE_GAUSSIAN: f64 = 10.0;
/// Slice-sampler step width for the sigma updates.
pub const W_SLICE_SIGMA: f64 = 1.0;
/// Maximum stepping-out budget for every slice update.
pub const MAX_STEPS: u32 = 50;
/// Number of sigma sweeps per iteration.
pub const SIGMA_SWEEPS: usize = 10;

/// Prior hierarchy: fixed intercept width, and per-order widths with
/// Inverse-Gamma hyperpriors whose mode is `w_base / o`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub law: Law,
    /// Fixed width of the order-0 (intercept) coefficient.
    pub sigma0: f64,
    /// Shape of the Inverse-Gamma hyperprior on each sigma_o.
    pub alpha: f64,
    /// Hyperprior mode is `w_base / o` for order `o >= 1`.
    pub w_base: f64,
}

impl PriorSpec {
    /// The hyperparameter settings used for every experiment: intercept
    /// width 5 (Cauchy) or 10 (Gaussian), shape 0.25, mode 0.1/o.
    pub fn standard(law: Law) -> Self {
        PriorSpec {
            law,
            sigma0: match law {
                Law::Cauchy => 5.0,
                Law::Gaussian => 10.0,
            },
            alpha: 0.25,
            w_base: 0.1,
        }
    }

    /// Hyperprior mode for order `o`.
    pub fn w_mode(&self, o: usize) -> f64 {
        self.w_base / o as f64
    }

    /// Hyperprior rate, chosen so the mode is `w_mode(o)`.
    pub fn hyper_rate(&self, o: usize) -> f64 {
        (self.alpha + 1.0) * self.w_mode(o)
    }

    /// Initial sigma vector: the intercept width, then the prior modes.
    pub fn initial_sigma(&self, order: usize) -> Vec<f64> {
        let mut sigma = Vec::with_capacity(order + 1);
        sigma.push(self.sigma0);
        for o in 1..=order {
            sigma.push(self.w_mode(o));
        }
        sigma
    }

    pub fn slice_width(&self) -> f64 {
        match self.law {
            Law::Cauchy => W_SLICE_CAUCHY,
            Law::Gaussian => W_SLICE_GAUSSIAN,
        }
    }
}

/// Iteration schedule for one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McmcConfig {
    pub iters: u32,
    pub burnin: u32,
    pub thin: u32,
    pub seed: u64,
}

impl McmcConfig {
    /// The published schedule: 2000 iterations, 750 burn-in, thinning 5.
    pub fn standard(seed: u64) -> Self {
        McmcConfig {
            iters: 2000,
            burnin: 750,
            thin: 5,
            seed,
        }
    }

    pub fn retained_count(&self) -> u32 {
        if self.iters <= self.burnin {
            0
        } else {
            (self.iters - self.burnin) / self.thin
        }
    }
}

/// Current position of the chain: compressed parameters (row-major `G x K`)
/// and the width vector `sigma_0..sigma_O`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub s: Vec<f64>,
    pub sigma: Vec<f64>,
    n_groups: usize,
    k: usize,
}

impl ChainState {
    /// All-zero parameters with sigma at the prior mode. When `K = 2` the
    /// class-1 column stays pinned at zero and is never sampled.
    pub fn initial(grouping: &Grouping, prior: &PriorSpec, k: u32) -> Self {
        ChainState {
            s: vec![0.0; grouping.n_groups() * k as usize],
            sigma: prior.initial_sigma(grouping.order()),
            n_groups: grouping.n_groups(),
            k: k as usize,
        }
    }

    #[inline]
    pub fn s(&self, g: usize, k: usize) -> f64 {
        self.s[g * self.k + k]
    }

    pub fn set_s(&mut self, g: usize, k: usize, value: f64) {
        self.s[g * self.k + k] = value;
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn n_classes(&self) -> usize {
        self.k
    }
}

/// Class indices that are actually sampled: with two classes the first
/// class's coefficients are pinned to zero for identifiability.
pub fn sampled_classes(k: usize) -> std::ops::Range<usize> {
    if k == 2 {
        1..2
    } else {
        0..k
    }
}

/// One retained posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub iter: u32,
    pub sigma: Vec<f64>,
    pub s: Vec<f64>,
}

impl Draw {
    #[inline]
    pub fn s(&self, g: usize, k: usize, n_classes: usize) -> f64 {
        self.s[g * n_classes + k]
    }
}

/// Retained draws plus an echo of the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub law: Law,
    pub order: usize,
    pub n_groups: usize,
    pub n_classes: usize,
    pub config: McmcConfig,
    pub draws: Vec<Draw>,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Linear predictors `l[i][k] = sum of s[g][k] over groups expressed by
/// case i`, row-major `N x K`.
pub fn linear_predictors(
    state: &ChainState,
    grouping: &Grouping,
    data: &SequenceDataset,
) -> Vec<f64> {
    let k = state.k;
    let mut l = vec![0.0; data.n_cases() * k];
    for i in 0..data.n_cases() {
        for &g in grouping.incident_groups(i) {
            let row = &state.s[g as usize * k..(g as usize + 1) * k];
            for (c, &sv) in row.iter().enumerate() {
                l[i * k + c] += sv;
            }
        }
    }
    l
}

/// Log-likelihood of the compressed parameters: softmax of the linear
/// predictors at each case's response.
pub fn log_likelihood(state: &ChainState, grouping: &Grouping, data: &SequenceDataset) -> f64 {
    let k = state.k;
    let l = linear_predictors(state, grouping, data);
    let mut ll = 0.0;
    for i in 0..data.n_cases() {
        let row = &l[i * k..(i + 1) * k];
        let y = data.response(i) as usize - 1;
        ll += row[y] - log_sum_exp(row.iter().copied());
    }
    ll
}

/// Conditional log-density (up to a constant) of one compressed parameter:
/// its stable prior at the group width plus the likelihood restricted to the
/// cases that express the group.
pub fn conditional_log_density_s(
    g: usize,
    class: usize,
    value: f64,
    state: &ChainState,
    grouping: &Grouping,
    data: &SequenceDataset,
    prior: &PriorSpec,
) -> Result<f64> {
    let k = state.k;
    if !sampled_classes(k).contains(&class) {
        return Err(SeqError::InvalidArgument(format!(
            "class index {class} is pinned to zero and never sampled"
        )));
    }
    let width = group_width(
        grouping.super_pattern(g),
        &state.sigma,
        prior.law,
        grouping.order(),
    );
    let mut out = stable_log_pdf(value, width, prior.law)?;
    let current = state.s(g, class);
    let mut row = vec![0.0f64; k];
    for &i in grouping.expression(g) {
        let i = i as usize;
        for (c, slot) in row.iter_mut().enumerate() {
            let mut v = 0.0;
            for &gg in grouping.incident_groups(i) {
                v += state.s(gg as usize, c);
            }
            *slot = v;
        }
        row[class] += value - current;
        let y = data.response(i) as usize - 1;
        out += row[y] - log_sum_exp(row.iter().copied());
    }
    Ok(out)
}

/// Conditional log-density (up to a constant) of one width `sigma_o`:
/// its Inverse-Gamma hyperprior plus the stable priors of every sampled
/// compressed parameter whose group contains a member of order `o`.
pub fn conditional_log_density_sigma(
    o: usize,
    value: f64,
    state: &ChainState,
    grouping: &Grouping,
    prior: &PriorSpec,
) -> Result<f64> {
    if o == 0 {
        return Err(SeqError::InvalidArgument(
            "sigma_0 is fixed and has no conditional".into(),
        ));
    }
    if !(value > 0.0) {
        return Err(SeqError::InvalidArgument(format!(
            "sigma must be positive, got {value}"
        )));
    }
    let rate = prior.hyper_rate(o);
    let mut out = -(prior.alpha + 1.0) * value.ln() + prior.alpha * rate.ln()
        - rate / value
        - ln_gamma(prior.alpha);
    let mut sigma = state.sigma.clone();
    sigma[o] = value;
    let order = grouping.order();
    for g in grouping.groups_with_order(o) {
        let width = group_width(grouping.super_pattern(g), &sigma, prior.law, order);
        for class in sampled_classes(state.k) {
            out += stable_log_pdf(state.s(g, class), width, prior.law)?;
        }
    }
    Ok(out)
}

/// Runs one chain and returns the retained draws.
///
/// Fully reproducible from the seed: the sweep order is groups in emission
/// order with classes ascending, then widths ascending in order, and all
/// randomness flows from a single counter-based generator.
#[allow(clippy::needless_range_loop)]
pub fn run_chain(
    data: &SequenceDataset,
    grouping: &Grouping,
    prior: &PriorSpec,
    config: &McmcConfig,
    progress: Option<&dyn Fn(u32)>,
) -> Result<ChainRecord> {
    if config.thin == 0 || config.iters == 0 {
        return Err(SeqError::InvalidArgument(format!(
            "iters and thin must be positive (iters={}, thin={})",
            config.iters, config.thin
        )));
    }
    let n = data.n_cases();
    let k = data.k() as usize;
    let order = grouping.order();
    let n_groups = grouping.n_groups();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut state = ChainState::initial(grouping, prior, data.k());
    let w_s = prior.slice_width();
    let law = prior.law;
    let ln_gamma_alpha = ln_gamma(prior.alpha);

    let responses: Vec<usize> = (0..n).map(|i| data.response(i) as usize - 1).collect();
    // Groups carrying each order, for the sigma conditionals.
    let by_order: Vec<Vec<u32>> = (0..=order)
        .map(|o| grouping.groups_with_order(o).map(|g| g as u32).collect())
        .collect();

    let mut cache = linear_predictors(&state, grouping, data);
    let mut draws = Vec::with_capacity(config.retained_count() as usize);

    for iter in 1..=config.iters {
        // Sweep over compressed parameters.
        for g in 0..n_groups {
            let sp = grouping.super_pattern(g);
            let width = group_width(sp, &state.sigma, law, order);
            let expr = grouping.expression(g);
            for class in sampled_classes(k) {
                let x0 = state.s(g, class);
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
                    state.set_s(g, class, x1);
                    let delta = x1 - x0;
                    for &i in expr {
                        cache[i as usize * k + class] += delta;
                    }
                }
            }
        }

        // Sigma sweeps.
        for _ in 0..SIGMA_SWEEPS {
            for o in 1..=order {
                let rate = prior.hyper_rate(o);
                let x0 = state.sigma[o];
                // Width contribution of the other orders, one entry per
                // affected group (each group has at most one member per order).
                let rest: Vec<f64> = by_order[o]
                    .iter()
                    .map(|&g| {
                        let sp = grouping.super_pattern(g as usize);
                        match law {
                            Law::Gaussian => (sp.b..=sp.f)
                                .map(|t| order + 1 - t)
                                .filter(|&oo| oo != o)
                                .map(|oo| state.sigma[oo] * state.sigma[oo])
                                .sum::<f64>(),
                            Law::Cauchy => (sp.b..=sp.f)
                                .map(|t| order + 1 - t)
                                .filter(|&oo| oo != o)
                                .map(|oo| state.sigma[oo])
                                .sum::<f64>(),
                        }
                    })
                    .collect();
                let groups = &by_order[o];
                let s = &state.s;
                let mut target = |v: f64| {
                    let mut out = -(prior.alpha + 1.0) * v.ln() + prior.alpha * rate.ln()
                        - rate / v
                        - ln_gamma_alpha;
                    for (idx, &g) in groups.iter().enumerate() {
                        match law {
                            Law::Gaussian => {
                                let var = rest[idx] + v * v;
                                let log_w = 0.5 * var.ln();
                                for class in sampled_classes(k) {
                                    let sv = s[g as usize * k + class];
                                    out += -sv * sv / (2.0 * var) - log_w;
                                }
                            }
                            Law::Cauchy => {
                                let w = rest[idx] + v;
                                let w_sq = w * w;
                                for class in sampled_classes(k) {
                                    let sv = s[g as usize * k + class];
                                    out += w.ln() - (w_sq + sv * sv).ln();
                                }
                            }
                        }
                    }
                    out
                };
                let x1 =
                    slice_sample_1d(&mut target, x0, W_SLICE_SIGMA, MAX_STEPS, &mut rng, true)?;
                state.sigma[o] = x1;
            }
        }

        // Flush incremental drift once per iteration.
        cache = linear_predictors(&state, grouping, data);

        if iter > config.burnin && (iter - config.burnin).is_multiple_of(config.thin) {
            draws.push(Draw {
                iter,
                sigma: state.sigma.clone(),
                s: state.s.clone(),
            });
        }
        if let Some(cb) = progress {
            cb(iter);
        }
    }

    Ok(ChainRecord {
        law,
        order,
        n_groups,
        n_classes: k,
        config: *config,
        draws,
    })
}

/// Serializes a chain record to the text chain format: metadata comments,
/// a column-header comment, then one retained draw per line at full
/// precision (17 significant digits round-trips f64 exactly).
pub fn write_chain_string(record: &ChainRecord) -> String {
    let mut out = String::new();
    let c = &record.config;
    let _ = writeln!(
        out,
        "# prior={} order={} groups={} classes={} iters={} burnin={} thin={} seed={}",
        record.law.name(),
        record.order,
        record.n_groups,
        record.n_classes,
        c.iters,
        c.burnin,
        c.thin,
        c.seed
    );
    let _ = write!(out, "# iter");
    for o in 0..=record.order {
        let _ = write!(out, " sigma_{o}");
    }
    for g in 1..=record.n_groups {
        for k in 1..=record.n_classes {
            let _ = write!(out, " s[{g}][{k}]");
        }
    }
    out.push('\n');
    for d in &record.draws {
        let _ = write!(out, "{}", d.iter);
        for v in d.sigma.iter().chain(d.s.iter()) {
            let _ = write!(out, " {v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parses the chain format produced by [`write_chain_string`].
pub fn parse_chain_str(content: &str, path: &str) -> Result<ChainRecord> {
    let mut law = None;
    let mut order = None;
    let mut n_groups = None;
    let mut n_classes = None;
    let mut config = McmcConfig {
        iters: 0,
        burnin: 0,
        thin: 1,
        seed: 0,
    };
    let mut draws = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| SeqError::Parse {
            path: path.to_string(),
            line: lineno + 1,
            msg,
        };
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some((key, value)) = token.split_once('=') {
                    match key {
                        "prior" => law = Some(Law::parse(value)?),
                        "order" => order = value.parse::<usize>().ok(),
                        "groups" => n_groups = value.parse::<usize>().ok(),
                        "classes" => n_classes = value.parse::<usize>().ok(),
                        "iters" => config.iters = value.parse().unwrap_or(0),
                        "burnin" => config.burnin = value.parse().unwrap_or(0),
                        "thin" => config.thin = value.parse().unwrap_or(1),
                        "seed" => config.seed = value.parse().unwrap_or(0),
                        _ => {}
                    }
                }
            }
            continue;
        }
        let (order, n_groups, n_classes) = match (order, n_groups, n_classes) {
            (Some(o), Some(g), Some(k)) => (o, g, k),
            _ => return Err(err("draw line before chain metadata header".into())),
        };
        let mut fields = line.split_whitespace();
        let iter: u32 = fields
            .next()
            .ok_or_else(|| err("empty draw line".into()))?
            .parse()
            .map_err(|e| err(format!("bad iteration index: {e}")))?;
        let values: std::result::Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
        let values = values.map_err(|e| err(format!("bad float: {e}")))?;
        let expected = (order + 1) + n_groups * n_classes;
        if values.len() != expected {
            return Err(err(format!(
                "expected {expected} values, found {}",
                values.len()
            )));
        }
        let (sigma, s) = values.split_at(order + 1);
        draws.push(Draw {
            iter,
            sigma: sigma.to_vec(),
            s: s.to_vec(),
        });
    }
    let law =
        law.ok_or_else(|| SeqError::InvalidChain(format!("{path}: missing prior= header")))?;
    let order = order.ok_or_else(|| SeqError::InvalidChain(format!("{path}: missing order=")))?;
    let n_groups =
        n_groups.ok_or_else(|| SeqError::InvalidChain(format!("{path}: missing groups=")))?;
    let n_classes =
        n_classes.ok_or_else(|| SeqError::InvalidChain(format!("{path}: missing classes=")))?;
    Ok(ChainRecord {
        law,
        order,
        n_groups,
        n_classes,
        config,
        draws,
    })
}
