//! Symmetric-stable distribution numerics.
//!
//! Only the two closed-form members of the symmetric stable family are used:
//! Gaussian (index 2) and Cauchy (index 1). Sums of independent draws stay in
//! the family with width `(sum of width^alpha)^(1/alpha)`, which is what makes
//! parameter compression work: the prior of a group sum is available in
//! closed form.
//!
//! The module also provides the distribution of a sub-sum conditional on the
//! total ("splitting distribution"). For Gaussian priors this is a Gaussian
//! with known mean and variance; for Cauchy priors the density is
//! `1/C * [S1^2 + x^2]^-1 [S2^2 + (x-s)^2]^-1` with a closed-form CDF that is
//! inverted numerically (Illinois method) to sample.

use crate::error::{Result, SeqError};
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use statrs::function::gamma::{gamma_ur, ln_gamma};
use std::f64::consts::PI;

/// Stable law selector: Gaussian has index 2, Cauchy index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    Gaussian,
    Cauchy,
}

impl Law {
    pub fn alpha(self) -> f64 {
        match self {
            Law::Gaussian => 2.0,
            Law::Cauchy => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Law::Gaussian => "gaussian",
            Law::Cauchy => "cauchy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Law::Gaussian),
            "cauchy" => Ok(Law::Cauchy),
            other => Err(SeqError::InvalidArgument(format!(
                "unknown law '{other}' (expected gaussian or cauchy)"
            ))),
        }
    }
}

/// Log-density of the stable law with location 0 and the given width.
pub fn stable_log_pdf(x: f64, width: f64, law: Law) -> Result<f64> {
    if !(width > 0.0) {
        return Err(SeqError::InvalidArgument(format!(
            "stable width must be positive, got {width}"
        )));
    }
    Ok(match law {
        Law::Gaussian => -x * x / (2.0 * width * width) - (width * (2.0 * PI).sqrt()).ln(),
        // 1 / (pi w (1 + x^2/w^2)) rewritten as w / (pi (w^2 + x^2))
        Law::Cauchy => width.ln() - PI.ln() - (width * width + x * x).ln(),
    })
}

/// Width of a sum of independent stable draws: root-sum-square for Gaussian,
/// plain sum for Cauchy.
pub fn sum_width(widths: &[f64], law: Law) -> f64 {
    match law {
        Law::Gaussian => widths.iter().map(|w| w * w).sum::<f64>().sqrt(),
        Law::Cauchy => widths.iter().sum(),
    }
}

/// One draw from the stable law with location 0 and the given width.
pub fn stable_draw<R: Rng + ?Sized>(width: f64, law: Law, rng: &mut R) -> f64 {
    if width == 0.0 {
        return 0.0;
    }
    match law {
        Law::Gaussian => {
            let z: f64 = StandardNormal.sample(rng);
            width * z
        }
        Law::Cauchy => {
            let u: f64 = Open01.sample(rng);
            width * (PI * (u - 0.5)).tan()
        }
    }
}

/// Log-density of Inverse-Gamma(shape, rate): `x^(-a-1) r^a e^(-r/x) / Gamma(a)`.
pub fn inv_gamma_log_pdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    if !(x > 0.0) || !(shape > 0.0) || !(rate > 0.0) {
        return Err(SeqError::InvalidArgument(format!(
            "inverse-gamma arguments out of domain (x={x}, shape={shape}, rate={rate})"
        )));
    }
    Ok(-(shape + 1.0) * x.ln() + shape * rate.ln() - rate / x - ln_gamma(shape))
}

/// Inverse-Gamma CDF via the regularized upper incomplete gamma function.
pub fn inv_gamma_cdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_ur(shape, rate / x)
}

/// Inverse-Gamma quantile, by bisection on the CDF to 1e-10 relative accuracy.
pub fn inv_gamma_quantile(p: f64, shape: f64, rate: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || !(shape > 0.0) || !(rate > 0.0) {
        return Err(SeqError::InvalidArgument(format!(
            "inverse-gamma quantile arguments out of domain (p={p}, shape={shape}, rate={rate})"
        )));
    }
    let mut lo = rate / (shape + 1.0); // prior mode
    let mut hi = lo;
    while inv_gamma_cdf(lo, shape, rate) > p {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            break;
        }
    }
    while inv_gamma_cdf(hi, shape, rate) < p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(SeqError::InversionFailure {
                iters: 0,
                residual: f64::INFINITY,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inv_gamma_cdf(mid, shape, rate) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-10 * mid {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One conditional split of a compressed parameter: the sum `s` of a group of
/// independent stable draws is decomposed into a sub-sum with width `sigma1`
/// (the part a test case needs) plus a complement with width `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub s: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub law: Law,
}

impl SplitSpec {
    pub fn new(s: f64, sigma1: f64, sigma2: f64, law: Law) -> Result<Self> {
        if !(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !(sigma1 + sigma2 > 0.0) {
            return Err(SeqError::InvalidArgument(format!(
                "split widths must be nonnegative with positive sum (sigma1={sigma1}, sigma2={sigma2})"
            )));
        }
        Ok(Self {
            s,
            sigma1,
            sigma2,
            law,
        })
    }

    fn scale(&self) -> f64 {
        self.sigma1 + self.sigma2 + self.s.abs()
    }

    /// The general-case CDF coefficients degenerate when `s = 0` and
    /// `sigma1 = sigma2`; that case is dispatched to a scaled t-distribution
    /// with 3 degrees of freedom.
    pub fn is_t3_case(&self) -> bool {
        let c = self.sigma1 + self.sigma2;
        self.s.abs() < 1e-8 * c && (self.sigma1 - self.sigma2).abs() < 1e-8 * c
    }
}

/// Conditional mean and variance of the Gaussian split distribution.
pub fn gaussian_split_moments(spec: &SplitSpec) -> (f64, f64) {
    let v1 = spec.sigma1 * spec.sigma1;
    let v2 = spec.sigma2 * spec.sigma2;
    let w = v1 / (v1 + v2);
    (spec.s * w, v1 * (1.0 - w))
}

/// Samples the sub-sum given the total when the priors are Gaussian.
pub fn gaussian_split_sample<R: Rng + ?Sized>(spec: &SplitSpec, rng: &mut R) -> Result<f64> {
    if spec.law != Law::Gaussian {
        return Err(SeqError::InvalidArgument(
            "gaussian_split_sample called with a Cauchy spec".into(),
        ));
    }
    if spec.sigma1 == 0.0 {
        return Ok(0.0);
    }
    if spec.sigma2 == 0.0 {
        return Ok(spec.s);
    }
    let (mean, var) = gaussian_split_moments(spec);
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + var.sqrt() * z)
}

/// Partial-fraction coefficients of the Cauchy split CDF.
#[derive(Debug, Clone, Copy)]
pub struct CauchySplitTerms {
    /// Normalizing constant of the density.
    pub c: f64,
    /// Coefficient of the log term.
    pub r: f64,
    /// Coefficient of the arctan term at the first component.
    pub p0: f64,
    /// Coefficient of the arctan term at the second component.
    pub ps: f64,
}

/// Computes the closed-form CDF coefficients for the general (non-t3) case.
pub fn cauchy_split_terms(spec: &SplitSpec) -> Result<CauchySplitTerms> {
    check_cauchy(spec)?;
    let (s, s1, s2) = (spec.s, spec.sigma1, spec.sigma2);
    let v1 = s1 * s1;
    let v2 = s2 * s2;
    let s_sq = s * s;
    let c = PI * (s1 + s2) / (s1 * s2 * (s_sq + (s1 + s2) * (s1 + s2)));
    let d = s_sq * s_sq + 2.0 * (v1 + v2) * s_sq + (v1 - v2) * (v1 - v2);
    Ok(CauchySplitTerms {
        c,
        r: s / d,
        p0: (s_sq - (v1 - v2)) / (s1 * d),
        ps: (s_sq + (v1 - v2)) / (s2 * d),
    })
}

fn check_cauchy(spec: &SplitSpec) -> Result<()> {
    if spec.law != Law::Cauchy {
        return Err(SeqError::InvalidArgument(
            "cauchy split function called with a Gaussian spec".into(),
        ));
    }
    if !(spec.sigma1 > 0.0) || !(spec.sigma2 > 0.0) {
        return Err(SeqError::InvalidArgument(format!(
            "cauchy split widths must be positive (sigma1={}, sigma2={})",
            spec.sigma1, spec.sigma2
        )));
    }
    Ok(())
}

/// Log-density of the Cauchy split distribution at `x`.
pub fn cauchy_split_log_pdf(x: f64, spec: &SplitSpec) -> Result<f64> {
    check_cauchy(spec)?;
    let (s, s1, s2) = (spec.s, spec.sigma1, spec.sigma2);
    let c = PI * (s1 + s2) / (s1 * s2 * (s * s + (s1 + s2) * (s1 + s2)));
    Ok(-c.ln() - (s1 * s1 + x * x).ln() - (s2 * s2 + (x - s) * (x - s)).ln())
}

/// CDF of a t-distribution with 3 degrees of freedom scaled so that `sigma`
/// is the half-width of the underlying squared-Cauchy-split density.
fn t3_scaled_cdf(x: f64, sigma: f64) -> f64 {
    0.5 + (sigma * x / (x * x + sigma * sigma) + (x / sigma).atan()) / PI
}

/// CDF of the Cauchy split distribution.
///
/// Uses the closed form with coefficients from [`cauchy_split_terms`]; the
/// degenerate `s = 0`, `sigma1 = sigma2` case is a t-distribution with 3
/// degrees of freedom, mean 0 and width `sigma1 / sqrt(3)`.
pub fn cauchy_split_cdf(x: f64, spec: &SplitSpec) -> Result<f64> {
    check_cauchy(spec)?;
    if spec.is_t3_case() {
        return Ok(t3_scaled_cdf(x, 0.5 * (spec.sigma1 + spec.sigma2)));
    }
    let t = cauchy_split_terms(spec)?;
    let (s, s1, s2) = (spec.s, spec.sigma1, spec.sigma2);
    let log_term = ((x * x + s1 * s1) / ((x - s) * (x - s) + s2 * s2)).ln();
    let val = t.r * log_term
        + t.p0 * ((x / s1).atan() + PI / 2.0)
        + t.ps * (((x - s) / s2).atan() + PI / 2.0);
    // Guard tiny negative values from cancellation in the far left tail.
    Ok((val / t.c).clamp(0.0, 1.0))
}

/// Quantile of the Cauchy split distribution by Illinois inversion of the CDF.
///
/// Converges to `|F(x) - u| < 1e-10` (or a bracket below `1e-12 * scale`),
/// capped at 200 iterations. The initial bracket spans the two component
/// medians expanded geometrically until it contains the target level.
pub fn cauchy_split_quantile(spec: &SplitSpec, u: f64) -> Result<f64> {
    check_cauchy(spec)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(SeqError::InvalidArgument(format!(
            "quantile level must be in (0,1), got {u}"
        )));
    }
    let scale = spec.scale();
    let mut lo = spec.s.min(0.0) - scale;
    let mut hi = spec.s.max(0.0) + scale;
    let mut step = scale;
    let mut g_lo = cauchy_split_cdf(lo, spec)? - u;
    let mut g_hi = cauchy_split_cdf(hi, spec)? - u;
    let mut expansions = 0;
    while g_lo > 0.0 {
        lo -= step;
        step *= 2.0;
        g_lo = cauchy_split_cdf(lo, spec)? - u;
        expansions += 1;
        if expansions > 200 {
            return Err(SeqError::BracketFailure { u, lo, hi });
        }
    }
    step = scale;
    while g_hi < 0.0 {
        hi += step;
        step *= 2.0;
        g_hi = cauchy_split_cdf(hi, spec)? - u;
        expansions += 1;
        if expansions > 200 {
            return Err(SeqError::BracketFailure { u, lo, hi });
        }
    }

    // Illinois: false position, halving the function value of an endpoint
    // that is retained twice in a row.
    let mut side = 0i8;
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let mut next = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let x = next;
        let g_x = cauchy_split_cdf(x, spec)? - u;
        residual = g_x.abs();
        if residual < 1e-10 {
            return Ok(x);
        }
        if g_x > 0.0 {
            hi = x;
            g_hi = g_x;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            g_lo = g_x;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
        if (hi - lo).abs() < 1e-12 * scale {
            return Ok(x);
        }
    }
    Err(SeqError::InversionFailure {
        iters: 200,
        residual,
    })
}

/// Samples the sub-sum given the total when the priors are Cauchy, by
/// inversion of the closed-form CDF.
pub fn cauchy_split_sample<R: Rng + ?Sized>(spec: &SplitSpec, rng: &mut R) -> Result<f64> {
    let u: f64 = Open01.sample(rng);
    cauchy_split_quantile(spec, u)
}

/// Samples the split distribution for either law.
pub fn split_sample<R: Rng + ?Sized>(spec: &SplitSpec, rng: &mut R) -> Result<f64> {
    match spec.law {
        Law::Gaussian => gaussian_split_sample(spec, rng),
        Law::Cauchy => cauchy_split_sample(spec, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn stable_log_pdf_reference_points() {
        assert_relative_eq!(
            stable_log_pdf(0.0, 1.0, Law::Cauchy).unwrap(),
            -PI.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            stable_log_pdf(0.0, 1.0, Law::Gaussian).unwrap(),
            -0.918_938_533_204_672_7,
            max_relative = 1e-14
        );
        // half-mode point of the Cauchy
        let w = 2.5;
        assert_relative_eq!(
            stable_log_pdf(w, w, Law::Cauchy).unwrap(),
            -(2.0 * PI * w).ln(),
            max_relative = 1e-14
        );
        assert!(stable_log_pdf(1.0, 0.0, Law::Cauchy).is_err());
        assert!(stable_log_pdf(1.0, -1.0, Law::Gaussian).is_err());
    }

    #[test]
    fn sum_width_additivity() {
        assert_relative_eq!(sum_width(&[3.0, 4.0], Law::Gaussian), 5.0);
        assert_relative_eq!(sum_width(&[3.0, 4.0], Law::Cauchy), 7.0);
        assert_relative_eq!(sum_width(&[1.7], Law::Gaussian), 1.7);
        assert_relative_eq!(sum_width(&[1.7], Law::Cauchy), 1.7);
    }

    #[test]
    fn inv_gamma_quantiles_match_prior_table() {
        // Median and 10% point of the order-1 width prior, and the 1/o
        // scaling for order 2.
        let q50 = inv_gamma_quantile(0.5, 0.25, 0.125).unwrap();
        assert_relative_eq!(q50, 2.862, max_relative = 2e-3);
        let q10 = inv_gamma_quantile(0.1, 0.25, 0.125).unwrap();
        assert_relative_eq!(q10, 0.1666, max_relative = 2e-3);
        let q50_o2 = inv_gamma_quantile(0.5, 0.25, 0.125 / 2.0).unwrap();
        assert_relative_eq!(q50_o2, q50 / 2.0, max_relative = 1e-9);
        assert!(inv_gamma_quantile(0.0, 0.25, 0.125).is_err());
        assert!(inv_gamma_quantile(0.5, 0.25, -1.0).is_err());
    }

    #[test]
    fn inv_gamma_quantile_inverts_cdf() {
        for &p in &[0.01, 0.2, 0.5, 0.9, 0.99] {
            let q = inv_gamma_quantile(p, 0.25, 0.125).unwrap();
            assert_relative_eq!(inv_gamma_cdf(q, 0.25, 0.125), p, epsilon = 1e-9);
        }
    }

    #[test]
    fn gaussian_split_degenerate_and_moments() {
        let spec = SplitSpec::new(2.0, 1.0, 3f64.sqrt(), Law::Gaussian).unwrap();
        let (m, v) = gaussian_split_moments(&spec);
        assert_relative_eq!(m, 0.5, max_relative = 1e-12);
        assert_relative_eq!(v, 0.75, max_relative = 1e-12);

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let zero1 = SplitSpec::new(5.0, 0.0, 2.0, Law::Gaussian).unwrap();
        assert_eq!(gaussian_split_sample(&zero1, &mut rng).unwrap(), 0.0);
        let zero2 = SplitSpec::new(5.0, 2.0, 0.0, Law::Gaussian).unwrap();
        assert_eq!(gaussian_split_sample(&zero2, &mut rng).unwrap(), 5.0);

        let sym = SplitSpec::new(0.0, 1.5, 1.5, Law::Gaussian).unwrap();
        let (m, v) = gaussian_split_moments(&sym);
        assert_relative_eq!(m, 0.0);
        assert_relative_eq!(v, 1.5 * 1.5 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn cauchy_cdf_limits_and_median() {
        let sym = SplitSpec::new(0.0, 1.2, 1.2, Law::Cauchy).unwrap();
        assert_relative_eq!(cauchy_split_cdf(0.0, &sym).unwrap(), 0.5, epsilon = 1e-14);

        for spec in [
            SplitSpec::new(2.0, 0.5, 1.5, Law::Cauchy).unwrap(),
            SplitSpec::new(-4.0, 3.0, 0.2, Law::Cauchy).unwrap(),
            SplitSpec::new(0.0, 1.0, 2.0, Law::Cauchy).unwrap(),
        ] {
            let big = 1e9 * (spec.sigma1 + spec.sigma2 + spec.s.abs());
            assert!((cauchy_split_cdf(big, &spec).unwrap() - 1.0).abs() < 1e-6);
            assert!(cauchy_split_cdf(-big, &spec).unwrap() < 1e-6);
        }
    }

    #[test]
    fn cauchy_cdf_frozen_quadrature_value() {
        // Frozen from adaptive quadrature of the density over (-inf, 1].
        let spec = SplitSpec::new(2.0, 0.5, 1.5, Law::Cauchy).unwrap();
        assert_relative_eq!(
            cauchy_split_cdf(1.0, &spec).unwrap(),
            0.752_835_729_036_411_3,
            epsilon = 1e-10
        );
    }

    #[test]
    fn cauchy_quantile_roundtrip() {
        let specs = [
            SplitSpec::new(2.0, 0.5, 1.5, Law::Cauchy).unwrap(),
            SplitSpec::new(0.0, 1.0, 1.0, Law::Cauchy).unwrap(),
            SplitSpec::new(-7.0, 0.05, 4.0, Law::Cauchy).unwrap(),
            SplitSpec::new(1e-12, 2.0, 2.0 + 1e-12, Law::Cauchy).unwrap(),
        ];
        for spec in &specs {
            for &u in &[1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
                let x = cauchy_split_quantile(spec, u).unwrap();
                let back = cauchy_split_cdf(x, spec).unwrap();
                assert!(
                    (back - u).abs() < 1e-10,
                    "roundtrip failed: u={u}, F(Finv(u))={back}"
                );
            }
        }
    }

    #[test]
    fn cauchy_symmetric_median_is_zero() {
        let sym = SplitSpec::new(0.0, 0.8, 0.8, Law::Cauchy).unwrap();
        let x = cauchy_split_quantile(&sym, 0.5).unwrap();
        assert!(x.abs() < 1e-10 * sym.scale());
    }

    #[test]
    fn split_pair_symmetry() {
        // pdf(x; s, S1, S2) = pdf(s - x; s, S2, S1)
        let a = SplitSpec::new(3.0, 0.7, 2.1, Law::Cauchy).unwrap();
        let b = SplitSpec::new(3.0, 2.1, 0.7, Law::Cauchy).unwrap();
        for &x in &[-5.0, -0.3, 0.0, 1.4, 3.0, 8.2] {
            assert_relative_eq!(
                cauchy_split_log_pdf(x, &a).unwrap(),
                cauchy_split_log_pdf(a.s - x, &b).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        let specs = [
            SplitSpec::new(2.0, 0.5, 1.5, Law::Cauchy).unwrap(),
            SplitSpec::new(0.0, 1.0, 3.0, Law::Cauchy).unwrap(),
            SplitSpec::new(-1.0, 2.0, 2.0, Law::Cauchy).unwrap(),
        ];
        for spec in &specs {
            let scale = spec.scale();
            for i in 0..40 {
                let x = spec.s.min(0.0) - scale + (2.0 * scale + spec.s.abs()) * i as f64 / 39.0;
                let h = 1e-5 * scale;
                let num = (cauchy_split_cdf(x + h, spec).unwrap()
                    - cauchy_split_cdf(x - h, spec).unwrap())
                    / (2.0 * h);
                let ana = cauchy_split_log_pdf(x, spec).unwrap().exp();
                assert_relative_eq!(num, ana, max_relative = 1e-5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn t3_case_dispatch() {
        let t3 = SplitSpec::new(0.0, 1.0, 1.0, Law::Cauchy).unwrap();
        assert!(t3.is_t3_case());
        let near = SplitSpec::new(1e-12, 1.0, 1.0 + 1e-12, Law::Cauchy).unwrap();
        assert!(near.is_t3_case());
        let general = SplitSpec::new(0.0, 1.0, 1.001, Law::Cauchy).unwrap();
        assert!(!general.is_t3_case());
    }

    #[test]
    fn law_mismatch_rejected() {
        let g = SplitSpec::new(0.0, 1.0, 1.0, Law::Gaussian).unwrap();
        assert!(cauchy_split_cdf(0.0, &g).is_err());
        let c = SplitSpec::new(0.0, 1.0, 1.0, Law::Cauchy).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(gaussian_split_sample(&c, &mut rng).is_err());
        assert!(SplitSpec::new(0.0, 0.0, 0.0, Law::Cauchy).is_err());
    }
}
