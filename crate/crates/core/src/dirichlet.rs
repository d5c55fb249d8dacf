//! Symmetric Dirichlet model of rank–frequency curves.
//!
//! A language with `n` phonemes is treated as one draw from a symmetric
//! Dirichlet with concentration `α`. Each share is marginally
//! `Beta(α, (n-1)α)`, and the probability at rank `r` (rank 1 being the most
//! frequent phoneme) is the `(n + 1 - r)`-th order statistic of `n` such
//! marginals.
//!
//! Rank means and standard deviations are those of the ranked shares of a
//! Dirichlet draw. They are computed by adaptive quadrature over the order
//! statistics of iid Gamma variables, which carry the same ranking once
//! normalized. Rank intervals use the order-statistic distribution of
//! independent Beta marginals ([`DirichletSpec::order_statistic_pdf`]).
//!
//! Near an endpoint where the marginal density is singular, the integration
//! variable is `t = x^α` (lower end, `α < 1`) or `s = (1-x)^((n-1)α)` (upper
//! end, `(n-1)α < 1`). These substitutions cancel the singular factor exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, QuadOptions};
use crate::roots::{find_root, RootOptions};
use crate::special::{
    digamma_unchecked, ln_1m_exp, ln_beta, ln_beta_inc_tails, ln_gamma, ln_gamma_inc_tails, ln_gamma_inc_tails_ln,
    LnTails,
};

/// Number of distinct phonemes in an inventory (at least two).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InventorySize(usize);

impl InventorySize {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("inventory size must be at least 2, got {n}")));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `ln n`, the maximum entropy of a distribution over this inventory.
    pub fn max_entropy(self) -> f64 {
        (self.0 as f64).ln()
    }
}

impl fmt::Display for InventorySize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Concentration parameter of a symmetric Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Concentration(f64);

impl Concentration {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!(
                "concentration must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Concentration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A symmetric Dirichlet over `n` categories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletSpec {
    n: InventorySize,
    alpha: Concentration,
    ln_beta: f64,
}

impl DirichletSpec {
    pub fn new(n: InventorySize, alpha: Concentration) -> Self {
        let (a, b) = (alpha.get(), (n.get() - 1) as f64 * alpha.get());
        Self {
            n,
            alpha,
            ln_beta: ln_beta(a, b),
        }
    }

    /// Shorthand for validated construction from raw numbers.
    pub fn from_raw(n: usize, alpha: f64) -> Result<Self> {
        Ok(Self::new(InventorySize::new(n)?, Concentration::new(alpha)?))
    }

    pub fn n(&self) -> InventorySize {
        self.n
    }

    pub fn alpha(&self) -> Concentration {
        self.alpha
    }

    /// Parameters `(α, (n-1)α)` of the Beta marginal.
    pub fn marginal_params(&self) -> (f64, f64) {
        let a = self.alpha.get();
        (a, (self.n.get() - 1) as f64 * a)
    }

    fn ln_marginal_pdf(&self, ln_x: f64, ln_y: f64) -> f64 {
        let (a, b) = self.marginal_params();
        (a - 1.0) * ln_x + (b - 1.0) * ln_y - self.ln_beta
    }

    /// Density of one share, `Beta(α, (n-1)α)`, at `x ∈ (0, 1)`.
    pub fn marginal_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("marginal density needs 0 < x < 1, got {x}")));
        }
        Ok(self.ln_marginal_pdf(x.ln(), (-x).ln_1p()).exp())
    }

    /// Distribution function of one share at `x ∈ [0, 1]`.
    pub fn marginal_cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("marginal CDF needs 0 <= x <= 1, got {x}")));
        }
        let (a, b) = self.marginal_params();
        Ok(ln_beta_inc_tails(a, b, x.ln(), (-x).ln_1p()).lower.exp())
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order == 0 || order > self.n.get() {
            return Err(Error::domain(format!(
                "order statistic {order} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }

    fn ln_order_coefficient(&self, order: usize) -> f64 {
        // n! / ((j-1)! (n-j)!) via log-gamma.
        let n = self.n.get() as f64;
        let j = order as f64;
        ln_gamma(n + 1.0) - ln_gamma(j) - ln_gamma(n - j + 1.0)
    }

    /// Density of the `order`-th smallest of the `n` shares at `x ∈ (0, 1)`.
    ///
    /// `order = n` is the largest share (rank 1); see [`rank_to_order`].
    pub fn order_statistic_pdf(&self, order: usize, x: f64) -> Result<f64> {
        self.check_order(order)?;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("order-statistic density needs 0 < x < 1, got {x}")));
        }
        let (a, b) = self.marginal_params();
        let (ln_x, ln_y) = (x.ln(), (-x).ln_1p());
        let tails = ln_beta_inc_tails(a, b, ln_x, ln_y);
        let n = self.n.get() as f64;
        let j = order as f64;
        let ln_density = self.ln_order_coefficient(order)
            + self.ln_marginal_pdf(ln_x, ln_y)
            + log_power(j - 1.0, tails.lower)
            + log_power(n - j, tails.upper);
        Ok(ln_density.exp())
    }

    /// Quantile of the `order`-th smallest share: the `x` at which
    /// `I_{F(x)}(order, n - order + 1) = q`.
    pub fn order_statistic_quantile(&self, order: usize, q: f64) -> Result<f64> {
        self.check_order(order)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        let n = self.n.get() as f64;
        let j = order as f64;
        let (ln_u, ln_1mu) = beta_quantile_ln(j, n - j + 1.0, q.ln(), (-q).ln_1p())?;
        let (a, b) = self.marginal_params();
        let (ln_x, ln_y) = beta_quantile_ln(a, b, ln_u, ln_1mu)?;
        Ok(point_from_logs(ln_x, ln_y))
    }

    /// `ψ(αn + 1) − ψ(α + 1)`: expected entropy (nats) of a draw.
    pub fn expected_entropy(&self) -> f64 {
        expected_entropy_raw(self.n.get() as f64, self.alpha.get())
    }

    /// Expected entropy divided by `ln n`.
    pub fn relative_expected_entropy(&self) -> f64 {
        self.expected_entropy() / self.n.max_entropy()
    }
}

/// Map a rank (1 = most frequent) to its order-statistic index.
pub fn rank_to_order(n: InventorySize, rank: usize) -> usize {
    n.get() + 1 - rank
}

// `k * ln_p`, treating 0 * -inf as 0.
fn log_power(k: f64, ln_p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * ln_p
    }
}

fn point_from_logs(ln_x: f64, ln_y: f64) -> f64 {
    if ln_x < -std::f64::consts::LN_2 {
        ln_x.exp()
    } else {
        -ln_y.exp_m1()
    }
}

// Beta(a, b) quantile at level p, given (ln p, ln(1-p)); returns
// (ln x, ln(1-x)). Solved in z = logit(x), which keeps relative precision
// at both ends, matching against whichever tail holds less mass.
pub(crate) fn beta_quantile_ln(a: f64, b: f64, ln_p: f64, ln_q: f64) -> Result<(f64, f64)> {
    let opts = RootOptions {
        x_tol: 1e-15,
        ..Default::default()
    };
    let logs = |z: f64| (-softplus(-z), -softplus(z));
    let g = |z: f64| {
        let (ln_x, ln_y) = logs(z);
        let t = ln_beta_inc_tails(a, b, ln_x, ln_y);
        if ln_p <= ln_q {
            t.lower - ln_p
        } else {
            ln_q - t.upper
        }
    };
    let (lo, hi) = (log_floor(a), -log_floor(b));
    if g(lo) >= 0.0 {
        return Ok(logs(lo));
    }
    if g(hi) <= 0.0 {
        return Ok(logs(hi));
    }
    Ok(logs(find_root(g, lo, hi, &opts)?))
}

// ln(1 + e^z).
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

// Lowest log-coordinate searched for a quantile of a density behaving like
// x^(shape-1) at zero; tail levels down to ~1e-300 stay in range.
fn log_floor(shape: f64) -> f64 {
    -745.0 - 700.0 / shape.min(1.0)
}

fn expected_entropy_raw(n: f64, alpha: f64) -> f64 {
    digamma_unchecked(alpha * n + 1.0) - digamma_unchecked(alpha + 1.0)
}

/// Expected entropy (nats) of a draw from the symmetric Dirichlet.
pub fn expected_entropy(spec: &DirichletSpec) -> f64 {
    spec.expected_entropy()
}

/// Lower and upper ends of the concentration search range.
pub const ALPHA_BRACKET: (f64, f64) = (1e-8, 1e8);

/// Concentration whose expected entropy equals `entropy_hat` (nats).
pub fn solve_alpha(entropy_hat: f64, n: InventorySize) -> Result<Concentration> {
    let h_max = n.max_entropy();
    if !entropy_hat.is_finite() || entropy_hat <= 0.0 {
        return Err(Error::Infeasible(format!(
            "entropy {entropy_hat} must be greater than 0"
        )));
    }
    if entropy_hat >= h_max {
        return Err(Error::Infeasible(format!(
            "entropy {entropy_hat} must be below ln n = {h_max} for n = {n}"
        )));
    }
    let nf = n.get() as f64;
    let (lo, hi) = (ALPHA_BRACKET.0.ln(), ALPHA_BRACKET.1.ln());
    let g = |z: f64| expected_entropy_raw(nf, z.exp()) - entropy_hat;
    if g(lo) > 0.0 {
        return Err(Error::Infeasible(format!(
            "entropy {entropy_hat} is below the expected entropy at alpha = {:e}",
            ALPHA_BRACKET.0
        )));
    }
    if g(hi) < 0.0 {
        return Err(Error::Infeasible(format!(
            "entropy {entropy_hat} is above the expected entropy at alpha = {:e}",
            ALPHA_BRACKET.1
        )));
    }
    let z = find_root(g, lo, hi, &RootOptions::default())?;
    Concentration::new(z.exp())
}

/// Power law `α(n) = a · n^b` linking inventory size and concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaScalingLaw {
    pub coeff_a: f64,
    pub exponent_b: f64,
    pub se_a: Option<f64>,
    pub se_b: Option<f64>,
}

impl Default for AlphaScalingLaw {
    fn default() -> Self {
        Self {
            coeff_a: 19.47,
            exponent_b: -0.95,
            se_a: None,
            se_b: None,
        }
    }
}

impl AlphaScalingLaw {
    pub fn new(coeff_a: f64, exponent_b: f64) -> Result<Self> {
        if !(coeff_a.is_finite() && coeff_a > 0.0) {
            return Err(Error::domain(format!("scaling coefficient must be positive, got {coeff_a}")));
        }
        if !exponent_b.is_finite() {
            return Err(Error::domain("scaling exponent must be finite"));
        }
        Ok(Self {
            coeff_a,
            exponent_b,
            se_a: None,
            se_b: None,
        })
    }
}

/// `α = a · n^b`.
pub fn predict_alpha(n: InventorySize, law: &AlphaScalingLaw) -> Result<Concentration> {
    Concentration::new(law.coeff_a * (n.get() as f64).powf(law.exponent_b))
}

/// Moments (and optionally a central interval) of one rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSummary {
    /// 1 = most frequent.
    pub rank: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci: Option<(f64, f64)>,
}

/// Per-rank table of order-statistic moments for one Dirichlet.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatSummary {
    pub spec: DirichletSpec,
    pub ci_level: Option<f64>,
    pub ranks: Vec<RankSummary>,
}

impl OrderStatSummary {
    pub fn means(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| r.mean).collect()
    }

    pub fn sds(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| r.sd).collect()
    }

    /// Fraction of `observed` rank probabilities (sorted descending, rank 1
    /// first) that fall inside the per-rank intervals. Only the first
    /// `min(len, n)` ranks are compared.
    pub fn band_coverage(&self, observed: &[f64]) -> Option<f64> {
        let pairs: Vec<_> = self.ranks.iter().zip(observed).collect();
        if pairs.is_empty() {
            return None;
        }
        let mut inside = 0usize;
        for (row, &p) in &pairs {
            let (lo, hi) = row.ci?;
            if p >= lo && p <= hi {
                inside += 1;
            }
        }
        Some(inside as f64 / pairs.len() as f64)
    }
}

/// Tolerance (absolute) on each integrated moment.
pub const MOMENT_TOLERANCE: f64 = 1e-8;

const BREAK_LEVELS: [f64; 11] = [
    1e-14, 1e-11, 1e-8, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.15, 0.3, 0.5,
];

// Marginal quantities at one quadrature node: the point, the log density
// times the Jacobian of the substitution, and both log CDF tails.
struct Node {
    x: f64,
    ln_fj: f64,
    tails: LnTails,
}

// Integrate `[1, s1·x, s2·x²]` against every order-statistic density of `n`
// iid draws from a marginal described by two half-line maps.
fn rank_moments<L, U>(
    n: usize,
    lower: (&[f64], L),
    upper: (&[f64], U),
    scale: (f64, f64),
) -> Result<Vec<RankSummary>>
where
    L: Fn(f64) -> Node,
    U: Fn(f64) -> Node,
{
    let nf = n as f64;
    let ln_coef: Vec<f64> = (1..=n)
        .map(|j| ln_gamma(nf + 1.0) - ln_gamma(j as f64) - ln_gamma(nf - j as f64 + 1.0))
        .collect();
    let opts = QuadOptions {
        abs_tol: 1e-11,
        max_panels: 50_000,
    };
    let dim = 3 * n;
    let fill = |node: Node, out: &mut [f64]| {
        for j in 1..=n {
            let ln_w = ln_coef[j - 1]
                + node.ln_fj
                + log_power((j - 1) as f64, node.tails.lower)
                + log_power((n - j) as f64, node.tails.upper);
            let w = ln_w.exp();
            let k = 3 * (n - j);
            out[k] = w;
            out[k + 1] = scale.0 * node.x * w;
            out[k + 2] = scale.1 * node.x * node.x * w;
        }
    };
    let lo = integrate_vec(|t, out| fill((lower.1)(t), out), lower.0, dim, &opts)?;
    let hi = integrate_vec(|t, out| fill((upper.1)(t), out), upper.0, dim, &opts)?;

    let mut ranks = Vec::with_capacity(n);
    let mut worst = (0usize, 0.0f64);
    for rank in 1..=n {
        let k = 3 * (rank - 1);
        let mass = lo.values[k] + hi.values[k];
        let m1 = lo.values[k + 1] + hi.values[k + 1];
        let m2 = lo.values[k + 2] + hi.values[k + 2];
        let err = (mass - 1.0).abs();
        if err > worst.1 {
            worst = (rank, err);
        }
        ranks.push(RankSummary {
            rank,
            mean: m1,
            sd: (m2 - m1 * m1).max(0.0).sqrt(),
            ci: None,
        });
    }
    if worst.1 > MOMENT_TOLERANCE {
        return Err(Error::Numerical(format!(
            "order-statistic density for rank {} integrates to 1 ± {:e}",
            worst.0, worst.1
        )));
    }
    Ok(ranks)
}

fn sorted_breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

// Gamma(a, 1) quantile at level p, given (ln p, ln(1-p)); returns ln x.
fn gamma_quantile_ln(a: f64, ln_p: f64, ln_q: f64) -> Result<f64> {
    let lo = log_floor(a);
    let hi = (a + 60.0 * a.sqrt() + 1_000.0).ln();
    let opts = RootOptions {
        x_tol: 1e-15,
        ..Default::default()
    };
    let g = |z: f64| {
        let t = ln_gamma_inc_tails_ln(a, z);
        if ln_p <= ln_q {
            t.lower - ln_p
        } else {
            ln_q - t.upper
        }
    };
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    find_root(g, lo, hi, &opts)
}

/// Means and standard deviations of every rank of a Dirichlet draw.
///
/// Uses `X = G / S` with `G` iid `Gamma(α)` and `S = ΣG` independent of
/// `X`, so `E[X_(r)^k] = E[G_(r)^k] Γ(nα) / Γ(nα + k)`; the Gamma order
/// statistics are independent and their moments are integrated directly.
pub fn order_statistic_moments(spec: &DirichletSpec) -> Result<OrderStatSummary> {
    let n = spec.n().get();
    let a = spec.alpha().get();
    let total = n as f64 * a;
    let ln_gamma_a = ln_gamma(a);

    let mut pts = Vec::new();
    for &u in &BREAK_LEVELS {
        pts.push(gamma_quantile_ln(a, u.ln(), (-u).ln_1p())?);
    }
    for &u in BREAK_LEVELS.iter().chain(&[1e-20, 1e-30]) {
        pts.push(gamma_quantile_ln(a, (-u).ln_1p(), u.ln())?);
    }
    let ln_median = pts[BREAK_LEVELS.len() - 1];
    // The split point stays representable however small α is.
    let ln_split = ln_median.max(0.0);
    let ln_top = pts.iter().cloned().fold(ln_split, f64::max);

    // Lower half in t = g^p, p = min(α, 1).
    let p = a.min(1.0);
    let mut t_breaks = vec![0.0, (p * ln_split).exp()];
    t_breaks.extend(pts.iter().filter(|&&z| z < ln_split).map(|&z| (p * z).exp()));
    let t_breaks = sorted_breaks(t_breaks);
    let lower_map = |t: f64| {
        let ln_g = t.ln() / p;
        let g = ln_g.exp();
        Node {
            x: g,
            ln_fj: (a - p) * ln_g - g - ln_gamma_a - p.ln(),
            tails: ln_gamma_inc_tails_ln(a, ln_g),
        }
    };

    // Upper half in plain g, truncated at the 1 - 1e-30 quantile.
    let mut upper_breaks = vec![ln_split.exp(), ln_top.exp()];
    upper_breaks.extend(pts.iter().filter(|&&z| z > ln_split).map(|&z| z.exp()));
    let upper_breaks = sorted_breaks(upper_breaks);
    let upper_map = |g: f64| Node {
        x: g,
        ln_fj: (a - 1.0) * g.ln() - g - ln_gamma_a,
        tails: ln_gamma_inc_tails(a, g),
    };

    let ranks = rank_moments(
        n,
        (&t_breaks, lower_map),
        (&upper_breaks, upper_map),
        (1.0 / total, 1.0 / (total * (total + 1.0))),
    )?;
    Ok(OrderStatSummary {
        spec: *spec,
        ci_level: None,
        ranks,
    })
}

/// Rank moments of `n` *independent* `Beta(α, (n-1)α)` shares.
///
/// This is the order-statistic density of [`DirichletSpec::order_statistic_pdf`]
/// integrated directly. It ignores the sum-to-one coupling between shares,
/// so it only approximates [`order_statistic_moments`]; rank sums are still 1.
pub fn independent_beta_moments(spec: &DirichletSpec) -> Result<OrderStatSummary> {
    let n = spec.n().get();
    let (a, b) = spec.marginal_params();

    let mut pts = Vec::new();
    for &u in &BREAK_LEVELS {
        pts.push(beta_quantile_ln(a, b, u.ln(), (-u).ln_1p())?);
        if u < 0.5 {
            pts.push(beta_quantile_ln(a, b, (-u).ln_1p(), u.ln())?);
        }
    }
    let half = -std::f64::consts::LN_2;

    // Lower half [0, 1/2] in t = x^p, p = min(α, 1).
    let p = a.min(1.0);
    let mut t_breaks = vec![0.0, (p * half).exp()];
    t_breaks.extend(pts.iter().filter(|&&(ln_x, _)| ln_x < half).map(|&(ln_x, _)| (p * ln_x).exp()));
    let t_breaks = sorted_breaks(t_breaks);
    let lower_map = |t: f64| {
        let ln_x = t.ln() / p;
        let ln_y = ln_1m_exp(ln_x.min(0.0));
        Node {
            x: point_from_logs(ln_x, ln_y),
            ln_fj: (a - p) * ln_x + (b - 1.0) * ln_y - spec.ln_beta - p.ln(),
            tails: ln_beta_inc_tails(a, b, ln_x, ln_y),
        }
    };

    // Upper half [1/2, 1] in s = (1-x)^q, q = min((n-1)α, 1).
    let q = b.min(1.0);
    let mut s_breaks = vec![0.0, (q * half).exp()];
    s_breaks.extend(pts.iter().filter(|&&(_, ln_y)| ln_y < half).map(|&(_, ln_y)| (q * ln_y).exp()));
    let s_breaks = sorted_breaks(s_breaks);
    let upper_map = |s: f64| {
        let ln_y = s.ln() / q;
        let ln_x = ln_1m_exp(ln_y.min(0.0));
        Node {
            x: point_from_logs(ln_x, ln_y),
            ln_fj: (a - 1.0) * ln_x + (b - q) * ln_y - spec.ln_beta - q.ln(),
            tails: ln_beta_inc_tails(a, b, ln_x, ln_y),
        }
    };

    let ranks = rank_moments(n, (&t_breaks, lower_map), (&s_breaks, upper_map), (1.0, 1.0))?;
    Ok(OrderStatSummary {
        spec: *spec,
        ci_level: None,
        ranks,
    })
}

/// Moments plus central `level` intervals for every rank.
pub fn order_statistic_summary(spec: &DirichletSpec, level: f64) -> Result<OrderStatSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let mut summary = order_statistic_moments(spec)?;
    let lo_q = 0.5 * (1.0 - level);
    let hi_q = 0.5 * (1.0 + level);
    for row in &mut summary.ranks {
        let order = rank_to_order(spec.n(), row.rank);
        row.ci = Some((
            spec.order_statistic_quantile(order, lo_q)?,
            spec.order_statistic_quantile(order, hi_q)?,
        ));
    }
    summary.ci_level = Some(level);
    Ok(summary)
}

/// Default confidence level for rank intervals.
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

/// Rank table predicted from inventory size alone.
pub fn reconstruct_from_inventory(
    n: InventorySize,
    law: &AlphaScalingLaw,
    level: f64,
) -> Result<OrderStatSummary> {
    let alpha = predict_alpha(n, law)?;
    order_statistic_summary(&DirichletSpec::new(n, alpha), level)
}
