//! Cross-language statistics: the log-log regression of α on inventory
//! size, Pearson correlation tests, and the per-language entropy report.

use nalgebra::{DMatrix, DVector};

use crate::dirichlet::{solve_alpha, AlphaScalingLaw, InventorySize};
use crate::entropy::{cwj_entropy, plugin_entropy, relative_entropy_value, CountVector};
use crate::error::{Error, Result};
use crate::maxent::MaxEntSolution;
use crate::special::student_t_two_sided;

/// One estimated coefficient of a linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<Coefficient>,
    pub n_points: usize,
    pub df: usize,
    pub residual_sd: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

fn t_and_p(estimate: f64, se: f64, df: usize) -> (f64, f64) {
    if se == 0.0 {
        let t = if estimate == 0.0 { 0.0 } else { estimate.signum() * f64::INFINITY };
        let p = if estimate == 0.0 { 1.0 } else { 0.0 };
        return (t, p);
    }
    let t = estimate / se;
    (t, student_t_two_sided(t, df as f64))
}

/// OLS of `y` on the columns of `x` (which should include an intercept).
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if names.len() != p || y.len() != n {
        return Err(Error::domain("design, response and names disagree in size"));
    }
    if n <= p {
        return Err(Error::domain(format!("{n} points cannot fit {p} coefficients with error estimates")));
    }
    let xtx = x.transpose() * x;
    let chol = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("design matrix is singular (degenerate predictor variance)"))?;
    let beta = chol.solve(&(x.transpose() * y));
    let inv = chol.inverse();
    // Reject numerically singular designs that Cholesky let through.
    let cond = (0..p).map(|i| xtx[(i, i)] * inv[(i, i)]).fold(0.0, f64::max);
    if !(cond.is_finite() && cond < 1e14) {
        return Err(Error::domain("design matrix is singular (degenerate predictor variance)"));
    }
    let fitted = x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let df = n - p;
    let sigma2 = rss / df as f64;
    let y_mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let coefficients = (0..p)
        .map(|j| {
            let se = (sigma2 * inv[(j, j)]).max(0.0).sqrt();
            let (t, pv) = t_and_p(beta[j], se, df);
            Coefficient {
                name: names[j].clone(),
                estimate: beta[j],
                se,
                t,
                p: pv,
            }
        })
        .collect();
    Ok(OlsFit {
        coefficients,
        n_points: n,
        df,
        residual_sd: sigma2.sqrt(),
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        residuals,
    })
}

/// `ln α̂ = intercept + slope · ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub t_slope: f64,
    pub p_slope: f64,
    pub n_points: usize,
    pub residual_sd: f64,
    pub r_squared: f64,
}

impl RegressionFit {
    /// `α = e^intercept · n^slope`; the coefficient's standard error is the
    /// delta-method `e^intercept · se_intercept`.
    pub fn scaling_law(&self) -> Result<AlphaScalingLaw> {
        let mut law = AlphaScalingLaw::new(self.intercept.exp(), self.slope)?;
        law.se_a = Some(law.coeff_a * self.se_intercept);
        law.se_b = Some(self.se_slope);
        Ok(law)
    }
}

fn log_point(n: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(n > 0.0 && alpha > 0.0 && n.is_finite() && alpha.is_finite()) {
        return Err(Error::domain(format!(
            "log-log regression needs positive finite (n, alpha), got ({n}, {alpha})"
        )));
    }
    Ok((n.ln(), alpha.ln()))
}

/// OLS of `ln α̂` on `ln n`.
pub fn loglog_regression(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!("regression needs at least 3 points, got {}", points.len())));
    }
    let logs = points
        .iter()
        .map(|&(n, a)| log_point(n, a))
        .collect::<Result<Vec<_>>>()?;
    let x = DMatrix::from_fn(logs.len(), 2, |i, j| if j == 0 { 1.0 } else { logs[i].0 });
    let y = DVector::from_iterator(logs.len(), logs.iter().map(|l| l.1));
    let fit = ols(&x, &y, &["intercept".into(), "ln_n".into()])?;
    let (b0, b1) = (&fit.coefficients[0], &fit.coefficients[1]);
    Ok(RegressionFit {
        slope: b1.estimate,
        intercept: b0.estimate,
        se_slope: b1.se,
        se_intercept: b0.se,
        t_slope: b1.t,
        p_slope: b1.p,
        n_points: fit.n_points,
        residual_sd: fit.residual_sd,
        r_squared: fit.r_squared,
    })
}

/// Log-log regression with a categorical covariate and its interaction with
/// `ln n`, dummy-coded against the first group in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedFit {
    pub groups: Vec<String>,
    pub fit: OlsFit,
}

pub fn grouped_loglog_regression(points: &[(f64, f64, String)]) -> Result<GroupedFit> {
    let mut groups: Vec<String> = points.iter().map(|p| p.2.clone()).collect();
    groups.sort();
    groups.dedup();
    let logs = points
        .iter()
        .map(|(n, a, _)| log_point(*n, *a))
        .collect::<Result<Vec<_>>>()?;
    let mut names = vec!["intercept".to_string(), "ln_n".to_string()];
    for g in &groups[1..] {
        names.push(format!("group[{g}]"));
        names.push(format!("group[{g}]:ln_n"));
    }
    let p = names.len();
    let x = DMatrix::from_fn(points.len(), p, |i, j| match j {
        0 => 1.0,
        1 => logs[i].0,
        _ => {
            let g = &groups[1 + (j - 2) / 2];
            let on = if &points[i].2 == g { 1.0 } else { 0.0 };
            if (j - 2) % 2 == 0 {
                on
            } else {
                on * logs[i].0
            }
        }
    });
    let y = DVector::from_iterator(points.len(), logs.iter().map(|l| l.1));
    Ok(GroupedFit {
        groups,
        fit: ols(&x, &y, &names)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub t: f64,
    pub df: usize,
    /// Two-sided.
    pub p: f64,
}

/// Pearson correlation with its t-test on `len - 2` degrees of freedom.
pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::domain(format!("correlation needs at least 3 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("correlation inputs must be finite"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::domain("correlation undefined for a constant variable"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(correlation_from_r(r, n - 2))
}

/// t statistic and two-sided p-value for a correlation `r` on `df` degrees
/// of freedom.
pub fn correlation_from_r(r: f64, df: usize) -> CorrelationResult {
    let denom = 1.0 - r * r;
    let t = if denom <= 0.0 {
        r.signum() * f64::INFINITY
    } else {
        r * (df as f64 / denom).sqrt()
    };
    let p = if t.is_infinite() { 0.0 } else { student_t_two_sided(t, df as f64) };
    CorrelationResult { r, t, df, p }
}

/// One language's observed counts and, optionally, its declared inventory
/// size (default: the observed support).
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageInput {
    pub name: String,
    pub counts: CountVector,
    pub n: Option<InventorySize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageRow {
    pub name: String,
    pub n: usize,
    pub h_plugin: f64,
    pub h_cwj: f64,
    /// `None` when the CWJ entropy is not below `ln n`.
    pub alpha_hat: Option<f64>,
    pub h_max: f64,
    /// CWJ entropy over `ln n`, clamped into `(0, 1]`.
    pub relative_entropy: f64,
    pub clamped: bool,
    pub guessed_entropy: Option<f64>,
    pub guessed_relative_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensationReport {
    pub rows: Vec<LanguageRow>,
    /// Log-log regression over rows with an `alpha_hat`, when at least
    /// three such rows span more than one inventory size.
    pub regression: Option<RegressionFit>,
}

impl CompensationReport {
    pub fn from_rows(rows: Vec<LanguageRow>) -> Self {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.alpha_hat.map(|a| (r.n as f64, a)))
            .collect();
        let regression = loglog_regression(&points).ok();
        Self { rows, regression }
    }
}

pub fn compensation_row(input: &LanguageInput, guessed: Option<&MaxEntSolution>) -> Result<LanguageRow> {
    let support = input.counts.observed_support();
    let n = match input.n {
        Some(n) if n.get() < support => {
            return Err(Error::domain(format!(
                "{}: declared inventory {} is smaller than the {support} observed phonemes",
                input.name, n
            )))
        }
        Some(n) => n,
        None => InventorySize::new(support)?,
    };
    let h_plugin = plugin_entropy(&input.counts).value;
    let h_cwj = cwj_entropy(&input.counts).value;
    let alpha_hat = match solve_alpha(h_cwj, n) {
        Ok(a) => Some(a.get()),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let rel = relative_entropy_value(h_cwj, n);
    let guessed_entropy = guessed.map(|s| s.entropy);
    Ok(LanguageRow {
        name: input.name.clone(),
        n: n.get(),
        h_plugin,
        h_cwj,
        alpha_hat,
        h_max: n.max_entropy(),
        relative_entropy: rel.value,
        clamped: rel.clamped,
        guessed_entropy,
        guessed_relative_entropy: guessed_entropy.map(|h| relative_entropy_value(h, n).value),
    })
}

/// Per-language entropies, fitted concentrations and the α(n) regression.
/// `guessed` is either empty or holds one optional solution per language.
pub fn compensation_report(
    inputs: &[LanguageInput],
    guessed: &[Option<MaxEntSolution>],
) -> Result<CompensationReport> {
    if !guessed.is_empty() && guessed.len() != inputs.len() {
        return Err(Error::domain(format!(
            "{} maxent solutions for {} languages",
            guessed.len(),
            inputs.len()
        )));
    }
    let rows = inputs
        .iter()
        .enumerate()
        .map(|(i, input)| compensation_row(input, guessed.get(i).and_then(|g| g.as_ref())))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompensationReport::from_rows(rows))
}
