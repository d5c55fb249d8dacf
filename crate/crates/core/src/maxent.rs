//! Maximum-entropy distributions under linear feature constraints.
//!
//! Maximizing `H(p)` subject to `Σ_i p_i f_k(i) = c_k` gives the Gibbs form
//! `ln p_i = λ0 + Σ_k λ_k f_k(i)`. The multipliers minimize the convex dual
//! `D(λ) = ln Σ_i exp(Σ_k λ_k f_k(i)) - λ·c`, whose gradient is `E_λ[f] - c`
//! and whose Hessian is the feature covariance under `p_λ`. At the optimum
//! `H = D(λ*)` and `λ0 = -ln Z(λ*)`.
//!
//! [`solve`] first checks feasibility (targets inside the feature hull, and
//! strictly inside so that all probabilities can be positive), then runs a
//! damped Newton iteration on the dual restricted to the span of the
//! centered feature columns. Starting from `λ = 0`, the iterates stay in
//! that span, so rank-deficient features yield the minimum-norm multipliers.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Support labels, an `m × K` feature matrix (row-major) and `K` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntProblem {
    support: Vec<String>,
    features: Vec<f64>,
    k: usize,
    targets: Vec<f64>,
}

impl MaxEntProblem {
    pub fn new(support: Vec<String>, features: Vec<f64>, k: usize, targets: Vec<f64>) -> Result<Self> {
        let m = support.len();
        if m < 2 {
            return Err(Error::domain(format!("maxent support needs at least 2 points, got {m}")));
        }
        if features.len() != m * k {
            return Err(Error::domain(format!(
                "feature matrix has {} entries, expected {m} × {k}",
                features.len()
            )));
        }
        if targets.len() != k {
            return Err(Error::domain(format!("{} targets for {k} features", targets.len())));
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::domain("features and targets must be finite"));
        }
        Ok(Self {
            support,
            features,
            k,
            targets,
        })
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.k
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.k..(i + 1) * self.k]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Required `max_k |E[f_k] - c_k|`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntSolution {
    pub support: Vec<String>,
    /// `-ln Z`.
    pub lambda0: f64,
    pub lambdas: Vec<f64>,
    pub probs: Vec<f64>,
    /// `E[f_k] - c_k`.
    pub residuals: Vec<f64>,
    pub entropy: f64,
    /// `D(λ*)`.
    pub dual_value: f64,
    pub iterations: usize,
    /// Rank of the centered feature matrix.
    pub rank: usize,
    pub warnings: Vec<String>,
}

/// A Gibbs distribution and its log normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gibbs {
    pub probs: Vec<f64>,
    pub ln_probs: Vec<f64>,
    /// `-ln Σ_i exp(λ·f_i)`.
    pub lambda0: f64,
}

/// `p_i ∝ exp(λ·f_i)` for a row-major `m × K` matrix (`K = lambdas.len()`),
/// with max-subtraction. Probabilities that would underflow are floored at
/// the smallest positive double; `ln_probs` stays exact.
pub fn guessed_distribution(lambdas: &[f64], features: &[f64], m: usize) -> Gibbs {
    let k = lambdas.len();
    assert_eq!(features.len(), m * k, "feature matrix must be m × K");
    let scores: Vec<f64> = (0..m)
        .map(|i| dot(lambdas, &features[i * k..(i + 1) * k]))
        .collect();
    gibbs_from_scores(&scores)
}

fn gibbs_from_scores(scores: &[f64]) -> Gibbs {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let ln_z = max + sum.ln();
    let ln_probs: Vec<f64> = scores.iter().map(|s| s - ln_z).collect();
    let probs = ln_probs
        .iter()
        .map(|l| l.exp().max(f64::MIN_POSITIVE))
        .collect();
    Gibbs {
        probs,
        ln_probs,
        lambda0: -ln_z,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scores(problem: &MaxEntProblem, lambdas: &[f64]) -> Vec<f64> {
    (0..problem.len()).map(|i| dot(lambdas, problem.row(i))).collect()
}

/// `D(λ) = ln Σ exp(λ·f_i) - λ·c`.
pub fn dual_value(problem: &MaxEntProblem, lambdas: &[f64]) -> f64 {
    let g = gibbs_from_scores(&scores(problem, lambdas));
    -g.lambda0 - dot(lambdas, problem.targets())
}

/// `∇D(λ) = E_λ[f] - c`.
pub fn dual_gradient(problem: &MaxEntProblem, lambdas: &[f64]) -> Vec<f64> {
    let g = gibbs_from_scores(&scores(problem, lambdas));
    expectation_residuals(problem, &g.probs)
}

fn expectation_residuals(problem: &MaxEntProblem, probs: &[f64]) -> Vec<f64> {
    (0..problem.num_features())
        .map(|k| {
            let e: f64 = probs
                .iter()
                .enumerate()
                .map(|(i, p)| p * problem.row(i)[k])
                .sum();
            e - problem.targets()[k]
        })
        .collect()
}

/// Shannon entropy (nats) of the solution's distribution.
pub fn solution_entropy(solution: &MaxEntSolution) -> f64 {
    shannon(&solution.probs)
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

// Centered feature geometry: uniform-weight mean, an orthonormal basis of
// the column span of the centered matrix, and the complementary null space.
struct Geometry {
    mean: Vec<f64>,
    basis: DMatrix<f64>,
    null: DMatrix<f64>,
    // Centered features in basis coordinates, m × r.
    reduced: DMatrix<f64>,
    // Centered targets in basis coordinates.
    reduced_targets: DVector<f64>,
}

// Singular values of the centered matrix at or below this multiple of
// `sqrt(m) · max|f|` mark null directions.
const RANK_RTOL: f64 = 1e-10;

fn geometry(problem: &MaxEntProblem) -> Geometry {
    let m = problem.len();
    let k = problem.num_features();
    let mut mean = vec![0.0; k];
    for i in 0..m {
        for (acc, v) in mean.iter_mut().zip(problem.row(i)) {
            *acc += v / m as f64;
        }
    }
    let centered = DMatrix::from_fn(m, k, |i, j| problem.row(i)[j] - mean[j]);
    if k == 0 {
        return Geometry {
            mean,
            basis: DMatrix::zeros(0, 0),
            null: DMatrix::zeros(0, 0),
            reduced: DMatrix::zeros(m, 0),
            reduced_targets: DVector::zeros(0),
        };
    }
    // Zero rows pad the matrix to at least k rows so V is square.
    let padded = DMatrix::from_fn(m.max(k), k, |i, j| if i < m { centered[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let scale = (0..m)
        .flat_map(|i| problem.row(i).iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let thresh = RANK_RTOL * (m as f64).sqrt() * scale;
    let keep: Vec<usize> = order.iter().copied().filter(|&j| sigma[j] > thresh).collect();
    let drop: Vec<usize> = order.iter().copied().filter(|&j| sigma[j] <= thresh).collect();
    let pick = |rows: &[usize]| {
        let mut b = DMatrix::from_fn(k, rows.len(), |i, c| v_t[(rows[c], i)]);
        // Fix each vector's sign so results do not depend on the decomposition.
        for mut col in b.column_iter_mut() {
            let lead = col.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        b
    };
    let basis = pick(&keep);
    let null = pick(&drop);
    let reduced = &centered * &basis;
    let shifted = DVector::from_iterator(k, (0..k).map(|j| problem.targets()[j] - mean[j]));
    let reduced_targets = basis.transpose() * shifted;
    Geometry {
        mean,
        basis,
        null,
        reduced,
        reduced_targets,
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

// Slack below which an LP quantity counts as zero.
const LP_TOL: f64 = 1e-9;

/// Check that the targets can be met by a strictly positive distribution.
///
/// Errors with [`Error::Infeasible`] naming either the per-feature range
/// violations, a separating direction `v` with `v·f_i < v·c` for every
/// support point, or the fact that the targets sit on the hull boundary.
pub fn check_feasibility(problem: &MaxEntProblem, tolerance: f64) -> Result<()> {
    let geo = geometry(problem);
    feasibility(problem, &geo, tolerance)
}

fn feasibility(problem: &MaxEntProblem, geo: &Geometry, tolerance: f64) -> Result<()> {
    let m = problem.len();
    let k = problem.num_features();
    let mut violations = Vec::new();
    for j in 0..k {
        let col = (0..m).map(|i| problem.row(i)[j]);
        let lo = col.clone().fold(f64::INFINITY, f64::min);
        let hi = col.fold(f64::NEG_INFINITY, f64::max);
        let c = problem.targets()[j];
        if c < lo - tolerance {
            violations.push(format!("feature {j}: target {c} is {} below the minimum {lo}", lo - c));
        } else if c > hi + tolerance {
            violations.push(format!("feature {j}: target {c} is {} above the maximum {hi}", c - hi));
        }
    }
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations.join("; ")));
    }

    // Directions in which every support point has the same value.
    for col in geo.null.column_iter() {
        let v: Vec<f64> = col.iter().copied().collect();
        let level = dot(&v, &geo.mean);
        let gap = dot(&v, problem.targets()) - level;
        if gap.abs() > tolerance {
            return Err(Error::Infeasible(format!(
                "targets leave the affine hull of the features: direction {} has slack {gap:.6e}",
                fmt_vec(&v)
            )));
        }
    }

    let r = geo.basis.ncols();
    if r == 0 {
        return Ok(());
    }
    // Largest ε with p_i ≥ ε for all i, Σp = 1, Σ p_i z_i = d.
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let eps = lp.add_var(1.0, (0.0, 1.0));
    let p: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for &pi in &p {
        lp.add_constraint([(pi, 1.0), (eps, -1.0)], ComparisonOp::Ge, 0.0);
    }
    let ones: Vec<_> = p.iter().map(|&pi| (pi, 1.0)).collect();
    lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    for j in 0..r {
        let row: Vec<_> = p.iter().enumerate().map(|(i, &pi)| (pi, geo.reduced[(i, j)])).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, geo.reduced_targets[j]);
    }
    match lp.solve() {
        Ok(sol) => {
            if sol.objective() <= LP_TOL / m as f64 {
                return Err(Error::Infeasible(format!(
                    "targets lie on the boundary of the feature hull (largest attainable minimum probability {:.3e}); the maximum-entropy distribution would need zero probabilities",
                    sol.objective()
                )));
            }
            Ok(())
        }
        Err(minilp::Error::Infeasible) => Err(separating_direction(geo, m)),
        Err(e) => Err(Error::Numerical(format!("feasibility LP failed: {e}"))),
    }
}

// max v·d - t subject to v·z_i ≤ t and |v_j| ≤ 1. The optimum equals the
// L1 distance from the targets to the hull.
fn separating_direction(geo: &Geometry, m: usize) -> Error {
    let r = geo.basis.ncols();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let v: Vec<_> = (0..r)
        .map(|j| lp.add_var(geo.reduced_targets[j], (-1.0, 1.0)))
        .collect();
    let t = lp.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..m {
        let mut row: Vec<_> = v.iter().enumerate().map(|(j, &vj)| (vj, geo.reduced[(i, j)])).collect();
        row.push((t, -1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, 0.0);
    }
    match lp.solve() {
        Ok(sol) => {
            let red = DVector::from_iterator(r, v.iter().map(|&vj| *sol.var_value(vj)));
            let dir = &geo.basis * red;
            Error::Infeasible(format!(
                "targets lie outside the feature hull: direction {} separates them with margin {:.6e}",
                fmt_vec(dir.as_slice()),
                sol.objective()
            ))
        }
        Err(e) => Error::Infeasible(format!("targets lie outside the feature hull ({e})")),
    }
}

/// Solve for the maximum-entropy distribution.
pub fn solve(problem: &MaxEntProblem, opts: &SolveOptions) -> Result<MaxEntSolution> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let k = problem.num_features();
    let geo = geometry(problem);
    feasibility(problem, &geo, opts.tolerance)?;
    let r = geo.basis.ncols();
    let mut warnings = Vec::new();
    if r < k {
        warnings.push(format!(
            "feature matrix is rank-deficient (rank {r} of {k}); multipliers are the minimum-norm solution"
        ));
    }

    let z = &geo.reduced;
    let d = &geo.reduced_targets;
    let m = problem.len();
    let mut mu = DVector::<f64>::zeros(r);
    let reduced_scores = |mu: &DVector<f64>| -> Vec<f64> { (z * mu).iter().copied().collect() };
    let dual = |mu: &DVector<f64>| -> f64 {
        let g = gibbs_from_scores(&reduced_scores(mu));
        -g.lambda0 - mu.dot(d)
    };

    let mut iterations = 0;
    loop {
        let lambdas = &geo.basis * &mu;
        let gibbs = gibbs_from_scores(&scores(problem, lambdas.as_slice()));
        let residuals = expectation_residuals(problem, &gibbs.probs);
        let worst = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if worst <= opts.tolerance {
            let entropy = -gibbs
                .probs
                .iter()
                .zip(&gibbs.ln_probs)
                .map(|(p, l)| p * l)
                .sum::<f64>();
            let lambdas: Vec<f64> = lambdas.iter().copied().collect();
            let dual_value = -gibbs.lambda0 - dot(&lambdas, problem.targets());
            return Ok(MaxEntSolution {
                support: problem.support().to_vec(),
                lambda0: gibbs.lambda0,
                lambdas,
                probs: gibbs.probs,
                residuals,
                entropy,
                dual_value,
                iterations,
                rank: r,
                warnings,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Numerical(format!(
                "maxent solver stopped after {iterations} iterations with residual {worst:.3e}"
            )));
        }
        iterations += 1;

        // Reduced gradient and Hessian at μ.
        let p = &gibbs.probs;
        let mut mean = DVector::<f64>::zeros(r);
        for i in 0..m {
            mean += z.row(i).transpose() * p[i];
        }
        let grad = &mean - d;
        let mut hess = DMatrix::<f64>::zeros(r, r);
        for i in 0..m {
            let dev = z.row(i).transpose() - &mean;
            hess += &dev * dev.transpose() * p[i];
        }
        let step = newton_direction(hess, &grad);
        let slope = grad.dot(&step);
        let d0 = dual(&mu);
        // Below this predicted decrease D is compared at rounding level, so
        // steps are judged by the gradient norm instead.
        let noisy = -slope < 1e-12 * (1.0 + d0.abs());
        let grad_norm = |mu: &DVector<f64>| -> f64 {
            let g = gibbs_from_scores(&reduced_scores(mu));
            let mut mean = DVector::<f64>::zeros(r);
            for i in 0..m {
                mean += z.row(i).transpose() * g.probs[i];
            }
            (mean - d).norm()
        };
        let g0 = grad.norm();
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-14 {
            let trial = &mu + &step * t;
            let ok = if noisy {
                grad_norm(&trial) < g0
            } else {
                dual(&trial) <= d0 + 1e-4 * t * slope
            };
            if ok {
                mu = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::Numerical(format!(
                "maxent line search stalled at residual {worst:.3e}"
            )));
        }
    }
}

// Newton direction -H⁻¹g; a ridge is added when the Hessian is numerically
// singular, and steepest descent is the last resort.
fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let r = grad.len();
    let scale = hess.diagonal().iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..20 {
        let h = &hess + DMatrix::<f64>::identity(r, r) * ridge;
        if let Some(ch) = h.cholesky() {
            let step = -ch.solve(grad);
            if step.iter().all(|v| v.is_finite()) && grad.dot(&step) < 0.0 {
                return step;
            }
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 100.0 };
    }
    -grad / scale
}
