mod common;

use phonodist::dirichlet::*;
use phonodist::special::{beta_inc, digamma, ln_beta, ln_gamma, student_t_two_sided};
use rand_distr::{Beta, Distribution};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn spec(n: usize, a: f64) -> DirichletSpec {
    DirichletSpec::from_raw(n, a).unwrap()
}

#[test]
fn digamma_matches_shifted_series() {
    for &x in &[1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 55.5, 1e3, 1e6] {
        let want = common::digamma_series(x);
        let got = digamma(x).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "x={x}: {got} vs {want}");
    }
    let euler = 0.577_215_664_901_532_9;
    assert!((digamma(1.0).unwrap() + euler).abs() < 1e-14);
}

#[test]
fn special_functions_agree_with_statrs() {
    for &x in &[0.01, 0.3, 1.0, 2.5, 17.0, 171.5, 1e4] {
        let want = statrs::function::gamma::ln_gamma(x);
        assert!((ln_gamma(x) - want).abs() <= 1e-12 * want.abs().max(1.0), "ln_gamma({x})");
    }
    for &(a, b) in &[(0.5, 0.5), (2.0, 3.0), (0.05, 9.95), (30.0, 1.5)] {
        let want = statrs::function::beta::ln_beta(a, b);
        assert!((ln_beta(a, b) - want).abs() <= 1e-12 * want.abs().max(1.0));
        for &x in &[0.001, 0.1, 0.5, 0.9, 0.999] {
            let want = statrs::function::beta::beta_reg(a, b, x);
            let got = beta_inc(a, b, x).unwrap();
            assert!((got - want).abs() < 1e-12, "I_{x}({a},{b}): {got} vs {want}");
        }
    }
    for &df in &[1.0, 5.0, 51.0, 300.0] {
        let t_dist = StudentsT::new(0.0, 1.0, df).unwrap();
        for &t in &[0.1, 1.0, 2.77, 6.0] {
            let want = 2.0 * (1.0 - t_dist.cdf(t));
            let got = student_t_two_sided(t, df);
            assert!((got - want).abs() < 1e-10, "df={df} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn uniform_dirichlet_matches_harmonic_closed_form() {
    for n in 2..=60 {
        let m = order_statistic_moments(&spec(n, 1.0)).unwrap();
        for r in 1..=n {
            let want = common::whitworth_mean(n, r);
            assert!((m.ranks[r - 1].mean - want).abs() < 1e-6, "n={n} r={r}");
        }
    }
}

#[test]
fn rank_one_second_moment_matches_closed_form() {
    // E[X_(max)^2] for the uniform simplex: (2 / (n(n+1))) Σ_{i≤j} 1/(i j).
    for n in [3usize, 7, 20] {
        let mut s = 0.0;
        for i in 1..=n {
            for j in i..=n {
                s += 1.0 / (i * j) as f64;
            }
        }
        let want_m2 = 2.0 * s / (n * (n + 1)) as f64;
        let m = order_statistic_moments(&spec(n, 1.0)).unwrap();
        let r = m.ranks[0];
        let got_m2 = r.sd * r.sd + r.mean * r.mean;
        assert!((got_m2 - want_m2).abs() < 1e-9, "n={n}: {got_m2} vs {want_m2}");
    }
}

#[test]
fn moments_match_dirichlet_monte_carlo() {
    let mut rng = common::rng(11);
    for &(n, a) in &[(8usize, 0.3), (15, 2.0)] {
        let reps = 40_000;
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..reps {
            let mut x = common::dirichlet(&mut rng, n, a);
            x.sort_by(|p, q| q.total_cmp(p));
            for (i, v) in x.iter().enumerate() {
                sum[i] += v;
                sq[i] += v * v;
            }
        }
        let m = order_statistic_moments(&spec(n, a)).unwrap();
        for i in 0..n {
            let mean = sum[i] / reps as f64;
            let sd = (sq[i] / reps as f64 - mean * mean).sqrt();
            let se = sd / (reps as f64).sqrt();
            assert!((m.ranks[i].mean - mean).abs() < 5.0 * se, "n={n} a={a} rank {}", i + 1);
            assert!((m.ranks[i].sd - sd).abs() < 0.03 * sd, "sd n={n} a={a} rank {}", i + 1);
        }
    }
}

#[test]
fn marginal_cdf_matches_statrs_beta() {
    use statrs::distribution::Beta as SBeta;
    for &(n, a) in &[(5usize, 0.5), (11, 2.0), (60, 0.05), (200, 1.3)] {
        let s = spec(n, a);
        let (pa, pb) = s.marginal_params();
        let oracle = SBeta::new(pa, pb).unwrap();
        for k in 1..50 {
            let x = (k as f64 / 50.0).powi(3);
            let want = oracle.cdf(x);
            let got = s.marginal_cdf(x).unwrap();
            assert!((got - want).abs() < 1e-10, "n={n} a={a} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn marginal_cdf_is_integral_of_pdf() {
    // Substituting x = t^(1/s), s = min(a, 1), removes the x^(a-1) singularity.
    for &(n, a) in &[(5usize, 0.5), (11, 2.0), (40, 0.2)] {
        let s = spec(n, a);
        let (pa, _) = s.marginal_params();
        let pa = pa.min(1.0);
        let inv = 1.0 / pa;
        for &x in &[0.01f64, 0.05, 0.2, 0.5] {
            let upper = x.powf(pa);
            let integral = common::integrate(
                |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let xx = t.powf(inv);
                    s.marginal_pdf(xx).unwrap() * inv * t.powf(inv - 1.0)
                },
                0.0,
                upper,
                200,
            );
            let cdf = s.marginal_cdf(x).unwrap();
            assert!((integral - cdf).abs() < 1e-8, "n={n} a={a} x={x}: {integral} vs {cdf}");
        }
    }
}

#[test]
fn order_statistic_pdf_integrates_to_one() {
    for &(n, a) in &[(5usize, 1.0), (11, 2.0), (20, 0.5)] {
        let s = spec(n, a);
        let inv = 1.0 / a.min(1.0);
        for order in 1..=n {
            let integral = common::integrate(
                |t: f64| {
                    if t <= 0.0 || t >= 1.0 {
                        return 0.0;
                    }
                    let x = t.powf(inv);
                    s.order_statistic_pdf(order, x).unwrap() * inv * t.powf(inv - 1.0)
                },
                0.0,
                1.0,
                400,
            );
            assert!((integral - 1.0).abs() < 1e-8, "n={n} a={a} order={order}: {integral}");
        }
    }
}

#[test]
fn quantiles_match_independent_beta_monte_carlo() {
    // The bands treat the n shares as iid Beta(a, (n-1)a) marginals.
    let mut rng = common::rng(5);
    let s = spec(12, 0.8);
    let (pa, pb) = s.marginal_params();
    let beta = Beta::new(pa, pb).unwrap();
    let reps = 20_000;
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); 12];
    for _ in 0..reps {
        let mut x: Vec<f64> = (0..12).map(|_| beta.sample(&mut rng)).collect();
        x.sort_by(|a, b| a.total_cmp(b));
        for (j, v) in x.into_iter().enumerate() {
            draws[j].push(v);
        }
    }
    for (j, d) in draws.iter_mut().enumerate() {
        d.sort_by(|a, b| a.total_cmp(b));
        let order = j + 1;
        for &q in &[0.025, 0.5, 0.975] {
            let x = s.order_statistic_quantile(order, q).unwrap();
            let empirical = d.partition_point(|v| *v <= x) as f64 / reps as f64;
            let se = (q * (1.0 - q) / reps as f64).sqrt();
            assert!((empirical - q).abs() < 5.0 * se, "order {order} q={q}: {empirical}");
        }
    }
}

#[test]
fn scaling_law_endpoints() {
    let law = AlphaScalingLaw::default();
    let a160 = predict_alpha(InventorySize::new(160).unwrap(), &law).unwrap().get();
    let a11 = predict_alpha(InventorySize::new(11).unwrap(), &law).unwrap().get();
    assert!((a160 - 0.16).abs() < 0.005, "{a160}");
    assert!((a11 - 2.00).abs() < 0.02, "{a11}");
    let rel160 = DirichletSpec::from_raw(160, a160).unwrap().relative_expected_entropy();
    let rel11 = DirichletSpec::from_raw(11, a11).unwrap().relative_expected_entropy();
    assert!((rel160 - 0.71).abs() < 0.01, "{rel160}");
    assert!((rel11 - 0.91).abs() < 0.01, "{rel11}");
}

#[test]
fn reconstruct_compositions() {
    // a · 2^b = 1 forces alpha = 1 at n = 2.
    let law = AlphaScalingLaw::new(2f64.powf(0.95), -0.95).unwrap();
    let t = reconstruct_from_inventory(InventorySize::new(2).unwrap(), &law, 0.95).unwrap();
    assert!((t.ranks[0].mean - 0.75).abs() < 1e-9);
    assert!((t.ranks[1].mean - 0.25).abs() < 1e-9);

    let n11 = InventorySize::new(11).unwrap();
    let law = AlphaScalingLaw::default();
    let t = reconstruct_from_inventory(n11, &law, 0.95).unwrap();
    let direct = order_statistic_moments(&DirichletSpec::new(n11, predict_alpha(n11, &law).unwrap())).unwrap();
    assert_eq!(t.ranks[0].mean, direct.ranks[0].mean);

    let t = reconstruct_from_inventory(InventorySize::new(34).unwrap(), &law, 0.95).unwrap();
    assert!((t.means().iter().sum::<f64>() - 1.0).abs() < 1e-6);
}

#[test]
fn large_sparse_inventory_stays_finite() {
    let s = spec(200, 0.05);
    for k in 1..100 {
        let x = (k as f64 / 100.0).powi(4);
        assert!(s.marginal_pdf(x).unwrap().is_finite());
        for order in [1, 100, 200] {
            assert!(s.order_statistic_pdf(order, x).unwrap().is_finite());
        }
    }
    let m = order_statistic_summary(&s, 0.95).unwrap();
    assert!((m.means().iter().sum::<f64>() - 1.0).abs() < 1e-6);
    for r in &m.ranks {
        let (lo, hi) = r.ci.unwrap();
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
    }
}

#[test]
fn relative_entropy_examples() {
    use phonodist::entropy::relative_entropy_value;
    let n = |k| InventorySize::new(k).unwrap();
    assert_eq!(relative_entropy_value(2f64.ln(), n(2)).value, 1.0);
    assert!((relative_entropy_value(3.61, n(160)).value - 0.71).abs() < 0.005);
    assert!((relative_entropy_value(2.19, n(11)).value - 0.91).abs() < 0.005);
}
