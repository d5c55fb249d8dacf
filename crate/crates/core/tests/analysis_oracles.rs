mod common;

use phonodist::analysis::*;
use phonodist::dirichlet::{solve_alpha, InventorySize};
use phonodist::entropy::CountVector;
use phonodist::maxent::{solve, MaxEntProblem, SolveOptions};
use rand::prelude::*;
use rand_distr::{Distribution, Normal};

#[test]
fn noiseless_scaling_law_recovery() {
    let pts: Vec<(f64, f64)> = [11.0, 20.0, 34.0, 60.0, 100.0, 160.0]
        .iter()
        .map(|&n: &f64| (n, 19.47 * n.powf(-0.95)))
        .collect();
    let fit = loglog_regression(&pts).unwrap();
    assert!((fit.slope + 0.95).abs() < 1e-10);
    assert!((fit.intercept - 19.47f64.ln()).abs() < 1e-10);
    let law = fit.scaling_law().unwrap();
    assert!((law.coeff_a - 19.47).abs() < 1e-9);
    assert!(loglog_regression(&[(10.0, 1.0), (0.0, 1.0), (20.0, 2.0)]).is_err());
    assert!(loglog_regression(&[(10.0, 1.0), (10.0, 2.0), (10.0, 3.0)]).is_err());
}

#[test]
fn noisy_scaling_law_monte_carlo() {
    let mut rng = common::rng(21);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut covered = 0;
    let reps = 200;
    for _ in 0..reps {
        let pts: Vec<(f64, f64)> = (0..224)
            .map(|_| {
                let n = rng.random_range(10..170) as f64;
                (n, (19.47f64.ln() - 0.95 * n.ln() + noise.sample(&mut rng)).exp())
            })
            .collect();
        let fit = loglog_regression(&pts).unwrap();
        if (fit.slope + 0.95).abs() < 3.0 * fit.se_slope {
            covered += 1;
        }
        // Residuals are orthogonal to the predictor.
        let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let res: Vec<f64> = pts.iter().map(|p| p.1.ln() - fit.intercept - fit.slope * p.0.ln()).collect();
        let dot: f64 = x.iter().zip(&res).map(|(a, b)| a * b).sum();
        let sum: f64 = res.iter().sum();
        assert!(dot.abs() < 1e-10 * 224.0 && sum.abs() < 1e-10 * 224.0);
    }
    // 3 SE covers 99.7% of replicates in theory.
    assert!(covered as f64 / reps as f64 >= 0.98, "{covered}");
}

#[test]
fn pearson_published_value() {
    // The quoted r = .36 is rounded to two decimals; t(51) = 2.77 must come
    // from some r in [.355, .365], and p must follow from t.
    let lo = correlation_from_r(0.355, 51);
    let hi = correlation_from_r(0.365, 51);
    assert_eq!(lo.df, 51);
    assert!(lo.t < 2.77 && 2.77 < hi.t, "{} {}", lo.t, hi.t);
    let p = phonodist::special::student_t_two_sided(2.77, 51.0);
    assert!((p - 0.0078).abs() < 0.00005, "{p}");
    let c = correlation_from_r(0.36, 51);
    assert!((c.t - 2.7557).abs() < 1e-4);
}

#[test]
fn pearson_examples_and_symmetries() {
    let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    assert!((pearson_test(&x, &y).unwrap().r - 1.0).abs() < 1e-15);
    assert!(pearson_test(&x, &vec![1.0; 10]).is_err());

    let mut rng = common::rng(22);
    let a: Vec<f64> = (0..30).map(|_| rng.random()).collect();
    let b: Vec<f64> = a.iter().map(|v| v + rng.random::<f64>()).collect();
    let r = pearson_test(&a, &b).unwrap();
    assert!((pearson_test(&b, &a).unwrap().r - r.r).abs() < 1e-14);
    let a2: Vec<f64> = a.iter().map(|v| 3.0 * v - 7.0).collect();
    assert!((pearson_test(&a2, &b).unwrap().r - r.r).abs() < 1e-12);
}

#[test]
fn independent_pairs_give_uniform_p_values() {
    let mut rng = common::rng(23);
    let reps = 2000;
    let mut below = [0usize; 4];
    let cuts = [0.05, 0.25, 0.5, 0.75];
    let mut mean_abs_r = 0.0;
    for _ in 0..reps {
        let x: Vec<f64> = (0..40).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..40).map(|_| rng.random()).collect();
        let c = pearson_test(&x, &y).unwrap();
        mean_abs_r += c.r.abs() / reps as f64;
        for (b, cut) in below.iter_mut().zip(cuts) {
            if c.p < cut {
                *b += 1;
            }
        }
    }
    assert!(mean_abs_r < 0.2);
    for (b, cut) in below.iter().zip(cuts) {
        let f = *b as f64 / reps as f64;
        let se = (cut * (1.0 - cut) / reps as f64).sqrt();
        assert!((f - cut).abs() < 4.0 * se, "P(p < {cut}) = {f}");
    }
}

#[test]
fn grouped_regression_dummy_coding() {
    // Two families sharing a slope with different intercepts.
    let mut pts = Vec::new();
    for &n in &[10.0f64, 20.0, 40.0, 80.0] {
        pts.push((n, 2.0 * n.powf(-0.5), "a".to_string()));
        pts.push((n, 5.0 * n.powf(-0.5), "b".to_string()));
    }
    let g = grouped_loglog_regression(&pts).unwrap();
    let slope = g.fit.coefficients.iter().find(|c| c.name == "ln_n").unwrap();
    assert!((slope.estimate + 0.5).abs() < 1e-10);
    assert_eq!(g.groups, vec!["a".to_string(), "b".to_string()]);
}

#[test]
fn compensation_orders_concentrations() {
    let mut rng = common::rng(24);
    let p20 = common::dirichlet(&mut rng, 20, 1.0);
    let p60 = common::dirichlet(&mut rng, 60, 0.3);
    let lang = |name: &str, p: &[f64], rng: &mut StdRng| {
        let c = common::multinomial(rng, p, 100_000);
        let entries = c.iter().enumerate().filter(|(_, &v)| v > 0).map(|(i, &v)| (format!("p{i}"), v)).collect();
        LanguageInput {
            name: name.into(),
            counts: CountVector::new(entries).unwrap(),
            n: Some(InventorySize::new(p.len()).unwrap()),
        }
    };
    let inputs = vec![lang("small", &p20, &mut rng), lang("large", &p60, &mut rng)];
    let report = compensation_report(&inputs, &[]).unwrap();
    let (a20, a60) = (report.rows[0].alpha_hat.unwrap(), report.rows[1].alpha_hat.unwrap());
    assert!(a20 > a60, "{a20} vs {a60}");
    for row in &report.rows {
        assert_eq!(row.h_max, (row.n as f64).ln());
        assert!(row.relative_entropy > 0.0 && row.relative_entropy <= 1.0);
    }
}

#[test]
fn uniform_language_and_guessed_entropies() {
    let uniform = LanguageInput {
        name: "flat".into(),
        counts: CountVector::from_counts(&[1000; 8]).unwrap(),
        n: None,
    };
    let row = compensation_row(&uniform, None).unwrap();
    assert!((row.relative_entropy - 1.0).abs() < 1e-3);
    assert_eq!(row.alpha_hat.is_none(), row.h_cwj >= 8f64.ln());

    // Maxent with the observed expectations as targets guesses at least the observed entropy.
    let counts = [50u64, 30, 10, 6, 3, 1];
    let total: u64 = counts.iter().sum();
    let obs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let f: Vec<f64> = vec![0.1, 1.0, 0.3, 0.5, 0.9, 0.2, 1.4, 0.1, 2.0, 0.7, 2.9, 0.4];
    let c: Vec<f64> = (0..2).map(|j| (0..6).map(|i| obs[i] * f[i * 2 + j]).sum()).collect();
    let sol = solve(
        &MaxEntProblem::new((0..6).map(|i| format!("p{i}")).collect(), f, 2, c).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    let input = LanguageInput {
        name: "x".into(),
        counts: CountVector::from_counts(&counts).unwrap(),
        n: None,
    };
    let row = compensation_row(&input, Some(&sol)).unwrap();
    assert!(row.guessed_entropy.unwrap() >= common::shannon(&obs) - 1e-12);
    assert!(row.guessed_relative_entropy.unwrap() <= 1.0);
}

#[test]
fn alpha_hat_is_solve_alpha_of_cwj() {
    let input = LanguageInput {
        name: "x".into(),
        counts: CountVector::from_counts(&[400, 200, 150, 90, 60, 40, 30, 20, 8, 2]).unwrap(),
        n: None,
    };
    let row = compensation_row(&input, None).unwrap();
    let n = InventorySize::new(10).unwrap();
    assert_eq!(row.alpha_hat.unwrap(), solve_alpha(row.h_cwj, n).unwrap().get());
}
