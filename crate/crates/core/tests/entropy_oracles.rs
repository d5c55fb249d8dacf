mod common;

use phonodist::entropy::*;

fn counts(v: &[u64]) -> CountVector {
    CountVector::from_counts(v).unwrap()
}

#[test]
fn cwj_hand_value() {
    // N = 4, f1 = 2, f2 = 1, A = 1/4.
    let obs = 0.5 * (1.0 / 2.0 + 1.0 / 3.0) + 2.0 * 0.25 * (1.0 + 1.0 / 2.0 + 1.0 / 3.0);
    let q: f64 = 0.75;
    let unseen = 0.5 * q.powi(-3) * (4f64.ln() - (q + q * q / 2.0 + q.powi(3) / 3.0));
    let want = obs + unseen;
    assert!((want - 1.587_459).abs() < 1e-6);
    assert!((cwj_entropy(&counts(&[2, 1, 1])).value - want).abs() < 1e-12);
}

#[test]
fn cwj_matches_literal_formula_on_small_samples() {
    let mut rng = common::rng(3);
    let p: Vec<f64> = (1..=12).map(|i| 1.0 / i as f64).collect();
    for tokens in [5usize, 12, 30, 60, 120] {
        for _ in 0..30 {
            let c = common::multinomial(&mut rng, &p, tokens);
            if c.iter().filter(|&&x| x > 0).count() < 2 {
                continue;
            }
            let want = common::cwj_literal(&c);
            let got = cwj_from_counts(&c);
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "{c:?}: {got} vs {want}");
        }
    }
}

#[test]
fn cwj_without_singletons_is_observed_part() {
    for c in [vec![2u64, 3, 5], vec![10, 2, 2, 7], vec![4, 4]] {
        let want = common::cwj_observed_part(&c);
        assert!((cwj_from_counts(&c) - want).abs() < 1e-13);
    }
}

#[test]
fn plugin_matches_definition() {
    for c in [vec![1u64, 1], vec![5, 3, 2, 9], vec![1000, 1]] {
        assert!((plugin_entropy(&counts(&c)).value - common::plugin(&c)).abs() < 1e-13);
    }
    assert!((plugin_entropy(&counts(&[7, 7])).value - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn cwj_reduces_bias_when_undersampled() {
    // N = 2 · support, 1000 replicates, for a flat and a skewed source.
    let mut rng = common::rng(17);
    for p in [
        vec![1.0; 40],
        (1..=40).map(|i| (i as f64).powf(-1.1)).collect::<Vec<_>>(),
    ] {
        let s: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|x| x / s).collect();
        let truth = common::shannon(&p);
        let (mut e_plugin, mut e_cwj) = (0.0, 0.0);
        let reps = 1000;
        for _ in 0..reps {
            let c = common::multinomial(&mut rng, &p, 80);
            e_plugin += plugin_from_counts(&c) - truth;
            e_cwj += cwj_from_counts(&c) - truth;
        }
        let (e_plugin, e_cwj) = (e_plugin / reps as f64, e_cwj / reps as f64);
        assert!(e_cwj.abs() < e_plugin.abs(), "cwj bias {e_cwj} vs plug-in {e_plugin}");
    }
}

#[test]
fn skewed_thirty_categories_large_sample() {
    let mut rng = common::rng(29);
    let w: Vec<f64> = (1..=30).map(|i| 0.8f64.powi(i)).collect();
    let s: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let truth = common::shannon(&p);
    let mut err = 0.0;
    for _ in 0..100 {
        let c = common::multinomial(&mut rng, &p, 10_000);
        let h = cwj_from_counts(&c);
        assert!(h >= plugin_from_counts(&c));
        err += (h - truth).abs();
    }
    assert!(err / 100.0 <= 0.02, "{}", err / 100.0);
}

#[test]
fn count_vector_validation() {
    assert!(CountVector::from_counts(&[5]).is_err());
    assert!(CountVector::from_counts(&[5, 0]).is_err());
    assert!(CountVector::new(vec![("a".into(), 1), ("a".into(), 2)]).is_err());
    assert!(CountVector::from_counts(&[u64::MAX, 1]).is_err());
}

#[test]
fn relative_entropy_clamps() {
    let n = phonodist::dirichlet::InventorySize::new(4).unwrap();
    let r = relative_entropy_value(10.0, n);
    assert_eq!(r.value, 1.0);
    assert!(r.clamped);
    let r = relative_entropy_value(4f64.ln() / 2.0, n);
    assert!((r.value - 0.5).abs() < 1e-15);
    assert!(!r.clamped);
    let uniform = cwj_entropy(&counts(&[500, 500, 500, 500]));
    assert!((relative_entropy(&uniform, n).value - 1.0).abs() < 1e-3);
}
