//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.
//!
//! All components share one set of nodes. The panel with the largest error
//! (max over components) is bisected until the summed error falls below
//! the requested absolute tolerance.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<f64>,
    /// Per-component error estimate.
    pub errors: Vec<f64>,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    worst: f64,
}

impl Panel {
    fn new<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut Vec<f64>) -> Self
    where
        F: FnMut(f64, &mut [f64]),
    {
        let (value, error) = gk15(f, a, b, dim, buf);
        let worst = error.iter().cloned().fold(0.0, f64::max);
        Panel {
            a,
            b,
            value,
            error,
            worst,
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.worst.total_cmp(&other.worst).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut Vec<f64>) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    buf.resize(dim, 0.0);

    f(centre, buf);
    for k in 0..dim {
        kron[k] = WGK[7] * buf[k];
        gauss[k] = WG[3] * buf[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        for x in [centre - dx, centre + dx] {
            f(x, buf);
            for k in 0..dim {
                kron[k] += WGK[j] * buf[k];
                if j % 2 == 1 {
                    gauss[k] += WG[j / 2] * buf[k];
                }
            }
        }
    }
    let value: Vec<f64> = kron.iter().map(|v| v * half).collect();
    let error: Vec<f64> = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).abs())
        .collect();
    (value, error)
}

/// Integrate a `dim`-component function over consecutive breakpoints.
///
/// `f(x, out)` writes the integrand components at `x` into `out`.
/// `breaks` must be sorted and have at least two entries.
pub fn integrate_vec<F>(
    mut f: F,
    breaks: &[f64],
    dim: usize,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut buf = Vec::with_capacity(dim);
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut settled: Vec<Panel> = Vec::new();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let panel = Panel::new(&mut f, a, b, dim, &mut buf);
        total += panel.worst;
        heap.push(panel);
    }

    while total > opts.abs_tol {
        if heap.len() + settled.len() >= opts.max_panels {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach {:e} after {} panels (estimate {:e})",
                opts.abs_tol,
                heap.len() + settled.len(),
                total
            )));
        }
        let Some(p) = heap.pop() else { break };
        total -= p.worst;
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel is at floating-point resolution; nothing more to gain.
            settled.push(p);
            continue;
        }
        for (a, b) in [(p.a, mid), (mid, p.b)] {
            let panel = Panel::new(&mut f, a, b, dim, &mut buf);
            total += panel.worst;
            heap.push(panel);
        }
        // Guard against drift in the running sum.
        if total <= opts.abs_tol {
            total = heap.iter().map(|p| p.worst).sum();
        }
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(settled);
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    // Sum in a fixed order so results do not depend on refinement history.
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in &panels {
        for k in 0..dim {
            values[k] += p.value[k];
            errors[k] += p.error[k];
        }
    }
    Ok(QuadResult {
        values,
        errors,
        panels: panels.len(),
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out| out[0] = f(x), &[a, b], 1, opts)?;
    Ok(r.values[0])
}
