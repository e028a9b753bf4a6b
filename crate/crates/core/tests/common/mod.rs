//! Reference computations shared by the integration tests. None of these go
//! through the library's solvers.

#![allow(dead_code)]

use herbidyn::rng::Rng;
use herbidyn::{GrowthModel, State, SystemSpec, Variant};

pub fn bh_roots(r: f64) -> Vec<f64> {
    vec![0.0, r - 1.0]
}

pub fn holling_roots(r: f64) -> Vec<f64> {
    let s = (r * r - 4.0).sqrt();
    vec![0.0, (r - s) / 2.0, (r + s) / 2.0]
}

pub fn bh_slope(r: f64, p: f64) -> f64 {
    r / ((1.0 + p) * (1.0 + p))
}

pub fn holling_slope(r: f64, p: f64) -> f64 {
    let d = 1.0 + p * p;
    2.0 * r * p / (d * d)
}

/// Five-point central difference of `F`.
pub fn slope_fd(m: &GrowthModel, p: f64) -> f64 {
    let h = 1e-3 * p.max(1e-2);
    let f = |x: f64| m.growth(x);
    (-f(p + 2.0 * h) + 8.0 * f(p + h) - 8.0 * f(p - h) + f(p - 2.0 * h)) / (12.0 * h)
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Brute-force interior equilibrium: the node of an `n x n` grid on
/// `(0, Pn] x (0, Pn]` minimising `max(|P'/P - 1|, |H'/H - 1|)`. Both
/// interior coordinates are bounded by `Pn` (`P + H = F(P)` resp.
/// `H = P(1 - e^{-aH})`). Returns the node and the grid pitch.
pub fn grid_oracle(spec: &SystemSpec, pn: f64, n: usize) -> (State, f64) {
    let pitch = pn / n as f64;
    let mut best = (f64::INFINITY, State { p: 0.0, h: 0.0 });
    for i in 1..=n {
        let p = i as f64 * pitch;
        for j in 1..=n {
            let h = j as f64 * pitch;
            let s = State { p, h };
            let t = spec.step(s);
            let res = (t.p / p - 1.0).abs().max((t.h / h - 1.0).abs());
            if res < best.0 {
                best = (res, s);
            }
        }
    }
    (best.1, pitch)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut j = k;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[k]] {
            j += 1;
        }
        let avg = (k + j) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=j] {
            r[i] = avg;
        }
        k = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn spec(variant: Variant, model: GrowthModel, a: f64) -> SystemSpec {
    SystemSpec::new(variant, model, a).unwrap()
}
