#![allow(dead_code)]

use contagion_core::curve::MarginalCurve;
use contagion_core::hazard::CreditModel;

pub const FIG1: [f64; 3] = [0.02, 0.01, 0.012];
pub const FIG2: [f64; 4] = [0.02, 0.003, 0.015, 0.0075];

pub fn curves(spreads: &[f64]) -> Vec<MarginalCurve> {
    spreads
        .iter()
        .map(|&s| MarginalCurve::from_effective_spread(s, 0.4).unwrap())
        .collect()
}

pub fn clayton(alpha: f64, spreads: &[f64]) -> CreditModel {
    CreditModel::clayton(alpha, curves(spreads)).unwrap()
}

/// Kendall's tau of samples without ties, by counting inversions with a
/// merge sort.
pub fn kendall_tau(pairs: &mut [(f64, f64)]) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let discordant = inversions(&mut ys, &mut buf) as f64;
    let n = pairs.len() as f64;
    let total = n * (n - 1.0) / 2.0;
    (total - 2.0 * discordant) / total
}

fn inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = inversions(&mut v[..mid], &mut buf[..mid]) + inversions(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            j += 1;
            count += (mid - i) as u64;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Kolmogorov–Smirnov distance of a sample from the uniform law.
pub fn ks_uniform(sample: &mut [f64]) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - i as f64 / n).max((i + 1) as f64 / n - u))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
