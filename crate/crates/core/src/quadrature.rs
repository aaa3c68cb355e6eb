//! One-dimensional quadrature: adaptive Simpson with forced breakpoints,
//! composite Gauss–Legendre, tabulated running integrals, and a spectral
//! panel rule that returns the running integral at its own nodes.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Gauss–Legendre
// ---------------------------------------------------------------------------

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule on `[a, b]` split at `breaks` and into panels no wider
    /// than `max_width`.
    pub fn integrate_composite(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], max_width: f64) -> f64 {
        let mut acc = 0.0;
        for (lo, hi) in panels(a, b, breaks, max_width) {
            acc += self.integrate(&f, lo, hi);
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Splits `[a, b]` at the breakpoints inside it and then into equal
/// sub-panels no wider than `max_width`.
pub fn panels(a: f64, b: f64, breaks: &[f64], max_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if b <= a {
        return out;
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().cloned().filter(|&x| x > a && x < b));
    cuts.push(b);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let p_lo = lo + k as f64 * step;
            let p_hi = if k + 1 == pieces { hi } else { lo + (k + 1) as f64 * step };
            out.push((p_lo, p_hi));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Adaptive Simpson
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
}

const MAX_DEPTH: u32 = 48;
const MIN_DEPTH: u32 = 3;

/// Adaptive Simpson on `[a, b]` with Richardson-corrected panels, to the
/// absolute tolerance `abs_tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<Integral> {
    if b <= a {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let value = simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, 0, &mut err)?;
    Ok(Integral { value, error: err })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH || !delta.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, err)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, err)?;
    Ok(l + r)
}

/// Adaptive Simpson over `[a, b]` restarted at every breakpoint, with the
/// tolerance taken relative to a coarse estimate of `∫|f|`.
pub fn integrate_relative(f: &impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<Integral> {
    if b <= a {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let segments = panels(a, b, breaks, f64::INFINITY);
    let coarse = GaussLegendre::new(8);
    let scale: f64 = segments.iter().map(|&(lo, hi)| coarse.integrate(|x| f(x).abs(), lo, hi)).sum();
    let abs_tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let total_len = b - a;
    let mut value = 0.0;
    let mut error = 0.0;
    for (lo, hi) in segments {
        // right-continuous integrands take their left limit at the segment end
        let inner = |x: f64| f(if x >= hi { hi.next_down() } else { x });
        let part = adaptive_simpson(&inner, lo, hi, abs_tol * (hi - lo) / total_len)?;
        value += part.value;
        error += part.error;
    }
    Ok(Integral { value, error })
}

// ---------------------------------------------------------------------------
// Running integrals
// ---------------------------------------------------------------------------

/// Tabulated `F(x) = ∫_{start}^x f` on a grid, refined by a Gauss–Legendre
/// rule on the last partial cell.
pub struct RunningIntegral<F> {
    f: F,
    grid: Vec<f64>,
    values: Vec<f64>,
    rule: GaussLegendre,
}

impl<F: Fn(f64) -> f64> RunningIntegral<F> {
    /// Tabulates on `[start, end]`, splitting at `breaks` and into cells no
    /// wider than `cell`. Queries beyond `end` integrate past the last node.
    pub fn new(f: F, start: f64, end: f64, breaks: &[f64], cell: f64, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let cells = panels(start, end, breaks, cell);
        let mut grid = vec![start];
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for (lo, hi) in cells {
            acc += rule.integrate(&f, lo, hi);
            grid.push(hi);
            values.push(acc);
        }
        Self { f, grid, values, rule }
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// `∫_{start}^x f`.
    pub fn at(&self, x: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g <= x).saturating_sub(1);
        let node = self.grid[k];
        if x == node {
            return self.values[k];
        }
        self.values[k] + self.rule.integrate(&self.f, node, x)
    }

    /// Smallest `x` in the tabulated range with `∫_{start}^x f = y`, for
    /// nonnegative `f`; `None` when `y` exceeds the total.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let last = *self.values.last()?;
        if !(y >= 0.0) || y > last {
            return None;
        }
        let k = self.values.partition_point(|&v| v < y);
        if k == 0 {
            return Some(self.grid[0]);
        }
        let (mut lo, mut hi) = (self.grid[k - 1], self.grid[k]);
        let (flo, fhi) = (self.values[k - 1] - y, self.values[k] - y);
        let mut x = lo + (hi - lo) * (-flo / (fhi - flo));
        for _ in 0..100 {
            let fx = self.at(x) - y;
            if fx.abs() <= 1e-15 * y.max(1.0) {
                break;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.integrand(x);
            let newton = x - fx / d;
            x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi.abs() {
                break;
            }
        }
        Some(x)
    }
}

// ---------------------------------------------------------------------------
// Spectral panels
// ---------------------------------------------------------------------------

/// Gauss–Legendre panel rule that also yields `∫_{lo}^{x_k} f` at every
/// node `x_k`, exact for polynomials of degree `< n`.
#[derive(Debug, Clone)]
pub struct SpectralPanel {
    rule: GaussLegendre,
    /// `running[k][j] = ∫_{-1}^{x_k} ℓ_j` for the Lagrange basis `ℓ_j`.
    running: Vec<Vec<f64>>,
}

impl SpectralPanel {
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(n);
        let x = rule.nodes().to_vec();
        let lagrange = |j: usize, y: f64| -> f64 {
            let mut p = 1.0;
            for m in 0..n {
                if m != j {
                    p *= (y - x[m]) / (x[j] - x[m]);
                }
            }
            p
        };
        let mut running = vec![vec![0.0; n]; n];
        for k in 0..n {
            for (j, cell) in running[k].iter_mut().enumerate() {
                *cell = rule.integrate(|y| lagrange(j, y), -1.0, x[k]);
            }
        }
        Self { rule, running }
    }

    pub fn len(&self) -> usize {
        self.rule.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes mapped to `[lo, hi]`.
    pub fn nodes_on(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.rule.nodes().iter().map(move |x| mid + half * x)
    }

    /// Weights mapped to `[lo, hi]`.
    pub fn weights_on(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let half = 0.5 * (hi - lo);
        self.rule.weights().iter().map(move |w| w * half)
    }

    /// Running integrals at the nodes from samples `values` at the nodes of
    /// a panel of width `hi - lo`.
    pub fn running_into(&self, values: &[f64], width: f64, out: &mut [f64]) {
        let half = 0.5 * width;
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.running[k];
            let mut acc = 0.0;
            for (r, v) in row.iter().zip(values) {
                acc += r * v;
            }
            *o = acc * half;
        }
    }
}
