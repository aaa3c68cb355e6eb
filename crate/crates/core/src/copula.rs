//! Clayton and product copulas with closed-form mixed partial derivatives.
//!
//! All evaluations run in log space. The Clayton sum `Σ u_i^{-α} - n` is
//! formed as `Σ expm1(-α ln u_i)` so that small `α` does not cancel, and
//! switches to a log-sum-exp form once any `u_i^{-α}` is large.
//!
//! For Clayton the `k`-th mixed partial over a set `D` of distinct
//! coordinates is
//!
//! ```text
//! ∂_D C(u) = Π_{m=0}^{k-1} (1 + mα) · C(u)^{1+kα} · Π_{j∈D} u_j^{-(1+α)}
//! ```

use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};

/// Below this the Clayton parameter is treated as the product copula.
pub const PRODUCT_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaFamily {
    Clayton,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    family: CopulaFamily,
    alpha: f64,
    dim: usize,
}

impl CopulaSpec {
    pub fn clayton(alpha: f64, dim: usize) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(invalid("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        Self::check_dim(dim)?;
        Ok(Self {
            family: CopulaFamily::Clayton,
            alpha,
            dim,
        })
    }

    pub fn product(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self {
            family: CopulaFamily::Product,
            alpha: 0.0,
            dim,
        })
    }

    fn check_dim(dim: usize) -> Result<()> {
        if dim < 2 {
            return Err(invalid("dim", format!("copula needs at least 2 coordinates, got {dim}")));
        }
        Ok(())
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    /// Dependence parameter; zero for the product family.
    pub fn alpha(&self) -> f64 {
        match self.family {
            CopulaFamily::Clayton => self.alpha,
            CopulaFamily::Product => 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when evaluation follows the Clayton closed forms (as opposed to
    /// the product copula, including the `α → 0` limit).
    pub fn is_dependent(&self) -> bool {
        self.family == CopulaFamily::Clayton && self.alpha >= PRODUCT_LIMIT
    }

    fn check_args(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        for (index, &value) in u.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::Domain { index, value });
            }
        }
        Ok(())
    }

    fn check_subset(&self, d: &[usize]) -> Result<()> {
        if d.is_empty() {
            return Err(invalid("D", "subset must be non-empty"));
        }
        if d.len() > self.dim {
            return Err(invalid("D", format!("subset larger than dimension {}", self.dim)));
        }
        for (k, &i) in d.iter().enumerate() {
            if i >= self.dim {
                return Err(Error::UnknownParty(i));
            }
            if d[..k].contains(&i) {
                return Err(invalid("D", format!("index {i} repeated")));
            }
        }
        Ok(())
    }

    /// `ln C(u)`, without argument validation.
    pub(crate) fn ln_c_unchecked(&self, u: &[f64]) -> f64 {
        if !self.is_dependent() {
            return u.iter().map(|x| x.ln()).sum();
        }
        let alpha = self.alpha;
        let exps: SmallVec<[f64; 8]> = u.iter().map(|x| -alpha * x.ln()).collect();
        let max = exps.iter().cloned().fold(0.0_f64, f64::max);
        let ln_s = if max <= 1.0 {
            // s = 1 + Σ (u_i^{-α} - 1)
            neumaier_sum(exps.iter().map(|e| e.exp_m1())).ln_1p()
        } else {
            let n = (u.len() - 1) as f64;
            let scaled = neumaier_sum(
                exps.iter()
                    .map(|e| (e - max).exp())
                    .chain(std::iter::once(-n * (-max).exp())),
            );
            max + scaled.ln()
        };
        -ln_s / alpha
    }

    /// `ln ∂_D C(u)`, without argument validation.
    pub(crate) fn ln_subset_partial_unchecked(&self, u: &[f64], d: &[usize]) -> f64 {
        if !self.is_dependent() {
            return u
                .iter()
                .enumerate()
                .filter(|(k, _)| !d.contains(k))
                .map(|(_, x)| x.ln())
                .sum();
        }
        let alpha = self.alpha;
        let k = d.len();
        let ln_coef: f64 = (1..k).map(|m| (m as f64 * alpha).ln_1p()).sum();
        let ln_u_d: f64 = d.iter().map(|&j| u[j].ln()).sum();
        ln_coef + (1.0 + k as f64 * alpha) * self.ln_c_unchecked(u) - (1.0 + alpha) * ln_u_d
    }

    pub fn ln_evaluate(&self, u: &[f64]) -> Result<f64> {
        self.check_args(u)?;
        Ok(self.ln_c_unchecked(u))
    }

    /// Joint distribution function `C(u)`.
    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        Ok(self.ln_evaluate(u)?.exp())
    }

    /// `∂C/∂u_i`.
    pub fn partial(&self, u: &[f64], i: usize) -> Result<f64> {
        self.subset_partial(u, &[i])
    }

    /// `∂²C/∂u_i∂u_j` for `i != j`.
    pub fn partial2(&self, u: &[f64], i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(invalid("j", "second partial requires distinct indices"));
        }
        self.subset_partial(u, &[i, j])
    }

    pub fn ln_subset_partial(&self, u: &[f64], d: &[usize]) -> Result<f64> {
        self.check_args(u)?;
        self.check_subset(d)?;
        Ok(self.ln_subset_partial_unchecked(u, d))
    }

    /// Mixed partial `∂_D C(u) = Π_{i∈D} ∂/∂u_i C(u)`.
    pub fn subset_partial(&self, u: &[f64], d: &[usize]) -> Result<f64> {
        Ok(self.ln_subset_partial(u, d)?.exp())
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn clayton(alpha: f64, dim: usize) -> CopulaSpec {
        CopulaSpec::clayton(alpha, dim).unwrap()
    }

    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn uniform_margin() {
        assert_relative_eq!(clayton(2.0, 3).evaluate(&[0.37, 1.0, 1.0]).unwrap(), 0.37, max_relative = 1e-15);
    }

    #[test]
    fn hand_values() {
        let c = clayton(1.0, 2);
        assert_relative_eq!(c.evaluate(&[0.5, 0.5]).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.partial(&[0.5, 0.5], 0).unwrap(), 4.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(c.partial2(&[0.5, 0.5], 0, 1).unwrap(), 32.0 / 27.0, max_relative = 1e-14);
        for alpha in [0.3, 1.0, 7.0] {
            assert_relative_eq!(clayton(alpha, 2).partial(&[1.0, 1.0], 0).unwrap(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn product_limit_of_clayton() {
        let c = clayton(1e-6, 3);
        assert!((c.evaluate(&[0.3, 0.6, 0.9]).unwrap() - 0.162).abs() < 1e-6);
        let c2 = clayton(1e-6, 2);
        assert!((c2.partial(&[0.3, 0.6], 0).unwrap() - 0.6).abs() < 1e-5);
    }

    #[test]
    fn product_partials() {
        let p = CopulaSpec::product(3).unwrap();
        assert_relative_eq!(p.partial2(&[0.3, 0.6, 0.9], 0, 1).unwrap(), 0.9, max_relative = 1e-15);
        assert_relative_eq!(p.subset_partial(&[0.2, 0.5, 0.8], &[0, 1]).unwrap(), 0.8, max_relative = 1e-15);
        assert_relative_eq!(p.evaluate(&[0.2, 0.5, 0.8]).unwrap(), 0.08, max_relative = 1e-15);
    }

    #[test]
    fn tiny_alpha_uses_product() {
        let c = clayton(1e-13, 3);
        assert!(!c.is_dependent());
        assert_eq!(c.evaluate(&[0.3, 0.6, 0.9]).unwrap(), CopulaSpec::product(3).unwrap().evaluate(&[0.3, 0.6, 0.9]).unwrap());
    }

    #[test]
    fn errors() {
        let c = clayton(1.0, 3);
        assert!(matches!(c.evaluate(&[0.0, 0.5, 0.5]), Err(Error::Domain { index: 0, .. })));
        assert!(matches!(c.evaluate(&[0.5, 1.5, 0.5]), Err(Error::Domain { index: 1, .. })));
        assert!(matches!(c.evaluate(&[0.5, 0.5]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
        assert!(c.partial2(&[0.5, 0.5, 0.5], 1, 1).is_err());
        assert!(c.subset_partial(&[0.5, 0.5, 0.5], &[]).is_err());
        assert!(c.subset_partial(&[0.5, 0.5, 0.5], &[3]).is_err());
        assert!(CopulaSpec::clayton(-0.1, 3).is_err());
        assert!(CopulaSpec::clayton(1.0, 1).is_err());
    }

    #[test]
    fn partial_matches_finite_difference() {
        let u = [0.4, 0.7, 0.8];
        for alpha in [0.25, 1.0, 4.0] {
            let c = clayton(alpha, 3);
            for i in 0..3 {
                let fd = central_diff(
                    |x| {
                        let mut v = u;
                        v[i] = x;
                        c.evaluate(&v).unwrap()
                    },
                    u[i],
                    1e-5,
                );
                assert_relative_eq!(c.partial(&u, i).unwrap(), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn partial2_matches_finite_difference() {
        let u = [0.4, 0.7, 0.8];
        let specs = [clayton(0.25, 3), clayton(1.0, 3), clayton(4.0, 3), CopulaSpec::product(3).unwrap()];
        for c in specs {
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let fd = central_diff(
                    |x| {
                        let mut v = u;
                        v[i] = x;
                        c.partial(&v, j).unwrap()
                    },
                    u[i],
                    1e-5,
                );
                assert_relative_eq!(c.partial2(&u, i, j).unwrap(), fd, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn subset_partial_nested_finite_difference() {
        let c = clayton(1.0, 3);
        let u = [0.5, 0.5, 0.5];
        let h = 1e-3;
        let f = |a: f64, b: f64| c.evaluate(&[0.5, a, b]).unwrap();
        let fd = (f(0.5 + h, 0.5 + h) - f(0.5 + h, 0.5 - h) - f(0.5 - h, 0.5 + h) + f(0.5 - h, 0.5 - h)) / (4.0 * h * h);
        assert_relative_eq!(c.subset_partial(&u, &[1, 2]).unwrap(), fd, max_relative = 1e-4);
        assert_eq!(c.subset_partial(&u, &[0]).unwrap(), c.partial(&u, 0).unwrap());
    }

    #[test]
    fn third_order_partial_matches_nested_differences() {
        let c = clayton(2.0, 4);
        let u = [0.6, 0.5, 0.7, 0.8];
        let h = 2e-3;
        let mut fd = 0.0;
        for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut v = u;
            v[1] += s1 * h;
            v[2] += s2 * h;
            fd += s1 * s2 * c.partial(&v, 3).unwrap();
        }
        fd /= 4.0 * h * h;
        assert_relative_eq!(c.subset_partial(&u, &[1, 2, 3]).unwrap(), fd, max_relative = 1e-4);
    }

    #[test]
    fn groundedness_reduces_dimension() {
        let grid = [0.1_f64, 0.3, 0.5, 0.7, 0.9];
        for alpha in [0.5, 2.0] {
            for dim in 2..=4 {
                let full = clayton(alpha, dim + 1);
                let reduced = clayton(alpha, dim);
                for &g in &grid {
                    let mut u: Vec<f64> = (0..dim).map(|k| grid[(k + 2) % 5].max(g)).collect();
                    u[0] = g;
                    let mut padded = u.clone();
                    padded.push(1.0);
                    assert_relative_eq!(full.evaluate(&padded).unwrap(), reduced.evaluate(&u).unwrap(), max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn small_arguments_stay_finite() {
        let c = clayton(3.0, 3);
        let v = c.evaluate(&[1e-12, 0.5, 0.9]).unwrap();
        assert!(v > 0.0 && v <= 1e-12 * (1.0 + 1e-12), "{v}");
        let p = c.partial(&[1e-12, 0.5, 0.9], 0).unwrap();
        assert!(p.is_finite() && p > 0.0);
    }

    proptest! {
        #[test]
        fn frechet_upper_bound(alpha in 0.0..6.0f64, u in prop::collection::vec(0.001..1.0f64, 2..5)) {
            let c = CopulaSpec::clayton(alpha, u.len()).unwrap().evaluate(&u).unwrap();
            let min = u.iter().cloned().fold(1.0, f64::min);
            prop_assert!(c > 0.0);
            prop_assert!(c <= min * (1.0 + 1e-14));
        }

        #[test]
        fn monotone_in_each_coordinate(alpha in 0.0..6.0f64, u in prop::collection::vec(0.01..0.99f64, 2..5), k in 0usize..4) {
            let spec = CopulaSpec::clayton(alpha, u.len()).unwrap();
            let k = k % u.len();
            let mut up = u.clone();
            up[k] += 0.005;
            prop_assert!(spec.evaluate(&up).unwrap() >= spec.evaluate(&u).unwrap());
        }

        #[test]
        fn clayton_ratio_identities(a_idx in 0usize..3, u in prop::collection::vec(0.01..1.0f64, 3), i in 0usize..3, j in 0usize..3) {
            prop_assume!(i != j);
            let alpha = [0.25, 1.0, 4.0][a_idx];
            let spec = CopulaSpec::clayton(alpha, 3).unwrap();
            let c = spec.evaluate(&u).unwrap();
            let ratio = (c / u[i]).powf(alpha);
            let first = u[i] * spec.partial(&u, i).unwrap() / c;
            let second = u[i] * spec.partial2(&u, i, j).unwrap() / spec.partial(&u, j).unwrap();
            prop_assert!(((first - ratio) / ratio).abs() < 1e-12);
            prop_assert!(((second - (1.0 + alpha) * ratio) / ratio).abs() < 1e-12);
        }

        #[test]
        fn continuity_at_zero_alpha(u in prop::collection::vec(0.01..1.0f64, 2..5)) {
            let c = CopulaSpec::clayton(1e-8, u.len()).unwrap().evaluate(&u).unwrap();
            let prod: f64 = u.iter().product();
            prop_assert!((c - prod).abs() <= 1e-6);
        }
    }
}
