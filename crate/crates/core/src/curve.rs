//! Piecewise-constant marginal default intensities.

use crate::error::{invalid, Error, Result};

/// Marginal intensity `λ(t)` of one party plus its recovery rate.
///
/// `knots` are the strictly increasing interior breakpoints; `rates[k]`
/// applies on `[knots[k-1], knots[k])` and the last rate extends to
/// infinity. The intensity is right-continuous at each knot.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCurve {
    knots: Vec<f64>,
    rates: Vec<f64>,
    /// `∫₀^{knots[k]} λ`, one entry per knot.
    cumulative_at_knots: Vec<f64>,
    recovery: f64,
}

impl MarginalCurve {
    pub fn flat(lambda: f64, recovery: f64) -> Result<Self> {
        Self::piecewise(Vec::new(), vec![lambda], recovery)
    }

    /// Flat curve from an effective spread `λ̄ = (1 - R) λ`.
    pub fn from_effective_spread(spread: f64, recovery: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&recovery) {
            return Err(invalid("recovery", format!("must lie in [0, 1) to imply an intensity, got {recovery}")));
        }
        Self::flat(spread / (1.0 - recovery), recovery)
    }

    pub fn piecewise(knots: Vec<f64>, rates: Vec<f64>, recovery: f64) -> Result<Self> {
        if rates.len() != knots.len() + 1 {
            return Err(invalid("rates", format!("need {} rates for {} knots, got {}", knots.len() + 1, knots.len(), rates.len())));
        }
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(invalid("rates", format!("intensities must be finite and >= 0, got {r}")));
        }
        let mut prev = 0.0;
        for &k in &knots {
            if !(k.is_finite() && k > prev) {
                return Err(invalid("knots", "must be positive, finite and strictly increasing"));
            }
            prev = k;
        }
        if !(0.0..=1.0).contains(&recovery) {
            return Err(invalid("recovery", format!("must lie in [0, 1], got {recovery}")));
        }
        let mut cumulative_at_knots = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        let mut start = 0.0;
        for (k, &knot) in knots.iter().enumerate() {
            acc += rates[k] * (knot - start);
            cumulative_at_knots.push(acc);
            start = knot;
        }
        Ok(Self {
            knots,
            rates,
            cumulative_at_knots,
            recovery,
        })
    }

    pub fn recovery(&self) -> f64 {
        self.recovery
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_flat(&self) -> bool {
        self.rates.iter().all(|&r| r == self.rates[0])
    }

    fn segment(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t)
    }

    /// `λ(t)`, right-continuous.
    pub fn intensity(&self, t: f64) -> f64 {
        self.rates[self.segment(t)]
    }

    pub fn max_intensity(&self) -> f64 {
        self.rates.iter().cloned().fold(0.0, f64::max)
    }

    /// `∫₀ᵗ λ(s) ds` for `t >= 0`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        if k == 0 {
            self.rates[0] * t
        } else {
            self.cumulative_at_knots[k - 1] + self.rates[k] * (t - self.knots[k - 1])
        }
    }

    /// `ln γ(t) = -∫₀ᵗ λ`.
    pub fn ln_survival(&self, t: f64) -> f64 {
        -self.cumulative(t)
    }

    /// Marginal survival `γ(t) = exp(-∫₀ᵗ λ)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok((-self.cumulative(t)).exp())
    }

    /// Smallest `t` with `∫₀ᵗ λ = x`, or infinity when the curve never
    /// accumulates that much intensity.
    pub fn inverse_cumulative(&self, x: f64) -> f64 {
        let k = self.cumulative_at_knots.partition_point(|&c| c < x);
        let (start, base) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.knots[k - 1], self.cumulative_at_knots[k - 1])
        };
        let rate = self.rates[k];
        if x <= base {
            return start;
        }
        if rate == 0.0 {
            return f64::INFINITY;
        }
        start + (x - base) / rate
    }
}
