//! Pre-default value with value-dependent discounting, three-party case.
//!
//! With deterministic intensities the pre-default value solves
//!
//! ```text
//! dV/dt = (r - μ(t, V) + h⁰(t)) V + S - (1 - R⁰) h⁰(t),    V(T) = 0
//! ```
//!
//! where `r = c + y` and `μ` switches branch on the sign of `V` (the
//! `V >= 0` branch owns zero). Integrated backwards with classical RK4; the
//! branch is frozen over a step and a step that changes sign is cut at the
//! crossing.

use super::DealSpec;
use crate::copula::CopulaSpec;
use crate::curve::MarginalCurve;
use crate::error::{invalid, Error, Result};
use crate::hazard::{clayton_hazard_unchecked, CreditModel};

/// Nominal step, in years.
pub const ODE_STEP: f64 = 1.0 / 730.0;

/// Largest acceptable change in `V(0)` when the step is halved.
const HALVING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolution {
    /// `V(0)` on the halved step.
    pub value: f64,
    /// `|V_h(0) - V_{h/2}(0)|`.
    pub halving_difference: f64,
    pub steps: usize,
}

struct Dynamics<'a> {
    copula: CopulaSpec,
    curves: &'a [MarginalCurve],
    deal: &'a DealSpec,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Branch {
    /// `V < 0`: the investor posts collateral.
    Negative,
    NonNegative,
}

impl Branch {
    fn of(v: f64) -> Self {
        if v < 0.0 {
            Branch::Negative
        } else {
            Branch::NonNegative
        }
    }
}

impl Dynamics<'_> {
    fn rhs(&self, t: f64, v: f64, branch: Branch) -> f64 {
        let h = |i: usize| clayton_hazard_unchecked(&self.copula, self.curves, t, i, &[]);
        let (h0, h1, h2) = (h(0), h(1), h(2));
        let d = self.deal;
        let y = d.collateral_return;
        let (r1, r2) = (self.curves[1].recovery(), self.curves[2].recovery());
        let (d1, d2) = (d.coverage_buyer, d.coverage_seller);
        let mu = match branch {
            Branch::Negative => y * d1 - (1.0 - r1) * (1.0 - d1).max(0.0) * h1 + (1.0 - r2) * (d1 - 1.0).max(0.0) * h2,
            Branch::NonNegative => y * d2 - (1.0 - r2) * (1.0 - d2).max(0.0) * h2 + (1.0 - r1) * (d2 - 1.0).max(0.0) * h1,
        };
        let r = d.collateral_rate + y;
        (r - mu + h0) * v + d.premium - (1.0 - self.curves[0].recovery()) * h0
    }

    /// One RK4 step from `(t, v)` to `t + dt` (dt may be negative).
    fn rk4(&self, t: f64, v: f64, dt: f64, branch: Branch) -> f64 {
        let k1 = self.rhs(t, v, branch);
        let k2 = self.rhs(t + 0.5 * dt, v + 0.5 * dt * k1, branch);
        let k3 = self.rhs(t + 0.5 * dt, v + 0.5 * dt * k2, branch);
        let k4 = self.rhs(t + dt, v + dt * k3, branch);
        v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    fn solve(&self, steps: usize) -> f64 {
        let maturity = self.deal.maturity;
        let h = maturity / steps as f64;
        let mut v = 0.0;
        let mut branch = Branch::of(v);
        for k in 0..steps {
            let mut t = maturity - k as f64 * h;
            let end = maturity - (k + 1) as f64 * h;
            // at most a few crossings inside a single step
            for _ in 0..4 {
                let dt = end - t;
                if dt == 0.0 {
                    break;
                }
                let next = self.rk4(t, v, dt, branch);
                if Branch::of(next) == branch {
                    v = next;
                    t = end;
                    break;
                }
                // bisect for the crossing of zero under the frozen branch
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if Branch::of(self.rk4(t, v, mid * dt, branch)) == branch {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let cut = hi * dt;
                v = self.rk4(t, v, cut, branch);
                t += cut;
                branch = Branch::of(next);
            }
            if t != end {
                v = self.rk4(t, v, end - t, branch);
            }
        }
        v
    }
}

/// `V(0)` of the three-party CDS with coverage `δ¹, δ²` and collateral
/// return `y` entering through `μ`.
pub fn backward_ode_value(model: &CreditModel, deal: &DealSpec) -> Result<OdeSolution> {
    deal.validate()?;
    if model.parties() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: model.parties(),
        });
    }
    if deal.foreign_collateral_spread != 0.0 {
        return Err(invalid("foreign_collateral_spread", "value-dependent discounting is domestic-currency only"));
    }
    let dynamics = Dynamics {
        copula: *model.copula(),
        curves: model.curves(),
        deal,
    };
    let steps = (deal.maturity / ODE_STEP).ceil().max(1.0) as usize;
    let coarse = dynamics.solve(steps);
    let fine = dynamics.solve(2 * steps);
    let difference = (coarse - fine).abs();
    if !(difference <= HALVING_TOLERANCE) {
        return Err(Error::StepSize {
            difference,
            tolerance: HALVING_TOLERANCE,
        });
    }
    Ok(OdeSolution {
        value: fine,
        halving_difference: difference,
        steps: 2 * steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricer::{legs_3party, QuadratureSettings};

    fn model(alpha: f64) -> CreditModel {
        let curves = [0.02, 0.01, 0.012]
            .iter()
            .map(|&s| MarginalCurve::from_effective_spread(s, 0.4).unwrap())
            .collect();
        CreditModel::clayton(alpha, curves).unwrap()
    }

    #[test]
    fn perfect_collateral_matches_legs() {
        for alpha in [0.0, 1.0, 4.0] {
            let m = model(alpha);
            let mut deal = DealSpec::new(0.013, 5.0);
            deal.collateral_return = 0.01;
            let ode = backward_ode_value(&m, &deal).unwrap();
            let legs = legs_3party(&m, &deal, &QuadratureSettings::default()).unwrap();
            assert!((ode.value - legs.value(deal.premium)).abs() < 1e-8, "{} vs {}", ode.value, legs.value(deal.premium));
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let curves = vec![
            MarginalCurve::flat(0.0, 0.4).unwrap(),
            MarginalCurve::flat(0.01, 0.4).unwrap(),
            MarginalCurve::flat(0.02, 0.4).unwrap(),
        ];
        let m = CreditModel::clayton(1.0, curves).unwrap();
        let deal = DealSpec::new(0.0, 5.0).with_coverage(0.5, 0.5);
        assert_eq!(backward_ode_value(&m, &deal).unwrap().value, 0.0);
    }

    #[test]
    fn value_crossing_zero_is_handled() {
        // premium between the short and long par forces a sign change of V(t)
        let m = model(3.0);
        let mut deal = DealSpec::new(0.0185, 10.0).with_coverage(0.5, 0.7);
        deal.collateral_return = 0.01;
        let sol = backward_ode_value(&m, &deal).unwrap();
        assert!(sol.value.is_finite());
        assert!(sol.halving_difference < 1e-10);
    }

    #[test]
    fn foreign_collateral_rejected() {
        let mut deal = DealSpec::new(0.01, 5.0);
        deal.foreign_collateral_spread = 0.001;
        assert!(backward_ode_value(&model(1.0), &deal).is_err());
    }
}
