//! First-order corrections for imperfect collateral coverage, three-party case.
//!
//! Around the perfectly collateralized value `V̄` the pre-default value is
//! `V ≈ V̄ + CCA + CVA` with
//!
//! ```text
//! CCA = ∫ e^{-∫(c+h⁰)} y {(1-δ¹)[-V̄]⁺ - (1-δ²)[V̄]⁺} ds
//! CVA = ∫ e^{-∫(c+h⁰)} (1-R¹) h¹ {(1-δ¹)⁺[-V̄]⁺ + (δ²-1)⁺[V̄]⁺} ds
//!     - ∫ e^{-∫(c+h⁰)} (1-R²) h² {(1-δ²)⁺[V̄]⁺ + (δ¹-1)⁺[-V̄]⁺} ds
//! ```

use super::{legs_3party, risk_free_value, DealSpec, QuadratureSettings};
use crate::copula::CopulaSpec;
use crate::curve::MarginalCurve;
use crate::error::{invalid, Error, Result};
use crate::hazard::{clayton_hazard_unchecked, CreditModel};
use crate::quadrature::{integrate_relative, RunningIntegral};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBreakdown {
    /// Perfect-collateral value.
    pub v_bar: f64,
    pub cca: f64,
    pub cva: f64,
    /// Value between two default-free parties.
    pub v_rf: f64,
    /// `v_rf - v_bar`.
    pub rf_gap: f64,
}

impl PriceBreakdown {
    pub fn first_order(&self) -> f64 {
        self.v_bar + self.cca + self.cva
    }
}

// ---------------------------------------------------------------------------
// V̄ along the path

/// `V̄(s) = e^{cs + H(s)} ∫ₛᵀ e^{-cu - H(u)} (-S + (1-R⁰) h⁰(u)) du`, with
/// both running integrals tabulated once.
struct PerfectValue<'a> {
    copula: CopulaSpec,
    curves: &'a [MarginalCurve],
    discount: f64,
    maturity: f64,
    cumulative: RunningIntegral<Box<dyn Fn(f64) -> f64 + 'a>>,
    flow: RunningIntegral<Box<dyn Fn(f64) -> f64 + 'a>>,
}

impl<'a> PerfectValue<'a> {
    fn new(model: &'a CreditModel, deal: &DealSpec, settings: &QuadratureSettings) -> Self {
        let copula = *model.copula();
        let curves = model.curves();
        let breaks = model.breakpoints();
        let maturity = deal.maturity;
        let discount = deal.collateral_rate;
        let h0 = move |t: f64| clayton_hazard_unchecked(&copula, curves, t, 0, &[]);
        let cumulative = RunningIntegral::new(
            Box::new(h0) as Box<dyn Fn(f64) -> f64 + 'a>,
            0.0,
            maturity,
            &breaks,
            settings.cell,
            settings.order,
        );
        let premium = deal.premium;
        let lgd = 1.0 - curves[0].recovery();
        // the flow integrand needs H, so it integrates its own copy
        let inner = RunningIntegral::new(h0, 0.0, maturity, &breaks, settings.cell, settings.order);
        let flow = RunningIntegral::new(
            Box::new(move |u: f64| (-discount * u - inner.at(u)).exp() * (-premium + lgd * h0(u))) as Box<dyn Fn(f64) -> f64 + 'a>,
            0.0,
            maturity,
            &breaks,
            settings.cell,
            settings.order,
        );
        Self {
            copula,
            curves,
            discount,
            maturity,
            cumulative,
            flow,
        }
    }

    fn weight(&self, s: f64) -> f64 {
        (-self.discount * s - self.cumulative.at(s)).exp()
    }

    fn value(&self, s: f64) -> f64 {
        (self.flow.at(self.maturity) - self.flow.at(s)) / self.weight(s)
    }

    fn hazard(&self, s: f64, party: usize) -> f64 {
        clayton_hazard_unchecked(&self.copula, self.curves, s, party, &[])
    }
}

fn check(model: &CreditModel, deal: &DealSpec) -> Result<()> {
    deal.validate()?;
    if model.parties() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: model.parties(),
        });
    }
    if deal.foreign_collateral_spread != 0.0 {
        return Err(invalid("foreign_collateral_spread", "coverage corrections are domestic-currency only"));
    }
    Ok(())
}

/// Perfect-collateral value at time `s`, conditional on no default in the
/// survival set before `s`.
pub fn perfect_collateral_value_at(model: &CreditModel, deal: &DealSpec, s: f64, settings: &QuadratureSettings) -> Result<f64> {
    check(model, deal)?;
    if !(0.0..=deal.maturity).contains(&s) {
        return Err(Error::TimeOrder {
            start: s,
            end: deal.maturity,
        });
    }
    Ok(PerfectValue::new(model, deal, settings).value(s))
}

fn plus(x: f64) -> f64 {
    x.max(0.0)
}

/// Collateral cost adjustment.
pub fn gateaux_cca(model: &CreditModel, deal: &DealSpec, settings: &QuadratureSettings) -> Result<f64> {
    check(model, deal)?;
    let (d1, d2, y) = (deal.coverage_buyer, deal.coverage_seller, deal.collateral_return);
    if y == 0.0 || (d1 == 1.0 && d2 == 1.0) {
        return Ok(0.0);
    }
    let pv = PerfectValue::new(model, deal, settings);
    let integrand = |s: f64| {
        let v = pv.value(s);
        pv.weight(s) * y * ((1.0 - d1) * plus(-v) - (1.0 - d2) * plus(v))
    };
    Ok(integrate_relative(&integrand, 0.0, deal.maturity, &model.breakpoints(), settings.rel_tol)?.value)
}

/// Credit valuation adjustment from investor and counterparty default.
pub fn gateaux_cva(model: &CreditModel, deal: &DealSpec, settings: &QuadratureSettings) -> Result<f64> {
    check(model, deal)?;
    let (d1, d2) = (deal.coverage_buyer, deal.coverage_seller);
    if d1 == 1.0 && d2 == 1.0 {
        return Ok(0.0);
    }
    let lgd1 = 1.0 - model.curve(deal.buyer).recovery();
    let lgd2 = 1.0 - model.curve(deal.seller).recovery();
    let pv = PerfectValue::new(model, deal, settings);
    let integrand = |s: f64| {
        let v = pv.value(s);
        let own = lgd1 * pv.hazard(s, deal.buyer) * (plus(1.0 - d1) * plus(-v) + plus(d2 - 1.0) * plus(v));
        let cpty = lgd2 * pv.hazard(s, deal.seller) * (plus(1.0 - d2) * plus(v) + plus(d1 - 1.0) * plus(-v));
        pv.weight(s) * (own - cpty)
    };
    Ok(integrate_relative(&integrand, 0.0, deal.maturity, &model.breakpoints(), settings.rel_tol)?.value)
}

pub fn price_breakdown(model: &CreditModel, deal: &DealSpec, settings: &QuadratureSettings) -> Result<PriceBreakdown> {
    check(model, deal)?;
    let v_bar = legs_3party(model, deal, settings)?.value(deal.premium);
    let v_rf = risk_free_value(model.curve(0), deal, settings)?.value(deal.premium);
    Ok(PriceBreakdown {
        v_bar,
        cca: gateaux_cca(model, deal, settings)?,
        cva: gateaux_cva(model, deal, settings)?,
        v_rf,
        rf_gap: v_rf - v_bar,
    })
}
