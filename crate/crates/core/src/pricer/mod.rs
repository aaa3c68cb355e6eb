//! Deterministic valuation of continuously collateralized CDS.
//!
//! The reference entity is always party 0 and the investor (protection
//! buyer) party 1. The premium is paid continuously at rate `S` until the
//! first default in the survival set or maturity; notional is 1.

mod gateaux;
mod legs;
mod ode;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hazard::CreditModel;
use crate::curve::MarginalCurve;

pub use gateaux::{gateaux_cca, gateaux_cva, perfect_collateral_value_at, price_breakdown, PriceBreakdown};
pub use legs::{b2b_gap, legs_3party, legs_4party, risk_free_value};
pub use ode::{backward_ode_value, OdeSolution, ODE_STEP};

/// Contract economics from the protection buyer's point of view.
#[derive(Debug, Clone, PartialEq)]
pub struct DealSpec {
    pub buyer: usize,
    pub seller: usize,
    /// Running premium `S`, per year.
    pub premium: f64,
    pub maturity: f64,
    /// Collateral rate `c`.
    pub collateral_rate: f64,
    /// Return on posted collateral `y = r - c`.
    pub collateral_return: f64,
    /// Spread `y^(i,j)` between evaluation and collateral currencies.
    pub foreign_collateral_spread: f64,
    /// Coverage `δ¹` of the buyer's posting.
    pub coverage_buyer: f64,
    /// Coverage `δ²` of the seller's posting.
    pub coverage_seller: f64,
}

impl DealSpec {
    pub fn new(premium: f64, maturity: f64) -> Self {
        Self {
            buyer: 1,
            seller: 2,
            premium,
            maturity,
            collateral_rate: 0.02,
            collateral_return: 0.0,
            foreign_collateral_spread: 0.0,
            coverage_buyer: 1.0,
            coverage_seller: 1.0,
        }
    }

    pub fn with_premium(&self, premium: f64) -> Self {
        Self { premium, ..self.clone() }
    }

    pub fn with_maturity(&self, maturity: f64) -> Self {
        Self { maturity, ..self.clone() }
    }

    pub fn with_seller(&self, seller: usize) -> Self {
        Self { seller, ..self.clone() }
    }

    pub fn with_coverage(&self, buyer: f64, seller: f64) -> Self {
        Self {
            coverage_buyer: buyer,
            coverage_seller: seller,
            ..self.clone()
        }
    }

    /// Discount rate applied under perfect collateral, `c + y^(i,j)`.
    pub fn discount_rate(&self) -> f64 {
        self.collateral_rate + self.foreign_collateral_spread
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(invalid("maturity", format!("must be positive, got {}", self.maturity)));
        }
        if !(self.premium >= 0.0 && self.premium.is_finite()) {
            return Err(invalid("premium", format!("must be >= 0, got {}", self.premium)));
        }
        if !(self.coverage_buyer >= 0.0 && self.coverage_seller >= 0.0) {
            return Err(invalid("coverage", "collateral coverage must be >= 0"));
        }
        for (name, v) in [
            ("collateral_rate", self.collateral_rate),
            ("collateral_return", self.collateral_return),
            ("foreign_collateral_spread", self.foreign_collateral_spread),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.buyer == self.seller || self.buyer == 0 || self.seller == 0 {
            return Err(invalid("parties", "reference, buyer and seller must be distinct"));
        }
        Ok(())
    }
}

/// Present values of the two legs per unit notional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegValues {
    /// Value of the `(1 - R⁰)`-weighted default leg.
    pub protection: f64,
    /// Value of a unit continuous premium.
    pub annuity: f64,
    /// Estimated absolute quadrature error on either leg.
    pub error: f64,
}

impl LegValues {
    /// Value to the protection buyer at premium `s`.
    pub fn value(&self, premium: f64) -> f64 {
        self.protection - premium * self.annuity
    }

    pub fn par_spread(&self) -> Result<f64> {
        par_spread(self)
    }
}

pub fn par_spread(legs: &LegValues) -> Result<f64> {
    if legs.annuity == 0.0 {
        return Err(Error::ZeroAnnuity);
    }
    Ok(legs.protection / legs.annuity)
}

/// Numerical controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative tolerance of the outer adaptive Simpson passes.
    pub rel_tol: f64,
    /// Relative tolerance of nested adaptive passes.
    pub inner_rel_tol: f64,
    /// Cell width of tabulated running integrals.
    pub cell: f64,
    /// Gauss–Legendre order used inside cells and panels.
    pub order: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            inner_rel_tol: 1e-11,
            cell: 0.25,
            order: 12,
        }
    }
}

/// Which contract a par curve cell prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trade {
    ThreeParty,
    /// Four parties with the given counterparty (2 or 3).
    FourParty { counterparty: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParCell {
    pub alpha: f64,
    pub maturity: f64,
    pub legs: LegValues,
    pub par: f64,
}

/// Legs for one trade in a Clayton model with dependence `alpha`.
pub fn trade_legs(alpha: f64, curves: &[MarginalCurve], deal: &DealSpec, trade: Trade, settings: &QuadratureSettings) -> Result<LegValues> {
    let model = CreditModel::clayton(alpha, curves.to_vec())?;
    match trade {
        Trade::ThreeParty => legs_3party(&model, deal, settings),
        Trade::FourParty { counterparty } => legs_4party(&model, deal, counterparty, settings),
    }
}

/// Par spreads over an `(α, T)` grid, row-major in `alphas`. Cells are
/// evaluated independently, so the result does not depend on the thread
/// pool size.
pub fn par_curve(
    alphas: &[f64],
    maturities: &[f64],
    curves: &[MarginalCurve],
    deal: &DealSpec,
    trade: Trade,
    settings: &QuadratureSettings,
) -> Result<Vec<ParCell>> {
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| maturities.iter().map(move |&t| (a, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(alpha, maturity)| {
            let legs = trade_legs(alpha, curves, &deal.with_maturity(maturity), trade, settings)?;
            Ok(ParCell {
                alpha,
                maturity,
                legs,
                par: legs.par_spread()?,
            })
        })
        .collect()
}
