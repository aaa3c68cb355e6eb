use super::{DealSpec, LegValues, QuadratureSettings};
use crate::curve::MarginalCurve;
use crate::error::{invalid, Error, Result};
use crate::hazard::{clayton_hazard_unchecked, CreditModel};
use crate::quadrature::{integrate_relative, panels, RunningIntegral, SpectralPanel};

/// Legs when the reference intensity `h` is a deterministic function of time:
/// `annuity = ∫₀ᵀ e^{-ds - ∫₀ˢh}`, `protection = (1-R) ∫₀ᵀ e^{-ds - ∫₀ˢh} h(s)`.
fn legs_from_hazard(
    h: impl Fn(f64) -> f64,
    recovery: f64,
    discount: f64,
    maturity: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<LegValues> {
    let running = RunningIntegral::new(&h, 0.0, maturity, breaks, settings.cell, settings.order);
    let weight = |s: f64| (-discount * s - running.at(s)).exp();
    let annuity = integrate_relative(&weight, 0.0, maturity, breaks, settings.rel_tol)?;
    let protection = integrate_relative(&|s: f64| weight(s) * h(s), 0.0, maturity, breaks, settings.rel_tol)?;
    let lgd = 1.0 - recovery;
    Ok(LegValues {
        protection: lgd * protection.value,
        annuity: annuity.value,
        error: (lgd * protection.error).max(annuity.error),
    })
}

fn check_parties(model: &CreditModel, expected: usize) -> Result<()> {
    if model.parties() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: model.parties(),
        });
    }
    Ok(())
}

/// Perfect-collateral legs with reference, investor and counterparty only.
/// All three are held alive by the survival measure, so the reference
/// intensity is the deterministic `λ⁰(t) (C(γ(t)) / γ⁰(t))^α`.
pub fn legs_3party(model: &CreditModel, deal: &DealSpec, settings: &QuadratureSettings) -> Result<LegValues> {
    deal.validate()?;
    check_parties(model, 3)?;
    let copula = *model.copula();
    let curves = model.curves();
    legs_from_hazard(
        |t| clayton_hazard_unchecked(&copula, curves, t, 0, &[]),
        curves[0].recovery(),
        deal.discount_rate(),
        deal.maturity,
        &model.breakpoints(),
        settings,
    )
}

/// Legs when the same CDS is traded between two default-free parties:
/// the reference intensity is its marginal `λ⁰`.
pub fn risk_free_value(reference: &MarginalCurve, deal: &DealSpec, settings: &QuadratureSettings) -> Result<LegValues> {
    deal.validate()?;
    legs_from_hazard(
        |t| reference.intensity(t),
        reference.recovery(),
        deal.discount_rate(),
        deal.maturity,
        reference.knots(),
        settings,
    )
}

/// Perfect-collateral legs in the four-party case, investor 1 trading with
/// `counterparty` (2 or 3). The other party `k` stays outside the survival
/// set and may default first, after which the reference intensity jumps.
///
/// With `a = h⁰_∅`, `b = h^k_∅`, `g(·; v) = h⁰_{k}(·, v)` and `AB = ∫(a+b)`:
///
/// ```text
/// annuity    = ∫₀ᵀ e^{-cs-AB(s)} ds + ∫₀ᵀ e^{-AB(v)} b(v) ∫ᵥᵀ e^{-cs-∫ᵥˢg} ds dv
/// protection = Z [∫₀ᵀ e^{-cs-AB(s)} a(s) ds + ∫₀ᵀ e^{-AB(v)} b(v) ∫ᵥᵀ e^{-cs-∫ᵥˢg} g(s) ds dv]
/// ```
///
/// The outer integrals are adaptive Simpson; the inner integral over `s`
/// for fixed `v` runs on Gauss–Legendre panels that carry `∫ᵥˢ g`.
pub fn legs_4party(model: &CreditModel, deal: &DealSpec, counterparty: usize, settings: &QuadratureSettings) -> Result<LegValues> {
    deal.validate()?;
    check_parties(model, 4)?;
    if deal.buyer != 1 {
        return Err(invalid("buyer", "the four-party trade has party 1 as investor"));
    }
    let other = match counterparty {
        2 => 3,
        3 => 2,
        p => return Err(invalid("counterparty", format!("must be 2 or 3, got {p}"))),
    };
    let copula = *model.copula();
    let curves = model.curves();
    let discount = deal.discount_rate();
    let maturity = deal.maturity;
    let breaks = model.breakpoints();
    let rel_tol = settings.rel_tol;

    let a = |t: f64| clayton_hazard_unchecked(&copula, curves, t, 0, &[]);
    let b = |t: f64| clayton_hazard_unchecked(&copula, curves, t, other, &[]);
    let ab = RunningIntegral::new(|t: f64| a(t) + b(t), 0.0, maturity, &breaks, settings.cell, settings.order);

    // paths where `other` survives past s
    let joint = |s: f64| (-discount * s - ab.at(s)).exp();
    let ann_survive = integrate_relative(&joint, 0.0, maturity, &breaks, rel_tol)?;
    let prot_survive = integrate_relative(&|s: f64| joint(s) * a(s), 0.0, maturity, &breaks, rel_tol)?;

    // paths where `other` defaults at v
    let panel = SpectralPanel::new(settings.order);
    let panel_width = 4.0 * settings.cell;
    let after_default = |v: f64| -> (f64, f64) {
        let frozen = [(other, v)];
        let n = panel.len();
        let mut g = vec![0.0; n];
        let mut running = vec![0.0; n];
        let mut carried = 0.0;
        let mut ann = 0.0;
        let mut prot = 0.0;
        for (lo, hi) in panels(v, maturity, &breaks, panel_width) {
            for (gk, s) in g.iter_mut().zip(panel.nodes_on(lo, hi)) {
                *gk = clayton_hazard_unchecked(&copula, curves, s, 0, &frozen);
            }
            panel.running_into(&g, hi - lo, &mut running);
            for (((s, w), gk), rk) in panel.nodes_on(lo, hi).zip(panel.weights_on(lo, hi)).zip(&g).zip(&running) {
                let df = w * (-discount * s - carried - rk).exp();
                ann += df;
                prot += df * gk;
            }
            carried += panel.weights_on(lo, hi).zip(&g).map(|(w, gk)| w * gk).sum::<f64>();
        }
        (ann, prot)
    };
    let entry = |v: f64| (-ab.at(v)).exp() * b(v);
    let ann_contagion = integrate_relative(&|v: f64| entry(v) * after_default(v).0, 0.0, maturity, &breaks, rel_tol)?;
    let prot_contagion = integrate_relative(&|v: f64| entry(v) * after_default(v).1, 0.0, maturity, &breaks, rel_tol)?;

    let lgd = 1.0 - curves[0].recovery();
    Ok(LegValues {
        protection: lgd * (prot_survive.value + prot_contagion.value),
        annuity: ann_survive.value + ann_contagion.value,
        error: (lgd * (prot_survive.error + prot_contagion.error)).max(ann_survive.error + ann_contagion.error),
    })
}

/// `V₀ + V₀^{B2B}` for an investor buying protection from party 2 and
/// selling the same protection to party 3 at the common premium `premium`.
pub fn b2b_gap(model: &CreditModel, deal: &DealSpec, premium: f64, settings: &QuadratureSettings) -> Result<f64> {
    let bought = legs_4party(model, deal, 2, settings)?;
    let sold = legs_4party(model, &deal.with_seller(3), 3, settings)?;
    Ok(bought.value(premium) - sold.value(premium))
}
