//! Invariant suite behind `contagion validate`.
//!
//! Every check is deterministic for a fixed configuration and seed; the
//! report carries measured errors and tolerances but no timings.

use contagion_core::copula::CopulaSpec;
use contagion_core::hazard::{
    clayton_h0_3party, clayton_h0_4party, survival_measure_hazard, survival_measure_hazard_with, CreditModel, Limit, ScenarioState,
    SurvivalSet,
};
use contagion_core::mc::{mc_density_mass, mc_hazard_binned, mc_price_weighted, path_rng, HazardBin, SimConfig};
use contagion_core::pricer::{b2b_gap, backward_ode_value, legs_3party, legs_4party, price_breakdown, risk_free_value, DealSpec, LegValues};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::experiments::check_maturity;
use crate::output::Check;
use crate::RunError;

const IDENTITY_ALPHAS: [f64; 3] = [0.25, 1.0, 4.0];

pub fn run_validate(cfg: &ExperimentConfig) -> Result<Vec<Check>, RunError> {
    cfg.validate()?;
    let mut checks = vec![copula_identities(cfg)?, hazard_jump(cfg)?, closed_forms(cfg)?, dominance(cfg)?];
    checks.extend(ode_consistency(cfg)?);
    checks.extend(mc_prices(cfg)?);
    checks.push(density_mass(cfg)?);
    checks.push(binned_hazard(cfg)?);
    checks.extend(back_to_back(cfg)?);
    Ok(checks)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sim(cfg: &ExperimentConfig, offset: u64) -> SimConfig {
    let s = cfg.sim();
    SimConfig {
        seed: s.seed.wrapping_add(offset),
        ..s
    }
}

fn first_alpha(cfg: &ExperimentConfig) -> f64 {
    cfg.simulation.validate_alphas.first().copied().unwrap_or(1.0)
}

/// `S = {0, buyer, seller}`, the survival set of the configured trade.
fn survival(cfg: &ExperimentConfig) -> SurvivalSet {
    SurvivalSet::new([0, cfg.deal.buyer, cfg.deal.seller])
}

// ---------------------------------------------------------------------------
// Copula and hazards
// ---------------------------------------------------------------------------

fn copula_identities(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let dim = cfg.parties.len();
    let mut rng = path_rng(cfg.simulation.seed, 0);
    let mut worst: f64 = 0.0;
    for &alpha in &IDENTITY_ALPHAS {
        let c = CopulaSpec::clayton(alpha, dim)?;
        for _ in 0..1000 {
            let u: Vec<f64> = (0..dim).map(|_| rng.random_range(0.01..0.99)).collect();
            let i = rng.random_range(0..dim);
            let j = (i + rng.random_range(1..dim)) % dim;
            let value = c.evaluate(&u)?;
            let power = (value / u[i]).powf(alpha);
            let first = u[i] * c.partial(&u, i)? / value;
            let second = u[i] * c.partial2(&u, i, j)? / c.partial(&u, j)?;
            worst = worst.max(rel(first, power)).max(rel(second, (1.0 + alpha) * power));
        }
    }
    Ok(Check::new("copula.ratio_identities", worst <= 1e-12, format!("max_rel={worst:.3e} tol=1e-12")))
}

fn hazard_jump(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let n = cfg.parties.len();
    let curves = cfg.curves()?;
    let mut set = survival(cfg);
    let mut outside = set.complement(n);
    if outside.is_empty() {
        // three parties: let the seller play the outside role
        set = SurvivalSet::new([0, cfg.deal.buyer]);
        outside = vec![cfg.deal.seller];
    }
    let members: Vec<usize> = set.members().collect();
    let mut rng = path_rng(cfg.simulation.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = IDENTITY_ALPHAS[rng.random_range(0..IDENTITY_ALPHAS.len())];
        let model = CreditModel::clayton(alpha, curves.clone())?;
        let tau = rng.random_range(0.1..10.0);
        let k = outside[rng.random_range(0..outside.len())];
        let i = members[rng.random_range(0..members.len())];
        let state = ScenarioState::new(tau, &[(k, tau)])?;
        let right = survival_measure_hazard_with(&model, &state, &set, i, Limit::Right)?;
        let left = survival_measure_hazard_with(&model, &state, &set, i, Limit::Left)?;
        worst = worst.max(rel(right / left, 1.0 + alpha));
    }
    Ok(Check::new("hazard.first_jump", worst <= 1e-10, format!("max_rel={worst:.3e} tol=1e-10")))
}

fn closed_forms(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let n = cfg.parties.len();
    if n > 4 {
        return Ok(Check::skip("hazard.closed_forms", format!("no closed form for {n} parties")));
    }
    let curves = cfg.curves()?;
    let set = SurvivalSet::new([0, 1, 2]);
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.25, 1.0, 4.0] {
        let model = CreditModel::clayton(alpha, curves.clone())?;
        for t in [0.1, 1.0, 5.0, 10.0, 20.0] {
            let generic = survival_measure_hazard(&model, &ScenarioState::alive_at(t)?, &set, 0)?;
            let closed = if n == 3 {
                clayton_h0_3party(alpha, &curves, t)?
            } else {
                let after = survival_measure_hazard(&model, &ScenarioState::new(t, &[(3, 0.5 * t)])?, &set, 0)?;
                worst = worst.max(rel(clayton_h0_4party(alpha, &curves, t, Some(0.5 * t))?, after));
                clayton_h0_4party(alpha, &curves, t, None)?
            };
            worst = worst.max(rel(closed, generic));
        }
    }
    Ok(Check::new("hazard.closed_forms", worst <= 1e-12, format!("max_rel={worst:.3e} tol=1e-12")))
}

// ---------------------------------------------------------------------------
// Deterministic pricing
// ---------------------------------------------------------------------------

fn trade_legs(model: &CreditModel, deal: &DealSpec, cfg: &ExperimentConfig, seller: usize) -> Result<LegValues, RunError> {
    let settings = cfg.settings();
    Ok(if model.parties() == 3 {
        legs_3party(model, deal, &settings)?
    } else {
        legs_4party(model, &deal.with_seller(seller), seller, &settings)?
    })
}

fn sellers(cfg: &ExperimentConfig) -> Vec<usize> {
    match cfg.parties.len() {
        3 => vec![cfg.deal.seller],
        _ => vec![2, 3],
    }
}

fn dominance(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let n = cfg.parties.len();
    if n > 4 {
        return Ok(Check::skip("pricing.dominance", format!("no closed-form legs for {n} parties")));
    }
    let reference = cfg.curves()?.swap_remove(0);
    let mut excess = f64::NEG_INFINITY;
    let mut cells = 0;
    for &t in &cfg.deal.maturities {
        let deal = cfg.deal().with_maturity(t);
        let rf = risk_free_value(&reference, &deal, &cfg.settings())?.par_spread()?;
        for alpha in cfg.alphas() {
            let model = cfg.model(alpha)?;
            for seller in sellers(cfg) {
                excess = excess.max(trade_legs(&model, &deal, cfg, seller)?.par_spread()? - rf);
                cells += 1;
            }
        }
    }
    Ok(Check::new(
        "pricing.par_below_risk_free",
        excess <= 1e-12,
        format!("cells={cells} max(par - par_rf)={excess:.3e} tol=1e-12"),
    ))
}

fn ode_consistency(cfg: &ExperimentConfig) -> Result<Vec<Check>, RunError> {
    if cfg.parties.len() != 3 || cfg.deal.foreign_collateral_spread != 0.0 {
        return Ok(vec![Check::skip("pricing.ode_and_gateaux", "needs three parties in one currency")]);
    }
    let model = cfg.model(first_alpha(cfg))?;
    let settings = cfg.settings();
    let mut deal = cfg.deal().with_maturity(check_maturity(cfg)).with_coverage(1.0, 1.0);
    if deal.collateral_return == 0.0 {
        deal.collateral_return = 0.01;
    }
    let legs = legs_3party(&model, &deal, &settings)?;
    deal.premium = legs.par_spread()?;
    let ode = backward_ode_value(&model, &deal)?;
    let diff = (ode.value - legs.value(deal.premium)).abs();
    let err = |delta: f64| -> Result<f64, RunError> {
        let d = deal.with_coverage(delta, delta);
        let approx = price_breakdown(&model, &d, &settings)?.first_order();
        Ok((backward_ode_value(&model, &d)?.value - approx).abs())
    };
    let ratio = err(0.9)? / err(0.95)?;
    Ok(vec![
        Check::new("pricing.ode_full_coverage", diff <= 1e-8, format!("abs_diff={diff:.3e} tol=1e-8")),
        Check::new("pricing.gateaux_order", (2.5..=6.0).contains(&ratio), format!("ratio={ratio:.4} range=[2.5,6]")),
    ])
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

fn mc_prices(cfg: &ExperimentConfig) -> Result<Vec<Check>, RunError> {
    let n = cfg.parties.len();
    if n > 4 {
        return Ok(vec![Check::skip("mc.price", format!("no quadrature comparand for {n} parties"))]);
    }
    let t = check_maturity(cfg);
    let mut checks = Vec::new();
    for (k, &alpha) in cfg.simulation.validate_alphas.iter().enumerate() {
        let model = cfg.model(alpha)?;
        for seller in sellers(cfg) {
            let deal = cfg.deal().with_maturity(t).with_seller(seller);
            let legs = trade_legs(&model, &deal, cfg, seller)?;
            let premium = cfg.deal.premium_bp.map_or(legs.par_spread()?, |p| p * 1e-4);
            let exact = legs.value(premium);
            let est = mc_price_weighted(&model, &deal, &sim(cfg, 10 + 2 * k as u64 + seller as u64), &cfg.settings())?.value(premium);
            checks.push(Check::new(
                format!("mc.price[alpha={alpha},T={t},seller={seller}]"),
                est.contains(exact),
                format!("quad={exact:.6e} mc={:.6e} se={:.3e} z={:.3} tol=3.29", est.mean, est.std_error, est.z_score(exact)),
            ));
        }
    }
    Ok(checks)
}

fn density_mass(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let alpha = cfg.simulation.validate_alphas.iter().copied().fold(1.0, f64::max);
    let deal = cfg.deal().with_maturity(check_maturity(cfg));
    let est = mc_density_mass(&cfg.model(alpha)?, &deal, &sim(cfg, 20), &cfg.settings())?;
    Ok(Check::new(
        format!("mc.density_mass[alpha={alpha}]"),
        est.contains(1.0),
        format!("mean={:.6} se={:.3e} z={:.3} tol=3.29", est.mean, est.std_error, est.z_score(1.0)),
    ))
}

fn binned_hazard(cfg: &ExperimentConfig) -> Result<Check, RunError> {
    let n = cfg.parties.len();
    let alpha = first_alpha(cfg);
    let model = cfg.model(alpha)?;
    let bin = HazardBin::all_alive(0, 1.0, 0.01, n);
    let sim = SimConfig {
        paths: cfg.simulation.binned_paths,
        ..sim(cfg, 30)
    };
    let est = mc_hazard_binned(&model, &bin, &sim)?;
    let exact = survival_measure_hazard(&model, &ScenarioState::alive_at(1.0)?, &survival(cfg), 0)?;
    let r = rel(est.estimate.mean, exact);
    Ok(Check::new(
        format!("mc.binned_hazard[alpha={alpha}]"),
        r <= 0.05,
        format!("closed={exact:.6e} mc={:.6e} hits={} rel={r:.4} tol=0.05", est.estimate.mean, est.hits),
    ))
}

fn back_to_back(cfg: &ExperimentConfig) -> Result<Vec<Check>, RunError> {
    if cfg.parties.len() != 4 {
        return Ok(vec![Check::skip("b2b.symmetry", "needs four parties")]);
    }
    let settings = cfg.settings();
    let deal = cfg.deal().with_maturity(check_maturity(cfg));
    let mut curves = cfg.curves()?;
    curves[3] = curves[2].clone();
    let twin = CreditModel::clayton(2.0, curves)?;
    let twin_gap = b2b_gap(&twin, &deal, 0.01, &settings)?.abs();
    let zero = cfg.model(0.0)?;
    let par = legs_4party(&zero, &deal.with_seller(2), 2, &settings)?.par_spread()?;
    let zero_gap = b2b_gap(&zero, &deal, par, &settings)?.abs();
    Ok(vec![
        Check::new("b2b.identical_counterparties", twin_gap <= 1e-12, format!("gap={twin_gap:.3e} tol=1e-12")),
        Check::new("b2b.independence", zero_gap <= 1e-9, format!("gap={zero_gap:.3e} tol=1e-9")),
    ])
}
