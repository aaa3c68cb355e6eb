//! Par curves, single-deal pricing and back-to-back gaps.

use contagion_core::mc::{mc_b2b_gap, mc_price_weighted, SimConfig};
use contagion_core::pricer::{
    b2b_gap, backward_ode_value, legs_3party, legs_4party, par_curve, price_breakdown, risk_free_value, DealSpec, LegValues, Trade,
};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{bp, pv, Check, Table};
use crate::RunError;

/// A table plus the invariant checks run while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }
}

fn require_parties(cfg: &ExperimentConfig, n: usize, command: &str) -> Result<(), ConfigError> {
    if cfg.parties.len() != n {
        return Err(ConfigError {
            field: "parties".into(),
            reason: format!("`{command}` needs exactly {n} parties, got {}", cfg.parties.len()),
        });
    }
    Ok(())
}

fn is_listed(alpha: f64, list: &[f64]) -> bool {
    list.iter().any(|&a| (a - alpha).abs() <= 1e-12)
}

/// Distinct stream family per grid cell.
fn cell_sim(cfg: &ExperimentConfig, cell: usize) -> SimConfig {
    let base = cfg.sim();
    SimConfig {
        seed: base.seed.wrapping_add(cell as u64),
        ..base
    }
}

fn grid(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    cfg.alphas()
        .into_iter()
        .flat_map(|a| cfg.deal.maturities.iter().map(move |&t| (a, t)))
        .collect()
}

fn risk_free_pars(cfg: &ExperimentConfig, deal: &DealSpec) -> Result<Vec<f64>, RunError> {
    let reference = cfg.curves()?.swap_remove(0);
    cfg.deal
        .maturities
        .iter()
        .map(|&t| Ok(risk_free_value(&reference, &deal.with_maturity(t), &cfg.settings())?.par_spread()?))
        .collect()
}

// ---------------------------------------------------------------------------
// Three-party par curve
// ---------------------------------------------------------------------------

pub const FIG1_HEADER: [&str; 7] = ["alpha", "maturity_years", "par_spread_bp", "protection_pv", "annuity_pv", "mc_par_bp", "mc_se_bp"];

pub fn run_fig1(cfg: &ExperimentConfig, validate: bool) -> Result<Outcome, RunError> {
    require_parties(cfg, 3, "fig1")?;
    let deal = cfg.deal();
    let curves = cfg.curves()?;
    let cells = par_curve(&cfg.alphas(), &cfg.deal.maturities, &curves, &deal, Trade::ThreeParty, &cfg.settings())?;
    let rf = risk_free_pars(cfg, &deal)?;
    let nt = cfg.deal.maturities.len();

    let mc: Vec<Option<(f64, f64)>> = cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if !(validate && is_listed(c.alpha, &cfg.simulation.validate_alphas)) {
                return Ok(None);
            }
            let est = mc_price_weighted(&cfg.model(c.alpha)?, &deal.with_maturity(c.maturity), &cell_sim(cfg, k), &cfg.settings())?.par()?;
            Ok(Some((est.mean, est.std_error)))
        })
        .collect::<Result<_, RunError>>()?;

    let mut table = Table::new(&FIG1_HEADER);
    let mut excess = f64::NEG_INFINITY;
    let mut worst_z: f64 = 0.0;
    let mut mc_ok = true;
    for (k, (c, m)) in cells.iter().zip(&mc).enumerate() {
        excess = excess.max(c.par - rf[k % nt]);
        let (mc_par, mc_se) = match m {
            Some((mean, se)) => {
                let z = (c.par - mean).abs() / se;
                worst_z = worst_z.max(z);
                mc_ok &= z <= contagion_core::mc::Z_999;
                (bp(*mean), bp(*se))
            }
            None => (String::new(), String::new()),
        };
        table.push(vec![
            format!("{}", c.alpha),
            format!("{}", c.maturity),
            bp(c.par),
            pv(c.legs.protection),
            pv(c.legs.annuity),
            mc_par,
            mc_se,
        ]);
    }
    let mut checks = vec![Check::new(
        "fig1.par_below_risk_free",
        excess <= 1e-12,
        format!("max(par - par_rf)={excess:.3e} tol=1e-12"),
    )];
    if validate {
        checks.push(Check::new("fig1.mc_agreement", mc_ok, format!("max|z|={worst_z:.3} tol=3.29")));
    }
    Ok(Outcome { table, checks })
}

// ---------------------------------------------------------------------------
// Four-party curves
// ---------------------------------------------------------------------------

pub const FIG2_HEADER: [&str; 5] = ["alpha", "maturity_years", "par_vs_party2_bp", "par_vs_party3_bp", "b2b_gap_pv"];

struct Fig2Cell {
    alpha: f64,
    maturity: f64,
    bought: LegValues,
    sold: LegValues,
}

impl Fig2Cell {
    fn par2(&self) -> f64 {
        self.bought.protection / self.bought.annuity
    }

    fn par3(&self) -> f64 {
        self.sold.protection / self.sold.annuity
    }

    fn gap(&self) -> f64 {
        let s = self.par2();
        self.bought.value(s) - self.sold.value(s)
    }
}

pub fn run_fig2(cfg: &ExperimentConfig, validate: bool) -> Result<Outcome, RunError> {
    require_parties(cfg, 4, "fig2")?;
    let deal = cfg.deal();
    let settings = cfg.settings();
    let cells: Vec<Fig2Cell> = grid(cfg)
        .par_iter()
        .map(|&(alpha, maturity)| {
            let model = cfg.model(alpha)?;
            let d = deal.with_maturity(maturity);
            Ok(Fig2Cell {
                alpha,
                maturity,
                bought: legs_4party(&model, &d.with_seller(2), 2, &settings)?,
                sold: legs_4party(&model, &d.with_seller(3), 3, &settings)?,
            })
        })
        .collect::<Result<_, RunError>>()?;

    let mut table = Table::new(&FIG2_HEADER);
    let mut signs = Vec::new();
    for c in &cells {
        let split = c.par2() - c.par3();
        if c.alpha > 0.0 && split.abs() > 1e-12 {
            signs.push(split.signum());
        }
        table.push(vec![format!("{}", c.alpha), format!("{}", c.maturity), bp(c.par2()), bp(c.par3()), pv(c.gap())]);
    }
    let stable = signs.windows(2).all(|w| w[0] == w[1]);
    let mut checks = vec![Check::new(
        "fig2.separation_sign_stable",
        stable,
        format!("sign={} cells={}", signs.first().copied().unwrap_or(0.0), signs.len()),
    )];
    if validate {
        let knot_t = check_maturity(cfg);
        for (k, &alpha) in cfg.simulation.validate_alphas.iter().enumerate() {
            let Some(c) = cells.iter().find(|c| (c.alpha - alpha).abs() <= 1e-12 && c.maturity == knot_t) else {
                continue;
            };
            let est = mc_b2b_gap(&cfg.model(alpha)?, &deal.with_maturity(knot_t), c.par2(), &cell_sim(cfg, k), &settings)?;
            let agree = est.contains(c.gap()) && (c.gap() == 0.0 || est.mean.signum() == c.gap().signum());
            checks.push(Check::new(
                format!("fig2.mc_gap[alpha={alpha},T={knot_t}]"),
                agree,
                format!("gap={} mc={} se={} z={:.3}", pv(c.gap()), pv(est.mean), pv(est.std_error), est.z_score(c.gap())),
            ));
        }
    }
    Ok(Outcome { table, checks })
}

/// Maturity used for single-knot checks: 5y when on the grid.
pub fn check_maturity(cfg: &ExperimentConfig) -> f64 {
    let m = &cfg.deal.maturities;
    if m.contains(&5.0) {
        5.0
    } else {
        m[0]
    }
}

// ---------------------------------------------------------------------------
// Single deals
// ---------------------------------------------------------------------------

pub const PRICE_HEADER: [&str; 15] = [
    "alpha",
    "maturity_years",
    "counterparty",
    "premium_bp",
    "par_spread_bp",
    "protection_pv",
    "annuity_pv",
    "value_pv",
    "v_rf_pv",
    "rf_gap_pv",
    "cca_pv",
    "cva_pv",
    "ode_value_pv",
    "mc_value_pv",
    "mc_se_pv",
];

/// Value of the configured deal on the `(α, T)` grid, at the configured
/// premium or at par when none is given.
pub fn run_price(cfg: &ExperimentConfig, validate: bool) -> Result<Outcome, RunError> {
    let n = cfg.parties.len();
    if !(3..=4).contains(&n) {
        require_parties(cfg, 3, "price")?;
    }
    let base = cfg.deal();
    let settings = cfg.settings();
    let cp = base.seller;
    let rows: Vec<(Vec<String>, Option<bool>)> = grid(cfg)
        .par_iter()
        .enumerate()
        .map(|(k, &(alpha, maturity))| {
            let model = cfg.model(alpha)?;
            let mut deal = base.with_maturity(maturity);
            let legs = if n == 3 { legs_3party(&model, &deal, &settings)? } else { legs_4party(&model, &deal, cp, &settings)? };
            let par = legs.par_spread()?;
            if cfg.deal.premium_bp.is_none() {
                deal.premium = par;
            }
            let rf = risk_free_value(model.curve(0), &deal, &settings)?.value(deal.premium);
            let value = legs.value(deal.premium);
            let (cca, cva, ode) = if n == 3 && deal.foreign_collateral_spread == 0.0 {
                let b = price_breakdown(&model, &deal, &settings)?;
                let ode = backward_ode_value(&model, &deal)?;
                (pv(b.cca), pv(b.cva), pv(ode.value))
            } else {
                (String::new(), String::new(), String::new())
            };
            let (mc_value, mc_se, ok) = if validate && is_listed(alpha, &cfg.simulation.validate_alphas) {
                let est = mc_price_weighted(&model, &deal, &cell_sim(cfg, k), &settings)?.value(deal.premium);
                (pv(est.mean), pv(est.std_error), Some(est.contains(value)))
            } else {
                (String::new(), String::new(), None)
            };
            let row = vec![
                format!("{alpha}"),
                format!("{maturity}"),
                format!("{cp}"),
                bp(deal.premium),
                bp(par),
                pv(legs.protection),
                pv(legs.annuity),
                pv(value),
                pv(rf),
                pv(rf - value),
                cca,
                cva,
                ode,
                mc_value,
                mc_se,
            ];
            Ok((row, ok))
        })
        .collect::<Result<_, RunError>>()?;
    let mut table = Table::new(&PRICE_HEADER);
    let mut checked = 0;
    let mut failed = 0;
    for (row, ok) in rows {
        if let Some(ok) = ok {
            checked += 1;
            failed += usize::from(!ok);
        }
        table.push(row);
    }
    let checks = if validate {
        vec![Check::new("price.mc_agreement", failed == 0, format!("failed={failed} of {checked} tol=3.29se"))]
    } else {
        Vec::new()
    };
    Ok(Outcome { table, checks })
}

pub const B2B_HEADER: [&str; 6] = ["alpha", "maturity_years", "premium_bp", "b2b_gap_pv", "mc_gap_pv", "mc_se_pv"];

/// Back-to-back gap at the configured premium, or at the par of the trade
/// with party 2.
pub fn run_b2b(cfg: &ExperimentConfig, validate: bool) -> Result<Outcome, RunError> {
    require_parties(cfg, 4, "b2b")?;
    let base = cfg.deal();
    let settings = cfg.settings();
    let rows: Vec<(Vec<String>, Option<bool>)> = grid(cfg)
        .par_iter()
        .enumerate()
        .map(|(k, &(alpha, maturity))| {
            let model = cfg.model(alpha)?;
            let deal = base.with_maturity(maturity);
            let premium = match cfg.deal.premium_bp {
                Some(p) => p * 1e-4,
                None => legs_4party(&model, &deal.with_seller(2), 2, &settings)?.par_spread()?,
            };
            let gap = b2b_gap(&model, &deal, premium, &settings)?;
            let (mc, se, ok) = if validate && is_listed(alpha, &cfg.simulation.validate_alphas) {
                let est = mc_b2b_gap(&model, &deal, premium, &cell_sim(cfg, k), &settings)?;
                (pv(est.mean), pv(est.std_error), Some(est.contains(gap)))
            } else {
                (String::new(), String::new(), None)
            };
            Ok((vec![format!("{alpha}"), format!("{maturity}"), bp(premium), pv(gap), mc, se], ok))
        })
        .collect::<Result<_, RunError>>()?;
    let mut table = Table::new(&B2B_HEADER);
    let mut failed = 0;
    for (row, ok) in rows {
        failed += usize::from(ok == Some(false));
        table.push(row);
    }
    let checks = if validate {
        vec![Check::new("b2b.mc_agreement", failed == 0, format!("failed={failed} tol=3.29se"))]
    } else {
        Vec::new()
    };
    Ok(Outcome { table, checks })
}
