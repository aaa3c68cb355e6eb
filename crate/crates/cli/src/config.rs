//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [[parties]]            # party 0 is the reference entity, 1 the investor
//! spread_bp = 200.0      # effective spread, λ = spread / (1 - R)
//! recovery = 0.4
//!
//! [copula]
//! family = "clayton"
//! alphas = [0.0, 1.0, 2.0]
//!
//! [deal]
//! maturities = [1.0, 5.0]
//! ```
//!
//! A party may instead give a raw intensity `lambda`, or a piecewise
//! intensity with `knots` and `rates` (one more rate than knots).

use std::path::{Path, PathBuf};

use contagion_core::copula::CopulaSpec;
use contagion_core::curve::MarginalCurve;
use contagion_core::hazard::CreditModel;
use contagion_core::mc::SimConfig;
use contagion_core::pricer::{DealSpec, QuadratureSettings};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

fn bad(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub parties: Vec<PartyConfig>,
    #[serde(default)]
    pub copula: CopulaConfig,
    #[serde(default)]
    pub deal: DealConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub spread_bp: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub knots: Option<Vec<f64>>,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default = "default_recovery")]
    pub recovery: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Clayton,
    Product,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaConfig {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DealConfig {
    #[serde(default = "default_maturities")]
    pub maturities: Vec<f64>,
    /// Running premium; the par spread is used where omitted.
    #[serde(default)]
    pub premium_bp: Option<f64>,
    #[serde(default = "default_buyer")]
    pub buyer: usize,
    #[serde(default = "default_seller")]
    pub seller: usize,
    #[serde(default = "default_collateral_rate")]
    pub collateral_rate: f64,
    #[serde(default)]
    pub collateral_return: f64,
    #[serde(default)]
    pub foreign_collateral_spread: f64,
    #[serde(default = "one")]
    pub coverage_buyer: f64,
    #[serde(default = "one")]
    pub coverage_seller: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub inner_rel_tol: f64,
    pub cell: f64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch: u64,
    /// Paths for binned hazard checks.
    #[serde(default = "default_binned_paths")]
    pub binned_paths: u64,
    /// Dependence levels checked against Monte Carlo under `--validate`.
    #[serde(default = "default_validate_alphas")]
    pub validate_alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_recovery() -> f64 {
    0.4
}
fn default_family() -> Family {
    Family::Clayton
}
fn default_maturities() -> Vec<f64> {
    vec![1.0, 5.0, 10.0, 20.0]
}
fn default_buyer() -> usize {
    1
}
fn default_seller() -> usize {
    2
}
fn default_collateral_rate() -> f64 {
    0.02
}
fn one() -> f64 {
    1.0
}
fn default_paths() -> u64 {
    1_000_000
}
fn default_seed() -> u64 {
    20_110_601
}
fn default_batch() -> u64 {
    4096
}
fn default_binned_paths() -> u64 {
    40_000_000
}
fn default_validate_alphas() -> Vec<f64> {
    vec![1.0, 3.0]
}

/// `0, 0.25, …, 5`.
pub fn default_alphas() -> Vec<f64> {
    (0..=20).map(|k| k as f64 * 0.25).collect()
}

impl Default for CopulaConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            alphas: default_alphas(),
        }
    }
}

impl Default for DealConfig {
    fn default() -> Self {
        Self {
            maturities: default_maturities(),
            premium_bp: None,
            buyer: default_buyer(),
            seller: default_seller(),
            collateral_rate: default_collateral_rate(),
            collateral_return: 0.0,
            foreign_collateral_spread: 0.0,
            coverage_buyer: 1.0,
            coverage_seller: 1.0,
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSettings::default();
        Self {
            rel_tol: q.rel_tol,
            inner_rel_tol: q.inner_rel_tol,
            cell: q.cell,
            order: q.order,
        }
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            paths: default_paths(),
            seed: default_seed(),
            batch: default_batch(),
            binned_paths: default_binned_paths(),
            validate_alphas: default_validate_alphas(),
        }
    }
}

impl PartyConfig {
    pub fn from_spread_bp(spread_bp: f64) -> Self {
        Self {
            name: None,
            spread_bp: Some(spread_bp),
            lambda: None,
            knots: None,
            rates: None,
            recovery: default_recovery(),
        }
    }

    fn curve(&self, field: &str) -> Result<MarginalCurve, ConfigError> {
        if !(0.0..1.0).contains(&self.recovery) {
            return Err(bad(format!("{field}.recovery"), format!("must lie in [0, 1), got {}", self.recovery)));
        }
        let result = match (self.spread_bp, self.lambda, &self.knots, &self.rates) {
            (Some(s), None, None, None) => {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(bad(format!("{field}.spread_bp"), format!("must be finite and >= 0, got {s}")));
                }
                MarginalCurve::from_effective_spread(s * 1e-4, self.recovery)
            }
            (None, Some(l), None, None) => MarginalCurve::flat(l, self.recovery),
            (None, None, Some(k), Some(r)) => MarginalCurve::piecewise(k.clone(), r.clone(), self.recovery),
            _ => {
                return Err(bad(field, "give exactly one of `spread_bp`, `lambda`, or `knots` with `rates`"));
            }
        };
        result.map_err(|e| bad(field.to_string(), e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Loading and conversion
// ---------------------------------------------------------------------------

impl ExperimentConfig {
    fn with_spreads(spreads_bp: &[f64]) -> Self {
        Self {
            parties: spreads_bp.iter().map(|&s| PartyConfig::from_spread_bp(s)).collect(),
            copula: CopulaConfig::default(),
            deal: DealConfig::default(),
            quadrature: QuadratureConfig::default(),
            simulation: SimulationConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Reference 200bp, investor 100bp, counterparty 120bp.
    pub fn fig1() -> Self {
        Self::with_spreads(&[200.0, 100.0, 120.0])
    }

    /// Reference 200bp, investor 30bp, counterparties 150bp and 75bp.
    pub fn fig2() -> Self {
        Self::with_spreads(&[200.0, 30.0, 150.0, 75.0])
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_else(|| "document".into());
            bad(span, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.parties.len();
        if n < 3 {
            return Err(bad("parties", format!("need at least 3 parties, got {n}")));
        }
        self.curves()?;
        if self.copula.alphas.is_empty() {
            return Err(bad("copula.alphas", "must not be empty"));
        }
        for (k, &a) in self.copula.alphas.iter().enumerate() {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(bad(format!("copula.alphas[{k}]"), format!("must be finite and >= 0, got {a}")));
            }
        }
        for (k, &a) in self.simulation.validate_alphas.iter().enumerate() {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(bad(format!("simulation.validate_alphas[{k}]"), format!("must be finite and >= 0, got {a}")));
            }
        }
        let d = &self.deal;
        if d.maturities.is_empty() {
            return Err(bad("deal.maturities", "must not be empty"));
        }
        for (k, &t) in d.maturities.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(bad(format!("deal.maturities[{k}]"), format!("must be positive, got {t}")));
            }
        }
        if let Some(p) = d.premium_bp {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(bad("deal.premium_bp", format!("must be finite and >= 0, got {p}")));
            }
        }
        for (name, p) in [("deal.buyer", d.buyer), ("deal.seller", d.seller)] {
            if p == 0 || p >= n {
                return Err(bad(name, format!("must index a party in 1..{n}, got {p}")));
            }
        }
        if d.buyer == d.seller {
            return Err(bad("deal.seller", "must differ from the buyer"));
        }
        for (name, v) in [("deal.coverage_buyer", d.coverage_buyer), ("deal.coverage_seller", d.coverage_seller)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("deal.collateral_rate", d.collateral_rate),
            ("deal.collateral_return", d.collateral_return),
            ("deal.foreign_collateral_spread", d.foreign_collateral_spread),
        ] {
            if !v.is_finite() {
                return Err(bad(name, "must be finite"));
            }
        }
        let q = &self.quadrature;
        if !(q.rel_tol > 0.0 && q.inner_rel_tol > 0.0) {
            return Err(bad("quadrature.rel_tol", "tolerances must be positive"));
        }
        if !(q.cell > 0.0 && q.cell.is_finite()) {
            return Err(bad("quadrature.cell", "must be positive"));
        }
        if !(2..=64).contains(&q.order) {
            return Err(bad("quadrature.order", format!("must lie in 2..=64, got {}", q.order)));
        }
        let s = &self.simulation;
        if s.paths == 0 || s.binned_paths == 0 {
            return Err(bad("simulation.paths", "must be at least 1"));
        }
        if s.batch == 0 {
            return Err(bad("simulation.batch", "must be at least 1"));
        }
        Ok(())
    }

    pub fn curves(&self) -> Result<Vec<MarginalCurve>, ConfigError> {
        self.parties
            .iter()
            .enumerate()
            .map(|(i, p)| p.curve(&format!("parties[{i}]")))
            .collect()
    }

    /// Dependence levels to sweep; the product family has only `α = 0`.
    pub fn alphas(&self) -> Vec<f64> {
        match self.copula.family {
            Family::Clayton => self.copula.alphas.clone(),
            Family::Product => vec![0.0],
        }
    }

    pub fn model(&self, alpha: f64) -> Result<CreditModel, ConfigError> {
        let curves = self.curves()?;
        let copula = match self.copula.family {
            Family::Clayton => CopulaSpec::clayton(alpha, curves.len()),
            Family::Product => CopulaSpec::product(curves.len()),
        }
        .map_err(|e| bad("copula", e.to_string()))?;
        CreditModel::new(copula, curves).map_err(|e| bad("parties", e.to_string()))
    }

    /// Deal at the first maturity with the configured premium (zero if none).
    pub fn deal(&self) -> DealSpec {
        let d = &self.deal;
        DealSpec {
            buyer: d.buyer,
            seller: d.seller,
            premium: d.premium_bp.unwrap_or(0.0) * 1e-4,
            maturity: d.maturities[0],
            collateral_rate: d.collateral_rate,
            collateral_return: d.collateral_return,
            foreign_collateral_spread: d.foreign_collateral_spread,
            coverage_buyer: d.coverage_buyer,
            coverage_seller: d.coverage_seller,
        }
    }

    pub fn settings(&self) -> QuadratureSettings {
        let q = &self.quadrature;
        QuadratureSettings {
            rel_tol: q.rel_tol,
            inner_rel_tol: q.inner_rel_tol,
            cell: q.cell,
            order: q.order,
        }
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig::new(self.simulation.paths, self.simulation.seed).with_batch(self.simulation.batch)
    }
}
