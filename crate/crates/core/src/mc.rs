//! Monte Carlo oracle: frailty sampling of Clayton default times and
//! path estimators for prices, density mass and binned hazards.
//!
//! Every path draws from its own ChaCha8 stream (`stream = path index`), and
//! batch results are reduced in batch order, so estimates are bitwise
//! reproducible for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::copula::CopulaSpec;
use crate::curve::MarginalCurve;
use crate::error::{invalid, Error, Result};
use crate::hazard::{clayton_hazard_unchecked, CreditModel};
use crate::pricer::{DealSpec, QuadratureSettings};
use crate::quadrature::{panels, RunningIntegral, SpectralPanel};

/// Two-sided 99.9% normal quantile.
pub const Z_999: f64 = 3.2905;

const MAX_RESAMPLES: usize = 64;

type Scratch = SmallVec<[f64; 8]>;

// ---------------------------------------------------------------------------
// Configuration and estimates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub paths: u64,
    pub seed: u64,
    /// Paths per work unit.
    pub batch: u64,
}

impl SimConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        Self { paths, seed, batch: 4096 }
    }

    pub fn with_batch(self, batch: u64) -> Self {
        Self { batch, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(invalid("paths", "must be at least 1"));
        }
        if self.batch == 0 {
            return Err(invalid("batch", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: u64,
}

impl Estimate {
    /// 99.9% normal interval.
    pub fn interval(&self) -> (f64, f64) {
        (self.mean - Z_999 * self.std_error, self.mean + Z_999 * self.std_error)
    }

    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }

    pub fn contains(&self, target: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= target && target <= hi
    }
}

/// Joint estimate of the protection and annuity legs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegEstimate {
    pub protection: Estimate,
    pub annuity: Estimate,
    /// Sample covariance of the per-path legs.
    pub covariance: f64,
}

impl LegEstimate {
    pub fn value(&self, premium: f64) -> Estimate {
        let n = self.protection.paths as f64;
        let var = n * (self.protection.std_error.powi(2) - 2.0 * premium * self.covariance / n + premium * premium * self.annuity.std_error.powi(2));
        Estimate {
            mean: self.protection.mean - premium * self.annuity.mean,
            std_error: (var.max(0.0) / n).sqrt(),
            paths: self.protection.paths,
        }
    }

    /// Ratio estimate of the par spread with a delta-method error.
    pub fn par(&self) -> Result<Estimate> {
        if self.annuity.mean == 0.0 {
            return Err(Error::ZeroAnnuity);
        }
        let par = self.protection.mean / self.annuity.mean;
        let residual = self.value(par);
        Ok(Estimate {
            mean: par,
            std_error: residual.std_error / self.annuity.mean,
            paths: self.protection.paths,
        })
    }
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }
}

trait Accumulator: Default + Send {
    fn merge(&mut self, other: &Self);
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    x: Compensated,
    xx: Compensated,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.x.add(x);
        self.xx.add(x * x);
    }

    fn estimate(&self) -> Estimate {
        let n = self.n as f64;
        let mean = self.x.value() / n;
        let var = if self.n > 1 {
            ((self.xx.value() - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
            paths: self.n,
        }
    }
}

impl Accumulator for Moments {
    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.x.merge(&other.x);
        self.xx.merge(&other.xx);
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairMoments {
    p: Moments,
    a: Moments,
    pa: Compensated,
}

impl PairMoments {
    fn push(&mut self, p: f64, a: f64) {
        self.p.push(p);
        self.a.push(a);
        self.pa.add(p * a);
    }

    fn estimate(&self) -> LegEstimate {
        let n = self.p.n as f64;
        let protection = self.p.estimate();
        let annuity = self.a.estimate();
        let covariance = if self.p.n > 1 {
            (self.pa.value() - n * protection.mean * annuity.mean) / (n - 1.0)
        } else {
            0.0
        };
        LegEstimate {
            protection,
            annuity,
            covariance,
        }
    }
}

impl Accumulator for PairMoments {
    fn merge(&mut self, other: &Self) {
        self.p.merge(&other.p);
        self.a.merge(&other.a);
        self.pa.merge(&other.pa);
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    conditioned: u64,
    hits: u64,
}

impl Accumulator for Counts {
    fn merge(&mut self, other: &Self) {
        self.conditioned += other.conditioned;
        self.hits += other.hits;
    }
}

/// Generator for path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run<A, F>(sim: &SimConfig, per_path: F) -> Result<A>
where
    A: Accumulator,
    F: Fn(u64, &mut ChaCha8Rng, &mut A) -> Result<()> + Sync,
{
    sim.validate()?;
    let base = ChaCha8Rng::seed_from_u64(sim.seed);
    let batches = sim.paths.div_ceil(sim.batch);
    let parts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = A::default();
            let lo = b * sim.batch;
            let hi = (lo + sim.batch).min(sim.paths);
            for index in lo..hi {
                let mut rng = base.clone();
                rng.set_stream(index);
                per_path(index, &mut rng, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<A>>>()?;
    let mut total = A::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Marshall–Olkin frailty sampler: with `W ~ Gamma(1/α, 1)` and unit
/// exponentials `X_i`, `U_i = (1 + X_i / W)^{-1/α}` has the Clayton law.
#[derive(Debug, Clone)]
pub struct ClaytonSampler {
    dim: usize,
    frailty: Option<(Gamma<f64>, f64)>,
}

impl ClaytonSampler {
    pub fn new(copula: &CopulaSpec) -> Result<Self> {
        let frailty = if copula.is_dependent() {
            let alpha = copula.alpha();
            let gamma = Gamma::new(1.0 / alpha, 1.0).map_err(|e| invalid("alpha", e.to_string()))?;
            Some((gamma, alpha))
        } else {
            None
        };
        Ok(Self { dim: copula.dim(), frailty })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `-ln U_i`, which stays accurate where `U_i` would underflow.
    pub fn sample_neg_log<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match self.frailty {
            None => out.iter_mut().for_each(|o| *o = Exp1.sample(rng)),
            Some((gamma, alpha)) => {
                let w: f64 = gamma.sample(rng);
                for o in out.iter_mut() {
                    let x: f64 = Exp1.sample(rng);
                    *o = (x / w).ln_1p() / alpha;
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.sample_neg_log(rng, out);
        out.iter_mut().for_each(|o| *o = (-*o).exp());
    }
}

/// One draw of the uniforms of a Clayton copula (`alpha = 0` is independent).
pub fn sample_clayton<R: Rng + ?Sized>(alpha: f64, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = ClaytonSampler::new(&CopulaSpec::clayton(alpha, dim)?)?;
    let mut u = vec![0.0; dim];
    sampler.sample(rng, &mut u);
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefaultScenario {
    /// Default times, `+∞` when a party never defaults.
    pub tau: Vec<f64>,
    pub u: Vec<f64>,
}

fn has_tie(tau: &[f64]) -> bool {
    tau.iter()
        .enumerate()
        .any(|(i, a)| a.is_finite() && tau[i + 1..].iter().any(|b| a == b))
}

fn draw_times<R: Rng + ?Sized>(sampler: &ClaytonSampler, curves: &[MarginalCurve], rng: &mut R, tau: &mut [f64]) {
    for _ in 0..MAX_RESAMPLES {
        sampler.sample_neg_log(rng, tau);
        for (t, c) in tau.iter_mut().zip(curves) {
            *t = c.inverse_cumulative(*t);
        }
        if !has_tie(tau) {
            return;
        }
    }
}

/// Default times `τ^i = Γ_i^{-1}(-ln U_i)`; tied paths are redrawn.
pub fn sample_scenario<R: Rng + ?Sized>(model: &CreditModel, rng: &mut R) -> Result<DefaultScenario> {
    let sampler = ClaytonSampler::new(model.copula())?;
    let mut neg_log = vec![0.0; model.parties()];
    let mut tau = neg_log.clone();
    for _ in 0..MAX_RESAMPLES {
        sampler.sample_neg_log(rng, &mut neg_log);
        for ((t, e), c) in tau.iter_mut().zip(&neg_log).zip(model.curves()) {
            *t = c.inverse_cumulative(*e);
        }
        if !has_tie(&tau) {
            break;
        }
    }
    Ok(DefaultScenario {
        u: neg_log.iter().map(|e| (-e).exp()).collect(),
        tau,
    })
}

// ---------------------------------------------------------------------------
// Path integrals
// ---------------------------------------------------------------------------

/// Running sums carried along a path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct LegState {
    annuity: f64,
    /// Undiscounted by `1 - R⁰`.
    protection: f64,
    /// `L(s) = ∫₀ˢ ℓ`, the log-density of the path weight.
    log_density: f64,
    /// `∫₀ˢ h⁰`.
    h0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weighting {
    /// Copula measure reweighted by `e^{∫ Σ_{i∈S\{0}} h^i}`.
    SurvivalDensity,
    /// Survival measure directly, paths discounted by `e^{-∫h⁰}`.
    Direct,
}

/// Integrates `annuity = ∫ e^{L(s) - c's}` and `protection = ∫ e^{L(s) - c's} h⁰(s)`
/// along a path whose hazards change only at the defaults listed so far.
/// The default-free prefix is tabulated at cell ends, so a path only pays
/// for one partial cell plus its post-default segments.
struct PathEngine<'a> {
    copula: CopulaSpec,
    curves: &'a [MarginalCurve],
    survivors: SmallVec<[usize; 4]>,
    outside: SmallVec<[usize; 8]>,
    weighting: Weighting,
    discount: f64,
    maturity: f64,
    lgd: f64,
    breaks: Vec<f64>,
    panel: SpectralPanel,
    panel_width: f64,
    grid: Vec<f64>,
    states: Vec<LegState>,
}

fn survival_set(model: &CreditModel, deal: &DealSpec) -> Result<SmallVec<[usize; 4]>> {
    deal.validate()?;
    let n = model.parties();
    for p in [deal.buyer, deal.seller] {
        if p >= n {
            return Err(Error::UnknownParty(p));
        }
    }
    Ok(SmallVec::from_slice(&[0, deal.buyer, deal.seller]))
}

impl<'a> PathEngine<'a> {
    fn new(model: &'a CreditModel, deal: &DealSpec, weighting: Weighting, settings: &QuadratureSettings) -> Result<Self> {
        let survivors = survival_set(model, deal)?;
        let outside = (0..model.parties()).filter(|p| !survivors.contains(p)).collect();
        let curves = model.curves();
        let mut engine = Self {
            copula: *model.copula(),
            curves,
            survivors,
            outside,
            weighting,
            discount: deal.discount_rate(),
            maturity: deal.maturity,
            lgd: 1.0 - curves[0].recovery(),
            breaks: model.breakpoints(),
            panel: SpectralPanel::new(settings.order),
            panel_width: 4.0 * settings.cell,
            grid: vec![0.0],
            states: vec![LegState::default()],
        };
        let cells = panels(0.0, engine.maturity, &engine.breaks, engine.panel_width);
        let mut state = LegState::default();
        for (lo, hi) in cells {
            state = engine.advance(state, lo, hi, &[]);
            engine.grid.push(hi);
            engine.states.push(state);
        }
        Ok(engine)
    }

    /// `(ℓ(s), h⁰(s))` with the given defaults frozen.
    fn rates(&self, s: f64, frozen: &[(usize, f64)]) -> (f64, f64) {
        let h0 = clayton_hazard_unchecked(&self.copula, self.curves, s, 0, frozen);
        let ell = match self.weighting {
            Weighting::SurvivalDensity => self.survivors[1..]
                .iter()
                .map(|&i| clayton_hazard_unchecked(&self.copula, self.curves, s, i, frozen))
                .sum(),
            Weighting::Direct => -h0,
        };
        (ell, h0)
    }

    fn advance(&self, mut state: LegState, start: f64, stop: f64, frozen: &[(usize, f64)]) -> LegState {
        let n = self.panel.len();
        let mut ell: Scratch = SmallVec::from_elem(0.0, n);
        let mut h0: Scratch = SmallVec::from_elem(0.0, n);
        let mut run: Scratch = SmallVec::from_elem(0.0, n);
        for (lo, hi) in panels(start, stop, &self.breaks, self.panel_width) {
            for ((l, h), s) in ell.iter_mut().zip(h0.iter_mut()).zip(self.panel.nodes_on(lo, hi)) {
                (*l, *h) = self.rates(s, frozen);
            }
            self.panel.running_into(&ell, hi - lo, &mut run);
            let mut d_log = Compensated::default();
            let mut d_h0 = Compensated::default();
            for ((((s, w), r), l), h) in self.panel.nodes_on(lo, hi).zip(self.panel.weights_on(lo, hi)).zip(&run).zip(&ell).zip(&h0) {
                let df = w * (state.log_density + r - self.discount * s).exp();
                state.annuity += df;
                state.protection += df * h;
                d_log.add(w * l);
                d_h0.add(w * h);
            }
            state.log_density += d_log.value();
            state.h0 += d_h0.value();
        }
        state
    }

    /// State at `x` with no defaults outside `S` before `x`.
    fn prefix(&self, x: f64) -> LegState {
        let k = self.grid.partition_point(|&g| g <= x) - 1;
        if self.grid[k] == x {
            return self.states[k];
        }
        self.advance(self.states[k], self.grid[k], x, &[])
    }

    /// Path outcome given `(party, time)` defaults outside `S` in time order,
    /// and the end of the premium period.
    fn integrate(&self, contagion: &[(usize, f64)], end: f64) -> LegState {
        let first = contagion.first().map_or(end, |d| d.1);
        let mut state = self.prefix(first);
        for (j, &(_, start)) in contagion.iter().enumerate() {
            let stop = contagion.get(j + 1).map_or(end, |d| d.1);
            state = self.advance(state, start, stop, &contagion[..=j]);
        }
        state
    }

    fn evaluate(&self, tau: &[f64]) -> PathOutcome {
        let end = self.survivors.iter().map(|&i| tau[i]).fold(self.maturity, f64::min);
        let mut contagion: SmallVec<[(usize, f64); 8]> = self.outside.iter().filter(|&&k| tau[k] < end).map(|&k| (k, tau[k])).collect();
        contagion.sort_by(|a, b| a.1.total_cmp(&b.1));
        let state = self.integrate(&contagion, end);
        let survived = self.survivors.iter().all(|&i| tau[i] > self.maturity);
        PathOutcome {
            protection: self.lgd * state.protection,
            annuity: state.annuity,
            mass: if survived { (state.log_density + state.h0).exp() } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PathOutcome {
    protection: f64,
    annuity: f64,
    /// `1_{τ_S > T} e^{∫₀ᵀ Σ_{i∈S} h^i}`.
    mass: f64,
}

fn check_outcome(index: u64, o: &PathOutcome) -> Result<()> {
    if o.protection.is_finite() && o.annuity.is_finite() && o.mass.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteWeight { path: index })
    }
}

// ---------------------------------------------------------------------------
// Price estimators
// ---------------------------------------------------------------------------

/// Legs of the perfectly collateralized trade between `deal.buyer` and
/// `deal.seller`, estimated under the copula measure with the density of
/// the survival measure as path weight.
pub fn mc_price_weighted(model: &CreditModel, deal: &DealSpec, sim: &SimConfig, settings: &QuadratureSettings) -> Result<LegEstimate> {
    let engine = PathEngine::new(model, deal, Weighting::SurvivalDensity, settings)?;
    let sampler = ClaytonSampler::new(model.copula())?;
    let n = model.parties();
    let acc: PairMoments = run(sim, |index, rng, acc: &mut PairMoments| {
        let mut tau: Scratch = SmallVec::from_elem(0.0, n);
        draw_times(&sampler, model.curves(), rng, &mut tau);
        let o = engine.evaluate(&tau);
        check_outcome(index, &o)?;
        acc.push(o.protection, o.annuity);
        Ok(())
    })?;
    Ok(acc.estimate())
}

/// `V₀ + V₀^{B2B}` at `premium` with both trades evaluated on the same paths.
pub fn mc_b2b_gap(model: &CreditModel, deal: &DealSpec, premium: f64, sim: &SimConfig, settings: &QuadratureSettings) -> Result<Estimate> {
    if model.parties() != 4 || deal.buyer != 1 {
        return Err(invalid("parties", "the back-to-back trade needs four parties with investor 1"));
    }
    let bought = PathEngine::new(model, &deal.with_seller(2), Weighting::SurvivalDensity, settings)?;
    let sold = PathEngine::new(model, &deal.with_seller(3), Weighting::SurvivalDensity, settings)?;
    let sampler = ClaytonSampler::new(model.copula())?;
    let acc: Moments = run(sim, |index, rng, acc: &mut Moments| {
        let mut tau: Scratch = SmallVec::from_elem(0.0, 4);
        draw_times(&sampler, model.curves(), rng, &mut tau);
        let (b, s) = (bought.evaluate(&tau), sold.evaluate(&tau));
        check_outcome(index, &b)?;
        check_outcome(index, &s)?;
        acc.push((b.protection - premium * b.annuity) - (s.protection - premium * s.annuity));
        Ok(())
    })?;
    Ok(acc.estimate())
}

/// `E^Q[1_{τ_S > T} e^{∫₀ᵀ Σ_{i∈S} h^i}]`, which is one.
pub fn mc_density_mass(model: &CreditModel, deal: &DealSpec, sim: &SimConfig, settings: &QuadratureSettings) -> Result<Estimate> {
    let engine = PathEngine::new(model, deal, Weighting::SurvivalDensity, settings)?;
    let sampler = ClaytonSampler::new(model.copula())?;
    let n = model.parties();
    let acc: Moments = run(sim, |index, rng, acc: &mut Moments| {
        let mut tau: Scratch = SmallVec::from_elem(0.0, n);
        draw_times(&sampler, model.curves(), rng, &mut tau);
        let o = engine.evaluate(&tau);
        check_outcome(index, &o)?;
        acc.push(o.mass);
        Ok(())
    })?;
    Ok(acc.estimate())
}

/// Legs simulated directly under the survival measure when exactly one
/// party `k` is outside `S`: only `τ^k` is drawn, by inverting
/// `∫₀^τ h^k_∅ = E` with `E ~ Exp(1)`.
pub fn mc_price_survival_measure(model: &CreditModel, deal: &DealSpec, sim: &SimConfig, settings: &QuadratureSettings) -> Result<LegEstimate> {
    let engine = PathEngine::new(model, deal, Weighting::Direct, settings)?;
    let k = match engine.outside[..] {
        [k] => k,
        _ => return Err(invalid("parties", "needs exactly one party outside the survival set")),
    };
    let copula = *model.copula();
    let curves = model.curves();
    let entry = RunningIntegral::new(
        move |t: f64| clayton_hazard_unchecked(&copula, curves, t, k, &[]),
        0.0,
        deal.maturity,
        &engine.breaks,
        settings.cell,
        settings.order,
    );
    let acc: PairMoments = run(sim, |index, rng, acc: &mut PairMoments| {
        let e: f64 = Exp1.sample(rng);
        let state = match entry.inverse(e) {
            Some(tau) if tau < engine.maturity => engine.integrate(&[(k, tau)], engine.maturity),
            _ => engine.integrate(&[], engine.maturity),
        };
        let o = PathOutcome {
            protection: engine.lgd * state.protection,
            annuity: state.annuity,
            mass: 1.0,
        };
        check_outcome(index, &o)?;
        acc.push(o.protection, o.annuity);
        Ok(())
    })?;
    Ok(acc.estimate())
}

// ---------------------------------------------------------------------------
// Binned hazards and joint law
// ---------------------------------------------------------------------------

/// Conditioning event and bin for a hazard-rate frequency estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardBin {
    pub party: usize,
    pub time: f64,
    pub width: f64,
    /// Parties required alive at `time` (the target party always is).
    pub alive: Vec<usize>,
    /// Parties required to default inside `(lo, hi]`.
    pub defaulted: Vec<(usize, f64, f64)>,
}

impl HazardBin {
    /// Everybody alive at `time`.
    pub fn all_alive(party: usize, time: f64, width: f64, parties: usize) -> Self {
        Self {
            party,
            time,
            width,
            alive: (0..parties).collect(),
            defaulted: Vec::new(),
        }
    }

    fn validate(&self, parties: usize) -> Result<()> {
        let all = self.alive.iter().chain(self.defaulted.iter().map(|d| &d.0)).chain([&self.party]);
        if let Some(&p) = all.clone().find(|&&p| p >= parties) {
            return Err(Error::UnknownParty(p));
        }
        if let Some(&(p, _, _)) = self.defaulted.iter().find(|d| d.0 == self.party || self.alive.contains(&d.0)) {
            return Err(Error::PartyDefaulted(p));
        }
        if !(self.width > 0.0 && self.time >= 0.0) {
            return Err(invalid("bin", "needs time >= 0 and width > 0"));
        }
        for &(_, lo, hi) in &self.defaulted {
            if !(lo < hi && hi <= self.time) {
                return Err(Error::TimeOrder { start: lo, end: hi });
            }
        }
        Ok(())
    }

    fn conditioned(&self, tau: &[f64]) -> bool {
        tau[self.party] > self.time
            && self.alive.iter().all(|&i| tau[i] > self.time)
            && self.defaulted.iter().all(|&(i, lo, hi)| tau[i] > lo && tau[i] <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedHazard {
    pub estimate: Estimate,
    pub conditioned: u64,
    pub hits: u64,
}

/// `P(τ^i ∈ (t, t+dt] | conditioning) / dt` with a binomial standard error.
pub fn mc_hazard_binned(model: &CreditModel, bin: &HazardBin, sim: &SimConfig) -> Result<BinnedHazard> {
    bin.validate(model.parties())?;
    let sampler = ClaytonSampler::new(model.copula())?;
    let n = model.parties();
    let counts: Counts = run(sim, |_, rng, acc: &mut Counts| {
        let mut tau: Scratch = SmallVec::from_elem(0.0, n);
        draw_times(&sampler, model.curves(), rng, &mut tau);
        if bin.conditioned(&tau) {
            acc.conditioned += 1;
            if tau[bin.party] <= bin.time + bin.width {
                acc.hits += 1;
            }
        }
        Ok(())
    })?;
    if counts.conditioned == 0 {
        return Err(Error::InsufficientPaths {
            hits: counts.hits,
            paths: sim.paths,
        });
    }
    let m = counts.conditioned as f64;
    let p = counts.hits as f64 / m;
    Ok(BinnedHazard {
        estimate: Estimate {
            mean: p / bin.width,
            std_error: (p * (1.0 - p) / m).sqrt() / bin.width,
            paths: sim.paths,
        },
        conditioned: counts.conditioned,
        hits: counts.hits,
    })
}

/// Empirical `P(U ≤ u)` for the copula sampler.
pub fn mc_joint_cdf(copula: &CopulaSpec, u: &[f64], sim: &SimConfig) -> Result<Estimate> {
    if u.len() != copula.dim() {
        return Err(Error::DimensionMismatch {
            expected: copula.dim(),
            got: u.len(),
        });
    }
    let sampler = ClaytonSampler::new(copula)?;
    let thresholds: Scratch = u.iter().map(|&x| -x.ln()).collect();
    let counts: Counts = run(sim, |_, rng, acc: &mut Counts| {
        let mut e: Scratch = SmallVec::from_elem(0.0, thresholds.len());
        sampler.sample_neg_log(rng, &mut e);
        acc.conditioned += 1;
        if e.iter().zip(&thresholds).all(|(x, t)| x >= t) {
            acc.hits += 1;
        }
        Ok(())
    })?;
    let n = counts.conditioned as f64;
    let p = counts.hits as f64 / n;
    Ok(Estimate {
        mean: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        paths: counts.conditioned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(alpha: f64) -> CreditModel {
        let curves = [0.02, 0.01, 0.012]
            .iter()
            .map(|&s| MarginalCurve::from_effective_spread(s, 0.4).unwrap())
            .collect();
        CreditModel::clayton(alpha, curves).unwrap()
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut c = Compensated::default();
        c.add(1e16);
        for _ in 0..10 {
            c.add(1.0);
        }
        c.add(-1e16);
        assert_eq!(c.value(), 10.0);
    }

    #[test]
    fn streams_differ_by_index() {
        let a: u64 = path_rng(7, 0).random();
        let b: u64 = path_rng(7, 1).random();
        let again: u64 = path_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, again);
    }

    #[test]
    fn independent_sampler_gives_exponentials() {
        let s = ClaytonSampler::new(&CopulaSpec::product(3).unwrap()).unwrap();
        let mut rng = path_rng(1, 0);
        let mut e = [0.0; 3];
        let mut total = 0.0;
        for _ in 0..20_000 {
            s.sample_neg_log(&mut rng, &mut e);
            total += e.iter().sum::<f64>();
        }
        assert!((total / 60_000.0 - 1.0).abs() < 0.03);
    }

    #[test]
    fn tie_detection() {
        assert!(has_tie(&[1.0, 2.0, 1.0]));
        assert!(!has_tie(&[1.0, f64::INFINITY, f64::INFINITY]));
    }

    #[test]
    fn scenario_times_follow_marginals() {
        let m = fig1(2.0);
        let mut rng = path_rng(3, 9);
        let sc = sample_scenario(&m, &mut rng).unwrap();
        for (i, (&t, &u)) in sc.tau.iter().zip(&sc.u).enumerate() {
            let back = (-m.curve(i).cumulative(t)).exp();
            assert!((back - u).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_three_party_engine() {
        // with no outside party every path value is a table lookup
        let m = fig1(1.0);
        let deal = DealSpec::new(0.01, 5.0);
        let e = PathEngine::new(&m, &deal, Weighting::SurvivalDensity, &QuadratureSettings::default()).unwrap();
        let survive = e.evaluate(&[9.0, 8.0, 7.0]);
        let cut = e.evaluate(&[9.0, 2.0, 7.0]);
        assert!(survive.mass > 1.0);
        assert_eq!(cut.mass, 0.0);
        assert!(cut.annuity < survive.annuity);
    }

    #[test]
    fn binned_requires_conditioning_mass() {
        let m = fig1(1.0);
        let bin = HazardBin {
            party: 0,
            time: 1.0,
            width: 0.01,
            alive: vec![1, 2],
            defaulted: vec![(1, 0.5, 0.6)],
        };
        assert!(matches!(mc_hazard_binned(&m, &bin, &SimConfig::new(10, 1)), Err(Error::PartyDefaulted(1))));
        let tiny = HazardBin {
            party: 0,
            time: 1.0,
            width: 0.01,
            alive: vec![2],
            defaulted: vec![(1, 0.5, 0.5 + 1e-12)],
        };
        assert!(matches!(
            mc_hazard_binned(&m, &tiny, &SimConfig::new(100, 1)),
            Err(Error::InsufficientPaths { .. })
        ));
    }

    #[test]
    fn empty_simulation_rejected() {
        assert!(SimConfig::new(0, 1).validate().is_err());
        assert!(SimConfig::new(1, 1).with_batch(0).validate().is_err());
    }
}
