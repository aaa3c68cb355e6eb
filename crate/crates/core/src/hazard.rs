//! Conditional survival probabilities and default intensities implied by a
//! copula over marginal default times.
//!
//! Default times are `τ^i = inf{t : γ^i(t) <= U^i}` with `U ~ C`, so the
//! joint survival function is `C(γ^0(t_0), ..., γ^n(t_n))`. Given the
//! realized defaults `D` (with times `τ^D`) and survivors at `t`, party `i`
//! has intensity
//!
//! ```text
//! h^i(t) = λ^i(t) γ^i(t) ∂_i ∂_D C(γ^{alive}(t), γ^D(τ^D)) / ∂_D C(…)
//! ```
//!
//! Under a survival measure for the set `S`, the members of `S` never
//! default, so only defaults outside `S` may be recorded and the same
//! ratio gives the survival-measure intensity.

use std::collections::BTreeSet;

use smallvec::SmallVec;

use crate::copula::CopulaSpec;
use crate::curve::MarginalCurve;
use crate::error::{invalid, Error, Result};

/// Largest number of parties outside the survival set.
pub const MAX_CONTAGION_PARTIES: usize = 12;

/// Copula plus one marginal curve per party.
#[derive(Debug, Clone)]
pub struct CreditModel {
    copula: CopulaSpec,
    curves: Vec<MarginalCurve>,
}

impl CreditModel {
    pub fn new(copula: CopulaSpec, curves: Vec<MarginalCurve>) -> Result<Self> {
        if copula.dim() != curves.len() {
            return Err(Error::DimensionMismatch {
                expected: copula.dim(),
                got: curves.len(),
            });
        }
        Ok(Self { copula, curves })
    }

    /// Clayton model; `α` below the product threshold behaves as independence.
    pub fn clayton(alpha: f64, curves: Vec<MarginalCurve>) -> Result<Self> {
        let copula = CopulaSpec::clayton(alpha, curves.len())?;
        Self::new(copula, curves)
    }

    pub fn copula(&self) -> &CopulaSpec {
        &self.copula
    }

    pub fn curves(&self) -> &[MarginalCurve] {
        &self.curves
    }

    pub fn curve(&self, party: usize) -> &MarginalCurve {
        &self.curves[party]
    }

    pub fn parties(&self) -> usize {
        self.curves.len()
    }

    /// Every intensity breakpoint of every party, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.curves.iter().flat_map(|c| c.knots().iter().cloned()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        all
    }

    fn check_party(&self, i: usize) -> Result<()> {
        if i >= self.parties() {
            Err(Error::UnknownParty(i))
        } else {
            Ok(())
        }
    }
}

/// Evaluate a quantity at a default time using the post-default (right)
/// limit or the pre-default (left) limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Limit {
    #[default]
    Right,
    Left,
}

/// Realized defaults up to `clock`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioState {
    clock: f64,
    defaults: SmallVec<[(usize, f64); 4]>,
}

impl ScenarioState {
    /// Everyone alive at `clock`.
    pub fn alive_at(clock: f64) -> Result<Self> {
        Self::new(clock, &[])
    }

    pub fn new(clock: f64, defaults: &[(usize, f64)]) -> Result<Self> {
        if !(clock >= 0.0) {
            return Err(Error::NegativeTime(clock));
        }
        let mut sorted: SmallVec<[(usize, f64); 4]> = defaults.iter().cloned().collect();
        sorted.sort_by_key(|a| a.0);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Scenario(format!("party {} defaults twice", w[0].0)));
            }
        }
        for &(party, tau) in &sorted {
            if !(tau >= 0.0) {
                return Err(Error::Scenario(format!("party {party} has negative default time {tau}")));
            }
            if tau > clock {
                return Err(Error::Scenario(format!("party {party} defaults at {tau}, after the clock {clock}")));
            }
        }
        let mut times: SmallVec<[f64; 4]> = sorted.iter().map(|d| d.1).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if times.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Scenario("simultaneous defaults are not allowed".into()));
        }
        Ok(Self {
            clock,
            defaults: sorted,
        })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// `(party, default time)` pairs sorted by party.
    pub fn defaults(&self) -> &[(usize, f64)] {
        &self.defaults
    }

    pub fn default_time(&self, party: usize) -> Option<f64> {
        self.defaults.iter().find(|d| d.0 == party).map(|d| d.1)
    }

    pub fn is_alive(&self, party: usize) -> bool {
        self.default_time(party).is_none()
    }

    /// Same defaults, clock moved to `clock`.
    pub fn with_clock(&self, clock: f64) -> Result<Self> {
        Self::new(clock, &self.defaults)
    }

    /// Adds a default at the current clock.
    pub fn with_default(&self, party: usize) -> Result<Self> {
        let mut d: Vec<(usize, f64)> = self.defaults.to_vec();
        d.push((party, self.clock));
        Self::new(self.clock, &d)
    }

    fn check_against(&self, model: &CreditModel) -> Result<()> {
        for &(p, _) in &self.defaults {
            model.check_party(p)?;
        }
        Ok(())
    }
}

/// Parties held alive by a survival measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalSet {
    members: BTreeSet<usize>,
}

impl SurvivalSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self {
            members: members.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            members: BTreeSet::new(),
        }
    }

    pub fn contains(&self, party: usize) -> bool {
        self.members.contains(&party)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().cloned()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Parties of an `n`-party model outside the set.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|p| !self.members.contains(p)).collect()
    }
}

// ---------------------------------------------------------------------------
// Core evaluation
// ---------------------------------------------------------------------------

/// Copula arguments at `clock` and the effective default set.
fn arguments(
    model: &CreditModel,
    clock: f64,
    defaults: &[(usize, f64)],
    limit: Limit,
) -> (SmallVec<[f64; 8]>, SmallVec<[usize; 4]>) {
    let mut u: SmallVec<[f64; 8]> = model.curves.iter().map(|c| (-c.cumulative(clock)).exp()).collect();
    let mut d: SmallVec<[usize; 4]> = SmallVec::new();
    for &(p, tau) in defaults {
        if limit == Limit::Left && tau >= clock {
            // not yet happened from the left
            continue;
        }
        u[p] = (-model.curves[p].cumulative(tau)).exp();
        d.push(p);
    }
    (u, d)
}

fn ln_subset(copula: &CopulaSpec, u: &[f64], d: &[usize]) -> f64 {
    if d.is_empty() {
        copula.ln_c_unchecked(u)
    } else {
        copula.ln_subset_partial_unchecked(u, d)
    }
}

/// Unchecked intensity of `i` at `clock` given recorded `defaults`.
pub(crate) fn hazard_unchecked(model: &CreditModel, clock: f64, defaults: &[(usize, f64)], i: usize, limit: Limit) -> f64 {
    let curve = &model.curves[i];
    let lambda = match limit {
        Limit::Right => curve.intensity(clock),
        Limit::Left => curve.rates()[curve.knots().partition_point(|&k| k < clock)],
    };
    if lambda == 0.0 {
        return 0.0;
    }
    let (u, d) = arguments(model, clock, defaults, limit);
    let mut di: SmallVec<[usize; 4]> = d.clone();
    di.push(i);
    let ln_ratio = model.copula.ln_subset_partial_unchecked(&u, &di) - ln_subset(&model.copula, &u, &d);
    lambda * (u[i].ln() + ln_ratio).exp()
}

fn require_alive(state: &ScenarioState, i: usize) -> Result<()> {
    if state.is_alive(i) {
        Ok(())
    } else {
        Err(Error::PartyDefaulted(i))
    }
}

/// `Q^i(t, T)`: probability that `i` survives to `T` given the scenario at `t`.
pub fn conditional_survival(model: &CreditModel, state: &ScenarioState, i: usize, maturity: f64) -> Result<f64> {
    model.check_party(i)?;
    state.check_against(model)?;
    require_alive(state, i)?;
    let t = state.clock();
    if maturity < t {
        return Err(Error::TimeOrder { start: t, end: maturity });
    }
    let (den_u, d) = arguments(model, t, state.defaults(), Limit::Right);
    let mut num_u = den_u.clone();
    num_u[i] = (-model.curves[i].cumulative(maturity)).exp();
    let ln = ln_subset(&model.copula, &num_u, &d) - ln_subset(&model.copula, &den_u, &d);
    Ok(ln.exp())
}

/// Intensity of party `i` under the original measure given the scenario.
pub fn q_hazard(model: &CreditModel, state: &ScenarioState, i: usize) -> Result<f64> {
    q_hazard_with(model, state, i, Limit::Right)
}

pub fn q_hazard_with(model: &CreditModel, state: &ScenarioState, i: usize, limit: Limit) -> Result<f64> {
    model.check_party(i)?;
    state.check_against(model)?;
    require_alive(state, i)?;
    Ok(hazard_unchecked(model, state.clock(), state.defaults(), i, limit))
}

/// Intensity of party `i` under the survival measure of `survival`.
pub fn survival_measure_hazard(
    model: &CreditModel,
    state: &ScenarioState,
    survival: &SurvivalSet,
    i: usize,
) -> Result<f64> {
    survival_measure_hazard_with(model, state, survival, i, Limit::Right)
}

pub fn survival_measure_hazard_with(
    model: &CreditModel,
    state: &ScenarioState,
    survival: &SurvivalSet,
    i: usize,
    limit: Limit,
) -> Result<f64> {
    model.check_party(i)?;
    state.check_against(model)?;
    for m in survival.members() {
        model.check_party(m)?;
    }
    let outside = model.parties() - survival.len();
    if outside > MAX_CONTAGION_PARTIES {
        return Err(Error::TooManyContagionParties {
            count: outside,
            max: MAX_CONTAGION_PARTIES,
        });
    }
    if let Some(&(p, _)) = state.defaults().iter().find(|(p, _)| survival.contains(*p)) {
        return Err(Error::SurvivalContradiction(p));
    }
    require_alive(state, i)?;
    // Of the indicator products over subsets of the complement, only the
    // subset equal to the realized default set is non-zero.
    Ok(hazard_unchecked(model, state.clock(), state.defaults(), i, limit))
}

// ---------------------------------------------------------------------------
// Clayton closed forms
// ---------------------------------------------------------------------------

/// Clayton intensity of `party` at `t` with the parties in `defaults`
/// frozen at their default times:
/// `λ(t) (1 + kα) (C / γ^party(t))^α` with `k = |defaults|`.
pub fn clayton_hazard(alpha: f64, curves: &[MarginalCurve], t: f64, party: usize, defaults: &[(usize, f64)]) -> Result<f64> {
    let copula = CopulaSpec::clayton(alpha, curves.len())?;
    if party >= curves.len() {
        return Err(Error::UnknownParty(party));
    }
    for &(p, tau) in defaults {
        if p >= curves.len() {
            return Err(Error::UnknownParty(p));
        }
        if p == party {
            return Err(Error::PartyDefaulted(p));
        }
        if tau > t {
            return Err(invalid("tau", format!("default time {tau} is after t = {t}")));
        }
    }
    Ok(clayton_hazard_unchecked(&copula, curves, t, party, defaults))
}

pub(crate) fn clayton_hazard_unchecked(
    copula: &CopulaSpec,
    curves: &[MarginalCurve],
    t: f64,
    party: usize,
    defaults: &[(usize, f64)],
) -> f64 {
    let lambda = curves[party].intensity(t);
    if !copula.is_dependent() {
        return lambda;
    }
    let alpha = copula.alpha();
    let mut u: SmallVec<[f64; 8]> = curves.iter().map(|c| (-c.cumulative(t)).exp()).collect();
    for &(p, tau) in defaults {
        u[p] = (-curves[p].cumulative(tau)).exp();
    }
    let ln_c = copula.ln_c_unchecked(&u);
    let jump = 1.0 + defaults.len() as f64 * alpha;
    lambda * jump * (alpha * (ln_c + curves[party].cumulative(t))).exp()
}

/// Reference-entity intensity in the three-party case.
pub fn clayton_h0_3party(alpha: f64, curves: &[MarginalCurve], t: f64) -> Result<f64> {
    if curves.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: curves.len() });
    }
    clayton_hazard(alpha, curves, t, 0, &[])
}

/// Reference-entity intensity in the four-party case, with party 3 either
/// alive (`tau3 = None`) or defaulted at `tau3 <= t`.
pub fn clayton_h0_4party(alpha: f64, curves: &[MarginalCurve], t: f64, tau3: Option<f64>) -> Result<f64> {
    if curves.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: curves.len() });
    }
    match tau3 {
        None => clayton_hazard(alpha, curves, t, 0, &[]),
        Some(tau) => clayton_hazard(alpha, curves, t, 0, &[(3, tau)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1_curves() -> Vec<MarginalCurve> {
        [0.02, 0.01, 0.012]
            .iter()
            .map(|&s| MarginalCurve::from_effective_spread(s, 0.4).unwrap())
            .collect()
    }

    fn fig2_curves() -> Vec<MarginalCurve> {
        [0.02, 0.003, 0.015, 0.0075]
            .iter()
            .map(|&s| MarginalCurve::from_effective_spread(s, 0.4).unwrap())
            .collect()
    }

    #[test]
    fn conditional_survival_no_defaults_at_zero_is_marginal() {
        let m = CreditModel::clayton(2.0, fig1_curves()).unwrap();
        let s = ScenarioState::alive_at(0.0).unwrap();
        for i in 0..3 {
            let q = conditional_survival(&m, &s, i, 7.0).unwrap();
            assert_relative_eq!(q, m.curve(i).survival(7.0).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn conditional_survival_product_factorizes() {
        let m = CreditModel::new(CopulaSpec::product(3).unwrap(), fig1_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(2, 1.0)]).unwrap();
        let q = conditional_survival(&m, &s, 0, 5.0).unwrap();
        let g = m.curve(0);
        assert_relative_eq!(q, g.survival(5.0).unwrap() / g.survival(2.0).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn conditional_survival_is_one_at_clock_and_decreasing() {
        let m = CreditModel::clayton(2.0, fig1_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(2, 1.0)]).unwrap();
        assert_relative_eq!(conditional_survival(&m, &s, 0, 2.0).unwrap(), 1.0, max_relative = 1e-14);
        let mut prev = 1.0;
        for k in 1..40 {
            let q = conditional_survival(&m, &s, 0, 2.0 + k as f64 * 0.5).unwrap();
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn conditional_survival_errors() {
        let m = CreditModel::clayton(2.0, fig1_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(2, 1.0)]).unwrap();
        assert_eq!(conditional_survival(&m, &s, 2, 5.0), Err(Error::PartyDefaulted(2)));
        assert!(matches!(conditional_survival(&m, &s, 0, 1.0), Err(Error::TimeOrder { .. })));
    }

    #[test]
    fn hazard_is_log_derivative_of_conditional_survival() {
        let m = CreditModel::clayton(1.5, fig2_curves()).unwrap();
        for state in [
            ScenarioState::alive_at(3.0).unwrap(),
            ScenarioState::new(3.0, &[(3, 1.2)]).unwrap(),
            ScenarioState::new(3.0, &[(3, 1.2), (2, 2.5)]).unwrap(),
        ] {
            let h = 1e-5;
            let t = state.clock();
            let q = |big_t: f64| conditional_survival(&m, &state, 0, big_t).unwrap().ln();
            let fd = -(q(t + h) - q(t)) / h;
            let fd2 = -(q(t + 2.0 * h) - q(t)) / (2.0 * h);
            let richardson = 2.0 * fd - fd2;
            assert_relative_eq!(q_hazard(&m, &state, 0).unwrap(), richardson, max_relative = 1e-5);
        }
    }

    #[test]
    fn product_hazard_is_marginal() {
        let m = CreditModel::new(CopulaSpec::product(4).unwrap(), fig2_curves()).unwrap();
        let s = ScenarioState::new(3.0, &[(3, 1.0)]).unwrap();
        let sv = SurvivalSet::new([0, 1, 2]);
        for i in 0..3 {
            assert_relative_eq!(q_hazard(&m, &s, i).unwrap(), m.curve(i).intensity(3.0), max_relative = 1e-14);
            assert_relative_eq!(survival_measure_hazard(&m, &s, &sv, i).unwrap(), m.curve(i).intensity(3.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn hazard_at_origin_is_marginal() {
        for alpha in [0.1, 1.0, 5.0] {
            let m = CreditModel::clayton(alpha, fig1_curves()).unwrap();
            let s = ScenarioState::alive_at(0.0).unwrap();
            assert_relative_eq!(q_hazard(&m, &s, 0).unwrap(), m.curve(0).intensity(0.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn first_default_multiplies_hazard_by_one_plus_alpha() {
        let alpha = 2.0;
        let m = CreditModel::clayton(alpha, fig1_curves()).unwrap();
        let s = ScenarioState::new(1.7, &[(2, 1.7)]).unwrap();
        let right = q_hazard_with(&m, &s, 0, Limit::Right).unwrap();
        let left = q_hazard_with(&m, &s, 0, Limit::Left).unwrap();
        assert_relative_eq!(right, (1.0 + alpha) * left, max_relative = 1e-12);
    }

    #[test]
    fn kth_default_multiplier() {
        let alpha = 0.7;
        let m = CreditModel::clayton(alpha, fig2_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(3, 0.5), (2, 2.0)]).unwrap();
        let right = q_hazard_with(&m, &s, 0, Limit::Right).unwrap();
        let left = q_hazard_with(&m, &s, 0, Limit::Left).unwrap();
        assert_relative_eq!(right / left, (1.0 + 2.0 * alpha) / (1.0 + alpha), max_relative = 1e-12);
    }

    #[test]
    fn survival_measure_collapses_to_q_hazard() {
        let m = CreditModel::clayton(1.3, fig2_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(3, 0.5), (1, 1.5)]).unwrap();
        let empty = SurvivalSet::empty();
        for i in [0, 2] {
            assert_eq!(
                survival_measure_hazard(&m, &s, &empty, i).unwrap(),
                q_hazard(&m, &s, i).unwrap()
            );
        }
    }

    #[test]
    fn survival_measure_rejects_default_inside_set() {
        let m = CreditModel::clayton(1.3, fig2_curves()).unwrap();
        let s = ScenarioState::new(2.0, &[(2, 0.5)]).unwrap();
        let sv = SurvivalSet::new([0, 1, 2]);
        assert_eq!(survival_measure_hazard(&m, &s, &sv, 0), Err(Error::SurvivalContradiction(2)));
    }

    #[test]
    fn contagion_party_cap() {
        let curves: Vec<_> = (0..15).map(|_| MarginalCurve::flat(0.01, 0.4).unwrap()).collect();
        let m = CreditModel::clayton(1.0, curves).unwrap();
        let s = ScenarioState::alive_at(1.0).unwrap();
        assert!(matches!(
            survival_measure_hazard(&m, &s, &SurvivalSet::new([0, 1]), 0),
            Err(Error::TooManyContagionParties { count: 13, .. })
        ));
        assert!(survival_measure_hazard(&m, &s, &SurvivalSet::new([0, 1, 2]), 0).is_ok());
    }

    #[test]
    fn three_party_closed_form() {
        let curves = fig1_curves();
        let m = CreditModel::clayton(1.0, curves.clone()).unwrap();
        let sv = SurvivalSet::new([0, 1, 2]);
        let t = 5.0;
        let closed = clayton_h0_3party(1.0, &curves, t).unwrap();
        let s = ScenarioState::alive_at(t).unwrap();
        assert_relative_eq!(closed, survival_measure_hazard(&m, &s, &sv, 0).unwrap(), max_relative = 1e-12);
        // direct form λ γ ∂_0 C / C
        let u: Vec<f64> = curves.iter().map(|c| c.survival(t).unwrap()).collect();
        let direct = curves[0].intensity(t) * u[0] * m.copula().partial(&u, 0).unwrap() / m.copula().evaluate(&u).unwrap();
        assert_relative_eq!(closed, direct, max_relative = 1e-12);
        assert!(closed < curves[0].intensity(t));
    }

    #[test]
    fn closed_form_limits() {
        let curves = fig1_curves();
        assert_eq!(clayton_h0_3party(0.0, &curves, 4.0).unwrap(), curves[0].intensity(4.0));
        assert_relative_eq!(clayton_h0_3party(3.0, &curves, 0.0).unwrap(), curves[0].intensity(0.0), max_relative = 1e-15);
        let c4 = fig2_curves();
        assert!(clayton_h0_4party(1.0, &c4, 1.0, Some(2.0)).is_err());
        assert!(clayton_h0_3party(1.0, &c4, 1.0).is_err());
    }

    #[test]
    fn four_party_post_default_matches_frozen_generic() {
        let alpha = 1.7;
        let curves = fig2_curves();
        let m = CreditModel::clayton(alpha, curves.clone()).unwrap();
        let sv = SurvivalSet::new([0, 1, 2]);
        let s = ScenarioState::new(3.0, &[(3, 2.0)]).unwrap();
        let generic = survival_measure_hazard(&m, &s, &sv, 0).unwrap();
        assert_relative_eq!(clayton_h0_4party(alpha, &curves, 3.0, Some(2.0)).unwrap(), generic, max_relative = 1e-12);
        // (1+α) × the pre-default expression with γ³ frozen at γ³(τ³)
        let u = [
            curves[0].survival(3.0).unwrap(),
            curves[1].survival(3.0).unwrap(),
            curves[2].survival(3.0).unwrap(),
            curves[3].survival(2.0).unwrap(),
        ];
        let c = m.copula().evaluate(&u).unwrap();
        let frozen = curves[0].intensity(3.0) * (c / u[0]).powf(alpha);
        assert_relative_eq!(generic, (1.0 + alpha) * frozen, max_relative = 1e-12);
    }

    #[test]
    fn scenario_validation() {
        assert!(ScenarioState::new(1.0, &[(1, 2.0)]).is_err());
        assert!(ScenarioState::new(3.0, &[(1, 2.0), (1, 1.0)]).is_err());
        assert!(ScenarioState::new(3.0, &[(1, 2.0), (2, 2.0)]).is_err());
        assert!(ScenarioState::new(-1.0, &[]).is_err());
        let m = CreditModel::clayton(1.0, fig1_curves()).unwrap();
        let s = ScenarioState::new(3.0, &[(7, 2.0)]).unwrap();
        assert_eq!(q_hazard(&m, &s, 0), Err(Error::UnknownParty(7)));
    }

    #[test]
    fn piecewise_intensity_left_and_right() {
        let mut curves = fig1_curves();
        curves[0] = MarginalCurve::piecewise(vec![2.0], vec![0.01, 0.03], 0.4).unwrap();
        let m = CreditModel::new(CopulaSpec::product(3).unwrap(), curves).unwrap();
        let s = ScenarioState::alive_at(2.0).unwrap();
        assert_eq!(q_hazard_with(&m, &s, 0, Limit::Right).unwrap(), 0.03);
        assert_eq!(q_hazard_with(&m, &s, 0, Limit::Left).unwrap(), 0.01);
    }
}
