mod common;

use common::*;
use contagion_core::copula::CopulaSpec;
use contagion_core::curve::MarginalCurve;
use contagion_core::hazard::{survival_measure_hazard, CreditModel, ScenarioState, SurvivalSet};
use contagion_core::mc::*;
use contagion_core::pricer::*;

const SEED: u64 = 20_110_601;

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

// ---------------------------------------------------------------------------
// Sampler

fn pairs(alpha: f64, n: u64) -> Vec<(f64, f64)> {
    let sampler = ClaytonSampler::new(&CopulaSpec::clayton(alpha, 2).unwrap()).unwrap();
    let mut u = [0.0; 2];
    (0..n)
        .map(|i| {
            sampler.sample(&mut path_rng(SEED, i), &mut u);
            (u[0], u[1])
        })
        .collect()
}

#[test]
fn kendall_tau_independent() {
    let tau = kendall_tau(&mut pairs(0.0, 1_000_000));
    assert!(tau.abs() <= 0.003, "tau {tau}");
}

#[test]
fn kendall_tau_matches_clayton() {
    let tau = kendall_tau(&mut pairs(2.0, 1_000_000));
    assert!((tau - 0.5).abs() <= 0.005, "tau {tau}");
}

#[test]
fn kendall_tau_helper_on_small_sample() {
    let mut p = vec![(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0)];
    // 5 concordant, 1 discordant
    assert!((kendall_tau(&mut p) - 4.0 / 6.0).abs() < 1e-15);
}

#[test]
fn marginals_are_uniform() {
    let sampler = ClaytonSampler::new(&CopulaSpec::clayton(2.0, 3).unwrap()).unwrap();
    let n = 1_000_000;
    let mut u = [0.0; 3];
    let mut first: Vec<f64> = (0..n as u64)
        .map(|i| {
            sampler.sample(&mut path_rng(SEED + 1, i), &mut u);
            u[0]
        })
        .collect();
    let d = ks_uniform(&mut first);
    assert!(d < ks_critical_1pct(n), "KS {d}");
}

#[test]
fn joint_cdf_matches_copula() {
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    for dim in 2..=4 {
        let copula = CopulaSpec::clayton(1.5, dim).unwrap();
        for (i, &a) in grid.iter().enumerate() {
            for (j, &b) in grid.iter().enumerate() {
                let mut u = vec![b; dim];
                u[0] = a;
                let seed = SEED + (100 * dim + 10 * i + j) as u64;
                let est = mc_joint_cdf(&copula, &u, &SimConfig::new(100_000, seed)).unwrap();
                let exact = copula.evaluate(&u).unwrap();
                assert!(est.z_score(exact) <= 3.0, "dim {dim} u {u:?}: {} vs {exact}", est.mean);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Price estimators

#[test]
fn independent_par_value_is_zero() {
    let m = clayton(0.0, &FIG1);
    let deal = DealSpec::new(0.02, 5.0);
    let est = mc_price_weighted(&m, &deal, &SimConfig::new(200_000, SEED), &settings()).unwrap();
    assert!(est.value(0.02).contains(0.0), "{:?}", est.value(0.02));
}

#[test]
fn three_party_price_matches_quadrature() {
    let m = clayton(2.0, &FIG1);
    let deal = DealSpec::new(0.015, 5.0);
    let legs = legs_3party(&m, &deal, &settings()).unwrap();
    let est = mc_price_weighted(&m, &deal, &SimConfig::new(1_000_000, SEED), &settings()).unwrap();
    let v = est.value(deal.premium);
    assert!(v.contains(legs.value(deal.premium)), "{v:?} vs {}", legs.value(deal.premium));
}

#[test]
fn four_party_estimators_agree_with_quadrature() {
    let m = clayton(2.0, &FIG2);
    for cp in [2, 3] {
        let deal = DealSpec::new(0.018, 5.0).with_seller(cp);
        let exact = legs_4party(&m, &deal, cp, &settings()).unwrap().value(deal.premium);
        let sim = SimConfig::new(500_000, SEED + cp as u64);
        let weighted = mc_price_weighted(&m, &deal, &sim, &settings()).unwrap().value(deal.premium);
        let direct = mc_price_survival_measure(&m, &deal, &sim, &settings()).unwrap().value(deal.premium);
        assert!(weighted.contains(exact), "weighted {weighted:?} vs {exact}");
        assert!(direct.contains(exact), "direct {direct:?} vs {exact}");
        assert!(direct.std_error < weighted.std_error);
    }
}

#[test]
fn survival_measure_estimator_needs_one_outside_party() {
    let m = clayton(2.0, &FIG1);
    let deal = DealSpec::new(0.018, 5.0);
    assert!(mc_price_survival_measure(&m, &deal, &SimConfig::new(10, 1), &settings()).is_err());
}

#[test]
fn piecewise_risk_free_matches_mc() {
    // independent copula: the weight cancels the survival of parties 1, 2
    let reference = MarginalCurve::piecewise(vec![2.0], vec![0.01, 0.03], 0.4).unwrap();
    let curves = vec![
        reference.clone(),
        MarginalCurve::flat(0.02, 0.4).unwrap(),
        MarginalCurve::flat(0.05, 0.4).unwrap(),
    ];
    let m = CreditModel::new(CopulaSpec::product(3).unwrap(), curves).unwrap();
    let deal = DealSpec::new(0.0, 4.0);
    let rf = risk_free_value(&reference, &deal, &settings()).unwrap();
    let est = mc_price_weighted(&m, &deal, &SimConfig::new(400_000, SEED), &settings()).unwrap();
    let par = est.par().unwrap();
    assert!(par.contains(rf.par_spread().unwrap()), "{par:?} vs {}", rf.par_spread().unwrap());
}

#[test]
fn b2b_gap_sign_confirmed() {
    let m = clayton(2.0, &FIG2);
    let deal = DealSpec::new(0.0, 5.0);
    let par = legs_4party(&m, &deal, 2, &settings()).unwrap().par_spread().unwrap();
    let gap = b2b_gap(&m, &deal, par, &settings()).unwrap();
    let est = mc_b2b_gap(&m, &deal, par, &SimConfig::new(400_000, SEED), &settings()).unwrap();
    assert!(est.contains(gap), "{est:?} vs {gap}");
    assert!(est.mean.signum() == gap.signum() && est.z_score(0.0) > 3.29);
}

#[test]
fn density_has_unit_mass() {
    for (alpha, spreads) in [(2.0, &FIG1[..]), (2.0, &FIG2[..])] {
        let m = clayton(alpha, spreads);
        let est = mc_density_mass(&m, &DealSpec::new(0.0, 5.0), &SimConfig::new(300_000, SEED), &settings()).unwrap();
        assert!(est.contains(1.0), "{est:?}");
    }
}

// ---------------------------------------------------------------------------
// Binned hazards

#[test]
fn binned_hazard_product_copula() {
    let curves = curves(&[0.06, 0.03, 0.09]);
    let lambda = curves[0].intensity(1.0);
    let m = CreditModel::new(CopulaSpec::product(3).unwrap(), curves).unwrap();
    let bin = HazardBin {
        party: 0,
        time: 1.0,
        width: 0.01,
        alive: vec![2],
        defaulted: vec![(1, 0.0, 0.8)],
    };
    let est = mc_hazard_binned(&m, &bin, &SimConfig::new(2_000_000, SEED)).unwrap();
    assert!(est.estimate.z_score(lambda) <= 3.0, "{est:?} vs {lambda}");
}

#[test]
fn binned_hazard_after_contagion() {
    // stressed marginals so the conditioning window collects enough events
    let curves = vec![
        MarginalCurve::flat(0.3, 0.4).unwrap(),
        MarginalCurve::from_effective_spread(0.003, 0.4).unwrap(),
        MarginalCurve::from_effective_spread(0.015, 0.4).unwrap(),
        MarginalCurve::flat(0.5, 0.4).unwrap(),
    ];
    let m = CreditModel::clayton(2.0, curves).unwrap();
    let bin = HazardBin {
        party: 0,
        time: 1.1,
        width: 0.01,
        alive: vec![1, 2],
        defaulted: vec![(3, 0.95, 1.05)],
    };
    let est = mc_hazard_binned(&m, &bin, &SimConfig::new(10_000_000, SEED)).unwrap();
    let state = ScenarioState::new(1.1, &[(3, 1.0)]).unwrap();
    let exact = survival_measure_hazard(&m, &state, &SurvivalSet::new([0, 1, 2]), 0).unwrap();
    let rel = (est.estimate.mean / exact - 1.0).abs();
    assert!(rel <= 0.10, "{est:?} vs {exact}");
}

// ---------------------------------------------------------------------------
// Reproducibility

#[test]
fn estimates_independent_of_thread_count() {
    let m = clayton(2.0, &FIG2);
    let deal = DealSpec::new(0.018, 5.0);
    let sim = SimConfig::new(50_000, SEED).with_batch(1000);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_price_weighted(&m, &deal, &sim, &settings()).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.protection.mean.to_bits(), b.protection.mean.to_bits());
    assert_eq!(a.annuity.std_error.to_bits(), b.annuity.std_error.to_bits());
    assert_eq!(a.covariance.to_bits(), b.covariance.to_bits());
}
