//! Helpers shared by the integration test binaries.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_outage::model::{make_correlation, CorrelationKind, LinearBudget, RisBlockConfig};
use ris_outage::montecarlo::draw_correlated_pair;
use ris_outage::{Scenario, ScenarioConfig};

/// Four RIS, two blocks of 16 elements each, unit channel means.
pub const BASELINE: &str = "n_ris = 4\nblocks_per_ris = 2\nelements_per_ris = 32\n\
    tx_power_db = 30\nnoise_power_db = 10\nrho1 = 0.1\nrho2 = 0.1\n\
    lambda_u = 1\nlambda_b = 1\nfail_prob = 0\ntarget_rate = 1\n\
    dist_user_m = 4\ndist_bs_m = 4\npathloss_exp = 2\nseed = 1\n";

pub fn scenario(over: &[(&str, &str)]) -> Scenario {
    let cfg = ScenarioConfig::parse(BASELINE).unwrap();
    Scenario::validate(cfg.with_overrides(over.iter().copied()).unwrap()).unwrap()
}

pub fn budget() -> LinearBudget {
    LinearBudget::from_db(30.0, 10.0, 1.0)
}

pub fn kind_from(tag: u8, param: f64) -> CorrelationKind {
    match tag % 3 {
        0 => CorrelationKind::Identity,
        1 => CorrelationKind::Uniform(param),
        _ => CorrelationKind::ExponentialDecay(param),
    }
}

/// Block with random phases and geometry.
pub fn random_block(m: usize, kind: CorrelationKind, rng: &mut ChaCha8Rng) -> RisBlockConfig {
    let mut phases = || {
        (0..m)
            .map(|_| rng.random::<f64>() * TAU)
            .collect::<Vec<_>>()
    };
    let (psi, theta, phi) = (phases(), phases(), phases());
    RisBlockConfig {
        ris_index: 0,
        block_index: 0,
        correlation: make_correlation(kind, m).unwrap(),
        phases_psi: psi,
        phases_theta: theta,
        phases_phi: phi,
        dist_user_m: 1.0 + 6.0 * rng.random::<f64>(),
        dist_bs_m: 1.0 + 6.0 * rng.random::<f64>(),
        pathloss_exp: 1.5 + 2.0 * rng.random::<f64>(),
    }
}

pub fn pairs(n: usize, lambda: f64, rho: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| draw_correlated_pair(&mut rng, lambda, rho))
        .collect()
}

/// 1% critical value of the one-sample KS statistic, large-sample form.
pub fn ks_crit_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Kolmogorov-Smirnov statistic against the exponential with mean `mean`.
pub fn ks_exponential(mut xs: Vec<f64>, mean: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = -(-x / mean).exp_m1();
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn correlation(ps: &[(f64, f64)]) -> f64 {
    let n = ps.len() as f64;
    let (mx, my) = ps.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in ps {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Upper 1% point of chi-square with `k` degrees of freedom
/// (Wilson-Hilferty).
pub fn chi2_crit_1pct(k: usize) -> f64 {
    let k = k as f64;
    let z = 2.326_347_874;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Pearson statistic after merging adjacent bins until each expects at
/// least five counts. Returns the statistic and the degrees of freedom.
pub fn chi_square(observed: &[usize], expected: &[f64]) -> (f64, usize) {
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob as f64;
        e += ex;
        if e >= 5.0 {
            bins.push((o, e));
            (o, e) = (0.0, 0.0);
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let stat = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, bins.len().saturating_sub(1))
}
