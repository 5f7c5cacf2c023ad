//! Monte Carlo outage estimator.
//!
//! Each trial draws, for every block `(k, j)`, correlated outdated and
//! instantaneous gains on both hops plus an i.i.d. element-failure pattern.
//! The block with the largest outdated U-side SNR `|g~_U|^2 Upsilon_q` is
//! selected and the trial is an outage when its instantaneous SNR
//! `Upsilon_q |g_U|^2 |g_B|^2` falls below `gamma_T`.
//!
//! Block `(k, j)` of trial `t` reads only from
//! [`block_stream`](crate::rng::block_stream)`(seed, t, k, j)`, in the order:
//! U-side pair, B-side pair, one uniform per element for failures. Estimates
//! are therefore bit-identical for any worker count, and reusing a seed
//! across parameter values gives common random numbers.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::failure::sample_pattern;
use crate::model::Scenario;
use crate::rng::block_stream;
use crate::upsilon::{BlockKernel, UpsilonValue};

pub const MIN_TRIALS: usize = 10_000;

/// Two-sided 95 % normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("{0} trials requested; at least {MIN_TRIALS} are required")]
    TooFewTrials(usize),
    #[error("gamma_t = {0} must be non-negative")]
    Threshold(f64),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Everything drawn in one trial, per block in [`Scenario::blocks`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub outdated_u: Vec<f64>,
    pub outdated_b: Vec<f64>,
    pub instant_u: Vec<f64>,
    pub instant_b: Vec<f64>,
    pub failures: Vec<usize>,
    /// Upsilon of each block with its failed elements removed.
    pub upsilon: Vec<f64>,
    /// Position of the selected block in [`Scenario::blocks`].
    pub selected: usize,
    /// `(k, j)` of the selected block.
    pub selected_kj: (usize, usize),
    /// Instantaneous end-to-end SNR of the selected path.
    pub snr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub outage_prob: f64,
    pub trials: usize,
    pub outages: usize,
    /// `1.96 sqrt(p (1 - p) / trials)`.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(outages: usize, trials: usize, seed: u64) -> Self {
        let p = outages as f64 / trials as f64;
        Self {
            outage_prob: p,
            trials,
            outages,
            ci_halfwidth: Z95 * (p * (1.0 - p) / trials as f64).sqrt(),
            seed,
        }
    }
}

/// Outdated and instantaneous squared gains of one link, each exponential
/// with mean `lambda`, built from `h = rho h~ + sqrt(1 - rho^2) w` with
/// `h~, w` unit circular Gaussians. Their correlation is `rho^2`.
pub fn draw_correlated_pair<R: Rng + ?Sized>(rng: &mut R, lambda: f64, rho: f64) -> (f64, f64) {
    let mut n =
        || -> f64 { rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2 };
    let (or, oi) = (n(), n());
    let (wr, wi) = (n(), n());
    let innov = (1.0 - rho * rho).sqrt();
    let (ir, ii) = (rho * or + innov * wr, rho * oi + innov * wi);
    (lambda * (or * or + oi * oi), lambda * (ir * ir + ii * ii))
}

/// Per-scenario state shared by all trials.
struct Prepared<'a> {
    scn: &'a Scenario,
    kernels: Vec<BlockKernel>,
    full: Vec<UpsilonValue>,
}

struct BlockDraw {
    outdated_u: f64,
    outdated_b: f64,
    instant_u: f64,
    instant_b: f64,
    failures: usize,
    upsilon: f64,
}

impl<'a> Prepared<'a> {
    fn new(scn: &'a Scenario) -> Self {
        let omega = scn.budget().omega;
        let kernels: Vec<BlockKernel> = scn.blocks().iter().map(BlockKernel::new).collect();
        let full = kernels.iter().map(|k| k.upsilon_all(omega)).collect();
        Self { scn, kernels, full }
    }

    fn draw_block(&self, seed: u64, trial: u64, index: usize) -> BlockDraw {
        let c = self.scn.config();
        let block = &self.scn.blocks()[index];
        let mut rng = block_stream(seed, trial, block.ris_index, block.block_index);
        let (outdated_u, instant_u) = draw_correlated_pair(&mut rng, c.lambda_u, c.rho1);
        let (outdated_b, instant_b) = draw_correlated_pair(&mut rng, c.lambda_b, c.rho2);
        let kernel = &self.kernels[index];
        let pattern =
            sample_pattern(&mut rng, kernel.m_prime(), c.fail_prob).expect("fail_prob validated");
        let upsilon = if pattern.q() == 0 {
            self.full[index].total
        } else {
            kernel
                .upsilon(self.scn.budget().omega, &pattern.active())
                .total
        };
        BlockDraw {
            outdated_u,
            outdated_b,
            instant_u,
            instant_b,
            failures: pattern.q(),
            upsilon,
        }
    }

    /// Instantaneous SNR of the selected path. Ties go to the lowest index.
    fn selected_snr(&self, seed: u64, trial: u64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut snr = 0.0;
        for i in 0..self.kernels.len() {
            let d = self.draw_block(seed, trial, i);
            let score = d.outdated_u * d.upsilon;
            if score > best {
                best = score;
                snr = d.upsilon * d.instant_u * d.instant_b;
            }
        }
        snr
    }
}

/// Runs trial `trial` of the stream family `seed` and records every draw.
pub fn run_trial(scn: &Scenario, seed: u64, trial: u64) -> TrialDraw {
    let prep = Prepared::new(scn);
    let n = prep.kernels.len();
    let mut out = TrialDraw {
        outdated_u: Vec::with_capacity(n),
        outdated_b: Vec::with_capacity(n),
        instant_u: Vec::with_capacity(n),
        instant_b: Vec::with_capacity(n),
        failures: Vec::with_capacity(n),
        upsilon: Vec::with_capacity(n),
        selected: 0,
        selected_kj: (0, 0),
        snr: 0.0,
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let d = prep.draw_block(seed, trial, i);
        let score = d.outdated_u * d.upsilon;
        if score > best {
            best = score;
            out.selected = i;
            out.snr = d.upsilon * d.instant_u * d.instant_b;
        }
        out.outdated_u.push(d.outdated_u);
        out.outdated_b.push(d.outdated_b);
        out.instant_u.push(d.instant_u);
        out.instant_b.push(d.instant_b);
        out.failures.push(d.failures);
        out.upsilon.push(d.upsilon);
    }
    let sel = &scn.blocks()[out.selected];
    out.selected_kj = (sel.ris_index, sel.block_index);
    out
}

/// Fraction of trials whose selected-path SNR is below `gamma_t`, using the
/// global rayon pool.
pub fn estimate_outage(
    scn: &Scenario,
    gamma_t: f64,
    trials: usize,
    seed: u64,
) -> Result<McEstimate, MonteCarloError> {
    check_args(gamma_t, trials)?;
    Ok(estimate_unchecked(scn, &[gamma_t], trials, seed)[0])
}

/// As [`estimate_outage`] on a dedicated pool of `workers` threads.
pub fn estimate_outage_with_workers(
    scn: &Scenario,
    gamma_t: f64,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<McEstimate, MonteCarloError> {
    check_args(gamma_t, trials)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MonteCarloError::Pool(e.to_string()))?;
    Ok(pool.install(|| estimate_unchecked(scn, &[gamma_t], trials, seed))[0])
}

/// One estimate per threshold, all sharing the same trials.
pub fn estimate_outage_curve(
    scn: &Scenario,
    gammas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<McEstimate>, MonteCarloError> {
    for &g in gammas {
        check_args(g, trials)?;
    }
    Ok(estimate_unchecked(scn, gammas, trials, seed))
}

fn check_args(gamma_t: f64, trials: usize) -> Result<(), MonteCarloError> {
    if trials < MIN_TRIALS {
        return Err(MonteCarloError::TooFewTrials(trials));
    }
    if gamma_t.is_nan() || gamma_t < 0.0 {
        return Err(MonteCarloError::Threshold(gamma_t));
    }
    Ok(())
}

fn estimate_unchecked(scn: &Scenario, gammas: &[f64], trials: usize, seed: u64) -> Vec<McEstimate> {
    let prep = Prepared::new(scn);
    let counts = (0..trials)
        .into_par_iter()
        .with_min_len(256)
        .fold(
            || vec![0usize; gammas.len()],
            |mut acc, t| {
                let snr = prep.selected_snr(seed, t as u64);
                for (c, &g) in acc.iter_mut().zip(gammas) {
                    if snr < g {
                        *c += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; gammas.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts
        .into_iter()
        .map(|c| McEstimate::from_count(c, trials, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario(extra: &[(&str, &str)]) -> Scenario {
        let base = crate::model::ScenarioConfig::parse(
            "n_ris = 4\nblocks_per_ris = 2\nelements_per_ris = 16\ntx_power_db = 30\n\
             noise_power_db = 10\nrho1 = 0.1\nrho2 = 0.1\nlambda_u = 1\nlambda_b = 1\n\
             fail_prob = 0\ntarget_rate = 1\ndist_user_m = 4\ndist_bs_m = 4\npathloss_exp = 2\nseed = 7\n",
        )
        .unwrap();
        Scenario::validate(base.with_overrides(extra.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn pair_marginal_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let (mut so, mut si) = (0.0, 0.0);
        for _ in 0..n {
            let (o, i) = draw_correlated_pair(&mut rng, 0.3, 0.6);
            so += o;
            si += i;
        }
        assert!((so / n as f64 / 0.3 - 1.0).abs() < 0.01);
        assert!((si / n as f64 / 0.3 - 1.0).abs() < 0.01);
    }

    #[test]
    fn single_candidate_is_always_selected() {
        let s = scenario(&[("n_ris", "1"), ("blocks_per_ris", "1")]);
        for t in 0..50 {
            let d = run_trial(&s, 3, t);
            assert_eq!(d.selected, 0);
            assert_eq!(d.selected_kj, (0, 0));
        }
    }

    #[test]
    fn selection_is_argmax_of_outdated_user_snr() {
        let s = scenario(&[("fail_prob", "0.3")]);
        for t in 0..200 {
            let d = run_trial(&s, 11, t);
            let score = |i: usize| d.outdated_u[i] * d.upsilon[i];
            let best = (0..d.upsilon.len())
                .map(score)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(score(d.selected), best);
            let i = d.selected;
            assert_eq!(d.snr, d.upsilon[i] * d.instant_u[i] * d.instant_b[i]);
        }
    }

    #[test]
    fn all_failed_means_certain_outage() {
        let s = scenario(&[("fail_prob", "1")]);
        let d = run_trial(&s, 1, 0);
        assert!(d.failures.iter().all(|&q| q == 8));
        assert_eq!(d.snr, 0.0);
        let e = estimate_outage(&s, 1e-300, MIN_TRIALS, 1).unwrap();
        assert_eq!(e.outage_prob, 1.0);
        assert_eq!(e.ci_halfwidth, 0.0);
    }

    #[test]
    fn threshold_extremes() {
        let s = scenario(&[]);
        assert_eq!(
            estimate_outage(&s, 0.0, MIN_TRIALS, 4).unwrap().outage_prob,
            0.0
        );
        assert_eq!(
            estimate_outage(&s, 1e30, MIN_TRIALS, 4)
                .unwrap()
                .outage_prob,
            1.0
        );
    }

    #[test]
    fn argument_checks() {
        let s = scenario(&[]);
        assert_eq!(
            estimate_outage(&s, 3.0, 100, 0),
            Err(MonteCarloError::TooFewTrials(100))
        );
        assert_eq!(
            estimate_outage(&s, -1.0, MIN_TRIALS, 0),
            Err(MonteCarloError::Threshold(-1.0))
        );
    }

    #[test]
    fn ci_formula() {
        let e = McEstimate::from_count(2_500, 10_000, 0);
        assert_eq!(e.outage_prob, 0.25);
        assert!((e.ci_halfwidth - 1.96 * (0.25f64 * 0.75 / 10_000.0).sqrt()).abs() < 1e-15);
    }
}
