//! Seeded query-count experiments: planted sparse signals, scaling sweeps,
//! single-solution search cost and the closed-form check of the iteration.
//!
//! Trial `t` of a sweep uses seed `base_seed + t`; trials run through
//! [`Execution`] and are aggregated after sorting by trial index, so the
//! numbers do not depend on the thread schedule.

use std::fmt::Write as _;

use serde::Serialize;

use crate::amplitude::{success_probability, AmplitudeState, RngStream};
use crate::dft::{fast_idft, idft_2d, Complex, ComplexMatrix, ComplexVec};
use crate::error::Result;
use crate::exec::Execution;
use crate::ledger::QueryLedger;
use crate::qdft1d::{qdft_1d_with, subroutine1, QdftOptions, SignalSpace, ThresholdWindow};
use crate::qdft2d::{qdft_2d_with, Qdft2dOptions};

/// Draws `m` distinct indices below `n`.
fn distinct_indices(n: usize, m: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut picked = Vec::with_capacity(m);
    while picked.len() < m.min(n) {
        let k = rng.below(n as u64) as usize;
        if !picked.contains(&k) {
            picked.push(k);
        }
    }
    picked
}

/// Unit-energy spectrum with `m` equal-magnitude coefficients (random phases)
/// holding `big_fraction` of the energy; the rest is spread as Gaussian
/// noise over the other positions.
pub fn planted_spectrum(n: usize, m: usize, big_fraction: f64, rng: &mut RngStream) -> Vec<Complex> {
    let big = distinct_indices(n, m, rng);
    let mut spec: Vec<Complex> = (0..n)
        .map(|k| {
            if big.contains(&k) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(rng.normal(), rng.normal())
            }
        })
        .collect();
    let noise: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let small = if big.len() < n { 1.0 - big_fraction } else { 0.0 };
    let noise_scale = if noise > 0.0 { (small / noise).sqrt() } else { 0.0 };
    for c in &mut spec {
        *c *= noise_scale;
    }
    let amp = ((1.0 - small) / big.len().max(1) as f64).sqrt();
    for &k in &big {
        let phase = 2.0 * std::f64::consts::PI * rng.unit();
        spec[k] = Complex::from_polar(amp, phase);
    }
    spec
}

/// Time-domain signal whose spectrum is [`planted_spectrum`].
pub fn planted_signal(n: usize, m: usize, big_fraction: f64, rng: &mut RngStream) -> Result<ComplexVec> {
    ComplexVec::new(fast_idft(&planted_spectrum(n, m, big_fraction, rng)))
}

/// Image whose 2D spectrum has `m` planted entries.
pub fn planted_image(n: usize, m: usize, big_fraction: f64, rng: &mut RngStream) -> Result<ComplexMatrix> {
    let spec = planted_spectrum(n * n, m, big_fraction, rng);
    Ok(idft_2d(&ComplexMatrix::from_row_major(n, spec)?))
}

/// Setup of a scaling sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    /// Number of planted big coefficients.
    pub planted: usize,
    /// Energy share of the planted coefficients.
    pub big_fraction: f64,
    pub epsilon: f64,
    pub base_seed: u64,
    /// Run the 2D transform on `N x N` images instead of length-`N` signals.
    pub two_d: bool,
    pub search: QdftOptions,
    pub exhaustive_2d: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            sizes: vec![256, 1024, 4096],
            trials: 100,
            planted: 4,
            big_fraction: 0.999,
            epsilon: 0.01,
            base_seed: 1,
            two_d: false,
            search: QdftOptions::default(),
            exhaustive_2d: false,
        }
    }
}

/// Counters of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub found: usize,
    pub retained_fraction: f64,
    pub ledger: QueryLedger,
}

/// Aggregate over the trials at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub trials: usize,
    pub mean_iterations: f64,
    pub std_iterations: f64,
    pub mean_found: f64,
    pub mean_subroutine_calls: f64,
    pub mean_measurements: f64,
    pub budget_exhaustions: u64,
    /// Classical FFT operation count `N log2 N` for comparison.
    pub n_log2_n: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs one planted trial at size `n`.
pub fn scaling_trial(cfg: &ScalingConfig, n: usize, seed: u64) -> Result<TrialOutcome> {
    let mut rng = RngStream::new(seed);
    let mut signal_rng = rng.fork();
    if cfg.two_d {
        let f = planted_image(n, cfg.planted, cfg.big_fraction, &mut signal_rng)?;
        let opts = Qdft2dOptions {
            search: cfg.search,
            exhaustive_first_pass: cfg.exhaustive_2d,
            ..Default::default()
        };
        let run = qdft_2d_with(&f, cfg.epsilon, &mut rng, &opts)?;
        let s = &run.spectrum;
        Ok(TrialOutcome {
            seed,
            found: s.found(),
            retained_fraction: s.retained_energy() / s.total_energy(),
            ledger: run.ledger,
        })
    } else {
        let x = planted_signal(n, cfg.planted, cfg.big_fraction, &mut signal_rng)?;
        let run = qdft_1d_with(&x, cfg.epsilon, &mut rng, &cfg.search)?;
        let s = &run.spectrum;
        Ok(TrialOutcome {
            seed,
            found: s.found(),
            retained_fraction: s.retained_energy() / s.total_energy(),
            ledger: run.ledger,
        })
    }
}

/// All trials at one size, in trial order.
pub fn scaling_trials(cfg: &ScalingConfig, n: usize, exec: Execution) -> Result<Vec<TrialOutcome>> {
    exec.map_indices(cfg.trials, |t| scaling_trial(cfg, n, cfg.base_seed + t as u64))
        .into_iter()
        .collect()
}

pub fn aggregate(n: usize, outcomes: &[TrialOutcome]) -> ScalingPoint {
    let mut sorted = outcomes.to_vec();
    sorted.sort_by_key(|o| o.seed);
    let iters: Vec<f64> = sorted.iter().map(|o| o.ledger.grover_iterations as f64).collect();
    let (mean_iterations, std_iterations) = mean_std(&iters);
    let k = sorted.len().max(1) as f64;
    ScalingPoint {
        n,
        trials: sorted.len(),
        mean_iterations,
        std_iterations,
        mean_found: sorted.iter().map(|o| o.found as f64).sum::<f64>() / k,
        mean_subroutine_calls: sorted.iter().map(|o| o.ledger.subroutine_calls as f64).sum::<f64>() / k,
        mean_measurements: sorted.iter().map(|o| o.ledger.measurements as f64).sum::<f64>() / k,
        budget_exhaustions: sorted.iter().map(|o| o.ledger.budget_exhaustions).sum(),
        n_log2_n: n as f64 * (n as f64).log2(),
    }
}

/// Scaling sweep over `cfg.sizes`.
pub fn run_scaling(cfg: &ScalingConfig, exec: Execution) -> Result<Vec<ScalingPoint>> {
    cfg.sizes
        .iter()
        .map(|&n| Ok(aggregate(n, &scaling_trials(cfg, n, exec)?)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

pub fn scaling_csv(points: &[ScalingPoint]) -> String {
    let mut s = String::from(
        "n,trials,mean_iterations,std_iterations,mean_found,mean_subroutine_calls,mean_measurements,budget_exhaustions,n_log2_n\n",
    );
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            p.n,
            p.trials,
            p.mean_iterations,
            p.std_iterations,
            p.mean_found,
            p.mean_subroutine_calls,
            p.mean_measurements,
            p.budget_exhaustions,
            p.n_log2_n
        );
    }
    s
}

/// Search cost for a single planted solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSolutionCost {
    pub n: usize,
    pub seeds: usize,
    pub successes: usize,
    pub mean_iterations: f64,
    pub mean_measurements: f64,
}

/// Calls [`subroutine1`] once per seed on a unit-energy signal with one
/// coefficient of energy 1/2 and Gaussian noise elsewhere, using the window
/// `[1/4, 1]` so exactly one index is marked. The budget is effectively
/// unlimited; iterations of the successful calls are averaged.
pub fn single_solution_cost(n: usize, seeds: usize, base_seed: u64, exec: Execution) -> Result<SingleSolutionCost> {
    let runs: Vec<Result<(bool, QueryLedger)>> = exec.map_indices(seeds, |t| {
        let mut rng = RngStream::new(base_seed + t as u64);
        let x = planted_signal(n, 1, 0.5, &mut rng.fork())?;
        let space = SignalSpace::new(&x)?;
        let window = ThresholdWindow::new(0.25, 1.0)?;
        debug_assert_eq!(window.mask(&space).count(), 1);
        let mut ledger = QueryLedger::default();
        let found = subroutine1(&space, &window, &mut rng, &mut ledger, u64::MAX / 2)?;
        Ok((found.is_some(), ledger))
    });
    let runs: Vec<(bool, QueryLedger)> = runs.into_iter().collect::<Result<_>>()?;
    let ok: Vec<&QueryLedger> = runs.iter().filter(|(s, _)| *s).map(|(_, l)| l).collect();
    let k = ok.len().max(1) as f64;
    Ok(SingleSolutionCost {
        n,
        seeds,
        successes: ok.len(),
        mean_iterations: ok.iter().map(|l| l.grover_iterations as f64).sum::<f64>() / k,
        mean_measurements: ok.iter().map(|l| l.measurements as f64).sum::<f64>() / k,
    })
}

/// Largest gap between simulated and closed-form success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroverCheck {
    pub cases: u64,
    pub max_deviation: f64,
    pub worst_n: usize,
    pub worst_marked: usize,
    pub worst_iterations: u64,
}

/// For each `n` in `sizes`, every marked count `0..=n` (the first `m`
/// indices marked) and every iteration count `0..=max_iterations`.
pub fn grover_sweep(sizes: &[usize], max_iterations: u64, exec: Execution) -> Result<GroverCheck> {
    let mut best = GroverCheck {
        cases: 0,
        max_deviation: 0.0,
        worst_n: 0,
        worst_marked: 0,
        worst_iterations: 0,
    };
    for &n in sizes {
        let per_m: Vec<Result<(f64, u64)>> = exec.map_indices(n + 1, |m| {
            let pred = |i: usize| i < m;
            let mut state = AmplitudeState::uniform(n)?;
            let mut worst = (0.0f64, 0u64);
            for j in 0..=max_iterations {
                if j > 0 {
                    state.grover_iterate(&pred);
                }
                let d = (state.marked_probability(&pred) - success_probability(n, m, j)?).abs();
                if d > worst.0 {
                    worst = (d, j);
                }
            }
            Ok(worst)
        });
        for (m, r) in per_m.into_iter().enumerate() {
            let (d, j) = r?;
            best.cases += max_iterations + 1;
            if d > best.max_deviation {
                best.max_deviation = d;
                best.worst_n = n;
                best.worst_marked = m;
                best.worst_iterations = j;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{dft_1d, Energy};

    #[test]
    fn planted_signal_has_the_requested_structure() {
        let mut rng = RngStream::new(4);
        let x = planted_signal(64, 3, 0.99, &mut rng).unwrap();
        assert!((x.energy() - 1.0).abs() < 1e-12);
        let mut e: Vec<f64> = dft_1d(&x).iter().map(|c| c.norm_sqr()).collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((e[..3].iter().sum::<f64>() - 0.99).abs() < 1e-10);
        assert!((e[0] - 0.33).abs() < 1e-10);
        assert!(e[3] < 0.33);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_exact_at_small_sizes() {
        let check = grover_sweep(&[2, 4, 8], 20, Execution::Sequential).unwrap();
        assert_eq!(check.cases, (3 + 5 + 9) * 21);
        assert!(check.max_deviation < 1e-12);
    }

    #[test]
    fn trials_do_not_depend_on_execution_policy() {
        let cfg = ScalingConfig {
            sizes: vec![64],
            trials: 6,
            ..Default::default()
        };
        let a = scaling_trials(&cfg, 64, Execution::Sequential).unwrap();
        let b = scaling_trials(&cfg, 64, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let p = aggregate(64, &a);
        assert_eq!(p.trials, 6);
        assert!(p.mean_found >= 4.0);
        assert_eq!(p.n_log2_n, 384.0);
        assert!(scaling_csv(&[p]).starts_with("n,trials,mean_iterations"));
    }

    #[test]
    fn two_d_trial_runs() {
        let cfg = ScalingConfig {
            sizes: vec![8],
            trials: 2,
            two_d: true,
            ..Default::default()
        };
        let out = scaling_trials(&cfg, 8, Execution::Sequential).unwrap();
        assert!(out.iter().all(|o| o.retained_fraction >= 0.99 - 1e-9));
    }
}
