//! One-dimensional transform with classical sparse output.
//!
//! Two nested loops:
//!
//! * [`subroutine1`] is a randomized Grover search for an unknown number
//!   of solutions. It keeps a growing iteration bound `m` (factor 6/5,
//!   capped at `sqrt(N)`), draws `j`
//!   uniformly below `m`, applies `j` search iterations to a fresh uniform
//!   state, measures an index and checks its coefficient classically.
//! * [`qdft_1d`] drives the energy window. With residual energy `dE` and
//!   `nS` coefficients found, the window is `[dE / (N - nS), dE]`: at least
//!   one unfound coefficient always lies inside it, since the largest
//!   remaining energy is at least their mean and at most their sum. Every
//!   accepted coefficient lowers `dE` by its energy, and the loop stops once
//!   `dE / ||x||^2` drops below `epsilon`.
//!
//! The outer loop is written against [`SearchSpace`] so the 2D transform can
//! reuse it over pair indices.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::amplitude::{AmplitudeState, MarkMask, RngStream};
use crate::dft::{fast_dft, idft_1d, Complex, ComplexVec, Energy, FourierBasis};
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;

/// Growth factor of the iteration bound between measurements.
pub const LAMBDA: f64 = 6.0 / 5.0;

/// Slack on both window edges. Applied relative to the edges themselves and,
/// inside the outer loop, also relative to the total energy, since the
/// running residual carries rounding error at the scale of the total.
pub const WINDOW_SLACK: f64 = 1e-12;

/// Residual energy (relative to the total) below which the loop stops
/// regardless of epsilon.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Default per-call iteration cap, in units of `sqrt(N)`.
pub const DEFAULT_BUDGET_MULTIPLIER: f64 = 64.0;

/// Consecutive fruitless subroutine calls tolerated before the outer loop
/// gives up.
const MAX_CONSECUTIVE_EXHAUSTIONS: usize = 8;

/// An index space searched by the outer loop.
pub trait SearchSpace {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Energy seen by the marking oracle for `index`.
    fn oracle_energy(&self, index: usize) -> f64;

    /// Coefficient at `index`, computed directly from the input data. This is
    /// the classical verification step.
    fn coefficient(&self, index: usize) -> Complex;

    /// Energy of the input, which equals the total coefficient energy.
    fn total_energy(&self) -> f64;
}

/// Coefficients of one signal: index `i` maps to `W_i . x`.
#[derive(Debug, Clone)]
pub struct SignalSpace {
    basis: FourierBasis,
    samples: Vec<Complex>,
    energies: Vec<f64>,
    total: f64,
}

impl SignalSpace {
    pub fn new(x: &ComplexVec) -> Result<Self> {
        let basis = FourierBasis::new(x.len())?;
        let energies = fast_dft(x.as_slice()).iter().map(|c| c.norm_sqr()).collect();
        Ok(SignalSpace {
            basis,
            samples: x.as_slice().to_vec(),
            energies,
            total: x.energy(),
        })
    }
}

impl SearchSpace for SignalSpace {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn oracle_energy(&self, index: usize) -> f64 {
        self.energies[index]
    }

    fn coefficient(&self, index: usize) -> Complex {
        self.basis.inner_unchecked(index, &self.samples)
    }

    fn total_energy(&self) -> f64 {
        self.total
    }
}

/// Energy window `[alpha, beta]` plus the indices barred from marking.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdWindow {
    pub alpha: f64,
    pub beta: f64,
    pub excluded: BTreeSet<usize>,
    /// Absolute widening of both edges.
    pub tolerance: f64,
}

impl ThresholdWindow {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self::with_excluded(alpha, beta, BTreeSet::new())
    }

    pub fn with_excluded(alpha: f64, beta: f64, excluded: BTreeSet<usize>) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain(format!(
                "window bounds must be finite and non-negative, got [{alpha}, {beta}]"
            )));
        }
        if alpha > beta * (1.0 + WINDOW_SLACK) {
            return Err(Error::domain(format!("empty window [{alpha}, {beta}]")));
        }
        Ok(ThresholdWindow {
            alpha,
            beta,
            excluded,
            tolerance: 0.0,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance.max(0.0);
        self
    }

    /// `alpha <= energy <= beta`, with slack on both edges.
    pub fn contains_energy(&self, energy: f64) -> bool {
        energy >= self.alpha * (1.0 - WINDOW_SLACK) - self.tolerance
            && energy <= self.beta * (1.0 + WINDOW_SLACK) + self.tolerance
    }

    /// The marking predicate `f(i)`.
    pub fn admits(&self, index: usize, energy: f64) -> bool {
        !self.excluded.contains(&index) && self.contains_energy(energy)
    }

    /// Marked set over a search space, as seen by the oracle.
    pub fn mask<S: SearchSpace + ?Sized>(&self, space: &S) -> MarkMask {
        MarkMask(
            (0..space.len())
                .map(|i| self.admits(i, space.oracle_energy(i)))
                .collect(),
        )
    }
}

/// A verified coefficient returned by [`subroutine1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Found {
    pub index: usize,
    pub coefficient: Complex,
}

/// Per-call iteration cap `ceil(multiplier * sqrt(n))`, at least 1.
pub fn iteration_budget(n: usize, multiplier: f64) -> u64 {
    ((multiplier * (n as f64).sqrt()).ceil() as u64).max(1)
}

/// Randomized search for one index whose coefficient energy lies in
/// `window`.
///
/// Gives up with `Ok(None)` once `budget` search iterations (or `budget`
/// measurements) have been spent. A returned index always satisfies the
/// window, because acceptance is decided on the directly computed
/// coefficient.
pub fn subroutine1<S: SearchSpace + ?Sized>(
    space: &S,
    window: &ThresholdWindow,
    rng: &mut RngStream,
    ledger: &mut QueryLedger,
    budget: u64,
) -> Result<Option<Found>> {
    let mask = window.mask(space);
    search_with_mask(space, window, &mask, rng, ledger, budget)
}

fn search_with_mask<S: SearchSpace + ?Sized>(
    space: &S,
    window: &ThresholdWindow,
    mask: &MarkMask,
    rng: &mut RngStream,
    ledger: &mut QueryLedger,
    budget: u64,
) -> Result<Option<Found>> {
    let n = space.len();
    if n == 0 {
        return Err(Error::domain("search space is empty"));
    }
    if budget == 0 {
        return Err(Error::domain("iteration budget must be positive"));
    }
    ledger.subroutine_calls += 1;
    let sqrt_n = (n as f64).sqrt();
    let mut bound = 1.0f64;
    let mut spent = 0u64;
    let mut trials = 0u64;
    loop {
        // nonnegative integers strictly below `bound`
        let choices = bound.ceil().max(1.0) as u64;
        let j = rng.below(choices);
        if spent + j > budget || trials >= budget {
            ledger.budget_exhaustions += 1;
            return Ok(None);
        }
        let mut state = AmplitudeState::uniform(n)?;
        for _ in 0..j {
            state.grover_iterate(mask);
        }
        spent += j;
        ledger.grover_iterations += j;
        ledger.predicate_evaluations += j * n as u64;

        let index = state.measure(rng)?;
        trials += 1;
        ledger.measurements += 1;

        let coefficient = space.coefficient(index);
        ledger.classical_verifications += 1;
        if window.admits(index, coefficient.norm_sqr()) {
            return Ok(Some(Found { index, coefficient }));
        }
        bound = (LAMBDA * bound).min(sqrt_n);
    }
}

/// Knobs of the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QdftOptions {
    /// Per-call cap is `ceil(budget_multiplier * sqrt(N))` iterations.
    pub budget_multiplier: f64,
    /// Leave found indices marked and drop repeats after measurement, instead
    /// of excluding them from the marked set.
    pub literal_oracle: bool,
}

impl Default for QdftOptions {
    fn default() -> Self {
        QdftOptions {
            budget_multiplier: DEFAULT_BUDGET_MULTIPLIER,
            literal_oracle: false,
        }
    }
}

impl QdftOptions {
    fn validate(&self) -> Result<()> {
        if !(self.budget_multiplier >= 1.0 && self.budget_multiplier.is_finite()) {
            return Err(Error::domain(format!(
                "budget multiplier must be >= 1, got {}",
                self.budget_multiplier
            )));
        }
        Ok(())
    }
}

/// Retained coefficients of a 1D transform and the energy bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    n: usize,
    entries: BTreeMap<usize, Complex>,
    residual_energy: f64,
    total_energy: f64,
}

impl SparseSpectrum {
    /// Builds a spectrum whose residual is `total_energy` minus the energy of
    /// `entries`.
    pub fn from_entries(
        n: usize,
        entries: BTreeMap<usize, Complex>,
        total_energy: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("spectrum length must be positive"));
        }
        if let Some((&k, _)) = entries.range(n..).next() {
            return Err(Error::domain(format!("entry index {k} out of range for n = {n}")));
        }
        let retained: f64 = entries.values().map(|c| c.norm_sqr()).sum();
        Ok(SparseSpectrum {
            n,
            entries,
            residual_energy: (total_energy - retained).max(0.0),
            total_energy,
        })
    }

    pub fn empty(n: usize, total_energy: f64) -> Result<Self> {
        Self::from_entries(n, BTreeMap::new(), total_energy)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of retained coefficients (`nS`).
    pub fn found(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &BTreeMap<usize, Complex> {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<Complex> {
        self.entries.get(&index).copied()
    }

    pub fn residual_energy(&self) -> f64 {
        self.residual_energy
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn retained_energy(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    /// Zero-filled dense spectrum.
    pub fn densify(&self) -> Vec<Complex> {
        let mut dense = vec![Complex::new(0.0, 0.0); self.n];
        for (&k, &c) in &self.entries {
            dense[k] = c;
        }
        dense
    }
}

/// One pass of the outer loop, for inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub alpha: f64,
    pub beta: f64,
    /// Size of the marked set the oracle saw.
    pub marked: usize,
    pub accepted: Option<usize>,
    /// False when the accepted index had been found before (literal oracle).
    pub new: bool,
    pub grover_iterations: u64,
}

/// Full outcome of the outer loop over some [`SearchSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub entries: BTreeMap<usize, Complex>,
    pub total_energy: f64,
    pub residual_energy: f64,
    pub ledger: QueryLedger,
    pub trace: Vec<TraceStep>,
    /// Set when the loop ended on repeated budget exhaustion rather than on
    /// the energy criterion.
    pub stalled: bool,
}

/// Residual-energy outer loop over any search space.
pub fn extract<S: SearchSpace + ?Sized>(
    space: &S,
    epsilon: f64,
    rng: &mut RngStream,
    options: &QdftOptions,
) -> Result<Extraction> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    options.validate()?;
    let n = space.len();
    if n == 0 {
        return Err(Error::domain("search space is empty"));
    }

    let total = space.total_energy();
    let budget = iteration_budget(n, options.budget_multiplier);
    let max_rounds = if options.literal_oracle {
        16 * n + 64
    } else {
        usize::MAX
    };

    let mut entries = BTreeMap::new();
    let mut ledger = QueryLedger::default();
    let mut trace = Vec::new();
    let mut residual = total;
    let mut alpha = residual / n as f64;
    let mut beta = residual;
    let mut exhausted_in_a_row = 0;
    let mut stalled = false;

    while total > 0.0
        && residual / total >= epsilon
        && residual > RESIDUAL_FLOOR * total
        && entries.len() < n
        && trace.len() < max_rounds
    {
        let excluded = if options.literal_oracle {
            BTreeSet::new()
        } else {
            entries.keys().copied().collect()
        };
        let window = ThresholdWindow::with_excluded(alpha, beta, excluded)?.with_tolerance(WINDOW_SLACK * total);
        let mask = window.mask(space);
        let before = ledger.grover_iterations;
        let found = search_with_mask(space, &window, &mask, rng, &mut ledger, budget)?;
        let mut step = TraceStep {
            alpha,
            beta,
            marked: mask.count(),
            accepted: found.map(|f| f.index),
            new: false,
            grover_iterations: ledger.grover_iterations - before,
        };
        match found {
            None => {
                exhausted_in_a_row += 1;
                trace.push(step);
                if exhausted_in_a_row >= MAX_CONSECUTIVE_EXHAUSTIONS {
                    stalled = true;
                    break;
                }
                continue;
            }
            Some(Found { index, coefficient }) => {
                exhausted_in_a_row = 0;
                if let std::collections::btree_map::Entry::Vacant(slot) = entries.entry(index) {
                    slot.insert(coefficient);
                    step.new = true;
                    residual = (residual - coefficient.norm_sqr()).max(0.0);
                    let remaining = n - entries.len();
                    debug_assert!(remaining > 0 || residual <= RESIDUAL_FLOOR * total * 1e3);
                    alpha = if remaining > 0 {
                        residual / remaining as f64
                    } else {
                        0.0
                    };
                    beta = residual;
                }
                trace.push(step);
            }
        }
    }

    Ok(Extraction {
        entries,
        total_energy: total,
        residual_energy: residual,
        ledger,
        trace,
        stalled,
    })
}

/// Full traced run of the 1D transform.
#[derive(Debug, Clone, PartialEq)]
pub struct QdftRun {
    pub spectrum: SparseSpectrum,
    pub ledger: QueryLedger,
    pub trace: Vec<TraceStep>,
    pub stalled: bool,
}

/// Sparse 1D transform of `x`: keeps finding in-window coefficients until the
/// unfound energy falls below `epsilon * ||x||^2`.
pub fn qdft_1d(
    x: &ComplexVec,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<(SparseSpectrum, QueryLedger)> {
    let run = qdft_1d_with(x, epsilon, rng, &QdftOptions::default())?;
    Ok((run.spectrum, run.ledger))
}

pub fn qdft_1d_with(
    x: &ComplexVec,
    epsilon: f64,
    rng: &mut RngStream,
    options: &QdftOptions,
) -> Result<QdftRun> {
    let space = SignalSpace::new(x)?;
    let out = extract(&space, epsilon, rng, options)?;
    Ok(QdftRun {
        spectrum: SparseSpectrum {
            n: x.len(),
            entries: out.entries,
            residual_energy: out.residual_energy,
            total_energy: out.total_energy,
        },
        ledger: out.ledger,
        trace: out.trace,
        stalled: out.stalled,
    })
}

/// Inverse transform of the zero-filled sparse spectrum.
pub fn reconstruct(s: &SparseSpectrum) -> Result<ComplexVec> {
    if let Some((&k, _)) = s.entries.range(s.n..).next() {
        return Err(Error::domain(format!(
            "entry index {k} out of range for n = {}",
            s.n
        )));
    }
    Ok(idft_1d(&ComplexVec::new(s.densify())?))
}
