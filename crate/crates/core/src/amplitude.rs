//! Dense simulation of the search-index register.
//!
//! Only the index register carries amplitudes. The data-loading and
//! inner-product oracles around the phase flip are uncomputed inside each
//! iteration, so the composite acts on the index register as a sign flip on
//! the marked indices. That is what [`AmplitudeState::grover_iterate`]
//! applies, followed by the inversion about the mean. All operators are real
//! and the start state is real, so amplitudes are stored as `f64`.

use std::cell::Cell;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest index space the dense simulator will allocate.
pub const MAX_STATE_LEN: usize = 1 << 22;

/// Tolerance on the norm before a measurement is refused.
const MEASURE_NORM_TOL: f64 = 1e-6;

/// Real amplitude vector over `n` basis indices.
///
/// Never renormalised: norm drift would point at a bug in the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    amps: Vec<f64>,
}

impl AmplitudeState {
    /// Uniform superposition `1/sqrt(n) * sum |i>`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("state size must be positive"));
        }
        if n > MAX_STATE_LEN {
            return Err(Error::domain(format!(
                "state size {n} exceeds the dense simulation cutoff {MAX_STATE_LEN}"
            )));
        }
        Ok(AmplitudeState {
            amps: vec![1.0 / (n as f64).sqrt(); n],
        })
    }

    /// Wraps raw amplitudes. The vector is taken as-is, including its norm.
    pub fn from_amplitudes(amps: Vec<f64>) -> Result<Self> {
        if amps.is_empty() || amps.len() > MAX_STATE_LEN {
            return Err(Error::domain(format!("invalid state size {}", amps.len())));
        }
        Ok(AmplitudeState { amps })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Total probability carried by the indices `pred` marks.
    pub fn marked_probability<P: MarkPredicate + ?Sized>(&self, pred: &P) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|&(i, _)| pred.is_marked(i))
            .map(|(_, a)| a * a)
            .sum()
    }

    /// One generalized Grover iteration: negate marked amplitudes, then map
    /// every amplitude `a` to `2 * mean - a`.
    ///
    /// Calls `pred` exactly once per index.
    pub fn grover_iterate<P: MarkPredicate + ?Sized>(&mut self, pred: &P) {
        let mut sum = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if pred.is_marked(i) {
                *a = -*a;
            }
            sum += *a;
        }
        let twice_mean = 2.0 * sum / self.amps.len() as f64;
        for a in &mut self.amps {
            *a = twice_mean - *a;
        }
    }

    /// Projective measurement of the index register. Consumes the state.
    pub fn measure(self, rng: &mut RngStream) -> Result<usize> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > MEASURE_NORM_TOL {
            return Err(Error::Invariant(format!(
                "measuring a state with squared norm {norm}"
            )));
        }
        let target = rng.unit() * norm;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a * a;
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if target < acc {
                return Ok(i);
            }
        }
        // rounding left `target` just past the cumulative sum
        Ok(last_nonzero)
    }
}

/// Marking function `f(i)` over the index register.
pub trait MarkPredicate {
    fn is_marked(&self, index: usize) -> bool;
}

impl<F: Fn(usize) -> bool> MarkPredicate for F {
    fn is_marked(&self, index: usize) -> bool {
        self(index)
    }
}

/// Precomputed marked set.
#[derive(Debug, Clone)]
pub struct MarkMask(pub Vec<bool>);

impl MarkMask {
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&m| m).count()
    }
}

impl MarkPredicate for MarkMask {
    fn is_marked(&self, index: usize) -> bool {
        self.0[index]
    }
}

/// Wraps a predicate and counts how often it is evaluated.
#[derive(Debug)]
pub struct Counted<P> {
    inner: P,
    evaluations: Cell<u64>,
}

impl<P> Counted<P> {
    pub fn new(inner: P) -> Self {
        Counted {
            inner,
            evaluations: Cell::new(0),
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: MarkPredicate> MarkPredicate for Counted<P> {
    fn is_marked(&self, index: usize) -> bool {
        self.evaluations.set(self.evaluations.get() + 1);
        self.inner.is_marked(index)
    }
}

/// `sin^2((2j + 1) * asin(sqrt(marked / n)))`: probability of measuring a
/// marked index after `j` iterations from the uniform state.
pub fn success_probability(n: usize, marked: usize, iterations: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("search space must be non-empty"));
    }
    if marked > n {
        return Err(Error::domain(format!(
            "{marked} marked indices exceed search space of {n}"
        )));
    }
    if marked == 0 {
        return Ok(0.0);
    }
    let theta = (marked as f64 / n as f64).sqrt().asin();
    let s = ((2 * iterations + 1) as f64 * theta).sin();
    Ok(s * s)
}

/// Seeded, reproducible random stream (ChaCha8).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform integer in `0..bound`; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Independent child stream seeded from this one.
    pub fn fork(&mut self) -> RngStream {
        RngStream::new(self.rng.next_u64())
    }

    /// Standard normal sample (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marked_set(set: &'static [usize]) -> impl Fn(usize) -> bool {
        move |i| set.contains(&i)
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(AmplitudeState::uniform(4).unwrap().amplitudes(), &[0.5; 4]);
        assert_eq!(AmplitudeState::uniform(1).unwrap().amplitudes(), &[1.0]);
        for n in [1, 2, 3, 10, 1000] {
            let s = AmplitudeState::uniform(n).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(AmplitudeState::uniform(0).is_err());
        assert!(AmplitudeState::uniform(MAX_STATE_LEN + 1).is_err());
    }

    /// Dense `(2|xi><xi| - I) * O_f` applied as a matrix product.
    fn matrix_iterate(amps: &[f64], marked: &[usize]) -> Vec<f64> {
        let n = amps.len();
        let flipped: Vec<f64> = amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if marked.contains(&i) { -a } else { a })
            .collect();
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let d = 2.0 / n as f64 - if r == c { 1.0 } else { 0.0 };
                        d * flipped[c]
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn single_marked_of_four_is_found_exactly() {
        let mut s = AmplitudeState::uniform(4).unwrap();
        s.grover_iterate(&marked_set(&[2]));
        let oracle = matrix_iterate(&[0.5; 4], &[2]);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in s.amplitudes().iter().zip([0.0, 0.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn nothing_or_everything_marked() {
        let mut s = AmplitudeState::uniform(4).unwrap();
        s.grover_iterate(&|_: usize| false);
        assert_eq!(s.amplitudes(), &[0.5; 4]);
        let mut s = AmplitudeState::uniform(4).unwrap();
        s.grover_iterate(&|_: usize| true);
        assert_eq!(s.amplitudes(), &[-0.5; 4]);
    }

    #[test]
    fn iteration_evaluates_predicate_once_per_index() {
        let pred = Counted::new(marked_set(&[1, 5]));
        let mut s = AmplitudeState::uniform(37).unwrap();
        s.grover_iterate(&pred);
        assert_eq!(pred.evaluations(), 37);
        s.grover_iterate(&pred);
        assert_eq!(pred.evaluations(), 74);
    }

    #[test]
    fn matches_matrix_form_on_arbitrary_states() {
        let mut rng = RngStream::new(3);
        let raw: Vec<f64> = (0..9).map(|_| rng.normal()).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        let amps: Vec<f64> = raw.iter().map(|a| a / norm).collect();
        let mut s = AmplitudeState::from_amplitudes(amps.clone()).unwrap();
        s.grover_iterate(&marked_set(&[0, 4, 7]));
        let oracle = matrix_iterate(&amps, &[0, 4, 7]);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn deterministic_measurement() {
        let s = AmplitudeState::from_amplitudes(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(s.clone().measure(&mut rng).unwrap(), 2);
        }
        let one = AmplitudeState::uniform(1).unwrap();
        assert_eq!(one.measure(&mut rng).unwrap(), 0);
    }

    #[test]
    fn uniform_measurement_frequencies() {
        let mut rng = RngStream::new(2024);
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            let s = AmplitudeState::uniform(4).unwrap();
            counts[s.measure(&mut rng).unwrap()] += 1;
        }
        // binomial(10000, 1/4): sigma = sqrt(10000 * 0.25 * 0.75)
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!((c as f64 - 2500.0).abs() <= 3.0 * sigma, "{counts:?}");
        }
        // chi-square with 3 degrees of freedom, 99.9% quantile 16.27
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn unnormalized_state_cannot_be_measured() {
        let s = AmplitudeState::from_amplitudes(vec![1.0, 1.0]).unwrap();
        let err = s.measure(&mut RngStream::new(0)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn success_probability_examples() {
        // theta = pi/6, (2*1 + 1) * theta = pi/2
        assert!((success_probability(4, 1, 1).unwrap() - 1.0).abs() < 1e-15);
        let mut s = AmplitudeState::uniform(4).unwrap();
        s.grover_iterate(&marked_set(&[3]));
        assert!((s.marked_probability(&marked_set(&[3])) - 1.0).abs() < 1e-15);

        for (n, m) in [(8, 3), (16, 0), (5, 5), (100, 17)] {
            let p = success_probability(n, m, 0).unwrap();
            assert!((p - m as f64 / n as f64).abs() < 1e-15);
        }
        assert!((success_probability(9, 9, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(success_probability(9, 0, 7).unwrap(), 0.0);
        assert!(success_probability(4, 5, 0).is_err());
    }

    #[test]
    fn seeded_streams_repeat() {
        let mut a = RngStream::new(99);
        let mut b = RngStream::new(99);
        for _ in 0..20 {
            assert_eq!(a.below(1000), b.below(1000));
        }
        assert_eq!(a.fork().next_u64(), b.fork().next_u64());
    }
}
