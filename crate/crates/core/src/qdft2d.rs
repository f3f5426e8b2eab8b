//! Two-dimensional transform by separability.
//!
//! `C = W F W` is split into `G = W F` followed by `C = G W`. Each factor is
//! produced by the residual-energy loop of [`crate::qdft1d`] running over the
//! `N^2` pair indices `k = i * N + j`.
//!
//! Orientation of the second pass: `C[b][a] = g_b . W_a`, where `g_b` is row
//! `b` of `G` and `W_a` is column `a` of `W`. `W` is symmetric, so column `a`
//! equals row `a`, and the second pass is the same column search run on
//! `G^T` (its columns are the rows of `G`). Its pair `(a, b)` is then stored
//! as `C[(b, a)]`.
//!
//! The second search runs on the truncated `G`, so the values it verifies
//! differ from the true `C` by whatever the first pass left out. Positions
//! come from that search; the reported values are then read out exactly from
//! `F` (one row of `G` per distinct output row). The search-side values are
//! kept in [`Qdft2dRun::searched`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amplitude::RngStream;
use crate::dft::{fast_dft, transform_columns, Complex, ComplexMatrix, Energy, FourierBasis};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ledger::QueryLedger;
use crate::qdft1d::{extract, Extraction, QdftOptions, SearchSpace};

/// Position `(row, col)` in an `N x N` coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PairIndex {
    pub row: usize,
    pub col: usize,
}

impl PairIndex {
    pub fn new(row: usize, col: usize) -> Self {
        PairIndex { row, col }
    }

    /// Flattened key `row * n + col`.
    pub fn key(self, n: usize) -> usize {
        self.row * n + self.col
    }

    pub fn from_key(key: usize, n: usize) -> Self {
        PairIndex {
            row: key / n,
            col: key % n,
        }
    }

    pub fn transposed(self) -> Self {
        PairIndex {
            row: self.col,
            col: self.row,
        }
    }
}

/// Search space of `W_i . m_j` over all pairs, `m_j` being column `j` of the
/// input matrix.
#[derive(Debug, Clone)]
pub struct PairSpace {
    n: usize,
    basis: FourierBasis,
    /// Row `j` holds column `j` of the input.
    columns: ComplexMatrix,
    energies: Vec<f64>,
    total: f64,
}

impl PairSpace {
    pub fn new(input: &ComplexMatrix) -> Result<Self> {
        let n = input.side();
        if n * n > crate::amplitude::MAX_STATE_LEN {
            return Err(Error::domain(format!(
                "{n}x{n} pair space exceeds the dense simulation cutoff"
            )));
        }
        let columns = input.transpose();
        let mut energies = vec![0.0; n * n];
        for j in 0..n {
            for (i, c) in fast_dft(columns.row(j)).iter().enumerate() {
                energies[i * n + j] = c.norm_sqr();
            }
        }
        Ok(PairSpace {
            n,
            basis: FourierBasis::new(n)?,
            columns,
            energies,
            total: input.energy(),
        })
    }

    pub fn side(&self) -> usize {
        self.n
    }
}

impl SearchSpace for PairSpace {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn oracle_energy(&self, index: usize) -> f64 {
        self.energies[index]
    }

    fn coefficient(&self, index: usize) -> Complex {
        let p = PairIndex::from_key(index, self.n);
        self.basis.inner_unchecked(p.row, self.columns.row(p.col))
    }

    fn total_energy(&self) -> f64 {
        self.total
    }
}

/// Retained entries of an `N x N` coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixSpectrum {
    n: usize,
    entries: BTreeMap<PairIndex, Complex>,
    residual_energy: f64,
    total_energy: f64,
}

impl SparseMatrixSpectrum {
    pub fn from_entries(
        n: usize,
        entries: BTreeMap<PairIndex, Complex>,
        total_energy: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("matrix side must be positive"));
        }
        if let Some(p) = entries.keys().find(|p| p.row >= n || p.col >= n) {
            return Err(Error::domain(format!(
                "entry ({}, {}) out of range for side {n}",
                p.row, p.col
            )));
        }
        let retained: f64 = entries.values().map(|c| c.norm_sqr()).sum();
        Ok(SparseMatrixSpectrum {
            n,
            entries,
            residual_energy: (total_energy - retained).max(0.0),
            total_energy,
        })
    }

    fn from_extraction(n: usize, out: &Extraction, transpose: bool) -> Self {
        let entries = out
            .entries
            .iter()
            .map(|(&k, &c)| {
                let p = PairIndex::from_key(k, n);
                (if transpose { p.transposed() } else { p }, c)
            })
            .collect();
        SparseMatrixSpectrum {
            n,
            entries,
            residual_energy: out.residual_energy,
            total_energy: out.total_energy,
        }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn found(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<PairIndex, Complex> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Complex> {
        self.entries.get(&PairIndex::new(row, col)).copied()
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

    /// Zero-filled dense matrix.
    pub fn densify(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n).expect("side is positive");
        for (p, &c) in &self.entries {
            m[(p.row, p.col)] = c;
        }
        m
    }
}

/// Sparse `W M`: one run of the residual-energy loop over the pair space of
/// `columns`. Every entry is `W_i . m_j` computed directly.
pub fn pair_search_pass(
    columns: &ComplexMatrix,
    epsilon_pass: f64,
    rng: &mut RngStream,
    ledger: &mut QueryLedger,
) -> Result<SparseMatrixSpectrum> {
    let (spectrum, used) = pair_search_pass_with(columns, epsilon_pass, rng, &QdftOptions::default())?;
    ledger.merge(&used);
    Ok(spectrum)
}

pub fn pair_search_pass_with(
    columns: &ComplexMatrix,
    epsilon_pass: f64,
    rng: &mut RngStream,
    options: &QdftOptions,
) -> Result<(SparseMatrixSpectrum, QueryLedger)> {
    let space = PairSpace::new(columns)?;
    let out = extract(&space, epsilon_pass, rng, options)?;
    Ok((
        SparseMatrixSpectrum::from_extraction(columns.side(), &out, false),
        out.ledger,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Qdft2dOptions {
    pub search: QdftOptions,
    /// Compute `G` exactly instead of searching for it.
    pub exhaustive_first_pass: bool,
    /// Share of epsilon given to the first pass; the rest goes to the second.
    pub first_pass_share: f64,
}

impl Default for Qdft2dOptions {
    fn default() -> Self {
        Qdft2dOptions {
            search: QdftOptions::default(),
            exhaustive_first_pass: false,
            first_pass_share: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qdft2dRun {
    /// Retained entries of `C`. Its residual is measured against `||F||^2`.
    pub spectrum: SparseMatrixSpectrum,
    /// Retained entries of `G` after the first pass.
    pub intermediate: SparseMatrixSpectrum,
    /// Second-pass values as computed from the truncated `G`, in `C`
    /// orientation. Residual is relative to that pass's input energy.
    pub searched: SparseMatrixSpectrum,
    /// Total counters across both passes.
    pub ledger: QueryLedger,
    pub pass_ledgers: [QueryLedger; 2],
    /// Residual energy left by each pass, relative to that pass's input.
    pub pass_residuals: [f64; 2],
}

/// Sparse 2D transform with the default options (`epsilon / 2` per pass).
pub fn qdft_2d(
    f: &ComplexMatrix,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<(SparseMatrixSpectrum, QueryLedger)> {
    let run = qdft_2d_with(f, epsilon, rng, &Qdft2dOptions::default())?;
    Ok((run.spectrum, run.ledger))
}

pub fn qdft_2d_with(
    f: &ComplexMatrix,
    epsilon: f64,
    rng: &mut RngStream,
    options: &Qdft2dOptions,
) -> Result<Qdft2dRun> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let share = options.first_pass_share;
    if !(share > 0.0 && share < 1.0) {
        return Err(Error::domain(format!("first-pass share must lie in (0, 1), got {share}")));
    }
    let n = f.side();

    let (intermediate, first_ledger) = if options.exhaustive_first_pass {
        let g = transform_columns(f, Execution::default());
        let entries = (0..n * n)
            .map(|k| {
                let p = PairIndex::from_key(k, n);
                (p, g[(p.row, p.col)])
            })
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .collect();
        (
            SparseMatrixSpectrum::from_entries(n, entries, f.energy())?,
            QueryLedger::default(),
        )
    } else {
        pair_search_pass_with(f, epsilon * share, rng, &options.search)?
    };

    let g_rows_as_columns = intermediate.densify().transpose();
    let (second, second_ledger) =
        pair_search_pass_with(&g_rows_as_columns, epsilon * (1.0 - share), rng, &options.search)?;

    let searched = SparseMatrixSpectrum {
        n,
        entries: second
            .entries
            .iter()
            .map(|(p, &c)| (p.transposed(), c))
            .collect(),
        residual_energy: second.residual_energy,
        total_energy: second.total_energy,
    };
    let spectrum = SparseMatrixSpectrum::from_entries(n, exact_readout(f, &searched)?, f.energy())?;

    Ok(Qdft2dRun {
        spectrum,
        pass_residuals: [intermediate.residual_energy, searched.residual_energy],
        intermediate,
        searched,
        ledger: first_ledger.merged(&second_ledger),
        pass_ledgers: [first_ledger, second_ledger],
    })
}

/// Exact `C = W F W` at the positions of `located`.
fn exact_readout(
    f: &ComplexMatrix,
    located: &SparseMatrixSpectrum,
) -> Result<BTreeMap<PairIndex, Complex>> {
    let n = f.side();
    let basis = FourierBasis::new(n)?;
    let columns = f.transpose();
    let mut out = BTreeMap::new();
    let mut row_cache: Option<(usize, Vec<Complex>)> = None;
    // entries iterate in row order, so one cached row of G suffices
    for p in located.entries.keys() {
        if row_cache.as_ref().map(|(r, _)| *r) != Some(p.row) {
            let g_row = (0..n)
                .map(|k| basis.inner_unchecked(p.row, columns.row(k)))
                .collect();
            row_cache = Some((p.row, g_row));
        }
        let (_, g_row) = row_cache.as_ref().expect("filled above");
        out.insert(*p, basis.inner_unchecked(p.col, g_row));
    }
    Ok(out)
}
