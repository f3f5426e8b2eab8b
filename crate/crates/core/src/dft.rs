//! Exact reference transforms.
//!
//! The Fourier matrix used throughout is the unitary one,
//! `W[i][k] = exp(-2*pi*i*k*I/N) / sqrt(N)`, and a coefficient is the plain
//! (unconjugated) row-times-vector product `c_i = sum_k W[i][k] * x_k`.
//! Nothing here assumes `N` is a power of two.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Execution;

pub type Complex = num_complex::Complex64;

/// Non-empty vector of finite complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex>);

impl ComplexVec {
    pub fn new(elems: Vec<Complex>) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::domain("vector must have at least one element"));
        }
        if let Some(k) = elems.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain(format!("non-finite entry at index {k}")));
        }
        Ok(ComplexVec(elems))
    }

    /// Promotes real samples to complex values with zero imaginary part.
    pub fn from_real(samples: &[f64]) -> Result<Self> {
        Self::new(samples.iter().map(|&r| Complex::new(r, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.0.iter()
    }

    /// Component-wise difference. Lengths must agree.
    pub fn sub(&self, other: &ComplexVec) -> Result<ComplexVec> {
        if self.len() != other.len() {
            return Err(Error::domain(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(ComplexVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex;

    fn index(&self, k: usize) -> &Complex {
        &self.0[k]
    }
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds an `n x n` matrix from row-major data.
    pub fn from_row_major(n: usize, data: Vec<Complex>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("matrix side must be positive"));
        }
        if data.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix { n, data })
    }

    /// Builds a matrix from a list of rows; rejects ragged or non-square input.
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::domain(format!(
                "matrix must be square: {n} rows but a row of length {}",
                bad.len()
            )));
        }
        Self::from_row_major(n, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Complex::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_row_major(n, vec![Complex::new(0.0, 0.0); n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.n).map(|i| self.data[i * self.n + j]).collect()
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i]);
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.n != other.n {
            return Err(Error::domain("matrix side mismatch"));
        }
        Ok(ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}

/// Squared Euclidean (Frobenius) norm.
pub trait Energy {
    fn energy(&self) -> f64;
}

impl Energy for [Complex] {
    fn energy(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Energy for ComplexVec {
    fn energy(&self) -> f64 {
        self.0.energy()
    }
}

impl Energy for ComplexMatrix {
    fn energy(&self) -> f64 {
        self.data.energy()
    }
}

pub fn energy<E: Energy + ?Sized>(x: &E) -> f64 {
    x.energy()
}

/// Row generator for the unitary Fourier matrix of one size.
///
/// Holds the `N` distinct powers of `omega` so every matrix entry is a table
/// lookup at exponent `(i * k) mod N`, which keeps large-index entries as
/// accurate as small ones.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    n: usize,
    scale: f64,
    powers: Vec<Complex>,
}

impl FourierBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("transform length must be positive"));
        }
        let powers = (0..n)
            .map(|r| Complex::from_polar(1.0, -2.0 * PI * r as f64 / n as f64))
            .collect();
        Ok(FourierBasis {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            powers,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `W[i][k]`; indices are not range-checked.
    #[inline]
    pub fn entry(&self, i: usize, k: usize) -> Complex {
        self.powers[(i * k) % self.n] * self.scale
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::domain(format!(
                "row index {i} out of range for N = {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> Result<ComplexVec> {
        self.check_index(i)?;
        Ok(ComplexVec((0..self.n).map(|k| self.entry(i, k)).collect()))
    }

    /// `W_i . x` over a raw slice of length `N`.
    pub fn inner(&self, i: usize, x: &[Complex]) -> Result<Complex> {
        self.check_index(i)?;
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "vector length {} does not match N = {}",
                x.len(),
                self.n
            )));
        }
        Ok(self.inner_unchecked(i, x))
    }

    #[inline]
    pub(crate) fn inner_unchecked(&self, i: usize, x: &[Complex]) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        let mut r = 0usize;
        for &xk in x {
            acc += self.powers[r] * xk;
            r += i;
            if r >= self.n {
                r %= self.n;
            }
        }
        acc * self.scale
    }

    #[inline]
    fn inner_conj_unchecked(&self, k: usize, c: &[Complex]) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        let mut r = 0usize;
        for &ci in c {
            acc += self.powers[r].conj() * ci;
            r += k;
            if r >= self.n {
                r %= self.n;
            }
        }
        acc * self.scale
    }

    /// `W x` by the matrix-product definition.
    pub fn forward(&self, x: &[Complex], exec: Execution) -> Vec<Complex> {
        exec.map_indices(self.n, |i| self.inner_unchecked(i, x))
    }

    /// `W^H c`, the inverse of [`forward`](Self::forward).
    pub fn inverse(&self, c: &[Complex], exec: Execution) -> Vec<Complex> {
        exec.map_indices(self.n, |k| self.inner_conj_unchecked(k, c))
    }
}

/// Row `i` of the `n x n` Fourier matrix.
pub fn fourier_row(n: usize, i: usize) -> Result<ComplexVec> {
    FourierBasis::new(n)?.row(i)
}

/// The full Fourier matrix. Symmetric, so rows and columns coincide.
pub fn fourier_matrix(n: usize) -> Result<ComplexMatrix> {
    let basis = FourierBasis::new(n)?;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            data.push(basis.entry(i, k));
        }
    }
    ComplexMatrix::from_row_major(n, data)
}

pub fn dft_1d(x: &ComplexVec) -> ComplexVec {
    dft_1d_with(x, Execution::default())
}

pub fn dft_1d_with(x: &ComplexVec, exec: Execution) -> ComplexVec {
    let basis = FourierBasis::new(x.len()).expect("ComplexVec is non-empty");
    ComplexVec(basis.forward(x.as_slice(), exec))
}

pub fn idft_1d(c: &ComplexVec) -> ComplexVec {
    idft_1d_with(c, Execution::default())
}

pub fn idft_1d_with(c: &ComplexVec, exec: Execution) -> ComplexVec {
    let basis = FourierBasis::new(c.len()).expect("ComplexVec is non-empty");
    ComplexVec(basis.inverse(c.as_slice(), exec))
}

/// `W F`: every column of `f` replaced by its 1D transform.
pub fn transform_columns(f: &ComplexMatrix, exec: Execution) -> ComplexMatrix {
    transform_axis(f, exec, true, false)
}

fn transform_axis(f: &ComplexMatrix, exec: Execution, columns: bool, inverse: bool) -> ComplexMatrix {
    let n = f.side();
    let basis = FourierBasis::new(n).expect("matrix side is positive");
    let lines: Vec<Vec<Complex>> = exec.map_indices(n, |l| {
        let line = if columns { f.column(l) } else { f.row(l).to_vec() };
        if inverse {
            basis.inverse(&line, Execution::Sequential)
        } else {
            basis.forward(&line, Execution::Sequential)
        }
    });
    let mut out = ComplexMatrix::zeros(n).expect("matrix side is positive");
    for (l, line) in lines.into_iter().enumerate() {
        for (k, v) in line.into_iter().enumerate() {
            if columns {
                out[(k, l)] = v;
            } else {
                out[(l, k)] = v;
            }
        }
    }
    out
}

/// `C = W F W`, computed as a column pass followed by a row pass.
pub fn dft_2d(f: &ComplexMatrix) -> ComplexMatrix {
    dft_2d_with(f, Execution::default())
}

pub fn dft_2d_with(f: &ComplexMatrix, exec: Execution) -> ComplexMatrix {
    let g = transform_axis(f, exec, true, false);
    transform_axis(&g, exec, false, false)
}

/// `F = W^H C W^H`.
pub fn idft_2d(c: &ComplexMatrix) -> ComplexMatrix {
    let g = transform_axis(c, Execution::default(), false, true);
    transform_axis(&g, Execution::default(), true, true)
}

/// `|W_i . x|^2` for `n = len(x)`.
pub fn inner_sq(n: usize, i: usize, x: &ComplexVec) -> Result<f64> {
    if n != x.len() {
        return Err(Error::domain(format!(
            "n = {n} does not match vector length {}",
            x.len()
        )));
    }
    Ok(FourierBasis::new(n)?.inner(i, x.as_slice())?.norm_sqr())
}

/// Unitary forward transform through an FFT. Same values as [`dft_1d`] up to
/// rounding; used where many full spectra are needed (energy tables, signal
/// synthesis).
pub fn fast_dft(x: &[Complex]) -> Vec<Complex> {
    fft(x, false)
}

/// Unitary inverse transform through an FFT.
pub fn fast_idft(c: &[Complex]) -> Vec<Complex> {
    fft(c, true)
}

fn fft(x: &[Complex], inverse: bool) -> Vec<Complex> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = x.to_vec();
    plan.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    buf
}
