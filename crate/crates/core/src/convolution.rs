//! Periodic convolution estimated from two sparse spectra.
//!
//! With the unitary transform, the convolution theorem carries a `sqrt(N)`:
//! `DFT(u * v) = sqrt(N) * DFT(u) . DFT(v)` (pointwise). Coefficients missing
//! from either sparse spectrum are treated as zero.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amplitude::RngStream;
use crate::dft::{dft_1d, idft_1d, Complex, ComplexVec, Energy};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ledger::QueryLedger;
use crate::qdft1d::{qdft_1d_with, QdftOptions, SparseSpectrum};

/// `w_k = sum_j u_j * v_{(k - j) mod N}`, evaluated directly.
pub fn conv_direct(u: &ComplexVec, v: &ComplexVec) -> Result<ComplexVec> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::domain(format!(
            "operands differ in length ({n} vs {}); pad them first",
            v.len()
        )));
    }
    let (u, v) = (u.as_slice(), v.as_slice());
    let w = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| u[j] * v[(k + n - j) % n])
                .sum::<Complex>()
        })
        .collect();
    ComplexVec::new(w)
}

/// Zero-extends the shorter operand at the tail.
pub fn pad_to_common(u: &ComplexVec, v: &ComplexVec) -> (ComplexVec, ComplexVec) {
    let n = u.len().max(v.len());
    let pad = |x: &ComplexVec| {
        let mut out = x.as_slice().to_vec();
        out.resize(n, Complex::new(0.0, 0.0));
        ComplexVec::new(out).expect("padding keeps entries finite")
    };
    (pad(u), pad(v))
}

/// Pointwise product `sqrt(N) * cu[k] * cv[k]` over indices present in both
/// spectra. The result has no residual: its total is its retained energy.
pub fn spectrum_product(cu: &SparseSpectrum, cv: &SparseSpectrum) -> Result<SparseSpectrum> {
    let n = cu.len();
    if cv.len() != n {
        return Err(Error::domain(format!(
            "spectra differ in length ({n} vs {})",
            cv.len()
        )));
    }
    let scale = (n as f64).sqrt();
    let entries: BTreeMap<usize, Complex> = cu
        .entries()
        .iter()
        .filter_map(|(&k, &a)| cv.get(k).map(|b| (k, a * b * scale)))
        .collect();
    let energy = entries.values().map(|c| c.norm_sqr()).sum();
    SparseSpectrum::from_entries(n, entries, energy)
}

/// `idft(sqrt(N) * dft(u) . dft(v))` from full spectra.
pub fn conv_spectral_exact(u: &ComplexVec, v: &ComplexVec) -> Result<ComplexVec> {
    if u.len() != v.len() {
        return Err(Error::domain("operands differ in length"));
    }
    let scale = (u.len() as f64).sqrt();
    let (cu, cv) = (dft_1d(u), dft_1d(v));
    let prod = cu.iter().zip(cv.iter()).map(|(a, b)| a * b * scale).collect();
    Ok(idft_1d(&ComplexVec::new(prod)?))
}

/// `||w - w_hat|| / ||w||`. Zero when both are zero; the absolute error when
/// only `w` is zero.
pub fn relative_l2_error(exact: &ComplexVec, estimate: &ComplexVec) -> Result<f64> {
    let diff = exact.sub(estimate)?.energy().sqrt();
    let norm = exact.energy().sqrt();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionReport {
    pub w_hat: Vec<Complex>,
    pub w_exact: Option<Vec<Complex>>,
    pub relative_l2_error: Option<f64>,
    /// One ledger per operand transform, `u` first.
    pub ledgers: [QueryLedger; 2],
    pub found: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionOptions {
    pub search: QdftOptions,
    pub with_exact: bool,
    pub execution: Execution,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        ConvolutionOptions {
            search: QdftOptions::default(),
            with_exact: true,
            execution: Execution::default(),
        }
    }
}

/// Estimates `u * v` from sparse spectra of both operands, compared against
/// [`conv_direct`].
pub fn conv_via_qdft(
    u: &ComplexVec,
    v: &ComplexVec,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<ConvolutionReport> {
    conv_via_qdft_with(u, v, epsilon, rng, &ConvolutionOptions::default())
}

pub fn conv_via_qdft_with(
    u: &ComplexVec,
    v: &ComplexVec,
    epsilon: f64,
    rng: &mut RngStream,
    options: &ConvolutionOptions,
) -> Result<ConvolutionReport> {
    let (u, v) = pad_to_common(u, v);
    let mut rng_u = rng.fork();
    let mut rng_v = rng.fork();
    let (ru, rv) = options.execution.join(
        || qdft_1d_with(&u, epsilon, &mut rng_u, &options.search),
        || qdft_1d_with(&v, epsilon, &mut rng_v, &options.search),
    );
    let (ru, rv) = (ru?, rv?);

    let product = spectrum_product(&ru.spectrum, &rv.spectrum)?;
    let w_hat = idft_1d(&ComplexVec::new(product.densify())?);

    let (w_exact, relative) = if options.with_exact {
        let w = conv_direct(&u, &v)?;
        let err = relative_l2_error(&w, &w_hat)?;
        (Some(w.into_inner()), Some(err))
    } else {
        (None, None)
    };

    Ok(ConvolutionReport {
        w_hat: w_hat.into_inner(),
        w_exact,
        relative_l2_error: relative,
        ledgers: [ru.ledger, rv.ledger],
        found: [ru.spectrum.found(), rv.spectrum.found()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> ComplexVec {
        ComplexVec::from_real(v).unwrap()
    }

    #[test]
    fn delta_is_identity() {
        let v = ComplexVec::new(vec![
            Complex::new(1.0, 2.0),
            Complex::new(-3.0, 0.5),
            Complex::new(0.0, 0.0),
            Complex::new(4.0, -1.0),
        ])
        .unwrap();
        assert_eq!(conv_direct(&real(&[1.0, 0.0, 0.0, 0.0]), &v).unwrap(), v);
    }

    #[test]
    fn two_point_case() {
        let w = conv_direct(&real(&[1.0, 1.0]), &real(&[1.0, 1.0])).unwrap();
        assert_eq!(w, real(&[2.0, 2.0]));
    }

    #[test]
    fn zero_operand() {
        let w = conv_direct(&real(&[0.0; 5]), &real(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        assert_eq!(w.energy(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(conv_direct(&real(&[1.0]), &real(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn padding() {
        let (a, b) = pad_to_common(&real(&[1.0, 2.0]), &real(&[1.0, 2.0, 3.0]));
        assert_eq!(a, real(&[1.0, 2.0, 0.0]));
        assert_eq!(b, real(&[1.0, 2.0, 3.0]));
        let (a, b) = pad_to_common(&real(&[1.0, 2.0]), &real(&[3.0, 4.0]));
        assert_eq!((a, b), (real(&[1.0, 2.0]), real(&[3.0, 4.0])));
    }

    fn full(x: &ComplexVec) -> SparseSpectrum {
        let entries = dft_1d(x).iter().copied().enumerate().collect();
        SparseSpectrum::from_entries(x.len(), entries, x.energy()).unwrap()
    }

    #[test]
    fn product_with_flat_spectrum_reproduces_the_other_factor() {
        let delta = real(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let v = real(&[0.5, -1.0, 2.0, 0.25, 3.0, -0.75]);
        let (cu, cv) = (full(&delta), full(&v));
        let p = spectrum_product(&cu, &cv).unwrap();
        for (k, c) in cv.entries() {
            assert!((p.get(*k).unwrap() - c).norm() < 1e-14);
        }
    }

    #[test]
    fn product_edge_cases() {
        let empty = SparseSpectrum::empty(4, 1.0).unwrap();
        let v = full(&real(&[1.0, 2.0, 3.0, 4.0]));
        assert!(spectrum_product(&empty, &v).unwrap().is_empty());
        assert!(spectrum_product(&v, &empty).unwrap().is_empty());

        let a = SparseSpectrum::from_entries(1, BTreeMap::from([(0, Complex::new(2.0, 1.0))]), 5.0).unwrap();
        let b = SparseSpectrum::from_entries(1, BTreeMap::from([(0, Complex::new(0.0, 3.0))]), 9.0).unwrap();
        let p = spectrum_product(&a, &b).unwrap();
        assert_eq!(p.get(0).unwrap(), Complex::new(2.0, 1.0) * Complex::new(0.0, 3.0));

        let short = full(&real(&[1.0, 2.0]));
        assert!(spectrum_product(&short, &v).is_err());
    }

    #[test]
    fn exact_spectral_route_matches_direct() {
        let mut rng = RngStream::new(17);
        for n in [1, 2, 5, 16, 33] {
            let u = ComplexVec::new((0..n).map(|_| Complex::new(rng.normal(), rng.normal())).collect()).unwrap();
            let v = ComplexVec::new((0..n).map(|_| Complex::new(rng.normal(), rng.normal())).collect()).unwrap();
            let a = conv_spectral_exact(&u, &v).unwrap();
            let b = conv_direct(&u, &v).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_operand_through_pipeline() {
        let u = real(&[0.0; 8]);
        let v = real(&[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 0.0, 3.0]);
        let report = conv_via_qdft(&u, &v, 0.01, &mut RngStream::new(2)).unwrap();
        assert!(report.w_hat.iter().all(|z| z.norm() == 0.0));
        assert_eq!(report.relative_l2_error, Some(0.0));
    }

    #[test]
    fn unequal_lengths_are_padded() {
        let u = real(&[1.0]);
        let v = real(&[1.0, 2.0, 3.0]);
        let report = conv_via_qdft(&u, &v, 1e-9, &mut RngStream::new(2)).unwrap();
        assert_eq!(report.w_hat.len(), 3);
        assert!(report.relative_l2_error.unwrap() < 1e-6);
    }
}
