#![allow(clippy::needless_range_loop)]

//! Brute-force reference computations, written straight from the
//! definitions and independent of the library's transform code.

#![allow(dead_code)]

use std::f64::consts::PI;

use qdft::{Complex, ComplexMatrix, ComplexVec, RngStream};

/// `exp(-2 pi i j k / n) / sqrt(n)`, evaluated with a fresh sin/cos per entry.
pub fn w(n: usize, j: usize, k: usize) -> Complex {
    let angle = -2.0 * PI * (j as f64) * (k as f64) / n as f64;
    Complex::new(angle.cos(), angle.sin()) / (n as f64).sqrt()
}

pub fn naive_dft(x: &[Complex]) -> Vec<Complex> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|k| w(n, i, k) * x[k]).sum())
        .collect()
}

pub fn naive_idft(c: &[Complex]) -> Vec<Complex> {
    let n = c.len();
    (0..n)
        .map(|k| (0..n).map(|i| w(n, i, k).conj() * c[i]).sum())
        .collect()
}

pub fn matmul(n: usize, a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn w_matrix(n: usize) -> Vec<Complex> {
    (0..n * n).map(|k| w(n, k / n, k % n)).collect()
}

/// `W F W` by two explicit matrix products.
pub fn naive_dft_2d(f: &ComplexMatrix) -> Vec<Complex> {
    let n = f.side();
    let wm = w_matrix(n);
    matmul(n, &matmul(n, &wm, f.as_slice()), &wm)
}

pub fn naive_conv(u: &[Complex], v: &[Complex]) -> Vec<Complex> {
    let n = u.len();
    let mut out = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        for j in 0..n {
            let idx = ((k as isize - j as isize).rem_euclid(n as isize)) as usize;
            out[k] += u[j] * v[idx];
        }
    }
    out
}

pub fn energy(x: &[Complex]) -> f64 {
    x.iter().map(|z| z.re * z.re + z.im * z.im).sum()
}

pub fn random_complex(n: usize, rng: &mut RngStream) -> ComplexVec {
    ComplexVec::new((0..n).map(|_| Complex::new(rng.normal(), rng.normal())).collect()).unwrap()
}

pub fn random_matrix(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_row_major(
        n,
        (0..n * n).map(|_| Complex::new(rng.normal(), rng.normal())).collect(),
    )
    .unwrap()
}

/// `exp(-(k - center)^2 / (2 width^2))` on `0..n`.
pub fn gaussian_bump(n: usize, center: f64, width: f64) -> ComplexVec {
    ComplexVec::from_real(
        &(0..n)
            .map(|k| (-((k as f64 - center).powi(2)) / (2.0 * width * width)).exp())
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Smooth 16x16-style test image: a gentle ramp plus a wide blob.
pub fn smooth_image(n: usize) -> ComplexMatrix {
    let c = (n as f64 - 1.0) / 2.0;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
                    40.0 + 2.0 * i as f64 + 1.0 * j as f64 + 80.0 * (-r2 / (2.0 * (n as f64 / 4.0).powi(2))).exp()
                })
                .collect()
        })
        .collect();
    ComplexMatrix::from_real_rows(&rows).unwrap()
}

pub fn report(id: u32, ok: bool, detail: &str) {
    println!("[{}] criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
}
