//! Lowest eigenvalue of a Pauli-sum Hamiltonian.
//!
//! Small registers are diagonalised densely (Householder tridiagonalisation
//! followed by implicit QL). A complex Hermitian matrix `A + iB` is handled
//! through its real symmetric embedding `[[A, −B], [B, A]]`, which has the same
//! eigenvalues, each twice. Larger registers use matrix-free Lanczos with full
//! reorthogonalisation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::rng::Stream;
use crate::simcore::Observable;
use crate::{Error, Result};

/// Largest register diagonalised densely.
pub const DENSE_MAX_QUBITS: usize = 8;
/// Largest register handled at all.
pub const EXACT_MAX_QUBITS: usize = 14;

const LANCZOS_MAX_STEPS: usize = 400;
const LANCZOS_TOL: f64 = 1e-12;

/// Dense row-major `H` as (real part, imaginary part, any imaginary entry present).
pub(crate) fn dense_matrix(h: &Observable) -> (Vec<f64>, Vec<f64>, bool) {
    let dim = 1usize << h.num_qubits();
    let mut re = vec![0.0; dim * dim];
    let mut im = vec![0.0; dim * dim];
    let mut complex = false;
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        h.apply_into(&col, &mut out);
        for (i, v) in out.iter().enumerate() {
            re[i * dim + j] = v.re;
            im[i * dim + j] = v.im;
            complex |= v.im != 0.0;
        }
    }
    (re, im, complex)
}

/// Reduces a symmetric matrix to tridiagonal form in place; returns (diagonal, off-diagonal).
/// `off[i]` couples `i` and `i + 1`; `off[n − 1]` is zero.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let norm = libm::sqrt((k + 1..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>());
        d[k] = a[k * n + k];
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vnorm = libm::sqrt(v[..m].iter().map(|x| x * x).sum::<f64>());
        e[k] = alpha;
        if vnorm == 0.0 {
            continue;
        }
        v[..m].iter_mut().for_each(|x| *x /= vnorm);
        // B ← (I − 2vvᵀ) B (I − 2vvᵀ) on the trailing block.
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            p[i] = 2.0 * (0..m).map(|j| a[row + j] * v[j]).sum::<f64>();
        }
        let kk: f64 = (0..m).map(|i| v[i] * p[i]).sum();
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            for j in 0..m {
                a[row + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1) * n + n - 1];
    }
    (d, e)
}

fn copysign(mag: f64, sign: f64) -> f64 {
    if sign >= 0.0 {
        libm::fabs(mag)
    } else {
        -libm::fabs(mag)
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson-style shifts.
pub(crate) fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NonFinite("eigenvalue iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// All eigenvalues of a dense real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch { expected: n * n, got: a.len() });
    }
    let (d, e) = tridiagonalize(&mut a, n);
    let mut vals = tridiagonal_eigenvalues(d, e)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn dense_ground(h: &Observable) -> Result<f64> {
    let dim = 1usize << h.num_qubits();
    let (re, im, complex) = dense_matrix(h);
    let vals = if complex {
        let n = 2 * dim;
        let mut a = vec![0.0; n * n];
        for i in 0..dim {
            for j in 0..dim {
                let (r, c) = (re[i * dim + j], im[i * dim + j]);
                a[i * n + j] = r;
                a[(i + dim) * n + j + dim] = r;
                a[i * n + j + dim] = -c;
                a[(i + dim) * n + j] = c;
            }
        }
        symmetric_eigenvalues(a, n)?
    } else {
        symmetric_eigenvalues(re, dim)?
    };
    Ok(vals[0])
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn lanczos_ground(h: &Observable) -> Result<f64> {
    let dim = 1usize << h.num_qubits();
    let mut rng = Stream::from_seed(0x1a2c);
    let mut q: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.normal(), rng.normal())).collect();
    let norm = libm::sqrt(dot(&q, &q).re);
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut previous = f64::INFINITY;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for step in 0..LANCZOS_MAX_STEPS.min(dim) {
        w.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        h.apply_into(&q, &mut w);
        let alpha = dot(&q, &w).re;
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = libm::sqrt(dot(&w, &w).re);
        let mut e = betas.clone();
        e.push(0.0);
        let ritz = tridiagonal_eigenvalues(alphas.clone(), e)?;
        let lowest = ritz.iter().copied().fold(f64::INFINITY, f64::min);
        if beta < 1e-10 || (step > 4 && libm::fabs(lowest - previous) < LANCZOS_TOL) {
            return Ok(lowest);
        }
        previous = lowest;
        betas.push(beta);
        q = w.iter().map(|x| x / beta).collect();
    }
    Ok(previous)
}

/// Minimum eigenvalue of `h`. Registers above [`EXACT_MAX_QUBITS`] are rejected;
/// supply a reference energy instead.
pub fn ground_energy(h: &Observable) -> Result<f64> {
    let n = h.num_qubits();
    if n > EXACT_MAX_QUBITS {
        return Err(Error::TooLargeForExact(n));
    }
    if h.terms().is_empty() {
        return Ok(0.0);
    }
    if n <= DENSE_MAX_QUBITS {
        dense_ground(h)
    } else {
        lanczos_ground(h)
    }
}

/// Lanczos estimate regardless of register size; exposed for cross-checks.
pub fn ground_energy_lanczos(h: &Observable) -> Result<f64> {
    if h.num_qubits() > EXACT_MAX_QUBITS {
        return Err(Error::TooLargeForExact(h.num_qubits()));
    }
    lanczos_ground(h)
}
