//! Dense complex linear algebra used throughout the crate.
//!
//! Hermitian eigenproblems and SVDs are delegated to `nalgebra`; the complex
//! Schur form and the matrix exponential are implemented here because the
//! `no_std` build of `nalgebra` offers neither in a form suited to complex
//! non-normal matrices.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const MAX_SVD_ITER: usize = 10_000;
const MAX_QR_ITER_PER_EIGENVALUE: usize = 60;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of the hermitian part of `m`.
///
/// Eigenvalues are returned in ascending order with matching eigenvector
/// columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, MAX_SVD_ITER).ok_or(Error::EigenNonConvergence {
        iterations: MAX_SVD_ITER,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Full SVD with singular values sorted in descending order.
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns (n x n when rows >= cols).
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    // nalgebra computes a thin SVD; pad wide inputs so V spans the full domain.
    let padded;
    let m = if rows < cols {
        padded = m.clone().resize_vertically(cols, ZERO);
        &padded
    } else {
        m
    };
    let dec =
        nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, MAX_SVD_ITER).ok_or(Error::SvdNonConvergence)?;
    let u = dec.u.ok_or(Error::SvdNonConvergence)?;
    let v_t = dec.v_t.ok_or(Error::SvdNonConvergence)?;
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let mut su = CMatrix::zeros(u.nrows(), k);
    let mut sv = CMatrix::zeros(v_t.ncols(), k);
    let v = v_t.adjoint();
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v.column(src));
    }
    Ok(Svd {
        u: su,
        singular_values: order.iter().map(|&i| dec.singular_values[i]).collect(),
        v: sv,
    })
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
///
/// A right singular vector is kept when its singular value is at most
/// `rel_threshold` times the largest singular value. The zero matrix has the
/// whole space as kernel.
pub fn null_space(m: &CMatrix, rel_threshold: f64) -> Result<CMatrix> {
    let n = m.ncols();
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let cut = rel_threshold * smax;
    let keep: Vec<usize> = dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| i)
        .collect();
    let mut out = CMatrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &dec.v.column(src));
    }
    Ok(out)
}

/// Orthonormal basis of the column space of `m` (numerical rank with a
/// relative threshold).
pub fn column_space(m: &CMatrix, rel_threshold: f64) -> Result<CMatrix> {
    if m.ncols() == 0 {
        return Ok(CMatrix::zeros(m.nrows(), 0));
    }
    let dec = svd(m)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let rank = dec
        .singular_values
        .iter()
        .filter(|&&s| smax > 0.0 && s > rel_threshold * smax)
        .count();
    Ok(dec.u.columns(0, rank).into_owned())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(m)?.singular_values.first().copied().unwrap_or(0.0))
}

/// Spectral-norm distance between the orthogonal projectors onto the column
/// spans of `a` and `b`. Equals the sine of the largest principal angle when
/// the spans have equal dimension and 1 otherwise.
pub fn projector_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let qa = column_space(a, 1e-12)?;
    let qb = column_space(b, 1e-12)?;
    let pa = &qa * qa.adjoint();
    let pb = &qb * qb.adjoint();
    spectral_norm(&(pa - pb))
}

/// Solve `a x = b` by LU decomposition.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.clone().lu().solve(b).ok_or(Error::SingularSystem)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone().try_inverse().ok_or(Error::SingularSystem)
}

/// Complex Schur decomposition `m = q t q†` with `t` upper triangular.
///
/// Householder reduction to Hessenberg form followed by the single-shift QR
/// algorithm with Wilkinson shifts and Givens rotations.
pub fn complex_schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    let (mut q, mut h) = m.clone().hessenberg().unpack();
    let norm = frobenius_norm(&h).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_QR_ITER_PER_EIGENVALUE {
            return Err(Error::EigenNonConvergence { iterations: total });
        }

        let shift = if iter % 11 == 10 {
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if r == 0.0 {
                continue;
            }
            let c = x.conj() / r;
            let s = y.conj() / r;
            let first_col = if k > lo { k - 1 } else { lo };
            for j in first_col..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + c.conj() * b;
            }
            let last_row = (k + 2).min(hi);
            for i in 0..=last_row {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c.conj() + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = q[(i, k)];
                let b = q[(i, k + 1)];
                q[(i, k)] = a * c.conj() + b * s.conj();
                q[(i, k + 1)] = -a * s + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok((q, h))
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Eigenvalues with unit-norm right eigenvectors of a general complex matrix.
pub fn eigen_decomposition(m: &CMatrix) -> Result<Vec<(C64, CVector)>> {
    let n = m.nrows();
    let (q, t) = complex_schur(m)?;
    let tnorm = frobenius_norm(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVector::zeros(n);
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[i] = -acc / denom;
        }
        let mut x = &q * y;
        let nx = x.norm();
        if nx > 0.0 {
            x.unscale_mut(nx);
        }
        out.push((lambda, x));
    }
    Ok(out)
}

/// Eigenvalues only, read off the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let (_, t) = complex_schur(m)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)) as i32
    } else {
        0
    };
    let a = a.scale(libm::pow(2.0, -(s as f64)));
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |i: usize| C64::new(PADE13[i], 0.0);
    let u_inner = &a6 * (a6.map(|z| z * b(13)) + a4.map(|z| z * b(11)) + a2.map(|z| z * b(9)))
        + a6.map(|z| z * b(7))
        + a4.map(|z| z * b(5))
        + a2.map(|z| z * b(3))
        + id.map(|z| z * b(1));
    let u = &a * u_inner;
    let v = &a6 * (a6.map(|z| z * b(12)) + a4.map(|z| z * b(10)) + a2.map(|z| z * b(8)))
        + a6.map(|z| z * b(6))
        + a4.map(|z| z * b(4))
        + a2.map(|z| z * b(2))
        + id.map(|z| z * b(0));
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample(n: usize, seed: u64) -> CMatrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        CMatrix::from_fn(n, n, |_, _| {
            let mut next = || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
            };
            c(next(), next())
        })
    }

    #[test]
    fn schur_reconstructs_and_is_triangular() {
        for n in [1, 2, 3, 5, 9, 16] {
            let m = sample(n, n as u64);
            let (q, t) = complex_schur(&m).unwrap();
            let rec = &q * &t * q.adjoint();
            assert!(frobenius_norm(&(rec - &m)) < 1e-12 * (1.0 + frobenius_norm(&m)));
            let unit = q.adjoint() * &q - CMatrix::identity(n, n);
            assert!(frobenius_norm(&unit) < 1e-12);
        }
    }

    #[test]
    fn eigenpairs_satisfy_equation() {
        let m = sample(12, 99);
        for (lambda, v) in eigen_decomposition(&m).unwrap() {
            let r = &m * &v - v.map(|z| z * lambda);
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn eigenvalues_of_a_jordan_free_permutation() {
        // Cyclic shift on 3 elements: cube roots of unity.
        let mut p = CMatrix::zeros(3, 3);
        p[(1, 0)] = ONE;
        p[(2, 1)] = ONE;
        p[(0, 2)] = ONE;
        let mut ev = eigenvalues(&p).unwrap();
        ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        let w = core::f64::consts::PI * 2.0 / 3.0;
        let expect = [c(libm::cos(-w), libm::sin(-w)), ONE, c(libm::cos(w), libm::sin(w))];
        for (a, b) in ev.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = c(1.0, 0.0);
        d[(1, 1)] = c(0.0, 30.0);
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - c(1.0f64.exp(), 0.0)).norm() < 1e-12);
        assert!((e[(1, 1)] - c(libm::cos(30.0), libm::sin(30.0))).norm() < 1e-11);
        let mut nil = CMatrix::zeros(2, 2);
        nil[(0, 1)] = c(5.0, 0.0);
        let e = expm(&nil).unwrap();
        assert!((e[(0, 1)] - c(5.0, 0.0)).norm() < 1e-12);
        assert!((e[(0, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_eigen_route_for_diagonalizable() {
        let m = sample(6, 7).scale(3.0);
        let e = expm(&m).unwrap();
        let pairs = eigen_decomposition(&m).unwrap();
        let mut v = CMatrix::zeros(6, 6);
        let mut d = CMatrix::zeros(6, 6);
        for (k, (l, x)) in pairs.iter().enumerate() {
            v.set_column(k, x);
            d[(k, k)] = l.exp();
        }
        let alt = &v * d * inverse(&v).unwrap();
        assert!(frobenius_norm(&(e - alt)) < 1e-9);
    }

    #[test]
    fn null_space_of_rank_deficient() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        let k = null_space(&m, 1e-8).unwrap();
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].norm() - 1.0).abs() < 1e-14);
        let wide = CMatrix::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        assert_eq!(null_space(&wide, 1e-8).unwrap().ncols(), 2);
    }

    #[test]
    fn projector_distance_basics() {
        let a = CMatrix::from_column_slice(2, 1, &[ONE, ZERO]);
        let b = CMatrix::from_column_slice(2, 1, &[c(2.0, 0.0), ZERO]);
        let e = CMatrix::from_column_slice(2, 1, &[ZERO, ONE]);
        assert!(projector_distance(&a, &b).unwrap() < 1e-15);
        assert!((projector_distance(&a, &e).unwrap() - 1.0).abs() < 1e-14);
    }
}
