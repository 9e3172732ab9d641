//! Operators on the Hilbert space, superoperators acting on them, and the
//! spectral calculus tying the two together.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::{Tolerances, C64};

/// A linear operator on an `N`-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: CMatrix,
}

impl Operator {
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidModel("zero-dimensional operator".into()));
        }
        Ok(Self { m })
    }

    /// Build from row-major complex entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_matrix(CMatrix::from_row_slice(dim, dim, entries))
    }

    /// Build from row-major real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            m: CMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    /// `|ket⟩⟨bra|`.
    pub fn ket_bra(ket: &[C64], bra: &[C64]) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch {
                expected: ket.len(),
                found: bra.len(),
            });
        }
        Ok(Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj()))
    }

    /// Matrix unit `|i⟩⟨j|`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius_norm(&self.m)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            m: self.m.map(|x| x * z),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self { m: self.m.scale(x) }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn hermitian_part(&self) -> Self {
        Self {
            m: (&self.m + self.m.adjoint()).scale(0.5),
        }
    }

    /// `‖A − A†‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::frobenius_norm(&(&self.m - self.m.adjoint()))
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        self.hermitian_defect() <= tol.hermitian * self.frobenius_norm().max(1.0)
    }

    pub fn ensure_hermitian(&self, tol: &Tolerances) -> Result<()> {
        if self.is_hermitian(tol) {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                defect: self.hermitian_defect(),
            })
        }
    }

    pub fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        }
    }

    /// Spectral decomposition of the hermitian part.
    pub fn eigh(&self) -> Result<HermitianSpectrum> {
        let (values, vectors) = linalg::hermitian_eigen(&self.m)?;
        Ok(HermitianSpectrum { values, vectors })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }

    /// Positive semidefinite within `tol.model · max(1, ‖A‖_F)`.
    pub fn is_psd(&self, tol: &Tolerances) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return Ok(false);
        }
        Ok(self.min_eigenvalue()? >= -tol.model * self.frobenius_norm().max(1.0))
    }

    /// Threshold used by the strict-positivity test.
    pub fn positivity_threshold(&self, tol: &Tolerances) -> f64 {
        tol.positivity * (self.trace().re / self.dim() as f64).abs()
    }

    pub fn is_strictly_positive(&self, tol: &Tolerances) -> Result<bool> {
        if !self.is_hermitian(tol) {
            return Ok(false);
        }
        let threshold = self.positivity_threshold(tol);
        Ok(self.trace().re > 0.0 && self.min_eigenvalue()? > threshold)
    }

    pub fn ensure_strictly_positive(&self, tol: &Tolerances) -> Result<HermitianSpectrum> {
        self.ensure_hermitian(tol)?;
        let spec = self.eigh()?;
        let threshold = self.positivity_threshold(tol);
        if self.trace().re <= 0.0 || spec.values[0] <= threshold {
            return Err(Error::NotStrictlyPositive {
                min_eig: spec.values[0],
                threshold,
            });
        }
        Ok(spec)
    }

    pub fn is_trace_one(&self, tol: &Tolerances) -> bool {
        (self.trace() - ONE).norm() <= tol.hermitian.max(1e-10)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            m: linalg::inverse(&self.m)?,
        })
    }

    /// Matrix exponential (any operator, not only hermitian ones).
    pub fn expm(&self) -> Result<Self> {
        Ok(Self {
            m: linalg::expm(&self.m)?,
        })
    }

    /// Entries of a column vector stored as a plain `Vec`.
    pub(crate) fn column_vec(m: &CMatrix, j: usize) -> Vec<C64> {
        m.column(j).iter().copied().collect()
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.m[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a Operator> for &'a Operator {
            type Output = Operator;
            fn $method(self, rhs: &'a Operator) -> Operator {
                assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
                Operator { m: &self.m $op &rhs.m }
            }
        }
        impl $tr<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                &self $op &rhs
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -&self.m }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

/// Eigenvalues (ascending) and eigenvectors of a hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianSpectrum {
    /// `U f(D) U†`; fails if `f` is not finite at some eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<Operator> {
        let n = self.values.len();
        let mut fd = Vec::with_capacity(n);
        for &x in &self.values {
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::FunctionUndefined { value: x });
            }
            fd.push(y);
        }
        let u = &self.vectors;
        let scaled = CMatrix::from_fn(n, n, |i, j| u[(i, j)] * fd[j]);
        Ok(Operator {
            m: scaled * u.adjoint(),
        })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// `(A, B) = Tr(A† B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    a.ensure_same_dim(b)?;
    Ok(a.m.iter().zip(b.m.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Column-stacking vectorization.
pub fn vectorize(x: &Operator) -> CVector {
    // nalgebra stores matrices column-major, so the storage order is exactly
    // the column-stacked vector.
    DVector::from_column_slice(x.m.as_slice())
}

pub fn devectorize(v: &CVector) -> Result<Operator> {
    let len = v.len();
    let n = isqrt(len);
    if n * n != len || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: len,
        });
    }
    Operator::from_matrix(CMatrix::from_column_slice(n, n, v.as_slice()))
}

fn isqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// The only vectorization convention used by [`Superoperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectorization {
    ColumnStacking,
}

/// A linear map on operators, stored as an `N² × N²` matrix acting on
/// column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    m: CMatrix,
}

impl Superoperator {
    pub const CONVENTION: Vectorization = Vectorization::ColumnStacking;

    pub fn from_matrix(dim: usize, m: CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if m.nrows() != d2 || m.ncols() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(Self { dim, m })
    }

    pub fn identity(dim: usize) -> Self {
        let d2 = dim * dim;
        Self {
            dim,
            m: CMatrix::identity(d2, d2),
        }
    }

    pub fn zero(dim: usize) -> Self {
        let d2 = dim * dim;
        Self {
            dim,
            m: CMatrix::zeros(d2, d2),
        }
    }

    /// `X ↦ left · X · right`, i.e. `rightᵀ ⊗ left`.
    pub fn sandwich(left: &Operator, right: &Operator) -> Self {
        Self {
            dim: left.dim(),
            m: right.m.transpose().kronecker(&left.m),
        }
    }

    /// `X ↦ Σ_j A_j X A_j†`.
    pub fn from_kraus(kraus: &[Operator]) -> Result<Self> {
        let dim = kraus
            .first()
            .ok_or_else(|| Error::InvalidModel("empty Kraus list".into()))?
            .dim();
        let mut out = Self::zero(dim);
        for a in kraus {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
            out.m += a.m.conjugate().kronecker(&a.m);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convention(&self) -> Vectorization {
        Self::CONVENTION
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        devectorize(&(&self.m * vectorize(x)))
    }

    /// Adjoint with respect to the Hilbert–Schmidt product.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            m: self.m.adjoint(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            m: &self.m * &other.m,
        }
    }

    /// `self − z · id`.
    pub fn shifted(&self, z: C64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= z;
        }
        Self { dim: self.dim, m }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            dim: self.dim,
            m: self.m.map(|x| x * z),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius_norm(&self.m)
    }

    /// `exp(t · self)`.
    pub fn exp_scaled(&self, t: f64) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            m: linalg::expm(&self.m.scale(t))?,
        })
    }

    pub fn power(&self, n: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.m.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result.m = &result.m * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        result
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            m: &self.m - &rhs.m,
        }
    }
}

/// `X ↦ P X`.
pub fn left_mult_super(p: &Operator) -> Superoperator {
    Superoperator::sandwich(p, &Operator::identity(p.dim()))
}

/// `X ↦ X P`.
pub fn right_mult_super(p: &Operator) -> Superoperator {
    Superoperator::sandwich(&Operator::identity(p.dim()), p)
}

/// Relative modular operator `Δ_{Q,P}(X) = Q X P⁻¹`.
pub fn relative_modular(q: &Operator, p: &Operator, tol: &Tolerances) -> Result<Superoperator> {
    q.ensure_same_dim(p)?;
    if !q.is_psd(tol)? {
        return Err(Error::NotStrictlyPositive {
            min_eig: q.min_eigenvalue()?,
            threshold: 0.0,
        });
    }
    let p_spec = p.ensure_strictly_positive(tol)?;
    let p_inv = p_spec.apply(|x| 1.0 / x)?;
    Ok(Superoperator::sandwich(q, &p_inv))
}

/// Spectral functional calculus `f(A) = U f(D) U†` for hermitian `A`.
pub fn op_function(f: impl Fn(f64) -> f64, a: &Operator, tol: &Tolerances) -> Result<Operator> {
    a.ensure_hermitian(tol)?;
    a.eigh()?.apply(f)
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar function `k` applied to the relative modular operator.
#[derive(Clone)]
pub enum MonotoneFunction {
    /// `y ↦ y^α`. Operator monotone for `α ∈ (0, 1]`.
    Power(f64),
    /// `y ↦ log(1 + y)`.
    Log1p,
    /// A caller-supplied function whose operator monotonicity the caller
    /// attests. Only positivity on the ratios actually used is checked.
    Custom { name: String, f: ScalarFn },
}

impl MonotoneFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self::Power(alpha))
        } else {
            Err(Error::ExponentOutOfRange { alpha })
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        attested_monotone: bool,
    ) -> Result<Self> {
        if !attested_monotone {
            return Err(Error::MonotonicityNotAttested);
        }
        Ok(Self::Custom {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Power(a) => y.powf(*a),
            Self::Log1p => y.ln_1p(),
            Self::Custom { f, .. } => f(y),
        }
    }

    pub fn name(&self) -> String {
        use alloc::format;
        match self {
            Self::Power(a) => format!("power:{a}"),
            Self::Log1p => "log1p".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `k(Δ_{σ1,σ2})(X) = Σ_ij k(p_i/q_j) ⟨u_i|X|v_j⟩ |u_i⟩⟨v_j|` through the
/// eigenbases of `σ1` and `σ2`.
pub fn k_of_delta_apply(
    k: &MonotoneFunction,
    sigma1: &Operator,
    sigma2: &Operator,
    x: &Operator,
    tol: &Tolerances,
) -> Result<Operator> {
    let s1 = sigma1.ensure_strictly_positive(tol)?;
    let s2 = sigma2.ensure_strictly_positive(tol)?;
    sigma1.ensure_same_dim(x)?;
    sigma2.ensure_same_dim(x)?;
    k_of_delta_spectral(k, &s1, &s2, x)
}

pub(crate) fn k_of_delta_spectral(
    k: &MonotoneFunction,
    s1: &HermitianSpectrum,
    s2: &HermitianSpectrum,
    x: &Operator,
) -> Result<Operator> {
    let u = &s1.vectors;
    let v = &s2.vectors;
    let mut inner = u.adjoint() * &x.m * v;
    for i in 0..inner.nrows() {
        for j in 0..inner.ncols() {
            let ratio = s1.values[i] / s2.values[j];
            let kv = k.eval(ratio);
            if kv.is_nan() || kv <= 0.0 || !kv.is_finite() {
                return Err(Error::NonPositiveMonotone { ratio, value: kv });
            }
            inner[(i, j)] *= kv;
        }
    }
    Operator::from_matrix(u * inner * v.adjoint())
}

/// Choi matrix `Σ_k vec(A_k) vec(A_k)†` of the map with the given Kraus
/// operators.
pub fn choi_matrix(kraus: &[Operator]) -> Result<Operator> {
    let s = Superoperator::from_kraus(kraus)?;
    Ok(choi_of_superoperator(&s))
}

/// Choi matrix `Σ_jl |j⟩⟨l| ⊗ S(|j⟩⟨l|)` of an arbitrary superoperator.
pub fn choi_of_superoperator(s: &Superoperator) -> Operator {
    let n = s.dim;
    let sm = &s.m;
    Operator::from_fn(n * n, |r, c| {
        let (j, a) = (r / n, r % n);
        let (l, b) = (c / n, c % n);
        sm[(b * n + a, l * n + j)]
    })
}
