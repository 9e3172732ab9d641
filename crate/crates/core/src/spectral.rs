//! Peripheral spectrum and attractor spaces of a generator.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{Model, ProcessKind};
use crate::operator::{devectorize, vectorize, Operator, Superoperator};
use crate::{Tolerances, C64};

/// One peripheral eigenvalue with attractor bases in both pictures.
#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralBlock {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    /// HS-orthonormal basis of `Ker(G − λ)`.
    pub schrodinger: Vec<Operator>,
    /// HS-orthonormal basis of `Ker(G† − λ̄)`.
    pub heisenberg: Vec<Operator>,
}

/// The attractor space `⊕_λ Ker(G − λ)` over the peripheral spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorDecomposition {
    pub kind: ProcessKind,
    pub dim: usize,
    /// Frobenius norm of the generator matrix.
    pub generator_norm: f64,
    /// Fixed-point block first when present.
    pub blocks: Vec<PeripheralBlock>,
}

impl AttractorDecomposition {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b.eigenvalue).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.multiplicity).collect()
    }

    /// Total dimension of the attractor space.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity).sum()
    }

    pub fn fixed_value(&self) -> C64 {
        match self.kind {
            ProcessKind::Discrete => C64::new(1.0, 0.0),
            ProcessKind::Continuous => C64::new(0.0, 0.0),
        }
    }

    /// Distance between two eigenvalues measured on this decomposition's scale.
    pub fn same_eigenvalue(&self, a: C64, b: C64, tol: &Tolerances) -> bool {
        (a - b).norm() <= tol.cluster * self.scale()
    }

    fn scale(&self) -> f64 {
        match self.kind {
            ProcessKind::Discrete => 1.0,
            ProcessKind::Continuous => self.generator_norm.max(1.0),
        }
    }

    pub fn block(&self, lambda: C64, tol: &Tolerances) -> Option<&PeripheralBlock> {
        self.blocks
            .iter()
            .find(|b| self.same_eigenvalue(b.eigenvalue, lambda, tol))
    }

    pub fn fixed_block(&self, tol: &Tolerances) -> Option<&PeripheralBlock> {
        self.block(self.fixed_value(), tol)
    }

    /// Whether `lambda` lies on the peripheral set (unit circle or imaginary axis).
    pub fn is_peripheral(&self, lambda: C64, tol: &Tolerances) -> bool {
        is_peripheral(self.kind, lambda, self.generator_norm, tol)
    }

    pub fn all_schrodinger(&self) -> Vec<Operator> {
        self.blocks.iter().flat_map(|b| b.schrodinger.iter().cloned()).collect()
    }

    pub fn all_heisenberg(&self) -> Vec<Operator> {
        self.blocks.iter().flat_map(|b| b.heisenberg.iter().cloned()).collect()
    }

    /// Largest projector distance between the span of `{X†}` for a block at
    /// `λ` and the block at `λ̄`.
    pub fn adjoint_closure_defect(&self, tol: &Tolerances) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            let conj = self.block(b.eigenvalue.conj(), tol).ok_or(Error::InvariantViolation {
                what: "peripheral spectrum not closed under conjugation",
                defect: 1.0,
                tolerance: tol.cluster,
            })?;
            let adj: Vec<Operator> = b.schrodinger.iter().map(|x| x.adjoint()).collect();
            worst = worst.max(span_distance(&adj, &conj.schrodinger)?);
        }
        Ok(worst)
    }
}

pub(crate) fn is_peripheral(kind: ProcessKind, lambda: C64, norm: f64, tol: &Tolerances) -> bool {
    match kind {
        ProcessKind::Discrete => (lambda.norm() - 1.0).abs() <= tol.peripheral,
        ProcessKind::Continuous => lambda.re.abs() <= tol.peripheral * norm.max(1.0),
    }
}

/// Stack vectorized operators as matrix columns.
pub fn operators_to_columns(ops: &[Operator]) -> CMatrix {
    let Some(first) = ops.first() else {
        return CMatrix::zeros(0, 0);
    };
    let d2 = first.dim() * first.dim();
    let mut m = CMatrix::zeros(d2, ops.len());
    for (j, x) in ops.iter().enumerate() {
        m.set_column(j, &vectorize(x));
    }
    m
}

pub fn columns_to_operators(m: &CMatrix) -> Result<Vec<Operator>> {
    (0..m.ncols())
        .map(|j| devectorize(&CVector::from_iterator(m.nrows(), m.column(j).iter().copied())))
        .collect()
}

/// Spectral-norm distance between the orthogonal projectors onto two spans.
/// Empty spans are handled: two empty spans are at distance 0, an empty and a
/// nonempty one at distance 1.
pub fn span_distance(a: &[Operator], b: &[Operator]) -> Result<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => {
            let nonempty = if a.is_empty() { b } else { a };
            let rank = linalg::column_space(&operators_to_columns(nonempty), 1e-12)?.ncols();
            return Ok(if rank == 0 { 0.0 } else { 1.0 });
        }
        _ => {}
    }
    linalg::projector_distance(&operators_to_columns(a), &operators_to_columns(b))
}

/// Distance of `x` from the span of `basis`, relative to `‖x‖_F`.
pub fn span_residual(x: &Operator, basis: &[Operator]) -> Result<f64> {
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    if basis.is_empty() {
        return Ok(1.0);
    }
    let q = linalg::column_space(&operators_to_columns(basis), 1e-12)?;
    let v = vectorize(x);
    let proj = &q * (q.adjoint() * &v);
    Ok(linalg::frobenius_norm(&CMatrix::from_iterator(v.len(), 1, (v - proj).iter().copied())) / norm)
}

/// All `N²` eigenpairs of a superoperator, eigenvectors of unit norm.
pub fn full_spectrum(s: &Superoperator) -> Result<Vec<(C64, CVector)>> {
    linalg::eigen_decomposition(s.matrix())
}

/// Peripheral eigenvalues with algebraic multiplicities, clustered and
/// snapped onto the unit circle (discrete) or the imaginary axis
/// (continuous).
pub fn asymptotic_spectrum(s: &Superoperator, kind: ProcessKind, tol: &Tolerances) -> Result<Vec<(C64, usize)>> {
    let eigenvalues = linalg::eigenvalues(s.matrix())?;
    Ok(peripheral_clusters(&eigenvalues, kind, s.frobenius_norm(), tol))
}

fn cluster_scale(kind: ProcessKind, norm: f64) -> f64 {
    match kind {
        ProcessKind::Discrete => 1.0,
        ProcessKind::Continuous => norm.max(1.0),
    }
}

fn peripheral_clusters(eigenvalues: &[C64], kind: ProcessKind, norm: f64, tol: &Tolerances) -> Vec<(C64, usize)> {
    let candidates: Vec<C64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| is_peripheral(kind, l, norm, tol))
        .collect();
    let radius = tol.cluster * cluster_scale(kind, norm);
    // Single-linkage clustering by union–find.
    let n = candidates.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (candidates[i] - candidates[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<(usize, C64, usize)> = Vec::new();
    for (i, &z) in candidates.iter().enumerate().take(n) {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += z;
                g.2 += 1;
            }
            None => groups.push((root, z, 1)),
        }
    }
    let mut out: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|(_, sum, count)| {
            let mean = sum / count as f64;
            (snap(kind, mean, radius), count)
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = order_key(kind, a.0);
        let kb = order_key(kind, b.0);
        ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
    });
    out
}

fn snap(kind: ProcessKind, lambda: C64, radius: f64) -> C64 {
    match kind {
        ProcessKind::Discrete => {
            let unit = lambda / lambda.norm();
            let mut re = unit.re;
            let mut im = unit.im;
            if im.abs() <= radius {
                im = 0.0;
                re = re.signum();
            } else if re.abs() <= radius {
                re = 0.0;
                im = im.signum();
            }
            C64::new(re, im)
        }
        ProcessKind::Continuous => {
            let im = if lambda.im.abs() <= radius { 0.0 } else { lambda.im };
            C64::new(0.0, im)
        }
    }
}

/// Fixed point first, then increasing phase (or frequency) magnitude, positive
/// before negative.
fn order_key(kind: ProcessKind, lambda: C64) -> (f64, f64) {
    let phase = match kind {
        ProcessKind::Discrete => lambda.im.atan2(lambda.re),
        ProcessKind::Continuous => lambda.im,
    };
    (phase.abs(), -phase)
}

/// HS-orthonormal basis of `Ker(S − λ)`, without multiplicity checks.
pub fn kernel_basis(s: &Superoperator, lambda: C64, tol: &Tolerances) -> Result<Vec<Operator>> {
    let shifted = s.shifted(lambda);
    let ns = linalg::null_space(shifted.matrix(), tol.kernel)?;
    columns_to_operators(&ns)
}

fn checked_kernel(s: &Superoperator, lambda: C64, algebraic: usize, tol: &Tolerances) -> Result<Vec<Operator>> {
    let basis = kernel_basis(s, lambda, tol)?;
    let geometric = basis.len();
    if geometric < algebraic {
        return Err(Error::DefectivePeripheralPart {
            eigenvalue: lambda,
            geometric,
            algebraic,
        });
    }
    if geometric > algebraic {
        return Err(Error::KernelExceedsMultiplicity {
            eigenvalue: lambda,
            geometric,
            algebraic,
        });
    }
    Ok(basis)
}

/// Attractor basis at a peripheral eigenvalue `λ`.
pub fn attractor_basis(s: &Superoperator, kind: ProcessKind, lambda: C64, tol: &Tolerances) -> Result<Vec<Operator>> {
    let norm = s.frobenius_norm();
    let clusters = asymptotic_spectrum(s, kind, tol)?;
    let radius = tol.cluster * cluster_scale(kind, norm);
    let Some(&(value, algebraic)) = clusters.iter().find(|(l, _)| (*l - lambda).norm() <= radius) else {
        return Ok(Vec::new());
    };
    checked_kernel(s, value, algebraic, tol)
}

/// Peripheral spectrum and attractor bases of a model in both pictures.
pub fn decompose(model: &Model, tol: &Tolerances) -> Result<AttractorDecomposition> {
    decompose_superoperator(&model.generator_schrodinger(), model.kind(), tol)
}

pub fn decompose_superoperator(
    s: &Superoperator,
    kind: ProcessKind,
    tol: &Tolerances,
) -> Result<AttractorDecomposition> {
    let norm = s.frobenius_norm();
    let heis = s.adjoint();
    let clusters = asymptotic_spectrum(s, kind, tol)?;
    let mut blocks = Vec::with_capacity(clusters.len());
    for (lambda, algebraic) in clusters {
        let schrodinger = checked_kernel(s, lambda, algebraic, tol)?;
        let heisenberg = kernel_basis(&heis, lambda.conj(), tol)?;
        if heisenberg.len() != schrodinger.len() {
            return Err(Error::PictureMismatch {
                eigenvalue: lambda,
                schrodinger: schrodinger.len(),
                heisenberg: heisenberg.len(),
            });
        }
        for (g, basis, l) in [(s, &schrodinger, lambda), (&heis, &heisenberg, lambda.conj())] {
            for x in basis.iter() {
                let r = eigen_residual(g, x, l)?;
                let bound = tol.eigen * norm.max(1.0) * x.frobenius_norm();
                if r > bound {
                    return Err(Error::InvariantViolation {
                        what: "attractor eigen-equation residual",
                        defect: r,
                        tolerance: bound,
                    });
                }
            }
        }
        blocks.push(PeripheralBlock {
            eigenvalue: lambda,
            multiplicity: algebraic,
            schrodinger,
            heisenberg,
        });
    }
    Ok(AttractorDecomposition {
        kind,
        dim: s.dim(),
        generator_norm: norm,
        blocks,
    })
}

/// `‖G(X) − λX‖_F`.
pub fn eigen_residual(g: &Superoperator, x: &Operator, lambda: C64) -> Result<f64> {
    Ok((&g.apply(x)? - &x.scale(lambda)).frobenius_norm())
}

/// Largest modulus (discrete) or largest real part (continuous) among the
/// non-peripheral eigenvalues; `None` when every eigenvalue is peripheral.
pub fn subperipheral_bound(s: &Superoperator, kind: ProcessKind, tol: &Tolerances) -> Result<Option<f64>> {
    let norm = s.frobenius_norm();
    let eigenvalues = linalg::eigenvalues(s.matrix())?;
    let rest = eigenvalues
        .iter()
        .filter(|&&l| !is_peripheral(kind, l, norm, tol))
        .map(|l| match kind {
            ProcessKind::Discrete => l.norm(),
            ProcessKind::Continuous => l.re,
        });
    Ok(rest.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))))
}

/// Operators `D_i` in the span of `left` with `(D_i, R_j) = δ_ij`.
pub fn biorthogonal_duals(right: &[Operator], left: &[Operator]) -> Result<Vec<Operator>> {
    if right.len() != left.len() {
        return Err(Error::DimensionMismatch {
            expected: right.len(),
            found: left.len(),
        });
    }
    if right.is_empty() {
        return Ok(Vec::new());
    }
    let r = operators_to_columns(right);
    let l = operators_to_columns(left);
    let overlap = l.adjoint() * &r;
    let inv = linalg::inverse(&overlap)?;
    columns_to_operators(&(l * inv.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContinuousModel, DiscreteModel};
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn channel(kraus: Vec<Operator>) -> Model {
        Model::from(DiscreteModel::new(kraus, None, &Tolerances::default()).unwrap())
    }

    fn depolarizing(p: f64) -> Model {
        let s = |x: f64| x.sqrt();
        let x = Operator::from_real_rows(2, &[0., 1., 1., 0.]).unwrap();
        let y = Operator::from_rows(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let z = Operator::real_diagonal(&[1., -1.]);
        channel(vec![
            Operator::identity(2).scale_real(s(1.0 - 3.0 * p / 4.0)),
            x.scale_real(s(p / 4.0)),
            y.scale_real(s(p / 4.0)),
            z.scale_real(s(p / 4.0)),
        ])
    }

    #[test]
    fn identity_superoperator_spectrum() {
        let spec = full_spectrum(&Superoperator::identity(2)).unwrap();
        assert_eq!(spec.len(), 4);
        assert!(spec.iter().all(|(l, _)| (*l - c(1., 0.)).norm() < 1e-14));
        let per = asymptotic_spectrum(
            &Superoperator::identity(3),
            ProcessKind::Discrete,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(per, vec![(c(1., 0.), 9)]);
    }

    #[test]
    fn unitary_channel_eigenvalues() {
        let theta = 0.7f64;
        let ph = c(theta.cos(), theta.sin());
        let u = Operator::diagonal(&[c(1., 0.), ph]);
        let s = Superoperator::from_kraus(&[u]).unwrap();
        let mut got: Vec<C64> = full_spectrum(&s).unwrap().into_iter().map(|p| p.0).collect();
        // eigenoperators |i><j| give u_i conj(u_j)
        let mut expect = vec![c(1., 0.), c(1., 0.), ph, ph.conj()];
        let key = |z: &C64| (z.im * 1e6).round() as i64;
        got.sort_by_key(key);
        expect.sort_by_key(key);
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_has_single_fixed_point() {
        let tol = Tolerances::default();
        let m = depolarizing(0.4);
        // Brute force: T acts as identity on I and scales Paulis by 1 − p.
        let per = asymptotic_spectrum(&m.generator_schrodinger(), ProcessKind::Discrete, &tol).unwrap();
        assert_eq!(per, vec![(c(1., 0.), 1)]);
        let d = decompose(&m, &tol).unwrap();
        assert_eq!(d.dimension(), 1);
        let dist = span_distance(&d.blocks[0].schrodinger, &[Operator::identity(2)]).unwrap();
        assert!(dist < 1e-10);
    }

    #[test]
    fn identity_channel_attracts_everything() {
        let d = decompose(&channel(vec![Operator::identity(3)]), &Tolerances::default()).unwrap();
        assert_eq!(d.dimension(), 9);
    }

    #[test]
    fn defective_peripheral_part_is_an_error() {
        // A Jordan block at eigenvalue 1 written directly as a superoperator.
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = c(1.0, 0.0);
        let s = Superoperator::from_matrix(2, m).unwrap();
        let err = attractor_basis(&s, ProcessKind::Discrete, c(1., 0.), &Tolerances::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::DefectivePeripheralPart {
                geometric: 3,
                algebraic: 4,
                ..
            }
        ));
    }

    #[test]
    fn continuous_rotation_spectrum() {
        let tol = Tolerances::default();
        // Pure dephasing plus a level splitting: peripheral {0 (x2), ±i}.
        let h = Operator::real_diagonal(&[0.0, 1.0]);
        let m = Model::from(ContinuousModel::new(h, vec![], None, &tol).unwrap());
        let d = decompose(&m, &tol).unwrap();
        assert_eq!(d.eigenvalues(), vec![c(0., 0.), c(0., 1.), c(0., -1.)]);
        assert_eq!(d.multiplicities(), vec![2, 1, 1]);
        assert!(d.adjoint_closure_defect(&tol).unwrap() < 1e-10);
        // Heisenberg block at λ̄ = −i for the Schrödinger eigenvalue +i.
        let x = &d.block(c(0., 1.), &tol).unwrap().heisenberg[0];
        let hx = m.generator_heisenberg().apply(x).unwrap();
        assert!((&hx - &x.scale(c(0., -1.))).frobenius_norm() < 1e-12);
    }

    #[test]
    fn biorthogonal_duals_pair_to_identity() {
        let a = vec![Operator::unit(2, 0, 0), Operator::unit(2, 0, 1).scale_real(2.0)];
        let b = vec![Operator::identity(2), Operator::unit(2, 0, 1)];
        let d = biorthogonal_duals(&a, &b).unwrap();
        for (i, di) in d.iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                let v = crate::operator::hs_inner(di, aj).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - c(expect, 0.)).norm() < 1e-14);
            }
        }
    }
}
