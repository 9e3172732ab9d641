//! Attractors computed from the structure equations instead of the spectrum,
//! and the algebraic closure properties that follow from them.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{ContinuousModel, DiscreteModel, Model, ProcessKind};
use crate::operator::{Operator, Superoperator};
use crate::spectral::{columns_to_operators, eigen_residual, span_distance, span_residual, AttractorDecomposition};
use crate::{Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureKind {
    /// Discrete chain at eigenvalue `λ`.
    Discrete(C64),
    /// Semigroup at eigenvalue `λ = ia`.
    Continuous(f64),
}

/// A stacked homogeneous linear system in the `N²` entries of `X`.
#[derive(Debug, Clone)]
pub struct StructureSystem {
    pub kind: StructureKind,
    pub sigma: Operator,
    /// Each block is one operator equation written as an `N² × N²` matrix,
    /// scaled to unit Frobenius norm.
    pub equations: Vec<CMatrix>,
}

impl StructureSystem {
    fn push(&mut self, s: Superoperator) {
        let m = s.matrix().clone();
        let n = linalg::frobenius_norm(&m);
        if n > 0.0 {
            self.equations.push(m.unscale(n));
        }
    }

    fn stacked(&self) -> CMatrix {
        let d2 = self.sigma.dim() * self.sigma.dim();
        let rows = self.equations.len() * d2;
        let mut m = CMatrix::zeros(rows.max(1), d2);
        for (b, eq) in self.equations.iter().enumerate() {
            m.view_mut((b * d2, 0), (d2, d2)).copy_from(eq);
        }
        m
    }

    /// Orthonormal basis of the solution space.
    pub fn solve(&self, tol: &Tolerances) -> Result<Vec<Operator>> {
        let ns = linalg::null_space(&self.stacked(), tol.kernel)?;
        columns_to_operators(&ns)
    }

    /// `‖stacked · vec(X)‖ / ‖X‖_F`.
    pub fn residual(&self, x: &Operator) -> f64 {
        let v = crate::operator::vectorize(x);
        let r = self.stacked() * v;
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm / x.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

/// `X ↦ left · X · right`.
fn sw(left: &Operator, right: &Operator) -> Superoperator {
    Superoperator::sandwich(left, right)
}

/// `A X σ⁻¹ − λ X σ⁻¹ A`, `A† X σ⁻¹ − λ̄ X σ⁻¹ A†`,
/// `A σ⁻¹ X − λ σ⁻¹ X A`, `A† σ⁻¹ X − λ̄ σ⁻¹ X A†` for every Kraus `A`.
pub fn qmch_structure_system(
    model: &DiscreteModel,
    sigma: &Operator,
    lambda: C64,
    tol: &Tolerances,
) -> Result<StructureSystem> {
    model.kraus()[0].ensure_same_dim(sigma)?;
    let inv = sigma.ensure_strictly_positive(tol)?.apply(|v| 1.0 / v)?;
    let id = Operator::identity(sigma.dim());
    let mut sys = StructureSystem {
        kind: StructureKind::Discrete(lambda),
        sigma: sigma.clone(),
        equations: Vec::new(),
    };
    for a in model.kraus() {
        for (op, l) in [(a.clone(), lambda), (a.adjoint(), lambda.conj())] {
            sys.push(&sw(&op, &inv) - &sw(&id, &(&inv * &op)).scale(l));
            sys.push(&sw(&(&op * &inv), &id) - &sw(&inv, &op).scale(l));
        }
    }
    Ok(sys)
}

pub fn qmch_structure_space(
    model: &DiscreteModel,
    sigma: &Operator,
    lambda: C64,
    tol: &Tolerances,
) -> Result<Vec<Operator>> {
    qmch_structure_system(model, sigma, lambda, tol)?.solve(tol)
}

/// The system with `σ = I`; its solutions are the Heisenberg attractors at `λ̄`.
pub fn qmch_structure_space_heisenberg(model: &DiscreteModel, lambda: C64, tol: &Tolerances) -> Result<Vec<Operator>> {
    qmch_structure_space(model, &Operator::identity(model.dim()), lambda, tol)
}

/// `[L_j, Xσ⁻¹] = [L_j, σ⁻¹X] = [L_j†, Xσ⁻¹] = [L_j†, σ⁻¹X] = 0`,
/// `[Xσ⁻¹, G] = [σ⁻¹X, G] = 0`, `[σ⁻¹X, H] = aσ⁻¹X`, `[Xσ⁻¹, H] = aXσ⁻¹`.
pub fn qmds_structure_system(
    model: &ContinuousModel,
    sigma: &Operator,
    a: f64,
    tol: &Tolerances,
) -> Result<StructureSystem> {
    model.hamiltonian().ensure_same_dim(sigma)?;
    let inv = sigma.ensure_strictly_positive(tol)?.apply(|v| 1.0 / v)?;
    let id = Operator::identity(sigma.dim());
    let mut sys = StructureSystem {
        kind: StructureKind::Continuous(a),
        sigma: sigma.clone(),
        equations: Vec::new(),
    };
    // [P, X σ⁻¹] = P X σ⁻¹ − X σ⁻¹ P
    let comm_right = |p: &Operator| &sw(p, &inv) - &sw(&id, &(&inv * p));
    // [P, σ⁻¹ X] = P σ⁻¹ X − σ⁻¹ X P
    let comm_left = |p: &Operator| &sw(&(p * &inv), &id) - &sw(&inv, p);
    for l in model.lindblads() {
        for p in [l.clone(), l.adjoint()] {
            sys.push(comm_right(&p));
            sys.push(comm_left(&p));
        }
    }
    let g = model.optical_potential();
    sys.push(comm_right(g));
    sys.push(comm_left(g));
    let h = model.hamiltonian();
    let ac = C64::new(a, 0.0);
    // [σ⁻¹X, H] − aσ⁻¹X = σ⁻¹ X H − H σ⁻¹ X − a σ⁻¹ X
    sys.push(&(&sw(&inv, h) - &sw(&(h * &inv), &id)) - &sw(&inv, &id).scale(ac));
    // [Xσ⁻¹, H] − aXσ⁻¹ = X σ⁻¹ H − H X σ⁻¹ − a X σ⁻¹
    sys.push(&(&sw(&id, &(&inv * h)) - &sw(h, &inv)) - &sw(&id, &inv).scale(ac));
    Ok(sys)
}

pub fn qmds_structure_space(
    model: &ContinuousModel,
    sigma: &Operator,
    a: f64,
    tol: &Tolerances,
) -> Result<Vec<Operator>> {
    qmds_structure_system(model, sigma, a, tol)?.solve(tol)
}

/// The system with `σ = I`; its solutions are the Heisenberg attractors at `−ia`.
pub fn qmds_structure_space_heisenberg(model: &ContinuousModel, a: f64, tol: &Tolerances) -> Result<Vec<Operator>> {
    qmds_structure_space(model, &Operator::identity(model.dim()), a, tol)
}

/// Structure-equation solution space for either model kind at a
/// Schrödinger eigenvalue `λ`.
pub fn structure_space(model: &Model, sigma: &Operator, lambda: C64, tol: &Tolerances) -> Result<Vec<Operator>> {
    match model {
        Model::Discrete(m) => qmch_structure_space(m, sigma, lambda, tol),
        Model::Continuous(m) => qmds_structure_space(m, sigma, lambda.im, tol),
    }
}

/// Heisenberg attractors at `λ̄` for a Schrödinger eigenvalue `λ`.
pub fn structure_space_heisenberg(model: &Model, lambda: C64, tol: &Tolerances) -> Result<Vec<Operator>> {
    let id = Operator::identity(model.dim());
    structure_space(model, &id, lambda, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Spaces compared for equality.
    Equality,
    /// Only `spectral ⊆ structure` is guaranteed and checked.
    Containment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationEntry {
    pub eigenvalue: C64,
    pub spectral_dim: usize,
    pub structure_dim: usize,
    /// Projector distance (equality) or worst relative residual of spectral
    /// attractors against the structure span (containment).
    pub distance: f64,
    /// Same quantity in the Heisenberg picture (σ = I).
    pub heisenberg_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationReport {
    pub comparison: Comparison,
    pub entries: Vec<CrossValidationEntry>,
}

impl CrossValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn worst_distance(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.distance.max(e.heisenberg_distance))
            .fold(0.0, f64::max)
    }
}

fn compare(spectral: &[Operator], structure: &[Operator], mode: Comparison) -> Result<f64> {
    match mode {
        Comparison::Equality => span_distance(spectral, structure),
        Comparison::Containment => {
            let mut worst = 0.0f64;
            for x in spectral {
                worst = worst.max(span_residual(x, structure)?);
            }
            Ok(worst)
        }
    }
}

/// Compare spectral and structure-equation attractor spaces at every
/// peripheral eigenvalue, without failing on a mismatch.
pub fn cross_validate_report(
    model: &Model,
    sigma: &Operator,
    stationary: bool,
    decomp: &AttractorDecomposition,
    tol: &Tolerances,
) -> Result<CrossValidationReport> {
    let comparison = if model.is_trace_preserving(tol) || stationary {
        Comparison::Equality
    } else {
        Comparison::Containment
    };
    let mut entries = Vec::new();
    for b in &decomp.blocks {
        let structure = structure_space(model, sigma, b.eigenvalue, tol)?;
        let distance = compare(&b.schrodinger, &structure, comparison)?;
        let heis_structure = structure_space_heisenberg(model, b.eigenvalue, tol)?;
        let heisenberg_distance = compare(&b.heisenberg, &heis_structure, comparison)?;
        entries.push(CrossValidationEntry {
            eigenvalue: b.eigenvalue,
            spectral_dim: b.schrodinger.len(),
            structure_dim: structure.len(),
            distance,
            heisenberg_distance,
            passed: distance <= tol.residual && heisenberg_distance <= tol.residual,
        });
    }
    Ok(CrossValidationReport { comparison, entries })
}

/// Like [`cross_validate_report`] but fails with `MismatchBeyondTolerance`
/// at the first eigenvalue where the spaces differ.
pub fn cross_validate(
    model: &Model,
    sigma: &Operator,
    stationary: bool,
    decomp: &AttractorDecomposition,
    tol: &Tolerances,
) -> Result<CrossValidationReport> {
    let report = cross_validate_report(model, sigma, stationary, decomp, tol)?;
    if let Some(bad) = report.entries.iter().find(|e| !e.passed) {
        return Err(Error::MismatchBeyondTolerance {
            eigenvalue: bad.eigenvalue,
            distance: bad.distance.max(bad.heisenberg_distance),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    /// Worst relative eigen-equation residual of `X₁σ⁻¹X₂` at the product
    /// eigenvalue (`λ₁λ₂` discrete, `λ₁+λ₂` continuous), over pairs whose
    /// product eigenvalue is peripheral.
    pub product_residual: f64,
    /// Worst relative norm of `X₁σ⁻¹X₂` over pairs whose product eigenvalue
    /// is not peripheral (these products must vanish).
    pub off_spectrum_norm: f64,
    pub pairs_checked: usize,
    /// Worst distance of Heisenberg products `Y₁Y₂` from the Heisenberg
    /// attractor span, relative to `‖Y₁‖_F ‖Y₂‖_F`.
    pub heisenberg_product: f64,
    /// Worst relative distance of `Y†` from the Heisenberg attractor span.
    pub heisenberg_adjoint: f64,
    /// Same closure residuals inside the Heisenberg fixed-point block.
    pub fixed_product: f64,
    pub fixed_adjoint: f64,
}

impl ClosureReport {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        [
            self.product_residual,
            self.off_spectrum_norm,
            self.heisenberg_product,
            self.heisenberg_adjoint,
            self.fixed_product,
            self.fixed_adjoint,
        ]
        .iter()
        .all(|&v| v <= tol.residual)
    }
}

/// Check the product rule on all basis pairs and the closure of the
/// Heisenberg attractor space under product and adjoint.
pub fn algebra_closure_check(
    model: &Model,
    sigma: &Operator,
    decomp: &AttractorDecomposition,
    tol: &Tolerances,
) -> Result<ClosureReport> {
    let inv = sigma.ensure_strictly_positive(tol)?.apply(|v| 1.0 / v)?;
    let g = model.generator_schrodinger();
    let scale = g.frobenius_norm().max(1.0);
    let mut product_residual = 0.0f64;
    let mut off_spectrum_norm = 0.0f64;
    let mut pairs = 0;
    for b1 in &decomp.blocks {
        for b2 in &decomp.blocks {
            let target = match decomp.kind {
                ProcessKind::Discrete => b1.eigenvalue * b2.eigenvalue,
                ProcessKind::Continuous => b1.eigenvalue + b2.eigenvalue,
            };
            let peripheral = decomp.block(target, tol).is_some();
            for x1 in &b1.schrodinger {
                for x2 in &b2.schrodinger {
                    let p = &(x1 * &inv) * x2;
                    let size =
                        (x1.frobenius_norm() * inv.frobenius_norm() * x2.frobenius_norm()).max(f64::MIN_POSITIVE);
                    pairs += 1;
                    if peripheral {
                        let r = eigen_residual(&g, &p, target)? / (scale * size);
                        product_residual = product_residual.max(r);
                    } else {
                        off_spectrum_norm = off_spectrum_norm.max(p.frobenius_norm() / size);
                    }
                }
            }
        }
    }
    let heis = decomp.all_heisenberg();
    let (heisenberg_product, heisenberg_adjoint) = closure(&heis)?;
    let fixed: Vec<Operator> = decomp
        .fixed_block(tol)
        .map(|b| b.heisenberg.clone())
        .unwrap_or_default();
    let (fixed_product, fixed_adjoint) = closure(&fixed)?;
    Ok(ClosureReport {
        product_residual,
        off_spectrum_norm,
        pairs_checked: pairs,
        heisenberg_product,
        heisenberg_adjoint,
        fixed_product,
        fixed_adjoint,
    })
}

fn closure(basis: &[Operator]) -> Result<(f64, f64)> {
    let mut prod = 0.0f64;
    let mut adj = 0.0f64;
    for y1 in basis {
        adj = adj.max(span_residual(&y1.adjoint(), basis)?);
        for y2 in basis {
            // Relative to the factors: products that vanish up to roundoff
            // must not count as large relative misses.
            let p = y1 * y2;
            let size = (y1.frobenius_norm() * y2.frobenius_norm()).max(f64::MIN_POSITIVE);
            prod = prod.max(span_residual(&p, basis)? * p.frobenius_norm() / size);
        }
    }
    Ok((prod, adj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::decompose;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitary_channel_heisenberg_structure() {
        let tol = Tolerances::default();
        let th = 0.9f64;
        let ph = c(th.cos(), th.sin());
        let u = Operator::diagonal(&[c(1., 0.), ph]);
        let m = DiscreteModel::new(vec![u], Some(true), &tol).unwrap();
        // σ = I: U X = λ X U holds for X = |1><0| at λ = e^{iθ}; this X is a
        // Heisenberg eigenvector of U†·U at e^{−iθ} = λ̄.
        let space = qmch_structure_space_heisenberg(&m, ph, &tol).unwrap();
        assert_eq!(space.len(), 1);
        assert!(span_distance(&space, &[Operator::unit(2, 1, 0)]).unwrap() < 1e-12);
        let heis = Model::from(m.clone()).generator_heisenberg();
        let r = eigen_residual(&heis, &space[0], ph.conj()).unwrap();
        assert!(r < 1e-12);
        assert!(qmch_structure_space_heisenberg(&m, c(0., 1.), &tol).unwrap().is_empty());
    }

    #[test]
    fn identity_channel_closure_is_trivial() {
        let tol = Tolerances::default();
        let m = Model::from(DiscreteModel::new(vec![Operator::identity(2)], None, &tol).unwrap());
        let d = decompose(&m, &tol).unwrap();
        let sigma = Operator::identity(2).scale_real(0.5);
        let r = algebra_closure_check(&m, &sigma, &d, &tol).unwrap();
        assert!(r.passed(&tol), "{r:?}");
        let cv = cross_validate(&m, &sigma, true, &d, &tol).unwrap();
        assert_eq!(cv.comparison, Comparison::Equality);
        assert_eq!(cv.entries[0].structure_dim, 4);
    }

    #[test]
    fn dephasing_semigroup_structure() {
        let tol = Tolerances::default();
        let h = Operator::real_diagonal(&[0.0, 2.0]);
        let l = Operator::real_diagonal(&[0.0, 0.0]);
        let m = ContinuousModel::new(h, vec![l], None, &tol).unwrap();
        let sigma = Operator::real_diagonal(&[0.7, 0.3]);
        // Schrödinger eigenvalue 2i: X = |0><1|, i[X,H] = 2i X.
        let s = qmds_structure_space(&m, &sigma, 2.0, &tol).unwrap();
        assert!(span_distance(&s, &[Operator::unit(2, 0, 1)]).unwrap() < 1e-12);
        let heis = qmds_structure_space_heisenberg(&m, 2.0, &tol).unwrap();
        let lh = Model::from(m).generator_heisenberg();
        assert!(eigen_residual(&lh, &heis[0], c(0., -2.)).unwrap() < 1e-12);
    }
}
