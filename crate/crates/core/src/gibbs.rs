//! Exponential (Gibbs-like) representations of asymptotic states.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::asymptotics::AsymptoticPropagator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::{HermitianSpectrum, Operator};
use crate::spectral::AttractorDecomposition;
use crate::{Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// The whole Heisenberg attractor space.
    Full,
    /// Only the Heisenberg fixed points (integrals of motion).
    FixedPoints,
}

/// Hermitian operators whose real span is the hermitian part of an
/// adjoint-closed attractor space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianAttractorBasis {
    pub elements: Vec<Operator>,
    pub scope: Scope,
}

impl HermitianAttractorBasis {
    /// Use the given hermitian operators as they are.
    pub fn from_elements(elements: Vec<Operator>, scope: Scope, tol: &Tolerances) -> Result<Self> {
        for e in &elements {
            e.ensure_hermitian(tol)?;
        }
        if let Some(first) = elements.first() {
            for e in &elements {
                first.ensure_same_dim(e)?;
            }
        }
        Ok(Self {
            elements: elements.into_iter().map(|e| e.hermitian_part()).collect(),
            scope,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Σ c_i Z_i`.
    pub fn combine(&self, coefficients: &[f64]) -> Result<Operator> {
        if coefficients.len() != self.elements.len() {
            return Err(Error::CoefficientCount {
                expected: self.elements.len(),
                found: coefficients.len(),
            });
        }
        let first = self
            .elements
            .first()
            .ok_or(Error::CoefficientCount { expected: 0, found: 0 })?;
        let mut out = Operator::zeros(first.dim());
        for (z, &c) in self.elements.iter().zip(coefficients) {
            out = &out + &z.scale_real(c);
        }
        Ok(out)
    }

    /// Real least-squares expansion of a hermitian `a`; returns coefficients
    /// and the residual `‖a − Σ c_i Z_i‖_F / max(1, ‖a‖_F)`.
    pub fn expand(&self, a: &Operator) -> Result<(Vec<f64>, f64)> {
        let n = self.elements.len();
        if n == 0 {
            return Ok((Vec::new(), a.frobenius_norm() / a.frobenius_norm().max(1.0)));
        }
        let d2 = a.dim() * a.dim();
        // Real design matrix: the real and imaginary parts of each entry.
        let mut design = CMatrix::zeros(2 * d2, n);
        for (j, z) in self.elements.iter().enumerate() {
            for (i, v) in z.matrix().iter().enumerate() {
                design[(i, j)] = C64::new(v.re, 0.0);
                design[(d2 + i, j)] = C64::new(v.im, 0.0);
            }
        }
        let mut rhs = CMatrix::zeros(2 * d2, 1);
        for (i, v) in a.matrix().iter().enumerate() {
            rhs[(i, 0)] = C64::new(v.re, 0.0);
            rhs[(d2 + i, 0)] = C64::new(v.im, 0.0);
        }
        let svd = linalg::svd(&design)?;
        let smax = svd.singular_values.first().copied().unwrap_or(0.0);
        let mut coeffs = vec![0.0; n];
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= 1e-12 * smax || s == 0.0 {
                continue;
            }
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..2 * d2 {
                proj += svd.u[(i, k)].conj() * rhs[(i, 0)];
            }
            for (j, c) in coeffs.iter_mut().enumerate() {
                *c += (svd.v[(j, k)] * proj / s).re;
            }
        }
        let fit = self.combine(&coeffs)?;
        let residual = (a - &fit).frobenius_norm() / a.frobenius_norm().max(1.0);
        Ok((coeffs, residual))
    }
}

/// Real Hilbert–Schmidt product `Re Tr(A B)` of hermitian operators.
fn real_inner(a: &Operator, b: &Operator) -> f64 {
    a.matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

/// Hermitian basis of the Heisenberg attractor space (or its fixed-point
/// block) by pivoted real Gram–Schmidt on `(B ± B†)` parts.
pub fn hermitian_basis(
    decomp: &AttractorDecomposition,
    scope: Scope,
    tol: &Tolerances,
) -> Result<HermitianAttractorBasis> {
    let complex: Vec<Operator> = match scope {
        Scope::Full => decomp.all_heisenberg(),
        Scope::FixedPoints => decomp
            .fixed_block(tol)
            .map(|b| b.heisenberg.clone())
            .unwrap_or_default(),
    };
    let expected = complex.len();
    let mut candidates = Vec::with_capacity(2 * expected);
    for b in &complex {
        candidates.push(b.hermitian_part());
        let anti = &(b - &b.adjoint()) * C64::new(0.0, -0.5);
        candidates.push(anti);
    }
    let mut chosen: Vec<Operator> = Vec::with_capacity(expected);
    let mut rest = candidates;
    while chosen.len() < expected {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in rest.iter().enumerate() {
            let r = real_inner(c, c).sqrt();
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
        let Some((i, norm)) = best else { break };
        if norm <= 1e-8 {
            break;
        }
        let q = rest.swap_remove(i).scale_real(1.0 / norm);
        for c in rest.iter_mut() {
            for _ in 0..2 {
                let p = real_inner(&q, c);
                *c = &*c - &q.scale_real(p);
            }
        }
        chosen.push(q.hermitian_part());
    }
    if chosen.len() != expected {
        return Err(Error::BasisRankMismatch {
            rank: chosen.len(),
            expected,
        });
    }
    // Any direction left over means the space is not adjoint-closed.
    let leftover = rest.iter().map(|c| real_inner(c, c).sqrt()).fold(0.0, f64::max);
    if leftover > 1e-6 {
        return Err(Error::BasisRankMismatch {
            rank: expected + 1,
            expected,
        });
    }
    Ok(HermitianAttractorBasis {
        elements: chosen,
        scope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// `σ^{1/2} exp(A) σ^{1/2} / N`.
    One,
    /// `exp(log σ + Σ γ_i Z_i) / N`.
    Two,
}

/// A state written in one of the exponential forms.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsForm {
    pub form: FormKind,
    pub basis: HermitianAttractorBasis,
    pub coefficients: Vec<f64>,
    pub sigma: Operator,
    /// Trace of the unnormalized exponential.
    pub normalization: f64,
    /// Relative least-squares residual of the expansion.
    pub residual: f64,
}

impl GibbsForm {
    pub fn state(&self, tol: &Tolerances) -> Result<Operator> {
        match self.form {
            FormKind::One => state_from_form1(&self.basis, &self.coefficients, &self.sigma, None, tol),
            FormKind::Two => state_from_form2(&self.basis, &self.coefficients, &self.sigma, None, tol),
        }
    }
}

fn check_projection(rho: &Operator, projector: Option<&AsymptoticPropagator>, tol: &Tolerances) -> Result<()> {
    if let Some(p) = projector {
        let residual = p.asymptotic_residual(rho)?;
        if residual > tol.residual {
            return Err(Error::NotAsymptotic { residual });
        }
    }
    Ok(())
}

fn normalized(op: Operator) -> Result<(Operator, f64)> {
    let h = op.hermitian_part();
    let tr = h.trace().re;
    if tr.is_nan() || tr <= 0.0 || !tr.is_finite() {
        return Err(Error::NotUnitTrace { trace: h.trace() });
    }
    Ok((h.scale_real(1.0 / tr), tr))
}

fn hermitian_exp(a: &Operator) -> Result<Operator> {
    a.hermitian_part().eigh()?.apply(f64::exp)
}

/// `σ^{1/2} exp(Σ c_i Z_i) σ^{1/2}` normalized to unit trace. With a
/// projector, the result must be fixed by `T̃`.
pub fn state_from_form1(
    basis: &HermitianAttractorBasis,
    coefficients: &[f64],
    sigma: &Operator,
    projector: Option<&AsymptoticPropagator>,
    tol: &Tolerances,
) -> Result<Operator> {
    let half = sigma.ensure_strictly_positive(tol)?.apply(f64::sqrt)?;
    let a = basis.combine(coefficients)?;
    let e = hermitian_exp(&a)?;
    let (rho, _) = normalized(&(&half * &e) * &half)?;
    check_projection(&rho, projector, tol)?;
    Ok(rho)
}

/// `exp(log σ + Σ γ_i Z_i)` normalized to unit trace.
pub fn state_from_form2(
    basis: &HermitianAttractorBasis,
    gamma: &[f64],
    sigma: &Operator,
    projector: Option<&AsymptoticPropagator>,
    tol: &Tolerances,
) -> Result<Operator> {
    let log_sigma = sigma.ensure_strictly_positive(tol)?.apply(f64::ln)?;
    let a = &log_sigma + &basis.combine(gamma)?;
    let (rho, _) = normalized(hermitian_exp(&a)?)?;
    check_projection(&rho, projector, tol)?;
    Ok(rho)
}

fn strictly_positive_spectrum(rho: &Operator, tol: &Tolerances) -> Result<HermitianSpectrum> {
    rho.ensure_strictly_positive(tol)
}

/// Expand `log ω`, `ω = γ σ^{−1/2} ρ σ^{−1/2}`, `γ = 1/Tr(σ^{−1/2} ρ σ^{−1/2})`.
pub fn coeffs_form1(
    rho: &Operator,
    basis: &HermitianAttractorBasis,
    sigma: &Operator,
    tol: &Tolerances,
) -> Result<GibbsForm> {
    strictly_positive_spectrum(rho, tol)?;
    let inv_half = sigma.ensure_strictly_positive(tol)?.apply(|v| 1.0 / v.sqrt())?;
    let raw = (&(&inv_half * rho) * &inv_half).hermitian_part();
    let gamma = 1.0 / raw.trace().re;
    let omega = raw.scale_real(gamma);
    let a = omega.eigh()?.apply(f64::ln)?;
    let (coefficients, residual) = basis.expand(&a)?;
    if residual > tol.residual {
        return Err(Error::NotAsymptotic { residual });
    }
    Ok(GibbsForm {
        form: FormKind::One,
        basis: basis.clone(),
        coefficients,
        sigma: sigma.clone(),
        normalization: gamma,
        residual,
    })
}

/// Expand `log ρ − log σ`.
pub fn coeffs_form2(
    rho: &Operator,
    basis: &HermitianAttractorBasis,
    sigma: &Operator,
    tol: &Tolerances,
) -> Result<GibbsForm> {
    let log_rho = strictly_positive_spectrum(rho, tol)?.apply(f64::ln)?;
    let log_sigma = sigma.ensure_strictly_positive(tol)?.apply(f64::ln)?;
    let b = &log_rho - &log_sigma;
    let (coefficients, residual) = basis.expand(&b)?;
    if residual > tol.residual {
        return Err(Error::NotForm2Representable { residual });
    }
    let unnormalized = hermitian_exp(&(&log_sigma + &basis.combine(&coefficients)?))?;
    Ok(GibbsForm {
        form: FormKind::Two,
        basis: basis.clone(),
        coefficients,
        sigma: sigma.clone(),
        normalization: unnormalized.trace().re,
        residual,
    })
}

/// Default grid of mixing weights for [`limit_procedure`].
pub const DEFAULT_S_GRID: [f64; 8] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001];

#[derive(Debug, Clone, PartialEq)]
pub struct LimitPoint {
    pub s: f64,
    pub coefficients: Vec<f64>,
    pub normalization: f64,
    /// `‖state_from_form1(coefficients) − ω(s)‖_F`.
    pub reconstruction_error: f64,
}

/// Form-1 coefficients of `ω(s) = (1 − s)ρ + sσ` along a grid of `s`.
pub fn limit_procedure(
    rho: &Operator,
    sigma: &Operator,
    basis: &HermitianAttractorBasis,
    s_grid: &[f64],
    projector: Option<&AsymptoticPropagator>,
    tol: &Tolerances,
) -> Result<Vec<LimitPoint>> {
    rho.ensure_hermitian(tol)?;
    check_projection(rho, projector, tol)?;
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let omega = &rho.scale_real(1.0 - s) + &sigma.scale_real(s);
        let form = coeffs_form1(&omega, basis, sigma, tol)?;
        let back = state_from_form1(basis, &form.coefficients, sigma, None, tol)?;
        out.push(LimitPoint {
            s,
            reconstruction_error: (&back - &omega.scale(C64::new(1.0 / omega.trace().re, 0.0))).frobenius_norm(),
            coefficients: form.coefficients,
            normalization: form.normalization,
        });
    }
    Ok(out)
}
