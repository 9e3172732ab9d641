//! Faithful T-states: strictly positive `σ` with `T(σ) ≤ σ`.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::operator::{hs_inner, Operator};
use crate::spectral::{biorthogonal_duals, kernel_basis};
use crate::{Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TStateSource {
    Found,
    UserSupplied,
}

/// Evidence that `sigma` is a faithful T-state of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TStateCertificate {
    pub sigma: Operator,
    /// Smallest eigenvalue of `σ`.
    pub min_eig: f64,
    /// Smallest eigenvalue of `σ − T(σ)` (discrete) or `−L(σ)` (continuous).
    pub defect: f64,
    /// `T(σ) = σ` or `L(σ) = 0` within tolerance.
    pub stationary: bool,
    pub source: TStateSource,
    /// Smallest eigenvalue of `σ − exp(tL)(σ)` over the sampled time grid.
    /// Continuous models only.
    pub sampled_defect: Option<f64>,
    /// The continuous check samples finitely many times and is therefore a
    /// heuristic surrogate for "all t > 0".
    pub heuristic: bool,
}

/// Number of points of the geometric time grid for continuous verification.
pub const TIME_GRID_POINTS: u32 = 10;

/// Search for the invariant state of maximal support,
/// `σ = T̃(I/N)` symmetrized, and certify it.
pub fn find_tstate(model: &Model, tol: &Tolerances) -> Result<TStateCertificate> {
    if !model.is_trace_preserving(tol) {
        return Err(Error::TracePreservingRequired);
    }
    let n = model.dim();
    let s = model.generator_schrodinger();
    let fixed = model.fixed_eigenvalue();
    let right = kernel_basis(&s, fixed, tol)?;
    let left = kernel_basis(&s.adjoint(), fixed, tol)?;
    if right.len() != left.len() {
        return Err(Error::PictureMismatch {
            eigenvalue: fixed,
            schrodinger: right.len(),
            heisenberg: left.len(),
        });
    }
    let duals = biorthogonal_duals(&right, &left)?;
    let mixed = Operator::identity(n).scale_real(1.0 / n as f64);
    let mut projected = Operator::zeros(n);
    for (x, d) in right.iter().zip(&duals) {
        projected = &projected + &x.scale(hs_inner(d, &mixed)?);
    }
    let mut sigma = projected.hermitian_part();
    let tr = sigma.trace().re;
    if tr.is_nan() || tr <= 0.0 {
        return Err(Error::NoFaithfulTState {
            rank: 0,
            dim: n,
            kernel: Vec::new(),
        });
    }
    sigma = sigma.scale_real(1.0 / tr);
    let spec = sigma.eigh()?;
    let threshold = sigma.positivity_threshold(tol);
    let kernel: Vec<Vec<C64>> = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= threshold)
        .map(|(j, _)| Operator::column_vec(&spec.vectors, j))
        .collect();
    if !kernel.is_empty() {
        return Err(Error::NoFaithfulTState {
            rank: n - kernel.len(),
            dim: n,
            kernel,
        });
    }
    let mut cert = verify_tstate(model, &sigma, tol)?;
    cert.source = TStateSource::Found;
    Ok(cert)
}

/// Check strict positivity and `T(σ) ≤ σ`; for continuous models also
/// `exp(tL)(σ) ≤ σ` on the grid `t = δ·2^k`, `δ = 0.1/‖L‖_F`.
pub fn verify_tstate(model: &Model, sigma: &Operator, tol: &Tolerances) -> Result<TStateCertificate> {
    if sigma.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: sigma.dim(),
        });
    }
    sigma.ensure_hermitian(tol)?;
    if !sigma.is_trace_one(tol) {
        return Err(Error::NotUnitTrace { trace: sigma.trace() });
    }
    let sigma = sigma.hermitian_part();
    let spec = sigma.ensure_strictly_positive(tol)?;
    let s = model.generator_schrodinger();
    let image = s.apply(&sigma)?;
    let norm = s.frobenius_norm();
    let (defect_op, stationary_defect, scale) = match model {
        Model::Discrete(_) => (&sigma - &image, (&image - &sigma).frobenius_norm(), 1.0),
        Model::Continuous(_) => (-&image, image.frobenius_norm(), norm.max(1.0)),
    };
    let defect = check_defect(&defect_op, tol.defect * scale)?;
    let stationary = stationary_defect <= tol.residual * scale;
    let mut sampled_defect = None;
    if let Model::Continuous(_) = model {
        if norm > 0.0 {
            let delta = 0.1 / norm;
            let mut worst = f64::INFINITY;
            for k in 0..TIME_GRID_POINTS {
                let t = delta * f64::powi(2.0, k as i32);
                let evolved = s.exp_scaled(t)?.apply(&sigma)?;
                let d = check_defect(&(&sigma - &evolved), tol.defect)?;
                worst = worst.min(d);
            }
            sampled_defect = Some(worst);
        } else {
            sampled_defect = Some(0.0);
        }
    }
    Ok(TStateCertificate {
        min_eig: spec.min(),
        sigma,
        defect,
        stationary,
        source: TStateSource::UserSupplied,
        sampled_defect,
        heuristic: matches!(model, Model::Continuous(_)),
    })
}

/// Smallest eigenvalue of the hermitian part of `d`, or `DefectNegative`.
fn check_defect(d: &Operator, allowed: f64) -> Result<f64> {
    let h = d.hermitian_part();
    let spec = h.eigh()?;
    let min = spec.min();
    if min < -allowed {
        return Err(Error::DefectNegative {
            min_eig: min,
            witness: Operator::column_vec(&spec.vectors, 0),
        });
    }
    Ok(min)
}

/// `‖[σ, X_i]‖_F` for every attractor.
pub fn commutant_check(sigma: &Operator, attractors: &[Operator]) -> Result<Vec<(usize, f64)>> {
    attractors
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sigma.ensure_same_dim(x)?;
            Ok((i, sigma.commutator(x).frobenius_norm()))
        })
        .collect()
}
