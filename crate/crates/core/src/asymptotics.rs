//! Asymptotic propagation, convergence diagnostics, recovery of the
//! asymptotic dynamics and the asymptotic master equation.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::duality::{DualBasis, ModularPair};
use crate::error::{Error, Result};
use crate::model::{ContinuousModel, DiscreteModel, Model, ProcessKind};
use crate::operator::{hs_inner, MonotoneFunction, Operator, Superoperator};
use crate::spectral::{biorthogonal_duals, AttractorDecomposition};
use crate::{Tolerances, C64};

/// Discrete step count or continuous time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evolution {
    Steps(u64),
    Time(f64),
}

impl Evolution {
    /// `λⁿ` or `e^{λt}`.
    pub fn factor(&self, lambda: C64) -> C64 {
        match *self {
            Evolution::Steps(n) => {
                if n == 0 {
                    return C64::new(1.0, 0.0);
                }
                let (r, theta) = lambda.to_polar();
                C64::from_polar(r.powf(n as f64), theta * n as f64)
            }
            Evolution::Time(t) => (lambda * t).exp(),
        }
    }

    pub fn origin(kind: ProcessKind) -> Self {
        match kind {
            ProcessKind::Discrete => Evolution::Steps(0),
            ProcessKind::Continuous => Evolution::Time(0.0),
        }
    }
}

/// One term `(λ, X_{λ,i}, X^{λ,i})` of the asymptotic expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTerm {
    pub eigenvalue: C64,
    pub primal: Operator,
    pub dual: Operator,
}

/// `ρ(n) = Σ λⁿ X_{λ,i} (X^{λ,i}, ρ0)` and its Heisenberg counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPropagator {
    pub kind: ProcessKind,
    pub dim: usize,
    pub terms: Vec<PropagatorTerm>,
}

impl AsymptoticPropagator {
    /// Propagator from a dual basis built with faithful T-states.
    pub fn from_dual_basis(kind: ProcessKind, dual: &DualBasis) -> Self {
        let dim = dual.pair.sigma1().dim();
        let terms = dual
            .triples()
            .map(|(eigenvalue, p, d)| PropagatorTerm {
                eigenvalue,
                primal: p.clone(),
                dual: d.clone(),
            })
            .collect();
        Self { kind, dim, terms }
    }

    /// Propagator from left/right eigenvectors of the generator, usable
    /// without a T-state.
    pub fn spectral(decomp: &AttractorDecomposition) -> Result<Self> {
        let mut terms = Vec::new();
        for b in &decomp.blocks {
            let duals = biorthogonal_duals(&b.schrodinger, &b.heisenberg)?;
            for (p, d) in b.schrodinger.iter().zip(duals) {
                terms.push(PropagatorTerm {
                    eigenvalue: b.eigenvalue,
                    primal: p.clone(),
                    dual: d,
                });
            }
        }
        Ok(Self {
            kind: decomp.kind,
            dim: decomp.dim,
            terms,
        })
    }

    pub fn primal_basis(&self) -> Vec<Operator> {
        self.terms.iter().map(|t| t.primal.clone()).collect()
    }

    /// `Σ λⁿ X_{λ,i} (X^{λ,i}, ρ0)`.
    pub fn state(&self, rho0: &Operator, at: Evolution) -> Result<Operator> {
        let mut out = Operator::zeros(self.dim);
        for t in &self.terms {
            let c = hs_inner(&t.dual, rho0)? * at.factor(t.eigenvalue);
            out = &out + &t.primal.scale(c);
        }
        Ok(out)
    }

    /// The asymptotic projection `T̃` (evolution by zero steps).
    pub fn project(&self, x: &Operator) -> Result<Operator> {
        self.state(x, Evolution::origin(self.kind))
    }

    /// `Σ λ̄ⁿ X^{λ,i} (X_{λ,i}, A0)`, so that `(A(n), ρ0) = (A0, ρ(n))`.
    pub fn observable(&self, a0: &Operator, at: Evolution) -> Result<Operator> {
        let mut out = Operator::zeros(self.dim);
        for t in &self.terms {
            let c = hs_inner(&t.primal, a0)? * at.factor(t.eigenvalue).conj();
            out = &out + &t.dual.scale(c);
        }
        Ok(out)
    }

    /// `‖T̃(ρ) − ρ‖_F / max(1, ‖ρ‖_F)`: zero for states in the attractor span.
    pub fn asymptotic_residual(&self, rho: &Operator) -> Result<f64> {
        Ok((&self.project(rho)? - rho).frobenius_norm() / rho.frobenius_norm().max(1.0))
    }
}

/// Propagator for a model using faithful T-states `σ1`, `σ2` and `k`.
pub fn propagator(
    decomp: &AttractorDecomposition,
    pair: &ModularPair,
    tol: &Tolerances,
) -> Result<AsymptoticPropagator> {
    let dual = crate::duality::dual_basis(decomp, pair, tol)?;
    Ok(AsymptoticPropagator::from_dual_basis(decomp.kind, &dual))
}

/// Sampling of `‖Tⁿ(ρ0) − ρ_as(n)‖_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Steps `0..=n` of a discrete chain.
    Steps(usize),
    /// `count + 1` equally spaced times `0, dt, 2dt, …` of a semigroup.
    Times { dt: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    /// Step index or time.
    pub at: f64,
    pub distance: f64,
}

pub fn convergence_report(
    model: &Model,
    prop: &AsymptoticPropagator,
    rho0: &Operator,
    horizon: Horizon,
) -> Result<Vec<ConvergencePoint>> {
    let s = model.generator_schrodinger();
    let mut points = Vec::new();
    match (model, horizon) {
        (Model::Discrete(_), Horizon::Steps(n)) => {
            let mut rho = rho0.clone();
            for step in 0..=n {
                let asym = prop.state(rho0, Evolution::Steps(step as u64))?;
                points.push(ConvergencePoint {
                    at: step as f64,
                    distance: (&rho - &asym).frobenius_norm(),
                });
                rho = s.apply(&rho)?;
            }
        }
        (Model::Continuous(_), Horizon::Times { dt, count }) => {
            let step = s.exp_scaled(dt)?;
            let mut rho = rho0.clone();
            for i in 0..=count {
                let t = dt * i as f64;
                let asym = prop.state(rho0, Evolution::Time(t))?;
                points.push(ConvergencePoint {
                    at: t,
                    distance: (&rho - &asym).frobenius_norm(),
                });
                rho = step.apply(&rho)?;
            }
        }
        _ => return Err(Error::InvalidModel("horizon kind does not match the model kind".into())),
    }
    Ok(points)
}

/// Log-linear fit of the decay over the points above `floor`, using the
/// later half of them. Discrete: per-step factor `r`; continuous: rate `κ`
/// with `distance ∝ e^{−κt}`.
pub fn fit_decay(points: &[ConvergencePoint], kind: ProcessKind, floor: f64) -> Option<f64> {
    let above: Vec<&ConvergencePoint> = points.iter().filter(|p| p.distance > floor && p.at > 0.0).collect();
    if above.len() < 3 {
        return None;
    }
    let tail = &above[above.len() / 2..];
    let tail = if tail.len() < 2 { &above[..] } else { tail };
    let n = tail.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in tail {
        let y = p.distance.ln();
        sx += p.at;
        sy += y;
        sxx += p.at * p.at;
        sxy += p.at * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::EPSILON {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    Some(match kind {
        ProcessKind::Discrete => slope.exp(),
        ProcessKind::Continuous => -slope,
    })
}

/// `T‡` with Kraus operators `σ^{1/2} A_k† σ^{−1/2}`.
pub fn petz_recovery(model: &DiscreteModel, sigma: &Operator, tol: &Tolerances) -> Result<DiscreteModel> {
    let spec = sigma.ensure_strictly_positive(tol)?;
    let half = spec.apply(f64::sqrt)?;
    let inv_half = spec.apply(|v| 1.0 / v.sqrt())?;
    let kraus: Vec<Operator> = model
        .kraus()
        .iter()
        .map(|a| &(&half * &a.adjoint()) * &inv_half)
        .collect();
    // Σ B†B = σ^{−1/2} T(σ) σ^{−1/2}: the identity exactly when T(σ) = σ.
    let image = model.apply(sigma);
    let tp = (&image - sigma).frobenius_norm() <= tol.residual;
    DiscreteModel::new(kraus, Some(tp), tol)
}

/// How far `(·,·)_k` is from being preserved by the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    /// Worst normalized defect over attractor pairs.
    pub attractor_defect: f64,
    /// Worst normalized defect over the supplied non-attractor probes
    /// (informational; contraction is expected there).
    pub probe_defect: Option<f64>,
    pub pairs: usize,
}

impl IsometryReport {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.attractor_defect <= tol.residual
    }
}

/// Discrete: `|(TX, TY)_k − (X, Y)_k|`; continuous: `|(LX, Y)_k + (X, LY)_k|`,
/// the derivative at `t = 0`. Both normalized by `max(1, ‖X‖_k ‖Y‖_k)`.
pub fn k_isometry_check(
    model: &Model,
    sigma: &Operator,
    k: &MonotoneFunction,
    decomp: &AttractorDecomposition,
    probes: &[Operator],
    tol: &Tolerances,
) -> Result<IsometryReport> {
    let pair = ModularPair::symmetric(k.clone(), sigma, tol)?;
    let g = model.generator_schrodinger();
    let attractors = decomp.all_schrodinger();
    let images: Vec<Operator> = attractors.iter().map(|x| g.apply(x)).collect::<Result<_>>()?;
    let worst = |xs: &[Operator], gx: &[Operator]| -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in xs.iter().enumerate() {
                let d = match model.kind() {
                    ProcessKind::Discrete => pair.inner(&gx[i], &gx[j])? - pair.inner(x, y)?,
                    ProcessKind::Continuous => pair.inner(&gx[i], y)? + pair.inner(x, &gx[j])?,
                };
                let scale = (pair.norm(x)? * pair.norm(y)?).max(1.0);
                worst = worst.max(d.norm() / scale);
            }
        }
        Ok(worst)
    };
    let attractor_defect = worst(&attractors, &images)?;
    let probe_defect = if probes.is_empty() {
        None
    } else {
        let gp: Vec<Operator> = probes.iter().map(|x| g.apply(x)).collect::<Result<_>>()?;
        Some(worst(probes, &gp)?)
    };
    Ok(IsometryReport {
        attractor_defect,
        probe_defect,
        pairs: attractors.len() * attractors.len(),
    })
}

/// `‖L(X)σ⁻¹ − i[Xσ⁻¹, H]‖_F` for every attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterCheckReport {
    pub residuals: Vec<MasterResidual>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterResidual {
    pub eigenvalue: C64,
    pub index: usize,
    pub residual: f64,
    /// `max(1, ‖L(X)σ⁻¹‖_F, ‖[Xσ⁻¹, H]‖_F)`.
    pub scale: f64,
}

impl MasterCheckReport {
    pub fn worst_relative(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual / r.scale).fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.worst_relative() <= tol.residual
    }
}

pub fn asymptotic_master_check(
    model: &ContinuousModel,
    sigma: &Operator,
    decomp: &AttractorDecomposition,
    tol: &Tolerances,
) -> Result<MasterCheckReport> {
    let inv = sigma.ensure_strictly_positive(tol)?.apply(|v| 1.0 / v)?;
    let l = Model::Continuous(model.clone()).generator_schrodinger();
    let h = model.hamiltonian();
    let mut residuals = Vec::new();
    for b in &decomp.blocks {
        for (index, x) in b.schrodinger.iter().enumerate() {
            let lhs = &l.apply(x)? * &inv;
            let xs = x * &inv;
            let rhs = xs.commutator(h).scale(C64::new(0.0, 1.0));
            residuals.push(MasterResidual {
                eigenvalue: b.eigenvalue,
                index,
                residual: (&lhs - &rhs).frobenius_norm(),
                scale: lhs.frobenius_norm().max(rhs.frobenius_norm()).max(1.0),
            });
        }
    }
    Ok(MasterCheckReport { residuals })
}

/// `max ‖T‡T(X) − X‖_F` and `max ‖TT‡(X) − X‖_F` over a basis.
pub fn reversal_defects(model: &DiscreteModel, recovery: &DiscreteModel, basis: &[Operator]) -> (f64, f64) {
    let mut a = 0.0f64;
    let mut b = 0.0f64;
    for x in basis {
        a = a.max((&recovery.apply(&model.apply(x)) - x).frobenius_norm());
        b = b.max((&model.apply(&recovery.apply(x)) - x).frobenius_norm());
    }
    (a, b)
}

/// Superoperator of a discrete model's `n`-th power, for brute-force checks.
pub fn power_superoperator(model: &DiscreteModel, n: u64) -> Superoperator {
    Model::Discrete(model.clone()).generator_schrodinger().power(n)
}
