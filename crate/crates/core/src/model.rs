//! Discrete (Kraus) and continuous (Lindblad) process definitions and their
//! generators in both pictures.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::I;
use crate::operator::{Operator, Superoperator};
use crate::{Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    Discrete,
    Continuous,
}

/// A quantum operation `T(X) = Σ_j A_j X A_j†`, iterated in discrete time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    dim: usize,
    kraus: Vec<Operator>,
    trace_preserving: bool,
}

impl DiscreteModel {
    /// Validates `Σ A_j†A_j ≤ I`. When `declared_trace_preserving` is
    /// `Some(true)` the equality is required; when `None` it is inferred.
    pub fn new(kraus: Vec<Operator>, declared_trace_preserving: Option<bool>, tol: &Tolerances) -> Result<Self> {
        let dim = kraus
            .first()
            .ok_or_else(|| Error::InvalidModel("at least one Kraus operator is required".into()))?
            .dim();
        for a in &kraus {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
        }
        let id = Operator::identity(dim);
        let gram = kraus_gram(&kraus, false);
        let defect = &id - &gram;
        let min_eig = defect.min_eigenvalue()?;
        let scale = tol.model * (dim as f64).sqrt().max(1.0);
        if min_eig < -scale {
            return Err(Error::InvariantViolation {
                what: "sum of A_j^dagger A_j exceeds the identity",
                defect: -min_eig,
                tolerance: scale,
            });
        }
        let tp_defect = defect.frobenius_norm();
        let is_tp = tp_defect <= scale;
        let trace_preserving = match declared_trace_preserving {
            Some(true) if !is_tp => {
                return Err(Error::InvariantViolation {
                    what: "declared trace preserving but sum of A_j^dagger A_j differs from the identity",
                    defect: tp_defect,
                    tolerance: scale,
                })
            }
            Some(declared) => declared,
            None => is_tp,
        };
        Ok(Self {
            dim,
            kraus,
            trace_preserving,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `T(X)`.
    pub fn apply(&self, x: &Operator) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for a in &self.kraus {
            out = &out + &(&(a * x) * &a.adjoint());
        }
        out
    }

    /// `T†(X) = Σ A_j† X A_j`.
    pub fn apply_adjoint(&self, x: &Operator) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for a in &self.kraus {
            out = &out + &(&(&a.adjoint() * x) * a);
        }
        out
    }
}

/// `Σ A_j† A_j` (or `Σ A_j A_j†` when `outer`).
fn kraus_gram(kraus: &[Operator], outer: bool) -> Operator {
    let mut g = Operator::zeros(kraus[0].dim());
    for a in kraus {
        let t = if outer { a * &a.adjoint() } else { &a.adjoint() * a };
        g = &g + &t;
    }
    g
}

/// A Lindblad generator
/// `L(X) = i[X,H] + Σ_j (L_j X L_j† − ½{L_j†L_j, X}) − GX − XG`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    dim: usize,
    hamiltonian: Operator,
    lindblads: Vec<Operator>,
    optical_potential: Operator,
}

impl ContinuousModel {
    pub fn new(
        hamiltonian: Operator,
        lindblads: Vec<Operator>,
        optical_potential: Option<Operator>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        if !hamiltonian.is_hermitian(tol) {
            return Err(Error::InvariantViolation {
                what: "hamiltonian is not hermitian",
                defect: hamiltonian.hermitian_defect(),
                tolerance: tol.hermitian,
            });
        }
        for l in &lindblads {
            hamiltonian.ensure_same_dim(l)?;
        }
        let g = optical_potential.unwrap_or_else(|| Operator::zeros(dim));
        hamiltonian.ensure_same_dim(&g)?;
        if !g.is_hermitian(tol) {
            return Err(Error::InvariantViolation {
                what: "optical potential is not hermitian",
                defect: g.hermitian_defect(),
                tolerance: tol.hermitian,
            });
        }
        let min_eig = g.min_eigenvalue()?;
        let scale = tol.model * g.frobenius_norm().max(1.0);
        if min_eig < -scale {
            return Err(Error::InvariantViolation {
                what: "optical potential is not positive semidefinite",
                defect: -min_eig,
                tolerance: scale,
            });
        }
        Ok(Self {
            dim,
            hamiltonian: hamiltonian.hermitian_part(),
            lindblads,
            optical_potential: g.hermitian_part(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[Operator] {
        &self.lindblads
    }

    pub fn optical_potential(&self) -> &Operator {
        &self.optical_potential
    }

    /// `K = iH + ½ Σ L_j†L_j + G`.
    pub fn k_operator(&self) -> Operator {
        let mut half = Operator::zeros(self.dim);
        for l in &self.lindblads {
            half = &half + &(&l.adjoint() * l);
        }
        &(&self.hamiltonian.scale(I) + &half.scale_real(0.5)) + &self.optical_potential
    }

    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        self.optical_potential.frobenius_norm() <= tol.model
    }

    /// Same model with the Hamiltonian removed.
    pub fn without_hamiltonian(&self) -> Self {
        Self {
            hamiltonian: Operator::zeros(self.dim),
            ..self.clone()
        }
    }
}

/// Either kind of quantum Markov process.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Discrete(DiscreteModel),
    Continuous(ContinuousModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceClass {
    TracePreserving,
    TraceNonIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unitality {
    Unital,
    SubUnital,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub trace: TraceClass,
    pub unitality: Unitality,
}

impl From<DiscreteModel> for Model {
    fn from(m: DiscreteModel) -> Self {
        Model::Discrete(m)
    }
}

impl From<ContinuousModel> for Model {
    fn from(m: ContinuousModel) -> Self {
        Model::Continuous(m)
    }
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Discrete(m) => m.dim,
            Model::Continuous(m) => m.dim,
        }
    }

    pub fn kind(&self) -> ProcessKind {
        match self {
            Model::Discrete(_) => ProcessKind::Discrete,
            Model::Continuous(_) => ProcessKind::Continuous,
        }
    }

    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        match self {
            Model::Discrete(m) => m.trace_preserving,
            Model::Continuous(m) => m.is_trace_preserving(tol),
        }
    }

    /// Matrix of `T` (discrete) or `L` (continuous).
    pub fn generator_schrodinger(&self) -> Superoperator {
        match self {
            Model::Discrete(m) => Superoperator::from_kraus(&m.kraus).expect("validated Kraus list"),
            Model::Continuous(m) => lindblad_superoperator(m),
        }
    }

    /// Matrix of `T†` or `L†`, the Hilbert–Schmidt adjoint.
    pub fn generator_heisenberg(&self) -> Superoperator {
        self.generator_schrodinger().adjoint()
    }

    /// The value of the generator's fixed-point eigenvalue: 1 or 0.
    pub fn fixed_eigenvalue(&self) -> C64 {
        match self {
            Model::Discrete(_) => C64::new(1.0, 0.0),
            Model::Continuous(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn classify(&self, tol: &Tolerances) -> Result<Classification> {
        let n = self.dim();
        let id = Operator::identity(n);
        let (trace, image_of_identity) = match self {
            Model::Discrete(m) => {
                let trace = if m.trace_preserving {
                    TraceClass::TracePreserving
                } else {
                    TraceClass::TraceNonIncreasing
                };
                // I − T(I): zero when unital, PSD when sub-unital.
                (trace, &id - &kraus_gram(&m.kraus, true))
            }
            Model::Continuous(m) => {
                let trace = if m.is_trace_preserving(tol) {
                    TraceClass::TracePreserving
                } else {
                    TraceClass::TraceNonIncreasing
                };
                // −L(I): zero when unital, PSD when sub-unital to first order.
                let l = self.generator_schrodinger();
                let li = l.apply(&id)?;
                (trace, -&li)
            }
        };
        let scale = tol.model * (n as f64).sqrt().max(image_of_identity.frobenius_norm());
        let unitality = if image_of_identity.frobenius_norm() <= scale {
            Unitality::Unital
        } else if image_of_identity.is_hermitian(tol) && image_of_identity.min_eigenvalue()? >= -scale {
            Unitality::SubUnital
        } else {
            Unitality::Neither
        };
        Ok(Classification { trace, unitality })
    }

    pub fn as_discrete(&self) -> Option<&DiscreteModel> {
        match self {
            Model::Discrete(m) => Some(m),
            Model::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&ContinuousModel> {
        match self {
            Model::Continuous(m) => Some(m),
            Model::Discrete(_) => None,
        }
    }

    pub fn describe(&self) -> alloc::string::String {
        match self {
            Model::Discrete(m) => format!("discrete, dim {}, {} Kraus operators", m.dim, m.kraus.len()),
            Model::Continuous(m) => format!("continuous, dim {}, {} Lindblad operators", m.dim, m.lindblads.len()),
        }
    }
}

fn lindblad_superoperator(m: &ContinuousModel) -> Superoperator {
    let n = m.dim;
    let id = Operator::identity(n);
    // i[X,H] = i X H − i H X
    let mut total =
        &Superoperator::sandwich(&id, &m.hamiltonian).scale(I) - &Superoperator::sandwich(&m.hamiltonian, &id).scale(I);
    for l in &m.lindblads {
        let ldl = &l.adjoint() * l;
        total = &total + &Superoperator::sandwich(l, &l.adjoint());
        total = &total - &Superoperator::sandwich(&ldl, &id).scale(C64::new(0.5, 0.0));
        total = &total - &Superoperator::sandwich(&id, &ldl).scale(C64::new(0.5, 0.0));
    }
    total = &total - &Superoperator::sandwich(&m.optical_potential, &id);
    total = &total - &Superoperator::sandwich(&id, &m.optical_potential);
    total
}
