//! Asymptotic structure of finite-dimensional quantum Markov processes.
//!
//! The crate covers discrete quantum Markov chains (a quantum operation given
//! by Kraus operators, iterated) and quantum Markov dynamical semigroups
//! (Lindblad generators with an optional optical potential). For both it
//! computes the peripheral spectrum and attractor spaces in the Schrödinger
//! and Heisenberg pictures, finds or verifies faithful T-states, builds dual
//! bases from operator monotone functions of the relative modular operator,
//! propagates the asymptotic dynamics, solves the structure equations that
//! characterize attractors independently of the spectrum, and converts
//! asymptotic states to and from their exponential (Gibbs-like) forms.
//!
//! Everything here is pure computation on dense matrices: the crate is
//! `no_std` and needs only `alloc`. File formats and the command-line front
//! end live in the `qmpa` crate.

#![no_std]

extern crate alloc;

pub mod asymptotics;
pub mod duality;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod spectral;
pub mod structure;
pub mod tstate;

pub use num_complex::Complex64 as C64;

pub use asymptotics::{AsymptoticPropagator, Evolution};
pub use duality::{DualBasis, ModularPair};
pub use error::{Error, Result};
pub use gibbs::{GibbsForm, HermitianAttractorBasis, Scope};
pub use model::{ContinuousModel, DiscreteModel, Model, ProcessKind};
pub use operator::{MonotoneFunction, Operator, Superoperator};
pub use spectral::{AttractorDecomposition, PeripheralBlock};
pub use tstate::TStateCertificate;

/// Numerical tolerances shared by every analysis.
///
/// Relative tolerances are scaled by the norm named in each field's comment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `‖A − A†‖_F ≤ hermitian · max(1, ‖A‖_F)`.
    pub hermitian: f64,
    /// Strict positivity: `λ_min > positivity · Tr(A) / N`.
    pub positivity: f64,
    /// Kraus and optical-potential checks: `‖ΣA†A − I‖_F`, PSD defects.
    pub model: f64,
    /// Discrete: `| |λ| − 1 | ≤ peripheral`; continuous: `|Re λ| ≤ peripheral · ‖L‖_F`.
    pub peripheral: f64,
    /// Eigenvalues closer than this are one peripheral cluster.
    pub cluster: f64,
    /// Kernel threshold relative to the largest singular value.
    pub kernel: f64,
    /// Eigen-equation residuals, relative to `‖G‖_F · ‖X‖_F`.
    pub eigen: f64,
    /// Pivot threshold in k-Gram–Schmidt.
    pub gram_pivot: f64,
    /// Residuals of pairings, projections and expansions.
    pub residual: f64,
    /// Allowed negative eigenvalue of a T-state defect.
    pub defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            positivity: 1e-10,
            model: 1e-10,
            peripheral: 1e-9,
            cluster: 1e-8,
            kernel: 1e-8,
            eigen: 1e-8,
            gram_pivot: 1e-10,
            residual: 1e-8,
            defect: 1e-10,
        }
    }
}
