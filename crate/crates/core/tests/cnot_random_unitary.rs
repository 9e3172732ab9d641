//! Two-qubit random unitary chain built from the two CNOT gates with equal
//! probabilities.

mod common;

use common::*;
use qmpa_core::asymptotics::{
    convergence_report, fit_decay, k_isometry_check, petz_recovery, propagator, reversal_defects, Horizon,
};
use qmpa_core::duality::{dual_basis, k_orthogonality_report};
use qmpa_core::gibbs::{limit_procedure, state_from_form1, state_from_form2, DEFAULT_S_GRID};
use qmpa_core::model::{TraceClass, Unitality};
use qmpa_core::spectral::{decompose, full_spectrum, span_distance};
use qmpa_core::structure::{algebra_closure_check, cross_validate};
use qmpa_core::tstate::{commutant_check, find_tstate, verify_tstate};
use qmpa_core::{HermitianAttractorBasis, ModularPair, MonotoneFunction, Operator, Scope, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn classified_as_unital_channel() {
    let cls = cnot_model().classify(&tol()).unwrap();
    assert_eq!(cls.trace, TraceClass::TracePreserving);
    assert_eq!(cls.unitality, Unitality::Unital);
}

#[test]
fn attractor_space_is_six_dimensional() {
    let tol = tol();
    let d = decompose(&cnot_model(), &tol).unwrap();
    assert_eq!(d.dimension(), 6);
    assert_eq!(d.multiplicities(), vec![5, 1]);
    assert!((d.eigenvalues()[0] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((d.eigenvalues()[1] - c(-1.0, 0.0)).norm() < 1e-12);

    let fixed = cnot_fixed_span();
    let odd = vec![x_minus_one()];
    assert!(span_distance(&d.blocks[0].schrodinger, &fixed).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[1].schrodinger, &odd).unwrap() <= 1e-8);
    // T† = T for self-inverse hermitian unitaries, so both pictures agree.
    assert!(span_distance(&d.blocks[0].heisenberg, &fixed).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[1].heisenberg, &odd).unwrap() <= 1e-8);
}

#[test]
fn known_attractors_satisfy_eigen_equations() {
    let s = cnot_model().generator_schrodinger();
    for x in cnot_fixed_span() {
        assert!((&s.apply(&x).unwrap() - &x).frobenius_norm() < 1e-14);
    }
    let x = x_minus_one();
    assert!((&s.apply(&x).unwrap() + &x).frobenius_norm() < 1e-14);
}

#[test]
fn second_eigenvalue_modulus_below_one() {
    // Oracle for the decay rate: brute-force spectrum of the 16x16 matrix.
    let spec = full_spectrum(&cnot_model().generator_schrodinger()).unwrap();
    let mut moduli: Vec<f64> = spec.iter().map(|(l, _)| l.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!((moduli[5] - 1.0).abs() < 1e-9);
    assert!(moduli[6] < 1.0 - 1e-3);
}

#[test]
fn known_tstate_and_commutant() {
    let tol = tol();
    let m = cnot_model();
    let sigma = cnot_sigma();
    let cert = verify_tstate(&m, &sigma, &tol).unwrap();
    assert!(cert.stationary);
    assert!((cert.min_eig - 0.2).abs() < 1e-12);

    let f = phi();
    let s = psi();
    let target = pp(&f, &s);
    let report = commutant_check(&sigma, std::slice::from_ref(&target)).unwrap();
    let expected = 0.2 * target.frobenius_norm();
    assert!((report[0].1 - expected).abs() <= 1e-10);
    // Commutator itself equals σ's eigenvalue gap times the operator.
    let comm = sigma.commutator(&target);
    assert!((&comm - &target.scale_real(0.2)).frobenius_norm() < 1e-12);
}

#[test]
fn search_finds_maximally_mixed_state() {
    let tol = tol();
    let cert = find_tstate(&cnot_model(), &tol).unwrap();
    assert!((&cert.sigma - &Operator::identity(4).scale_real(0.25)).frobenius_norm() < 1e-10);
}

#[test]
fn structure_equations_agree_with_spectrum() {
    let tol = tol();
    let m = cnot_model();
    let d = decompose(&m, &tol).unwrap();
    let report = cross_validate(&m, &cnot_sigma(), true, &d, &tol).unwrap();
    assert!(report.worst_distance() <= 1e-8);
    let closure = algebra_closure_check(&m, &cnot_sigma(), &d, &tol).unwrap();
    assert!(closure.passed(&tol), "{closure:?}");
}

#[test]
fn petz_recovery_reverses_attractors() {
    let tol = tol();
    let m = cnot_model();
    let d = decompose(&m, &tol).unwrap();
    let sigma = cnot_sigma();
    let rec = petz_recovery(m.as_discrete().unwrap(), &sigma, &tol).unwrap();
    assert!(rec.is_trace_preserving());
    let (a, b) = reversal_defects(m.as_discrete().unwrap(), &rec, &d.all_schrodinger());
    assert!(a <= 1e-8 && b <= 1e-8, "{a} {b}");
    // Off the attractor space the map genuinely contracts.
    let y = probe(4, 3);
    let (a, _) = reversal_defects(m.as_discrete().unwrap(), &rec, &[y]);
    assert!(a > 1e-3);

    let probes: Vec<Operator> = (0..3).map(|i| probe(4, 10 + i)).collect();
    for k in [
        MonotoneFunction::Power(0.5),
        MonotoneFunction::Power(1.0),
        MonotoneFunction::Log1p,
    ] {
        let r = k_isometry_check(&m, &sigma, &k, &d, &probes, &tol).unwrap();
        assert!(r.passed(&tol), "{k:?}: {r:?}");
        assert!(r.probe_defect.unwrap() > 1e-6);
    }
}

#[test]
fn dual_bases_for_three_monotones() {
    let tol = tol();
    let m = cnot_model();
    let d = decompose(&m, &tol).unwrap();
    let probes: Vec<Operator> = (0..4).map(|i| probe(4, 100 + i)).collect();
    for k in [
        MonotoneFunction::Power(0.5),
        MonotoneFunction::Power(1.0),
        MonotoneFunction::Log1p,
    ] {
        let pair = ModularPair::symmetric(k.clone(), &cnot_sigma(), &tol).unwrap();
        let dual = dual_basis(&d, &pair, &tol).unwrap();
        assert_eq!(dual.len(), 6);
        assert!(dual.biorthogonality_defect().unwrap() <= 1e-8, "{k:?}");
        let r = k_orthogonality_report(&d, &pair, &m.generator_schrodinger(), &probes).unwrap();
        assert!(r.cross_block <= 1e-8 && r.range <= 1e-8, "{k:?}: {r:?}");
    }
}

#[test]
fn chain_converges_to_asymptotic_propagation() {
    let tol = tol();
    let m = cnot_model();
    let d = decompose(&m, &tol).unwrap();
    let pair = ModularPair::symmetric(MonotoneFunction::Power(0.5), &cnot_sigma(), &tol).unwrap();
    let prop = propagator(&d, &pair, &tol).unwrap();
    let spec = full_spectrum(&m.generator_schrodinger()).unwrap();
    let mut moduli: Vec<f64> = spec.iter().map(|(l, _)| l.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let second = moduli[6];
    for seed in 0..10 {
        let rho = random_state(4, 1000 + seed);
        let pts = convergence_report(&m, &prop, &rho, Horizon::Steps(50)).unwrap();
        assert!(pts[50].distance <= 1e-8);
        let rate = fit_decay(&pts, m.kind(), 1e-13).unwrap();
        assert!((rate - second).abs() <= 0.05, "{rate} vs {second}");
    }
}

#[test]
fn exponential_forms_differ_when_sigma_does_not_commute() {
    let tol = tol();
    let (f, s) = (phi(), psi());
    let z = &pp(&s, &f) + &pp(&f, &s);
    let basis = HermitianAttractorBasis::from_elements(vec![z], Scope::FixedPoints, &tol).unwrap();
    let rho1 = state_from_form2(&basis, &[1.0], &cnot_sigma(), None, &tol).unwrap();
    let rho2 = state_from_form1(&basis, &[1.0], &cnot_sigma(), None, &tol).unwrap();
    assert!((&rho1 - &rho2).frobenius_norm() > 1e-3);
    // With σ = I/4 the two forms coincide.
    let mixed = Operator::identity(4).scale_real(0.25);
    let a = state_from_form2(&basis, &[1.0], &mixed, None, &tol).unwrap();
    let b = state_from_form1(&basis, &[1.0], &mixed, None, &tol).unwrap();
    assert!((&a - &b).frobenius_norm() < 1e-12);
}

#[test]
fn rank_deficient_asymptotic_state_through_limit() {
    let tol = tol();
    let m = cnot_model();
    let d = decompose(&m, &tol).unwrap();
    let (f, s) = (phi(), psi());
    let rho = (&(&(&Operator::identity(4) - &pp(&f, &f)) - &pp(&s, &s))
        + &x_minus_one().scale(c(0.0, 1.0 / 3f64.sqrt())))
        .scale_real(0.5);
    // A rank-one projector inside the attractor span.
    let spec = rho.eigh().unwrap();
    assert!((spec.max() - 1.0).abs() < 1e-12 && spec.min().abs() < 1e-12);
    assert!((&(&rho * &rho) - &rho).frobenius_norm() < 1e-12);

    let mixed = Operator::identity(4).scale_real(0.25);
    let pair = ModularPair::symmetric(MonotoneFunction::Power(0.5), &mixed, &tol).unwrap();
    let prop = propagator(&d, &pair, &tol).unwrap();
    let basis = qmpa_core::gibbs::hermitian_basis(&d, Scope::Full, &tol).unwrap();
    let pts = limit_procedure(&rho, &mixed, &basis, &DEFAULT_S_GRID, Some(&prop), &tol).unwrap();
    for p in &pts {
        assert!(p.reconstruction_error < 1e-9, "{p:?}");
    }
    // Coefficients grow without bound as s -> 0.
    let size = |c: &[f64]| c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let first = size(&pts[0].coefficients);
    let last = size(&pts[pts.len() - 1].coefficients);
    assert!(last > first + 1.0);
}
