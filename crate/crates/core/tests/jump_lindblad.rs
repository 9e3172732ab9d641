//! Four-level semigroup with jump operators h₊, h₋ and H = ε(|2><2| + |3><3|).

mod common;

use common::*;
use qmpa_core::asymptotics::{asymptotic_master_check, k_isometry_check, propagator, Evolution};
use qmpa_core::duality::{dual_basis, k_orthogonality_report};
use qmpa_core::gibbs::{coeffs_form1, coeffs_form2, hermitian_basis, state_from_form2};
use qmpa_core::spectral::{decompose, span_distance};
use qmpa_core::structure::{algebra_closure_check, cross_validate};
use qmpa_core::tstate::{find_tstate, verify_tstate};
use qmpa_core::{Error, HermitianAttractorBasis, Model, ModularPair, MonotoneFunction, Operator, Scope, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn model() -> Model {
    Model::from(jump_model(1.0))
}

#[test]
fn generator_actions_on_known_operators() {
    let m = model();
    let s = m.generator_schrodinger();
    let h = m.generator_heisenberg();
    for x in [x1(), x2()] {
        assert!(s.apply(&x).unwrap().frobenius_norm() < 1e-13);
    }
    assert!(h.apply(&jump_hamiltonian(1.0)).unwrap().frobenius_norm() < 1e-13);
    assert!(h.apply(&Operator::identity(4)).unwrap().frobenius_norm() < 1e-13);
    let am = a_minus();
    let expect = am.scale(c(0.0, -1.0));
    assert!((&h.apply(&am).unwrap() - &expect).frobenius_norm() < 1e-13);
    let xp = x_plus();
    assert!((&s.apply(&xp).unwrap() - &xp.scale(c(0.0, 1.0))).frobenius_norm() < 1e-13);
    // Heisenberg matrix is the conjugate transpose of the Schrödinger one.
    assert_eq!(h.matrix(), &s.matrix().adjoint());
}

#[test]
fn peripheral_spectrum_and_spans() {
    let tol = tol();
    let d = decompose(&model(), &tol).unwrap();
    assert_eq!(d.multiplicities(), vec![2, 1, 1]);
    let ev = d.eigenvalues();
    assert!(ev[0].norm() < 1e-12);
    assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-9);
    assert!((ev[2] - c(0.0, -1.0)).norm() < 1e-9);
    assert!(span_distance(&d.blocks[0].schrodinger, &[x1(), x2()]).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[1].schrodinger, &[x_plus()]).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[2].schrodinger, &[x_minus()]).unwrap() <= 1e-8);
    let fixed_heis = [Operator::identity(4), jump_hamiltonian(1.0)];
    assert!(span_distance(&d.blocks[0].heisenberg, &fixed_heis).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[1].heisenberg, &[a_minus()]).unwrap() <= 1e-8);
    assert!(span_distance(&d.blocks[2].heisenberg, &[a_plus()]).unwrap() <= 1e-8);
}

#[test]
fn spectrum_scales_with_epsilon() {
    let tol = tol();
    let d = decompose(&Model::from(jump_model(2.5)), &tol).unwrap();
    assert_eq!(d.multiplicities(), vec![2, 1, 1]);
    assert!((d.eigenvalues()[1] - c(0.0, 2.5)).norm() < 1e-8);
}

#[test]
fn tstate_found_and_known_one_verifies() {
    let tol = tol();
    let m = model();
    let cert = verify_tstate(&m, &jump_sigma(), &tol).unwrap();
    assert!(cert.stationary);
    assert!(cert.heuristic);
    assert!(cert.sampled_defect.unwrap() >= -1e-10);
    let found = find_tstate(&m, &tol).unwrap();
    assert!(found.min_eig > 0.0);
    assert!(m.generator_schrodinger().apply(&found.sigma).unwrap().frobenius_norm() < 1e-10);
}

#[test]
fn structure_and_closure() {
    let tol = tol();
    let m = model();
    let d = decompose(&m, &tol).unwrap();
    let r = cross_validate(&m, &jump_sigma(), true, &d, &tol).unwrap();
    assert!(r.worst_distance() <= 1e-8, "{r:?}");
    let cl = algebra_closure_check(&m, &jump_sigma(), &d, &tol).unwrap();
    assert!(cl.passed(&tol), "{cl:?}");
}

#[test]
fn duality_and_isometry() {
    let tol = tol();
    let m = model();
    let d = decompose(&m, &tol).unwrap();
    let probes: Vec<Operator> = (0..4).map(|i| probe(4, 50 + i)).collect();
    for k in [
        MonotoneFunction::Power(0.5),
        MonotoneFunction::Power(1.0),
        MonotoneFunction::Log1p,
    ] {
        let pair = ModularPair::symmetric(k.clone(), &jump_sigma(), &tol).unwrap();
        let dual = dual_basis(&d, &pair, &tol).unwrap();
        assert!(dual.biorthogonality_defect().unwrap() <= 1e-8);
        let r = k_orthogonality_report(&d, &pair, &m.generator_schrodinger(), &probes).unwrap();
        assert!(r.passed(&tol), "{r:?}");
        let iso = k_isometry_check(&m, &jump_sigma(), &k, &d, &[], &tol).unwrap();
        assert!(iso.passed(&tol), "{iso:?}");
    }
}

#[test]
fn stationary_family_is_left_alone() {
    let tol = tol();
    let m = model();
    let d = decompose(&m, &tol).unwrap();
    let pair = ModularPair::symmetric(MonotoneFunction::Power(0.5), &jump_sigma(), &tol).unwrap();
    let prop = propagator(&d, &pair, &tol).unwrap();
    let rho = (&x1().scale_real(0.5) + &x2().scale_real(0.5)).scale_real(1.0 / 3.0);
    for t in [0.0, 0.7, 13.0] {
        let out = prop.state(&rho, Evolution::Time(t)).unwrap();
        assert!((&out - &rho).frobenius_norm() < 1e-12);
    }
    // The coherent part rotates with e^{it}.
    let rho = (&(&x1() + &x2()) + &(&x_plus() + &x_minus()).scale_real(0.5)).scale_real(1.0 / 6.0);
    let t = 0.9;
    let out = prop.state(&rho, Evolution::Time(t)).unwrap();
    let exact = m.generator_schrodinger().exp_scaled(t).unwrap().apply(&rho).unwrap();
    assert!((&out - &exact).frobenius_norm() < 1e-10);
}

#[test]
fn stationary_gibbs_coefficient() {
    let tol = tol();
    let basis = HermitianAttractorBasis::from_elements(
        vec![Operator::identity(4), jump_hamiltonian(1.0)],
        Scope::FixedPoints,
        &tol,
    )
    .unwrap();
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let rho = (&x1().scale_real(1.0 - s) + &x2().scale_real(s)).scale_real(1.0 / 3.0);
        let form = coeffs_form2(&rho, &basis, &jump_sigma(), &tol).unwrap();
        let beta = (s / (1.0 - s)).ln();
        assert!((form.coefficients[1] - beta).abs() <= 1e-8, "s={s}");
        let back = form.state(&tol).unwrap();
        assert!((&back - &rho).frobenius_norm() < 1e-10);
    }
}

#[test]
fn closed_form_stationary_family() {
    // exp(ln σ + bH) / N = (X₁ + e^{b}X₂) / (3 + 3e^{b}).
    let tol = tol();
    let basis = HermitianAttractorBasis::from_elements(vec![jump_hamiltonian(1.0)], Scope::FixedPoints, &tol).unwrap();
    for b in [-2.0, -0.3, 0.0, 1.1] {
        let rho = state_from_form2(&basis, &[b], &jump_sigma(), None, &tol).unwrap();
        let e: f64 = f64::exp(b);
        let expect = (&x1() + &x2().scale_real(e)).scale_real(1.0 / (3.0 + 3.0 * e));
        assert!((&rho - &expect).frobenius_norm() < 1e-12);
    }
}

#[test]
fn coherent_family_gibbs_coefficient() {
    let tol = tol();
    let a_r = (&a_plus() + &a_minus()).scale_real(0.5);
    let a_i = (&a_plus() - &a_minus()).scale(c(0.0, -0.5));
    let basis = HermitianAttractorBasis::from_elements(
        vec![Operator::identity(4), jump_hamiltonian(1.0), a_r, a_i],
        Scope::Full,
        &tol,
    )
    .unwrap();
    for s in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let rho = (&(&x1() + &x2()) + &(&x_plus() + &x_minus()).scale_real(s)).scale_real(1.0 / 6.0);
        let form = coeffs_form2(&rho, &basis, &jump_sigma(), &tol).unwrap();
        let gamma = ((1.0 + s) / (1.0 - s)).ln();
        assert!((form.coefficients[2] - gamma).abs() <= 1e-8, "s={s}");
        assert!(form.coefficients[1].abs() <= 1e-8);
        assert!(form.coefficients[3].abs() <= 1e-8);
        // σ commutes with every attractor, so form 1 gives the same data.
        let f1 = coeffs_form1(&rho, &basis, &jump_sigma(), &tol).unwrap();
        assert!((f1.coefficients[2] - gamma).abs() <= 1e-8);
    }
}

#[test]
fn boundary_state_is_not_representable() {
    let tol = tol();
    let d = decompose(&model(), &tol).unwrap();
    let basis = hermitian_basis(&d, Scope::Full, &tol).unwrap();
    let rho = x1().scale_real(1.0 / 3.0);
    assert!(matches!(
        coeffs_form2(&rho, &basis, &jump_sigma(), &tol),
        Err(Error::NotStrictlyPositive { .. })
    ));
}

#[test]
fn asymptotic_master_equation() {
    let tol = tol();
    let m = jump_model(1.0);
    let d = decompose(&Model::from(m.clone()), &tol).unwrap();
    let r = asymptotic_master_check(&m, &jump_sigma(), &d, &tol).unwrap();
    assert_eq!(r.residuals.len(), 4);
    for e in &r.residuals {
        assert!(e.residual <= 1e-8, "{e:?}");
    }

    let flat = m.without_hamiltonian();
    let d = decompose(&Model::from(flat.clone()), &tol).unwrap();
    assert_eq!(d.multiplicities(), vec![4]);
    assert!(d.eigenvalues()[0].norm() < 1e-12);
    let r = asymptotic_master_check(&flat, &jump_sigma(), &d, &tol).unwrap();
    for e in &r.residuals {
        assert!(e.residual <= 1e-10);
    }
}

#[test]
fn forms_differ_without_hamiltonian() {
    // σ = (2X₁ + 2X₂ + X₊ + X₋)/12 no longer commutes with A_R + A_I.
    let tol = tol();
    let sigma = (&(&x1() + &x2()).scale_real(2.0) + &(&x_plus() + &x_minus())).scale_real(1.0 / 12.0);
    let flat = Model::from(jump_model(1.0).without_hamiltonian());
    verify_tstate(&flat, &sigma, &tol).unwrap();
    let a_r = (&a_plus() + &a_minus()).scale_real(0.5);
    let a_i = (&a_plus() - &a_minus()).scale(c(0.0, -0.5));
    let basis = HermitianAttractorBasis::from_elements(vec![&a_r + &a_i], Scope::FixedPoints, &tol).unwrap();
    let g = -(3f64.ln());
    let rho1 = state_from_form2(&basis, &[-g], &sigma, None, &tol).unwrap();
    let rho2 = qmpa_core::gibbs::state_from_form1(&basis, &[-g], &sigma, None, &tol).unwrap();
    assert!((&rho1 - &rho2).frobenius_norm() > 1e-3);
}
