//! Operators of the two bundled models, written out by hand.

#![allow(dead_code)]

use qmpa::format::{parse_model, LoadedModel};
use qmpa_core::{Operator, Tolerances, C64};

pub const CNOT_JSON: &str = include_str!("../../models/cnot_ruo.json");
pub const JUMP_JSON: &str = include_str!("../../models/jump_lindblad.json");
pub const DAMPING_JSON: &str = include_str!("../data/amplitude_damping.json");

pub fn load(text: &str) -> LoadedModel {
    parse_model(text, Tolerances::default()).expect("bundled model parses")
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn ket(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

pub fn ket_bra(a: &[C64], b: &[C64]) -> Operator {
    Operator::from_fn(a.len(), |i, j| a[i] * b[j].conj())
}

pub fn phi() -> Vec<C64> {
    ket(&[1.0, 0.0, 0.0, 0.0])
}

pub fn psi() -> Vec<C64> {
    let a = 1.0 / 3f64.sqrt();
    ket(&[0.0, a, a, a])
}

/// `{I, |φ><φ|, |ψ><ψ|, |φ><ψ|, |ψ><φ|}`.
pub fn cnot_fixed_span() -> Vec<Operator> {
    let (f, s) = (phi(), psi());
    vec![
        Operator::identity(4),
        ket_bra(&f, &f),
        ket_bra(&s, &s),
        ket_bra(&f, &s),
        ket_bra(&s, &f),
    ]
}

pub fn x_minus_one() -> Operator {
    Operator::from_real_rows(
        4,
        &[
            0., 0., 0., 0., //
            0., 0., -1., 1., //
            0., 1., 0., -1., //
            0., -1., 1., 0.,
        ],
    )
    .unwrap()
}

pub fn cnot_sigma() -> Operator {
    let f = phi();
    (&Operator::identity(4) + &ket_bra(&f, &f)).scale_real(0.2)
}

pub fn jump_hamiltonian() -> Operator {
    Operator::real_diagonal(&[0.0, 0.0, 1.0, 1.0])
}

pub fn x1() -> Operator {
    Operator::real_diagonal(&[2.0, 1.0, 0.0, 0.0])
}

pub fn x2() -> Operator {
    Operator::real_diagonal(&[0.0, 0.0, 2.0, 1.0])
}

pub fn x_plus() -> Operator {
    &Operator::unit(4, 0, 2).scale_real(2.0) + &Operator::unit(4, 1, 3)
}

pub fn x_minus() -> Operator {
    x_plus().adjoint()
}

pub fn a_minus() -> Operator {
    &Operator::unit(4, 0, 2) + &Operator::unit(4, 1, 3)
}

pub fn a_plus() -> Operator {
    a_minus().adjoint()
}

pub fn jump_sigma() -> Operator {
    (&x1() + &x2()).scale_real(1.0 / 6.0)
}
