#![allow(dead_code)]

use qmpa_core::model::{ContinuousModel, DiscreteModel};
use qmpa_core::{Model, Operator, Tolerances, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn ket(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

pub fn phi() -> Vec<C64> {
    ket(&[1.0, 0.0, 0.0, 0.0])
}

pub fn psi() -> Vec<C64> {
    let a = 1.0 / 3f64.sqrt();
    ket(&[0.0, a, a, a])
}

fn permutation(images: [usize; 4]) -> Operator {
    Operator::from_fn(4, |i, j| if images[j] == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// CNOT with control on the first qubit: |10> <-> |11>.
pub fn u12() -> Operator {
    permutation([0, 1, 3, 2])
}

/// CNOT with control on the second qubit: |01> <-> |11>.
pub fn u21() -> Operator {
    permutation([0, 3, 2, 1])
}

pub fn cnot_kraus() -> Vec<Operator> {
    let w = 0.5f64.sqrt();
    vec![u12().scale_real(w), u21().scale_real(w)]
}

pub fn cnot_model() -> Model {
    Model::from(DiscreteModel::new(cnot_kraus(), Some(true), &Tolerances::default()).unwrap())
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

pub fn pp(a: &[C64], b: &[C64]) -> Operator {
    Operator::ket_bra(a, b).unwrap()
}

/// {I, |φ><φ|, |ψ><ψ|, |φ><ψ|, |ψ><φ|}
pub fn cnot_fixed_span() -> Vec<Operator> {
    let (f, s) = (phi(), psi());
    vec![Operator::identity(4), pp(&f, &f), pp(&s, &s), pp(&f, &s), pp(&s, &f)]
}

pub fn cnot_sigma() -> Operator {
    let f = phi();
    (&Operator::identity(4) + &pp(&f, &f)).scale_real(0.2)
}

pub fn h_plus() -> Operator {
    &Operator::unit(4, 0, 1) + &Operator::unit(4, 2, 3)
}

pub fn jump_hamiltonian(eps: f64) -> Operator {
    Operator::real_diagonal(&[0.0, 0.0, eps, eps])
}

pub fn jump_model(eps: f64) -> ContinuousModel {
    let hp = h_plus();
    ContinuousModel::new(
        jump_hamiltonian(eps),
        vec![hp.scale_real(2f64.sqrt()), hp.adjoint()],
        None,
        &Tolerances::default(),
    )
    .unwrap()
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

pub fn amplitude_damping(gamma: f64) -> Model {
    let a0 = Operator::from_real_rows(2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]).unwrap();
    let a1 = Operator::from_real_rows(2, &[0.0, gamma.sqrt(), 0.0, 0.0]).unwrap();
    Model::from(DiscreteModel::new(vec![a0, a1], Some(true), &Tolerances::default()).unwrap())
}

/// Deterministic pseudo-random operator (xorshift), for tests that need a
/// handful of generic probes without pulling in an RNG.
pub fn probe(dim: usize, seed: u64) -> Operator {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    Operator::from_fn(dim, |_, _| c(next(), next()))
}

pub fn random_state(dim: usize, seed: u64) -> Operator {
    let a = probe(dim, seed);
    let p = &a * &a.adjoint();
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

pub fn random_hermitian(dim: usize, seed: u64) -> Operator {
    probe(dim, seed).hermitian_part()
}

pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    random_hermitian(dim, seed).scale(c(0.0, 3.0)).expm().unwrap()
}

/// Generic channel `A_j = K_j S^{-1/2}` with `S = Σ K_j†K_j`.
pub fn random_channel(dim: usize, count: usize, seed: u64) -> Model {
    let ks: Vec<Operator> = (0..count).map(|j| probe(dim, seed * 31 + j as u64)).collect();
    let mut s = Operator::zeros(dim);
    for k in &ks {
        s = &s + &(&k.adjoint() * k);
    }
    let inv_half = s.eigh().unwrap().apply(|v| 1.0 / v.sqrt()).unwrap();
    let kraus = ks.iter().map(|k| k * &inv_half).collect();
    Model::from(DiscreteModel::new(kraus, Some(true), &Tolerances::default()).unwrap())
}

fn block_diag(a: &Operator, b: &Operator) -> Operator {
    let (n, m) = (a.dim(), b.dim());
    Operator::from_fn(n + m, |i, j| match (i < n, j < n) {
        (true, true) => a.get(i, j),
        (false, false) => b.get(i - n, j - n),
        _ => c(0.0, 0.0),
    })
}

fn off_diag(a: &Operator, b: &Operator) -> Operator {
    // [[0, a], [b, 0]] for square blocks of equal size.
    let n = a.dim();
    Operator::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a.get(i, j - n),
        (false, true) => b.get(i - n, j),
        _ => c(0.0, 0.0),
    })
}

/// Mixture of unitaries that preserve a split `k ⊕ (dim − k)`, rotated by a
/// common unitary: the fixed space is two-dimensional.
pub fn random_block_mixture(dim: usize, seed: u64) -> Model {
    let k = dim / 2;
    let v = random_unitary(dim, seed ^ 0xABCD);
    let w = 1.0 / 3f64.sqrt();
    let kraus = (0..3)
        .map(|j| {
            let u = block_diag(
                &random_unitary(k, seed + 7 * j),
                &random_unitary(dim - k, seed + 7 * j + 3),
            );
            (&(&v * &u) * &v.adjoint()).scale_real(w)
        })
        .collect();
    Model::from(DiscreteModel::new(kraus, Some(true), &Tolerances::default()).unwrap())
}

/// Unitaries swapping two equal blocks: peripheral spectrum {1, −1}.
pub fn random_block_swap(half: usize, seed: u64) -> Model {
    let v = random_unitary(2 * half, seed ^ 0x5A5A);
    let w = 0.5f64.sqrt();
    let kraus = (0..2)
        .map(|j| {
            let u = off_diag(
                &random_unitary(half, seed + 11 * j),
                &random_unitary(half, seed + 11 * j + 5),
            );
            (&(&v * &u) * &v.adjoint()).scale_real(w)
        })
        .collect();
    Model::from(DiscreteModel::new(kraus, Some(true), &Tolerances::default()).unwrap())
}

pub fn random_lindblad(dim: usize, count: usize, seed: u64) -> Model {
    let ls = (0..count).map(|j| probe(dim, seed * 17 + j as u64)).collect();
    Model::from(ContinuousModel::new(random_hermitian(dim, seed ^ 0x77), ls, None, &Tolerances::default()).unwrap())
}

/// Lindblad model acting separately on two blocks; fixed space has dimension 2.
pub fn random_block_lindblad(dim: usize, seed: u64) -> Model {
    let k = dim / 2;
    let h = block_diag(&random_hermitian(k, seed), &random_hermitian(dim - k, seed + 1));
    let ls = (0..2)
        .map(|j| block_diag(&probe(k, seed + 10 + j), &probe(dim - k, seed + 20 + j)))
        .collect();
    Model::from(ContinuousModel::new(h, ls, None, &Tolerances::default()).unwrap())
}

pub fn random_positive(dim: usize, seed: u64) -> Operator {
    let p = &random_state(dim, seed) + &Operator::identity(dim).scale_real(0.1);
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}
