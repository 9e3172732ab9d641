//! Reference models and seeded random model families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmpa_core::model::{ContinuousModel, DiscreteModel};
use qmpa_core::{Model, Operator, Tolerances, C64};

fn permutation(images: &[usize]) -> Operator {
    Operator::from_fn(images.len(), |i, j| {
        if images[j] == i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Two CNOT gates (control on either qubit) applied with probability ½ each.
pub fn cnot_ruo() -> Model {
    let w = 0.5f64.sqrt();
    let kraus = vec![
        permutation(&[0, 1, 3, 2]).scale_real(w),
        permutation(&[0, 3, 2, 1]).scale_real(w),
    ];
    Model::from(DiscreteModel::new(kraus, Some(true), &Tolerances::default()).expect("valid channel"))
}

/// `(I + |φ><φ|)/5` with `φ = |00>`: a stationary faithful T-state of
/// [`cnot_ruo`].
pub fn cnot_sigma() -> Operator {
    Operator::real_diagonal(&[0.4, 0.2, 0.2, 0.2])
}

/// Four-level semigroup with jumps `h₊ = |0><1| + |2><3|` (rate 2) and
/// `h₋ = h₊†` (rate 1), `H = ε(|2><2| + |3><3|)`.
pub fn jump_lindblad(eps: f64) -> Model {
    let hp = &Operator::unit(4, 0, 1) + &Operator::unit(4, 2, 3);
    let h = Operator::real_diagonal(&[0.0, 0.0, eps, eps]);
    let ls = vec![hp.scale_real(2f64.sqrt()), hp.adjoint()];
    Model::from(ContinuousModel::new(h, ls, None, &Tolerances::default()).expect("valid generator"))
}

pub fn amplitude_damping(gamma: f64) -> Model {
    let a0 = Operator::real_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let a1 = Operator::unit(2, 0, 1).scale_real(gamma.sqrt());
    Model::from(DiscreteModel::new(vec![a0, a1], Some(true), &Tolerances::default()).expect("valid channel"))
}

pub fn depolarizing(p: f64) -> Model {
    let c = C64::new;
    let x = Operator::from_real_rows(2, &[0., 1., 1., 0.]).expect("2x2");
    let y = Operator::from_rows(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).expect("2x2");
    let z = Operator::real_diagonal(&[1., -1.]);
    let kraus = vec![
        Operator::identity(2).scale_real((1.0 - 3.0 * p / 4.0).sqrt()),
        x.scale_real((p / 4.0).sqrt()),
        y.scale_real((p / 4.0).sqrt()),
        z.scale_real((p / 4.0).sqrt()),
    ];
    Model::from(DiscreteModel::new(kraus, Some(true), &Tolerances::default()).expect("valid channel"))
}

/// Random model families used by the oracle-equivalence suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Generic channel `A_j = K_j S^{−1/2}`; unique fixed point.
    Channel,
    /// Unitary mixture preserving a block split; two-dimensional fixed space.
    BlockMixture,
    /// Unitaries exchanging two blocks; peripheral spectrum {1, −1}.
    BlockSwap,
    /// `U ⊗ A_j` with a diagonal phase unitary `U`: coherent peripheral phases.
    DecoherenceFree,
    /// Generic Lindblad generator.
    Lindblad,
    /// Lindblad generator acting separately on two blocks.
    BlockLindblad,
    /// `H = ω Z ⊗ I + I ⊗ h`, jumps `I ⊗ l_j`: eigenvalues `0, ±2iω`.
    DecoherenceFreeLindblad,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Channel,
        Family::BlockMixture,
        Family::BlockSwap,
        Family::DecoherenceFree,
        Family::Lindblad,
        Family::BlockLindblad,
        Family::DecoherenceFreeLindblad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Channel => "channel",
            Family::BlockMixture => "block_mixture",
            Family::BlockSwap => "block_swap",
            Family::DecoherenceFree => "decoherence_free",
            Family::Lindblad => "lindblad",
            Family::BlockLindblad => "block_lindblad",
            Family::DecoherenceFreeLindblad => "decoherence_free_lindblad",
        }
    }

    /// Dimensions the family is defined for, within 2..=4.
    pub fn dims(self) -> &'static [usize] {
        match self {
            Family::Channel | Family::Lindblad => &[2, 3, 4],
            Family::BlockMixture | Family::BlockLindblad => &[2, 3, 4],
            Family::BlockSwap => &[2, 4],
            Family::DecoherenceFree | Family::DecoherenceFreeLindblad => &[4],
        }
    }
}

pub struct RandomModels {
    rng: ChaCha8Rng,
}

impl RandomModels {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>() - 0.5
    }

    pub fn operator(&mut self, n: usize) -> Operator {
        let entries: Vec<C64> = (0..n * n).map(|_| C64::new(self.uniform(), self.uniform())).collect();
        Operator::from_rows(n, &entries).expect("square")
    }

    pub fn hermitian(&mut self, n: usize) -> Operator {
        self.operator(n).hermitian_part()
    }

    pub fn unitary(&mut self, n: usize) -> Operator {
        self.hermitian(n)
            .scale(C64::new(0.0, 4.0))
            .expm()
            .expect("finite exponential")
    }

    /// Random density matrix of full rank.
    pub fn state(&mut self, n: usize) -> Operator {
        let a = self.operator(n);
        let p = &(&a * &a.adjoint()) + &Operator::identity(n).scale_real(1e-3);
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    }

    pub fn phase(&mut self) -> f64 {
        0.3 + 2.5 * (self.uniform() + 0.5)
    }

    fn channel_kraus(&mut self, n: usize, count: usize) -> Vec<Operator> {
        let ks: Vec<Operator> = (0..count).map(|_| self.operator(n)).collect();
        let mut s = Operator::zeros(n);
        for k in &ks {
            s = &s + &(&k.adjoint() * k);
        }
        let inv_half = s
            .eigh()
            .expect("hermitian")
            .apply(|v| 1.0 / v.sqrt())
            .expect("positive");
        ks.iter().map(|k| k * &inv_half).collect()
    }

    pub fn model(&mut self, family: Family, n: usize) -> Model {
        let tol = Tolerances::default();
        let discrete =
            |kraus: Vec<Operator>| Model::from(DiscreteModel::new(kraus, Some(true), &tol).expect("channel"));
        match family {
            Family::Channel => discrete(self.channel_kraus(n, 2)),
            Family::BlockMixture => {
                let k = n / 2;
                let v = self.unitary(n);
                let w = (1.0f64 / 3.0).sqrt();
                let kraus = (0..3)
                    .map(|_| {
                        let u = block_diag(&self.unitary(k), &self.unitary(n - k));
                        (&(&v * &u) * &v.adjoint()).scale_real(w)
                    })
                    .collect();
                discrete(kraus)
            }
            Family::BlockSwap => {
                let half = n / 2;
                let v = self.unitary(n);
                let w = 0.5f64.sqrt();
                let kraus = (0..2)
                    .map(|_| {
                        let u = off_diag(&self.unitary(half), &self.unitary(half));
                        (&(&v * &u) * &v.adjoint()).scale_real(w)
                    })
                    .collect();
                discrete(kraus)
            }
            Family::DecoherenceFree => {
                let theta = self.phase();
                let u = Operator::diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, theta)]);
                let kraus = self.channel_kraus(2, 2).iter().map(|a| kron(&u, a)).collect();
                discrete(kraus)
            }
            Family::Lindblad => {
                let h = self.hermitian(n);
                let ls = vec![self.operator(n), self.operator(n)];
                Model::from(ContinuousModel::new(h, ls, None, &tol).expect("generator"))
            }
            Family::BlockLindblad => {
                let k = n / 2;
                let h = block_diag(&self.hermitian(k), &self.hermitian(n - k));
                let ls = (0..2)
                    .map(|_| block_diag(&self.operator(k), &self.operator(n - k)))
                    .collect();
                Model::from(ContinuousModel::new(h, ls, None, &tol).expect("generator"))
            }
            Family::DecoherenceFreeLindblad => {
                let omega = self.phase();
                let id = Operator::identity(2);
                let z = Operator::real_diagonal(&[omega, -omega]);
                let h = &kron(&z, &id) + &kron(&id, &self.hermitian(2));
                let ls = (0..2).map(|_| kron(&id, &self.operator(2))).collect();
                Model::from(ContinuousModel::new(h, ls, None, &tol).expect("generator"))
            }
        }
    }
}

/// `count` models cycling through families and their dimensions.
pub fn random_models(seed: u64, count: usize) -> Vec<(Family, usize, Model)> {
    let mut cases = Vec::new();
    for fam in Family::ALL {
        for &n in fam.dims() {
            cases.push((fam, n));
        }
    }
    (0..count)
        .map(|i| {
            let (fam, n) = cases[i % cases.len()];
            let mut gen = RandomModels::new(seed.wrapping_add(i as u64));
            (fam, n, gen.model(fam, n))
        })
        .collect()
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let m = b.dim();
    Operator::from_fn(a.dim() * m, |i, j| a.get(i / m, j / m) * b.get(i % m, j % m))
}

fn block_diag(a: &Operator, b: &Operator) -> Operator {
    let n = a.dim();
    Operator::from_fn(n + b.dim(), |i, j| match (i < n, j < n) {
        (true, true) => a.get(i, j),
        (false, false) => b.get(i - n, j - n),
        _ => C64::new(0.0, 0.0),
    })
}

fn off_diag(a: &Operator, b: &Operator) -> Operator {
    let n = a.dim();
    Operator::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a.get(i, j - n),
        (false, true) => b.get(i - n, j),
        _ => C64::new(0.0, 0.0),
    })
}
