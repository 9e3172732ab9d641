//! The k-scalar product, the map from Schrödinger to Heisenberg attractors,
//! and dual bases built from it.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::operator::{hs_inner, k_of_delta_spectral, HermitianSpectrum, MonotoneFunction, Operator, Superoperator};
use crate::spectral::AttractorDecomposition;
use crate::{Tolerances, C64};

/// A monotone function together with two strictly positive operators, with
/// their spectral decompositions cached.
#[derive(Debug, Clone)]
pub struct ModularPair {
    k: MonotoneFunction,
    sigma1: Operator,
    sigma2: Operator,
    spec1: HermitianSpectrum,
    spec2: HermitianSpectrum,
    sigma2_inv: Operator,
}

impl ModularPair {
    pub fn new(k: MonotoneFunction, sigma1: &Operator, sigma2: &Operator, tol: &Tolerances) -> Result<Self> {
        sigma1.ensure_same_dim(sigma2)?;
        let spec1 = sigma1.ensure_strictly_positive(tol)?;
        let spec2 = sigma2.ensure_strictly_positive(tol)?;
        let sigma2_inv = spec2.apply(|x| 1.0 / x)?;
        Ok(Self {
            k,
            sigma1: sigma1.hermitian_part(),
            sigma2: sigma2.hermitian_part(),
            spec1,
            spec2,
            sigma2_inv,
        })
    }

    /// Same operator in both slots.
    pub fn symmetric(k: MonotoneFunction, sigma: &Operator, tol: &Tolerances) -> Result<Self> {
        Self::new(k, sigma, sigma, tol)
    }

    pub fn k(&self) -> &MonotoneFunction {
        &self.k
    }

    pub fn sigma1(&self) -> &Operator {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &Operator {
        &self.sigma2
    }

    fn check_dim(&self, x: &Operator) -> Result<()> {
        self.sigma1.ensure_same_dim(x)
    }

    /// `k(Δ_{σ1,σ2})(X)`.
    pub fn k_of_delta(&self, x: &Operator) -> Result<Operator> {
        self.check_dim(x)?;
        k_of_delta_spectral(&self.k, &self.spec1, &self.spec2, x)
    }

    /// `k(Δ_{σ1,σ2})(X) σ2⁻¹`.
    pub fn to_heisenberg(&self, x: &Operator) -> Result<Operator> {
        Ok(&self.k_of_delta(x)? * &self.sigma2_inv)
    }

    /// `(X, Y)_k = (X, k(Δ)(Y) σ2⁻¹)`.
    pub fn inner(&self, x: &Operator, y: &Operator) -> Result<C64> {
        hs_inner(x, &self.to_heisenberg(y)?)
    }

    /// `sqrt((X, X)_k)`.
    pub fn norm(&self, x: &Operator) -> Result<f64> {
        Ok(self.inner(x, x)?.re.max(0.0).sqrt())
    }
}

pub fn k_scalar_product(
    x: &Operator,
    y: &Operator,
    k: &MonotoneFunction,
    sigma1: &Operator,
    sigma2: &Operator,
    tol: &Tolerances,
) -> Result<C64> {
    ModularPair::new(k.clone(), sigma1, sigma2, tol)?.inner(x, y)
}

pub fn to_heisenberg(
    x: &Operator,
    k: &MonotoneFunction,
    sigma1: &Operator,
    sigma2: &Operator,
    tol: &Tolerances,
) -> Result<Operator> {
    ModularPair::new(k.clone(), sigma1, sigma2, tol)?.to_heisenberg(x)
}

/// `σ1^α X σ2^{−α−1}` for any real `α`.
pub fn power_bijection(
    x: &Operator,
    alpha: f64,
    sigma1: &Operator,
    sigma2: &Operator,
    tol: &Tolerances,
) -> Result<Operator> {
    x.ensure_same_dim(sigma1)?;
    x.ensure_same_dim(sigma2)?;
    let a = sigma1.ensure_strictly_positive(tol)?.apply(|v| v.powf(alpha))?;
    let b = sigma2.ensure_strictly_positive(tol)?.apply(|v| v.powf(-alpha - 1.0))?;
    Ok(&(&a * x) * &b)
}

/// `log(σ1) X − X log(σ2)`.
pub fn log_endomorphism(x: &Operator, sigma1: &Operator, sigma2: &Operator, tol: &Tolerances) -> Result<Operator> {
    x.ensure_same_dim(sigma1)?;
    x.ensure_same_dim(sigma2)?;
    let l1 = sigma1.ensure_strictly_positive(tol)?.apply(f64::ln)?;
    let l2 = sigma2.ensure_strictly_positive(tol)?.apply(f64::ln)?;
    Ok(&(&l1 * x) - &(x * &l2))
}

/// Primal attractors and their duals for one peripheral eigenvalue.
#[derive(Debug, Clone)]
pub struct DualBlock {
    pub eigenvalue: C64,
    /// k-orthogonal, HS-normalized basis of the Schrödinger eigenspace.
    pub primal: Vec<Operator>,
    /// `X^{λ,i}`, each in the Heisenberg eigenspace at `λ̄`.
    pub dual: Vec<Operator>,
}

/// Biorthogonal pair of bases for the attractor space in both pictures.
#[derive(Debug, Clone)]
pub struct DualBasis {
    pub pair: ModularPair,
    pub blocks: Vec<DualBlock>,
}

impl DualBasis {
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.primal.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(λ, X_{λ,i}, X^{λ,i})` in block order.
    pub fn triples(&self) -> impl Iterator<Item = (C64, &Operator, &Operator)> {
        self.blocks
            .iter()
            .flat_map(|b| b.primal.iter().zip(&b.dual).map(move |(p, d)| (b.eigenvalue, p, d)))
    }

    /// `M[a][b] = (X^a, X_b)`; the identity for a true dual basis.
    pub fn pairing_matrix(&self) -> Result<CMatrix> {
        let triples: Vec<_> = self.triples().collect();
        let n = triples.len();
        let mut m = CMatrix::zeros(n, n);
        for (a, (_, _, d)) in triples.iter().enumerate() {
            for (b, (_, p, _)) in triples.iter().enumerate() {
                m[(a, b)] = hs_inner(d, p)?;
            }
        }
        Ok(m)
    }

    /// `max |M − I|` entrywise.
    pub fn biorthogonality_defect(&self) -> Result<f64> {
        let m = self.pairing_matrix()?;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        Ok(worst)
    }
}

/// Re-orthogonalize each eigenspace under `(·,·)_k` (modified Gram–Schmidt,
/// two passes) and set `X^{λ,i} = to_heisenberg(X_{λ,i}) / (X_{λ,i}, X_{λ,i})_k`.
pub fn dual_basis(decomp: &AttractorDecomposition, pair: &ModularPair, tol: &Tolerances) -> Result<DualBasis> {
    let mut blocks = Vec::with_capacity(decomp.blocks.len());
    for block in &decomp.blocks {
        let primal = k_gram_schmidt(&block.schrodinger, pair, tol)?;
        let mut dual = Vec::with_capacity(primal.len());
        for x in &primal {
            let norm2 = pair.inner(x, x)?.re;
            dual.push(pair.to_heisenberg(x)?.scale_real(1.0 / norm2));
        }
        blocks.push(DualBlock {
            eigenvalue: block.eigenvalue,
            primal,
            dual,
        });
    }
    Ok(DualBasis {
        pair: pair.clone(),
        blocks,
    })
}

fn k_gram_schmidt(basis: &[Operator], pair: &ModularPair, tol: &Tolerances) -> Result<Vec<Operator>> {
    // `done` holds k-normalized vectors; the output is HS-normalized copies.
    let mut done: Vec<Operator> = Vec::with_capacity(basis.len());
    for x in basis {
        let start = pair.norm(x)?;
        let mut v = x.clone();
        for _ in 0..2 {
            for q in &done {
                let c = pair.inner(q, &v)?;
                v = &v - &q.scale(c);
            }
        }
        let remaining = pair.norm(&v)?;
        let pivot = if start > 0.0 { remaining / start } else { 0.0 };
        if pivot <= tol.gram_pivot {
            return Err(Error::SingularGram { pivot });
        }
        done.push(v.scale_real(1.0 / remaining));
    }
    Ok(done
        .into_iter()
        .map(|q| {
            let n = q.frobenius_norm();
            q.scale_real(1.0 / n)
        })
        .collect())
}

/// Largest normalized k-pairings between blocks and against range residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct KOrthogonalityReport {
    /// `max |(X,Y)_k| / (‖X‖_k ‖Y‖_k)` over attractors from different blocks.
    pub cross_block: f64,
    /// Same normalized magnitude for attractors `X` at `λ` against
    /// `Y = G(Z) − λZ` over the probes `Z`.
    pub range: f64,
    pub probes: usize,
}

impl KOrthogonalityReport {
    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.cross_block <= tol.residual && self.range <= tol.residual
    }
}

pub fn k_orthogonality_report(
    decomp: &AttractorDecomposition,
    pair: &ModularPair,
    generator: &Superoperator,
    probes: &[Operator],
) -> Result<KOrthogonalityReport> {
    let normalized = |x: &Operator, y: &Operator| -> Result<f64> {
        let nx = pair.norm(x)?;
        let ny = pair.norm(y)?;
        if nx == 0.0 || ny == 0.0 {
            return Ok(0.0);
        }
        Ok(pair.inner(x, y)?.norm() / (nx * ny))
    };
    let mut cross = 0.0f64;
    for (i, a) in decomp.blocks.iter().enumerate() {
        for b in decomp.blocks.iter().skip(i + 1) {
            for x in &a.schrodinger {
                for y in &b.schrodinger {
                    cross = cross.max(normalized(x, y)?);
                }
            }
        }
    }
    let mut range = 0.0f64;
    for block in &decomp.blocks {
        for z in probes {
            let y = &generator.apply(z)? - &z.scale(block.eigenvalue);
            if y.frobenius_norm() <= 1e-12 * z.frobenius_norm() {
                continue;
            }
            for x in &block.schrodinger {
                range = range.max(normalized(x, &y)?);
            }
        }
    }
    Ok(KOrthogonalityReport {
        cross_block: cross,
        range,
        probes: probes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(dim: usize, seed: u64) -> Operator {
        let mut s = seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(7);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        Operator::from_fn(dim, |_, _| C64::new(next(), next()))
    }

    fn positive(dim: usize, seed: u64) -> Operator {
        let a = pseudo(dim, seed);
        let p = &(&a * &a.adjoint()) + &Operator::identity(dim).scale_real(0.05);
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    }

    fn well_conditioned(dim: usize, seed: u64) -> Operator {
        let a = pseudo(dim, seed);
        let p = &(&a * &a.adjoint()).scale_real(0.2) + &Operator::identity(dim);
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    }

    #[test]
    fn half_power_product_closed_form() {
        let tol = Tolerances::default();
        let sigma = positive(3, 1);
        let (x, y) = (pseudo(3, 2), pseudo(3, 3));
        let k = MonotoneFunction::power(0.5).unwrap();
        let got = k_scalar_product(&x, &y, &k, &sigma, &sigma, &tol).unwrap();
        let spec = sigma.eigh().unwrap();
        let a = spec.apply(|v| v.powf(0.5)).unwrap();
        let b = spec.apply(|v| v.powf(-1.5)).unwrap();
        let expect = hs_inner(&x, &(&(&a * &y) * &b)).unwrap();
        assert!((got - expect).norm() < 1e-10 * expect.norm().max(1.0));
        // The symmetric product (X, σ^{-1/2} Y σ^{-1/2}) is the α = −1/2
        // member of the power bijection family.
        let r = spec.apply(|v| v.powf(-0.5)).unwrap();
        let sym = hs_inner(&x, &(&(&r * &y) * &r)).unwrap();
        let via = hs_inner(&x, &power_bijection(&y, -0.5, &sigma, &sigma, &tol).unwrap()).unwrap();
        assert!((sym - via).norm() < 1e-10 * sym.norm().max(1.0));
    }

    #[test]
    fn identity_states_scale_by_k_of_one() {
        let tol = Tolerances::default();
        let id = Operator::identity(3);
        let (x, y) = (pseudo(3, 4), pseudo(3, 5));
        let got = k_scalar_product(&x, &y, &MonotoneFunction::Log1p, &id, &id, &tol).unwrap();
        let expect = hs_inner(&x, &y).unwrap() * 2f64.ln();
        assert!((got - expect).norm() < 1e-13);
        let h = to_heisenberg(&x, &MonotoneFunction::Log1p, &id, &id, &tol).unwrap();
        assert!((&h - &x.scale_real(2f64.ln())).frobenius_norm() < 1e-13);
    }

    #[test]
    fn k_product_is_positive_definite() {
        let tol = Tolerances::default();
        let pair = ModularPair::new(MonotoneFunction::Log1p, &positive(4, 6), &positive(4, 7), &tol).unwrap();
        for seed in 10..20 {
            let x = pseudo(4, seed);
            let v = pair.inner(&x, &x).unwrap();
            assert!(v.re > 0.0 && v.im.abs() < 1e-10 * v.re);
        }
    }

    #[test]
    fn power_bijection_special_exponents() {
        let tol = Tolerances::default();
        let (s1, s2) = (positive(3, 8), positive(3, 9));
        let x = pseudo(3, 10);
        let zero = power_bijection(&x, 0.0, &s1, &s2, &tol).unwrap();
        assert!((&zero - &(&x * &s2.inverse().unwrap())).frobenius_norm() < 1e-9);
        let minus = power_bijection(&x, -1.0, &s1, &s2, &tol).unwrap();
        assert!((&minus - &(&s1.inverse().unwrap() * &x)).frobenius_norm() < 1e-9);
        // Inverse: X = σ1^{−α} Y σ2^{α+1}
        let (s1, s2) = (well_conditioned(3, 14), well_conditioned(3, 15));
        let alpha = 2.3;
        let y = power_bijection(&x, alpha, &s1, &s2, &tol).unwrap();
        let a = s1.eigh().unwrap().apply(|v| v.powf(-alpha)).unwrap();
        let b = s2.eigh().unwrap().apply(|v| v.powf(alpha + 1.0)).unwrap();
        let back = &(&a * &y) * &b;
        assert!((&back - &x).frobenius_norm() < 1e-10 * x.frobenius_norm());
    }

    #[test]
    fn log_endomorphism_on_matrix_units() {
        let tol = Tolerances::default();
        let p = [0.5, 0.3, 0.2];
        let sigma = Operator::real_diagonal(&p);
        let x = Operator::unit(3, 0, 2);
        let got = log_endomorphism(&x, &sigma, &sigma, &tol).unwrap();
        let expect = x.scale_real(p[0].ln() - p[2].ln());
        assert!((&got - &expect).frobenius_norm() < 1e-14);
        let id = Operator::identity(3);
        assert_eq!(log_endomorphism(&x, &id, &id, &tol).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn log1p_splits_into_inverse_and_log() {
        // log(1 + Δ) = log(1 + Δ⁻¹) + log Δ, evaluated termwise.
        let tol = Tolerances::default();
        let (s1, s2) = (positive(3, 11), positive(3, 12));
        let x = pseudo(3, 13);
        let lhs = ModularPair::new(MonotoneFunction::Log1p, &s1, &s2, &tol)
            .unwrap()
            .k_of_delta(&x)
            .unwrap();
        let inv = MonotoneFunction::custom("log1p-inverse", |y: f64| (1.0 / y).ln_1p(), true).unwrap();
        let a = crate::operator::k_of_delta_apply(&inv, &s1, &s2, &x, &tol);
        // log(1 + 1/y) is positive for every y > 0, so this path is admissible.
        let a = a.unwrap();
        let logdelta = log_endomorphism(&x, &s1, &s2, &tol).unwrap();
        let rhs = &a + &logdelta;
        assert!((&lhs - &rhs).frobenius_norm() < 1e-10 * lhs.frobenius_norm().max(1.0));
    }
}
