//! Orchestration of the analyses and the invariant suite behind `analyze`
//! and `verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qmpa_core::asymptotics::{
    asymptotic_master_check, convergence_report, fit_decay, k_isometry_check, petz_recovery, propagator,
    reversal_defects, Evolution, Horizon,
};
use qmpa_core::duality::{dual_basis, k_orthogonality_report, to_heisenberg};
use qmpa_core::gibbs::{coeffs_form1, coeffs_form2, hermitian_basis, state_from_form1};
use qmpa_core::model::{TraceClass, Unitality};
use qmpa_core::operator::{choi_matrix, hs_inner};
use qmpa_core::spectral::{
    decompose, eigen_residual, span_distance, span_residual, subperipheral_bound, AttractorDecomposition,
};
use qmpa_core::structure::{algebra_closure_check, cross_validate_report};
use qmpa_core::tstate::{find_tstate, verify_tstate, TStateSource};
use qmpa_core::{
    AsymptoticPropagator, Error as CoreError, Model, ModularPair, MonotoneFunction, Operator, ProcessKind, Scope,
    TStateCertificate, Tolerances,
};

use crate::error::{core_code, Result};
use crate::fixtures::RandomModels;
use crate::format::{clean, matrix_to_json, JsonMatrix};

/// Shared settings of every subcommand.
#[derive(Debug, Clone)]
pub struct Options {
    pub k: MonotoneFunction,
    pub seed: u64,
    pub tol: Tolerances,
}

pub const DEFAULT_SEED: u64 = 20240917;

pub fn parse_monotone(s: &str) -> std::result::Result<MonotoneFunction, String> {
    if s == "log1p" {
        return Ok(MonotoneFunction::Log1p);
    }
    let alpha = s
        .strip_prefix("power:")
        .ok_or_else(|| format!("unknown monotone function {s:?}; use power:<alpha> or log1p"))?;
    let alpha: f64 = alpha.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
    MonotoneFunction::power(alpha).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            note: None,
        }
    }

    /// Passes when `value ≥ −tolerance`.
    pub fn at_least_zero(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= -tolerance,
            value,
            tolerance,
            note: None,
        }
    }

    pub fn failed_with(name: impl Into<String>, err: &CoreError) -> Self {
        Self {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            tolerance: 0.0,
            note: Some(format!("{}: {err}", core_code(err))),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Collects checks; a core error inside a check becomes a failed check.
#[derive(Debug, Default)]
pub struct Suite {
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn run(&mut self, name: &str, f: impl FnOnce() -> qmpa_core::Result<Vec<Check>>) {
        match f() {
            Ok(cs) => self.checks.extend(cs),
            Err(e) => self.checks.push(Check::failed_with(name, &e)),
        }
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub kind: &'static str,
    pub dim: usize,
    pub description: String,
    pub trace_preserving: bool,
    pub unitality: &'static str,
}

pub fn summarize(model: &Model, tol: &Tolerances) -> Result<ModelSummary> {
    let cls = model.classify(tol)?;
    Ok(ModelSummary {
        kind: kind_name(model.kind()),
        dim: model.dim(),
        description: model.describe(),
        trace_preserving: cls.trace == TraceClass::TracePreserving,
        unitality: match cls.unitality {
            Unitality::Unital => "unital",
            Unitality::SubUnital => "sub_unital",
            Unitality::Neither => "neither",
        },
    })
}

pub fn kind_name(kind: ProcessKind) -> &'static str {
    match kind {
        ProcessKind::Discrete => "discrete",
        ProcessKind::Continuous => "continuous",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TStateSummary {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<JsonMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_defect: Option<f64>,
    pub heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSummary>,
    /// Rank of the maximal invariant state when no faithful one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    pub code: &'static str,
    pub message: String,
}

impl ErrorSummary {
    pub fn from_core(e: &CoreError) -> Self {
        Self {
            code: core_code(e),
            message: e.to_string(),
        }
    }
}

/// Outcome of the T-state stage; failure does not stop spectral analysis.
pub struct TStateStage {
    pub cert: Option<TStateCertificate>,
    pub error: Option<CoreError>,
}

impl TStateStage {
    pub fn run(model: &Model, supplied: Option<&Operator>, tol: &Tolerances) -> Self {
        let r = match supplied {
            Some(s) => verify_tstate(model, s, tol),
            None => find_tstate(model, tol),
        };
        match r {
            Ok(c) => Self {
                cert: Some(c),
                error: None,
            },
            Err(e) => Self {
                cert: None,
                error: Some(e),
            },
        }
    }

    fn push_failure(&self, suite: &mut Suite) {
        if let Some(e) = &self.error {
            suite.push(Check::failed_with("tstate", e));
        }
    }

    pub fn summary(&self) -> TStateSummary {
        match (&self.cert, &self.error) {
            (Some(c), _) => TStateSummary {
                status: match c.source {
                    TStateSource::Found => "found",
                    TStateSource::UserSupplied => "verified",
                },
                sigma: Some(matrix_to_json(&c.sigma)),
                min_eig: Some(c.min_eig),
                defect: Some(c.defect),
                stationary: Some(c.stationary),
                sampled_defect: c.sampled_defect,
                heuristic: c.heuristic,
                error: None,
                fixed_point_rank: None,
                kernel: None,
                witness: None,
            },
            (None, Some(e)) => {
                let (rank, kernel, witness) = match e {
                    CoreError::NoFaithfulTState { rank, kernel, .. } => (
                        Some(*rank),
                        Some(kernel.iter().map(|v| v.iter().map(|&z| clean(z)).collect()).collect()),
                        None,
                    ),
                    CoreError::DefectNegative { witness, .. } => {
                        (None, None, Some(witness.iter().map(|&z| clean(z)).collect()))
                    }
                    _ => (None, None, None),
                };
                TStateSummary {
                    status: "failed",
                    sigma: None,
                    min_eig: None,
                    defect: None,
                    stationary: None,
                    sampled_defect: None,
                    heuristic: false,
                    error: Some(ErrorSummary::from_core(e)),
                    fixed_point_rank: rank,
                    kernel,
                    witness,
                }
            }
            (None, None) => unreachable!("stage always records an outcome"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub eigenvalue: [f64; 2],
    pub multiplicity: usize,
    pub schrodinger_dim: usize,
    pub heisenberg_dim: usize,
}

pub fn spectrum_summary(d: &AttractorDecomposition) -> Vec<BlockSummary> {
    d.blocks
        .iter()
        .map(|b| BlockSummary {
            eigenvalue: clean(b.eigenvalue),
            multiplicity: b.multiplicity,
            schrodinger_dim: b.schrodinger.len(),
            heisenberg_dim: b.heisenberg.len(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisPayload {
    pub eigenvalue: [f64; 2],
    pub schrodinger: Vec<JsonMatrix>,
    pub heisenberg: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub command: &'static str,
    pub model: ModelSummary,
    pub seed: u64,
    pub monotone: String,
    pub tolerances: ToleranceReport,
    pub tstate: TStateSummary,
    pub spectrum: Vec<BlockSummary>,
    pub attractor_dimension: usize,
    /// True when a faithful T-state was unavailable and only the
    /// spectral analyses ran.
    pub partial: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<BasisPayload>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceReport {
    pub hermitian: f64,
    pub positivity: f64,
    pub model: f64,
    pub peripheral: f64,
    pub cluster: f64,
    pub kernel: f64,
    pub eigen: f64,
    pub gram_pivot: f64,
    pub residual: f64,
    pub defect: f64,
}

impl From<&Tolerances> for ToleranceReport {
    fn from(t: &Tolerances) -> Self {
        Self {
            hermitian: t.hermitian,
            positivity: t.positivity,
            model: t.model,
            peripheral: t.peripheral,
            cluster: t.cluster,
            kernel: t.kernel,
            eigen: t.eigen,
            gram_pivot: t.gram_pivot,
            residual: t.residual,
            defect: t.defect,
        }
    }
}

fn probes(dim: usize, seed: u64, count: usize) -> Vec<Operator> {
    let mut g = RandomModels::new(seed);
    (0..count).map(|_| g.operator(dim)).collect()
}

fn bases(d: &AttractorDecomposition) -> Vec<BasisPayload> {
    d.blocks
        .iter()
        .map(|b| BasisPayload {
            eigenvalue: clean(b.eigenvalue),
            schrodinger: b.schrodinger.iter().map(matrix_to_json).collect(),
            heisenberg: b.heisenberg.iter().map(matrix_to_json).collect(),
        })
        .collect()
}

/// classify → tstate → decompose → dual basis → k-orthogonality →
/// structure cross-validation → algebra closure.
pub fn analyze(model: &Model, supplied: Option<&Operator>, opts: &Options, with_bases: bool) -> Result<AnalysisReport> {
    let tol = &opts.tol;
    let summary = summarize(model, tol)?;
    let stage = TStateStage::run(model, supplied, tol);
    let decomp = decompose(model, tol)?;
    let mut suite = Suite::default();
    stage.push_failure(&mut suite);
    spectral_checks(&mut suite, model, &decomp, tol);
    if let Some(cert) = &stage.cert {
        let sigma = &cert.sigma;
        let ps = probes(model.dim(), opts.seed, 3);
        suite.run("duality", || {
            let pair = ModularPair::symmetric(opts.k.clone(), sigma, tol)?;
            let dual = dual_basis(&decomp, &pair, tol)?;
            let r = k_orthogonality_report(&decomp, &pair, &model.generator_schrodinger(), &ps)?;
            Ok(vec![
                Check::at_most("duality.biorthogonality", dual.biorthogonality_defect()?, tol.residual),
                Check::at_most("duality.cross_block", r.cross_block, tol.residual),
                Check::at_most("duality.range", r.range, tol.residual),
            ])
        });
        structure_checks(&mut suite, model, cert, &decomp, tol);
    }
    let passed = suite.failed() == 0;
    Ok(AnalysisReport {
        command: "analyze",
        model: summary,
        seed: opts.seed,
        monotone: opts.k.name(),
        tolerances: tol.into(),
        tstate: stage.summary(),
        spectrum: spectrum_summary(&decomp),
        attractor_dimension: decomp.dimension(),
        partial: stage.cert.is_none(),
        checks: suite.checks,
        passed,
        bases: with_bases.then(|| bases(&decomp)),
    })
}

fn structure_checks(
    suite: &mut Suite,
    model: &Model,
    cert: &TStateCertificate,
    decomp: &AttractorDecomposition,
    tol: &Tolerances,
) {
    suite.run("structure.cross_validation", || {
        let r = cross_validate_report(model, &cert.sigma, cert.stationary, decomp, tol)?;
        let mut out = vec![Check::at_most(
            "structure.cross_validation",
            r.worst_distance(),
            tol.residual,
        )];
        let heis = r.entries.iter().map(|e| e.heisenberg_distance).fold(0.0f64, f64::max);
        out.push(Check::at_most("structure.heisenberg", heis, tol.residual));
        Ok(out)
    });
    suite.run("structure.closure", || {
        let r = algebra_closure_check(model, &cert.sigma, decomp, tol)?;
        Ok(vec![
            Check::at_most("structure.product_rule", r.product_residual, tol.residual),
            Check::at_most("structure.off_spectrum_products", r.off_spectrum_norm, tol.residual),
            Check::at_most(
                "structure.heisenberg_product_closure",
                r.heisenberg_product,
                tol.residual,
            ),
            Check::at_most(
                "structure.heisenberg_adjoint_closure",
                r.heisenberg_adjoint,
                tol.residual,
            ),
        ])
    });
}

fn spectral_checks(suite: &mut Suite, model: &Model, decomp: &AttractorDecomposition, tol: &Tolerances) {
    suite.run("spectral.eigen_residual", || {
        let g = model.generator_schrodinger();
        let gh = model.generator_heisenberg();
        let scale = g.frobenius_norm().max(1.0);
        let mut worst = 0.0f64;
        for b in &decomp.blocks {
            for x in &b.schrodinger {
                worst = worst.max(eigen_residual(&g, x, b.eigenvalue)?);
            }
            for y in &b.heisenberg {
                worst = worst.max(eigen_residual(&gh, y, b.eigenvalue.conj())?);
            }
        }
        Ok(vec![Check::at_most(
            "spectral.eigen_residual",
            worst / scale,
            tol.eigen,
        )])
    });
    suite.run("spectral.conjugation_closure", || {
        Ok(vec![Check::at_most(
            "spectral.conjugation_closure",
            decomp.adjoint_closure_defect(tol)?,
            tol.residual,
        )])
    });
    let mismatch = decomp
        .blocks
        .iter()
        .filter(|b| b.schrodinger.len() != b.heisenberg.len())
        .count();
    suite.push(Check::at_most("spectral.picture_multiplicities", mismatch as f64, 0.0));
}

/// Full invariant suite for `verify`.
pub fn verify(model: &Model, supplied: Option<&Operator>, opts: &Options) -> Result<AnalysisReport> {
    let tol = &opts.tol;
    let summary = summarize(model, tol)?;
    let stage = TStateStage::run(model, supplied, tol);
    let decomp = decompose(model, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seed_for = |rng: &mut ChaCha8Rng| rand::Rng::random::<u64>(rng);
    let mut suite = Suite::default();
    stage.push_failure(&mut suite);
    model_checks(&mut suite, model, seed_for(&mut rng), tol);
    spectral_checks(&mut suite, model, &decomp, tol);
    suite.run("spectral.decay", || {
        decay_check(model, &decomp, seed_for(&mut rng), tol)
    });
    if let Some(cert) = &stage.cert {
        let probe_seed = seed_for(&mut rng);
        tstate_and_duality_checks(&mut suite, model, cert, &decomp, probe_seed, tol);
        structure_checks(&mut suite, model, cert, &decomp, tol);
        let state_seed = seed_for(&mut rng);
        asymptotic_checks(&mut suite, model, cert, &decomp, state_seed, tol);
        suite.run("gibbs.round_trip", || {
            gibbs_checks(model, cert, &decomp, state_seed, tol)
        });
    }
    let passed = suite.failed() == 0;
    Ok(AnalysisReport {
        command: "verify",
        model: summary,
        seed: opts.seed,
        monotone: opts.k.name(),
        tolerances: tol.into(),
        tstate: stage.summary(),
        spectrum: spectrum_summary(&decomp),
        attractor_dimension: decomp.dimension(),
        partial: stage.cert.is_none(),
        checks: suite.checks,
        passed,
        bases: None,
    })
}

fn model_checks(suite: &mut Suite, model: &Model, seed: u64, tol: &Tolerances) {
    let s = model.generator_schrodinger();
    let h = model.generator_heisenberg();
    let adj = (h.matrix() - s.matrix().adjoint()).norm();
    suite.push(Check::at_most("model.heisenberg_adjoint", adj, 0.0));
    let mut g = RandomModels::new(seed);
    suite.run("model.hermiticity", || {
        let x = g.hermitian(model.dim());
        Ok(vec![Check::at_most(
            "model.hermiticity",
            s.apply(&x)?.hermitian_defect(),
            1e-10,
        )])
    });
    if model.is_trace_preserving(tol) {
        suite.run("model.trace", || {
            let x = g.operator(model.dim());
            let y = s.apply(&x)?;
            let d = match model.kind() {
                ProcessKind::Discrete => (y.trace() - x.trace()).norm(),
                ProcessKind::Continuous => y.trace().norm(),
            };
            Ok(vec![Check::at_most("model.trace", d, 1e-10)])
        });
    }
    if let Some(d) = model.as_discrete() {
        suite.run("model.choi_psd", || {
            let min = choi_matrix(d.kraus())?.hermitian_part().min_eigenvalue()?;
            Ok(vec![Check::at_least_zero("model.choi_psd", min, 1e-10)])
        });
    }
}

/// A random operator HS-orthogonal to the Heisenberg attractors must decay.
fn decay_check(
    model: &Model,
    decomp: &AttractorDecomposition,
    seed: u64,
    tol: &Tolerances,
) -> qmpa_core::Result<Vec<Check>> {
    let g = model.generator_schrodinger();
    let Some(bound) = subperipheral_bound(&g, model.kind(), tol)? else {
        return Ok(vec![Check::at_most("spectral.decay", 0.0, 0.0).note("no decaying part")]);
    };
    let heis = decomp.all_heisenberg();
    let q = qmpa_core::linalg::column_space(&qmpa_core::spectral::operators_to_columns(&heis), 1e-12)?;
    let mut y = RandomModels::new(seed).operator(model.dim());
    if !heis.is_empty() {
        let v = qmpa_core::operator::vectorize(&y);
        let r = &v - &q * (q.adjoint() * &v);
        y = qmpa_core::operator::devectorize(&r)?;
    }
    let start = y.frobenius_norm();
    let target = 1e-8f64;
    let (evolved, label) = match model.kind() {
        ProcessKind::Discrete => {
            let n = if bound <= 0.0 {
                1
            } else {
                ((target.ln() / bound.ln()).ceil() as u64).clamp(1, 5000)
            };
            (g.power(n).apply(&y)?, format!("n = {n}, second modulus {bound:.6}"))
        }
        ProcessKind::Continuous => {
            let t = if bound < 0.0 {
                (target.ln() / bound).min(1e4)
            } else {
                1e4
            };
            (
                g.exp_scaled(t)?.apply(&y)?,
                format!("t = {t:.4}, spectral abscissa {bound:.6}"),
            )
        }
    };
    // Non-normal transients allow a margin over the pure rate prediction.
    Ok(vec![Check::at_most(
        "spectral.decay",
        evolved.frobenius_norm() / start,
        1e-5,
    )
    .note(label)])
}

fn tstate_and_duality_checks(
    suite: &mut Suite,
    model: &Model,
    cert: &TStateCertificate,
    decomp: &AttractorDecomposition,
    seed: u64,
    tol: &Tolerances,
) {
    let sigma = &cert.sigma;
    suite.run("tstate.recheck", || {
        let again = verify_tstate(model, sigma, tol)?;
        Ok(vec![Check::at_least_zero("tstate.defect", again.defect, tol.defect)])
    });
    let ps = probes(model.dim(), seed, 3);
    let g = model.generator_schrodinger();
    for k in [
        MonotoneFunction::Power(0.5),
        MonotoneFunction::Power(1.0),
        MonotoneFunction::Log1p,
    ] {
        let name = k.name();
        suite.run(&format!("duality[{name}]"), || {
            let pair = ModularPair::symmetric(k.clone(), sigma, tol)?;
            let dual = dual_basis(decomp, &pair, tol)?;
            let r = k_orthogonality_report(decomp, &pair, &g, &ps)?;
            let mut bijection = 0.0f64;
            let mut mapping = 0.0f64;
            let mut gram = f64::INFINITY;
            for b in &decomp.blocks {
                let image: Vec<Operator> = b
                    .schrodinger
                    .iter()
                    .map(|x| pair.k_of_delta(x))
                    .collect::<qmpa_core::Result<_>>()?;
                bijection = bijection.max(span_distance(&image, &b.schrodinger)?);
                let heis: Vec<Operator> = b
                    .schrodinger
                    .iter()
                    .map(|x| to_heisenberg(x, &k, sigma, sigma, tol))
                    .collect::<qmpa_core::Result<_>>()?;
                mapping = mapping.max(span_distance(&heis, &b.heisenberg)?);
                for x in &b.schrodinger {
                    gram = gram.min(pair.inner(x, x)?.re);
                }
            }
            Ok(vec![
                Check::at_most(
                    format!("duality[{name}].biorthogonality"),
                    dual.biorthogonality_defect()?,
                    tol.residual,
                ),
                Check::at_most(format!("duality[{name}].cross_block"), r.cross_block, tol.residual),
                Check::at_most(format!("duality[{name}].range"), r.range, tol.residual),
                Check::at_most(format!("duality[{name}].bijection"), bijection, tol.residual),
                Check::at_most(format!("duality[{name}].heisenberg_mapping"), mapping, tol.residual),
                Check {
                    name: format!("duality[{name}].gram_positive"),
                    passed: gram > 0.0,
                    value: gram,
                    tolerance: 0.0,
                    note: None,
                },
            ])
        });
    }
}

fn asymptotic_checks(
    suite: &mut Suite,
    model: &Model,
    cert: &TStateCertificate,
    decomp: &AttractorDecomposition,
    seed: u64,
    tol: &Tolerances,
) {
    let sigma = &cert.sigma;
    suite.run("asymptotics.projection", || {
        let pair = ModularPair::symmetric(MonotoneFunction::Power(0.5), sigma, tol)?;
        let prop = propagator(decomp, &pair, tol)?;
        let mut g = RandomModels::new(seed);
        let mut fixes = 0.0f64;
        for x in decomp.all_schrodinger() {
            fixes = fixes.max((&prop.project(&x)? - &x).frobenius_norm());
        }
        let mut idem = 0.0f64;
        for _ in 0..3 {
            let y = g.operator(model.dim());
            let once = prop.project(&y)?;
            idem = idem.max((&prop.project(&once)? - &once).frobenius_norm());
        }
        let rho = g.state(model.dim());
        let mut out = vec![
            Check::at_most("asymptotics.fixes_attractors", fixes, tol.residual),
            Check::at_most("asymptotics.idempotent", idem, tol.residual),
        ];
        if cert.stationary {
            out.push(Check::at_most(
                "asymptotics.fixes_sigma",
                (&prop.project(sigma)? - sigma).frobenius_norm(),
                tol.residual,
            ));
        }
        if model.is_trace_preserving(tol) {
            let at = match model.kind() {
                ProcessKind::Discrete => Evolution::Steps(7),
                ProcessKind::Continuous => Evolution::Time(0.7),
            };
            let tr = (prop.state(&rho, at)?.trace().re - 1.0).abs();
            out.push(Check::at_most("asymptotics.trace", tr, tol.residual));
        }
        // (A(n), ρ0) = (A0, ρ(n)) on the asymptotic regime.
        let a0 = g.hermitian(model.dim());
        let at = match model.kind() {
            ProcessKind::Discrete => Evolution::Steps(5),
            ProcessKind::Continuous => Evolution::Time(1.3),
        };
        let lhs = hs_inner(&prop.observable(&a0, at)?, &rho)?;
        let rhs = hs_inner(&a0, &prop.state(&rho, at)?)?;
        out.push(Check::at_most(
            "asymptotics.picture_duality",
            (lhs - rhs).norm(),
            tol.residual,
        ));
        out.extend(convergence_check(model, &prop, &rho, tol)?);
        Ok(out)
    });
    match model {
        Model::Discrete(d) => suite.run("asymptotics.reversal", || {
            let rec = petz_recovery(d, sigma, tol)?;
            let (a, b) = reversal_defects(d, &rec, &decomp.all_schrodinger());
            let mut out = vec![
                Check::at_most("asymptotics.reversal_left", a, tol.residual),
                Check::at_most("asymptotics.reversal_right", b, tol.residual),
            ];
            let iso = k_isometry_check(model, sigma, &MonotoneFunction::Power(0.5), decomp, &[], tol)?;
            out.push(Check::at_most(
                "asymptotics.k_isometry",
                iso.attractor_defect,
                tol.residual,
            ));
            Ok(out)
        }),
        Model::Continuous(c) => suite.run("asymptotics.master_equation", || {
            let r = asymptotic_master_check(c, sigma, decomp, tol)?;
            let iso = k_isometry_check(model, sigma, &MonotoneFunction::Power(0.5), decomp, &[], tol)?;
            Ok(vec![
                Check::at_most("asymptotics.master_equation", r.worst_relative(), tol.residual),
                Check::at_most("asymptotics.k_isometry", iso.attractor_defect, tol.residual),
            ])
        }),
    }
}

/// The fitted decay of `‖Tⁿ(ρ) − ρ_as(n)‖` is no slower than the
/// second-largest eigenvalue modulus (or spectral abscissa) predicts.
fn convergence_check(
    model: &Model,
    prop: &AsymptoticPropagator,
    rho: &Operator,
    tol: &Tolerances,
) -> qmpa_core::Result<Vec<Check>> {
    let g = model.generator_schrodinger();
    let Some(bound) = subperipheral_bound(&g, model.kind(), tol)? else {
        return Ok(Vec::new());
    };
    let horizon = match model.kind() {
        ProcessKind::Discrete => Horizon::Steps(60),
        ProcessKind::Continuous => {
            let rate = (-bound).max(1e-3);
            Horizon::Times {
                dt: 15.0 / rate / 60.0,
                count: 60,
            }
        }
    };
    let points = convergence_report(model, prop, rho, horizon)?;
    let Some(rate) = fit_decay(&points, model.kind(), 1e-12) else {
        return Ok(vec![
            Check::at_most("asymptotics.convergence", 0.0, 0.0).note("converged below the fit floor")
        ]);
    };
    Ok(vec![match model.kind() {
        ProcessKind::Discrete => Check::at_most("asymptotics.convergence", rate - bound, 1e-2)
            .note(format!("fitted factor {rate:.6}, second modulus {bound:.6}")),
        ProcessKind::Continuous => Check::at_most("asymptotics.convergence", (-bound) - rate, 1e-2 * (-bound).max(1.0))
            .note(format!("fitted rate {rate:.6}, gap {:.6}", -bound)),
    }])
}

fn gibbs_checks(
    model: &Model,
    cert: &TStateCertificate,
    decomp: &AttractorDecomposition,
    seed: u64,
    tol: &Tolerances,
) -> qmpa_core::Result<Vec<Check>> {
    let sigma = &cert.sigma;
    let basis = hermitian_basis(decomp, Scope::Full, tol)?;
    let pair = ModularPair::symmetric(MonotoneFunction::Power(0.5), sigma, tol)?;
    let prop = propagator(decomp, &pair, tol)?;
    let mut g = RandomModels::new(seed ^ 0x5EED);
    let raw = prop.project(&g.state(model.dim()))?.hermitian_part();
    let rho = &raw.scale_real(0.3) + &sigma.scale_real(0.7);
    let rho = rho.scale_real(1.0 / rho.trace().re);
    let f1 = coeffs_form1(&rho, &basis, sigma, tol)?;
    let back = state_from_form1(&basis, &f1.coefficients, sigma, Some(&prop), tol)?;
    let mut out = vec![Check::at_most(
        "gibbs.form1_round_trip",
        (&back - &rho).frobenius_norm(),
        tol.residual,
    )];
    match coeffs_form2(&rho, &basis, sigma, tol) {
        Ok(f2) => {
            let s2 = f2.state(tol)?;
            out.push(Check::at_most(
                "gibbs.form2_round_trip",
                (&s2 - &rho).frobenius_norm(),
                tol.residual,
            ));
            out.push(Check::at_most(
                "gibbs.form2_asymptotic",
                span_residual(&s2, &prop.primal_basis())?,
                tol.residual,
            ));
        }
        Err(CoreError::NotForm2Representable { residual }) => out.push(
            Check::at_most("gibbs.form2_round_trip", 0.0, tol.residual).note(format!(
                "state not form-2 representable (residual {residual:.3e}); skipped"
            )),
        ),
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Propagator usable with or without a faithful T-state.
pub fn best_propagator(
    decomp: &AttractorDecomposition,
    cert: Option<&TStateCertificate>,
    k: &MonotoneFunction,
    tol: &Tolerances,
) -> qmpa_core::Result<AsymptoticPropagator> {
    match cert {
        Some(c) => propagator(decomp, &ModularPair::symmetric(k.clone(), &c.sigma, tol)?, tol),
        None => AsymptoticPropagator::spectral(decomp),
    }
}
