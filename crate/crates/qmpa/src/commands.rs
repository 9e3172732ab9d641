//! Subcommand bodies. Each returns an [`Outcome`]: a JSON payload, a text
//! rendering and the exit code it implies.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use qmpa_core::asymptotics::{
    convergence_report, petz_recovery, reversal_defects, ConvergencePoint, Evolution, Horizon,
};
use qmpa_core::duality::dual_basis;
use qmpa_core::gibbs::{
    coeffs_form1, coeffs_form2, hermitian_basis, limit_procedure, state_from_form1, state_from_form2, GibbsForm,
    HermitianAttractorBasis, DEFAULT_S_GRID,
};
use qmpa_core::spectral::decompose;
use qmpa_core::tstate::commutant_check;
use qmpa_core::{Error as CoreError, Model, ModularPair, Operator, ProcessKind, Scope};

use crate::analysis::{
    self, best_propagator, summarize, AnalysisReport, ModelSummary, Options, TStateStage, TStateSummary,
};
use crate::error::{exit, Error, Result};
use crate::format::{clean, matrix_from_json, matrix_to_json, JsonMatrix, LoadedModel};

pub struct Outcome {
    /// Pretty-printed JSON payload; field order follows the report types.
    pub json: String,
    pub human: String,
    pub exit_code: i32,
    /// Convergence curve for `--csv`.
    pub curve: Option<Vec<ConvergencePoint>>,
}

impl Outcome {
    fn new<T: Serialize>(payload: &T, human: String, exit_code: i32) -> Self {
        Self {
            json: serde_json::to_string_pretty(payload).expect("reports always serialize"),
            human,
            exit_code,
            curve: None,
        }
    }
}

fn fmt_c(z: [f64; 2]) -> String {
    // Display only: round-off below the printed precision reads as zero.
    let snap = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = (snap(z[0]), snap(z[1]));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

fn render_checks(out: &mut String, checks: &[analysis::Check]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>12}  {:>10}",
        "check", "result", "value", "tolerance"
    );
    for c in checks {
        let _ = write!(
            out,
            "{:<width$}  {:>6}  {:>12.3e}  {:>10.1e}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.tolerance
        );
        if let Some(n) = &c.note {
            let _ = write!(out, "  ({n})");
        }
        out.push('\n');
    }
}

fn render_model(out: &mut String, m: &ModelSummary) {
    let _ = writeln!(out, "model: {}", m.description);
    let _ = writeln!(
        out,
        "trace preserving: {}, unitality: {}",
        m.trace_preserving, m.unitality
    );
}

fn render_tstate(out: &mut String, t: &TStateSummary) {
    match (&t.error, t.min_eig) {
        (Some(e), _) => {
            let _ = write!(out, "T-state: failed [{}] {}", e.code, e.message);
            if let Some(r) = t.fixed_point_rank {
                let _ = write!(out, " (fixed-point rank {r})");
            }
            out.push('\n');
        }
        (None, min) => {
            let _ = writeln!(
                out,
                "T-state: {} (min eigenvalue {:.3e}, defect {:.3e}, stationary {}{})",
                t.status,
                min.unwrap_or(f64::NAN),
                t.defect.unwrap_or(f64::NAN),
                t.stationary.unwrap_or(false),
                if t.heuristic { ", heuristic" } else { "" }
            );
        }
    }
}

pub fn render_report(r: &AnalysisReport) -> String {
    let mut out = String::new();
    render_model(&mut out, &r.model);
    let _ = writeln!(out, "seed: {}, k: {}", r.seed, r.monotone);
    render_tstate(&mut out, &r.tstate);
    let _ = writeln!(
        out,
        "asymptotic spectrum (attractor dimension {}):",
        r.attractor_dimension
    );
    let _ = writeln!(
        out,
        "  {:>24}  {:>5}  {:>11}  {:>11}",
        "eigenvalue", "mult", "schrodinger", "heisenberg"
    );
    for b in &r.spectrum {
        let _ = writeln!(
            out,
            "  {:>24}  {:>5}  {:>11}  {:>11}",
            fmt_c(b.eigenvalue),
            b.multiplicity,
            b.schrodinger_dim,
            b.heisenberg_dim
        );
    }
    render_checks(&mut out, &r.checks);
    let status = if r.partial {
        "PARTIAL (no faithful T-state; spectral analyses only)"
    } else if r.passed {
        "PASS"
    } else {
        "FAIL"
    };
    let _ = writeln!(out, "overall: {status}");
    out
}

fn report_exit(r: &AnalysisReport) -> i32 {
    if r.partial {
        exit::TSTATE
    } else if r.passed {
        exit::OK
    } else {
        exit::CHECK_FAILED
    }
}

pub fn analyze(loaded: &LoadedModel, opts: &Options, with_bases: bool) -> Result<Outcome> {
    let r = analysis::analyze(&loaded.model, loaded.tstate.as_ref(), opts, with_bases)?;
    Ok(Outcome::new(&r, render_report(&r), report_exit(&r)))
}

pub fn verify(loaded: &LoadedModel, opts: &Options) -> Result<Outcome> {
    let r = analysis::verify(&loaded.model, loaded.tstate.as_ref(), opts)?;
    Ok(Outcome::new(&r, render_report(&r), report_exit(&r)))
}

fn require_tstate(model: &Model, loaded: &LoadedModel, opts: &Options) -> Result<TStateStage> {
    let stage = TStateStage::run(model, loaded.tstate.as_ref(), &opts.tol);
    if let Some(e) = &stage.error {
        return Err(Error::Core(e.clone()));
    }
    Ok(stage)
}

#[derive(Serialize)]
struct TStateReport {
    command: &'static str,
    model: ModelSummary,
    tstate: TStateSummary,
    /// `‖[σ, X]‖_F` for each Schrödinger attractor, in block order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    commutators: Vec<f64>,
}

pub fn tstate(loaded: &LoadedModel, opts: &Options) -> Result<Outcome> {
    let model = &loaded.model;
    let stage = TStateStage::run(model, loaded.tstate.as_ref(), &opts.tol);
    let commutators = match &stage.cert {
        Some(c) => {
            let d = decompose(model, &opts.tol)?;
            commutant_check(&c.sigma, &d.all_schrodinger())?
                .into_iter()
                .map(|(_, v)| v)
                .collect()
        }
        None => Vec::new(),
    };
    let r = TStateReport {
        command: "tstate",
        model: summarize(model, &opts.tol)?,
        tstate: stage.summary(),
        commutators,
    };
    let mut human = String::new();
    render_model(&mut human, &r.model);
    render_tstate(&mut human, &r.tstate);
    if let Some(s) = &r.tstate.sigma {
        human.push_str("sigma:\n");
        render_matrix(&mut human, s);
    }
    if !r.commutators.is_empty() {
        let list: Vec<String> = r.commutators.iter().map(|v| format!("{v:.3e}")).collect();
        let _ = writeln!(human, "commutators with attractors: {}", list.join(", "));
    }
    let code = if stage.cert.is_some() { exit::OK } else { exit::TSTATE };
    Ok(Outcome::new(&r, human, code))
}

fn render_matrix(out: &mut String, m: &JsonMatrix) {
    for row in m {
        let cells: Vec<String> = row.iter().map(|&z| format!("{:>20}", fmt_c(z))).collect();
        let _ = writeln!(out, "  {}", cells.join(" "));
    }
}

#[derive(Serialize)]
struct DualTriple {
    eigenvalue: [f64; 2],
    primal: JsonMatrix,
    dual: JsonMatrix,
}

#[derive(Serialize)]
struct DualReport {
    command: &'static str,
    model: ModelSummary,
    monotone: String,
    sigma: JsonMatrix,
    biorthogonality_defect: f64,
    tolerance: f64,
    triples: Vec<DualTriple>,
}

pub fn dual(loaded: &LoadedModel, opts: &Options) -> Result<Outcome> {
    let model = &loaded.model;
    let tol = &opts.tol;
    let stage = require_tstate(model, loaded, opts)?;
    let sigma = &stage.cert.as_ref().expect("checked").sigma;
    let decomp = decompose(model, tol)?;
    let pair = ModularPair::symmetric(opts.k.clone(), sigma, tol)?;
    let basis = dual_basis(&decomp, &pair, tol)?;
    let defect = basis.biorthogonality_defect()?;
    let r = DualReport {
        command: "dual",
        model: summarize(model, tol)?,
        monotone: opts.k.name(),
        sigma: matrix_to_json(sigma),
        biorthogonality_defect: defect,
        tolerance: tol.residual,
        triples: basis
            .triples()
            .map(|(l, x, y)| DualTriple {
                eigenvalue: clean(l),
                primal: matrix_to_json(x),
                dual: matrix_to_json(y),
            })
            .collect(),
    };
    let mut human = String::new();
    render_model(&mut human, &r.model);
    let _ = writeln!(
        human,
        "k: {}, biorthogonality defect {defect:.3e} (tolerance {:.1e})",
        r.monotone, tol.residual
    );
    for (i, t) in r.triples.iter().enumerate() {
        let _ = writeln!(human, "[{i}] eigenvalue {}\n primal:", fmt_c(t.eigenvalue));
        render_matrix(&mut human, &t.primal);
        human.push_str(" dual:\n");
        render_matrix(&mut human, &t.dual);
    }
    let code = if defect <= tol.residual {
        exit::OK
    } else {
        exit::CHECK_FAILED
    };
    Ok(Outcome::new(&r, human, code))
}

#[derive(Serialize)]
struct RecoverReport {
    command: &'static str,
    model: ModelSummary,
    sigma: JsonMatrix,
    recovery_kraus: Vec<JsonMatrix>,
    reversal_left: f64,
    reversal_right: f64,
    tolerance: f64,
}

pub fn recover(loaded: &LoadedModel, opts: &Options) -> Result<Outcome> {
    let model = &loaded.model;
    let tol = &opts.tol;
    let Some(d) = model.as_discrete() else {
        return Err(Error::Usage("recover needs a discrete model".into()));
    };
    let stage = require_tstate(model, loaded, opts)?;
    let sigma = &stage.cert.as_ref().expect("checked").sigma;
    let rec = petz_recovery(d, sigma, tol)?;
    let decomp = decompose(model, tol)?;
    let (a, b) = reversal_defects(d, &rec, &decomp.all_schrodinger());
    let r = RecoverReport {
        command: "recover",
        model: summarize(model, tol)?,
        sigma: matrix_to_json(sigma),
        recovery_kraus: rec.kraus().iter().map(matrix_to_json).collect(),
        reversal_left: a,
        reversal_right: b,
        tolerance: tol.residual,
    };
    let mut human = String::new();
    render_model(&mut human, &r.model);
    let _ = writeln!(human, "recovery map with {} Kraus operators", r.recovery_kraus.len());
    let _ = writeln!(human, "max ‖T‡T(X) − X‖ over attractors: {a:.3e}");
    let _ = writeln!(human, "max ‖TT‡(X) − X‖ over attractors: {b:.3e}");
    let code = if a.max(b) <= tol.residual {
        exit::OK
    } else {
        exit::CHECK_FAILED
    };
    Ok(Outcome::new(&r, human, code))
}

pub struct EvolveArgs<'a> {
    pub initial: Option<&'a Operator>,
    pub steps: Option<u64>,
    pub time: Option<f64>,
    pub compare_exact: bool,
}

#[derive(Serialize)]
struct EvolveReport {
    command: &'static str,
    model: ModelSummary,
    at: f64,
    /// Which propagator produced the asymptotic state.
    propagator: &'static str,
    asymptotic_state: JsonMatrix,
    exact_state: JsonMatrix,
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<Vec<[f64; 2]>>,
}

pub fn evolve(loaded: &LoadedModel, opts: &Options, args: &EvolveArgs) -> Result<Outcome> {
    let model = &loaded.model;
    let tol = &opts.tol;
    let n = model.dim();
    let rho = match args.initial {
        Some(r) => {
            if r.dim() != n {
                return Err(Error::Format(format!(
                    "initial state is {}x{}, model is {n}x{n}",
                    r.dim(),
                    r.dim()
                )));
            }
            r.clone()
        }
        None => Operator::identity(n).scale_real(1.0 / n as f64),
    };
    let at = match (model.kind(), args.steps, args.time) {
        (ProcessKind::Discrete, Some(s), None) => Evolution::Steps(s),
        (ProcessKind::Discrete, None, None) => Evolution::Steps(50),
        (ProcessKind::Continuous, None, Some(t)) if t >= 0.0 => Evolution::Time(t),
        (ProcessKind::Continuous, None, None) => Evolution::Time(10.0),
        (ProcessKind::Discrete, _, Some(_)) => return Err(Error::Usage("discrete models take --steps".into())),
        (ProcessKind::Continuous, Some(_), _) => return Err(Error::Usage("continuous models take --time".into())),
        (ProcessKind::Continuous, None, Some(_)) => return Err(Error::Usage("--time must be non-negative".into())),
    };
    let stage = TStateStage::run(model, loaded.tstate.as_ref(), tol);
    let decomp = decompose(model, tol)?;
    let prop = best_propagator(&decomp, stage.cert.as_ref(), &opts.k, tol)?;
    let g = model.generator_schrodinger();
    let (exact, at_value) = match at {
        Evolution::Steps(s) => (g.power(s).apply(&rho)?, s as f64),
        Evolution::Time(t) => (g.exp_scaled(t)?.apply(&rho)?, t),
    };
    let asym = prop.state(&rho, at)?;
    let curve = if args.compare_exact {
        let horizon = match at {
            Evolution::Steps(s) => Horizon::Steps(s as usize),
            Evolution::Time(t) => Horizon::Times {
                dt: t / 50.0,
                count: 50,
            },
        };
        Some(convergence_report(model, &prop, &rho, horizon)?)
    } else {
        None
    };
    let r = EvolveReport {
        command: "evolve",
        model: summarize(model, tol)?,
        at: at_value,
        propagator: if stage.cert.is_some() { "dual_basis" } else { "spectral" },
        asymptotic_state: matrix_to_json(&asym),
        exact_state: matrix_to_json(&exact),
        distance: (&exact - &asym).frobenius_norm(),
        convergence: curve.as_ref().map(|c| c.iter().map(|p| [p.at, p.distance]).collect()),
    };
    let mut human = String::new();
    render_model(&mut human, &r.model);
    let unit = if model.kind() == ProcessKind::Discrete {
        "n"
    } else {
        "t"
    };
    let _ = writeln!(human, "{unit} = {at_value}, propagator: {}", r.propagator);
    human.push_str("asymptotic state:\n");
    render_matrix(&mut human, &r.asymptotic_state);
    let _ = writeln!(human, "distance to exact evolution: {:.3e}", r.distance);
    if let Some(c) = &curve {
        let _ = writeln!(human, "{:>12}  {:>12}", unit, "distance");
        for p in c {
            let _ = writeln!(human, "{:>12.4}  {:>12.4e}", p.at, p.distance);
        }
    }
    let mut out = Outcome::new(&r, human, exit::OK);
    out.curve = curve;
    Ok(out)
}

/// Convergence curve as `at,distance` rows.
pub fn write_curve(dir: &Path, curve: &[ConvergencePoint]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let path = dir.join("convergence.csv");
    let io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record(["at", "distance"]).map_err(io)?;
    for p in curve {
        w.write_record([p.at.to_string(), format!("{:e}", p.distance)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    One,
    Two,
}

pub enum GibbsInput<'a> {
    Coefficients(&'a [f64]),
    State(&'a Operator),
}

pub struct GibbsArgs<'a> {
    pub input: GibbsInput<'a>,
    pub form: Form,
    pub scope: Scope,
    /// Overrides the computed hermitian basis.
    pub basis: Option<&'a [Operator]>,
}

#[derive(Serialize)]
struct LimitRow {
    s: f64,
    coefficients: Vec<f64>,
    normalization: f64,
    reconstruction_error: f64,
}

#[derive(Serialize)]
struct GibbsReport {
    command: &'static str,
    model: ModelSummary,
    direction: &'static str,
    form: u8,
    scope: &'static str,
    sigma: JsonMatrix,
    basis: Vec<JsonMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<JsonMatrix>,
    /// Expansion residual (inverse) or round-trip error (forward).
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    tolerance: f64,
    /// Present when the input state was rank-deficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_trajectory: Option<Vec<LimitRow>>,
}

pub fn gibbs(loaded: &LoadedModel, opts: &Options, args: &GibbsArgs) -> Result<Outcome> {
    let model = &loaded.model;
    let tol = &opts.tol;
    let stage = require_tstate(model, loaded, opts)?;
    let sigma = &stage.cert.as_ref().expect("checked").sigma;
    let decomp = decompose(model, tol)?;
    let basis = match args.basis {
        Some(b) => HermitianAttractorBasis::from_elements(b.to_vec(), args.scope, tol)?,
        None => hermitian_basis(&decomp, args.scope, tol)?,
    };
    let prop = best_propagator(&decomp, stage.cert.as_ref(), &opts.k, tol)?;
    let mut r = GibbsReport {
        command: "gibbs",
        model: summarize(model, tol)?,
        direction: "",
        form: if args.form == Form::One { 1 } else { 2 },
        scope: match args.scope {
            Scope::Full => "full",
            Scope::FixedPoints => "fixed",
        },
        sigma: matrix_to_json(sigma),
        basis: basis.elements.iter().map(matrix_to_json).collect(),
        coefficients: None,
        normalization: None,
        state: None,
        residual: None,
        tolerance: tol.residual,
        limit_trajectory: None,
    };
    match args.input {
        GibbsInput::Coefficients(c) => {
            if c.len() != basis.len() {
                return Err(Error::Core(CoreError::CoefficientCount {
                    expected: basis.len(),
                    found: c.len(),
                }));
            }
            let rho = match args.form {
                Form::One => state_from_form1(&basis, c, sigma, Some(&prop), tol)?,
                Form::Two => state_from_form2(&basis, c, sigma, Some(&prop), tol)?,
            };
            // Coefficients are unique only up to the identity direction, so
            // the round trip is measured on states.
            let back = inverse(&rho, &basis, sigma, args.form, tol)?;
            let again = match args.form {
                Form::One => state_from_form1(&basis, &back.coefficients, sigma, None, tol)?,
                Form::Two => state_from_form2(&basis, &back.coefficients, sigma, None, tol)?,
            };
            r.direction = "forward";
            r.coefficients = Some(c.to_vec());
            r.state = Some(matrix_to_json(&rho));
            r.residual = Some((&again - &rho).frobenius_norm());
        }
        GibbsInput::State(rho) => {
            let rho = rho.hermitian_part();
            let min = rho.min_eigenvalue()?;
            if min <= tol.positivity {
                let traj = limit_procedure(&rho, sigma, &basis, &DEFAULT_S_GRID, Some(&prop), tol)?;
                r.direction = "limit";
                r.state = Some(matrix_to_json(&rho));
                r.limit_trajectory = Some(
                    traj.into_iter()
                        .map(|p| LimitRow {
                            s: p.s,
                            coefficients: p.coefficients,
                            normalization: p.normalization,
                            reconstruction_error: p.reconstruction_error,
                        })
                        .collect(),
                );
            } else {
                let f = inverse(&rho, &basis, sigma, args.form, tol)?;
                r.direction = "inverse";
                r.coefficients = Some(f.coefficients);
                r.normalization = Some(f.normalization);
                r.residual = Some(f.residual);
            }
        }
    }
    let human = render_gibbs(&r);
    Ok(Outcome::new(&r, human, exit::OK))
}

fn inverse(
    rho: &Operator,
    basis: &HermitianAttractorBasis,
    sigma: &Operator,
    form: Form,
    tol: &qmpa_core::Tolerances,
) -> qmpa_core::Result<GibbsForm> {
    match form {
        Form::One => coeffs_form1(rho, basis, sigma, tol),
        Form::Two => coeffs_form2(rho, basis, sigma, tol),
    }
}

fn render_gibbs(r: &GibbsReport) -> String {
    let mut out = String::new();
    render_model(&mut out, &r.model);
    let _ = writeln!(
        out,
        "form {}, scope {}, {} basis elements, {}",
        r.form,
        r.scope,
        r.basis.len(),
        r.direction
    );
    if let Some(c) = &r.coefficients {
        let list: Vec<String> = c.iter().map(|v| format!("{v:.10}")).collect();
        let _ = writeln!(out, "coefficients: [{}]", list.join(", "));
    }
    if let Some(n) = r.normalization {
        let _ = writeln!(out, "normalization: {n:.10}");
    }
    if let Some(e) = r.residual {
        let _ = writeln!(out, "residual: {e:.3e} (tolerance {:.1e})", r.tolerance);
    }
    if r.direction == "forward" {
        if let Some(s) = &r.state {
            out.push_str("state:\n");
            render_matrix(&mut out, s);
        }
    }
    if let Some(t) = &r.limit_trajectory {
        out.push_str("rank-deficient state; limit trajectory over ω(s) = (1 − s)ρ + sσ:\n");
        let _ = writeln!(
            out,
            "{:>8}  {:>14}  {:>12}  coefficients",
            "s", "normalization", "recon. error"
        );
        for p in t {
            let list: Vec<String> = p.coefficients.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(
                out,
                "{:>8}  {:>14.6e}  {:>12.3e}  [{}]",
                p.s,
                p.normalization,
                p.reconstruction_error,
                list.join(", ")
            );
        }
    }
    out
}

/// Parses `--coeffs`: a JSON array of numbers.
pub fn parse_coeffs(text: &str) -> Result<Vec<f64>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("--coeffs: {e}")))
}

/// Parses a basis file: a JSON array of square complex matrices.
pub fn parse_basis(text: &str) -> Result<Vec<Operator>> {
    let raw: Vec<JsonMatrix> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.iter()
        .map(|m| matrix_from_json(m, m.len(), "basis element"))
        .collect()
}
