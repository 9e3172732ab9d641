use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qmpa::analysis::{parse_monotone, Options, DEFAULT_SEED};
use qmpa::commands::{self, EvolveArgs, Form, GibbsArgs, GibbsInput, Outcome};
use qmpa::error::{exit, Error, Result};
use qmpa::format::{parse_model, parse_state};
use qmpa_core::{MonotoneFunction, Scope, Tolerances};

#[derive(Parser)]
#[command(
    name = "qmpa",
    version,
    about = "Asymptotic structure of finite-dimensional quantum Markov processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Model file (JSON).
    model: PathBuf,
    /// Operator-monotone function: power:<alpha> or log1p.
    #[arg(long, default_value = "power:0.5", value_parser = parse_monotone)]
    k: MonotoneFunction,
    #[arg(long)]
    tol_peripheral: Option<f64>,
    #[arg(long)]
    tol_eigen: Option<f64>,
    /// Seed for randomized probes.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Text tables instead of JSON.
    #[arg(long)]
    human: bool,
    /// Directory for convergence curves.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, T-state, dual basis and structure cross-checks.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Include attractor bases in the report.
        #[arg(long)]
        bases: bool,
    },
    /// Asymptotic state at step n or time t.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long, conflicts_with = "time")]
        steps: Option<u64>,
        #[arg(long)]
        time: Option<f64>,
        /// Append the distance to the exact evolution along the horizon.
        #[arg(long)]
        compare_exact: bool,
    },
    /// Gibbs-like representation of asymptotic states.
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        state: Option<PathBuf>,
        /// JSON array of coefficients.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, value_enum, default_value = "2")]
        form: FormArg,
        #[arg(long, value_enum, default_value = "full")]
        scope: ScopeArg,
        /// JSON array of hermitian matrices replacing the computed basis.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Dual basis for the chosen monotone function.
    Dual {
        #[command(flatten)]
        common: Common,
    },
    /// Find or verify a faithful T-state.
    Tstate {
        #[command(flatten)]
        common: Common,
    },
    /// Petz recovery map of a discrete model.
    Recover {
        #[command(flatten)]
        common: Common,
    },
    /// Run every applicable invariant check.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Fixed,
    Full,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn setup(c: &Common) -> Result<(qmpa::format::LoadedModel, Options)> {
    let mut loaded = parse_model(&read(&c.model)?, Tolerances::default())?;
    // Command-line flags take precedence over tolerances in the model file.
    if let Some(t) = c.tol_peripheral {
        loaded.tolerances.peripheral = t;
    }
    if let Some(t) = c.tol_eigen {
        loaded.tolerances.eigen = t;
    }
    let opts = Options {
        k: c.k.clone(),
        seed: c.seed,
        tol: loaded.tolerances,
    };
    Ok((loaded, opts))
}

fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Analyze { common, bases } => {
            let (m, o) = setup(common)?;
            commands::analyze(&m, &o, *bases)
        }
        Command::Verify { common } => {
            let (m, o) = setup(common)?;
            commands::verify(&m, &o)
        }
        Command::Tstate { common } => {
            let (m, o) = setup(common)?;
            commands::tstate(&m, &o)
        }
        Command::Dual { common } => {
            let (m, o) = setup(common)?;
            commands::dual(&m, &o)
        }
        Command::Recover { common } => {
            let (m, o) = setup(common)?;
            commands::recover(&m, &o)
        }
        Command::Evolve {
            common,
            initial,
            steps,
            time,
            compare_exact,
        } => {
            let (m, o) = setup(common)?;
            let initial = initial
                .as_deref()
                .map(|p| read(p).and_then(|t| parse_state(&t)))
                .transpose()?;
            let args = EvolveArgs {
                initial: initial.as_ref(),
                steps: *steps,
                time: *time,
                compare_exact: *compare_exact,
            };
            let out = commands::evolve(&m, &o, &args)?;
            if let (Some(dir), Some(curve)) = (&common.csv, &out.curve) {
                commands::write_curve(dir, curve)?;
            }
            Ok(out)
        }
        Command::Gibbs {
            common,
            state,
            coeffs,
            form,
            scope,
            basis,
        } => {
            let (m, o) = setup(common)?;
            let state = state
                .as_deref()
                .map(|p| read(p).and_then(|t| parse_state(&t)))
                .transpose()?;
            let coeffs = coeffs.as_deref().map(commands::parse_coeffs).transpose()?;
            let basis = basis
                .as_deref()
                .map(|p| read(p).and_then(|t| commands::parse_basis(&t)))
                .transpose()?;
            let input = match (&state, &coeffs) {
                (Some(s), None) => GibbsInput::State(s),
                (None, Some(c)) => GibbsInput::Coefficients(c),
                _ => return Err(Error::Usage("give exactly one of --state and --coeffs".into())),
            };
            let args = GibbsArgs {
                input,
                form: match form {
                    FormArg::One => Form::One,
                    FormArg::Two => Form::Two,
                },
                scope: match scope {
                    ScopeArg::Fixed => Scope::FixedPoints,
                    ScopeArg::Full => Scope::Full,
                },
                basis: basis.as_deref(),
            };
            commands::gibbs(&m, &o, &args)
        }
    }
}

fn human(cmd: &Command) -> bool {
    match cmd {
        Command::Analyze { common, .. }
        | Command::Evolve { common, .. }
        | Command::Gibbs { common, .. }
        | Command::Dual { common }
        | Command::Tstate { common }
        | Command::Recover { common }
        | Command::Verify { common } => common.human,
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::Core(qmpa_core::Error::NotForm2Representable { .. }) => Some(
            "log(rho) - log(sigma) has a component outside the hermitian attractor span; \
             the state may still have a form-1 representation (--form 1)",
        ),
        Error::Core(qmpa_core::Error::NotAsymptotic { .. }) => {
            Some("the state is not an asymptotic state of the model")
        }
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let as_text = human(&cli.command);
    match run(&cli.command) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let mut stdout = std::io::stdout().lock();
            let _ = if as_text {
                write!(stdout, "{}", out.human)
            } else {
                writeln!(stdout, "{}", out.json)
            };
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            let mut body = json!({ "error": { "code": e.code(), "message": e.to_string() } });
            if let Some(h) = hint(&e) {
                body["error"]["hint"] = json!(h);
            }
            if as_text {
                eprintln!("error [{}]: {e}", e.code());
                if let Some(h) = hint(&e) {
                    eprintln!("hint: {h}");
                }
            } else {
                let _ = writeln!(
                    std::io::stdout().lock(),
                    "{}",
                    serde_json::to_string_pretty(&body).expect("json values serialize")
                );
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
