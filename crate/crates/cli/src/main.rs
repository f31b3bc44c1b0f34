use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use corrsist::bell::{self, BellInequality, Membership};
use corrsist::entdetect::{detect_entanglement, detect_ge, Verdict};
use corrsist::persistency::{persistency_bounds, state_id, PersistencyOptions, PropertyKind};
use corrsist::qstate::{behavior, MeasurementBattery};
use corrsist::scan::{self, scan_tau_min};
use corrsist::statespec::{parse_state, StateSpec};
use corrsist::steering::{self, SteeringCriterion};
use corrsist::tangles::tau_aggregates;
use corrsist::Error;

const THREADS_VAR: &str = "CORRSIST_THREADS";

#[derive(Parser)]
#[command(name = "corrsist", version, about = "Persistency of multipartite correlations under particle loss")]
struct Cli {
    /// Master seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a state.
    State {
        #[command(subcommand)]
        cmd: StateCmd,
    },
    /// Tangles of a four-qubit pure state.
    Tangle(StateArg),
    /// Entanglement or genuine multipartite entanglement of a state.
    Detect {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, value_enum, default_value_t = DetectKind::E)]
        property: DetectKind,
    },
    /// Bell inequality optimization and polytope membership.
    Bell {
        #[command(subcommand)]
        cmd: BellCmd,
    },
    /// EPR steering of two-qubit states, or genuine steering of three qubits.
    #[command(args_conflicts_with_subcommands = true)]
    Steer(SteerArgs),
    /// Lower and upper bounds on the persistency of a property.
    Persistency {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        property: PropertyKind,
        #[arg(long, default_value_t = PersistencyOptions::default().batteries)]
        batteries: usize,
        #[arg(long, default_value_t = PersistencyOptions::default().restarts)]
        restarts: usize,
        /// Evaluate every subset even for permutation-symmetric states.
        #[arg(long)]
        no_symmetry: bool,
    },
    /// Grid scan of the τ_min family, as CSV.
    Scan {
        #[arg(long, default_value_t = scan::DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value = "-1,1", value_parser = parse_range, allow_hyphen_values = true)]
        range: (f64, f64),
        /// Also emit the x₃ < 0 sheet.
        #[arg(long)]
        both_signs: bool,
    },
}

#[derive(Args)]
struct StateArg {
    /// State specification, e.g. ghz:4, taumin:1/sqrt(2),1/sqrt(2),0,0, wmix:3/4;filter=0.1
    #[arg(long)]
    state: String,
}

#[derive(Subcommand)]
enum StateCmd {
    Show(StateArg),
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectKind {
    E,
    Ge,
}

#[derive(Subcommand)]
enum BellCmd {
    /// Maximize an inequality over projective measurements.
    Max {
        /// chsh, facet4, b16, or a path to an inequality file.
        #[arg(long)]
        ineq: String,
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value_t = bell::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Decide whether the behavior of a state under a battery lies in a polytope.
    Member {
        #[arg(long, value_enum)]
        model: Model,
        #[command(flatten)]
        state: StateArg,
        /// JSON file with {"parties": [[[x,y,z], ...], ...]}.
        #[arg(long)]
        battery: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Local,
    Ns2,
}

#[derive(Args)]
struct SteerArgs {
    #[command(subcommand)]
    cmd: Option<SteerCmd>,
    #[arg(long)]
    state: Option<String>,
    /// t-diag, linear2 or linear3; all are tried when omitted.
    #[arg(long)]
    criterion: Option<SteeringCriterion>,
}

#[derive(Subcommand)]
enum SteerCmd {
    /// Maximize the genuine tripartite steering expression.
    Genuine {
        #[command(flatten)]
        state: StateArg,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

enum Failure {
    Core(Error),
    Input(String),
    ClosedPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::ClosedPipe
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infeasible() { 3 } else { 2 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_VAR}={v:?} is not a positive integer"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn state(arg: &str) -> CliResult<StateSpec> {
    Ok(parse_state(arg)?)
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Scan { points, range, both_signs } = &cli.command {
        let rows = scan_tau_min(*points, *range, *both_signs)?;
        let mut w = sink(&cli.out)?;
        if cli.json {
            serde_json::to_writer_pretty(&mut w, &rows).map_err(io::Error::from)?;
            writeln!(w)?;
            w.flush()?;
        } else {
            scan::write_csv(&rows, w)?;
        }
        return Ok(());
    }
    let value = match &cli.command {
        Command::State { cmd: StateCmd::Show(a) } => show_state(&state(&a.state)?),
        Command::Tangle(a) => {
            let s = state(&a.state)?;
            let psi = s
                .pure
                .ok_or_else(|| Failure::Input(format!("{}: tangles need a pure state", a.state)))?;
            json!(tau_aggregates(&psi)?)
        }
        Command::Detect { state: a, property } => {
            let s = state(&a.state)?;
            let outcome = match property {
                DetectKind::E => detect_entanglement(&s.rho),
                DetectKind::Ge => detect_ge(&s.rho)?,
            };
            json!(outcome)
        }
        Command::Bell { cmd: BellCmd::Max { ineq, state: a, restarts } } => {
            let ineq = load_inequality(ineq)?;
            let s = state(&a.state)?;
            let (value, battery) = bell::maximize_bell(&ineq, &s.rho, *restarts, cli.seed)?;
            json!({
                "bound": ineq.bound(),
                "value": value,
                "violated": value > ineq.bound() + 1e-9,
                "battery": battery,
            })
        }
        Command::Bell { cmd: BellCmd::Member { model, state: a, battery } } => {
            let s = state(&a.state)?;
            let text = read(battery)?;
            let battery: MeasurementBattery = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", battery.display())))?;
            let b = behavior(&s.rho, &battery)?;
            let (name, m) = match model {
                Model::Local => ("local", bell::local_membership(&b)?),
                Model::Ns2 => ("ns2", bell::ns2_membership(&b)?),
            };
            json!({ "model": name, "membership": m, "inside": m == Membership::Inside })
        }
        Command::Steer(args) => steer(args, cli.seed)?,
        Command::Persistency { state: a, property, batteries, restarts, no_symmetry } => {
            let s = state(&a.state)?;
            let opts = PersistencyOptions {
                batteries: *batteries,
                restarts: *restarts,
                seed: cli.seed,
                use_symmetry: !no_symmetry,
                filter: None,
            };
            json!(persistency_bounds(&s.rho, *property, &opts)?)
        }
        Command::Scan { .. } => unreachable!("handled above"),
    };
    let mut w = sink(&cli.out)?;
    if cli.json {
        writeln!(w, "{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"))?;
    } else {
        let mut lines = Vec::new();
        flatten("", &value, &mut lines);
        for l in lines {
            writeln!(w, "{l}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read(p: &Path) -> CliResult<String> {
    std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
}

fn load_inequality(name: &str) -> CliResult<BellInequality> {
    match BellInequality::builtin(name) {
        Ok(i) => Ok(i),
        Err(_) if Path::new(name).exists() => Ok(BellInequality::from_text(&read(Path::new(name))?)?),
        Err(_) => Err(Failure::Input(format!("{name:?} is neither a built-in inequality nor a file"))),
    }
}

fn show_state(s: &StateSpec) -> Value {
    let rho = &s.rho;
    let mut eig = rho.eigenvalues();
    eig.sort_by(|a, b| b.total_cmp(a));
    let matrix: Vec<Vec<[f64; 2]>> = (0..rho.dim())
        .map(|i| (0..rho.dim()).map(|j| [rho.get(i, j).re, rho.get(i, j).im]).collect())
        .collect();
    let mut v = json!({
        "spec": s.text,
        "n_qubits": rho.n_qubits(),
        "state_id": state_id(rho),
        "purity": rho.purity(),
        "eigenvalues": eig,
        "permutation_symmetric": rho.is_permutation_symmetric(1e-10),
        "density_matrix": matrix,
    });
    if let Some(p) = s.filter_probability {
        v["filter_probability"] = json!(p);
    }
    if let Some(psi) = &s.pure {
        v["amplitudes"] = json!(psi.amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>());
    }
    v
}

fn steer(args: &SteerArgs, seed: u64) -> CliResult<Value> {
    if let Some(SteerCmd::Genuine { state: a, restarts }) = &args.cmd {
        let s = state(&a.state)?;
        let (value, settings) = steering::maximize_genuine_steering(&s.rho, *restarts, seed)?;
        let exceeds = value > steering::GENUINE_BOUND + 1e-9;
        // Biseparable states can exceed the bound too, so a detection also needs GE.
        let ge = detect_ge(&s.rho)?;
        let verdict = if ge.verdict == Verdict::CertifiedAbsent {
            Verdict::CertifiedAbsent
        } else if exceeds && ge.is_detected() {
            Verdict::Detected
        } else {
            Verdict::Undetected
        };
        return Ok(json!({
            "verdict": verdict,
            "value": value,
            "bound": steering::GENUINE_BOUND,
            "exceeds_bound": exceeds,
            "genuine_entanglement": ge,
            "settings": settings,
        }));
    }
    let spec = args.state.as_deref().ok_or_else(|| Failure::Input("--state is required".into()))?;
    let s = state(spec)?;
    let verdict = match args.criterion {
        Some(c) => c.evaluate(&s.rho)?,
        None => steering::detect_steering_2q(&s.rho)?,
    };
    Ok(json!(verdict))
}

fn is_nested(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(a) => !a.iter().all(|x| x.is_number()),
        _ => false,
    }
}

/// `a.b[2]: value` lines for plain-text output, scalars before nested values.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            let (nested, flat): (Vec<_>, Vec<_>) = m.iter().partition(|(_, x)| is_nested(x));
            for (k, x) in flat.into_iter().chain(nested) {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| x.is_number()) => {
            let items: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            out.push(format!("{prefix}: [{}]", items.join(", ")));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        other => out.push(format!("{prefix}: {other}")),
    }
}
