mod io;
mod report;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use packcoh::FiniteMetricSpace;
use serde_json::Value;

use report::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Lib(#[from] packcoh::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use packcoh::Error as E;
        match self {
            CliError::Input(_) => 64,
            CliError::Output(_) => 1,
            CliError::Lib(E::CandidateCapExceeded { .. }) => 2,
            CliError::Lib(
                E::NotSquare { .. }
                | E::NegativeDistance { .. }
                | E::NonzeroDiagonal(_)
                | E::AsymmetricDistance { .. }
                | E::TriangleViolation { .. }
                | E::ZeroDistanceDistinctPoints { .. }
                | E::Disconnected(_)
                | E::InvalidPoint(_)
                | E::InvalidParams(_)
                | E::LengthMismatch(..)
                | E::HostMismatch { .. }
                | E::NotASubcomplex { .. },
            ) => 64,
            CliError::Lib(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    CapExceeded,
}

pub struct Outcome {
    pub report: Value,
    pub summary: String,
    pub verdict: Verdict,
}

#[derive(Parser, Debug)]
#[command(name = "packcoh", version, about = "Packing l^{q,p} cohomology of finite metric spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Space document (distance table or weighted edge list)
    #[arg(long, global = true, conflicts_with = "generate")]
    space: Option<PathBuf>,
    /// Generated space, e.g. path:9, cycle:12, grid:4x4, tree:2x3, annulus:12x2, cayley:5x5/1,0;0,1
    #[arg(long, global = true)]
    generate: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for report files; without it the report goes to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComplexKind {
    /// Vertex sets contained in a closed ball of radius `scale`
    Ball,
    /// Flag complex of pairs at distance at most `scale`
    Vr,
}

#[derive(Args, Debug, Clone)]
pub struct ComplexArgs {
    /// Scale of the complex built on the space
    #[arg(long, default_value = "1")]
    pub scale: String,
    #[arg(long, value_enum, default_value = "ball")]
    pub complex: ComplexKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Greedy,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    ToNerve,
    ToSpace,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Simplex counts of the complex at a scale
    Rips {
        #[arg(long)]
        scale: String,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, value_enum, default_value = "ball")]
        complex: ComplexKind,
        /// Include the simplex lists
        #[arg(long)]
        list: bool,
    },
    /// Betti numbers by exact rank computation
    Betti {
        #[arg(long)]
        degree: Option<usize>,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Packing norm of a cochain (random unless --cochain is given)
    PackingNorm {
        #[arg(long)]
        p: String,
        #[arg(long)]
        ell: String,
        #[arg(long)]
        rmin: String,
        #[arg(long)]
        rmax: String,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long)]
        cochain: Option<PathBuf>,
        #[arg(long, default_value_t = packcoh::metric::DEFAULT_CANDIDATE_CAP)]
        cap: usize,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Uniform vanishing radius and the nested radii schedule
    VanishingRadius {
        #[arg(long = "R")]
        r: String,
        /// Number of nesting levels
        #[arg(long = "L", default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        max_degree: usize,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Poincare constant of a ball pair C(y, inner) in C(y, outer)
    Poincare {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0)]
        center: usize,
        /// Inner radius (default: the complex scale)
        #[arg(long)]
        inner: Option<String>,
        /// Outer radius (default: the vanishing radius of the inner one)
        #[arg(long)]
        outer: Option<String>,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Move a class between the complex and the nerve of its ball covering
    Transfer {
        #[arg(long)]
        degree: usize,
        /// Covering radius (default: the edge scale of the complex)
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long, value_enum, default_value = "to-nerve")]
        direction: DirectionArg,
        /// Nesting levels (default: max(degree, 1))
        #[arg(long)]
        levels: Option<usize>,
        /// Index of the basis class to transfer
        #[arg(long, default_value_t = 0)]
        class: usize,
        #[arg(long)]
        cochain: Option<PathBuf>,
        /// Where to write the witness (default: <out>/witness.json when --out is set)
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Round trips of every basis class and of random exact cochains
    Roundtrip {
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Transfers of nerve cup products against cup products of transfers
    Multiplicativity {
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Quasi-isometry round trips described by a map document
    QiExperiment {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1)]
        max_degree: usize,
    },
    /// Packing norm against counting norm on random cochains
    NormEquivalence {
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value = "2")]
        ell: String,
        /// Packing radius S (R = S)
        #[arg(long, default_value = "1")]
        radius: String,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = packcoh::metric::DEFAULT_CANDIDATE_CAP)]
        cap: usize,
        #[command(flatten)]
        cx: ComplexArgs,
    },
    /// Re-execute a transfer witness and compare every step
    Replay {
        witness: PathBuf,
    },
    /// Execute a scenario document
    Run {
        scenario: PathBuf,
    },
    /// Emit a generated space as a document
    Generate {
        spec: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rips { .. } => "rips",
            Command::Betti { .. } => "betti",
            Command::PackingNorm { .. } => "packing-norm",
            Command::VanishingRadius { .. } => "vanishing-radius",
            Command::Poincare { .. } => "poincare",
            Command::Transfer { .. } => "transfer",
            Command::Roundtrip { .. } => "roundtrip",
            Command::Multiplicativity { .. } => "multiplicativity",
            Command::QiExperiment { .. } => "qi-experiment",
            Command::NormEquivalence { .. } => "norm-equivalence",
            Command::Replay { .. } => "replay",
            Command::Run { .. } => "run",
            Command::Generate { .. } => "generate",
        }
    }
}

/// Everything a task needs besides its own flags.
pub struct Context {
    pub space: Option<FiniteMetricSpace>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub base: PathBuf,
}

impl Context {
    pub fn space(&self) -> Result<&FiniteMetricSpace, CliError> {
        self.space.as_ref().ok_or_else(|| CliError::Input("this task needs --space FILE or --generate KIND:PARAMS".into()))
    }
}

#[derive(Parser, Debug)]
#[command(name = "packcoh", no_binary_name = true)]
struct TaskOnly {
    #[command(subcommand)]
    command: Command,
}

fn scenario_argv(task: &str, params: Option<&Value>) -> Result<Vec<String>, CliError> {
    let mut argv = vec![task.to_string()];
    let Some(params) = params else { return Ok(argv) };
    let map = params.as_object().ok_or_else(|| CliError::Input("scenario \"params\" must be an object".into()))?;
    for (k, v) in map {
        match v {
            Value::Bool(true) => argv.push(format!("--{k}")),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => argv.extend([format!("--{k}"), s.clone()]),
            Value::Number(n) => argv.extend([format!("--{k}"), n.to_string()]),
            other => return Err(CliError::Input(format!("scenario parameter {k} has unsupported value {other}"))),
        }
    }
    Ok(argv)
}

fn run_scenario(path: &Path, global: &Global) -> Result<(Outcome, String, Option<PathBuf>, Format), CliError> {
    let doc = io::read_json(path)?;
    let obj = doc.as_object().ok_or_else(|| CliError::Input("a scenario must be an object".into()))?;
    for key in obj.keys() {
        if !["name", "space", "task", "params", "seed", "output", "format"].contains(&key.as_str()) {
            return Err(CliError::Input(format!("unknown scenario field {key:?}")));
        }
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        None => "scenario".to_string(),
        _ => return Err(CliError::Input("scenario \"name\" must be a nonempty string".into())),
    };
    let task = obj.get("task").and_then(Value::as_str).ok_or_else(|| CliError::Input("scenario needs a \"task\" string".into()))?;
    if task == "run" || task == "replay" || task == "generate" {
        return Err(CliError::Input(format!("task {task:?} is not available in scenarios")));
    }
    let argv = scenario_argv(task, obj.get("params"))?;
    let parsed = TaskOnly::try_parse_from(&argv).map_err(|e| CliError::Input(format!("scenario {name}: {e}")))?;
    let space = obj.get("space").map(|s| io::space_operand(s, &base)).transpose()?;
    let seed = match obj.get("seed") {
        None => global.seed,
        Some(v) => v.as_u64().ok_or_else(|| CliError::Input("scenario \"seed\" must be a nonnegative integer".into()))?,
    };
    let out = match obj.get("output") {
        None => global.out.clone(),
        Some(Value::String(s)) => Some(base.join(s)),
        Some(_) => return Err(CliError::Input("scenario \"output\" must be a string".into())),
    };
    let format = match obj.get("format") {
        None => global.format,
        Some(Value::String(s)) => Format::from_str(s, true).map_err(|_| CliError::Input(format!("unknown format {s:?}")))?,
        Some(_) => return Err(CliError::Input("scenario \"format\" must be a string".into())),
    };
    let ctx = Context { space, seed, out: out.clone(), base };
    let mut outcome = tasks::dispatch(&parsed.command, &ctx)?;
    outcome.report["scenario"] = Value::String(name.clone());
    Ok((outcome, name, out, format))
}

fn execute(cli: Cli) -> Result<Verdict, CliError> {
    let g = &cli.global;
    let (outcome, name, out, format) = match &cli.command {
        Command::Run { scenario } => run_scenario(scenario, g)?,
        cmd => {
            let space = match (&g.space, &g.generate) {
                (Some(p), _) => Some(io::space_from_json(&io::read_json(p)?)?),
                (None, Some(spec)) => Some(io::generate(spec)?),
                (None, None) => None,
            };
            let ctx = Context { space, seed: g.seed, out: g.out.clone(), base: PathBuf::from(".") };
            (tasks::dispatch(cmd, &ctx)?, cmd.name().to_string(), g.out.clone(), g.format)
        }
    };
    report::emit(&outcome.report, &outcome.summary, &name, out.as_deref(), format)?;
    Ok(outcome.verdict)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(Verdict::CapExceeded) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
