//! `explainer`: build mental models of a neural network prediction or a
//! Prolog derivation, explore them in a terminal dialogue, or serve them
//! over HTTP.
//!
//! Exit codes: 0 success, 2 input or bind error, 3 the Prolog query is not
//! derivable.

mod repl;

use std::fs;
use std::io::{self, IsTerminal};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use explainer_core::dialogue::{Session, SessionOptions};
use explainer_core::nn::{self, ActivationFunction, NetworkSpec, MNIST_LAYERS};
use explainer_core::prolog::{self, parse_atom, parse_program, solve};
use explainer_core::{document, MentalModel};
use explainer_service::{AppState, DEFAULT_HOST, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "explainer", version, about = "Why/how explanation dialogues over mental models of AI systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Explain one feed-forward network prediction.
    ExplainNn(ExplainNn),
    /// Explain the derivation of a ground Prolog query.
    ExplainProlog(ExplainProlog),
    /// Serve mental-model documents over HTTP.
    Serve(Serve),
    /// Open the dialogue on an exported mental-model document.
    Explore(Explore),
}

#[derive(Debug, Args)]
struct DialogueArgs {
    /// Write the mental-model document here instead of opening the dialogue.
    #[arg(long, value_name = "PATH")]
    export: Option<PathBuf>,
    /// Allow questions about any entity, not only presented ones.
    #[arg(long)]
    no_scope: bool,
    /// Write the JSON transcript here when the dialogue ends.
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Activation {
    Sigmoid,
    Relu,
    Tanh,
}

impl From<Activation> for ActivationFunction {
    fn from(a: Activation) -> Self {
        match a {
            Activation::Sigmoid => ActivationFunction::Sigmoid,
            Activation::Relu => ActivationFunction::Relu,
            Activation::Tanh => ActivationFunction::Tanh,
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("network").required(true).args(["net", "seed"]))]
struct ExplainNn {
    /// Network document (JSON).
    #[arg(long, value_name = "PATH")]
    net: Option<PathBuf>,
    /// Generate uniform(-1, 1) weights from this seed instead of reading a network.
    #[arg(long)]
    seed: Option<u64>,
    /// Layer sizes for --seed.
    #[arg(long, value_delimiter = ',', default_values_t = MNIST_LAYERS.to_vec(), conflicts_with = "net")]
    layers: Vec<usize>,
    /// Activation function for --seed.
    #[arg(long, value_enum, default_value_t = Activation::Sigmoid, conflicts_with = "net")]
    activation: Activation,
    /// Input vector: a JSON array or a single CSV row.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    dialogue: DialogueArgs,
}

#[derive(Debug, Args)]
struct ExplainProlog {
    /// Ground, negation-free program.
    program: PathBuf,
    /// Query atom, e.g. `a` or `p(1,2)`.
    query: String,
    #[command(flatten)]
    dialogue: DialogueArgs,
}

#[derive(Debug, Args)]
struct Serve {
    /// Mental-model documents; each is served under its file stem.
    #[arg(required = true, value_name = "DOCUMENT")]
    models: Vec<PathBuf>,
    #[arg(long, default_value = DEFAULT_HOST)]
    host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
}

#[derive(Debug, Args)]
struct Explore {
    /// Mental-model document written by --export.
    #[arg(long, value_name = "PATH")]
    import: PathBuf,
    #[arg(long)]
    no_scope: bool,
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn dialogue(mm: MentalModel, scoped: bool, transcript: Option<&Path>) -> Result<(), Failure> {
    let mut session = Session::start_at_root(Arc::new(mm), SessionOptions { scoped })
        .map_err(|e| input_error(e.to_string()))?;
    let stdin = io::stdin();
    repl::run(&mut session, stdin.lock(), io::stdout().lock()).map_err(|e| input_error(e.to_string()))?;
    if let Some(path) = transcript {
        write(path, &session.export_transcript())?;
    }
    Ok(())
}

fn finish(mm: MentalModel, args: &DialogueArgs) -> Result<(), Failure> {
    match &args.export {
        Some(path) => write(path, &document::serialize(&mm)),
        None => dialogue(mm, !args.no_scope, args.transcript.as_deref()),
    }
}

fn explain_nn(args: &ExplainNn) -> Result<(), Failure> {
    let net = match (&args.net, args.seed) {
        (Some(path), _) => nn::load_network(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        (None, Some(seed)) => {
            let net = NetworkSpec::random(&args.layers, args.activation.into(), seed);
            net.validate().map_err(|e| input_error(e.to_string()))?;
            net
        }
        (None, None) => unreachable!("clap requires --net or --seed"),
    };
    let input = nn::load_input(&read(&args.input)?)
        .map_err(|e| input_error(format!("{}: {e}", args.input.display())))?;
    let record = nn::forward(&net, &input).map_err(|e| input_error(e.to_string()))?;
    let mm = nn::build_mental_model(&net, &record).map_err(|e| input_error(e.to_string()))?;
    finish(mm, &args.dialogue)
}

fn explain_prolog(args: &ExplainProlog) -> Result<(), Failure> {
    let program = parse_program(&read(&args.program)?)
        .map_err(|e| input_error(format!("{}: {e}", args.program.display())))?;
    let query = parse_atom(&args.query).map_err(|e| input_error(format!("query: {e}")))?;
    let tree = solve(&program, &query).ok_or_else(|| Failure {
        code: 3,
        message: format!("{query} is not derivable from {}", args.program.display()),
    })?;
    let mm = prolog::build_mental_model(&program, &tree).map_err(|e| input_error(e.to_string()))?;
    finish(mm, &args.dialogue)
}

fn load_document(path: &Path) -> Result<MentalModel, Failure> {
    document::deserialize(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn serve(args: &Serve) -> Result<(), Failure> {
    let mut state = AppState::new();
    for path in &args.models {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| input_error(format!("{}: no usable file name", path.display())))?;
        state
            .add_model(name, load_document(path)?)
            .map_err(|e| input_error(e.to_string()))?;
    }
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_ansi(io::stderr().is_terminal())
        .init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| input_error(e.to_string()))?;
    runtime.block_on(async {
        let listener = explainer_service::bind(&args.host, args.port)
            .await
            .map_err(|e| input_error(format!("cannot bind {}:{}: {e}", args.host, args.port)))?;
        if let Ok(addr) = listener.local_addr() {
            eprintln!("serving {} model(s) on http://{addr}", args.models.len());
        }
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        explainer_service::serve(listener, Arc::new(state), shutdown)
            .await
            .map_err(|e| input_error(e.to_string()))
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ExplainNn(args) => explain_nn(&args),
        Command::ExplainProlog(args) => explain_prolog(&args),
        Command::Serve(args) => serve(&args),
        Command::Explore(args) => dialogue(load_document(&args.import)?, !args.no_scope, args.transcript.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
