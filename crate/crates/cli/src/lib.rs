//! The `mcca` command line: fit, transform, isc and synth.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 malformed input or
//! arguments, 3 degenerate covariance or undefined correlation.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mcca::io::{load_model, read_table_file, save_model, write_table_file};
use mcca::{
    fit_data, generate, isc_signals, transform, FitOptions, MccaError, Method, MultiSetData,
    SynthSpec,
};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mcca", version, about = "Multi-set canonical correlation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and print the per-component correlations.
    Fit(FitArgs),
    /// Project data through a saved model.
    Transform(TransformArgs),
    /// Inter-set correlation of projected signals.
    Isc(IscArgs),
    /// Generate synthetic data with planted shared components.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Per-set column counts, e.g. 4,4,4.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, default_value = "two-step")]
    method: Method,
    #[arg(long, default_value_t = mcca::solver::DEFAULT_RANK_TOL, allow_negative_numbers = true)]
    rank_tol: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Number of components to keep.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct IscArgs {
    #[arg(long)]
    input: PathBuf,
    /// Columns per set in set-major layout. Without it every column is one set.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// 1-based component to evaluate within each set's columns.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    /// Number of sets; a single --dims value is repeated this many times.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    t: usize,
    /// Number of planted shared components.
    #[arg(long)]
    k: usize,
    /// Signal-to-noise power ratio; `inf` for noiseless data.
    #[arg(long, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    latents: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<MccaError> for Failure {
    fn from(e: MccaError) -> Self {
        let code = match &e {
            e if e.is_degenerate() => EXIT_DEGENERATE,
            MccaError::NoConvergence { .. } | MccaError::Io(_) => EXIT_OTHER,
            MccaError::NotSquare { .. } | MccaError::NotSymmetric { .. } => EXIT_OTHER,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command. Tables
/// go to `out`, diagnostics to `err`; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Transform(a) => cmd_transform(a),
        Command::Isc(a) => cmd_isc(a, out),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "mcca: {}", f.message);
            f.code
        }
    }
}

fn load_data(path: &std::path::Path, dims: &[usize]) -> Result<MultiSetData, Failure> {
    let table = read_table_file(path).map_err(|e| match e {
        MccaError::Io(m) => input_error(m),
        e => e.into(),
    })?;
    Ok(MultiSetData::from_concatenated(&table.values, dims)?)
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_OTHER,
        message: e.to_string(),
    }
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> CmdResult {
    let data = load_data(&a.input, &a.dims)?;
    let opts = FitOptions {
        method: a.method,
        rank_tol: a.rank_tol,
        gamma: a.gamma,
        k: a.k,
    };
    let model = fit_data(&data, &opts)?;
    save_model(&a.output, &model)?;

    let mut table = format!(
        "{:>9}  {:>12}  {:>12}  {:>13}\n",
        "component", "lambda", "rho_analytic", "rho_empirical"
    );
    for n in 0..model.n_components() {
        table.push_str(&format!(
            "{:>9}  {:>12.6}  {:>12.6}  {:>13.6}\n",
            n + 1,
            model.lambda()[n],
            model.rho_analytic()[n],
            model.rho_empirical()[n]
        ));
    }
    out.write_all(table.as_bytes()).map_err(io_failure)
}

fn cmd_transform(a: TransformArgs) -> CmdResult {
    let model = load_model(&a.model).map_err(|e| match e {
        MccaError::Io(m) => input_error(m),
        e => e.into(),
    })?;
    let data = load_data(&a.input, &a.dims)?;
    let proj = transform(&model, &data)?;
    let header: Vec<String> = (1..=proj.n_sets())
        .flat_map(|l| (1..=proj.n_components()).map(move |n| format!("set{l}_comp{n}")))
        .collect();
    write_table_file(&a.output, Some(&header), &proj.to_matrix())?;
    Ok(())
}

fn cmd_isc(a: IscArgs, out: &mut dyn Write) -> CmdResult {
    let table = read_table_file(&a.input).map_err(|e| match e {
        MccaError::Io(m) => input_error(m),
        e => e.into(),
    })?;
    let x = table.values;
    let widths = a.dims.unwrap_or_else(|| vec![1; x.cols()]);
    let total: usize = widths.iter().sum();
    if total != x.cols() {
        return Err(input_error(format!(
            "dims sum to {total} but input has {} columns",
            x.cols()
        )));
    }
    let k = a.k.unwrap_or(1);
    if k == 0 {
        return Err(input_error("--k is 1-based".into()));
    }
    let mut signals = Vec::with_capacity(widths.len());
    let mut c0 = 0;
    for (l, &w) in widths.iter().enumerate() {
        if k > w {
            return Err(input_error(format!(
                "component {k} requested but set {} has {w} columns",
                l + 1
            )));
        }
        signals.push(x.column(c0 + k - 1));
        c0 += w;
    }
    let b = isc_signals(&signals)?;
    writeln!(out, "r_B {}\nr_W {}\nrho {}", b.r_b, b.r_w, b.rho).map_err(io_failure)
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let dims = match (a.n, a.dims.len()) {
        (Some(n), 1) => vec![a.dims[0]; n],
        (Some(n), m) if n != m => {
            return Err(input_error(format!("--n is {n} but {m} dims were given")));
        }
        _ => a.dims,
    };
    let r = generate(&SynthSpec::new(a.seed, dims, a.t, a.k, a.snr))?;
    let header: Vec<String> = r
        .data
        .dims()
        .iter()
        .enumerate()
        .flat_map(|(l, &d)| (1..=d).map(move |j| format!("set{}_x{j}", l + 1)))
        .collect();
    write_table_file(&a.output, Some(&header), &r.data.concatenated())?;
    if let Some(path) = a.latents {
        let header: Vec<String> = (1..=a.k).map(|j| format!("latent{j}")).collect();
        write_table_file(&path, Some(&header), &r.latents)?;
    }
    Ok(())
}
