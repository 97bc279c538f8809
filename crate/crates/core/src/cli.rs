//! The `iad` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when IAD
//! does not converge within the iteration budget.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::chain::{steady_state, ProbabilityVector, StochasticMatrix, DEFAULT_KPOW, DEFAULT_TOL};
use crate::coarse::Partition;
use crate::diagnostics::full_report_with;
use crate::error::{Error, Result};
use crate::experiments::{grid_study, power_rates, refinement_study, shift_study, Prepared, ShiftRow, ALPHAS};
use crate::iad::{iad_solve, trace_errors, IadConfig, IadTrace};
use crate::io::{read_chain, read_probability_vector, write_vector, Orientation};
use crate::models::{partition_family, pathological_fixtures, GridSpacing, ModelConfig, ModelKind, PartitionKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "iad", version, about = "Iterative aggregation/disaggregation for Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model (`1d`, `2d`, `fixture:<name>`) or a key=value config file.
    #[arg(long, default_value = "1d")]
    pub model: String,
    /// Transition matrix in Matrix Market format; replaces --model.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// The --matrix file has rows summing to one.
    #[arg(long)]
    pub row_stochastic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run IAD and write the steady state and the iteration trace.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Partition file (`fine coarse` per line) or a family such as `split1d:57`.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tau: f64,
        #[arg(long)]
        max_outer: Option<usize>,
        /// Starting vector, one float per line. Defaults to uniform.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Output directory for `mu.txt` and `trace.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Leading eigenvalues of P* P as `k,sqrt_lambda,neglog10`.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate diagnostics for one partition as JSON.
    Report {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        k_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rates and bounds for the two-block partitions of the 1d model.
    ShiftStudy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.15")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst rate over rotations of uniform partitions with 1..max-n blocks.
    RefineStudy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.15")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate every published table and figure as CSV.
    Tables {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        /// Skip the two-dimensional study (table2.csv, table4.csv).
        #[arg(long)]
        skip_2d: bool,
    },
}

/// Six decimals.
pub fn fmt6(x: f64) -> String {
    format!("{:.6}", x + 0.0)
}

/// `-log10(1 - x)` with two decimals, `inf` when `x >= 1`.
pub fn neglog10(x: f64) -> String {
    let gap = 1.0 - x;
    if gap <= 0.0 {
        "inf".into()
    } else {
        format!("{:.2}", -gap.log10() + 0.0)
    }
}

/// What a model argument resolves to.
struct Source {
    chain: StochasticMatrix,
    exact: Option<ProbabilityVector>,
    partition: Option<Partition>,
    initial: Option<ProbabilityVector>,
    spacing: GridSpacing,
}

fn load_config(spec: &str) -> Result<ModelConfig> {
    let path = Path::new(spec);
    if path.is_file() {
        ModelConfig::parse(BufReader::new(File::open(path)?))
    } else {
        ModelConfig::named(spec)
    }
}

fn resolve(args: &ModelArgs) -> Result<Source> {
    if let Some(path) = &args.matrix {
        let orientation = if args.row_stochastic {
            Orientation::RowStochastic
        } else {
            Orientation::ColumnStochastic
        };
        return Ok(Source {
            chain: read_chain(BufReader::new(File::open(path)?), orientation)?,
            exact: None,
            partition: None,
            initial: None,
            spacing: GridSpacing::default(),
        });
    }
    if let Some(name) = args.model.strip_prefix("fixture:") {
        let fx = pathological_fixtures()
            .into_iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture `{name}`")))?;
        return Ok(Source {
            chain: fx.chain,
            exact: None,
            partition: Some(fx.partition),
            initial: Some(fx.initial),
            spacing: GridSpacing::default(),
        });
    }
    let cfg = load_config(&args.model)?;
    let model = cfg.build()?;
    Ok(Source {
        chain: model.chain,
        exact: model.exact_steady_state,
        partition: model.partition,
        initial: None,
        spacing: cfg.spacing,
    })
}

fn resolve_partition(arg: Option<&str>, src: &Source) -> Result<Partition> {
    let n = src.chain.dim();
    let part = match arg {
        Some(spec) if Path::new(spec).is_file() => Partition::read(BufReader::new(File::open(spec)?))?,
        Some(spec) => partition_family(spec.parse::<PartitionKind>()?, n, src.spacing)?,
        None => src
            .partition
            .clone()
            .ok_or_else(|| Error::InvalidParameter("no partition given (use --partition)".into()))?,
    };
    if part.len() != n {
        return Err(Error::Dimension(format!("partition covers {} states, chain has {n}", part.len())));
    }
    Ok(part)
}

fn reference_steady_state(src: &Source) -> Result<ProbabilityVector> {
    match &src.exact {
        Some(mu) => Ok(mu.clone()),
        None => steady_state(&src.chain, DEFAULT_TOL, DEFAULT_KPOW),
    }
}

fn ring_config(args: &ModelArgs) -> Result<ModelConfig> {
    if args.matrix.is_some() || args.model.starts_with("fixture:") {
        return Err(Error::InvalidParameter("studies need a 1d model config".into()));
    }
    let cfg = load_config(&args.model)?;
    if cfg.kind != ModelKind::Ring1D {
        return Err(Error::InvalidParameter("studies are defined for the 1d model".into()));
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_csv(out: Option<&Path>, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_trace(path: &Path, trace: &IadTrace, mu: &ProbabilityVector) -> Result<()> {
    let errors = trace_errors(trace, mu)?;
    let rows: Vec<Vec<String>> = (0..trace.steps())
        .map(|k| {
            vec![
                (k + 1).to_string(),
                format!("{:e}", trace.rel_changes[k]),
                format!("{:e}", trace.residuals[k]),
                format!("{:e}", errors[k + 1]),
            ]
        })
        .collect();
    write_csv(Some(path), "iter,rel_change,residual,err_invmu", &rows)
}

fn cmd_solve(
    model: &ModelArgs,
    partition: Option<&str>,
    tau: f64,
    max_outer: Option<usize>,
    init: Option<&Path>,
    out: &Path,
) -> Result<i32> {
    let src = resolve(model)?;
    let part = resolve_partition(partition, &src)?;
    let mu0 = match init {
        Some(path) => read_probability_vector(BufReader::new(File::open(path)?))?,
        None => src.initial.clone().unwrap_or_else(|| ProbabilityVector::uniform(src.chain.dim())),
    };
    let mut cfg = IadConfig { tau, ..IadConfig::default() };
    if let Some(m) = max_outer {
        cfg.max_outer = m;
    }
    cfg.validate()?;
    let reference = reference_steady_state(&src)?;
    fs::create_dir_all(out)?;
    match iad_solve(&src.chain, &part, &mu0, &cfg) {
        Ok((mu, trace)) => {
            let mut w = create(&out.join("mu.txt"))?;
            write_vector(mu.as_slice(), &mut w)?;
            w.flush()?;
            write_trace(&out.join("trace.csv"), &trace, &reference)?;
            eprintln!("converged in {} iterations", trace.steps());
            Ok(EXIT_OK)
        }
        Err(Error::NotConverged { iterations, trace }) => {
            if let Some(last) = trace.iterates.last() {
                let mut w = create(&out.join("mu.txt"))?;
                write_vector(last.as_slice(), &mut w)?;
                w.flush()?;
            }
            write_trace(&out.join("trace.csv"), &trace, &reference)?;
            eprintln!("iad: no convergence after {iterations} iterations");
            Ok(EXIT_NOT_CONVERGED)
        }
        Err(e) => Err(e),
    }
}

fn spectrum_rows(values: &[f64]) -> Vec<Vec<String>> {
    values
        .iter()
        .enumerate()
        .map(|(k, &s)| vec![(k + 1).to_string(), fmt6(s), neglog10(s)])
        .collect()
}

fn cmd_spectrum(model: &ModelArgs, count: usize, out: Option<&Path>) -> Result<i32> {
    let src = resolve(model)?;
    let mu = reference_steady_state(&src)?;
    let spec = crate::chain::pstar_p_spectrum(&src.chain, &mu)?;
    let values: Vec<f64> = (0..count.min(spec.dim())).map(|k| spec.sqrt_lambda(k)).collect();
    write_csv(out, "k,sqrt_lambda,neglog10", &spectrum_rows(&values))?;
    Ok(EXIT_OK)
}

fn cmd_report(model: &ModelArgs, partition: Option<&str>, k_list: &[usize], out: Option<&Path>) -> Result<i32> {
    let src = resolve(model)?;
    let part = resolve_partition(partition, &src)?;
    let mu = reference_steady_state(&src)?;
    let report = full_report_with(&src.chain, &mu, &part, k_list)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    match out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}")?;
            w.flush()?;
        }
        None => println!("{json}"),
    }
    Ok(EXIT_OK)
}

const SHIFT_HEADER: &str = "ell,rho,norm_bound,angle_bound,rho_neglog10,norm_bound_neglog10,angle_bound_neglog10";

fn shift_rows(rows: &[ShiftRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.ell.to_string(),
                fmt6(r.rho),
                fmt6(r.norm_bound),
                fmt6(r.angle_bound),
                neglog10(r.rho),
                neglog10(r.norm_bound),
                neglog10(r.angle_bound),
            ]
        })
        .collect()
}

fn cmd_shift_study(model: &ModelArgs, alphas: &[f64], k: usize, out: Option<&Path>) -> Result<i32> {
    let base = ring_config(model)?;
    let mut rows = Vec::new();
    for &alpha in alphas {
        let prep = Prepared::new(&ModelConfig { alpha, ..base.clone() })?;
        for mut r in shift_rows(&shift_study(&prep, k)?) {
            r.insert(0, alpha.to_string());
            rows.push(r);
        }
    }
    write_csv(out, &format!("alpha,{SHIFT_HEADER}"), &rows)?;
    Ok(EXIT_OK)
}

fn refine_rows(rows: &[(usize, f64, f64)]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|(n, a, r)| vec![n.to_string(), a.to_string(), fmt6(*r)])
        .collect()
}

fn cmd_refine_study(model: &ModelArgs, alphas: &[f64], max_n: usize, out: Option<&Path>) -> Result<i32> {
    let base = ring_config(model)?;
    if max_n == 0 || max_n > base.n {
        return Err(Error::InvalidParameter(format!("--max-n must lie in 1..={}", base.n)));
    }
    write_csv(out, "n,alpha,max_rho", &refine_rows(&refinement_study(&base, alphas, max_n)?))?;
    Ok(EXIT_OK)
}

fn cmd_tables(out: &Path, max_n: usize, skip_2d: bool) -> Result<i32> {
    fs::create_dir_all(out)?;
    let ring = Prepared::ring(0.0)?;
    write_csv(
        Some(&out.join("table1.csv")),
        "k,sqrt_lambda,neglog10",
        &spectrum_rows(&ring.leading_sqrt_lambdas(5)),
    )?;
    let rates: Vec<Vec<String>> = power_rates(&ALPHAS)?
        .into_iter()
        .map(|(a, r)| vec![a.to_string(), fmt6(r), neglog10(r)])
        .collect();
    write_csv(Some(&out.join("table3.csv")), "alpha,rho_hat_p,neglog10", &rates)?;
    write_csv(
        Some(&out.join("fig2.csv")),
        "n,alpha,max_rho",
        &refine_rows(&refinement_study(&ModelConfig::reference_1d(), &ALPHAS, max_n)?),
    )?;
    for (name, alpha) in [("fig3.csv", 0.0), ("fig4.csv", 0.05), ("fig5.csv", 0.15)] {
        let prep = if alpha == 0.0 { ring.clone() } else { Prepared::ring(alpha)? };
        write_csv(Some(&out.join(name)), SHIFT_HEADER, &shift_rows(&shift_study(&prep, 2)?))?;
    }
    if !skip_2d {
        let (prep, [stripes, blocks]) = grid_study(&ModelConfig::reference_2d())?;
        write_csv(
            Some(&out.join("table2.csv")),
            "k,sqrt_lambda,neglog10",
            &spectrum_rows(&prep.leading_sqrt_lambdas(5)),
        )?;
        let row = |q: &str, f: &dyn Fn(&crate::diagnostics::RateReport) -> f64| {
            vec![q.to_string(), fmt6(f(&stripes)), fmt6(f(&blocks))]
        };
        let rows = vec![
            row("rho_J", &|r| r.rho_j),
            row("norm_bound", &|r| r.norm_bound),
            row("sin2_theta_k2", &|r| r.angle_bounds[&2].sin2_theta),
            row("angle_bound_k2", &|r| r.angle_bounds[&2].bound),
            row("sin2_theta_k3", &|r| r.angle_bounds[&3].sin2_theta),
            row("angle_bound_k3", &|r| r.angle_bounds[&3].bound),
        ];
        write_csv(Some(&out.join("table4.csv")), "quantity,grid1d,grid2d", &rows)?;
    }
    Ok(EXIT_OK)
}

/// Executes a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve { model, partition, tau, max_outer, init, out } => {
            cmd_solve(model, partition.as_deref(), *tau, *max_outer, init.as_deref(), out)
        }
        Command::Spectrum { model, count, out } => cmd_spectrum(model, *count, out.as_deref()),
        Command::Report { model, partition, k_list, out } => {
            cmd_report(model, partition.as_deref(), k_list, out.as_deref())
        }
        Command::ShiftStudy { model, alpha, k, out } => cmd_shift_study(model, alpha, *k, out.as_deref()),
        Command::RefineStudy { model, alpha, max_n, out } => {
            cmd_refine_study(model, alpha, *max_n, out.as_deref())
        }
        Command::Tables { out, max_n, skip_2d } => cmd_tables(out, *max_n, *skip_2d),
    }
}

/// Caps the worker pool at `IAD_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("IAD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("iad: {e}");
            EXIT_USAGE
        }
    }
}
