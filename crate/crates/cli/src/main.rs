//! `varpolar`: run verification suites, explain single points, and dump
//! sampled graphs and polar candidates.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use varpolar_core::polar::polar_contains;
use varpolar_core::subdifferential::preferred_source;
use varpolar_core::suite::{dense_graph, polar_candidates, Explanation};
use varpolar_core::{
    explain, lookup, polar_membership_via_iar, run_suite, sample_subdiff_graph, GraphSource, Report, RunConfig,
    SuiteKind, Vector,
};

#[derive(Parser, Debug)]
#[command(name = "varpolar", version, about = "Numerical checks of Minty, increase-along-rays and monotone polar equivalences")]
struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Library function id (repeatable for `suite`).
    #[arg(long = "function", global = true, value_name = "ID")]
    functions: Vec<String>,
    /// Grid points per axis for tested points.
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,
    /// Tolerance of the subderivative / enlargement inequality.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Prop1,
    Thm2,
    Thm3,
    Cdd,
    Predicates,
    Mvi,
    Sanity,
    All,
}

impl From<SuiteArg> for SuiteKind {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Prop1 => SuiteKind::Prop1,
            SuiteArg::Thm2 => SuiteKind::Thm2,
            SuiteArg::Thm3 => SuiteKind::Thm3,
            SuiteArg::Cdd => SuiteKind::Cdd,
            SuiteArg::Predicates => SuiteKind::Predicates,
            SuiteArg::Mvi => SuiteKind::Mvi,
            SuiteArg::Sanity => SuiteKind::Sanity,
            SuiteArg::All => SuiteKind::All,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites.
    Suite {
        #[arg(long = "suite", value_enum, value_name = "SUITE")]
        suites: Vec<SuiteArg>,
    },
    /// Drill down at one point, optionally with a covector.
    Explain {
        /// Point coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Covector coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        xstar: Option<String>,
    },
    /// Dump a sampled subdifferential graph as CSV.
    Graph {
        #[arg(long, value_parser = parse_source)]
        source: Option<GraphSource>,
    },
    /// Dump polar candidates with both membership routes as CSV.
    Polar,
}

fn parse_source(s: &str) -> std::result::Result<GraphSource, String> {
    s.parse().map_err(|e: varpolar_core::Error| e.to_string())
}

fn parse_vector(s: &str) -> Result<Vector> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad coordinate '{c}'")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::try_new(coords)?)
}

/// Failures that should exit with status 2.
#[derive(Debug)]
struct UsageError(anyhow::Error);

fn usage<T>(r: Result<T>) -> std::result::Result<T, UsageError> {
    r.map_err(UsageError)
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if !cli.functions.is_empty() {
        config.functions = cli.functions.clone();
    }
    if let Some(r) = cli.resolution {
        config.resolution = Some(r);
    }
    if let Some(t) = cli.tol {
        config.tol = t;
    }
    config.validate()?;
    Ok(config)
}

fn single_function(config: &RunConfig) -> Result<String> {
    match config.functions.as_slice() {
        [id] => Ok(id.clone()),
        _ => bail!("this command needs exactly one --function"),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("VARPOLAR_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("VARPOLAR_THREADS='{v}' is not a count"))?;
        if n == 0 {
            bail!("VARPOLAR_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Writes `body` to `dir/name`, or to stdout without a directory.
fn emit(out: Option<&Path>, name: &str, body: &[u8]) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn report_csv(r: &Report) -> String {
    let mut s = String::from("suite,function,passed,agree,indeterminate,disagree,truncated\n");
    for suite in &r.suites {
        for f in &suite.functions {
            let c = f.counts;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                suite.suite, f.function_id, f.passed, c.agree, c.indeterminate, c.disagree, f.truncated
            );
        }
    }
    s
}

fn report_text(r: &Report) -> String {
    let mut s = String::new();
    for suite in &r.suites {
        let _ = writeln!(s, "[{}] {}", suite.suite, if suite.passed { "PASS" } else { "FAIL" });
        for f in &suite.functions {
            let c = f.counts;
            let _ = writeln!(
                s,
                "  {:<13} {}  agree {:>5}  indeterminate {:>4}  disagree {:>4}{}",
                f.function_id,
                if f.passed { "pass" } else { "FAIL" },
                c.agree,
                c.indeterminate,
                c.disagree,
                if f.truncated { "  (truncated)" } else { "" }
            );
            for finding in f.findings.iter().filter(|x| x.agreement == varpolar_core::Agreement::Disagree).take(5) {
                let _ = writeln!(s, "      {} residual {}", finding.at, finding.residual);
            }
        }
    }
    let _ = writeln!(
        s,
        "overall: {} ({} hard disagreements, {} ms)",
        if r.passed { "PASS" } else { "FAIL" },
        r.hard_disagreements,
        r.timing.total_ms
    );
    s
}

fn explain_text(e: &Explanation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} at x = {}: f(x) = {}", e.function_id, e.x, e.value);
    let _ = writeln!(s, "direction, lower Dini, Clarke, exact");
    for row in &e.subderivatives {
        let exact = row.exact.map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(s, "  {}  {}  {}  {}", row.d, row.lower_dini, row.clarke, exact);
    }
    let _ = writeln!(
        s,
        "Minty (subderivative): solution {} residual {} witness {:?}",
        e.minty_subderivative.solution, e.minty_subderivative.residual, e.minty_subderivative.witness
    );
    let _ = writeln!(s, "increase along rays: solution {} residual {} witness {:?}", e.iar.solution, e.iar.residual, e.iar.witness);
    if let (Some(c), Some(k)) = (&e.convex_membership, &e.clarke_membership) {
        let _ = writeln!(s, "convex subdifferential: {} residual {}", c.contains, c.residual);
        let _ = writeln!(s, "Clarke subdifferential: {} residual {}", k.contains, k.residual);
    }
    if let (Some(p), Some(v)) = (&e.polar, &e.polar_via_iar) {
        let _ = writeln!(s, "polar (graph): {} min product {} witness {:?}", p.related, p.min_product, p.witness);
        let _ = writeln!(s, "polar (rays): {} residual {} witness {:?}", v.holds, v.residual, v.witness);
    }
    s
}

fn run(cli: &Cli) -> std::result::Result<ExitCode, UsageError> {
    usage(configure_threads())?;
    let mut config = usage(load_config(cli))?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Suite { suites } => {
            if !suites.is_empty() {
                config.suites = suites.iter().map(|&s| s.into()).collect();
            }
            let report = usage(run_suite(&config).map_err(Into::into))?;
            let (name, body) = match cli.format {
                Format::Json => ("report.json", serde_json::to_string_pretty(&report).expect("serialisable") + "\n"),
                Format::Csv => ("report.csv", report_csv(&report)),
                Format::Text => ("report.txt", report_text(&report)),
            };
            usage(emit(out, name, body.as_bytes()))?;
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Explain { x, xstar } => {
            let id = usage(single_function(&config))?;
            let x = usage(parse_vector(x))?;
            let xstar = usage(xstar.as_deref().map(parse_vector).transpose())?;
            let e = usage(explain(&config, &id, &x, xstar.as_ref()).map_err(Into::into))?;
            let body = match cli.format {
                Format::Text => explain_text(&e),
                _ => serde_json::to_string_pretty(&e).expect("serialisable") + "\n",
            };
            usage(emit(out, &format!("explain_{id}.{}", if cli.format == Format::Text { "txt" } else { "json" }), body.as_bytes()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Graph { source } => {
            let id = usage(single_function(&config))?;
            let f = usage(lookup(&id).map_err(Into::into))?;
            let region = config.region_for(&f);
            let source = source.unwrap_or_else(|| preferred_source(&f));
            let g = usage(
                sample_subdiff_graph(&f, &region, config.resolution_for(&f), source, &config.graph_options())
                    .map_err(Into::into),
            )?;
            let mut csv = Vec::new();
            g.sample.write_csv(&mut csv).expect("in-memory write");
            usage(emit(out, &format!("graph_{id}.csv"), &csv))?;
            if out.is_some() {
                let meta = serde_json::to_string_pretty(&g.meta).expect("serialisable") + "\n";
                usage(emit(out, &format!("graph_{id}.meta.json"), meta.as_bytes()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Polar => {
            let id = usage(single_function(&config))?;
            let f = usage(lookup(&id).map_err(Into::into))?;
            let region = config.region_for(&f);
            let cands = usage(polar_candidates(&config, &f, &region).map_err(Into::into))?;
            let dense = usage(dense_graph(&config, &f, &region).map_err(Into::into))?;
            let n = f.dim();
            let mut s: String = (1..=n)
                .map(|i| format!("x_{i}"))
                .chain((1..=n).map(|i| format!("xstar_{i}")))
                .collect::<Vec<_>>()
                .join(",");
            s.push_str(",related,min_product,iar\n");
            for (x, xs) in cands.iter() {
                let p = polar_contains(&dense.graph.sample, x, xs);
                let v = usage(
                    polar_membership_via_iar(&f, x, xs, &region, dense.resolution, config.ray_resolution)
                        .map_err(Into::into),
                )?;
                let cells: Vec<String> = x.iter().chain(xs.iter()).map(|c| c.to_string()).collect();
                let _ = writeln!(s, "{},{},{},{}", cells.join(","), p.related, p.min_product, v.holds);
            }
            usage(emit(out, &format!("polar_{id}.csv"), s.as_bytes()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(UsageError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
