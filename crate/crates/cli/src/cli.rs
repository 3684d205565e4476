use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use boxfence::sim::{COMPARISON_SIZES, DEFAULT_CONTAMINATION_REPLICATES};
use boxfence::{
    analyze, analyze_groups, generate, run, run_grid, BoxplotStats, Convention, Method, Scenario,
    SimResult,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::input::{parse_path, DataGroup, Format, InputError};
use crate::render::{render_ascii, render_svg, Orientation, RenderSpec};
use crate::report::{fmt_sig, to_csv, to_json, to_table, Entry, GroupFailure, Report};

const EXIT_HELP: &str = "\
Exit status:
  0  success
  1  invalid arguments, invalid data or a group that could not be analyzed
  2  input or output file could not be read or written";

#[derive(Debug, Parser)]
#[command(name = "boxfence", version, about = "Boxplot outlier detection with sample-size aware fences", after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads for group analysis and simulation (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flag outliers in a data file and print a report
    Detect(DetectArgs),
    /// Draw boxplots with fences and flagged points
    Plot(PlotArgs),
    /// Run one contamination scenario and print the result as JSON
    Simulate(SimulateArgs),
    /// Compare all four rules over the standard sample-size grid
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input file, or `-` for stdin
    #[arg(long)]
    input: PathBuf,
    /// Input format (default: from the file extension)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// CSV column holding the values
    #[arg(long)]
    column: Option<String>,
    /// CSV column used to split rows into groups
    #[arg(long)]
    group_column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodName {
    Tukey,
    Chauvenet,
    Holm,
    Bh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Hinges,
    Type7,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Hinges => Convention::Hinges,
            ConventionArg::Type7 => Convention::Type7,
        }
    }
}

#[derive(Debug, Args)]
struct RuleArgs {
    #[arg(long, value_enum, default_value = "chauvenet")]
    method: MethodName,
    /// Fence multiplier for tukey
    #[arg(long, default_value_t = 1.5)]
    k: f64,
    /// Error rate for holm and bh
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hinges")]
    convention: ConventionArg,
}

fn build_method(name: MethodName, k: f64, alpha: f64) -> Method<f64> {
    match name {
        MethodName::Tukey => Method::Tukey { k },
        MethodName::Chauvenet => Method::Chauvenet,
        MethodName::Holm => Method::Holm { alpha },
        MethodName::Bh => Method::Bh { alpha },
    }
}

impl RuleArgs {
    fn method(&self) -> Result<Method<f64>, CliError> {
        let m = build_method(self.method, self.k, self.alpha);
        m.validate().map_err(|e| match e {
            boxfence::Error::Domain { name, value } => CliError::Invalid(format!(
                "invalid --{name} {value}: {}",
                match name {
                    "k" => "must be positive and finite",
                    _ => "must lie strictly between 0 and 1",
                }
            )),
            other => CliError::Invalid(other.to_string()),
        })?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, value_enum, default_value = "json")]
    output: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RenderKind {
    Ascii,
    Svg,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, value_enum, default_value = "ascii")]
    render: RenderKind,
    /// Write the plot here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Characters (ascii) or pixels per panel (svg); defaults 72 and 240
    #[arg(long)]
    width: Option<usize>,
    /// Panel height in pixels (svg)
    #[arg(long, default_value_t = 160)]
    height: usize,
    /// Panels per row (svg)
    #[arg(long)]
    columns: Option<usize>,
    #[arg(long, value_enum, default_value = "horizontal")]
    orientation: Orientation,
    /// Leave the fences out of the plot
    #[arg(long)]
    no_fences: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Sample size including contaminants
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    contaminants: usize,
    #[arg(long, default_value_t = 5.0)]
    c_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    c_sd: f64,
    #[arg(long, default_value_t = DEFAULT_CONTAMINATION_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "tukey,chauvenet,holm,bh"
    )]
    methods: Vec<MethodName>,
    /// Fence multiplier for tukey
    #[arg(long, default_value_t = 1.5)]
    k: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hinges")]
    convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CompareOutput {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONTAMINATION_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hinges")]
    convention: ConventionArg,
    #[arg(long, value_delimiter = ',', default_values_t = COMPARISON_SIZES)]
    sizes: Vec<usize>,
    /// Also write an SVG grid of the first replicate to this path
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    output: CompareOutput,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<boxfence::Error> for CliError {
    fn from(e: boxfence::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<crate::render::RenderError> for CliError {
    fn from(e: crate::render::RenderError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs the command line in `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit status.
pub fn run_cli<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    // Commands write into buffers so they can run inside a thread pool.
    let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
    let result = match cli.threads {
        Some(0) => Err(CliError::Invalid("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &mut buf_out, &mut buf_err)),
            Err(e) => Err(CliError::Invalid(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(cli.command, &mut buf_out, &mut buf_err),
    };
    let _ = err.write_all(&buf_err);
    let result = result.and_then(|code| write_out(out, &buf_out).map(|_| code));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32, CliError> {
    match command {
        Command::Detect(a) => detect(a, out, err),
        Command::Plot(a) => plot(a, out, err),
        Command::Simulate(a) => simulate(a, out),
        Command::Compare(a) => compare(a, out),
    }
}

type Analyzed = (Option<String>, Result<BoxplotStats<f64>, boxfence::Error>);

fn load_and_analyze(
    data: &DataArgs,
    method: Method<f64>,
    convention: Convention,
) -> Result<Vec<Analyzed>, CliError> {
    let groups = parse_path(
        &data.input,
        data.format,
        data.column.as_deref(),
        data.group_column.as_deref(),
    )?;
    let labels: Vec<Option<String>> = groups.iter().map(|g| g.label.clone()).collect();
    let pairs: Vec<(String, _)> = groups
        .into_iter()
        .map(|DataGroup { label, sample }| (label.unwrap_or_default(), sample))
        .collect();
    let analyzed = analyze_groups(&pairs, method, convention);
    if let ([None], [g]) = (labels.as_slice(), analyzed.as_slice()) {
        if let Err(e) = &g.stats {
            return Err(CliError::Invalid(e.to_string()));
        }
    }
    Ok(labels
        .into_iter()
        .zip(analyzed.into_iter().map(|g| g.stats))
        .collect())
}

fn detect(a: DetectArgs, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32, CliError> {
    let method = a.rule.method()?;
    let convention = a.rule.convention.into();
    let analyzed = load_and_analyze(&a.data, method, convention)?;
    let mut failed = false;
    let entries: Vec<Entry> = analyzed
        .into_iter()
        .map(|(label, stats)| match stats {
            Ok(stats) => Entry::Report(Box::new(Report::new(label, &stats, convention))),
            Err(e) => {
                failed = true;
                let group = label.unwrap_or_default();
                let _ = writeln!(err, "error: group '{group}': {e}");
                Entry::Failure(GroupFailure {
                    group,
                    error: e.to_string(),
                })
            }
        })
        .collect();
    let text = match a.output {
        OutputFormat::Json => to_json(&entries),
        OutputFormat::Csv => to_csv(&entries),
        OutputFormat::Table => to_table(&entries),
    };
    out.extend_from_slice(text.as_bytes());
    Ok(i32::from(failed))
}

fn plot(a: PlotArgs, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32, CliError> {
    let method = a.rule.method()?;
    let analyzed = load_and_analyze(&a.data, method, a.rule.convention.into())?;
    let mut ok = Vec::with_capacity(analyzed.len());
    let mut failed = false;
    for (label, stats) in analyzed {
        let label = label.unwrap_or_default();
        match stats {
            Ok(s) => ok.push((label, s)),
            Err(e) => {
                failed = true;
                let _ = writeln!(err, "error: group '{label}': {e}");
            }
        }
    }
    let default_width = match a.render {
        RenderKind::Ascii => RenderSpec::default().width,
        RenderKind::Svg => 240,
    };
    let spec = RenderSpec {
        width: a.width.unwrap_or(default_width),
        height: a.height,
        orientation: a.orientation,
        show_fences: !a.no_fences,
        columns: a.columns,
    };
    let text = match a.render {
        RenderKind::Svg => render_svg(&ok, &spec)?,
        RenderKind::Ascii => {
            let mut text = String::new();
            for (label, stats) in &ok {
                if !label.is_empty() {
                    text.push_str(label);
                    text.push('\n');
                }
                text.push_str(&render_ascii(stats, &spec)?);
            }
            text
        }
    };
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => out.extend_from_slice(text.as_bytes()),
    }
    Ok(i32::from(failed))
}

fn simulate(a: SimulateArgs, out: &mut Vec<u8>) -> Result<i32, CliError> {
    let sc = Scenario {
        n: a.n,
        contaminant_count: a.contaminants,
        contaminant_mean: a.c_mean,
        contaminant_sd: a.c_sd,
        null_mean: 0.0,
        null_sd: 1.0,
        replicates: a.replicates,
        seed: a.seed,
    };
    let methods: Vec<Method<f64>> = a
        .methods
        .iter()
        .map(|&m| build_method(m, a.k, a.alpha))
        .collect();
    let result = run(&sc, &methods, a.convention.into())?;
    let mut text = serde_json::to_string_pretty(&result).expect("results serialize");
    text.push('\n');
    out.extend_from_slice(text.as_bytes());
    Ok(0)
}

fn comparison_table(results: &[SimResult]) -> String {
    use std::fmt::Write as _;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:>7}  {:<10} {:>12} {:>12} {:>12}",
        "n", "method", "true", "false", "total"
    );
    for r in results {
        for m in &r.methods {
            let _ = writeln!(
                t,
                "{:>7}  {:<10} {:>12} {:>12} {:>12}",
                r.scenario.n,
                m.method.name(),
                fmt_sig(m.mean_true_flagged, 6),
                fmt_sig(m.mean_false_flagged, 6),
                fmt_sig(m.mean_flagged_total, 6)
            );
        }
    }
    t
}

fn compare(a: CompareArgs, out: &mut Vec<u8>) -> Result<i32, CliError> {
    let methods = boxfence::standard_methods(a.alpha);
    let convention = a.convention.into();
    let results = run_grid(&a.sizes, a.replicates, a.seed, &methods, convention)?;
    if let Some(path) = &a.svg {
        let mut panels = Vec::with_capacity(a.sizes.len() * methods.len());
        for &n in &a.sizes {
            let sc = Scenario::contamination(n, a.seed).with_replicates(a.replicates);
            let sample = generate(&sc, 0)?.sample;
            for &m in &methods {
                panels.push((
                    format!("{} n={n}", m.name()),
                    analyze(&sample, m, convention)?,
                ));
            }
        }
        let spec = RenderSpec {
            width: 240,
            columns: Some(methods.len()),
            ..RenderSpec::default()
        };
        write_file(path, &render_svg(&panels, &spec)?)?;
    }
    let text = match a.output {
        CompareOutput::Table => {
            let mut t = format!(
                "seed {}, replicates {}, alpha {}, convention {}\n",
                a.seed,
                a.replicates,
                fmt_sig(a.alpha, 6),
                Convention::from(a.convention).name()
            );
            t.push_str(&comparison_table(&results));
            t
        }
        CompareOutput::Json => {
            let mut s = serde_json::to_string_pretty(&results).expect("results serialize");
            s.push('\n');
            s
        }
    };
    out.extend_from_slice(text.as_bytes());
    Ok(0)
}
