//! Command-line driver: density reports, bound-curve tables, wrapped-code
//! construction, jamming verdicts, enumeration classification, and the
//! catalog optimality experiment.
//!
//! Outputs are deterministic functions of the config: no timestamps, no
//! unseeded randomness, floats printed with 12 significant digits. Exit
//! codes: 0 success, 1 domain error, 2 usage or parse error, 3 budget
//! exhaustion.

use clap::{Args, Parser, Subcommand, ValueEnum};
use spherecode::catalog::{catalog_load, default_catalog, Catalog, CatalogError};
use spherecode::enumeration::budget_for_level;
use spherecode::experiment::{
    classify_dimension_multiplicity, opt_experiment, ExperimentError, OptKind, OracleChoice,
    DEFAULT_ALLOWANCE, DEFAULT_STABILITY,
};
use spherecode::geom::{code_density, min_angle_of_points_parallel, GeomError};
use spherecode::jamming::{jam_test, perturbation_probe, JamError, DEFAULT_CONTACT_TOL};
use spherecode::oracle::ClassifierError;
use spherecode::packings::{center_density, parse_packing, PackingError};
use spherecode::params::{kl_envelope, rankin_bound, ParamError};
use spherecode::serial::{canonical_serialization, parse_code, SerialError};
use spherecode::wrap::{
    make_schedule, wrap_packing, wrap_packing_unbuffered, WrapError, WrapSchedule,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the oracle score cache directory; the
/// --cache-dir flag overrides it.
const ORACLE_CACHE_ENV: &str = "SPHERECODE_ORACLE_CACHE";

#[derive(Parser)]
#[command(name = "spherecode", version, about = "sphere packings, spherical codes, and wraps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density report for a packing file.
    Density(DensityArgs),
    /// Bound-curve table over an angle range.
    Bounds(BoundsArgs),
    /// Wrap a line or plane packing onto the sphere one dimension up.
    Wrap(WrapArgs),
    /// Jamming verdict for a spherical code file.
    Jam(JamArgs),
    /// Classify enumerated codes by dimension multiplicity per cell.
    Classify(ClassifyArgs),
    /// Catalog optimality experiment over packing dimensions.
    Opt(OptArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DensityArgs {
    /// Packing file (text format, see README).
    input: PathBuf,
    /// Also report the exact center density where representable.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// First angle, radians.
    #[arg(long)]
    from: f64,
    /// Last angle, radians (inclusive).
    #[arg(long)]
    to: f64,
    /// Grid step, radians (must be positive).
    #[arg(long)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WrapArgs {
    /// Packing file of dimension 1 or 2.
    input: PathBuf,
    /// Packing radius in (0, 0.5); the code separation target is 2*asin(d/2).
    #[arg(long)]
    d: f64,
    /// Override the automatic band count.
    #[arg(long)]
    bands: Option<usize>,
    /// Disable the seam buffers (negative control; voids the guarantee).
    #[arg(long)]
    no_buffer: bool,
    /// Threads for the minimum-angle scan.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JamArgs {
    /// Code file (text format, see README).
    input: PathBuf,
    /// Contact tolerance in radians.
    #[arg(long, default_value_t = DEFAULT_CONTACT_TOL)]
    tol: f64,
    /// Run the random perturbation probe with this many trials.
    #[arg(long, requires = "seed")]
    probe_trials: Option<u64>,
    /// Perturbation magnitude for the probe.
    #[arg(long, default_value_t = 1e-3)]
    probe_step: f64,
    /// Seed for the probe; required whenever the probe runs.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Enumeration budget (number of codes).
    #[arg(long, default_value_t = 120)]
    budget: usize,
    /// Classifier steps.
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// Complexity-allowance constant.
    #[arg(long, default_value_t = DEFAULT_ALLOWANCE)]
    c: f64,
    /// Steps a candidate must survive to be reported infinite.
    #[arg(long, default_value_t = DEFAULT_STABILITY)]
    stability: usize,
    /// Witness-search order.
    #[arg(long, value_enum, default_value = "structural")]
    oracle: OracleArg,
    /// Compression-score cache directory (overrides SPHERECODE_ORACLE_CACHE).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Write the audit log (JSON lines) here.
    #[arg(long)]
    audit: Option<PathBuf>,
    /// JSON config file; values present in it override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Structural,
    Compression,
}

#[derive(Args)]
struct OptArgs {
    /// Packing class: latt, per, per-le (needs --max-size), per-f (needs --f-table).
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Translate bound for kind per-le.
    #[arg(long)]
    max_size: Option<u32>,
    /// JSON file mapping dimension to translate budget, for kind per-f.
    #[arg(long)]
    f_table: Option<PathBuf>,
    /// Packing dimensions to test.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<u32>,
    /// Envelope neighborhood half-width.
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    /// Wrap radii, largest to smallest.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05])]
    schedule: Vec<f64>,
    /// Catalog JSON file; defaults to the built-in catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Enumeration budget for the envelope; the default covers wraps
    /// down to d = 0.05.
    #[arg(long, default_value_t = budget_for_level(130))]
    budget: usize,
    /// JSON config file; values present in it override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Latt,
    Per,
    PerLe,
    PerF,
}

// ---------------------------------------------------------------------------
// Error classification.

enum CliError {
    Usage(String),
    Domain(String),
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
            CliError::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<PackingError> for CliError {
    fn from(e: PackingError) -> Self {
        match e {
            PackingError::Parse { .. } => CliError::Usage(e.to_string()),
            PackingError::EnumerationBudget(_) => CliError::Budget(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<SerialError> for CliError {
    fn from(e: SerialError) -> Self {
        match e {
            SerialError::Parse { .. } => CliError::Usage(e.to_string()),
            SerialError::Geom(g) => g.into(),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<JamError> for CliError {
    fn from(e: JamError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<WrapError> for CliError {
    fn from(e: WrapError) -> Self {
        match e {
            WrapError::Packing(p) => p.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Schema { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::BudgetExhausted { .. }
            | ClassifierError::HorizonBeyondPrefix { .. } => CliError::Budget(e.to_string()),
            ClassifierError::BadHorizons => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Wrap(w) => w.into(),
            ExperimentError::Packing(p) => p.into(),
            ExperimentError::Classifier(c) => c.into(),
            ExperimentError::Catalog(c) => c.into(),
            ExperimentError::Geom(g) => g.into(),
            ExperimentError::Param(p) => p.into(),
            ExperimentError::BadTruncation { .. }
            | ExperimentError::BadSteps { .. }
            | ExperimentError::MissingFTable => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Helpers.

/// 12 significant digits, locale independent.
fn f(x: f64) -> String {
    format!("{x:.11e}")
}

fn header(command: &str, config: &str) -> String {
    format!("# spherecode v{VERSION} {command}\n# config: {config}\n")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Domain(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog, CliError> {
    match path {
        Some(p) => Ok(catalog_load(p)?),
        None => Ok(default_catalog()),
    }
}

fn parse_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_density(a: &DensityArgs) -> Result<String, CliError> {
    let packing = parse_packing(&read(&a.input)?)?;
    let rep = center_density(&packing)?;
    let exact = if a.exact {
        rep.center_density_exact.as_ref().map(|s| s.to_string()).unwrap_or_default()
    } else {
        String::new()
    };
    match a.format {
        Format::Csv => {
            let mut out = header(
                "density",
                &format!("input={} exact={} format=csv", a.input.display(), a.exact),
            );
            out.push_str("min_distance,covolume,center_density,density,center_density_exact\n");
            writeln!(
                out,
                "{},{},{},{},{exact}",
                f(rep.min_distance),
                f(rep.covolume),
                f(rep.center_density),
                f(rep.density)
            )
            .unwrap();
            Ok(out)
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": {
                    "command": "density",
                    "version": VERSION,
                    "input": a.input.display().to_string(),
                    "exact": a.exact,
                },
                "report": {
                    "min_distance": rep.min_distance,
                    "covolume": rep.covolume,
                    "center_density": rep.center_density,
                    "density": rep.density,
                    "center_density_exact":
                        if exact.is_empty() { serde_json::Value::Null } else { exact.into() },
                },
            });
            Ok(format!("{v:#}\n"))
        }
    }
}

fn cmd_bounds(a: &BoundsArgs) -> Result<String, CliError> {
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(CliError::Usage(format!("step must be positive, got {}", a.step)));
    }
    if !(a.from.is_finite() && a.to.is_finite() && a.from <= a.to) {
        return Err(CliError::Usage(format!(
            "bad range [{}, {}]: need finite from <= to",
            a.from, a.to
        )));
    }
    let mut out = header(
        "bounds",
        &format!("from={} to={} step={}", f(a.from), f(a.to), f(a.step)),
    );
    out.push_str("phi,kl_envelope,rankin_bound\n");
    let mut k = 0u64;
    loop {
        let phi = a.from + k as f64 * a.step;
        if phi > a.to + 1e-12 {
            break;
        }
        let h = kl_envelope(phi).map(f).unwrap_or_default();
        let r = rankin_bound(phi).map(f).unwrap_or_default();
        writeln!(out, "{},{h},{r}", f(phi)).unwrap();
        k += 1;
    }
    Ok(out)
}

fn cmd_wrap(a: &WrapArgs) -> Result<String, CliError> {
    let packing = parse_packing(&read(&a.input)?)?;
    let sched = match a.bands {
        Some(b) => {
            if b == 0 {
                return Err(CliError::Usage("band count must be at least 1".into()));
            }
            WrapSchedule::uniform(a.d, b)?
        }
        None => make_schedule(a.d)?,
    };
    let mut out = header(
        "wrap",
        &format!(
            "input={} d={} bands={} buffered={} workers={}",
            a.input.display(),
            f(a.d),
            a.bands.map_or("auto".to_string(), |b| b.to_string()),
            !a.no_buffer,
            a.workers
        ),
    );
    writeln!(
        out,
        "# schedule: bands={} max_width={} merit={}",
        sched.n_bands(),
        f(sched.max_width()),
        f(sched.merit())
    )
    .unwrap();
    if a.no_buffer {
        let code = wrap_packing_unbuffered(&packing, &sched)?;
        let min_angle = min_angle_of_points_parallel(code.points(), a.workers)?;
        writeln!(out, "# warning: buffers disabled, separation guarantee void").unwrap();
        writeln!(
            out,
            "# result: points={} min_angle={} density={}",
            code.len(),
            f(min_angle),
            f(code_density(&code)?)
        )
        .unwrap();
        out.push_str(&canonical_serialization(&code));
    } else {
        let wrapped = wrap_packing(&packing, &sched)?;
        let min_angle = min_angle_of_points_parallel(wrapped.code.points(), a.workers)?;
        writeln!(
            out,
            "# result: points={} discarded={} min_angle={} guarantee={} density={}",
            wrapped.code.len(),
            wrapped.discarded,
            f(min_angle),
            f(wrapped.guarantee),
            f(code_density(&wrapped.code)?)
        )
        .unwrap();
        out.push_str(&canonical_serialization(&wrapped.code));
    }
    Ok(out)
}

fn cmd_jam(a: &JamArgs) -> Result<String, CliError> {
    let code = parse_code(&read(&a.input)?)?;
    let verdict = jam_test(&code, a.tol)?;
    let probe = match a.probe_trials {
        None => serde_json::Value::Null,
        Some(trials) => {
            let seed = a.seed.expect("clap enforces --seed with --probe-trials");
            if !(a.probe_step > 0.0) {
                return Err(CliError::Usage(format!(
                    "probe step must be positive, got {}",
                    a.probe_step
                )));
            }
            let improves = perturbation_probe(&code, trials, a.probe_step, seed)?;
            serde_json::json!({
                "trials": trials,
                "step": a.probe_step,
                "seed": seed,
                "improves": improves,
            })
        }
    };
    let v = serde_json::json!({
        "config": {
            "command": "jam",
            "version": VERSION,
            "input": a.input.display().to_string(),
            "tol": a.tol,
        },
        "verdict": serde_json::to_value(&verdict).expect("verdict serializes"),
        "probe": probe,
    });
    Ok(format!("{v:#}\n"))
}

/// Optional overrides for `classify`; file values beat flags.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ClassifyFileConfig {
    budget: Option<usize>,
    steps: Option<usize>,
    c: Option<f64>,
    stability: Option<usize>,
    oracle: Option<String>,
    cache_dir: Option<PathBuf>,
}

fn cmd_classify(a: &ClassifyArgs) -> Result<String, CliError> {
    let file: ClassifyFileConfig = match &a.config {
        Some(p) => parse_json_file(p)?,
        None => ClassifyFileConfig::default(),
    };
    let budget = file.budget.unwrap_or(a.budget);
    let steps = file.steps.unwrap_or(a.steps);
    let c = file.c.unwrap_or(a.c);
    let stability = file.stability.unwrap_or(a.stability);
    let oracle = match file.oracle.as_deref() {
        None => a.oracle,
        Some("structural") => OracleArg::Structural,
        Some("compression") => OracleArg::Compression,
        Some(other) => {
            return Err(CliError::Usage(format!("unknown oracle '{other}' in config file")))
        }
    };
    if !(c > 0.0) {
        return Err(CliError::Usage(format!("allowance constant must be positive, got {c}")));
    }
    let cache = a
        .cache_dir
        .clone()
        .or_else(|| file.cache_dir.clone())
        .or_else(|| std::env::var_os(ORACLE_CACHE_ENV).map(PathBuf::from));
    let oracle_name = match oracle {
        OracleArg::Structural => "structural",
        OracleArg::Compression => "compression",
    };
    let choice = match oracle {
        OracleArg::Structural => OracleChoice::Structural,
        OracleArg::Compression => OracleChoice::Compression(cache.as_deref()),
    };
    let grid = classify_dimension_multiplicity(budget, steps, c, stability, choice)?;
    if let Some(path) = &a.audit {
        std::fs::write(path, grid.state.audit_jsonl())
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    }
    let infinite = grid
        .cells
        .iter()
        .filter(|c| c.label == spherecode::experiment::CellLabel::InfiniteCandidate)
        .count();
    let mut out = header(
        "classify",
        &format!(
            "budget={budget} steps={steps} c={c} stability={stability} oracle={oracle_name}"
        ),
    );
    writeln!(out, "# cells={} infinite-candidates={infinite}", grid.cells.len()).unwrap();
    out.push_str(&grid.csv());
    Ok(out)
}

/// Optional overrides for `opt`; file values beat flags.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptFileConfig {
    kind: Option<String>,
    max_size: Option<u32>,
    f_table: Option<PathBuf>,
    dims: Option<Vec<u32>>,
    eps: Option<f64>,
    schedule: Option<Vec<f64>>,
    catalog: Option<PathBuf>,
    budget: Option<usize>,
}

fn cmd_opt(a: &OptArgs) -> Result<String, CliError> {
    let file: OptFileConfig = match &a.config {
        Some(p) => parse_json_file(p)?,
        None => OptFileConfig::default(),
    };
    let kind_arg = match file.kind.as_deref() {
        None => a.kind,
        Some("latt") => KindArg::Latt,
        Some("per") => KindArg::Per,
        Some("per-le") => KindArg::PerLe,
        Some("per-f") => KindArg::PerF,
        Some(other) => {
            return Err(CliError::Usage(format!("unknown kind '{other}' in config file")))
        }
    };
    let max_size = file.max_size.or(a.max_size);
    let f_table_path = file.f_table.clone().or_else(|| a.f_table.clone());
    let dims = file.dims.clone().unwrap_or_else(|| a.dims.clone());
    let eps = file.eps.unwrap_or(a.eps);
    let schedule = file.schedule.clone().unwrap_or_else(|| a.schedule.clone());
    let catalog_path = file.catalog.clone().or_else(|| a.catalog.clone());
    let budget = file.budget.unwrap_or(a.budget);

    if dims.is_empty() {
        return Err(CliError::Usage("at least one dimension is required".into()));
    }
    if schedule.is_empty() {
        return Err(CliError::Usage("schedule must be nonempty".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::Usage(format!("eps must be positive, got {eps}")));
    }
    let kind = match kind_arg {
        KindArg::Latt => OptKind::Lattice,
        KindArg::Per => OptKind::Per,
        KindArg::PerLe => match max_size {
            Some(n) if n >= 1 => OptKind::PerAtMost(n),
            Some(0) => return Err(CliError::Usage("max-size must be at least 1".into())),
            _ => return Err(CliError::Usage("kind per-le requires --max-size".into())),
        },
        KindArg::PerF => OptKind::PerF,
    };
    let f_table: Option<BTreeMap<u32, u32>> = match (&kind, &f_table_path) {
        (OptKind::PerF, None) => {
            return Err(CliError::Usage("kind per-f requires --f-table".into()))
        }
        (OptKind::PerF, Some(path)) => {
            let raw: BTreeMap<String, u32> = parse_json_file(path)?;
            let mut table = BTreeMap::new();
            for (k, v) in raw {
                let dim: u32 = k.parse().map_err(|_| {
                    CliError::Usage(format!("{}: bad dimension key '{k}'", path.display()))
                })?;
                table.insert(dim, v);
            }
            Some(table)
        }
        _ => None,
    };
    let catalog = load_catalog(catalog_path.as_deref())?;
    let mut grid = spherecode::params::ParamGrid::new();
    spherecode::experiment::record_enumeration(budget, &mut grid);
    let report = opt_experiment(
        kind,
        &dims,
        eps,
        &schedule,
        &catalog,
        &grid,
        f_table.as_ref(),
    )?;
    let v = serde_json::json!({
        "config": {
            "command": "opt",
            "version": VERSION,
            "budget": budget,
            "dims": dims,
            "catalog": catalog_path
                .as_ref()
                .map_or("builtin".to_string(), |p| p.display().to_string()),
        },
        "report": serde_json::to_value(&report).expect("report serializes"),
    });
    Ok(format!("{v:#}\n"))
}

fn run(cli: &Cli) -> Result<(String, Option<&Path>), CliError> {
    match &cli.command {
        Command::Density(a) => Ok((cmd_density(a)?, a.out.as_deref())),
        Command::Bounds(a) => Ok((cmd_bounds(a)?, a.out.as_deref())),
        Command::Wrap(a) => Ok((cmd_wrap(a)?, a.out.as_deref())),
        Command::Jam(a) => Ok((cmd_jam(a)?, a.out.as_deref())),
        Command::Classify(a) => Ok((cmd_classify(a)?, a.out.as_deref())),
        Command::Opt(a) => Ok((cmd_opt(a)?, a.out.as_deref())),
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, out)) => match emit(out, &text) {
            Ok(()) => std::process::ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}", e.message());
                std::process::ExitCode::from(e.exit_code())
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
