use crate::render::{complex_line, real_plane, render_field, ColorMode, Image, Thresholds};
use clap::{Args, Parser, Subcommand, ValueEnum};
use henon_map::{HenonMap, MapSpec};
use numeric_core::{c, Complex, EntireExpr, C2};
use orbit_engine::{classify, psh_probe, with_workers, ClassifyParams, EscapeClass, SliceGrid};
use serde::Serialize;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Overrides the rayon worker count when `--workers` is not given.
pub const WORKERS_ENV: &str = "HENON_WORKERS";

const SUBCOMMANDS: [&str; 9] =
    ["orbit", "fixpoints", "baker-verify", "baker-psi", "psh-probe", "wander-escape", "runge-demo", "oscillate", "render"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Failed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "henon", version, about = "Transcendental Hénon map workbench")]
pub struct Cli {
    /// TOML file; the table named after the subcommand supplies missing flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Manifest location for commands that write no other file
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Worker threads (default: $HENON_WORKERS, then all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Iterate one point and classify its orbit
    Orbit(OrbitArgs),
    /// Fixed points or period-2 points of a standard-form map
    Fixpoints(FixArgs),
    /// Invariance (and optionally drift) of the regions R_α
    BakerVerify(BakerVerifyArgs),
    /// The conjugacy ψ at one point, or checked on random points of R_α
    BakerPsi(BakerPsiArgs),
    /// u_n = −Re(z_n)/n on a slice, as CSV
    PshProbe(PshArgs),
    /// Constants, basins and boundary growth of the wandering-domain map
    WanderEscape(WanderArgs),
    /// Polynomial approximation demos
    RungeDemo(RungeArgs),
    /// Rounds of the oscillating-orbit construction
    Oscillate(OscArgs),
    /// Render a slice to binary PPM
    Render(RenderArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapName {
    Baker,
    /// `G = F − (1, 1)` of the wandering-domain construction
    Wander,
    Custom,
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value_t = MapName::Baker)]
    pub map: MapName,
    /// `f` for `--map custom`, e.g. "exp(-z) + 2*z"
    #[arg(long)]
    pub f: Option<String>,
    /// standard or alternative
    #[arg(long, default_value = "standard")]
    pub form: String,
    /// δ of the standard form (custom default 1, wander default 0.05)
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// a of the alternative form
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
}

impl MapArgs {
    pub fn build(&self) -> Result<HenonMap, CliError> {
        match self.map {
            MapName::Baker => Ok(baker::baker_map()),
            MapName::Wander => {
                let delta = match &self.delta {
                    Some(d) => d.parse::<f64>().map_err(usage)?,
                    None => 0.05,
                };
                let p = wander_escape::make_params(delta).map_err(usage)?;
                Ok(wander_escape::build_maps(&p).1)
            }
            MapName::Custom => {
                let f = self.f.clone().ok_or_else(|| usage("--map custom needs --f"))?;
                let delta = self.delta.clone().or_else(|| (self.form == "standard").then(|| "1".into()));
                MapSpec { form: self.form.clone(), f, delta, a: self.a.clone() }.build().map_err(usage)
            }
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SliceArgs {
    /// `w=C` or `z=C` for a complex line, `real` for the (Re z, Re w) plane
    #[arg(long, default_value = "w=0")]
    pub slice: String,
    /// x0,x1,y0,y1 in the slice coordinates
    #[arg(long, default_value = "-2,8,-5,5", allow_hyphen_values = true)]
    pub window: String,
    /// WIDTHxHEIGHT in pixels
    #[arg(long, default_value = "256x256")]
    pub size: String,
}

impl SliceArgs {
    pub fn grid(&self) -> Result<SliceGrid, CliError> {
        let win = parse_floats(&self.window, 4)?;
        let res = parse_size(&self.size)?;
        let (re, im) = ((win[0], win[1]), (win[2], win[3]));
        let s = self.slice.replace(' ', "");
        let grid = if s == "real" {
            real_plane(re, im, res)
        } else if let Some((lhs, rhs)) = s.split_once('=') {
            let value = parse_constant(rhs)?;
            match lhs {
                "w" => complex_line(true, value, re, im, res),
                "z" => complex_line(false, value, re, im, res),
                _ => return Err(usage(format!("slice must fix `z` or `w`, got `{lhs}`"))),
            }
        } else {
            return Err(usage(format!("bad slice `{}`", self.slice)));
        };
        crate::render::validate_slice(&grid).map_err(usage)?;
        Ok(grid)
    }
}

pub fn parse_constant(text: &str) -> Result<Complex, CliError> {
    let e: EntireExpr = text.parse().map_err(usage)?;
    e.as_const().ok_or_else(|| usage(format!("`{text}` is not a constant")))
}

pub fn parse_floats(text: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("`{t}` is not a number"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(usage(format!("expected {n} comma-separated numbers, got `{text}`")));
    }
    Ok(v)
}

pub fn parse_point(text: &str) -> Result<C2, CliError> {
    let v = parse_floats(text, 4)?;
    Ok(C2::new(c(v[0], v[1]), c(v[2], v[3])))
}

fn parse_size(text: &str) -> Result<(usize, usize), CliError> {
    let (w, h) = text.split_once('x').ok_or_else(|| usage(format!("size must look like 256x256, got `{text}`")))?;
    let p = |t: &str| t.parse::<usize>().map_err(|_| usage(format!("bad size `{text}`")));
    Ok((p(w)?, p(h)?))
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// z_re,z_im,w_re,w_im
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e3)]
    pub r_escape: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r_bound: f64,
    /// CSV of the orbit points
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FixArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub period: u32,
    /// Half-width of the search box in Re z and Im z
    #[arg(long, default_value_t = 20.0)]
    pub half: f64,
    /// Newton starts per side of the box
    #[arg(long, default_value_t = 40)]
    pub starts: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BakerVerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50.0)]
    pub max_modulus: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also check the drift along this many orbits
    #[arg(long, default_value_t = 0)]
    pub orbits: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BakerPsiArgs {
    /// z_re,z_im,w_re,w_im; without it random points of R_α are checked
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 20.0)]
    pub max_modulus: f64,
    /// Largest accepted ‖L(ψ(p)) − ψ(F(p))‖
    #[arg(long, default_value_t = 5e-8)]
    pub max_residual: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PshArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub slice: SliceArgs,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct WanderArgs {
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 100)]
    pub probe_boundaries: usize,
    /// Cocycle length at each probe
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the basins of P_0..P_4 on the real plane through them
    #[arg(long)]
    pub render_basins: Option<PathBuf>,
    /// Pixels per lattice step of that image
    #[arg(long, default_value_t = 64)]
    pub pixels_per_step: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RungeCase {
    /// e^z on D(0, 1) with value and derivative fixed at 0
    Exp,
    /// 0 on D(0, 1) and 1 on D(5, 1)
    TwoDisk,
}

#[derive(Args, Debug)]
pub struct RungeArgs {
    #[arg(long, value_enum, default_value_t = RungeCase::Exp)]
    pub case: RungeCase,
    /// Default 1e-6 for exp and 1e-3 for two-disk
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = runge_approx::DEFAULT_DEGREE_CAP)]
    pub degree_cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OscArgs {
    #[arg(long, default_value_t = 2)]
    pub rounds: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// STATE.json and optionally ORBIT.csv
    #[arg(long, num_args = 1..=2, value_names = ["STATE", "ORBIT"])]
    pub emit: Vec<PathBuf>,
    /// Continue from a saved state instead of starting over
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long, default_value_t = 8.0)]
    pub r_escape: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    EscapeTime,
    EscapeDirection,
    PshValue,
    BasinIndex,
    CocycleGrowth,
}

impl From<ModeArg> for ColorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::EscapeTime => ColorMode::EscapeTime,
            ModeArg::EscapeDirection => ColorMode::EscapeDirection,
            ModeArg::PshValue => ColorMode::PshValue,
            ModeArg::BasinIndex => ColorMode::BasinIndex,
            ModeArg::CocycleGrowth => ColorMode::CocycleGrowth,
        }
    }
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub slice: SliceArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::EscapeTime)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 100)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e3)]
    pub r_escape: f64,
    #[arg(long, default_value_t = 0.2)]
    pub capture_radius: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Appends `--key value` for every entry of the subcommand's table in the
/// `--config` file whose flag is not already on the command line.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let (Some(path), Some(sub)) = (path, strs.iter().skip(1).find(|a| SUBCOMMANDS.contains(&a.as_str()))) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("config {path}: {e}")))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("config {path}: {e}")))?;
    let Some(section) = table.get(sub.as_str()) else {
        return Ok(argv);
    };
    let section = section.as_table().ok_or_else(|| usage(format!("config {path}: `{sub}` must be a table")))?;

    let given = |flag: &str| strs.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")));
    let mut out = argv;
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        if given(&flag) {
            continue;
        }
        let scalar = |v: &toml::Value| match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(x) => Ok(x.to_string()),
            other => Err(usage(format!("config {path}: unsupported value for `{key}`: {other}"))),
        };
        match value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                out.push(flag.into());
                for it in items {
                    out.push(scalar(it)?.into());
                }
            }
            v => {
                out.push(format!("{flag}={}", scalar(v)?).into());
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    args: Vec<String>,
    seed: Option<u64>,
    version: &'static str,
    outputs: Vec<String>,
    passed: bool,
}

/// What a subcommand produced.
struct Outcome {
    report: Value,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
    failure: Option<String>,
}

impl Outcome {
    fn new(report: Value) -> Self {
        Outcome { report, outputs: Vec::new(), seed: None, failure: None }
    }

    fn fail_if(mut self, bad: bool, why: impl Into<String>) -> Self {
        if bad && self.failure.is_none() {
            self.failure = Some(why.into());
        }
        self
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn workers(cli: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = cli {
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{WORKERS_ENV}={v} is not a count"))),
        Err(_) => Ok(0),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn main_with(argv: Vec<OsString>) -> i32 {
    match run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("henon: {e}");
            e.exit_code()
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayHelpOnMissingArgumentOrSubcommand, DisplayVersion};
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                DisplayHelpOnMissingArgumentOrSubcommand => Err(usage(e.render())),
                _ => Err(usage(e.render().to_string().trim_end())),
            };
        }
    };
    let name = SUBCOMMANDS
        .iter()
        .find(|s| argv.iter().any(|a| a.to_str() == Some(**s)))
        .copied()
        .unwrap_or("henon");
    let n = workers(cli.workers)?;
    let outcome = with_workers(n, || dispatch(&cli.command))?;

    let manifest_path = match (&cli.manifest, outcome.outputs.first()) {
        (Some(p), _) => p.clone(),
        (None, Some(first)) => first.with_file_name("manifest.json"),
        (None, None) => PathBuf::from("manifest.json"),
    };
    let manifest = Manifest {
        command: name,
        args: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        seed: outcome.seed,
        version: env!("CARGO_PKG_VERSION"),
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
        passed: outcome.failure.is_none(),
    };
    write_json(&manifest_path, &manifest)?;
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
    // a closed pipe (`henon … | head`) is not an error
    if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    match outcome.failure {
        Some(why) => Err(CliError::Failed(why)),
        None => Ok(()),
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Orbit(a) => orbit(a),
        Command::Fixpoints(a) => fixpoints(a),
        Command::BakerVerify(a) => baker_verify(a),
        Command::BakerPsi(a) => baker_psi(a),
        Command::PshProbe(a) => psh(a),
        Command::WanderEscape(a) => wander(a),
        Command::RungeDemo(a) => runge(a),
        Command::Oscillate(a) => oscillate(a),
        Command::Render(a) => render(a),
    }
}

fn write_points(path: &Path, points: &[C2], radii: Option<&[f64]>) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["n", "z_re", "z_im", "w_re", "w_im"];
    if radii.is_some() {
        header.push("radius");
    }
    let io = |e: csv::Error| CliError::Io(e.into());
    wr.write_record(&header).map_err(io)?;
    for (n, p) in points.iter().enumerate() {
        let mut rec = vec![n.to_string(), p.z.re.to_string(), p.z.im.to_string(), p.w.re.to_string(), p.w.im.to_string()];
        if let Some(r) = radii {
            rec.push(r[n].to_string());
        }
        wr.write_record(&rec).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

fn orbit(a: &OrbitArgs) -> Result<Outcome, CliError> {
    let map = a.map.build()?;
    let p = parse_point(&a.point)?;
    if a.r_bound >= a.r_escape {
        return Err(usage("--r-bound must be below --r-escape"));
    }
    let rec = classify(&map, p, &ClassifyParams { n_max: a.steps, r_escape: a.r_escape, r_bound: a.r_bound, tail_tol: 1e-6 });
    let mut out = Outcome::new(json!({
        "start": p,
        "steps": rec.points.len() - 1,
        "overflow": rec.overflow,
        "last": rec.points.last(),
        "class": rec.class,
    }));
    if let Some(path) = &a.out {
        write_points(path, &rec.points, None)?;
        out.outputs.push(path.clone());
    }
    Ok(out)
}

fn fixpoints(a: &FixArgs) -> Result<Outcome, CliError> {
    let map = a.map.build()?;
    let search = periodic::SearchBox::square(a.half);
    let found = match a.period {
        1 => periodic::fixed_points(&map, &search, a.starts, a.tol),
        _ => periodic::period2_points(&map, &search, a.starts, a.tol),
    }
    .map_err(usage)?;
    let mut worst_det = 0.0f64;
    let mut worst_tr = 0.0f64;
    if a.period == 2 {
        for pp in &found {
            if let Some((d, tr, det)) = periodic::period2_identities(&map, pp) {
                worst_det = worst_det.max((d.det() - det).norm());
                worst_tr = worst_tr.max((d.trace() - tr).norm());
            }
        }
    }
    let worst_return = found.iter().map(|pp| periodic::return_error(&map, pp)).fold(0.0, f64::max);
    let report = json!({
        "period": a.period,
        "count": found.len(),
        "points": found,
        "worst_return_error": worst_return,
        "worst_det_error": worst_det,
        "worst_trace_error": worst_tr,
    });
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    let mut out = Outcome::new(report).fail_if(worst_det >= 1e-8 || worst_tr >= 1e-8, "period-2 identities");
    out.outputs.extend(a.out.clone());
    Ok(out)
}

fn baker_verify(a: &BakerVerifyArgs) -> Result<Outcome, CliError> {
    if !(a.alpha > 0.0) {
        return Err(usage("--alpha must be positive"));
    }
    let inv = baker::invariance_check(a.alpha, a.max_modulus, a.samples, a.seed);
    let drift = (a.orbits > 0).then(|| baker::drift_check(a.alpha, a.max_modulus, a.orbits, a.steps, a.seed));
    let report = json!({
        "alpha": a.alpha,
        "samples": inv.samples,
        "violations": inv.violations.len(),
        "min_image_slack": inv.min_image_slack,
        "first_violations": &inv.violations[..inv.violations.len().min(10)],
        "drift": drift.as_ref().map(|d| json!({
            "orbits": d.orbits,
            "steps": d.steps,
            "step_violations": d.step_violations,
            "linear_violations": d.linear_violations,
            "min_step_slack": d.min_step_slack,
            "min_linear_slack": d.min_linear_slack,
        })),
    });
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    let drift_bad = drift.as_ref().is_some_and(|d| d.step_violations + d.linear_violations > 0);
    let mut out = Outcome::new(report).fail_if(!inv.violations.is_empty(), "invariance violations").fail_if(drift_bad, "drift violations");
    out.seed = Some(a.seed);
    out.outputs.extend(a.out.clone());
    Ok(out)
}

fn baker_psi(a: &BakerPsiArgs) -> Result<Outcome, CliError> {
    let mut out = if let Some(text) = &a.point {
        let p = parse_point(text)?;
        let r = baker::psi(p, a.tol).map_err(usage)?;
        let residual = baker::conjugacy_residual(p, a.tol).ok();
        Outcome::new(json!({ "point": p, "psi": r, "conjugacy_residual": residual }))
    } else {
        if !(a.alpha > 0.0) {
            return Err(usage("--alpha must be positive"));
        }
        let mut rng = baker::stream_rng(a.seed, 0);
        let mut worst = 0.0f64;
        let mut outside = 0usize;
        let mut errors = 0usize;
        for _ in 0..a.samples {
            let p = baker::sample_r_alpha(&mut rng, a.alpha, a.max_modulus);
            match (baker::psi(p, a.tol), baker::conjugacy_residual(p, a.tol)) {
                (Ok(r), Ok(res)) => {
                    worst = worst.max(res);
                    outside += usize::from(!r.in_omega);
                }
                _ => errors += 1,
            }
        }
        let o = Outcome::new(json!({
            "alpha": a.alpha,
            "samples": a.samples,
            "max_residual": worst,
            "outside_omega": outside,
            "errors": errors,
        }));
        let mut o = o.fail_if(worst >= a.max_residual || outside > 0 || errors > 0, "conjugacy");
        o.seed = Some(a.seed);
        o
    };
    if let Some(path) = &a.out {
        write_json(path, &out.report)?;
        out.outputs.push(path.clone());
    }
    Ok(out)
}

fn psh(a: &PshArgs) -> Result<Outcome, CliError> {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let map = a.map.build()?;
    let grid = a.slice.grid()?;
    let field = psh_probe(&map, &grid, a.n);
    field.write_csv(&grid, create(&a.out)?).map_err(|e| CliError::Io(e.into()))?;
    let finite: Vec<f64> = field.values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut out = Outcome::new(json!({
        "n": a.n,
        "nodes": field.values.len(),
        "overflowed": field.overflowed.iter().filter(|&&o| o).count(),
        "min": finite.iter().copied().fold(f64::INFINITY, f64::min),
        "max": finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }));
    out.outputs.push(a.out.clone());
    Ok(out)
}

/// The real plane through `P_0, …, P_4`: `u` along `(1, 1)`, `v` along `(1, −1)`.
pub fn basin_slice(pixels_per_step: usize) -> SliceGrid {
    let p0 = wander_escape::lattice_point(0);
    let u = C2::real(1.0, 1.0);
    let v = C2::real(0.5, -0.5);
    SliceGrid {
        origin: p0 - u * 0.5 - v * 0.5,
        axis_u: u,
        axis_v: v,
        extent: (5.0, 1.0),
        resolution: (5 * pixels_per_step, pixels_per_step),
    }
}

fn wander(a: &WanderArgs) -> Result<Outcome, CliError> {
    let params = wander_escape::make_params(a.delta).map_err(usage)?;
    let (_, g) = wander_escape::build_maps(&params);
    if a.steps < 4 {
        return Err(usage("--steps must be at least 4"));
    }
    let f = wander_escape::f_conj(&params);
    let df = f.deriv();
    let lattice: Vec<Value> = (-5..=5)
        .map(|n: i64| {
            let x = c(n as f64, 0.0);
            let p = wander_escape::lattice_point(n);
            json!({
                "n": n,
                "f_error": (f.eval(x) - c(n as f64 + 1.0, 0.0)).norm(),
                "deriv": df.eval(x).norm(),
                "g_error": (g.apply(p) - p).norm(),
            })
        })
        .collect();
    let interior = wander_escape::fitted_rate(&wander_escape::log_cocycle_norms(&g, wander_escape::lattice_point(0), a.steps), a.steps / 2);
    let bound = a.delta.sqrt().ln() + 0.05;
    let probes = wander_escape::random_probes(&params, a.probe_boundaries, a.steps, a.seed);
    let mut rows = Vec::new();
    let (mut failed, mut misordered) = (0usize, 0usize);
    for r in &probes {
        match r {
            Ok(r) => {
                misordered += usize::from(r.rho <= interior);
                failed += usize::from(r.rho <= 0.0);
                rows.push(json!({ "basin_in": r.basin_in, "basin_out": r.basin_out, "bracket": r.bracket, "rho": r.rho }));
            }
            Err(e) => {
                failed += 1;
                rows.push(json!({ "error": e.to_string() }));
            }
        }
    }
    let report = json!({
        "delta": a.delta,
        "lambda": params.lambda,
        "alpha_crit": params.alpha_crit,
        "lattice": lattice,
        "interior_rho": interior,
        "interior_bound": bound,
        "probes": rows,
        "failed_probes": failed,
        "misorderings": misordered,
    });
    let mut out = Outcome::new(report.clone())
        .fail_if(interior > bound, "interior growth rate above log √δ + 0.05")
        .fail_if(failed > 0, "boundary probes without positive growth")
        .fail_if(misordered > 0, "misordered probes");
    out.seed = Some(a.seed);
    if let Some(path) = &a.out {
        write_json(path, &report)?;
        out.outputs.push(path.clone());
    }
    if let Some(path) = &a.render_basins {
        let grid = basin_slice(a.pixels_per_step.max(16));
        let field = render_field(&g, &grid, ColorMode::BasinIndex, 400, &Thresholds::default()).map_err(usage)?;
        Image::from_field(&field).write_ppm(create(path)?)?;
        out.outputs.push(path.clone());
    }
    Ok(out)
}

fn runge(a: &RungeArgs) -> Result<Outcome, CliError> {
    use runge_approx::{approximate, validate, DiskTarget, InterpCondition};
    let (disks, conds, eps) = match a.case {
        RungeCase::Exp => (
            vec![DiskTarget::function(c(0.0, 0.0), 1.0, EntireExpr::exp(EntireExpr::var()))],
            vec![InterpCondition::with_deriv(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0))],
            a.eps.unwrap_or(1e-6),
        ),
        RungeCase::TwoDisk => (
            vec![DiskTarget::constant(c(0.0, 0.0), 1.0, c(0.0, 0.0)), DiskTarget::constant(c(5.0, 0.0), 1.0, c(1.0, 0.0))],
            vec![],
            a.eps.unwrap_or(1e-3),
        ),
    };
    let p = approximate(&disks, &conds, eps, a.degree_cap).map_err(|e| CliError::Failed(e.to_string()))?;
    let v = validate(&p, &disks, &conds);
    let report = json!({
        "case": format!("{:?}", a.case).to_lowercase(),
        "eps": eps,
        "degree": p.degree,
        "sup_error": p.sup_error,
        "conditions_residual": p.conditions_residual,
        "validation": v,
        "coefficients": p.coefficients,
    });
    let mut out = Outcome::new(report.clone())
        .fail_if(v.sup_error > eps, "validation above ε")
        .fail_if(p.conditions_residual > runge_approx::CONDITION_TOL, "interpolation conditions");
    if let Some(path) = &a.out {
        write_json(path, &report)?;
        out.outputs.push(path.clone());
    }
    Ok(out)
}

fn oscillate(a: &OscArgs) -> Result<Outcome, CliError> {
    use oscillate::{initial_state, round, verify_round, ConstructionState, OscParams};
    let mut state = match &a.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let s: ConstructionState = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if s.params.seed != a.seed {
                return Err(usage(format!("saved state has seed {}, not {}", s.params.seed, a.seed)));
            }
            s
        }
        None => initial_state(&OscParams { seed: a.seed, ..OscParams::default() }),
    };
    let mut reports = Vec::new();
    let mut error = None;
    while state.round < a.rounds {
        match round(&state) {
            Ok(next) => {
                state = next;
                reports.push(verify_round(&state));
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let map = state.map();
    let class = classify(
        &map,
        state.orbit[0],
        &ClassifyParams { n_max: state.n_k(), r_escape: a.r_escape, r_bound: a.r_bound, tail_tol: 1e-6 },
    )
    .class;
    let oscillating = matches!(class, EscapeClass::Oscillating { .. });
    let all_passed = reports.iter().all(|r| r.all_passed());
    let report = json!({
        "rounds": state.round,
        "requested": a.rounds,
        "orbit_length": state.orbit.len(),
        "reports": reports,
        "class": class,
        "error": error,
    });
    let mut out = Outcome::new(report)
        .fail_if(error.is_some(), format!("round {} did not complete", state.round + 1))
        .fail_if(!all_passed, "round verification")
        .fail_if(state.round >= 2 && !oscillating, "P_0 does not oscillate");
    out.seed = Some(a.seed);
    if let Some(path) = a.emit.first() {
        write_json(path, &state)?;
        out.outputs.push(path.clone());
    }
    if let Some(path) = a.emit.get(1) {
        write_points(path, &state.orbit, Some(&state.radii))?;
        out.outputs.push(path.clone());
    }
    Ok(out)
}

fn render(a: &RenderArgs) -> Result<Outcome, CliError> {
    let map = a.map.build()?;
    let grid = a.slice.grid()?;
    let mode: ColorMode = a.mode.into();
    if mode == ColorMode::BasinIndex && !(a.capture_radius > 0.0 && a.capture_radius < 0.25) {
        return Err(usage("--capture-radius must lie in (0, 0.25)"));
    }
    let thr = Thresholds { r_escape: a.r_escape, capture_radius: a.capture_radius };
    let image = crate::render::render(&map, &grid, mode, a.n_max, &thr).map_err(usage)?;
    image.write_ppm(create(&a.out)?)?;
    let mut out = Outcome::new(json!({
        "out": a.out.display().to_string(),
        "width": image.width,
        "height": image.height,
        "mode": mode,
        "n_max": a.n_max,
    }));
    out.outputs.push(a.out.clone());
    Ok(out)
}
