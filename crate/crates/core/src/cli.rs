//! Command-line front end. Exit codes: 0 success, 1 usage or config error,
//! 2 a check failed.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::svg::{line_plot, Series};
use crate::experiments::{
    conjugation_experiment, divergence_experiment, energy_gap_experiment, ConjugationConfig,
    DivergenceConfig, EnergyGapSpec, ProfileFamily, ResultTable,
};
use crate::generators::recipe::load_generator;
use crate::generators::{Generator, IntegratorConfig, Isotopy, TimeInterp};
use crate::hodge::{split, HarmonicForm, DEFAULT_CLOSED_TOL};
use crate::invariants::{delta, delta_path, flux, norm_infty_sampled};
use crate::metrics::{length, DEFAULT_KAPPA};
use crate::torus::{FieldEnvelope, GridSpec, Interp, OneFormField, Point};

#[derive(Parser, Debug)]
#[command(name = "sympcalc", version, about = "Generator calculus of symplectic isotopies on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hodge-split a closed 1-form given as a field envelope.
    Split {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLOSED_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hofer-like length of a generator.
    Length {
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
    },
    /// Δ at a basepoint.
    Delta {
        #[command(flatten)]
        gen: GeneratorArgs,
        /// `dtheta1`, `dtheta2`, `c1,c2` or a path to a one-form envelope.
        #[arg(long, default_value = "dtheta1")]
        alpha: String,
        #[arg(long, default_value = "0,0")]
        basepoint: String,
        /// Also evaluate the path-integral assembly.
        #[arg(long)]
        path: bool,
    },
    /// Flux class of a generator.
    Flux {
        #[command(flatten)]
        gen: GeneratorArgs,
    },
    /// Sampled ‖·‖^∞ over a harmonic dictionary.
    NormInfty {
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value = "0,0")]
        basepoint: String,
        #[arg(long)]
        perturbation: Option<f64>,
    },
    /// Δ̃ along a shear cutoff family.
    Divergence {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Comma-separated cutoff indices.
        #[arg(long)]
        i: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conjugated lengths against the normality bound.
    Conjugation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One stage of the energy-gap construction.
    EnergyGap {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quick consistency suite.
    Selftest,
}

#[derive(Args, Debug)]
struct GeneratorArgs {
    /// Generator JSON or recipe JSON.
    #[arg(long)]
    generator: PathBuf,
    #[arg(long, default_value_t = 2)]
    substeps: usize,
    #[arg(long, value_enum, default_value_t = InterpArg::Quintic)]
    interp: InterpArg,
    /// Velocity rule between time slices.
    #[arg(long, value_enum, default_value_t = TimeArg::Cubic)]
    time_interp: TimeArg,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON destination; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Reciprocal,
    LogReciprocal,
    Constant,
}

impl From<FamilyArg> for ProfileFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Reciprocal => ProfileFamily::Reciprocal,
            FamilyArg::LogReciprocal => ProfileFamily::LogReciprocal,
            FamilyArg::Constant => ProfileFamily::Constant,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum InterpArg {
    Bilinear,
    Cubic,
    Quintic,
    Fourier,
}

impl From<InterpArg> for Interp {
    fn from(i: InterpArg) -> Self {
        match i {
            InterpArg::Bilinear => Interp::Bilinear,
            InterpArg::Cubic => Interp::Cubic,
            InterpArg::Quintic => Interp::Quintic,
            InterpArg::Fourier => Interp::Fourier,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum TimeArg {
    Linear,
    Cubic,
}

impl From<TimeArg> for TimeInterp {
    fn from(t: TimeArg) -> Self {
        match t {
            TimeArg::Linear => TimeInterp::Linear,
            TimeArg::Cubic => TimeInterp::Cubic,
        }
    }
}

enum Outcome {
    Ok,
    ChecksFailed,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(cli.command) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::ChecksFailed) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("SYMPCALC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_pair(s: &str, what: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|_| Error::Config(format!("{what}: cannot parse {a:?}")))?,
            b.parse().map_err(|_| Error::Config(format!("{what}: cannot parse {b:?}")))?,
        ]),
        _ => Err(Error::Config(format!("{what}: expected two comma-separated numbers, got {s:?}"))),
    }
}

fn load(gen: &GeneratorArgs) -> Result<(Generator, IntegratorConfig)> {
    let g = load_generator(&fs::read_to_string(&gen.generator)?)?;
    Ok((
        g,
        IntegratorConfig {
            substeps: gen.substeps,
            interp: gen.interp.into(),
            time: gen.time_interp.into(),
        },
    ))
}

fn parse_alpha(spec: &str, grid: GridSpec) -> Result<OneFormField> {
    match spec {
        "dtheta1" => Ok(OneFormField::constant(grid, 1.0, 0.0)),
        "dtheta2" => Ok(OneFormField::constant(grid, 0.0, 1.0)),
        s if Path::new(s).exists() => {
            let env: FieldEnvelope = read_json(Path::new(s))?;
            let f = env.into_one_form()?;
            grid.ensure_same(&f.grid())?;
            Ok(f)
        }
        s => {
            let [c1, c2] = parse_pair(s, "alpha")?;
            Ok(HarmonicForm::new(c1, c2).to_field(grid))
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Split { form, tol, out } => {
            let env: FieldEnvelope = read_json(&form)?;
            emit(&split(&env.into_one_form()?, tol)?, out.as_deref())?;
        }
        Command::Length { gen, kappa } => {
            if !(kappa > 0.0) {
                return Err(Error::Config("kappa must be positive".into()));
            }
            let (g, _) = load(&gen)?;
            emit(&length(&g, kappa), None)?;
        }
        Command::Delta { gen, alpha, basepoint, path } => {
            let (g, cfg) = load(&gen)?;
            let alpha = parse_alpha(&alpha, g.grid())?;
            let [a, b] = parse_pair(&basepoint, "basepoint")?;
            let x = Point::new(a, b);
            let iso = Isotopy::new(g, cfg)?;
            let report = delta(&iso, &alpha, x)?;
            if path {
                let p = delta_path(&iso.time_one_map()?, &alpha, x, cfg.interp)?;
                emit(&serde_json::json!({ "delta": report, "delta_path": p }), None)?;
            } else {
                emit(&report, None)?;
            }
        }
        Command::Flux { gen } => {
            let (g, _) = load(&gen)?;
            emit(&flux(&g), None)?;
        }
        Command::NormInfty { gen, directions, basepoint, perturbation } => {
            let (g, cfg) = load(&gen)?;
            let [a, b] = parse_pair(&basepoint, "basepoint")?;
            emit(&norm_infty_sampled(&g, directions, Point::new(a, b), perturbation, cfg)?, None)?;
        }
        Command::Divergence { config, family, i, grid, output } => {
            let mut cfg: DivergenceConfig = match &config {
                Some(p) => read_json(p)?,
                None => {
                    let family = family.ok_or_else(|| Error::Config("divergence needs --config or --family".into()))?;
                    let n = grid.ok_or_else(|| Error::Config("divergence needs --grid".into()))?;
                    DivergenceConfig::new(family.into(), Vec::new(), GridSpec::new(n)?)
                }
            };
            if let Some(f) = family {
                cfg.family = f.into();
            }
            if let Some(n) = grid {
                cfg.grid = GridSpec::new(n)?;
            }
            if let Some(list) = i {
                cfg.i_list = list
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("i: cannot parse {s:?}"))))
                    .collect::<Result<_>>()?;
            }
            let table = divergence_experiment(&cfg)?;
            return write_table(&table, &output, "i", &["delta_tilde", "length"]);
        }
        Command::Conjugation { config, kappa, output } => {
            let mut cfg: ConjugationConfig = read_json(&config)?;
            if let Some(k) = kappa {
                cfg.kappa = k;
            }
            let table = conjugation_experiment(&cfg)?;
            return write_table(&table, &output, "i", &["conjugated_length", "bound"]);
        }
        Command::EnergyGap { config, output } => {
            let spec: EnergyGapSpec = read_json(&config)?;
            let table = energy_gap_experiment(&spec)?;
            return write_table(&table, &output, "k", &["length", "delta_max", "delta_min"]);
        }
        Command::Selftest => return Ok(selftest()),
    }
    Ok(Outcome::Ok)
}

fn write_table(table: &ResultTable, output: &OutputArgs, x: &str, ys: &[&str]) -> Result<Outcome> {
    match &output.out {
        Some(p) => table.write_csv(fs::File::create(p)?)?,
        None => table.write_csv(std::io::stdout().lock())?,
    }
    let json = output.json.clone().or_else(|| output.out.as_ref().map(|p| p.with_extension("json")));
    if let Some(p) = json {
        table.write_json(fs::File::create(p)?)?;
    }
    if let Some(p) = &output.svg {
        let xs = table.column(x).unwrap_or_default();
        let series: Vec<Series> = ys
            .iter()
            .filter_map(|&y| {
                table.column(y).map(|v| Series {
                    label: y,
                    points: xs.iter().copied().zip(v).collect(),
                })
            })
            .collect();
        fs::write(p, line_plot(&table.metadata.experiment, x, &ys.join(", "), &series))?;
    }
    for c in &table.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if table.all_passed() { Outcome::Ok } else { Outcome::ChecksFailed })
}

/// Cheap identities that must hold exactly or to rounding.
fn selftest() -> Outcome {
    let grid = GridSpec::new(16).expect("valid grid");
    let cfg = IntegratorConfig::default();
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let one = crate::torus::ScalarField::constant(grid, 1.0);
    checks.push(("area of the torus", (crate::torus::integrate_scalar(&one) - TAU * TAU).abs() < 1e-12));
    checks.push(("antipodal distance", (crate::torus::torus_distance(Point::new(0.0, 0.0), Point::new(PI, 0.0)) - PI).abs() < 1e-15));
    let s = split(&OneFormField::constant(grid, 0.0, 1.0), DEFAULT_CLOSED_TOL);
    checks.push(("harmonic form splits to itself", s.map(|s| s.harmonic == HarmonicForm::new(0.0, 1.0)).unwrap_or(false)));
    checks.push(("unit coframe norm", (crate::hodge::l2_norm(HarmonicForm::new(0.0, 1.0)) - TAU).abs() < 1e-15));
    let tr = Generator::translation(grid, 2, HarmonicForm::new(0.0, 1.0));
    let moved = Isotopy::new(tr.clone(), cfg).and_then(|iso| iso.flow(crate::torus::Lift::new(0.0, 0.0), 1.0));
    checks.push(("translation flow", moved.map(|p| (p.theta1 - 1.0).abs() < 1e-14).unwrap_or(false)));
    checks.push(("translation length", (length(&tr, 1.0).total - TAU).abs() < 1e-12));
    let f = flux(&tr);
    checks.push(("translation flux", f.c1 == 0.0 && f.c2 == 1.0));
    let zero = Generator::zero(grid, 2);
    let d = Isotopy::new(zero.clone(), cfg).and_then(|iso| delta(&iso, &OneFormField::constant(grid, 1.0, 0.0), Point::new(0.0, 0.0)));
    checks.push(("delta of identity", d.map(|r| r.value == 0.0).unwrap_or(false)));
    checks.push(("zero generator length", length(&zero, 1.0).total == 0.0));

    let mut ok = true;
    for (name, passed) in checks {
        println!("{} {name}", if passed { "PASS" } else { "FAIL" });
        ok &= passed;
    }
    if ok {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    }
}
