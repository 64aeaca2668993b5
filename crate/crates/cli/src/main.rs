use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eckart3_core::check::{run_battery, CheckOptions, CheckReport, Mutation, ToleranceProfile};
use eckart3_core::config::{RunConfig, ScanRange, ScanSettings, SpectrumSettings};
use eckart3_core::hamiltonian::{scan, ScanPoint};
use eckart3_core::internal::InternalCoordsJacobi;
use eckart3_core::spectral::{
    compute_spectrum, eckart_grid_for, spectrum_equivalence_check, EigenOptions, EquivalenceReport, SpectrumResult,
};
use eckart3_core::{area_diagnostic, build_frame, eckart_residual, eckart_vectors, Error, InternalCoordsEckart};
use serde::Serialize;

/// Largest relative difference accepted by the spectrum comparison mode.
const EQUIVALENCE_TOLERANCE: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "eckart3",
    version,
    about = "Eckart frame, Hamiltonian coefficients and J = 0 spectra for three-body systems"
)]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Profile {
    Default,
    Strict,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Fault {
    CoriolisSign,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eckart frame, residual, areas and internal coordinates of the configuration.
    Frame { config: PathBuf },
    /// CSV of Coriolis and rotational coefficients over a Jacobi-variable scan.
    Coeffs {
        config: PathBuf,
        /// start:stop:n for the mass-scaled r1.
        #[arg(long, allow_hyphen_values = true)]
        r1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        cos_theta: Option<String>,
    },
    /// Runs the invariant battery over random configurations.
    Check {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Lowest J = 0 eigenvalues of the vibrational Hamiltonian.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Also compare Jacobi- and Eckart-variable spectra at this rho.
        #[arg(long)]
        compare_rho: Option<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Failed(_) => "check-failed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NoConvergence { .. }) | CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(RunConfig::from_json(&text)?)
}

fn emit(output: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct FrameReport {
    e1: [f64; 3],
    e2: [f64; 3],
    e3: [f64; 3],
    big_f: f64,
    eckart_residual: f64,
    areas: [f64; 2],
    f1: f64,
    f2: f64,
    tau: f64,
    moments: [f64; 2],
}

fn cmd_frame(config: &Path) -> CliResult<String> {
    let cfg = load_config(config)?;
    let eq = cfg.equilibrium_geometry()?;
    let j = cfg
        .configuration_pair()?
        .ok_or_else(|| Error::InvalidConfig("frame needs a \"configuration\" entry".into()))?;
    let f = eckart_vectors(&j, &eq)?;
    let frame = build_frame(&f)?;
    let (a1, a2) = area_diagnostic(&j, &eq, &frame);
    let ic = InternalCoordsEckart::from_vectors(&f);
    Ok(to_json(&FrameReport {
        e1: frame.e1.into(),
        e2: frame.e2.into(),
        e3: frame.e3.into(),
        big_f: frame.big_f,
        eckart_residual: eckart_residual(&frame, &f).norm(),
        areas: [a1, a2],
        f1: ic.f1,
        f2: ic.f2,
        tau: ic.tau,
        moments: [eq.i1, eq.i2],
    }))
}

const HEADER: [&str; 16] =
    ["r1", "r2", "cos_theta", "f1", "f2", "tau", "F", "C13", "C23", "C33", "B3", "I11", "I22", "I12", "I33", "status"];

/// Shortest decimal string that parses back to the same value.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn cmd_coeffs(
    config: &Path,
    r1: &Option<String>,
    r2: &Option<String>,
    cos_theta: &Option<String>,
) -> CliResult<String> {
    let cfg = load_config(config)?;
    let eq = cfg.equilibrium_geometry()?;
    let reference = match cfg.configuration_pair()? {
        Some(j) => InternalCoordsJacobi::from_pair(&j),
        None => InternalCoordsJacobi::from_pair(&eq.as_pair()),
    };
    let base = cfg.scan.clone().unwrap_or(ScanSettings {
        r1: ScanRange::single(reference.r1),
        r2: ScanRange::single(reference.r2),
        cos_theta: ScanRange::single(reference.cos_theta),
    });
    let pick = |flag: &Option<String>, fallback: ScanRange| -> CliResult<ScanRange> {
        match flag {
            Some(s) => Ok(ScanRange::parse(s)?),
            None => {
                fallback.validate()?;
                Ok(fallback)
            }
        }
    };
    let (s1, s2, sc) = (pick(r1, base.r1)?, pick(r2, base.r2)?, pick(cos_theta, base.cos_theta)?);

    let mut points = Vec::with_capacity(s1.n * s2.n * sc.n);
    for a in s1.points() {
        for b in s2.points() {
            for c in sc.points() {
                points.push(InternalCoordsJacobi::new(a, b, c)?);
            }
        }
    }
    let rows = scan(&points, &eq);

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for row in rows {
        let rec: Vec<String> = match row {
            ScanPoint::Regular(r) => vec![
                num(r.jacobi.r1),
                num(r.jacobi.r2),
                num(r.jacobi.cos_theta),
                num(r.eckart.f1),
                num(r.eckart.f2),
                num(r.eckart.tau),
                num(r.big_f),
                num(r.coriolis.c13),
                num(r.coriolis.c23),
                num(r.coriolis.c33),
                num(r.coriolis.b3),
                num(r.tensor.i11),
                num(r.tensor.i22),
                num(r.tensor.i12),
                num(r.tensor.i33),
                "ok".into(),
            ],
            ScanPoint::Singular { jacobi, eckart, .. } => {
                let mut v = vec![num(jacobi.r1), num(jacobi.r2), num(jacobi.cos_theta)];
                match eckart {
                    Some(e) => v.extend([num(e.f1), num(e.f2), num(e.tau), num(e.big_f_sq().sqrt())]),
                    None => v.extend(std::iter::repeat_n(String::new(), 4)),
                }
                v.extend(std::iter::repeat_n(String::new(), 8));
                v.push("singular".into());
                v
            }
        };
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

fn check_text(report: &CheckReport) -> String {
    let mut s = String::new();
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s.push_str(&format!("seed {} n {} profile {:?}\n", report.options.seed, report.options.n, report.options.profile));
    for suite in &report.suites {
        let status = if suite.passed() { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "suite {} {}: {} (cases {}, max residual {:e})\n",
            suite.id,
            suite.name,
            status,
            suite.cases,
            suite.max_residual()
        ));
        for m in &suite.metrics {
            s.push_str(&format!(
                "  {}: max {:e} threshold {:e}{}\n",
                m.name,
                m.max,
                m.threshold,
                if m.passed() { "" } else { "  FAIL" }
            ));
        }
    }
    for suite in report.suites.iter().filter(|s| !s.passed()) {
        for m in suite.metrics.iter().filter(|m| !m.passed()) {
            s.push_str(&format!(
                "worst case {}\n",
                serde_json::to_string(&report.worst_case_json(suite, m)).expect("json")
            ));
        }
    }
    s.push_str(if report.passed() { "result: PASS\n" } else { "result: FAIL\n" });
    s
}

#[derive(Serialize)]
struct SpectrumReport {
    spectrum: SpectrumResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

#[derive(Serialize)]
struct Comparison {
    rho: f64,
    max_relative_difference: f64,
    tolerance: f64,
    jacobi: Vec<f64>,
    eckart: Vec<f64>,
}

impl From<EquivalenceReport> for Comparison {
    fn from(r: EquivalenceReport) -> Self {
        Self {
            rho: r.rho,
            max_relative_difference: r.max_relative_difference,
            tolerance: EQUIVALENCE_TOLERANCE,
            jacobi: r.jacobi.eigenvalues,
            eckart: r.eckart.eigenvalues,
        }
    }
}

fn cmd_spectrum(config: &Path, k: Option<usize>, compare_rho: Option<f64>, seed: u64) -> CliResult<(String, bool)> {
    let cfg = load_config(config)?;
    let grid = cfg.grid.ok_or_else(|| Error::InvalidConfig("spectrum needs a \"grid\" entry".into()))?;
    let pot =
        cfg.potential.clone().ok_or_else(|| Error::InvalidConfig("spectrum needs a \"potential\" entry".into()))?;
    let settings = cfg.spectrum.clone().unwrap_or_default();
    let SpectrumSettings { k: k_cfg, pairing, compare_rho: rho_cfg } = settings;
    let eq = cfg.equilibrium_geometry()?;
    let mut opts = EigenOptions::new(k.unwrap_or(k_cfg));
    opts.seed = seed;
    let spectrum = compute_spectrum(&grid, &pot, (eq.i1, eq.i2), pairing, &opts)?;
    let comparison = match compare_rho.or(rho_cfg) {
        Some(rho) => {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(Error::InvalidInput(format!("compare rho = {rho} must be positive")).into());
            }
            Some(Comparison::from(spectrum_equivalence_check(
                &grid,
                &eckart_grid_for(&grid, rho),
                rho,
                &pot,
                &pot.rescaled(1.0 / rho),
                &opts,
            )?))
        }
        None => None,
    };
    let ok = comparison.as_ref().is_none_or(|c| c.max_relative_difference <= EQUIVALENCE_TOLERANCE);
    Ok((to_json(&SpectrumReport { spectrum, comparison }), ok))
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Frame { config } => emit(&cli.output, &cmd_frame(config)?),
        Command::Coeffs { config, r1, r2, cos_theta } => emit(&cli.output, &cmd_coeffs(config, r1, r2, cos_theta)?),
        Command::Check { n, inject_fault } => {
            let opts = CheckOptions {
                n: *n,
                seed: cli.seed,
                profile: match cli.tolerance_profile {
                    Profile::Default => ToleranceProfile::Default,
                    Profile::Strict => ToleranceProfile::Strict,
                },
                mutation: match inject_fault {
                    Some(Fault::CoriolisSign) => Mutation::CoriolisSign,
                    None => Mutation::None,
                },
            };
            let report = run_battery(&opts);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit(&cli.output, &check_text(&report))?;
            if report.passed() {
                Ok(())
            } else {
                let failing: Vec<String> =
                    report.suites.iter().filter(|s| !s.passed()).map(|s| format!("{} {}", s.id, s.name)).collect();
                Err(CliError::Failed(format!("failing suites: {}", failing.join(", "))))
            }
        }
        Command::Spectrum { config, k, compare_rho } => {
            let (text, ok) = cmd_spectrum(config, *k, *compare_rho, cli.seed)?;
            emit(&cli.output, &text)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Failed("Jacobi and Eckart spectra differ beyond tolerance".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {}", e.kind(), msg);
            ExitCode::from(e.exit_code())
        }
    }
}
