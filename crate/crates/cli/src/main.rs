use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fiberprop::analysis::{convergence_order, power_spectrum};
use fiberprop::benchmarks::{self, convergence_study, gamma_zero_recovery, simulate, LadderPlan, Report, RunOutput};
use fiberprop::propagator::Diagnostic;
use fiberprop::{parse_config, ComplexEnvelope, Error, RunSpec};

#[derive(Parser)]
#[command(name = "fiberprop", version, about = "Split-step Fourier simulation of ultra-short fiber pulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the pulses of a config file and write CSV output.
    Run {
        config: PathBuf,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a refinement ladder and fit the convergence order.
    Convergence {
        config: PathBuf,
        /// Points of the coarsest rung (defaults to the config's grid).
        #[arg(long)]
        n_half: Option<usize>,
        /// Step of the coarsest rung in m (defaults to the config's step).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 4)]
        rungs: u32,
        /// Refinements of the reference beyond the coarsest rung.
        #[arg(long)]
        reference_refinements: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the four embedded benchmarks and compare with the
    /// reference values.
    Benchmark {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        #[arg(long)]
        n_half: Option<usize>,
        /// Step in m; the fiber length is kept.
        #[arg(long)]
        h: Option<f64>,
        /// Number of steps; the step size is kept.
        #[arg(long)]
        steps: Option<usize>,
        /// Switch the nonlinearity off and report how well the initial
        /// field is recovered.
        #[arg(long)]
        gamma_zero: bool,
    },
    /// Print the config document of an embedded benchmark.
    Preset {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
    Checks,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checks => 1,
            Failure::Config(_) => 3,
            Failure::Io(_) => 4,
            Failure::Numerical(_) => 5,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Unit { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidMap(_)
            | Error::InvalidLadder(_)
            | Error::TooFewRungs(_)
            | Error::NotNested(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<RunSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text).map_err(|e| match Failure::from(e) {
        Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes through a temporary file so readers never see partial output.
fn write_atomic(path: &Path, body: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, body).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn field_csv(a: &ComplexEnvelope) -> String {
    let mut s = String::from("T_ps,re,im,intensity_W\n");
    for (t, v) in a.grid().times().zip(a.samples()) {
        s += &format!("{},{},{},{}\n", num(t), num(v.re), num(v.im), num(v.norm_sqr()));
    }
    s
}

fn spectrum_csv(a: &ComplexEnvelope, lambda0: Option<f64>) -> String {
    let mut s = String::from("freq_offset_THz,wavelength_nm,power,power_norm\n");
    for x in power_spectrum(a, lambda0) {
        let wl = x.wavelength_nm.map(num).unwrap_or_default();
        s += &format!("{},{},{},{}\n", num(x.freq_offset_thz), wl, num(x.power), num(x.power_norm));
    }
    s
}

fn diagnostics_csv(d: &[Diagnostic]) -> String {
    let mut s = String::from("z_m,peak_W,energy_Wps,substeps_k\n");
    for r in d {
        s += &format!("{},{},{},{}\n", num(r.z), num(r.peak_power), num(r.energy), r.substeps);
    }
    s
}

fn write_run(dir: &Path, spec: &RunSpec, out: &RunOutput) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (k, field) in out.fields.iter().enumerate() {
        let n = k + 1;
        write_atomic(&dir.join(format!("field{n}.csv")), &field_csv(field))?;
        write_atomic(&dir.join(format!("spectrum{n}.csv")), &spectrum_csv(field, spec.fields[k].pulse.wavelength))?;
        write_atomic(&dir.join(format!("diagnostics{n}.csv")), &diagnostics_csv(&out.diagnostics[k]))?;
    }
    Ok(())
}

fn output_dir(flag: Option<PathBuf>, spec: &RunSpec) -> PathBuf {
    flag.or_else(|| spec.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let spec = load(config)?;
    log::info!("{} step(s) of {} m on {} points", spec.m_steps, spec.h, spec.grid.len());
    let result = simulate(&spec)?;
    let dir = output_dir(out, &spec);
    write_run(&dir, &spec, &result)?;
    println!("wrote {} field(s) to {}", result.fields.len(), dir.display());
    Ok(())
}

fn convergence(
    config: &Path,
    n_half: Option<usize>,
    h: Option<f64>,
    rungs: u32,
    reference_refinements: Option<u32>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let spec = load(config)?;
    let n = n_half.unwrap_or(spec.grid.n_half());
    let h = h.unwrap_or(spec.h);
    let plan = LadderPlan::new(&spec, n, h, rungs, reference_refinements.unwrap_or(rungs))?;
    let ladders = convergence_study(&spec, &plan)?;
    let mut csv = String::from("field,n_half,h_m,m_steps,e_inf_W,fitted_order\n");
    for (k, ladder) in ladders.iter().enumerate() {
        let order = convergence_order(ladder).ok();
        let shown = order.map_or("n/a".to_string(), |o| format!("{o:.4}"));
        println!("field {}: fitted order {shown}", k + 1);
        for r in &ladder.rungs {
            let res = r.resolution;
            println!("  N = {:>6}  h = {:>10} m  E_inf = {:.6e} W", res.n_half, res.h, r.e_inf);
            csv += &format!(
                "{},{},{},{},{},{}\n",
                k + 1,
                res.n_half,
                num(res.h),
                res.m_steps,
                num(r.e_inf),
                order.map(num).unwrap_or_default()
            );
        }
    }
    let dir = output_dir(out, &spec);
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    write_atomic(&dir.join("convergence.csv"), &csv)?;
    println!("wrote {}", dir.join("convergence.csv").display());
    Ok(())
}

fn benchmark(id: u8, n_half: Option<usize>, h: Option<f64>, steps: Option<usize>, gamma_zero: bool) -> Result<(), Failure> {
    let mut spec = benchmarks::preset(id)?;
    if n_half.is_some() || h.is_some() {
        spec = spec.with_resolution(n_half.unwrap_or(spec.grid.n_half()), h.unwrap_or(spec.h))?;
    }
    if let Some(m) = steps {
        spec = spec.with_steps(m);
    }
    let report = if gamma_zero {
        let err = gamma_zero_recovery(&spec)?;
        let mut r = Report { title: format!("benchmark {id} with gamma = 0"), ..Default::default() };
        r.checks.push(benchmarks::Check {
            name: "max-norm relative recovery error".into(),
            value: err,
            expected: "< 1e-8 (dispersion-managed lines only)".into(),
            pass: err < 1e-8,
        });
        r
    } else {
        benchmarks::run_benchmark(id, &spec)?
    };
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn preset(id: u8) -> Result<(), Failure> {
    let text = benchmarks::preset_text(id).ok_or_else(|| Failure::Config(format!("no benchmark {id}")))?;
    io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Convergence { config, n_half, h, rungs, reference_refinements, out } => {
            convergence(&config, n_half, h, rungs, reference_refinements, out)
        }
        Command::Benchmark { id, n_half, h, steps, gamma_zero } => benchmark(id, n_half, h, steps, gamma_zero),
        Command::Preset { id } => preset(id),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("config error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical error: {m}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
                Failure::Checks => eprintln!("one or more checks failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
