use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flatsec::constants::ConstantsTable;
use flatsec::frame::LatticeKind;
use flatsec::pipeline::{compare, emit_corollary, run, Mode, RunConfig, RunManifest};
use flatsec::Error;

#[derive(Parser)]
#[command(name = "flatsec", version, about = "Flat orthonormal sections on complex projective space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print (and optionally write) the universal density constants.
    Constants {
        #[arg(long, default_value_t = 6)]
        max_m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pipeline.
    Run(RunArgs),
    /// Kernel exactness and decay checks.
    KernelCheck(RunArgs),
    /// Compare two manifests.
    Compare { a: PathBuf, b: PathBuf },
    /// Emit the minimal-sup flat section per degree with its eigen-residual.
    EmitPolys {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 50)]
        eigen_samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeArg {
    Cubic,
    Hex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    ConstantsOnly,
    KernelCheck,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    lattice: Option<LatticeArg>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Radial mesh points per axis.
    #[arg(long)]
    mesh: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> flatsec::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.m {
            c.m = m;
        }
        if let Some(k) = &self.k {
            c.k = k.clone();
        }
        if let Some(l) = self.lattice {
            c.lattice = match l {
                LatticeArg::Cubic => LatticeKind::Cubic,
                LatticeArg::Hex => LatticeKind::Hexagonal,
            };
        }
        if let Some(e) = self.eta {
            c.eta = e;
        }
        if self.beta.is_some() {
            c.beta = self.beta;
        }
        if self.mesh.is_some() {
            c.mesh.radial = self.mesh;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if let Some(mode) = self.mode {
            c.mode = match mode {
                ModeArg::Full => Mode::Full,
                ModeArg::ConstantsOnly => Mode::ConstantsOnly,
                ModeArg::KernelCheck => Mode::KernelCheck,
            };
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

fn report(manifest: &RunManifest) -> ExitCode {
    if let Some(t) = &manifest.constants {
        print_constants(t);
    }
    if !manifest.rows.is_empty() {
        println!(
            "{:>6} {:>6} {:>7} {:>8} {:>8} {:>8} {:>10} {:>9} {:>9}",
            "k", "n_k", "d_k", "ratio", "eta_hat", "|B|", "fk_norm", "max_sup", "bound"
        );
    }
    for r in &manifest.rows {
        println!(
            "{:>6} {:>6} {:>7} {:>8.4} {:>8.4} {:>8.4} {:>10.4} {:>9.4} {:>9.4}",
            r.k, r.n, r.d, r.ratio, r.eta_hat, r.b_norm, r.fk_norm, r.max_sup, r.chain_bound
        );
    }
    for r in &manifest.kernel {
        println!(
            "k = {:>5}  max rel dev {:.3e}  diagonal defect {:.3e}",
            r.k, r.max_rel_dev, r.diag_defect
        );
    }
    for c in manifest.checks().filter(|c| !c.passed) {
        let kind = if c.hard { "HARD" } else { "soft" };
        eprintln!("{kind} check {} failed: {} vs limit {}", c.name, c.value, c.limit);
    }
    ExitCode::from(manifest.outcome.exit_code() as u8)
}

fn print_constants(t: &ConstantsTable) {
    println!("{:>3} {:>10} {:>8} {:>10} {:>8}", "m", "a_m", "beta_m", "alpha_m", "beta'_m");
    for r in &t.rows {
        println!(
            "{:>3} {:>10.6} {:>8.5} {:>10.6} {:>8.5}",
            r.m, r.a_m, r.beta_m, r.alpha_m, r.beta_prime_m
        );
    }
}

fn diagnose(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "configuration",
        Error::Spacing { .. } | Error::InvalidArgument(_) => "lattice validation",
        Error::ChartRejected { .. } | Error::Covering { .. } => "chart",
        Error::Divergence { .. } | Error::NotPositiveDefinite { .. } => "whitening",
        Error::Incompatible(_) => "compare",
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => "io",
        _ => "numerics",
    }
}

fn execute(cli: Cli) -> flatsec::Result<ExitCode> {
    match cli.command {
        Command::Constants { max_m, out } => {
            let t = ConstantsTable::compute(max_m)?;
            print_constants(&t);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                t.write_csv(std::fs::File::create(dir.join("constants.csv"))?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => Ok(report(&run(&args.config()?)?)),
        Command::KernelCheck(args) => {
            let mut c = args.config()?;
            c.mode = Mode::KernelCheck;
            Ok(report(&run(&c)?))
        }
        Command::Compare { a, b } => {
            let r = compare(&RunManifest::from_json_file(&a)?, &RunManifest::from_json_file(&b)?)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(if r.drifts.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::EmitPolys { run, eigen_samples } => {
            let records = emit_corollary(&run.config()?, eigen_samples)?;
            println!("{:>6} {:>10} {:>10} {:>12}", "k", "sup", "ratio", "residual");
            for r in &records {
                println!(
                    "{:>6} {:>10.5} {:>10.5} {:>12.3e}",
                    r.k, r.polynomial.sup, r.polynomial.sphere_ratio, r.eigen.residual
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error ({}): {e}", diagnose(&e));
            ExitCode::from(1)
        }
    }
}
