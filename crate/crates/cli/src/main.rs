//! CSV-first front end for the quasiprob library.  Every subcommand
//! assembles its complete output in memory before printing, so a failed
//! run never leaves partial rows behind, and identical invocations emit
//! byte-identical text.
//!
//! Exit codes: 0 success, 2 invalid or unphysical input (including
//! regime errors), 3 numerical non-convergence.

use clap::{Args, Parser, Subcommand};
use quasiprob::fock::{make_state, min_wigner, pnd as fock_pnd, PhaseSpec};
use quasiprob::gaussian::{GMatrix, MarginalKind, PhysicalGaussianState};
use quasiprob::photon::{
    full_distribution, l_criterion, mandel_q, moment_ratio_oracle, p_of_i, pnd_closed, regime,
    StatsConfig,
};
use quasiprob::quadrature::{
    fourier_bessel, radial_pnd, verify_hypergeom_moment, verify_laplace_bessel_i0, QuadratureConfig,
};
use quasiprob::specfun::{ln_factorial, AccuracyBudget};
use quasiprob::{Complex64, Error};
use std::fmt::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "quasiprob",
    version,
    about = "Gaussian-state phase-space toolbox"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct StateArgs {
    /// Normal-form scale of the broad quadrature axis
    #[arg(long)]
    alpha: Option<f64>,
    /// Normal-form scale of the narrow quadrature axis
    #[arg(long)]
    beta: Option<f64>,
    /// Raw noise matrix entries "A,B,C" (alternative to --alpha/--beta)
    #[arg(long, value_name = "A,B,C", conflicts_with_all = ["alpha", "beta"])]
    gmatrix: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a state; print class, regime and mean photon number
    Classify(StateArgs),
    /// Photon number distribution as CSV
    Pnd {
        #[command(flatten)]
        state: StateArgs,
        /// Largest n to print
        #[arg(long)]
        nmax: usize,
        /// Add the quadrature-route column and the per-row difference
        #[arg(long)]
        oracle: bool,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Intensity density P(I) as CSV (classical regime only)
    Pofi {
        #[command(flatten)]
        state: StateArgs,
        /// Largest intensity on the grid
        #[arg(long)]
        imax: f64,
        /// Number of grid points (inclusive of 0 and imax)
        #[arg(long)]
        points: usize,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Mandel-type Q: closed form against the moment oracle
    Qparam {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Local-condition scan l(1)..l(lmax) over a beta range, as CSV
    Lscan {
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_max: f64,
        /// Number of grid points (inclusive of both endpoints)
        #[arg(long, default_value_t = 51)]
        steps: usize,
        #[arg(long, default_value_t = 6)]
        lmax: usize,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Fock-superposition witness: Poisson residual and Wigner minimum
    FockDemo {
        /// Coherent amplitude (real)
        #[arg(long)]
        amplitude: f64,
        /// Quadratic phase coefficient
        #[arg(long)]
        gamma: f64,
        /// Wigner search grid points per axis (>= 51), over [-4, 4]^2
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Run the numerical identity suite and print pass/fail per item
    Verify,
}

struct Failure {
    msg: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite(_)
            | Error::NotPositive
            | Error::UncertaintyViolated(_)
            | Error::DistributionValued(_)
            | Error::Marginal(_)
            | Error::VacuumDegenerate
            | Error::BoundaryInconclusive
            | Error::Precondition(_)
            | Error::CutoffExceeded(_) => 2,
            Error::Overflow(_)
            | Error::SeriesNotConverged(_)
            | Error::HypergeomAtUnitArgument
            | Error::QuadratureNotConverged(_)
            | Error::TailNotCertified(_)
            | Error::NegativeProbability { .. }
            | Error::GeneratingCancellation
            | Error::CutoffInsufficient => 3,
        };
        Failure {
            msg: e.to_string(),
            code,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure {
        msg: msg.into(),
        code: 2,
    }
}

impl StateArgs {
    fn build(&self) -> Result<PhysicalGaussianState, Failure> {
        if let Some(raw) = &self.gmatrix {
            let parts: Vec<&str> = raw.split(',').collect();
            if parts.len() != 3 {
                return Err(invalid("--gmatrix expects three comma-separated numbers"));
            }
            let mut v = [0.0f64; 3];
            for (slot, part) in v.iter_mut().zip(&parts) {
                *slot = part
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("--gmatrix entry '{part}' is not a number")))?;
            }
            return Ok(PhysicalGaussianState::validate(GMatrix::new(
                v[0], v[1], v[2],
            ))?);
        }
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Ok(PhysicalGaussianState::from_alpha_beta(a, b)?),
            _ => Err(invalid("provide --alpha and --beta, or --gmatrix")),
        }
    }
}

fn emit(text: &str, output: Option<&std::path::Path>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_classify(args: &StateArgs) -> Result<(), Failure> {
    let s = args.build()?;
    let class = s.classify();
    let mut line = class.kind.to_string();
    match class.marginal {
        MarginalKind::NotMarginal => {}
        MarginalKind::BetaOne => line.push_str(", marginal: classical boundary (β=1)"),
        MarginalKind::SqueezedVacuum => line.push_str(", marginal: squeezed vacuum (αβ=1)"),
        MarginalKind::Vacuum => line.push_str(", marginal: vacuum (α=β=1)"),
    }
    println!("{line}");
    println!("regime: {}", regime(&s));
    println!("mean_photon: {:.16e}", s.mean_photon());
    Ok(())
}

fn run_pnd(
    args: &StateArgs,
    nmax: usize,
    oracle: bool,
    output: Option<&std::path::Path>,
) -> Result<(), Failure> {
    let s = args.build()?;
    let cfg = StatsConfig::default();
    let qc = QuadratureConfig::default();
    let mut text = String::new();
    if oracle {
        text.push_str("n,p_closed,p_quadrature,abs_diff\n");
    } else {
        text.push_str("n,p_closed\n");
    }
    for n in 0..=nmax {
        let p = pnd_closed(&s, n, &cfg)?;
        if oracle {
            let q = radial_pnd(&s, n, &qc)?.value;
            let _ = writeln!(text, "{n},{p:.16e},{q:.16e},{:.16e}", (p - q).abs());
        } else {
            let _ = writeln!(text, "{n},{p:.16e}");
        }
    }
    emit(&text, output)
}

fn run_pofi(
    args: &StateArgs,
    imax: f64,
    points: usize,
    output: Option<&std::path::Path>,
) -> Result<(), Failure> {
    let s = args.build()?;
    if !imax.is_finite() || imax <= 0.0 {
        return Err(invalid("--imax must be positive and finite"));
    }
    if points < 2 {
        return Err(invalid("--points must be at least 2"));
    }
    let budget = AccuracyBudget::default();
    let mut text = String::from("I,P\n");
    for k in 0..points {
        let i = imax * k as f64 / (points - 1) as f64;
        let p = p_of_i(&s, i, &budget)?;
        let _ = writeln!(text, "{i:.16e},{p:.16e}");
    }
    emit(&text, output)
}

fn run_qparam(args: &StateArgs) -> Result<(), Failure> {
    let s = args.build()?;
    let cfg = StatsConfig::default();
    let closed = mandel_q(&s)?;
    let depth = (full_distribution(&s, 1e-12, &cfg)?.n_max() + 10).min(200);
    let oracle = moment_ratio_oracle(&s, depth, &cfg)?;
    println!("q_closed: {closed:.16e}");
    println!("q_oracle: {oracle:.16e}");
    Ok(())
}

fn run_lscan(
    alpha: f64,
    beta_min: f64,
    beta_max: f64,
    steps: usize,
    lmax: usize,
    output: Option<&std::path::Path>,
) -> Result<(), Failure> {
    if steps < 2 {
        return Err(invalid("--steps must be at least 2"));
    }
    if !beta_min.is_finite() || !beta_max.is_finite() || beta_min >= beta_max {
        return Err(invalid("--beta-min must be below --beta-max"));
    }
    if lmax == 0 || lmax > 20 {
        return Err(invalid("--lmax must lie in 1..=20"));
    }
    let cfg = StatsConfig::default();
    let mut text = String::from("beta");
    for n in 1..=lmax {
        let _ = write!(text, ",l{n}");
    }
    text.push('\n');
    for k in 0..steps {
        let beta = beta_min + (beta_max - beta_min) * k as f64 / (steps - 1) as f64;
        let s = PhysicalGaussianState::from_alpha_beta(alpha, beta)?;
        let d = full_distribution(&s, 1e-12, &cfg)?;
        let _ = write!(text, "{beta:.16e}");
        for n in 1..=lmax {
            let _ = write!(text, ",{:.16e}", l_criterion(&d, n)?);
        }
        text.push('\n');
    }
    emit(&text, output)
}

fn run_fock_demo(amplitude: f64, gamma: f64, grid: usize) -> Result<(), Failure> {
    let f = make_state(
        Complex64::new(amplitude, 0.0),
        PhaseSpec::Quadratic(gamma),
        1e-13,
    )?;
    let lambda = amplitude * amplitude;
    let mut residual = 0.0f64;
    for n in 0..=f.cutoff() {
        let poisson = if lambda > 0.0 {
            (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp()
        } else if n == 0 {
            1.0
        } else {
            0.0
        };
        residual = residual.max((fock_pnd(&f, n)? - poisson).abs());
    }
    let (min_w, (q, p)) = min_wigner(&f, 4.0, grid)?;
    println!("cutoff: {}", f.cutoff());
    println!("poisson_residual: {residual:.16e}");
    println!("min_wigner: {min_w:.16e}");
    println!("at: {q:.16e},{p:.16e}");
    Ok(())
}

fn run_verify() -> Result<(), Failure> {
    let qc = QuadratureConfig::default();
    let cfg = StatsConfig::default();
    let mut all_pass = true;
    let mut report = String::new();

    {
        let cases = [
            (1.5f64, 2.0f64, 0.8f64),
            (2.2, 1.0, 1.9),
            (0.9, 3.5, 0.2),
            (3.0, 0.7, 2.4),
        ];
        let mut worst = 0.0f64;
        for (a, b, c) in cases {
            let (lhs, rhs) = verify_laplace_bessel_i0(a, b, c, &qc)?;
            worst = worst.max(((lhs.value - rhs) / rhs).abs());
        }
        let ok = worst <= 1e-7;
        all_pass &= ok;
        let _ = writeln!(
            report,
            "laplace-bessel-i0: {} (max rel {worst:.2e})",
            if ok { "pass" } else { "fail" }
        );
    }

    {
        let cases = [
            (1.5f64, 0.8f64, 3usize),
            (2.0, 1.2, 0),
            (1.1, 0.3, 7),
            (2.8, 2.5, 5),
        ];
        let mut worst = 0.0f64;
        for (a, b, n) in cases {
            let (lhs, rhs) = verify_hypergeom_moment(a, b, n, &qc)?;
            worst = worst.max(((lhs.value - rhs) / rhs).abs());
        }
        let ok = worst <= 1e-7;
        all_pass &= ok;
        let _ = writeln!(
            report,
            "hypergeom-moment: {} (max rel {worst:.2e})",
            if ok { "pass" } else { "fail" }
        );
    }

    {
        let mut worst = 0.0f64;
        for i in [0.3f64, 1.0, 2.5] {
            let outer = fourier_bessel(
                |k| Ok(fourier_bessel(|x| Ok((-x).exp()), k, 40.0, &qc)?.value),
                i,
                40.0,
                &qc,
            )?;
            worst = worst.max((outer.value - (-i).exp()).abs());
        }
        let ok = worst <= 1e-6;
        all_pass &= ok;
        let _ = writeln!(
            report,
            "fourier-bessel round trip: {} (max abs {worst:.2e})",
            if ok { "pass" } else { "fail" }
        );
    }

    {
        let mut worst = 0.0f64;
        for i in 0..6 {
            let alpha = 1.1 + 0.4 * i as f64;
            for j in 0..6 {
                let beta = match j {
                    0 => 1.0 / alpha,
                    3 => 1.0,
                    _ => 1.0 / alpha + (1.8 - 1.0 / alpha) * j as f64 / 5.0,
                };
                let s = PhysicalGaussianState::from_alpha_beta(alpha, beta)?;
                for n in 0..=10usize {
                    let cl = pnd_closed(&s, n, &cfg)?;
                    let rad = radial_pnd(&s, n, &qc)?.value;
                    worst = worst.max((cl - rad).abs() / 1e-12f64.max(1e-8 * cl));
                }
            }
        }
        let ok = worst <= 1.0;
        all_pass &= ok;
        let _ = writeln!(
            report,
            "closed-vs-quadrature grid: {} (worst tolerance fraction {worst:.2e})",
            if ok { "pass" } else { "fail" }
        );
    }

    print!("{report}");
    if all_pass {
        Ok(())
    } else {
        Err(Failure {
            msg: "verification suite reported failures".into(),
            code: 3,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Classify(state) => run_classify(state),
        Cmd::Pnd {
            state,
            nmax,
            oracle,
            output,
        } => run_pnd(state, *nmax, *oracle, output.as_deref()),
        Cmd::Pofi {
            state,
            imax,
            points,
            output,
        } => run_pofi(state, *imax, *points, output.as_deref()),
        Cmd::Qparam { state } => run_qparam(state),
        Cmd::Lscan {
            alpha,
            beta_min,
            beta_max,
            steps,
            lmax,
            output,
        } => run_lscan(
            *alpha,
            *beta_min,
            *beta_max,
            *steps,
            *lmax,
            output.as_deref(),
        ),
        Cmd::FockDemo {
            amplitude,
            gamma,
            grid,
        } => run_fock_demo(*amplitude, *gamma, *grid),
        Cmd::Verify => run_verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
