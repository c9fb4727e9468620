//! `iqp`: compile, simulate, sample and check IQP circuits from text files.
//!
//! Exit status: 0 success, 1 a requested check failed, 2 bad input,
//! 3 resource cap exceeded, 4 no post-selection weight.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iqp_core::exact::{conditional_distribution_with, run_statevector_with, sample_bitchain_with};
use iqp_core::fast::{exact_average_with, sample_fast_with};
use iqp_core::distribution::format_bits;
use iqp_core::verify::{decide_with, ReportLine};
use iqp_core::{
    empirical_check, gadgetize, multiplicative_ratio, parse_circuit_with, sandwich_check, serialize_circuit,
    to_x_form, to_z_form, tv_distance, Caps, CheckVerdict, Circuit, Distribution, Error, SampleBatch,
};

#[derive(Parser)]
#[command(name = "iqp", version, about = "Compile, simulate, sample and check IQP circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower a universal circuit to a post-selected iqp-z circuit, or convert between iqp forms
    Compile(CompileArgs),
    /// Write the exact (conditional) output distribution
    Simulate(SimulateArgs),
    /// Draw seeded samples from the (conditional) output distribution
    Sample(SampleArgs),
    /// Metrics and checks over distributions, samples and circuits
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args)]
struct CapArgs {
    /// Largest statevector, in qubits
    #[arg(long, default_value_t = Caps::DEFAULT.statevector_qubits)]
    cap_qubits: usize,
    /// Largest output register for the fast sampler
    #[arg(long, default_value_t = Caps::DEFAULT.sampler_outputs)]
    cap_outputs: usize,
    /// Largest non-output register for exact averaging
    #[arg(long, default_value_t = Caps::DEFAULT.enumeration_lines)]
    cap_enumeration: usize,
}

impl CapArgs {
    fn caps(&self) -> Result<Caps, Failure> {
        if self.cap_qubits == 0 || self.cap_outputs == 0 || self.cap_enumeration == 0 {
            return Err(Failure::Input("caps must be positive".into()));
        }
        Ok(Caps {
            statevector_qubits: self.cap_qubits,
            sampler_outputs: self.cap_outputs,
            enumeration_lines: self.cap_enumeration,
            ..Caps::DEFAULT
        })
    }
}

#[derive(Args)]
struct CompileArgs {
    input: PathBuf,
    /// Retag an iqp-x circuit as iqp-z
    #[arg(long, conflicts_with = "to_x")]
    to_z: bool,
    /// Retag an iqp-z circuit as iqp-x
    #[arg(long)]
    to_x: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    input: PathBuf,
    /// Average the small-output sampler's conditional states instead of using a statevector
    #[arg(long, conflicts_with = "amplitudes")]
    exact_average: bool,
    /// Dump final amplitudes instead of a distribution
    #[arg(long)]
    amplitudes: bool,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Auto,
    Exact,
    Fast,
}

#[derive(Args)]
struct SampleArgs {
    input: PathBuf,
    /// Integer seed, or `random`
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    #[arg(long, value_enum, default_value_t = Backend::Auto)]
    backend: Backend,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Multiplicative ratio between two distribution files
    Ratio {
        p: PathBuf,
        r: PathBuf,
        /// Fail when the ratio exceeds this
        #[arg(long = "c")]
        c: Option<f64>,
    },
    /// Unhalved total variation distance between two distribution files
    Tv {
        p: PathBuf,
        r: PathBuf,
        /// Fail when the distance exceeds this
        #[arg(long)]
        max: Option<f64>,
    },
    /// Check S/c² ≤ S~ ≤ c²·S outcome by outcome
    Sandwich {
        s: PathBuf,
        s_tilde: PathBuf,
        #[arg(long = "c")]
        c: f64,
    },
    /// Bounded-error verdict on a single-line output circuit
    Decide {
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Fail unless the verdict matches
        #[arg(long, value_parser = ["accept", "reject", "inconclusive"])]
        expect: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Compile a universal circuit and compare conditional distributions with the original
    CheckGadget {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Per-outcome statistical check of a samples file against a distribution file
    Empirical { samples: PathBuf, truth: PathBuf },
}

enum Failure {
    Check,
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Input(_) => 2,
            Failure::Core(Error::CapExceeded { .. }) => 3,
            Failure::Core(Error::ZeroPostselectionMass { .. }) => 4,
            Failure::Core(_) => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path, caps: &Caps) -> Result<Circuit, Failure> {
    parse_circuit_with(&read(path)?, caps).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_distribution(path: &Path) -> Result<Distribution, Failure> {
    Distribution::from_text(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(lines: &[ReportLine]) {
    for line in lines {
        println!("{line}");
    }
}

fn verdict(ok: bool) -> Option<String> {
    Some(if ok { "pass" } else { "fail" }.to_string())
}

fn compile(args: CompileArgs) -> Result<(), Failure> {
    let c = load_circuit(&args.input, &Caps::DEFAULT)?;
    let text = if args.to_z {
        serialize_circuit(&to_z_form(&c)?)
    } else if args.to_x {
        serialize_circuit(&to_x_form(&c)?)
    } else {
        let (compiled, rep) = gadgetize(&c)?;
        rep.to_comment_lines() + &serialize_circuit(&compiled)
    };
    emit(args.out.as_deref(), &text)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let caps = args.caps.caps()?;
    let c = load_circuit(&args.input, &caps)?;
    let text = if args.amplitudes {
        run_statevector_with(&c, &caps)?.dump()
    } else if args.exact_average {
        if !c.postselect.is_empty() {
            return Err(Failure::Input("--exact-average gives the unconditioned output; the circuit post-selects".into()));
        }
        exact_average_with(&c, &caps)?.to_text()
    } else {
        conditional_distribution_with(&c, &caps)?.to_text()
    };
    emit(args.out.as_deref(), &text)
}

fn sample(args: SampleArgs) -> Result<(), Failure> {
    let caps = args.caps.caps()?;
    let c = load_circuit(&args.input, &caps)?;
    let seed = match args.seed.as_str() {
        "random" => rand::random::<u64>(),
        s => s.parse().map_err(|_| Failure::Input(format!("--seed expects an integer or `random`, got `{s}`")))?,
    };
    if args.shots == 0 {
        return Err(Failure::Input("--shots must be positive".into()));
    }
    let fast_ok = c.kind.is_iqp() && c.postselect.is_empty();
    let use_fast = match args.backend {
        Backend::Fast if !fast_ok => {
            return Err(Failure::Input("the fast backend needs an iqp circuit without post-selection".into()));
        }
        Backend::Fast => true,
        Backend::Exact => false,
        Backend::Auto => fast_ok && c.output.len() <= caps.sampler_outputs,
    };
    let batch = if use_fast {
        sample_fast_with(&c, seed, args.shots, &caps)?
    } else {
        sample_bitchain_with(&c, seed, args.shots, &caps)?
    };
    emit(args.out.as_deref(), &batch.to_text())
}

fn verify(cmd: VerifyCommand) -> Result<(), Failure> {
    let ok = match cmd {
        VerifyCommand::Ratio { p, r, c } => {
            let p = load_distribution(&p)?;
            let res_width = p.width();
            let res = multiplicative_ratio(&p, &load_distribution(&r)?)?;
            let ok = c.is_none_or(|c| res.c_min.value() <= c);
            let mut line = format!("c_min {}", res.c_min);
            if let Some(c) = c {
                line += &format!(" threshold {c} {}", verdict(ok).unwrap_or_default());
            }
            println!("{line}");
            if let Some(w) = res.witness {
                println!("witness {}", format_bits(w, res_width));
            }
            ok
        }
        VerifyCommand::Tv { p, r, max } => {
            let tv = tv_distance(&load_distribution(&p)?, &load_distribution(&r)?)?;
            let ok = max.is_none_or(|m| tv <= m);
            report(&[ReportLine::new("tv", tv, max, max.and(verdict(ok)))]);
            ok
        }
        VerifyCommand::Sandwich { s, s_tilde, c } => {
            let s = load_distribution(&s)?;
            let s_width = s.width();
            let rep = sandwich_check(&s, &load_distribution(&s_tilde)?, c)?;
            if let Some((x, factor)) = rep.worst {
                println!("worst {} factor {factor}", format_bits(x, s_width));
            }
            report(&[ReportLine::new("c_squared", c * c, None, verdict(rep.holds))]);
            rep.holds
        }
        VerifyCommand::Decide { input, delta, expect, caps } => {
            let caps = caps.caps()?;
            let c = load_circuit(&input, &caps)?;
            let out = decide_with(&c, delta, &caps)?;
            let ok = expect.as_deref().is_none_or(|e| e == out.verdict.to_string());
            report(&[
                ReportLine::new("s1", out.s1, Some(0.5 + out.delta_used), Some(out.verdict.to_string())),
                ReportLine::new("delta", out.delta_used, None, expect.is_some().then(|| verdict(ok)).flatten()),
            ]);
            ok
        }
        VerifyCommand::CheckGadget { input, tolerance, caps } => {
            let caps = caps.caps()?;
            let c = load_circuit(&input, &caps)?;
            let (compiled, rep) = gadgetize(&c)?;
            let want = conditional_distribution_with(&c, &caps)?;
            let got = conditional_distribution_with(&compiled, &caps)?;
            let dev = (0..1u64 << want.width()).map(|x| (want.prob(x) - got.prob(x)).abs()).fold(0.0, f64::max);
            let lattice = iqp_core::check_restricted_phases(&compiled);
            let ok = dev < tolerance && lattice;
            report(&[
                ReportLine::new("ancillas", rep.ancillas_added as f64, None, None),
                ReportLine::new("restricted_phases", f64::from(u8::from(lattice)), None, verdict(lattice)),
                ReportLine::new("max_deviation", dev, Some(tolerance), verdict(dev < tolerance)),
            ]);
            ok
        }
        VerifyCommand::Empirical { samples, truth } => {
            let batch = SampleBatch::from_text(&read(&samples)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", samples.display())))?;
            let truth = load_distribution(&truth)?;
            let rep = empirical_check(&batch, &truth)?;
            report(&rep.report_lines(batch.width));
            rep.verdict == CheckVerdict::Pass
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => compile(a),
        Command::Simulate(a) => simulate(a),
        Command::Sample(a) => sample(a),
        Command::Verify(v) => verify(v),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check => eprintln!("iqp: check failed"),
                Failure::Input(msg) => eprintln!("iqp: {msg}"),
                Failure::Core(e) => eprintln!("iqp: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}
