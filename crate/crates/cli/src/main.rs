//! `softquota` - solve, audit and verify committee selection instances.
//!
//! Exit codes: 0 success (axioms hold), 1 axiom violation (`check`/`verify`),
//! 2 usage or input error. Documents go to stdout, diagnostics to stderr.

use std::fs;
use std::io::{self, Read, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use softquota::generator::{random_instance, sampled_params, GenParams};
use softquota::oracle::{self, DEFAULT_CAP};
use softquota::{audit, io as docs, solve, Instance, TieBreakPolicy, TypeSelection};

#[derive(Debug, Parser)]
#[command(
    name = "softquota",
    version,
    about = "Committee selection under soft lower quotas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select a committee and print the result document.
    Solve {
        #[command(flatten)]
        io: IoArgs,
        /// Include the solver trace in the result.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Audit a given committee against both axioms.
    Check {
        #[command(flatten)]
        io: IoArgs,
        /// Comma-separated candidate ids.
        #[arg(long, value_delimiter = ',', required = true)]
        committee: Vec<String>,
    },
    /// Certify solver output against the brute-force oracle.
    Verify {
        /// Instance file (`-` for stdin). Not allowed together with `--seed`.
        #[arg(conflicts_with = "seed")]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Seed or inclusive seed range `a..b` for a generated batch.
        #[arg(long, value_parser = parse_seed_range)]
        seed: Option<RangeInclusive<u64>>,
        #[command(flatten)]
        gen: GenArgs,
        /// Maximum number of committees the oracle may enumerate.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Write a seeded random instance document.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Instance file (`-` or omitted for stdin).
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyName {
    Lexicographic,
    LargestDeficit,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Stage-1 rule for choosing among under-represented types.
    #[arg(long, value_enum, default_value = "lexicographic")]
    policy: PolicyName,
    /// Comma-separated type ids giving stage-1 type priority.
    #[arg(long, value_delimiter = ',')]
    type_order: Vec<String>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of candidates.
    #[arg(long)]
    m: Option<usize>,
    /// Number of types.
    #[arg(long)]
    l: Option<usize>,
    /// Committee size.
    #[arg(long)]
    k: Option<usize>,
    /// Probability that a candidate holds a type.
    #[arg(long)]
    density: Option<f64>,
    /// Quotas are drawn from 0..=floor(tightness * k).
    #[arg(long)]
    tightness: Option<f64>,
    /// Probability of tying with the previous candidate in the ranking.
    #[arg(long)]
    ties: Option<f64>,
}

impl GenArgs {
    fn is_empty(&self) -> bool {
        self.m.is_none()
            && self.l.is_none()
            && self.k.is_none()
            && self.density.is_none()
            && self.tightness.is_none()
            && self.ties.is_none()
    }

    fn apply(&self, base: GenParams) -> GenParams {
        GenParams {
            m: self.m.unwrap_or(base.m),
            types: self.l.unwrap_or(base.types),
            k: self.k.unwrap_or(base.k),
            density: self.density.unwrap_or(base.density),
            tightness: self.tightness.unwrap_or(base.tightness),
            tie_probability: self.ties.unwrap_or(base.tie_probability),
            seed: base.seed,
        }
    }
}

fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let bad = |_| format!("invalid seed range `{s}` (expected N or A..B)");
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (a.parse().map_err(bad)?, b.parse().map_err(bad)?);
            if a > b {
                return Err(format!("empty seed range `{s}`"));
            }
            Ok(a..=b)
        }
        None => {
            let n = s.parse().map_err(bad)?;
            Ok(n..=n)
        }
    }
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_input(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::input(format!("cannot read stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text),
        _ => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

fn load_instance(path: Option<&PathBuf>) -> Result<Instance, Failure> {
    let text = read_input(path)?;
    docs::parse_instance(&text).map_err(Failure::input)
}

fn resolve_policy(args: &PolicyArgs, instance: &Instance) -> Result<TieBreakPolicy, Failure> {
    let type_order = if args.type_order.is_empty() {
        None
    } else {
        Some(
            args.type_order
                .iter()
                .map(|t| instance.type_index(t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::input)?,
        )
    };
    Ok(TieBreakPolicy {
        type_selection: match args.policy {
            PolicyName::Lexicographic => TypeSelection::Lexicographic,
            PolicyName::LargestDeficit => TypeSelection::LargestDeficit,
        },
        type_order,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

fn cmd_solve(io: &IoArgs, trace: bool, policy: &PolicyArgs) -> CmdResult {
    let instance = load_instance(io.input.as_ref())?;
    let policy = resolve_policy(policy, &instance)?;
    let solution = solve(&instance, &policy);
    let text = docs::serialize_result(
        &instance,
        &solution.committee,
        trace.then_some(&solution.trace),
        &solution.report,
    );
    write_output(io.output.as_ref(), &text)?;
    Ok(0)
}

fn cmd_check(io: &IoArgs, committee: &[String]) -> CmdResult {
    let instance = load_instance(io.input.as_ref())?;
    let committee = instance
        .committee_from_ids(committee)
        .map_err(Failure::input)?;
    let report = audit(&instance, &committee).map_err(Failure::input)?;
    let text = docs::serialize_result(&instance, &committee, None, &report);
    write_output(io.output.as_ref(), &text)?;
    Ok(if report.holds() { 0 } else { 1 })
}

#[derive(Serialize)]
struct Verification {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    passed: bool,
    output: Vec<String>,
    intersection: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct BatchVerification {
    instances: usize,
    passed: usize,
    failures: Vec<Verification>,
}

fn verify_one(
    instance: &Instance,
    policy: &TieBreakPolicy,
    cap: u64,
    seed: Option<u64>,
) -> Result<Verification, Failure> {
    let cert = oracle::certify_solver(instance, policy, cap).map_err(Failure::input)?;
    Ok(Verification {
        seed,
        passed: cert.passed,
        output: instance.committee_ids(&cert.output),
        intersection: cert
            .intersection
            .iter()
            .map(|w| instance.committee_ids(w))
            .collect(),
    })
}

fn cmd_verify(
    input: Option<&PathBuf>,
    output: Option<&PathBuf>,
    seeds: Option<&RangeInclusive<u64>>,
    gen: &GenArgs,
    cap: u64,
    policy_args: &PolicyArgs,
) -> CmdResult {
    let Some(seeds) = seeds else {
        if !gen.is_empty() {
            return Err(Failure::input("generator flags require --seed"));
        }
        let instance = load_instance(input)?;
        let policy = resolve_policy(policy_args, &instance)?;
        let result = verify_one(&instance, &policy, cap, None)?;
        write_output(output, &to_json(&result))?;
        return Ok(if result.passed { 0 } else { 1 });
    };

    let mut batch = BatchVerification {
        instances: 0,
        passed: 0,
        failures: Vec::new(),
    };
    for seed in seeds.clone() {
        let params = if gen.is_empty() {
            sampled_params(seed, 10, 4)
        } else {
            gen.apply(GenParams {
                seed,
                ..GenParams::default()
            })
        };
        let instance = random_instance(&params).map_err(Failure::input)?;
        let policy = resolve_policy(policy_args, &instance)?;
        let result = verify_one(&instance, &policy, cap, Some(seed))?;
        batch.instances += 1;
        if result.passed {
            batch.passed += 1;
        } else {
            batch.failures.push(result);
        }
    }
    write_output(output, &to_json(&batch))?;
    Ok(if batch.failures.is_empty() { 0 } else { 1 })
}

fn cmd_generate(seed: u64, gen: &GenArgs, output: Option<&PathBuf>) -> CmdResult {
    let params = gen.apply(GenParams {
        seed,
        ..GenParams::default()
    });
    let instance = random_instance(&params).map_err(Failure::input)?;
    write_output(output, &docs::serialize_instance(&instance))?;
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Solve { io, trace, policy } => cmd_solve(io, *trace, policy),
        Command::Check { io, committee } => cmd_check(io, committee),
        Command::Verify {
            input,
            output,
            seed,
            gen,
            cap,
            policy,
        } => cmd_verify(
            input.as_ref(),
            output.as_ref(),
            seed.as_ref(),
            gen,
            *cap,
            policy,
        ),
        Command::Generate { seed, gen, output } => cmd_generate(*seed, gen, output.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
