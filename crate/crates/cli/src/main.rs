use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ambig::ambiguity::{property_suite, report};
use ambig::compress::{
    asymptotic_rate_region, block_gain_report, k_block_rate_region, k_block_solve, per_informant_min_bits,
    rate_region,
};
use ambig::io::{
    parse_support_file, write_ambiguity_report, write_asymptotic_region, write_block_report,
    write_property_report, write_rate_region, write_shrink_diagnostics, write_sweep_report,
};
use ambig::oracle::exhaustive_tree_search;
use ambig::protocol::{
    round_shrink_diagnostics, run_k_bit_serial, run_protocol, worst_case_sweep, ProtocolId, Responder,
    TieRule, Transcript,
};
use ambig::rational::render;
use ambig::{DataVector, Error, Limits, SupportSet};

#[derive(Parser, Debug)]
#[command(
    name = "ambig",
    version,
    about = "Worst-case distributed source coding toolkit"
)]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ambiguity, information ambiguity, conditional tables and chain bound.
    Measure { input: PathBuf },
    /// Evaluate every measure axiom and set lemma exhaustively.
    CheckProperties { input: PathBuf },
    /// Run a gathering protocol.
    Simulate(SimulateArgs),
    /// Optimal worst-case bits, greedy bits and certificate bound.
    Compressibility(CompressArgs),
    /// Per-subset lower bounds and corner points.
    RateRegion(RegionArgs),
    /// Block-length sweep against one-shot coding.
    BlockCompare(BlockArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolArg {
    BitSerial,
    RoundParallel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TieArg {
    Lowest,
    Random,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "bit-serial")]
    protocol: ProtocolArg,
    /// Data vector, comma-separated; samples of a block separated by ';'.
    #[arg(long, conflicts_with_all = ["adversary", "sweep"])]
    x: Option<String>,
    /// Answer every query adversarially.
    #[arg(long)]
    adversary: bool,
    /// Run every member honestly plus one adversarial run.
    #[arg(long, conflicts_with = "adversary")]
    sweep: bool,
    /// Block length (Bit-Serial only).
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "lowest")]
    tie: TieArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append one line per round.
    #[arg(long)]
    trace: bool,
    /// Append per-round shrink diagnostics.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Args, Debug)]
struct CompressArgs {
    input: PathBuf,
    /// Block length.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Cross-check against the exhaustive tree search.
    #[arg(long)]
    oracle: bool,
    /// Print an optimal strategy tree.
    #[arg(long)]
    strategy: bool,
}

#[derive(Args, Debug)]
struct RegionArgs {
    input: PathBuf,
    /// Block length; the region of the k-extension is reported per block.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Use the closed-form block bound on the one-shot region instead.
    #[arg(long, conflicts_with = "asymptotic")]
    closed_form: bool,
    /// Report the limit of the closed-form bound as k grows.
    #[arg(long)]
    asymptotic: bool,
}

#[derive(Args, Debug)]
struct BlockArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    k_max: usize,
}

enum Failure {
    Usage(String),
    Input(Error),
    Limit(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) | Error::Arity { .. } => Failure::Input(e),
            Error::Degenerate | Error::Resource(_) => Failure::Limit(e),
            Error::NotMember(_) | Error::Domain(_) | Error::InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
        }
    }
}

/// Report text plus any invariant breach detected while producing it.
struct Output {
    text: String,
    violations: Vec<String>,
}

impl Output {
    fn new(text: String) -> Self {
        Output {
            text,
            violations: Vec::new(),
        }
    }
}

fn load(path: &PathBuf) -> Result<SupportSet, Failure> {
    let built = parse_support_file(path)?;
    if built.duplicates > 0 {
        eprintln!(
            "ambig: warning: {} duplicate tuple(s) collapsed",
            built.duplicates
        );
    }
    Ok(built.support)
}

fn parse_x(text: &str, s: &SupportSet, k: usize) -> Result<DataVector, Failure> {
    let samples: Vec<DataVector> = text
        .split(';')
        .map(|sample| DataVector::new(sample.split(',').map(str::trim)))
        .collect();
    if samples.len() != k {
        return Err(Failure::Usage(format!(
            "--x holds {} samples but the block length is {k}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|x| x.len() != s.n_informants()) {
        return Err(Failure::Usage(format!(
            "data vector {bad} has {} values, expected {}",
            bad.len(),
            s.n_informants()
        )));
    }
    Ok(DataVector::block(&samples)?)
}

fn tie_rule(tie: TieArg, seed: u64) -> TieRule {
    match tie {
        TieArg::Lowest => TieRule::LowestIndex,
        TieArg::Random => TieRule::SeededRandom(seed),
    }
}

fn protocol_id(p: ProtocolArg) -> ProtocolId {
    match p {
        ProtocolArg::BitSerial => ProtocolId::BitSerial,
        ProtocolArg::RoundParallel => ProtocolId::RoundParallel,
    }
}

fn summary(t: &Transcript) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol\t{}", t.protocol);
    let _ = writeln!(out, "block_length\t{}", t.block_length);
    let _ = writeln!(out, "rounds\t{}", t.round_count);
    let _ = writeln!(out, "informant_bits\t{}", t.informant_bits);
    for (i, b) in t.per_informant_bits.iter().enumerate() {
        let _ = writeln!(out, "informant_bits[X{}]\t{b}", i + 1);
    }
    let _ = writeln!(out, "sink_bits\t{}", t.sink_bits);
    out
}

fn simulate(a: &SimulateArgs, limits: &Limits) -> Result<Output, Failure> {
    let s = load(&a.input)?;
    let protocol = protocol_id(a.protocol);
    let tie = tie_rule(a.tie, a.seed);
    if a.k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    if a.k > 1 && protocol != ProtocolId::BitSerial {
        return Err(Failure::Usage(
            "block lengths above 1 need --protocol bit-serial".into(),
        ));
    }
    if a.sweep {
        let target = ambig::k_extension(&s, a.k, limits)?;
        let r = worst_case_sweep(&target, protocol, tie)?;
        let mut out = Output::new(write_sweep_report(&r));
        if !r.lossless {
            out.violations
                .push("an honest run failed to decode its vector".into());
        }
        if !r.adversary_matches {
            out.violations.push(format!(
                "adversarial total {} differs from the honest maximum {}",
                r.adversarial_informant_bits, r.max_informant_bits
            ));
        }
        return Ok(out);
    }
    let responder = match (&a.x, a.adversary) {
        (Some(x), false) => Responder::Honest(parse_x(x, &s, a.k)?),
        (None, true) => Responder::adversarial(),
        _ => return Err(Failure::Usage("give one of --x, --adversary or --sweep".into())),
    };
    let t = if a.k > 1 {
        run_k_bit_serial(&s, a.k, &responder, tie, limits)?
    } else {
        run_protocol(&s, protocol, &responder, tie)?
    };
    let mut out = Output::new(summary(&t));
    if let Responder::Honest(x) = &responder {
        if t.decoded.as_ref() != Some(x) {
            out.violations
                .push(format!("honest run on {x} did not decode it"));
        }
    }
    if a.diagnostics {
        let d = round_shrink_diagnostics(&t);
        out.text.push_str(&write_shrink_diagnostics(&d));
        if !d.holds {
            out.violations.push("round count exceeds the shrink bound".into());
        }
    }
    if a.trace {
        out.text.push_str(&t.trace());
    } else if let Some(x) = &t.decoded {
        let _ = writeln!(out.text, "decoded\t{x}");
    }
    Ok(out)
}

fn compressibility(a: &CompressArgs, limits: &Limits) -> Result<Output, Failure> {
    let s = load(&a.input)?;
    if a.k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    let block = k_block_solve(&s, a.k, limits)?;
    let r = &block.result;
    let target = ambig::k_extension(&s, a.k, limits)?;
    let sum_info: u32 = target
        .alphabets()
        .iter()
        .map(|al| ambig::bits::ceil_log2(al.len() as u64))
        .sum();
    let mut text = String::new();
    let _ = writeln!(text, "block_length\t{}", a.k);
    let _ = writeln!(text, "information_ambiguity\t{}", r.information_ambiguity);
    match r.certificate_bound {
        Some(c) => writeln!(text, "certificate_bound\t{c}"),
        None => writeln!(text, "certificate_bound\tn/a"),
    }
    .ok();
    let _ = writeln!(text, "c_b\t{}", r.c_b);
    let _ = writeln!(text, "greedy_bits\t{}", r.greedy_bits);
    let _ = writeln!(text, "sum_informant_ambiguity\t{sum_info}");
    for (i, b) in per_informant_min_bits(&target, limits)?.iter().enumerate() {
        let _ = writeln!(text, "min_bits[X{}]\t{b}", i + 1);
    }
    if a.k > 1 {
        let _ = writeln!(text, "c_b_per_block\t{}", render(&block.per_block));
        let _ = writeln!(text, "gap\t{}", render(&block.gap));
    }
    let mut out = Output::new(text);
    let chain = [
        ("information_ambiguity", Some(r.information_ambiguity)),
        ("certificate_bound", r.certificate_bound),
        ("c_b", Some(r.c_b)),
        ("greedy_bits", Some(r.greedy_bits)),
        ("sum_informant_ambiguity", Some(sum_info)),
    ];
    let present: Vec<(&str, u32)> = chain.iter().filter_map(|(n, v)| v.map(|v| (*n, v))).collect();
    for w in present.windows(2) {
        if w[0].1 > w[1].1 {
            out.violations
                .push(format!("{} = {} exceeds {} = {}", w[0].0, w[0].1, w[1].0, w[1].1));
        }
    }
    if a.oracle {
        match exhaustive_tree_search(&target, limits) {
            Ok(ex) => {
                let _ = writeln!(out.text, "exhaustive_optimum\t{}", ex.optimum);
                let _ = writeln!(out.text, "optimal_strategies\t{}", ex.optimal_strategies);
                if ex.optimum != r.c_b {
                    out.violations.push(format!(
                        "exhaustive optimum {} differs from c_b {}",
                        ex.optimum, r.c_b
                    ));
                }
            }
            Err(Error::Resource(msg)) => {
                let _ = writeln!(out.text, "exhaustive_optimum\tn/a ({msg})");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if a.strategy {
        out.text.push_str(&r.strategy.render());
    }
    Ok(out)
}

fn region(a: &RegionArgs, limits: &Limits) -> Result<Output, Failure> {
    let s = load(&a.input)?;
    if a.k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    if a.asymptotic {
        let base = rate_region(&s, limits)?;
        return Ok(Output::new(write_asymptotic_region(&asymptotic_rate_region(
            &base,
        )?)));
    }
    let reg = if a.closed_form {
        k_block_rate_region(&rate_region(&s, limits)?, a.k)?
    } else {
        rate_region(&ambig::k_extension(&s, a.k, limits)?, limits)?.scaled(a.k)
    };
    Ok(Output::new(write_rate_region(&reg)))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let limits = Limits::default();
    match &cli.command {
        Command::Measure { input } => {
            let s = load(input)?;
            Ok(Output::new(write_ambiguity_report(&report(&s, &limits))))
        }
        Command::CheckProperties { input } => {
            let s = load(input)?;
            let r = property_suite(&s, &limits);
            let mut out = Output::new(write_property_report(&r));
            for c in r.checks.iter().filter(|c| !c.passed()) {
                out.violations.push(format!("property {} failed", c.name));
            }
            Ok(out)
        }
        Command::Simulate(a) => simulate(a, &limits),
        Command::Compressibility(a) => compressibility(a, &limits),
        Command::RateRegion(a) => region(a, &limits),
        Command::BlockCompare(a) => {
            let s = load(&a.input)?;
            let r = block_gain_report(&s, a.k_max, &limits)?;
            let mut out = Output::new(write_block_report(&r));
            if !r.gap_within_one_bit {
                out.violations
                    .push("block coding gained more than one bit per block".into());
            }
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let out = match run(&cli) {
        Ok(out) => out,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (1, m),
                Failure::Input(e) => (2, e.to_string()),
                Failure::Limit(e) => (3, e.to_string()),
            };
            eprintln!("ambig: {msg}");
            return ExitCode::from(code);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.text) {
                eprintln!("ambig: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", out.text),
    }
    if out.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &out.violations {
            eprintln!("ambig: invariant violation: {v}");
        }
        ExitCode::from(4)
    }
}
