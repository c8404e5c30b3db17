//! Command-line front end for the altbit models.

pub mod document;

use std::io::Write;
use std::path::PathBuf;

use altbit_core::checker::{
    run_trace, run_trace_lynch, sweep_ab, sweep_lynch, CheckError, Explorer, Invariant,
};
use altbit_core::faults::{canonical, enumerate, parse_bits, random, InterleavedTrace};
use altbit_core::protocols::{ab_init, legacy, lynch_init, AbConfig, LynchIc, Schedules, Terminal};
use altbit_core::statespace::{
    extract_fsm, motif, superpose_check, system_trace, to_dot, FsmGraph,
};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use document::TraceDocument;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(CheckError::Trace(_)) => EXIT_USAGE,
            CliError::Check(CheckError::Protocol(_)) => EXIT_USAGE,
            CliError::Check(CheckError::OracleMismatch { .. }) => EXIT_FAIL,
            CliError::Io(_) => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Ab,
    Lynch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Coreasm,
    Json,
}

/// Where a run's error flags come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorSpec {
    Canonical,
    None,
    Bits(InterleavedTrace),
    Random { seed: u64, p: f64 },
}

impl ErrorSpec {
    /// Rounds implied when `--rounds` is not given.
    fn default_rounds(&self) -> usize {
        match self {
            ErrorSpec::Canonical => 11,
            ErrorSpec::None | ErrorSpec::Random { .. } => 6,
            ErrorSpec::Bits(t) => t.len().div_ceil(2).max(1),
        }
    }

    /// The interleaved trace for `events` receive events.
    fn trace(&self, events: usize) -> Result<InterleavedTrace, CliError> {
        let t = match self {
            ErrorSpec::Canonical => canonical().to_interleaved(),
            ErrorSpec::None => InterleavedTrace::error_free(events),
            ErrorSpec::Bits(t) => t.clone(),
            ErrorSpec::Random { seed, p } => random(events, *seed, *p).map_err(CheckError::from)?,
        };
        if t.len() > events {
            return Err(CliError::Usage(format!(
                "error trace has {} events but only {events} are simulated",
                t.len()
            )));
        }
        Ok(t.resized(events))
    }
}

pub fn parse_error_spec(s: &str) -> Result<ErrorSpec, String> {
    match s {
        "canonical" => Ok(ErrorSpec::Canonical),
        "none" => Ok(ErrorSpec::None),
        _ => {
            if let Some(bits) = s.strip_prefix("bits:") {
                return parse_bits(bits)
                    .map(ErrorSpec::Bits)
                    .map_err(|e| e.to_string());
            }
            if let Some(rest) = s.strip_prefix("random:") {
                let (seed, p) = rest
                    .split_once(':')
                    .ok_or_else(|| "expected random:<seed>:<p>".to_string())?;
                let seed = seed.parse().map_err(|e| format!("bad seed: {e}"))?;
                let p = p.parse().map_err(|e| format!("bad probability: {e}"))?;
                return Ok(ErrorSpec::Random { seed, p });
            }
            Err(format!(
                "unknown error spec {s:?} (expected canonical, none, bits:<0/1 string> or random:<seed>:<p>)"
            ))
        }
    }
}

fn parse_terminal(s: &str) -> Result<Terminal, String> {
    s.parse()
        .map_err(|e: altbit_core::ProtocolError| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "altbit", version, about = "Alternating-bit protocol workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one protocol execution under an error trace.
    Simulate {
        #[arg(long, value_enum, default_value = "ab")]
        protocol: Protocol,
        /// canonical | none | bits:<0/1 string> | random:<seed>:<p>
        #[arg(long, default_value = "canonical", value_parser = parse_error_spec)]
        errors: ErrorSpec,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, value_enum, default_value = "coreasm")]
        format: Format,
        #[arg(long)]
        dummy_first: bool,
        #[arg(long, default_value = "B", value_parser = parse_terminal)]
        starter: Terminal,
        /// AB: two bits ALTT(A) ALTT(B). Lynch: four bits ALT(A) ALTT(A) ALT(B) ALTT(B) or 1..16.
        #[arg(long)]
        ic: Option<String>,
    },
    /// Check an invariant over every error trace of a given length.
    Check {
        #[arg(long, default_value_t = 22)]
        steps: usize,
        /// consistent-prefix | sanity | all
        #[arg(long, default_value = "consistent-prefix")]
        invariant: Invariant,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Find an error trace whose run completes exactly at a given event.
    Search {
        #[arg(long)]
        complete_at: usize,
        /// Exit 1 when nothing is found.
        #[arg(long)]
        expect_found: bool,
    },
    /// Try every initial condition error-free.
    Sweep {
        #[arg(long, value_enum, default_value = "lynch")]
        protocol: Protocol,
        #[arg(long, default_value = "B", value_parser = parse_terminal)]
        starter: Terminal,
        #[arg(long)]
        dummy_first: bool,
    },
    /// Extract the system-state machine of one or more runs.
    Fsm {
        #[arg(long, default_value = "canonical", value_parser = parse_error_spec)]
        errors: ErrorSpec,
        #[arg(long)]
        rounds: Option<usize>,
        /// Use every error trace of this many events instead of --errors.
        #[arg(long)]
        exhaustive: Option<usize>,
        /// Write DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print the label traces of one error sequence, optionally against a second.
    Motif {
        #[arg(long, value_parser = parse_error_spec)]
        errors: ErrorSpec,
        /// Number of receive events (pads with error-free events).
        #[arg(long)]
        length: Option<usize>,
        /// Superpose with this sequence.
        #[arg(long, value_parser = parse_error_spec)]
        with: Option<ErrorSpec>,
    },
}

fn parse_ab_ic(s: &str) -> Result<(bool, bool), CliError> {
    let bit = |c| match c {
        '0' => Ok(false),
        '1' => Ok(true),
        _ => Err(CliError::Usage(format!(
            "AB initial condition must be two 0/1 digits, got {s:?}"
        ))),
    };
    let cs: Vec<char> = s.chars().collect();
    match cs[..] {
        [a, b] => Ok((bit(a)?, bit(b)?)),
        _ => Err(CliError::Usage(format!(
            "AB initial condition must be two 0/1 digits, got {s:?}"
        ))),
    }
}

fn parse_lynch_ic(s: &str) -> Result<LynchIc, CliError> {
    if let Ok(n) = s.parse::<u8>() {
        if s.len() <= 2 {
            return LynchIc::from_number(n)
                .ok_or_else(|| CliError::Usage(format!("IC number {n} outside 1..=16")));
        }
    }
    s.parse()
        .map_err(|e: altbit_core::ProtocolError| CliError::Usage(e.to_string()))
}

fn events_for(errors: &ErrorSpec, rounds: Option<usize>) -> Result<usize, CliError> {
    let rounds = rounds.unwrap_or_else(|| errors.default_rounds());
    if rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    Ok(2 * rounds)
}

fn default_ab_run(
    errors: &ErrorSpec,
    rounds: Option<usize>,
) -> Result<altbit_core::RunTrace, CliError> {
    let events = events_for(errors, rounds)?;
    let trace = errors.trace(events)?;
    let init = ab_init(&AbConfig::default()).map_err(CheckError::from)?;
    Ok(run_trace(&init, &trace)?)
}

fn bool_pair((a, b): (bool, bool)) -> String {
    format!("({},{})", a as u8, b as u8)
}

/// Runs a parsed command, writing its report to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate {
            protocol,
            errors,
            rounds,
            format,
            dummy_first,
            starter,
            ic,
        } => {
            let events = events_for(&errors, rounds)?;
            let trace = errors.trace(events)?;
            match protocol {
                Protocol::Ab => {
                    let altt0 = match &ic {
                        Some(s) => parse_ab_ic(s)?,
                        None => (true, true),
                    };
                    let cfg = AbConfig::default()
                        .with_starter(starter)
                        .with_altt0(altt0.0, altt0.1)
                        .with_dummy_first(dummy_first);
                    let init = ab_init(&cfg).map_err(CheckError::from)?;
                    let run = run_trace(&init, &trace)?;
                    match format {
                        Format::Coreasm => write!(out, "{}", legacy::render(&run.output_lines()))?,
                        Format::Json => {
                            let desc = format!(
                                "ab starter={starter} altt0={}{}",
                                bool_pair(altt0),
                                if dummy_first { " dummy-first" } else { "" }
                            );
                            writeln!(out, "{}", TraceDocument::from_ab(&run, desc).to_json())?;
                        }
                    }
                }
                Protocol::Lynch => {
                    if format == Format::Coreasm {
                        return Err(CliError::Usage(
                            "the coreasm format exists for the ab protocol only".into(),
                        ));
                    }
                    if dummy_first {
                        return Err(CliError::Usage(
                            "--dummy-first applies to the ab protocol only".into(),
                        ));
                    }
                    let lic = match &ic {
                        Some(s) => parse_lynch_ic(s)?,
                        None => LynchIc::from_number(2).expect("IC 2 exists"),
                    };
                    let init =
                        lynch_init(lic, starter, Schedules::default()).map_err(CheckError::from)?;
                    let run = run_trace_lynch(&init, &trace)?;
                    let desc = format!("lynch starter={starter} ic={} {lic}", lic.number());
                    writeln!(out, "{}", TraceDocument::from_lynch(&run, desc).to_json())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Check {
            steps,
            invariant,
            workers,
        } => {
            if workers == 0 {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            let ex = Explorer::default().with_workers(workers);
            let v = ex.explore(steps, |s| invariant.holds(s))?;
            match &v.counterexample {
                None => {
                    writeln!(out, "holds (explored {})", v.explored)?;
                    Ok(EXIT_OK)
                }
                Some(c) => {
                    writeln!(
                        out,
                        "violated at event {} (explored {})",
                        c.step, v.explored
                    )?;
                    writeln!(out, "counterexample: {}", c.trace)?;
                    Ok(EXIT_FAIL)
                }
            }
        }
        Command::Search {
            complete_at,
            expect_found,
        } => match Explorer::default().search_completion(complete_at)? {
            Some(t) => {
                writeln!(out, "{t}")?;
                Ok(EXIT_OK)
            }
            None => {
                writeln!(out, "none")?;
                Ok(if expect_found { EXIT_FAIL } else { EXIT_OK })
            }
        },
        Command::Sweep {
            protocol,
            starter,
            dummy_first,
        } => {
            let results = match protocol {
                Protocol::Lynch => {
                    if dummy_first || starter != Terminal::B {
                        return Err(CliError::Usage(
                            "the lynch sweep runs with B starting and no dummy file".into(),
                        ));
                    }
                    sweep_lynch()?
                }
                Protocol::Ab => sweep_ab(starter, dummy_first)?,
            };
            for r in &results {
                writeln!(out, "{r}")?;
            }
            let valid: Vec<String> = results
                .iter()
                .filter(|r| r.valid)
                .map(|r| match r.number {
                    Some(n) => n.to_string(),
                    None => {
                        let b: Vec<char> = r.bits.chars().collect();
                        format!("({},{})", b[0], b[1])
                    }
                })
                .collect();
            writeln!(out, "valid: {}", valid.join(" "))?;
            Ok(EXIT_OK)
        }
        Command::Fsm {
            errors,
            rounds,
            exhaustive,
            dot,
        } => {
            let graph = match exhaustive {
                Some(n) => {
                    let init = ab_init(&AbConfig::default()).map_err(CheckError::from)?;
                    let mut g = FsmGraph::default();
                    for t in enumerate(n).map_err(CheckError::from)? {
                        g.add_trace(&system_trace(&run_trace(&init, &t)?));
                    }
                    g
                }
                None => extract_fsm(&[default_ab_run(&errors, rounds)?]),
            };
            let text = to_dot(&graph);
            let nodes: Vec<String> = graph.nodes.iter().map(|n| n.to_string()).collect();
            match dot {
                Some(path) => {
                    std::fs::write(&path, &text)?;
                    writeln!(out, "nodes: {}", nodes.join(" "))?;
                    writeln!(out, "edges: {}", graph.edges.len())?;
                    writeln!(out, "wrote {}", path.display())?;
                }
                None => write!(out, "{text}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Motif {
            errors,
            length,
            with,
        } => {
            let base = match &errors {
                ErrorSpec::Bits(t) => t.clone(),
                ErrorSpec::Canonical => canonical().to_interleaved(),
                other => other.trace(length.unwrap_or(12))?,
            };
            let n = length.unwrap_or(base.len());
            if n < base.len() {
                return Err(CliError::Usage(format!(
                    "--length {n} is shorter than the {}-event error sequence",
                    base.len()
                )));
            }
            let si = base.resized(n);
            writeln!(out, "{}", motif(&si)?)?;
            if let Some(other) = with {
                let sj = match other {
                    ErrorSpec::Bits(t) => t,
                    ErrorSpec::Canonical => canonical().to_interleaved(),
                    o => o.trace(n)?,
                }
                .resized(n);
                writeln!(out)?;
                writeln!(out, "{}", motif(&sj)?)?;
                let r = superpose_check(&si, &sj)?;
                writeln!(out)?;
                writeln!(out, "{}", motif(&r.sum)?)?;
                let fmt_edges = |e: &std::collections::BTreeSet<(u8, u8)>| {
                    e.iter()
                        .map(|(a, b)| format!("{a}-{b}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                writeln!(out, "edges(sum):   {}", fmt_edges(&r.edges_sum))?;
                writeln!(out, "edges(union): {}", fmt_edges(&r.edges_union))?;
                writeln!(out, "additive: {}", r.additive)?;
            }
            Ok(EXIT_OK)
        }
    }
}
