//! `mbqclab` — exact IQP* sampling, graph-state MBQC execution, dephasing,
//! discord detection, criteria checking, and a period-finding demo, wired
//! for reproducible file-based experiments.
//!
//! Exit codes: 0 success, 1 comparison mismatch, 2 validation error,
//! 3 cap violation, 64 unknown subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use mbqclab::criteria::classify_set;
use mbqclab::discord::{dephase_circuit_final, dephase_pure, is_zero_discord, DiscordVerdict};
use mbqclab::dist::ClassicalDistribution;
use mbqclab::error::{Error, Result};
use mbqclab::format::{
    load_program, load_set, load_state_input, product_basis_json, to_json_string, ProgramFile,
    ShorInput, ZdFile,
};
use mbqclab::iqp::{IqpCircuit, InputString};
use mbqclab::mbqc::{
    compile_iqp_to_mbqc, run_mbqc_exact, run_mbqc_sample_with, validate_compiled, PreState,
};
use mbqclab::shor::{ShorDemo, ShorInstance};
use mbqclab::state::format_outcome;
use mbqclab::{bits, rng};

#[derive(Parser)]
#[command(
    name = "mbqclab",
    version,
    about = "Exact IQP* circuit sampling, graph-state MBQC, dephased zero-discord states, and superficiality criteria",
    subcommand_required = true,
    arg_required_else_help = false
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Exact output distribution P(m|x) of an IQP* instance, as a TSV table
    IqpDist {
        #[arg(long = "in")]
        input: PathBuf,
        /// Input bit string x (defaults to all zeros; "0" is accepted as
        /// shorthand for the zero string of any width)
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw exact samples from P(m|x), one bit string per line
    IqpSample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile an instance to its graph-state MBQC program; prints the
    /// oracle-validation record for the instance
    MbqcCompile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an MBQC program file: exact output distribution, or seeded
    /// samples with --samples
    MbqcRun {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the exact transcript distribution here
        #[arg(long)]
        transcript_out: Option<PathBuf>,
    },
    /// Dephase: an instance file yields the computational-basis dephasing
    /// of its final state (over x); a program file yields its pre-state
    /// dephased in the schedule's fixed bases
    Dephase {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a state file (amplitudes, density matrix, or
    /// zero-discord table) is diagonal in some local product basis
    DiscordCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a set of MBQCs against the superficiality criteria
    CriteriaCheck {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor M by sampling the dephased period-finding state
    ShorDemo {
        /// Instance file {"m": .., "a": ..}; alternative to --m/--a
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of samples to draw
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total variation distance between two distribution files; exit 0 iff
    /// below the tolerance
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli.command) {
            Ok(code) => code,
            Err(err) => {
                eprintln!("error: {err}");
                if err.is_cap_violation() {
                    3
                } else {
                    2
                }
            }
        },
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand => 64,
                _ => 2,
            };
            let _ = err.print();
            code
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::IqpDist { input, x, out } => {
            let circuit = load_instance(&input)?;
            let x = parse_input(&circuit, x.as_deref())?;
            let dist = circuit.simulate(&x)?;
            emit(&out, &dist.to_tsv())?;
            Ok(0)
        }
        Command::IqpSample {
            input,
            x,
            seed,
            samples,
            out,
        } => {
            let circuit = load_instance(&input)?;
            let x = parse_input(&circuit, x.as_deref())?;
            let mut lines = String::new();
            for i in 0..samples {
                let m = circuit.sample_with(&x, &mut rng::substream(seed, i))?;
                lines.push_str(&format_outcome(m, circuit.nu()));
                lines.push('\n');
            }
            emit(&out, &lines)?;
            Ok(0)
        }
        Command::MbqcCompile { input, out } => {
            let circuit = load_instance(&input)?;
            let program = compile_iqp_to_mbqc(&circuit)?;
            let file = ProgramFile::from_compiled(&circuit, &program);
            fs::write(&out, to_json_string(&file)?)?;
            let validation = validate_compiled(&circuit)?;
            let report = serde_json::json!({
                "z_independent": validation.z_independent,
                "oracle_tvd": validation.oracle_tvd,
                "equivalent": validation.equivalent,
            });
            println!("{report}");
            Ok(0)
        }
        Command::MbqcRun {
            input,
            seed,
            samples,
            out,
            transcript_out,
        } => {
            let program = load_program(&input)?;
            match samples {
                None => {
                    let run = run_mbqc_exact(&program)?;
                    emit(&out, &run.outputs.to_tsv())?;
                    if let Some(path) = transcript_out {
                        fs::write(path, run.transcripts.to_tsv())?;
                    }
                }
                Some(count) => {
                    let seed = seed.unwrap_or(0);
                    let mut lines = String::new();
                    for i in 0..count {
                        let outcome =
                            run_mbqc_sample_with(&program, &mut rng::substream(seed, i))?;
                        lines.push_str(&format!(
                            "{}\t{}\n",
                            format_outcome(outcome.transcript, outcome.num_qubits),
                            format_outcome(outcome.output, outcome.output_bits),
                        ));
                    }
                    emit(&out, &lines)?;
                }
            }
            Ok(0)
        }
        Command::Dephase { input, x, out } => {
            let text = fs::read_to_string(&input)?;
            let zd = if looks_like_instance(&text) {
                let circuit = IqpCircuit::parse_instance(&text)?;
                let x = parse_input(&circuit, x.as_deref())?;
                dephase_circuit_final(&circuit, &x)?
            } else {
                let program = load_program(&input)?;
                let basis = program.schedule().fixed_basis_by_qubit().ok_or_else(|| {
                    Error::invalid(
                        "schedule",
                        "an adaptive program has no fixed dephasing basis",
                    )
                })?;
                match program.pre_state() {
                    PreState::Pure(s) => dephase_pure(s, &basis)?,
                    PreState::Dense(d) => mbqclab::discord::dephase_dense(d, &basis)?,
                    PreState::Dephased(zd) => {
                        mbqclab::discord::dephase_dense(&zd.densify()?, &basis)?
                    }
                }
            };
            emit(&out, &to_json_string(&ZdFile::from_state(&zd))?)?;
            Ok(0)
        }
        Command::DiscordCheck {
            input,
            tolerance,
            format,
            out,
        } => {
            let text = fs::read_to_string(&input)?;
            let dm = match load_state_input(&text)? {
                PreState::Pure(s) => s.density_matrix()?,
                PreState::Dense(d) => d,
                PreState::Dephased(zd) => zd.densify()?,
            };
            let verdict = is_zero_discord(&dm, tolerance)?;
            let json = match &verdict {
                DiscordVerdict::ZeroDiscord(basis) => serde_json::json!({
                    "status": "ZERO_DISCORD",
                    "basis": product_basis_json(basis),
                }),
                DiscordVerdict::Discordant { max_off_diagonal } => serde_json::json!({
                    "status": "DISCORDANT",
                    "max_off_diagonal": max_off_diagonal,
                }),
                DiscordVerdict::Inconclusive(reason) => serde_json::json!({
                    "status": "INCONCLUSIVE",
                    "reason": reason,
                }),
            };
            let rendered = match format {
                OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&json)?),
                OutputFormat::Table => match &verdict {
                    DiscordVerdict::ZeroDiscord(_) => {
                        "ZERO_DISCORD\tdiagonal in the reported product basis\n".to_string()
                    }
                    DiscordVerdict::Discordant { max_off_diagonal } => format!(
                        "DISCORDANT\toff-diagonal mass {max_off_diagonal:.3e} in the only candidate basis\n"
                    ),
                    DiscordVerdict::Inconclusive(reason) => format!("INCONCLUSIVE\t{reason}\n"),
                },
            };
            emit(&out, &rendered)?;
            Ok(0)
        }
        Command::CriteriaCheck { set, format, out } => {
            let set = load_set(&set)?;
            let verdict = classify_set(&set)?;
            let rendered = match format {
                OutputFormat::Json => to_json_string(&verdict)?,
                OutputFormat::Table => render_verdict_report(&verdict)?,
            };
            emit(&out, &rendered)?;
            Ok(0)
        }
        Command::ShorDemo {
            input,
            m,
            a,
            seed,
            samples,
            format,
            out,
        } => {
            let (m, a) = match (input, m, a) {
                (Some(path), None, None) => {
                    let text = fs::read_to_string(&path)?;
                    let spec: ShorInput = serde_json::from_str(&text)
                        .map_err(|e| Error::Malformed(e.to_string()))?;
                    (spec.m, spec.a)
                }
                (None, Some(m), Some(a)) => (m, a),
                _ => {
                    return Err(Error::invalid(
                        "arguments",
                        "provide either --in FILE or both --m and --a",
                    ))
                }
            };
            let demo = ShorDemo::prepare(ShorInstance::new(m, a)?)?;
            let report = demo.run(seed, samples)?;
            let rendered = match format {
                OutputFormat::Json => to_json_string(&report)?,
                OutputFormat::Table => {
                    let mut text = format!(
                        "M={} a={} nu={} n={} seed={} samples={}\n",
                        report.m,
                        report.a,
                        report.nu,
                        report.n,
                        report.seed,
                        report.samples.len()
                    );
                    for s in &report.samples {
                        text.push_str(&format!(
                            "c={} period={} verified={} {}\n",
                            s.sample, s.candidate_period, s.verified, s.outcome
                        ));
                    }
                    match report.factors {
                        Some((f1, f2)) => {
                            text.push_str(&format!("factors: {f1} x {f2}\n"));
                        }
                        None => text.push_str("no factors found\n"),
                    }
                    text
                }
            };
            emit(&out, &rendered)?;
            Ok(0)
        }
        Command::Compare { a, b, tolerance } => {
            let da = ClassicalDistribution::from_tsv(&fs::read_to_string(&a)?)?;
            let db = ClassicalDistribution::from_tsv(&fs::read_to_string(&b)?)?;
            let tvd = da.tvd(&db)?;
            println!("{tvd:.16e}");
            Ok(if tvd < tolerance { 0 } else { 1 })
        }
    }
}

fn load_instance(path: &Path) -> Result<IqpCircuit> {
    IqpCircuit::parse_instance(&fs::read_to_string(path)?)
}

/// Human-readable verdict report for `--format table`.
fn render_verdict_report(verdict: &mbqclab::criteria::CriterionVerdict) -> Result<String> {
    let status = serde_json::to_value(verdict.status)?;
    let mut text = format!("verdict: {}\n", status.as_str().unwrap_or("UNKNOWN"));
    let e = &verdict.evidence;
    if let Some(t) = e["transcript"].as_str() {
        text.push_str(&format!(
            "every member deterministically yields transcript {t}\n"
        ));
    }
    if e.get("common_basis").is_some() {
        text.push_str("one fixed local basis serves every member (measure ahead of time)\n");
    }
    let tvd_line = |tvds: &Vec<serde_json::Value>, label: &str| {
        let values: Vec<f64> = tvds.iter().filter_map(|v| v.as_f64()).collect();
        format!("{label}: {values:?}\n")
    };
    if let Some(tvds) = e["per_member_replay_tvd"].as_array() {
        text.push_str(&tvd_line(tvds, "per-member replay tvd"));
    }
    if e.get("basis").is_some() {
        text.push_str("pre-state is zero-discord; per-bit replacement validated\n");
    }
    if let Some(tvds) = e["per_member_replacement_tvd"].as_array() {
        text.push_str(&tvd_line(tvds, "per-member replacement tvd"));
    }
    if let Some(reasons) = e["reasons"].as_array() {
        for reason in reasons {
            text.push_str(&format!("reason: {}\n", reason.as_str().unwrap_or("?")));
        }
    }
    if let Some(checkers) = e["checkers"].as_array() {
        for checker in checkers {
            let name = checker["checker"].as_str().unwrap_or("?");
            let status = checker["status"].as_str().unwrap_or("?");
            text.push_str(&format!("{name}: {status}\n"));
        }
    }
    Ok(text)
}

/// Instance documents carry a "gates" field; program files carry
/// "pre_state".
fn looks_like_instance(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .map(|v| v.get("gates").is_some() && v.get("pre_state").is_none())
        .unwrap_or(false)
}

/// Parse --x: exact n-bit string, or an all-zeros string of any length as
/// shorthand for the zero input.
fn parse_input(circuit: &IqpCircuit, x: Option<&str>) -> Result<InputString> {
    match x {
        None => InputString::zero(circuit.n(), circuit.nu()),
        Some(text) => {
            let (value, width) = bits::parse_bits(text)?;
            if width == circuit.n() {
                InputString::for_circuit(circuit, value)
            } else if value == 0 {
                InputString::zero(circuit.n(), circuit.nu())
            } else {
                Err(Error::BitLengthMismatch {
                    expected: circuit.n(),
                    actual: width,
                })
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
