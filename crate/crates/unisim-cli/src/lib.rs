//! Command-line front end: matrix file I/O and one subcommand per
//! library capability, emitting machine-readable JSON on stdout and
//! diagnostics on stderr.
//!
//! Exit codes: `decide` maps its verdict to 0 (similar), 1 (not similar)
//! or 2 (inconclusive); other subcommands exit 0 on success. Usage errors
//! exit 64, unreadable or malformed input files 65, and domain errors
//! (class violations, convergence failures) exit 3.

use std::collections::HashMap;
use std::fmt;
use std::fs;

use num_complex::Complex64;
use serde::Serialize;

use unisim::corpus::{lookup, CorpusItem, GenRequest, Seed};
use unisim::decide::{decide, DecisionReport, Verdict};
use unisim::genpos::f_report;
use unisim::invariants::{gram_family, specht_distinguisher, GramFamily};
use unisim::matrix::{Matrix, Tolerances};
use unisim::reconstruct::{reconstruct_general_position, reconstruct_indecomposable};
use unisim::schur::littlewood_canonical;

pub const EXIT_SIMILAR: i32 = 0;
pub const EXIT_NOT_SIMILAR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_DOMAIN_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA_ERROR: i32 = 65;

const USAGE: &str = "\
unisim — unitary similarity testing for complex square matrices

USAGE:
    unisim decide <A.json> <B.json> [--tol T] [--word-len L] [--seed S]
    unisim canon <A.json> [--tol T]
    unisim invariants <A.json>
    unisim reconstruct <F.json> --class <indec|genpos> [--tol T]
    unisim genpos <A.json> [--tol T]
    unisim specht <A.json> <B.json> --max-len L [--tol T]
    unisim corpus <usp|mc|krd|indec|genpos> [--n N] [--seed S] [--c RE,IM]

Matrix files are JSON: {\"n\": 2, \"entries\": [[re, im], ...]} with n^2
row-major entries. `invariants` emits the Gram family consumed by
`reconstruct`. `decide` exits 0 when similar, 1 when not similar, 2 when
inconclusive.
";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<unisim::Error> for CliError {
    fn from(e: unisim::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses a matrix file, with distinct diagnostics for malformed JSON,
/// a wrong entry count and non-finite entries.
pub fn parse_matrix(text: &[u8]) -> Result<Matrix, String> {
    let text = std::str::from_utf8(text).map_err(|_| "input is not UTF-8".to_string())?;
    serde_json::from_str::<Matrix>(text).map_err(|e| e.to_string())
}

fn read_matrix(path: &str) -> CliResult<Matrix> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
    parse_matrix(&bytes).map_err(|m| CliError::Data(format!("{path}: {m}")))
}

fn read_family(path: &str) -> CliResult<GramFamily> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
    serde_json::from_slice::<GramFamily>(&bytes)
        .map_err(|e| CliError::Data(format!("{path}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

struct Flags {
    values: HashMap<String, String>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> CliResult<Self> {
        let mut values = HashMap::new();
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let Some(name) = flag.strip_prefix("--") else {
                return Err(CliError::Usage(format!("unexpected argument '{flag}'")));
            };
            if !allowed.contains(&name) {
                return Err(CliError::Usage(format!("unknown flag '--{name}'")));
            }
            let Some(value) = it.next() else {
                return Err(CliError::Usage(format!("flag '--{name}' needs a value")));
            };
            values.insert(name.to_string(), value.clone());
        }
        Ok(Self { values })
    }

    fn tolerances(&self) -> CliResult<Tolerances> {
        match self.values.get("tol") {
            None => Ok(Tolerances::default()),
            Some(raw) => {
                let t: f64 = raw
                    .parse()
                    .map_err(|_| CliError::Usage(format!("invalid --tol '{raw}'")))?;
                Tolerances::new(t / 10.0, t, t / 10.0)
                    .map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }

    fn usize_flag(&self, name: &str, default: usize) -> CliResult<usize> {
        match self.values.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid --{name} '{raw}'"))),
        }
    }

    fn u64_flag(&self, name: &str, default: u64) -> CliResult<u64> {
        match self.values.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid --{name} '{raw}'"))),
        }
    }

    fn complex_flag(&self, name: &str) -> CliResult<Option<Complex64>> {
        let Some(raw) = self.values.get(name) else {
            return Ok(None);
        };
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Usage(format!(
                "invalid --{name} '{raw}': expected RE,IM"
            )));
        }
        let re: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid --{name} '{raw}'")))?;
        let im: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid --{name} '{raw}'")))?;
        Ok(Some(Complex64::new(re, im)))
    }

    fn str_flag(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }
}

fn cmd_decide(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 2)?;
    let flags = Flags::parse(rest, &["tol", "word-len", "seed"])?;
    let tol = flags.tolerances()?;
    let word_len = flags.usize_flag("word-len", 6)?;
    let seed = flags.u64_flag("seed", 0)?;
    let a = read_matrix(&paths[0])?;
    let b = read_matrix(&paths[1])?;
    let report: DecisionReport = decide(&a, &b, &tol, word_len, seed)?;
    let code = match report.verdict {
        Verdict::Similar => EXIT_SIMILAR,
        Verdict::NotSimilar => EXIT_NOT_SIMILAR,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    Ok((code, to_json(&report)))
}

fn cmd_canon(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 1)?;
    let flags = Flags::parse(rest, &["tol"])?;
    let tol = flags.tolerances()?;
    let a = read_matrix(&paths[0])?;
    let canon = littlewood_canonical(&a, &tol)?;
    Ok((0, to_json(&canon)))
}

fn cmd_invariants(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 1)?;
    Flags::parse(rest, &[])?;
    let a = read_matrix(&paths[0])?;
    Ok((0, to_json(&gram_family(&a))))
}

#[derive(Serialize)]
struct ReconstructOutput {
    matrix: Matrix,
    trace: unisim::reconstruct::ReconstructionTrace,
}

fn cmd_reconstruct(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 1)?;
    let flags = Flags::parse(rest, &["class", "tol"])?;
    let tol = flags.tolerances()?;
    let family = read_family(&paths[0])?;
    let (matrix, trace) = match flags.str_flag("class") {
        Some("indec") => reconstruct_indecomposable(&family, &tol)?,
        Some("genpos") => reconstruct_general_position(&family, &tol)?,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "invalid --class '{other}': expected indec or genpos"
            )))
        }
        None => return Err(CliError::Usage("--class is required".into())),
    };
    Ok((0, to_json(&ReconstructOutput { matrix, trace })))
}

fn cmd_genpos(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 1)?;
    let flags = Flags::parse(rest, &["tol"])?;
    let tol = flags.tolerances()?;
    let a = read_matrix(&paths[0])?;
    if !a.is_upper_triangular(tol.zero_tol) {
        return Err(CliError::Domain(
            "genpos expects an upper triangular matrix".into(),
        ));
    }
    Ok((0, to_json(&f_report(&a, &tol))))
}

#[derive(Serialize)]
struct SpechtOutput {
    word: Option<unisim::invariants::Word>,
}

fn cmd_specht(args: &[String]) -> CliResult<(i32, String)> {
    let (paths, rest) = split_positional(args, 2)?;
    let flags = Flags::parse(rest, &["max-len", "tol"])?;
    let tol = flags.tolerances()?;
    let max_len = flags.usize_flag("max-len", 6)?;
    let a = read_matrix(&paths[0])?;
    let b = read_matrix(&paths[1])?;
    let word = specht_distinguisher(&a, &b, max_len, &tol)?;
    Ok((0, to_json(&SpechtOutput { word })))
}

#[derive(Serialize)]
struct PairOutput {
    a: Matrix,
    b: Matrix,
}

fn cmd_corpus(args: &[String]) -> CliResult<(i32, String)> {
    let (names, rest) = split_positional(args, 1)?;
    let flags = Flags::parse(rest, &["n", "seed", "c"])?;
    let generator = lookup(&names[0]).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown generator '{}': expected usp, mc, krd, indec or genpos",
            names[0]
        ))
    })?;
    let req = GenRequest {
        n: flags
            .values
            .get("n")
            .map(|raw| {
                raw.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("invalid --n '{raw}'")))
            })
            .transpose()?,
        seed: Seed(flags.u64_flag("seed", 0)?),
        c: flags.complex_flag("c")?,
    };
    match generator.generate(&req)? {
        CorpusItem::Single(m) => Ok((0, to_json(&m))),
        CorpusItem::Pair(a, b) => Ok((0, to_json(&PairOutput { a, b }))),
    }
}

fn split_positional(args: &[String], count: usize) -> CliResult<(&[String], &[String])> {
    let split = args
        .iter()
        .position(|a| a.starts_with("--"))
        .unwrap_or(args.len());
    if split != count {
        return Err(CliError::Usage(format!(
            "expected {count} positional argument(s), got {split}"
        )));
    }
    Ok((&args[..count], &args[count..]))
}

/// Runs one command line; returns the exit code and the stdout payload.
/// Diagnostics go to stderr.
pub fn run(args: &[String]) -> (i32, String) {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return (EXIT_USAGE, String::new());
    };
    let rest = &args[1..];
    let outcome = match command.as_str() {
        "decide" => cmd_decide(rest),
        "canon" => cmd_canon(rest),
        "invariants" => cmd_invariants(rest),
        "reconstruct" => cmd_reconstruct(rest),
        "genpos" => cmd_genpos(rest),
        "specht" => cmd_specht(rest),
        "corpus" => cmd_corpus(rest),
        "--help" | "-h" | "help" => {
            return (0, USAGE.to_string());
        }
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    };
    match outcome {
        Ok((code, output)) => (code, output),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            (EXIT_USAGE, String::new())
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            (EXIT_DATA_ERROR, String::new())
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            (EXIT_DOMAIN_ERROR, String::new())
        }
    }
}
