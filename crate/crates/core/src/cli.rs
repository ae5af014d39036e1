//! The `valtree` command line.
//!
//! Exit codes: 0 success, 2 parse or invalid input, 3 resource bound, 4 unmet
//! precondition or unsupported input, 5 internal invariant violated (including a
//! non-uniform fiber report on a valid instance).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::decide::decide_psi;
use crate::error::{Error, Result};
use crate::exact_algebra::{parse_rational, Bounds, QPoly};
use crate::io::{format_structure, parse_choice_system, parse_formula_file, parse_sentence_file, parse_structure, FieldSpec};
use crate::measure::{measure_with, MeasureConfig};
use crate::par::Execution;
use crate::structures::{enumerate_structure_extensions, fiber_report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-oriented output.
    Text,
    /// One `key=value ...` record per line.
    Lines,
}

#[derive(Debug, Parser)]
#[command(name = "valtree", version, about = "Exact computations with trees of valuation rings")]
pub struct Cli {
    /// Largest accepted degree of an input polynomial.
    #[arg(long, global = true, default_value_t = 6)]
    pub degree_bound: usize,
    /// Starting p-adic precision. Accepted for compatibility; all computations are exact.
    #[arg(long, global = true, default_value_t = 20)]
    pub precision: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List every extension of a structure to a larger constant field.
    Extensions { structure: PathBuf, field: PathBuf },
    /// Measure of a formula over a structure.
    Measure {
        structure: PathBuf,
        formula: PathBuf,
        /// Also adjoin the roots of this polynomial (`c0,c1,..,1`); repeatable.
        #[arg(long)]
        adjoin: Vec<String>,
    },
    /// Decide a sentence file; print a witness when consistent.
    Decide {
        sentence: PathBuf,
        /// Write the witness structure here instead of printing it.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Fibers of restriction from extensions of LARGE to those of SMALL, along EXTENSION.
    Fibers { small: PathBuf, large: PathBuf, extension: PathBuf },
    /// Smoothness of a choice system at each element.
    Smooth {
        system: PathBuf,
        /// Only check this element.
        #[arg(long)]
        element: Option<String>,
    },
    /// Parse a formula file and print it canonically.
    Parse { formula: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_poly_arg(text: &str) -> Result<QPoly> {
    let coeffs = text.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    Ok(QPoly::new(coeffs))
}

/// Runs a parsed command line, writing results to `out`. Returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let bounds = Bounds {
        degree: cli.degree_bound,
        ..Bounds::default()
    };
    if cli.degree_bound == 0 {
        return Err(Error::invalid("--degree-bound must be positive"));
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let cfg = MeasureConfig { bounds, exec };
    let lines = cli.format == Format::Lines;
    let w = |out: &mut dyn Write, s: String| -> Result<()> {
        writeln!(out, "{s}").map_err(|e| Error::invalid(format!("write failed: {e}")))
    };
    match &cli.command {
        Command::Extensions { structure, field } => {
            let s = parse_structure(&read(structure)?, bounds)?;
            let (_, emb) = FieldSpec::parse_file(&read(field)?)?.build_over(s.field(), bounds)?;
            let set = enumerate_structure_extensions(&s, &emb, exec)?;
            for (i, m) in set.members.iter().enumerate() {
                let nodes: Vec<String> = (0..m.tree().len())
                    .map(|j| format!("{}={{{}}}", m.tree().name(j), m.handle(j)))
                    .collect();
                w(out, format!("extension={i} {}", nodes.join(" ")))?;
            }
            if lines {
                w(out, format!("count={} field={}", set.len(), set.overfield.label()))?;
            }
        }
        Command::Measure { structure, formula, adjoin } => {
            let s = parse_structure(&read(structure)?, bounds)?;
            let file = parse_formula_file(&read(formula)?, Some(s.tree()))?;
            let params = file.params(&s)?;
            let extra = adjoin.iter().map(|a| parse_poly_arg(a)).collect::<Result<Vec<_>>>()?;
            let r = measure_with(&file.formula, &params, &s, &extra, cfg)?;
            w(out, r.to_string())?;
        }
        Command::Decide { sentence, witness } => {
            let sf = parse_sentence_file(&read(sentence)?)?;
            let v = decide_psi(&sf.sentence, &sf.tree, &sf.chi, cfg)?;
            w(out, format!("consistent={}", v.consistent))?;
            for n in &v.per_node {
                let mut line = format!("node={} char={} satisfiable={}", n.node, n.characteristic, n.satisfiable);
                if let Some((e, r)) = n.witness {
                    line.push_str(&format!(" extension={e} root={r}"));
                }
                w(out, line)?;
            }
            if let Some(s) = &v.witness_structure {
                let text = format_structure(s);
                match witness {
                    Some(path) => fs::write(path, &text)
                        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))?,
                    None if !lines => w(out, text.trim_end().to_string())?,
                    None => {}
                }
            }
        }
        Command::Fibers { small, large, extension } => {
            let s_k = parse_structure(&read(small)?, bounds)?;
            let s_l = parse_structure(&read(large)?, bounds)?;
            let (_, emb) = FieldSpec::parse_file(&read(extension)?)?.build_over(s_k.field(), bounds)?;
            let r = fiber_report(&s_k, &s_l, &emb, exec)?;
            let sizes: Vec<String> = r.sizes.iter().map(ToString::to_string).collect();
            w(
                out,
                format!(
                    "fibers=[{}] uniform={} ratio={} small={} large={}",
                    sizes.join(","),
                    r.uniform,
                    r.ratio,
                    r.small_extensions,
                    r.big_extensions
                ),
            )?;
            if !r.uniform {
                return Ok(5);
            }
        }
        Command::Smooth { system, element } => {
            let sys = parse_choice_system(&read(system)?)?;
            let targets = match element {
                Some(name) => vec![sys.element(name)?],
                None => (0..sys.len()).collect(),
            };
            let mut all = true;
            for x in targets {
                let verdict = match sys.check_smooth_at(x)? {
                    Some(n) => n.to_string(),
                    None => {
                        all = false;
                        "no".to_string()
                    }
                };
                w(out, format!("element={} smooth={verdict}", sys.names()[x]))?;
            }
            let total = sys.partial_choices(&sys.full())?.len();
            w(out, format!("smooth={all} choices={total}"))?;
        }
        Command::Parse { formula } => {
            let file = parse_formula_file(&read(formula)?, None)?;
            for (name, t) in &file.lets {
                w(out, format!("let {name} = {t}"))?;
            }
            w(out, file.formula.to_string())?;
        }
    }
    Ok(0)
}

/// Entry point used by the binary: parses `args`, runs, reports errors on stderr.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
