//! Command-line front end for the mixed sequent calculus kernel.
//!
//! All commands are file-to-file transformations over the s-expression
//! proof formats. Exit codes: 0 success, 1 invalid proof or no proof found,
//! 2 hypothesis/precondition violation, 3 I/O or parse error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mixed_core::calculus::path_display;
use mixed_core::cutelim::{self, ReductionStep};
use mixed_core::embeddings::{self, check_lj, check_lk, EmbedError, LjDerivation, LkDerivation};
use mixed_core::formula::{parse_formula, FormulaSet, Policy, PolicyError};
use mixed_core::linear::{self, LlDerivation, LlRule};
use mixed_core::oracle::{self, SearchConfig};
use mixed_core::sexpr;
use mixed_core::{check_derivation, is_stable, Derivation, Formula, PSequent};

const EXIT_INVALID: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mixed",
    about = "Proof kernel for a mixed classical/intuitionistic sequent calculus",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetRole {
    Lk,
    Lj,
}

#[derive(Subcommand)]
enum Command {
    /// Check a proof file; the format (mixed, LK, LJ, linear) is detected
    /// from the root rule tag.
    Check {
        input: PathBuf,
        /// Policy spec: all, bot, cvars, or file:<path>.
        #[arg(long, default_value = "cvars")]
        policy: String,
    },
    /// Rewrite a mixed proof to cut-free form.
    Normalize {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print one line per reduction step to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Translate a mixed proof into a linear-logic proof; the result is
    /// checked before it is written.
    TranslateLl {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Embed an LK proof into the mixed calculus.
    EmbedLk {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract an LK proof from a mixed proof by fusing body and stoup.
    ExtractLk {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Embed an LJ proof into the mixed calculus (stoup only).
    EmbedLj {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract an LJ proof from a mixed proof (normalizes first).
    ExtractLj {
        input: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bounded backward search for a cut-free proof of a sequent
    /// (`G |- D ; S` given as text).
    Prove {
        sequent: String,
        #[arg(long, default_value = "cvars")]
        policy: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        mult_cap: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the stability and membership hypotheses of a formula set
    /// (one formula per line) for use as K (LK side) or I (LJ side).
    PolicyCheck {
        set_file: PathBuf,
        #[arg(long, default_value = "cvars")]
        policy: String,
        /// Which embedding's hypotheses to enforce for the exit status.
        #[arg(long = "as", value_enum)]
        role: Option<SetRole>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> CmdError {
    CmdError {
        code,
        message: message.into(),
    }
}

fn run(cmd: Command) -> Result<(), CmdError> {
    match cmd {
        Command::Check { input, policy } => check_cmd(&input, &policy),
        Command::Normalize {
            input,
            policy,
            output,
            trace,
        } => normalize_cmd(&input, &policy, output.as_deref(), trace),
        Command::TranslateLl {
            input,
            policy,
            output,
        } => translate_ll_cmd(&input, &policy, output.as_deref()),
        Command::EmbedLk {
            input,
            policy,
            output,
        } => embed_lk_cmd(&input, &policy, output.as_deref()),
        Command::ExtractLk {
            input,
            policy,
            output,
        } => extract_lk_cmd(&input, &policy, output.as_deref()),
        Command::EmbedLj {
            input,
            policy,
            output,
        } => embed_lj_cmd(&input, &policy, output.as_deref()),
        Command::ExtractLj {
            input,
            policy,
            output,
        } => extract_lj_cmd(&input, &policy, output.as_deref()),
        Command::Prove {
            sequent,
            policy,
            depth,
            mult_cap,
            output,
        } => prove_cmd(&sequent, &policy, depth, mult_cap, output.as_deref()),
        Command::PolicyCheck {
            set_file,
            policy,
            role,
        } => policy_check_cmd(&set_file, &policy, role),
    }
}

fn load_policy(spec: &str) -> Result<Policy, CmdError> {
    Policy::from_spec(spec).map_err(|e: PolicyError| fail(EXIT_IO, e.to_string()))
}

fn read_input(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CmdError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_mlp(text: &str) -> Result<Derivation, CmdError> {
    Derivation::from_proof_text(text).map_err(|e| fail(EXIT_IO, e))
}

fn checked_mlp(text: &str, policy: &Policy) -> Result<Derivation, CmdError> {
    let d = parse_mlp(text)?;
    let report = check_derivation(&d, policy);
    if !report.is_ok() {
        return Err(fail(EXIT_INVALID, format!("invalid proof:\n{report}")));
    }
    Ok(d)
}

fn embed_error(e: EmbedError) -> CmdError {
    match e {
        EmbedError::Hypothesis(_) => fail(EXIT_HYPOTHESIS, e.to_string()),
        _ => fail(EXIT_INVALID, e.to_string()),
    }
}

fn check_cmd(input: &Path, policy_spec: &str) -> Result<(), CmdError> {
    let text = read_input(input)?;
    let sx = sexpr::parse(&text).map_err(|e| fail(EXIT_IO, e.to_string()))?;
    let root_tag = sexpr::decode_node(&sx)
        .map_err(|e| fail(EXIT_IO, e.to_string()))?
        .tag
        .to_string();
    let report = if root_tag.starts_with("lk.") {
        check_lk(&LkDerivation::from_sexpr(&sx).map_err(|e| fail(EXIT_IO, e))?)
    } else if root_tag.starts_with("lj.") {
        check_lj(&LjDerivation::from_sexpr(&sx).map_err(|e| fail(EXIT_IO, e))?)
    } else if LlRule::from_tag(&root_tag).is_some() {
        linear::check_ll(&LlDerivation::from_sexpr(&sx).map_err(|e| fail(EXIT_IO, e))?)
    } else {
        let policy = load_policy(policy_spec)?;
        let d = Derivation::from_sexpr(&sx).map_err(|e| fail(EXIT_IO, e))?;
        check_derivation(&d, &policy)
    };
    if report.is_ok() {
        println!("ok");
        Ok(())
    } else {
        Err(fail(EXIT_INVALID, format!("invalid proof:\n{report}")))
    }
}

fn normalize_cmd(
    input: &Path,
    policy_spec: &str,
    output: Option<&Path>,
    trace: bool,
) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = checked_mlp(&read_input(input)?, &policy)?;
    let mut steps: Vec<ReductionStep> = Vec::new();
    let sink = if trace { Some(&mut steps) } else { None };
    let normal = cutelim::normalize_with(&d, &policy, cutelim::DEFAULT_BUDGET, sink)
        .map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    if trace {
        for (i, step) in steps.iter().enumerate() {
            eprintln!(
                "step {}: path {} degree {}",
                i + 1,
                path_display(&step.path),
                step.degree
            );
        }
    }
    write_output(output, &normal.to_proof_text())
}

fn translate_ll_cmd(
    input: &Path,
    policy_spec: &str,
    output: Option<&Path>,
) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = checked_mlp(&read_input(input)?, &policy)?;
    let ll = linear::translate_derivation(&d, &policy)
        .map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    // Fail closed: never emit a witness that does not check.
    let report = linear::check_ll(&ll);
    if !report.is_ok() {
        return Err(fail(
            EXIT_INVALID,
            format!("internal: translated proof fails the linear checker:\n{report}"),
        ));
    }
    let expected = linear::sequent_image(&d.conclusion, &policy);
    if ll.conclusion != expected {
        return Err(fail(
            EXIT_INVALID,
            format!(
                "internal: translated conclusion `{}` differs from the image `{}`",
                ll.conclusion, expected
            ),
        ));
    }
    write_output(output, &ll.to_proof_text())
}

/// Subformula closure of every formula in the set.
fn closure(set: FormulaSet) -> FormulaSet {
    let mut out = FormulaSet::new();
    for f in set {
        out.extend(f.subformulas());
    }
    out
}

fn embed_lk_cmd(input: &Path, policy_spec: &str, output: Option<&Path>) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = LkDerivation::from_proof_text(&read_input(input)?).map_err(|e| fail(EXIT_IO, e))?;
    let k = closure(d.all_formulas());
    let m = embeddings::lk_to_mlp(&d, &policy, &k).map_err(embed_error)?;
    write_output(output, &m.to_proof_text())
}

fn extract_lk_cmd(input: &Path, policy_spec: &str, output: Option<&Path>) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = parse_mlp(&read_input(input)?)?;
    let k = closure(d.all_formulas());
    let lk = embeddings::mlp_to_lk(&d, &policy, &k).map_err(embed_error)?;
    write_output(output, &lk.to_proof_text())
}

fn embed_lj_cmd(input: &Path, policy_spec: &str, output: Option<&Path>) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = LjDerivation::from_proof_text(&read_input(input)?).map_err(|e| fail(EXIT_IO, e))?;
    let m = embeddings::lj_to_mlp(&d, &policy).map_err(embed_error)?;
    write_output(output, &m.to_proof_text())
}

fn extract_lj_cmd(input: &Path, policy_spec: &str, output: Option<&Path>) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let d = parse_mlp(&read_input(input)?)?;
    let i = closure(d.all_formulas());
    let lj = embeddings::mlp_to_lj(&d, &policy, &i).map_err(embed_error)?;
    write_output(output, &lj.to_proof_text())
}

fn prove_cmd(
    sequent: &str,
    policy_spec: &str,
    depth: usize,
    mult_cap: usize,
    output: Option<&Path>,
) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let goal = PSequent::parse(sequent).map_err(|e| fail(EXIT_IO, e.to_string()))?;
    let cfg = SearchConfig::new(depth, mult_cap);
    match oracle::prove_bounded(&goal, &policy, cfg) {
        Some(d) => write_output(output, &d.to_proof_text()),
        None => Err(fail(EXIT_INVALID, "unknown (bound reached)")),
    }
}

fn policy_check_cmd(
    set_file: &Path,
    policy_spec: &str,
    role: Option<SetRole>,
) -> Result<(), CmdError> {
    let policy = load_policy(policy_spec)?;
    let text = read_input(set_file)?;
    let mut set = FormulaSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f =
            parse_formula(line).map_err(|e| fail(EXIT_IO, format!("line {}: {e}", lineno + 1)))?;
        set.insert(f);
    }
    let stable = is_stable(&set);
    let outside_p = set.iter().filter(|f| !policy.contains(f)).count();
    let inside_p = set.len() - outside_p;
    let has_zero = set.contains(&Formula::Zero);
    let has_bot = set.contains(&Formula::Bot);

    println!("formulas: {}", set.len());
    println!("stable: {}", if stable { "yes" } else { "no" });
    println!(
        "lk side (K): within P: {}; 0 absent: {}",
        if outside_p == 0 {
            "yes".to_string()
        } else {
            format!("no ({outside_p} outside)")
        },
        if has_zero { "no" } else { "yes" },
    );
    println!(
        "lj side (I): disjoint from P: {}; bot absent: {}",
        if inside_p == 0 {
            "yes".to_string()
        } else {
            format!("no ({inside_p} inside)")
        },
        if has_bot { "no" } else { "yes" },
    );

    let ok = match role {
        None => stable,
        Some(SetRole::Lk) => stable && outside_p == 0 && !has_zero,
        Some(SetRole::Lj) => stable && inside_p == 0 && !has_bot,
    };
    if ok {
        Ok(())
    } else {
        Err(fail(EXIT_HYPOTHESIS, "hypotheses violated (see report above)"))
    }
}
