//! The `kf` command line.
//!
//! Exit codes: `0` success / valid / consistent, `1` countermodel /
//! inconsistent, `2` exhausted, then the error codes in [`exit`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kf_core::fkd::{Consistency, FkdError};
use kf_core::henkin::{ConstructedModel, ConstructionConfig, ConstructionState, HenkinError, Placement};
use kf_core::oracle::{
    Oracle, OracleConfig, OracleError, OracleVerdict, SearchBounds, Theory, DEFAULT_BOUND_CAP, DEFAULT_WORK_LIMIT,
};
use kf_core::syntax::{print, print_full, Enumerator, Formula, Signature};
use serde::Serialize;

use crate::dot::{fkd_to_dot, lasso_to_dot};
use crate::format::{
    parse_sentence, FkdFile, FormatError, LassoDto, PositionDto, TheoryFile, VerdictFile, SCHEMA_VERSION,
};
use crate::store::{pretty, RunDir, StoreError, FKD_FILE};

pub mod exit {
    pub const OK: i32 = 0;
    pub const NEGATIVE: i32 = 1;
    pub const EXHAUSTED: i32 = 2;
    pub const INCONSISTENT_THEORY: i32 = 3;
    pub const STRICT_EXHAUSTED: i32 = 4;
    pub const CANCELLED: i32 = 5;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const NO_INPUT: i32 = 66;
    pub const SOFTWARE: i32 = 70;
    pub const IO: i32 = 74;
}

/// Environment variable capping every oracle bound.
pub const MAX_BOUND_CAP_VAR: &str = "KF_MAX_BOUND_CAP";

#[derive(Parser, Debug)]
#[command(name = "kf", version, about = "Entailment, diagrams and model construction for discrete linear modal logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a formula and print its normal forms.
    Parse(ParseArgs),
    /// Decide whether a sentence holds in every discrete linear model of a theory.
    Decide(DecideArgs),
    /// Print the representing formula of a diagram.
    Psi(PsiArgs),
    /// Test a diagram for consistency with a theory.
    Consistent(ConsistentArgs),
    /// Run the staged construction and write a run directory.
    Construct(ConstructArgs),
    /// Ask whether a sentence holds at a world of the constructed model.
    Query(QueryArgs),
    /// Render a diagram or a lasso.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
struct OracleArgs {
    /// Longest lasso prefix examined [default: derived from the closure size].
    #[arg(long)]
    max_prefix: Option<usize>,
    /// Longest lasso loop examined [default: derived from the closure size].
    #[arg(long)]
    max_loop: Option<usize>,
    /// Largest domain tried for quantified input.
    #[arg(long, default_value_t = 3)]
    max_domain: usize,
    /// Ceiling on the derived prefix and loop bounds.
    #[arg(long, default_value_t = DEFAULT_BOUND_CAP)]
    bound_cap: usize,
    /// Search work per oracle call.
    #[arg(long, default_value_t = DEFAULT_WORK_LIMIT)]
    work_limit: u64,
    /// Fail instead of treating an inconclusive search as Valid.
    #[arg(long)]
    strict: bool,
    /// Report Valid when a bounded search over quantified input fails.
    #[arg(long)]
    assume_bound_complete: bool,
}

impl OracleArgs {
    fn config(&self) -> Result<OracleConfig, Failure> {
        let mut c = OracleConfig {
            bounds: SearchBounds { max_prefix: self.max_prefix, max_loop: self.max_loop, max_domain: self.max_domain.max(1) },
            cap: self.bound_cap,
            strict: self.strict,
            assume_bound_complete: self.assume_bound_complete,
            work_limit: self.work_limit,
        };
        if let Some(limit) = env_cap()? {
            let capped = |v: usize| v.min(limit).max(1);
            c.cap = capped(c.cap);
            c.bounds.max_prefix = Some(c.bounds.max_prefix.map_or(limit, |v| v.min(limit)));
            c.bounds.max_loop = c.bounds.max_loop.map(capped);
            c.bounds.max_domain = capped(c.bounds.max_domain);
        }
        Ok(c)
    }
}

fn env_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(MAX_BOUND_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::new(exit::USAGE, format!("{MAX_BOUND_CAP_VAR} must be a natural number, got `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::new(exit::USAGE, format!("{MAX_BOUND_CAP_VAR}: {e}"))),
    }
}

#[derive(Args, Debug)]
struct LanguageArgs {
    /// Theory file whose signature to use.
    #[arg(short, long, conflicts_with = "atoms")]
    theory: Option<PathBuf>,
    /// Propositional signature, comma separated.
    #[arg(long, value_delimiter = ',')]
    atoms: Option<Vec<String>>,
}

impl LanguageArgs {
    fn signature(&self) -> Result<Signature, Failure> {
        match (&self.theory, &self.atoms) {
            (Some(p), _) => Ok(load_theory(p)?.signature().clone()),
            (None, Some(atoms)) => {
                let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
                Signature::propositional(&names).map_err(|e| Failure::new(exit::USAGE, e.to_string()))
            }
            (None, None) => Err(Failure::new(exit::USAGE, "give --theory or --atoms")),
        }
    }
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[command(flatten)]
    lang: LanguageArgs,
    #[arg(short, long)]
    formula: String,
    /// Also report the position in the sentence enumeration.
    #[arg(long)]
    index: bool,
}

#[derive(Args, Debug)]
struct DecideArgs {
    #[arg(short, long)]
    theory: PathBuf,
    #[arg(short, long)]
    formula: String,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Args, Debug)]
struct PsiArgs {
    #[arg(long)]
    fkd: PathBuf,
    /// Drop trailing empty worlds first.
    #[arg(long)]
    trimmed: bool,
}

#[derive(Args, Debug)]
struct ConsistentArgs {
    #[arg(long)]
    fkd: PathBuf,
    /// Theory over the diagram's signature [default: no axioms].
    #[arg(short, long)]
    theory: Option<PathBuf>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PlacementArg {
    Paper,
    Conservative,
}

#[derive(Args, Debug)]
struct ConstructionArgs {
    /// Order of ◇-witness candidates.
    #[arg(long, value_enum, default_value_t = PlacementArg::Paper)]
    placement: PlacementArg,
    /// Append an empty world every K idle stages; 0 disables.
    #[arg(long, default_value_t = kf_core::henkin::DEFAULT_APPEND_EVERY)]
    append_every: u64,
    #[command(flatten)]
    oracle: OracleArgs,
}

impl ConstructionArgs {
    fn config(&self) -> Result<ConstructionConfig, Failure> {
        Ok(ConstructionConfig {
            oracle: self.oracle.config()?,
            placement: match self.placement {
                PlacementArg::Paper => Placement::Paper,
                PlacementArg::Conservative => Placement::Conservative,
            },
            append_every: self.append_every,
        })
    }
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(short, long)]
    theory: PathBuf,
    #[arg(long)]
    stages: u64,
    /// Run directory to (re)create.
    #[arg(short, long, default_value = "kf-run")]
    out: PathBuf,
    #[command(flatten)]
    construction: ConstructionArgs,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Run directory written by `construct`; its stage cache is extended.
    #[arg(long, conflicts_with = "theory", required_unless_present = "theory")]
    run: Option<PathBuf>,
    /// Start from scratch on this theory without persisting anything.
    #[arg(short, long)]
    theory: Option<PathBuf>,
    #[arg(short, long)]
    world: usize,
    #[arg(short, long)]
    formula: String,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Give up once the construction reaches this stage.
    #[arg(long)]
    max_stages: Option<u64>,
    #[command(flatten)]
    construction: ConstructionArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
    format: ExportFormat,
    /// Diagram file.
    #[arg(long, group = "source")]
    fkd: Option<PathBuf>,
    /// Run directory; its latest diagram is exported.
    #[arg(long, group = "source")]
    run: Option<PathBuf>,
    /// Verdict file with a witnessing lasso.
    #[arg(long, group = "source")]
    model: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => exit::NO_INPUT,
            StoreError::Io { .. } => exit::IO,
            StoreError::Format { .. } => exit::DATA,
            StoreError::Replay { source, .. } => henkin_code(source),
        };
        Failure::new(code, e.to_string())
    }
}

impl From<HenkinError> for Failure {
    fn from(e: HenkinError) -> Self {
        Failure::new(henkin_code(&e), e.to_string())
    }
}

fn henkin_code(e: &HenkinError) -> i32 {
    match e {
        HenkinError::InconsistentTheory => exit::INCONSISTENT_THEORY,
        HenkinError::OracleExhausted { .. } | HenkinError::Fkd(FkdError::Exhausted) => exit::STRICT_EXHAUSTED,
        HenkinError::Cancelled { .. } => exit::CANCELLED,
        HenkinError::NotInLanguage(_) => exit::USAGE,
        HenkinError::Replay { .. } => exit::DATA,
        HenkinError::NoCandidate { .. } | HenkinError::Oracle(OracleError::WitnessRejected(_)) => exit::SOFTWARE,
        HenkinError::Fkd(_) | HenkinError::Oracle(_) => exit::DATA,
    }
}

fn oracle_code(e: &OracleError) -> i32 {
    match e {
        OracleError::WitnessRejected(_) => exit::SOFTWARE,
        _ => exit::USAGE,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound { exit::NO_INPUT } else { exit::IO };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn data(path: &Path) -> impl FnOnce(FormatError) -> Failure + '_ {
    move |e| Failure::new(exit::DATA, format!("{}: {e}", path.display()))
}

fn load_theory(path: &Path) -> Result<Theory, Failure> {
    TheoryFile::load(&read(path)?).map_err(data(path))
}

fn formula_arg(text: &str, sig: &Signature) -> Result<Formula, Failure> {
    parse_sentence(text, sig).map_err(|e| Failure::new(exit::USAGE, e.to_string()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(exit::IO, e.to_string()))
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("output serializes");
    s.push('\n');
    s
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "kf: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Cmd::Parse(a) => cmd_parse(a, out),
        Cmd::Decide(a) => cmd_decide(a, out),
        Cmd::Psi(a) => cmd_psi(a, out),
        Cmd::Consistent(a) => cmd_consistent(a, out),
        Cmd::Construct(a) => cmd_construct(a, out),
        Cmd::Query(a) => cmd_query(a, out),
        Cmd::Export(a) => cmd_export(a, out),
    }
}

#[derive(Serialize)]
struct ParseReport {
    schema_version: u32,
    formula: String,
    full: String,
    canonical: String,
    size: usize,
    modal_depth: usize,
    sentence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
}

fn cmd_parse(a: ParseArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let sig = a.lang.signature()?;
    let f = formula_arg(&a.formula, &sig)?;
    let canonical = f.canonical();
    let index = if a.index && f.is_sentence() { Enumerator::new(sig).index_of(&canonical) } else { None };
    let report = ParseReport {
        schema_version: SCHEMA_VERSION,
        formula: print(&f),
        full: print_full(&f),
        canonical: print(&canonical),
        size: f.size(),
        modal_depth: f.modal_depth(),
        sentence: f.is_sentence(),
        index,
    };
    emit(out, &json_line(&report))?;
    Ok(exit::OK)
}

fn cmd_decide(a: DecideArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let t = load_theory(&a.theory)?;
    let f = formula_arg(&a.formula, t.signature())?;
    let config = a.oracle.config()?;
    let v = Oracle::new(config).entails(&t, &f).map_err(|e| Failure::new(oracle_code(&e), e.to_string()))?;
    let (name, witness, code) = match &v {
        OracleVerdict::Valid => ("valid", None, exit::OK),
        OracleVerdict::Countermodel { model, position } => ("countermodel", Some((model, *position)), exit::NEGATIVE),
        OracleVerdict::Exhausted => ("exhausted", None, exit::EXHAUSTED),
    };
    emit(out, &json_line(&VerdictFile::new(name, witness)))?;
    if config.strict && matches!(v, OracleVerdict::Exhausted) {
        return Err(Failure::new(exit::STRICT_EXHAUSTED, "the search was inconclusive (strict mode)"));
    }
    Ok(code)
}

fn load_fkd(path: &Path) -> Result<(kf_core::LinearFkd, Signature), Failure> {
    FkdFile::load(&read(path)?).map_err(data(path))
}

fn cmd_psi(a: PsiArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (d, _) = load_fkd(&a.fkd)?;
    let psi = if a.trimmed { d.trimmed_representing_formula() } else { d.representing_formula() };
    emit(out, &format!("{}\n", print(&psi)))?;
    Ok(exit::OK)
}

fn cmd_consistent(a: ConsistentArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (d, sig) = load_fkd(&a.fkd)?;
    let t = match &a.theory {
        Some(p) => {
            let t = load_theory(p)?;
            if t.signature() != &sig {
                return Err(Failure::new(exit::DATA, "the theory and the diagram have different signatures"));
            }
            t
        }
        None => Theory::empty(sig),
    };
    let config = a.oracle.config()?;
    let c = d.is_t_consistent(&t, &Oracle::new(config)).map_err(|e| Failure::new(exit::DATA, e.to_string()))?;
    let (name, witness, code) = match &c {
        Consistency::Consistent { model, position } => ("consistent", Some((model, *position)), exit::OK),
        Consistency::Inconsistent => ("inconsistent", None, exit::NEGATIVE),
        Consistency::Exhausted => ("exhausted", None, exit::EXHAUSTED),
    };
    emit(out, &json_line(&VerdictFile::new(name, witness)))?;
    if config.strict && matches!(c, Consistency::Exhausted) {
        return Err(Failure::new(exit::STRICT_EXHAUSTED, "the search was inconclusive (strict mode)"));
    }
    Ok(code)
}

#[derive(Serialize)]
struct ConstructReport<'a> {
    schema_version: u32,
    run: &'a str,
    stages: u64,
    worlds: usize,
    decided: usize,
}

const FLUSH_EVERY: usize = 4096;

fn cmd_construct(a: ConstructArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let t = load_theory(&a.theory)?;
    let config = a.construction.config()?;
    let mut state = ConstructionState::init(t.clone(), config)?;
    let dir = RunDir::new(&a.out);
    let lock = dir.lock()?;
    dir.create(&lock, &t, &config)?;
    let mut pending = Vec::with_capacity(FLUSH_EVERY.min(a.stages as usize));
    for _ in 0..a.stages {
        pending.push(state.step()?);
        if pending.len() == FLUSH_EVERY {
            dir.append_stages(&lock, &pending)?;
            pending.clear();
        }
    }
    dir.append_stages(&lock, &pending)?;
    dir.write_fkd(&lock, state.fkd(), t.signature())?;
    let report = ConstructReport {
        schema_version: SCHEMA_VERSION,
        run: &a.out.to_string_lossy(),
        stages: state.stage(),
        worlds: state.fkd().world_count(),
        decided: state.decided().len(),
    };
    emit(out, &json_line(&report))?;
    Ok(exit::OK)
}

fn cmd_query(a: QueryArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let started = Instant::now();
    let timeout = match a.timeout {
        Some(s) if !(s.is_finite() && s >= 0.0) => return Err(Failure::new(exit::USAGE, "--timeout must be >= 0")),
        s => s.map(Duration::from_secs_f64),
    };
    let mut stop = |s: &ConstructionState| {
        timeout.is_some_and(|t| started.elapsed() >= t) || a.max_stages.is_some_and(|m| s.stage() >= m)
    };
    let answer = |model: &mut ConstructedModel, stop: &mut dyn FnMut(&ConstructionState) -> bool| {
        let f = formula_arg(&a.formula, model.state().theory().signature())?;
        Ok::<_, Failure>(model.query_truth_until(a.world, &f, stop))
    };
    let result = match (&a.run, &a.theory) {
        (Some(root), _) => {
            let dir = RunDir::new(root);
            let lock = dir.lock()?;
            let mut session = dir.load(&lock)?;
            let r = answer(&mut session.model, &mut stop)?;
            dir.save(&lock, &mut session)?;
            r
        }
        (None, Some(p)) => {
            let t = load_theory(p)?;
            let mut model = ConstructedModel::new(ConstructionState::init(t, a.construction.config()?)?);
            answer(&mut model, &mut stop)?
        }
        (None, None) => return Err(Failure::new(exit::USAGE, "give --run or --theory")),
    };
    let v = result?;
    emit(out, if v { "true\n" } else { "false\n" })?;
    Ok(exit::OK)
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = match (&a.fkd, &a.run, &a.model) {
        (Some(p), _, _) => export_fkd(p, a.format)?,
        (_, Some(root), _) => {
            let dir = RunDir::new(root);
            let _lock = dir.lock()?;
            export_fkd(&dir.path(FKD_FILE), a.format)?
        }
        (_, _, Some(p)) => {
            let text = read(p)?;
            let v: VerdictFile =
                serde_json::from_str(&text).map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", p.display())))?;
            let dto: LassoDto =
                v.model.ok_or_else(|| Failure::new(exit::DATA, format!("{}: no model in verdict", p.display())))?;
            let m = dto.to_model().map_err(data(p))?;
            match a.format {
                ExportFormat::Dot => lasso_to_dot(&m),
                ExportFormat::Json => pretty(&VerdictFile {
                    schema_version: SCHEMA_VERSION,
                    verdict: v.verdict,
                    model: Some(LassoDto::from_model(&m)),
                    position: v.position.map(|p| PositionDto::from(kf_core::LassoPos::from(p))),
                }),
            }
        }
        (None, None, None) => return Err(Failure::new(exit::USAGE, "give --fkd, --run or --model")),
    };
    match &a.output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(exit::IO, format!("{}: {e}", p.display())))?,
        None => emit(out, &text)?,
    }
    Ok(exit::OK)
}

fn export_fkd(path: &Path, format: ExportFormat) -> Result<String, Failure> {
    let (d, sig) = load_fkd(path)?;
    Ok(match format {
        ExportFormat::Dot => fkd_to_dot(&d),
        ExportFormat::Json => pretty(&FkdFile::from_fkd(&d, &sig)),
    })
}
