//! JSON file formats. Every top-level document carries `schema_version`;
//! decoding rejects unknown fields and other versions.

use std::collections::BTreeMap;

use kf_core::fkd::{FkdError, FkdWorld, LinearFkd, WorldId};
use kf_core::henkin::{
    Branch, Candidate, ConstructionConfig, Effect, Placement, StageRecord, Test, TestVerdict,
};
use kf_core::oracle::{OracleConfig, OracleError, SearchBounds, Theory};
use kf_core::semantics::{Fact, LassoModel, LassoPos, ModelError, World};
use kf_core::syntax::{parse, print, Formula, ParseError, Predicate, Signature, SignatureError};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error("bad signature: {0}")]
    Signature(#[from] SignatureError),
    #[error("cannot parse `{text}`: {source}")]
    Formula { text: String, source: ParseError },
    #[error(transparent)]
    Theory(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fkd(#[from] FkdError),
    #[error("{0}")]
    Invalid(String),
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version { found: v })
    }
}

pub fn parse_sentence(text: &str, sig: &Signature) -> Result<Formula, FormatError> {
    parse(text, sig).map_err(|source| FormatError::Formula { text: text.to_string(), source })
}

fn default_prefix() -> String {
    "c".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateDto {
    pub name: String,
    #[serde(default)]
    pub arity: usize,
}

/// `atoms` is shorthand for predicates of arity 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureDto {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<PredicateDto>,
    #[serde(default)]
    pub constants: Vec<String>,
    #[serde(default = "default_prefix")]
    pub henkin_prefix: String,
}

impl SignatureDto {
    pub fn from_signature(sig: &Signature) -> Self {
        SignatureDto {
            atoms: Vec::new(),
            predicates: sig
                .predicates()
                .iter()
                .map(|p| PredicateDto { name: p.name.clone(), arity: p.arity })
                .collect(),
            constants: sig.base_constants().to_vec(),
            henkin_prefix: sig.henkin_prefix().to_string(),
        }
    }

    pub fn to_signature(&self) -> Result<Signature, FormatError> {
        let preds = self
            .atoms
            .iter()
            .map(|a| Predicate { name: a.clone(), arity: 0 })
            .chain(self.predicates.iter().map(|p| Predicate { name: p.name.clone(), arity: p.arity }))
            .collect();
        Ok(Signature::new(preds, self.constants.clone(), self.henkin_prefix.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryFile {
    pub schema_version: u32,
    pub signature: SignatureDto,
    #[serde(default)]
    pub axioms: Vec<String>,
}

impl TheoryFile {
    pub fn from_theory(t: &Theory) -> Self {
        TheoryFile {
            schema_version: SCHEMA_VERSION,
            signature: SignatureDto::from_signature(t.signature()),
            axioms: t.axioms().iter().map(print).collect(),
        }
    }

    pub fn to_theory(&self) -> Result<Theory, FormatError> {
        check_version(self.schema_version)?;
        let sig = self.signature.to_signature()?;
        let axioms = self.axioms.iter().map(|a| parse_sentence(a, &sig)).collect::<Result<_, _>>()?;
        Ok(Theory::new(sig, axioms)?)
    }

    pub fn load(text: &str) -> Result<Theory, FormatError> {
        serde_json::from_str::<TheoryFile>(text)?.to_theory()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactDto {
    pub pred: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoDto {
    pub domain: Vec<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, usize>,
    pub prefix: Vec<Vec<FactDto>>,
    #[serde(rename = "loop")]
    pub cycle: Vec<Vec<FactDto>>,
}

impl LassoDto {
    pub fn from_model(m: &LassoModel) -> Self {
        let world = |w: &World| -> Vec<FactDto> {
            w.facts.iter().map(|f| FactDto { pred: f.pred.to_string(), args: f.args.clone() }).collect()
        };
        LassoDto {
            domain: m.domain().to_vec(),
            constants: m.constants().clone(),
            prefix: m.prefix().iter().map(world).collect(),
            cycle: m.cycle().iter().map(world).collect(),
        }
    }

    pub fn to_model(&self) -> Result<LassoModel, FormatError> {
        let world = |w: &Vec<FactDto>| World::with_facts(w.iter().map(|f| Fact::new(&f.pred, f.args.clone())));
        Ok(LassoModel::new(
            self.prefix.iter().map(world).collect(),
            self.cycle.iter().map(world).collect(),
            self.domain.clone(),
            self.constants.clone(),
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PositionDto {
    Prefix(usize),
    Loop(usize),
}

impl From<LassoPos> for PositionDto {
    fn from(p: LassoPos) -> Self {
        match p {
            LassoPos::Prefix(k) => PositionDto::Prefix(k),
            LassoPos::Loop(k) => PositionDto::Loop(k),
        }
    }
}

impl From<PositionDto> for LassoPos {
    fn from(p: PositionDto) -> Self {
        match p {
            PositionDto::Prefix(k) => LassoPos::Prefix(k),
            PositionDto::Loop(k) => LassoPos::Loop(k),
        }
    }
}

/// Oracle or consistency outcome, with the witnessing lasso if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictFile {
    pub schema_version: u32,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<LassoDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<PositionDto>,
}

impl VerdictFile {
    pub fn new(verdict: &str, witness: Option<(&LassoModel, LassoPos)>) -> Self {
        VerdictFile {
            schema_version: SCHEMA_VERSION,
            verdict: verdict.to_string(),
            model: witness.map(|(m, _)| LassoDto::from_model(m)),
            position: witness.map(|(_, p)| p.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkdWorldDto {
    pub id: u64,
    pub sentences: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkdFile {
    pub schema_version: u32,
    pub signature: SignatureDto,
    pub worlds: Vec<FkdWorldDto>,
    /// Every pair of the relation, successor pairs included.
    pub relation: Vec<(usize, usize)>,
}

impl FkdFile {
    pub fn from_fkd(d: &LinearFkd, sig: &Signature) -> Self {
        FkdFile {
            schema_version: SCHEMA_VERSION,
            signature: SignatureDto::from_signature(sig),
            worlds: d
                .worlds()
                .iter()
                .map(|w| FkdWorldDto { id: w.id.0, sentences: w.sentences.iter().map(print).collect() })
                .collect(),
            relation: d.relation(),
        }
    }

    pub fn to_fkd(&self) -> Result<(LinearFkd, Signature), FormatError> {
        check_version(self.schema_version)?;
        let sig = self.signature.to_signature()?;
        let worlds = self
            .worlds
            .iter()
            .map(|w| {
                let sentences = w.sentences.iter().map(|s| parse_sentence(s, &sig)).collect::<Result<_, _>>()?;
                Ok(FkdWorld { id: WorldId(w.id), sentences })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        for (i, j) in &self.relation {
            if *j == *i + 1 {
                continue;
            }
            if i > j || *j >= worlds.len() {
                return Err(FormatError::Invalid(format!("relation pair ({i}, {j}) is not linear")));
            }
        }
        if (1..worlds.len()).any(|j| !self.relation.contains(&(j - 1, j))) {
            return Err(FormatError::Invalid("relation lacks a successor pair".into()));
        }
        Ok((LinearFkd::from_parts(worlds, self.relation.iter().copied())?, sig))
    }

    pub fn load(text: &str) -> Result<(LinearFkd, Signature), FormatError> {
        serde_json::from_str::<FkdFile>(text)?.to_fkd()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementDto {
    Paper,
    Conservative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDto {
    pub placement: PlacementDto,
    pub append_every: u64,
    pub max_prefix: Option<usize>,
    pub max_loop: Option<usize>,
    pub max_domain: usize,
    pub bound_cap: usize,
    pub work_limit: u64,
    pub strict: bool,
    pub assume_bound_complete: bool,
}

impl ConfigDto {
    pub fn from_config(c: &ConstructionConfig) -> Self {
        ConfigDto {
            placement: match c.placement {
                Placement::Paper => PlacementDto::Paper,
                Placement::Conservative => PlacementDto::Conservative,
            },
            append_every: c.append_every,
            max_prefix: c.oracle.bounds.max_prefix,
            max_loop: c.oracle.bounds.max_loop,
            max_domain: c.oracle.bounds.max_domain,
            bound_cap: c.oracle.cap,
            work_limit: c.oracle.work_limit,
            strict: c.oracle.strict,
            assume_bound_complete: c.oracle.assume_bound_complete,
        }
    }

    pub fn to_config(&self) -> ConstructionConfig {
        ConstructionConfig {
            oracle: OracleConfig {
                bounds: SearchBounds { max_prefix: self.max_prefix, max_loop: self.max_loop, max_domain: self.max_domain },
                cap: self.bound_cap,
                strict: self.strict,
                assume_bound_complete: self.assume_bound_complete,
                work_limit: self.work_limit,
            },
            placement: match self.placement {
                PlacementDto::Paper => Placement::Paper,
                PlacementDto::Conservative => Placement::Conservative,
            },
            append_every: self.append_every,
        }
    }
}

/// What a construction run was started from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub schema_version: u32,
    pub theory: TheoryFile,
    pub config: ConfigDto,
}

impl RunFile {
    pub fn load(text: &str) -> Result<(Theory, ConstructionConfig), FormatError> {
        let r: RunFile = serde_json::from_str(text)?;
        check_version(r.schema_version)?;
        Ok((r.theory.to_theory()?, r.config.to_config()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateDto {
    Here,
    Existing { position: usize },
    Splice { position: usize },
    Append,
}

impl From<Candidate> for CandidateDto {
    fn from(c: Candidate) -> Self {
        match c {
            Candidate::Here => CandidateDto::Here,
            Candidate::Existing(position) => CandidateDto::Existing { position },
            Candidate::Splice(position) => CandidateDto::Splice { position },
            Candidate::Append => CandidateDto::Append,
        }
    }
}

impl From<CandidateDto> for Candidate {
    fn from(c: CandidateDto) -> Self {
        match c {
            CandidateDto::Here => Candidate::Here,
            CandidateDto::Existing { position } => Candidate::Existing(position),
            CandidateDto::Splice { position } => Candidate::Splice(position),
            CandidateDto::Append => Candidate::Append,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictDto {
    Consistent,
    Inconsistent,
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDto {
    pub candidate: Option<CandidateDto>,
    pub verdict: VerdictDto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchDto {
    Idle,
    Negate,
    Exists,
    Diamond,
    Plain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EffectDto {
    Add { world: u64, sentence: String },
    Insert { position: usize, id: u64 },
    Decide { world: u64, e: u64, value: bool },
    Fresh { index: usize },
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageLine {
    pub schema_version: u32,
    pub stage: u64,
    pub i: u64,
    pub e: u64,
    pub world: Option<u64>,
    pub branch: BranchDto,
    pub tests: Vec<TestDto>,
    pub chosen: Option<CandidateDto>,
    pub skipped: u64,
    pub effects: Vec<EffectDto>,
}

impl StageLine {
    pub fn from_record(r: &StageRecord) -> Self {
        StageLine {
            schema_version: SCHEMA_VERSION,
            stage: r.stage,
            i: r.i,
            e: r.e,
            world: r.world.map(|w| w.0),
            branch: match r.branch {
                Branch::Idle => BranchDto::Idle,
                Branch::Negate => BranchDto::Negate,
                Branch::Exists => BranchDto::Exists,
                Branch::Diamond => BranchDto::Diamond,
                Branch::Plain => BranchDto::Plain,
            },
            tests: r
                .tests
                .iter()
                .map(|t| TestDto {
                    candidate: t.candidate.map(Into::into),
                    verdict: match t.verdict {
                        TestVerdict::Consistent => VerdictDto::Consistent,
                        TestVerdict::Inconsistent => VerdictDto::Inconsistent,
                        TestVerdict::Exhausted => VerdictDto::Exhausted,
                    },
                })
                .collect(),
            chosen: r.chosen.map(Into::into),
            skipped: r.skipped,
            effects: r
                .effects
                .iter()
                .map(|e| match e {
                    Effect::Add { world, sentence } => EffectDto::Add { world: world.0, sentence: print(sentence) },
                    Effect::Insert { position, id } => EffectDto::Insert { position: *position, id: id.0 },
                    Effect::Decide { world, e, value } => EffectDto::Decide { world: world.0, e: *e, value: *value },
                    Effect::Fresh { index } => EffectDto::Fresh { index: *index },
                })
                .collect(),
        }
    }

    pub fn to_record(&self, sig: &Signature) -> Result<StageRecord, FormatError> {
        check_version(self.schema_version)?;
        let effects = self
            .effects
            .iter()
            .map(|e| {
                Ok(match e {
                    EffectDto::Add { world, sentence } => {
                        Effect::Add { world: WorldId(*world), sentence: parse_sentence(sentence, sig)? }
                    }
                    EffectDto::Insert { position, id } => Effect::Insert { position: *position, id: WorldId(*id) },
                    EffectDto::Decide { world, e, value } => {
                        Effect::Decide { world: WorldId(*world), e: *e, value: *value }
                    }
                    EffectDto::Fresh { index } => Effect::Fresh { index: *index },
                })
            })
            .collect::<Result<_, FormatError>>()?;
        Ok(StageRecord {
            stage: self.stage,
            i: self.i,
            e: self.e,
            world: self.world.map(WorldId),
            branch: match self.branch {
                BranchDto::Idle => Branch::Idle,
                BranchDto::Negate => Branch::Negate,
                BranchDto::Exists => Branch::Exists,
                BranchDto::Diamond => Branch::Diamond,
                BranchDto::Plain => Branch::Plain,
            },
            tests: self
                .tests
                .iter()
                .map(|t| Test {
                    candidate: t.candidate.map(Into::into),
                    verdict: match t.verdict {
                        VerdictDto::Consistent => TestVerdict::Consistent,
                        VerdictDto::Inconsistent => TestVerdict::Inconsistent,
                        VerdictDto::Exhausted => TestVerdict::Exhausted,
                    },
                })
                .collect(),
            chosen: self.chosen.map(Into::into),
            skipped: self.skipped,
            effects,
        })
    }

    /// Serializes to one JSONL line without the newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace lines always serialize")
    }
}

/// Decodes one trace line and checks it against the record schema: known
/// fields only, the current version, and internally coherent content.
pub fn validate_stage_line(line: &str) -> Result<StageLine, FormatError> {
    let s: StageLine = serde_json::from_str(line)?;
    check_version(s.schema_version)?;
    let bad = |m: &str| Err(FormatError::Invalid(format!("stage {}: {m}", s.stage)));
    if kf_core::syntax::pair_schedule(s.stage) != (s.i, s.e) {
        return bad("(i, e) disagrees with the schedule");
    }
    match s.branch {
        BranchDto::Idle => {
            if !s.tests.is_empty() || s.chosen.is_some() {
                return bad("idle stages run no tests");
            }
            if s.effects.iter().any(|e| !matches!(e, EffectDto::Insert { .. })) {
                return bad("idle stages only append worlds");
            }
        }
        b => {
            let Some(first) = s.tests.first() else { return bad("a decided stage needs its first test") };
            if first.candidate.is_some() || s.world.is_none() {
                return bad("the first test is of D + {φ ∈ w_i}");
            }
            if (b == BranchDto::Diamond) != s.chosen.is_some() {
                return bad("only ◇-stages choose a candidate");
            }
            let decides = s.effects.iter().filter(|e| matches!(e, EffectDto::Decide { .. })).count();
            if decides != 1 {
                return bad("a decided stage decides exactly one pair");
            }
        }
    }
    Ok(s)
}

/// A pinned model world, one per line of the pins file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinLine {
    pub schema_version: u32,
    pub world: usize,
    pub id: u64,
}
