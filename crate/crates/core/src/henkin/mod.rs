//! The staged construction of a decidable linear model.
//!
//! Stage `n` unpairs into a world position `i` and a sentence index `e`
//! and decides `φ_e` at the world currently at `i`, keeping the diagram
//! consistent with the theory. Decided `(world, e)` pairs are never
//! reprocessed, and every `K`-th idle stage appends an empty world so the
//! limit has order type ω.
//!
//! Each stage returns a [`StageRecord`] whose `effects` are enough to
//! rebuild the state without consulting the oracle; see
//! [`ConstructionState::replay`].

mod closure;
mod model;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::fkd::{Consistency, FkdError, LinearFkd, WorldId};
use crate::oracle::{Oracle, OracleConfig, OracleError, SatVerdict, Theory};
use crate::syntax::{pair_schedule, Enumerator, Formula, Kind};

pub use closure::{ClosureReport, ClosureViolation};
pub use model::ConstructedModel;

/// Order in which the ◇-case tries to place the witness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Placement {
    /// Here, then for each later position a spliced world before the
    /// existing one, then a new last world.
    #[default]
    Paper,
    /// Here, existing later worlds, a new last world, and only then
    /// interior splices.
    Conservative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructionConfig {
    pub oracle: OracleConfig,
    pub placement: Placement,
    /// Period of the end-append rule on idle stages; 0 disables it.
    pub append_every: u64,
}

pub const DEFAULT_APPEND_EVERY: u64 = 4;

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            oracle: OracleConfig::default(),
            placement: Placement::Paper,
            append_every: DEFAULT_APPEND_EVERY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HenkinError {
    #[error("the theory has no discrete linear model")]
    InconsistentTheory,
    #[error("the oracle was inconclusive in strict mode (stage {stage:?})")]
    OracleExhausted { stage: Option<u64> },
    #[error("internal defect: no ◇-candidate was consistent at stage {stage}")]
    NoCandidate { stage: u64 },
    #[error("trace record for stage {stage} does not fit: {reason}")]
    Replay { stage: u64, reason: &'static str },
    #[error("`{0}` is not a sentence of the construction's language")]
    NotInLanguage(String),
    #[error("query cancelled at stage {stage}")]
    Cancelled { stage: u64 },
    #[error(transparent)]
    Fkd(#[from] FkdError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Where a ◇-witness goes. Positions are those of the diagram at the
/// start of the stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Candidate {
    Here,
    Existing(usize),
    /// A new world in front of the one at this position.
    Splice(usize),
    Append,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestVerdict {
    Consistent,
    /// The oracle returned `Valid` for `¬Ψ`.
    Inconsistent,
    /// Inconclusive; outside strict mode this counts as `Inconsistent`.
    Exhausted,
}

/// One consistency test. `candidate` is `None` for the initial test of
/// `D + {φ_e ∈ w_i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Test {
    pub candidate: Option<Candidate>,
    pub verdict: TestVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// No world at `i`, or the pair is decided.
    Idle,
    Negate,
    Exists,
    Diamond,
    Plain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Add { world: WorldId, sentence: Formula },
    Insert { position: usize, id: WorldId },
    Decide { world: WorldId, e: u64, value: bool },
    Fresh { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: u64,
    pub i: u64,
    pub e: u64,
    /// The world at `i` when there was one.
    pub world: Option<WorldId>,
    pub branch: Branch,
    pub tests: Vec<Test>,
    pub chosen: Option<Candidate>,
    /// Candidates after a rejected one that are equivalent to it and so
    /// were not tested separately.
    pub skipped: u64,
    pub effects: Vec<Effect>,
}

#[derive(Clone, Debug)]
pub struct ConstructionState {
    theory: Theory,
    config: ConstructionConfig,
    enumerator: Enumerator,
    stage: u64,
    fkd: LinearFkd,
    decided: BTreeMap<(WorldId, u64), bool>,
    next_henkin: usize,
    used_henkin: BTreeSet<usize>,
    idle: u64,
    /// Position changes, indexed by world id.
    moves: Vec<u32>,
}

impl ConstructionState {
    /// Checks that the axioms have a model and returns the stage-0 state.
    pub fn init(theory: Theory, config: ConstructionConfig) -> Result<Self, HenkinError> {
        let oracle = Oracle::new(config.oracle);
        let all = Formula::conj(theory.axioms().iter().cloned());
        match oracle.satisfiable(&theory, &all)? {
            SatVerdict::Satisfiable { .. } => {}
            SatVerdict::Unsatisfiable => return Err(HenkinError::InconsistentTheory),
            SatVerdict::Exhausted if config.oracle.strict => return Err(HenkinError::OracleExhausted { stage: None }),
            SatVerdict::Exhausted => return Err(HenkinError::InconsistentTheory),
        }
        Ok(Self::fresh(theory, config))
    }

    fn fresh(theory: Theory, config: ConstructionConfig) -> Self {
        ConstructionState {
            enumerator: Enumerator::new(theory.signature().clone()),
            theory,
            config,
            stage: 0,
            fkd: LinearFkd::new(),
            decided: BTreeMap::new(),
            next_henkin: 0,
            used_henkin: BTreeSet::new(),
            idle: 0,
            moves: alloc::vec![0],
        }
    }

    /// `stages` steps from `init`, with their records.
    pub fn run(
        theory: Theory,
        config: ConstructionConfig,
        stages: u64,
    ) -> Result<(Self, Vec<StageRecord>), HenkinError> {
        let mut s = Self::init(theory, config)?;
        let mut trace = Vec::with_capacity(stages as usize);
        for _ in 0..stages {
            trace.push(s.step()?);
        }
        Ok((s, trace))
    }

    /// Rebuilds a state from the records of an earlier run with the same
    /// theory and configuration, without oracle calls after `init`.
    pub fn replay<'a>(
        theory: Theory,
        config: ConstructionConfig,
        records: impl IntoIterator<Item = &'a StageRecord>,
    ) -> Result<Self, HenkinError> {
        let mut s = Self::init(theory, config)?;
        for r in records {
            s.apply_record(r)?;
        }
        Ok(s)
    }

    /// Applies one record of an earlier run.
    pub fn apply_record(&mut self, r: &StageRecord) -> Result<(), HenkinError> {
        let bad = |reason| HenkinError::Replay { stage: r.stage, reason };
        if r.stage != self.stage {
            return Err(bad("stage number out of sequence"));
        }
        if pair_schedule(r.stage) != (r.i, r.e) {
            return Err(bad("(i, e) does not match the schedule"));
        }
        let here = self.target(r.i as usize, r.e);
        if here != r.world.filter(|_| r.branch != Branch::Idle) {
            return Err(bad("branch does not match the diagram"));
        }
        if r.branch == Branch::Idle {
            self.idle += 1;
        }
        for eff in &r.effects {
            if let Effect::Insert { position, id } = eff {
                if *position > self.fkd.world_count() || *id != self.fkd.next_id() {
                    return Err(bad("inserted world does not fit"));
                }
            }
            if let Effect::Add { world, .. } | Effect::Decide { world, .. } = eff {
                if self.fkd.position_of(*world).is_none() {
                    return Err(bad("unknown world id"));
                }
            }
            self.apply(eff.clone());
        }
        self.stage += 1;
        Ok(())
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn config(&self) -> &ConstructionConfig {
        &self.config
    }

    /// The next stage to run.
    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn fkd(&self) -> &LinearFkd {
        &self.fkd
    }

    pub fn decided(&self) -> &BTreeMap<(WorldId, u64), bool> {
        &self.decided
    }

    pub fn decision(&self, world: WorldId, e: u64) -> Option<bool> {
        self.decided.get(&(world, e)).copied()
    }

    pub fn next_henkin(&self) -> usize {
        self.next_henkin
    }

    /// How often each world has moved, by world id.
    pub fn position_changes(&self) -> &[u32] {
        &self.moves
    }

    pub fn enumerator(&mut self) -> &mut Enumerator {
        &mut self.enumerator
    }

    /// Re-runs the consistency test on the current diagram.
    pub fn check_consistency(&self) -> Result<Consistency, HenkinError> {
        Ok(self.fkd.is_t_consistent(&self.theory, &Oracle::new(self.config.oracle))?)
    }

    fn target(&self, i: usize, e: u64) -> Option<WorldId> {
        let id = self.fkd.world(i)?.id;
        (!self.decided.contains_key(&(id, e))).then_some(id)
    }

    fn test(&self, d: &LinearFkd) -> Result<TestVerdict, HenkinError> {
        let oracle = Oracle::new(self.config.oracle);
        Ok(match d.is_t_consistent(&self.theory, &oracle)? {
            Consistency::Consistent { .. } => TestVerdict::Consistent,
            Consistency::Inconsistent => TestVerdict::Inconsistent,
            Consistency::Exhausted if self.config.oracle.strict => {
                return Err(HenkinError::OracleExhausted { stage: Some(self.stage) })
            }
            Consistency::Exhausted => TestVerdict::Exhausted,
        })
    }

    /// Runs stage `self.stage`.
    pub fn step(&mut self) -> Result<StageRecord, HenkinError> {
        let (i, e) = pair_schedule(self.stage);
        self.run_pair(i, e)
    }

    // The body of a stage for an arbitrary pair; tests use it to aim at a
    // given sentence.
    fn run_pair(&mut self, i: u64, e: u64) -> Result<StageRecord, HenkinError> {
        let n = self.stage;
        let mut rec = StageRecord {
            stage: n,
            i,
            e,
            world: self.fkd.world(i as usize).map(|w| w.id),
            branch: Branch::Idle,
            tests: Vec::new(),
            chosen: None,
            skipped: 0,
            effects: Vec::new(),
        };
        let Some(id) = self.target(i as usize, e) else {
            self.idle += 1;
            if self.config.append_every > 0 && self.idle.is_multiple_of(self.config.append_every) {
                rec.effects.push(Effect::Insert { position: self.fkd.world_count(), id: self.fkd.next_id() });
            }
            return self.finish(rec);
        };
        let i = i as usize;
        let phi = self.enumerator.get(e as usize);

        // Only the worlds up to the last nonempty one matter for Ψ.
        let len = self.fkd.last_nonempty().map_or(0, |k| k + 1).max(i + 1);
        let mut d = self.fkd.truncated(len);
        d.insert_sentence(i, phi.clone())?;
        let v = self.test(&d)?;
        rec.tests.push(Test { candidate: None, verdict: v });

        if v != TestVerdict::Consistent {
            rec.branch = Branch::Negate;
            rec.effects.push(Effect::Add { world: id, sentence: Formula::not(phi) });
            rec.effects.push(Effect::Decide { world: id, e, value: false });
            return self.finish(rec);
        }
        rec.effects.push(Effect::Add { world: id, sentence: phi.clone() });
        match phi.kind() {
            Kind::Exists(x, body) => {
                rec.branch = Branch::Exists;
                let j = self.fresh_constant(&phi);
                let c = self.theory.signature().henkin_name(j);
                rec.effects.push(Effect::Fresh { index: j });
                rec.effects.push(Effect::Add { world: id, sentence: body.subst_const(x, &c) });
            }
            Kind::Dia(theta) => {
                rec.branch = Branch::Diamond;
                self.place_witness(&mut rec, &d, i, theta)?;
            }
            _ => rec.branch = Branch::Plain,
        }
        rec.effects.push(Effect::Decide { world: id, e, value: true });
        self.finish(rec)
    }

    fn finish(&mut self, rec: StageRecord) -> Result<StageRecord, HenkinError> {
        for eff in &rec.effects {
            self.apply(eff.clone());
        }
        self.stage += 1;
        Ok(rec)
    }

    fn fresh_constant(&self, phi: &Formula) -> usize {
        let sig = self.theory.signature();
        let in_phi: BTreeSet<usize> = phi.constants().iter().filter_map(|c| sig.henkin_index(c)).collect();
        let mut j = self.next_henkin;
        while self.used_henkin.contains(&j) || in_phi.contains(&j) {
            j += 1;
        }
        j
    }

    // `d` is the truncated diagram with φ already in world `i`. Every
    // candidate that puts θ at or after `k0`, the first position past the
    // last nonempty world, yields the same trimmed Ψ up to the padding
    // `◇(⊤ ∧ ◇…)`, which is equivalent on transitive reflexive frames. Only
    // the first of them is tested.
    fn place_witness(
        &self,
        rec: &mut StageRecord,
        d: &LinearFkd,
        i: usize,
        theta: &Formula,
    ) -> Result<(), HenkinError> {
        let count = self.fkd.world_count();
        let k0 = d.last_nonempty().map_or(0, |k| k + 1);
        let inner = i + 1..k0.min(count);
        let tail = |c: Candidate| match c {
            Candidate::Here => false,
            Candidate::Existing(k) | Candidate::Splice(k) => k >= k0,
            Candidate::Append => true,
        };
        let rep = if k0 < count {
            match self.config.placement {
                Placement::Paper => Candidate::Splice(k0),
                Placement::Conservative => Candidate::Existing(k0),
            }
        } else {
            Candidate::Append
        };
        let mut order = alloc::vec![Candidate::Here];
        match self.config.placement {
            Placement::Paper => {
                order.extend(inner.flat_map(|k| [Candidate::Splice(k), Candidate::Existing(k)]));
                order.push(rep);
            }
            Placement::Conservative => {
                order.extend(inner.clone().map(Candidate::Existing));
                order.push(rep);
                order.extend(inner.map(Candidate::Splice));
            }
        }
        let tail_total = 2 * (count - k0) as u64 + 1;

        for c in order {
            let mut cand = d.clone();
            match c {
                Candidate::Here => {
                    cand.insert_sentence(i, theta.clone())?;
                }
                Candidate::Existing(k) if !tail(c) => {
                    cand.insert_sentence(k, theta.clone())?;
                }
                Candidate::Splice(k) if !tail(c) => {
                    cand.insert_world(k)?;
                    cand.insert_sentence(k, theta.clone())?;
                }
                _ => {
                    let end = cand.world_count();
                    cand.insert_world(end)?;
                    cand.insert_sentence(end, theta.clone())?;
                }
            }
            let v = self.test(&cand)?;
            rec.tests.push(Test { candidate: Some(c), verdict: v });
            if v == TestVerdict::Consistent {
                rec.chosen = Some(c);
                let at = |w: usize| self.fkd.world(w).map(|w| w.id).expect("candidate position in range");
                match c {
                    Candidate::Here => rec.effects.push(Effect::Add { world: at(i), sentence: theta.clone() }),
                    Candidate::Existing(k) => rec.effects.push(Effect::Add { world: at(k), sentence: theta.clone() }),
                    Candidate::Splice(_) | Candidate::Append => {
                        let position = if let Candidate::Splice(k) = c { k } else { count };
                        let id = self.fkd.next_id();
                        rec.effects.push(Effect::Insert { position, id });
                        rec.effects.push(Effect::Add { world: id, sentence: theta.clone() });
                    }
                }
                return Ok(());
            }
            if tail(c) {
                rec.skipped = tail_total - 1;
            }
        }
        Err(HenkinError::NoCandidate { stage: self.stage })
    }

    fn apply(&mut self, eff: Effect) {
        match eff {
            Effect::Add { world, sentence } => {
                let pos = self.fkd.position_of(world).expect("effect names a live world");
                let sig = self.theory.signature();
                self.used_henkin.extend(sentence.constants().iter().filter_map(|c| sig.henkin_index(c)));
                self.fkd.insert_sentence(pos, sentence).expect("position in range");
            }
            Effect::Insert { position, id } => {
                let got = self.fkd.insert_world(position).expect("insert position in range");
                debug_assert_eq!(got, id);
                let idx = id.0 as usize;
                if self.moves.len() <= idx {
                    self.moves.resize(idx + 1, 0);
                }
                for w in &self.fkd.worlds()[position + 1..] {
                    self.moves[w.id.0 as usize] += 1;
                }
            }
            Effect::Decide { world, e, value } => {
                self.decided.insert((world, e), value);
            }
            Effect::Fresh { index } => {
                self.next_henkin = self.next_henkin.max(index + 1);
            }
        }
    }
}

#[cfg(test)]
mod tests;
