//! Entailment over discrete linear models.
//!
//! `T ⊨_L φ` holds when `φ` is true at every position of every ω-type
//! linear model in which every axiom of `T` is true everywhere. The oracle
//! decides it by searching for a lasso countermodel. On input without
//! effective quantifiers the search is exact once the bounds reach the
//! thresholds explained in the `search` module; with quantifiers it can
//! only ever refute, and a failed search reports `Exhausted`.

mod ground;
mod schemata;
mod search;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::semantics::{Fact, LassoModel, LassoPos, World};
use crate::syntax::{subsentences, Formula, ParseErrorKind, Signature};

pub use schemata::{check_schemata, Schema, SchemaReport, SchemaRow};

use ground::{growth_strings, quantifies, Ground};
use search::{search, Outcome, Problem};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("formula is not over the theory's signature: {0}")]
    SignatureMismatch(ParseErrorKind),
    #[error("free variable `{0}` in a formula given to the oracle")]
    NotASentence(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("internal defect: a reported witness failed re-evaluation ({0})")]
    WitnessRejected(String),
}

/// A finite set of extra axioms over a signature. The schemata of the
/// underlying logic are not stored: every lasso validates them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    sig: Signature,
    axioms: Vec<Formula>,
}

impl Theory {
    pub fn new(sig: Signature, axioms: Vec<Formula>) -> Result<Self, OracleError> {
        for ax in &axioms {
            check_sentence(&sig, ax)?;
        }
        Ok(Theory { sig, axioms })
    }

    pub fn empty(sig: Signature) -> Self {
        Theory { sig, axioms: Vec::new() }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn axioms(&self) -> &[Formula] {
        &self.axioms
    }
}

fn check_sentence(sig: &Signature, f: &Formula) -> Result<(), OracleError> {
    sig.admits(f).map_err(OracleError::SignatureMismatch)?;
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(OracleError::NotASentence(v.to_string()));
    }
    Ok(())
}

/// Limits on the lassos examined. `None` for the prefix or loop selects
/// `2^s + s` and `2^s` respectively, `s` being the size of the closure of
/// the axioms and the query, saturated at the configured cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_prefix: Option<usize>,
    pub max_loop: Option<usize>,
    pub max_domain: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_prefix: None, max_loop: None, max_domain: 3 }
    }
}

impl SearchBounds {
    pub fn fixed(max_prefix: usize, max_loop: usize, max_domain: usize) -> Self {
        SearchBounds { max_prefix: Some(max_prefix), max_loop: Some(max_loop.max(1)), max_domain: max_domain.max(1) }
    }

    /// The prefix and loop limits actually used for closure size `s`.
    pub fn resolve(&self, s: usize, cap: usize) -> (usize, usize) {
        let pow = if s >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << s };
        let prefix = self.max_prefix.unwrap_or_else(|| pow.saturating_add(s).min(cap));
        let cycle = self.max_loop.unwrap_or_else(|| pow.min(cap)).max(1);
        (prefix, cycle)
    }
}

pub const DEFAULT_BOUND_CAP: usize = 4096;
pub const DEFAULT_WORK_LIMIT: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub bounds: SearchBounds,
    /// Ceiling on the default prefix and loop limits.
    pub cap: usize,
    /// Consumers that treat `Exhausted` as `Valid` must fail instead.
    pub strict: bool,
    /// Report `Valid` for quantified input when the bounded search fails.
    pub assume_bound_complete: bool,
    /// Work units (node evaluations times mask words) per query.
    pub work_limit: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            bounds: SearchBounds::default(),
            cap: DEFAULT_BOUND_CAP,
            strict: false,
            assume_bound_complete: false,
            work_limit: DEFAULT_WORK_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Valid,
    Countermodel { model: LassoModel, position: LassoPos },
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    Satisfiable { model: LassoModel, position: LassoPos },
    Unsatisfiable,
    Exhausted,
}

enum Raw {
    Witness(LassoModel, LassoPos),
    Closed,
    Open,
}

/// Bounded decision procedure for `⊨_L`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Oracle {
    pub config: OracleConfig,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Self {
        Oracle { config }
    }

    /// `T ⊨_L f`.
    pub fn entails(&self, t: &Theory, f: &Formula) -> Result<OracleVerdict, OracleError> {
        Ok(match self.find(t, f, false)? {
            Raw::Witness(model, position) => OracleVerdict::Countermodel { model, position },
            Raw::Closed => OracleVerdict::Valid,
            Raw::Open => OracleVerdict::Exhausted,
        })
    }

    /// Some model of `T` makes `f` true somewhere.
    pub fn satisfiable(&self, t: &Theory, f: &Formula) -> Result<SatVerdict, OracleError> {
        Ok(match self.find(t, f, true)? {
            Raw::Witness(model, position) => SatVerdict::Satisfiable { model, position },
            Raw::Closed => SatVerdict::Unsatisfiable,
            Raw::Open => SatVerdict::Exhausted,
        })
    }

    fn find(&self, t: &Theory, f: &Formula, want: bool) -> Result<Raw, OracleError> {
        check_sentence(&t.sig, f)?;
        let all = Formula::conj(t.axioms.iter().cloned().chain(core::iter::once(f.clone())));
        let s = subsentences(&all).len();
        let (max_prefix, max_loop) = self.config.bounds.resolve(s, self.config.cap);
        let mut budget = self.config.work_limit;

        let mut consts: Vec<String> = t.sig.base_constants().to_vec();
        for c in all.constants() {
            if !consts.iter().any(|x| x.as_str() == c.as_ref()) {
                consts.push(c.to_string());
            }
        }

        if !quantifies(&all) {
            // Without quantifiers, distinct elements for distinct constants
            // is the most general choice: there is no equality to observe.
            let map: Vec<usize> = (0..consts.len()).collect();
            let domain = consts.len().max(1);
            return match self.attempt(t, f, want, &consts, &map, domain, max_prefix, max_loop, &mut budget)? {
                Attempt::Found(m, q) => Ok(Raw::Witness(m, q)),
                Attempt::None { complete: true } => Ok(Raw::Closed),
                Attempt::None { complete: false } | Attempt::OutOfBudget => Ok(Raw::Open),
            };
        }

        let mut out_of_budget = false;
        for domain in 1..=self.config.bounds.max_domain.max(1) {
            for map in growth_strings(consts.len(), domain) {
                match self.attempt(t, f, want, &consts, &map, domain, max_prefix, max_loop, &mut budget)? {
                    Attempt::Found(m, q) => return Ok(Raw::Witness(m, q)),
                    Attempt::None { .. } => {}
                    Attempt::OutOfBudget => {
                        out_of_budget = true;
                        break;
                    }
                }
            }
            if out_of_budget {
                break;
            }
        }
        Ok(if self.config.assume_bound_complete && !out_of_budget { Raw::Closed } else { Raw::Open })
    }

    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &self,
        t: &Theory,
        f: &Formula,
        want: bool,
        consts: &[String],
        map: &[usize],
        domain: usize,
        max_prefix: usize,
        max_loop: usize,
        budget: &mut u64,
    ) -> Result<Attempt, OracleError> {
        let lookup = |c: &str| consts.iter().position(|x| x == c).map(|i| map[i]);
        let mut g = Ground::new(domain, &lookup);
        let mut axioms = Vec::new();
        for ax in &t.axioms {
            axioms.push(g.add(ax)?);
        }
        let target = g.add(f)?;
        let problem = Problem { g: &g, axioms, target, want };
        let found = match search(&problem, max_prefix, max_loop, budget) {
            Outcome::Found(found) => found,
            Outcome::None { complete } => return Ok(Attempt::None { complete }),
            Outcome::OutOfBudget => return Ok(Attempt::OutOfBudget),
        };

        let world = |val: u32| {
            World::with_facts(
                g.atoms.iter().enumerate().filter(|(j, _)| val >> j & 1 == 1).map(|(_, (p, args))| Fact {
                    pred: p.clone(),
                    args: args.clone(),
                }),
            )
        };
        let names: Vec<String> = (0..domain).map(|d| format!("d{d}")).collect();
        let constants: BTreeMap<String, usize> = consts.iter().cloned().zip(map.iter().copied()).collect();
        let model = LassoModel::new(
            found.prefix.iter().map(|&v| world(v)).collect(),
            found.cycle.iter().map(|&v| world(v)).collect(),
            names,
            constants,
        )
        .map_err(|e| OracleError::WitnessRejected(e.to_string()))?;
        validate(&model, t, f, found.pos, want)?;
        Ok(Attempt::Found(model, found.pos))
    }
}

enum Attempt {
    Found(LassoModel, LassoPos),
    None { complete: bool },
    OutOfBudget,
}

fn validate(m: &LassoModel, t: &Theory, f: &Formula, pos: LassoPos, want: bool) -> Result<(), OracleError> {
    let reject = |what: &str| OracleError::WitnessRejected(what.into());
    let mut ev = m.evaluator();
    for ax in &t.axioms {
        if !ev.truth(ax).map_err(|e| reject(&e.to_string()))?.iter().all(|&b| b) {
            return Err(reject("an axiom fails"));
        }
    }
    let i = m.flat(pos).map_err(|e| reject(&e.to_string()))?;
    if ev.truth(f).map_err(|e| reject(&e.to_string()))?[i] != want {
        return Err(reject("the query has the wrong value"));
    }
    Ok(())
}

/// `T ⊨_L f` under the given bounds and otherwise default configuration.
pub fn entails_linear(t: &Theory, f: &Formula, b: SearchBounds) -> Result<OracleVerdict, OracleError> {
    Oracle::new(OracleConfig { bounds: b, ..OracleConfig::default() }).entails(t, f)
}

pub fn satisfiable_linear(t: &Theory, f: &Formula, b: SearchBounds) -> Result<SatVerdict, OracleError> {
    Oracle::new(OracleConfig { bounds: b, ..OracleConfig::default() }).satisfiable(t, f)
}
