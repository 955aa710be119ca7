//! Kripke models and the truth definition.
//!
//! Two kinds of model are supported. [`KripkeModel`] is an arbitrary finite
//! digraph of worlds, used mostly by tests that need non-linear frames.
//! [`LassoModel`] is the finite presentation of a discrete linear model:
//! a prefix of worlds followed by a loop that repeats forever, with
//! accessibility the reflexive order on positions.
//!
//! Models have constant domains. Each world carries the set of ground facts
//! true there; a fact names domain elements by index.

mod eval;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

pub use eval::Evaluator;

use crate::syntax::{Formula, Symbol};

/// A ground atom over domain elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub pred: Symbol,
    pub args: Vec<usize>,
}

impl Fact {
    pub fn new(pred: &str, args: Vec<usize>) -> Self {
        Fact { pred: pred.into(), args }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct World {
    pub facts: BTreeSet<Fact>,
}

impl World {
    pub fn with_facts(facts: impl IntoIterator<Item = Fact>) -> Self {
        World { facts: facts.into_iter().collect() }
    }

    /// World where exactly the listed propositional atoms hold.
    pub fn props(names: &[&str]) -> Self {
        Self::with_facts(names.iter().map(|n| Fact::new(n, Vec::new())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("the loop of a lasso needs at least one world")]
    EmptyLoop,
    #[error("the domain is empty")]
    EmptyDomain,
    #[error("constant `{0}` is mapped outside the domain")]
    ConstantOutOfDomain(String),
    #[error("a fact mentions element {0}, outside the domain")]
    FactOutOfDomain(usize),
    #[error("accessibility pair ({0}, {1}) names a missing world")]
    BadEdge(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("position {0} is outside the model")]
    BadPosition(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Interp {
    domain: Vec<String>,
    constants: BTreeMap<String, usize>,
}

impl Interp {
    fn new(domain: Vec<String>, constants: BTreeMap<String, usize>) -> Result<Self, ModelError> {
        if domain.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        if let Some((c, _)) = constants.iter().find(|(_, &d)| d >= domain.len()) {
            return Err(ModelError::ConstantOutOfDomain(c.clone()));
        }
        Ok(Interp { domain, constants })
    }

    // Constants first, then the names c_d of the elements themselves.
    fn resolve(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied().or_else(|| self.domain.iter().position(|d| d == name))
    }

    fn check_worlds<'a>(&self, worlds: impl Iterator<Item = &'a World>) -> Result<(), ModelError> {
        for w in worlds {
            for f in &w.facts {
                if let Some(&bad) = f.args.iter().find(|&&a| a >= self.domain.len()) {
                    return Err(ModelError::FactOutOfDomain(bad));
                }
            }
        }
        Ok(())
    }
}

/// A finite Kripke model `(W, R, D, I)` over an arbitrary relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<World>,
    succ: Vec<Vec<usize>>,
    interp: Interp,
}

impl KripkeModel {
    pub fn new(
        worlds: Vec<World>,
        access: impl IntoIterator<Item = (usize, usize)>,
        domain: Vec<String>,
        constants: BTreeMap<String, usize>,
    ) -> Result<Self, ModelError> {
        if worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let interp = Interp::new(domain, constants)?;
        interp.check_worlds(worlds.iter())?;
        let mut succ = alloc::vec![Vec::new(); worlds.len()];
        for (a, b) in access {
            if a >= worlds.len() || b >= worlds.len() {
                return Err(ModelError::BadEdge(a, b));
            }
            if !succ[a].contains(&b) {
                succ[a].push(b);
            }
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        Ok(KripkeModel { worlds, succ, interp })
    }

    /// Propositional model with a one-element domain.
    pub fn propositional(worlds: Vec<World>, access: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ModelError> {
        Self::new(worlds, access, alloc::vec!["d0".into()], BTreeMap::new())
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn domain(&self) -> &[String] {
        &self.interp.domain
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.interp.constants
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::kripke(self)
    }

    /// `(M, w) ⊨ f`.
    pub fn eval(&self, w: usize, f: &Formula) -> Result<bool, EvalError> {
        if w >= self.worlds.len() {
            return Err(EvalError::BadPosition(w));
        }
        Ok(self.evaluator().truth(f)?[w])
    }

    /// `M ⊨ f`: true at every world.
    pub fn global_truth(&self, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.evaluator().truth(f)?.iter().all(|&b| b))
    }
}

/// Where to look in a lasso: a prefix index or an index into the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LassoPos {
    Prefix(usize),
    Loop(usize),
}

/// Finite presentation of an eventually periodic ω-model: the worlds are
/// `prefix[0..k]` followed by `loop[0..m]` repeated forever, and each
/// position sees itself and every later position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoModel {
    prefix: Vec<World>,
    cycle: Vec<World>,
    interp: Interp,
}

impl LassoModel {
    pub fn new(
        prefix: Vec<World>,
        cycle: Vec<World>,
        domain: Vec<String>,
        constants: BTreeMap<String, usize>,
    ) -> Result<Self, ModelError> {
        if cycle.is_empty() {
            return Err(ModelError::EmptyLoop);
        }
        let interp = Interp::new(domain, constants)?;
        interp.check_worlds(prefix.iter().chain(cycle.iter()))?;
        Ok(LassoModel { prefix, cycle, interp })
    }

    pub fn propositional(prefix: Vec<World>, cycle: Vec<World>) -> Result<Self, ModelError> {
        Self::new(prefix, cycle, alloc::vec!["d0".into()], BTreeMap::new())
    }

    pub fn prefix(&self) -> &[World] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[World] {
        &self.cycle
    }

    pub fn domain(&self) -> &[String] {
        &self.interp.domain
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.interp.constants
    }

    /// Number of distinct positions, `k + m`.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index into the flat `prefix ++ loop` list.
    pub fn flat(&self, pos: LassoPos) -> Result<usize, EvalError> {
        match pos {
            LassoPos::Prefix(k) if k < self.prefix.len() => Ok(k),
            LassoPos::Loop(j) if j < self.cycle.len() => Ok(self.prefix.len() + j),
            LassoPos::Prefix(k) | LassoPos::Loop(k) => Err(EvalError::BadPosition(k)),
        }
    }

    pub fn pos_of_flat(&self, i: usize) -> LassoPos {
        if i < self.prefix.len() {
            LassoPos::Prefix(i)
        } else {
            LassoPos::Loop(i - self.prefix.len())
        }
    }

    /// The position of the ω-model occupying index `n` of the unrolled order.
    pub fn omega_pos(&self, n: usize) -> LassoPos {
        let k = self.prefix.len();
        if n < k {
            LassoPos::Prefix(n)
        } else {
            LassoPos::Loop((n - k) % self.cycle.len())
        }
    }

    pub(crate) fn world_at_flat(&self, i: usize) -> &World {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::lasso(self)
    }

    /// Truth at a lasso position in the denoted ω-model. Exact: loop worlds
    /// recur cofinally, so `<>g` at a loop position holds iff `g` holds
    /// somewhere on the loop, and at prefix `k` iff it holds at some later
    /// prefix position or anywhere on the loop.
    pub fn eval(&self, pos: LassoPos, f: &Formula) -> Result<bool, EvalError> {
        let i = self.flat(pos)?;
        Ok(self.evaluator().truth(f)?[i])
    }

    pub fn global_truth(&self, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.evaluator().truth(f)?.iter().all(|&b| b))
    }

    /// The finite reflexive-transitive chain `prefix ++ loop^steps`.
    ///
    /// No edge closes the final copy of the loop, so the last world is a
    /// dead end that sees only itself.
    pub fn unroll(&self, steps: usize) -> KripkeModel {
        let worlds: Vec<World> =
            self.prefix.iter().cloned().chain((0..steps).flat_map(|_| self.cycle.iter().cloned())).collect();
        let n = worlds.len();
        let access = (0..n).flat_map(|a| (a..n).map(move |b| (a, b)));
        KripkeModel::new(worlds, access, self.interp.domain.clone(), self.interp.constants.clone())
            .expect("unrolling a valid lasso yields a valid model")
    }

    /// Like [`unroll`](Self::unroll), but the final loop copy is a cluster:
    /// its worlds all see each other. This finite model agrees with the
    /// lasso at every position on every formula.
    pub fn unroll_closed(&self, steps: usize) -> KripkeModel {
        let steps = steps.max(1);
        let worlds: Vec<World> =
            self.prefix.iter().cloned().chain((0..steps).flat_map(|_| self.cycle.iter().cloned())).collect();
        let n = worlds.len();
        let last = n - self.cycle.len();
        let access = (0..n).flat_map(move |a| (a.min(last)..n).filter(move |&b| b >= a || a >= last).map(move |b| (a, b)));
        KripkeModel::new(worlds, access, self.interp.domain.clone(), self.interp.constants.clone())
            .expect("unrolling a valid lasso yields a valid model")
    }
}

/// `(M, w) ⊨ f` on a finite Kripke model.
pub fn eval(m: &KripkeModel, w: usize, f: &Formula) -> Result<bool, EvalError> {
    m.eval(w, f)
}

pub fn global_truth(m: &KripkeModel, f: &Formula) -> Result<bool, EvalError> {
    m.global_truth(f)
}

pub fn eval_lasso(m: &LassoModel, pos: LassoPos, f: &Formula) -> Result<bool, EvalError> {
    m.eval(pos, f)
}

pub fn unroll(m: &LassoModel, steps: usize) -> KripkeModel {
    m.unroll(steps)
}
