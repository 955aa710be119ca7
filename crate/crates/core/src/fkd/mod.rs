//! Linear finite Kripke diagrams.
//!
//! A diagram is a finite list of worlds, each a finite set of sentences,
//! with a relation that contains every successor pair and only pairs
//! `(i, j)` with `i <= j`. Successor pairs are implicit here; the extra
//! pairs (reflexive or skipping) are stored explicitly.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::oracle::{Oracle, OracleError, OracleVerdict, Theory};
use crate::semantics::{EvalError, LassoModel, LassoPos};
use crate::syntax::Formula;

/// Stable identity of a diagram world; survives splicing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(pub u64);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FkdWorld {
    pub id: WorldId,
    /// In insertion order, without repeats.
    pub sentences: Vec<Formula>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FkdError {
    #[error("position {pos} is out of range for {count} world(s)")]
    PositionOutOfRange { pos: usize, count: usize },
    #[error("world id {0} occurs twice")]
    DuplicateId(u64),
    #[error("pair ({0}, {1}) is not of the form i <= j over existing worlds")]
    BadPair(usize, usize),
    #[error("a linear diagram needs at least one world")]
    NoWorlds,
    #[error("the oracle could not decide consistency within its bounds")]
    Exhausted,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFkd {
    worlds: Vec<FkdWorld>,
    extra: BTreeSet<(usize, usize)>,
    next_id: u64,
}

impl Default for LinearFkd {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of the consistency test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    /// The lasso satisfies the representing formula at `position`.
    Consistent { model: LassoModel, position: LassoPos },
    Inconsistent,
    Exhausted,
}

impl Consistency {
    /// An inconclusive oracle is an error when `strict`; otherwise it is
    /// read as a `Valid` verdict on `¬Ψ^D`, that is, as inconsistency.
    pub fn holds(&self, strict: bool) -> Result<bool, FkdError> {
        match self {
            Consistency::Consistent { .. } => Ok(true),
            Consistency::Inconsistent => Ok(false),
            Consistency::Exhausted if strict => Err(FkdError::Exhausted),
            Consistency::Exhausted => Ok(false),
        }
    }
}

impl LinearFkd {
    /// One empty world and no pairs.
    pub fn new() -> Self {
        LinearFkd { worlds: alloc::vec![FkdWorld { id: WorldId(0), sentences: Vec::new() }], extra: BTreeSet::new(), next_id: 1 }
    }

    /// Builds a diagram from explicit worlds and pairs. Successor pairs are
    /// added when missing.
    pub fn from_parts(
        worlds: Vec<FkdWorld>,
        relation: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, FkdError> {
        if worlds.is_empty() {
            return Err(FkdError::NoWorlds);
        }
        let mut ids = BTreeSet::new();
        for w in &worlds {
            if !ids.insert(w.id) {
                return Err(FkdError::DuplicateId(w.id.0));
            }
        }
        let mut extra = BTreeSet::new();
        for (i, j) in relation {
            if i > j || j >= worlds.len() {
                return Err(FkdError::BadPair(i, j));
            }
            if i + 1 != j {
                extra.insert((i, j));
            }
        }
        let worlds = worlds
            .into_iter()
            .map(|w| {
                let mut s: Vec<Formula> = Vec::with_capacity(w.sentences.len());
                for f in w.sentences {
                    if !s.contains(&f) {
                        s.push(f);
                    }
                }
                FkdWorld { id: w.id, sentences: s }
            })
            .collect();
        let next_id = ids.iter().next_back().map_or(0, |w| w.0 + 1);
        Ok(LinearFkd { worlds, extra, next_id })
    }

    /// Worlds `sets[0], sets[1], …` with fresh ids and only successor pairs.
    pub fn chain(sets: Vec<Vec<Formula>>) -> Result<Self, FkdError> {
        let worlds =
            sets.into_iter().enumerate().map(|(k, s)| FkdWorld { id: WorldId(k as u64), sentences: s }).collect();
        Self::from_parts(worlds, [])
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[FkdWorld] {
        &self.worlds
    }

    pub fn world(&self, i: usize) -> Option<&FkdWorld> {
        self.worlds.get(i)
    }

    pub fn position_of(&self, id: WorldId) -> Option<usize> {
        self.worlds.iter().position(|w| w.id == id)
    }

    /// The id the next spliced world will get.
    pub fn next_id(&self) -> WorldId {
        WorldId(self.next_id)
    }

    pub fn related(&self, i: usize, j: usize) -> bool {
        j < self.worlds.len() && (i + 1 == j || self.extra.contains(&(i, j)))
    }

    /// Every pair of the relation, sorted.
    pub fn relation(&self) -> Vec<(usize, usize)> {
        let mut out: BTreeSet<(usize, usize)> = self.extra.clone();
        out.extend((1..self.worlds.len()).map(|j| (j - 1, j)));
        out.into_iter().collect()
    }

    /// The first `len` worlds (at least one) and the pairs among them.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.worlds.len());
        LinearFkd {
            worlds: self.worlds[..len].to_vec(),
            extra: self.extra.iter().copied().filter(|&(_, b)| b < len).collect(),
            next_id: self.next_id,
        }
    }

    /// Position of the last world with a sentence in it.
    pub fn last_nonempty(&self) -> Option<usize> {
        self.worlds.iter().rposition(|w| !w.sentences.is_empty())
    }

    /// Every sentence in any world.
    pub fn sentences(&self) -> impl Iterator<Item = &Formula> {
        self.worlds.iter().flat_map(|w| w.sentences.iter())
    }

    fn check(&self, i: usize, limit: usize) -> Result<(), FkdError> {
        if i >= limit {
            return Err(FkdError::PositionOutOfRange { pos: i, count: self.worlds.len() });
        }
        Ok(())
    }

    /// Adds `f` to world `i` in place; false when it was already there.
    pub fn insert_sentence(&mut self, i: usize, f: Formula) -> Result<bool, FkdError> {
        self.check(i, self.worlds.len())?;
        let s = &mut self.worlds[i].sentences;
        if s.contains(&f) {
            return Ok(false);
        }
        s.push(f);
        Ok(true)
    }

    /// `D + {f ∈ w_i}`.
    pub fn add_sentence(&self, i: usize, f: Formula) -> Result<Self, FkdError> {
        let mut d = self.clone();
        d.insert_sentence(i, f)?;
        Ok(d)
    }

    /// Splices an empty world in at position `i` in place and returns its
    /// id. Old worlds at `i` and later move up by one; each old pair is
    /// carried to its image, so the successor pair `(i-1, i)` that the new
    /// world interrupts survives as the skip `(i-1, i+1)`.
    pub fn insert_world(&mut self, i: usize) -> Result<WorldId, FkdError> {
        self.check(i, self.worlds.len() + 1)?;
        let id = WorldId(self.next_id);
        self.next_id += 1;
        let shift = |k: usize| if k >= i { k + 1 } else { k };
        let mut extra: BTreeSet<(usize, usize)> = self.extra.iter().map(|&(a, b)| (shift(a), shift(b))).collect();
        if i > 0 && i < self.worlds.len() {
            extra.insert((i - 1, i + 1));
        }
        self.extra = extra;
        self.worlds.insert(i, FkdWorld { id, sentences: Vec::new() });
        Ok(id)
    }

    /// `D + {w_i}`.
    pub fn splice_world(&self, i: usize) -> Result<(Self, WorldId), FkdError> {
        let mut d = self.clone();
        let id = d.insert_world(i)?;
        Ok((d, id))
    }

    /// `Ψ_i`: the sentences of world `i` and `<>Ψ_j` for each pair
    /// `(i, j)` with `j > i`, in that order. Pairs `(i, i)` are left out:
    /// over reflexive frames they add nothing, and keeping them would make
    /// the definition circular.
    pub fn psi(&self, i: usize) -> Formula {
        self.psis(self.worlds.len()).swap_remove(i)
    }

    fn psis(&self, upto: usize) -> Vec<Formula> {
        let mut psi: Vec<Option<Formula>> = alloc::vec![None; upto];
        for i in (0..upto).rev() {
            let mut parts = self.worlds[i].sentences.clone();
            for (j, later) in psi.iter().enumerate().skip(i + 1) {
                if self.related(i, j) {
                    parts.push(Formula::dia(later.clone().expect("later worlds are built first")));
                }
            }
            psi[i] = Some(Formula::conj(parts));
        }
        psi.into_iter().map(|p| p.expect("every world is built")).collect()
    }

    /// `Ψ^D = Ψ_0`. Shared subterms are shared in memory, so the result is
    /// a DAG even though its tree size can grow exponentially.
    pub fn representing_formula(&self) -> Formula {
        self.psi(0)
    }

    /// `Ψ^D` of the diagram with trailing empty worlds removed. Such a
    /// world only contributes `<>true`, which holds everywhere on a
    /// reflexive frame, so the two are equivalent.
    pub fn trimmed_representing_formula(&self) -> Formula {
        let keep = self.last_nonempty().map_or(1, |k| k + 1);
        self.psis(keep).swap_remove(0)
    }

    /// `T ⊭_L ¬Ψ^D`.
    pub fn is_t_consistent(&self, t: &Theory, oracle: &Oracle) -> Result<Consistency, FkdError> {
        let neg = Formula::not(self.trimmed_representing_formula());
        Ok(match oracle.entails(t, &neg)? {
            OracleVerdict::Countermodel { model, position } => Consistency::Consistent { model, position },
            OracleVerdict::Valid => Consistency::Inconsistent,
            OracleVerdict::Exhausted => Consistency::Exhausted,
        })
    }

    /// An order-preserving map of the worlds into the positions of `m`
    /// under which every sentence holds at its image.
    ///
    /// The successor pairs force the map to be non-decreasing, and then
    /// every pair of the relation is respected. Choosing for each world in
    /// turn the earliest position that satisfies it is therefore optimal.
    pub fn find_witness(&self, m: &LassoModel) -> Result<Option<WitnessMap>, EvalError> {
        let mut ev = m.evaluator();
        let horizon = m.prefix().len() + m.cycle().len() * (self.worlds.len() + 1);
        let mut images = Vec::with_capacity(self.worlds.len());
        let mut at = 0;
        for w in &self.worlds {
            let mut ok = alloc::vec![true; m.len()];
            for f in &w.sentences {
                for (o, t) in ok.iter_mut().zip(ev.truth(f)?.iter()) {
                    *o &= *t;
                }
            }
            let Some(q) = (at..horizon).find(|&q| ok[m.flat(m.omega_pos(q)).expect("in range")]) else {
                return Ok(None);
            };
            images.push((w.id, q));
            at = q;
        }
        Ok(Some(WitnessMap { images }))
    }

    /// Checks the two witnessing conditions directly.
    pub fn is_witnessed_by(&self, m: &LassoModel, w: &WitnessMap) -> Result<bool, EvalError> {
        if w.images.len() != self.worlds.len() || w.images.iter().zip(&self.worlds).any(|(a, b)| a.0 != b.id) {
            return Ok(false);
        }
        for (i, j) in self.relation() {
            if w.images[i].1 > w.images[j].1 {
                return Ok(false);
            }
        }
        let mut ev = m.evaluator();
        for (k, world) in self.worlds.iter().enumerate() {
            let q = m.flat(m.omega_pos(w.images[k].1))?;
            for f in &world.sentences {
                if !ev.truth(f)?[q] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Images of diagram worlds as positions of the unrolled ω-order, so that
/// order between images is visible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessMap {
    pub images: Vec<(WorldId, usize)>,
}

impl WitnessMap {
    pub fn image(&self, id: WorldId) -> Option<usize> {
        self.images.iter().find(|(w, _)| *w == id).map(|&(_, q)| q)
    }

    /// The lasso position of each image.
    pub fn lasso_positions(&self, m: &LassoModel) -> Vec<(WorldId, LassoPos)> {
        self.images.iter().map(|&(w, q)| (w, m.omega_pos(q))).collect()
    }
}
