use alloc::string::String;
use alloc::vec::Vec;

use super::{ConstructionState, HenkinError, StageRecord};
use crate::fkd::WorldId;
use crate::syntax::{print, Formula};

/// The limit model, explored lazily by running further stages.
///
/// World `i` of the model is the `i`-th world pinned so far: the first
/// query about `i` pins the worlds that currently follow the last pinned
/// one until `i` is reached. Splices never reorder worlds, so pinned
/// worlds keep their relative order in every later diagram and the
/// answers stay stable; worlds spliced in between after pinning are
/// left out of the numbering.
#[derive(Clone, Debug)]
pub struct ConstructedModel {
    state: ConstructionState,
    pinned: Vec<WorldId>,
    record: bool,
    pending: Vec<StageRecord>,
}

impl ConstructedModel {
    pub fn new(state: ConstructionState) -> Self {
        ConstructedModel { state, pinned: Vec::new(), record: false, pending: Vec::new() }
    }

    /// Keeps the records of stages run by queries; see
    /// [`take_records`](Self::take_records).
    pub fn recording(mut self, on: bool) -> Self {
        self.record = on;
        self
    }

    /// Restores pins saved from an earlier session.
    pub fn with_pins(mut self, pins: Vec<WorldId>) -> Result<Self, HenkinError> {
        let mut last = None;
        for id in &pins {
            let pos = self.state.fkd().position_of(*id);
            if pos.is_none() || pos <= last {
                return Err(HenkinError::Replay { stage: self.state.stage(), reason: "pinned worlds out of order" });
            }
            last = pos;
        }
        self.pinned = pins;
        Ok(self)
    }

    pub fn state(&self) -> &ConstructionState {
        &self.state
    }

    pub fn into_state(self) -> ConstructionState {
        self.state
    }

    pub fn pinned(&self) -> &[WorldId] {
        &self.pinned
    }

    /// Records of stages run since the last call.
    pub fn take_records(&mut self) -> Vec<StageRecord> {
        core::mem::take(&mut self.pending)
    }

    /// `(w_i, w_j) ∈ R`.
    pub fn accessible(&self, i: usize, j: usize) -> bool {
        i <= j
    }

    /// The `k`-th domain element; the domain is the Henkin pool.
    pub fn domain_element(&self, k: usize) -> String {
        self.state.theory().signature().henkin_name(k)
    }

    fn advance(&mut self, stop: &mut dyn FnMut(&ConstructionState) -> bool) -> Result<(), HenkinError> {
        if stop(&self.state) {
            return Err(HenkinError::Cancelled { stage: self.state.stage() });
        }
        let r = self.state.step()?;
        if self.record {
            self.pending.push(r);
        }
        Ok(())
    }

    /// The world id behind model world `i`, running stages until it exists.
    pub fn world(
        &mut self,
        i: usize,
        stop: &mut dyn FnMut(&ConstructionState) -> bool,
    ) -> Result<WorldId, HenkinError> {
        while self.pinned.len() <= i {
            let next = match self.pinned.last() {
                Some(id) => self.state.fkd().position_of(*id).expect("pinned worlds persist") + 1,
                None => 0,
            };
            match self.state.fkd().world(next) {
                Some(w) => self.pinned.push(w.id),
                None => self.advance(stop)?,
            }
        }
        Ok(self.pinned[i])
    }

    /// Whether `f` holds at world `i`. Runs stages until the sentence is
    /// decided there; this always happens eventually.
    pub fn query_truth(&mut self, i: usize, f: &Formula) -> Result<bool, HenkinError> {
        self.query_truth_until(i, f, &mut |_| false)
    }

    /// As [`query_truth`](Self::query_truth), giving up with `Cancelled`
    /// once `stop` returns true; `stop` is consulted before every stage.
    pub fn query_truth_until(
        &mut self,
        i: usize,
        f: &Formula,
        stop: &mut dyn FnMut(&ConstructionState) -> bool,
    ) -> Result<bool, HenkinError> {
        let g = f.canonical();
        let e = self.state.enumerator().index_of(&g).ok_or_else(|| HenkinError::NotInLanguage(print(f)))?;
        let id = self.world(i, stop)?;
        loop {
            if let Some(v) = self.state.decision(id, e as u64) {
                return Ok(v);
            }
            self.advance(stop)?;
        }
    }
}
