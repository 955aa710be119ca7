use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ConstructionState;
use crate::fkd::WorldId;
use crate::syntax::{Formula, Kind};

/// A failed closure clause at a world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureViolation {
    /// Clause number, 1 to 6.
    pub clause: u8,
    pub world: WorldId,
    pub sentence: Formula,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosureReport {
    /// Instances examined per clause; `checked[0]` is clause 1.
    pub checked: [u64; 6],
    pub violations: Vec<ClosureViolation>,
}

impl ClosureReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ConstructionState {
    /// Checks the closure clauses on the current diagram, restricted to
    /// decided sentences.
    pub fn closure_report(&mut self) -> ClosureReport {
        let mut r = ClosureReport::default();
        let worlds: Vec<(WorldId, Vec<Formula>)> =
            self.fkd.worlds().iter().map(|w| (w.id, w.sentences.clone())).collect();
        let mut by_world: Vec<BTreeMap<u64, bool>> = Vec::with_capacity(worlds.len());
        for (id, _) in &worlds {
            by_world.push(self.decided.range((*id, 0)..=(*id, u64::MAX)).map(|(&(_, e), &v)| (e, v)).collect());
        }
        let axioms: Vec<Option<u64>> =
            self.theory.axioms().to_vec().iter().map(|a| self.index(&a.canonical())).collect();
        let sig = self.theory.signature().clone();

        for (pos, (id, sentences)) in worlds.iter().enumerate() {
            let fail = |r: &mut ClosureReport, clause: u8, f: &Formula| {
                r.violations.push(ClosureViolation { clause, world: *id, sentence: f.clone() })
            };
            for s in sentences {
                r.checked[0] += 1;
                if sentences.contains(&Formula::not(s.clone())) {
                    fail(&mut r, 1, s);
                }
            }
            for (&e, &v) in &by_world[pos] {
                let phi = self.enumerator.get(e as usize);
                let neg = Formula::not(phi.clone());
                r.checked[0] += 1;
                if sentences.contains(&phi) != v || sentences.contains(&neg) == v {
                    fail(&mut r, 1, &phi);
                }
                match phi.kind() {
                    Kind::And(a, b) => {
                        let (ea, eb) = (self.index(a), self.index(b));
                        if let (Some(va), Some(vb)) = (
                            ea.and_then(|x| by_world[pos].get(&x)),
                            eb.and_then(|x| by_world[pos].get(&x)),
                        ) {
                            r.checked[1] += 1;
                            if v != (*va && *vb) {
                                fail(&mut r, 2, &phi);
                            }
                        }
                    }
                    Kind::Exists(x, body) if v => {
                        r.checked[2] += 1;
                        let instance = sentences.iter().any(|s| {
                            s.constants().iter().any(|c| sig.henkin_index(c).is_some() && body.subst_const(x, c) == *s)
                        });
                        if !instance {
                            fail(&mut r, 3, &phi);
                        }
                    }
                    Kind::Dia(theta) => {
                        r.checked[3] += 1;
                        let later = &worlds[pos..];
                        let ok = if v {
                            later.iter().any(|(_, s)| s.contains(theta))
                        } else {
                            let et = self.index(theta);
                            !by_world[pos..].iter().any(|m| et.and_then(|x| m.get(&x)) == Some(&true))
                        };
                        if !ok {
                            fail(&mut r, 4, &phi);
                        }
                    }
                    Kind::Box(theta) if v => {
                        r.checked[4] += 1;
                        let et = self.index(theta);
                        if by_world[pos..].iter().any(|m| et.and_then(|x| m.get(&x)) == Some(&false)) {
                            fail(&mut r, 5, &phi);
                        }
                    }
                    _ => {}
                }
            }
            for (ax, e) in self.theory.axioms().iter().zip(&axioms) {
                if let Some(v) = e.and_then(|x| by_world[pos].get(&x)) {
                    r.checked[5] += 1;
                    if !v || !sentences.contains(&ax.canonical()) {
                        fail(&mut r, 6, ax);
                    }
                }
            }
        }
        r
    }

    fn index(&mut self, f: &Formula) -> Option<u64> {
        self.enumerator.index_of(f).map(|e| e as u64)
    }
}
