use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{canonical_var, sym, Formula, Signature, Term};

/// Enumeration rank of a sentence: node count plus one more than the
/// largest Henkin index it mentions (nothing is added when it mentions
/// none). Only finitely many sentences share a rank.
pub fn rank(f: &Formula, sig: &Signature) -> usize {
    let top = f.constants().iter().filter_map(|c| sig.henkin_index(c)).max();
    f.size() + top.map_or(0, |k| k + 1)
}

type GenKey = (usize, usize, Option<usize>);

/// Deterministic enumeration φ0, φ1, … of the canonical sentences over
/// L ∪ C (see [`Formula::canonical`]).
///
/// Sentences are listed by [`rank`], then node count, then a fixed
/// lexicographic order on prefix notation with symbol order: atoms (in
/// signature order, arguments in the order variables `x0…`, base
/// constants, Henkin constants), `true`, `~`, `<>`, `[]`, `&`, `exists`.
/// Quantifiers only bind variables that occur, so over a propositional
/// signature no quantifier is ever listed. The order is part of the
/// crate's stable interface: the construction's output depends on it.
#[derive(Clone, Debug)]
pub struct Enumerator {
    sig: Signature,
    items: Vec<Formula>,
    index: HashMap<Formula, usize>,
    ranks_done: usize,
    memo: HashMap<GenKey, Arc<Vec<Formula>>>,
}

impl Enumerator {
    pub fn new(sig: Signature) -> Self {
        Enumerator { sig, items: Vec::new(), index: HashMap::new(), ranks_done: 0, memo: HashMap::new() }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// φ_e.
    pub fn get(&mut self, e: usize) -> Formula {
        while self.items.len() <= e {
            self.next_rank();
        }
        self.items[e].clone()
    }

    /// The index `e` with φ_e = `f`, or `None` when `f` is not a canonical
    /// sentence over the signature.
    pub fn index_of(&mut self, f: &Formula) -> Option<usize> {
        if !f.is_sentence() || self.sig.admits(f).is_err() || f.canonical() != *f {
            return None;
        }
        let r = rank(f, &self.sig);
        while self.ranks_done < r {
            self.next_rank();
        }
        self.index.get(f).copied()
    }

    /// Number of sentences listed so far.
    pub fn generated(&self) -> usize {
        self.items.len()
    }

    fn next_rank(&mut self) {
        let r = self.ranks_done + 1;
        let henkin = self.sig.is_first_order();
        for size in 1..=r {
            let extra = r - size;
            let batch = if extra == 0 {
                self.gen(size, 0, None)
            } else if henkin {
                let top = extra - 1;
                let name = self.sig.henkin_name(top);
                let all = self.gen(size, 0, Some(top));
                Arc::new(all.iter().filter(|f| f.constants().iter().any(|c| c.as_ref() == name)).cloned().collect())
            } else {
                continue;
            };
            for f in batch.iter() {
                self.index.insert(f.clone(), self.items.len());
                self.items.push(f.clone());
            }
        }
        self.ranks_done = r;
    }

    fn terms(&self, depth: usize, henkin: Option<usize>) -> Vec<Term> {
        let mut out: Vec<Term> = (0..depth).map(|d| Term::Var(canonical_var(d))).collect();
        out.extend(self.sig.base_constants().iter().map(|c| Term::Const(sym(c))));
        if let Some(h) = henkin {
            out.extend((0..=h).map(|k| Term::Const(sym(&self.sig.henkin_name(k)))));
        }
        out
    }

    // All formulas of exactly `size` nodes whose free variables are among
    // x0..x{depth-1} and whose Henkin constants are among c0..c{henkin}.
    fn gen(&mut self, size: usize, depth: usize, henkin: Option<usize>) -> Arc<Vec<Formula>> {
        let key = (size, depth, henkin);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            let terms = self.terms(depth, henkin);
            for p in self.sig.predicates() {
                if p.arity == 0 {
                    out.push(Formula::prop(&p.name));
                    continue;
                }
                if terms.is_empty() {
                    continue;
                }
                let mut digits = alloc::vec![0usize; p.arity];
                loop {
                    out.push(Formula::atom(&p.name, digits.iter().map(|&k| terms[k].clone()).collect()));
                    let mut pos = p.arity;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        digits[pos] += 1;
                        if digits[pos] < terms.len() {
                            break;
                        }
                        digits[pos] = 0;
                    }
                    if digits.iter().all(|&d| d == 0) {
                        break;
                    }
                }
            }
            out.push(Formula::top());
        } else {
            let sub = self.gen(size - 1, depth, henkin);
            out.extend(sub.iter().map(|g| Formula::not(g.clone())));
            out.extend(sub.iter().map(|g| Formula::dia(g.clone())));
            out.extend(sub.iter().map(|g| Formula::boxed(g.clone())));
            for left in 1..size - 1 {
                let a = self.gen(left, depth, henkin);
                let b = self.gen(size - 1 - left, depth, henkin);
                for x in a.iter() {
                    for y in b.iter() {
                        out.push(Formula::and(x.clone(), y.clone()));
                    }
                }
            }
            if self.sig.is_first_order() {
                let var = canonical_var(depth);
                let body = self.gen(size - 1, depth + 1, henkin);
                out.extend(body.iter().filter(|g| g.has_free(&var)).map(|g| Formula::exists_sym(var.clone(), g.clone())));
            }
        }
        let out = Arc::new(out);
        self.memo.insert(key, out.clone());
        out
    }
}

/// φ_e for a fresh enumeration over `sig`. Callers that need many indices
/// should keep an [`Enumerator`] instead.
pub fn enumerate_sentence(sig: &Signature, e: usize) -> Formula {
    Enumerator::new(sig.clone()).get(e)
}

impl Formula {
    /// True for canonical sentences; these are exactly what the
    /// enumeration lists.
    pub fn is_canonical_sentence(&self) -> bool {
        self.is_sentence() && self.canonical() == *self
    }
}
