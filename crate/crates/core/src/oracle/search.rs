//! Backward breadth-first search for a lasso satisfying a grounded goal.
//!
//! Along an ω-chain the truth of every modal node at a position is fixed
//! by the valuation there and the modal vector one step later, so a search
//! state is just the modal vector at the front of a partial lasso. States
//! are grown backwards from loop sets, one prefix world at a time, and all
//! `2^a` candidate valuations for the new world are evaluated together as
//! bit masks.
//!
//! Completeness thresholds. Let `K` be the modal nodes and `a` the atoms.
//! If a lasso works at all, one works whose loop has at most
//! `max(1, min(|K|, 2^a))` distinct worlds: keep one witness per true `<>`
//! and per false `[]`, and the loop's modal vector is unchanged. Along the
//! prefix every `<>` node can only switch from true to false and every
//! `[]` node only from false to true, and a prefix world whose modal
//! vector equals its successor's can be cut out without changing any other
//! position, so at most `|K| + 1` prefix worlds are needed, counting the
//! goal world at the front.

use alloc::boxed::Box;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::ground::{GNode, Ground};
use crate::semantics::LassoPos;

type Bits = Box<[u64]>;

fn bit(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

pub(super) struct Problem<'g, 'c> {
    pub g: &'g Ground<'c>,
    pub axioms: Vec<u32>,
    pub target: u32,
    /// Truth value the target must take at the goal position.
    pub want: bool,
}

pub(super) struct Found {
    /// Valuations of the prefix worlds, front first, as atom bit patterns.
    pub prefix: Vec<u32>,
    pub cycle: Vec<u32>,
    pub pos: LassoPos,
}

pub(super) enum Outcome {
    Found(Found),
    /// No lasso within the bounds; `complete` when the bounds reached the
    /// completeness thresholds, or the state space closed first.
    None { complete: bool },
    OutOfBudget,
}

/// Largest atom count the mask representation accepts.
pub(super) const MAX_ATOMS: usize = 20;

struct Rec {
    v: Bits,
    k: u32,
    parent: u32,
    val: u32,
    root: u32,
}

const NONE: u32 = u32::MAX;

struct Masks<'p, 'g, 'c> {
    p: &'p Problem<'g, 'c>,
    words: usize,
    nvals: usize,
    valid: Vec<u64>,
    atom_pat: Vec<Vec<u64>>,
    buf: Vec<u64>,
}

impl<'p, 'g, 'c> Masks<'p, 'g, 'c> {
    fn new(p: &'p Problem<'g, 'c>) -> Self {
        let a = p.g.atoms.len();
        let nvals = 1usize << a;
        let words = nvals.div_ceil(64);
        let mut valid = alloc::vec![0u64; words];
        for v in 0..nvals {
            set(&mut valid, v);
        }
        let atom_pat = (0..a)
            .map(|j| {
                let mut w = alloc::vec![0u64; words];
                for v in (0..nvals).filter(|v| v >> j & 1 == 1) {
                    set(&mut w, v);
                }
                w
            })
            .collect();
        Masks { p, words, nvals, valid, atom_pat, buf: alloc::vec![0; p.g.nodes.len() * words] }
    }

    fn cost(&self) -> u64 {
        (self.p.g.nodes.len() * self.words) as u64
    }

    fn row(&self, id: u32) -> &[u64] {
        let s = id as usize * self.words;
        &self.buf[s..s + self.words]
    }

    // Fills `buf` with each node's truth at a world, over all valuations.
    // `modal(k, node, child_row, out)` writes the row of the k-th modal
    // node; modal nodes come in id order, which is their index order.
    fn fill(&mut self, mut modal: impl FnMut(usize, &GNode, &[u64], &mut [u64])) {
        let w = self.words;
        let mut k = 0;
        for (id, n) in self.p.g.nodes.iter().enumerate() {
            let (done, rest) = self.buf.split_at_mut(id * w);
            let out = &mut rest[..w];
            let kid = |c: u32| &done[c as usize * w..c as usize * w + w];
            match n {
                GNode::Atom(j) => out.copy_from_slice(&self.atom_pat[*j as usize]),
                GNode::Top => out.copy_from_slice(&self.valid),
                GNode::Not(c) => {
                    for ((o, x), m) in out.iter_mut().zip(kid(*c)).zip(&self.valid) {
                        *o = !x & m;
                    }
                }
                GNode::And(a, b) => {
                    for ((o, x), y) in out.iter_mut().zip(kid(*a)).zip(kid(*b)) {
                        *o = x & y;
                    }
                }
                GNode::Any(cs) => {
                    out.fill(0);
                    for &c in cs.iter() {
                        for (o, x) in out.iter_mut().zip(kid(c)) {
                            *o |= x;
                        }
                    }
                }
                GNode::Dia(c) | GNode::Box(c) => {
                    modal(k, n, kid(*c), out);
                    k += 1;
                }
            }
        }
    }

    // Prefix world in front of a position with modal vector `next`.
    fn fill_prefix(&mut self, next: &[u64]) {
        let valid = self.valid.clone();
        self.fill(|k, n, child, out| {
            let on = bit(next, k);
            for ((o, x), m) in out.iter_mut().zip(child).zip(&valid) {
                *o = match n {
                    GNode::Dia(_) => x | if on { *m } else { 0 },
                    _ => x & if on { *m } else { 0 },
                };
            }
        });
    }

    // Loop whose worlds are the valuations in `s`.
    fn fill_loop(&mut self, s: &[u64]) {
        let valid = self.valid.clone();
        self.fill(|_, n, child, out| {
            let on = match n {
                GNode::Dia(_) => child.iter().zip(s).any(|(x, y)| x & y != 0),
                _ => child.iter().zip(s).all(|(x, y)| x & y == *y),
            };
            for (o, m) in out.iter_mut().zip(&valid) {
                *o = if on { *m } else { 0 };
            }
        });
    }

    fn axioms_ok(&self) -> Vec<u64> {
        let mut ok = self.valid.clone();
        for &ax in &self.p.axioms {
            for (o, x) in ok.iter_mut().zip(self.row(ax)) {
                *o &= x;
            }
        }
        ok
    }

    fn goal(&self) -> Vec<u64> {
        self.row(self.p.target).iter().zip(&self.valid).map(|(x, m)| if self.p.want { *x } else { !x & m }).collect()
    }

    fn vector_at(&self, v: usize) -> Bits {
        let mut out = alloc::vec![0u64; self.p.g.modal.len().div_ceil(64).max(1)].into_boxed_slice();
        for (k, &id) in self.p.g.modal.iter().enumerate() {
            if bit(self.row(id), v) {
                set(&mut out, k);
            }
        }
        out
    }
}

fn combinations(n: usize, m: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if m > n {
        return;
    }
    let mut c: Vec<usize> = (0..m).collect();
    loop {
        if !visit(&c) {
            return;
        }
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] < n - m + i {
                c[i] += 1;
                for j in i + 1..m {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Searches lassos with prefix at most `max_prefix` and loop at most
/// `max_loop` worlds, smallest total size first. `budget` is charged per
/// node-word evaluated.
pub(super) fn search(p: &Problem<'_, '_>, max_prefix: usize, max_loop: usize, budget: &mut u64) -> Outcome {
    let a = p.g.atoms.len();
    if a > MAX_ATOMS {
        return Outcome::OutOfBudget;
    }
    let nk = p.g.modal.len();
    let pstar = nk + 1;
    let lstar = nk.min(1 << a).max(1);
    let kmax = max_prefix.min(pstar);
    let mmax = max_loop.min(lstar).max(1);
    let mut m = Masks::new(p);

    let mut recs: Vec<Rec> = Vec::new();
    let mut loops: Vec<Vec<u32>> = Vec::new();
    let mut seen: HashMap<Bits, u32> = HashMap::new();
    let mut buckets: Vec<Vec<u32>> = alloc::vec![Vec::new()];
    let mut blocked = false;

    let charge = |budget: &mut u64, c: u64| -> bool {
        if *budget < c {
            return false;
        }
        *budget -= c;
        true
    };

    for n in 1..=kmax + mmax {
        buckets.push(Vec::new());
        if n <= mmax {
            let mut out = None;
            let mut broke = false;
            combinations(m.nvals, n, |c| {
                if !charge(budget, m.cost()) {
                    broke = true;
                    return false;
                }
                let mut s = alloc::vec![0u64; m.words];
                for &v in c {
                    set(&mut s, v);
                }
                m.fill_loop(&s);
                let ok = m.axioms_ok();
                if !c.iter().all(|&v| bit(&ok, v)) {
                    return true;
                }
                let goal = m.goal();
                let cycle: Vec<u32> = c.iter().map(|&v| v as u32).collect();
                if let Some(j) = c.iter().position(|&v| bit(&goal, v)) {
                    out = Some(Found { prefix: Vec::new(), cycle, pos: LassoPos::Loop(j) });
                    return false;
                }
                let v = m.vector_at(c[0]);
                if !seen.contains_key(&v) || seen[&v] > 0 {
                    seen.insert(v.clone(), 0);
                    loops.push(cycle);
                    buckets[n].push(recs.len() as u32);
                    recs.push(Rec { v, k: 0, parent: NONE, val: 0, root: loops.len() as u32 - 1 });
                }
                true
            });
            if let Some(f) = out {
                return Outcome::Found(f);
            }
            if broke {
                return Outcome::OutOfBudget;
            }
        }
        let prev = core::mem::take(&mut buckets[n - 1]);
        for &rid in &prev {
            let r = &recs[rid as usize];
            if seen.get(&r.v) != Some(&r.k) {
                continue;
            }
            if r.k as usize >= kmax {
                blocked = true;
                continue;
            }
            if !charge(budget, m.cost() + (m.nvals * nk.max(1)) as u64 / 64) {
                return Outcome::OutOfBudget;
            }
            let next = r.v.clone();
            let (k, root) = (r.k, r.root);
            m.fill_prefix(&next);
            let ok = m.axioms_ok();
            let goal = m.goal();
            if let Some(v) = (0..m.nvals).find(|&v| bit(&ok, v) && bit(&goal, v)) {
                let mut prefix = alloc::vec![v as u32];
                let mut cur = rid;
                while recs[cur as usize].parent != NONE {
                    prefix.push(recs[cur as usize].val);
                    cur = recs[cur as usize].parent;
                }
                return Outcome::Found(Found { prefix, cycle: loops[root as usize].clone(), pos: LassoPos::Prefix(0) });
            }
            for v in (0..m.nvals).filter(|&v| bit(&ok, v)) {
                let nv = m.vector_at(v);
                if seen.get(&nv).is_none_or(|&old| old > k + 1) {
                    seen.insert(nv.clone(), k + 1);
                    buckets[n].push(recs.len() as u32);
                    recs.push(Rec { v: nv, k: k + 1, parent: rid, val: v as u32, root });
                }
            }
        }
        if n >= mmax && buckets[n].is_empty() {
            break;
        }
    }
    Outcome::None { complete: (max_prefix >= pstar || !blocked) && max_loop >= lstar }
}
