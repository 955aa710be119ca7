use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::OracleError;
use crate::syntax::{Formula, Kind, Symbol, Term};

/// A node of the grounded closure. Children always have smaller ids, so
/// id order is a topological order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(super) enum GNode {
    Atom(u32),
    Top,
    Not(u32),
    And(u32, u32),
    Any(Box<[u32]>),
    Dia(u32),
    Box(u32),
}

/// Quantifier-free, hash-consed image of a set of sentences over a fixed
/// finite domain and constant map.
pub(super) struct Ground<'c> {
    pub nodes: Vec<GNode>,
    intern: HashMap<GNode, u32>,
    pub atoms: Vec<(Symbol, Vec<usize>)>,
    atom_ix: HashMap<(Symbol, Vec<usize>), u32>,
    /// Node id of each modal node, in id order.
    pub modal: Vec<u32>,
    domain: usize,
    constant: &'c dyn Fn(&str) -> Option<usize>,
    memo: HashMap<(usize, Vec<(Symbol, usize)>), u32>,
}

impl<'c> Ground<'c> {
    pub fn new(domain: usize, constant: &'c dyn Fn(&str) -> Option<usize>) -> Self {
        Ground {
            nodes: Vec::new(),
            intern: HashMap::new(),
            atoms: Vec::new(),
            atom_ix: HashMap::new(),
            modal: Vec::new(),
            domain,
            constant,
            memo: HashMap::new(),
        }
    }

    fn node(&mut self, n: GNode) -> u32 {
        if let Some(&id) = self.intern.get(&n) {
            return id;
        }
        let id = self.nodes.len() as u32;
        if matches!(n, GNode::Dia(_) | GNode::Box(_)) {
            self.modal.push(id);
        }
        self.nodes.push(n.clone());
        self.intern.insert(n, id);
        id
    }

    pub fn add(&mut self, f: &Formula) -> Result<u32, OracleError> {
        let mut env = Vec::new();
        self.go(f, &mut env)
    }

    fn go(&mut self, f: &Formula, env: &mut Vec<(Symbol, usize)>) -> Result<u32, OracleError> {
        let key = (f.ptr_id(), env.clone());
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let id = match f.kind() {
            Kind::Top => self.node(GNode::Top),
            Kind::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    args.push(match t {
                        Term::Var(v) => env
                            .iter()
                            .rev()
                            .find(|(n, _)| n == v)
                            .map(|&(_, d)| d)
                            .ok_or_else(|| OracleError::NotASentence(v.to_string()))?,
                        Term::Const(c) => {
                            (self.constant)(c).ok_or_else(|| OracleError::UnknownConstant(c.to_string()))?
                        }
                    });
                }
                let k = (a.pred.clone(), args);
                let ix = match self.atom_ix.get(&k) {
                    Some(&ix) => ix,
                    None => {
                        let ix = self.atoms.len() as u32;
                        self.atoms.push(k.clone());
                        self.atom_ix.insert(k, ix);
                        ix
                    }
                };
                self.node(GNode::Atom(ix))
            }
            Kind::Not(g) => {
                let c = self.go(g, env)?;
                self.node(GNode::Not(c))
            }
            Kind::And(a, b) => {
                let x = self.go(a, env)?;
                let y = self.go(b, env)?;
                self.node(GNode::And(x, y))
            }
            Kind::Dia(g) => {
                let c = self.go(g, env)?;
                self.node(GNode::Dia(c))
            }
            Kind::Box(g) => {
                let c = self.go(g, env)?;
                self.node(GNode::Box(c))
            }
            Kind::Exists(v, g) => {
                let mut kids = Vec::with_capacity(self.domain);
                for d in 0..self.domain {
                    env.push((v.clone(), d));
                    let r = self.go(g, env);
                    env.pop();
                    kids.push(r?);
                }
                kids.sort_unstable();
                kids.dedup();
                if kids.len() == 1 {
                    kids[0]
                } else {
                    self.node(GNode::Any(kids.into_boxed_slice()))
                }
            }
        };
        self.memo.insert(key, id);
        Ok(id)
    }
}

/// True when some quantifier binds a variable that occurs in its body.
pub(super) fn quantifies(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| {
        if let Kind::Exists(v, body) = g.kind() {
            found |= body.has_free(v);
        }
    });
    found
}

/// Restricted growth strings of length `n` over `d` symbols: the maps from
/// `n` constants into a `d`-element domain, up to renaming the elements.
pub(super) fn growth_strings(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a = alloc::vec![0usize; n];
    loop {
        out.push(a.clone());
        // Rightmost position that can still be increased.
        let mut i = n;
        let advanced = loop {
            if i <= 1 {
                break false;
            }
            i -= 1;
            let cap = a[..i].iter().max().map_or(0, |&m| m + 1).min(d - 1);
            if a[i] < cap {
                a[i] += 1;
                for x in &mut a[i + 1..] {
                    *x = 0;
                }
                break true;
            }
        };
        if !advanced {
            return out;
        }
    }
}
