use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{EvalError, Fact, Interp, KripkeModel, LassoModel, World};
use crate::syntax::{Formula, Kind, Symbol, Term};

enum Frame<'a> {
    Kripke(&'a KripkeModel),
    Lasso(&'a LassoModel),
}

type Env = Vec<(Symbol, usize)>;

/// Computes truth vectors, one entry per world (for a lasso, per flat
/// position), memoized on shared subterms. Reuse one evaluator to check
/// several formulas against the same model.
pub struct Evaluator<'a> {
    frame: Frame<'a>,
    memo: HashMap<(usize, Env), Arc<Vec<bool>>>,
}

impl<'a> Evaluator<'a> {
    pub(super) fn kripke(m: &'a KripkeModel) -> Self {
        Evaluator { frame: Frame::Kripke(m), memo: HashMap::new() }
    }

    pub(super) fn lasso(m: &'a LassoModel) -> Self {
        Evaluator { frame: Frame::Lasso(m), memo: HashMap::new() }
    }

    fn interp(&self) -> &'a Interp {
        match self.frame {
            Frame::Kripke(m) => &m.interp,
            Frame::Lasso(m) => &m.interp,
        }
    }

    fn len(&self) -> usize {
        match self.frame {
            Frame::Kripke(m) => m.worlds.len(),
            Frame::Lasso(m) => m.len(),
        }
    }

    fn world(&self, i: usize) -> &'a World {
        match self.frame {
            Frame::Kripke(m) => &m.worlds[i],
            Frame::Lasso(m) => m.world_at_flat(i),
        }
    }

    /// Truth value of a sentence at every world.
    pub fn truth(&mut self, f: &Formula) -> Result<Arc<Vec<bool>>, EvalError> {
        let mut env = Vec::new();
        self.go(f, &mut env)
    }

    fn go(&mut self, f: &Formula, env: &mut Env) -> Result<Arc<Vec<bool>>, EvalError> {
        let key = (f.ptr_id(), env.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let n = self.len();
        let out: Vec<bool> = match f.kind() {
            Kind::Top => alloc::vec![true; n],
            Kind::Atom(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    args.push(self.term(t, env)?);
                }
                let fact = Fact { pred: a.pred.clone(), args };
                (0..n).map(|i| self.world(i).facts.contains(&fact)).collect()
            }
            Kind::Not(g) => self.go(g, env)?.iter().map(|b| !b).collect(),
            Kind::And(a, b) => {
                let x = self.go(a, env)?;
                let y = self.go(b, env)?;
                x.iter().zip(y.iter()).map(|(p, q)| *p && *q).collect()
            }
            Kind::Exists(v, g) => {
                let mut acc = alloc::vec![false; n];
                for d in 0..self.interp().domain.len() {
                    env.push((v.clone(), d));
                    let r = self.go(g, env);
                    env.pop();
                    for (a, b) in acc.iter_mut().zip(r?.iter()) {
                        *a |= *b;
                    }
                }
                acc
            }
            Kind::Dia(g) => {
                let t = self.go(g, env)?;
                self.modal(&t, false)
            }
            Kind::Box(g) => {
                let t = self.go(g, env)?;
                self.modal(&t, true)
            }
        };
        let out = Arc::new(out);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn term(&self, t: &Term, env: &Env) -> Result<usize, EvalError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|&(_, d)| d)
                .ok_or_else(|| EvalError::FreeVariable(v.to_string())),
            Term::Const(c) => self.interp().resolve(c).ok_or_else(|| EvalError::UnknownConstant(c.to_string())),
        }
    }

    // `universal` selects [] over <>.
    fn modal(&self, t: &[bool], universal: bool) -> Vec<bool> {
        match self.frame {
            Frame::Kripke(m) => m
                .succ
                .iter()
                .map(|s| if universal { s.iter().all(|&v| t[v]) } else { s.iter().any(|&v| t[v]) })
                .collect(),
            Frame::Lasso(m) => {
                let k = m.prefix.len();
                let on_loop = if universal { t[k..].iter().all(|&b| b) } else { t[k..].iter().any(|&b| b) };
                let mut out = alloc::vec![on_loop; t.len()];
                let mut acc = on_loop;
                for a in (0..k).rev() {
                    acc = if universal { acc && t[a] } else { acc || t[a] };
                    out[a] = acc;
                }
                out
            }
        }
    }
}
