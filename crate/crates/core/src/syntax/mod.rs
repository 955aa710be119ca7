//! Formulas, signatures and the machinery that orders them.

mod enumerate;
mod parse;
mod print;
mod schedule;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use hashbrown::HashSet;

pub use enumerate::{enumerate_sentence, rank, Enumerator};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use print::{print, print_full};
pub use schedule::{cantor_pair, cantor_unpair, first_stage_for, pair_schedule};

/// Interned-ish name used for predicates, constants and variables.
pub type Symbol = Arc<str>;

pub(crate) fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

/// A predicate symbol with its arity. Arity 0 is a propositional atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("symbol `{0}` is declared more than once")]
    Duplicate(String),
    #[error("symbol `{0}` collides with the Henkin constant pool `{1}<k>`")]
    HenkinClash(String, String),
    #[error("symbol `{0}` has the reserved variable form `x<k>`")]
    ReservedVariable(String),
    #[error("`{0}` is not an identifier")]
    BadName(String),
    #[error("the Henkin prefix must be a non-empty identifier")]
    BadHenkinPrefix,
}

/// The first-order language L together with the name of the Henkin pool C.
///
/// Henkin constants are `prefix0`, `prefix1`, … and are always available
/// as terms even though they are not listed among the base constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    predicates: Vec<Predicate>,
    base_constants: Vec<String>,
    henkin_prefix: String,
}

impl Signature {
    pub fn new(
        predicates: Vec<Predicate>,
        base_constants: Vec<String>,
        henkin_prefix: impl Into<String>,
    ) -> Result<Self, SignatureError> {
        let henkin_prefix = henkin_prefix.into();
        if !is_ident(&henkin_prefix) || henkin_prefix.chars().last().is_some_and(|c| c.is_ascii_digit())
        {
            return Err(SignatureError::BadHenkinPrefix);
        }
        let mut seen = BTreeSet::new();
        for name in predicates.iter().map(|p| p.name.as_str()).chain(base_constants.iter().map(String::as_str)) {
            if !is_ident(name) || is_keyword(name) {
                return Err(SignatureError::BadName(name.into()));
            }
            if !seen.insert(name) {
                return Err(SignatureError::Duplicate(name.into()));
            }
            if henkin_index_of(&henkin_prefix, name).is_some() {
                return Err(SignatureError::HenkinClash(name.into(), henkin_prefix.clone()));
            }
            if henkin_index_of("x", name).is_some() {
                return Err(SignatureError::ReservedVariable(name.into()));
            }
        }
        Ok(Signature { predicates, base_constants, henkin_prefix })
    }

    /// Propositional signature: every name becomes an arity-0 predicate.
    pub fn propositional(atoms: &[&str]) -> Result<Self, SignatureError> {
        let preds = atoms.iter().map(|a| Predicate { name: (*a).into(), arity: 0 }).collect();
        Signature::new(preds, Vec::new(), "c")
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn base_constants(&self) -> &[String] {
        &self.base_constants
    }

    pub fn henkin_prefix(&self) -> &str {
        &self.henkin_prefix
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.predicates.iter().find(|p| p.name == pred).map(|p| p.arity)
    }

    /// True when some predicate takes arguments, so quantifiers can bind.
    pub fn is_first_order(&self) -> bool {
        self.predicates.iter().any(|p| p.arity > 0)
    }

    pub fn henkin_name(&self, k: usize) -> String {
        alloc::format!("{}{}", self.henkin_prefix, k)
    }

    pub fn henkin_index(&self, name: &str) -> Option<usize> {
        henkin_index_of(&self.henkin_prefix, name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.base_constants.iter().any(|c| c == name) || self.henkin_index(name).is_some()
    }

    /// Checks that every symbol of `f` belongs to L ∪ C with the right arity.
    pub fn admits(&self, f: &Formula) -> Result<(), ParseErrorKind> {
        let mut bad = None;
        f.visit(&mut |g| {
            if bad.is_some() {
                return;
            }
            if let Kind::Atom(a) = g.kind() {
                match self.arity(&a.pred) {
                    None => bad = Some(ParseErrorKind::UnknownSymbol(a.pred.as_ref().into())),
                    Some(n) if n != a.args.len() => {
                        bad = Some(ParseErrorKind::ArityMismatch {
                            pred: a.pred.as_ref().into(),
                            expected: n,
                            found: a.args.len(),
                        })
                    }
                    Some(_) => {
                        for t in &a.args {
                            if let Term::Const(c) = t {
                                if !self.is_constant(c) {
                                    bad = Some(ParseErrorKind::UnknownSymbol(c.as_ref().into()));
                                }
                            }
                        }
                    }
                }
            }
        });
        bad.map_or(Ok(()), Err)
    }
}

pub(crate) fn henkin_index_of(prefix: &str, name: &str) -> Option<usize> {
    let digits = name.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub(crate) fn is_keyword(s: &str) -> bool {
    matches!(s, "exists" | "forall" | "true" | "false")
}

/// Name of the variable bound by the quantifier at nesting depth `d` in
/// canonical form.
pub fn canonical_var(d: usize) -> Symbol {
    Arc::from(alloc::format!("x{d}").as_str())
}

/// The core node kinds. `Or`, `->`, `forall` and `false` are expanded by
/// the parser and the smart constructors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Atom(Atom),
    Top,
    Not(Formula),
    And(Formula, Formula),
    Exists(Symbol, Formula),
    Dia(Formula),
    Box(Formula),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    size: usize,
    modal_depth: usize,
}

/// A first-order modal formula. Cloning is cheap; subterms are shared.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

const MIX: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(h: u64, x: u64) -> u64 {
    (h.rotate_left(27) ^ x).wrapping_mul(MIX)
}

fn str_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn term_hash(t: &Term) -> u64 {
    match t {
        Term::Var(v) => mix(11, str_hash(v)),
        Term::Const(c) => mix(13, str_hash(c)),
    }
}

impl Formula {
    fn make(kind: Kind) -> Self {
        let (hash, size, modal_depth) = match &kind {
            Kind::Atom(a) => {
                let h = a.args.iter().fold(mix(1, str_hash(&a.pred)), |h, t| mix(h, term_hash(t)));
                (h, 1, 0)
            }
            Kind::Top => (mix(2, 0), 1, 0),
            Kind::Not(f) => (mix(3, f.0.hash), f.size() + 1, f.modal_depth()),
            Kind::And(a, b) => (
                mix(mix(4, a.0.hash), b.0.hash),
                a.size().saturating_add(b.size()).saturating_add(1),
                a.modal_depth().max(b.modal_depth()),
            ),
            Kind::Exists(v, f) => (mix(mix(5, str_hash(v)), f.0.hash), f.size().saturating_add(1), f.modal_depth()),
            Kind::Dia(f) => (mix(6, f.0.hash), f.size().saturating_add(1), f.modal_depth() + 1),
            Kind::Box(f) => (mix(7, f.0.hash), f.size().saturating_add(1), f.modal_depth() + 1),
        };
        Formula(Arc::new(Node { kind, hash, size, modal_depth }))
    }

    pub fn atom(pred: &str, args: Vec<Term>) -> Self {
        Self::make(Kind::Atom(Atom { pred: sym(pred), args }))
    }

    pub fn prop(name: &str) -> Self {
        Self::atom(name, Vec::new())
    }

    pub fn top() -> Self {
        Self::make(Kind::Top)
    }

    pub fn bot() -> Self {
        Self::not(Self::top())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Self::make(Kind::Not(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Self::make(Kind::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::not(Self::and(a, Self::not(b)))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Self::make(Kind::Exists(sym(var), body))
    }

    pub(crate) fn exists_sym(var: Symbol, body: Formula) -> Self {
        Self::make(Kind::Exists(var, body))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Self::not(Self::exists(var, Self::not(body)))
    }

    pub fn dia(f: Formula) -> Self {
        Self::make(Kind::Dia(f))
    }

    pub fn boxed(f: Formula) -> Self {
        Self::make(Kind::Box(f))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = parts.into_iter();
        match it.next() {
            None => Self::top(),
            Some(first) => it.fold(first, Self::and),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Node count of the formula as a tree (saturating).
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn modal_depth(&self) -> usize {
        self.0.modal_depth
    }

    /// Identity of the shared node; stable while the formula is alive.
    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Pre-order visit of every distinct shared node (a DAG walk).
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        let mut seen = HashSet::new();
        let mut stack = alloc::vec![self.clone()];
        while let Some(g) = stack.pop() {
            if !seen.insert(g.ptr_id()) {
                continue;
            }
            f(&g);
            match g.kind() {
                Kind::Atom(_) | Kind::Top => {}
                Kind::Not(h) | Kind::Exists(_, h) | Kind::Dia(h) | Kind::Box(h) => stack.push(h.clone()),
                Kind::And(a, b) => {
                    stack.push(b.clone());
                    stack.push(a.clone());
                }
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        fn go(f: &Formula, bound: &mut Vec<Symbol>, out: &mut BTreeSet<Symbol>) {
            match f.kind() {
                Kind::Atom(a) => {
                    for t in &a.args {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Kind::Top => {}
                Kind::Not(g) | Kind::Dia(g) | Kind::Box(g) => go(g, bound, out),
                Kind::And(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Kind::Exists(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// True when `v` occurs free.
    pub fn has_free(&self, v: &str) -> bool {
        match self.kind() {
            Kind::Atom(a) => a.args.iter().any(|t| matches!(t, Term::Var(x) if x.as_ref() == v)),
            Kind::Top => false,
            Kind::Not(g) | Kind::Dia(g) | Kind::Box(g) => g.has_free(v),
            Kind::And(a, b) => a.has_free(v) || b.has_free(v),
            Kind::Exists(x, g) => x.as_ref() != v && g.has_free(v),
        }
    }

    /// Constant names occurring anywhere in the formula.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            if let Kind::Atom(a) = g.kind() {
                for t in &a.args {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
        });
        out
    }

    /// Replaces free occurrences of `var` by the constant `c`. Constants
    /// cannot be captured, so no renaming is needed.
    pub fn subst_const(&self, var: &str, c: &str) -> Formula {
        let c = sym(c);
        self.subst_with(var, &Term::Const(c))
    }

    fn subst_with(&self, var: &str, t: &Term) -> Formula {
        if !self.has_free(var) {
            return self.clone();
        }
        match self.kind() {
            Kind::Atom(a) => {
                let args = a
                    .args
                    .iter()
                    .map(|x| match x {
                        Term::Var(v) if v.as_ref() == var => t.clone(),
                        other => other.clone(),
                    })
                    .collect();
                Formula::make(Kind::Atom(Atom { pred: a.pred.clone(), args }))
            }
            Kind::Top => self.clone(),
            Kind::Not(g) => Formula::not(g.subst_with(var, t)),
            Kind::Dia(g) => Formula::dia(g.subst_with(var, t)),
            Kind::Box(g) => Formula::boxed(g.subst_with(var, t)),
            Kind::And(a, b) => Formula::and(a.subst_with(var, t), b.subst_with(var, t)),
            Kind::Exists(x, g) => Formula::exists_sym(x.clone(), g.subst_with(var, t)),
        }
    }

    /// Canonical representative up to renaming of bound variables and
    /// removal of vacuous quantifiers. The bound variable of a quantifier
    /// nested under `d` others becomes `x<d>`. Over the nonempty constant
    /// domains used throughout, `f` and `f.canonical()` hold at exactly the
    /// same worlds.
    pub fn canonical(&self) -> Formula {
        fn go(f: &Formula, scope: &mut Vec<(Symbol, Symbol)>) -> Formula {
            match f.kind() {
                Kind::Atom(a) => {
                    let args = a
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => match scope.iter().rev().find(|(old, _)| old == v) {
                                Some((_, new)) => Term::Var(new.clone()),
                                None => t.clone(),
                            },
                            Term::Const(_) => t.clone(),
                        })
                        .collect();
                    Formula::make(Kind::Atom(Atom { pred: a.pred.clone(), args }))
                }
                Kind::Top => f.clone(),
                Kind::Not(g) => Formula::not(go(g, scope)),
                Kind::Dia(g) => Formula::dia(go(g, scope)),
                Kind::Box(g) => Formula::boxed(go(g, scope)),
                Kind::And(a, b) => Formula::and(go(a, scope), go(b, scope)),
                Kind::Exists(v, g) => {
                    if !g.has_free(v) {
                        return go(g, scope);
                    }
                    let fresh = canonical_var(scope.len());
                    scope.push((v.clone(), fresh.clone()));
                    let body = go(g, scope);
                    scope.pop();
                    Formula::exists_sym(fresh, body)
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Negation that strips an outer `~` instead of stacking one.
    pub fn single_neg(&self) -> Formula {
        match self.kind() {
            Kind::Not(g) => g.clone(),
            _ => Formula::not(self.clone()),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.size == other.0.size && self.0.kind == other.0.kind)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Subformulas of `f` closed under single negation (`~g` for each `g`
/// that is not itself a negation). At most twice the node count.
pub fn subsentences(f: &Formula) -> Vec<Formula> {
    let mut seen: HashSet<Formula> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |g: Formula, out: &mut Vec<Formula>| {
        if seen.insert(g.clone()) {
            out.push(g);
        }
    };
    let mut subs = Vec::new();
    f.visit(&mut |g| subs.push(g.clone()));
    for g in subs {
        let n = g.single_neg();
        push(g, &mut out);
        push(n, &mut out);
    }
    out
}
