use alloc::string::String;
use alloc::vec::Vec;

use super::{is_keyword, sym, Formula, Signature, Symbol, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("trailing input")]
    Trailing,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("predicate `{pred}` takes {expected} argument(s), found {found}")]
    ArityMismatch { pred: String, expected: usize, found: usize },
    #[error("`{0}` is a constant and cannot be bound")]
    BindsConstant(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Arrow,
    Dia,
    Box,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                it.next();
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '~' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '◇' => Tok::Dia,
            '□' => Tok::Box,
            '-' | '<' | '[' => {
                let (want, tok) = match c {
                    '-' => ('>', Tok::Arrow),
                    '<' => ('>', Tok::Dia),
                    _ => (']', Tok::Box),
                };
                it.next();
                match it.peek() {
                    Some(&(_, d)) if d == want => {}
                    _ => {
                        let at = it.peek().map_or(text.len(), |&(j, _)| j);
                        return Err(ParseError { offset: at, kind: ParseErrorKind::BadChar(c) });
                    }
                }
                it.next();
                out.push((i, tok));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        end = j + d.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((i, Tok::Ident(text[i..end].into())));
                continue;
            }
            other => return Err(ParseError { offset: i, kind: ParseErrorKind::BadChar(other) }),
        };
        it.next();
        out.push((i, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: &'a Signature,
    bound: Vec<Symbol>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), kind })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &'static str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(ParseErrorKind::Expected(what))
        }
    }

    // imp := or ('->' imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.prefix()?;
        while self.eat(&Tok::And) {
            let rhs = self.prefix()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.prefix()?))
            }
            Some(Tok::Dia) => {
                self.pos += 1;
                Ok(Formula::dia(self.prefix()?))
            }
            Some(Tok::Box) => {
                self.pos += 1;
                Ok(Formula::boxed(self.prefix()?))
            }
            Some(Tok::Ident(w)) if w == "exists" || w == "forall" => {
                let universal = w == "forall";
                self.pos += 1;
                let var = match self.peek() {
                    Some(Tok::Ident(v)) if !is_keyword(v) => v.clone(),
                    _ => return self.err(ParseErrorKind::Expected("variable")),
                };
                if self.sig.is_constant(&var) || self.sig.arity(&var).is_some() {
                    return self.err(ParseErrorKind::BindsConstant(var));
                }
                self.pos += 1;
                self.expect(&Tok::Dot, "`.`")?;
                self.bound.push(sym(&var));
                let body = self.implication();
                self.bound.pop();
                let body = body?;
                Ok(if universal { Formula::forall(&var, body) } else { Formula::exists(&var, body) })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let start = self.offset();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implication()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(w)) if w == "true" => {
                self.pos += 1;
                Ok(Formula::top())
            }
            Some(Tok::Ident(w)) if w == "false" => {
                self.pos += 1;
                Ok(Formula::bot())
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let Some(arity) = self.sig.arity(&name) else {
                    return Err(ParseError { offset: start, kind: ParseErrorKind::UnknownSymbol(name) });
                };
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        args.push(self.term()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(&Tok::RParen, "`,` or `)`")?;
                        break;
                    }
                }
                if args.len() != arity {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::ArityMismatch { pred: name, expected: arity, found: args.len() },
                    });
                }
                Ok(Formula::atom(&name, args))
            }
            _ => self.err(ParseErrorKind::Expected("formula")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) if !is_keyword(&name) => {
                if self.sig.arity(&name).is_some() {
                    return self.err(ParseErrorKind::UnknownSymbol(name));
                }
                self.pos += 1;
                if self.bound.iter().any(|b| b.as_ref() == name) || !self.sig.is_constant(&name) {
                    Ok(Term::Var(sym(&name)))
                } else {
                    Ok(Term::Const(sym(&name)))
                }
            }
            _ => self.err(ParseErrorKind::Expected("term")),
        }
    }
}

/// Parses the ASCII grammar. Precedence from loosest to tightest: `->`
/// (right associative), `|`, `&`, then the prefix operators `~ [] <>` and
/// `exists x.` / `forall x.`; a quantifier's body extends as far right as
/// possible. Identifiers in argument position that are not constants are
/// variables, so the result may have free variables; see
/// [`Formula::is_sentence`].
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), sig, bound: Vec::new() };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err(ParseErrorKind::Trailing);
    }
    Ok(f)
}
