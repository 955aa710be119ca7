use alloc::string::String;

use super::{Formula, Kind, Term};

/// Canonical ASCII text, with the fewest parentheses the grammar needs.
/// The printer never rewrites: `~~p` stays `~~p`.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out, false);
    out
}

/// Like [`print`], but every conjunction and quantifier is parenthesized.
pub fn print_full(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out, true);
    out
}

fn write_atom(f: &Formula, out: &mut String) {
    let Kind::Atom(a) = f.kind() else { unreachable!() };
    out.push_str(&a.pred);
    if !a.args.is_empty() {
        out.push('(');
        for (k, t) in a.args.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            match t {
                Term::Var(s) | Term::Const(s) => out.push_str(s),
            }
        }
        out.push(')');
    }
}

// A formula "ends open" when its rightmost descendant is a quantifier
// whose body would swallow whatever text follows it.
fn ends_open(f: &Formula) -> bool {
    match f.kind() {
        Kind::Exists(..) => true,
        Kind::Not(g) | Kind::Dia(g) | Kind::Box(g) => !matches!(g.kind(), Kind::And(..)) && ends_open(g),
        Kind::And(_, b) => !matches!(b.kind(), Kind::And(..)) && ends_open(b),
        Kind::Atom(_) | Kind::Top => false,
    }
}

fn parens(f: &Formula, out: &mut String, full: bool) {
    out.push('(');
    write(f, out, full);
    out.push(')');
}

fn write(f: &Formula, out: &mut String, full: bool) {
    match f.kind() {
        Kind::Atom(_) => write_atom(f, out),
        Kind::Top => out.push_str("true"),
        Kind::Not(g) | Kind::Dia(g) | Kind::Box(g) => {
            out.push_str(match f.kind() {
                Kind::Not(_) => "~",
                Kind::Dia(_) => "<>",
                _ => "[]",
            });
            if !full && matches!(g.kind(), Kind::And(..)) {
                parens(g, out, full);
            } else {
                write(g, out, full);
            }
        }
        Kind::And(a, b) => {
            if full {
                out.push('(');
            }
            if !full && ends_open(a) {
                parens(a, out, full);
            } else {
                write(a, out, full);
            }
            out.push_str(" & ");
            if !full && matches!(b.kind(), Kind::And(..)) {
                parens(b, out, full);
            } else {
                write(b, out, full);
            }
            if full {
                out.push(')');
            }
        }
        Kind::Exists(v, g) => {
            if full {
                out.push('(');
            }
            out.push_str("exists ");
            out.push_str(v);
            out.push_str(". ");
            write(g, out, full);
            if full {
                out.push(')');
            }
        }
    }
}
