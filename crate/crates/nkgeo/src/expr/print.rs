use std::fmt::{self, Write};

use super::{Expr, Node, Num};

const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn fmt_num(n: Num) -> String {
    match n {
        Num::Q(q) if q.is_integer() => q.numer().to_string(),
        Num::Q(q) => format!("{}/{}", q.numer(), q.denom()),
        Num::F(f) => {
            let s = format!("{f}");
            if s.contains('.') || !f.is_finite() {
                s
            } else {
                s + ".0"
            }
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(n) if n.is_negative() => UNARY,
        Node::Num(Num::Q(q)) if !q.is_integer() => PROD,
        Node::Num(_) | Node::I | Node::Pi | Node::Var(_) | Node::Func(..) => ATOM,
        Node::Pow(..) => POW,
        Node::Neg(_) => UNARY,
        Node::Product(_) | Node::Quotient(..) => PROD,
        Node::Sum(_) => SUM,
    }
}

fn wrapped(out: &mut String, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        out.push('(');
        write_into(out, e)?;
        out.push(')');
        Ok(())
    } else {
        write_into(out, e)
    }
}

fn write_into(out: &mut String, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Num(n) => out.push_str(&fmt_num(*n)),
        Node::I => out.push('i'),
        Node::Pi => out.push_str("pi"),
        Node::Var(v) => out.push_str(v),
        Node::Func(f, a) => {
            write!(out, "{}(", f.name())?;
            write_into(out, a)?;
            out.push(')');
        }
        Node::Sum(terms) => {
            for (k, t) in terms.iter().enumerate() {
                if k == 0 {
                    wrapped(out, t, prec(t) < PROD)?;
                    continue;
                }
                match t.node() {
                    Node::Neg(a) => {
                        out.push_str(" - ");
                        wrapped(out, a, prec(a) < PROD)?;
                    }
                    Node::Num(n) if n.is_negative() => {
                        out.push_str(" - ");
                        out.push_str(&fmt_num(n.neg()));
                    }
                    _ => {
                        out.push_str(" + ");
                        wrapped(out, t, prec(t) < PROD)?;
                    }
                }
            }
        }
        Node::Product(factors) => {
            for (k, f) in factors.iter().enumerate() {
                if k > 0 {
                    out.push('*');
                }
                let parens = match f.node() {
                    Node::Sum(_) | Node::Product(_) => true,
                    Node::Quotient(..) | Node::Neg(_) => k > 0,
                    Node::Num(_) => k > 0 && prec(f) < ATOM,
                    _ => false,
                };
                wrapped(out, f, parens)?;
            }
        }
        Node::Quotient(a, b) => {
            wrapped(out, a, prec(a) < PROD)?;
            out.push('/');
            wrapped(out, b, prec(b) < POW)?;
        }
        Node::Pow(b, x) => {
            wrapped(out, b, prec(b) < ATOM)?;
            out.push('^');
            wrapped(out, x, prec(x) < ATOM)?;
        }
        Node::Neg(a) => {
            out.push('-');
            let parens = prec(a) < UNARY || matches!(a.node(), Node::Neg(_)) || prec(a) == UNARY;
            wrapped(out, a, parens)?;
        }
    }
    Ok(())
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    let mut s = String::new();
    write_into(&mut s, e)?;
    f.write_str(&s)
}
