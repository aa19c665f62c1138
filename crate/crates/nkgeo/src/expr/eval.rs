use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Expr, Func, Node, Num};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("singular evaluation of `{subtree}`: {reason}")]
    Singular { subtree: String, reason: &'static str },
}

/// Assignment of complex values to variable names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    vals: BTreeMap<String, C64>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn from_real(pairs: &[(&str, f64)]) -> Point {
        let mut p = Point::new();
        for (k, v) in pairs {
            p.set_real(k, *v);
        }
        p
    }

    pub fn set(&mut self, name: &str, v: C64) {
        self.vals.insert(name.to_string(), v);
    }

    pub fn set_real(&mut self, name: &str, v: f64) {
        self.set(name, C64::new(v, 0.0));
    }

    pub fn with(mut self, name: &str, v: f64) -> Point {
        self.set_real(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<C64> {
        self.vals.get(name).copied()
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        self.get(name).map(|c| c.re)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, C64)> {
        self.vals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Copy with one coordinate shifted by a complex amount.
    pub fn shifted(&self, name: &str, by: C64) -> Point {
        let mut p = self.clone();
        let v = p.get(name).unwrap_or_default();
        p.set(name, v + by);
        p
    }
}

fn singular(e: &Expr, reason: &'static str) -> EvalError {
    let mut s = e.to_string();
    if s.len() > 200 {
        s.truncate(200);
        s.push_str("...");
    }
    EvalError::Singular { subtree: s, reason }
}

pub(super) fn num_value(n: Num) -> C64 {
    C64::new(n.to_f64(), 0.0)
}

pub(super) fn apply_func(f: Func, z: C64) -> Option<C64> {
    Some(match f {
        Func::Sin => z.sin(),
        Func::Cos => z.cos(),
        Func::Sinh => z.sinh(),
        Func::Cosh => z.cosh(),
        Func::Tanh => z.tanh(),
        Func::Exp => z.exp(),
        Func::Ln => {
            if z == C64::new(0.0, 0.0) {
                return None;
            }
            z.ln()
        }
    })
}

/// `b^k` for integer `k`; `None` on a negative power of zero.
pub(super) fn pow_int(b: C64, k: i64) -> Option<C64> {
    if k < 0 && b == C64::new(0.0, 0.0) {
        return None;
    }
    if k.unsigned_abs() <= i32::MAX as u64 {
        Some(b.powi(k as i32))
    } else {
        Some(b.powf(k as f64))
    }
}

/// General power through the principal logarithm.
pub(super) fn pow_general(b: C64, x: C64) -> Option<C64> {
    if b == C64::new(0.0, 0.0) {
        return if x.re > 0.0 { Some(C64::new(0.0, 0.0)) } else { None };
    }
    Some((x * b.ln()).exp())
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Plain tree-walking evaluator.
pub(super) fn eval(e: &Expr, p: &Point) -> Result<C64, EvalError> {
    let v = match e.node() {
        Node::Num(n) => num_value(*n),
        Node::I => C64::new(0.0, 1.0),
        Node::Pi => C64::new(std::f64::consts::PI, 0.0),
        Node::Var(v) => p.get(v).ok_or_else(|| EvalError::Unbound(v.to_string()))?,
        Node::Sum(c) => {
            let mut acc = C64::new(0.0, 0.0);
            for x in c {
                acc += eval(x, p)?;
            }
            acc
        }
        Node::Product(c) => {
            let mut acc = C64::new(1.0, 0.0);
            for x in c {
                acc *= eval(x, p)?;
            }
            acc
        }
        Node::Neg(a) => -eval(a, p)?,
        Node::Quotient(a, b) => {
            let num = eval(a, p)?;
            let den = eval(b, p)?;
            if den == C64::new(0.0, 0.0) {
                return Err(singular(e, "division by zero"));
            }
            num / den
        }
        Node::Pow(b, x) => {
            let base = eval(b, p)?;
            let r = match x.as_num() {
                Some(n) => match n.as_integer() {
                    Some(k) => pow_int(base, k),
                    None => pow_general(base, num_value(n)),
                },
                None => pow_general(base, eval(x, p)?),
            };
            r.ok_or_else(|| singular(e, "non-positive power of zero"))?
        }
        Node::Func(f, a) => {
            apply_func(*f, eval(a, p)?).ok_or_else(|| singular(e, "logarithm of zero"))?
        }
    };
    if !finite(v) {
        return Err(singular(e, "non-finite value"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn basic_values() {
        let e = parse("sinh(y1)/x1").unwrap();
        let p = Point::from_real(&[("x1", 1.0), ("y1", 0.0)]);
        assert_eq!(e.eval(&p).unwrap(), C64::new(0.0, 0.0));
        let t = parse("tanh(t)").unwrap();
        assert_eq!(t.eval(&Point::from_real(&[("t", 0.0)])).unwrap().norm(), 0.0);
    }

    #[test]
    fn unbound_and_singular() {
        let e = parse("1/x").unwrap();
        assert_eq!(e.eval(&Point::new()), Err(EvalError::Unbound("x".into())));
        assert!(matches!(
            e.eval(&Point::from_real(&[("x", 0.0)])),
            Err(EvalError::Singular { .. })
        ));
        assert!(matches!(
            parse("ln(x - 1)").unwrap().eval(&Point::from_real(&[("x", 1.0)])),
            Err(EvalError::Singular { .. })
        ));
    }

    #[test]
    fn complex_shift_of_sinh_is_periodic() {
        let e = parse("sinh(y1)").unwrap();
        let p = Point::from_real(&[("y1", 0.3)]);
        let q = p.shifted("y1", C64::new(0.0, 2.0 * std::f64::consts::PI));
        assert!((e.eval(&p).unwrap() - e.eval(&q).unwrap()).norm() < 1e-12);
    }
}
