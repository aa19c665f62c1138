use std::collections::{BTreeMap, HashMap};

use super::{Expr, Func, Node};

/// A derivation of the expression algebra, fixed by its value on each variable.
///
/// `Derivation::partial("x")` is the ordinary partial derivative. Assigning
/// derivatives to several variables encodes a total derivative along a
/// system of ODEs, e.g. `t -> 1, y -> z, z -> 6*y^2 + t` for Painlevé I.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Derivation {
    map: BTreeMap<String, Expr>,
}

impl Derivation {
    pub fn new() -> Derivation {
        Derivation::default()
    }

    pub fn partial(var: &str) -> Derivation {
        Derivation::new().with(var, Expr::one())
    }

    pub fn with(mut self, var: &str, value: Expr) -> Derivation {
        self.map.insert(var.to_string(), value);
        self
    }

    pub fn set(&mut self, var: &str, value: Expr) {
        self.map.insert(var.to_string(), value);
    }

    pub fn get(&self, var: &str) -> Option<&Expr> {
        self.map.get(var)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let mut memo = HashMap::new();
        self.go(e, &mut memo)
    }

    fn go(&self, e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&e.addr()) {
            return d.clone();
        }
        let d = match e.node() {
            Node::Num(_) | Node::I | Node::Pi => Expr::zero(),
            Node::Var(v) => self.map.get(&**v).cloned().unwrap_or_else(Expr::zero),
            Node::Sum(c) => Expr::sum(c.iter().map(|x| self.go(x, memo)).collect()),
            Node::Product(c) => {
                let mut terms = Vec::new();
                for (i, f) in c.iter().enumerate() {
                    let df = self.go(f, memo);
                    if df.is_zero_literal() {
                        continue;
                    }
                    let mut factors = c.clone();
                    factors[i] = df;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Node::Neg(a) => -self.go(a, memo),
            Node::Quotient(a, b) => {
                let da = self.go(a, memo);
                let db = self.go(b, memo);
                let first = &da / b;
                if db.is_zero_literal() {
                    first
                } else {
                    first - Expr::product(vec![a.clone(), db, b.clone().powi(-2)])
                }
            }
            Node::Pow(b, x) => {
                let db = self.go(b, memo);
                let dx = self.go(x, memo);
                if dx.is_zero_literal() {
                    if db.is_zero_literal() {
                        Expr::zero()
                    } else {
                        let lowered = match x.as_num() {
                            Some(n) => Expr::num(n.add(super::Num::int(-1))),
                            None => x - 1,
                        };
                        Expr::product(vec![x.clone(), Expr::pow(b.clone(), lowered), db])
                    }
                } else {
                    let inner = Expr::sum(vec![
                        Expr::product(vec![dx, b.clone().ln()]),
                        Expr::product(vec![x.clone(), db, b.clone().recip()]),
                    ]);
                    Expr::product(vec![e.clone(), inner])
                }
            }
            Node::Func(f, a) => {
                let da = self.go(a, memo);
                if da.is_zero_literal() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Sin => a.clone().cos(),
                        Func::Cos => -a.clone().sin(),
                        Func::Sinh => a.clone().cosh(),
                        Func::Cosh => a.clone().sinh(),
                        Func::Tanh => 1 - a.clone().tanh().sqr(),
                        Func::Exp => e.clone(),
                        Func::Ln => a.clone().recip(),
                    };
                    Expr::product(vec![outer, da])
                }
            }
        };
        memo.insert(e.addr(), d.clone());
        d
    }
}

pub(super) fn diff(e: &Expr, var: &str) -> Expr {
    Derivation::partial(var).apply(e)
}
