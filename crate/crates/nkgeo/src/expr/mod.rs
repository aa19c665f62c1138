//! Symbolic scalar expressions over named variables.
//!
//! Trees are immutable and reference counted, so cloning is cheap and shared
//! subtrees are common. Every node caches a structural hash, which makes
//! equality checks and common-subexpression detection fast.

mod diff;
mod eval;
mod num;
mod parse;
mod poly;
mod print;
mod simplify;
mod tape;
mod zero;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Rational64;

pub use diff::Derivation;
pub use eval::{EvalError, Point, C64};
pub use num::Num;
pub use parse::{parse, ParseError};
pub use poly::normalize_zero;
pub use tape::Tape;
pub use zero::{format_point, symbolic_zero, SampleSpace, Verdict, ZeroTestError};

/// Elementary functions understood by the parser and evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Ln,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Parity under `x -> -x`: `Some(true)` odd, `Some(false)` even.
    fn parity(self) -> Option<bool> {
        match self {
            Func::Sin | Func::Sinh | Func::Tanh => Some(true),
            Func::Cos | Func::Cosh => Some(false),
            Func::Exp | Func::Ln => None,
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Num(Num),
    I,
    Pi,
    Var(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, Expr),
    Neg(Expr),
    Quotient(Expr, Expr),
    Func(Func, Expr),
}

struct Inner {
    node: Node,
    hash: u64,
    size: usize,
}

#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn mix(h: u64, v: u64) -> u64 {
    // splitmix-style combiner; deterministic across runs and platforms
    let mut z = h ^ v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

impl Expr {
    fn from_node(node: Node) -> Expr {
        let (hash, size) = match &node {
            Node::Num(Num::Q(q)) => (mix(mix(1, *q.numer() as u64), *q.denom() as u64), 1),
            Node::Num(Num::F(f)) => (mix(2, f.to_bits()), 1),
            Node::I => (3, 1),
            Node::Pi => (4, 1),
            Node::Var(v) => (mix(5, hash_str(v)), 1),
            Node::Sum(c) | Node::Product(c) => {
                let tag = if matches!(node, Node::Sum(_)) { 6 } else { 7 };
                c.iter().fold((tag, 1), |(h, s), e| (mix(h, e.0.hash), s + e.0.size))
            }
            Node::Pow(a, b) => (mix(mix(8, a.0.hash), b.0.hash), 1 + a.0.size + b.0.size),
            Node::Neg(a) => (mix(9, a.0.hash), 1 + a.0.size),
            Node::Quotient(a, b) => (mix(mix(10, a.0.hash), b.0.hash), 1 + a.0.size + b.0.size),
            Node::Func(f, a) => (mix(mix(11, *f as u64), a.0.hash), 1 + a.0.size),
        };
        Expr(Arc::new(Inner { node, hash, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of nodes in the tree, counting shared subtrees repeatedly.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    // ----- leaf constructors -----

    pub fn num(n: Num) -> Expr {
        Expr::from_node(Node::Num(n))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Num::int(n))
    }

    pub fn rational(p: i64, q: i64) -> Expr {
        Expr::num(Num::Q(Rational64::new(p, q)))
    }

    pub fn decimal(f: f64) -> Expr {
        Expr::num(Num::F(f))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn i() -> Expr {
        Expr::from_node(Node::I)
    }

    pub fn pi() -> Expr {
        Expr::from_node(Node::Pi)
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    // ----- raw structural constructors (no folding) -----

    pub fn raw_sum(children: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Sum(children))
    }

    pub fn raw_product(children: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Product(children))
    }

    pub fn raw_pow(base: Expr, exp: Expr) -> Expr {
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn raw_neg(a: Expr) -> Expr {
        Expr::from_node(Node::Neg(a))
    }

    pub fn raw_quotient(a: Expr, b: Expr) -> Expr {
        Expr::from_node(Node::Quotient(a, b))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::from_node(Node::Func(f, arg))
    }

    // ----- light-folding constructors -----

    /// Sum with flattening and removal of zero terms; adjacent numbers folded.
    pub fn sum(children: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(children.len());
        let mut constant = Num::ZERO;
        for c in children {
            match c.node() {
                Node::Num(n) => constant = constant.add(*n),
                Node::Sum(inner) => {
                    for d in inner {
                        if let Some(n) = d.as_num() {
                            constant = constant.add(n);
                        } else {
                            out.push(d.clone());
                        }
                    }
                }
                _ => out.push(c),
            }
        }
        if !constant.is_zero() {
            out.insert(0, Expr::num(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw_sum(out),
        }
    }

    /// Product with flattening, removal of unit factors, and zero absorption.
    pub fn product(children: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(children.len());
        let mut coeff = Num::ONE;
        let push = |e: &Expr, coeff: &mut Num, out: &mut Vec<Expr>| match e.node() {
            Node::Num(n) => *coeff = coeff.mul(*n),
            Node::Neg(a) => {
                *coeff = coeff.neg();
                if let Some(n) = a.as_num() {
                    *coeff = coeff.mul(n);
                } else {
                    out.push(a.clone());
                }
            }
            _ => out.push(e.clone()),
        };
        for c in &children {
            if let Node::Product(inner) = c.node() {
                for d in inner {
                    push(d, &mut coeff, &mut out);
                }
            } else {
                push(c, &mut coeff, &mut out);
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if !coeff.is_one() {
            out.insert(0, Expr::num(coeff));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::raw_product(out),
        }
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        match exp.as_num() {
            Some(n) if n.is_zero() => return Expr::one(),
            Some(n) if n.is_one() => return base,
            _ => {}
        }
        if let (Some(b), Some(k)) = (base.as_num(), exp.as_num().and_then(Num::as_integer)) {
            if let Some(v) = b.powi(k) {
                return Expr::num(v);
            }
        }
        Expr::raw_pow(base, exp)
    }

    pub fn powi(self, k: i64) -> Expr {
        Expr::pow(self, Expr::int(k))
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, Expr::int(-1))
    }

    pub fn sqr(&self) -> Expr {
        Expr::pow(self.clone(), Expr::int(2))
    }

    pub fn exp(self) -> Expr {
        if self.is_zero_literal() {
            return Expr::one();
        }
        Expr::func(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::func(Func::Ln, self)
    }

    pub fn sin(self) -> Expr {
        Expr::func(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::func(Func::Cos, self)
    }

    pub fn sinh(self) -> Expr {
        Expr::func(Func::Sinh, self)
    }

    pub fn cosh(self) -> Expr {
        Expr::func(Func::Cosh, self)
    }

    pub fn tanh(self) -> Expr {
        Expr::func(Func::Tanh, self)
    }

    // ----- inspection -----

    pub fn as_num(&self) -> Option<Num> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.as_num().is_some_and(Num::is_zero)
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_num().is_some_and(Num::is_one)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::I | Node::Pi | Node::Var(_) => vec![],
            Node::Sum(c) | Node::Product(c) => c.iter().collect(),
            Node::Pow(a, b) | Node::Quotient(a, b) => vec![a, b],
            Node::Neg(a) | Node::Func(_, a) => vec![a],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.addr()) {
                continue;
            }
            if let Node::Var(v) = e.node() {
                out.insert(v.to_string());
            }
            stack.extend(e.children());
        }
        out
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.free_vars().contains(var)
    }

    /// Replace variables by expressions, simultaneously.
    pub fn subs(&self, map: &BTreeMap<String, Expr>) -> Expr {
        let mut memo = std::collections::HashMap::new();
        self.subs_inner(map, &mut memo)
    }

    pub fn subs_one(&self, var: &str, value: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), value.clone());
        self.subs(&map)
    }

    fn subs_inner(
        &self,
        map: &BTreeMap<String, Expr>,
        memo: &mut std::collections::HashMap<usize, Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.addr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Node::Num(_) | Node::I | Node::Pi => self.clone(),
            Node::Sum(c) => Expr::raw_sum(c.iter().map(|e| e.subs_inner(map, memo)).collect()),
            Node::Product(c) => {
                Expr::raw_product(c.iter().map(|e| e.subs_inner(map, memo)).collect())
            }
            Node::Pow(a, b) => Expr::raw_pow(a.subs_inner(map, memo), b.subs_inner(map, memo)),
            Node::Neg(a) => Expr::raw_neg(a.subs_inner(map, memo)),
            Node::Quotient(a, b) => {
                Expr::raw_quotient(a.subs_inner(map, memo), b.subs_inner(map, memo))
            }
            Node::Func(f, a) => Expr::func(*f, a.subs_inner(map, memo)),
        };
        memo.insert(self.addr(), out.clone());
        out
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Distribute products over sums and collect like terms.
    ///
    /// Returns `None` if the expanded form would exceed `max_terms`.
    pub fn expand(&self, max_terms: usize) -> Option<Expr> {
        poly::expand(self, max_terms)
    }

    pub fn diff(&self, var: &str) -> Expr {
        diff::diff(self, var)
    }

    pub fn derive(&self, d: &Derivation) -> Expr {
        d.apply(self)
    }

    pub fn eval(&self, p: &Point) -> Result<C64, EvalError> {
        eval::eval(self, p)
    }

    /// Real part of the value, for callers working on real slices.
    pub fn eval_real(&self, p: &Point) -> Result<f64, EvalError> {
        Ok(self.eval(p)?.re)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a == b,
            (Node::I, Node::I) | (Node::Pi, Node::Pi) => true,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Sum(a), Node::Sum(b)) | (Node::Product(a), Node::Product(b)) => a == b,
            (Node::Pow(a, b), Node::Pow(c, d)) | (Node::Quotient(a, b), Node::Quotient(c, d)) => {
                a == c && b == d
            }
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Func(f, a), Node::Func(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Num(_) => 0,
            Node::I => 1,
            Node::Pi => 2,
            Node::Var(_) => 3,
            Node::Func(..) => 4,
            Node::Pow(..) => 5,
            Node::Product(_) => 6,
            Node::Sum(_) => 7,
            Node::Neg(_) => 8,
            Node::Quotient(..) => 9,
        }
    }
}

/// Canonical total order: numbers, constants, variables, functions, powers,
/// products, sums. `Equal` exactly when the trees are structurally equal.
impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        match a.rank().cmp(&b.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.total_cmp(y),
            (Node::I, Node::I) | (Node::Pi, Node::Pi) => Ordering::Equal,
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            (Node::Func(f, x), Node::Func(g, y)) => f.cmp(g).then_with(|| x.cmp(y)),
            (Node::Pow(x, e), Node::Pow(y, f)) | (Node::Quotient(x, e), Node::Quotient(y, f)) => {
                x.cmp(y).then_with(|| e.cmp(f))
            }
            (Node::Product(x), Node::Product(y)) | (Node::Sum(x), Node::Sum(y)) => {
                // compare from the most significant (last) factor, like degree order
                for (p, q) in x.iter().rev().zip(y.iter().rev()) {
                    match p.cmp(q) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                x.len().cmp(&y.len())
            }
            (Node::Neg(x), Node::Neg(y)) => x.cmp(y),
            _ => unreachable!("ranks matched"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<f64> for Expr {
    fn from(f: f64) -> Expr {
        Expr::decimal(f)
    }
}

impl From<&str> for Expr {
    fn from(v: &str) -> Expr {
        Expr::var(v)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl std::ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::int(rhs))
            }
        }
        impl std::ops::$tr<i64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::int(rhs))
            }
        }
        impl std::ops::$tr<Expr> for i64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::int(self), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for i64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::int(self), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::sum(vec![a, -b]));
binop!(Mul, mul, |a, b| Expr::product(vec![a, b]));
binop!(Div, div, |a, b| {
    if let Some(n) = b.as_num().and_then(Num::recip) {
        return Expr::product(vec![Expr::num(n), a]);
    }
    if a.is_zero_literal() {
        return Expr::zero();
    }
    Expr::raw_quotient(a, b)
});

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Num(n) => Expr::num(n.neg()),
            Node::Neg(a) => a.clone(),
            _ => Expr::raw_neg(self),
        }
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::sum(iter.collect())
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::product(iter.collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_equality_uses_shape_not_pointer() {
        let a = Expr::var("x1") * Expr::var("y1");
        let b = Expr::var("x1") * Expr::var("y1");
        assert_eq!(a, b);
        assert_ne!(a, Expr::var("y1") * Expr::var("x1"));
    }

    #[test]
    fn folding_constructors() {
        let x = Expr::var("x");
        assert_eq!(&x * 0, Expr::zero());
        assert_eq!(&x * 1, x);
        assert_eq!(&x + 0, x);
        assert_eq!(Expr::int(2) * Expr::int(3), Expr::int(6));
    }

    #[test]
    fn free_vars_and_subs() {
        let e = parse("sinh(y1)/x1 + t").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, vec!["t", "x1", "y1"]);
        let s = e.subs_one("t", &Expr::int(0)).simplify();
        assert_eq!(s, parse("sinh(y1)/x1").unwrap().simplify());
    }
}
