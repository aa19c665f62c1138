use std::collections::HashMap;

use super::eval::{apply_func, num_value, pow_general, pow_int};
use super::{EvalError, Expr, Func, Node, Point, C64};

#[derive(Clone, Debug)]
enum Op {
    Const(C64),
    Var(usize),
    Sum(Vec<usize>),
    Product(Vec<usize>),
    Neg(usize),
    Div(usize, usize),
    PowInt(usize, i64),
    PowConst(usize, C64),
    Pow(usize, usize),
    Func(Func, usize),
}

/// A batch of expressions compiled to a flat instruction list.
///
/// Structurally equal subtrees are evaluated once, across all outputs.
/// Use this when the same expressions are evaluated at many points.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    srcs: Vec<Expr>,
    vars: Vec<String>,
    outputs: Vec<usize>,
}

struct Compiler {
    ops: Vec<Op>,
    srcs: Vec<Expr>,
    vars: Vec<String>,
    var_slot: HashMap<String, usize>,
    seen: HashMap<Expr, usize>,
}

impl Compiler {
    fn push(&mut self, op: Op, src: &Expr) -> usize {
        self.ops.push(op);
        self.srcs.push(src.clone());
        let id = self.ops.len() - 1;
        self.seen.insert(src.clone(), id);
        id
    }

    fn visit(&mut self, e: &Expr) -> usize {
        if let Some(&id) = self.seen.get(e) {
            return id;
        }
        let op = match e.node() {
            Node::Num(n) => Op::Const(num_value(*n)),
            Node::I => Op::Const(C64::new(0.0, 1.0)),
            Node::Pi => Op::Const(C64::new(std::f64::consts::PI, 0.0)),
            Node::Var(v) => {
                let next = self.vars.len();
                let slot = *self.var_slot.entry(v.to_string()).or_insert(next);
                if slot == next {
                    self.vars.push(v.to_string());
                }
                Op::Var(slot)
            }
            Node::Sum(c) => Op::Sum(c.iter().map(|x| self.visit(x)).collect()),
            Node::Product(c) => Op::Product(c.iter().map(|x| self.visit(x)).collect()),
            Node::Neg(a) => Op::Neg(self.visit(a)),
            Node::Quotient(a, b) => {
                let a = self.visit(a);
                Op::Div(a, self.visit(b))
            }
            Node::Pow(b, x) => {
                let bi = self.visit(b);
                match x.as_num() {
                    Some(n) => match n.as_integer() {
                        Some(k) => Op::PowInt(bi, k),
                        None => Op::PowConst(bi, num_value(n)),
                    },
                    None => Op::Pow(bi, self.visit(x)),
                }
            }
            Node::Func(f, a) => Op::Func(*f, self.visit(a)),
        };
        self.push(op, e)
    }
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut c = Compiler {
            ops: Vec::new(),
            srcs: Vec::new(),
            vars: Vec::new(),
            var_slot: HashMap::new(),
            seen: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| c.visit(e)).collect();
        Tape { ops: c.ops, srcs: c.srcs, vars: c.vars, outputs }
    }

    /// Variables read by the tape, in slot order.
    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    /// Resolve the tape's variables against a point.
    pub fn bind(&self, p: &Point) -> Result<Vec<C64>, EvalError> {
        self.vars
            .iter()
            .map(|v| p.get(v).ok_or_else(|| EvalError::Unbound(v.clone())))
            .collect()
    }

    pub fn eval(&self, p: &Point) -> Result<Vec<C64>, EvalError> {
        let inputs = self.bind(p)?;
        let mut scratch = Vec::new();
        let mut out = vec![C64::new(0.0, 0.0); self.outputs.len()];
        self.eval_slots(&inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Evaluate with inputs already in slot order; `scratch` is reused between calls.
    pub fn eval_slots(
        &self,
        inputs: &[C64],
        scratch: &mut Vec<C64>,
        out: &mut [C64],
    ) -> Result<(), EvalError> {
        scratch.clear();
        scratch.reserve(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(s) => inputs[*s],
                Op::Sum(c) => c.iter().map(|&j| scratch[j]).sum(),
                Op::Product(c) => c.iter().fold(C64::new(1.0, 0.0), |acc, &j| acc * scratch[j]),
                Op::Neg(a) => -scratch[*a],
                Op::Div(a, b) => {
                    let d = scratch[*b];
                    if d == C64::new(0.0, 0.0) {
                        return Err(self.singular(i, "division by zero"));
                    }
                    scratch[*a] / d
                }
                Op::PowInt(b, k) => pow_int(scratch[*b], *k)
                    .ok_or_else(|| self.singular(i, "non-positive power of zero"))?,
                Op::PowConst(b, x) => pow_general(scratch[*b], *x)
                    .ok_or_else(|| self.singular(i, "non-positive power of zero"))?,
                Op::Pow(b, x) => pow_general(scratch[*b], scratch[*x])
                    .ok_or_else(|| self.singular(i, "non-positive power of zero"))?,
                Op::Func(f, a) => {
                    apply_func(*f, scratch[*a]).ok_or_else(|| self.singular(i, "logarithm of zero"))?
                }
            };
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(self.singular(i, "non-finite value"));
            }
            scratch.push(v);
        }
        for (o, &k) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[k];
        }
        Ok(())
    }

    fn singular(&self, i: usize, reason: &'static str) -> EvalError {
        let mut s = self.srcs[i].to_string();
        if s.len() > 200 {
            s.truncate(200);
            s.push_str("...");
        }
        EvalError::Singular { subtree: s, reason }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn matches_tree_walk_and_shares_subtrees() {
        let a = parse("sinh(x*y)/(1 + x^2) + exp(x*y)").unwrap();
        let b = parse("(x*y)^3 - sinh(x*y)").unwrap();
        let tape = Tape::compile(&[a.clone(), b.clone()]);
        let p = Point::from_real(&[("x", 0.4), ("y", -1.2)]);
        let got = tape.eval(&p).unwrap();
        assert!((got[0] - a.eval(&p).unwrap()).norm() < 1e-14);
        assert!((got[1] - b.eval(&p).unwrap()).norm() < 1e-14);
        // x*y and sinh(x*y) appear once each
        let naive = Tape::compile(&[a]).num_ops() + Tape::compile(&[b]).num_ops();
        assert!(tape.num_ops() < naive);
    }

    #[test]
    fn reports_singular_subtree() {
        let tape = Tape::compile(&[parse("1/(x - 1)").unwrap()]);
        match tape.eval(&Point::from_real(&[("x", 1.0)])) {
            Err(EvalError::Singular { subtree, .. }) => assert_eq!(subtree, "1/(x - 1)"),
            other => panic!("{other:?}"),
        }
    }
}
