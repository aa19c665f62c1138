//! Value-preserving rewriting: constant folding, flattening, like-term and
//! like-factor collection, `exp` merging and `i^2 = -1`. Sums are never
//! distributed here; see `poly` for expansion.

use std::collections::HashMap;

use super::eval::apply_func;
use super::{Expr, Func, Node, Num, C64};

pub(super) fn simplify(e: &Expr) -> Expr {
    Simplifier::default().run(e)
}

#[derive(Default)]
struct Simplifier {
    memo: HashMap<usize, Expr>,
}

/// Split a simplified term into (numeric coefficient, remaining body).
fn split_coeff(e: &Expr) -> (Num, Expr) {
    match e.node() {
        Node::Num(n) => (*n, Expr::one()),
        Node::Product(c) => match c[0].as_num() {
            Some(n) => {
                let rest = &c[1..];
                let body =
                    if rest.len() == 1 { rest[0].clone() } else { Expr::raw_product(rest.to_vec()) };
                (n, body)
            }
            None => (Num::ONE, e.clone()),
        },
        _ => (Num::ONE, e.clone()),
    }
}

/// Build `coeff * body` in canonical product form (body already canonical).
fn scale(coeff: Num, body: &Expr) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if body.is_one_literal() {
        return Expr::num(coeff);
    }
    if coeff.is_one() {
        return body.clone();
    }
    let mut factors = vec![Expr::num(coeff)];
    match body.node() {
        Node::Product(c) => factors.extend(c.iter().cloned()),
        _ => factors.push(body.clone()),
    }
    Expr::raw_product(factors)
}

fn leading_negative(e: &Expr) -> bool {
    match e.node() {
        Node::Num(n) => n.is_negative(),
        Node::Product(c) => c[0].as_num().is_some_and(Num::is_negative),
        Node::Sum(c) => leading_negative(&c[0]),
        _ => false,
    }
}

impl Simplifier {
    fn run(&mut self, e: &Expr) -> Expr {
        if let Some(s) = self.memo.get(&e.addr()) {
            return s.clone();
        }
        let s = match e.node() {
            Node::Num(Num::F(f)) if f.fract() == 0.0 && f.abs() < 1e15 => {
                // integral decimals keep their float type; nothing to fold
                e.clone()
            }
            Node::Num(_) | Node::I | Node::Pi | Node::Var(_) => e.clone(),
            Node::Sum(c) => {
                let kids: Vec<Expr> = c.iter().map(|x| self.run(x)).collect();
                self.sum(kids)
            }
            Node::Product(c) => {
                let kids: Vec<Expr> = c.iter().map(|x| self.run(x)).collect();
                self.product(kids)
            }
            Node::Neg(a) => {
                let a = self.run(a);
                self.product(vec![Expr::int(-1), a])
            }
            Node::Quotient(a, b) => {
                let a = self.run(a);
                let b = self.run(b);
                let inv = self.pow(b, Expr::int(-1));
                self.product(vec![a, inv])
            }
            Node::Pow(b, x) => {
                let b = self.run(b);
                let x = self.run(x);
                self.pow(b, x)
            }
            Node::Func(f, a) => {
                let a = self.run(a);
                self.func(*f, a)
            }
        };
        self.memo.insert(e.addr(), s.clone());
        s
    }

    fn sum(&mut self, kids: Vec<Expr>) -> Expr {
        let mut constant = Num::ZERO;
        let mut order: Vec<Expr> = Vec::new();
        let mut coeffs: HashMap<Expr, Num> = HashMap::new();
        let mut add_term = |t: &Expr, constant: &mut Num| {
            if let Some(n) = t.as_num() {
                *constant = constant.add(n);
                return;
            }
            let (c, body) = split_coeff(t);
            match coeffs.get_mut(&body) {
                Some(acc) => *acc = acc.add(c),
                None => {
                    coeffs.insert(body.clone(), c);
                    order.push(body);
                }
            }
        };
        for k in &kids {
            match k.node() {
                Node::Sum(inner) => inner.iter().for_each(|t| add_term(t, &mut constant)),
                _ => add_term(k, &mut constant),
            }
        }
        order.sort();
        let mut terms: Vec<Expr> = Vec::with_capacity(order.len() + 1);
        if !constant.is_zero() {
            terms.push(Expr::num(constant));
        }
        for body in order {
            let c = coeffs[&body];
            if !c.is_zero() {
                terms.push(scale(c, &body));
            }
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::raw_sum(terms),
        }
    }

    fn product(&mut self, kids: Vec<Expr>) -> Expr {
        let mut coeff = Num::ONE;
        let mut i_power: i64 = 0;
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut order: Vec<Expr> = Vec::new();
        let mut exps: HashMap<Expr, Num> = HashMap::new();

        let mut stack: Vec<Expr> = kids.into_iter().rev().collect();
        while let Some(k) = stack.pop() {
            match k.node() {
                Node::Product(inner) => stack.extend(inner.iter().rev().cloned()),
                Node::Num(n) => coeff = coeff.mul(*n),
                Node::I => i_power += 1,
                Node::Func(Func::Exp, a) => exp_args.push(a.clone()),
                _ => {
                    let (base, k_exp) = match k.node() {
                        Node::Pow(b, x) => match x.as_num() {
                            Some(n) => (b.clone(), n),
                            None => (k.clone(), Num::ONE),
                        },
                        _ => (k.clone(), Num::ONE),
                    };
                    match exps.get_mut(&base) {
                        Some(acc) => *acc = acc.add(k_exp),
                        None => {
                            exps.insert(base.clone(), k_exp);
                            order.push(base);
                        }
                    }
                }
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut factors: Vec<Expr> = Vec::new();
        let mut again = false;
        for base in order {
            let k = exps[&base];
            if k.is_zero() {
                continue;
            }
            let f = self.pow(base.clone(), Expr::num(k));
            match f.node() {
                Node::Num(n) => coeff = coeff.mul(*n),
                Node::I => i_power += 1,
                Node::Func(Func::Exp, a) => exp_args.push(a.clone()),
                Node::Product(_) => {
                    again = true;
                    factors.push(f);
                }
                Node::Pow(b, _) if *b != base => {
                    again = true;
                    factors.push(f);
                }
                _ => factors.push(f),
            }
        }
        if again {
            let mut all = vec![Expr::num(coeff)];
            all.extend(std::iter::repeat(Expr::i()).take(i_power.rem_euclid(4) as usize));
            all.extend(exp_args.into_iter().map(Expr::exp));
            all.extend(factors);
            return self.product(all);
        }
        match i_power.rem_euclid(4) {
            1 => factors.push(Expr::i()),
            2 => coeff = coeff.neg(),
            3 => {
                coeff = coeff.neg();
                factors.push(Expr::i());
            }
            _ => {}
        }
        if !exp_args.is_empty() {
            let arg = self.sum(exp_args);
            let f = self.func(Func::Exp, arg);
            match f.node() {
                Node::Num(n) => coeff = coeff.mul(*n),
                Node::Func(Func::Exp, _) => factors.push(f),
                _ => {
                    let mut all = vec![Expr::num(coeff), f];
                    all.extend(factors);
                    return self.product(all);
                }
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        factors.sort();
        let body = match factors.len() {
            0 => Expr::one(),
            1 => factors.pop().unwrap(),
            _ => Expr::raw_product(factors),
        };
        scale(coeff, &body)
    }

    fn pow(&mut self, b: Expr, x: Expr) -> Expr {
        if let Some(k) = x.as_num() {
            if k.is_zero() {
                return Expr::one();
            }
            if k.is_one() {
                return b;
            }
            if let Some(bn) = b.as_num() {
                if let Some(ki) = k.as_integer() {
                    if let Some(v) = bn.powi(ki) {
                        return Expr::num(v);
                    }
                    return Expr::raw_pow(b, x);
                }
                if bn.is_one() {
                    return Expr::one();
                }
                if let (Num::F(f), false) = (bn, bn.is_negative()) {
                    return Expr::decimal(f.powf(k.to_f64()));
                }
                if !k.is_exact() && !bn.is_negative() {
                    return Expr::decimal(bn.to_f64().powf(k.to_f64()));
                }
                return Expr::raw_pow(b, x);
            }
            if let Some(ki) = k.as_integer() {
                match b.node() {
                    Node::I => {
                        return self.product(vec![Expr::i(); ki.rem_euclid(4) as usize]);
                    }
                    Node::Pow(c, m) => {
                        if let Some(mn) = m.as_num() {
                            let e = mn.mul(k);
                            return self.pow(c.clone(), Expr::num(e));
                        }
                    }
                    Node::Product(fs) => {
                        let parts: Vec<Expr> =
                            fs.iter().map(|f| self.pow(f.clone(), x.clone())).collect();
                        return self.product(parts);
                    }
                    Node::Func(Func::Exp, a) => {
                        let arg = self.product(vec![Expr::num(k), a.clone()]);
                        return self.func(Func::Exp, arg);
                    }
                    _ => {}
                }
            }
            return Expr::raw_pow(b, x);
        }
        if b.is_one_literal() {
            return Expr::one();
        }
        Expr::raw_pow(b, x)
    }

    // distributes over sums so the result's leading sign is stable
    fn negate(&mut self, a: Expr) -> Expr {
        match a.node() {
            Node::Sum(c) => {
                let terms = c.iter().map(|t| self.product(vec![Expr::int(-1), t.clone()])).collect();
                self.sum(terms)
            }
            _ => self.product(vec![Expr::int(-1), a]),
        }
    }

    fn func(&mut self, f: Func, a: Expr) -> Expr {
        if let Some(n) = a.as_num() {
            if n.is_zero() {
                return match f {
                    Func::Sin | Func::Sinh | Func::Tanh => Expr::zero(),
                    Func::Cos | Func::Cosh | Func::Exp => Expr::one(),
                    Func::Ln => Expr::func(f, a),
                };
            }
            if f == Func::Ln && n.is_one() {
                return Expr::zero();
            }
            if let Num::F(v) = n {
                if f != Func::Ln || v > 0.0 {
                    if let Some(z) = apply_func(f, C64::new(v, 0.0)) {
                        if z.re.is_finite() {
                            return Expr::decimal(z.re);
                        }
                    }
                }
            }
        }
        if f == Func::Exp {
            if let Node::Func(Func::Ln, inner) = a.node() {
                return inner.clone();
            }
        }
        if let Some(odd) = f.parity() {
            if leading_negative(&a) {
                let flipped = self.negate(a);
                let g = Expr::func(f, flipped);
                return if odd { self.product(vec![Expr::int(-1), g]) } else { g };
            }
        }
        Expr::func(f, a)
    }
}
