//! Polynomial and rational normal forms over opaque atoms.
//!
//! `expand` distributes products. `normalize_zero` goes further: hyperbolic and
//! circular functions are rewritten through `exp`, exponentials of linear
//! combinations are split into powers of a few base exponentials, everything
//! is put over a common denominator, and the numerator is tested for zero.
//! That decides zero-ness for rational functions in variables and
//! exponentials, which covers the closed-form identities used in this crate.

use std::collections::{BTreeMap, HashMap};

use super::{Expr, Func, Node, Num};

type Mono = Vec<(Expr, i64)>;

#[derive(Debug)]
struct OverBudget;

#[derive(Clone, Debug, Default)]
struct Poly {
    terms: HashMap<Mono, Num>,
}

fn float_negligible(n: Num) -> bool {
    matches!(n, Num::F(f) if f.abs() < 1e-13)
}

fn mono_mul(a: &Mono, b: &Mono) -> (Mono, Num) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let pick = if i == a.len() {
            std::cmp::Ordering::Greater
        } else if j == b.len() {
            std::cmp::Ordering::Less
        } else {
            a[i].0.cmp(&b[j].0)
        };
        match pick {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let k = a[i].1 + b[j].1;
                if k != 0 {
                    out.push((a[i].0.clone(), k));
                }
                i += 1;
                j += 1;
            }
        }
    }
    // i^k reduces to {1, i, -1, -i}
    let mut sign = Num::ONE;
    if let Some(pos) = out.iter().position(|(e, _)| matches!(e.node(), Node::I)) {
        let k = out[pos].1.rem_euclid(4);
        if k >= 2 {
            sign = Num::int(-1);
        }
        if k % 2 == 1 {
            out[pos].1 = 1;
        } else {
            out.remove(pos);
        }
    }
    (out, sign)
}

impl Poly {
    fn constant(n: Num) -> Poly {
        let mut p = Poly::default();
        if !n.is_zero() {
            p.terms.insert(Vec::new(), n);
        }
        p
    }

    fn atom(e: Expr, k: i64) -> Poly {
        let mut p = Poly::default();
        let (m, s) = mono_mul(&vec![(e, k)], &Vec::new());
        p.terms.insert(m, s);
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, m: Mono, c: Num) {
        let entry = self.terms.entry(m);
        match entry {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let v = o.get().add(c);
                if v.is_zero() || float_negligible(v) {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    fn scale(&self, s: Num) -> Poly {
        if s.is_zero() {
            return Poly::default();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(s))).collect() }
    }

    fn mul(&self, other: &Poly, max_terms: usize) -> Result<Poly, OverBudget> {
        if self.len().saturating_mul(other.len()) > max_terms.saturating_mul(64) {
            return Err(OverBudget);
        }
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (m, s) = mono_mul(ma, mb);
                out.add_term(m, ca.mul(*cb).mul(s));
            }
            if out.len() > max_terms {
                return Err(OverBudget);
            }
        }
        Ok(out)
    }

    fn pow(&self, k: u32, max_terms: usize) -> Result<Poly, OverBudget> {
        let mut acc = Poly::constant(Num::ONE);
        for _ in 0..k {
            acc = acc.mul(self, max_terms)?;
        }
        Ok(acc)
    }

    fn single_term(&self) -> Option<(&Mono, Num)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (m, *c))
        } else {
            None
        }
    }

    fn sorted_terms(&self) -> Vec<(&Mono, Num)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    fn to_expr(&self) -> Expr {
        let terms = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let mut f = vec![Expr::num(c)];
                f.extend(m.iter().map(|(a, k)| Expr::pow(a.clone(), Expr::int(*k))));
                Expr::product(f)
            })
            .collect();
        Expr::sum(terms).simplify()
    }

    /// Split off the monomial content and the leading coefficient so that
    /// `self = coeff * content * primitive`.
    fn primitive(&self) -> (Num, Mono, Poly) {
        let sorted = self.sorted_terms();
        let lead = sorted[0].1;
        let mut atoms: BTreeMap<Expr, i64> = BTreeMap::new();
        for (m, _) in &sorted {
            for (a, _) in m.iter() {
                atoms.insert(a.clone(), i64::MAX);
            }
        }
        for (a, lo) in atoms.iter_mut() {
            for (m, _) in &sorted {
                let e = m.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e);
                *lo = (*lo).min(e);
            }
        }
        let content: Mono = atoms
            .into_iter()
            .filter(|(a, e)| *e != 0 && !matches!(a.node(), Node::I))
            .collect();
        let inv_content: Mono = content.iter().map(|(a, e)| (a.clone(), -e)).collect();
        let inv_lead = lead.recip().unwrap_or(Num::ONE);
        let mut prim = Poly::default();
        for (m, c) in &self.terms {
            let (mm, s) = mono_mul(m, &inv_content);
            prim.add_term(mm, c.mul(inv_lead).mul(s));
        }
        (lead, content, prim)
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Poly) -> bool {
        self.terms == other.terms
    }
}

/// Numerator over a product of (primitive, non-monomial) denominator factors.
#[derive(Clone, Debug)]
struct Frac {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl Frac {
    fn poly(p: Poly) -> Frac {
        Frac { num: p, den: Vec::new() }
    }

    fn add(&self, other: &Frac, max: usize) -> Result<Frac, OverBudget> {
        let mut den = self.den.clone();
        for (f, k) in &other.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, j)) => *j = (*j).max(*k),
                None => den.push((f.clone(), *k)),
            }
        }
        let lift = |fr: &Frac| -> Result<Poly, OverBudget> {
            let mut n = fr.num.clone();
            for (f, k) in &den {
                let have = fr.den.iter().find(|(g, _)| g == f).map_or(0, |(_, j)| *j);
                if *k > have {
                    n = n.mul(&f.pow(k - have, max)?, max)?;
                }
            }
            Ok(n)
        };
        let num = lift(self)?.add(&lift(other)?);
        if num.len() > max {
            return Err(OverBudget);
        }
        Ok(Frac { num, den })
    }

    fn mul(&self, other: &Frac, max: usize) -> Result<Frac, OverBudget> {
        let num = self.num.mul(&other.num, max)?;
        let mut den = self.den.clone();
        for (f, k) in &other.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, j)) => *j += *k,
                None => den.push((f.clone(), *k)),
            }
        }
        Ok(Frac { num, den })
    }

    fn inv(&self, max: usize) -> Result<Option<Frac>, OverBudget> {
        if self.num.is_zero() {
            return Ok(None);
        }
        let mut num = Poly::constant(Num::ONE);
        for (f, k) in &self.den {
            num = num.mul(&f.pow(*k, max)?, max)?;
        }
        if let Some((m, c)) = self.num.single_term() {
            let inv: Mono = m.iter().map(|(a, k)| (a.clone(), -k)).collect();
            let mut p = Poly::default();
            let (mm, s) = mono_mul(&inv, &Vec::new());
            p.add_term(mm, c.recip().unwrap_or(Num::ONE).mul(s));
            return Ok(Some(Frac::poly(num.mul(&p, max)?)));
        }
        let (lead, content, prim) = self.num.primitive();
        let inv_content: Mono = content.iter().map(|(a, e)| (a.clone(), -e)).collect();
        let mut scaled = Poly::default();
        let inv_lead = lead.recip().unwrap_or(Num::ONE);
        for (m, c) in &num.terms {
            let (mm, s) = mono_mul(m, &inv_content);
            scaled.add_term(mm, c.mul(inv_lead).mul(s));
        }
        Ok(Some(Frac { num: scaled, den: vec![(prim, 1)] }))
    }

    fn powi(&self, k: i64, max: usize) -> Result<Option<Frac>, OverBudget> {
        let base = if k < 0 {
            match self.inv(max)? {
                Some(f) => f,
                None => return Ok(None),
            }
        } else {
            self.clone()
        };
        let mut acc = Frac::poly(Poly::constant(Num::ONE));
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base, max)?;
        }
        Ok(Some(acc))
    }
}

/// Rewrites applied before rational normalization.
struct Normalizer {
    max: usize,
    /// For each exponential argument monomial: the lcm of coefficient denominators.
    exp_scale: HashMap<Mono, i64>,
    memo: HashMap<usize, Frac>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `sinh, cosh, tanh, sin, cos` through `exp`, and `b^x` (non-rational x)
/// as `exp(x ln b)`.
fn to_exponential(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(r) = memo.get(&e.addr()) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Num(_) | Node::I | Node::Pi | Node::Var(_) => e.clone(),
        Node::Sum(c) => Expr::raw_sum(c.iter().map(|x| to_exponential(x, memo)).collect()),
        Node::Product(c) => {
            Expr::raw_product(c.iter().map(|x| to_exponential(x, memo)).collect())
        }
        Node::Neg(a) => Expr::raw_neg(to_exponential(a, memo)),
        Node::Quotient(a, b) => {
            Expr::raw_quotient(to_exponential(a, memo), to_exponential(b, memo))
        }
        Node::Pow(b, x) => {
            let b2 = to_exponential(b, memo);
            if x.as_num().is_some_and(|n| n.is_exact()) {
                Expr::raw_pow(b2, x.clone())
            } else {
                (to_exponential(x, memo) * b2.ln()).exp()
            }
        }
        Node::Func(f, a) => {
            let a = to_exponential(a, memo);
            let ep = || a.clone().exp();
            let em = || (-a.clone()).exp();
            let iep = || (Expr::i() * &a).exp();
            let iem = || (-(Expr::i() * &a)).exp();
            match f {
                Func::Sinh => (ep() - em()) / 2,
                Func::Cosh => (ep() + em()) / 2,
                Func::Tanh => (ep() - em()) / (ep() + em()),
                Func::Sin => (iep() - iem()) / (Expr::int(2) * Expr::i()),
                Func::Cos => (iep() + iem()) / 2,
                Func::Exp => ep(),
                Func::Ln => a.ln(),
            }
        }
    };
    memo.insert(e.addr(), r.clone());
    r
}

fn mono_expr(m: &Mono) -> Expr {
    Expr::product(m.iter().map(|(a, k)| Expr::pow(a.clone(), Expr::int(*k))).collect())
}

impl Normalizer {
    fn scan_exps(&mut self, e: &Expr, seen: &mut std::collections::HashSet<usize>) {
        if !seen.insert(e.addr()) {
            return;
        }
        if let Node::Func(Func::Exp, a) = e.node() {
            if let Ok(p) = to_poly(a, self.max) {
                for (m, c) in &p.terms {
                    if let Some(d) = c.lcm_denominator() {
                        let slot = self.exp_scale.entry(m.clone()).or_insert(1);
                        *slot = *slot / gcd(*slot, d) * d;
                    }
                }
            }
        }
        for c in e.children() {
            self.scan_exps(c, seen);
        }
    }

    fn exp_atom(&mut self, a: &Expr) -> Result<Frac, OverBudget> {
        let p = match to_poly(a, self.max) {
            Ok(p) => p,
            Err(_) => return Ok(Frac::poly(Poly::atom(a.clone().exp(), 1))),
        };
        if p.terms.values().any(|c| !c.is_exact()) {
            return Ok(Frac::poly(Poly::atom(Expr::func(Func::Exp, a.simplify()), 1)));
        }
        let mut acc = Poly::constant(Num::ONE);
        for (m, c) in p.sorted_terms() {
            let l = self.exp_scale.get(m).copied().unwrap_or(1);
            let base_arg = (mono_expr(m) / Expr::int(l)).simplify();
            let power = c.mul(Num::int(l)).as_integer().unwrap_or(1);
            acc = acc.mul(&Poly::atom(Expr::func(Func::Exp, base_arg), power), self.max)?;
        }
        Ok(Frac::poly(acc))
    }

    fn frac(&mut self, e: &Expr) -> Result<Option<Frac>, OverBudget> {
        if let Some(f) = self.memo.get(&e.addr()) {
            return Ok(Some(f.clone()));
        }
        let f = match e.node() {
            Node::Num(n) => Frac::poly(Poly::constant(*n)),
            Node::I | Node::Pi | Node::Var(_) => Frac::poly(Poly::atom(e.clone(), 1)),
            Node::Sum(c) => {
                let mut acc = Frac::poly(Poly::default());
                for x in c {
                    let Some(fx) = self.frac(x)? else { return Ok(None) };
                    acc = acc.add(&fx, self.max)?;
                }
                acc
            }
            Node::Product(c) => {
                let mut acc = Frac::poly(Poly::constant(Num::ONE));
                for x in c {
                    let Some(fx) = self.frac(x)? else { return Ok(None) };
                    acc = acc.mul(&fx, self.max)?;
                }
                acc
            }
            Node::Neg(a) => {
                let Some(fa) = self.frac(a)? else { return Ok(None) };
                Frac { num: fa.num.scale(Num::int(-1)), den: fa.den }
            }
            Node::Quotient(a, b) => {
                let Some(fa) = self.frac(a)? else { return Ok(None) };
                let Some(fb) = self.frac(b)? else { return Ok(None) };
                let Some(ib) = fb.inv(self.max)? else { return Ok(None) };
                fa.mul(&ib, self.max)?
            }
            Node::Pow(b, x) => match x.as_num() {
                Some(n) if n.as_integer().is_some() => {
                    let Some(fb) = self.frac(b)? else { return Ok(None) };
                    let Some(r) = fb.powi(n.as_integer().unwrap(), self.max)? else {
                        return Ok(None);
                    };
                    r
                }
                Some(Num::Q(q)) => {
                    let root = Expr::raw_pow(b.simplify(), Expr::rational(1, *q.denom()));
                    Frac::poly(Poly::atom(root, *q.numer()))
                }
                _ => Frac::poly(Poly::atom(e.simplify(), 1)),
            },
            Node::Func(Func::Exp, a) => self.exp_atom(a)?,
            Node::Func(f, a) => {
                Frac::poly(Poly::atom(Expr::func(*f, a.expand(self.max).unwrap_or(a.simplify())), 1))
            }
        };
        self.memo.insert(e.addr(), f.clone());
        Ok(Some(f))
    }
}

fn to_poly(e: &Expr, max: usize) -> Result<Poly, OverBudget> {
    let mut memo: HashMap<usize, Poly> = HashMap::new();
    to_poly_memo(e, max, &mut memo)
}

fn to_poly_memo(e: &Expr, max: usize, memo: &mut HashMap<usize, Poly>) -> Result<Poly, OverBudget> {
    if let Some(p) = memo.get(&e.addr()) {
        return Ok(p.clone());
    }
    let p = match e.node() {
        Node::Num(n) => Poly::constant(*n),
        Node::I | Node::Pi | Node::Var(_) => Poly::atom(e.clone(), 1),
        Node::Sum(c) => {
            let mut acc = Poly::default();
            for x in c {
                acc = acc.add(&to_poly_memo(x, max, memo)?);
            }
            acc
        }
        Node::Product(c) => {
            let mut acc = Poly::constant(Num::ONE);
            for x in c {
                acc = acc.mul(&to_poly_memo(x, max, memo)?, max)?;
            }
            acc
        }
        Node::Neg(a) => to_poly_memo(a, max, memo)?.scale(Num::int(-1)),
        Node::Quotient(a, b) => {
            let pa = to_poly_memo(a, max, memo)?;
            let inv = inverse_as_poly(b, max, memo)?;
            pa.mul(&inv, max)?
        }
        Node::Pow(b, x) => match x.as_num().and_then(Num::as_integer) {
            Some(k) if k >= 0 && k <= 64 => to_poly_memo(b, max, memo)?.pow(k as u32, max)?,
            Some(k) if k < 0 && k >= -64 => {
                inverse_as_poly(b, max, memo)?.pow(k.unsigned_abs() as u32, max)?
            }
            _ => Poly::atom(Expr::raw_pow(to_poly_memo(b, max, memo)?.to_expr(), x.clone()), 1),
        },
        Node::Func(f, a) => Poly::atom(Expr::func(*f, to_poly_memo(a, max, memo)?.to_expr()), 1),
    };
    if p.len() > max {
        return Err(OverBudget);
    }
    memo.insert(e.addr(), p.clone());
    Ok(p)
}

/// `1/b` as a Laurent monomial when `b` is a monomial, else an opaque atom.
fn inverse_as_poly(
    b: &Expr,
    max: usize,
    memo: &mut HashMap<usize, Poly>,
) -> Result<Poly, OverBudget> {
    let pb = to_poly_memo(b, max, memo)?;
    if let Some((m, c)) = pb.single_term() {
        if let Some(ic) = c.recip() {
            let inv: Mono = m.iter().map(|(a, k)| (a.clone(), -k)).collect();
            let (mm, s) = mono_mul(&inv, &Vec::new());
            let mut p = Poly::default();
            p.add_term(mm, ic.mul(s));
            return Ok(p);
        }
    }
    Ok(Poly::atom(pb.to_expr(), -1))
}

pub(super) fn expand(e: &Expr, max_terms: usize) -> Option<Expr> {
    to_poly(&e.simplify(), max_terms).ok().map(|p| p.to_expr())
}

/// Decide whether `e` is identically zero as a rational function of its
/// variables and exponentials.
///
/// `Some(true)`: proven zero. `Some(false)`: the normal-form numerator is
/// nonzero (for expressions built from rational operations, `exp`, and the
/// hyperbolic/circular functions this means `e` is not identically zero).
/// `None`: the term budget was exceeded or a division by an identically zero
/// subexpression was met.
pub fn normalize_zero(e: &Expr, max_terms: usize) -> Option<bool> {
    let mut memo = HashMap::new();
    let rewritten = to_exponential(e, &mut memo);
    let mut nz = Normalizer { max: max_terms, exp_scale: HashMap::new(), memo: HashMap::new() };
    let mut seen = std::collections::HashSet::new();
    nz.scan_exps(&rewritten, &mut seen);
    match nz.frac(&rewritten) {
        Ok(Some(f)) => Some(f.num.is_zero()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn zero(s: &str) -> Option<bool> {
        normalize_zero(&parse(s).unwrap(), 20_000)
    }

    #[test]
    fn expansion() {
        let e = parse("(x + y)^2 - x^2 - 2*x*y").unwrap();
        assert_eq!(e.expand(1000).unwrap(), parse("y^2").unwrap().simplify());
    }

    #[test]
    fn rational_identities() {
        assert_eq!(zero("1/(x - 1) - 1/(x + 1) - 2/(x^2 - 1)"), Some(true));
        assert_eq!(zero("x/(2*x + 2*y) - 1/2 + y/(2*(x + y))"), Some(true));
        assert_eq!(zero("1/(x - 1) - 1/(x + 1)"), Some(false));
    }

    #[test]
    fn hyperbolic_identities() {
        assert_eq!(zero("cosh(t)^2 - sinh(t)^2 - 1"), Some(true));
        assert_eq!(zero("sinh(2*t) - 2*sinh(t)*cosh(t)"), Some(true));
        assert_eq!(zero("1 - tanh(t)^2 - 1/cosh(t)^2"), Some(true));
        assert_eq!(zero("exp(q/2)^2 - exp(q)"), Some(true));
        assert_eq!(zero("sin(x)^2 + cos(x)^2 - 1"), Some(true));
        assert_eq!(zero("cosh(t) - sinh(t)"), Some(false));
    }
}
