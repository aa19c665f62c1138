use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};

/// Numeric coefficient: exact rational while it fits in `i64`, float otherwise.
#[derive(Clone, Copy, Debug)]
pub enum Num {
    Q(Rational64),
    F(f64),
}

impl Num {
    pub const ZERO: Num = Num::Q(Rational64::new_raw(0, 1));
    pub const ONE: Num = Num::Q(Rational64::new_raw(1, 1));

    pub fn int(n: i64) -> Num {
        Num::Q(Rational64::from_integer(n))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Q(q) => q.to_f64().unwrap_or(f64::NAN),
            Num::F(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Num::Q(q) => q.is_zero(),
            Num::F(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Num::Q(q) => q.is_one(),
            Num::F(f) => f == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Num::Q(q) => q.is_negative(),
            Num::F(f) => f < 0.0,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Num::Q(_))
    }

    /// Integer value, if this is an exact integer.
    pub fn as_integer(self) -> Option<i64> {
        match self {
            Num::Q(q) if q.is_integer() => Some(*q.numer()),
            _ => None,
        }
    }

    pub fn add(self, other: Num) -> Num {
        match (self, other) {
            (Num::Q(a), Num::Q(b)) => match a.checked_add(&b) {
                Some(c) => Num::Q(c),
                None => Num::F(self.to_f64() + other.to_f64()),
            },
            _ => Num::F(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Num) -> Num {
        match (self, other) {
            (Num::Q(a), Num::Q(b)) => match a.checked_mul(&b) {
                Some(c) => Num::Q(c),
                None => Num::F(self.to_f64() * other.to_f64()),
            },
            _ => Num::F(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(self) -> Num {
        match self {
            Num::Q(q) => match q.numer().checked_neg() {
                Some(n) => Num::Q(Rational64::new_raw(n, *q.denom())),
                None => Num::F(-self.to_f64()),
            },
            Num::F(f) => Num::F(-f),
        }
    }

    pub fn recip(self) -> Option<Num> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Num::Q(q) => Num::Q(q.recip()),
            Num::F(f) => Num::F(1.0 / f),
        })
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn powi(self, k: i64) -> Option<Num> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut acc = Num::ONE;
        let mut base = self;
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        Some(acc)
    }

    pub fn lcm_denominator(self) -> Option<i64> {
        match self {
            Num::Q(q) => Some(*q.denom()),
            Num::F(_) => None,
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        match (self, other) {
            (Num::Q(a), Num::Q(b)) => a == b,
            (Num::F(a), Num::F(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Num {}

impl std::hash::Hash for Num {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Num::Q(q) => {
                0u8.hash(state);
                q.numer().hash(state);
                q.denom().hash(state);
            }
            Num::F(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl Num {
    /// Total order: by value, exact before float on ties.
    pub fn total_cmp(&self, other: &Num) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Num::Q(a), Num::Q(b)) => a.cmp(b),
            (Num::F(a), Num::F(b)) => a.total_cmp(b),
            _ => match self.to_f64().total_cmp(&other.to_f64()) {
                Ordering::Equal => {
                    if self.is_exact() {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                }
                o => o,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Num::int(i64::MAX / 2);
        let p = big.mul(Num::int(4));
        assert!(!p.is_exact());
        assert!((p.to_f64() - 2.0 * i64::MAX as f64).abs() / p.to_f64() < 1e-12);
    }

    #[test]
    fn powers() {
        assert_eq!(Num::int(2).powi(10), Some(Num::int(1024)));
        assert_eq!(
            Num::int(2).powi(-2),
            Some(Num::Q(Rational64::new(1, 4)))
        );
        assert_eq!(Num::ZERO.powi(-1), None);
    }
}
