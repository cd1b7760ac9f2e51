//! Scalar values of the shipped semiring instances.
//!
//! Three instances are entire and zerosumfree and are accepted everywhere:
//! exact nonnegative rationals (`qnonneg`), Booleans (`bool`), and the
//! naturals (`nat`).  A fourth signed-integer instance (`int`) exists only so
//! the axiom checker has something to reject; kernels refuse it.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Tag identifying which semiring a value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Semiring {
    QNonNeg,
    Bool,
    Nat,
    Int,
}

impl Semiring {
    pub fn parse(s: &str) -> Result<Semiring> {
        match s {
            "qnonneg" => Ok(Semiring::QNonNeg),
            "bool" => Ok(Semiring::Bool),
            "nat" => Ok(Semiring::Nat),
            "int" => Ok(Semiring::Int),
            other => Err(Error::InvalidValue(format!("unknown semiring `{other}`"))),
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Semiring::QNonNeg => "qnonneg",
            Semiring::Bool => "bool",
            Semiring::Nat => "nat",
            Semiring::Int => "int",
        };
        f.write_str(s)
    }
}

/// An exact scalar; equality is structural (rationals stay in lowest terms).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemiringValue {
    Rational(BigRational),
    Boolean(bool),
    Natural(BigUint),
    Integer(BigInt),
}

impl SemiringValue {
    pub fn tag(&self) -> Semiring {
        match self {
            SemiringValue::Rational(_) => Semiring::QNonNeg,
            SemiringValue::Boolean(_) => Semiring::Bool,
            SemiringValue::Natural(_) => Semiring::Nat,
            SemiringValue::Integer(_) => Semiring::Int,
        }
    }

    pub fn zero(tag: Semiring) -> SemiringValue {
        match tag {
            Semiring::QNonNeg => SemiringValue::Rational(BigRational::zero()),
            Semiring::Bool => SemiringValue::Boolean(false),
            Semiring::Nat => SemiringValue::Natural(BigUint::zero()),
            Semiring::Int => SemiringValue::Integer(BigInt::zero()),
        }
    }

    pub fn one(tag: Semiring) -> SemiringValue {
        match tag {
            Semiring::QNonNeg => SemiringValue::Rational(BigRational::one()),
            Semiring::Bool => SemiringValue::Boolean(true),
            Semiring::Nat => SemiringValue::Natural(BigUint::one()),
            Semiring::Int => SemiringValue::Integer(BigInt::one()),
        }
    }

    /// Nonnegative rational `num/den`; fails on a zero denominator.
    pub fn rational(num: u64, den: u64) -> Result<SemiringValue> {
        if den == 0 {
            return Err(Error::InvalidValue("zero denominator".into()));
        }
        Ok(SemiringValue::Rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn from_ratio(r: BigRational) -> Result<SemiringValue> {
        if r < BigRational::zero() {
            return Err(Error::InvalidValue(format!("negative rational {r}")));
        }
        Ok(SemiringValue::Rational(r))
    }

    pub fn boolean(b: bool) -> SemiringValue {
        SemiringValue::Boolean(b)
    }

    pub fn natural(n: u64) -> SemiringValue {
        SemiringValue::Natural(BigUint::from(n))
    }

    pub fn integer(i: i64) -> SemiringValue {
        SemiringValue::Integer(BigInt::from(i))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SemiringValue::Rational(r) => r.is_zero(),
            SemiringValue::Boolean(b) => !b,
            SemiringValue::Natural(n) => n.is_zero(),
            SemiringValue::Integer(i) => i.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            SemiringValue::Rational(r) => r.is_one(),
            SemiringValue::Boolean(b) => *b,
            SemiringValue::Natural(n) => n.is_one(),
            SemiringValue::Integer(i) => i.is_one(),
        }
    }

    pub fn add(&self, other: &SemiringValue) -> Result<SemiringValue> {
        match (self, other) {
            (SemiringValue::Rational(a), SemiringValue::Rational(b)) => {
                Ok(SemiringValue::Rational(a + b))
            }
            (SemiringValue::Boolean(a), SemiringValue::Boolean(b)) => {
                Ok(SemiringValue::Boolean(*a || *b))
            }
            (SemiringValue::Natural(a), SemiringValue::Natural(b)) => {
                Ok(SemiringValue::Natural(a + b))
            }
            (SemiringValue::Integer(a), SemiringValue::Integer(b)) => {
                Ok(SemiringValue::Integer(a + b))
            }
            _ => Err(Error::InstanceMismatch(self.tag(), other.tag())),
        }
    }

    pub fn mul(&self, other: &SemiringValue) -> Result<SemiringValue> {
        match (self, other) {
            (SemiringValue::Rational(a), SemiringValue::Rational(b)) => {
                Ok(SemiringValue::Rational(a * b))
            }
            (SemiringValue::Boolean(a), SemiringValue::Boolean(b)) => {
                Ok(SemiringValue::Boolean(*a && *b))
            }
            (SemiringValue::Natural(a), SemiringValue::Natural(b)) => {
                Ok(SemiringValue::Natural(a * b))
            }
            (SemiringValue::Integer(a), SemiringValue::Integer(b)) => {
                Ok(SemiringValue::Integer(a * b))
            }
            _ => Err(Error::InstanceMismatch(self.tag(), other.tag())),
        }
    }

    /// Exact division, available only for the rational instance.
    pub fn div(&self, other: &SemiringValue) -> Result<SemiringValue> {
        match (self, other) {
            (SemiringValue::Rational(a), SemiringValue::Rational(b)) => {
                if b.is_zero() {
                    Err(Error::InvalidValue("division by zero".into()))
                } else {
                    Ok(SemiringValue::Rational(a / b))
                }
            }
            _ => Err(Error::Unsupported {
                instance: self.tag(),
                what: "division".into(),
            }),
        }
    }

    /// Parse a scalar in the shared text syntax: `p/q` or `p` for rationals,
    /// `0`/`1` for Booleans, `n` for naturals, optionally signed for `int`.
    pub fn parse(tag: Semiring, s: &str) -> Result<SemiringValue> {
        let bad = || Error::InvalidValue(format!("bad {tag} scalar `{s}`"));
        match tag {
            Semiring::QNonNeg => {
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (s, "1"),
                };
                let n: BigUint = num.parse().map_err(|_| bad())?;
                let d: BigUint = den.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(SemiringValue::Rational(BigRational::new(
                    BigInt::from(n),
                    BigInt::from(d),
                )))
            }
            Semiring::Bool => match s {
                "0" => Ok(SemiringValue::Boolean(false)),
                "1" => Ok(SemiringValue::Boolean(true)),
                _ => Err(bad()),
            },
            Semiring::Nat => {
                let n: BigUint = s.parse().map_err(|_| bad())?;
                Ok(SemiringValue::Natural(n))
            }
            Semiring::Int => {
                let i: BigInt = s.parse().map_err(|_| bad())?;
                Ok(SemiringValue::Integer(i))
            }
        }
    }
}

impl fmt::Display for SemiringValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemiringValue::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            SemiringValue::Boolean(b) => write!(f, "{}", if *b { "1" } else { "0" }),
            SemiringValue::Natural(n) => write!(f, "{n}"),
            SemiringValue::Integer(i) => write!(f, "{i}"),
        }
    }
}

pub fn sr_add(a: &SemiringValue, b: &SemiringValue) -> Result<SemiringValue> {
    a.add(b)
}

pub fn sr_mul(a: &SemiringValue, b: &SemiringValue) -> Result<SemiringValue> {
    a.mul(b)
}

/// Outcome of checking one semiring axiom over a sample grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomResult {
    pub name: &'static str,
    /// `None` means the axiom held on every sampled tuple.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub instance: Semiring,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.witness.is_none())
    }
}

/// Check the commutative-semiring laws plus entireness and zerosumfreeness on
/// every tuple drawn from `values`.
pub fn sr_axiom_check(tag: Semiring, values: &[SemiringValue]) -> Result<AxiomReport> {
    for v in values {
        if v.tag() != tag {
            return Err(Error::InstanceMismatch(tag, v.tag()));
        }
    }
    let zero = SemiringValue::zero(tag);
    let one = SemiringValue::one(tag);
    let mut results = Vec::new();

    let mut pairs_fail =
        |name: &'static str, f: &dyn Fn(&SemiringValue, &SemiringValue) -> bool| {
            let mut witness = None;
            'outer: for a in values {
                for b in values {
                    if !f(a, b) {
                        witness = Some(format!("({a}, {b})"));
                        break 'outer;
                    }
                }
            }
            results.push(AxiomResult { name, witness });
        };

    pairs_fail("add_commutative", &|a, b| {
        a.add(b).unwrap() == b.add(a).unwrap()
    });
    pairs_fail("mul_commutative", &|a, b| {
        a.mul(b).unwrap() == b.mul(a).unwrap()
    });
    pairs_fail("entire", &|a, b| {
        !a.mul(b).unwrap().is_zero() || a.is_zero() || b.is_zero()
    });
    pairs_fail("zerosumfree", &|a, b| {
        !a.add(b).unwrap().is_zero() || (a.is_zero() && b.is_zero())
    });

    let mut singles_fail = |name: &'static str, f: &dyn Fn(&SemiringValue) -> bool| {
        let witness = values.iter().find(|a| !f(a)).map(|a| format!("{a}"));
        results.push(AxiomResult { name, witness });
    };
    singles_fail("zero_additive_identity", &|a| a.add(&zero).unwrap() == *a);
    singles_fail("one_multiplicative_identity", &|a| {
        a.mul(&one).unwrap() == *a
    });
    singles_fail("zero_annihilates", &|a| a.mul(&zero).unwrap().is_zero());

    let mut triples_fail =
        |name: &'static str, f: &dyn Fn(&SemiringValue, &SemiringValue, &SemiringValue) -> bool| {
            let mut witness = None;
            'outer: for a in values {
                for b in values {
                    for c in values {
                        if !f(a, b, c) {
                            witness = Some(format!("({a}, {b}, {c})"));
                            break 'outer;
                        }
                    }
                }
            }
            results.push(AxiomResult { name, witness });
        };
    triples_fail("add_associative", &|a, b, c| {
        a.add(b).unwrap().add(c).unwrap() == a.add(&b.add(c).unwrap()).unwrap()
    });
    triples_fail("mul_associative", &|a, b, c| {
        a.mul(b).unwrap().mul(c).unwrap() == a.mul(&b.mul(c).unwrap()).unwrap()
    });
    triples_fail("distributive", &|a, b, c| {
        a.mul(&b.add(c).unwrap()).unwrap() == a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap()
    });

    Ok(AxiomReport {
        instance: tag,
        results,
    })
}
