//! Size bounds for quantifier compilation.
//!
//! `T(ℓ,m)` bounds the number of rank-`m` classes of two-pointed ordered
//! structures with `ℓ` set parameters. It is computed by counting Hintikka
//! formulas:
//!
//! ```text
//! atoms(p,q)    = t² + t² + Σ_R t^arity(R) + t·(ℓ+q)       with t = p + 2
//! t_0(p,q)      = 2^atoms(p,q)
//! t_{i+1}(p,q)  = t_0(p,q) · 2^t_i(p+1,q) · 2^t_i(p,q+1)
//! T(ℓ,m)        = t_m(0,0)
//! ```
//!
//! The terms are `p` individual parameters and the two constants; the atoms
//! are equalities, order atoms, relation atoms and memberships. A rank-`i+1`
//! type is fixed by its atomic diagram and the sets of rank-`i` types
//! realised by one more individual or one more set.
//!
//! Any larger value is still a correct bound, so numbers that cannot be
//! materialised are rounded up to powers of two (see [`BigBound`]).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::structures::Signature;

/// Largest bit length kept as an exact integer.
pub const EXACT_BITS: u64 = 4096;

/// A nonnegative integer, exact when it has at most [`EXACT_BITS`] bits and
/// otherwise an upper bound of the form `2^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BigBound {
    Exact(BigUint),
    /// `2^e`; only used when `e > EXACT_BITS`.
    Pow2(Box<BigBound>),
}

impl BigBound {
    pub fn from_u64(x: u64) -> BigBound {
        BigBound::Exact(BigUint::from(x))
    }

    fn normalize(x: BigUint) -> BigBound {
        if x.bits() > EXACT_BITS {
            let e = ceil_log2_exact(&x);
            BigBound::Pow2(Box::new(BigBound::from_u64(e)))
        } else {
            BigBound::Exact(x)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BigBound::Exact(_))
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            BigBound::Exact(x) => Some(x),
            BigBound::Pow2(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.exact().and_then(|x| u64::try_from(x).ok())
    }

    /// `2^e`.
    pub fn pow2(e: &BigBound) -> BigBound {
        match e.to_u64() {
            Some(k) if k <= EXACT_BITS => BigBound::Exact(BigUint::from(1u8) << k),
            _ => BigBound::Pow2(Box::new(e.clone())),
        }
    }

    /// `⌈log₂ x⌉` (0 for x ≤ 1).
    pub fn ceil_log2(&self) -> BigBound {
        match self {
            BigBound::Exact(x) => BigBound::from_u64(ceil_log2_exact(x)),
            BigBound::Pow2(e) => (**e).clone(),
        }
    }

    /// Base-2 logarithm as a float, infinite for towers.
    pub fn log2_f64(&self) -> f64 {
        match self {
            BigBound::Exact(x) => {
                if x.bits() == 0 {
                    f64::NEG_INFINITY
                } else if x.bits() <= 1000 {
                    big_to_f64(x).log2()
                } else {
                    let shift = x.bits() - 64;
                    big_to_f64(&(x >> shift)).log2() + shift as f64
                }
            }
            BigBound::Pow2(e) => match e.to_u64() {
                Some(k) => k as f64,
                None => f64::INFINITY,
            },
        }
    }

    pub fn add(&self, other: &BigBound) -> BigBound {
        match (self, other) {
            (BigBound::Exact(a), BigBound::Exact(b)) => BigBound::normalize(a + b),
            _ => {
                let top = if self >= other { self } else { other };
                BigBound::pow2(&top.ceil_log2().add(&BigBound::from_u64(1)))
            }
        }
    }

    pub fn mul(&self, other: &BigBound) -> BigBound {
        match (self, other) {
            (BigBound::Exact(a), BigBound::Exact(b)) => BigBound::normalize(a * b),
            _ if self.is_zero() || other.is_zero() => BigBound::from_u64(0),
            _ => BigBound::pow2(&self.ceil_log2().add(&other.ceil_log2())),
        }
    }

    /// `self^exp`.
    pub fn pow(&self, exp: &BigBound) -> BigBound {
        if let (BigBound::Exact(a), Some(k)) = (self, exp.to_u64()) {
            if a.bits().saturating_mul(k) <= 2 * EXACT_BITS {
                return BigBound::normalize(a.pow(k as u32));
            }
        }
        if self.is_zero() {
            return BigBound::from_u64(if exp.is_zero() { 1 } else { 0 });
        }
        BigBound::pow2(&self.ceil_log2().mul(exp))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BigBound::Exact(x) if x.bits() == 0)
    }
}

fn ceil_log2_exact(x: &BigUint) -> u64 {
    if x.bits() <= 1 {
        return 0;
    }
    let minus_one = x - BigUint::from(1u8);
    minus_one.bits()
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_u64_digits().iter().rev().fold(0.0, |acc, &d| acc * 18446744073709551616.0 + d as f64)
}

impl PartialOrd for BigBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (BigBound::Exact(a), BigBound::Exact(b)) => a.cmp(b),
            (BigBound::Exact(_), BigBound::Pow2(_)) => Ordering::Less,
            (BigBound::Pow2(_), BigBound::Exact(_)) => Ordering::Greater,
            (BigBound::Pow2(a), BigBound::Pow2(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for BigBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BigBound::Exact(x) => write!(f, "{x}"),
            BigBound::Pow2(e) => write!(f, "2^({e})"),
        }
    }
}

impl Serialize for BigBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<u64> for BigBound {
    fn from(x: u64) -> Self {
        BigBound::from_u64(x)
    }
}

/// Number of atomic formulas over `sig ∪ {⪯}` with `p` individual
/// parameters, two constants and `sets` set parameters.
pub fn atom_count(sig: &Signature, p: usize, sets: usize) -> BigUint {
    let t = BigUint::from(p as u64 + 2);
    let mut n = &t * &t * BigUint::from(2u8);
    for (_, arity) in sig.relations() {
        n += t.pow(arity as u32);
    }
    n + &t * BigUint::from(sets as u64)
}

/// `T(ℓ,m)` over the relations of `sig`.
pub fn hintikka_bound(sig: &Signature, l: usize, m: usize) -> BigBound {
    let mut memo = HashMap::new();
    types(sig, l, m, 0, 0, &mut memo)
}

fn types(
    sig: &Signature,
    l: usize,
    i: usize,
    p: usize,
    q: usize,
    memo: &mut HashMap<(usize, usize, usize), BigBound>,
) -> BigBound {
    if let Some(v) = memo.get(&(i, p, q)) {
        return v.clone();
    }
    let t0 = BigBound::pow2(&BigBound::normalize(atom_count(sig, p, l + q)));
    let v = if i == 0 {
        t0
    } else {
        let ind = types(sig, l, i - 1, p + 1, q, memo);
        let set = types(sig, l, i - 1, p, q + 1, memo);
        t0.mul(&BigBound::pow2(&ind)).mul(&BigBound::pow2(&set))
    };
    memo.insert((i, p, q), v.clone());
    v
}

/// The numbers parameterising one set quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundSet {
    pub l: usize,
    pub m: usize,
    /// Product of the ambient state counts.
    pub n: BigBound,
    /// `T(ℓ+1,m)`.
    #[serde(rename = "T")]
    pub t: BigBound,
    /// `n·T`; also the witness length for individual variables.
    pub s: BigBound,
    /// `2·n·T` states for a chain.
    pub chain: BigBound,
    /// `∏(|Q_i|+1)·T`.
    pub branch_length: BigBound,
    /// `(2·n·T)^(s+1)` states for a multichain.
    pub multichain: BigBound,
}

impl BoundSet {
    pub fn witness_length(&self) -> &BigBound {
        &self.s
    }
}

pub fn bound_set(sig: &Signature, state_counts: &[usize], l: usize, m: usize) -> BoundSet {
    bound_set_with_t(state_counts, l, m, hintikka_bound(sig, l + 1, m))
}

/// [`bound_set`] with `T(ℓ+1,m)` supplied by the caller.
pub fn bound_set_with_t(state_counts: &[usize], l: usize, m: usize, t: BigBound) -> BoundSet {
    let n = state_counts
        .iter()
        .fold(BigBound::from_u64(1), |acc, &c| acc.mul(&BigBound::from_u64(c as u64)));
    let plus_one = state_counts
        .iter()
        .fold(BigBound::from_u64(1), |acc, &c| acc.mul(&BigBound::from_u64(c as u64 + 1)));
    let s = n.mul(&t);
    let chain = BigBound::from_u64(2).mul(&s);
    let multichain = chain.pow(&s.add(&BigBound::from_u64(1)));
    BoundSet {
        l,
        m,
        branch_length: plus_one.mul(&t),
        n,
        t,
        s,
        chain,
        multichain,
    }
}
