//! Exact arithmetic in `K = Q(√a)` over `F = Q`, with `p = 2`.
//!
//! Here `J = K^×/K^×2` is infinite, so the module is never enumerated.
//! Instead the norm questions the structure theorems depend on are decided
//! exactly with quadratic Hilbert symbols, and witnesses are searched for
//! separately as evidence.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tower::KummerTower;

/// Trial division limit.
pub const FACTOR_LIMIT: u64 = 1_000_000;
/// Default bound on numerators and denominators in witness searches.
pub const DEFAULT_SEARCH_BOUND: i64 = 10_000;

/// `u + v√a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadElement {
    pub u: BigRational,
    pub v: BigRational,
    pub a: i64,
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.u, self.v, self.a)
    }
}

/// The integer `n` as a rational.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Place {
    Real,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Prime(q) => write!(f, "{q}"),
        }
    }
}

/// Prime factors of `|n|` by trial division.
pub fn prime_factors(n: &BigInt) -> Result<Vec<u64>> {
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut q = 2u64;
    while q <= FACTOR_LIMIT && BigInt::from(q) * BigInt::from(q) <= m {
        let bq = BigInt::from(q);
        if (&m % &bq).is_zero() {
            out.push(q);
            while (&m % &bq).is_zero() {
                m /= &bq;
            }
        }
        q += 1;
    }
    if m > BigInt::one() {
        match m.to_u64() {
            Some(r) if r <= FACTOR_LIMIT * FACTOR_LIMIT => out.push(r),
            _ => {
                return Err(Error::TooLarge(format!(
                    "{n} has a cofactor beyond trial division"
                )))
            }
        }
    }
    Ok(out)
}

/// Squarefree part of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: i64) -> Result<i64> {
    if n == 0 {
        return Err(Error::PreconditionViolated("0 has no squarefree part".into()));
    }
    let mut out = n.signum();
    for q in prime_factors(&BigInt::from(n))? {
        let mut m = n.abs();
        let mut e = 0;
        while m % q as i64 == 0 {
            m /= q as i64;
            e += 1;
        }
        if e % 2 == 1 {
            out *= q as i64;
        }
    }
    Ok(out)
}

fn is_square_int(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Nonnegative rational square root when one exists.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let n = is_square_int(x.numer())?;
    let d = is_square_int(x.denom())?;
    Some(BigRational::new(n, d))
}

/// `(x / q)` for an odd prime `q`.
fn legendre(x: &BigInt, q: u64) -> i32 {
    let bq = BigInt::from(q);
    let r = x.mod_floor(&bq);
    if r.is_zero() {
        return 0;
    }
    let e = BigInt::from((q - 1) / 2);
    if r.modpow(&e, &bq).is_one() {
        1
    } else {
        -1
    }
}

/// `ℓ`-adic valuation and unit part of a nonzero integer.
fn split_prime(n: &BigInt, q: u64) -> (u32, BigInt) {
    let bq = BigInt::from(q);
    let mut m = n.clone();
    let mut v = 0;
    while (&m % &bq).is_zero() {
        m /= &bq;
        v += 1;
    }
    (v, m)
}

/// An integer in the same square class as a nonzero rational.
fn square_class_integer(x: &BigRational) -> BigInt {
    x.numer() * x.denom()
}

/// The quadratic Hilbert symbol `(b, c)_v`.
pub fn hilbert_symbol(b: &BigRational, c: &BigRational, v: Place) -> Result<i32> {
    if b.is_zero() || c.is_zero() {
        return Err(Error::PreconditionViolated("Hilbert symbol of zero".into()));
    }
    let b = square_class_integer(b);
    let c = square_class_integer(c);
    match v {
        Place::Real => Ok(if b.is_negative() && c.is_negative() { -1 } else { 1 }),
        Place::Prime(q) if !crate::fplin::is_prime(q) => {
            Err(Error::InvalidPlace(format!("{q} is not prime")))
        }
        Place::Prime(2) => {
            let (alpha, u) = split_prime(&b, 2);
            let (beta, w) = split_prime(&c, 2);
            let eps = |x: &BigInt| ((x - 1i32) / 2i32).mod_floor(&BigInt::from(2)).to_u32().unwrap();
            let omega = |x: &BigInt| ((x * x - 1i32) / 8i32).mod_floor(&BigInt::from(2)).to_u32().unwrap();
            let e = eps(&u) * eps(&w) + alpha * omega(&w) + beta * omega(&u);
            Ok(if e % 2 == 0 { 1 } else { -1 })
        }
        Place::Prime(q) => {
            let (alpha, u) = split_prime(&b, q);
            let (beta, w) = split_prime(&c, q);
            let mut s = 1i32;
            if (alpha * beta) % 2 == 1 && ((q - 1) / 2) % 2 == 1 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= legendre(&u, q);
            }
            if alpha % 2 == 1 {
                s *= legendre(&w, q);
            }
            Ok(s)
        }
    }
}

/// The places where `(b, c)_v` can be `-1`: the real place, 2, and the odd
/// primes dividing the numerators or denominators.
pub fn relevant_places(b: &BigRational, c: &BigRational) -> Result<Vec<Place>> {
    let mut primes = vec![2u64];
    for n in [b.numer(), b.denom(), c.numer(), c.denom()] {
        primes.extend(prime_factors(n)?);
    }
    primes.sort_unstable();
    primes.dedup();
    let mut out = vec![Place::Real];
    out.extend(primes.into_iter().map(Place::Prime));
    Ok(out)
}

/// Product of `(b, c)_v` over all places; `+1` by reciprocity.
pub fn hilbert_product(b: &BigRational, c: &BigRational) -> Result<i32> {
    let mut prod = 1;
    for v in relevant_places(b, c)? {
        prod *= hilbert_symbol(b, c, v)?;
    }
    Ok(prod)
}

/// `(u, v)` with `u^2 - a v^2 = c`.
pub type NormWitness = (BigRational, BigRational);

/// Whether `c` is a norm from `Q(√a)`, decided by local symbols, with a
/// witness from a bounded search of `x^2 - a y^2 = c z^2` when it is.
pub fn is_norm(c: &BigRational, a: i64, bound: i64) -> Result<(bool, Option<NormWitness>)> {
    if c.is_zero() {
        return Err(Error::PreconditionViolated("0 is not in F^×".into()));
    }
    let ra = rat(a);
    let decided = relevant_places(c, &ra)?
        .into_iter()
        .map(|v| hilbert_symbol(c, &ra, v))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|s| s == 1);
    if !decided {
        return Ok((false, None));
    }
    Ok((true, norm_witness(c, a, bound)))
}

/// Whether `-1` is a norm from `Q(√a)`.
pub fn minus_one_is_norm(a: i64, bound: i64) -> Result<(bool, Option<NormWitness>)> {
    is_norm(&rat(-1), a, bound)
}

/// Searches `x^2 - a y^2 = c z^2` by increasing `max(y, z)`, which is at
/// most `min(bound, 300)`.
fn norm_witness(c: &BigRational, a: i64, bound: i64) -> Option<NormWitness> {
    // n/d is a norm iff n d is; scale the solution back by 1/d
    let d = c.denom();
    let target = c.numer() * d;
    let limit = bound.clamp(1, 300);
    for h in 1..=limit {
        for z in 1..=h {
            for y in 0..=h {
                if z.max(y) != h {
                    continue;
                }
                let rhs = &target * BigInt::from(z * z) + BigInt::from(a) * BigInt::from(y * y);
                if let Some(x) = is_square_int(&rhs) {
                    return Some(witness_from(&x, y, z, d));
                }
            }
        }
    }
    None
}

fn witness_from(x: &BigInt, y: i64, z: i64, d: &BigInt) -> NormWitness {
    // x^2 - a y^2 = n d z^2, so (x/(d z))^2 - a (y/(d z))^2 = n / d
    let den = d * BigInt::from(z);
    (
        BigRational::new(x.clone(), den.clone()),
        BigRational::new(BigInt::from(y), den),
    )
}

/// The tower `Q ⊂ Q(√a)`.
#[derive(Debug, Clone)]
pub struct QuadTower {
    a: i64,
    bound: i64,
}

impl QuadTower {
    /// `a` is normalized to its squarefree part; squares are rejected.
    pub fn new(a: i64) -> Result<Self> {
        let a = squarefree_part(a)?;
        if a == 1 {
            return Err(Error::APthPower);
        }
        Ok(Self {
            a,
            bound: DEFAULT_SEARCH_BOUND,
        })
    }

    pub fn with_search_bound(mut self, bound: i64) -> Self {
        self.bound = bound;
        self
    }

    pub fn a_value(&self) -> i64 {
        self.a
    }

    pub fn search_bound(&self) -> i64 {
        self.bound
    }

    pub fn element(&self, u: BigRational, v: BigRational) -> QuadElement {
        QuadElement { u, v, a: self.a }
    }

    pub fn from_ints(&self, u: i64, v: i64) -> QuadElement {
        self.element(rat(u), rat(v))
    }

    fn check(&self, x: &QuadElement) {
        assert_eq!(x.a, self.a, "element of Q(√{}) used in Q(√{})", x.a, self.a);
    }

    pub fn conjugate(&self, x: &QuadElement) -> QuadElement {
        self.check(x);
        self.element(x.u.clone(), -x.v.clone())
    }

    pub fn quad_norm(&self, x: &QuadElement) -> BigRational {
        self.check(x);
        &x.u * &x.u - rat(self.a) * &x.v * &x.v
    }

    /// Square test with a witness `(s, t)`, `x = (s + t√a)^2`.
    pub fn is_square(&self, x: &QuadElement) -> Option<QuadElement> {
        self.check(x);
        if x.v.is_zero() {
            if let Some(s) = rational_sqrt(&x.u) {
                return Some(self.element(s, rat(0)));
            }
            // u = a t^2
            let t2 = &x.u / rat(self.a);
            return rational_sqrt(&t2).map(|t| self.element(rat(0), t));
        }
        let n = rational_sqrt(&self.quad_norm(x))?;
        let two = rat(2);
        for cand in [(&x.u + &n) / &two, (&x.u - &n) / &two] {
            if let Some(s) = rational_sqrt(&cand) {
                if s.is_zero() {
                    continue;
                }
                let t = &x.v / (&two * &s);
                let w = self.element(s, t);
                if self.k_mul(&w, &w) == *x {
                    return Some(w);
                }
            }
        }
        None
    }
}

impl KummerTower for QuadTower {
    type F = BigRational;
    type K = QuadElement;

    fn p(&self) -> u64 {
        2
    }

    fn f_one(&self) -> BigRational {
        rat(1)
    }

    fn f_mul(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x * y
    }

    fn f_inv(&self, x: &BigRational) -> Result<BigRational> {
        if x.is_zero() {
            return Err(Error::PreconditionViolated("inverse of zero".into()));
        }
        Ok(x.recip())
    }

    fn f_eq(&self, x: &BigRational, y: &BigRational) -> bool {
        x == y
    }

    fn is_pth_power_in_f(&self, x: &BigRational) -> Result<bool> {
        Ok(rational_sqrt(x).is_some())
    }

    fn pth_root_in_f(&self, x: &BigRational) -> Result<Option<BigRational>> {
        Ok(rational_sqrt(x))
    }

    fn f_text(&self, x: &BigRational) -> String {
        x.to_string()
    }

    fn k_one(&self) -> QuadElement {
        self.from_ints(1, 0)
    }

    fn k_mul(&self, x: &QuadElement, y: &QuadElement) -> QuadElement {
        self.check(x);
        self.check(y);
        let a = rat(self.a);
        self.element(&x.u * &y.u + a * &x.v * &y.v, &x.u * &y.v + &x.v * &y.u)
    }

    fn k_add(&self, x: &QuadElement, y: &QuadElement) -> QuadElement {
        self.check(x);
        self.check(y);
        self.element(&x.u + &y.u, &x.v + &y.v)
    }

    fn k_inv(&self, x: &QuadElement) -> Result<QuadElement> {
        let n = self.quad_norm(x);
        if n.is_zero() {
            return Err(Error::PreconditionViolated("inverse of zero".into()));
        }
        Ok(self.element(&x.u / &n, -&x.v / &n))
    }

    fn k_eq(&self, x: &QuadElement, y: &QuadElement) -> bool {
        x == y
    }

    fn k_is_zero(&self, x: &QuadElement) -> bool {
        x.u.is_zero() && x.v.is_zero()
    }

    fn k_text(&self, x: &QuadElement) -> String {
        x.to_string()
    }

    fn embed(&self, x: &BigRational) -> QuadElement {
        self.element(x.clone(), rat(0))
    }

    fn sigma(&self, x: &QuadElement) -> Result<QuadElement> {
        Ok(self.conjugate(x))
    }

    fn norm(&self, x: &QuadElement) -> Result<BigRational> {
        Ok(self.quad_norm(x))
    }

    fn trace(&self, x: &QuadElement) -> Result<BigRational> {
        self.check(x);
        Ok(&x.u * rat(2))
    }

    fn is_pth_power(&self, x: &QuadElement) -> Result<bool> {
        if self.k_is_zero(x) {
            return Err(Error::PreconditionViolated("square test of zero".into()));
        }
        Ok(self.is_square(x).is_some())
    }

    fn zeta(&self) -> BigRational {
        rat(-1)
    }

    fn a(&self) -> BigRational {
        rat(self.a)
    }

    fn root_a(&self) -> QuadElement {
        self.from_ints(0, 1)
    }

    fn k_basis_over_f(&self) -> Vec<QuadElement> {
        vec![self.from_ints(1, 0), self.from_ints(0, 1)]
    }

    fn random_k(&self, rng: &mut ChaCha8Rng) -> QuadElement {
        loop {
            let r = |rng: &mut ChaCha8Rng| {
                BigRational::new(BigInt::from(rng.gen_range(-30i64..=30)), BigInt::from(rng.gen_range(1i64..=6)))
            };
            let x = self.element(r(rng), r(rng));
            if !self.k_is_zero(&x) {
                return x;
            }
        }
    }

    fn random_f(&self, rng: &mut ChaCha8Rng) -> BigRational {
        loop {
            let n = rng.gen_range(-30i64..=30);
            if n != 0 {
                return BigRational::new(BigInt::from(n), BigInt::from(rng.gen_range(1i64..=6)));
            }
        }
    }
}
