//! Finite residue fields, built as towers of simple extensions of `F_ℓ`.
//!
//! An element is a flat coordinate vector over `F_ℓ` in the product basis of
//! the tower, matching the weight-zero positions of the local field above it.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::fplin::{inv_mod, pow_mod};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Level {
    degree: usize,
    /// Monic minimal polynomial `X^d + Σ poly[j] X^j`, coefficients in the
    /// field below.
    poly: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueField {
    ell: u64,
    levels: Vec<Level>,
    degree: usize,
}

pub type Residue = Vec<u64>;

impl ResidueField {
    pub fn prime(ell: u64) -> Self {
        Self {
            ell,
            levels: Vec::new(),
            degree: 1,
        }
    }

    /// Adjoins a root of the monic polynomial with lower coefficients `poly`.
    /// Irreducibility is the caller's responsibility.
    pub fn extend(&self, poly: Vec<Residue>) -> Self {
        assert!(poly.iter().all(|c| c.len() == self.degree));
        let mut levels = self.levels.clone();
        let d = poly.len();
        levels.push(Level { degree: d, poly });
        Self {
            ell: self.ell,
            levels,
            degree: self.degree * d,
        }
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Degree over `F_ℓ`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.ell).pow(self.degree as u32)
    }

    /// Order as a machine integer, when it fits.
    pub fn order_u64(&self) -> Option<u64> {
        self.order().to_u64()
    }

    pub fn zero(&self) -> Residue {
        vec![0; self.degree]
    }

    pub fn one(&self) -> Residue {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Residue {
        let mut r = self.zero();
        r[0] = n.rem_euclid(self.ell as i64) as u64;
        r
    }

    /// The `j`-th flat basis vector.
    pub fn basis(&self, j: usize) -> Residue {
        let mut r = self.zero();
        r[j] = 1;
        r
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        x.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Residue {
        x.iter().zip(y).map(|(a, b)| (a + b) % self.ell).collect()
    }

    pub fn neg(&self, x: &[u64]) -> Residue {
        x.iter().map(|a| (self.ell - a) % self.ell).collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Residue {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Residue {
        let c = c % self.ell;
        x.iter().map(|a| a * c % self.ell).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Residue {
        self.mul_depth(self.levels.len(), x, y)
    }

    fn mul_depth(&self, depth: usize, x: &[u64], y: &[u64]) -> Residue {
        if depth == 0 {
            return vec![x[0] * y[0] % self.ell];
        }
        let level = &self.levels[depth - 1];
        let d = level.degree;
        let sub = x.len() / d;
        let block = |v: &[u64], i: usize| v[i * sub..(i + 1) * sub].to_vec();
        let mut prod = vec![vec![0u64; sub]; 2 * d - 1];
        for i in 0..d {
            let xi = block(x, i);
            if xi.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..d {
                let t = self.mul_depth(depth - 1, &xi, &block(y, j));
                add_into(&mut prod[i + j], &t, self.ell);
            }
        }
        for k in (d..2 * d - 1).rev() {
            let c = std::mem::take(&mut prod[k]);
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            for (j, pj) in level.poly.iter().enumerate() {
                let t = self.mul_depth(depth - 1, &c, pj);
                let neg: Vec<u64> = t.iter().map(|v| (self.ell - v) % self.ell).collect();
                add_into(&mut prod[k - d + j], &neg, self.ell);
            }
        }
        prod.truncate(d);
        prod.concat()
    }

    pub fn pow(&self, x: &[u64], e: &BigUint) -> Residue {
        let mut result = self.one();
        let mut base = x.to_vec();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = self.mul(&result, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    pub fn pow_u64(&self, x: &[u64], e: u64) -> Residue {
        self.pow(x, &BigUint::from(e))
    }

    pub fn inv(&self, x: &[u64]) -> Option<Residue> {
        if self.is_zero(x) {
            return None;
        }
        if self.degree == 1 {
            return inv_mod(x[0], self.ell).map(|v| vec![v]);
        }
        let e = self.order() - BigUint::from(2u32);
        Some(self.pow(x, &e))
    }

    /// Whether `x` is a `p`-th power, `x` nonzero.
    pub fn is_pth_power(&self, x: &[u64], p: u64) -> bool {
        let q1 = self.order() - BigUint::one();
        if self.ell == p || (&q1 % p) != BigUint::zero() {
            return true;
        }
        self.pow(x, &(q1 / p)) == self.one()
    }

    /// A `p`-th root of `x`, if one exists.
    pub fn pth_root(&self, x: &[u64], p: u64) -> Option<Residue> {
        if self.is_zero(x) {
            return Some(self.zero());
        }
        let q = self.order();
        if self.ell == p {
            // Frobenius is bijective: x = (x^(q/p))^p.
            return Some(self.pow(x, &(q / p)));
        }
        let q1 = &q - BigUint::one();
        if (&q1 % p) != BigUint::zero() {
            let d = BigUint::from(p).modinv(&q1)?;
            return Some(self.pow(x, &d));
        }
        if !self.is_pth_power(x, p) {
            return None;
        }
        // q - 1 = p^s m with p prime to m
        let mut m = q1.clone();
        let mut ps = BigUint::one();
        while (&m % p) == BigUint::zero() {
            m /= p;
            ps *= p;
        }
        let d = if m.is_one() {
            BigUint::zero()
        } else {
            BigUint::from(p).modinv(&m)?
        };
        let r0 = self.pow(x, &d);
        // r0^p = x * t with t in the p-Sylow subgroup; find z there with z^p = t.
        let r0p = self.pow_u64(&r0, p);
        let t = self.mul(&r0p, &self.inv(x)?);
        let h = self.pow(&self.non_pth_power(p)?, &m);
        let ps = ps.to_u64()?;
        let mut z = self.one();
        for _ in 0..ps {
            if self.pow_u64(&z, p) == t {
                return Some(self.mul(&r0, &self.inv(&z)?));
            }
            z = self.mul(&z, &h);
        }
        None
    }

    /// The first element that is not a `p`-th power, scanning boxes
    /// `[0, b)^n` of growing side `b` (coordinate order inside each shell).
    /// Small shells already hold non-powers, so this stays fast for large `ℓ`.
    pub fn non_pth_power(&self, p: u64) -> Option<Residue> {
        (2..=self.ell).find_map(|b| {
            box_shell(self.degree, b)
                .filter(|x| x.iter().any(|&c| c != 0))
                .find(|x| !self.is_pth_power(x, p))
        })
    }

    /// All elements in lexicographic coordinate order (last coordinate fastest).
    pub fn elements(&self) -> impl Iterator<Item = Residue> + '_ {
        let n = self.degree;
        let ell = self.ell;
        let mut cur: Option<Residue> = Some(vec![0; n]);
        std::iter::from_fn(move || {
            let out = cur.clone()?;
            let mut next = out.clone();
            let mut i = n;
            loop {
                if i == 0 {
                    cur = None;
                    break;
                }
                i -= 1;
                next[i] += 1;
                if next[i] < ell {
                    cur = Some(next);
                    break;
                }
                next[i] = 0;
            }
            Some(out)
        })
    }

    /// Integer encoding `Σ c_j ℓ^j` used in digit strings.
    pub fn encode(&self, x: &[u64]) -> BigUint {
        let mut acc = BigUint::zero();
        for &c in x.iter().rev() {
            acc = acc * self.ell + c;
        }
        acc
    }

    /// The Frobenius-fixed test used for polynomial irreducibility lives in
    /// [`prime_poly_is_irreducible`]; this helper exposes `x^ℓ`.
    pub fn frobenius(&self, x: &[u64]) -> Residue {
        self.pow_u64(x, self.ell)
    }
}

/// Vectors in `[0, b)^n` with at least one coordinate equal to `b - 1`.
fn box_shell(n: usize, b: u64) -> impl Iterator<Item = Residue> {
    let mut cur = Some(vec![0u64; n]);
    std::iter::from_fn(move || loop {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = n;
        cur = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < b {
                break Some(next);
            }
            next[i] = 0;
        };
        if out.contains(&(b - 1)) {
            return Some(out);
        }
    })
}

fn add_into(acc: &mut [u64], t: &[u64], ell: u64) {
    for (a, b) in acc.iter_mut().zip(t) {
        *a = (*a + b) % ell;
    }
}

// ---- polynomials over F_ℓ (low degree first) ----

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_mulmod(a: &[u64], b: &[u64], g: &[u64], ell: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % ell;
        }
    }
    poly_rem(prod, g, ell)
}

fn poly_rem(mut f: Vec<u64>, g: &[u64], ell: u64) -> Vec<u64> {
    let g = trim(g.to_vec());
    let dg = g.len() - 1;
    let lead_inv = inv_mod(g[dg], ell).expect("nonzero leading coefficient");
    f = trim(f);
    while f.len() > dg {
        let df = f.len() - 1;
        let c = f[df] * lead_inv % ell;
        for j in 0..=dg {
            let idx = df - dg + j;
            f[idx] = (f[idx] + ell - c * g[j] % ell) % ell;
        }
        f = trim(f);
    }
    f
}

fn poly_gcd(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(a, &b, ell);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: BigUint, g: &[u64], ell: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_rem(base.to_vec(), g, ell);
    while !e.is_zero() {
        if e.bit(0) {
            result = poly_mulmod(&result, &b, g, ell);
        }
        b = poly_mulmod(&b, &b, g, ell);
        e >>= 1;
    }
    poly_rem(result, g, ell)
}

/// Rabin's test for a polynomial of prime degree `n` over `F_ℓ`:
/// irreducible iff `X^(ℓ^n) ≡ X` and `gcd(X^ℓ - X, g) = 1`.
pub fn prime_poly_is_irreducible(g: &[u64], ell: u64) -> bool {
    let g = trim(g.to_vec());
    if g.len() < 2 {
        return false;
    }
    let n = g.len() - 1;
    if n == 1 {
        return true;
    }
    assert!(crate::fplin::is_prime(n as u64), "degree must be prime");
    let x = vec![0u64, 1];
    let full = poly_powmod(&x, BigUint::from(ell).pow(n as u32), &g, ell);
    if trim(full) != x {
        return false;
    }
    let mut frob = poly_powmod(&x, BigUint::from(ell), &g, ell);
    frob.resize(frob.len().max(2), 0);
    frob[1] = (frob[1] + ell - 1) % ell;
    let h = poly_gcd(&g, &frob, ell);
    h.len() == 1
}

/// `x^e mod ℓ` for small exponents, exposed for callers working in `F_ℓ`.
pub fn pow_prime(x: u64, e: u64, ell: u64) -> u64 {
    pow_mod(x, e, ell)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> ResidueField {
        // F_9 = F_3[i]/(i^2 + 1)
        ResidueField::prime(3).extend(vec![vec![1], vec![0]])
    }

    #[test]
    fn non_power_search_is_fast_in_large_quadratic_fields() {
        // 5 is a non-square mod 1000003, so x^2 - 5 defines F_{ℓ^2}
        let ell = 1_000_003;
        assert_eq!(pow_prime(5, (ell - 1) / 2, ell), ell - 1);
        let f = ResidueField::prime(ell).extend(vec![vec![ell - 5], vec![0]]);
        let g = f.non_pth_power(2).unwrap();
        assert!(!f.is_pth_power(&g, 2));
        assert!(g.iter().all(|&c| c < 3));
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = ResidueField::prime(7);
        assert_eq!(f.mul(&[3], &[5]), vec![1]);
        assert_eq!(f.inv(&[3]), Some(vec![5]));
        assert!(!f.is_pth_power(&[2], 3));
        assert!(f.is_pth_power(&[6], 3));
        assert_eq!(f.non_pth_power(3), Some(vec![2]));
        let r = f.pth_root(&[6], 3).unwrap();
        assert_eq!(f.pow_u64(&r, 3), vec![6]);
    }

    #[test]
    fn quadratic_extension() {
        let f = f9();
        let i = f.basis(1);
        assert_eq!(f.mul(&i, &i), vec![2, 0]);
        assert_eq!(f.elements().count(), 9);
        for x in f.elements().skip(1) {
            let inv = f.inv(&x).unwrap();
            assert_eq!(f.mul(&x, &inv), f.one());
        }
        // squares in F_9^x: exactly 4 of the 8 units
        let squares = f.elements().skip(1).filter(|x| f.is_pth_power(x, 2)).count();
        assert_eq!(squares, 4);
        for x in f.elements().skip(1).filter(|x| f.is_pth_power(x, 2)) {
            let r = f.pth_root(&x, 2).unwrap();
            assert_eq!(f.mul(&r, &r), x);
        }
    }

    #[test]
    fn characteristic_roots() {
        let f = f9();
        for x in f.elements() {
            let r = f.pth_root(&x, 3).unwrap();
            assert_eq!(f.pow_u64(&r, 3), x);
        }
    }

    #[test]
    fn deep_sylow_roots() {
        // 31^5 - 1 is divisible by 25
        let g = vec![28u64, 0, 0, 0, 0];
        assert!(prime_poly_is_irreducible(&[28, 0, 0, 0, 0, 1], 31) == !ResidueField::prime(31).is_pth_power(&[3], 5));
        let f = ResidueField::prime(31).extend(g.into_iter().map(|c| vec![c]).collect());
        let x = f.pow_u64(&f.basis(1), 35);
        let r = f.pth_root(&x, 5).unwrap();
        assert_eq!(f.pow_u64(&r, 5), x);
    }

    #[test]
    fn rabin_test() {
        assert!(prime_poly_is_irreducible(&[1, 0, 1], 3)); // x^2 + 1
        assert!(!prime_poly_is_irreducible(&[1, 0, 1], 5)); // 2^2 = -1 mod 5
        assert!(prime_poly_is_irreducible(&[5, 0, 0, 1], 7)); // 2 is not a cube mod 7
        assert!(!prime_poly_is_irreducible(&[6, 0, 0, 1], 7)); // x^3 - 1
        assert!(prime_poly_is_irreducible(&[1, 1, 0, 1], 2)); // x^3 + x + 1
    }

    #[test]
    fn encoding() {
        let f = f9();
        assert_eq!(f.encode(&[2, 1]), BigUint::from(5u32));
    }
}
