//! Truncated arithmetic in finite extensions of the ℓ-adic rationals.
//!
//! A [`LocalField`] is a tower over `Q_ℓ` in which every level is either
//! unramified (a monic integral polynomial irreducible modulo the maximal
//! ideal) or Eisenstein. The product of the power bases of the levels is an
//! integral basis, and it is valuation-orthogonal: the valuation of
//! `Σ c_i b_i` is the minimum of the valuations of the terms. Everything below
//! relies on that.
//!
//! An element is `ℓ^shift · Σ c_i b_i` with integer coordinates known modulo
//! `ℓ^prec`. Products multiply coordinates and reduce by each level's minimal
//! polynomial; sums align shifts and keep the smaller absolute precision.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::residue::{prime_poly_is_irreducible, Residue, ResidueField};
use crate::error::{Error, Result};

/// Shift used for the exact zero element.
const ZERO_SHIFT: i64 = 1 << 40;

/// Shape of one level of the tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    Unramified,
    Eisenstein,
}

#[derive(Debug, Clone)]
struct Level {
    kind: LevelKind,
    degree: usize,
    /// Lower coefficients of the monic minimal polynomial, as absolute
    /// coordinate vectors in the field below.
    poly: Vec<Vec<BigInt>>,
}

/// An element `ℓ^shift · Σ coeffs[i] b_i`, coordinates known mod `ℓ^prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElement {
    shift: i64,
    prec: u32,
    coeffs: Vec<BigInt>,
}

impl LocalElement {
    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Relative precision in ℓ-adic digits of the coordinates.
    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_exact_zero(&self) -> bool {
        self.shift >= ZERO_SHIFT
    }
}

#[derive(Debug, Clone)]
pub struct LocalField {
    ell: u64,
    ell_big: BigInt,
    prec: u32,
    pow_table: Vec<BigInt>,
    levels: Vec<Level>,
    n: usize,
    e: u32,
    weights: Vec<u32>,
    unram: Vec<usize>,
    residue: ResidueField,
    /// `Π^j` for `0 <= j < e`.
    pi_pows: Vec<LocalElement>,
    /// The unit `Π^e / ℓ` and its inverse.
    eta: LocalElement,
    eta_inv: LocalElement,
}

impl LocalField {
    /// `Q_ℓ` with coordinates carried to `prec` ℓ-adic digits.
    pub fn rationals(ell: u64, prec: u32) -> Result<Self> {
        if !crate::fplin::is_prime(ell) {
            return Err(Error::UnsupportedConfiguration(format!("{ell} is not prime")));
        }
        if prec == 0 {
            return Err(Error::PreconditionViolated("precision must be positive".into()));
        }
        Self::build(ell, prec, Vec::new())
    }

    fn build(ell: u64, prec: u32, levels: Vec<Level>) -> Result<Self> {
        let mut field = Self::bare(ell, prec, levels);
        let e = field.e;
        field.residue = field.build_residue()?;
        let pi = field.uniformizer_raw();
        let mut pows = vec![field.one()];
        for j in 1..e as usize {
            let next = field.mul(&pows[j - 1], &pi);
            pows.push(next);
        }
        let pi_e = field.mul(&pows[e as usize - 1], &pi);
        if pi_e.shift != 1 || field.valuation_of_core(&pi_e)? != 0 {
            return Err(Error::BackendFailure(
                "uniformizer power does not have valuation e".into(),
            ));
        }
        let eta = LocalElement {
            shift: 0,
            ..pi_e
        };
        field.pi_pows = pows;
        field.eta_inv = field.unit_inv(&eta)?;
        field.eta = eta;
        Ok(field)
    }

    fn build_residue(&self) -> Result<ResidueField> {
        let mut residue = ResidueField::prime(self.ell);
        let mut prefix_levels: Vec<Level> = Vec::new();
        for level in &self.levels {
            if level.kind == LevelKind::Unramified {
                let below = Self::bare(self.ell, self.prec, prefix_levels.clone());
                let mut poly = Vec::new();
                for c in &level.poly {
                    let el = below.from_abs_coeffs(c.clone(), self.prec);
                    poly.push(below.residue_with(&residue, &el)?);
                }
                residue = residue.extend(poly);
            }
            prefix_levels.push(level.clone());
        }
        Ok(residue)
    }

    /// A field without residue tower or uniformizer data; `build` fills those
    /// in, and residues of lower-level coefficients are read through it.
    fn bare(ell: u64, prec: u32, levels: Vec<Level>) -> Self {
        let n: usize = levels.iter().map(|l| l.degree).product();
        let e: u32 = levels
            .iter()
            .filter(|l| l.kind == LevelKind::Eisenstein)
            .map(|l| l.degree as u32)
            .product();
        let mut weights = vec![0u32; n];
        let mut unram = Vec::new();
        for (idx, w) in weights.iter_mut().enumerate() {
            let mut rest = idx;
            let mut ram = 1u32;
            let mut zero = true;
            // weight of a flat index: Σ over Eisenstein levels of i_k · e / E_k
            for level in &levels {
                let i = (rest % level.degree) as u32;
                rest /= level.degree;
                if level.kind == LevelKind::Eisenstein {
                    ram *= level.degree as u32;
                    *w += i * (e / ram);
                    zero &= i == 0;
                }
            }
            if zero {
                unram.push(idx);
            }
        }
        let ell_big = BigInt::from(ell);
        let mut pow_table = vec![BigInt::one()];
        for i in 0..prec as usize {
            let next = &pow_table[i] * &ell_big;
            pow_table.push(next);
        }
        let empty = LocalElement {
            shift: 0,
            prec,
            coeffs: Vec::new(),
        };
        Self {
            ell,
            ell_big,
            prec,
            pow_table,
            levels,
            n,
            e,
            weights,
            unram,
            residue: ResidueField::prime(ell),
            pi_pows: Vec::new(),
            eta: empty.clone(),
            eta_inv: empty,
        }
    }

    /// Adjoins a root of `X^d + Σ poly[j] X^j` with integral `poly[j]` in
    /// this field. The result's precision is capped by the absolute
    /// precision of the coefficients.
    pub fn extend(&self, kind: LevelKind, poly: &[LocalElement]) -> Result<Self> {
        let d = poly.len();
        if d < 2 {
            return Err(Error::PreconditionViolated("extension degree below 2".into()));
        }
        let mut prec = self.prec;
        let mut coeff_vecs = Vec::with_capacity(d);
        for c in poly {
            if c.is_exact_zero() {
                coeff_vecs.push(vec![BigInt::zero(); self.n]);
                continue;
            }
            if c.shift < 0 {
                return Err(Error::BackendFailure("non-integral defining polynomial".into()));
            }
            let abs = c.shift + c.prec as i64;
            prec = prec.min(abs.min(self.prec as i64) as u32);
            coeff_vecs.push(self.abs_coeffs(c));
        }
        if prec < 2 {
            return Err(Error::PrecisionExhausted(self.prec));
        }
        match kind {
            LevelKind::Eisenstein => {
                if self.valuation(&poly[0])? != 1 {
                    return Err(Error::BackendFailure("constant term is not a uniformizer".into()));
                }
                for c in &poly[1..] {
                    if !c.is_exact_zero() && !self.valuation_at_least(c, 1) {
                        return Err(Error::BackendFailure("polynomial is not Eisenstein".into()));
                    }
                }
            }
            LevelKind::Unramified => {
                if self.residue.degree() != 1 || !crate::fplin::is_prime(d as u64) {
                    return Err(Error::UnsupportedConfiguration(
                        "unramified level needs a prime residue field and prime degree".into(),
                    ));
                }
                let mut g = Vec::with_capacity(d + 1);
                for c in poly {
                    g.push(if c.is_exact_zero() { 0 } else { self.residue(c)?[0] });
                }
                g.push(1);
                if !prime_poly_is_irreducible(&g, self.ell) {
                    return Err(Error::BackendFailure(
                        "polynomial is reducible modulo the maximal ideal".into(),
                    ));
                }
            }
        }
        let mut levels = self.levels.clone();
        let m = &self.pow_table[prec as usize];
        levels.push(Level {
            kind,
            degree: d,
            poly: coeff_vecs
                .into_iter()
                .map(|v| v.into_iter().map(|c| c.mod_floor(m)).collect())
                .collect(),
        });
        Self::build(self.ell, prec, levels)
    }

    // ---- accessors ----

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Working precision in ℓ-adic digits of the coordinates.
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Degree over `Q_ℓ`.
    pub fn degree(&self) -> usize {
        self.n
    }

    /// Absolute ramification index.
    pub fn ramification(&self) -> u32 {
        self.e
    }

    /// Absolute residue degree.
    pub fn residue_degree(&self) -> usize {
        self.residue.degree()
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.residue
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn top_level_kind(&self) -> Option<LevelKind> {
        self.levels.last().map(|l| l.kind)
    }

    /// Basis valuations of the flat coordinates.
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    // ---- constructors ----

    pub fn zero(&self) -> LocalElement {
        LocalElement {
            shift: ZERO_SHIFT,
            prec: self.prec,
            coeffs: vec![BigInt::zero(); self.n],
        }
    }

    pub fn one(&self) -> LocalElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> LocalElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> LocalElement {
        if n.is_zero() {
            return self.zero();
        }
        let mut m = n.clone();
        let mut k = 0i64;
        while (&m % &self.ell_big).is_zero() {
            m /= &self.ell_big;
            k += 1;
        }
        let mut coeffs = vec![BigInt::zero(); self.n];
        coeffs[0] = m;
        self.from_coeffs(k, coeffs, self.prec)
    }

    /// `num / den` for integers, `den` nonzero.
    pub fn from_ratio(&self, num: i64, den: i64) -> Result<LocalElement> {
        let d = self.inv(&self.from_int(den))?;
        Ok(self.mul(&self.from_int(num), &d))
    }

    /// An element from integer coordinates `ℓ^shift · Σ coeffs[i] b_i`.
    pub fn from_coeffs(&self, shift: i64, coeffs: Vec<BigInt>, prec: u32) -> LocalElement {
        assert_eq!(coeffs.len(), self.n);
        let prec = prec.min(self.prec);
        let m = &self.pow_table[prec as usize];
        let coeffs = coeffs.into_iter().map(|c| c.mod_floor(m)).collect();
        self.normalize(LocalElement {
            shift,
            prec,
            coeffs,
        })
    }

    fn from_abs_coeffs(&self, coeffs: Vec<BigInt>, prec: u32) -> LocalElement {
        self.from_coeffs(0, coeffs, prec)
    }

    /// Generator of level `k` of the tower.
    pub fn generator(&self, k: usize) -> LocalElement {
        let stride: usize = self.levels[..k].iter().map(|l| l.degree).product();
        let mut coeffs = vec![BigInt::zero(); self.n];
        coeffs[stride] = BigInt::one();
        self.from_abs_coeffs(coeffs, self.prec)
    }

    fn uniformizer_raw(&self) -> LocalElement {
        match self
            .levels
            .iter()
            .rposition(|l| l.kind == LevelKind::Eisenstein)
        {
            Some(k) => self.generator(k),
            None => self.from_bigint(&self.ell_big.clone()),
        }
    }

    /// The distinguished uniformizer `Π`.
    pub fn uniformizer(&self) -> LocalElement {
        self.uniformizer_raw()
    }

    /// The unit `ℓ / Π^e`.
    pub fn ell_over_pi_e(&self) -> LocalElement {
        self.eta_inv.clone()
    }

    // ---- embedding between levels ----

    /// Embeds an element of `sub`, whose levels are a prefix of ours.
    pub fn embed(&self, sub: &LocalField, x: &LocalElement) -> LocalElement {
        assert!(sub.n <= self.n && self.n.is_multiple_of(sub.n));
        if x.is_exact_zero() {
            return self.zero();
        }
        let mut coeffs = x.coeffs.clone();
        coeffs.resize(self.n, BigInt::zero());
        let prec = x.prec.min(self.prec);
        let m = &self.pow_table[prec as usize];
        LocalElement {
            shift: x.shift,
            prec,
            coeffs: coeffs.into_iter().map(|c| c.mod_floor(m)).collect(),
        }
    }

    /// Projects onto `sub`, failing if the higher coordinates are nonzero.
    pub fn project(&self, sub: &LocalField, x: &LocalElement) -> Result<LocalElement> {
        if x.is_exact_zero() {
            return Ok(sub.zero());
        }
        if x.coeffs[sub.n..].iter().any(|c| !c.is_zero()) {
            return Err(Error::BackendFailure("element does not lie in the subfield".into()));
        }
        Ok(sub.normalize(LocalElement {
            shift: x.shift,
            prec: x.prec.min(sub.prec),
            coeffs: x.coeffs[..sub.n].to_vec(),
        }))
    }

    // ---- ring operations ----

    fn vl(&self, c: &BigInt) -> u32 {
        let mut v = 0;
        let mut c = c.clone();
        while !c.is_zero() && (&c % &self.ell_big).is_zero() {
            c /= &self.ell_big;
            v += 1;
        }
        v
    }

    fn normalize(&self, mut x: LocalElement) -> LocalElement {
        if x.is_exact_zero() || x.prec == 0 {
            return x;
        }
        let k = x
            .coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| self.vl(c))
            .min();
        match k {
            None => x,
            Some(0) => x,
            Some(k) => {
                let k = k.min(x.prec);
                let d = &self.pow_table[k as usize];
                for c in x.coeffs.iter_mut() {
                    *c = &*c / d;
                }
                x.shift += k as i64;
                x.prec -= k;
                x
            }
        }
    }

    pub fn neg(&self, x: &LocalElement) -> LocalElement {
        if x.is_exact_zero() {
            return x.clone();
        }
        let m = &self.pow_table[x.prec as usize];
        LocalElement {
            shift: x.shift,
            prec: x.prec,
            coeffs: x.coeffs.iter().map(|c| (-c).mod_floor(m)).collect(),
        }
    }

    pub fn add(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        if x.is_exact_zero() {
            return y.clone();
        }
        if y.is_exact_zero() {
            return x.clone();
        }
        let s = x.shift.min(y.shift);
        let abs = (x.shift + x.prec as i64).min(y.shift + y.prec as i64);
        let rel = (abs - s).clamp(0, self.prec as i64) as u32;
        let m = &self.pow_table[rel as usize];
        let mut coeffs = vec![BigInt::zero(); self.n];
        for z in [x, y] {
            let diff = z.shift - s;
            if diff >= rel as i64 {
                continue;
            }
            let scale = &self.pow_table[diff as usize];
            for (acc, c) in coeffs.iter_mut().zip(&z.coeffs) {
                *acc += c * scale;
            }
        }
        for c in coeffs.iter_mut() {
            *c = c.mod_floor(m);
        }
        self.normalize(LocalElement {
            shift: s,
            prec: rel,
            coeffs,
        })
    }

    pub fn sub(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        if x.is_exact_zero() || y.is_exact_zero() {
            return self.zero();
        }
        let prec = x.prec.min(y.prec).min(self.prec);
        let m = &self.pow_table[prec as usize];
        let coeffs = self.mul_raw(self.levels.len(), &x.coeffs, &y.coeffs, m);
        self.normalize(LocalElement {
            shift: x.shift + y.shift,
            prec,
            coeffs,
        })
    }

    fn mul_raw(&self, depth: usize, x: &[BigInt], y: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        if depth == 0 {
            return vec![(&x[0] * &y[0]).mod_floor(m)];
        }
        let level = &self.levels[depth - 1];
        let d = level.degree;
        let sub = x.len() / d;
        let mut prod = vec![vec![BigInt::zero(); sub]; 2 * d - 1];
        for i in 0..d {
            let xi = &x[i * sub..(i + 1) * sub];
            if xi.iter().all(|c| c.is_zero()) {
                continue;
            }
            for j in 0..d {
                let yj = &y[j * sub..(j + 1) * sub];
                if yj.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let t = self.mul_raw(depth - 1, xi, yj, m);
                for (acc, v) in prod[i + j].iter_mut().zip(t) {
                    *acc += v;
                }
            }
        }
        for k in (d..2 * d - 1).rev() {
            let c: Vec<BigInt> = std::mem::take(&mut prod[k])
                .into_iter()
                .map(|v| v.mod_floor(m))
                .collect();
            if c.iter().all(|v| v.is_zero()) {
                continue;
            }
            for (j, pj) in level.poly.iter().enumerate() {
                let t = self.mul_raw(depth - 1, &c, pj, m);
                for (acc, v) in prod[k - d + j].iter_mut().zip(t) {
                    *acc -= v;
                }
            }
        }
        prod.truncate(d);
        prod.into_iter()
            .flatten()
            .map(|v| v.mod_floor(m))
            .collect()
    }

    pub fn square(&self, x: &LocalElement) -> LocalElement {
        self.mul(x, x)
    }

    /// `x^e` for a nonnegative exponent.
    pub fn pow_big(&self, x: &LocalElement, e: &BigUint) -> LocalElement {
        let mut result = self.one();
        let mut base = x.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = self.mul(&result, &base);
            }
            if i + 1 < bits {
                base = self.square(&base);
            }
        }
        result
    }

    /// `x^e`; negative exponents invert first.
    pub fn pow(&self, x: &LocalElement, e: i64) -> Result<LocalElement> {
        if e >= 0 {
            Ok(self.pow_big(x, &BigUint::from(e as u64)))
        } else {
            let inv = self.inv(x)?;
            Ok(self.pow_big(&inv, &BigUint::from(e.unsigned_abs())))
        }
    }

    // ---- valuation and residues ----

    /// Valuation of the coordinate part `Σ c_i b_i`, ignoring the shift.
    fn valuation_of_core(&self, x: &LocalElement) -> Result<i64> {
        let e = self.e as i64;
        let mut best: Option<i64> = None;
        for (c, &w) in x.coeffs.iter().zip(&self.weights) {
            if c.is_zero() {
                continue;
            }
            let v = e * self.vl(c) as i64 + w as i64;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        match best {
            Some(v) if v < e * x.prec as i64 => Ok(v),
            _ => Err(Error::PrecisionExhausted(self.prec)),
        }
    }

    /// Normalized valuation `v(Π) = 1`, certified at the element's precision.
    pub fn valuation(&self, x: &LocalElement) -> Result<i64> {
        if x.is_exact_zero() {
            return Err(Error::BackendFailure("valuation of zero".into()));
        }
        Ok(self.e as i64 * x.shift + self.valuation_of_core(x)?)
    }

    /// Absolute precision in powers of `Π`: `x` is known modulo `Π^A`.
    pub fn absolute_precision(&self, x: &LocalElement) -> i64 {
        if x.is_exact_zero() {
            return i64::MAX;
        }
        self.e as i64 * (x.shift + x.prec as i64)
    }

    /// Whether every known coordinate vanishes.
    pub fn is_zero_at_precision(&self, x: &LocalElement) -> bool {
        x.is_exact_zero() || x.coeffs.iter().all(|c| c.is_zero())
    }

    /// Whether `v(x) >= k` is certain (true also when `x` vanishes to at
    /// least that precision).
    pub fn valuation_at_least(&self, x: &LocalElement, k: i64) -> bool {
        if self.is_zero_at_precision(x) {
            return self.absolute_precision(x) >= k;
        }
        match self.valuation(x) {
            Ok(v) => v >= k,
            Err(_) => self.absolute_precision(x) >= k,
        }
    }

    /// Whether `x` and `y` agree at working precision.
    pub fn eq_at_precision(&self, x: &LocalElement, y: &LocalElement) -> bool {
        self.is_zero_at_precision(&self.sub(x, y))
    }

    fn residue_with(&self, residue: &ResidueField, x: &LocalElement) -> Result<Residue> {
        if x.is_exact_zero() || x.shift > 0 {
            return Ok(residue.zero());
        }
        if x.shift < 0 {
            return Err(Error::BackendFailure("residue of a non-integral element".into()));
        }
        if x.prec == 0 {
            return Err(Error::PrecisionExhausted(self.prec));
        }
        let ell = &self.ell_big;
        Ok(self
            .unram
            .iter()
            .map(|&i| x.coeffs[i].mod_floor(ell).to_u64().expect("small residue"))
            .collect())
    }

    /// Image of an integral element in the residue field.
    pub fn residue(&self, x: &LocalElement) -> Result<Residue> {
        self.residue_with(&self.residue, x)
    }

    /// The coordinate lift of a residue.
    pub fn lift(&self, r: &[u64]) -> LocalElement {
        let mut coeffs = vec![BigInt::zero(); self.n];
        for (&i, &c) in self.unram.iter().zip(r) {
            coeffs[i] = BigInt::from(c);
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return self.zero();
        }
        self.from_abs_coeffs(coeffs, self.prec)
    }

    /// Splits `x = Π^v · u` with `u` a unit.
    pub fn unit_part(&self, x: &LocalElement) -> Result<(i64, LocalElement)> {
        let v = self.valuation(x)?;
        let r = self.valuation_of_core(x)?;
        let core = LocalElement {
            shift: 0,
            ..x.clone()
        };
        let mut unit = if r == 0 {
            core
        } else {
            let raised = self.mul(&core, &self.pi_pows[(self.e as i64 - r) as usize]);
            if raised.shift != 1 {
                return Err(Error::PrecisionExhausted(self.prec));
            }
            let unit = LocalElement {
                shift: 0,
                ..raised
            };
            self.mul(&unit, &self.eta_inv)
        };
        // ℓ^s = Π^(e s) η^(-s)
        if x.shift != 0 && self.e > 1 {
            unit = self.mul(&unit, &self.eta_power(-x.shift));
        }
        Ok((v, unit))
    }

    /// `η^k` for the unit `η = Π^e / ℓ`.
    fn eta_power(&self, k: i64) -> LocalElement {
        if k >= 0 {
            self.pow_big(&self.eta, &BigUint::from(k as u64))
        } else {
            self.pow_big(&self.eta_inv, &BigUint::from(k.unsigned_abs()))
        }
    }

    /// `x · Π^k` for any integer `k`.
    pub fn mul_pi_pow(&self, x: &LocalElement, k: i64) -> LocalElement {
        let e = self.e as i64;
        let m = k.div_euclid(e);
        let r = k.rem_euclid(e) as usize;
        let mut out = self.mul(x, &self.pi_pows[r]);
        if self.e > 1 {
            out = self.mul(&out, &self.eta_power(m));
        }
        if !out.is_exact_zero() {
            out.shift += m;
        }
        out
    }

    /// `(v(x), residue of x / Π^v)`.
    pub fn leading_term(&self, x: &LocalElement) -> Result<(i64, Residue)> {
        let (v, u) = self.unit_part(x)?;
        Ok((v, self.residue(&u)?))
    }

    // ---- inversion ----

    fn unit_inv(&self, u: &LocalElement) -> Result<LocalElement> {
        let r = self.residue(u)?;
        let r_inv = self
            .residue
            .inv(&r)
            .ok_or(Error::PrecisionExhausted(self.prec))?;
        let mut x = self.lift(&r_inv);
        let two = self.from_int(2);
        // each step doubles the number of correct Π-adic digits
        let target = self.e as u64 * u.prec as u64;
        let mut known = 1u64;
        while known < target {
            let ux = self.mul(u, &x);
            x = self.mul(&x, &self.sub(&two, &ux));
            known = known.saturating_mul(2);
        }
        Ok(self.truncate(&x, u.prec))
    }

    pub fn inv(&self, x: &LocalElement) -> Result<LocalElement> {
        let (v, u) = self.unit_part(x)?;
        let ui = self.unit_inv(&u)?;
        Ok(self.mul_pi_pow(&ui, -v))
    }

    pub fn div(&self, x: &LocalElement, y: &LocalElement) -> Result<LocalElement> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    /// Teichmüller representative of a residue.
    pub fn teichmuller(&self, r: &[u64]) -> Result<LocalElement> {
        if self.residue.is_zero(r) {
            return Ok(self.zero());
        }
        let q = self.residue.order();
        let q_minus_1 = &q - BigUint::one();
        let qq = self.from_bigint(&BigInt::from_biguint(Sign::Plus, q.clone()));
        let mut x = self.lift(r);
        for _ in 0..64 {
            let xq1 = self.pow_big(&x, &q_minus_1);
            let fx = self.sub(&self.mul(&xq1, &x), &x);
            if self.is_zero_at_precision(&fx) {
                return Ok(x);
            }
            let dfx = self.sub(&self.mul(&qq, &xq1), &self.one());
            x = self.sub(&x, &self.div(&fx, &dfx)?);
        }
        Err(Error::PrecisionExhausted(self.prec))
    }

    /// Canonical text `val:<v>;digits:<d0,d1,...>`: the `Π`-adic digits of
    /// `x / Π^v` with coordinate lifts of residues, each residue encoded as
    /// `Σ c_j ℓ^j`. Every listed digit is certified.
    pub fn to_text(&self, x: &LocalElement) -> String {
        if self.is_zero_at_precision(x) {
            let a = self.absolute_precision(x);
            let a = if a == i64::MAX { "inf".to_string() } else { a.to_string() };
            return format!("val:{a};digits:");
        }
        let (v, u) = match self.unit_part(x) {
            Ok(pair) => pair,
            Err(_) => return "val:?;digits:".to_string(),
        };
        let count = (self.absolute_precision(x) - v).max(0);
        let mut digits = Vec::new();
        let mut partial = self.zero();
        for j in 0..count {
            let z = self.sub(&u, &partial);
            if self.is_zero_at_precision(&z) {
                digits.push("0".to_string());
                continue;
            }
            let d = match self.valuation(&z) {
                Ok(vz) if vz > j => self.residue.zero(),
                Ok(_) => match self.leading_term(&z) {
                    Ok((_, r)) => r,
                    Err(_) => break,
                },
                Err(_) => break,
            };
            digits.push(self.residue.encode(&d).to_string());
            if !self.residue.is_zero(&d) {
                let term = self.mul_pi_pow(&self.lift(&d), j);
                partial = self.add(&partial, &term);
            }
        }
        format!("val:{v};digits:{}", digits.join(","))
    }

    /// Absolute coordinate vector `ℓ^shift · coeffs`, requiring `shift >= 0`.
    fn abs_coeffs(&self, x: &LocalElement) -> Vec<BigInt> {
        let s = x.shift.max(0) as u32;
        let scale = self.ell_big.pow(s);
        x.coeffs.iter().map(|c| c * &scale).collect()
    }

    /// Absolute integer coordinates when `x` is integral and its known
    /// precision covers the shift.
    pub fn integral_coords(&self, x: &LocalElement) -> Option<Vec<BigInt>> {
        if x.is_exact_zero() {
            return Some(vec![BigInt::zero(); self.n]);
        }
        if x.shift < 0 {
            return None;
        }
        Some(self.abs_coeffs(x))
    }

    /// Drops relative precision to at most `prec` digits.
    pub fn truncate(&self, x: &LocalElement, prec: u32) -> LocalElement {
        if x.is_exact_zero() || x.prec <= prec {
            return x.clone();
        }
        let m = &self.pow_table[prec as usize];
        self.normalize(LocalElement {
            shift: x.shift,
            prec,
            coeffs: x.coeffs.iter().map(|c| c.mod_floor(m)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(ell: u64) -> LocalField {
        LocalField::rationals(ell, 30).unwrap()
    }

    #[test]
    fn rational_valuations() {
        let f = q(3);
        assert_eq!(f.valuation(&f.from_int(18)).unwrap(), 2);
        assert_eq!(f.valuation(&f.from_int(-5)).unwrap(), 0);
        let x = f.from_ratio(1, 9).unwrap();
        assert_eq!(f.valuation(&x).unwrap(), -2);
        let y = f.mul(&x, &f.from_int(9));
        assert!(f.eq_at_precision(&y, &f.one()));
    }

    #[test]
    fn inverse_and_teichmuller() {
        let f = q(7);
        let x = f.from_int(10);
        let y = f.inv(&x).unwrap();
        assert!(f.eq_at_precision(&f.mul(&x, &y), &f.one()));
        let t = f.teichmuller(&[2]).unwrap();
        assert!(f.eq_at_precision(&f.pow(&t, 3).unwrap(), &f.one()));
        assert_eq!(f.residue(&t).unwrap(), vec![2]);
    }

    #[test]
    fn eisenstein_quadratic() {
        // Q_3(π), π^2 = -3
        let f = q(3);
        let g = f.extend(LevelKind::Eisenstein, &[f.from_int(3), f.zero()]).unwrap();
        assert_eq!(g.ramification(), 2);
        let pi = g.uniformizer();
        assert_eq!(g.valuation(&pi).unwrap(), 1);
        assert_eq!(g.valuation(&g.from_int(3)).unwrap(), 2);
        let sq = g.square(&pi);
        assert!(g.eq_at_precision(&sq, &g.from_int(-3)));
        let inv = g.inv(&pi).unwrap();
        assert_eq!(g.valuation(&inv).unwrap(), -1);
        assert!(g.eq_at_precision(&g.mul(&inv, &pi), &g.one()));
        let x = g.add(&g.from_int(1), &g.mul(&pi, &g.from_int(5)));
        let xi = g.inv(&x).unwrap();
        assert!(g.eq_at_precision(&g.mul(&x, &xi), &g.one()));
    }

    #[test]
    fn unramified_cubic_over_ramified() {
        let f = q(3);
        let g = f.extend(LevelKind::Eisenstein, &[f.from_int(3), f.zero()]).unwrap();
        // X^3 - X - 1 is irreducible over F_3
        let k = g
            .extend(LevelKind::Unramified, &[g.from_int(-1), g.from_int(-1), g.zero()])
            .unwrap();
        assert_eq!(k.ramification(), 2);
        assert_eq!(k.residue_degree(), 3);
        let t = k.generator(1);
        let t3 = k.pow(&t, 3).unwrap();
        assert!(k.eq_at_precision(&t3, &k.add(&t, &k.one())));
        let u = k.add(&t, &k.uniformizer());
        let ui = k.inv(&u).unwrap();
        assert!(k.eq_at_precision(&k.mul(&u, &ui), &k.one()));
        let tm = k.teichmuller(&k.residue(&t).unwrap()).unwrap();
        assert!(k.eq_at_precision(&k.pow(&tm, 26).unwrap(), &k.one()));
    }

    #[test]
    fn rejects_reducible_level() {
        let f = q(5);
        // X^2 + 1 splits mod 5
        let err = f.extend(LevelKind::Unramified, &[f.from_int(1), f.zero()]);
        assert!(err.is_err());
        let err = f.extend(LevelKind::Eisenstein, &[f.from_int(25), f.zero()]);
        assert!(err.is_err());
    }

    #[test]
    fn precision_tracking() {
        let f = q(5);
        let x = f.add(&f.one(), &f.from_int(5i64.pow(10)));
        let d = f.sub(&x, &f.one());
        assert_eq!(f.valuation(&d).unwrap(), 10);
        assert_eq!(f.absolute_precision(&d), 30);
        let tiny = f.sub(&f.from_int(7), &f.from_int(7));
        assert!(f.is_zero_at_precision(&tiny));
        assert!(f.valuation(&tiny).is_err());
    }

    #[test]
    fn text_form() {
        let f = LocalField::rationals(3, 4).unwrap();
        assert_eq!(f.to_text(&f.from_int(5)), "val:0;digits:2,1,0,0");
        assert_eq!(f.to_text(&f.from_int(-3)), "val:1;digits:2,2,2,2");
        assert_eq!(f.to_text(&f.from_int(-3)).matches(',').count(), 3);
        let f = q(3);
        let g = f.extend(LevelKind::Eisenstein, &[f.from_int(3), f.zero()]).unwrap();
        let s = g.to_text(&g.uniformizer());
        assert!(s.starts_with("val:1;digits:1,0,0"));
    }
}
