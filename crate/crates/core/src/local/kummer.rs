//! Kummer towers `K = F(a^(1/p))` over the local base fields.
//!
//! `K` is built as one more level on top of `F`, generated by an element `θ`
//! with an Eisenstein or unramified minimal polynomial read off from `a`:
//!
//! * `v(a)` prime to `p`: `θ^p = a^s π^(-tp)` where `s v(a) - t p = 1`;
//! * `ℓ ≠ p`, `p | v(a)`: `θ^p = a π^(-v(a))`, a unit with non-`p`-th-power residue;
//! * `ℓ = p`, `p | v(a)`: write `a π^(-v(a)) = b^p (1 + w)` and adjoin a
//!   rescaled `z` with `(1 + z)^p = 1 + w`. If `v(w)` is the top filtration
//!   level the extension is unramified, otherwise totally ramified.
//!
//! In every case `σ(θ)` is given explicitly and `root_a` is recovered from `θ`,
//! so `σ(root_a) = ζ_p root_a` holds by construction and is re-checked.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::classes::PowerClasses;
use super::field::{LevelKind, LocalElement, LocalField};
use crate::error::{Error, Result};
use crate::fplin::FpVector;
use crate::tower::{FiniteClasses, KummerTower};

/// Default precision in uniformizer digits of `F`.
pub const DEFAULT_PRECISION: u32 = 40;
/// Largest precision reached by doubling.
pub const MAX_PRECISION: u32 = 640;
/// Smallest accepted precision.
pub const MIN_PRECISION: u32 = 8;

/// `F = Q_ℓ(ζ_p)` with its power-class data.
#[derive(Debug, Clone)]
pub struct LocalBase {
    p: u64,
    digits: u32,
    field: LocalField,
    zeta: LocalElement,
    classes: PowerClasses,
}

/// Smallest primitive root modulo a prime.
fn primitive_root(ell: u64) -> u64 {
    let n = ell - 1;
    let mut factors = Vec::new();
    let mut m = n;
    let mut q = 2;
    while q * q <= m {
        if m.is_multiple_of(q) {
            factors.push(q);
            while m.is_multiple_of(q) {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..ell)
        .find(|&g| factors.iter().all(|&f| crate::fplin::pow_mod(g, n / f, ell) != 1))
        .unwrap_or(1)
}

/// Builds `F` for a supported `(ℓ, p)` at `digits` uniformizer digits.
pub fn make_base(ell: u64, p: u64, digits: u32) -> Result<LocalBase> {
    if !crate::fplin::is_prime(ell) || !crate::fplin::is_prime(p) {
        return Err(Error::UnsupportedConfiguration(format!("ℓ = {ell} and p = {p} must be prime")));
    }
    if digits < MIN_PRECISION {
        return Err(Error::PreconditionViolated(format!(
            "precision {digits} is below the minimum {MIN_PRECISION}"
        )));
    }
    let (field, zeta) = if ell != p && (ell - 1).is_multiple_of(p) {
        let field = LocalField::rationals(ell, digits)?;
        let g = primitive_root(ell);
        let r = crate::fplin::pow_mod(g, (ell - 1) / p, ell);
        let zeta = field.teichmuller(&[r])?;
        (field, zeta)
    } else if ell == 2 && p == 2 {
        let field = LocalField::rationals(2, digits)?;
        let zeta = field.from_int(-1);
        (field, zeta)
    } else if ell == 3 && p == 3 {
        let q3 = LocalField::rationals(3, digits.div_ceil(2))?;
        let field = q3.extend(LevelKind::Eisenstein, &[q3.from_int(3), q3.zero()])?;
        // π^2 = -3, so (-1 + π)/2 is a root of x^2 + x + 1
        let half = field.from_ratio(1, 2)?;
        let zeta = field.mul(&field.add(&field.from_int(-1), &field.uniformizer()), &half);
        (field, zeta)
    } else {
        return Err(Error::UnsupportedConfiguration(format!(
            "(ℓ, p) = ({ell}, {p}): need p | ℓ - 1 or ℓ = p ∈ {{2, 3}}"
        )));
    };
    let one = field.one();
    if !field.eq_at_precision(&field.pow(&zeta, p as i64)?, &one) || field.eq_at_precision(&zeta, &one) {
        return Err(Error::BackendFailure("ζ_p is not a primitive p-th root of unity".into()));
    }
    let classes = PowerClasses::new(&field, p)?;
    Ok(LocalBase {
        p,
        digits,
        field,
        zeta,
        classes,
    })
}

impl LocalBase {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ell(&self) -> u64 {
        self.field.ell()
    }

    /// Requested precision in uniformizer digits.
    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn zeta(&self) -> &LocalElement {
        &self.zeta
    }

    pub fn classes(&self) -> &PowerClasses {
        &self.classes
    }

    /// Values of the expression symbols: `pi` is the uniformizer, `zeta` is
    /// `ζ_p`, and `u` is the unit whose `p`-th root generates the unramified
    /// extension (the Teichmüller non-residue when `ℓ ≠ p`, the top-level
    /// class generator when `ℓ = p`).
    pub fn symbol(&self, name: &str) -> Option<LocalElement> {
        match name {
            "pi" => Some(self.field.uniformizer()),
            "zeta" => Some(self.zeta.clone()),
            "u" => self.classes.generators().last().cloned(),
            _ => None,
        }
    }
}

/// How `K` was presented over `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionShape {
    /// `θ^p = c` with `v(c) = 1`.
    RamifiedRadical,
    /// `θ^p = c` with `c` a unit, `ℓ ≠ p`.
    UnramifiedRadical,
    /// `ℓ = p`, the unit part of `a` sits at the top filtration level.
    UnramifiedTop,
    /// `ℓ = p`, the unit part of `a` sits at a level prime to `p`.
    RamifiedLevel { level: i64 },
}

/// A local Kummer tower with its power-class data.
#[derive(Debug, Clone)]
pub struct LocalTower {
    p: u64,
    base: LocalField,
    ext: LocalField,
    zeta: LocalElement,
    a: LocalElement,
    root_a: LocalElement,
    theta: LocalElement,
    /// `σ(θ)^j` for `0 <= j < p`.
    sigma_theta_pows: Vec<LocalElement>,
    base_classes: PowerClasses,
    ext_classes: PowerClasses,
    shape: ExtensionShape,
}

fn binomial(n: u64, k: u64) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `s ∈ [1, p)` and `t` with `s·k - t·p = 1`.
fn bezout_step(k: i64, p: u64) -> (i64, i64) {
    let p = p as i64;
    let s = (1..p).find(|s| (s * k - 1).rem_euclid(p) == 0).expect("k prime to p");
    (s, (s * k - 1).div_euclid(p))
}

/// Builds `K = F(a^(1/p))`.
pub fn make_k(base: &LocalBase, a: &LocalElement) -> Result<LocalTower> {
    let p = base.p;
    let f = &base.field;
    let pc = &base.classes;
    if f.is_zero_at_precision(a) {
        return Err(Error::PreconditionViolated("a must be nonzero".into()));
    }
    if pc.is_pth_power(f, a)? {
        return Err(Error::APthPower);
    }
    let pi = f.uniformizer();
    let zeta = &base.zeta;
    let pp = p as i64;
    let k = f.valuation(a)?;

    let monic_root = |poly: Vec<LocalElement>, kind| -> Result<(LocalField, LocalElement)> {
        let ext = f.extend(kind, &poly)?;
        let theta = ext.generator(ext.level_count() - 1);
        Ok((ext, theta))
    };
    let up = |ext: &LocalField, x: &LocalElement| ext.embed(f, x);

    let (ext, theta, sigma_theta, root_a, shape);
    if k.rem_euclid(pp) != 0 {
        let (s, t) = bezout_step(k, p);
        let c = f.mul_pi_pow(&f.pow(a, s)?, -t * pp);
        let mut poly = vec![f.neg(&c)];
        poly.resize(p as usize, f.zero());
        (ext, theta) = monic_root(poly, LevelKind::Eisenstein)?;
        sigma_theta = ext.mul(&up(&ext, &f.pow(zeta, s)?), &theta);
        let s_inv = (1..pp).find(|x| (x * s) % pp == 1).expect("s invertible");
        let m = (s * s_inv - 1) / pp;
        let scale = f.mul(&f.pow(&pi, t * s_inv)?, &f.pow(a, -m)?);
        root_a = ext.mul(&ext.pow(&theta, s_inv)?, &up(&ext, &scale));
        shape = ExtensionShape::RamifiedRadical;
    } else if f.ell() != p {
        let unit = f.mul_pi_pow(a, -k);
        let mut poly = vec![f.neg(&unit)];
        poly.resize(p as usize, f.zero());
        (ext, theta) = monic_root(poly, LevelKind::Unramified)?;
        sigma_theta = ext.mul(&up(&ext, zeta), &theta);
        root_a = ext.mul(&up(&ext, &f.pow(&pi, k / pp)?), &theta);
        shape = ExtensionShape::UnramifiedRadical;
    } else {
        let unit = f.mul_pi_pow(a, -k);
        let (b, rest, level) = pc.normal_form(f, &unit)?;
        let level = level.ok_or(Error::APthPower)?;
        let w = f.sub(&rest, &f.one());
        let (top, _) = pc.wild_levels().expect("wild classes");
        let outer = f.mul(&f.pow(&pi, k / pp)?, &b);
        let zeta_m1 = f.sub(zeta, &f.one());
        if level == top {
            let rho_exp = f.ramification() as i64 / (pp - 1);
            let rho = f.pow(&pi, rho_exp)?;
            let mut poly = vec![f.neg(&f.mul(&w, &f.pow(&rho, -pp)?))];
            for i in 1..p {
                let c = f.mul(&f.from_int(binomial(p, i)), &f.pow(&rho, i as i64 - pp)?);
                poly.push(c);
            }
            (ext, theta) = monic_root(poly, LevelKind::Unramified)?;
            let shift = up(&ext, &f.div(&zeta_m1, &rho)?);
            sigma_theta = ext.add(&ext.mul(&up(&ext, zeta), &theta), &shift);
            let z = ext.mul(&up(&ext, &rho), &theta);
            root_a = ext.mul(&up(&ext, &outer), &ext.add(&z, &ext.one()));
            shape = ExtensionShape::UnramifiedTop;
        } else {
            let (s, t) = bezout_step(level, p);
            let pi_t = f.pow(&pi, t)?;
            let z;
            match s {
                1 => {
                    let mut poly = vec![f.neg(&f.mul(&w, &f.pow(&pi, -t * pp)?))];
                    for i in 1..p {
                        let c = f.mul(&f.from_int(binomial(p, i)), &f.pow(&pi, t * (i as i64 - pp))?);
                        poly.push(c);
                    }
                    (ext, theta) = monic_root(poly, LevelKind::Eisenstein)?;
                    let shift = up(&ext, &f.div(&zeta_m1, &pi_t)?);
                    sigma_theta = ext.add(&ext.mul(&up(&ext, zeta), &theta), &shift);
                    z = ext.mul(&up(&ext, &pi_t), &theta);
                }
                2 if p == 3 => {
                    // z^3 + 3z^2 + 3z - w = 0; X = z^2 satisfies the Graeffe
                    // square X^3 - 3X^2 + (9 + 6w)X - w^2 = 0, and θ = X / π^t.
                    let c0 = f.neg(&f.mul(&f.mul(&w, &w), &f.pow(&pi, -3 * t)?));
                    let c1 = f.mul(
                        &f.add(&f.from_int(9), &f.mul(&f.from_int(6), &w)),
                        &f.pow(&pi, -2 * t)?,
                    );
                    let c2 = f.mul(&f.from_int(-3), &f.pow(&pi, -t)?);
                    (ext, theta) = monic_root(vec![c0, c1, c2], LevelKind::Eisenstein)?;
                    let x = ext.mul(&up(&ext, &pi_t), &theta);
                    let num = ext.sub(&ext.mul(&ext.from_int(3), &x), &up(&ext, &w));
                    let den = ext.add(&x, &ext.from_int(3));
                    z = ext.neg(&ext.div(&num, &den)?);
                    let sz = ext.add(&ext.mul(&up(&ext, zeta), &z), &up(&ext, &zeta_m1));
                    sigma_theta = ext.mul(&ext.square(&sz), &up(&ext, &f.inv(&pi_t)?));
                }
                _ => {
                    return Err(Error::UnsupportedConfiguration(format!(
                        "filtration level {level} needs a root of index {s}"
                    )))
                }
            }
            root_a = ext.mul(&up(&ext, &outer), &ext.add(&z, &ext.one()));
            shape = ExtensionShape::RamifiedLevel { level };
        }
    }

    let mut sigma_theta_pows = vec![ext.one()];
    for j in 1..p as usize {
        let next = ext.mul(&sigma_theta_pows[j - 1], &sigma_theta);
        sigma_theta_pows.push(next);
    }
    let ext_classes = PowerClasses::new(&ext, p)?;
    let tower = LocalTower {
        p,
        base: f.clone(),
        ext,
        zeta: zeta.clone(),
        a: a.clone(),
        root_a,
        theta,
        sigma_theta_pows,
        base_classes: pc.clone(),
        ext_classes,
        shape,
    };
    tower.check_construction()?;
    Ok(tower)
}

impl LocalTower {
    pub fn base(&self) -> &LocalField {
        &self.base
    }

    pub fn ext(&self) -> &LocalField {
        &self.ext
    }

    pub fn shape(&self) -> ExtensionShape {
        self.shape
    }

    pub fn theta(&self) -> &LocalElement {
        &self.theta
    }

    pub fn base_classes(&self) -> &PowerClasses {
        &self.base_classes
    }

    pub fn ext_classes(&self) -> &PowerClasses {
        &self.ext_classes
    }

    /// Replaces `σ(θ)` by `ζ_p σ(θ)`. Used only as a negative control: the
    /// result is no longer the generator normalized by `root_a`.
    pub fn inject_sigma_fault(&mut self) {
        let z = self.ext.embed(&self.base, &self.zeta);
        let st = self.ext.mul(&self.sigma_theta_pows[1], &z);
        let mut pows = vec![self.ext.one()];
        for j in 1..self.p as usize {
            pows.push(self.ext.mul(&pows[j - 1], &st));
        }
        self.sigma_theta_pows = pows;
    }

    /// Checks `root_a^p = a`, `σ^p(θ) = θ` and `σ(root_a) = ζ root_a`.
    pub fn check_construction(&self) -> Result<()> {
        let k = &self.ext;
        let a = k.embed(&self.base, &self.a);
        if !k.eq_at_precision(&k.pow(&self.root_a, self.p as i64)?, &a) {
            return Err(Error::BackendFailure("root_a^p differs from a".into()));
        }
        let theta_p = self.sigma_pow(&self.theta, self.p)?;
        if !k.eq_at_precision(&theta_p, &self.theta) {
            return Err(Error::BackendFailure("σ^p(θ) differs from θ".into()));
        }
        let expect = k.mul(&k.embed(&self.base, &self.zeta), &self.root_a);
        if !k.eq_at_precision(&self.sigma(&self.root_a)?, &expect) {
            return Err(Error::BackendFailure("σ(root_a) differs from ζ root_a".into()));
        }
        Ok(())
    }

    /// Coordinates of `x` along `1, θ, ..., θ^(p-1)`.
    pub fn split(&self, x: &LocalElement) -> Vec<LocalElement> {
        let p = self.p as usize;
        if x.is_exact_zero() {
            return vec![self.base.zero(); p];
        }
        let nf = self.base.degree();
        x.coeffs()
            .chunks(nf)
            .map(|block| self.base.from_coeffs(x.shift(), block.to_vec(), x.precision()))
            .collect()
    }

    fn random_in(field: &LocalField, rng: &mut ChaCha8Rng) -> LocalElement {
        let bound = (field.ell() as i64).pow(3);
        loop {
            let coeffs: Vec<BigInt> = (0..field.degree())
                .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
                .collect();
            if coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            let x = field.from_coeffs(0, coeffs, field.precision());
            let v = rng.gen_range(-2i64..=2);
            return field.mul_pi_pow(&x, v);
        }
    }
}

impl KummerTower for LocalTower {
    type F = LocalElement;
    type K = LocalElement;

    fn p(&self) -> u64 {
        self.p
    }

    fn f_one(&self) -> LocalElement {
        self.base.one()
    }

    fn f_mul(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        self.base.mul(x, y)
    }

    fn f_inv(&self, x: &LocalElement) -> Result<LocalElement> {
        self.base.inv(x)
    }

    fn f_eq(&self, x: &LocalElement, y: &LocalElement) -> bool {
        self.base.eq_at_precision(x, y)
    }

    fn is_pth_power_in_f(&self, x: &LocalElement) -> Result<bool> {
        self.base_classes.is_pth_power(&self.base, x)
    }

    fn pth_root_in_f(&self, x: &LocalElement) -> Result<Option<LocalElement>> {
        self.base_classes.pth_root(&self.base, x)
    }

    fn f_text(&self, x: &LocalElement) -> String {
        self.base.to_text(x)
    }

    fn k_one(&self) -> LocalElement {
        self.ext.one()
    }

    fn k_mul(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        self.ext.mul(x, y)
    }

    fn k_add(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        self.ext.add(x, y)
    }

    fn k_inv(&self, x: &LocalElement) -> Result<LocalElement> {
        self.ext.inv(x)
    }

    fn k_eq(&self, x: &LocalElement, y: &LocalElement) -> bool {
        self.ext.eq_at_precision(x, y)
    }

    fn k_is_zero(&self, x: &LocalElement) -> bool {
        self.ext.is_zero_at_precision(x)
    }

    fn k_text(&self, x: &LocalElement) -> String {
        self.ext.to_text(x)
    }

    fn embed(&self, x: &LocalElement) -> LocalElement {
        self.ext.embed(&self.base, x)
    }

    fn sigma(&self, x: &LocalElement) -> Result<LocalElement> {
        let mut out = self.ext.zero();
        for (c, t) in self.split(x).iter().zip(&self.sigma_theta_pows) {
            out = self.ext.add(&out, &self.ext.mul(&self.embed(c), t));
        }
        Ok(out)
    }

    fn norm(&self, x: &LocalElement) -> Result<LocalElement> {
        let mut out = x.clone();
        let mut conj = x.clone();
        for _ in 1..self.p {
            conj = self.sigma(&conj)?;
            out = self.ext.mul(&out, &conj);
        }
        self.ext.project(&self.base, &out)
    }

    fn trace(&self, x: &LocalElement) -> Result<LocalElement> {
        let mut out = x.clone();
        let mut conj = x.clone();
        for _ in 1..self.p {
            conj = self.sigma(&conj)?;
            out = self.ext.add(&out, &conj);
        }
        self.ext.project(&self.base, &out)
    }

    fn is_pth_power(&self, x: &LocalElement) -> Result<bool> {
        self.ext_classes.is_pth_power(&self.ext, x)
    }

    fn zeta(&self) -> LocalElement {
        self.zeta.clone()
    }

    fn a(&self) -> LocalElement {
        self.a.clone()
    }

    fn root_a(&self) -> LocalElement {
        self.root_a.clone()
    }

    fn k_basis_over_f(&self) -> Vec<LocalElement> {
        let mut out = vec![self.ext.one()];
        for j in 1..self.p as usize {
            out.push(self.ext.mul(&out[j - 1], &self.theta));
        }
        out
    }

    fn random_k(&self, rng: &mut ChaCha8Rng) -> LocalElement {
        Self::random_in(&self.ext, rng)
    }

    fn random_f(&self, rng: &mut ChaCha8Rng) -> LocalElement {
        Self::random_in(&self.base, rng)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn f_pow(&self, x: &LocalElement, e: i64) -> Result<LocalElement> {
        self.base.pow(x, e)
    }

    fn k_pow(&self, x: &LocalElement, e: i64) -> Result<LocalElement> {
        self.ext.pow(x, e)
    }
}

impl FiniteClasses for LocalTower {
    fn k_generators(&self) -> &[LocalElement] {
        self.ext_classes.generators()
    }

    fn k_dlog(&self, x: &LocalElement) -> Result<FpVector> {
        self.ext_classes.dlog(&self.ext, x)
    }

    fn f_generators(&self) -> &[LocalElement] {
        self.base_classes.generators()
    }

    fn f_dlog(&self, x: &LocalElement) -> Result<FpVector> {
        self.base_classes.dlog(&self.base, x)
    }
}
