//! `p`-th power classes of a local field containing `ζ_p`.
//!
//! For residue characteristic `ℓ ≠ p` a unit is a `p`-th power exactly when
//! its residue is, so `X^×/X^×p` is spanned by the uniformizer and the
//! Teichmüller lift of one residue non-power.
//!
//! For `ℓ = p` the principal units are filtered by `U_d = 1 + Π^d O`. Let
//! `e` be the absolute ramification index and `top = p e / (p - 1)`. Leading
//! terms at levels `d < top` divisible by `p` are removed by `(1 + x Π^(d/p))^p`;
//! levels prime to `p` carry one class per residue basis vector; level `top`
//! carries one more class, the cokernel of `x ↦ x^p + ε x` with `ε = p / Π^e`;
//! everything deeper is a `p`-th power. Walking down the filtration gives both
//! a `p`-th power test and an exact discrete logarithm.

use num_bigint::BigUint;

use super::field::{LocalElement, LocalField};
use super::residue::Residue;
use crate::error::{Error, Result};
use crate::fplin::{FpMatrix, FpVector};

/// Data for the wild filtration (`ℓ = p`).
#[derive(Debug, Clone)]
struct Wild {
    top: i64,
    /// `Π^(e/(p-1))`, the step used at level `top`.
    rho_exp: i64,
    /// Residue of `ε = p / Π^e`.
    eps: Residue,
    /// Columns: `ψ(b_0), ..., ψ(b_(f-1)), ω*` for `ψ(x) = x^p + ε x`.
    top_system: FpMatrix,
    omega_star: Residue,
}

#[derive(Debug, Clone)]
enum Kind {
    Tame { nonresidue: Residue },
    Wild(Wild),
}

/// Canonical generators of `X^×/X^×p` with a discrete logarithm.
#[derive(Debug, Clone)]
pub struct PowerClasses {
    p: u64,
    generators: Vec<LocalElement>,
    labels: Vec<String>,
    kind: Kind,
}

/// Result of walking a unit down the wild filtration.
enum Walk {
    /// `u = b^p · (1 + w)` with `v(w) > top`.
    Power { b: LocalElement, rest: LocalElement },
    /// Stopped at a level carrying a nontrivial class.
    Blocked {
        b: LocalElement,
        rest: LocalElement,
        level: i64,
    },
}

impl PowerClasses {
    pub fn new(field: &LocalField, p: u64) -> Result<Self> {
        let res = field.residue_field();
        let pi = field.uniformizer();
        if field.ell() != p {
            let g = res.non_pth_power(p).ok_or_else(|| {
                Error::UnsupportedConfiguration("residue field has no p-th power non-residue".into())
            })?;
            let t = field.teichmuller(&g)?;
            return Ok(Self {
                p,
                generators: vec![pi, t],
                labels: vec!["pi".into(), format!("teich({})", res.encode(&g))],
                kind: Kind::Tame { nonresidue: g },
            });
        }
        let e = field.ramification() as i64;
        if e % (p as i64 - 1) != 0 {
            return Err(Error::UnsupportedConfiguration(
                "ramification index not divisible by p - 1".into(),
            ));
        }
        let top = p as i64 * e / (p as i64 - 1);
        let f = res.degree();
        let eps = field.residue(&field.ell_over_pi_e())?;
        let psi = |x: &Residue| res.add(&res.pow_u64(x, p), &res.mul(&eps, x));
        let psi_cols: Vec<FpVector> = (0..f).map(|j| FpVector::new(p, psi(&res.basis(j)))).collect();
        let image = FpMatrix::from_columns(p, f, &psi_cols)?;
        let omega_star = (0..f)
            .map(|j| res.basis(j))
            .find(|b| !crate::fplin::in_span(&image.image_basis(), &FpVector::new(p, b.clone())))
            .ok_or_else(|| Error::BackendFailure("x^p + εx is surjective on the residue field".into()))?;
        let mut cols = psi_cols;
        cols.push(FpVector::new(p, omega_star.clone()));
        let top_system = FpMatrix::from_columns(p, f, &cols)?;

        let mut generators = vec![pi];
        let mut labels = vec!["pi".to_string()];
        for d in 1..top {
            if d % p as i64 == 0 {
                continue;
            }
            for j in 0..f {
                let g = field.add(&field.one(), &field.mul_pi_pow(&field.lift(&res.basis(j)), d));
                generators.push(g);
                labels.push(format!("1+b{j}*pi^{d}"));
            }
        }
        generators.push(field.add(&field.one(), &field.mul_pi_pow(&field.lift(&omega_star), top)));
        labels.push(format!("1+w*pi^{top}"));
        Ok(Self {
            p,
            generators,
            labels,
            kind: Kind::Wild(Wild {
                top,
                rho_exp: e / (p as i64 - 1),
                eps,
                top_system,
                omega_star,
            }),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generators(&self) -> &[LocalElement] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Whether `x` is a `p`-th power in the field.
    pub fn is_pth_power(&self, field: &LocalField, x: &LocalElement) -> Result<bool> {
        let (v, u) = field.unit_part(x)?;
        if v.rem_euclid(self.p as i64) != 0 {
            return Ok(false);
        }
        match &self.kind {
            Kind::Tame { .. } => Ok(field.residue_field().is_pth_power(&field.residue(&u)?, self.p)),
            Kind::Wild(w) => Ok(matches!(self.walk(field, w, &u)?, Walk::Power { .. })),
        }
    }

    /// A `p`-th root of `x` when one exists.
    pub fn pth_root(&self, field: &LocalField, x: &LocalElement) -> Result<Option<LocalElement>> {
        let (v, u) = field.unit_part(x)?;
        let p = self.p as i64;
        if v.rem_euclid(p) != 0 {
            return Ok(None);
        }
        let unit_root = match &self.kind {
            Kind::Tame { .. } => {
                let res = field.residue_field();
                let r = match res.pth_root(&field.residue(&u)?, self.p) {
                    Some(r) => r,
                    None => return Ok(None),
                };
                newton_root(field, self.p, &u, field.lift(&r))?
            }
            Kind::Wild(w) => match self.walk(field, w, &u)? {
                Walk::Blocked { .. } => return Ok(None),
                Walk::Power { b, rest } => {
                    let tail = wild_tail_root(field, self.p, w, &rest)?;
                    field.mul(&b, &tail)
                }
            },
        };
        Ok(Some(field.mul_pi_pow(&unit_root, v / p)))
    }

    /// Coordinates of the class of `x` in the generator basis.
    pub fn dlog(&self, field: &LocalField, x: &LocalElement) -> Result<FpVector> {
        let p = self.p;
        let (v, u) = field.unit_part(x)?;
        let mut coords = vec![0u64; self.dim()];
        coords[0] = v.rem_euclid(p as i64) as u64;
        match &self.kind {
            Kind::Tame { nonresidue } => {
                let res = field.residue_field();
                let r = field.residue(&u)?;
                let g_inv = res.inv(nonresidue).expect("nonzero");
                let mut cur = r;
                for j in 0..p {
                    if res.is_pth_power(&cur, p) {
                        coords[1] = j;
                        return Ok(FpVector::new(p, coords));
                    }
                    cur = res.mul(&cur, &g_inv);
                }
                Err(Error::NotInSpan)
            }
            Kind::Wild(w) => {
                let unit_coords = self.walk_with_coords(field, w, &u)?;
                coords[1..].copy_from_slice(&unit_coords);
                Ok(FpVector::new(p, coords))
            }
        }
    }

    fn residue_root_lift(&self, field: &LocalField, c: &Residue) -> Result<LocalElement> {
        let r = field
            .residue_field()
            .pth_root(c, self.p)
            .ok_or_else(|| Error::BackendFailure("residue field is not perfect".into()))?;
        Ok(field.lift(&r))
    }

    /// Divides the unit `u` by `t^p` and records `t` in `b`.
    fn strip(
        &self,
        field: &LocalField,
        u: &LocalElement,
        b: &LocalElement,
        t: &LocalElement,
    ) -> Result<(LocalElement, LocalElement)> {
        let tp = field.pow_big(t, &BigUint::from(self.p));
        Ok((field.div(u, &tp)?, field.mul(b, t)))
    }

    /// Leading level and residue of `u - 1`, or `None` when `u - 1` vanishes
    /// beyond `top`.
    fn level(&self, field: &LocalField, w: &Wild, u: &LocalElement) -> Result<Option<(i64, Residue)>> {
        let diff = field.sub(u, &field.one());
        if field.is_zero_at_precision(&diff) {
            return if field.absolute_precision(&diff) > w.top {
                Ok(None)
            } else {
                Err(Error::PrecisionExhausted(field.precision()))
            };
        }
        let (d, c) = field.leading_term(&diff)?;
        if d > w.top {
            return Ok(None);
        }
        Ok(Some((d, c)))
    }

    /// Walks the unit `u` down the filtration, removing `p`-th powers, and
    /// stops at the first level carrying a class.
    fn walk(&self, field: &LocalField, w: &Wild, u: &LocalElement) -> Result<Walk> {
        let p = self.p as i64;
        let t = self.residue_root_lift(field, &field.residue(u)?)?;
        let (mut u, mut b) = self.strip(field, u, &field.one(), &t)?;
        loop {
            let Some((d, c)) = self.level(field, w, &u)? else {
                return Ok(Walk::Power { b, rest: u });
            };
            if d < w.top && d % p == 0 {
                let x = self.residue_root_lift(field, &c)?;
                let t = field.add(&field.one(), &field.mul_pi_pow(&x, d / p));
                (u, b) = self.strip(field, &u, &b, &t)?;
            } else if d < w.top {
                return Ok(Walk::Blocked { b, rest: u, level: d });
            } else {
                let sol = w
                    .top_system
                    .solve(&FpVector::new(self.p, c))?
                    .ok_or_else(|| Error::BackendFailure("level-top system inconsistent".into()))?;
                let n = sol.coords()[sol.len() - 1];
                if n != 0 {
                    return Ok(Walk::Blocked { b, rest: u, level: d });
                }
                let x: Residue = sol.coords()[..sol.len() - 1].to_vec();
                let t = field.add(&field.one(), &field.mul_pi_pow(&field.lift(&x), w.rho_exp));
                (u, b) = self.strip(field, &u, &b, &t)?;
            }
        }
    }

    fn walk_with_coords(&self, field: &LocalField, w: &Wild, u: &LocalElement) -> Result<Vec<u64>> {
        let p = self.p;
        let f = field.residue_field().degree();
        let mut coords = vec![0u64; self.dim() - 1];
        let slot = |d: i64| -> usize {
            // position of level d among levels prime to p below top
            let below = (d - 1) - (d - 1) / p as i64;
            below as usize * f
        };
        let mut cur = u.clone();
        // every pass fixes one level, so the walk ends within top + 1 passes
        for _ in 0..=w.top + 1 {
            match self.walk(field, w, &cur)? {
                Walk::Power { .. } => return Ok(coords),
                Walk::Blocked { rest, level, .. } => {
                    let diff = field.sub(&rest, &field.one());
                    let (_, c) = field.leading_term(&diff)?;
                    let mut next = rest;
                    if level < w.top {
                        for (j, &n) in c.iter().enumerate() {
                            if n == 0 {
                                continue;
                            }
                            coords[slot(level) + j] = n;
                            let g = &self.generators[1 + slot(level) + j];
                            let gn = field.pow_big(g, &BigUint::from(n));
                            next = field.div(&next, &gn)?;
                        }
                    } else {
                        let sol = w
                            .top_system
                            .solve(&FpVector::new(p, c))?
                            .ok_or_else(|| Error::BackendFailure("level-top system inconsistent".into()))?;
                        let n = sol.coords()[sol.len() - 1];
                        let last = coords.len() - 1;
                        coords[last] = n;
                        let g = &self.generators[self.dim() - 1];
                        next = field.div(&next, &field.pow_big(g, &BigUint::from(n)))?;
                    }
                    cur = next;
                }
            }
        }
        Err(Error::BackendFailure("filtration walk did not terminate".into()))
    }

    /// The residue `ω*` spanning the cokernel at level `top` (wild case).
    pub fn top_class_residue(&self) -> Option<&Residue> {
        match &self.kind {
            Kind::Wild(w) => Some(&w.omega_star),
            Kind::Tame { .. } => None,
        }
    }

    /// `(top, residue of ε)` in the wild case.
    pub fn wild_levels(&self) -> Option<(i64, &Residue)> {
        match &self.kind {
            Kind::Wild(w) => Some((w.top, &w.eps)),
            Kind::Tame { .. } => None,
        }
    }

    /// Writes a unit as `b^p · u` where `u - 1` is either beyond `top`
    /// (returned level `None`) or has a leading level carrying a class.
    pub fn normal_form(
        &self,
        field: &LocalField,
        unit: &LocalElement,
    ) -> Result<(LocalElement, LocalElement, Option<i64>)> {
        match &self.kind {
            Kind::Tame { .. } => Err(Error::PreconditionViolated(
                "filtration normal form needs residue characteristic p".into(),
            )),
            Kind::Wild(w) => match self.walk(field, w, unit)? {
                Walk::Power { b, rest } => Ok((b, rest, None)),
                Walk::Blocked { b, rest, level } => Ok((b, rest, Some(level))),
            },
        }
    }
}

/// Newton iteration for `X^p = u` from a residue-correct start, `p` a unit.
fn newton_root(field: &LocalField, p: u64, u: &LocalElement, mut x: LocalElement) -> Result<LocalElement> {
    let pp = field.from_int(p as i64);
    for _ in 0..64 {
        let xp1 = field.pow_big(&x, &BigUint::from(p - 1));
        let fx = field.sub(&field.mul(&xp1, &x), u);
        if field.is_zero_at_precision(&fx) {
            return Ok(x);
        }
        let dfx = field.mul(&pp, &xp1);
        x = field.sub(&x, &field.div(&fx, &dfx)?);
    }
    Err(Error::PrecisionExhausted(field.precision()))
}

/// `p`-th root of a unit `u ≡ 1` beyond level `top` (wild case).
fn wild_tail_root(field: &LocalField, p: u64, w: &Wild, u: &LocalElement) -> Result<LocalElement> {
    let e = w.top * (p as i64 - 1) / p as i64;
    let res = field.residue_field();
    let eps_inv = res.inv(&w.eps).expect("ε is a unit");
    // the root is determined modulo one coefficient digit less than `u`
    let known = u.precision().saturating_sub(1);
    let mut u = u.clone();
    let mut b = field.one();
    // Each step removes the leading term with (1 + x Π^(d-e))^p ≡ 1 + ε x Π^d.
    for _ in 0..(4 * field.ramification() as i64 * field.precision() as i64 + 8) {
        let diff = field.sub(&u, &field.one());
        if field.is_zero_at_precision(&diff) {
            return Ok(field.truncate(&b, known));
        }
        // a remainder inside the last coefficient digit is below resolution
        let floor = field.absolute_precision(&diff) - field.ramification() as i64;
        let (d, c) = match field.leading_term(&diff) {
            Err(Error::PrecisionExhausted(_)) if field.valuation_at_least(&diff, floor) => return Ok(field.truncate(&b, known)),
            r => r?,
        };
        if d <= w.top {
            return Err(Error::BackendFailure("tail root called above level top".into()));
        }
        let x = field.lift(&res.mul(&c, &eps_inv));
        let t = field.add(&field.one(), &field.mul_pi_pow(&x, d - e));
        let tp = field.pow_big(&t, &BigUint::from(p));
        u = field.div(&u, &tp)?;
        b = field.mul(&b, &t);
    }
    Err(Error::PrecisionExhausted(field.precision()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::field::LevelKind;

    fn q(ell: u64) -> LocalField {
        LocalField::rationals(ell, 24).unwrap()
    }

    fn q3_zeta() -> LocalField {
        let f = q(3);
        f.extend(LevelKind::Eisenstein, &[f.from_int(3), f.zero()]).unwrap()
    }

    #[test]
    fn tame_examples() {
        let f = q(3);
        let pc = PowerClasses::new(&f, 2).unwrap();
        assert!(pc.is_pth_power(&f, &f.from_int(4)).unwrap());
        assert!(!pc.is_pth_power(&f, &f.from_int(3)).unwrap());
        assert!(!pc.is_pth_power(&f, &f.from_int(-1)).unwrap());
        assert!(f.eq_at_precision(&pc.generators()[1], &f.from_int(-1)));
        let f7 = q(7);
        let pc7 = PowerClasses::new(&f7, 3).unwrap();
        assert!(!pc7.is_pth_power(&f7, &f7.from_int(2)).unwrap());
        assert!(pc7.is_pth_power(&f7, &f7.from_int(-1)).unwrap());
        let r = pc7.pth_root(&f7, &f7.from_int(-8 * 343)).unwrap().unwrap();
        assert!(f7.eq_at_precision(&f7.pow(&r, 3).unwrap(), &f7.from_int(-8 * 343)));
    }

    #[test]
    fn dyadic_squares() {
        let f = q(2);
        let pc = PowerClasses::new(&f, 2).unwrap();
        assert_eq!(pc.dim(), 3);
        for n in [1i64, 9, 17, 25, 4, 36] {
            assert!(pc.is_pth_power(&f, &f.from_int(n)).unwrap(), "{n}");
        }
        for n in [-1i64, 2, 3, 5, 7, 13, -7 + 16] {
            assert_eq!(pc.is_pth_power(&f, &f.from_int(n)).unwrap(), n.rem_euclid(8) == 1 && n > 0, "{n}");
        }
        let r = pc.pth_root(&f, &f.from_int(-7)).unwrap().unwrap();
        assert!(f.eq_at_precision(&f.square(&r), &f.from_int(-7)));
        assert_eq!(pc.dlog(&f, &f.from_int(15)).unwrap().coords(), &[0, 1, 1]);
    }

    #[test]
    fn wild_cubes() {
        let g = q3_zeta();
        let pc = PowerClasses::new(&g, 3).unwrap();
        assert_eq!(pc.dim(), 4);
        let pi = g.uniformizer();
        let x = g.add(&g.from_int(2), &g.mul(&pi, &g.from_int(5)));
        let c = g.pow(&x, 3).unwrap();
        assert!(pc.is_pth_power(&g, &c).unwrap());
        let r = pc.pth_root(&g, &c).unwrap().unwrap();
        assert!(g.eq_at_precision(&g.pow(&r, 3).unwrap(), &c));
        assert!(!pc.is_pth_power(&g, &pi).unwrap());
        // 2 = -1 · (1 - 3) and -1 is a cube, while 1 - 3 = 1 + π^2 is a cube
        // exactly when the level-2 term can be removed
        assert!(pc.is_pth_power(&g, &g.from_int(-1)).unwrap());
        for gen in pc.generators() {
            assert!(!pc.is_pth_power(&g, gen).unwrap());
        }
    }

    #[test]
    fn dlog_matches_exhaustive_search() {
        for (field, p) in [(q(2), 2u64), (q3_zeta(), 3), (q(7), 3), (q(5), 2)] {
            let pc = PowerClasses::new(&field, p).unwrap();
            let n = pc.dim();
            let samples = [17i64, -6, 10, 21, 2, 3, -1];
            for s in samples {
                let x = field.from_int(s);
                let fast = pc.dlog(&field, &x).unwrap();
                let mut found = None;
                for e in crate::fplin::all_vectors(p, n) {
                    let mut y = x.clone();
                    for (g, &k) in pc.generators().iter().zip(e.coords()) {
                        y = field.div(&y, &field.pow(g, k as i64).unwrap()).unwrap();
                    }
                    if pc.is_pth_power(&field, &y).unwrap() {
                        found = Some(e);
                        break;
                    }
                }
                assert_eq!(Some(fast), found, "p={p} x={s}");
            }
        }
    }
}
