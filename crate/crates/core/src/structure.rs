//! Constructive decomposition `J = X ⊕ Y ⊕ Z` and the arithmetic invariants
//! that predict it.
//!
//! The measured invariants are `Υ` (whether `ζ_p` is a norm from `K`),
//! `dim N(J)` and `dim F^×/N(K^×)`. From them [`theorem3_profile`] predicts
//! the multiplicity of each block length. [`decompose_arithmetic`] builds
//! the summands from field elements: `X` from `root_a` or from a Hilbert 90
//! solution `δ`, `Y` from norm preimages, `Z` as a complement inside
//! `ε(F^×)`. Both are compared with the Jordan form of `σ` in the tests and
//! in the analysis driver.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fplin::{self, FpVector};
use crate::gmodule::{CyclicSummand, GModule, MultiplicityVector};
use crate::quadratic::{self, QuadTower};
use crate::tower::{lift, reduce, ClassVector, FiniteClasses, JPresentation, KummerTower};

/// Arithmetic invariants of `K/F`. `None` marks an infinite dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantProfile {
    pub p: u64,
    pub upsilon: u8,
    pub dim_nj: Option<usize>,
    pub dim_f_mod_nk: Option<usize>,
    pub dim_epsilon: Option<usize>,
}

impl InvariantProfile {
    pub fn finite(p: u64, upsilon: u8, dim_nj: usize, dim_f_mod_nk: usize) -> Self {
        Self {
            p,
            upsilon,
            dim_nj: Some(dim_nj),
            dim_f_mod_nk: Some(dim_f_mod_nk),
            dim_epsilon: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dim_nj.is_some() && self.dim_f_mod_nk.is_some()
    }

    /// `dim N(K^×)/F^×p`. The class of `a` is a norm class, killed in `J`,
    /// exactly when `a ∈ N(K^×)`: always for odd `p`, and for `p = 2`
    /// exactly when `-1` is a norm, since `N(√a) = -a`.
    pub fn dim_nk_mod_fp(&self) -> Option<usize> {
        let extra = if self.p > 2 { 1 } else { self.upsilon as usize };
        self.dim_nj.map(|d| d + extra)
    }
}

/// Evidence behind a measured profile.
#[derive(Debug, Clone, Serialize)]
pub struct NormCertificate {
    pub classes_enumerated: u64,
    pub f_classes_hit: usize,
    /// Coordinates of a class whose norm is `[ζ_p]`, when one exists.
    pub zeta_preimage: Option<FpVector>,
}

/// The set of `F`-classes hit by norms, by enumeration of all of `J`.
fn norm_image_set<K>(pres: &JPresentation<K>) -> (HashSet<FpVector>, Option<FpVector>) {
    let mut hit = HashSet::new();
    let mut zeta_pre = None;
    for e in fplin::all_vectors(pres.p, pres.dim()) {
        let img = pres.norm_map.mul_vec(&e).expect("shape");
        if zeta_pre.is_none() && img == pres.zeta_f_class {
            zeta_pre = Some(e.clone());
        }
        hit.insert(img);
    }
    (hit, zeta_pre)
}

fn log_p(p: u64, mut n: usize) -> usize {
    let mut k = 0;
    while n > 1 {
        n /= p as usize;
        k += 1;
    }
    k
}

/// Measures `Υ`, `dim N(J)` and `dim F^×/N(K^×)` on a finite presentation.
///
/// `Υ` and `dim F^×/N(K^×)` come from enumerating the norm classes of all
/// `p^dim` classes of `J` (well defined since `N(γ k^p) = N(γ) N(k)^p`) and
/// are cross-checked against linear algebra on the norm map; `dim N(J)` is
/// the rank of the group-ring norm on the module.
pub fn norm_group_profile<K>(pres: &JPresentation<K>) -> Result<(InvariantProfile, NormCertificate)> {
    let p = pres.p;
    let (hit, zeta_pre) = norm_image_set(pres);
    let rank = pres.norm_map.rank();
    if hit.len() != (p as usize).pow(rank as u32) {
        return Err(Error::BackendFailure("norm classes do not form a subgroup".into()));
    }
    let by_solve = pres.norm_map.solve(&pres.zeta_f_class)?.is_some();
    if by_solve != zeta_pre.is_some() {
        return Err(Error::BackendFailure("Υ differs between enumeration and solving".into()));
    }
    let profile = InvariantProfile {
        p,
        upsilon: zeta_pre.is_some() as u8,
        dim_nj: Some(pres.module.norm_operator().rank()),
        dim_f_mod_nk: Some(pres.f_dim - log_p(p, hit.len())),
        dim_epsilon: Some(pres.epsilon_map.rank()),
    };
    let cert = NormCertificate {
        classes_enumerated: p.pow(pres.dim() as u32),
        f_classes_hit: hit.len(),
        zeta_preimage: zeta_pre,
    };
    Ok((profile, cert))
}

/// Block multiplicities predicted by the invariants:
/// `m_1 = 2Υ + dim F^×/N(K^×) - 1`, `m_2 = 1 - Υ` for `p > 2`,
/// `m_i = 0` for `3 <= i < p`, `m_p = dim N(J)`.
pub fn theorem3_profile(inv: &InvariantProfile) -> Result<MultiplicityVector> {
    let (Some(nj), Some(fnk)) = (inv.dim_nj, inv.dim_f_mod_nk) else {
        return Err(Error::InfiniteProfile);
    };
    let p = inv.p;
    let m1 = 2 * inv.upsilon as i64 + fnk as i64 - 1;
    if m1 < 0 {
        return Err(Error::PreconditionViolated(
            "invariants give a negative count of trivial summands".into(),
        ));
    }
    let mut m = MultiplicityVector::zero(p);
    m.set(1, m1 as usize);
    if p > 2 {
        m.set(2, 1 - inv.upsilon as usize);
    }
    let top = m.get(p as usize);
    m.set(p as usize, top + nj);
    Ok(m)
}

/// Isomorphism of `J_1` and `J_2` from invariants alone.
pub fn isomorphism_test(a: &InvariantProfile, b: &InvariantProfile) -> Result<bool> {
    if a.p != b.p {
        return Err(Error::MixedP);
    }
    let (Some(fa), Some(fb), Some(na), Some(nb)) =
        (a.dim_f_mod_nk, b.dim_f_mod_nk, a.dim_nk_mod_fp(), b.dim_nk_mod_fp())
    else {
        return Err(Error::InfiniteProfile);
    };
    let (ua, ub) = (a.upsilon as usize, b.upsilon as usize);
    if a.p > 2 {
        Ok(ua == ub && na == nb && fa == fb)
    } else {
        Ok(2 * ua + fa == 2 * ub + fb && ub + na == ua + nb)
    }
}

// ---- Hilbert 90 and norm bookkeeping ----

/// `ω` with `σ(ω)/ω = α` for `N(α) = 1`, from the resolvent
/// `Σ b_i σ^i(θ)`, `b_0 = 1`, `b_(i+1) = b_i σ^i(α)`.
pub fn hilbert90_solve<T: KummerTower + ?Sized>(t: &T, alpha: &T::K) -> Result<T::K> {
    if !t.f_eq(&t.norm(alpha)?, &t.f_one()) {
        return Err(Error::NormNotOne);
    }
    let p = t.p();
    let mut coeffs = vec![t.k_one()];
    let mut conj = alpha.clone();
    for _ in 1..p {
        let next = t.k_mul(coeffs.last().unwrap(), &conj);
        coeffs.push(next);
        conj = t.sigma(&conj)?;
    }
    for theta in t.k_basis_over_f() {
        let mut res = t.k_mul(&coeffs[0], &theta);
        let mut s = theta.clone();
        for b in &coeffs[1..] {
            s = t.sigma(&s)?;
            res = t.k_add(&res, &t.k_mul(b, &s));
        }
        if t.k_is_zero(&res) {
            continue;
        }
        let omega = t.k_inv(&res)?;
        if !t.k_eq(&t.sigma_minus_one(&omega)?, alpha) {
            return Err(Error::BackendFailure("Hilbert 90 solution fails σ(ω)/ω = α".into()));
        }
        return Ok(omega);
    }
    Err(Error::ResolventVanished)
}

/// Writes `c ∈ F^× ∩ K^×p` as `a^s f^p` with `0 <= s < p`.
pub fn decompose_norm_in_af<T: KummerTower + ?Sized>(t: &T, c: &T::F) -> Result<(u64, T::F)> {
    if !t.is_pth_power(&t.embed(c))? {
        return Err(Error::NotInIntersection);
    }
    let a_inv = t.f_inv(&t.a())?;
    let mut x = c.clone();
    for s in 0..t.p() {
        if let Some(f) = t.pth_root_in_f(&x)? {
            return Ok((s, f));
        }
        x = t.f_mul(&x, &a_inv);
    }
    Err(Error::NotInIntersection)
}

/// For `N(γ_1) = N(γ_2)` in a quadratic extension: `f ∈ F^×` and `k` with
/// `γ_1 = f k^2 γ_2`, namely `f = N(ω)` and `k = 1/ω` for `σ(ω)/ω = γ_1/γ_2`.
pub fn identical_norm_witness<T: KummerTower + ?Sized>(
    t: &T,
    g1: &T::K,
    g2: &T::K,
) -> Result<(T::F, T::K)> {
    if t.p() != 2 {
        return Err(Error::PreconditionViolated("needs a quadratic extension".into()));
    }
    let alpha = t.k_div(g1, g2)?;
    let omega = hilbert90_solve(t, &alpha)?;
    let f = t.norm(&omega)?;
    let k = t.k_inv(&omega)?;
    let rebuilt = t.k_mul(&t.k_mul(&t.embed(&f), &t.k_mul(&k, &k)), g2);
    if !t.k_eq(&rebuilt, g1) {
        return Err(Error::BackendFailure("γ_1 ≠ f k^2 γ_2".into()));
    }
    Ok((f, k))
}

/// An element with norm exactly `target`, when `[target]` is a norm class:
/// a class representative followed by a `p`-th root correction in `F`.
pub fn exact_norm_preimage<T: FiniteClasses>(
    t: &T,
    pres: &JPresentation<T::K>,
    target: &T::F,
) -> Result<Option<T::K>> {
    let cls = t.f_dlog(target)?;
    let Some(e) = fplin::all_vectors(pres.p, pres.dim()).find(|e| pres.norm_map.mul_vec(e).expect("shape") == cls)
    else {
        return Ok(None);
    };
    let lam0 = lift(t, pres, &e);
    let ratio = t.f_mul(&t.norm(&lam0)?, &t.f_inv(target)?);
    let g = t
        .pth_root_in_f(&ratio)?
        .ok_or_else(|| Error::BackendFailure("norm class matched but ratio is not a p-th power".into()))?;
    let lam = t.k_div(&lam0, &t.embed(&g))?;
    if !t.f_eq(&t.norm(&lam)?, target) {
        return Err(Error::BackendFailure("corrected norm preimage is off".into()));
    }
    Ok(Some(lam))
}

/// Class of `N(γ)` in `J`, computed from the element.
fn norm_class_in_j<T: FiniteClasses>(t: &T, pres: &JPresentation<T::K>, g: &T::K) -> Result<FpVector> {
    Ok(reduce(t, pres, &t.embed(&t.norm(g)?))?.coords)
}

/// Checks `reduce(N(γ)) = N · reduce(γ)` on every basis representative:
/// the element norm against the group-ring norm of the `σ`-matrix.
pub fn norm_formula_check<T: FiniteClasses>(t: &T, pres: &JPresentation<T::K>) -> Result<bool> {
    let nop = pres.module.norm_operator();
    for (i, rep) in pres.basis_reps.iter().enumerate() {
        if norm_class_in_j(t, pres, rep)? != nop.column(i) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---- lifting norm classes ----

/// Result of lifting a class to one whose norm spans a fixed line.
#[derive(Debug, Clone)]
pub struct Lemma1Lift<K> {
    pub alpha: ClassVector<K>,
    /// Exponent of the `a^(t/p)` adjustment.
    pub t: u64,
    /// Spans `M_(a^(t/p) γ)^G`.
    pub fixed_line: FpVector,
    /// Class of `N(α)` in `J`.
    pub norm_class: FpVector,
}

/// One induction step: `α ↦ ω` with `σ(ω)/ω = α / (f a^(s/p))` where
/// `N(α) = a^s f^p`. Returns `ω` and `s`.
fn lift_step<T: FiniteClasses>(t: &T, alpha: &T::K) -> Result<(T::K, u64)> {
    let (s, f) = decompose_norm_in_af(t, &t.norm(alpha)?)?;
    let denom = t.k_mul(&t.embed(&f), &t.k_pow(&t.root_a(), s as i64)?);
    let omega = hilbert90_solve(t, &t.k_div(alpha, &denom)?)?;
    Ok((omega, s))
}

/// Finds `α` with `⟨N[α]⟩ = M_γ^G` (length at least 3) or
/// `⟨N[α]⟩ = M_(a^(t/p) γ)^G` (length 2), following the induction on the
/// length with Hilbert 90 at each step. With `Υ = 1` the length-2 case uses
/// an element of norm `ζ_p` instead of the `a^(t/p)` adjustment.
pub fn lemma1_lift<T: FiniteClasses>(
    t: &T,
    pres: &JPresentation<T::K>,
    gamma: &ClassVector<T::K>,
    upsilon: u8,
) -> Result<Lemma1Lift<T::K>> {
    let p = pres.p;
    if p == 2 {
        return Err(Error::PreconditionViolated("lifting lemma needs p > 2".into()));
    }
    let m = &pres.module;
    let length = m.cyclic_submodule(&gamma.coords)?.length;
    if length < 2 {
        return Err(Error::PreconditionViolated("class is fixed by σ".into()));
    }
    let root_cls = reduce(t, pres, &t.root_a())?.coords;
    let mut alpha = gamma.representative.clone();
    let mut t_exp = 0u64;
    let mut i = length;
    if length == 2 && p > 2 {
        if upsilon == 0 {
            let mut span = m.fixed_submodule();
            span.push(root_cls.clone());
            if fplin::in_span(&span, &gamma.coords) {
                return Err(Error::PreconditionViolated(
                    "class lies in ⟨[a^(1/p)]⟩ + J_1".into(),
                ));
            }
            let (omega, s) = lift_step(t, &alpha)?;
            alpha = omega;
            t_exp = (p - s) % p;
        } else {
            let beta = exact_norm_preimage(t, pres, &t.zeta())?
                .ok_or_else(|| Error::BackendFailure("Υ = 1 but ζ_p has no norm preimage".into()))?;
            let (omega, s) = lift_step(t, &alpha)?;
            let mut corr = beta;
            for _ in 0..p - 3 {
                corr = t.sigma_minus_one(&corr)?;
            }
            alpha = t.k_mul(&t.k_pow(&corr, s as i64)?, &omega);
        }
        i = 3;
    }
    while (i as u64) < p {
        alpha = lift_step(t, &alpha)?.0;
        i += 1;
    }
    let target = gamma.coords.add(&root_cls.scale(t_exp));
    let fixed_line = m.cyclic_submodule(&target)?.basis.last().cloned().expect("nonempty chain");
    let norm_class = norm_class_in_j(t, pres, &alpha)?;
    if norm_class.is_zero() || fplin::rank_of(p, pres.dim(), &[norm_class.clone(), fixed_line.clone()]) != 1 {
        return Err(Error::BackendFailure("lifted norm does not span the fixed line".into()));
    }
    let alpha = reduce(t, pres, &alpha)?;
    Ok(Lemma1Lift {
        alpha,
        t: t_exp,
        fixed_line,
        norm_class,
    })
}

// ---- X, Y, Z ----

/// The summand `X` with the elements used to build it.
#[derive(Debug, Clone)]
pub struct XPart<K> {
    pub summand: Option<CyclicSummand>,
    /// `δ` with `σ(δ)/δ = λ^p`, `N(λ) = ζ_p`, normalized so `[N(δ)] = [a]`.
    pub delta: Option<K>,
    pub lambda: Option<K>,
}

/// Builds `X`: `⟨[δ]⟩` when `ζ_p` is a norm, `⟨[a^(1/p)], [ζ_p]⟩` when it is
/// not and `p > 2`, and `0` when it is not and `p = 2`.
pub fn build_x<T: FiniteClasses>(t: &T, pres: &JPresentation<T::K>, upsilon: u8) -> Result<XPart<T::K>> {
    let p = pres.p;
    let m = &pres.module;
    if upsilon == 1 {
        let lambda = exact_norm_preimage(t, pres, &t.zeta())?
            .ok_or_else(|| Error::BackendFailure("Υ = 1 but ζ_p has no norm preimage".into()))?;
        let delta0 = hilbert90_solve(t, &t.k_pow(&lambda, p as i64)?)?;
        let c = t.f_dlog(&t.norm(&delta0)?)?;
        let j = (1..p)
            .find(|&j| pres.a_class.scale(j) == c)
            .ok_or_else(|| Error::AssemblyFailed("N(δ) is not a nontrivial power of [a]".into()))?;
        let j_inv = (1..p).find(|&x| (x * j) % p == 1).expect("F_p is a field");
        let delta = t.k_pow(&delta0, j_inv as i64)?;
        if t.f_dlog(&t.norm(&delta)?)? != pres.a_class {
            return Err(Error::AssemblyFailed("normalized δ has the wrong norm class".into()));
        }
        let dv = reduce(t, pres, &delta)?.coords;
        let summand = m.cyclic_submodule(&dv)?;
        if summand.length != 1 {
            return Err(Error::AssemblyFailed("[δ] is not fixed by σ".into()));
        }
        return Ok(XPart {
            summand: Some(summand),
            delta: Some(delta),
            lambda: Some(lambda),
        });
    }
    if p == 2 {
        return Ok(XPart {
            summand: None,
            delta: None,
            lambda: None,
        });
    }
    let r = reduce(t, pres, &t.root_a())?.coords;
    let summand = m.cyclic_submodule(&r)?;
    if summand.length != 2 || summand.basis[1] != pres.zeta_class {
        return Err(Error::AssemblyFailed("[a^(1/p)] does not give a chain of length 2 ending at [ζ_p]".into()));
    }
    Ok(XPart {
        summand: Some(summand),
        delta: None,
        lambda: None,
    })
}

/// A free summand `M_γ` with `N(γ)` a chosen basis vector of `N(J)`.
#[derive(Debug, Clone)]
pub struct YPart<K> {
    pub summand: CyclicSummand,
    pub gamma: K,
    pub norm_class: FpVector,
}

/// Builds `Y`: for each basis vector `x` of `N(J)`, a class `γ` with
/// `N[γ] = x` found by enumeration, checked against the element norm.
pub fn build_y<T: FiniteClasses>(t: &T, pres: &JPresentation<T::K>) -> Result<Vec<YPart<T::K>>> {
    let p = pres.p;
    let n = pres.dim();
    let nop = pres.module.norm_operator();
    let mut parts = Vec::new();
    for x in nop.image_basis() {
        let e = fplin::all_vectors(p, n)
            .find(|e| nop.mul_vec(e).expect("shape") == x)
            .ok_or_else(|| Error::AssemblyFailed("norm image vector without preimage".into()))?;
        let gamma = lift(t, pres, &e);
        if norm_class_in_j(t, pres, &gamma)? != x {
            return Err(Error::AssemblyFailed(
                "element norm disagrees with the group-ring norm".into(),
            ));
        }
        let summand = pres.module.cyclic_submodule(&e)?;
        if summand.length != p as usize {
            return Err(Error::AssemblyFailed("norm preimage does not generate a free summand".into()));
        }
        parts.push(YPart {
            summand,
            gamma,
            norm_class: x,
        });
    }
    let all: Vec<FpVector> = parts.iter().flat_map(|y| y.summand.basis.iter().cloned()).collect();
    if fplin::rank_of(p, n, &all) != all.len() {
        return Err(Error::AssemblyFailed("free summands are dependent".into()));
    }
    let fixed: Vec<FpVector> = parts.iter().map(|y| y.summand.basis[p as usize - 1].clone()).collect();
    let nj = nop.image_basis();
    let mut both = fixed.clone();
    both.extend(nj.iter().cloned());
    if fplin::rank_of(p, n, &both) != nj.len() || fplin::rank_of(p, n, &fixed) != nj.len() {
        return Err(Error::AssemblyFailed("Y^G differs from N(J)".into()));
    }
    Ok(parts)
}

/// Builds `Z`: a complement, in pivot order, of `N(J) + (X ∩ ε(F^×))` inside
/// `ε(F^×)`.
pub fn build_z<K>(pres: &JPresentation<K>, x: Option<&CyclicSummand>) -> Result<Vec<CyclicSummand>> {
    let p = pres.p;
    let n = pres.dim();
    let eps = pres.epsilon_vectors();
    let mut start = pres.module.norm_operator().image_basis();
    if let Some(xs) = x {
        start.extend(fplin::intersection(p, n, &xs.basis, &eps));
    }
    fplin::extend_basis(p, n, &start, &eps)
        .into_iter()
        .map(|v| {
            let s = pres.module.cyclic_submodule(&v)?;
            if s.length != 1 {
                return Err(Error::AssemblyFailed("ε(F^×) class moved by σ".into()));
            }
            Ok(s)
        })
        .collect()
}

/// Summands built from field elements, with direct-sum evidence.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionCertificate {
    pub x_part: Option<CyclicSummand>,
    pub y_parts: Vec<CyclicSummand>,
    pub z_parts: Vec<CyclicSummand>,
    /// Rank of the union of the chain bases.
    pub rank: usize,
    pub dim: usize,
    pub lengths: MultiplicityVector,
}

impl DecompositionCertificate {
    pub fn parts(&self) -> Vec<CyclicSummand> {
        let mut all: Vec<CyclicSummand> = self.x_part.iter().cloned().collect();
        all.extend(self.y_parts.iter().cloned());
        all.extend(self.z_parts.iter().cloned());
        all
    }
}

/// Assembles `X ⊕ Y ⊕ Z` and certifies that it is all of `J` by rank.
pub fn decompose_arithmetic<T: FiniteClasses>(
    t: &T,
    pres: &JPresentation<T::K>,
    upsilon: u8,
) -> Result<DecompositionCertificate> {
    Ok(assemble(t, pres, upsilon)?.0)
}

/// As [`decompose_arithmetic`], also returning the elements behind `X`.
pub fn assemble<T: FiniteClasses>(
    t: &T,
    pres: &JPresentation<T::K>,
    upsilon: u8,
) -> Result<(DecompositionCertificate, XPart<T::K>)> {
    let x = build_x(t, pres, upsilon)?;
    let y = build_y(t, pres)?;
    let z = build_z(pres, x.summand.as_ref())?;
    let cert = DecompositionCertificate {
        x_part: x.summand.clone(),
        y_parts: y.into_iter().map(|y| y.summand).collect(),
        z_parts: z,
        rank: 0,
        dim: pres.dim(),
        lengths: MultiplicityVector::zero(pres.p),
    };
    let parts = cert.parts();
    let all: Vec<FpVector> = parts.iter().flat_map(|s| s.basis.iter().cloned()).collect();
    let rank = fplin::rank_of(pres.p, pres.dim(), &all);
    if !pres.module.verify_direct_sum(&parts) {
        return Err(Error::AssemblyFailed(format!(
            "X ⊕ Y ⊕ Z has rank {rank} in dimension {}",
            pres.dim()
        )));
    }
    let lengths: Vec<usize> = parts.iter().map(|s| s.length).collect();
    let cert = DecompositionCertificate {
        rank,
        lengths: MultiplicityVector::from_lengths(pres.p, &lengths)?,
        ..cert
    };
    Ok((cert, x))
}

/// Whether each socle layer `J_i` lies in the span of the parts.
pub fn socle_layers_covered(module: &GModule, parts: &[CyclicSummand]) -> Vec<bool> {
    let p = module.p();
    let n = module.dim();
    let span: Vec<FpVector> = parts.iter().flat_map(|s| s.basis.iter().cloned()).collect();
    let r = fplin::rank_of(p, n, &span);
    (1..=p as usize)
        .map(|i| {
            let mut all = span.clone();
            all.extend(module.socle_layer(i));
            fplin::rank_of(p, n, &all) == r
        })
        .collect()
}

// ---- fixed classes ----

/// Shape of `J_1` against `ε(F^×)`.
#[derive(Debug, Clone, Serialize)]
pub struct FixedClassReport {
    pub dim_j1: usize,
    pub dim_epsilon: usize,
    pub holds: bool,
}

/// `J_1 = ε(F^×)` when `Υ = 0`; `J_1 = ε(F^×) ⊕ ⟨[δ]⟩` when `Υ = 1`.
pub fn lemma2_check<K>(pres: &JPresentation<K>, upsilon: u8, delta_class: Option<&FpVector>) -> FixedClassReport {
    let p = pres.p;
    let n = pres.dim();
    let j1 = pres.module.fixed_submodule();
    let eps = pres.epsilon_vectors();
    let de = fplin::rank_of(p, n, &eps);
    let dj = j1.len();
    let eps_in_j1 = eps.iter().all(|v| fplin::in_span(&j1, v));
    let holds = eps_in_j1
        && match (upsilon, delta_class) {
            (0, _) => dj == de,
            (1, Some(d)) => {
                let mut gen = eps.clone();
                gen.push(d.clone());
                dj == de + 1 && fplin::rank_of(p, n, &gen) == dj && fplin::in_span(&j1, d)
            }
            _ => false,
        };
    FixedClassReport {
        dim_j1: dj,
        dim_epsilon: de,
        holds,
    }
}

/// Exactness of `0 → ⟨[a]⟩ → F^×/F^×p → J_1 → ⟨[a]⟩`, each node by
/// enumeration, with surjectivity of the last map against `Υ`.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSequenceReport {
    pub kernel_is_a: bool,
    pub image_is_norm_kernel: bool,
    pub norm_lands_in_a: bool,
    pub norm_surjective: bool,
    pub surjective_iff_upsilon: bool,
    pub holds: bool,
}

pub fn exact_sequence_check<K>(pres: &JPresentation<K>, upsilon: u8) -> ExactSequenceReport {
    let p = pres.p;
    let a_line: HashSet<FpVector> = (0..p).map(|c| pres.a_class.scale(c)).collect();
    let kernel: HashSet<FpVector> = fplin::all_vectors(p, pres.f_dim)
        .filter(|v| pres.epsilon_map.mul_vec(v).expect("shape").is_zero())
        .collect();
    let kernel_is_a = !pres.a_class.is_zero() && kernel == a_line;

    let j1 = pres.module.fixed_submodule();
    let j1_all: Vec<FpVector> = fplin::all_vectors(p, j1.len())
        .map(|c| {
            let mut v = FpVector::zero(p, pres.dim());
            for (k, b) in j1.iter().enumerate() {
                v = v.add(&b.scale(c.coords()[k]));
            }
            v
        })
        .collect();
    let image: HashSet<FpVector> = fplin::all_vectors(p, pres.f_dim)
        .map(|v| pres.epsilon_map.mul_vec(&v).expect("shape"))
        .collect();
    let norm_kernel: HashSet<FpVector> = j1_all
        .iter()
        .filter(|w| pres.norm_map.mul_vec(w).expect("shape").is_zero())
        .cloned()
        .collect();
    let image_is_norm_kernel = image == norm_kernel;
    let norms: HashSet<FpVector> = j1_all
        .iter()
        .map(|w| pres.norm_map.mul_vec(w).expect("shape"))
        .collect();
    let norm_lands_in_a = norms.is_subset(&a_line);
    let norm_surjective = norms == a_line;
    let surjective_iff_upsilon = norm_surjective == (upsilon == 1);
    ExactSequenceReport {
        kernel_is_a,
        image_is_norm_kernel,
        norm_lands_in_a,
        norm_surjective,
        surjective_iff_upsilon,
        holds: kernel_is_a && image_is_norm_kernel && norm_lands_in_a && surjective_iff_upsilon,
    }
}

// ---- extremal cases ----

/// A yes/no answer that may be out of reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Undecided,
}

impl From<bool> for Decision {
    fn from(b: bool) -> Self {
        if b {
            Decision::Yes
        } else {
            Decision::No
        }
    }
}

/// Freeness, absence of free summands, and `G`-invariance of `J`.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalReport {
    pub free: Decision,
    pub no_free_summand: Decision,
    pub g_invariant: Decision,
    /// Each decided answer agrees with the Jordan profile (finite `J`).
    pub matches_profile: Option<bool>,
    pub evidence: Vec<String>,
}

/// Extremal-case predicates on a finite presentation, each computed from
/// field invariants and compared with the Jordan profile of `σ`.
pub fn corollary1_local<K>(pres: &JPresentation<K>, upsilon: u8, jordan: &MultiplicityVector) -> ExtremalReport {
    let p = pres.p;
    let (hit, _) = norm_image_set(pres);
    let a_line: HashSet<FpVector> = (0..p).map(|c| pres.a_class.scale(c)).collect();
    let mut evidence = Vec::new();

    // F^× = N(K^×) ∪ -N(K^×), with -1 = ζ_2
    let covers = p == 2
        && fplin::all_vectors(p, pres.f_dim).all(|v| hit.contains(&v) || hit.contains(&v.sub(&pres.zeta_f_class)));
    let free = p == 2 && upsilon == 0 && covers;

    let nj_trivial = pres.module.norm_operator().is_zero();
    let norms_in_a = hit.is_subset(&a_line);
    if nj_trivial != norms_in_a {
        evidence.push("N(J) = 0 disagrees with N(K^×) ⊂ ⟨a⟩F^×p".into());
    }
    let no_free = nj_trivial;
    let g_inv = if p > 2 {
        no_free && a_line.contains(&pres.zeta_f_class)
    } else {
        no_free
    };

    let dim = pres.dim();
    let free_profile = jordan.get(p as usize) * p as usize == dim;
    let trivial_profile = jordan.get(1) == dim;
    let no_free_profile = jordan.get(p as usize) == 0;
    let matches = free == free_profile
        && no_free == no_free_profile
        && g_inv == trivial_profile
        && nj_trivial == norms_in_a;
    evidence.push(format!("norm classes hit: {}", hit.len()));
    ExtremalReport {
        free: free.into(),
        no_free_summand: no_free.into(),
        g_invariant: g_inv.into(),
        matches_profile: Some(matches),
        evidence,
    }
}

/// Extremal-case predicates for `Q(√a)/Q`, decided with Hilbert symbols.
/// Answers that would need a search beyond `limit` are `Undecided`.
pub fn corollary1_quadratic(t: &QuadTower, limit: u64) -> Result<ExtremalReport> {
    let a = t.a_value();
    let bound = t.search_bound();
    let mut evidence = Vec::new();
    let rat = |n: i64| num_rational::BigRational::from_integer(n.into());
    let (minus_one, w) = quadratic::minus_one_is_norm(a, bound)?;
    if let Some((u, v)) = &w {
        evidence.push(format!("-1 = N({u} + {v}√{a})"));
    }
    let primes: Vec<i64> = (2..=limit).filter(|&q| crate::fplin::is_prime(q)).map(|q| q as i64).collect();

    let free = if minus_one {
        Decision::No
    } else {
        let mut d = Decision::Undecided;
        for &q in &primes {
            if !quadratic::is_norm(&rat(q), a, bound)?.0 && !quadratic::is_norm(&rat(-q), a, bound)?.0 {
                evidence.push(format!("-1 is not a norm; neither {q} nor -{q} is a norm"));
                d = Decision::No;
                break;
            }
        }
        d
    };

    // a norm class outside ⟨[a]⟩ gives a nonzero element of N(J)
    let mut no_free = Decision::Undecided;
    let mut candidates = vec![-1i64];
    for &q in &primes {
        candidates.push(q);
        candidates.push(-q);
    }
    let a_class = quadratic::squarefree_part(a)?;
    for c in candidates {
        let c_class = quadratic::squarefree_part(c)?;
        if c_class == a_class || c_class == 1 {
            continue;
        }
        if quadratic::is_norm(&rat(c), a, bound)?.0 {
            evidence.push(format!("{c} is a norm outside ⟨[a]⟩"));
            no_free = Decision::No;
            break;
        }
    }
    Ok(ExtremalReport {
        free,
        no_free_summand: no_free,
        g_invariant: no_free,
        matches_profile: None,
        evidence,
    })
}

/// `Υ` for `Q(√a)/Q`, with the invariants that are infinite left open.
pub fn quadratic_profile(t: &QuadTower) -> Result<(InvariantProfile, Option<quadratic::NormWitness>)> {
    let (yes, w) = quadratic::minus_one_is_norm(t.a_value(), t.search_bound())?;
    Ok((
        InvariantProfile {
            p: 2,
            upsilon: yes as u8,
            dim_nj: None,
            dim_f_mod_nk: None,
            dim_epsilon: None,
        },
        w,
    ))
}
