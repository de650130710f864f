//! Projective points, closed points, and component counts of space curves.
//!
//! A [`VarietySpec`] is the whole ambient space, a hypersurface, or a
//! complete-intersection curve `V(g, f)` in `P^3`. Closed points are
//! Frobenius orbits, stored as the lexicographically smallest normalized
//! representative together with the orbit size.
//!
//! Space-curve component counting projects `V(g, f)` to the plane from a
//! random center (a seeded invertible coordinate change followed by a
//! resultant in `x3`), decomposes the image with the plane-curve machinery,
//! and votes across projections: degenerate centers can merge components,
//! so a count is only accepted once two independent projections agree
//! (first count to two votes, up to the configured retry budget); an
//! unstable vote is reported as indeterminate, never guessed. Centers are
//! drawn over `F_{q^3}` when the base field has fewer than 5 elements —
//! over `F_2` there are too few rational coordinate changes to reliably
//! avoid degenerate projections. Geometric counts do not depend on the
//! projection field; the rational count in the returned decomposition is
//! relative to it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::factor2::{plane_curve_components, Decomposition};
use crate::forms::{dim_s_d, monomials, Form, MultiPoly, ProjPoint};
use crate::gf::{FieldCtx, FqElem};

// ---------------------------------------------------------------------------
// Varieties
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarietyKind {
    FullSpace,
    Hypersurface,
    CompleteIntersectionCurve,
}

/// A subvariety of `P^n` given by 0, 1, or 2 defining forms over the base
/// field.
#[derive(Clone)]
pub struct VarietySpec {
    n: usize,
    base: FieldCtx,
    forms: Vec<Form>,
    kind: VarietyKind,
}

impl VarietySpec {
    pub fn full_space(base: &FieldCtx, n: usize) -> VarietySpec {
        VarietySpec {
            n,
            base: base.clone(),
            forms: vec![],
            kind: VarietyKind::FullSpace,
        }
    }

    pub fn hypersurface(g: Form) -> Result<VarietySpec> {
        if g.is_zero() {
            return Err(Error::ZeroForm);
        }
        if g.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        Ok(VarietySpec {
            n: g.n(),
            base: g.ctx().clone(),
            forms: vec![g],
            kind: VarietyKind::Hypersurface,
        })
    }

    pub fn curve_intersection(g: Form, f: Form) -> Result<VarietySpec> {
        if g.is_zero() || f.is_zero() {
            return Err(Error::ZeroForm);
        }
        if g.n() != 3 || f.n() != 3 {
            return Err(Error::Invalid(
                "complete-intersection curves live in P^3".into(),
            ));
        }
        if g.ctx() != f.ctx() {
            return Err(Error::FieldMismatch);
        }
        Ok(VarietySpec {
            n: 3,
            base: g.ctx().clone(),
            forms: vec![g, f],
            kind: VarietyKind::CompleteIntersectionCurve,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn base(&self) -> &FieldCtx {
        &self.base
    }
    pub fn forms(&self) -> &[Form] {
        &self.forms
    }
    pub fn kind(&self) -> VarietyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n - self.forms.len()
    }

    /// Product of the defining degrees (1 for the full space).
    pub fn degree(&self) -> usize {
        self.forms.iter().map(|f| f.degree()).product()
    }

    pub fn describe(&self) -> String {
        match self.kind {
            VarietyKind::FullSpace => format!("P^{}", self.n),
            VarietyKind::Hypersurface => format!("V({}) in P^{}", self.forms[0], self.n),
            VarietyKind::CompleteIntersectionCurve => {
                format!("V({}, {}) in P^3", self.forms[0], self.forms[1])
            }
        }
    }

    /// Membership test over any extension of the base field.
    pub fn contains(&self, p: &ProjPoint) -> Result<bool> {
        if p.n() != self.n {
            return Err(Error::Invalid("point/variety dimension mismatch".into()));
        }
        for f in &self.forms {
            if !f.evaluate(p)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for VarietySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

// ---------------------------------------------------------------------------
// Point enumeration
// ---------------------------------------------------------------------------

/// Lazy enumeration of `P^n(F)` in deterministic order: points grouped by
/// the position of their leading 1, tails in element-index order. Yields
/// `(q^(n+1) - 1)/(q - 1)` points.
pub fn proj_points(ctx: &FieldCtx, n: usize) -> impl Iterator<Item = ProjPoint> + '_ {
    let q = ctx.order();
    (0..=n).flat_map(move |j| {
        let tail_len = n - j;
        let count = (q as u128).pow(tail_len as u32);
        (0..count).map(move |idx| {
            let mut coords = Vec::with_capacity(n + 1);
            coords.extend((0..j).map(|_| ctx.zero()));
            coords.push(ctx.one());
            let mut rest = idx;
            // Most significant tail coordinate first keeps the order stable.
            let mut tail = Vec::with_capacity(tail_len);
            for _ in 0..tail_len {
                tail.push(ctx.from_index((rest % q as u128) as u64));
                rest /= q as u128;
            }
            tail.reverse();
            coords.extend(tail);
            ProjPoint::new(coords).expect("leading coordinate is 1")
        })
    })
}

/// Bound-checked enumeration: the affine tuple count `(q)^(n+1)` must stay
/// within the configured limit.
pub fn enumerate_proj_points<'a>(
    ctx: &'a FieldCtx,
    n: usize,
    cfg: &Config,
) -> Result<impl Iterator<Item = ProjPoint> + 'a> {
    let size = (ctx.order() as u128).pow(n as u32 + 1);
    if size > cfg.max_enum_points as u128 {
        return Err(Error::EnumerationBound {
            size,
            bound: cfg.max_enum_points,
        });
    }
    Ok(proj_points(ctx, n))
}

/// Number of points of `V` with coordinates in `F_{q^e}`.
pub fn count_points(v: &VarietySpec, e: usize, cfg: &Config) -> Result<u64> {
    let ext = FieldCtx::internal(v.base().p(), v.base().k() * e)?;
    let forms: Vec<Form> = v
        .forms()
        .iter()
        .map(|f| f.embed_to(&ext))
        .collect::<Result<_>>()?;
    let mut count = 0u64;
    for p in enumerate_proj_points(&ext, v.n(), cfg)? {
        if forms
            .iter()
            .all(|f| f.evaluate(&p).map(|v| v.is_zero()).unwrap_or(false))
        {
            count += 1;
        }
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Closed points
// ---------------------------------------------------------------------------

/// A closed point: a Frobenius orbit of projective points over extensions
/// of the base field, represented by its lexicographically smallest
/// normalized member and the orbit size.
#[derive(Clone)]
pub struct ClosedPoint {
    rep: ProjPoint,
    degree: usize,
    base: FieldCtx,
}

impl ClosedPoint {
    pub fn new(rep: ProjPoint, base: &FieldCtx) -> Result<ClosedPoint> {
        // The representative may live over any extension of the base; its
        // true degree is the orbit size under x -> x^q.
        let q = base.order();
        if rep.ctx().p() != base.p() || rep.ctx().k() % base.k() != 0 {
            return Err(Error::NoEmbedding {
                p: base.p(),
                k: base.k(),
                p2: rep.ctx().p(),
                m: rep.ctx().k(),
            });
        }
        let mut degree = 1usize;
        let mut cur = rep.power_map(q);
        while cur != rep {
            cur = cur.power_map(q);
            degree += 1;
        }
        // Canonical representative: smallest orbit member.
        let mut best = rep.clone();
        let mut cur = rep.power_map(q);
        while cur != rep {
            if cur.lex_key() < best.lex_key() {
                best = cur.clone();
            }
            cur = cur.power_map(q);
        }
        Ok(ClosedPoint {
            rep: best,
            degree,
            base: base.clone(),
        })
    }

    pub fn representative(&self) -> &ProjPoint {
        &self.rep
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn base(&self) -> &FieldCtx {
        &self.base
    }
}

impl fmt::Debug for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@deg{}", self.rep, self.degree)
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.rep, self.degree)
    }
}

/// All closed points of `V` of degree at most `max_degree`, one orbit
/// representative each, in deterministic order (by degree, then
/// enumeration order).
pub fn closed_points(v: &VarietySpec, max_degree: usize, cfg: &Config) -> Result<Vec<ClosedPoint>> {
    let base = v.base().clone();
    let q = base.order();
    let mut out = vec![];
    for e in 1..=max_degree {
        let ext = FieldCtx::internal(base.p(), base.k() * e)?;
        let forms: Vec<Form> = v
            .forms()
            .iter()
            .map(|f| f.embed_to(&ext))
            .collect::<Result<_>>()?;
        for p in enumerate_proj_points(&ext, v.n(), cfg)? {
            if !forms
                .iter()
                .all(|f| f.evaluate(&p).map(|v| v.is_zero()).unwrap_or(false))
            {
                continue;
            }
            // Exact degree: smallest divisor e' of e with Frob^{e'} fixing p.
            let mut degree = e;
            for div in 1..e {
                if e % div == 0 {
                    let qe = (q as u128).pow(div as u32);
                    if p
                        .coords()
                        .iter()
                        .all(|c| c.pow(qe) == *c)
                    {
                        degree = div;
                        break;
                    }
                }
            }
            if degree != e {
                continue; // already collected at its own level
            }
            // Emit each orbit once, at its smallest member.
            let mut is_rep = true;
            let mut cur = p.power_map(q);
            while cur != p {
                if cur.lex_key() < p.lex_key() {
                    is_rep = false;
                    break;
                }
                cur = cur.power_map(q);
            }
            if is_rep {
                out.push(ClosedPoint {
                    rep: p,
                    degree: e,
                    base: base.clone(),
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Quaternary irreducibility by trial division
// ---------------------------------------------------------------------------

/// Exact irreducibility test over the base field by exhaustive trial
/// division with lower-degree candidate divisors. Only feasible at desk
/// scale; the candidate count is guarded.
pub fn irreducible_by_trial_division(g: &Form, cfg: &Config) -> Result<bool> {
    if g.is_zero() {
        return Err(Error::ZeroForm);
    }
    let d = g.degree();
    if d == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if d == 1 {
        return Ok(true);
    }
    let ctx = g.ctx().clone();
    let q = ctx.order();
    for e in 1..=d / 2 {
        let ncoef = dim_s_d(g.n(), e);
        let classes = ((q as u128).pow(ncoef as u32) - 1) / (q as u128 - 1);
        if classes > cfg.max_sweep_classes as u128 {
            return Err(Error::SweepBound {
                classes,
                bound: cfg.max_sweep_classes,
            });
        }
        let mons = monomials(g.n(), e);
        for idx in 0..classes as u64 {
            let coeffs = nth_projective_rep(idx, ncoef as usize, &ctx);
            let cand = Form::from_terms(
                &ctx,
                g.n(),
                e,
                mons.iter().cloned().zip(coeffs).collect::<Vec<_>>(),
            )?;
            if cand.divides(g) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The `idx`-th coefficient vector with first nonzero entry 1, in the
/// canonical sweep order: grouped by the position of the leading 1, tails
/// counting up in element-index order (most significant digit first).
pub fn nth_projective_rep(idx: u64, len: usize, ctx: &FieldCtx) -> Vec<FqElem> {
    let q = ctx.order();
    let mut rem = idx as u128;
    for j in 0..len {
        let tail = (q as u128).pow((len - 1 - j) as u32);
        if rem < tail {
            let mut coeffs = vec![ctx.zero(); len];
            coeffs[j] = ctx.one();
            let mut rest = rem;
            for i in (j + 1..len).rev() {
                coeffs[i] = ctx.from_index((rest % q as u128) as u64);
                rest /= q as u128;
            }
            return coeffs;
        }
        rem -= tail;
    }
    panic!("projective representative index out of range");
}

/// Number of projective representative classes for `len` coefficients.
pub fn projective_class_count(len: usize, q: u64) -> u128 {
    ((q as u128).pow(len as u32) - 1) / (q as u128 - 1)
}

// ---------------------------------------------------------------------------
// Space curves
// ---------------------------------------------------------------------------

/// Component counts of the complete-intersection curve `V(g, f)` in `P^3`.
///
/// `g` must be irreducible over the base field and `f` must not vanish on
/// `V(g)` (equivalently `g` must not divide `f`). The returned
/// decomposition is the plane decomposition of the projected curve; its
/// rational count is relative to the projection base field.
pub fn space_curve_components(g: &Form, f: &Form, seed: u64, cfg: &Config) -> Result<Decomposition> {
    if g.n() != 3 || f.n() != 3 {
        return Err(Error::Invalid("space curves live in P^3".into()));
    }
    if g.is_zero() || f.is_zero() {
        return Err(Error::ZeroForm);
    }
    if f.degree() == 0 || g.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    if g.ctx() != f.ctx() {
        return Err(Error::FieldMismatch);
    }
    if !irreducible_by_trial_division(g, cfg)? {
        return Err(Error::NotIrreducible(format!("{}", g)));
    }
    // With g irreducible, f vanishes on V(g) exactly when g | f.
    if g.degree() <= f.degree() && g.divides(f) {
        return Err(Error::VanishesOnVariety);
    }
    space_curve_components_unchecked(g, f, seed, cfg)
}

/// Same as [`space_curve_components`] but trusting the caller on the
/// preconditions (used when `g` is already known to be irreducible, e.g. a
/// geometric component produced by absolute factorization).
pub fn space_curve_components_unchecked(
    g: &Form,
    f: &Form,
    seed: u64,
    cfg: &Config,
) -> Result<Decomposition> {
    let base = g.ctx().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // A projection can merge components (degenerate center) but never split
    // an irreducible one: per-projection counts are bounded above by the
    // truth and attain it for generic centers. Merged projections often
    // share the *same* undercount (any pair of lines through a common point
    // collapses to the same key), so a count is only trusted when the
    // maximal key over a full round of projections is confirmed twice. An
    // unconfirmed round escalates once to a larger center field, where the
    // degenerate locus is a vanishing fraction.
    for escalation in 0..2usize {
        // Centers over the base field when it is big enough, else over a
        // cubic extension (doubled on escalation).
        let ext = if base.order() >= 5 { 1 } else { 3 } * (1 + escalation);
        let centers = if ext == 1 {
            base.clone()
        } else {
            FieldCtx::internal(base.p(), base.k() * ext)?
        };
        let g_c = g.embed_to(&centers)?;
        let f_c = f.embed_to(&centers)?;
        let mut votes: Vec<((usize, usize), usize, Decomposition)> = vec![];
        for _attempt in 0..cfg.projection_retries {
            let dec = project_once(&g_c, &f_c, &centers, &mut rng, cfg)?;
            let key = (dec.geometric_components(), dec.rational_components());
            match votes.iter_mut().find(|(k, _, _)| *k == key) {
                Some((_, count, _)) => *count += 1,
                None => votes.push((key, 1, dec)),
            }
        }
        let max_key = votes.iter().map(|(k, _, _)| *k).max().unwrap();
        let (_, n, dec) = votes.into_iter().find(|(k, _, _)| *k == max_key).unwrap();
        if n >= 2 {
            return Ok(dec);
        }
    }
    Err(Error::Indeterminate {
        what: format!("component count of V({}, {})", g, f),
        tries: 2 * cfg.projection_retries,
    })
}

/// One generic projection: move a random center (where neither form
/// vanishes) to `(0:0:0:1)`, eliminate `x3` by the resultant, decompose the
/// plane image.
fn project_once(
    g: &Form,
    f: &Form,
    centers: &FieldCtx,
    rng: &mut ChaCha8Rng,
    cfg: &Config,
) -> Result<Decomposition> {
    // Rejection-sample the center.
    let center = loop {
        let coords: Vec<FqElem> = (0..4).map(|_| centers.random(rng)).collect();
        if coords.iter().all(|c| c.is_zero()) {
            continue;
        }
        let p = ProjPoint::new(coords).unwrap();
        if !g.evaluate(&p)?.is_zero() && !f.evaluate(&p)?.is_zero() {
            break p;
        }
    };
    // Coordinate change M: columns are the standard vectors away from the
    // pivot, plus the center as the x3 column; det = ±center[pivot].
    let pivot = center
        .coords()
        .iter()
        .position(|c| !c.is_zero())
        .expect("projective point");
    let mut cols: Vec<Vec<FqElem>> = (0..4)
        .filter(|&j| j != pivot)
        .map(|j| {
            (0..4)
                .map(|i| if i == j { centers.one() } else { centers.zero() })
                .collect()
        })
        .collect();
    cols.push(center.coords().to_vec());
    // subs[i] = row i of M.
    let subs: Vec<Vec<FqElem>> = (0..4)
        .map(|i| (0..4).map(|j| cols[j][i].clone()).collect())
        .collect();
    let g1 = g.compose_linear(&subs);
    let f1 = f.compose_linear(&subs);
    debug_assert_eq!(g1.as_multipoly().degree_in(3), Some(g.degree()));
    debug_assert_eq!(f1.as_multipoly().degree_in(3), Some(f.degree()));
    let r = crate::forms::resultant_wrt(&g1.as_multipoly(), &f1.as_multipoly(), 3)?;
    assert!(!r.is_zero(), "coprime forms have a nonzero resultant");
    // Drop the eliminated variable.
    let tern = MultiPoly::from_terms(
        centers,
        3,
        r.terms().map(|(e, c)| {
            debug_assert_eq!(e[3], 0);
            (vec![e[0], e[1], e[2]], c.clone())
        }),
    );
    let tern_form = Form::from_multipoly(&tern, g.degree() * f.degree())
        .expect("resultant of forms is homogeneous");
    debug_assert!(tern_form.degree() <= g.degree() * f.degree());
    plane_curve_components(&tern_form, rng.gen(), cfg.max_bivariate_degree)
}
