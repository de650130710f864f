//! Density measurements: how often does a random degree-`d` form satisfy a
//! property of its hypersurface section?
//!
//! A [`Statistic`] bundles the property with the variety it is evaluated
//! against. Exhaustive sweeps walk one representative per scalar class
//! (first nonzero coefficient 1) and rescale exactly, so the reported
//! density is an exact rational over all of `S_d` including the zero form:
//! `(s*(q-1) + z) / q^N` with `s` the projective successes and `z` the zero
//! form's value. Monte Carlo draws coefficient vectors uniformly from the
//! full `q^N` space and reports a Wilson score interval.
//!
//! Sweeps shard the representative index range; shard counts merge by
//! addition, and Monte Carlo shards derive their generators from the master
//! seed and shard index, so results are byte-identical for a given seed
//! regardless of thread count.

use std::fmt;
use std::time::{Duration, Instant};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::factor2::plane_curve_components;
use crate::forms::{dim_s_d, monomials, Expo, Form, MultiPoly, ProjPoint};
use crate::geom::{
    closed_points, enumerate_proj_points, irreducible_by_trial_division, nth_projective_rep,
    projective_class_count, space_curve_components_unchecked, ClosedPoint, VarietyKind,
    VarietySpec,
};
use crate::gf::{embedding, FieldCtx, FqElem};

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// The measurable properties. Each is a total boolean function of a form
/// against the bundled variety; the zero form evaluates to `true` for
/// `VanishesOnX` and `VanishesAtSet` and `false` for all others.
#[derive(Clone)]
pub enum StatisticKind {
    /// The section `H_f ∩ X` is geometrically irreducible.
    GeomIrreducibleSection,
    /// Intersecting with `H_f` induces a bijection from the geometric
    /// components of `X` to the components of the section.
    ComponentBijection,
    /// `f` vanishes identically on `X`.
    VanishesOnX,
    /// `H_f ∩ X` is nonempty over some bounded-degree extension.
    MeetsX,
    /// `f` vanishes at every listed closed point.
    VanishesAtSet(Vec<ClosedPoint>),
    /// `f` is squarefree (plane-curve sections with finite singular locus).
    SquarefreeSection,
}

impl StatisticKind {
    pub fn id(&self) -> &'static str {
        match self {
            StatisticKind::GeomIrreducibleSection => "geom-irred",
            StatisticKind::ComponentBijection => "component-bijection",
            StatisticKind::VanishesOnX => "vanishes-on-x",
            StatisticKind::MeetsX => "meets-x",
            StatisticKind::VanishesAtSet(_) => "vanishes-at",
            StatisticKind::SquarefreeSection => "squarefree",
        }
    }
}

/// A statistic bound to its variety, validated at construction.
#[derive(Clone)]
pub struct Statistic {
    kind: StatisticKind,
    variety: VarietySpec,
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.kind.id(), self.variety.describe())
    }
}

fn mismatch(kind: &StatisticKind, variety: &VarietySpec, why: &str) -> Error {
    Error::StatisticMismatch {
        stat: format!("{} ({})", kind.id(), why),
        variety: variety.describe(),
    }
}

impl Statistic {
    pub fn new(kind: StatisticKind, variety: VarietySpec) -> Result<Statistic> {
        match &kind {
            StatisticKind::GeomIrreducibleSection => match (variety.n(), variety.kind()) {
                (2, VarietyKind::FullSpace) => {}
                (3, VarietyKind::Hypersurface) => {}
                _ => {
                    return Err(mismatch(
                        &kind,
                        &variety,
                        "needs X = P^2 or a surface in P^3",
                    ))
                }
            },
            StatisticKind::ComponentBijection => match (variety.n(), variety.kind()) {
                (2, VarietyKind::Hypersurface) => {}
                (3, VarietyKind::Hypersurface) => {
                    if variety.forms()[0].vars_used().len() > 3 {
                        return Err(mismatch(
                            &kind,
                            &variety,
                            "absolute factorization needs a defining form in at most 3 variables",
                        ));
                    }
                }
                _ => {
                    return Err(mismatch(
                        &kind,
                        &variety,
                        "needs a reduced hypersurface in P^2 or P^3",
                    ))
                }
            },
            StatisticKind::VanishesOnX => match (variety.n(), variety.kind()) {
                (_, VarietyKind::FullSpace) => {}
                (2, VarietyKind::Hypersurface) => {}
                (3, VarietyKind::Hypersurface) => {
                    let g = &variety.forms()[0];
                    if g.vars_used().len() > 3 {
                        // Radical of a general quaternary form is out of
                        // reach; an irreducible one is its own radical.
                        return Err(mismatch(
                            &kind,
                            &variety,
                            "quaternary radicals need an irreducible or <= 3-variable form",
                        ));
                    }
                }
                (_, VarietyKind::CompleteIntersectionCurve) => {}
                _ => return Err(mismatch(&kind, &variety, "unsupported variety")),
            },
            StatisticKind::MeetsX => {}
            StatisticKind::VanishesAtSet(points) => {
                for p in points {
                    if p.representative().n() != variety.n() {
                        return Err(mismatch(&kind, &variety, "point dimension"));
                    }
                    if p.base() != variety.base() {
                        return Err(mismatch(&kind, &variety, "point base field"));
                    }
                }
            }
            StatisticKind::SquarefreeSection => {
                if variety.n() != 2 || variety.kind() != VarietyKind::FullSpace {
                    return Err(mismatch(&kind, &variety, "plane-curve case needs X = P^2"));
                }
            }
        }
        Ok(Statistic { kind, variety })
    }

    pub fn kind(&self) -> &StatisticKind {
        &self.kind
    }
    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    /// Value assigned to the zero form.
    pub fn zero_form_value(&self) -> bool {
        matches!(
            self.kind,
            StatisticKind::VanishesOnX | StatisticKind::VanishesAtSet(_)
        )
    }

    /// Precompute everything that does not depend on the swept form.
    pub fn prepare(&self, d: usize, cfg: &Config) -> Result<PreparedStatistic> {
        let base = self.variety.base().clone();
        let n = self.variety.n();
        let monos = monomials(n, d);
        let mut prep = PreparedStatistic {
            stat: self.clone(),
            d,
            cfg: cfg.clone(),
            monos,
            point_tables: vec![],
            bijection: None,
            radical: None,
        };
        match &self.kind {
            StatisticKind::VanishesAtSet(points) => {
                for p in points {
                    prep.point_tables
                        .push(PointTable::build(p.representative(), &prep.monos, &base)?);
                }
            }
            StatisticKind::MeetsX => {
                let e_limit = (d * self.variety.degree() + 1).min(cfg.meets_extension_max).max(1);
                for e in 1..=e_limit {
                    let ext = FieldCtx::internal(base.p(), base.k() * e)?;
                    let forms: Vec<Form> = self
                        .variety
                        .forms()
                        .iter()
                        .map(|f| f.embed_to(&ext))
                        .collect::<Result<_>>()?;
                    for pt in enumerate_proj_points(&ext, n, cfg)? {
                        if forms
                            .iter()
                            .all(|f| f.evaluate(&pt).map(|v| v.is_zero()).unwrap_or(false))
                        {
                            prep.point_tables
                                .push(PointTable::build(&pt, &prep.monos, &base)?);
                        }
                    }
                }
            }
            StatisticKind::GeomIrreducibleSection => {
                if self.variety.kind() == VarietyKind::Hypersurface
                    && !irreducible_by_trial_division(&self.variety.forms()[0], cfg)?
                {
                    return Err(Error::NotIrreducible(format!(
                        "{}",
                        self.variety.forms()[0]
                    )));
                }
            }
            StatisticKind::ComponentBijection => {
                prep.bijection = Some(BijectionData::build(&self.variety, cfg)?);
            }
            StatisticKind::VanishesOnX => {
                if self.variety.kind() == VarietyKind::Hypersurface {
                    prep.radical = Some(hypersurface_radical(&self.variety.forms()[0], cfg)?);
                }
            }
            StatisticKind::SquarefreeSection => {}
        }
        Ok(prep)
    }
}

/// Radical (product of distinct irreducible factors) of a hypersurface
/// form; ternary directly, quaternary through its at-most-3 used variables.
fn hypersurface_radical(g: &Form, cfg: &Config) -> Result<Form> {
    let reduce = |tern: &Form| -> Result<Form> {
        let mut radical = Form::monomial(tern.ctx().one(), vec![0u16; 3]);
        let mut work = tern.clone();
        for v in 0..3usize {
            let m = work.var_multiplicity(v);
            if m > 0 {
                work = work.strip_var(v, m);
                let mut e = vec![0u16; 3];
                e[v] = 1;
                radical = radical.mul(&Form::monomial(tern.ctx().one(), e));
            }
        }
        if work.degree() > 0 {
            let (deh, _) = work.dehomogenize(2)?;
            let (factors, _) =
                crate::factor2::factor_bivariate(&deh, 0, cfg.max_bivariate_degree)?;
            for (fac, _) in factors {
                radical = radical.mul(&Form::homogenize_at(&fac, 2));
            }
        }
        Ok(radical)
    };
    if g.n() == 2 {
        return reduce(g);
    }
    // Quaternary: route through the <= 3 used variables.
    let used = g.vars_used();
    if used.len() > 3 {
        if irreducible_by_trial_division(g, cfg)? {
            return Ok(g.clone());
        }
        return Err(Error::StatisticMismatch {
            stat: "vanishes-on-x (reducible quaternary radical)".into(),
            variety: format!("V({})", g),
        });
    }
    let mut slots: Vec<usize> = used.clone();
    let mut fill = 0usize;
    while slots.len() < 3 {
        if !slots.contains(&fill) {
            slots.push(fill);
        }
        fill += 1;
    }
    slots.sort_unstable();
    let tern = MultiPoly::from_terms(
        g.ctx(),
        3,
        g.terms()
            .map(|(e, c)| (slots.iter().map(|&v| e[v]).collect::<Expo>(), c.clone())),
    );
    let tern_form = Form::from_multipoly(&tern, g.degree())?;
    let rad3 = reduce(&tern_form)?;
    // Re-insert the unused variable slots.
    let back = MultiPoly::from_terms(
        g.ctx(),
        4,
        rad3.terms().map(|(e, c)| {
            let mut e4 = vec![0u16; 4];
            for (i, &v) in slots.iter().enumerate() {
                e4[v] = e[i];
            }
            (e4, c.clone())
        }),
    );
    Form::from_multipoly(&back, rad3.degree())
}

/// Monomial values at one projective point, with a lookup table embedding
/// base-field coefficients into the point's field.
struct PointTable {
    values: Vec<FqElem>,
    embed_lookup: Vec<FqElem>,
}

impl PointTable {
    fn build(p: &ProjPoint, monos: &[Expo], base: &FieldCtx) -> Result<PointTable> {
        let target = p.ctx().clone();
        let emb = embedding(base, &target)?;
        let embed_lookup: Vec<FqElem> = base.elems().map(|c| emb.apply(&c)).collect();
        let values = monos
            .iter()
            .map(|e| {
                let mut acc = target.one();
                for (c, &exp) in p.coords().iter().zip(e.iter()) {
                    if exp > 0 {
                        acc = acc.mul(&c.pow(exp as u128));
                    }
                }
                acc
            })
            .collect();
        Ok(PointTable {
            values,
            embed_lookup,
        })
    }

    /// Is the dot product of (embedded) coefficients with the monomial
    /// values zero?
    fn vanishes(&self, coeffs: &[FqElem]) -> bool {
        let target = self.values[0].ctx().clone();
        let mut acc = target.zero();
        for (c, v) in coeffs.iter().zip(&self.values) {
            if c.is_zero() {
                continue;
            }
            let ec = &self.embed_lookup[c.index() as usize];
            acc = acc.add(&ec.mul(v));
        }
        acc.is_zero()
    }
}

/// Geometric components of the bijection variety, materialized over the
/// splitting field `F_{q^L}` so every cross-component comparison happens
/// through one consistent embedding.
struct BijectionData {
    big: FieldCtx,
    /// All geometric components as forms in the ambient variable count.
    components: Vec<Form>,
    /// One index per Frobenius orbit.
    orbit_reps: Vec<Vec<usize>>,
}

impl BijectionData {
    fn build(variety: &VarietySpec, cfg: &Config) -> Result<BijectionData> {
        let g = &variety.forms()[0];
        let base = g.ctx().clone();
        let q = base.order();
        let nvars = variety.n() + 1;
        // Route through at most three variables.
        let used = g.vars_used();
        let mut slots: Vec<usize> = used.clone();
        let mut fill = 0usize;
        while slots.len() < 3 {
            if !slots.contains(&fill) {
                slots.push(fill);
            }
            fill += 1;
        }
        slots.sort_unstable();
        let tern = MultiPoly::from_terms(
            g.ctx(),
            3,
            g.terms()
                .map(|(e, c)| (slots.iter().map(|&v| e[v]).collect::<Expo>(), c.clone())),
        );
        let tern_form = Form::from_multipoly(&tern, g.degree())?;
        let dec = plane_curve_components(&tern_form, 0, cfg.max_bivariate_degree)?;
        if !dec.is_squarefree() {
            return Err(Error::NotSquarefree(format!("{}", g)));
        }
        let lcm = dec
            .records()
            .iter()
            .fold(1usize, |acc, r| lcm(acc, r.field_degree));
        let big = FieldCtx::internal(base.p(), base.k() * lcm)?;
        // The full absolute factorization over the splitting field.
        let tern_big = tern_form.embed_to(&big)?;
        let mut comps3: Vec<Form> = vec![];
        let mut work = tern_big.clone();
        for v in 0..3usize {
            let m = work.var_multiplicity(v);
            if m > 0 {
                work = work.strip_var(v, m);
                let mut e = vec![0u16; 3];
                e[v] = 1;
                comps3.push(Form::monomial(big.one(), e));
            }
        }
        if work.degree() > 0 {
            let (deh, _) = work.dehomogenize(2)?;
            let (factors, _) =
                crate::factor2::factor_bivariate(&deh, 0, cfg.max_bivariate_degree)?;
            for (fac, mult) in factors {
                debug_assert_eq!(mult, 1);
                comps3.push(Form::homogenize_at(&fac, 2));
            }
        }
        assert_eq!(
            comps3.len(),
            dec.geometric_components(),
            "splitting field must realize the absolute factorization"
        );
        // Back to the ambient variable count.
        let components: Vec<Form> = comps3
            .iter()
            .map(|c| {
                let back = MultiPoly::from_terms(
                    &big,
                    nvars,
                    c.terms().map(|(e, co)| {
                        let mut ew = vec![0u16; nvars];
                        for (i, &v) in slots.iter().enumerate() {
                            ew[v] = e[i];
                        }
                        (ew, co.clone())
                    }),
                );
                Form::from_multipoly(&back, c.degree()).expect("homogeneous component")
            })
            .collect();
        // Frobenius orbits (coefficients of the defining form are fixed by
        // x -> x^q, so conjugation permutes the component set).
        let normalized: Vec<Form> = components.iter().map(normalize_form).collect();
        let mut seen = vec![false; normalized.len()];
        let mut orbit_reps = vec![];
        for i in 0..normalized.len() {
            if seen[i] {
                continue;
            }
            let mut orbit = vec![i];
            seen[i] = true;
            let mut cur = normalize_form(&normalized[i].map_frobenius(q));
            while cur != normalized[i] {
                let j = normalized
                    .iter()
                    .position(|h| *h == cur)
                    .expect("Frobenius permutes components");
                if !seen[j] {
                    seen[j] = true;
                    orbit.push(j);
                }
                cur = normalize_form(&cur.map_frobenius(q));
            }
            orbit_reps.push(orbit);
        }
        Ok(BijectionData {
            big,
            components: normalized,
            orbit_reps,
        })
    }
}

fn normalize_form(f: &Form) -> Form {
    match f.terms().next_back() {
        None => f.clone(),
        Some((_, c)) => {
            if c.is_one() {
                f.clone()
            } else {
                f.mul_scalar(&c.inv().unwrap())
            }
        }
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// A statistic with its per-degree precomputations.
pub struct PreparedStatistic {
    stat: Statistic,
    d: usize,
    cfg: Config,
    monos: Vec<Expo>,
    point_tables: Vec<PointTable>,
    bijection: Option<BijectionData>,
    radical: Option<Form>,
}

impl PreparedStatistic {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Evaluate on a coefficient vector in canonical monomial order.
    pub fn eval_coeffs(&self, coeffs: &[FqElem], seed: u64) -> Result<bool> {
        match &self.stat.kind {
            StatisticKind::VanishesAtSet(_) => {
                Ok(self.point_tables.iter().all(|t| t.vanishes(coeffs)))
            }
            StatisticKind::MeetsX => {
                if coeffs.iter().all(|c| c.is_zero()) {
                    return Ok(false);
                }
                Ok(self.point_tables.iter().any(|t| t.vanishes(coeffs)))
            }
            _ => {
                let f = Form::from_coefficient_vector(
                    self.stat.variety.base(),
                    self.stat.variety.n(),
                    self.d,
                    coeffs,
                );
                self.eval_form(&f, seed)
            }
        }
    }

    /// Evaluate on a form of the prepared degree.
    pub fn eval_form(&self, f: &Form, seed: u64) -> Result<bool> {
        debug_assert_eq!(f.degree(), self.d);
        if f.is_zero() {
            return Ok(self.stat.zero_form_value());
        }
        let cfg = &self.cfg;
        match &self.stat.kind {
            StatisticKind::VanishesAtSet(_) | StatisticKind::MeetsX => {
                self.eval_coeffs(&f.coefficient_vector(), seed)
            }
            StatisticKind::VanishesOnX => match self.stat.variety.kind() {
                VarietyKind::FullSpace => Ok(f.is_zero()),
                VarietyKind::Hypersurface => {
                    Ok(self.radical.as_ref().unwrap().divides(f))
                }
                VarietyKind::CompleteIntersectionCurve => {
                    // Evaluation at all closed points within the bound; a
                    // miss certifies non-vanishing, a full sweep of hits is
                    // accepted as vanishing at desk scale.
                    let bound = (self.stat.variety.degree() * f.degree() + 1)
                        .min(cfg.meets_extension_max)
                        .max(1);
                    let pts = closed_points(&self.stat.variety, bound, cfg)?;
                    for p in pts {
                        if !f.evaluate(p.representative())?.is_zero() {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
            },
            StatisticKind::SquarefreeSection => {
                if f.degree() == 0 {
                    return Ok(true);
                }
                Ok(plane_curve_components(f, seed, cfg.max_bivariate_degree)?.is_squarefree())
            }
            StatisticKind::GeomIrreducibleSection => {
                if f.degree() == 0 {
                    return Ok(false);
                }
                match self.stat.variety.kind() {
                    VarietyKind::FullSpace => Ok(plane_curve_components(
                        f,
                        seed,
                        cfg.max_bivariate_degree,
                    )?
                    .geometric_components()
                        == 1),
                    VarietyKind::Hypersurface => {
                        let g = &self.stat.variety.forms()[0];
                        if g.degree() <= f.degree() && g.divides(f) {
                            return Ok(false);
                        }
                        let dec = space_curve_components_unchecked(g, f, seed, cfg)?;
                        Ok(dec.geometric_components() == 1)
                    }
                    VarietyKind::CompleteIntersectionCurve => unreachable!("validated"),
                }
            }
            StatisticKind::ComponentBijection => {
                let data = self.bijection.as_ref().unwrap();
                let f_big = f.embed_to(&data.big)?;
                for h in &data.components {
                    if h.degree() <= f_big.degree() && h.divides(&f_big) {
                        return Ok(false);
                    }
                }
                if self.stat.variety.n() == 3 {
                    self.eval_bijection_p3(data, &f_big, seed)
                } else {
                    self.eval_bijection_p2(data, &f_big, seed)
                }
            }
        }
    }

    /// Surfaces in P^3: every component's section must be geometrically
    /// irreducible, and the section curves pairwise distinct.
    fn eval_bijection_p3(&self, data: &BijectionData, f_big: &Form, seed: u64) -> Result<bool> {
        let cfg = &self.cfg;
        let mut reduced_degrees = vec![0usize; data.components.len()];
        for (o, orbit) in data.orbit_reps.iter().enumerate() {
            let rep = &data.components[orbit[0]];
            let dec =
                space_curve_components_unchecked(rep, f_big, derive_seed(seed, o as u64), cfg)?;
            if dec.geometric_components() != 1 {
                return Ok(false);
            }
            for &i in orbit {
                reduced_degrees[i] = dec.reduced_degree();
            }
        }
        // Pairwise distinctness of the section curves.
        for i in 0..data.components.len() {
            for j in i + 1..data.components.len() {
                if !self.sections_distinct(
                    &data.components[i],
                    &data.components[j],
                    f_big,
                    reduced_degrees[i] * reduced_degrees[j],
                )? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Compare the point sets of two section curves over growing
    /// extensions. Distinct irreducible curves share at most
    /// `deg * deg` points, so set equality beyond that threshold decides
    /// equality; any set difference decides distinctness.
    fn sections_distinct(
        &self,
        h_i: &Form,
        h_j: &Form,
        f_big: &Form,
        bezout: usize,
    ) -> Result<bool> {
        let cfg = &self.cfg;
        let big = h_i.ctx().clone();
        let n = h_i.n();
        for e in 1..=cfg.distinct_extension_max {
            let ext = FieldCtx::internal(big.p(), big.k() * e)?;
            let size = (ext.order() as u128).pow(n as u32 + 1);
            if size > cfg.max_enum_points as u128 {
                break;
            }
            let hi = h_i.embed_to(&ext)?;
            let hj = h_j.embed_to(&ext)?;
            let ff = f_big.embed_to(&ext)?;
            let mut si: Vec<Vec<u64>> = vec![];
            let mut sj: Vec<Vec<u64>> = vec![];
            for p in enumerate_proj_points(&ext, n, cfg)? {
                if !ff.evaluate(&p)?.is_zero() {
                    continue;
                }
                if hi.evaluate(&p)?.is_zero() {
                    si.push(p.lex_key());
                }
                if hj.evaluate(&p)?.is_zero() {
                    sj.push(p.lex_key());
                }
            }
            if si != sj {
                return Ok(true);
            }
            if si.len() > bezout {
                return Ok(false);
            }
        }
        Err(Error::Indeterminate {
            what: "section distinctness within enumeration bounds".into(),
            tries: cfg.distinct_extension_max,
        })
    }

    /// Plane curves in P^2: sections are zero-dimensional; geometric
    /// irreducibility means exactly one geometric intersection point, and
    /// distinctness compares located orbits.
    fn eval_bijection_p2(&self, data: &BijectionData, f_big: &Form, seed: u64) -> Result<bool> {
        let cfg = &self.cfg;
        let mut located: Vec<Vec<Vec<u64>>> = vec![];
        for (idx, h) in data.components.iter().enumerate() {
            let count =
                plane_section_point_count(h, f_big, derive_seed(seed, idx as u64), cfg)?;
            if count != 1 {
                return Ok(false);
            }
            located.push(self.locate_single_point(h, f_big)?);
        }
        for i in 0..located.len() {
            for j in i + 1..located.len() {
                if located[i] == located[j] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Orbit (as lexicographic keys over the minimal splitting level) of
    /// the unique geometric point of `V(h, f)`.
    fn locate_single_point(&self, h: &Form, f_big: &Form) -> Result<Vec<Vec<u64>>> {
        let cfg = &self.cfg;
        let big = h.ctx().clone();
        let bound = h.degree() * f_big.degree().max(1);
        for e in 1..=bound.max(1) {
            let ext = FieldCtx::internal(big.p(), big.k() * e)?;
            let size = (ext.order() as u128).pow(3);
            if size > cfg.max_enum_points as u128 {
                break;
            }
            let hi = h.embed_to(&ext)?;
            let ff = f_big.embed_to(&ext)?;
            let mut pts = vec![];
            for p in enumerate_proj_points(&ext, 2, cfg)? {
                if hi.evaluate(&p)?.is_zero() && ff.evaluate(&p)?.is_zero() {
                    // Tag with the level so orbits found at different
                    // levels never compare equal by accident.
                    let mut key = vec![e as u64];
                    key.extend(p.lex_key());
                    pts.push(key);
                }
            }
            if !pts.is_empty() {
                return Ok(pts);
            }
        }
        Err(Error::Indeterminate {
            what: "intersection point within enumeration bounds".into(),
            tries: bound,
        })
    }
}

/// Distinct geometric intersection points of two plane curves, by voting
/// resultant root counts over random coordinate changes (collisions can
/// only merge roots, so the confirmed maximum wins).
fn plane_section_point_count(h: &Form, f: &Form, seed: u64, cfg: &Config) -> Result<usize> {
    let base = h.ctx().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for escalation in 0..2usize {
        let ext = if base.order() >= 5 { 1 } else { 3 } * (1 + escalation);
        let centers = if ext == 1 {
            base.clone()
        } else {
            FieldCtx::internal(base.p(), base.k() * ext)?
        };
        let hc = h.embed_to(&centers)?;
        let fc = f.embed_to(&centers)?;
        let mut votes: Vec<(usize, usize)> = vec![];
        for _ in 0..cfg.projection_retries {
            let count = project_point_count_once(&hc, &fc, &centers, &mut rng)?;
            match votes.iter_mut().find(|(k, _)| *k == count) {
                Some((_, n)) => *n += 1,
                None => votes.push((count, 1)),
            }
        }
        let (max_key, n) = votes.iter().copied().max().unwrap();
        if n >= 2 {
            return Ok(max_key);
        }
    }
    Err(Error::Indeterminate {
        what: format!("intersection point count of V({}, {})", h, f),
        tries: 2 * cfg.projection_retries,
    })
}

fn project_point_count_once(
    h: &Form,
    f: &Form,
    centers: &FieldCtx,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    // Center off both curves, moved to (0:0:1); the x2-resultant is then a
    // binary form whose distinct roots are the projected points.
    let center = loop {
        let coords: Vec<FqElem> = (0..3).map(|_| centers.random(rng)).collect();
        if coords.iter().all(|c| c.is_zero()) {
            continue;
        }
        let p = ProjPoint::new(coords).unwrap();
        if !h.evaluate(&p)?.is_zero() && !f.evaluate(&p)?.is_zero() {
            break p;
        }
    };
    let pivot = center.coords().iter().position(|c| !c.is_zero()).unwrap();
    let mut cols: Vec<Vec<FqElem>> = (0..3)
        .filter(|&j| j != pivot)
        .map(|j| {
            (0..3)
                .map(|i| if i == j { centers.one() } else { centers.zero() })
                .collect()
        })
        .collect();
    cols.push(center.coords().to_vec());
    let subs: Vec<Vec<FqElem>> = (0..3)
        .map(|i| (0..3).map(|j| cols[j][i].clone()).collect())
        .collect();
    let h1 = h.compose_linear(&subs);
    let f1 = f.compose_linear(&subs);
    let r = crate::forms::resultant_wrt(&h1.as_multipoly(), &f1.as_multipoly(), 2)?;
    assert!(!r.is_zero(), "sections of distinct curves are finite");
    // r is a binary form in x0, x1; count distinct projective roots.
    let ctx = centers.clone();
    let mut count = 0usize;
    let mut work = r;
    for v in 0..2usize {
        let m = work
            .terms()
            .map(|(e, _)| e[v] as usize)
            .min()
            .unwrap_or(0);
        if m > 0 {
            count += 1;
            work = MultiPoly::from_terms(
                &ctx,
                work.nvars(),
                work.terms().map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[v] -= m as u16;
                    (e2, c.clone())
                }),
            );
        }
    }
    if work.total_degree().unwrap_or(0) > 0 {
        let uni = crate::upoly::UniPoly::new(
            ctx.clone(),
            (0..=work.degree_in(0).unwrap_or(0))
                .map(|i| {
                    work.terms()
                        .find(|(e, _)| e[0] as usize == i)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| ctx.zero())
                })
                .collect(),
        );
        count += crate::upoly::squarefree_part(&uni)?.deg();
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    MonteCarlo,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => write!(f, "exhaustive"),
            Mode::MonteCarlo => write!(f, "monte-carlo"),
        }
    }
}

/// One measured statistic. Exhaustive runs carry the exact rational
/// density; Monte Carlo runs carry the Wilson 95% interval.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub statistic: String,
    pub variety: String,
    pub q: u64,
    pub n: usize,
    pub d: usize,
    pub mode: Mode,
    pub trials: u64,
    pub successes: u64,
    pub density: Option<BigRational>,
    pub estimate: f64,
    pub ci: Option<(f64, f64)>,
    pub seed: u64,
    pub wall: Duration,
}

/// Wilson score interval for `s` successes in `n` trials.
pub fn wilson_interval(s: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let phat = s as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub const WILSON_Z_95: f64 = 1.959963984540054;
pub const WILSON_Z_99: f64 = 2.5758293035489004;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, idx: u64) -> u64 {
    splitmix(seed ^ splitmix(idx))
}

/// Evaluate a statistic on one form.
pub fn eval_statistic(stat: &Statistic, f: &Form, seed: u64, cfg: &Config) -> Result<bool> {
    let prep = stat.prepare(f.degree(), cfg)?;
    prep.eval_form(f, seed)
}

/// Exhaustive density of a statistic over `S_d`, exact. Walks one
/// representative per scalar class in parallel shards and rescales:
/// `density = (s*(q-1) + z) / q^N`.
pub fn sweep_exhaustive(
    stat: &Statistic,
    d: usize,
    seed: u64,
    cfg: &Config,
) -> Result<DensityReport> {
    let start = Instant::now();
    let base = stat.variety().base().clone();
    let q = base.order();
    let n = stat.variety().n();
    let ncoef = dim_s_d(n, d) as usize;
    let classes = projective_class_count(ncoef, q);
    if classes > cfg.max_sweep_classes as u128 {
        return Err(Error::SweepBound {
            classes,
            bound: cfg.max_sweep_classes,
        });
    }
    let classes = classes as u64;
    let prep = stat.prepare(d, cfg)?;
    let shard = 4096u64;
    let nshards = classes.div_ceil(shard);
    let successes: u64 = (0..nshards)
        .into_par_iter()
        .map(|sh| -> Result<u64> {
            let lo = sh * shard;
            let hi = ((sh + 1) * shard).min(classes);
            let mut count = 0u64;
            for idx in lo..hi {
                let coeffs = nth_projective_rep(idx, ncoef, &base);
                if prep.eval_coeffs(&coeffs, derive_seed(seed, idx))? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let z = u64::from(stat.zero_form_value());
    // Scalar-class accounting must tile the coefficient space exactly.
    let failures = classes - successes;
    assert_eq!(
        (successes + failures) as u128 * (q as u128 - 1) + 1,
        (q as u128).pow(ncoef as u32),
        "projective classes must reconstruct q^N"
    );
    let num = BigInt::from(successes) * BigInt::from(q - 1) + BigInt::from(z);
    let den = BigInt::from(q).pow(ncoef as u32);
    let density = BigRational::new(num, den);
    let estimate = density.to_f64().unwrap_or(f64::NAN);
    Ok(DensityReport {
        statistic: stat.kind().id().to_string(),
        variety: stat.variety().describe(),
        q,
        n,
        d,
        mode: Mode::Exhaustive,
        trials: classes,
        successes,
        density: Some(density),
        estimate,
        ci: None,
        seed,
        wall: start.elapsed(),
    })
}

/// Monte Carlo density estimate: `trials` uniform draws from all of `S_d`
/// (zero form included), Wilson 95% interval, byte-reproducible given the
/// seed.
pub fn sample_mc(
    stat: &Statistic,
    d: usize,
    trials: u64,
    seed: u64,
    cfg: &Config,
) -> Result<DensityReport> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let start = Instant::now();
    let base = stat.variety().base().clone();
    let q = base.order();
    let n = stat.variety().n();
    let ncoef = dim_s_d(n, d) as usize;
    let prep = stat.prepare(d, cfg)?;
    let shard = 256u64;
    let nshards = trials.div_ceil(shard);
    let successes: u64 = (0..nshards)
        .into_par_iter()
        .map(|sh| -> Result<u64> {
            let lo = sh * shard;
            let hi = ((sh + 1) * shard).min(trials);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, sh));
            let mut count = 0u64;
            for _ in lo..hi {
                let coeffs: Vec<FqElem> = (0..ncoef)
                    .map(|_| base.from_index(rng.gen_range(0..q)))
                    .collect();
                let eval_seed = rng.gen::<u64>();
                if prep.eval_coeffs(&coeffs, eval_seed)? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let estimate = successes as f64 / trials as f64;
    let ci = wilson_interval(successes, trials, WILSON_Z_95);
    Ok(DensityReport {
        statistic: stat.kind().id().to_string(),
        variety: stat.variety().describe(),
        q,
        n,
        d,
        mode: Mode::MonteCarlo,
        trials,
        successes,
        density: None,
        estimate,
        ci: Some(ci),
        seed,
        wall: start.elapsed(),
    })
}

/// `prod_{P in V} (1 - q^{-deg P})`, exact.
pub fn product_over_set(points: &[ClosedPoint]) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for p in points {
        let q = BigInt::from(p.base().order());
        let qe = num::pow::pow(q, p.degree());
        let factor = BigRational::new(qe.clone() - BigInt::from(1), qe);
        acc *= factor;
    }
    acc
}

/// Truncated zeta product `prod_{P in X, deg P < r} (1 - q^{-deg P})`: the
/// density of forms whose hypersurface misses every closed point of degree
/// below `r`. Strictly decreasing in `r` while new closed points appear.
pub fn truncated_zeta_product(x: &VarietySpec, r: usize, cfg: &Config) -> Result<BigRational> {
    if r <= 1 {
        return Ok(BigRational::from_integer(BigInt::from(1)));
    }
    let pts = closed_points(x, r - 1, cfg)?;
    Ok(product_over_set(&pts))
}
