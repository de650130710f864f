//! Constructive searches.
//!
//! The first: a geometrically irreducible surface in `P^3` all of whose
//! rational plane sections are reducible. Any surface containing `Z`, the
//! union of all `F_q`-lines, does the trick once its degree is at least the
//! number of lines in a plane: a plane section then contains every line of
//! that plane. The search builds the degree-`d` piece of the vanishing
//! ideal of `Z` exactly (each line imposes `d + 1` linear conditions via
//! its parametrization), samples kernel elements, verifies every rational
//! plane section reducible-or-non-reduced by exact factorization, and
//! certifies geometric irreducibility by the one-sided restriction test: a
//! nonzero squarefree absolutely irreducible plane restriction (planes
//! drawn over `F_{q^3}`) certifies the quaternary form irreducible. Samples
//! that exhaust the plane budget are reported `unverified`, never upgraded.
//!
//! The second: an irreducible hypersurface section of a surface through a
//! prescribed finite set of closed points, found by intersecting the
//! per-point vanishing conditions (spread over `F_q` by expanding in a
//! basis of the residue field) with `S_d` for ascending `d` and sampling
//! until the section statistic holds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::density::{derive_seed, eval_statistic, Statistic, StatisticKind};
use crate::error::{Error, Result};
use crate::factor2::plane_curve_components;
use crate::forms::{dim_s_d, monomials, Form, ProjPoint};
use crate::geom::{
    enumerate_proj_points, irreducible_by_trial_division, ClosedPoint, VarietyKind, VarietySpec,
};
use crate::gf::{embedding, factor_prime_power, FieldCtx, FqElem};

// ---------------------------------------------------------------------------
// Linear algebra over a small field
// ---------------------------------------------------------------------------

/// Kernel basis of a linear system over `ctx`, deterministic: RREF with one
/// canonical basis vector per free column.
pub(crate) fn kernel_basis(
    rows: &[Vec<FqElem>],
    ncols: usize,
    ctx: &FieldCtx,
) -> Vec<Vec<FqElem>> {
    // Work on element indices with lookup tables; the kernel fields are
    // tiny and the systems are not.
    let q = ctx.order() as usize;
    assert!(q <= 4096, "kernel solving expects a small field");
    let mut mul = vec![0u32; q * q];
    let mut add = vec![0u32; q * q];
    let mut inv = vec![0u32; q];
    let elems: Vec<FqElem> = ctx.elems().collect();
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            mul[i * q + j] = a.mul(b).index() as u32;
            add[i * q + j] = a.add(b).index() as u32;
        }
        if i > 0 {
            inv[i] = a.inv().unwrap().index() as u32;
        }
    }
    let neg: Vec<u32> = elems.iter().map(|a| a.neg().index() as u32).collect();

    let mut m: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| {
            debug_assert_eq!(r.len(), ncols);
            r.iter().map(|c| c.index() as u32).collect()
        })
        .collect();
    let nrows = m.len();
    let mut pivots: Vec<(usize, usize)> = vec![];
    let mut row = 0usize;
    for col in 0..ncols {
        let Some(pr) = (row..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let s = inv[m[row][col] as usize];
        if s != 1 {
            for x in m[row].iter_mut() {
                *x = mul[*x as usize * q + s as usize];
            }
        }
        for r in 0..nrows {
            if r != row && m[r][col] != 0 {
                let c = neg[m[r][col] as usize];
                for j in col..ncols {
                    let t = mul[m[row][j] as usize * q + c as usize];
                    m[r][j] = add[m[r][j] as usize * q + t as usize];
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == nrows {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = vec![];
    for fc in 0..ncols {
        if pivot_cols.contains(&fc) {
            continue;
        }
        let mut v = vec![ctx.zero(); ncols];
        v[fc] = ctx.one();
        for &(r, pc) in &pivots {
            let idx = neg[m[r][fc] as usize];
            v[pc] = elems[idx as usize].clone();
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// Lines in P^3
// ---------------------------------------------------------------------------

/// A rational line: two canonical spanning points (the rows of the reduced
/// echelon form of any spanning pair) plus all of its `q + 1` rational
/// points.
#[derive(Clone, Debug)]
pub struct LineInP3 {
    a: ProjPoint,
    b: ProjPoint,
    points: Vec<ProjPoint>,
}

impl LineInP3 {
    pub fn spanning(&self) -> (&ProjPoint, &ProjPoint) {
        (&self.a, &self.b)
    }

    pub fn rational_points(&self) -> &[ProjPoint] {
        &self.points
    }

    /// The map `P^1 -> P^3`, `(s : t) -> s*a + t*b`; `(1:0)` and `(0:1)`
    /// recover the spanning points.
    pub fn parametrize(&self, s: &FqElem, t: &FqElem) -> Result<ProjPoint> {
        let coords: Vec<FqElem> = self
            .a
            .coords()
            .iter()
            .zip(self.b.coords())
            .map(|(x, y)| x.mul(s).add(&y.mul(t)))
            .collect();
        ProjPoint::new(coords)
    }
}

/// Every `F_q`-line of `P^3` exactly once, deterministically ordered by
/// the echelon signature; the count is `(q^2 + 1)(q^2 + q + 1)`.
pub fn lines_in_p3(ctx: &FieldCtx, cfg: &Config) -> Result<Vec<LineInP3>> {
    let pts: Vec<ProjPoint> = enumerate_proj_points(ctx, 3, cfg)?.collect();
    let mut seen = std::collections::BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        for q in pts.iter().skip(i + 1) {
            let rows = rref2(p.coords(), q.coords(), ctx);
            let key: Vec<u64> = rows
                .iter()
                .flat_map(|r| r.iter().map(|c| c.index()))
                .collect();
            seen.entry(key).or_insert(rows);
        }
    }
    let expected = {
        let q = ctx.order() as u128;
        ((q * q + 1) * (q * q + q + 1)) as usize
    };
    assert_eq!(seen.len(), expected, "line count must match the flag count");
    let mut out = vec![];
    for rows in seen.into_values() {
        let a = ProjPoint::new(rows[0].clone())?;
        let b = ProjPoint::new(rows[1].clone())?;
        let mut points = vec![];
        for p in enumerate_proj_points(ctx, 1, cfg)? {
            let (s, t) = (p.coords()[0].clone(), p.coords()[1].clone());
            let coords: Vec<FqElem> = a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| x.mul(&s).add(&y.mul(&t)))
                .collect();
            points.push(ProjPoint::new(coords)?);
        }
        out.push(LineInP3 { a, b, points });
    }
    Ok(out)
}

/// Reduced row echelon form of the 2x4 matrix spanned by two independent
/// points; the canonical signature of their line.
fn rref2(p: &[FqElem], q: &[FqElem], ctx: &FieldCtx) -> Vec<Vec<FqElem>> {
    let mut rows = vec![p.to_vec(), q.to_vec()];
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..4 {
        let Some(pr) = (r..2).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].inv().unwrap();
        rows[r] = rows[r].iter().map(|x| x.mul(&inv)).collect();
        for i in 0..2 {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                rows[i] = rows[i]
                    .iter()
                    .zip(&rows[r])
                    .map(|(x, y)| x.sub(&y.mul(&f)))
                    .collect();
            }
        }
        pivots.push(c);
        r += 1;
        if r == 2 {
            break;
        }
    }
    assert_eq!(r, 2, "spanning points must be independent");
    let _ = (pivots, ctx);
    rows
}

// ---------------------------------------------------------------------------
// The vanishing ideal of the union of lines
// ---------------------------------------------------------------------------

/// Restriction of the monomial with exponents `e` to a line's
/// parametrization: a binary form in `(s, t)` of degree `d`, returned as
/// its `d + 1` coefficients.
fn monomial_on_line(line: &LineInP3, e: &[u16], d: usize, ctx: &FieldCtx) -> Vec<FqElem> {
    let mut acc = vec![ctx.one()];
    for (i, &exp) in e.iter().enumerate() {
        for _ in 0..exp {
            // Multiply by (a_i s + b_i t).
            let a = &line.a.coords()[i];
            let b = &line.b.coords()[i];
            let mut next = vec![ctx.zero(); acc.len() + 1];
            for (j, c) in acc.iter().enumerate() {
                next[j] = next[j].add(&c.mul(a));
                next[j + 1] = next[j + 1].add(&c.mul(b));
            }
            acc = next;
        }
    }
    acc.resize(d + 1, ctx.zero());
    acc
}

/// Basis of `{ f in S_d : f vanishes on every given line }`, via the exact
/// linear system "the restriction to each parametrized line is the zero
/// binary form" (`d + 1` conditions per line).
pub fn ideal_degree_piece(lines: &[LineInP3], d: usize, ctx: &FieldCtx) -> Vec<Form> {
    assert!(d >= 1);
    let mons = monomials(3, d);
    let ncols = mons.len();
    let mut rows: Vec<Vec<FqElem>> = vec![];
    for line in lines {
        let per_mon: Vec<Vec<FqElem>> = mons
            .iter()
            .map(|e| monomial_on_line(line, e, d, ctx))
            .collect();
        for j in 0..=d {
            rows.push(per_mon.iter().map(|v| v[j].clone()).collect());
        }
    }
    kernel_basis(&rows, ncols, ctx)
        .into_iter()
        .map(|v| Form::from_coefficient_vector(ctx, 3, d, &v))
        .collect()
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneVerdict {
    /// The plane's dual covector as a linear form.
    pub plane: String,
    /// `reducible`, `non-reduced`, `reducible+non-reduced`, `irreducible`,
    /// or `vanishes` (the plane lies inside the surface).
    pub verdict: String,
    pub rational_components: usize,
    pub geometric_components: usize,
    pub max_multiplicity: usize,
}

impl PlaneVerdict {
    pub fn is_reducible_or_nonreduced(&self) -> bool {
        self.verdict != "irreducible" && self.verdict != "vanishes"
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IrreducibilityStatus {
    /// A plane over `F_{q^3}` whose restriction is nonzero of full degree,
    /// squarefree, and absolutely irreducible.
    Certified {
        plane: String,
        extension_degree: usize,
        restriction: String,
        attempts: usize,
    },
    Unverified { attempts: usize },
}

/// Replayable record of one anti-Bertini search outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub q: u64,
    pub degree: usize,
    pub form: String,
    pub first_kernel_degree: usize,
    pub kernel_dim: usize,
    pub line_count: usize,
    pub lines_contained: bool,
    pub plane_verdicts: Vec<PlaneVerdict>,
    pub irreducibility: IrreducibilityStatus,
    pub seed: u64,
    pub d_max: usize,
    pub samples_per_degree: usize,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.irreducibility, IrreducibilityStatus::Certified { .. })
    }

    pub fn all_planes_reducible(&self) -> bool {
        self.plane_verdicts
            .iter()
            .all(|v| v.is_reducible_or_nonreduced())
    }
}

/// Restriction of `f` to the plane with dual covector `a`: parametrize the
/// plane by the canonical basis of the covector's kernel and substitute.
pub fn restrict_to_plane(f: &Form, dual: &[FqElem]) -> Form {
    let ctx = dual[0].ctx().clone();
    let pivot = dual
        .iter()
        .position(|c| !c.is_zero())
        .expect("nonzero covector");
    let pinv = dual[pivot].inv().unwrap();
    // Basis vectors of the kernel: e_j - (a_j / a_pivot) e_pivot, j != pivot.
    let mut basis: Vec<Vec<FqElem>> = vec![];
    for j in 0..4 {
        if j == pivot {
            continue;
        }
        let mut v = vec![ctx.zero(); 4];
        v[j] = ctx.one();
        v[pivot] = dual[j].mul(&pinv).neg();
        basis.push(v);
    }
    // subs[i] = row i of the 4x3 parametrization matrix.
    let subs: Vec<Vec<FqElem>> = (0..4)
        .map(|i| basis.iter().map(|v| v[i].clone()).collect())
        .collect();
    f.compose_linear(&subs)
}

fn classify_plane_section(
    f: &Form,
    dual: &[FqElem],
    seed: u64,
    cfg: &Config,
) -> Result<PlaneVerdict> {
    let dual_form = Form::from_coefficient_vector(
        dual[0].ctx(),
        3,
        1,
        &dual.to_vec(),
    );
    let tern = restrict_to_plane(f, dual);
    if tern.is_zero() {
        return Ok(PlaneVerdict {
            plane: dual_form.to_string(),
            verdict: "vanishes".into(),
            rational_components: 0,
            geometric_components: 0,
            max_multiplicity: 0,
        });
    }
    let dec = plane_curve_components(&tern, seed, cfg.max_bivariate_degree)?;
    let reducible = dec.rational_components() >= 2 || dec.geometric_components() >= 2;
    let nonreduced = dec.max_multiplicity() >= 2;
    let verdict = match (reducible, nonreduced) {
        (true, true) => "reducible+non-reduced",
        (true, false) => "reducible",
        (false, true) => "non-reduced",
        (false, false) => "irreducible",
    };
    Ok(PlaneVerdict {
        plane: dual_form.to_string(),
        verdict: verdict.into(),
        rational_components: dec.rational_components(),
        geometric_components: dec.geometric_components(),
        max_multiplicity: dec.max_multiplicity(),
    })
}

/// One-sided restriction test over `F_{q^3}`: returns the certification
/// transcript entry if the plane with the given dual covector certifies
/// `f` absolutely irreducible.
fn try_certify_on_plane(
    f_ext: &Form,
    dual: &[FqElem],
    seed: u64,
    cfg: &Config,
) -> Result<Option<(String, String)>> {
    let tern = restrict_to_plane(f_ext, dual);
    if tern.is_zero() {
        return Ok(None);
    }
    debug_assert_eq!(tern.degree(), f_ext.degree());
    let dec = plane_curve_components(&tern, seed, cfg.max_bivariate_degree)?;
    if dec.is_squarefree()
        && dec.geometric_components() == 1
        && dec.reduced_degree() == f_ext.degree()
    {
        let dual_form = Form::from_coefficient_vector(dual[0].ctx(), 3, 1, &dual.to_vec());
        Ok(Some((dual_form.to_string(), tern.to_string())))
    } else {
        Ok(None)
    }
}

/// Search for a geometrically irreducible surface containing every
/// rational line, with every rational plane section reducible.
///
/// Ascends through the degrees with a nonzero vanishing-ideal piece,
/// samples kernel elements, and returns the first fully certified sample;
/// if none certifies within the budgets, the best sample satisfying the
/// plane-section criterion is returned with `unverified` status.
pub fn find_antibertini_surface(
    ctx: &FieldCtx,
    d_max: usize,
    samples_per_degree: usize,
    seed: u64,
    cfg: &Config,
) -> Result<Certificate> {
    let lines = lines_in_p3(ctx, cfg)?;
    let planes: Vec<Vec<FqElem>> = enumerate_proj_points(ctx, 3, cfg)?
        .map(|p| p.coords().to_vec())
        .collect();
    let ext = FieldCtx::internal(ctx.p(), ctx.k() * 3)?;
    let mut first_kernel: Option<usize> = None;
    let mut best_unverified: Option<Certificate> = None;
    for d in 1..=d_max {
        let basis = ideal_degree_piece(&lines, d, ctx);
        if basis.is_empty() {
            continue;
        }
        if first_kernel.is_none() {
            first_kernel = Some(d);
        }
        let kernel_dim = basis.len();
        for sample_idx in 0..samples_per_degree {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, (d as u64) << 32 | sample_idx as u64));
            let f = loop {
                let mut acc = Form::zero(ctx, 3, d);
                for b in &basis {
                    acc = acc.add(&b.mul_scalar(&ctx.random(&mut rng)));
                }
                if !acc.is_zero() {
                    break acc;
                }
            };
            // (i) Containment of every line, replayed even though it holds
            // by construction.
            let contained = lines.iter().all(|line| {
                line.rational_points()
                    .iter()
                    .all(|p| f.evaluate(p).map(|v| v.is_zero()).unwrap_or(false))
                    && restriction_is_zero(&f, line, ctx)
            });
            assert!(contained, "kernel elements vanish on every line");
            // (ii) Every rational plane section reducible or non-reduced.
            let mut verdicts = vec![];
            for (pi, dual) in planes.iter().enumerate() {
                verdicts.push(classify_plane_section(
                    &f,
                    dual,
                    derive_seed(seed, pi as u64),
                    cfg,
                )?);
            }
            let pass_planes = verdicts.iter().all(|v| v.is_reducible_or_nonreduced());
            if !pass_planes {
                continue;
            }
            // (iii) Certification by restriction to random planes over
            // F_{q^3}.
            let f_ext = f.embed_to(&ext)?;
            let mut certified = None;
            let mut attempts = 0usize;
            while attempts < cfg.restriction_plane_budget {
                attempts += 1;
                let dual: Vec<FqElem> = loop {
                    let v: Vec<FqElem> = (0..4).map(|_| ext.random(&mut rng)).collect();
                    if !v.iter().all(|c| c.is_zero()) {
                        break v;
                    }
                };
                if let Some((plane, restriction)) =
                    try_certify_on_plane(&f_ext, &dual, derive_seed(seed, attempts as u64), cfg)?
                {
                    certified = Some((plane, restriction, attempts));
                    break;
                }
            }
            let cert = Certificate {
                q: ctx.order(),
                degree: d,
                form: f.to_string(),
                first_kernel_degree: first_kernel.unwrap(),
                kernel_dim,
                line_count: lines.len(),
                lines_contained: true,
                plane_verdicts: verdicts,
                irreducibility: match &certified {
                    Some((plane, restriction, attempts)) => IrreducibilityStatus::Certified {
                        plane: plane.clone(),
                        extension_degree: 3,
                        restriction: restriction.clone(),
                        attempts: *attempts,
                    },
                    None => IrreducibilityStatus::Unverified {
                        attempts: cfg.restriction_plane_budget,
                    },
                },
                seed,
                d_max,
                samples_per_degree,
            };
            if certified.is_some() {
                return Ok(cert);
            }
            if best_unverified.is_none() {
                best_unverified = Some(cert);
            }
        }
    }
    match (first_kernel, best_unverified) {
        (None, _) => Err(Error::NoKernel { d_max }),
        (_, Some(cert)) => Ok(cert),
        (Some(_), None) => Err(Error::NotFound(
            "no sample satisfied the plane-section criterion".into(),
        )),
    }
}

/// Exact zero test of the restriction of `f` to a line (all `d + 1` binary
/// coefficients vanish), not just at rational points.
fn restriction_is_zero(f: &Form, line: &LineInP3, ctx: &FieldCtx) -> bool {
    let d = f.degree();
    let mut coeffs = vec![ctx.zero(); d + 1];
    for (e, c) in f.terms() {
        let mon = monomial_on_line(line, e, d, ctx);
        for (acc, m) in coeffs.iter_mut().zip(mon) {
            *acc = acc.add(&c.mul(&m));
        }
    }
    coeffs.iter().all(|c| c.is_zero())
}

/// Replay every claim in a certificate; the returned list names the checks
/// that were verified, erroring out on the first mismatch.
pub fn verify_certificate(cert: &Certificate, cfg: &Config) -> Result<Vec<String>> {
    let (p, k) = factor_prime_power(cert.q)
        .ok_or_else(|| Error::Invalid(format!("{} is not a prime power", cert.q)))?;
    let ctx = FieldCtx::with_bound(p, k, cfg.max_field_order)?;
    let f = crate::forms::parse_form(&cert.form, 3, &ctx)?;
    if f.degree() != cert.degree {
        return Err(Error::Invalid("certificate degree mismatch".into()));
    }
    let mut passed = vec![];
    let lines = lines_in_p3(&ctx, cfg)?;
    if lines.len() != cert.line_count {
        return Err(Error::Invalid("line count mismatch".into()));
    }
    passed.push(format!("line-count={}", lines.len()));
    for line in &lines {
        if !restriction_is_zero(&f, line, &ctx) {
            return Err(Error::Invalid(format!(
                "form does not vanish on line through {} and {}",
                line.a, line.b
            )));
        }
    }
    passed.push("contains-all-lines".into());
    // Plane verdicts replay.
    if cert.plane_verdicts.len() != enumerate_proj_points(&ctx, 3, cfg)?.count() {
        return Err(Error::Invalid("plane verdict count mismatch".into()));
    }
    for (pi, v) in cert.plane_verdicts.iter().enumerate() {
        let dual_form = crate::forms::parse_form(&v.plane, 3, &ctx)?;
        let dual: Vec<FqElem> = dual_form.coefficient_vector();
        let replay = classify_plane_section(&f, &dual, derive_seed(cert.seed, pi as u64), cfg)?;
        if replay.verdict != v.verdict
            || replay.rational_components != v.rational_components
            || replay.geometric_components != v.geometric_components
            || replay.max_multiplicity != v.max_multiplicity
        {
            return Err(Error::Invalid(format!(
                "plane {} verdict mismatch: stored {}, replayed {}",
                v.plane, v.verdict, replay.verdict
            )));
        }
    }
    passed.push(format!("plane-verdicts={}", cert.plane_verdicts.len()));
    if let IrreducibilityStatus::Certified {
        plane,
        extension_degree,
        restriction,
        ..
    } = &cert.irreducibility
    {
        let ext = FieldCtx::internal(ctx.p(), ctx.k() * extension_degree)?;
        let dual_form = crate::forms::parse_form(plane, 3, &ext)?;
        let dual = dual_form.coefficient_vector();
        let f_ext = f.embed_to(&ext)?;
        let tern = restrict_to_plane(&f_ext, &dual);
        if tern.to_string() != *restriction {
            return Err(Error::Invalid("stored restriction mismatch".into()));
        }
        let dec = plane_curve_components(&tern, 0, cfg.max_bivariate_degree)?;
        if !(dec.is_squarefree()
            && dec.geometric_components() == 1
            && dec.reduced_degree() == f.degree())
        {
            return Err(Error::Invalid(
                "certified restriction fails the irreducibility replay".into(),
            ));
        }
        passed.push("irreducibility-certificate".into());
    }
    Ok(passed)
}

// ---------------------------------------------------------------------------
// Sections through a finite point set
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ThroughPointsResult {
    pub d: usize,
    #[serde(skip)]
    pub form: Form,
    pub form_text: String,
    /// (degree, kernel dimension, samples tried) per degree visited.
    pub attempts: Vec<(usize, usize, usize)>,
}

/// Find a geometrically irreducible hypersurface section of `X` through
/// every point of `points`, ascending in degree. `X` is `P^2` or an
/// irreducible surface in `P^3`.
pub fn section_through_set(
    x: &VarietySpec,
    points: &[ClosedPoint],
    d_max: usize,
    samples_per_degree: usize,
    seed: u64,
    cfg: &Config,
) -> Result<ThroughPointsResult> {
    match (x.n(), x.kind()) {
        (2, VarietyKind::FullSpace) => {}
        (3, VarietyKind::Hypersurface) => {
            if !irreducible_by_trial_division(&x.forms()[0], cfg)? {
                return Err(Error::NotIrreducible(format!("{}", x.forms()[0])));
            }
        }
        _ => {
            return Err(Error::Invalid(
                "sections through points need X = P^2 or an irreducible surface in P^3".into(),
            ))
        }
    }
    for p in points {
        if p.base() != x.base() {
            return Err(Error::FieldMismatch);
        }
        if !x.contains(p.representative())? {
            return Err(Error::PointNotOnVariety {
                point: p.representative().to_string(),
            });
        }
    }
    let base = x.base().clone();
    let stat = Statistic::new(StatisticKind::GeomIrreducibleSection, x.clone())?;
    let mut attempts = vec![];
    let mut saw_kernel = false;
    for d in 1..=d_max {
        let rows = point_condition_rows(points, x.n(), d, &base)?;
        let basis = kernel_basis(&rows, dim_s_d(x.n(), d) as usize, &base)
            .into_iter()
            .map(|v| Form::from_coefficient_vector(&base, x.n(), d, &v))
            .collect::<Vec<_>>();
        if basis.is_empty() {
            attempts.push((d, 0, 0));
            continue;
        }
        saw_kernel = true;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, d as u64));
        let mut tried = 0usize;
        while tried < samples_per_degree {
            tried += 1;
            let f = {
                let mut acc = Form::zero(&base, x.n(), d);
                for b in &basis {
                    acc = acc.add(&b.mul_scalar(&base.random(&mut rng)));
                }
                acc
            };
            if f.is_zero() {
                continue;
            }
            // Replay the vanishing conditions exactly.
            for p in points {
                assert!(
                    f.evaluate(p.representative())?.is_zero(),
                    "kernel element must vanish at the prescribed points"
                );
            }
            if eval_statistic(&stat, &f, derive_seed(seed, tried as u64), cfg)? {
                attempts.push((d, basis.len(), tried));
                return Ok(ThroughPointsResult {
                    d,
                    form_text: f.to_string(),
                    form: f,
                    attempts,
                });
            }
        }
        attempts.push((d, basis.len(), tried));
    }
    if !saw_kernel {
        return Err(Error::NoKernel { d_max });
    }
    Err(Error::NotFound(format!(
        "no irreducible section through {} points up to degree {} (attempts: {:?})",
        points.len(),
        d_max,
        attempts
    )))
}

/// The linear conditions "f vanishes at P" for each closed point, spread
/// over the base field: a point of degree `e` contributes `e` rows,
/// obtained by expanding each monomial value in the basis
/// `1, t, ..., t^(e-1)` of `F_{q^e}` over `F_q`.
fn point_condition_rows(
    points: &[ClosedPoint],
    n: usize,
    d: usize,
    base: &FieldCtx,
) -> Result<Vec<Vec<FqElem>>> {
    let mons = monomials(n, d);
    let mut rows = vec![];
    for pt in points {
        let e = pt.degree();
        let rep = pt.representative();
        let ext = rep.ctx().clone();
        debug_assert_eq!(ext.k(), base.k() * e);
        if e == 1 {
            // Rational point: one row over the base after pulling back.
            let emb = embedding(base, &ext)?;
            let row: Vec<FqElem> = mons
                .iter()
                .map(|m| {
                    let mut acc = ext.one();
                    for (c, &exp) in rep.coords().iter().zip(m.iter()) {
                        if exp > 0 {
                            acc = acc.mul(&c.pow(exp as u128));
                        }
                    }
                    emb.pull_back(&acc).expect("degree-1 point has base values")
                })
                .collect();
            rows.push(row);
            continue;
        }
        let expand = FqBasisExpansion::new(base, &ext)?;
        let mut point_rows = vec![vec![base.zero(); mons.len()]; e];
        for (mi, m) in mons.iter().enumerate() {
            let mut acc = ext.one();
            for (c, &exp) in rep.coords().iter().zip(m.iter()) {
                if exp > 0 {
                    acc = acc.mul(&c.pow(exp as u128));
                }
            }
            let coords = expand.expand(&acc);
            for (j, v) in coords.into_iter().enumerate() {
                point_rows[j][mi] = v;
            }
        }
        rows.extend(point_rows);
    }
    Ok(rows)
}

/// Expansion of `F_{q^e}` in the `F_q`-basis `1, t, ..., t^(e-1)` (`t` the
/// generator of the extension over the prime field; it has degree `e` over
/// `F_q`, so the powers are a basis). Solved at the prime-field level.
struct FqBasisExpansion {
    base: FieldCtx,
    e: usize,
    k: usize,
    /// Row-reduced inverse data of the (ke x ke) F_p-matrix whose columns
    /// are digits of iota(b_l) * t^j.
    solve: Vec<Vec<u64>>,
    p: u64,
}

impl FqBasisExpansion {
    fn new(base: &FieldCtx, ext: &FieldCtx) -> Result<FqBasisExpansion> {
        let k = base.k();
        let e = ext.k() / k;
        let p = base.p();
        let emb = embedding(base, ext)?;
        let dim = k * e;
        // Column (j*k + l): digits of t^j * iota(p^l-th base element).
        let t = ext.gen();
        let mut cols: Vec<Vec<u64>> = vec![];
        let mut tj = ext.one();
        for _ in 0..e {
            for l in 0..k {
                let b = base.from_index(pow_u64(p, l));
                let v = tj.mul(&emb.apply(&b));
                cols.push(v.digits().to_vec());
            }
            tj = tj.mul(&t);
        }
        // Invert by Gauss-Jordan over F_p: reduced [M | I].
        let mut m: Vec<Vec<u64>> = (0..dim)
            .map(|r| {
                let mut row: Vec<u64> = (0..dim).map(|c| cols[c][r]).collect();
                row.extend((0..dim).map(|j| u64::from(j == r)));
                row
            })
            .collect();
        for col in 0..dim {
            let pr = (col..dim)
                .find(|&r| m[r][col] != 0)
                .expect("basis matrix is invertible");
            m.swap(col, pr);
            let inv = mod_inv(m[col][col], p);
            for x in m[col].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..dim {
                if r != col && m[r][col] != 0 {
                    let c = m[r][col];
                    for j in 0..2 * dim {
                        let sub = m[col][j] * c % p;
                        m[r][j] = (m[r][j] + p - sub) % p;
                    }
                }
            }
        }
        let solve = m.into_iter().map(|row| row[dim..].to_vec()).collect();
        Ok(FqBasisExpansion {
            base: base.clone(),
            e,
            k,
            solve,
            p,
        })
    }

    /// Coefficients `a_0..a_{e-1}` in `F_q` with `y = sum iota(a_j) t^j`.
    fn expand(&self, y: &FqElem) -> Vec<FqElem> {
        let dim = self.k * self.e;
        let digits = y.digits();
        let x: Vec<u64> = (0..dim)
            .map(|r| {
                let mut acc = 0u64;
                for (c, &d) in digits.iter().enumerate() {
                    acc = (acc + self.solve[r][c] * d) % self.p;
                }
                acc
            })
            .collect();
        (0..self.e)
            .map(|j| {
                let mut v = 0u64;
                for l in (0..self.k).rev() {
                    v = v * self.p + x[j * self.k + l];
                }
                self.base.from_index(v)
            })
            .collect()
    }
}

fn pow_u64(p: u64, l: usize) -> u64 {
    let mut acc = 1u64;
    for _ in 0..l {
        acc *= p;
    }
    acc
}

fn mod_inv(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    fn f2() -> FieldCtx {
        FieldCtx::new(2, 1).unwrap()
    }

    #[test]
    fn line_counts_match_the_flag_formula() {
        let cfg = Config::default();
        let lines = lines_in_p3(&f2(), &cfg).unwrap();
        assert_eq!(lines.len(), 35);
        for line in &lines {
            assert_eq!(line.rational_points().len(), 3);
            // Parametrization recovers the spanning points.
            let ctx = f2();
            let at10 = line.parametrize(&ctx.one(), &ctx.zero()).unwrap();
            let at01 = line.parametrize(&ctx.zero(), &ctx.one()).unwrap();
            assert_eq!(&at10, line.spanning().0);
            assert_eq!(&at01, line.spanning().1);
        }
        let f3 = FieldCtx::new(3, 1).unwrap();
        let lines = lines_in_p3(&f3, &cfg).unwrap();
        assert_eq!(lines.len(), 130);
        for line in &lines {
            assert_eq!(line.rational_points().len(), 4);
        }
    }

    #[test]
    fn lines_cross_checked_by_pair_counting() {
        // Each line carries C(q+1, 2) unordered point pairs and every pair
        // spans exactly one line.
        let cfg = Config::default();
        for (p, expected) in [(2u64, 35usize), (3, 130)] {
            let ctx = FieldCtx::new(p, 1).unwrap();
            let npts = (p.pow(4) - 1) / (p - 1);
            let pairs = npts * (npts - 1) / 2;
            let per_line = (p + 1) * p / 2;
            assert_eq!(pairs / per_line, expected as u64);
            assert_eq!(lines_in_p3(&ctx, &cfg).unwrap().len(), expected);
        }
    }

    #[test]
    fn no_plane_contains_all_lines() {
        let ctx = f2();
        let cfg = Config::default();
        let lines = lines_in_p3(&ctx, &cfg).unwrap();
        let basis = ideal_degree_piece(&lines, 1, &ctx);
        assert!(basis.is_empty());
        // Degrees below 7 cannot work either: a plane section of degree
        // less than 7 cannot contain the 7 lines of that plane.
        for d in 2..=4usize {
            assert!(ideal_degree_piece(&lines, d, &ctx).is_empty(), "d={}", d);
        }
    }

    #[test]
    fn kernel_elements_vanish_on_lines_exactly() {
        let ctx = f2();
        let cfg = Config::default();
        let lines = lines_in_p3(&ctx, &cfg).unwrap();
        // Find the first degree with a nonzero kernel and check the
        // defining property of a few basis elements.
        for d in 5..=16usize {
            let basis = ideal_degree_piece(&lines, d, &ctx);
            if basis.is_empty() {
                continue;
            }
            for b in basis.iter().take(3) {
                for line in &lines {
                    assert!(restriction_is_zero(b, line, &ctx));
                }
            }
            // Multiplication by x0 embeds the kernel into the next degree.
            let next = ideal_degree_piece(&lines, d + 1, &ctx);
            assert!(next.len() >= basis.len());
            return;
        }
        panic!("no kernel found through degree 16");
    }

    #[test]
    fn through_points_examples() {
        let cfg = Config::default();
        let ctx = f2();
        let p2 = VarietySpec::full_space(&ctx, 2);

        // Empty point set: a line works at degree 1.
        let res = section_through_set(&p2, &[], 4, 10, 0, &cfg).unwrap();
        assert_eq!(res.d, 1);

        // Through (1:0:0).
        let pt = ClosedPoint::new(
            ProjPoint::new(vec![ctx.one(), ctx.zero(), ctx.zero()]).unwrap(),
            &ctx,
        )
        .unwrap();
        let res = section_through_set(&p2, &[pt.clone()], 4, 20, 0, &cfg).unwrap();
        assert!(res.form.evaluate(pt.representative()).unwrap().is_zero());
        let dec = plane_curve_components(&res.form, 0, cfg.max_bivariate_degree).unwrap();
        assert_eq!(dec.geometric_components(), 1);

        // A point off the variety is rejected.
        let quad = VarietySpec::hypersurface(parse_form("x0*x3 + x1*x2", 3, &ctx).unwrap())
            .unwrap();
        let off = ClosedPoint::new(
            ProjPoint::new(vec![ctx.one(), ctx.zero(), ctx.zero(), ctx.one()]).unwrap(),
            &ctx,
        )
        .unwrap();
        assert!(matches!(
            section_through_set(&quad, &[off], 3, 5, 0, &cfg),
            Err(Error::PointNotOnVariety { .. })
        ));
    }

    #[test]
    fn through_higher_degree_point() {
        // A degree-2 closed point on P^2 imposes two conditions; the found
        // section must vanish on the whole orbit.
        let cfg = Config::default();
        let ctx = f2();
        let p2 = VarietySpec::full_space(&ctx, 2);
        let conj = parse_form("x0^2 + x0*x1 + x1^2", 2, &ctx).unwrap();
        let v = VarietySpec::hypersurface(conj).unwrap();
        let pts = crate::geom::closed_points(&v, 2, &cfg).unwrap();
        let quad_pt = pts.into_iter().find(|p| p.degree() == 2).unwrap();
        let res = section_through_set(&p2, &[quad_pt.clone()], 4, 20, 1, &cfg).unwrap();
        assert!(res
            .form
            .evaluate(quad_pt.representative())
            .unwrap()
            .is_zero());
        // Conjugate point too (the form has base-field coefficients).
        let sigma = quad_pt.representative().power_map(2);
        assert!(res.form.evaluate(&sigma).unwrap().is_zero());
    }

    #[test]
    fn basis_expansion_roundtrip() {
        let base = f2();
        let ext = FieldCtx::new(2, 3).unwrap();
        let exp = FqBasisExpansion::new(&base, &ext).unwrap();
        let emb = embedding(&base, &ext).unwrap();
        let t = ext.gen();
        for y in ext.elems() {
            let coords = exp.expand(&y);
            assert_eq!(coords.len(), 3);
            let mut acc = ext.zero();
            let mut tj = ext.one();
            for a in &coords {
                acc = acc.add(&emb.apply(a).mul(&tj));
                tj = tj.mul(&t);
            }
            assert_eq!(acc, y);
        }
    }

    #[test]
    fn prime_power_factoring() {
        assert_eq!(factor_prime_power(2), Some((2, 1)));
        assert_eq!(factor_prime_power(9), Some((3, 2)));
        assert_eq!(factor_prime_power(12), None);
    }
}
