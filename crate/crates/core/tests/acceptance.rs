//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them).
//!
//! The factorization criteria are checked against a brute-force oracle that
//! lives entirely in this file: trial division by exhaustively enumerated
//! lower-degree candidate factors, over the base field and over the
//! extensions where conjugate factors live. It never touches the lifting
//! machinery it cross-checks.

use std::time::Instant;

use num::bigint::BigInt;
use num::rational::BigRational;

use bertini_core::antibertini::{
    find_antibertini_surface, ideal_degree_piece, lines_in_p3, restrict_to_plane,
    verify_certificate, IrreducibilityStatus,
};
use bertini_core::density::{
    eval_statistic, product_over_set, sample_mc, sweep_exhaustive, truncated_zeta_product,
    wilson_interval, Statistic, StatisticKind, WILSON_Z_99,
};
use bertini_core::factor2::plane_curve_components;
use bertini_core::forms::{dim_s_d, parse_form, Form, ProjPoint};
use bertini_core::geom::{
    closed_points, count_points, enumerate_proj_points, nth_projective_rep,
    projective_class_count, space_curve_components, ClosedPoint, VarietySpec,
};
use bertini_core::gf::{FieldCtx, FqElem};
use bertini_core::Config;

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn f2() -> FieldCtx {
    FieldCtx::new(2, 1).unwrap()
}

fn rational_point(ctx: &FieldCtx, coords: &[u64]) -> ClosedPoint {
    let p = ProjPoint::new(coords.iter().map(|&c| ctx.from_int(c)).collect()).unwrap();
    ClosedPoint::new(p, ctx).unwrap()
}

/// Brute-force decomposition oracle: exhaustive trial division.
mod oracle {
    use super::*;

    fn normalize(f: &Form) -> Form {
        let c = f.terms().next_back().map(|(_, c)| c.clone()).unwrap();
        if c.is_one() {
            f.clone()
        } else {
            f.mul_scalar(&c.inv().unwrap())
        }
    }

    /// All projective-representative forms of degree `e` in `P^n`.
    pub fn candidates(ctx: &FieldCtx, n: usize, e: usize) -> Vec<Form> {
        let len = dim_s_d(n, e) as usize;
        let classes = projective_class_count(len, ctx.order()) as u64;
        (0..classes)
            .map(|idx| Form::from_coefficient_vector(ctx, n, e, &nth_projective_rep(idx, len, ctx)))
            .collect()
    }

    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
    pub struct OracleRecord {
        /// Degree of the F_q-irreducible factor.
        pub fq_degree: usize,
        pub multiplicity: usize,
        /// Number of absolutely irreducible factors it splits into.
        pub orbit: usize,
    }

    /// Absolute orbit size of an F_q-irreducible ternary form of degree at
    /// most 4, by trial division over the extension where conjugate factors
    /// would live. For degree D the orbit size divides D; a split into
    /// degree-(D/m) conjugates over F_{q^m} is found by enumerating all
    /// candidate factors of that degree.
    fn orbit_size(phi: &Form) -> usize {
        let d = phi.degree();
        if d == 1 {
            return 1;
        }
        assert!(d <= 4, "oracle covers degrees up to 4");
        let base = phi.ctx().clone();
        // m = D: linear conjugates over F_{q^D}. (For D = 4 an m = 2 split
        // has only quadratic factors over any field, so a linear factor
        // over F_{q^4} pins m = 4 exactly.)
        let top = FieldCtx::with_bound(base.p(), base.k() * d, u64::MAX >> 1).unwrap();
        let phi_top = phi.embed_to(&top).unwrap();
        if candidates(&top, 2, 1).iter().any(|c| c.divides(&phi_top)) {
            return d;
        }
        if d == 4 {
            let mid = FieldCtx::with_bound(base.p(), base.k() * 2, u64::MAX >> 1).unwrap();
            let phi_mid = phi.embed_to(&mid).unwrap();
            if candidates(&mid, 2, 2).iter().any(|c| c.divides(&phi_mid)) {
                return 2;
            }
        }
        1
    }

    /// Full decomposition by smallest-degree trial division, then per-factor
    /// orbit sizes.
    pub fn decompose(f: &Form) -> Vec<OracleRecord> {
        let ctx = f.ctx().clone();
        let mut work = normalize(f);
        let mut factors: Vec<(Form, usize)> = vec![];
        'outer: while work.degree() > 0 {
            let d = work.degree();
            for e in 1..=d / 2 {
                for c in candidates(&ctx, 2, e) {
                    if c.divides(&work) {
                        work = normalize(&work.div_exact(&c).unwrap());
                        let c = normalize(&c);
                        match factors.iter_mut().find(|(g, _)| *g == c) {
                            Some((_, m)) => *m += 1,
                            None => factors.push((c, 1)),
                        }
                        continue 'outer;
                    }
                }
            }
            // No proper factor: irreducible.
            let c = normalize(&work);
            match factors.iter_mut().find(|(g, _)| *g == c) {
                Some((_, m)) => *m += 1,
                None => factors.push((c, 1)),
            }
            break;
        }
        let mut out: Vec<OracleRecord> = factors
            .into_iter()
            .map(|(phi, multiplicity)| OracleRecord {
                fq_degree: phi.degree(),
                multiplicity,
                orbit: orbit_size(&phi),
            })
            .collect();
        out.sort();
        out
    }

    pub fn geometric_components(f: &Form) -> usize {
        decompose(f).iter().map(|r| r.orbit).sum()
    }
}

fn records_as_multiset(dec: &bertini_core::factor2::Decomposition) -> Vec<oracle::OracleRecord> {
    let mut out: Vec<oracle::OracleRecord> = dec
        .records()
        .iter()
        .map(|r| oracle::OracleRecord {
            fq_degree: r.field_degree * r.factor.degree(),
            multiplicity: r.multiplicity,
            orbit: r.field_degree,
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_1_exact_density_of_vanishing_at_a_rational_point() {
    let start = Instant::now();
    let mut cfg = Config::default();
    // q = 3, d = 4 sweeps 7,174,453 classes; raise the sweep bound (the
    // bound is configuration, the default favors interactive use).
    cfg.max_sweep_classes = 1 << 23;
    for q in [2u64, 3] {
        let ctx = FieldCtx::new(q, 1).unwrap();
        let stat = Statistic::new(
            StatisticKind::VanishesAtSet(vec![rational_point(&ctx, &[1, 0, 0])]),
            VarietySpec::full_space(&ctx, 2),
        )
        .unwrap();
        for d in 1..=4usize {
            let rep = sweep_exhaustive(&stat, d, 0, &cfg).unwrap();
            assert_eq!(
                rep.density.unwrap(),
                rational(1, q as i64),
                "q={} d={}",
                q,
                d
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "budget exceeded: {:?}", elapsed);
    println!(
        "acceptance criterion 1 (exact density 1/q at a rational point): PASS — q=2,3 x d=1..4 in {:?}",
        elapsed
    );
}

#[test]
fn criterion_2_product_formula_for_two_rational_points() {
    let cfg = Config::default();
    let ctx = f2();
    let points = vec![
        rational_point(&ctx, &[1, 0, 0]),
        rational_point(&ctx, &[0, 1, 0]),
    ];
    let expected = product_over_set(&points);
    assert_eq!(expected, rational(1, 4));
    let stat = Statistic::new(
        StatisticKind::VanishesAtSet(points),
        VarietySpec::full_space(&ctx, 2),
    )
    .unwrap();
    for d in 1..=3usize {
        let rep = sweep_exhaustive(&stat, d, 0, &cfg).unwrap();
        assert_eq!(rep.density.unwrap(), expected, "d={}", d);
    }
    println!(
        "acceptance criterion 2 (product formula, two rational points): PASS — density = 1/4 at d=1..3"
    );
}

#[test]
fn criterion_3_truncated_zeta_values_with_orbit_oracle() {
    let cfg = Config::default();
    let ctx = f2();
    let line = VarietySpec::hypersurface(parse_form("x2", 2, &ctx).unwrap()).unwrap();

    // Exact truncation values.
    assert_eq!(truncated_zeta_product(&line, 1, &cfg).unwrap(), rational(1, 1));
    assert_eq!(truncated_zeta_product(&line, 2, &cfg).unwrap(), rational(1, 8));
    assert_eq!(
        truncated_zeta_product(&line, 3, &cfg).unwrap(),
        rational(3, 32)
    );

    // Independent orbit-enumeration oracle: closed-point counts by degree
    // from direct point counts and Moebius inversion.
    let pts = closed_points(&line, 5, &cfg).unwrap();
    let mut by_degree = vec![0usize; 6];
    for p in &pts {
        by_degree[p.degree()] += 1;
    }
    fn moebius(mut n: usize) -> i64 {
        let mut res = 1i64;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                n /= d;
                if n % d == 0 {
                    return 0;
                }
                res = -res;
            }
            d += 1;
        }
        if n > 1 {
            -res
        } else {
            res
        }
    }
    for e in 1..=5usize {
        let mut acc = 0i64;
        for div in 1..=e {
            if e % div == 0 {
                acc += moebius(e / div) * count_points(&line, div, &cfg).unwrap() as i64;
            }
        }
        let expected = acc / e as i64;
        assert_eq!(by_degree[e] as i64, expected, "closed points of degree {}", e);
    }
    // Recompute the zeta truncations from the oracle counts.
    for r in 1..=6usize {
        let mut value = rational(1, 1);
        for e in 1..r {
            let qe = BigInt::from(2i64).pow(e as u32);
            let factor = BigRational::new(qe.clone() - 1, qe);
            for _ in 0..by_degree.get(e).copied().unwrap_or(0) {
                value *= factor.clone();
            }
        }
        assert_eq!(truncated_zeta_product(&line, r, &cfg).unwrap(), value, "r={}", r);
    }
    // Divergence-to-zero trend at desk scale: strictly decreasing through 6.
    let mut prev = rational(2, 1);
    for r in 1..=6usize {
        let v = truncated_zeta_product(&line, r, &cfg).unwrap();
        assert!(v < prev, "strictly decreasing failed at r={}", r);
        prev = v;
    }
    println!(
        "acceptance criterion 3 (truncated zeta 1, 1/8, 3/32 + orbit oracle + decreasing to r=6): PASS"
    );
}

#[test]
fn criterion_4_factorization_oracle_equivalence() {
    let start = Instant::now();
    let cfg = Config::default();
    let ctx = f2();
    let mut checked = 0usize;
    // Exhaustive over every projective class of degree 1..3.
    for d in 1..=3usize {
        let len = dim_s_d(2, d) as usize;
        let classes = projective_class_count(len, 2) as u64;
        for idx in 0..classes {
            let f = Form::from_coefficient_vector(&ctx, 2, d, &nth_projective_rep(idx, len, &ctx));
            let dec = plane_curve_components(&f, idx, cfg.max_bivariate_degree).unwrap();
            let main = records_as_multiset(&dec);
            let truth = oracle::decompose(&f);
            assert_eq!(main, truth, "d={} idx={} f={}", d, idx, f);
            checked += 1;
        }
    }
    // 200 seeded random degree-4 forms.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(424);
    let len = dim_s_d(2, 4) as usize;
    let mut done = 0;
    while done < 200 {
        let coeffs: Vec<FqElem> = (0..len)
            .map(|_| ctx.from_index(rng.gen_range(0..2)))
            .collect();
        let f = Form::from_coefficient_vector(&ctx, 2, 4, &coeffs);
        if f.is_zero() {
            continue;
        }
        let dec = plane_curve_components(&f, done as u64, cfg.max_bivariate_degree).unwrap();
        assert_eq!(
            records_as_multiset(&dec),
            oracle::decompose(&f),
            "random quartic {}: f={}",
            done,
            f
        );
        done += 1;
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "budget exceeded: {:?}", elapsed);
    println!(
        "acceptance criterion 4 (factorization oracle equivalence): PASS — {} forms, zero discrepancies, {:?}",
        checked, elapsed
    );
}

#[test]
fn criterion_5_geometric_irreducibility_density_trend() {
    let cfg = Config::default();
    let ctx = f2();
    let stat = Statistic::new(
        StatisticKind::GeomIrreducibleSection,
        VarietySpec::full_space(&ctx, 2),
    )
    .unwrap();

    let mut densities = vec![];
    for d in 2..=4usize {
        let rep = sweep_exhaustive(&stat, d, 0, &cfg).unwrap();
        densities.push((d, rep.density.clone().unwrap(), rep.successes, rep.trials));
    }

    // (i) Exhaustive counts match the oracle at d <= 3.
    for d in 2..=3usize {
        let len = dim_s_d(2, d) as usize;
        let classes = projective_class_count(len, 2) as u64;
        let mut oracle_successes = 0u64;
        for idx in 0..classes {
            let f = Form::from_coefficient_vector(&ctx, 2, d, &nth_projective_rep(idx, len, &ctx));
            if oracle::geometric_components(&f) == 1 {
                oracle_successes += 1;
            }
        }
        let (_, _, successes, _) = densities[d - 2];
        assert_eq!(successes, oracle_successes, "oracle count mismatch at d={}", d);
    }

    // (ii) Monte Carlo intervals (2000 trials, 10 seeds) cover the
    // exhaustive value; per the library invariant this is checked with the
    // 99% Wilson interval and at least 9 of 10 seeds covering.
    for (d, density, _, _) in &densities {
        let exact = num::ToPrimitive::to_f64(density).unwrap();
        let mut covered = 0;
        for seed in 0..10u64 {
            let rep = sample_mc(&stat, *d, 2000, seed, &cfg).unwrap();
            let (lo, hi) = wilson_interval(rep.successes, rep.trials, WILSON_Z_99);
            if lo <= exact && exact <= hi {
                covered += 1;
            }
        }
        assert!(covered >= 9, "d={} covered only {}/10", d, covered);
    }

    // (iii) The density trend is non-decreasing from d = 2 to d = 4.
    assert!(
        densities[2].1 >= densities[0].1,
        "density(d=4) = {} < density(d=2) = {}",
        densities[2].1,
        densities[0].1
    );
    println!(
        "acceptance criterion 5 (geometric irreducibility trend on P^2/F_2): PASS — densities {:?}",
        densities
            .iter()
            .map(|(d, v, s, t)| format!("d={}: {}/{} = {}", d, s, t, v))
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_6_space_curve_decomposition_and_point_identity() {
    let cfg = Config::default();
    let ctx = f2();
    let quad = parse_form("x0*x3 + x1*x2", 3, &ctx).unwrap();

    // Identical counts across 5 seeds.
    for seed in 0..5u64 {
        let dec = space_curve_components(&quad, &parse_form("x0", 3, &ctx).unwrap(), seed, &cfg)
            .unwrap();
        assert_eq!(dec.geometric_components(), 2, "f=x0 seed={}", seed);
        let dec = space_curve_components(
            &quad,
            &parse_form("x0 + x3", 3, &ctx).unwrap(),
            seed,
            &cfg,
        )
        .unwrap();
        assert_eq!(dec.geometric_components(), 1, "f=x0+x3 seed={}", seed);
    }

    // Closed-point identity on the doubly ruled quadric.
    let v = VarietySpec::hypersurface(quad).unwrap();
    let pts = closed_points(&v, 4, &cfg).unwrap();
    for m in 1..=4usize {
        let mass: usize = pts
            .iter()
            .filter(|p| m % p.degree() == 0)
            .map(|p| p.degree())
            .sum();
        let expected = (2u64.pow(m as u32) + 1).pow(2);
        assert_eq!(mass as u64, expected, "m={}", m);
        assert_eq!(count_points(&v, m, &cfg).unwrap(), expected, "m={}", m);
    }
    println!(
        "acceptance criterion 6 (quadric space curves: 2 and 1 components across 5 seeds; point identity m<=4): PASS"
    );
}

#[test]
fn criterion_7_component_bijection_on_a_conjugate_plane_pair() {
    let cfg = Config::default();
    let ctx = f2();
    let g = parse_form("x0^2 + x0*x1 + x1^2", 3, &ctx).unwrap();
    let variety = VarietySpec::hypersurface(g).unwrap();
    let stat = Statistic::new(StatisticKind::ComponentBijection, variety).unwrap();

    // The named example.
    assert!(eval_statistic(&stat, &parse_form("x2", 3, &ctx).unwrap(), 0, &cfg).unwrap());

    // Exhaustive densities at d = 1 and d = 2.
    let rep1 = sweep_exhaustive(&stat, 1, 0, &cfg).unwrap();
    let rep2 = sweep_exhaustive(&stat, 2, 0, &cfg).unwrap();

    // Replay every d = 1 case against the hand-checkable conjugate-plane
    // decomposition: the planes are x0 = c*x1 for the two roots c of
    // y^2 + y + 1 over F_4; restricting f along the parametrization
    // (u0, u1, u2) -> (c*u0 : u0 : u1 : u2) must give a single line, and
    // the two section lines must differ exactly when f is outside the
    // pencil spanned by x0 and x1.
    let f4 = FieldCtx::new(2, 2).unwrap();
    let t = f4.gen();
    let roots = [t.clone(), t.mul(&t)];
    let mut positives = vec![];
    let len = dim_s_d(3, 1) as usize;
    for idx in 0..projective_class_count(len, 2) as u64 {
        let f = Form::from_coefficient_vector(&ctx, 3, 1, &nth_projective_rep(idx, len, &ctx));
        let claimed = eval_statistic(&stat, &f, idx, &cfg).unwrap();
        let f_4 = f.embed_to(&f4).unwrap();
        // Sections as F_4-point sets of P^3 on each plane.
        let mut sections = vec![];
        let mut all_lines = true;
        for c in &roots {
            let subs: Vec<Vec<FqElem>> = vec![
                vec![c.clone(), f4.zero(), f4.zero()],
                vec![f4.one(), f4.zero(), f4.zero()],
                vec![f4.zero(), f4.one(), f4.zero()],
                vec![f4.zero(), f4.zero(), f4.one()],
            ];
            let restriction = f_4.compose_linear(&subs);
            assert!(!restriction.is_zero(), "linear sections cannot vanish");
            // A linear ternary form cuts a line: geometrically irreducible.
            let dec = plane_curve_components(&restriction, idx, cfg.max_bivariate_degree).unwrap();
            all_lines &= dec.geometric_components() == 1 && restriction.degree() == 1;
            let mut pts = vec![];
            for u in enumerate_proj_points(&f4, 2, &cfg).unwrap() {
                if restriction.evaluate(&u).unwrap().is_zero() {
                    // Map through the parametrization into P^3.
                    let coords = vec![
                        c.mul(&u.coords()[0]),
                        u.coords()[0].clone(),
                        u.coords()[1].clone(),
                        u.coords()[2].clone(),
                    ];
                    pts.push(ProjPoint::new(coords).unwrap().lex_key());
                }
            }
            pts.sort();
            sections.push(pts);
        }
        let expected = all_lines && sections[0] != sections[1];
        assert_eq!(claimed, expected, "replay mismatch for f = {}", f);
        if claimed {
            positives.push(f.to_string());
        }
    }
    // The hand decomposition: exactly the forms outside the pencil of the
    // common line x0 = x1 = 0, i.e. 12 of 15, density 12/16 = 3/4.
    assert_eq!(positives.len(), 12);
    assert_eq!(rep1.density.clone().unwrap(), rational(3, 4));
    println!(
        "acceptance criterion 7 (component bijection on the conjugate plane pair): PASS — d=1 density {} (12/15 classes replayed by hand), d=2 density {} ({} of {} classes)",
        rep1.density.unwrap(),
        rep2.density.clone().unwrap(),
        rep2.successes,
        rep2.trials
    );
}

#[test]
fn criterion_8_antibertini_verification() {
    let start = Instant::now();
    let cfg = Config::default();
    let ctx = f2();
    let lines = lines_in_p3(&ctx, &cfg).unwrap();
    assert_eq!(lines.len(), 35);

    // Nonzero kernel for some d <= 16; empirically the first is d = 7, and
    // degrees below 7 are impossible (a plane section of degree < 7 cannot
    // contain the 7 lines of its plane without vanishing).
    let mut first_kernel = None;
    for d in 1..=16usize {
        let basis = ideal_degree_piece(&lines, d, &ctx);
        if !basis.is_empty() {
            first_kernel = Some((d, basis));
            break;
        }
    }
    let (d7, basis7) = first_kernel.expect("kernel must appear by degree 16");
    assert!(d7 <= 16);
    assert_eq!(d7, 7, "first kernel degree over F_2");
    assert_eq!(basis7.len(), 4);

    // Hard criterion at the first kernel degree, exhaustively over all 15
    // nonzero elements: every rational plane section with a nonzero
    // restriction factors reducible-or-non-reduced (it contains the 7
    // lines of its plane); a vanishing restriction must be exactly the
    // plane-divisible case (section = the plane itself), replayed by exact
    // division. All 15 degree-7 elements happen to be products of 7 plane
    // forms, so both branches are exercised.
    let planes: Vec<Vec<FqElem>> = enumerate_proj_points(&ctx, 3, &cfg)
        .unwrap()
        .map(|p| p.coords().to_vec())
        .collect();
    let check_element = |f: &Form| {
        for dual in &planes {
            let tern = restrict_to_plane(f, dual);
            if tern.is_zero() {
                let h = Form::from_coefficient_vector(&ctx, 3, 1, dual);
                assert!(
                    h.divides(f),
                    "vanishing restriction must come from a plane divisor"
                );
                continue;
            }
            let dec = plane_curve_components(&tern, 0, cfg.max_bivariate_degree).unwrap();
            assert!(
                dec.rational_components() >= 2
                    || dec.geometric_components() >= 2
                    || dec.max_multiplicity() >= 2,
                "degree-{} section must be reducible or non-reduced: {}",
                f.degree(),
                tern
            );
        }
    };
    for mask in 1u32..(1 << basis7.len()) {
        let mut f = Form::zero(&ctx, 3, d7);
        for (i, b) in basis7.iter().enumerate() {
            if mask >> i & 1 == 1 {
                f = f.add(b);
            }
        }
        check_element(&f);
    }
    // Sampled elements at the next degree.
    use rand::SeedableRng;
    let basis8 = ideal_degree_piece(&lines, 8, &ctx);
    assert!(!basis8.is_empty());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);
    let mut sampled = 0;
    while sampled < 20 {
        let mut f = Form::zero(&ctx, 3, 8);
        for b in &basis8 {
            f = f.add(&b.mul_scalar(&ctx.random(&mut rng)));
        }
        if f.is_zero() {
            continue;
        }
        check_element(&f);
        sampled += 1;
    }

    // Soft criterion: the search produces a certificate; with this seed it
    // is fully certified, and the certificate replays.
    let cert = find_antibertini_surface(&ctx, 12, 5, 7, &cfg).unwrap();
    assert!(cert.all_planes_reducible());
    assert!(
        matches!(cert.irreducibility, IrreducibilityStatus::Certified { .. }),
        "seed 7 certifies at degree 8"
    );
    let checks = verify_certificate(&cert, &cfg).unwrap();
    assert!(checks.iter().any(|c| c == "contains-all-lines"));
    assert!(checks.iter().any(|c| c == "irreducibility-certificate"));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "budget exceeded: {:?}", elapsed);
    println!(
        "acceptance criterion 8 (anti-Bertini surface): PASS — first kernel degree {}, all 15 degree-7 elements + 20 degree-8 samples verified, certified degree-{} surface replayed, {:?}",
        d7, cert.degree, elapsed
    );
}
