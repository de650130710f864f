//! Homogeneous multivariate polynomials (forms) and the general sparse
//! multivariate polynomials backing them.
//!
//! A [`Form`] lives in variables `x0..xn` over a [`FieldCtx`], with an
//! explicit total degree — the zero form keeps its degree tag, since the
//! density sweeps measure over all of `S_d` including zero. A [`MultiPoly`]
//! is the untyped workhorse: sparse exponent-map polynomials with exact
//! division, linear substitution, and Sylvester-matrix resultants (evaluated
//! by fraction-free elimination, which keeps every intermediate entry a
//! polynomial).
//!
//! Syntax: `term ('+' term)*`, a term being a `*`-product of integer or
//! `t`-expression coefficients and `x<idx>['^'exp]` factors. Multi-term
//! extension coefficients are parenthesized, e.g. `(t+1)*x0^2`; the printer
//! emits exactly that shape and `parse . print` is the identity on forms.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{embedding, FieldCtx, FqElem};

/// Exponent tuple; entry `i` is the exponent of `x_i`.
pub type Expo = Vec<u16>;

// ---------------------------------------------------------------------------
// MultiPoly
// ---------------------------------------------------------------------------

/// Sparse multivariate polynomial, not necessarily homogeneous. Terms are
/// kept in lexicographic exponent order with no zero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ctx: FieldCtx,
    nvars: usize,
    terms: BTreeMap<Expo, FqElem>,
}

impl MultiPoly {
    pub fn zero(ctx: &FieldCtx, nvars: usize) -> MultiPoly {
        MultiPoly {
            ctx: ctx.clone(),
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FqElem, nvars: usize) -> MultiPoly {
        let ctx = c.ctx().clone();
        let mut out = MultiPoly::zero(&ctx, nvars);
        if !c.is_zero() {
            out.terms.insert(vec![0; nvars], c);
        }
        out
    }

    pub fn var(ctx: &FieldCtx, nvars: usize, i: usize) -> MultiPoly {
        assert!(i < nvars);
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        let mut out = MultiPoly::zero(ctx, nvars);
        out.terms.insert(e, ctx.one());
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Expo, FqElem)>>(
        ctx: &FieldCtx,
        nvars: usize,
        terms: I,
    ) -> MultiPoly {
        let mut out = MultiPoly::zero(ctx, nvars);
        for (e, c) in terms {
            out.add_term(&e, &c);
        }
        out
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Expo, &FqElem)> {
        self.terms.iter()
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn degree_in(&self, v: usize) -> Option<usize> {
        self.terms.keys().map(|e| e[v] as usize).max()
    }

    fn add_term(&mut self, e: &Expo, c: &FqElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(e) {
            Some(cur) => {
                let s = cur.add(c);
                if s.is_zero() {
                    self.terms.remove(e);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(e.clone(), c.clone());
            }
        }
    }

    pub fn add(&self, rhs: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in rhs.terms.iter() {
            out.add_term(e, c);
        }
        out
    }

    pub fn sub(&self, rhs: &MultiPoly) -> MultiPoly {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn mul(&self, rhs: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.nvars, rhs.nvars);
        let mut out = MultiPoly::zero(&self.ctx, self.nvars);
        for (e1, c1) in self.terms.iter() {
            for (e2, c2) in rhs.terms.iter() {
                let e: Expo = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(&e, &c1.mul(c2));
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &FqElem) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.ctx, self.nvars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    pub fn pow(&self, mut e: usize) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::constant(self.ctx.one(), self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Leading term under lexicographic exponent order.
    pub fn leading(&self) -> Option<(&Expo, &FqElem)> {
        self.terms.iter().next_back()
    }

    /// Exact division. `None` when `d` does not divide `self`; sound as a
    /// divisibility test because single-divisor reduction has a unique
    /// remainder.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (dlt_e, dlt_c) = d.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let dlt_inv = dlt_c.inv().unwrap();
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(&self.ctx, self.nvars);
        while let Some((re, rc)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
            if re.iter().zip(&dlt_e).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Expo = re.iter().zip(&dlt_e).map(|(a, b)| a - b).collect();
            let qc = rc.mul(&dlt_inv);
            let mut t = MultiPoly::zero(&self.ctx, self.nvars);
            t.terms.insert(qe, qc);
            rem = rem.sub(&t.mul(d));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Coefficient of `v^j`, as a polynomial in the same variable set with
    /// `v` absent from every term.
    pub fn coeff_of(&self, v: usize, j: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.ctx, self.nvars);
        for (e, c) in self.terms.iter() {
            if e[v] as usize == j {
                let mut e2 = e.clone();
                e2[v] = 0;
                out.add_term(&e2, c);
            }
        }
        out
    }

    pub fn eval(&self, coords: &[FqElem]) -> FqElem {
        assert_eq!(coords.len(), self.nvars);
        let mut acc = self.ctx.zero();
        for (e, c) in self.terms.iter() {
            let mut term = c.clone();
            for (x, &exp) in coords.iter().zip(e.iter()) {
                if exp > 0 {
                    term = term.mul(&x.pow(exp as u128));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Substitute `x_i <- subs[i]`, a linear form in `new_nvars` variables
    /// given by its coefficient vector.
    pub fn compose_linear(&self, subs: &[Vec<FqElem>], new_nvars: usize) -> MultiPoly {
        assert_eq!(subs.len(), self.nvars);
        let linear: Vec<MultiPoly> = subs
            .iter()
            .map(|row| {
                assert_eq!(row.len(), new_nvars);
                MultiPoly::from_terms(
                    &self.ctx,
                    new_nvars,
                    row.iter().enumerate().map(|(j, c)| {
                        let mut e = vec![0u16; new_nvars];
                        e[j] = 1;
                        (e, c.clone())
                    }),
                )
            })
            .collect();
        // Cache powers of each substituted linear form.
        let mut powers: Vec<Vec<MultiPoly>> = linear
            .iter()
            .map(|l| vec![MultiPoly::constant(self.ctx.one(), new_nvars), l.clone()])
            .collect();
        let mut out = MultiPoly::zero(&self.ctx, new_nvars);
        for (e, c) in self.terms.iter() {
            let mut term = MultiPoly::constant(c.clone(), new_nvars);
            for (i, &exp) in e.iter().enumerate() {
                let exp = exp as usize;
                if exp == 0 {
                    continue;
                }
                while powers[i].len() <= exp {
                    let next = powers[i].last().unwrap().mul(&linear[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][exp]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Coefficient-wise field embedding.
    pub fn embed_to(&self, target: &FieldCtx) -> Result<MultiPoly> {
        if self.ctx == *target {
            return Ok(self.clone());
        }
        let emb = embedding(&self.ctx, target)?;
        Ok(MultiPoly {
            ctx: target.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), emb.apply(c)))
                .collect(),
        })
    }

    /// Apply `c -> c^q` to every coefficient (the arithmetic Frobenius
    /// relative to the subfield of order `q`).
    pub fn map_frobenius(&self, q: u64) -> MultiPoly {
        MultiPoly {
            ctx: self.ctx.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.pow(q as u128)))
                .collect(),
        }
    }

    /// Variables that actually occur.
    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }

    /// Deterministic sort key (exponents with coefficient values).
    pub fn sort_key(&self) -> Vec<(Expo, u64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.index()))
            .collect()
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_terms(self.terms.iter()))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_terms(self.terms.iter()))
    }
}

// ---------------------------------------------------------------------------
// Resultant
// ---------------------------------------------------------------------------

/// Resultant of `f` and `g` with respect to variable `v`: the determinant of
/// the Sylvester matrix, a polynomial in the remaining variables. Vanishes
/// identically iff the inputs share a factor of positive `v`-degree.
pub fn resultant_wrt(f: &MultiPoly, g: &MultiPoly, v: usize) -> Result<MultiPoly> {
    let d1 = f.degree_in(v).unwrap_or(0);
    let d2 = g.degree_in(v).unwrap_or(0);
    if d1 == 0 || d2 == 0 {
        return Err(Error::DegreeZeroInVariable);
    }
    let ctx = f.ctx().clone();
    let n = d1 + d2;
    let fc: Vec<MultiPoly> = (0..=d1).map(|j| f.coeff_of(v, d1 - j)).collect();
    let gc: Vec<MultiPoly> = (0..=d2).map(|j| g.coeff_of(v, d2 - j)).collect();
    let zero = MultiPoly::zero(&ctx, f.nvars());
    let mut m: Vec<Vec<MultiPoly>> = vec![vec![zero.clone(); n]; n];
    for i in 0..d2 {
        for (j, c) in fc.iter().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..d1 {
        for (j, c) in gc.iter().enumerate() {
            m[d2 + i][i + j] = c.clone();
        }
    }
    Ok(bareiss_determinant(m, &ctx, f.nvars()))
}

/// Fraction-free (Bareiss) determinant over the polynomial ring; every
/// division is exact.
fn bareiss_determinant(mut m: Vec<Vec<MultiPoly>>, ctx: &FieldCtx, nvars: usize) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::constant(ctx.one(), nvars);
    }
    let mut prev = MultiPoly::constant(ctx.one(), nvars);
    let mut negate = false;
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return MultiPoly::zero(ctx, nvars);
            };
            m.swap(k, r);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = if num.is_zero() {
                    num
                } else {
                    num.div_exact(&prev).expect("Bareiss division is exact")
                };
            }
            m[i][k] = MultiPoly::zero(ctx, nvars);
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        det.neg()
    } else {
        det
    }
}

// ---------------------------------------------------------------------------
// Form
// ---------------------------------------------------------------------------

/// Homogeneous polynomial of degree `d` in `x0..xn`. The zero form is the
/// empty term map with its degree kept as an explicit tag.
#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    ctx: FieldCtx,
    n: usize,
    d: usize,
    terms: BTreeMap<Expo, FqElem>,
}

impl Form {
    pub fn zero(ctx: &FieldCtx, n: usize, d: usize) -> Form {
        Form {
            ctx: ctx.clone(),
            n,
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(c: FqElem, e: Expo) -> Form {
        let ctx = c.ctx().clone();
        let n = e.len() - 1;
        let d = e.iter().map(|&x| x as usize).sum();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Form { ctx, n, d, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Expo, FqElem)>>(
        ctx: &FieldCtx,
        n: usize,
        d: usize,
        terms: I,
    ) -> Result<Form> {
        let mut out = Form::zero(ctx, n, d);
        for (e, c) in terms {
            if e.len() != n + 1 {
                return Err(Error::Invalid("exponent tuple length".into()));
            }
            if e.iter().map(|&x| x as usize).sum::<usize>() != d {
                return Err(Error::NotHomogeneous(format!(
                    "term of degree {} in a degree-{} form",
                    e.iter().map(|&x| x as usize).sum::<usize>(),
                    d
                )));
            }
            out.add_term_raw(&e, &c);
        }
        Ok(out)
    }

    /// Reinterpret a multivariate polynomial as a form; errors unless every
    /// term has the same total degree (or the input is zero, which needs a
    /// degree from the caller).
    pub fn from_multipoly(mp: &MultiPoly, degree_if_zero: usize) -> Result<Form> {
        let n = mp.nvars() - 1;
        match mp.total_degree() {
            None => Ok(Form::zero(mp.ctx(), n, degree_if_zero)),
            Some(d) => {
                for (e, _) in mp.terms() {
                    if e.iter().map(|&x| x as usize).sum::<usize>() != d {
                        return Err(Error::NotHomogeneous("mixed total degrees".into()));
                    }
                }
                Ok(Form {
                    ctx: mp.ctx().clone(),
                    n,
                    d,
                    terms: mp.terms().map(|(e, c)| (e.clone(), c.clone())).collect(),
                })
            }
        }
    }

    pub fn as_multipoly(&self) -> MultiPoly {
        MultiPoly::from_terms(
            &self.ctx,
            self.n + 1,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    fn add_term_raw(&mut self, e: &Expo, c: &FqElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(e) {
            Some(cur) => {
                let s = cur.add(c);
                if s.is_zero() {
                    self.terms.remove(e);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(e.clone(), c.clone());
            }
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    /// Ambient projective dimension; the variables are `x0..xn`.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Expo, &FqElem)> {
        self.terms.iter()
    }

    pub fn add(&self, rhs: &Form) -> Form {
        assert_eq!((self.n, self.d), (rhs.n, rhs.d), "form shape mismatch");
        let mut out = self.clone();
        for (e, c) in rhs.terms.iter() {
            out.add_term_raw(e, c);
        }
        out
    }

    pub fn neg(&self) -> Form {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &Form) -> Form {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Form) -> Form {
        assert_eq!(self.n, rhs.n);
        let mut out = Form::zero(&self.ctx, self.n, self.d + rhs.d);
        for (e1, c1) in self.terms.iter() {
            for (e2, c2) in rhs.terms.iter() {
                let e: Expo = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term_raw(&e, &c1.mul(c2));
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &FqElem) -> Form {
        if c.is_zero() {
            return Form::zero(&self.ctx, self.n, self.d);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    pub fn pow(&self, e: usize) -> Form {
        let mut acc = Form::monomial(self.ctx.one(), vec![0; self.n + 1]);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Evaluate at a projective point; the point's field must extend the
    /// coefficient field. Vanishing is well-defined by homogeneity.
    pub fn evaluate(&self, p: &ProjPoint) -> Result<FqElem> {
        if p.n() != self.n {
            return Err(Error::Invalid("point/form dimension mismatch".into()));
        }
        let target = p.ctx().clone();
        let emb = (self.ctx != target)
            .then(|| embedding(&self.ctx, &target))
            .transpose()?;
        let mut acc = target.zero();
        for (e, c) in self.terms.iter() {
            let mut term = match &emb {
                Some(emb) => emb.apply(c),
                None => c.clone(),
            };
            for (x, &exp) in p.coords().iter().zip(e.iter()) {
                if exp > 0 {
                    term = term.mul(&x.pow(exp as u128));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Largest power of `x_v` dividing every term (zero form: 0).
    pub fn var_multiplicity(&self, v: usize) -> usize {
        self.terms
            .keys()
            .map(|e| e[v] as usize)
            .min()
            .unwrap_or(0)
    }

    /// Divide out `x_v^m`.
    pub fn strip_var(&self, v: usize, m: usize) -> Form {
        if m == 0 {
            return self.clone();
        }
        let terms: BTreeMap<Expo, FqElem> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[v] -= m as u16;
                (e2, c.clone())
            })
            .collect();
        Form {
            ctx: self.ctx.clone(),
            n: self.n,
            d: self.d - m,
            terms,
        }
    }

    /// Substitute `x_i = 1` after recording (and dividing out) the power of
    /// `x_i` dividing the form; returns the dehomogenization in the
    /// remaining `n` variables plus that multiplicity.
    pub fn dehomogenize(&self, i: usize) -> Result<(MultiPoly, usize)> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let mult = self.var_multiplicity(i);
        let stripped = self.strip_var(i, mult);
        let mut out = MultiPoly::zero(&self.ctx, self.n);
        for (e, c) in stripped.terms.iter() {
            let reduced: Expo = e
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &x)| x)
                .collect();
            out.add_term(&reduced, c);
        }
        Ok((out, mult))
    }

    /// Inverse of [`Form::dehomogenize`]: homogenize `mp` by reinserting a
    /// variable at slot `i`, raising each term to the total degree of `mp`.
    pub fn homogenize_at(mp: &MultiPoly, i: usize) -> Form {
        let n = mp.nvars(); // output has n+1 variables
        let d = mp.total_degree().unwrap_or(0);
        let mut out = Form::zero(mp.ctx(), n, d);
        for (e, c) in mp.terms() {
            let deg: usize = e.iter().map(|&x| x as usize).sum();
            let mut e2: Expo = Vec::with_capacity(n + 1);
            e2.extend_from_slice(&e[..i]);
            e2.push((d - deg) as u16);
            e2.extend_from_slice(&e[i..]);
            out.add_term_raw(&e2, c);
        }
        out
    }

    /// Substitute `x_i <- subs[i]` (linear forms over the same field, given
    /// by coefficient vectors in `m + 1` new variables). The result is
    /// homogeneous of the same degree, possibly zero.
    pub fn compose_linear(&self, subs: &[Vec<FqElem>]) -> Form {
        assert_eq!(subs.len(), self.n + 1);
        let new_nvars = subs[0].len();
        let mp = self.as_multipoly().compose_linear(subs, new_nvars);
        let mut out = Form::zero(&self.ctx, new_nvars - 1, self.d);
        for (e, c) in mp.terms() {
            out.add_term_raw(e, c);
        }
        out
    }

    pub fn embed_to(&self, target: &FieldCtx) -> Result<Form> {
        if self.ctx == *target {
            return Ok(self.clone());
        }
        let emb = embedding(&self.ctx, target)?;
        Ok(Form {
            ctx: target.clone(),
            n: self.n,
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), emb.apply(c)))
                .collect(),
        })
    }

    pub fn map_frobenius(&self, q: u64) -> Form {
        Form {
            ctx: self.ctx.clone(),
            n: self.n,
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.pow(q as u128)))
                .collect(),
        }
    }

    /// Does `self` divide `f` (as polynomials)?
    pub fn divides(&self, f: &Form) -> bool {
        if self.is_zero() {
            return f.is_zero();
        }
        if f.is_zero() {
            return true;
        }
        if f.d < self.d {
            return false;
        }
        f.as_multipoly().div_exact(&self.as_multipoly()).is_some()
    }

    pub fn div_exact(&self, d: &Form) -> Option<Form> {
        let q = self.as_multipoly().div_exact(&d.as_multipoly())?;
        Some(Form::from_multipoly(&q, self.d.saturating_sub(d.d)).expect("quotient of forms"))
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..=self.n)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }

    /// Coefficient vector in the canonical monomial order for `(n, d)`.
    pub fn coefficient_vector(&self) -> Vec<FqElem> {
        monomials(self.n, self.d)
            .into_iter()
            .map(|e| {
                self.terms
                    .get(&e)
                    .cloned()
                    .unwrap_or_else(|| self.ctx.zero())
            })
            .collect()
    }

    /// Build a form from a coefficient vector in canonical monomial order.
    pub fn from_coefficient_vector(ctx: &FieldCtx, n: usize, d: usize, coeffs: &[FqElem]) -> Form {
        let mons = monomials(n, d);
        assert_eq!(coeffs.len(), mons.len());
        let mut out = Form::zero(ctx, n, d);
        for (e, c) in mons.into_iter().zip(coeffs) {
            out.add_term_raw(&e, c);
        }
        out
    }

    pub fn sort_key(&self) -> Vec<(Expo, u64)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.index()))
            .collect()
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_terms(self.terms.iter()))
    }
}

fn print_terms<'a, I: DoubleEndedIterator<Item = (&'a Expo, &'a FqElem)>>(terms: I) -> String {
    let mut parts = vec![];
    // Descending lexicographic: x0-heavy terms first.
    for (e, c) in terms.rev() {
        let mut factors = vec![];
        for (i, &exp) in e.iter().enumerate() {
            match exp {
                0 => {}
                1 => factors.push(format!("x{}", i)),
                _ => factors.push(format!("x{}^{}", i, exp)),
            }
        }
        let cs = c.to_string();
        let coef = if cs.contains('+') {
            format!("({})", cs)
        } else {
            cs
        };
        if factors.is_empty() {
            parts.push(coef);
        } else if c.is_one() {
            parts.push(factors.join("*"));
        } else {
            parts.push(format!("{}*{}", coef, factors.join("*")));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

// ---------------------------------------------------------------------------
// Projective points
// ---------------------------------------------------------------------------

/// Point of `P^n` over some field, normalized so the first nonzero
/// coordinate is 1 — equal points have identical representations.
#[derive(Clone, PartialEq, Eq)]
pub struct ProjPoint {
    coords: Vec<FqElem>,
}

impl ProjPoint {
    pub fn new(coords: Vec<FqElem>) -> Result<ProjPoint> {
        let Some(first) = coords.iter().position(|c| !c.is_zero()) else {
            return Err(Error::Invalid("all projective coordinates are zero".into()));
        };
        let inv = coords[first].inv().unwrap();
        Ok(ProjPoint {
            coords: coords.iter().map(|c| c.mul(&inv)).collect(),
        })
    }

    pub fn coords(&self) -> &[FqElem] {
        &self.coords
    }
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }
    pub fn ctx(&self) -> &FieldCtx {
        self.coords[0].ctx()
    }

    /// Coordinate-wise `x -> x^q`; normalization is preserved.
    pub fn power_map(&self, q: u64) -> ProjPoint {
        ProjPoint {
            coords: self.coords.iter().map(|c| c.pow(q as u128)).collect(),
        }
    }

    pub fn embed_to(&self, target: &FieldCtx) -> Result<ProjPoint> {
        if self.ctx() == target {
            return Ok(self.clone());
        }
        let emb = embedding(self.ctx(), target)?;
        Ok(ProjPoint {
            coords: self.coords.iter().map(|c| emb.apply(c)).collect(),
        })
    }

    /// Lexicographic key on coordinate values; the canonical order used to
    /// pick orbit representatives.
    pub fn lex_key(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.index()).collect()
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", inner.join(":"))
    }
}

// ---------------------------------------------------------------------------
// Monomial bookkeeping
// ---------------------------------------------------------------------------

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// `dim S_d` for forms of degree `d` in `n + 1` variables.
pub fn dim_s_d(n: usize, d: usize) -> u64 {
    binomial(n + d, n)
}

/// All exponent tuples of length `n + 1` summing to `d`, in descending
/// lexicographic order (`x0^d` first). This is the canonical coefficient
/// order used by sweeps and linear systems.
pub fn monomials(n: usize, d: usize) -> Vec<Expo> {
    fn rec(pos: usize, left: u16, cur: &mut Expo, out: &mut Vec<Expo>) {
        if pos == cur.len() - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = vec![];
    let mut cur = vec![0u16; n + 1];
    rec(0, d as u16, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(u64),
    T,
    Var(usize),
    Caret,
    Star,
    Plus,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut toks = vec![];
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: u64 = text[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("integer literal at byte {}", start)))?;
                toks.push(Tok::Int(v));
            }
            't' => {
                toks.push(Tok::T);
                i += 1;
            }
            'x' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(Error::Parse(format!(
                        "variable index expected after 'x' at byte {}",
                        start
                    )));
                }
                let idx: usize = text[start..i]
                    .parse()
                    .map_err(|_| Error::Parse("variable index".into()))?;
                toks.push(Tok::Var(idx));
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            _ => return Err(Error::Parse(format!("unexpected character '{}'", c))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    ctx: FieldCtx,
    n: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }
    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(x) if *x == t => Ok(()),
            other => Err(Error::Parse(format!("expected {:?}, found {:?}", t, other))),
        }
    }

    fn exponent(&mut self) -> Result<u64> {
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            match self.bump() {
                Some(&Tok::Int(v)) => Ok(v),
                other => Err(Error::Parse(format!(
                    "exponent expected, found {:?}",
                    other
                ))),
            }
        } else {
            Ok(1)
        }
    }

    /// `t^e` with the generator of the coefficient field.
    fn t_power(&mut self) -> Result<FqElem> {
        if self.ctx.k() == 1 {
            return Err(Error::Parse(
                "generator symbol 't' is not defined in a prime field".into(),
            ));
        }
        let e = self.exponent()?;
        Ok(self.ctx.gen().pow(e as u128))
    }

    /// One `INT ['*' t ['^' e]] | t ['^' e]` summand inside a parenthesized
    /// coefficient.
    fn elem_term(&mut self) -> Result<FqElem> {
        match self.bump().cloned() {
            Some(Tok::Int(v)) => {
                let c = self.ctx.from_int(v);
                if self.peek() == Some(&Tok::Star) {
                    self.bump();
                    match self.bump().cloned() {
                        Some(Tok::T) => Ok(c.mul(&self.t_power()?)),
                        other => Err(Error::Parse(format!(
                            "'t' expected in coefficient, found {:?}",
                            other
                        ))),
                    }
                } else {
                    Ok(c)
                }
            }
            Some(Tok::T) => self.t_power(),
            other => Err(Error::Parse(format!(
                "coefficient expected, found {:?}",
                other
            ))),
        }
    }

    /// Parenthesized element sum: `( elem ('+' elem)* )`.
    fn paren_elem(&mut self) -> Result<FqElem> {
        self.expect(Tok::LParen)?;
        let mut acc = self.elem_term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.bump();
            acc = acc.add(&self.elem_term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(acc)
    }

    /// One `*`-product of coefficient atoms and variable powers.
    fn term(&mut self) -> Result<(FqElem, Expo)> {
        let mut coef = self.ctx.one();
        let mut expo: Expo = vec![0; self.n + 1];
        loop {
            match self.peek().cloned() {
                Some(Tok::Int(v)) => {
                    self.bump();
                    let e = self.exponent()?;
                    let base = self.ctx.from_int(v);
                    coef = coef.mul(&base.pow(e as u128));
                }
                Some(Tok::T) => {
                    self.bump();
                    coef = coef.mul(&self.t_power()?);
                }
                Some(Tok::LParen) => {
                    let c = self.paren_elem()?;
                    coef = coef.mul(&c);
                }
                Some(Tok::Var(idx)) => {
                    self.bump();
                    if idx > self.n {
                        return Err(Error::Parse(format!(
                            "unknown variable x{} (ambient has x0..x{})",
                            idx, self.n
                        )));
                    }
                    let e = self.exponent()?;
                    expo[idx] = expo[idx]
                        .checked_add(
                            u16::try_from(e)
                                .map_err(|_| Error::Parse("exponent too large".into()))?,
                        )
                        .ok_or_else(|| Error::Parse("exponent too large".into()))?;
                }
                other => {
                    return Err(Error::Parse(format!(
                        "term factor expected, found {:?}",
                        other
                    )))
                }
            }
            if self.peek() == Some(&Tok::Star) {
                self.bump();
            } else {
                break;
            }
        }
        Ok((coef, expo))
    }
}

/// Parse a form in `x0..xn` over `ctx`. Terms must share one total degree;
/// degree-0-only content is accepted as a constant form.
pub fn parse_form(text: &str, n: usize, ctx: &FieldCtx) -> Result<Form> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        ctx: ctx.clone(),
        n,
    };
    let mut terms: Vec<(FqElem, Expo)> = vec![p.term()?];
    while p.peek() == Some(&Tok::Plus) {
        p.bump();
        terms.push(p.term()?);
    }
    if p.pos != toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {:?}",
            p.peek()
        )));
    }
    // All terms with a nonzero coefficient must agree in total degree.
    let mut degree: Option<usize> = None;
    for (c, e) in &terms {
        if c.is_zero() {
            continue;
        }
        let d: usize = e.iter().map(|&x| x as usize).sum();
        match degree {
            None => degree = Some(d),
            Some(d0) if d0 != d => {
                return Err(Error::NotHomogeneous(format!(
                    "terms of degree {} and {}",
                    d0, d
                )))
            }
            _ => {}
        }
    }
    let d = degree.unwrap_or(0);
    Form::from_terms(ctx, n, d, terms.into_iter().map(|(c, e)| (e, c)))
}

/// Parse a single field element written in the coefficient syntax
/// (integer, `t`-expression, or a parenthesized sum).
pub fn parse_elem(text: &str, ctx: &FieldCtx) -> Result<FqElem> {
    let f = parse_form(text, 0, ctx)?;
    if f.degree() != 0 {
        return Err(Error::Parse("expected a constant".into()));
    }
    let c = f
        .terms()
        .next()
        .map(|(_, c)| c.clone())
        .unwrap_or_else(|| ctx.zero());
    Ok(c)
}
