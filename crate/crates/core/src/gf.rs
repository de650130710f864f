//! Arithmetic in `F_{p^k}` for small prime powers.
//!
//! A field is a [`FieldCtx`]: the characteristic `p`, the extension degree
//! `k`, and a fixed monic irreducible modulus of degree `k` over `F_p`.
//! Construction is canonical — the modulus is the lexicographically smallest
//! monic irreducible (smallest when its non-leading coefficient vector is
//! read as a base-`p` integer), so the same `(p, k)` always yields the same
//! field, on any platform. Contexts are interned in a process-wide registry.
//!
//! Elements are dense coefficient vectors over `F_p` (no discrete-log
//! tables). Extension elements print as polynomials in the generator symbol
//! `t`, prime-field elements as integers.
//!
//! Subfield embeddings `F_{p^k} -> F_{p^m}` (for `k | m`) are computed once
//! per pair by locating the root of the source modulus in the target field
//! with the smallest representation, and are cached together with the data
//! needed to invert them on the image.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rand::Rng;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Inline space for two digits covers every field with `k <= 2` (all the
/// hot sweep fields) without heap traffic.
pub type Digits = SmallVec<[u64; 2]>;

/// Hard representability cap for internal (non-public) field construction:
/// orders must fit comfortably in `u64` index arithmetic.
const MAX_INTERNAL_ORDER: u128 = 1 << 62;

#[derive(Debug)]
struct Inner {
    p: u64,
    k: usize,
    order: u64,
    /// Monic, length `k + 1`, coefficients in `[0, p)`.
    modulus: Vec<u64>,
}

/// A finite field `F_{p^k}` with its canonical modulus. Cheap to clone,
/// immutable, shareable across threads.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx(GF({}^{}))", self.0.p, self.0.k)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.k == other.0.k)
    }
}
impl Eq for FieldCtx {}

static REGISTRY: Lazy<Mutex<HashMap<(u64, usize), FieldCtx>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldCtx {
    /// The canonical `F_{p^k}`, subject to the default order bound.
    pub fn new(p: u64, k: usize) -> Result<FieldCtx> {
        Self::with_bound(p, k, crate::Config::default().max_field_order)
    }

    /// Same as [`FieldCtx::new`] with an explicit order bound.
    pub fn with_bound(p: u64, k: usize, max_order: u64) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::Invalid("extension degree must be >= 1".into()));
        }
        let order = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if order > max_order as u128 {
            return Err(Error::OrderBound {
                order,
                bound: max_order,
            });
        }
        Ok(Self::build(p, k, order as u64))
    }

    /// Construction for internal towers (absolute factorization works in
    /// `F_{q^D}` whose order can exceed the public bound). Enumeration-style
    /// operations carry their own bounds, so a large order is safe here as
    /// long as it stays indexable.
    pub(crate) fn internal(p: u64, k: usize) -> Result<FieldCtx> {
        debug_assert!(is_prime(p));
        let order = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if order > MAX_INTERNAL_ORDER {
            return Err(Error::OrderBound {
                order,
                bound: MAX_INTERNAL_ORDER as u64,
            });
        }
        Ok(Self::build(p, k, order as u64))
    }

    fn build(p: u64, k: usize, order: u64) -> FieldCtx {
        let mut reg = REGISTRY.lock().unwrap();
        if let Some(ctx) = reg.get(&(p, k)) {
            return ctx.clone();
        }
        let modulus = if k == 1 {
            vec![0, 1] // x
        } else {
            smallest_irreducible(p, k)
        };
        let ctx = FieldCtx(Arc::new(Inner {
            p,
            k,
            order,
            modulus,
        }));
        reg.insert((p, k), ctx.clone());
        ctx
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn k(&self) -> usize {
        self.0.k
    }
    pub fn order(&self) -> u64 {
        self.0.order
    }
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem {
            ctx: self.clone(),
            digits: smallvec![0; self.0.k],
        }
    }

    pub fn one(&self) -> FqElem {
        self.from_index(1)
    }

    /// Element whose digit vector is `v` written in base `p`. Indices
    /// `0..order` enumerate the field; `0` is zero and `1` is one.
    pub fn from_index(&self, v: u64) -> FqElem {
        debug_assert!(v < self.0.order);
        let mut digits: Digits = smallvec![0; self.0.k];
        let mut v = v;
        for d in digits.iter_mut() {
            *d = v % self.0.p;
            v /= self.0.p;
        }
        FqElem {
            ctx: self.clone(),
            digits,
        }
    }

    /// Image of an integer under `Z -> F_p` included as the prime subfield.
    pub fn from_int(&self, v: u64) -> FqElem {
        let mut digits: Digits = smallvec![0; self.0.k];
        digits[0] = v % self.0.p;
        FqElem {
            ctx: self.clone(),
            digits,
        }
    }

    /// The class of `x`, generating the extension over `F_p` (equals zero's
    /// successor in `F_p` itself, so only meaningful for `k > 1`).
    pub fn gen(&self) -> FqElem {
        if self.0.k == 1 {
            self.one()
        } else {
            self.from_index(self.0.p)
        }
    }

    /// All elements in index order: `0, 1, ...`, deterministic. The iterator
    /// is lazy; draining it completely is only sensible for small orders.
    pub fn elems(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.0.order).map(move |v| self.from_index(v))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FqElem {
        self.from_index(rng.gen_range(0..self.0.order))
    }

    // ---- digit-level arithmetic (hot paths work on raw digit slices) ----

    pub(crate) fn add_digits(&self, a: &[u64], b: &[u64]) -> Digits {
        let p = self.0.p;
        a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
    }

    pub(crate) fn sub_digits(&self, a: &[u64], b: &[u64]) -> Digits {
        let p = self.0.p;
        a.iter().zip(b).map(|(x, y)| (x + p - y) % p).collect()
    }

    pub(crate) fn neg_digits(&self, a: &[u64]) -> Digits {
        let p = self.0.p;
        a.iter().map(|x| (p - x) % p).collect()
    }

    pub(crate) fn scale_digits(&self, a: &[u64], c: u64) -> Digits {
        let p = self.0.p;
        a.iter().map(|x| x * c % p).collect()
    }

    pub(crate) fn mul_digits(&self, a: &[u64], b: &[u64]) -> Digits {
        let p = self.0.p;
        let k = self.0.k;
        if k == 1 {
            return smallvec![a[0] * b[0] % p];
        }
        // Schoolbook product into a stack buffer, then reduce by the monic
        // modulus. Partial sums stay below 2^46 for p <= 2^20, k <= 62.
        let mut buf = [0u64; 128];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                buf[i + j] += ai * bj;
            }
        }
        for c in buf[..2 * k - 1].iter_mut() {
            *c %= p;
        }
        let m = &self.0.modulus;
        for i in (k..2 * k - 1).rev() {
            let c = buf[i];
            if c == 0 {
                continue;
            }
            buf[i] = 0;
            for j in 0..k {
                if m[j] != 0 {
                    buf[i - k + j] = (buf[i - k + j] + (p - m[j]) * c) % p;
                }
            }
        }
        buf[..k].iter().copied().collect()
    }

    pub(crate) fn inv_digits(&self, a: &[u64]) -> Option<Digits> {
        if a.iter().all(|&d| d == 0) {
            return None;
        }
        let p = self.0.p;
        if self.0.k == 1 {
            return Some(smallvec![fp_inv(a[0], p)]);
        }
        // Extended Euclid in F_p[x] against the modulus.
        let mut r0: Vec<u64> = self.0.modulus.clone();
        let mut r1: Vec<u64> = a.to_vec();
        trim(&mut r1);
        let mut t0: Vec<u64> = vec![];
        let mut t1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (q, r) = fp_divrem(&r0, &r1, p);
            let t = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, t);
        }
        // r0 is the gcd, a nonzero constant since the modulus is irreducible.
        debug_assert_eq!(r0.len(), 1);
        let s = fp_inv(r0[0], p);
        let mut out: Digits = smallvec![0; self.0.k];
        for (i, c) in t0.iter().enumerate() {
            out[i] = c * s % p;
        }
        Some(out)
    }

    pub(crate) fn pow_digits(&self, a: &[u64], mut e: u128) -> Digits {
        let mut base: Digits = a.iter().copied().collect();
        let mut acc = self.one().digits;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_digits(&acc, &base);
            }
            base = self.mul_digits(&base, &base);
            e >>= 1;
        }
        acc
    }
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0.
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

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = fp_inv(b[db], p);
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() >= b.len() {
        let dr = r.len() - 1;
        let c = r[dr] * lead_inv % p;
        q[dr - db] = c;
        for j in 0..=db {
            r[dr - db + j] = (r[dr - db + j] + (p - b[j]) * c % p) % p;
        }
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    (q, r)
}

fn fp_pow_mod(x: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = fp_divrem(x, m, p).1;
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_divrem(&fp_mul(&acc, &base, p), m, p).1;
        }
        base = fp_divrem(&fp_mul(&base, &base, p), m, p).1;
        e >>= 1;
    }
    acc
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    trim(&mut r0);
    trim(&mut r1);
    while !r1.is_empty() {
        let r = fp_divrem(&r0, &r1, p).1;
        r0 = std::mem::replace(&mut r1, r);
    }
    r0
}

/// Rabin test: `f` of degree `k` is irreducible over `F_p` iff
/// `x^(p^k) = x (mod f)` and `gcd(x^(p^(k/t)) - x, f) = 1` for every prime
/// `t | k`.
fn fp_is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    let x = vec![0u64, 1];
    let xq = fp_pow_mod(&x, (p as u128).pow(k as u32), f, p);
    if fp_sub(&xq, &x, p) != Vec::<u64>::new() {
        return false;
    }
    let mut rem = k;
    let mut t = 2;
    let mut primes = vec![];
    while rem > 1 {
        if rem % t == 0 {
            primes.push(t);
            while rem % t == 0 {
                rem /= t;
            }
        }
        t += 1;
    }
    for t in primes {
        let xe = fp_pow_mod(&x, (p as u128).pow((k / t) as u32), f, p);
        let g = fp_gcd(f, &fp_sub(&xe, &x, p), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Exhaustive scan for the canonical modulus: monic `x^k + c`, `c` running
/// through base-`p` digit vectors in increasing value.
fn smallest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let mut f = vec![0u64; k + 1];
    f[k] = 1;
    let upper = (p as u128).pow(k as u32);
    let mut v: u128 = 0;
    while v < upper {
        let mut rest = v;
        for c in f[..k].iter_mut() {
            *c = (rest % p as u128) as u64;
            rest /= p as u128;
        }
        if fp_is_irreducible(&f, p) {
            return f;
        }
        v += 1;
    }
    unreachable!("irreducible polynomials exist in every degree");
}

/// An element of a [`FieldCtx`]: `k` digits over `F_p`, low degree first.
#[derive(Clone, PartialEq, Eq)]
pub struct FqElem {
    ctx: FieldCtx,
    digits: Digits,
}

impl FqElem {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub(crate) fn from_digits(ctx: &FieldCtx, digits: Digits) -> FqElem {
        debug_assert_eq!(digits.len(), ctx.k());
        debug_assert!(digits.iter().all(|&d| d < ctx.p()));
        FqElem {
            ctx: ctx.clone(),
            digits,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn is_one(&self) -> bool {
        self.digits[0] == 1 && self.digits[1..].iter().all(|&d| d == 0)
    }

    /// Base-`p` value of the digit vector; the canonical total order on the
    /// field used wherever a smallest representative is chosen.
    pub fn index(&self) -> u64 {
        let p = self.ctx.p();
        self.digits.iter().rev().fold(0, |acc, &d| acc * p + d)
    }

    pub fn add(&self, rhs: &FqElem) -> FqElem {
        assert!(self.ctx == rhs.ctx, "field mismatch");
        FqElem::from_digits(&self.ctx, self.ctx.add_digits(&self.digits, &rhs.digits))
    }

    pub fn sub(&self, rhs: &FqElem) -> FqElem {
        assert!(self.ctx == rhs.ctx, "field mismatch");
        FqElem::from_digits(&self.ctx, self.ctx.sub_digits(&self.digits, &rhs.digits))
    }

    pub fn neg(&self) -> FqElem {
        FqElem::from_digits(&self.ctx, self.ctx.neg_digits(&self.digits))
    }

    pub fn mul(&self, rhs: &FqElem) -> FqElem {
        assert!(self.ctx == rhs.ctx, "field mismatch");
        FqElem::from_digits(&self.ctx, self.ctx.mul_digits(&self.digits, &rhs.digits))
    }

    pub fn inv(&self) -> Option<FqElem> {
        self.ctx
            .inv_digits(&self.digits)
            .map(|d| FqElem::from_digits(&self.ctx, d))
    }

    pub fn pow(&self, e: u128) -> FqElem {
        FqElem::from_digits(&self.ctx, self.ctx.pow_digits(&self.digits, e))
    }

    /// `x -> x^p`, the absolute Frobenius.
    pub fn frobenius(&self) -> FqElem {
        self.pow(self.ctx.p() as u128)
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.k() == 1 {
            return write!(f, "{}", self.digits[0]);
        }
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![];
        for (i, &c) in self.digits.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            parts.push(match (c, i) {
                (c, 0) => format!("{}", c),
                (1, 1) => "t".to_string(),
                (c, 1) => format!("{}*t", c),
                (1, i) => format!("t^{}", i),
                (c, i) => format!("{}*t^{}", c, i),
            });
        }
        write!(f, "{}", parts.join("+"))
    }
}

// ---------------------------------------------------------------------------
// Subfield embeddings
// ---------------------------------------------------------------------------

/// A cached ring embedding `F_{p^k} -> F_{p^m}` together with the linear
/// data needed to recognize and pull back elements of its image.
pub struct Embedding {
    src: FieldCtx,
    dst: FieldCtx,
    /// Images of `t_src^0 .. t_src^(k-1)`.
    powers: Vec<Digits>,
    /// Row-reduced solve data for the `F_p`-linear map digit(src) -> digit(dst).
    solve: FpSolve,
}

impl Embedding {
    pub fn apply(&self, a: &FqElem) -> FqElem {
        assert!(a.ctx == self.src, "element not in the embedding's source");
        let mut acc: Digits = smallvec![0; self.dst.k()];
        for (i, &c) in a.digits.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = self.dst.scale_digits(&self.powers[i], c);
            acc = self.dst.add_digits(&acc, &term);
        }
        FqElem::from_digits(&self.dst, acc)
    }

    /// Preimage under the embedding, if `a` lies in the image subfield.
    pub fn pull_back(&self, a: &FqElem) -> Option<FqElem> {
        assert!(a.ctx == self.dst);
        let x = self.solve.solve(&a.digits)?;
        Some(FqElem::from_digits(&self.src, x.into_iter().collect()))
    }

    pub fn src(&self) -> &FieldCtx {
        &self.src
    }
    pub fn dst(&self) -> &FieldCtx {
        &self.dst
    }
}

/// RREF of an `F_p` matrix with enough bookkeeping to solve `Mx = y` later.
struct FpSolve {
    p: u64,
    rows: usize,
    cols: usize,
    /// Reduced `[M | I]`, each row of length `cols + rows`.
    reduced: Vec<Vec<u64>>,
    pivots: Vec<(usize, usize)>, // (row, col) of each pivot
}

impl FpSolve {
    fn new(mat: Vec<Vec<u64>>, p: u64) -> FpSolve {
        let rows = mat.len();
        let cols = if rows == 0 { 0 } else { mat[0].len() };
        let mut a: Vec<Vec<u64>> = mat
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.extend((0..rows).map(|j| u64::from(j == i)));
                r
            })
            .collect();
        let mut pivots = vec![];
        let mut row = 0;
        for col in 0..cols {
            let Some(pr) = (row..rows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(row, pr);
            let inv = fp_inv(a[row][col], p);
            for x in a[row].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..rows {
                if r != row && a[r][col] != 0 {
                    let c = a[r][col];
                    for j in 0..cols + rows {
                        let sub = a[row][j] * c % p;
                        a[r][j] = (a[r][j] + p - sub) % p;
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
            if row == rows {
                break;
            }
        }
        FpSolve {
            p,
            rows,
            cols,
            reduced: a,
            pivots,
        }
    }

    /// Solve `Mx = y`; `None` when inconsistent.
    fn solve(&self, y: &[u64]) -> Option<Vec<u64>> {
        let p = self.p;
        // Transform y by the recorded row operations, then read off pivots.
        let ty: Vec<u64> = (0..self.rows)
            .map(|r| {
                let mut acc = 0u64;
                for (j, &yj) in y.iter().enumerate() {
                    acc = (acc + self.reduced[r][self.cols + j] * yj) % p;
                }
                acc
            })
            .collect();
        let mut x = vec![0u64; self.cols];
        for &(r, c) in &self.pivots {
            x[c] = ty[r];
        }
        // Consistency: rows without pivots must transform to zero, and
        // non-pivot columns are zero, so verify Mx = y via the reduced rows.
        for r in 0..self.rows {
            if self.pivots.iter().all(|&(pr, _)| pr != r) && ty[r] != 0 {
                return None;
            }
        }
        Some(x)
    }
}

static EMBEDDINGS: Lazy<Mutex<HashMap<(u64, usize, usize), Arc<Embedding>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The canonical embedding `src -> dst`, requiring equal characteristic and
/// `src.k | dst.k`. Identity when the fields coincide; otherwise the image
/// of the source generator is the root of the source modulus in `dst` with
/// the smallest representation.
pub fn embedding(src: &FieldCtx, dst: &FieldCtx) -> Result<Arc<Embedding>> {
    if src.p() != dst.p() || dst.k() % src.k() != 0 {
        return Err(Error::NoEmbedding {
            p: src.p(),
            k: src.k(),
            p2: dst.p(),
            m: dst.k(),
        });
    }
    let key = (src.p(), src.k(), dst.k());
    if let Some(e) = EMBEDDINGS.lock().unwrap().get(&key) {
        return Ok(e.clone());
    }
    let root = if src.k() == dst.k() {
        dst.gen()
    } else {
        // Roots of the source modulus in dst, smallest representation first.
        let modulus = crate::upoly::UniPoly::new(
            dst.clone(),
            src.modulus().iter().map(|&c| dst.from_int(c)).collect(),
        );
        let mut roots = crate::upoly::roots(&modulus, 0);
        roots.sort_by_key(|r| r.index());
        roots
            .into_iter()
            .next()
            .expect("source modulus splits in any extension of degree divisible by k")
    };
    let mut powers: Vec<Digits> = Vec::with_capacity(src.k());
    let mut cur = dst.one();
    for _ in 0..src.k() {
        powers.push(cur.digits.clone());
        cur = cur.mul(&root);
    }
    // F_p-linear matrix of the embedding: dst.k rows, src.k columns.
    let mat: Vec<Vec<u64>> = (0..dst.k())
        .map(|r| (0..src.k()).map(|c| powers[c][r]).collect())
        .collect();
    let emb = Arc::new(Embedding {
        src: src.clone(),
        dst: dst.clone(),
        powers,
        solve: FpSolve::new(mat, src.p()),
    });
    EMBEDDINGS
        .lock()
        .unwrap()
        .insert(key, emb.clone());
    Ok(emb)
}

/// Factor a prime power `q = p^k`; `None` if `q` is not one.
pub fn factor_prime_power(q: u64) -> Option<(u64, usize)> {
    for p in 2..=q {
        if q % p == 0 {
            // p is the smallest divisor, hence prime.
            let mut k = 0usize;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            return (rest == 1).then_some((p, k));
        }
    }
    None
}

/// Convenience wrapper: image of `a` in `target`.
pub fn embed(a: &FqElem, target: &FieldCtx) -> Result<FqElem> {
    Ok(embedding(a.ctx(), target)?.apply(a))
}
