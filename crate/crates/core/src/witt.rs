//! Truncated Witt vectors `W_n(F_{p^r})` for `n <= 3`.
//!
//! Addition and multiplication evaluate the universal sum and product
//! polynomials, computed once per `(p, n)` over the integers by the ghost
//! recursion and reduced mod `p` for evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::field::{Embedding, Fe, FiniteField};

pub const MAX_LENGTH: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WittError {
    #[error("Witt length {0} outside 1..=3")]
    LengthOutOfRange(usize),
    #[error("Witt length {n} is not supported for p = {p} (polynomial tables too large)")]
    PrimeTooLarge { p: u64, n: usize },
    #[error("operands belong to different Witt rings")]
    RingMismatch,
    #[error("not a unit: leading component is zero")]
    NotAUnit,
}

/// Integral polynomial in `X_0..X_{n-1}, Y_0..Y_{n-1}`; exponent vectors have length `2n`.
pub type IntPoly = BTreeMap<Vec<u32>, BigInt>;

fn poly_add(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = a.clone();
    for (m, c) in b {
        let e = out.entry(m.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            out.remove(m);
        }
    }
    out
}

fn poly_scale(a: &IntPoly, s: &BigInt) -> IntPoly {
    if s.is_zero() {
        return IntPoly::new();
    }
    a.iter().map(|(m, c)| (m.clone(), c * s)).collect()
}

fn poly_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = IntPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            *out.entry(m).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_pow(a: &IntPoly, mut e: u64, nvars: usize) -> IntPoly {
    let mut acc: IntPoly = [(vec![0; nvars], BigInt::one())].into_iter().collect();
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base);
        }
    }
    acc
}

fn var(i: usize, nvars: usize) -> IntPoly {
    let mut m = vec![0; nvars];
    m[i] = 1;
    [(m, BigInt::one())].into_iter().collect()
}

/// Divide every coefficient by `d`, asserting exactness.
fn poly_div_exact(a: &IntPoly, d: &BigInt) -> IntPoly {
    a.iter()
        .map(|(m, c)| {
            assert!(
                (c % d).is_zero(),
                "ghost recursion produced a non-integral coefficient"
            );
            (m.clone(), c / d)
        })
        .collect()
}

/// Ghost component `w_k = sum_{i<=k} p^i Z_i^{p^{k-i}}` for variables at `offset`.
fn ghost(p: u64, k: usize, offset: usize, nvars: usize) -> IntPoly {
    let mut acc = IntPoly::new();
    for i in 0..=k {
        let term = poly_pow(&var(offset + i, nvars), p.pow((k - i) as u32), nvars);
        acc = poly_add(&acc, &poly_scale(&term, &BigInt::from(p).pow(i as u32)));
    }
    acc
}

/// Solve `w_k(R) = target` for `R_k` given `R_0..R_{k-1}`.
fn ghost_solve(p: u64, target: &IntPoly, lower: &[IntPoly], nvars: usize) -> IntPoly {
    let k = lower.len();
    let mut rest = target.clone();
    for (i, r) in lower.iter().enumerate() {
        let term = poly_pow(r, p.pow((k - i) as u32), nvars);
        let scaled = poly_scale(&term, &-BigInt::from(p).pow(i as u32));
        rest = poly_add(&rest, &scaled);
    }
    poly_div_exact(&rest, &BigInt::from(p).pow(k as u32))
}

/// The sum and product polynomials `S_0..S_{n-1}`, `P_0..P_{n-1}` over `Z`.
pub fn witt_polynomials(p: u64, n: usize) -> (Vec<IntPoly>, Vec<IntPoly>) {
    assert!((1..=MAX_LENGTH).contains(&n));
    let nvars = 2 * n;
    let mut sums: Vec<IntPoly> = Vec::new();
    let mut prods: Vec<IntPoly> = Vec::new();
    for k in 0..n {
        let gx = ghost(p, k, 0, nvars);
        let gy = ghost(p, k, n, nvars);
        let s = ghost_solve(p, &poly_add(&gx, &gy), &sums, nvars);
        let m = ghost_solve(p, &poly_mul(&gx, &gy), &prods, nvars);
        sums.push(s);
        prods.push(m);
    }
    (sums, prods)
}

/// A polynomial reduced mod `p`, ready for evaluation.
#[derive(Debug)]
struct ModPoly {
    terms: Vec<(Vec<u32>, u64)>,
}

impl ModPoly {
    fn from_int(poly: &IntPoly, p: u64) -> Self {
        let bp = BigInt::from(p);
        let terms = poly
            .iter()
            .filter_map(|(m, c)| {
                let r = ((c % &bp) + &bp) % &bp;
                let r: u64 = r.try_into().expect("residue fits");
                (r != 0).then(|| (m.clone(), r))
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, f: &FiniteField, vals: &[Fe]) -> Fe {
        // per-variable power cache keeps repeated exponents cheap
        let mut cache: Vec<HashMap<u32, Fe>> = vec![HashMap::new(); vals.len()];
        let mut acc = f.zero();
        for (mono, c) in &self.terms {
            let mut t = f.from_int(*c as i64);
            for (i, &e) in mono.iter().enumerate() {
                if e == 0 || t.is_zero() {
                    continue;
                }
                let pw = *cache[i].entry(e).or_insert_with(|| f.pow(&vals[i], e as u64));
                t = f.mul(&t, &pw);
            }
            acc = f.add(&acc, &t);
        }
        acc
    }
}

#[derive(Debug)]
struct WittTables {
    sums: Vec<ModPoly>,
    prods: Vec<ModPoly>,
}

static TABLES: OnceLock<Mutex<HashMap<(u64, usize), Arc<WittTables>>>> = OnceLock::new();

fn tables(p: u64, n: usize) -> Arc<WittTables> {
    let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("witt cache poisoned").get(&(p, n)) {
        return t.clone();
    }
    let (s, m) = witt_polynomials(p, n);
    let built = Arc::new(WittTables {
        sums: s.iter().map(|q| ModPoly::from_int(q, p)).collect(),
        prods: m.iter().map(|q| ModPoly::from_int(q, p)).collect(),
    });
    cache
        .lock()
        .expect("witt cache poisoned")
        .entry((p, n))
        .or_insert(built)
        .clone()
}

/// Largest prime allowed for each length; beyond it the tables grow too large.
pub fn max_prime_for_length(n: usize) -> u64 {
    match n {
        1 => u64::MAX,
        2 => 251,
        _ => 7,
    }
}

#[derive(Clone)]
pub struct WittRing {
    field: FiniteField,
    n: usize,
    tables: Arc<WittTables>,
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n
    }
}

impl Eq for WittRing {}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "W_{}(F_{}^{})",
            self.n,
            self.field.characteristic(),
            self.field.degree()
        )
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WittVector {
    comps: Vec<Fe>,
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("W").field(&self.comps).finish()
    }
}

impl WittVector {
    pub fn components(&self) -> &[Fe] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Fe::is_zero)
    }

    pub fn is_unit(&self) -> bool {
        !self.comps[0].is_zero()
    }
}

impl WittRing {
    pub fn new(field: &FiniteField, n: usize) -> Result<Self, WittError> {
        if !(1..=MAX_LENGTH).contains(&n) {
            return Err(WittError::LengthOutOfRange(n));
        }
        let p = field.characteristic();
        if p > max_prime_for_length(n) {
            return Err(WittError::PrimeTooLarge { p, n });
        }
        Ok(Self {
            field: field.clone(),
            n,
            tables: tables(p, n),
        })
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn from_components(&self, comps: Vec<Fe>) -> WittVector {
        assert_eq!(comps.len(), self.n);
        WittVector { comps }
    }

    pub fn zero(&self) -> WittVector {
        self.from_components(vec![self.field.zero(); self.n])
    }

    pub fn one(&self) -> WittVector {
        self.teichmuller(&self.field.one())
    }

    pub fn teichmuller(&self, a: &Fe) -> WittVector {
        let mut comps = vec![self.field.zero(); self.n];
        comps[0] = *a;
        WittVector { comps }
    }

    /// Image of an integer under `Z -> W_n(F_p) -> W_n(F_{p^r})`.
    pub fn from_int(&self, c: i64) -> WittVector {
        let comps = int_witt_components(self.characteristic(), self.n, c)
            .into_iter()
            .map(|x| self.field.from_int(x as i64))
            .collect();
        WittVector { comps }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> WittVector {
        WittVector {
            comps: (0..self.n).map(|_| self.field.random(rng)).collect(),
        }
    }

    fn combine(&self, polys: &[ModPoly], u: &WittVector, v: &WittVector) -> WittVector {
        let mut vals = u.comps.clone();
        vals.extend_from_slice(&v.comps);
        WittVector {
            comps: polys.iter().map(|q| q.eval(&self.field, &vals)).collect(),
        }
    }

    pub fn add(&self, u: &WittVector, v: &WittVector) -> WittVector {
        if self.n == 1 {
            return WittVector {
                comps: vec![self.field.add(&u.comps[0], &v.comps[0])],
            };
        }
        self.combine(&self.tables.sums, u, v)
    }

    pub fn mul(&self, u: &WittVector, v: &WittVector) -> WittVector {
        if self.n == 1 {
            return WittVector {
                comps: vec![self.field.mul(&u.comps[0], &v.comps[0])],
            };
        }
        self.combine(&self.tables.prods, u, v)
    }

    fn check(&self, u: &WittVector) -> Result<(), WittError> {
        let ok = u.comps.len() == self.n
            && u
                .comps
                .iter()
                .all(|c| self.field.coeffs(c).iter().all(|&x| (x as u64) < self.characteristic()));
        if ok {
            Ok(())
        } else {
            Err(WittError::RingMismatch)
        }
    }

    pub fn checked_add(&self, u: &WittVector, v: &WittVector) -> Result<WittVector, WittError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.add(u, v))
    }

    pub fn checked_mul(&self, u: &WittVector, v: &WittVector) -> Result<WittVector, WittError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.mul(u, v))
    }

    pub fn neg(&self, u: &WittVector) -> WittVector {
        self.mul(&self.from_int(-1), u)
    }

    pub fn sub(&self, u: &WittVector, v: &WittVector) -> WittVector {
        self.add(u, &self.neg(v))
    }

    pub fn pow(&self, u: &WittVector, mut e: u64) -> WittVector {
        let mut acc = self.one();
        let mut base = u.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `sigma^e`, componentwise `p^e`-th powers.
    pub fn frobenius_pow(&self, u: &WittVector, e: usize) -> WittVector {
        WittVector {
            comps: u.comps.iter().map(|c| self.field.frobenius_pow(c, e)).collect(),
        }
    }

    pub fn frobenius(&self, u: &WittVector) -> WittVector {
        self.frobenius_pow(u, 1)
    }

    /// Verschiebung `(x_0, .., x_{n-2}) -> (0, x_0, .., x_{n-2})`.
    pub fn verschiebung(&self, u: &WittVector) -> WittVector {
        let mut comps = vec![self.field.zero()];
        comps.extend_from_slice(&u.comps[..self.n - 1]);
        WittVector { comps }
    }

    /// Inverse by Newton iteration `y <- y (2 - x y)` from the Teichmuller inverse.
    pub fn invert(&self, u: &WittVector) -> Result<WittVector, WittError> {
        let a0 = self.field.inv(&u.comps[0]).ok_or(WittError::NotAUnit)?;
        let mut y = self.teichmuller(&a0);
        let two = self.from_int(2);
        let one = self.one();
        for _ in 0..self.n {
            if self.mul(u, &y) == one {
                break;
            }
            y = self.mul(&y, &self.sub(&two, &self.mul(u, &y)));
        }
        debug_assert_eq!(self.mul(u, &y), one);
        Ok(y)
    }

    /// Whether all components lie in `F_{p^d}`.
    pub fn lies_in(&self, u: &WittVector, d: usize) -> bool {
        u.comps.iter().all(|c| self.field.lies_in(c, d))
    }

    /// Componentwise image under a field embedding.
    pub fn embed(&self, target: &WittRing, emb: &Embedding, u: &WittVector) -> WittVector {
        debug_assert_eq!(target.field(), emb.target());
        WittVector {
            comps: u.comps.iter().map(|c| emb.apply(c)).collect(),
        }
    }

    /// The integer in `[0, p^n)` when `u` lies in `W_n(F_p) = Z/p^n`.
    pub fn to_prime_ring(&self, u: &WittVector) -> Option<u64> {
        if !self.lies_in(u, 1) {
            return None;
        }
        let p = self.characteristic();
        let digits: Vec<u64> = u.comps.iter().map(|c| c.coeff(0) as u64).collect();
        Some(int_from_witt_components(p, self.n, &digits))
    }
}

/// Witt components over `F_p` (as integers in `[0, p)`) of an integer.
pub fn int_witt_components(p: u64, n: usize, c: i64) -> Vec<u64> {
    let modulus = BigInt::from(p).pow(n as u32);
    let c = ((BigInt::from(c) % &modulus) + &modulus) % &modulus;
    // Ghost components of an integer are all equal to it.
    let ghosts = vec![c; n];
    ghost_inverse(p, &ghosts)
        .into_iter()
        .map(|x| {
            let r = ((x % p) + p) % p;
            u64::try_from(r).expect("digit fits")
        })
        .collect()
}

fn int_from_witt_components(p: u64, n: usize, digits: &[u64]) -> u64 {
    let gh = ghost_components(p, &digits.iter().map(|&d| BigInt::from(d)).collect::<Vec<_>>());
    let modulus = BigInt::from(p).pow(n as u32);
    let v = ((&gh[n - 1] % &modulus) + &modulus) % &modulus;
    u64::try_from(v).expect("fits")
}

/// Ghost components `w_k = sum_i p^i x_i^{p^{k-i}}` of an integral Witt vector.
pub fn ghost_components(p: u64, x: &[BigInt]) -> Vec<BigInt> {
    (0..x.len())
        .map(|k| {
            (0..=k)
                .map(|i| BigInt::from(p).pow(i as u32) * x[i].pow(p.pow((k - i) as u32) as u32))
                .sum()
        })
        .collect()
}

/// Integral Witt vector with the given ghost components; panics unless the inversion is exact.
pub fn ghost_inverse(p: u64, w: &[BigInt]) -> Vec<BigInt> {
    let mut x: Vec<BigInt> = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let mut rest = w[k].clone();
        for (i, xi) in x.iter().enumerate() {
            rest -= BigInt::from(p).pow(i as u32) * xi.pow(p.pow((k - i) as u32) as u32);
        }
        let d = BigInt::from(p).pow(k as u32);
        assert!((&rest % &d).is_zero(), "ghost vector is not integral");
        x.push(rest / d);
    }
    x
}
