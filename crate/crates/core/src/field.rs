//! Finite fields `F_{p^r}` in a polynomial basis.
//!
//! A field is fixed by `(p, r)`: the modulus is the smallest monic irreducible
//! polynomial of degree `r`, where polynomials are ordered by the integer
//! `sum c_i p^i` of their non-leading coefficients. Prime fields use the
//! modulus `x`, so the class of `x` is zero there.
//!
//! Elements are plain coefficient arrays ([`Fe`]); every operation goes
//! through the owning [`FiniteField`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use thiserror::Error;

/// Largest supported extension degree over the prime field.
pub const MAX_DEGREE: usize = 16;

/// Largest field size that may be constructed or enumerated.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("field of size {p}^{r} exceeds the enumeration cap 2^24")]
    TooLarge { p: u64, r: usize },
    #[error("{sub} does not divide the extension degree {degree}")]
    NotADivisor { sub: usize, degree: usize },
    #[error("cannot embed F_(p^{from}) into F_(p^{to})")]
    NoEmbedding { from: usize, to: usize },
    #[error("fields have different characteristics ({0} and {1})")]
    CharacteristicMismatch(u64, u64),
    #[error("the zero polynomial has no finite root count")]
    ZeroPolynomial,
}

/// A field element: coefficients of `1, x, ..., x^(r-1)`, each reduced mod `p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fe(pub(crate) [u32; MAX_DEGREE]);

impl Fe {
    pub(crate) const ZERO: Fe = Fe([0; MAX_DEGREE]);

    pub fn coeff(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).unwrap_or(0);
        write!(f, "Fe{:?}", &self.0[..=last])
    }
}

// Integer order on `sum c_i p^i`: compare from the top coefficient down.
impl Ord for Fe {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for Fe {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct FieldInner {
    p: u32,
    r: usize,
    order: u64,
    /// Non-leading coefficients of the monic modulus.
    modulus: [u32; MAX_DEGREE],
    /// `p - modulus[i]`, used during reduction.
    neg_modulus: [u64; MAX_DEGREE],
}

/// The finite field `F_{p^r}`. Cloning is cheap.
#[derive(Clone)]
pub struct FiniteField(Arc<FieldInner>);

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.r == other.0.r && self.0.modulus == other.0.modulus
    }
}

impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.0.p, self.0.r, self.modulus())
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn checked_order(p: u64, r: usize) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..r {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// Remainder of `f` modulo the monic `g` over `F_p` (coefficients constant first).
fn poly_rem_monic(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut rem = f.to_vec();
    let dg = g.len() - 1;
    while rem.len() > dg {
        let lead = rem[rem.len() - 1] % p;
        let shift = rem.len() - 1 - dg;
        if lead != 0 {
            for (i, &gc) in g.iter().enumerate() {
                rem[shift + i] = (rem[shift + i] + (p - lead) * gc) % p;
            }
        }
        rem.pop();
    }
    rem
}

/// Exhaustive trial division by every monic polynomial of degree `1..=r/2`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = f.len() - 1;
    if r <= 1 {
        return true;
    }
    for k in 1..=r / 2 {
        let count = checked_order(p, k).expect("divisor degree within cap");
        let mut g = vec![0u64; k + 1];
        g[k] = 1;
        for idx in 0..count {
            let mut t = idx;
            for c in g.iter_mut().take(k) {
                *c = t % p;
                t /= p;
            }
            if poly_rem_monic(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

static FIELD_CACHE: OnceLock<Mutex<HashMap<(u32, usize), FiniteField>>> = OnceLock::new();

/// Builds `F_{p^r}` with the smallest monic irreducible modulus.
pub fn build_field(p: u64, r: usize) -> Result<FiniteField, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if r == 0 || r > MAX_DEGREE {
        return Err(FieldError::DegreeOutOfRange(r));
    }
    let order = match checked_order(p, r) {
        Some(q) if q <= ENUMERATION_CAP => q,
        _ => return Err(FieldError::TooLarge { p, r }),
    };
    let key = (p as u32, r);
    let cache = FIELD_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().expect("field cache poisoned").get(&key) {
        return Ok(f.clone());
    }
    let mut modulus = [0u32; MAX_DEGREE];
    let mut poly = vec![0u64; r + 1];
    poly[r] = 1;
    let mut found = false;
    for idx in 0..order {
        let mut t = idx;
        for c in poly.iter_mut().take(r) {
            *c = t % p;
            t /= p;
        }
        if is_irreducible(&poly, p) {
            for i in 0..r {
                modulus[i] = poly[i] as u32;
            }
            found = true;
            break;
        }
    }
    assert!(found, "no irreducible polynomial of degree {r} over F_{p}");
    let mut neg_modulus = [0u64; MAX_DEGREE];
    for i in 0..r {
        neg_modulus[i] = (p - modulus[i] as u64) % p;
    }
    let field = FiniteField(Arc::new(FieldInner {
        p: p as u32,
        r,
        order,
        modulus,
        neg_modulus,
    }));
    cache
        .lock()
        .expect("field cache poisoned")
        .entry(key)
        .or_insert_with(|| field.clone());
    Ok(field)
}

impl FiniteField {
    pub fn characteristic(&self) -> u64 {
        self.0.p as u64
    }

    pub fn degree(&self) -> usize {
        self.0.r
    }

    pub fn order(&self) -> u64 {
        self.0.order
    }

    /// Full modulus, constant term first, including the leading 1.
    pub fn modulus(&self) -> Vec<u32> {
        let mut m = self.0.modulus[..self.0.r].to_vec();
        m.push(1);
        m
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        self.from_int(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, c: i64) -> Fe {
        let p = self.0.p as i64;
        let mut e = Fe::ZERO;
        e.0[0] = c.rem_euclid(p) as u32;
        e
    }

    /// Class of `x`. Zero in a prime field.
    pub fn gen(&self) -> Fe {
        if self.0.r == 1 {
            return self.from_int(-(self.0.modulus[0] as i64));
        }
        let mut e = Fe::ZERO;
        e.0[1] = 1;
        e
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Fe {
        // Reduce an arbitrary-length polynomial modulo the field modulus.
        let p = self.0.p as i64;
        let mut acc = self.zero();
        let x = self.gen();
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, &x);
            acc = self.add(&acc, &self.from_int(c.rem_euclid(p)));
        }
        acc
    }

    pub fn coeffs<'a>(&self, x: &'a Fe) -> &'a [u32] {
        &x.0[..self.0.r]
    }

    /// Element whose coefficients are the base-`p` digits of `idx`.
    pub fn from_index(&self, mut idx: u64) -> Fe {
        debug_assert!(idx < self.0.order);
        let p = self.0.p as u64;
        let mut e = Fe::ZERO;
        for i in 0..self.0.r {
            e.0[i] = (idx % p) as u32;
            idx /= p;
        }
        e
    }

    pub fn index(&self, x: &Fe) -> u64 {
        let p = self.0.p as u64;
        x.0[..self.0.r]
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.0.order).map(move |i| self.from_index(i))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        let mut e = Fe::ZERO;
        for i in 0..self.0.r {
            e.0[i] = rng.gen_range(0..self.0.p);
        }
        e
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        let p = self.0.p as u64;
        let mut e = Fe::ZERO;
        for i in 0..self.0.r {
            e.0[i] = ((a.0[i] as u64 + b.0[i] as u64) % p) as u32;
        }
        e
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        let p = self.0.p;
        let mut e = Fe::ZERO;
        for i in 0..self.0.r {
            e.0[i] = if a.0[i] == 0 { 0 } else { p - a.0[i] };
        }
        e
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, c: i64, a: &Fe) -> Fe {
        self.mul(&self.from_int(c), a)
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let r = self.0.r;
        let p = self.0.p as u64;
        let mut e = Fe::ZERO;
        if r == 1 {
            e.0[0] = ((a.0[0] as u64 * b.0[0] as u64) % p) as u32;
            return e;
        }
        let mut t = [0u64; 2 * MAX_DEGREE];
        for i in 0..r {
            let ai = a.0[i] as u64;
            if ai == 0 {
                continue;
            }
            for j in 0..r {
                t[i + j] += ai * b.0[j] as u64;
            }
        }
        for k in (r..2 * r - 1).rev() {
            let c = t[k] % p;
            if c == 0 {
                continue;
            }
            for i in 0..r {
                t[k - r + i] += c * self.0.neg_modulus[i];
            }
        }
        for i in 0..r {
            e.0[i] = (t[i] % p) as u32;
        }
        e
    }

    pub fn square(&self, a: &Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Fe, mut e: u64) -> Fe {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    pub fn inv(&self, a: &Fe) -> Option<Fe> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.0.order - 2))
        }
    }

    pub fn div(&self, a: &Fe, b: &Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// `x^(p^e)`.
    pub fn frobenius_pow(&self, x: &Fe, e: usize) -> Fe {
        let p = self.0.p as u64;
        let mut y = *x;
        for _ in 0..(e % self.0.r) {
            y = self.pow(&y, p);
        }
        y
    }

    /// Whether `x` lies in the subfield `F_{p^d}` (not necessarily a divisor of `r`).
    pub fn lies_in(&self, x: &Fe, d: usize) -> bool {
        self.frobenius_pow(x, d) == *x
    }

    fn check_divisor(&self, sub: usize) -> Result<usize, FieldError> {
        if sub == 0 || !self.0.r.is_multiple_of(sub) {
            return Err(FieldError::NotADivisor {
                sub,
                degree: self.0.r,
            });
        }
        Ok(self.0.r / sub)
    }

    /// Trace to the subfield `F_{p^sub}`.
    pub fn rel_trace(&self, x: &Fe, sub: usize) -> Result<Fe, FieldError> {
        let steps = self.check_divisor(sub)?;
        let mut acc = self.zero();
        let mut y = *x;
        for _ in 0..steps {
            acc = self.add(&acc, &y);
            y = self.frobenius_pow(&y, sub);
        }
        Ok(acc)
    }

    /// Norm to the subfield `F_{p^sub}`.
    pub fn rel_norm(&self, x: &Fe, sub: usize) -> Result<Fe, FieldError> {
        let steps = self.check_divisor(sub)?;
        let mut acc = self.one();
        let mut y = *x;
        for _ in 0..steps {
            acc = self.mul(&acc, &y);
            y = self.frobenius_pow(&y, sub);
        }
        Ok(acc)
    }

    /// Legendre-style quadratic character: 0, 1 or -1. Characteristic 2 returns 1 on units.
    pub fn quadratic_character(&self, a: &Fe) -> i32 {
        if a.is_zero() {
            return 0;
        }
        if self.0.p == 2 {
            return 1;
        }
        if self.pow(a, (self.0.order - 1) / 2) == self.one() {
            1
        } else {
            -1
        }
    }

    /// A square root of `a`, if one exists (Tonelli-Shanks).
    pub fn sqrt(&self, a: &Fe) -> Option<Fe> {
        if a.is_zero() {
            return Some(*a);
        }
        let q = self.0.order;
        if self.0.p == 2 {
            return Some(self.pow(a, q / 2));
        }
        if self.quadratic_character(a) != 1 {
            return None;
        }
        let mut s = 0u32;
        let mut t = q - 1;
        while t.is_multiple_of(2) {
            t /= 2;
            s += 1;
        }
        let non_residue = self
            .elements()
            .find(|z| self.quadratic_character(z) == -1)
            .expect("odd field has a non-residue");
        let mut m = s;
        let mut c = self.pow(&non_residue, t);
        let mut tt = self.pow(a, t);
        let mut root = self.pow(a, t.div_ceil(2));
        while tt != self.one() {
            let mut i = 0u32;
            let mut probe = tt;
            while probe != self.one() {
                probe = self.square(&probe);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(&b);
            }
            m = i;
            c = self.square(&b);
            tt = self.mul(&tt, &c);
            root = self.mul(&root, &b);
        }
        Some(root)
    }

    /// The smallest (in index order) generator of the multiplicative group.
    pub fn primitive_element(&self) -> Fe {
        let q = self.0.order;
        if q == 2 {
            return self.one();
        }
        let factors = prime_factors(q - 1);
        (1..q)
            .map(|i| self.from_index(i))
            .find(|g| factors.iter().all(|&l| self.pow(g, (q - 1) / l) != self.one()))
            .expect("finite field has a primitive element")
    }

    /// Evaluates a polynomial with coefficients in this field (constant first).
    pub fn eval_poly(&self, poly: &[Fe], x: &Fe) -> Fe {
        poly.iter()
            .rev()
            .fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }
}

/// A field homomorphism `F_{p^r} -> F_{p^(r s)}`, fixed by the image of `x`.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FiniteField,
    target: FiniteField,
    generator_image: Fe,
}

impl Embedding {
    /// The embedding sending `x` to the smallest root of the source modulus in the target.
    pub fn new(source: &FiniteField, target: &FiniteField) -> Result<Self, FieldError> {
        if source.characteristic() != target.characteristic() {
            return Err(FieldError::CharacteristicMismatch(
                source.characteristic(),
                target.characteristic(),
            ));
        }
        if !target.degree().is_multiple_of(source.degree()) {
            return Err(FieldError::NoEmbedding {
                from: source.degree(),
                to: target.degree(),
            });
        }
        let modulus: Vec<Fe> = source
            .modulus()
            .iter()
            .map(|&c| target.from_int(c as i64))
            .collect();
        let generator_image = if source.degree() == 1 {
            target.from_int(-(source.modulus()[0] as i64))
        } else if source == target {
            target.gen()
        } else {
            // Roots lie in the subgroup of order q_s - 1 of the target's unit group.
            let q_t = target.order();
            let q_s = source.order();
            let g = target.primitive_element();
            let h = target.pow(&g, (q_t - 1) / (q_s - 1));
            let mut y = target.one();
            let mut best: Option<Fe> = None;
            for _ in 0..(q_s - 1) {
                if target.eval_poly(&modulus, &y).is_zero() && best.is_none_or(|b| y < b) {
                    best = Some(y);
                }
                y = target.mul(&y, &h);
            }
            best.expect("source modulus splits in the target")
        };
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            generator_image,
        })
    }

    pub fn source(&self) -> &FiniteField {
        &self.source
    }

    pub fn target(&self) -> &FiniteField {
        &self.target
    }

    pub fn generator_image(&self) -> Fe {
        self.generator_image
    }

    pub fn apply(&self, x: &Fe) -> Fe {
        let t = &self.target;
        self.source
            .coeffs(x)
            .iter()
            .rev()
            .fold(t.zero(), |acc, &c| {
                t.add(&t.mul(&acc, &self.generator_image), &t.from_int(c as i64))
            })
    }
}

/// Number of distinct roots in `emb.target()` of a polynomial over `emb.source()`.
pub fn count_roots(poly: &[Fe], emb: &Embedding) -> Result<u64, FieldError> {
    let src = emb.source();
    if poly.iter().all(|c| c.is_zero()) {
        return Err(FieldError::ZeroPolynomial);
    }
    let target = emb.target();
    let terms: Vec<(u64, Fe)> = poly
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as u64, emb.apply(c)))
        .collect();
    debug_assert!(poly.iter().all(|c| src.coeffs(c).len() == src.degree()));
    if target.order() <= 1 << 12 {
        let count = target
            .elements()
            .filter(|x| {
                terms
                    .iter()
                    .fold(target.zero(), |acc, (e, c)| {
                        target.add(&acc, &target.mul(c, &target.pow(x, *e)))
                    })
                    .is_zero()
            })
            .count();
        return Ok(count as u64);
    }
    let table = crate::table::TableField::cached(target);
    let terms: Vec<(u64, u32)> = terms.iter().map(|(e, c)| (*e, table.from_fe(c))).collect();
    let count = (0..target.order())
        .filter(|&idx| {
            let x = table.from_index(idx);
            let mut acc = table.zero();
            for (e, c) in &terms {
                acc = table.add(acc, table.mul(*c, table.pow(x, *e)));
            }
            acc == table.zero()
        })
        .count();
    Ok(count as u64)
}
