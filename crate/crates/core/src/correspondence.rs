//! Correspondences `(g, id)` with `g` an affine map of the line or
//! `tau_P o [e k]` on an elliptic curve; fixed points of `Fr^m o g` by closed
//! formula and by exhaustive search, and local-term sums for constant sheaves.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::curve::{CurveError, EllipticCurve, Point, TableCurve, TablePoint};
use crate::field::{build_field, Embedding, Fe, FieldError, FiniteField};
use crate::semilinear::Budget;
use crate::table::TableField;
use crate::zpn::{Matrix, Zpn};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrespondenceError {
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("sign must be +1 or -1")]
    BadSign,
    #[error("k must be at least 1")]
    BadMultiplier,
    #[error("translation point is not on the curve")]
    NotOnCurve,
    #[error("fixed-point set is incomplete; local terms need every fixed point")]
    Incomplete,
    #[error("twist m must be at least 1")]
    ZeroTwist,
    #[error("sheaf endomorphism must be {0}x{0}")]
    SheafShape(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Correspondence {
    /// `g(x) = alpha x + beta` on the affine line.
    AffineLine {
        field: FiniteField,
        alpha: Fe,
        beta: Fe,
    },
    /// `g = tau_P o [sign k]`.
    Elliptic {
        curve: EllipticCurve,
        translation: Point,
        sign: i8,
        k: u64,
    },
}

impl Correspondence {
    pub fn affine_line(field: &FiniteField, alpha: Fe, beta: Fe) -> Result<Self, CorrespondenceError> {
        if alpha.is_zero() {
            return Err(CorrespondenceError::ZeroAlpha);
        }
        Ok(Self::AffineLine {
            field: field.clone(),
            alpha,
            beta,
        })
    }

    pub fn elliptic(
        curve: &EllipticCurve,
        translation: Point,
        sign: i8,
        k: u64,
    ) -> Result<Self, CorrespondenceError> {
        if sign != 1 && sign != -1 {
            return Err(CorrespondenceError::BadSign);
        }
        if k == 0 {
            return Err(CorrespondenceError::BadMultiplier);
        }
        if !curve.contains(&translation) {
            return Err(CorrespondenceError::NotOnCurve);
        }
        Ok(Self::Elliptic {
            curve: curve.clone(),
            translation,
            sign,
            k,
        })
    }

    pub fn field(&self) -> &FiniteField {
        match self {
            Self::AffineLine { field, .. } => field,
            Self::Elliptic { curve, .. } => curve.field(),
        }
    }

    pub fn q(&self) -> u64 {
        self.field().order()
    }

    /// Order of `g` when it is visibly finite.
    fn finite_order(&self) -> Option<u64> {
        match self {
            Self::Elliptic {
                curve,
                translation,
                sign: 1,
                k: 1,
            } => Some(curve.order_of(translation)),
            Self::Elliptic { sign: -1, k: 1, .. } => Some(2),
            _ => None,
        }
    }

    /// `g` on a rational point of the curve.
    pub fn apply_rational(&self, pt: &Point) -> Option<Point> {
        match self {
            Self::Elliptic {
                curve,
                translation,
                sign,
                k,
            } => Some(curve.add(&curve.mul(*sign as i64 * *k as i64, pt), translation)),
            Self::AffineLine { .. } => None,
        }
    }
}

/// Constant sheaf `(Z/p^n)^rank` with endomorphism `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafDatum {
    u: Matrix,
}

impl SheafDatum {
    pub fn new(u: Matrix) -> Result<Self, CorrespondenceError> {
        if u.nrows() != u.ncols() {
            return Err(CorrespondenceError::SheafShape(u.nrows()));
        }
        Ok(Self { u })
    }

    /// `c * id` on `(Z/p^n)^rank`.
    pub fn scalar(p: u64, n: u32, rank: usize, c: i64) -> Self {
        let ring = Zpn::new(p, n);
        Self {
            u: Matrix::identity(ring, rank).scale(ring.reduce_int(c as i128)),
        }
    }

    pub fn ring(&self) -> Zpn {
        self.u.ring()
    }

    pub fn rank(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn trace(&self) -> u64 {
        self.u.trace()
    }
}

/// A fixed point with coordinates as element indices of the enumeration field.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedPoint {
    /// `[]` for the origin, `[x]` on the line, `[x, y]` on a curve.
    pub coords: Vec<u64>,
    /// Degree over `F_q` of the field generated by the coordinates.
    pub residue_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointSet {
    pub m: usize,
    /// Enumeration field `F_{p^field_degree}`; when incomplete, the last field
    /// searched or the one that was over budget.
    pub field_degree: usize,
    pub points: Vec<FixedPoint>,
    pub complete: bool,
}

impl FixedPointSet {
    pub fn count(&self) -> u64 {
        self.points.len() as u64
    }

    /// The set with its smallest point removed.
    pub fn without_first(&self) -> FixedPointSet {
        let mut out = self.clone();
        if !out.points.is_empty() {
            out.points.remove(0);
        }
        out
    }
}

/// `#Fix(Fr^m o g)` by the degree formula.
pub fn fix_count(corr: &Correspondence, m: usize) -> i128 {
    let q = corr.q() as i128;
    match corr {
        Correspondence::AffineLine { .. } => q.pow(m as u32),
        Correspondence::Elliptic { curve, sign, k, .. } => {
            let k = *k as i128;
            let e = *sign as i128;
            k * k * q.pow(m as u32) - e * k * curve.trace_recurrence(m) + 1
        }
    }
}

fn field_size(p: u64, degree: usize) -> Option<u64> {
    (0..degree).try_fold(1u64, |acc, _| acc.checked_mul(p))
}

fn within(p: u64, degree: usize, budget: Budget) -> bool {
    degree <= crate::field::MAX_DEGREE
        && field_size(p, degree).is_some_and(|s| s <= budget.max_field_size)
}

/// Least `s` dividing `ext` with every coordinate fixed by `Fr_q^s`.
fn residue_degree(table: &TableField, coords: &[u32], big_d: usize, ext: usize) -> usize {
    (1..=ext)
        .filter(|s| ext.is_multiple_of(*s))
        .find(|s| coords.iter().all(|&c| table.frobenius_pow(c, big_d * s) == c))
        .expect("ext itself always works")
}

fn affine_fixed_points(
    field: &FiniteField,
    alpha: &Fe,
    beta: &Fe,
    m: usize,
    ext: usize,
) -> Result<Vec<FixedPoint>, CorrespondenceError> {
    let big_d = field.degree();
    let big = build_field(field.characteristic(), big_d * ext)?;
    let emb = Embedding::new(field, &big)?;
    let t = TableField::cached(&big);
    let a = t.from_fe(&emb.apply(alpha));
    let b = t.from_fe(&emb.apply(beta));
    let mut pts = Vec::new();
    for idx in 0..t.order() {
        let z = t.from_index(idx);
        if t.add(t.mul(a, t.frobenius_pow(z, big_d * m)), b) == z {
            pts.push(FixedPoint {
                coords: vec![idx],
                residue_degree: residue_degree(&t, &[z], big_d, ext),
            });
        }
    }
    Ok(pts)
}

fn elliptic_fixed_points(
    corr: &Correspondence,
    m: usize,
    ext: usize,
) -> Result<Vec<FixedPoint>, CorrespondenceError> {
    let Correspondence::Elliptic {
        curve,
        translation,
        sign,
        k,
    } = corr
    else {
        unreachable!("elliptic correspondence expected")
    };
    let big_d = curve.field().degree();
    if *sign == 1 && *k == 1 {
        let buckets = translation_buckets(curve, m, ext)?;
        return Ok(buckets
            .get(&buckets_key(curve, big_d * ext, translation)?)
            .cloned()
            .unwrap_or_default());
    }
    let tc: TableCurve = curve.over(big_d * ext)?;
    let t = &tc.table;
    let shift = tc.embed_point(translation);
    let mult = *sign as i64 * *k as i64;
    let mut pts = Vec::new();
    tc.for_each_point(|z: TablePoint| {
        let gz = tc.add(tc.mul(mult, z), shift);
        if tc.frobenius_pow(gz, big_d * m) == z {
            let (coords, raw) = match z {
                None => (vec![], vec![]),
                Some((x, y)) => (vec![t.index(x), t.index(y)], vec![x, y]),
            };
            pts.push(FixedPoint {
                coords,
                residue_degree: residue_degree(t, &raw, big_d, ext),
            });
        }
    });
    pts.sort();
    Ok(pts)
}

fn buckets_key(curve: &EllipticCurve, degree: usize, pt: &Point) -> Result<TablePoint, CorrespondenceError> {
    Ok(curve.over(degree)?.embed_point(pt))
}

type Buckets = HashMap<TablePoint, Vec<FixedPoint>>;

static TRANSLATION_CACHE: OnceLock<Mutex<HashMap<(String, usize, usize), Arc<Buckets>>>> = OnceLock::new();

/// Fixed points of `Fr^m o tau_P` over `F_{q^ext}` for every rational `P` in one
/// pass: `z` is fixed exactly when `z - Fr^m(z) = P`.
fn translation_buckets(curve: &EllipticCurve, m: usize, ext: usize) -> Result<Arc<Buckets>, CorrespondenceError> {
    let key = (format!("{curve:?}"), m, ext);
    let cache = TRANSLATION_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("translation cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let big_d = curve.field().degree();
    let tc = curve.over(big_d * ext)?;
    let t = &tc.table;
    let rational = |c: u32| t.frobenius_pow(c, big_d) == c;
    let mut buckets = Buckets::new();
    tc.for_each_point(|z: TablePoint| {
        let d = tc.add(z, tc.neg(tc.frobenius_pow(z, big_d * m)));
        if d.is_none_or(|(x, y)| rational(x) && rational(y)) {
            let (coords, raw) = match z {
                None => (vec![], vec![]),
                Some((x, y)) => (vec![t.index(x), t.index(y)], vec![x, y]),
            };
            buckets.entry(d).or_default().push(FixedPoint {
                coords,
                residue_degree: residue_degree(t, &raw, big_d, ext),
            });
        }
    });
    for pts in buckets.values_mut() {
        pts.sort();
    }
    let buckets = Arc::new(buckets);
    cache
        .lock()
        .expect("translation cache poisoned")
        .insert(key, buckets.clone());
    Ok(buckets)
}

type OracleKey = (String, usize, u64);

static ORACLE_CACHE: OnceLock<Mutex<HashMap<OracleKey, FixedPointSet>>> = OnceLock::new();

/// Exhaustive search for the fixed points of `Fr^m o g` over growing extensions.
pub fn brute_force_fixed_points(
    corr: &Correspondence,
    m: usize,
    budget: Budget,
) -> Result<FixedPointSet, CorrespondenceError> {
    if m == 0 {
        return Err(CorrespondenceError::ZeroTwist);
    }
    let key = (format!("{corr:?}"), m, budget.max_field_size);
    let cache = ORACLE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("oracle cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let result = brute_force_uncached(corr, m, budget)?;
    cache
        .lock()
        .expect("oracle cache poisoned")
        .insert(key, result.clone());
    Ok(result)
}

fn brute_force_uncached(
    corr: &Correspondence,
    m: usize,
    budget: Budget,
) -> Result<FixedPointSet, CorrespondenceError> {
    let p = corr.field().characteristic();
    let big_d = corr.field().degree();
    let expected = fix_count(corr, m);
    let search = |ext: usize| -> Result<Vec<FixedPoint>, CorrespondenceError> {
        match corr {
            Correspondence::AffineLine { field, alpha, beta } => {
                affine_fixed_points(field, alpha, beta, m, ext)
            }
            Correspondence::Elliptic { .. } => elliptic_fixed_points(corr, m, ext),
        }
    };
    if let Some(order) = corr.finite_order() {
        // (Fr^m o g)^order = Fr^{m order}, so every fixed point is rational there
        let ext = m * order as usize;
        if within(p, big_d * ext, budget) {
            return Ok(FixedPointSet {
                m,
                field_degree: big_d * ext,
                points: search(ext)?,
                complete: true,
            });
        }
        return Ok(FixedPointSet {
            m,
            field_degree: big_d * ext,
            points: Vec::new(),
            complete: false,
        });
    }
    let mut last = FixedPointSet {
        m,
        field_degree: big_d * m,
        points: Vec::new(),
        complete: false,
    };
    let mut j = 1;
    while within(p, big_d * m * j, budget) {
        let points = search(m * j)?;
        let complete = points.len() as i128 == expected;
        last = FixedPointSet {
            m,
            field_degree: big_d * m * j,
            points,
            complete,
        };
        if complete {
            break;
        }
        j += 1;
    }
    Ok(last)
}

/// `sum_z Tr(u_z)` over a complete fixed-point set: `count * Tr(u)` in `Z/p^n`.
pub fn local_term_sum(sheaf: &SheafDatum, fixset: &FixedPointSet) -> Result<u64, CorrespondenceError> {
    if !fixset.complete {
        return Err(CorrespondenceError::Incomplete);
    }
    Ok(local_term_from_count(sheaf, fixset.count() as i128))
}

/// `count * Tr(u)` in `Z/p^n`.
pub fn local_term_from_count(sheaf: &SheafDatum, count: i128) -> u64 {
    let ring = sheaf.ring();
    ring.mul(ring.reduce_int(count), sheaf.trace())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationCheck {
    pub expected: u64,
    /// `(P, count, complete)` for every rational `P`.
    pub rows: Vec<(Point, u64, bool)>,
}

impl TranslationCheck {
    /// Every complete count equals `#E(F_{q^m})`.
    pub fn holds(&self) -> bool {
        self.rows
            .iter()
            .all(|(_, c, complete)| !complete || *c == self.expected)
    }

    pub fn complete_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.2).count()
    }
}

/// `#Fix(Fr^m o tau_P)` for every rational `P`, against `#E(F_{q^m})`.
pub fn translation_independence_check(
    curve: &EllipticCurve,
    m: usize,
    budget: Budget,
) -> Result<TranslationCheck, CorrespondenceError> {
    let expected = curve.point_count(m, budget)?;
    let mut rows = Vec::new();
    for pt in curve.rational_points() {
        let corr = Correspondence::elliptic(curve, pt, 1, 1)?;
        let fs = brute_force_fixed_points(&corr, m, budget)?;
        rows.push((pt, fs.count(), fs.complete));
    }
    Ok(TranslationCheck { expected, rows })
}
