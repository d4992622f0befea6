//! Elliptic and odd-characteristic hyperelliptic curves `y^2 = f(x)`:
//! Hasse-Witt matrices, point counts, and the Artin-Schreier description of
//! `H^1(E, Z/p)` as the fixed module of the Hasse-Witt operator.

use std::sync::Arc;

use thiserror::Error;

use crate::correspondence::Correspondence;
use crate::field::{build_field, Embedding, Fe, FieldError, FiniteField};
use crate::semilinear::{Budget, FixedModule, SemilinearError, SemilinearModule, WittMatrix};
use crate::table::TableField;
use crate::witt::WittRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve models y^2 = f(x) need odd characteristic")]
    CharacteristicTwo,
    #[error("f is not squarefree (discriminant zero)")]
    Singular,
    #[error("f must have odd degree 2g+1 >= 3")]
    BadDegree,
    #[error("coefficient count must be 3 (monic cubic) or 4 (leading 1)")]
    BadCoefficients,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("enumeration over F_(p^{0}) exceeds the budget")]
    BudgetExceeded(usize),
    #[error("Hasse-Witt and point count disagree on supersingularity")]
    Inconsistent,
    #[error("correspondence is not a group endomorphism of this curve")]
    Unsupported,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
}

/// Point of an elliptic curve over its base field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Infinity,
    Affine(Fe, Fe),
}

fn poly_mul(f: &FiniteField, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    out
}

fn poly_pow(f: &FiniteField, a: &[Fe], e: u64) -> Vec<Fe> {
    let mut acc = vec![f.one()];
    for _ in 0..e {
        acc = poly_mul(f, &acc, a);
    }
    acc
}

fn poly_trim(f: &FiniteField, mut a: Vec<Fe>) -> Vec<Fe> {
    while a.last().is_some_and(|c| *c == f.zero()) {
        a.pop();
    }
    a
}

fn poly_rem(f: &FiniteField, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let mut r = a.to_vec();
    let lead_inv = f.inv(b.last().expect("nonzero divisor")).expect("nonzero lead");
    while r.len() >= b.len() {
        let c = f.mul(r.last().expect("nonempty"), &lead_inv);
        let shift = r.len() - b.len();
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = f.sub(&r[shift + i], &f.mul(&c, bi));
        }
        r.pop();
        r = poly_trim(f, r);
    }
    r
}

fn is_squarefree(f: &FiniteField, poly: &[Fe]) -> bool {
    let deriv: Vec<Fe> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| f.scale(i as i64, c))
        .collect();
    let (mut a, mut b) = (poly_trim(f, poly.to_vec()), poly_trim(f, deriv));
    while !b.is_empty() {
        let r = poly_rem(f, &a, &b);
        a = b;
        b = r;
    }
    a.len() == 1
}

/// Entry `(i, j)` is the coefficient of `x^{p i - j}` in `f^{(p-1)/2}`, for `1 <= i, j <= g`.
fn hasse_witt_matrix(field: &FiniteField, f: &[Fe], genus: usize) -> Vec<Vec<Fe>> {
    let p = field.characteristic();
    let h = poly_pow(field, f, (p - 1) / 2);
    (1..=genus)
        .map(|i| {
            (1..=genus)
                .map(|j| {
                    let e = p as usize * i - j;
                    h.get(e).copied().unwrap_or(field.zero())
                })
                .collect()
        })
        .collect()
}

/// `y^2 = x^3 + a2 x^2 + a1 x + a0` over `F_q`, `p >= 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticCurve {
    field: FiniteField,
    /// `[a0, a1, a2]`
    a: [Fe; 3],
}

impl EllipticCurve {
    /// Coefficients constant term first; a fourth coefficient must be the leading 1.
    pub fn new(field: &FiniteField, coeffs: &[Fe]) -> Result<Self, CurveError> {
        if field.characteristic() == 2 {
            return Err(CurveError::CharacteristicTwo);
        }
        let a = match coeffs {
            [a0, a1, a2] => [*a0, *a1, *a2],
            [a0, a1, a2, lead] if *lead == field.one() => [*a0, *a1, *a2],
            _ => return Err(CurveError::BadCoefficients),
        };
        let curve = Self {
            field: field.clone(),
            a,
        };
        if curve.discriminant().is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(curve)
    }

    pub fn from_ints(field: &FiniteField, coeffs: &[i64]) -> Result<Self, CurveError> {
        let c: Vec<Fe> = coeffs.iter().map(|&x| field.from_int(x)).collect();
        Self::new(field, &c)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    /// `[a0, a1, a2, 1]`.
    pub fn f(&self) -> Vec<Fe> {
        let mut v = self.a.to_vec();
        v.push(self.field.one());
        v
    }

    pub fn coefficients(&self) -> [Fe; 3] {
        self.a
    }

    /// Discriminant of the cubic `f`.
    pub fn discriminant(&self) -> Fe {
        let f = &self.field;
        let [d, c, b] = self.a;
        let k = |n: i64, x: Fe| f.scale(n, &x);
        let b2 = f.square(&b);
        let c2 = f.square(&c);
        let terms = [
            k(18, f.mul(&f.mul(&b, &c), &d)),
            k(-4, f.mul(&f.mul(&b2, &b), &d)),
            f.mul(&b2, &c2),
            k(-4, f.mul(&c2, &c)),
            k(-27, f.square(&d)),
        ];
        terms.iter().fold(f.zero(), |acc, t| f.add(&acc, t))
    }

    pub fn eval_f(&self, x: &Fe) -> Fe {
        self.field.eval_poly(&self.f(), x)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine(x, y) => self.field.square(y) == self.eval_f(x),
        }
    }

    /// All of `E(F_q)`, sorted with the origin first.
    pub fn rational_points(&self) -> Vec<Point> {
        let f = &self.field;
        let mut pts = vec![Point::Infinity];
        for x in f.elements() {
            let r = self.eval_f(&x);
            if let Some(y) = f.sqrt(&r) {
                pts.push(Point::Affine(x, y));
                if !y.is_zero() {
                    pts.push(Point::Affine(x, f.neg(&y)));
                }
            }
        }
        pts.sort();
        pts
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(*x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p1: &Point, p2: &Point) -> Point {
        let f = &self.field;
        let (x1, y1, x2, y2) = match (p1, p2) {
            (Point::Infinity, _) => return *p2,
            (_, Point::Infinity) => return *p1,
            (Point::Affine(a, b), Point::Affine(c, d)) => (*a, *b, *c, *d),
        };
        let lambda = if x1 == x2 {
            if f.add(&y1, &y2).is_zero() {
                return Point::Infinity;
            }
            let num = f.add(
                &f.add(&f.scale(3, &f.square(&x1)), &f.scale(2, &f.mul(&self.a[2], &x1))),
                &self.a[1],
            );
            f.div(&num, &f.scale(2, &y1)).expect("2y nonzero")
        } else {
            f.div(&f.sub(&y2, &y1), &f.sub(&x2, &x1)).expect("distinct x")
        };
        let x3 = f.sub(&f.sub(&f.sub(&f.square(&lambda), &self.a[2]), &x1), &x2);
        let y3 = f.sub(&f.mul(&lambda, &f.sub(&x1, &x3)), &y1);
        Point::Affine(x3, y3)
    }

    /// `[k] P` for any integer `k`.
    pub fn mul(&self, k: i64, pt: &Point) -> Point {
        let mut base = if k < 0 { self.neg(pt) } else { *pt };
        let mut e = k.unsigned_abs();
        let mut acc = Point::Infinity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn order_of(&self, pt: &Point) -> u64 {
        let mut acc = *pt;
        let mut k = 1;
        while acc != Point::Infinity {
            acc = self.add(&acc, pt);
            k += 1;
        }
        k
    }

    /// `#E(F_{q^s})` by enumeration.
    pub fn point_count(&self, s: usize, budget: Budget) -> Result<u64, CurveError> {
        let degree = self.field.degree() * s;
        let too_big = (0..degree)
            .try_fold(1u64, |acc, _| acc.checked_mul(self.field.characteristic()))
            .is_none_or(|size| size > budget.max_field_size);
        if too_big {
            return Err(CurveError::BudgetExceeded(degree));
        }
        if s == 1 && self.q() <= 1 << 12 {
            return Ok(self.rational_points().len() as u64);
        }
        let tc = self.over(degree)?;
        let t = &tc.table;
        let mut count = 1u64;
        for idx in 0..t.order() {
            let r = tc.eval_f(t.from_index(idx));
            count += if t.is_zero(r) {
                1
            } else if t.is_square(r) {
                2
            } else {
                0
            };
        }
        Ok(count)
    }

    /// `t = q + 1 - #E(F_q)`.
    pub fn trace_t(&self) -> i64 {
        self.q() as i64 + 1 - self.rational_points().len() as i64
    }

    /// `t_m` from `t_0 = 2`, `t_1 = t`, `t_{m+1} = t t_m - q t_{m-1}`.
    pub fn trace_recurrence(&self, m: usize) -> i128 {
        let t = self.trace_t() as i128;
        let q = self.q() as i128;
        let (mut prev, mut cur) = (2i128, t);
        if m == 0 {
            return prev;
        }
        for _ in 1..m {
            (prev, cur) = (cur, t * cur - q * prev);
        }
        cur
    }

    /// The `1 x 1` Hasse-Witt matrix: coefficient of `x^{p-1}` in `f^{(p-1)/2}`.
    pub fn hasse_witt(&self) -> Fe {
        hasse_witt_matrix(&self.field, &self.f(), 1)[0][0]
    }

    pub fn is_supersingular(&self) -> Result<bool, CurveError> {
        let by_hw = self.hasse_witt().is_zero();
        let p = self.field.characteristic() as i64;
        let by_count = self.trace_t().rem_euclid(p) == 0;
        if by_hw != by_count {
            return Err(CurveError::Inconsistent);
        }
        Ok(by_hw)
    }

    /// The same curve over `F_{p^degree}`.
    pub fn base_change(&self, degree: usize) -> Result<(EllipticCurve, Embedding), CurveError> {
        let big = build_field(self.field.characteristic(), degree)?;
        let emb = Embedding::new(&self.field, &big)?;
        let a: Vec<Fe> = self.a.iter().map(|c| emb.apply(c)).collect();
        Ok((EllipticCurve::new(&big, &a)?, emb))
    }

    /// Zech-table model of the curve over `F_{p^degree}`.
    pub(crate) fn over(&self, degree: usize) -> Result<TableCurve, CurveError> {
        let big = build_field(self.field.characteristic(), degree)?;
        let emb = Embedding::new(&self.field, &big)?;
        let table = TableField::cached(&big);
        let a = [0, 1, 2].map(|i| table.from_fe(&emb.apply(&self.a[i])));
        Ok(TableCurve { table, emb, a })
    }

    /// `H^1(E, O_E)` with its `p`-linear Frobenius, as a rank-one module over `F_q`.
    pub fn h1_module(&self) -> Result<SemilinearModule, CurveError> {
        let big_d = self.field.degree();
        let w = WittRing::new(&self.field, 1).map_err(SemilinearError::from)?;
        let a = self.hasse_witt();
        let d0 = (1..=big_d)
            .find(|d| big_d.is_multiple_of(*d) && self.field.lies_in(&a, *d))
            .expect("a lies in F_q");
        Ok(SemilinearModule::new(&w, 1, vec![vec![w.teichmuller(&a)]], d0, big_d)?)
    }

    /// `H^1(E_k, Z/p)` as the stabilized fixed module of the Hasse-Witt operator.
    pub fn etale_h1(&self, budget: Budget) -> Result<FixedModule, CurveError> {
        Ok(self.h1_module()?.stabilize_fixed_module(budget)?.0)
    }
}

/// Point over a table field; `None` is the origin.
pub(crate) type TablePoint = Option<(u32, u32)>;

pub(crate) struct TableCurve {
    pub table: Arc<TableField>,
    pub emb: Embedding,
    pub a: [u32; 3],
}

impl TableCurve {
    pub fn eval_f(&self, x: u32) -> u32 {
        let t = &self.table;
        let mut acc = t.add(x, self.a[2]);
        acc = t.add(t.mul(acc, x), self.a[1]);
        t.add(t.mul(acc, x), self.a[0])
    }

    pub fn embed_point(&self, pt: &Point) -> TablePoint {
        match pt {
            Point::Infinity => None,
            Point::Affine(x, y) => Some((
                self.table.from_fe(&self.emb.apply(x)),
                self.table.from_fe(&self.emb.apply(y)),
            )),
        }
    }

    pub fn neg(&self, pt: TablePoint) -> TablePoint {
        pt.map(|(x, y)| (x, self.table.neg(y)))
    }

    pub fn add(&self, p1: TablePoint, p2: TablePoint) -> TablePoint {
        let t = &self.table;
        let ((x1, y1), (x2, y2)) = match (p1, p2) {
            (None, _) => return p2,
            (_, None) => return p1,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if t.is_zero(t.add(y1, y2)) {
                return None;
            }
            let three = t.from_int(3);
            let two = t.from_int(2);
            let num = t.add(
                t.add(t.mul(three, t.mul(x1, x1)), t.mul(two, t.mul(self.a[2], x1))),
                self.a[1],
            );
            t.div(num, t.mul(two, y1)).expect("2y nonzero")
        } else {
            t.div(t.sub(y2, y1), t.sub(x2, x1)).expect("distinct x")
        };
        let x3 = t.sub(t.sub(t.sub(t.mul(lambda, lambda), self.a[2]), x1), x2);
        let y3 = t.sub(t.mul(lambda, t.sub(x1, x3)), y1);
        Some((x3, y3))
    }

    pub fn mul(&self, k: i64, pt: TablePoint) -> TablePoint {
        let mut base = if k < 0 { self.neg(pt) } else { pt };
        let mut e = k.unsigned_abs();
        let mut acc = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.add(base, base);
            }
        }
        acc
    }

    pub fn frobenius_pow(&self, pt: TablePoint, e: usize) -> TablePoint {
        pt.map(|(x, y)| (self.table.frobenius_pow(x, e), self.table.frobenius_pow(y, e)))
    }

    /// Every point of the curve over the table field, origin first.
    pub fn for_each_point(&self, mut visit: impl FnMut(TablePoint)) {
        let t = &self.table;
        visit(None);
        for idx in 0..t.order() {
            let x = t.from_index(idx);
            let r = self.eval_f(x);
            if t.is_zero(r) {
                visit(Some((x, r)));
            } else if let Some(y) = t.sqrt(r) {
                visit(Some((x, y)));
                visit(Some((x, t.neg(y))));
            }
        }
    }
}

/// `y^2 = f(x)` with `deg f = 2g + 1`, `p >= 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperellipticCurve {
    field: FiniteField,
    f: Vec<Fe>,
    genus: usize,
}

impl HyperellipticCurve {
    pub fn new(field: &FiniteField, f: &[Fe]) -> Result<Self, CurveError> {
        if field.characteristic() == 2 {
            return Err(CurveError::CharacteristicTwo);
        }
        let f = poly_trim(field, f.to_vec());
        if f.len() < 4 || !f.len().is_multiple_of(2) {
            return Err(CurveError::BadDegree);
        }
        if !is_squarefree(field, &f) {
            return Err(CurveError::Singular);
        }
        let genus = (f.len() - 2) / 2;
        Ok(Self {
            field: field.clone(),
            f,
            genus,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn hasse_witt(&self) -> Vec<Vec<Fe>> {
        hasse_witt_matrix(&self.field, &self.f, self.genus)
    }
}

/// Scalar by which `g = tau_P o [e k]` acts on `H^1(E, O_E)`.
pub fn h1_action(curve: &EllipticCurve, corr: &Correspondence) -> Result<Fe, CurveError> {
    match corr {
        Correspondence::Elliptic {
            curve: c, sign, k, ..
        } if c == curve && *k >= 1 => Ok(curve.field.from_int(*sign as i64 * *k as i64)),
        _ => Err(CurveError::Unsupported),
    }
}

/// One cohomological degree: the fixed module of `Phi` and the correspondence action on it.
#[derive(Clone, Debug)]
pub struct CohomologyDegree {
    pub degree: usize,
    pub module: SemilinearModule,
    pub fixed: FixedModule,
    pub action: WittMatrix,
}

#[derive(Clone, Debug)]
pub struct CohomologyProfile {
    pub degrees: Vec<CohomologyDegree>,
}

impl CohomologyProfile {
    pub fn ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.fixed.rank()).collect()
    }
}

/// Which curve or line the cohomology is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    AffineLine,
    OpenElliptic,
    ProperElliptic,
}

fn trivial_degree(
    field: &FiniteField,
    degree: usize,
    rank: usize,
    budget: Budget,
) -> Result<CohomologyDegree, CurveError> {
    let w = WittRing::new(field, 1).map_err(SemilinearError::from)?;
    let matrix = vec![vec![w.one(); rank]; rank];
    let module = SemilinearModule::new(&w, 1, matrix, 1, field.degree())?;
    let (fixed, _) = module.stabilize_fixed_module(budget)?;
    let action = vec![vec![w.one(); rank]; rank];
    Ok(CohomologyDegree {
        degree,
        module,
        fixed,
        action,
    })
}

/// Compactly supported `Z/p` cohomology with its correspondence action.
pub fn cohomology_profile(
    space: Space,
    corr: &Correspondence,
    budget: Budget,
) -> Result<CohomologyProfile, CurveError> {
    let field = corr.field();
    let degrees = match (space, corr) {
        (Space::AffineLine, Correspondence::AffineLine { .. }) => (0..=2)
            .map(|i| trivial_degree(field, i, 0, budget))
            .collect::<Result<_, _>>()?,
        (Space::OpenElliptic | Space::ProperElliptic, Correspondence::Elliptic { curve, .. }) => {
            let c = h1_action(curve, corr)?;
            let module = curve.h1_module()?;
            let (fixed, _) = module.stabilize_fixed_module(budget)?;
            let w = module.witt().clone();
            let h1 = CohomologyDegree {
                degree: 1,
                module,
                fixed,
                action: vec![vec![w.teichmuller(&c)]],
            };
            let h0_rank = usize::from(space == Space::ProperElliptic);
            vec![
                trivial_degree(field, 0, h0_rank, budget)?,
                h1,
                trivial_degree(field, 2, 0, budget)?,
            ]
        }
        _ => return Err(CurveError::Unsupported),
    };
    Ok(CohomologyProfile { degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    fn curve(p: u64, c: &[i64]) -> EllipticCurve {
        EllipticCurve::from_ints(&build_field(p, 1).unwrap(), c).unwrap()
    }

    #[test]
    fn hasse_witt_values() {
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(curve(7, &[0, 1, 0]).hasse_witt(), f7.zero());
        let f5 = build_field(5, 1).unwrap();
        assert_eq!(curve(5, &[1, 1, 0]).hasse_witt(), f5.from_int(2));
        let h = HyperellipticCurve::new(
            &f7,
            &[1, 0, 0, 0, 0, 1].map(|c| f7.from_int(c)),
        )
        .unwrap();
        assert_eq!(h.genus(), 2);
        // (x^5 + 1)^3 = x^15 + 3 x^10 + 3 x^5 + 1; read x^6, x^5, x^13, x^12
        assert_eq!(
            h.hasse_witt(),
            vec![vec![f7.zero(), f7.from_int(3)], vec![f7.zero(), f7.zero()]]
        );
    }

    #[test]
    fn point_count_values() {
        let e = curve(5, &[1, 1, 0]);
        assert_eq!(e.point_count(1, Budget::default()).unwrap(), 9);
        assert_eq!(e.trace_t(), -3);
        let s = curve(7, &[0, 1, 0]);
        assert_eq!(s.point_count(1, Budget::default()).unwrap(), 8);
        assert_eq!(s.trace_t(), 0);
        assert_eq!(e.trace_recurrence(1), e.trace_t() as i128);
    }

    #[test]
    fn recurrence_matches_enumeration_over_extensions() {
        for c in [[1i64, 1, 0], [2, 0, 1], [3, 4, 0]] {
            let e = curve(5, &c);
            for s in 1..=4 {
                let count = e.point_count(s, Budget::default()).unwrap() as i128;
                assert_eq!(count, 5i128.pow(s as u32) + 1 - e.trace_recurrence(s));
            }
        }
    }

    #[test]
    fn supersingularity() {
        assert!(curve(7, &[0, 1, 0]).is_supersingular().unwrap());
        assert!(!curve(5, &[1, 1, 0]).is_supersingular().unwrap());
        let (e2, _) = curve(7, &[0, 1, 0]).base_change(2).unwrap();
        assert!(e2.is_supersingular().unwrap());
    }

    #[test]
    fn singular_and_even_characteristic_rejected() {
        let f5 = build_field(5, 1).unwrap();
        assert_eq!(EllipticCurve::from_ints(&f5, &[0, 0, 0]), Err(CurveError::Singular));
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        assert_eq!(EllipticCurve::from_ints(&f5, &[2, -3, 0]), Err(CurveError::Singular));
        let f2 = build_field(2, 1).unwrap();
        assert_eq!(
            EllipticCurve::from_ints(&f2, &[1, 1, 0]),
            Err(CurveError::CharacteristicTwo)
        );
    }

    #[test]
    fn discriminant_matches_repeated_root_search() {
        for p in [3u64, 5, 7] {
            let f = build_field(p, 1).unwrap();
            for idx in 0..p.pow(3) {
                let c = [idx % p, (idx / p) % p, idx / (p * p)].map(|v| v as i64);
                let poly: Vec<Fe> = c.iter().map(|&v| f.from_int(v)).chain([f.one()]).collect();
                // repeated root over the splitting field F_{p^6} contains all cubic roots
                let big = build_field(p, 6).unwrap();
                let emb = Embedding::new(&f, &big).unwrap();
                let bp: Vec<Fe> = poly.iter().map(|x| emb.apply(x)).collect();
                let deriv: Vec<Fe> = bp.iter().enumerate().skip(1).map(|(i, x)| big.scale(i as i64, x)).collect();
                let repeated = big
                    .elements()
                    .any(|x| big.eval_poly(&bp, &x).is_zero() && big.eval_poly(&deriv, &x).is_zero());
                assert_eq!(EllipticCurve::from_ints(&f, &c).is_err(), repeated, "p={p} c={c:?}");
            }
        }
    }

    #[test]
    fn hasse_witt_of_base_change_is_the_twisted_product() {
        let e = curve(5, &[1, 1, 0]);
        for s in [2usize, 3] {
            let (es, emb) = e.base_change(s).unwrap();
            let big = es.field();
            let a = emb.apply(&e.hasse_witt());
            let mut prod = big.one();
            for i in 0..s {
                prod = big.mul(&prod, &big.frobenius_pow(&a, i));
            }
            // Hasse-Witt for the Q-power Frobenius: coefficient of x^{Q-1} in f^{(Q-1)/2}
            let q = big.order();
            let fb = es.f();
            let direct = poly_pow(big, &fb, (q - 1) / 2)[(q - 1) as usize];
            assert_eq!(direct, prod);
            let lin = es.h1_module().unwrap().linearized_f(s).unwrap();
            assert_eq!(lin[0][0].components()[0], prod);
        }
    }

    #[test]
    fn group_law_and_table_model_agree() {
        let e = curve(7, &[3, 1, 0]);
        let pts = e.rational_points();
        let tc = e.over(1).unwrap();
        for a in &pts {
            assert!(e.contains(a));
            for b in &pts {
                let s = e.add(a, b);
                assert!(e.contains(&s));
                assert_eq!(tc.embed_point(&s), tc.add(tc.embed_point(a), tc.embed_point(b)));
            }
            assert_eq!(e.mul(pts.len() as i64, a), Point::Infinity);
        }
    }

    #[test]
    fn etale_h1_ranks() {
        assert_eq!(curve(7, &[0, 1, 0]).etale_h1(Budget::default()).unwrap().rank(), 0);
        assert_eq!(curve(5, &[1, 1, 0]).etale_h1(Budget::default()).unwrap().rank(), 1);
    }
}
