//! Both sides of the mod `p^n` trace formula for a scenario, the coherent
//! fixed-point check on proper elliptic curves, and the `Z_p` failure table
//! for the affine line.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::correspondence::{
    brute_force_fixed_points, fix_count, local_term_from_count, local_term_sum, Correspondence,
    CorrespondenceError, FixedPointSet, SheafDatum,
};
use crate::curve::{cohomology_profile, h1_action, CurveError, EllipticCurve, Point, Space};
use crate::field::Fe;
use crate::semilinear::{Budget, SemilinearError};

#[derive(Debug, Error)]
pub enum TraceFormulaError {
    #[error("space {space:?} does not match the correspondence")]
    SpaceMismatch { space: Space },
    #[error("curve scenarios need sheaf_n = 1, got {0}")]
    SheafLength(u32),
    #[error("sheaf characteristic {sheaf} differs from field characteristic {field}")]
    SheafCharacteristic { sheaf: u64, field: u64 },
    #[error("twist m must be at least 1")]
    ZeroTwist,
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("trace mismatch:\n{report}")]
    Mismatch { report: Box<VerificationReport> },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Correspondence(#[from] CorrespondenceError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub correspondence: Correspondence,
    pub sheaf: SheafDatum,
    pub space: Space,
    pub m_range: Vec<usize>,
}

impl Scenario {
    pub fn new(
        correspondence: Correspondence,
        sheaf: SheafDatum,
        space: Space,
        m_range: Vec<usize>,
    ) -> Result<Self, TraceFormulaError> {
        let line = matches!(correspondence, Correspondence::AffineLine { .. });
        if line != (space == Space::AffineLine) {
            return Err(TraceFormulaError::SpaceMismatch { space });
        }
        let p = correspondence.field().characteristic();
        if sheaf.ring().p() != p {
            return Err(TraceFormulaError::SheafCharacteristic {
                sheaf: sheaf.ring().p(),
                field: p,
            });
        }
        if !line && sheaf.ring().n() != 1 {
            return Err(TraceFormulaError::SheafLength(sheaf.ring().n()));
        }
        if m_range.contains(&0) {
            return Err(TraceFormulaError::ZeroTwist);
        }
        Ok(Self {
            correspondence,
            sheaf,
            space,
            m_range,
        })
    }
}

/// Field-size caps: `field` for stabilizing fixed modules, `oracle` for enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyBudget {
    pub field: Budget,
    pub oracle: Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub m: usize,
    pub lhs: u64,
    pub rhs: u64,
    /// Fixed points in the scenario space, by the degree formula.
    pub fix_count: i128,
    /// Enumeration field degree over `F_p`.
    pub oracle_degree: usize,
    pub oracle_complete: bool,
    /// Enumerated count in the scenario space when complete.
    pub oracle_count: Option<u64>,
    pub elapsed: Duration,
}

impl ReportRow {
    pub fn oracle_agrees(&self) -> bool {
        self.oracle_count.is_none_or(|c| c as i128 == self.fix_count)
    }

    pub fn ok(&self) -> bool {
        self.lhs == self.rhs && self.oracle_agrees()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub p: u64,
    pub n: u32,
    pub space: Space,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.ok()).count()
    }

    pub fn all_ok(&self) -> bool {
        self.passed() == self.rows.len()
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "space={:?} modulus={}^{}", self.space, self.p, self.n)?;
        for r in &self.rows {
            writeln!(
                f,
                "m={} lhs={} rhs={} fix_count={} oracle_degree={} oracle_complete={} oracle_count={:?}",
                r.m, r.lhs, r.rhs, r.fix_count, r.oracle_degree, r.oracle_complete, r.oracle_count
            )?;
        }
        Ok(())
    }
}

/// `sum_i (-1)^i Tr(u F^m | H^i_c)`, through the fixed modules of the coherent Frobenius.
pub fn lhs_trace(scenario: &Scenario, m: usize, budget: Budget) -> Result<u64, TraceFormulaError> {
    let profile = cohomology_profile(scenario.space, &scenario.correspondence, budget)?;
    let ring = scenario.sheaf.ring();
    let mut sum: i128 = 0;
    for d in &profile.degrees {
        let tr = d.module.trace_on(&d.fixed, &d.action, m)? as i128;
        sum += if d.degree % 2 == 0 { tr } else { -tr };
    }
    Ok(ring.mul(ring.reduce_int(sum), scenario.sheaf.trace()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsValue {
    pub value: u64,
    /// Closed-form count of fixed points in the scenario space.
    pub count: i128,
    pub oracle: FixedPointSet,
    /// The oracle set restricted to the scenario space.
    pub in_space: FixedPointSet,
}

/// Drop the boundary point of the open curve. When `P = O` the origin is fixed
/// and sorts first; otherwise the point removed is the one that a translation
/// conjugating `g` to a map fixing `O` sends to the origin.
fn open_count(space: Space, count: i128) -> i128 {
    if space == Space::OpenElliptic {
        count - 1
    } else {
        count
    }
}

/// `sum_z Tr(u_z)` over the fixed points of `Fr^m o g` in the scenario space.
pub fn rhs_sum(scenario: &Scenario, m: usize, oracle_budget: Budget) -> Result<RhsValue, TraceFormulaError> {
    let corr = &scenario.correspondence;
    let count = open_count(scenario.space, fix_count(corr, m));
    let oracle = brute_force_fixed_points(corr, m, oracle_budget)?;
    let in_space = if scenario.space == Space::OpenElliptic && oracle.complete {
        oracle.without_first()
    } else {
        oracle.clone()
    };
    let value = if in_space.complete {
        local_term_sum(&scenario.sheaf, &in_space)?
    } else {
        local_term_from_count(&scenario.sheaf, count)
    };
    Ok(RhsValue {
        value,
        count,
        oracle,
        in_space,
    })
}

/// Both sides for every `m`; a mismatch in any row is an error carrying the full report.
pub fn verify(scenario: &Scenario, budget: VerifyBudget) -> Result<VerificationReport, TraceFormulaError> {
    let report = evaluate(scenario, budget)?;
    if report.all_ok() {
        Ok(report)
    } else {
        Err(TraceFormulaError::Mismatch {
            report: Box::new(report),
        })
    }
}

/// Both sides for every `m`, without judging the outcome.
pub fn evaluate(scenario: &Scenario, budget: VerifyBudget) -> Result<VerificationReport, TraceFormulaError> {
    let ring = scenario.sheaf.ring();
    let mut rows = Vec::with_capacity(scenario.m_range.len());
    for &m in &scenario.m_range {
        let start = Instant::now();
        let lhs = lhs_trace(scenario, m, budget.field)?;
        let rhs = rhs_sum(scenario, m, budget.oracle)?;
        rows.push(ReportRow {
            m,
            lhs,
            rhs: rhs.value,
            fix_count: rhs.count,
            oracle_degree: rhs.oracle.field_degree,
            oracle_complete: rhs.in_space.complete,
            oracle_count: rhs.in_space.complete.then(|| rhs.in_space.count()),
            elapsed: start.elapsed(),
        });
    }
    Ok(VerificationReport {
        p: ring.p(),
        n: ring.n(),
        space: scenario.space,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WoodsHole {
    pub m: usize,
    /// `h1_action` scalar `c`.
    pub c: Fe,
    /// `A_q^{(m)}`, the `m`-fold linearized Hasse-Witt product.
    pub a_qm: Fe,
    /// `1 - c A_q^{(m)}`.
    pub coherent: Fe,
    pub fix_count: i128,
    pub holds: bool,
}

/// `Tr(g | H^0(O)) - Tr(g | H^1(O)) = #Fix(Fr^m o g)` in `F_p`, for `g` on a proper curve.
pub fn woods_hole_verify(
    curve: &EllipticCurve,
    corr: &Correspondence,
    m: usize,
) -> Result<WoodsHole, TraceFormulaError> {
    if m == 0 {
        return Err(TraceFormulaError::ZeroTwist);
    }
    let f = curve.field();
    let c = h1_action(curve, corr)?;
    let module = curve.h1_module()?;
    let lin = module.linearized_f(m * f.degree())?;
    let a_qm = lin[0][0].components()[0];
    let coherent = f.sub(&f.one(), &f.mul(&c, &a_qm));
    let count = fix_count(corr, m);
    let holds = coherent == f.from_int((count % f.characteristic() as i128) as i64);
    Ok(WoodsHole {
        m,
        c,
        a_qm,
        coherent,
        fix_count: count,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpRow {
    pub m: usize,
    /// Every `H^i_c(A^1, Z/p^n)` vanishes, so the limit is zero.
    pub lhs: u64,
    pub rhs: BigUint,
    pub valuation: u32,
    /// `(n, q^m == 0 mod p^n)` for `n = 1..=valuation + 1`.
    pub congruences: Vec<(u32, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpTable {
    pub p: u64,
    pub q: u64,
    pub rows: Vec<ZpRow>,
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// The affine line with `g = id` and coefficients `Z_p`: LHS `0`, RHS `q^m`.
pub fn zp_counterexample(q: u64, m_range: &[usize]) -> Result<ZpTable, TraceFormulaError> {
    let (p, e) = prime_power(q).ok_or(TraceFormulaError::NotPrimePower(q))?;
    let mut rows = Vec::with_capacity(m_range.len());
    for &m in m_range {
        if m == 0 {
            return Err(TraceFormulaError::ZeroTwist);
        }
        let rhs = BigUint::from(q).pow(m as u32);
        let valuation = e * m as u32;
        let congruences = (1..=valuation + 1)
            .map(|n| {
                let pn = BigUint::from(p).pow(n);
                (n, (&rhs % pn).is_zero())
            })
            .collect();
        rows.push(ZpRow {
            m,
            lhs: 0,
            rhs,
            valuation,
            congruences,
        });
    }
    Ok(ZpTable { p, q, rows })
}

impl ZpRow {
    /// `q^m` is a nonzero element of `Z_p`.
    pub fn differs_in_zp(&self) -> bool {
        !self.rhs.is_zero()
    }
}

/// Convenience: the open or proper elliptic scenario `tau_P o [e k]` with `u = c id`.
pub fn elliptic_scenario(
    curve: &EllipticCurve,
    translation: Point,
    sign: i8,
    k: u64,
    u_scalar: i64,
    space: Space,
    m_range: Vec<usize>,
) -> Result<Scenario, TraceFormulaError> {
    let corr = Correspondence::elliptic(curve, translation, sign, k)?;
    let sheaf = SheafDatum::scalar(curve.field().characteristic(), 1, 1, u_scalar);
    Scenario::new(corr, sheaf, space, m_range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    fn curve(p: u64, c: &[i64]) -> EllipticCurve {
        EllipticCurve::from_ints(&build_field(p, 1).unwrap(), c).unwrap()
    }

    fn small_oracle() -> VerifyBudget {
        VerifyBudget {
            oracle: Budget {
                max_field_size: 1 << 16,
            },
            ..VerifyBudget::default()
        }
    }

    #[test]
    fn affine_line_sides_vanish() {
        for p in [2u64, 3, 5] {
            let f = build_field(p, 1).unwrap();
            let corr = Correspondence::affine_line(&f, f.one(), f.one()).unwrap();
            let s = Scenario::new(corr, SheafDatum::scalar(p, 1, 1, 1), Space::AffineLine, vec![1, 2])
                .unwrap();
            let report = verify(&s, VerifyBudget::default()).unwrap();
            assert!(report.rows.iter().all(|r| r.lhs == 0 && r.rhs == 0));
            assert_eq!(report.rows[0].fix_count, p as i128);
        }
    }

    #[test]
    fn ordinary_open_curve() {
        let e = curve(5, &[1, 1, 0]);
        for pt in e.rational_points() {
            let s = elliptic_scenario(&e, pt, 1, 1, 1, Space::OpenElliptic, vec![1, 2]).unwrap();
            let report = verify(&s, VerifyBudget::default()).unwrap();
            for r in &report.rows {
                assert_eq!(r.lhs as i128, (-e.trace_recurrence(r.m)).rem_euclid(5));
            }
            assert_eq!(report.rows[0].lhs, 3);
        }
    }

    #[test]
    fn curves_over_a_quadratic_base() {
        let f = build_field(3, 2).unwrap();
        let g = f.gen();
        let mut built = 0;
        for c in [[g, f.one(), f.zero()], [f.one(), g, f.one()]] {
            let Ok(e) = EllipticCurve::new(&f, &c) else { continue };
            built += 1;
            for space in [Space::OpenElliptic, Space::ProperElliptic] {
                let s = elliptic_scenario(&e, Point::Infinity, 1, 1, 1, space, vec![1, 2]).unwrap();
                verify(&s, small_oracle()).unwrap();
            }
            let corr = Correspondence::elliptic(&e, Point::Infinity, -1, 2).unwrap();
            assert!(woods_hole_verify(&e, &corr, 2).unwrap().holds);
        }
        assert!(built > 0);
    }

    #[test]
    fn supersingular_open_curve_is_zero() {
        let e = curve(7, &[0, 1, 0]);
        let s = elliptic_scenario(&e, Point::Infinity, 1, 1, 1, Space::OpenElliptic, vec![1, 2]).unwrap();
        let report = verify(&s, VerifyBudget::default()).unwrap();
        assert!(report.rows.iter().all(|r| r.lhs == 0 && r.rhs == 0));
        assert_eq!(report.rows[0].oracle_count, Some(7));
    }

    #[test]
    fn proper_curve_with_multiplication() {
        let e = curve(5, &[1, 1, 0]);
        let pts = e.rational_points();
        for (sign, k) in [(1i8, 2u64), (-1, 1), (-1, 3)] {
            let s = elliptic_scenario(&e, pts[1], sign, k, 2, Space::ProperElliptic, vec![1, 2, 3]).unwrap();
            verify(&s, small_oracle()).unwrap();
        }
    }

    #[test]
    fn scaled_sheaf_changes_only_the_right_side_when_corrupted() {
        let e = curve(5, &[1, 1, 0]);
        let s = elliptic_scenario(&e, Point::Infinity, 1, 1, 1, Space::OpenElliptic, vec![1]).unwrap();
        let mut report = evaluate(&s, VerifyBudget::default()).unwrap();
        report.rows[0].rhs = (report.rows[0].rhs + 1) % 5;
        assert!(!report.all_ok());
    }

    #[test]
    fn woods_hole_values() {
        let s = curve(7, &[0, 1, 0]);
        let corr = Correspondence::elliptic(&s, Point::Infinity, 1, 1).unwrap();
        let w = woods_hole_verify(&s, &corr, 1).unwrap();
        assert!(w.holds);
        assert_eq!(w.fix_count, 8);
        let o = curve(5, &[1, 1, 0]);
        let f = o.field();
        let corr = Correspondence::elliptic(&o, Point::Infinity, 1, 1).unwrap();
        let w = woods_hole_verify(&o, &corr, 1).unwrap();
        assert_eq!(w.a_qm, f.from_int(2));
        assert_eq!(w.coherent, f.from_int(-1));
        assert!(w.holds);
        for m in 1..=3 {
            let corr = Correspondence::elliptic(&o, Point::Infinity, -1, 2).unwrap();
            assert!(woods_hole_verify(&o, &corr, m).unwrap().holds);
        }
    }

    #[test]
    fn woods_hole_needs_the_right_scalar() {
        let o = curve(5, &[1, 1, 0]);
        let f = o.field();
        let corr = Correspondence::elliptic(&o, Point::Infinity, 1, 2).unwrap();
        let w = woods_hole_verify(&o, &corr, 1).unwrap();
        assert!(w.holds);
        let wrong = f.sub(&f.one(), &f.mul(&f.one(), &w.a_qm));
        assert_ne!(wrong, f.from_int((w.fix_count % 5) as i64));
    }

    #[test]
    fn zp_table() {
        let t = zp_counterexample(2, &[1, 2, 3]).unwrap();
        assert_eq!(t.rows[0].rhs, BigUint::from(2u32));
        assert_eq!(t.rows[2].rhs, BigUint::from(8u32));
        assert_eq!(t.rows[2].valuation, 3);
        assert_eq!(t.rows[2].congruences, vec![(1, true), (2, true), (3, true), (4, false)]);
        let t9 = zp_counterexample(9, &[1]).unwrap();
        assert_eq!((t9.p, t9.rows[0].valuation), (3, 2));
        assert!(zp_counterexample(6, &[1]).is_err());
        assert!(t9.rows[0].differs_in_zp());
    }

    #[test]
    fn scenario_validation() {
        let e = curve(5, &[1, 1, 0]);
        let corr = Correspondence::elliptic(&e, Point::Infinity, 1, 1).unwrap();
        assert!(Scenario::new(corr.clone(), SheafDatum::scalar(5, 2, 1, 1), Space::OpenElliptic, vec![1]).is_err());
        assert!(Scenario::new(corr.clone(), SheafDatum::scalar(5, 1, 1, 1), Space::AffineLine, vec![1]).is_err());
        assert!(Scenario::new(corr, SheafDatum::scalar(3, 1, 1, 1), Space::OpenElliptic, vec![1]).is_err());
    }
}
