//! Acceptance criteria 1-10, one PASS/FAIL line each.
//!
//! Oracles here are written against plain integers (naive point counts,
//! Euler's criterion, integer ghost components) and share no code with the
//! library paths they check. A criterion whose only shortfall is brute-force
//! coverage beyond the 2^24 field cap prints FAIL with the uncovered rows but
//! does not fail the run; every other failure does.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lefschetz_cli::run::{lemma5, suite_grid};
use lefschetz_cli::scenario_file::parse_scenario;
use lefschetz_core::correspondence::{brute_force_fixed_points, fix_count, Correspondence};
use lefschetz_core::curve::{EllipticCurve, Point, Space};
use lefschetz_core::field::{build_field, count_roots, Embedding, FiniteField};
use lefschetz_core::semilinear::Budget;
use lefschetz_core::trace_formula::{
    elliptic_scenario, lhs_trace, rhs_sum, verify, woods_hole_verify, zp_counterexample, VerifyBudget,
};
use lefschetz_core::witt::WittRing;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    /// Everything checkable passed; some rows need fields above the cap.
    Shortfall(String),
    Fail(String),
}

fn scenarios_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios"))
}

fn pow_mod(mut b: i64, mut e: u64, p: i64) -> i64 {
    let mut acc = 1i64;
    b = b.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// `#E(F_p)` for `y^2 = x^3 + a2 x^2 + a1 x + a0`, by Euler's criterion.
fn naive_count(p: i64, c: [i64; 3]) -> i64 {
    let mut n = 1;
    for x in 0..p {
        let r = (x * x % p * x + c[2] * x % p * x + c[1] * x + c[0]).rem_euclid(p);
        n += if r == 0 {
            1
        } else if pow_mod(r, ((p - 1) / 2) as u64, p) == 1 {
            2
        } else {
            0
        };
    }
    n
}

/// `t_m` from `t_1 = t`, `t_0 = 2`.
fn naive_trace(t: i128, q: i128, m: usize) -> i128 {
    let (mut prev, mut cur) = (2i128, t);
    for _ in 1..m {
        (prev, cur) = (cur, t * cur - q * prev);
    }
    cur
}

fn naive_discriminant(p: i64, c: [i64; 3]) -> i64 {
    let [a0, a1, a2] = c;
    (a2 * a2 * a1 * a1 - 4 * a1.pow(3) - 4 * a2.pow(3) * a0 - 27 * a0 * a0 + 18 * a2 * a1 * a0).rem_euclid(p)
}

/// Every nonsingular monic cubic over `F_p`, checked against the integer discriminant.
fn all_curves(p: u64) -> Result<Vec<([i64; 3], EllipticCurve)>, String> {
    let f = build_field(p, 1).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let pi = p as i64;
    for a0 in 0..pi {
        for a1 in 0..pi {
            for a2 in 0..pi {
                let c = [a0, a1, a2];
                let built = EllipticCurve::from_ints(&f, &c);
                let singular = naive_discriminant(pi, c) == 0;
                if built.is_err() != singular {
                    return Err(format!("p={p} {c:?}: library and discriminant disagree"));
                }
                if let Ok(e) = built {
                    out.push((c, e));
                }
            }
        }
    }
    Ok(out)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut uncovered = Vec::new();
    let mut enumerated = 0;
    for p in [2u64, 3, 5] {
        let path = scenarios_dir().join(format!("affine_x_plus_1_p{p}.scn"));
        let text = std::fs::read_to_string(&path).expect("corpus file");
        let s = parse_scenario(&text).expect("corpus parses");
        if s.m_range != [1, 2, 3] {
            return Verdict::Fail(format!("{} has m_range {:?}", path.display(), s.m_range));
        }
        // the root count below is the oracle; skip the duplicate enumeration in verify
        let budget = VerifyBudget {
            field: Budget::default(),
            oracle: Budget { max_field_size: 1 << 20 },
        };
        let report = match verify(&s, budget) {
            Ok(r) => r,
            Err(e) => return Verdict::Fail(format!("p={p}: {e}")),
        };
        let base = build_field(p, 1).unwrap();
        for r in &report.rows {
            let qm = p.pow(r.m as u32);
            if r.lhs != 0 || r.rhs != 0 || r.fix_count != qm as i128 {
                return Verdict::Fail(format!("p={p} m={}: lhs={} rhs={} count={}", r.m, r.lhs, r.rhs, r.fix_count));
            }
            // roots of x^{q^m} - x + 1 in F_{q^{m p}}
            let degree = r.m * p as usize;
            let Ok(big) = build_field(p, degree) else {
                uncovered.push(format!("p={p} m={} (F_{p}^{degree})", r.m));
                continue;
            };
            let emb = Embedding::new(&base, &big).unwrap();
            let mut poly = vec![base.zero(); qm as usize + 1];
            poly[0] = base.one();
            poly[1] = base.from_int(-1);
            poly[qm as usize] = base.one();
            let roots = count_roots(&poly, &emb).unwrap();
            if roots != qm {
                return Verdict::Fail(format!("p={p} m={}: {roots} roots, expected {qm}", r.m));
            }
            if r.oracle_count.is_some_and(|c| c != qm) {
                return Verdict::Fail(format!("p={p} m={}: oracle count {:?}", r.m, r.oracle_count));
            }
            enumerated += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 5.0 {
        return Verdict::Fail(format!("took {elapsed:.2?}, limit 5 s"));
    }
    let detail = format!("9/9 rows lhs = rhs = 0; root counts {enumerated}/9; {elapsed:.2?}");
    if uncovered.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Shortfall(format!("{detail}; above the 2^24 field cap: {}", uncovered.join(", ")))
    }
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut rows = 0;
    let mut covered = 0;
    let mut uncovered = Vec::new();
    for p in [7u64, 11] {
        let e = EllipticCurve::from_ints(&build_field(p, 1).unwrap(), &[0, 1, 0]).unwrap();
        for pt in e.rational_points() {
            let s = elliptic_scenario(&e, pt, 1, 1, 1, Space::OpenElliptic, vec![1, 2]).unwrap();
            let report = match verify(&s, VerifyBudget::default()) {
                Ok(r) => r,
                Err(err) => return Verdict::Fail(format!("p={p} P={pt:?}: {err}")),
            };
            for r in &report.rows {
                rows += 1;
                let whole = fix_count(&s.correspondence, r.m);
                if whole.rem_euclid(p as i128) != 1 || r.lhs != 0 || r.rhs != 0 {
                    return Verdict::Fail(format!("p={p} P={pt:?} m={}: count {whole} lhs={} rhs={}", r.m, r.lhs, r.rhs));
                }
                let set = brute_force_fixed_points(&s.correspondence, r.m, Budget::default()).unwrap();
                if set.complete {
                    if set.count() as i128 != whole || set.count() % p != 1 {
                        return Verdict::Fail(format!("p={p} P={pt:?} m={}: enumerated {}", r.m, set.count()));
                    }
                    covered += 1;
                } else {
                    uncovered.push(format!("p={p} m={} ord(P)={}", r.m, e.order_of(&pt)));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        return Verdict::Fail(format!("took {elapsed:.2?}, limit 30 s"));
    }
    let detail = format!("{rows}/{rows} rows 0 = 0 and count = 1 mod p by degree formula; enumerated {covered}/{rows}; {elapsed:.2?}");
    if uncovered.is_empty() {
        Verdict::Pass(detail)
    } else {
        uncovered.sort();
        uncovered.dedup();
        Verdict::Shortfall(format!("{detail}; enumeration needs F_(q^(m ord P)) above 2^24 for {}", uncovered.join(", ")))
    }
}

fn criterion_3() -> Verdict {
    let f = build_field(5, 1).unwrap();
    let e = EllipticCurve::from_ints(&f, &[1, 1, 0]).unwrap();
    let count = naive_count(5, [1, 1, 0]);
    let t = 5 + 1 - count as i128;
    if t != -3 {
        return Verdict::Fail(format!("naive t = {t}"));
    }
    for pt in e.rational_points() {
        let s = elliptic_scenario(&e, pt, 1, 1, 1, Space::OpenElliptic, vec![1, 2]).unwrap();
        for m in [1usize, 2] {
            let t_m = naive_trace(t, 5, m);
            let expected = (-t_m).rem_euclid(5) as u64;
            let lhs = lhs_trace(&s, m, Budget::default()).unwrap();
            let rhs = rhs_sum(&s, m, Budget::default()).unwrap();
            let points_qm = 5i128.pow(m as u32) + 1 - t_m;
            let independent_rhs = (points_qm - 1).rem_euclid(5) as u64;
            if lhs != expected || rhs.value != independent_rhs || lhs != rhs.value {
                return Verdict::Fail(format!(
                    "P={pt:?} m={m}: lhs={lhs} -t_m={expected} rhs={} (#E-1)={independent_rhs}",
                    rhs.value
                ));
            }
        }
    }
    Verdict::Pass("all 9 translations, m = 1, 2: lhs = -t_m = #E(F_5^m) - 1 mod 5 (3 and 1)".into())
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let budget = VerifyBudget {
        field: Budget::default(),
        oracle: Budget {
            max_field_size: 1 << 16,
        },
    };
    let mut scenarios = 0;
    let mut curves = 0;
    let mut rows_enumerated = 0;
    let mut rows = 0;
    for p in [3u64, 5, 7] {
        let list = match all_curves(p) {
            Ok(l) => l,
            Err(e) => return Verdict::Fail(e),
        };
        for (c, e) in list {
            curves += 1;
            let t = p as i128 + 1 - naive_count(p as i64, c) as i128;
            for pt in e.rational_points() {
                for u in [1i64, 2] {
                    for space in [Space::OpenElliptic, Space::ProperElliptic] {
                        scenarios += 1;
                        let s = elliptic_scenario(&e, pt, 1, 1, u, space, vec![1, 2]).unwrap();
                        let report = match verify(&s, budget) {
                            Ok(r) => r,
                            Err(err) => return Verdict::Fail(format!("p={p} {c:?} P={pt:?} u={u}: {err}")),
                        };
                        for r in &report.rows {
                            rows += 1;
                            rows_enumerated += usize::from(r.oracle_count.is_some());
                            // open: #E(F_q^m) - 1 = -t_m; proper adds 1
                            let closed = -naive_trace(t, p as i128, r.m) + i128::from(space == Space::ProperElliptic);
                            let expected = (closed * u as i128).rem_euclid(p as i128) as u64;
                            if r.lhs != expected {
                                return Verdict::Fail(format!("p={p} {c:?} m={}: lhs {} vs naive {expected}", r.m, r.lhs));
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 300.0 {
        return Verdict::Fail(format!("took {elapsed:.2?}, limit 5 min"));
    }
    Verdict::Pass(format!(
        "{curves} curves, {scenarios} scenarios (open and proper, u = id, 2 id), {rows} rows, 0 failures; {rows_enumerated} rows also enumerated; {elapsed:.2?}"
    ))
}

fn criterion_5() -> Verdict {
    let mut checks = 0;
    for p in [3u64, 5, 7] {
        let Ok(list) = all_curves(p) else {
            return Verdict::Fail("curve list".into());
        };
        for (c, e) in list {
            let t = p as i128 + 1 - naive_count(p as i64, c) as i128;
            let last = *e.rational_points().last().unwrap();
            for (pt, sign, k) in [(Point::Infinity, 1i8, 1u64), (Point::Infinity, -1, 1), (last, 1, 2)] {
                let corr = Correspondence::elliptic(&e, pt, sign, k).unwrap();
                for m in 1..=3usize {
                    let w = woods_hole_verify(&e, &corr, m).unwrap();
                    let k = k as i128;
                    let naive = k * k * (p as i128).pow(m as u32) - sign as i128 * k * naive_trace(t, p as i128, m) + 1;
                    let f = e.field();
                    let lhs = f.index(&w.coherent) as i128;
                    if !w.holds || lhs != naive.rem_euclid(p as i128) {
                        return Verdict::Fail(format!("p={p} {c:?} sign={sign} k={k} m={m}: 1 - cA = {lhs}, count {naive}"));
                    }
                    checks += 1;
                }
            }
        }
    }
    Verdict::Pass(format!("{checks} checks (g = id, [-1], tau_P [2]; m = 1..3): 1 - c A_q^(m) = #Fix mod p"))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let configs = suite_grid(&[2, 3, 5], &[1, 2, 3], &[1, 2], 200);
    let out = match lemma5(&configs, 0, Budget::default()) {
        Ok(o) => o,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let elapsed = start.elapsed();
    if !out.ok() {
        return Verdict::Fail(format!("{}\n{}", out.summary(), out.text));
    }
    if elapsed.as_secs_f64() >= 120.0 {
        return Verdict::Fail(format!("took {elapsed:.2?}, limit 2 min"));
    }
    Verdict::Pass(format!("{} configurations x 200 modules, zero failures; {elapsed:.2?}", configs.len()))
}

/// Integer ghost components `w_k = sum_j p^j x_j^{p^{k-j}}`.
fn ghost(p: u64, x: &[BigInt]) -> Vec<BigInt> {
    (0..x.len())
        .map(|k| {
            (0..=k)
                .map(|j| BigInt::from(p).pow(j as u32) * x[j].pow(p.pow((k - j) as u32) as u32))
                .sum()
        })
        .collect()
}

/// Witt components of an integer ghost vector.
fn unghost(p: u64, w: &[BigInt]) -> Vec<BigInt> {
    let mut x: Vec<BigInt> = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let partial: BigInt = (0..k)
            .map(|j| BigInt::from(p).pow(j as u32) * x[j].pow(p.pow((k - j) as u32) as u32))
            .sum();
        let pk = BigInt::from(p).pow(k as u32);
        let rest = &w[k] - partial;
        assert_eq!(&rest % &pk, BigInt::from(0), "ghost division must be exact");
        x.push(rest / pk);
    }
    x
}

fn witt_case(p: u64, n: usize, wr: &WittRing, f: &FiniteField, a: &[u64], b: &[u64]) -> Result<(), String> {
    let big = |v: &[u64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
    let (ga, gb) = (ghost(p, &big(a)), ghost(p, &big(b)));
    let sum: Vec<BigInt> = ga.iter().zip(&gb).map(|(x, y)| x + y).collect();
    let prod: Vec<BigInt> = ga.iter().zip(&gb).map(|(x, y)| x * y).collect();
    let modp = |v: Vec<BigInt>| -> Vec<u64> {
        let pb = BigInt::from(p);
        v.into_iter()
            .map(|c| {
                let r = ((c % &pb) + &pb) % &pb;
                u64::try_from(r).unwrap()
            })
            .collect()
    };
    let (want_sum, want_prod) = (modp(unghost(p, &sum)), modp(unghost(p, &prod)));
    let to_w = |v: &[u64]| wr.from_components(v.iter().map(|&c| f.from_int(c as i64)).collect());
    let comps = |w: lefschetz_core::witt::WittVector| -> Vec<u64> { w.components().iter().map(|c| f.index(c)).collect() };
    let (wa, wb) = (to_w(a), to_w(b));
    let got_sum = comps(wr.add(&wa, &wb));
    let got_prod = comps(wr.mul(&wa, &wb));
    if got_sum != want_sum || got_prod != want_prod {
        return Err(format!(
            "p={p} n={n} a={a:?} b={b:?}: sum {got_sum:?} vs {want_sum:?}, product {got_prod:?} vs {want_prod:?}"
        ));
    }
    Ok(())
}

fn criterion_7() -> Verdict {
    let mut exhaustive = 0;
    for p in [2u64, 3] {
        let f = build_field(p, 1).unwrap();
        let wr = WittRing::new(&f, 2).unwrap();
        for a0 in 0..p {
            for a1 in 0..p {
                for b0 in 0..p {
                    for b1 in 0..p {
                        if let Err(e) = witt_case(p, 2, &wr, &f, &[a0, a1], &[b0, b1]) {
                            return Verdict::Fail(e);
                        }
                        exhaustive += 1;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = 0;
    for (p, n) in [(5u64, 2usize), (2, 3), (3, 3), (5, 3), (7, 3)] {
        let f = build_field(p, 1).unwrap();
        let wr = WittRing::new(&f, n).unwrap();
        for _ in 0..1000 {
            let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            let b: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            if let Err(e) = witt_case(p, n, &wr, &f, &a, &b) {
                return Verdict::Fail(e);
            }
            random += 1;
        }
    }
    Verdict::Pass(format!("{exhaustive} exhaustive pairs (p = 2, 3; n = 2), {random} random pairs (p = 5, n = 2; p = 2, 3, 5, 7, n = 3)"))
}

fn criterion_8() -> Verdict {
    let mut checked = 0;
    for p in [3u64, 5, 7] {
        let Ok(list) = all_curves(p) else {
            return Verdict::Fail("curve list".into());
        };
        for (c, e) in list {
            let t = p as i64 + 1 - naive_count(p as i64, c);
            let a = e.field().index(&e.hasse_witt()) as i64;
            if a != t.rem_euclid(p as i64) {
                return Verdict::Fail(format!("p={p} {c:?}: a = {a}, t = {t}"));
            }
            checked += 1;
        }
    }
    Verdict::Pass(format!("a = t mod p on all {checked} curves"))
}

fn criterion_9() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_lefschetz"))
        .args(["zp-demo", "--q", "2,9", "--m", "1..3"])
        .output()
        .expect("binary runs");
    let golden = include_str!("golden/zp_demo.txt");
    if out.stdout != golden.as_bytes() || out.status.code() != Some(0) {
        return Verdict::Fail("zp-demo output differs from the golden file".into());
    }
    for q in [2u64, 9] {
        let table = zp_counterexample(q, &[1, 2, 3]).unwrap();
        for row in &table.rows {
            let mut v = 0;
            let mut x = q.pow(row.m as u32);
            while x % table.p == 0 {
                x /= table.p;
                v += 1;
            }
            let pattern = row.congruences.iter().all(|(n, eq)| *eq == (*n <= v));
            if row.valuation != v || row.lhs != 0 || !pattern || row.congruences.len() != v as usize + 1 {
                return Verdict::Fail(format!("q={q} m={}: valuation {} vs {v}", row.m, row.valuation));
            }
        }
    }
    Verdict::Pass("golden table matches; valuations m log_p q; equal mod p^n exactly for n <= valuation".into())
}

fn criterion_10() -> Verdict {
    let path = scenarios_dir().join("corrupted_affine_z4.scn");
    let out = Command::new(env!("CARGO_BIN_EXE_lefschetz"))
        .args(["verify", path.to_str().unwrap()])
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().last().unwrap_or("");
    if out.status.code() == Some(1) && last.starts_with("FAIL") {
        Verdict::Pass(format!("corrupted scenario: `{last}`, exit 1"))
    } else {
        Verdict::Fail(format!("exit {:?}, last line `{last}`", out.status.code()))
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut hard_failures = 0;
    for (i, check) in criteria {
        if !filter.is_empty() && !filter.contains(&i) {
            continue;
        }
        match check() {
            Verdict::Pass(d) => println!("criterion {i}: PASS ({d})"),
            Verdict::Shortfall(d) => println!("criterion {i}: FAIL ({d})"),
            Verdict::Fail(d) => {
                hard_failures += 1;
                println!("criterion {i}: FAIL ({d})");
            }
        }
    }
    if hard_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
