//! Randomized property suite for semilinear modules over `W_n(F_{p^D})`.
//!
//! Modules are drawn as `P (U + N) sigma(P)^{-1}`: `U` is an integer matrix
//! of small multiplicative order (so the fixed module appears on a small
//! layer) and `N` is nilpotent mod `p`. Draws that do not stabilize within
//! the budget are redrawn and counted.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::field::{build_field, Embedding};
use crate::galois::{GaloisRing, GrElem};
use crate::semilinear::grmat::{self, GrMatrix};
use crate::semilinear::{Budget, SemilinearError, SemilinearModule, WittMatrix};
use crate::witt::WittRing;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub p: u64,
    pub n: usize,
    pub degree: usize,
    pub modules: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub tested: usize,
    pub rejected: usize,
    pub reduction_failures: usize,
    pub injectivity_failures: usize,
    pub nilpotence_failures: usize,
    pub trace_failures: usize,
    /// Modules with `n = 1` whose threshold is not 1.
    pub threshold_failures: usize,
    pub max_threshold: usize,
    pub max_layer: usize,
    /// Modules where equality started strictly before the threshold.
    pub early_equality: usize,
    pub messages: Vec<String>,
}

impl SuiteOutcome {
    pub fn failures(&self) -> usize {
        self.reduction_failures
            + self.injectivity_failures
            + self.nilpotence_failures
            + self.trace_failures
            + self.threshold_failures
    }
}

/// A drawn module together with the commuting operator used for traces.
pub struct Sample {
    pub module: SemilinearModule,
    pub phi: WittMatrix,
    pub description: String,
}

fn random_gr<R: Rng + ?Sized>(gr: &GaloisRing, rng: &mut R) -> GrElem {
    let m = gr.ring().modulus();
    (0..gr.degree()).map(|_| rng.gen_range(0..m)).collect()
}

fn small_order_block<R: Rng + ?Sized>(gr: &GaloisRing, s: usize, rng: &mut R) -> GrMatrix {
    let p = gr.ring().p();
    let n = gr.length();
    let mut perm: Vec<usize> = (0..s).collect();
    perm.shuffle(rng);
    let mut u = vec![vec![gr.zero(); s]; s];
    for (i, &j) in perm.iter().enumerate() {
        let sign = if p > 2 && rng.gen_bool(0.5) { -1 } else { 1 };
        u[i][j] = gr.from_int(sign);
    }
    if n > 1 && s > 0 && rng.gen_bool(0.25) {
        // 1 + p^{n-1} X has order p
        let pp = gr.ring().p_pow(n - 1);
        let mut t = grmat::identity(gr, s);
        for row in t.iter_mut() {
            for x in row.iter_mut() {
                let c = rng.gen_range(0..p) as i64;
                *x = gr.add(x, &gr.from_int(c * pp as i64));
            }
        }
        u = grmat::mul(gr, &u, &t);
    }
    u
}

fn nilpotent_block<R: Rng + ?Sized>(gr: &GaloisRing, k: usize, rng: &mut R) -> GrMatrix {
    let p = gr.ring().p();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let x = random_gr(gr, rng);
                    if j > i {
                        x
                    } else {
                        gr.scale(p, &x)
                    }
                })
                .collect()
        })
        .collect()
}

/// Draw one module of rank at most 3 with `q = p^D`.
pub fn draw<R: Rng + ?Sized>(p: u64, n: usize, degree: usize, rng: &mut R) -> Result<Sample, SemilinearError> {
    let divisors: Vec<usize> = (1..=degree).filter(|d| degree.is_multiple_of(*d)).collect();
    let d0 = *divisors.choose(rng).expect("nonempty");
    let sub = build_field(p, d0)?;
    let base = build_field(p, degree)?;
    let sub_witt = WittRing::new(&sub, n)?;
    let witt = WittRing::new(&base, n)?;
    let emb = Embedding::new(&sub, &base)?;
    let gr = GaloisRing::cached(&sub, n as u32);
    let r = rng.gen_range(0..=3usize);
    let s = rng.gen_range(0..=r);
    let u = small_order_block(&gr, s, rng);
    let nil = nilpotent_block(&gr, r - s, rng);
    let mut core = vec![vec![gr.zero(); r]; r];
    for i in 0..s {
        for j in 0..s {
            core[i][j] = u[i][j].clone();
        }
    }
    for i in 0..r - s {
        for j in 0..r - s {
            core[s + i][s + j] = nil[i][j].clone();
        }
    }
    let (pm, pinv) = loop {
        let pm: GrMatrix = (0..r)
            .map(|_| (0..r).map(|_| random_gr(&gr, rng)).collect())
            .collect();
        if let Some(inv) = grmat::inverse(&gr, &grmat::sigma(&gr, &pm, 1)) {
            break (pm, inv);
        }
    };
    let a = grmat::mul(&gr, &grmat::mul(&gr, &pm, &core), &pinv);
    let matrix: WittMatrix = a
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| sub_witt.embed(&witt, &emb, &gr.to_witt(&sub_witt, x)))
                .collect()
        })
        .collect();
    let module = SemilinearModule::new(&witt, 1, matrix, d0, degree)?;
    let m = witt.length() as u32;
    let modulus = p.pow(m) as i64;
    let coeffs: Vec<i64> = (0..3).map(|_| rng.gen_range(0..modulus)).collect();
    let phi = module.f_polynomial(&coeffs)?;
    let description = format!(
        "p={p} n={n} D={degree} d0={d0} rank={r} unit_block={s} phi_coeffs={coeffs:?}"
    );
    Ok(Sample {
        module,
        phi,
        description,
    })
}

/// Run every property on one sample; `Ok(None)` means the draw must be rejected.
fn check(sample: &Sample, budget: Budget, out: &mut SuiteOutcome) -> Result<Option<()>, SemilinearError> {
    let module = &sample.module;
    let (fixed, _) = match module.stabilize_fixed_module(budget) {
        Ok(x) => x,
        Err(SemilinearError::BudgetExceeded { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    out.max_layer = out.max_layer.max(fixed.layer().degree());
    let fail = |kind: &str| format!("{kind}: {}", sample.description);
    if !module.reduction_matches(budget)? {
        out.reduction_failures += 1;
        out.messages.push(fail("reduction mod p"));
    }
    if !module.span_is_injective(&fixed) {
        out.injectivity_failures += 1;
        out.messages.push(fail("injectivity"));
    }
    let (phi_nil, f_nil) = module.cokernel_nilpotence(&fixed);
    if phi_nil.is_none() || f_nil.is_none() {
        out.nilpotence_failures += 1;
        out.messages.push(fail("cokernel nilpotence"));
    }
    let report = module.lemma53_threshold(&sample.phi, budget)?;
    out.max_threshold = out.max_threshold.max(report.threshold);
    if !report.holds_from_threshold {
        out.trace_failures += 1;
        out.messages.push(fail("trace equality"));
    }
    if module.witt().length() == 1 && (report.threshold != 1 || report.empirical_start != Some(1)) {
        out.threshold_failures += 1;
        out.messages.push(fail("threshold one"));
    }
    if report.empirical_start.is_some_and(|m0| m0 < report.threshold) {
        out.early_equality += 1;
    }
    Ok(Some(()))
}

/// Draw and check `config.modules` accepted modules.
pub fn run_suite<R: Rng + ?Sized>(
    config: SuiteConfig,
    budget: Budget,
    rng: &mut R,
) -> Result<SuiteOutcome, SemilinearError> {
    let mut out = SuiteOutcome::default();
    while out.tested < config.modules {
        let sample = draw(config.p, config.n, config.degree, rng)?;
        match check(&sample, budget, &mut out)? {
            Some(()) => out.tested += 1,
            None => out.rejected += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drawn_matrices_respect_their_definition_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = draw(3, 2, 2, &mut rng).unwrap();
            let m = &s.module;
            assert!(m
                .matrix()
                .iter()
                .flatten()
                .all(|x| m.witt().lies_in(x, m.def_degree())));
        }
    }

    #[test]
    fn small_suite_has_no_failures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, n, degree) in [(2u64, 2usize, 2usize), (3, 3, 1), (5, 1, 2)] {
            let cfg = SuiteConfig {
                p,
                n,
                degree,
                modules: 10,
            };
            let out = run_suite(cfg, Budget::default(), &mut rng).unwrap();
            assert_eq!(out.failures(), 0, "{:?}", out.messages);
            assert_eq!(out.tested, 10);
        }
    }
}
