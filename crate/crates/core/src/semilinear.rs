//! `sigma^e`-semilinear endomorphisms of free modules over `W_n(F_{p^D})`.
//!
//! Everything over the algebraic closure is computed on a finite layer
//! `W_n(F_{p^L})` with `D | L`, viewed as a free `Z/p^n`-module through the
//! Galois-ring coordinates. Fixed modules are kernels of `1 - Phi` there, and
//! the layer is grown until the fixed module has the rank that the Fitting
//! decomposition predicts for the closure.

use std::sync::Arc;

use thiserror::Error;

use crate::field::{build_field, Embedding, FieldError, FiniteField, ENUMERATION_CAP};
use crate::galois::{GaloisRing, GrElem};
use crate::witt::{WittError, WittRing, WittVector};
use crate::zpn::{smith_data, Matrix, Submodule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemilinearError {
    #[error("matrix entry ({row}, {col}) does not lie over F_(p^{def_degree})")]
    NotDefined {
        row: usize,
        col: usize,
        def_degree: usize,
    },
    #[error("matrix must be {rank}x{rank}")]
    Shape { rank: usize },
    #[error("definition degree {d0} does not divide {d}")]
    DegreeMismatch { d0: usize, d: usize },
    #[error("twist must be at least 1")]
    ZeroTwist,
    #[error("no stabilization within the field-size budget (last layer F_(p^{last_degree}))")]
    BudgetExceeded { last_degree: usize },
    #[error("the linear endomorphism does not commute with Phi")]
    NotCommuting,
    #[error("the fixed module is not stable under the operator")]
    NotStable,
    #[error("the fixed module is not free over Z/p^n")]
    NotFree,
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Largest field size a layer may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_field_size: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_field_size: ENUMERATION_CAP,
        }
    }
}

/// Matrix over a Witt ring, row-major.
pub type WittMatrix = Vec<Vec<WittVector>>;

/// One finite layer `W_n(F_{p^L})` of the closure.
#[derive(Clone)]
pub struct Layer {
    degree: usize,
    gr: Arc<GaloisRing>,
    witt: WittRing,
    emb: Embedding,
}

impl Layer {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn witt(&self) -> &WittRing {
        &self.witt
    }

    pub fn galois(&self) -> &GaloisRing {
        &self.gr
    }

    pub fn embedding(&self) -> &Embedding {
        &self.emb
    }

    fn coords(&self, base: &WittRing, v: &[WittVector]) -> Vec<u64> {
        v.iter()
            .flat_map(|c| self.gr.from_witt(&base.embed(&self.witt, &self.emb, c)))
            .collect()
    }

    fn coords_local(&self, v: &[WittVector]) -> Vec<u64> {
        v.iter().flat_map(|c| self.gr.from_witt(c)).collect()
    }

    fn vector(&self, coords: &[u64]) -> Vec<WittVector> {
        coords
            .chunks(self.degree)
            .map(|c| self.gr.to_witt(&self.witt, c))
            .collect()
    }
}

#[derive(Clone)]
pub struct SemilinearModule {
    witt: WittRing,
    rank: usize,
    twist: usize,
    matrix: WittMatrix,
    def_degree: usize,
    q_degree: usize,
}

impl std::fmt::Debug for SemilinearModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemilinearModule")
            .field("ring", &self.witt)
            .field("rank", &self.rank)
            .field("twist", &self.twist)
            .field("def_degree", &self.def_degree)
            .field("q_degree", &self.q_degree)
            .field("matrix", &self.matrix)
            .finish()
    }
}

/// The `Z/p^n`-matrix of `Phi` on one layer.
#[derive(Clone)]
pub struct RestrictedMap {
    layer: Layer,
    rank: usize,
    matrix: Matrix,
}

impl RestrictedMap {
    pub fn layer(&self) -> &Layer {
        &self.layer
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Coordinates of a module vector over the layer.
    pub fn to_coords(&self, v: &[WittVector]) -> Vec<u64> {
        assert_eq!(v.len(), self.rank);
        self.layer.coords_local(v)
    }

    pub fn from_coords(&self, c: &[u64]) -> Vec<WittVector> {
        self.layer.vector(c)
    }

    pub fn apply(&self, v: &[WittVector]) -> Vec<WittVector> {
        self.from_coords(&self.matrix.mul_vec(&self.to_coords(v)))
    }
}

#[derive(Clone)]
pub struct FixedModule {
    layer: Layer,
    rank: usize,
    module: Submodule,
    basis: Vec<Vec<u64>>,
    profile: Vec<u32>,
}

impl std::fmt::Debug for FixedModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedModule")
            .field("layer_degree", &self.layer.degree)
            .field("profile", &self.profile)
            .finish()
    }
}

impl FixedModule {
    pub fn layer(&self) -> &Layer {
        &self.layer
    }

    /// Elementary-divisor exponents `k` of the summands `Z/p^k`, descending.
    pub fn profile(&self) -> &[u32] {
        &self.profile
    }

    /// Number of cyclic summands.
    pub fn rank(&self) -> usize {
        self.profile.len()
    }

    pub fn is_free(&self) -> bool {
        let n = self.module.ring().n();
        self.profile.iter().all(|&k| k == n)
    }

    pub fn submodule(&self) -> &Submodule {
        &self.module
    }

    /// Generators in layer coordinates, one per cyclic summand.
    pub fn basis_coords(&self) -> &[Vec<u64>] {
        &self.basis
    }

    /// Generators as module vectors over the layer.
    pub fn basis(&self) -> Vec<Vec<WittVector>> {
        self.basis.iter().map(|b| self.layer.vector(b)).collect()
    }

    pub fn module_rank(&self) -> usize {
        self.rank
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fitting {
    /// `Z/p^n` profile of the stable image.
    pub semisimple_profile: Vec<u32>,
    /// Rank over `W_n(F_{p^D})` of the stable image.
    pub semisimple_rank: usize,
    pub nilpotent_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub witt: WittVector,
    /// Image in `Z/p^n` when the trace lies in `W_n(F_p)`.
    pub prime: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceThreshold {
    /// Threshold used for the equality check.
    pub threshold: usize,
    /// Least `N` with `Phi^{dN}` zero on the cokernel of the fixed module.
    pub cokernel_nilpotency: usize,
    /// Least `m0 >= 1` such that equality holds for every checked `m >= m0`.
    pub empirical_start: Option<usize>,
    /// `(m, trace on fixed module, trace on module)` for the checked range.
    pub rows: Vec<(usize, u64, Option<u64>)>,
    pub holds_from_threshold: bool,
}

/// Solution of `x - Phi(x) = y`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<WittVector>,
    pub layer_degree: usize,
}

/// Square matrix arithmetic over a Galois ring.
pub(crate) mod grmat {
    use super::*;

    pub type GrMatrix = Vec<Vec<GrElem>>;

    pub fn identity(gr: &GaloisRing, r: usize) -> GrMatrix {
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if i == j { gr.one() } else { gr.zero() })
                    .collect()
            })
            .collect()
    }

    pub fn mul(gr: &GaloisRing, a: &GrMatrix, b: &GrMatrix) -> GrMatrix {
        let (r, k, c) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
        (0..r)
            .map(|i| {
                (0..c)
                    .map(|j| {
                        (0..k).fold(gr.zero(), |acc, t| gr.add(&acc, &gr.mul(&a[i][t], &b[t][j])))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn sigma(gr: &GaloisRing, a: &GrMatrix, e: usize) -> GrMatrix {
        a.iter()
            .map(|row| row.iter().map(|x| gr.sigma_pow(x, e)).collect())
            .collect()
    }

    pub fn pow(gr: &GaloisRing, a: &GrMatrix, mut e: u64) -> GrMatrix {
        let mut acc = identity(gr, a.len());
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(gr, &acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = mul(gr, &base, &base);
            }
        }
        acc
    }

    pub fn unit_inverse(gr: &GaloisRing, a: &[u64]) -> Option<GrElem> {
        if gr.residue(a).is_zero() {
            return None;
        }
        let q = gr.field().order();
        let order = (q - 1) * q.pow(gr.length() - 1);
        Some(gr.pow(a, order - 1))
    }

    /// Inverse by Gauss-Jordan with unit pivots; `None` when singular mod `p`.
    pub fn inverse(gr: &GaloisRing, a: &GrMatrix) -> Option<GrMatrix> {
        let r = a.len();
        let mut m = a.clone();
        let mut inv = identity(gr, r);
        for col in 0..r {
            let piv = (col..r).find(|&i| !gr.residue(&m[i][col]).is_zero())?;
            m.swap(col, piv);
            inv.swap(col, piv);
            let u = unit_inverse(gr, &m[col][col])?;
            m[col] = m[col].iter().map(|x| gr.mul(&u, x)).collect();
            inv[col] = inv[col].iter().map(|x| gr.mul(&u, x)).collect();
            for i in 0..r {
                if i == col {
                    continue;
                }
                let f = m[i][col].clone();
                if f.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..r {
                    let t = gr.mul(&f, &m[col][j]);
                    m[i][j] = gr.sub(&m[i][j], &t);
                    let t = gr.mul(&f, &inv[col][j]);
                    inv[i][j] = gr.sub(&inv[i][j], &t);
                }
            }
        }
        Some(inv)
    }
}

use grmat::GrMatrix;

impl SemilinearModule {
    /// `Phi(v) = A sigma^e(v)` on `W_n(F_{p^D})^r`, with entries of `A` over
    /// `W_n(F_{p^{d0}})` and `q = p^d`.
    pub fn new(
        witt: &WittRing,
        twist: usize,
        matrix: WittMatrix,
        def_degree: usize,
        q_degree: usize,
    ) -> Result<Self, SemilinearError> {
        let rank = matrix.len();
        if matrix.iter().any(|row| row.len() != rank) {
            return Err(SemilinearError::Shape { rank });
        }
        if twist == 0 {
            return Err(SemilinearError::ZeroTwist);
        }
        let big_d = witt.field().degree();
        if def_degree == 0 || !big_d.is_multiple_of(def_degree) {
            return Err(SemilinearError::DegreeMismatch {
                d0: def_degree,
                d: big_d,
            });
        }
        if q_degree == 0 || !q_degree.is_multiple_of(def_degree) {
            return Err(SemilinearError::DegreeMismatch {
                d0: def_degree,
                d: q_degree,
            });
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if !witt.lies_in(x, def_degree) {
                    return Err(SemilinearError::NotDefined {
                        row: i,
                        col: j,
                        def_degree,
                    });
                }
            }
        }
        Ok(Self {
            witt: witt.clone(),
            rank,
            twist,
            matrix,
            def_degree,
            q_degree,
        })
    }

    pub fn witt(&self) -> &WittRing {
        &self.witt
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn twist(&self) -> usize {
        self.twist
    }

    pub fn matrix(&self) -> &WittMatrix {
        &self.matrix
    }

    pub fn def_degree(&self) -> usize {
        self.def_degree
    }

    pub fn q_degree(&self) -> usize {
        self.q_degree
    }

    fn base_degree(&self) -> usize {
        self.witt.field().degree()
    }

    fn n(&self) -> u32 {
        self.witt.length() as u32
    }

    fn p(&self) -> u64 {
        self.witt.characteristic()
    }

    /// `A sigma^e(v)` through Witt arithmetic.
    pub fn apply(&self, v: &[WittVector]) -> Vec<WittVector> {
        let w = &self.witt;
        let sv: Vec<WittVector> = v.iter().map(|x| w.frobenius_pow(x, self.twist)).collect();
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&sv)
                    .fold(w.zero(), |acc, (a, x)| w.add(&acc, &w.mul(a, x)))
            })
            .collect()
    }

    /// The layer `W_n(F_{p^{Dt}})`.
    pub fn layer(&self, t: usize) -> Result<Layer, SemilinearError> {
        let degree = self.base_degree() * t;
        let field: FiniteField = build_field(self.p(), degree)?;
        let witt = WittRing::new(&field, self.witt.length())?;
        let emb = Embedding::new(self.witt.field(), &field)?;
        Ok(Layer {
            degree,
            gr: GaloisRing::cached(&field, self.n()),
            witt,
            emb,
        })
    }

    fn layer_within(&self, t: usize, budget: Budget) -> Option<Result<Layer, SemilinearError>> {
        let degree = self.base_degree() * t;
        let size = (0..degree).try_fold(1u64, |acc, _| acc.checked_mul(self.p()));
        match size {
            Some(s) if s <= budget.max_field_size && degree <= crate::field::MAX_DEGREE => {
                Some(self.layer(t))
            }
            _ => None,
        }
    }

    fn gr_entries(&self, layer: &Layer, m: &WittMatrix) -> GrMatrix {
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|x| layer.gr.from_witt(&self.witt.embed(&layer.witt, &layer.emb, x)))
                    .collect()
            })
            .collect()
    }

    fn gr_to_witt(&self, gr: &GaloisRing, m: &GrMatrix) -> WittMatrix {
        m.iter()
            .map(|row| row.iter().map(|x| gr.to_witt(&self.witt, x)).collect())
            .collect()
    }

    /// Block matrix of a linear endomorphism given over the base ring.
    pub fn restrict_linear(&self, layer: &Layer, m: &WittMatrix) -> Matrix {
        let entries = self.gr_entries(layer, m);
        self.blocks(layer, &entries, None)
    }

    fn blocks(&self, layer: &Layer, entries: &GrMatrix, frob: Option<&Matrix>) -> Matrix {
        let l = layer.degree;
        let r = self.rank;
        let ring = layer.gr.ring();
        let mut out = Matrix::zero(ring, r * l, r * l);
        for (j, row) in entries.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                let mut block = layer.gr.mul_matrix(a);
                if let Some(s) = frob {
                    block = block.mul(s);
                }
                for x in 0..l {
                    for y in 0..l {
                        out.set(j * l + x, k * l + y, block.get(x, y));
                    }
                }
            }
        }
        out
    }

    /// `Phi` as a `Z/p^n`-linear map on the layer of extension degree `t`.
    pub fn restrict_at(&self, t: usize) -> Result<RestrictedMap, SemilinearError> {
        let layer = self.layer(t)?;
        Ok(self.restrict_on(layer))
    }

    fn restrict_on(&self, layer: Layer) -> RestrictedMap {
        let entries = self.gr_entries(&layer, &self.matrix);
        let s = layer.gr.sigma_matrix(self.twist);
        let matrix = self.blocks(&layer, &entries, Some(&s));
        RestrictedMap {
            layer,
            rank: self.rank,
            matrix,
        }
    }

    pub fn restrict_scalars(&self) -> Result<RestrictedMap, SemilinearError> {
        self.restrict_at(1)
    }

    fn fixed_on(&self, rm: &RestrictedMap) -> FixedModule {
        let size = rm.matrix.nrows();
        let ring = rm.matrix.ring();
        let one_minus = Matrix::identity(ring, size).sub(&rm.matrix);
        let module = one_minus.kernel();
        let sd = smith_data(ring, module.howell_rows(), size);
        let mut pairs: Vec<(u32, Vec<u64>)> = sd
            .valuations
            .iter()
            .map(|&v| ring.n() - v)
            .zip(sd.basis)
            .collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        let (profile, basis) = pairs.into_iter().unzip();
        FixedModule {
            layer: rm.layer.clone(),
            rank: self.rank,
            module,
            basis,
            profile,
        }
    }

    /// `M^{1 - Phi}` over the base layer.
    pub fn fixed_module(&self) -> Result<FixedModule, SemilinearError> {
        self.fixed_module_at(1)
    }

    pub fn fixed_module_at(&self, t: usize) -> Result<FixedModule, SemilinearError> {
        Ok(self.fixed_on(&self.restrict_at(t)?))
    }

    /// Stable image profile and nilpotent index of the restricted map on the base layer.
    pub fn fitting(&self) -> Result<Fitting, SemilinearError> {
        let rm = self.restrict_scalars()?;
        let ring = rm.matrix.ring();
        let size = rm.matrix.nrows();
        let mut power = Matrix::identity(ring, size);
        let mut kernel = power.kernel();
        let mut j = 0;
        loop {
            let next = power.mul(&rm.matrix);
            let next_kernel = next.kernel();
            if next_kernel == kernel {
                break;
            }
            power = next;
            kernel = next_kernel;
            j += 1;
            assert!(j <= size * ring.n() as usize, "kernel chain failed to stabilize");
        }
        let image = power.image();
        let semisimple_profile = image.profile();
        debug_assert!(semisimple_profile.iter().all(|&k| k == ring.n()));
        let semisimple_rank = semisimple_profile.len() / self.base_degree();
        Ok(Fitting {
            semisimple_profile,
            semisimple_rank,
            nilpotent_index: j,
        })
    }

    /// Profile the fixed module reaches over the closure.
    pub fn target_profile(&self) -> Result<Vec<u32>, SemilinearError> {
        let fit = self.fitting()?;
        Ok(vec![self.n(); fit.semisimple_rank * self.twist])
    }

    /// Grow the layer until the fixed module reaches its closure rank.
    pub fn stabilize_fixed_module(&self, budget: Budget) -> Result<(FixedModule, usize), SemilinearError> {
        let target = self.target_profile()?;
        let mut t = 1;
        let mut last = self.base_degree();
        while let Some(layer) = self.layer_within(t, budget) {
            let layer = layer?;
            last = layer.degree;
            let fixed = self.fixed_on(&self.restrict_on(layer));
            if fixed.profile == target {
                return Ok((fixed, t));
            }
            t += 1;
        }
        Err(SemilinearError::BudgetExceeded { last_degree: last })
    }

    /// `A sigma^e(A) .. sigma^{e(d-1)}(A)`, the linear operator `F = Phi^d`.
    pub fn linearized_f(&self, d: usize) -> Result<WittMatrix, SemilinearError> {
        if d == 0 || !d.is_multiple_of(self.def_degree) {
            return Err(SemilinearError::DegreeMismatch {
                d0: self.def_degree,
                d,
            });
        }
        let layer = self.layer(1)?;
        let gr = &layer.gr;
        let f = self.linearized_gr(gr, &self.gr_entries(&layer, &self.matrix), d);
        Ok(self.gr_to_witt(gr, &f))
    }

    fn linearized_gr(&self, gr: &GaloisRing, a: &GrMatrix, d: usize) -> GrMatrix {
        let mut acc = grmat::identity(gr, self.rank);
        for i in 0..d {
            acc = grmat::mul(gr, &acc, &grmat::sigma(gr, a, self.twist * i));
        }
        acc
    }

    fn check_linear(&self, phi: &WittMatrix) -> Result<(), SemilinearError> {
        if phi.len() != self.rank || phi.iter().any(|r| r.len() != self.rank) {
            return Err(SemilinearError::Shape { rank: self.rank });
        }
        for (i, row) in phi.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if !self.witt.lies_in(x, self.q_degree) {
                    return Err(SemilinearError::NotDefined {
                        row: i,
                        col: j,
                        def_degree: self.q_degree,
                    });
                }
            }
        }
        let layer = self.layer(1)?;
        let gr = &layer.gr;
        let a = self.gr_entries(&layer, &self.matrix);
        let f = self.gr_entries(&layer, phi);
        let lhs = grmat::mul(gr, &a, &grmat::sigma(gr, &f, self.twist));
        let rhs = grmat::mul(gr, &f, &a);
        if lhs != rhs {
            return Err(SemilinearError::NotCommuting);
        }
        Ok(())
    }

    /// `phi F^m` over the base ring.
    fn twisted_operator(&self, phi: &WittMatrix, m: usize) -> Result<WittMatrix, SemilinearError> {
        self.check_linear(phi)?;
        let layer = self.layer(1)?;
        let gr = &layer.gr;
        let a = self.gr_entries(&layer, &self.matrix);
        let f = self.linearized_gr(gr, &a, self.q_degree);
        let op = grmat::mul(gr, &self.gr_entries(&layer, phi), &grmat::pow(gr, &f, m as u64));
        Ok(self.gr_to_witt(gr, &op))
    }

    /// `sum_j c_j F^j` with integer coefficients; always commutes with `Phi`.
    pub fn f_polynomial(&self, coeffs: &[i64]) -> Result<WittMatrix, SemilinearError> {
        let layer = self.layer(1)?;
        let gr = &layer.gr;
        let a = self.gr_entries(&layer, &self.matrix);
        let f = self.linearized_gr(gr, &a, self.q_degree);
        let mut acc: GrMatrix = vec![vec![gr.zero(); self.rank]; self.rank];
        let mut power = grmat::identity(gr, self.rank);
        for &c in coeffs {
            let c = gr.from_int(c);
            for (row, prow) in acc.iter_mut().zip(&power) {
                for (x, y) in row.iter_mut().zip(prow) {
                    *x = gr.add(x, &gr.mul(&c, y));
                }
            }
            power = grmat::mul(gr, &power, &f);
        }
        Ok(self.gr_to_witt(gr, &acc))
    }

    /// `Tr(phi F^m | M)` over `W_n(F_{p^D})`.
    pub fn trace_on_module(&self, phi: &WittMatrix, m: usize) -> Result<Trace, SemilinearError> {
        let op = self.twisted_operator(phi, m)?;
        let w = &self.witt;
        let witt = (0..self.rank).fold(w.zero(), |acc, i| w.add(&acc, &op[i][i]));
        let prime = w.to_prime_ring(&witt);
        Ok(Trace { witt, prime })
    }

    /// `Tr(phi F^m | M^{1 - Phi})` over `Z/p^n`, on the stabilized fixed module.
    pub fn trace_on_fixed(&self, phi: &WittMatrix, m: usize, budget: Budget) -> Result<u64, SemilinearError> {
        let (fixed, _) = self.stabilize_fixed_module(budget)?;
        self.trace_on(&fixed, phi, m)
    }

    /// Trace of `phi F^m` on a given fixed module.
    pub fn trace_on(&self, fixed: &FixedModule, phi: &WittMatrix, m: usize) -> Result<u64, SemilinearError> {
        if !fixed.is_free() {
            return Err(SemilinearError::NotFree);
        }
        let op = self.twisted_operator(phi, m)?;
        let layer = &fixed.layer;
        let ring = layer.gr.ring();
        let big = self.restrict_linear(layer, &op);
        let s = fixed.basis.len();
        if s == 0 {
            return Ok(0);
        }
        let b = Matrix::from_cols(ring, big.nrows(), &fixed.basis);
        let mut tr = 0;
        for (i, v) in fixed.basis.iter().enumerate() {
            let image = big.mul_vec(v);
            let c = b.solve(&image).ok_or(SemilinearError::NotStable)?;
            tr = ring.add(tr, c[i]);
        }
        Ok(tr)
    }

    /// `W_n`-span of a fixed module inside the layer.
    pub fn fixed_span(&self, fixed: &FixedModule) -> Submodule {
        let layer = &fixed.layer;
        let gr = &layer.gr;
        let l = layer.degree;
        let mut gens = Vec::new();
        let mut x = gr.zero();
        if l > 1 {
            x[1] = 1;
        } else {
            x[0] = 1;
        }
        for b in &fixed.basis {
            let mut cur = b.clone();
            for _ in 0..l {
                gens.push(cur.clone());
                cur = cur
                    .chunks(l)
                    .flat_map(|c| gr.mul(c, &x))
                    .collect();
            }
        }
        Submodule::from_generators(gr.ring(), self.rank * l, gens)
    }

    /// Whether `fixed (x) W_n -> M` is injective.
    pub fn span_is_injective(&self, fixed: &FixedModule) -> bool {
        let span = self.fixed_span(fixed);
        let l = fixed.layer.degree as u32;
        span.length() == fixed.profile.iter().sum::<u32>() * l
    }

    /// Least `j` with `op^j(M)` inside the span, up to `limit`.
    fn cokernel_nilpotency(&self, span: &Submodule, op: &Matrix, limit: usize) -> Option<usize> {
        let size = op.nrows();
        let mut power = Matrix::identity(op.ring(), size);
        for j in 0..=limit {
            if power.columns().iter().all(|c| span.contains(c)) {
                return Some(j);
            }
            power = op.mul(&power);
        }
        None
    }

    /// Nilpotency of `Phi` and of `F` on the cokernel of the fixed module.
    pub fn cokernel_nilpotence(&self, fixed: &FixedModule) -> (Option<usize>, Option<usize>) {
        let span = self.fixed_span(fixed);
        let rm = self.restrict_on(fixed.layer.clone());
        let limit = rm.matrix.nrows() * self.n() as usize;
        let phi = self.cokernel_nilpotency(&span, &rm.matrix, limit);
        let f = self
            .linearized_f(self.q_degree)
            .ok()
            .and_then(|f| {
                let big = self.restrict_linear(&fixed.layer, &f);
                self.cokernel_nilpotency(&span, &big, limit)
            });
        (phi, f)
    }

    /// Threshold from the cokernel of the fixed module, with the trace check
    /// for `m` in `1..=threshold + 4`.
    pub fn lemma53_threshold(&self, phi: &WittMatrix, budget: Budget) -> Result<TraceThreshold, SemilinearError> {
        self.check_linear(phi)?;
        let (fixed, _) = self.stabilize_fixed_module(budget)?;
        let span = self.fixed_span(&fixed);
        let rm = self.restrict_on(fixed.layer.clone());
        let phi_d = rm.matrix.pow(self.q_degree as u64);
        let limit = rm.matrix.nrows() * self.n() as usize + 1;
        let cokernel_nilpotency = self
            .cokernel_nilpotency(&span, &phi_d, limit)
            .expect("Phi is nilpotent on the cokernel of its fixed module");
        let threshold = if self.n() == 1 {
            1
        } else {
            cokernel_nilpotency.max(1)
        };
        let mut rows = Vec::new();
        for m in 1..=threshold + 4 {
            let fixed_tr = self.trace_on(&fixed, phi, m)?;
            let module_tr = self.trace_on_module(phi, m)?.prime;
            rows.push((m, fixed_tr, module_tr));
        }
        let equal = |r: &(usize, u64, Option<u64>)| r.2 == Some(r.1);
        let holds_from_threshold = rows.iter().filter(|r| r.0 >= threshold).all(equal);
        let empirical_start = (1..=rows.len())
            .find(|&m0| rows.iter().filter(|r| r.0 >= m0).all(equal));
        Ok(TraceThreshold {
            threshold,
            cokernel_nilpotency,
            empirical_start,
            rows,
            holds_from_threshold,
        })
    }

    /// Some `x` over a finite layer with `x - Phi(x) = y`.
    pub fn solve_one_minus_phi(&self, y: &[WittVector], budget: Budget) -> Result<Solution, SemilinearError> {
        assert_eq!(y.len(), self.rank);
        let mut t = 1;
        let mut last = self.base_degree();
        while let Some(layer) = self.layer_within(t, budget) {
            let layer = layer?;
            last = layer.degree;
            let rm = self.restrict_on(layer);
            let ring = rm.matrix.ring();
            let one_minus = Matrix::identity(ring, rm.matrix.nrows()).sub(&rm.matrix);
            let target = rm.layer.coords(&self.witt, y);
            if let Some(x) = one_minus.solve(&target) {
                return Ok(Solution {
                    x: rm.from_coords(&x),
                    layer_degree: rm.layer.degree,
                });
            }
            t += 1;
        }
        Err(SemilinearError::BudgetExceeded { last_degree: last })
    }

    /// `M / pM` over `F_{p^D}`.
    pub fn reduce_mod_p(&self) -> Result<SemilinearModule, SemilinearError> {
        let witt = WittRing::new(self.witt.field(), 1)?;
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| witt.teichmuller(&x.components()[0]))
                    .collect()
            })
            .collect();
        SemilinearModule::new(&witt, self.twist, matrix, self.def_degree, self.q_degree)
    }

    /// Whether the stabilized fixed module reduces mod `p` onto the fixed module of `M / pM`.
    pub fn reduction_matches(&self, budget: Budget) -> Result<bool, SemilinearError> {
        let (fixed, t) = self.stabilize_fixed_module(budget)?;
        let reduced = self.reduce_mod_p()?.fixed_module_at(t)?;
        Ok(fixed.module.truncate(1) == reduced.module)
    }
}

/// Build a matrix over a Witt ring from integers in `Z/p^n`.
pub fn integer_matrix(witt: &WittRing, rows: &[Vec<i64>]) -> WittMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&c| witt.from_int(c)).collect())
        .collect()
}

/// `c * I`.
pub fn scalar_matrix(witt: &WittRing, rank: usize, c: &WittVector) -> WittMatrix {
    (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| if i == j { c.clone() } else { witt.zero() })
                .collect()
        })
        .collect()
}
