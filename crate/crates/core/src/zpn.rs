//! Linear algebra over `Z/p^n`.
//!
//! Submodules of `(Z/p^n)^N` are kept in Howell normal form, which is unique
//! and makes kernels readable off an augmented matrix. Isomorphism types come
//! from a Smith form that also yields an adapted basis.

use std::fmt;

/// The ring `Z/p^n` with `p^n < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zpn {
    p: u64,
    n: u32,
    modulus: u64,
}

impl Zpn {
    pub fn new(p: u64, n: u32) -> Self {
        assert!(n >= 1);
        let modulus = (0..n)
            .try_fold(1u64, |acc, _| acc.checked_mul(p))
            .filter(|&m| m < 1 << 63)
            .expect("p^n must be below 2^63");
        Self { p, n, modulus }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_int(&self, c: i128) -> u64 {
        c.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// `p`-adic valuation, `n` for zero.
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        Some(self.reduce_int(old_s))
    }

    /// Reduction map `Z/p^n -> Z/p^k` for `k <= n`.
    pub fn truncate(&self, a: u64, k: u32) -> u64 {
        a % self.p.pow(k)
    }

    fn scale_row(&self, c: u64, row: &[u64]) -> Vec<u64> {
        row.iter().map(|&x| self.mul(c, x)).collect()
    }

    fn axpy(&self, target: &mut [u64], c: u64, row: &[u64]) {
        if c == 0 {
            return;
        }
        for (t, &x) in target.iter_mut().zip(row) {
            *t = self.add(*t, self.mul(c, x));
        }
    }
}

/// Dense row-major matrix over `Z/p^n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    ring: Zpn,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix mod {} ({}x{})", self.ring.modulus, self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(ring: Zpn, rows: usize, cols: usize) -> Self {
        Self {
            ring,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ring: Zpn, size: usize) -> Self {
        let mut m = Self::zero(ring, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1 % ring.modulus;
        }
        m
    }

    pub fn from_rows(ring: Zpn, rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zero(ring, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = x % ring.modulus;
            }
        }
        m
    }

    /// Matrix with the given columns.
    pub fn from_cols(ring: Zpn, nrows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = Self::zero(ring, nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x % ring.modulus);
            }
        }
        m
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u64>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let r = &self.ring;
        let mut out = Matrix::zero(self.ring, self.rows, other.cols);
        let m = r.modulus as u128;
        for i in 0..self.rows {
            let mut acc = vec![0u128; other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k) as u128;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot = (*slot + a * other.get(k, j) as u128) % m;
                }
            }
            for (j, v) in acc.into_iter().enumerate() {
                out.set(i, j, v as u64);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| self.ring.add(acc, self.ring.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&other.data) {
            *o = self.ring.add(*o, b);
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&other.data) {
            *o = self.ring.sub(*o, b);
        }
        out
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o = self.ring.mul(*o, c);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.ring, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn trace(&self) -> u64 {
        (0..self.rows.min(self.cols)).fold(0, |acc, i| self.ring.add(acc, self.get(i, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Entrywise reduction to `Z/p^k`.
    pub fn truncate(&self, k: u32) -> Matrix {
        let ring = Zpn::new(self.ring.p, k);
        let mut out = Matrix::zero(ring, self.rows, self.cols);
        for (o, &x) in out.data.iter_mut().zip(&self.data) {
            *o = x % ring.modulus;
        }
        out
    }

    /// Column span.
    pub fn image(&self) -> Submodule {
        Submodule::from_generators(self.ring, self.rows, self.columns())
    }

    /// `{ x : self * x = 0 }`.
    pub fn kernel(&self) -> Submodule {
        let ring = self.ring;
        let (k, m) = (self.rows, self.cols);
        let rows: Vec<Vec<u64>> = (0..m)
            .map(|i| {
                let mut row = self.col(i);
                row.extend((0..m).map(|j| u64::from(i == j) % ring.modulus));
                row
            })
            .collect();
        let h = howell_form(ring, rows, k + m);
        let gens = h
            .into_iter()
            .filter(|r| r[..k].iter().all(|&x| x == 0))
            .map(|r| r[k..].to_vec())
            .collect();
        Submodule::from_generators(ring, m, gens)
    }

    /// Some `x` with `self * x = y`, if one exists.
    pub fn solve(&self, y: &[u64]) -> Option<Vec<u64>> {
        let ring = self.ring;
        let (k, m) = (self.rows, self.cols);
        assert_eq!(y.len(), k);
        let rows: Vec<Vec<u64>> = (0..m)
            .map(|i| {
                let mut row = self.col(i);
                row.extend((0..m).map(|j| u64::from(i == j) % ring.modulus));
                row
            })
            .collect();
        let h = howell_form(ring, rows, k + m);
        let mut cur: Vec<u64> = y.to_vec();
        cur.extend(std::iter::repeat_n(0, m));
        for row in &h {
            let Some(c) = row.iter().position(|&x| x != 0) else {
                continue;
            };
            if c >= k {
                break;
            }
            let pivot = row[c];
            if !cur[c].is_multiple_of(pivot) {
                return None;
            }
            let f = cur[c] / pivot;
            ring.axpy(&mut cur, ring.neg(f), row);
        }
        if cur[..k].iter().any(|&x| x != 0) {
            return None;
        }
        Some(cur[k..].iter().map(|&x| ring.neg(x)).collect())
    }
}

/// Howell normal form of the row span; zero rows dropped.
pub fn howell_form(ring: Zpn, rows: Vec<Vec<u64>>, ncols: usize) -> Vec<Vec<u64>> {
    let mut pending: Vec<Vec<u64>> = rows
        .into_iter()
        .map(|r| {
            assert_eq!(r.len(), ncols);
            r.into_iter().map(|x| x % ring.modulus).collect::<Vec<_>>()
        })
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    let mut out: Vec<(usize, Vec<u64>)> = Vec::new();
    for col in 0..ncols {
        let best = pending
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(_, r)| ring.valuation(r[col]))
            .map(|(i, _)| i);
        let Some(idx) = best else { continue };
        let piv = pending.swap_remove(idx);
        let v = ring.valuation(piv[col]);
        let pv = ring.p_pow(v);
        let unit = piv[col] / pv;
        let piv = ring.scale_row(ring.inv(unit).expect("unit part"), &piv);
        debug_assert_eq!(piv[col], pv);
        for row in pending.iter_mut() {
            if row[col] != 0 {
                let f = row[col] / pv;
                ring.axpy(row, ring.neg(f), &piv);
            }
        }
        if v > 0 {
            let ann = ring.scale_row(ring.p_pow(ring.n - v), &piv);
            if ann.iter().any(|&x| x != 0) {
                pending.push(ann);
            }
        }
        pending.retain(|r| r.iter().any(|&x| x != 0));
        out.push((col, piv));
    }
    debug_assert!(pending.is_empty());
    // Reduce entries above each pivot into [0, pivot).
    for i in 0..out.len() {
        let (col, pivot_row) = (out[i].0, out[i].1.clone());
        let pv = pivot_row[col];
        for j in 0..i {
            let x = out[j].1[col];
            if x >= pv {
                let f = x / pv;
                ring.axpy(&mut out[j].1, ring.neg(f), &pivot_row);
            }
        }
    }
    out.into_iter().map(|(_, r)| r).collect()
}

/// Smith normal form data for a generating set of a submodule.
#[derive(Clone, Debug)]
pub struct SmithData {
    /// Valuations of the nonzero invariant factors.
    pub valuations: Vec<u32>,
    /// Adapted basis: `basis[i]` generates a cyclic summand of order `p^(n - valuations[i])`.
    pub basis: Vec<Vec<u64>>,
}

/// Smith form of the row span of `rows`, with an adapted generating set.
pub fn smith_data(ring: Zpn, rows: &[Vec<u64>], ncols: usize) -> SmithData {
    let mut g: Vec<Vec<u64>> = rows.to_vec();
    // w tracks V^{-1}, so that rowspan(g) = rowspan(D V^{-1}).
    let mut w: Vec<Vec<u64>> = (0..ncols)
        .map(|i| (0..ncols).map(|j| u64::from(i == j) % ring.modulus).collect())
        .collect();
    let nrows = g.len();
    let mut valuations = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in g.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let v = ring.valuation(x);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((bi, bj, v)) = best else { break };
        g.swap(t, bi);
        if bj != t {
            for row in g.iter_mut() {
                row.swap(t, bj);
            }
            w.swap(t, bj);
        }
        let pv = ring.p_pow(v);
        let unit = g[t][t] / pv;
        let uinv = ring.inv(unit).expect("unit part");
        // scale column t by uinv; W row t scaled by unit
        for row in g.iter_mut() {
            row[t] = ring.mul(row[t], uinv);
        }
        w[t] = ring.scale_row(unit, &w[t]);
        // clear column t below
        let pivot_row = g[t].clone();
        for row in g.iter_mut().skip(t + 1) {
            if row[t] != 0 {
                let f = row[t] / pv;
                ring.axpy(row, ring.neg(f), &pivot_row);
            }
        }
        // clear row t to the right via column operations
        for j in (t + 1)..ncols {
            let x = g[t][j];
            if x == 0 {
                continue;
            }
            let f = x / pv;
            // col j -= f * col t ; W row t += f * W row j
            for row in g.iter_mut() {
                row[j] = ring.sub(row[j], ring.mul(f, row[t]));
            }
            let wj = w[j].clone();
            ring.axpy(&mut w[t], f, &wj);
        }
        valuations.push(v);
        t += 1;
    }
    let basis = valuations
        .iter()
        .enumerate()
        .map(|(i, &v)| ring.scale_row(ring.p_pow(v), &w[i]))
        .collect();
    SmithData { valuations, basis }
}

/// A submodule of `(Z/p^n)^dim`, stored in Howell form.
#[derive(Clone, PartialEq, Eq)]
pub struct Submodule {
    ring: Zpn,
    dim: usize,
    rows: Vec<Vec<u64>>,
}

impl fmt::Debug for Submodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Submodule(mod {}, dim {}, {:?})", self.ring.modulus, self.dim, self.rows)
    }
}

impl Submodule {
    pub fn from_generators(ring: Zpn, dim: usize, gens: Vec<Vec<u64>>) -> Self {
        let rows = howell_form(ring, gens, dim);
        Self { ring, dim, rows }
    }

    pub fn zero(ring: Zpn, dim: usize) -> Self {
        Self {
            ring,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn howell_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// `log_p` of the cardinality.
    pub fn length(&self) -> u32 {
        self.rows
            .iter()
            .map(|r| {
                let lead = r.iter().find(|&&x| x != 0).copied().unwrap_or(0);
                self.ring.n - self.ring.valuation(lead)
            })
            .sum()
    }

    /// Remainder of `v` after reduction by the Howell rows; zero iff `v` is in the span.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut cur: Vec<u64> = v.iter().map(|&x| x % self.ring.modulus).collect();
        for row in &self.rows {
            let c = row.iter().position(|&x| x != 0).expect("nonzero Howell row");
            let f = cur[c] / row[c];
            self.ring.axpy(&mut cur, self.ring.neg(f), row);
        }
        cur
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_module(&self, other: &Submodule) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// Elementary-divisor exponents `k` (summands `Z/p^k`), descending.
    pub fn profile(&self) -> Vec<u32> {
        let mut prof: Vec<u32> = smith_data(self.ring, &self.rows, self.dim)
            .valuations
            .iter()
            .map(|v| self.ring.n - v)
            .collect();
        prof.sort_unstable_by(|a, b| b.cmp(a));
        prof
    }

    pub fn is_free(&self) -> bool {
        self.profile().iter().all(|&k| k == self.ring.n)
    }

    /// A basis, when the module is free.
    pub fn free_basis(&self) -> Option<Vec<Vec<u64>>> {
        let sd = smith_data(self.ring, &self.rows, self.dim);
        sd.valuations.iter().all(|&v| v == 0).then_some(sd.basis)
    }

    /// Image under the reduction `(Z/p^n)^dim -> (Z/p^k)^dim`.
    pub fn truncate(&self, k: u32) -> Submodule {
        let ring = Zpn::new(self.ring.p, k);
        let gens = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| x % ring.modulus).collect())
            .collect();
        Submodule::from_generators(ring, self.dim, gens)
    }

    pub fn generators_with(&self, extra: Vec<Vec<u64>>) -> Submodule {
        let mut gens = self.rows.clone();
        gens.extend(extra);
        Submodule::from_generators(self.ring, self.dim, gens)
    }
}
