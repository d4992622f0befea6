//! `W_n(F_{p^L})` as the Galois ring `(Z/p^n)[X]/(h)`, where `X` is the
//! Teichmuller lift of the generator of `F_{p^L}`.
//!
//! The coordinates in the basis `1, X, .., X^{L-1}` are the `Z/p^n`
//! coordinates used by all restricted linear algebra. This model shares no
//! code with the Witt polynomial tables, so converting between the two is an
//! independent check of both.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::field::{Fe, FiniteField};
use crate::witt::{WittRing, WittVector};
use crate::zpn::{Matrix, Zpn};

/// Element of the Galois ring: coefficients in the `X`-basis.
pub type GrElem = Vec<u64>;

pub struct GaloisRing {
    field: FiniteField,
    ring: Zpn,
    n: u32,
    degree: usize,
    /// monic `h` without its leading coefficient
    h: Vec<u64>,
    /// `sigma(X^i) = X^{ip}` in coordinates
    sigma_cols: Vec<GrElem>,
}

static GR_CACHE: OnceLock<Mutex<HashMap<(u64, usize, u32), Arc<GaloisRing>>>> = OnceLock::new();

impl GaloisRing {
    pub fn cached(field: &FiniteField, n: u32) -> Arc<GaloisRing> {
        let key = (field.characteristic(), field.degree(), n);
        let cache = GR_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().expect("gr cache poisoned").get(&key) {
            return g.clone();
        }
        let built = Arc::new(GaloisRing::new(field, n));
        cache
            .lock()
            .expect("gr cache poisoned")
            .entry(key)
            .or_insert(built)
            .clone()
    }

    pub fn new(field: &FiniteField, n: u32) -> Self {
        let p = field.characteristic();
        let ring = Zpn::new(p, n);
        let l = field.degree();
        // Start from the naive lift of the modulus, then replace X by its
        // Teichmuller lift X^{p^{L(n-1)}} and take that element's minimal polynomial.
        let naive: Vec<u64> = field.modulus()[..l].iter().map(|&c| c as u64).collect();
        let mut gr = GaloisRing {
            field: field.clone(),
            ring,
            n,
            degree: l,
            h: naive,
            sigma_cols: Vec::new(),
        };
        if n > 1 && l > 1 {
            let mut x = vec![0u64; l];
            x[1] = 1;
            let mut xi = x;
            for _ in 0..(l * (n as usize - 1)) {
                xi = gr.pow(&xi, p);
            }
            // powers 1, xi, .., xi^{L-1} form a basis (unitriangular mod p)
            let mut cols = vec![gr.one()];
            for i in 1..l {
                cols.push(gr.mul(&cols[i - 1], &xi));
            }
            let top = gr.mul(&cols[l - 1], &xi);
            let basis = Matrix::from_cols(ring, l, &cols);
            let c = basis.solve(&top).expect("Teichmuller powers form a basis");
            gr.h = c.iter().map(|&v| ring.neg(v)).collect();
        }
        let one = gr.one();
        let mut xp = vec![0u64; l];
        if l > 1 {
            xp[1] = 1;
        } else {
            xp[0] = 1;
        }
        let xp = gr.pow(&xp, p);
        let mut cols = vec![one];
        for i in 1..l {
            cols.push(gr.mul(&cols[i - 1], &xp));
        }
        gr.sigma_cols = cols;
        gr
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn length(&self) -> u32 {
        self.n
    }

    /// Minimal polynomial of `X`, monic, constant term first.
    pub fn modulus(&self) -> Vec<u64> {
        let mut h = self.h.clone();
        h.push(1);
        h
    }

    pub fn zero(&self) -> GrElem {
        vec![0; self.degree]
    }

    pub fn one(&self) -> GrElem {
        let mut e = self.zero();
        e[0] = 1 % self.ring.modulus();
        e
    }

    pub fn from_int(&self, c: i64) -> GrElem {
        let mut e = self.zero();
        e[0] = self.ring.reduce_int(c as i128);
        e
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> GrElem {
        a.iter().zip(b).map(|(&x, &y)| self.ring.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> GrElem {
        a.iter().zip(b).map(|(&x, &y)| self.ring.sub(x, y)).collect()
    }

    pub fn scale(&self, c: u64, a: &[u64]) -> GrElem {
        a.iter().map(|&x| self.ring.mul(c, x)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> GrElem {
        let l = self.degree;
        let m = self.ring.modulus() as u128;
        let mut prod = vec![0u128; 2 * l - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % m;
            }
        }
        for k in (l..2 * l - 1).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            for (i, &hi) in self.h.iter().enumerate() {
                let sub = top * hi as u128 % m;
                prod[k - l + i] = (prod[k - l + i] + m - sub) % m;
            }
        }
        prod.truncate(l);
        prod.into_iter().map(|v| v as u64).collect()
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> GrElem {
        let mut acc = self.one();
        let mut base = a.to_vec();
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

    /// The Witt Frobenius.
    pub fn sigma(&self, a: &[u64]) -> GrElem {
        let mut out = self.zero();
        for (i, &c) in a.iter().enumerate() {
            if c != 0 {
                out = self.add(&out, &self.scale(c, &self.sigma_cols[i]));
            }
        }
        out
    }

    pub fn sigma_pow(&self, a: &[u64], e: usize) -> GrElem {
        let mut out = a.to_vec();
        for _ in 0..(e % self.degree.max(1)) {
            out = self.sigma(&out);
        }
        out
    }

    /// Matrix of `sigma^e` on the `X`-basis.
    pub fn sigma_matrix(&self, e: usize) -> Matrix {
        let l = self.degree;
        let cols: Vec<GrElem> = (0..l)
            .map(|i| {
                let mut b = self.zero();
                b[i] = 1;
                self.sigma_pow(&b, e)
            })
            .collect();
        Matrix::from_cols(self.ring, l, &cols)
    }

    /// Matrix of multiplication by `a` on the `X`-basis.
    pub fn mul_matrix(&self, a: &[u64]) -> Matrix {
        let l = self.degree;
        let mut cols = Vec::with_capacity(l);
        let mut cur = a.to_vec();
        let mut x = self.zero();
        if l > 1 {
            x[1] = 1;
        }
        for i in 0..l {
            cols.push(cur.clone());
            if i + 1 < l {
                cur = self.mul(&cur, &x);
            }
        }
        Matrix::from_cols(self.ring, l, &cols)
    }

    /// Reduction mod `p` into the residue field.
    pub fn residue(&self, a: &[u64]) -> Fe {
        let p = self.ring.p();
        let c: Vec<i64> = a.iter().map(|&v| (v % p) as i64).collect();
        self.field.from_coeffs(&c)
    }

    pub fn teichmuller(&self, a: &Fe) -> GrElem {
        let naive: GrElem = self
            .field
            .coeffs(a)
            .iter()
            .map(|&c| c as u64)
            .collect();
        let e = self.field.order();
        let mut t = naive;
        for _ in 1..self.n {
            t = self.pow(&t, e);
        }
        t
    }

    /// `sum_j p^j T(w_j^{p^{-j}})`.
    pub fn from_witt(&self, w: &WittVector) -> GrElem {
        let l = self.degree;
        let mut out = self.zero();
        for (j, c) in w.components().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let root = self.field.frobenius_pow(c, (l - j % l) % l);
            let t = self.teichmuller(&root);
            out = self.add(&out, &self.scale(self.ring.p_pow(j as u32), &t));
        }
        out
    }

    pub fn to_witt(&self, wr: &WittRing, a: &[u64]) -> WittVector {
        debug_assert_eq!(wr.field(), &self.field);
        let p = self.ring.p();
        let mut rest = a.to_vec();
        let mut comps = Vec::with_capacity(self.n as usize);
        for j in 0..self.n as usize {
            let r = self.residue(&rest);
            comps.push(self.field.frobenius_pow(&r, j % self.degree));
            let diff = self.sub(&rest, &self.teichmuller(&r));
            debug_assert!(diff.iter().all(|&v| v % p == 0));
            rest = diff.into_iter().map(|v| v / p).collect();
        }
        wr.from_components(comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn modulus_reduces_to_field_modulus() {
        for (p, l, n) in [(2u64, 3usize, 3u32), (3, 2, 2), (5, 2, 3), (7, 3, 2)] {
            let f = build_field(p, l).unwrap();
            let g = GaloisRing::new(&f, n);
            let h = g.modulus();
            let fm = f.modulus();
            for (a, b) in h.iter().zip(&fm) {
                assert_eq!(a % p, *b as u64);
            }
            // X is a Teichmuller element: X^{p^L} = X
            let mut x = g.zero();
            x[1] = 1;
            assert_eq!(g.pow(&x, f.order()), x);
        }
    }

    #[test]
    fn witt_conversion_is_a_ring_isomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, l, n) in [(2u64, 1usize, 3u32), (2, 3, 3), (3, 2, 2), (3, 2, 3), (5, 2, 2), (7, 1, 3)] {
            let f = build_field(p, l).unwrap();
            let w = WittRing::new(&f, n as usize).unwrap();
            let g = GaloisRing::new(&f, n);
            for _ in 0..40 {
                let (a, b) = (w.random(&mut rng), w.random(&mut rng));
                let (ga, gb) = (g.from_witt(&a), g.from_witt(&b));
                assert_eq!(g.to_witt(&w, &ga), a);
                assert_eq!(g.from_witt(&w.add(&a, &b)), g.add(&ga, &gb));
                assert_eq!(g.from_witt(&w.mul(&a, &b)), g.mul(&ga, &gb));
                assert_eq!(g.from_witt(&w.frobenius(&a)), g.sigma(&ga));
                let sm = g.sigma_matrix(1);
                assert_eq!(sm.mul_vec(&ga), g.sigma(&ga));
                assert_eq!(g.mul_matrix(&ga).mul_vec(&gb), g.mul(&ga, &gb));
            }
        }
    }

    #[test]
    fn teichmuller_basis_is_the_x_basis() {
        let f = build_field(3, 3).unwrap();
        let w = WittRing::new(&f, 3).unwrap();
        let g = GaloisRing::new(&f, 3);
        for i in 0..3 {
            let mut xi = vec![0i64; 3];
            xi[i] = 1;
            let mut e = g.zero();
            e[i] = 1;
            assert_eq!(g.from_witt(&w.teichmuller(&f.from_coeffs(&xi))), e);
        }
    }
}
