//! Zech-logarithm representation of a finite field, for exhaustive scans.
//!
//! Nonzero elements are stored as discrete logarithms to a fixed primitive
//! element; zero is the sentinel `q - 1`. Multiplication adds logarithms and
//! addition goes through the Zech table `log(1 + g^k)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::field::{Fe, FiniteField};

pub struct TableField {
    field: FiniteField,
    p: u32,
    unit_order: u32,
    /// index -> log (zero maps to the sentinel)
    log: Vec<u32>,
    /// log -> index
    exp: Vec<u32>,
    /// k -> log(1 + g^k)
    zech: Vec<u32>,
    half: u32,
}

static TABLE_CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<TableField>>>> = OnceLock::new();

impl TableField {
    pub fn new(field: &FiniteField) -> Self {
        let q = field.order();
        assert!(q <= crate::field::ENUMERATION_CAP);
        let q32 = q as u32;
        let unit_order = q32 - 1;
        let p = field.characteristic() as u32;
        let g = field.primitive_element();
        let x_is_gen = field.degree() > 1 && g == field.gen();
        let mut exp = Vec::with_capacity(unit_order as usize);
        let mut log = vec![unit_order; q as usize];
        let mut cur = field.one();
        let modulus = field.modulus();
        let r = field.degree();
        // fold[t][i] = -t * modulus[i] mod p
        let fold: Vec<Vec<u32>> = (0..p)
            .map(|t| (0..r).map(|i| (p - (t * modulus[i]) % p) % p).collect())
            .collect();
        let place: Vec<u32> = (0..r).map(|i| p.pow(i as u32)).collect();
        for _ in 0..unit_order {
            let idx: u32 = (0..r).map(|i| cur.0[i] * place[i]).sum();
            exp.push(idx);
            cur = if x_is_gen {
                // shift by x and fold the top coefficient back with the modulus
                let mut next = Fe::default();
                let f = &fold[cur.0[r - 1] as usize];
                next.0[0] = f[0];
                for i in 1..r {
                    let v = cur.0[i - 1] + f[i];
                    next.0[i] = if v >= p { v - p } else { v };
                }
                next
            } else {
                field.mul(&cur, &g)
            };
        }
        debug_assert_eq!(cur, field.one());
        // a separate pass; scattered stores inside the walk stall it
        for (k, &idx) in exp.iter().enumerate() {
            log[idx as usize] = k as u32;
        }
        let zech = exp
            .iter()
            .map(|&idx| {
                let c0 = idx % p;
                let bumped = idx - c0 + (c0 + 1) % p;
                log[bumped as usize]
            })
            .collect();
        let half = if p == 2 { 0 } else { unit_order / 2 };
        Self {
            field: field.clone(),
            p,
            unit_order,
            log,
            exp,
            zech,
            half,
        }
    }

    /// Shared table for `field`; built once per process.
    pub fn cached(field: &FiniteField) -> Arc<TableField> {
        let key = (field.characteristic(), field.degree());
        let cache = TABLE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("table cache poisoned").get(&key) {
            return t.clone();
        }
        let table = Arc::new(TableField::new(field));
        cache
            .lock()
            .expect("table cache poisoned")
            .entry(key)
            .or_insert(table)
            .clone()
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.unit_order as u64 + 1
    }

    #[inline]
    pub fn zero(&self) -> u32 {
        self.unit_order
    }

    #[inline]
    pub fn one(&self) -> u32 {
        0
    }

    #[inline]
    pub fn is_zero(&self, a: u32) -> bool {
        a == self.unit_order
    }

    #[inline]
    pub fn from_index(&self, idx: u64) -> u32 {
        self.log[idx as usize]
    }

    pub fn index(&self, a: u32) -> u64 {
        if self.is_zero(a) {
            0
        } else {
            self.exp[a as usize] as u64
        }
    }

    pub fn from_fe(&self, x: &Fe) -> u32 {
        self.from_index(self.field.index(x))
    }

    pub fn to_fe(&self, a: u32) -> Fe {
        self.field.from_index(self.index(a))
    }

    pub fn from_int(&self, c: i64) -> u32 {
        self.from_fe(&self.field.from_int(c))
    }

    #[inline]
    fn add_logs(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.unit_order {
            s - self.unit_order
        } else {
            s
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.is_zero(a) || self.is_zero(b) {
            self.zero()
        } else {
            self.add_logs(a, b)
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.is_zero(a) {
            return b;
        }
        if self.is_zero(b) {
            return a;
        }
        let d = if b >= a { b - a } else { b + self.unit_order - a };
        let z = self.zech[d as usize];
        if self.is_zero(z) {
            self.zero()
        } else {
            self.add_logs(a, z)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.is_zero(a) || self.p == 2 {
            a
        } else {
            self.add_logs(a, self.half)
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if self.is_zero(a) {
            None
        } else if a == 0 {
            Some(0)
        } else {
            Some(self.unit_order - a)
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if self.is_zero(a) {
            return if e == 0 { self.one() } else { self.zero() };
        }
        ((a as u64 * (e % self.unit_order as u64)) % self.unit_order as u64) as u32
    }

    /// `a^(p^e)`.
    pub fn frobenius_pow(&self, a: u32, e: usize) -> u32 {
        if self.is_zero(a) {
            return a;
        }
        let n = self.unit_order as u64;
        let mut k = a as u64;
        for _ in 0..e {
            k = (k * self.p as u64) % n;
        }
        k as u32
    }

    pub fn is_square(&self, a: u32) -> bool {
        self.is_zero(a) || self.p == 2 || a.is_multiple_of(2)
    }

    /// One square root; the other is its negative.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if self.is_zero(a) {
            return Some(a);
        }
        if self.p == 2 {
            // squaring is a bijection; a = g^k with k = 2j mod (q-1)
            let n = self.unit_order as u64;
            let half_inv = n.div_ceil(2);
            return Some(((a as u64 * half_inv) % n) as u32);
        }
        a.is_multiple_of(2).then_some(a / 2)
    }
}
