//! Exact scalar arithmetic over the rationals, prime fields and small
//! extension fields, behind one `Field` trait.
//!
//! The field is a context object: elements are plain data and every
//! operation takes the field by reference, in the style of ring-context
//! computer algebra libraries. All arithmetic is exact; there is no
//! floating point anywhere in this module except the height helper.

use std::fmt;
use std::hash::Hash;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported prime for `PrimeField`.
pub const MAX_PRIME_BITS: u32 = 61;

/// Maximum extension degree for `ExtField`.
pub const MAX_EXT_DEG: usize = 4;

/// Largest base prime for extension fields (keeps q = p^k in u64 and the
/// brute-force irreducibility scan cheap).
pub const MAX_EXT_BASE: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds 2^61")]
    PrimeTooLarge(u64),
    #[error("extension degree {0} out of range 1..=4")]
    BadExtensionDegree(u8),
    #[error("extension base prime {0} exceeds 2^16")]
    ExtBaseTooLarge(u64),
    #[error("modulus polynomial is not monic irreducible of the stated degree")]
    BadModulus,
    #[error("cannot parse field spec `{0}`")]
    BadSpec(String),
    #[error("cannot parse element `{0}`")]
    BadElement(String),
}

/// An exact field. Elements are inert data; all arithmetic goes through
/// the context object.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    fn from_i64(&self, n: i64) -> Self::Elem;

    /// Field characteristic; 0 for the rationals.
    fn characteristic(&self) -> u64;

    /// Number of elements, `None` for infinite fields.
    fn order(&self) -> Option<u64>;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Exact square root if one exists in the field.
    fn sqrt(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Uniform element for finite fields; integer in [-bound, bound] for
    /// the rationals.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> Self::Elem;

    /// Scale a nonzero coordinate vector to its canonical projective
    /// representative, in place.
    ///
    /// Finite fields: first nonzero entry becomes 1. Rationals: entries
    /// become coprime integers with the first nonzero one positive.
    fn canonicalize_point(&self, coords: &mut [Self::Elem]);

    /// Logarithmic height of a canonical coordinate vector; only the
    /// rationals define one.
    fn projective_height(&self, _coords: &[Self::Elem]) -> Option<f64> {
        None
    }

    /// Pivot-size heuristic for exact elimination; smaller is better.
    fn elem_weight(&self, _a: &Self::Elem) -> u64 {
        0
    }

    fn format_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, FieldError>;
}

/// Finite fields add indexable enumeration of their elements.
pub trait FiniteField: Field {
    /// q = p^k.
    fn order_u64(&self) -> u64;
    /// Element with the given index in 0..q. Index 0 is zero, 1 is one.
    fn elem_from_index(&self, idx: u64) -> Self::Elem;
    fn elem_index(&self, a: &Self::Elem) -> u64;
}

// ---------------------------------------------------------------------------
// Rationals

/// The field of rational numbers, exact arbitrary precision.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn order(&self) -> Option<u64> {
        None
    }

    fn sqrt(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_negative() {
            return None;
        }
        let ns = a.numer().sqrt();
        let ds = a.denom().sqrt();
        if &(&ns * &ns) == a.numer() && &(&ds * &ds) == a.denom() {
            Some(BigRational::new(ns, ds))
        } else {
            None
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> BigRational {
        let b = bound.max(1);
        self.from_i64(rng.random_range(-b..=b))
    }

    fn canonicalize_point(&self, coords: &mut [BigRational]) {
        // Clear denominators, divide by the gcd of the numerators, then
        // fix the sign of the first nonzero entry.
        let mut den_lcm = BigInt::one();
        for c in coords.iter() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in coords.iter() {
            let n = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&n);
        }
        if num_gcd.is_zero() {
            return;
        }
        let mut sign_fixed = false;
        let mut flip = false;
        for c in coords.iter_mut() {
            let n = c.numer() * (&den_lcm / c.denom()) / &num_gcd;
            if !sign_fixed && !n.is_zero() {
                sign_fixed = true;
                flip = n.sign() == Sign::Minus;
            }
            *c = BigRational::from_integer(if flip { -n } else { n });
        }
    }

    fn projective_height(&self, coords: &[BigRational]) -> Option<f64> {
        let mut max = BigInt::zero();
        for c in coords {
            debug_assert!(c.denom().is_one(), "height wants canonical integer coords");
            let n = c.numer().abs();
            if n > max {
                max = n;
            }
        }
        Some(bigint_ln(&max))
    }

    fn elem_weight(&self, a: &BigRational) -> u64 {
        (a.numer().bits() + a.denom().bits()) as u64
    }

    fn format_elem(&self, a: &BigRational) -> String {
        format!("{}/{}", a.numer(), a.denom())
    }

    fn parse_elem(&self, s: &str) -> Result<BigRational, FieldError> {
        let bad = || FieldError::BadElement(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(BigRational::new(n, d))
            }
            None => {
                let n: BigInt = s.trim().parse().map_err(|_| bad())?;
                Ok(BigRational::from_integer(n))
            }
        }
    }
}

/// Natural log of a nonnegative big integer (0 maps to 0).
pub fn bigint_ln(x: &BigInt) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits();
    if bits <= 1023 {
        return x.to_f64().expect("fits in f64 range").ln();
    }
    // Top 64 bits carry all the precision an f64 log can use.
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Prime fields

/// F_p for a prime p < 2^61. Elements are canonical residues in 0..p.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PrimeField {
    p: u64,
    // floor(2^64 / p) when p < 2^32, else 0; used for Barrett reduction.
    barrett: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= 1 << MAX_PRIME_BITS {
            return Err(FieldError::PrimeTooLarge(p));
        }
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        let barrett = if p < 1 << 32 {
            (u128::MAX / p as u128) as u64 // floor(2^128-1 / p) truncated: see mul
        } else {
            0
        };
        // For p < 2^32 we want floor(2^64/p); recompute precisely.
        let barrett = if p < 1 << 32 {
            ((1u128 << 64) / p as u128) as u64
        } else {
            barrett
        };
        Ok(PrimeField { p, barrett })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Product of residues, exact.
    #[inline]
    pub fn mul_u64(&self, a: u64, b: u64) -> u64 {
        if self.p < 1 << 32 {
            let t = a * b;
            let q = ((t as u128 * self.barrett as u128) >> 64) as u64;
            let mut r = t.wrapping_sub(q.wrapping_mul(self.p));
            while r >= self.p {
                r -= self.p;
            }
            r
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    #[inline]
    pub fn add_u64(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_u64(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn reduce_u64(&self, a: u64) -> u64 {
        if a < self.p {
            a
        } else {
            a % self.p
        }
    }

    pub fn reduce_i64(&self, n: i64) -> u64 {
        let m = n.rem_euclid(self.p as i64);
        m as u64
    }

    /// Reduce a big integer to its canonical residue.
    pub fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        m.to_u64().expect("residue fits u64")
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.add_u64(*a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.sub_u64(*a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul_u64(*a, *b)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }

    fn sqrt(&self, a: &u64) -> Option<u64> {
        finite_sqrt(self, a)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, _bound: i64) -> u64 {
        rng.random_range(0..self.p)
    }

    fn canonicalize_point(&self, coords: &mut [u64]) {
        let Some(first) = coords.iter().find(|c| **c != 0).copied() else {
            return;
        };
        let inv = self.inv(&first).unwrap();
        for c in coords.iter_mut() {
            *c = self.mul_u64(*c, inv);
        }
    }

    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }

    fn parse_elem(&self, s: &str) -> Result<u64, FieldError> {
        let t = s.trim();
        if let Ok(n) = t.parse::<i64>() {
            return Ok(self.reduce_i64(n));
        }
        t.parse::<BigInt>()
            .map(|n| self.reduce_bigint(&n))
            .map_err(|_| FieldError::BadElement(s.to_string()))
    }
}

impl FiniteField for PrimeField {
    fn order_u64(&self) -> u64 {
        self.p
    }
    fn elem_from_index(&self, idx: u64) -> u64 {
        debug_assert!(idx < self.p);
        idx
    }
    fn elem_index(&self, a: &u64) -> u64 {
        *a
    }
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Square root in any finite field of odd characteristic (Tonelli-Shanks
/// with a deterministic non-residue scan); char 2 uses the Frobenius.
fn finite_sqrt<F: FiniteField>(field: &F, a: &F::Elem) -> Option<F::Elem> {
    let q = field.order_u64();
    if field.is_zero(a) {
        return Some(field.zero());
    }
    if field.characteristic() == 2 {
        // Squaring is bijective in char 2: sqrt(a) = a^(q/2).
        return Some(field.pow(a, q / 2));
    }
    // Euler criterion.
    if field.pow(a, (q - 1) / 2) != field.one() {
        return None;
    }
    let mut s = 0u32;
    let mut t = q - 1;
    while t % 2 == 0 {
        t /= 2;
        s += 1;
    }
    if s == 1 {
        return Some(field.pow(a, (q + 1) / 4));
    }
    // Deterministic search for a non-residue.
    let mut z = field.zero();
    for idx in 2..q {
        let cand = field.elem_from_index(idx);
        if field.is_zero(&cand) {
            continue;
        }
        if field.pow(&cand, (q - 1) / 2) != field.one() {
            z = cand;
            break;
        }
    }
    let mut m = s;
    let mut c = field.pow(&z, t);
    let mut u = field.pow(a, t);
    let mut r = field.pow(a, (t + 1) / 2);
    while u != field.one() {
        let mut i = 0u32;
        let mut probe = u.clone();
        while probe != field.one() {
            probe = field.mul(&probe, &probe);
            i += 1;
            if i == m {
                return None;
            }
        }
        let mut b = c.clone();
        for _ in 0..m - i - 1 {
            b = field.mul(&b, &b);
        }
        m = i;
        c = field.mul(&b, &b);
        u = field.mul(&u, &c);
        r = field.mul(&r, &b);
    }
    Some(r)
}

// ---------------------------------------------------------------------------
// Extension fields

/// Element of F_{p^k}: coefficients of 1, w, ..., w^{k-1}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct ExtElem {
    pub c: [u64; MAX_EXT_DEG],
}

/// F_{p^k} with k <= 4, arithmetic mod a monic irreducible modulus.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ExtField {
    base: PrimeField,
    k: u8,
    // Low coefficients m_0..m_{k-1} of the monic modulus x^k + sum m_i x^i.
    modulus: [u64; MAX_EXT_DEG],
}

impl ExtField {
    /// Build F_{p^k} with an explicit modulus (low coefficients, length k).
    pub fn with_modulus(p: u64, k: u8, modulus: &[u64]) -> Result<Self, FieldError> {
        if !(1..=MAX_EXT_DEG as u8).contains(&k) {
            return Err(FieldError::BadExtensionDegree(k));
        }
        if p >= MAX_EXT_BASE {
            return Err(FieldError::ExtBaseTooLarge(p));
        }
        let base = PrimeField::new(p)?;
        if modulus.len() != k as usize {
            return Err(FieldError::BadModulus);
        }
        let mut m = [0u64; MAX_EXT_DEG];
        for (i, &c) in modulus.iter().enumerate() {
            m[i] = base.reduce_u64(c);
        }
        let field = ExtField { base, k, modulus: m };
        if !field.modulus_irreducible() {
            return Err(FieldError::BadModulus);
        }
        Ok(field)
    }

    /// Build F_{p^k} with the canonical modulus: the first monic
    /// irreducible polynomial in the index order of its low coefficients.
    pub fn new(p: u64, k: u8) -> Result<Self, FieldError> {
        if !(1..=MAX_EXT_DEG as u8).contains(&k) {
            return Err(FieldError::BadExtensionDegree(k));
        }
        if p >= MAX_EXT_BASE {
            return Err(FieldError::ExtBaseTooLarge(p));
        }
        let base = PrimeField::new(p)?;
        let count = p.pow(k as u32);
        for idx in 0..count {
            let mut m = [0u64; MAX_EXT_DEG];
            let mut rest = idx;
            for slot in m.iter_mut().take(k as usize) {
                *slot = rest % p;
                rest /= p;
            }
            let cand = ExtField { base, k, modulus: m };
            if cand.modulus_irreducible() {
                return Ok(cand);
            }
        }
        Err(FieldError::BadModulus)
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }
    pub fn degree(&self) -> u8 {
        self.k
    }
    pub fn modulus_low_coeffs(&self) -> &[u64] {
        &self.modulus[..self.k as usize]
    }

    /// Brute-force irreducibility for degree <= 4: no roots, and for
    /// degree 4 additionally no monic quadratic factor.
    fn modulus_irreducible(&self) -> bool {
        let p = self.base.p();
        let k = self.k as usize;
        if k == 1 {
            return true; // x + m0 is always irreducible
        }
        let eval = |x: u64| {
            // x^k + sum m_i x^i
            let mut acc = 1u64;
            for i in (0..k).rev() {
                acc = self.base.add_u64(self.base.mul_u64(acc, x), self.modulus[i]);
            }
            acc
        };
        for x in 0..p {
            if eval(x) == 0 {
                return false;
            }
        }
        if k < 4 {
            return true;
        }
        // Degree 4 without roots can still split as two irreducible
        // quadratics; scan them.
        for b in 0..p {
            for c in 0..p {
                // Divide x^4 + m3 x^3 + m2 x^2 + m1 x + m0 by x^2 + b x + c.
                let m = &self.modulus;
                let q1 = self.base.sub_u64(m[3], b);
                let q0 = self.base.sub_u64(m[2], self.base.add_u64(self.base.mul_u64(b, q1), c));
                let r1 = self.base.sub_u64(
                    m[1],
                    self.base.add_u64(self.base.mul_u64(b, q0), self.base.mul_u64(c, q1)),
                );
                let r0 = self.base.sub_u64(m[0], self.base.mul_u64(c, q0));
                if r0 == 0 && r1 == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn reduce_product(&self, prod: &mut [u64; 2 * MAX_EXT_DEG - 1]) -> ExtElem {
        let k = self.k as usize;
        for i in (k..2 * k - 1).rev() {
            let t = prod[i];
            if t == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                let sub = self.base.mul_u64(t, self.modulus[j]);
                prod[i - k + j] = self.base.sub_u64(prod[i - k + j], sub);
            }
        }
        let mut out = ExtElem::default();
        out.c[..k].copy_from_slice(&prod[..k]);
        out
    }
}

impl Field for ExtField {
    type Elem = ExtElem;

    fn zero(&self) -> ExtElem {
        ExtElem::default()
    }
    fn one(&self) -> ExtElem {
        let mut e = ExtElem::default();
        e.c[0] = 1 % self.base.p();
        e
    }
    fn is_zero(&self, a: &ExtElem) -> bool {
        a.c.iter().all(|&x| x == 0)
    }
    fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let mut out = ExtElem::default();
        for i in 0..self.k as usize {
            out.c[i] = self.base.add_u64(a.c[i], b.c[i]);
        }
        out
    }
    fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let mut out = ExtElem::default();
        for i in 0..self.k as usize {
            out.c[i] = self.base.sub_u64(a.c[i], b.c[i]);
        }
        out
    }
    fn neg(&self, a: &ExtElem) -> ExtElem {
        let mut out = ExtElem::default();
        for i in 0..self.k as usize {
            out.c[i] = if a.c[i] == 0 { 0 } else { self.base.p() - a.c[i] };
        }
        out
    }
    fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let k = self.k as usize;
        let mut prod = [0u64; 2 * MAX_EXT_DEG - 1];
        for i in 0..k {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] =
                    self.base.add_u64(prod[i + j], self.base.mul_u64(a.c[i], b.c[j]));
            }
        }
        self.reduce_product(&mut prod)
    }
    fn inv(&self, a: &ExtElem) -> Option<ExtElem> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.order_u64() - 2))
        }
    }
    fn from_i64(&self, n: i64) -> ExtElem {
        let mut e = ExtElem::default();
        e.c[0] = self.base.reduce_i64(n);
        e
    }
    fn characteristic(&self) -> u64 {
        self.base.p()
    }
    fn order(&self) -> Option<u64> {
        Some(self.order_u64())
    }

    fn sqrt(&self, a: &ExtElem) -> Option<ExtElem> {
        finite_sqrt(self, a)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, _bound: i64) -> ExtElem {
        self.elem_from_index(rng.random_range(0..self.order_u64()))
    }

    fn canonicalize_point(&self, coords: &mut [ExtElem]) {
        let Some(first) = coords.iter().find(|c| !self.is_zero(c)).cloned() else {
            return;
        };
        let inv = self.inv(&first).unwrap();
        for c in coords.iter_mut() {
            *c = self.mul(c, &inv);
        }
    }

    fn format_elem(&self, a: &ExtElem) -> String {
        self.elem_index(a).to_string()
    }

    fn parse_elem(&self, s: &str) -> Result<ExtElem, FieldError> {
        let idx: u64 = s
            .trim()
            .parse()
            .map_err(|_| FieldError::BadElement(s.to_string()))?;
        if idx >= self.order_u64() {
            return Err(FieldError::BadElement(s.to_string()));
        }
        Ok(self.elem_from_index(idx))
    }
}

impl FiniteField for ExtField {
    fn order_u64(&self) -> u64 {
        self.base.p().pow(self.k as u32)
    }
    fn elem_from_index(&self, idx: u64) -> ExtElem {
        let p = self.base.p();
        let mut e = ExtElem::default();
        let mut rest = idx;
        for i in 0..self.k as usize {
            e.c[i] = rest % p;
            rest /= p;
        }
        e
    }
    fn elem_index(&self, a: &ExtElem) -> u64 {
        let p = self.base.p();
        let mut idx = 0u64;
        for i in (0..self.k as usize).rev() {
            idx = idx * p + a.c[i];
        }
        idx
    }
}

// ---------------------------------------------------------------------------
// Field specification (CLI / config facing)

/// Serializable description of a field, validated on `build`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldSpec {
    Rationals,
    Prime { p: u64 },
    Extension { p: u64, k: u8, modulus: Vec<u64> },
}

/// A built field of any supported kind.
#[derive(Clone, Debug)]
pub enum AnyField {
    Rationals(Rationals),
    Prime(PrimeField),
    Extension(ExtField),
}

impl FieldSpec {
    /// Parse "Q", a prime power like "7" / "25", or an explicit "p^k".
    pub fn parse(s: &str) -> Result<FieldSpec, FieldError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") {
            return Ok(FieldSpec::Rationals);
        }
        let bad = || FieldError::BadSpec(s.to_string());
        if let Some((p, k)) = t.split_once('^') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let k: u8 = k.trim().parse().map_err(|_| bad())?;
            return Self::from_prime_power(p, k);
        }
        let q: u64 = t.parse().map_err(|_| bad())?;
        let (p, k) = factor_prime_power(q).ok_or_else(|| FieldError::BadSpec(s.to_string()))?;
        Self::from_prime_power(p, k)
    }

    pub fn from_prime_power(p: u64, k: u8) -> Result<FieldSpec, FieldError> {
        if k == 1 {
            PrimeField::new(p)?;
            Ok(FieldSpec::Prime { p })
        } else {
            let f = ExtField::new(p, k)?;
            Ok(FieldSpec::Extension {
                p,
                k,
                modulus: f.modulus_low_coeffs().to_vec(),
            })
        }
    }

    pub fn build(&self) -> Result<AnyField, FieldError> {
        match self {
            FieldSpec::Rationals => Ok(AnyField::Rationals(Rationals)),
            FieldSpec::Prime { p } => Ok(AnyField::Prime(PrimeField::new(*p)?)),
            FieldSpec::Extension { p, k, modulus } => {
                Ok(AnyField::Extension(ExtField::with_modulus(*p, *k, modulus)?))
            }
        }
    }

    pub fn order(&self) -> Option<u64> {
        match self {
            FieldSpec::Rationals => None,
            FieldSpec::Prime { p } => Some(*p),
            FieldSpec::Extension { p, k, .. } => Some(p.pow(*k as u32)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FieldSpec::Rationals => "Q".to_string(),
            FieldSpec::Prime { p } => format!("{p}"),
            FieldSpec::Extension { p, k, .. } => format!("{p}^{k}"),
        }
    }
}

/// Decompose q into (p, k) with p prime, or None.
pub fn factor_prime_power(q: u64) -> Option<(u64, u8)> {
    if q < 2 {
        return None;
    }
    if is_prime_u64(q) {
        return Some((q, 1));
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut k = 0u8;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            return if rest == 1 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn axioms<F: Field>(field: &F, rng: &mut ChaCha8Rng, rounds: usize) {
        for _ in 0..rounds {
            let a = field.sample(rng, 50);
            let b = field.sample(rng, 50);
            let c = field.sample(rng, 50);
            // associativity and commutativity
            assert_eq!(
                field.add(&field.add(&a, &b), &c),
                field.add(&a, &field.add(&b, &c))
            );
            assert_eq!(
                field.mul(&field.mul(&a, &b), &c),
                field.mul(&a, &field.mul(&b, &c))
            );
            assert_eq!(field.mul(&a, &b), field.mul(&b, &a));
            // distributivity
            assert_eq!(
                field.mul(&a, &field.add(&b, &c)),
                field.add(&field.mul(&a, &b), &field.mul(&a, &c))
            );
            // inverses
            assert_eq!(field.add(&a, &field.neg(&a)), field.zero());
            if !field.is_zero(&a) {
                let ai = field.inv(&a).unwrap();
                assert_eq!(field.mul(&a, &ai), field.one());
            }
        }
    }

    #[test]
    fn field_axioms_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        axioms(&Rationals, &mut rng, 200);
        axioms(&PrimeField::new(7).unwrap(), &mut rng, 200);
        axioms(&PrimeField::new(101).unwrap(), &mut rng, 200);
        axioms(&PrimeField::new(32003).unwrap(), &mut rng, 200);
        // largest Mersenne prime below 2^61 exercises the wide-mul path
        axioms(&PrimeField::new((1 << 61) - 1).unwrap(), &mut rng, 200);
        axioms(&ExtField::new(5, 2).unwrap(), &mut rng, 200);
        axioms(&ExtField::new(7, 2).unwrap(), &mut rng, 200);
        axioms(&ExtField::new(3, 4).unwrap(), &mut rng, 200);
    }

    #[test]
    fn rationals_stay_reduced() {
        let f = Rationals;
        let a = f.parse_elem("6/4").unwrap();
        assert_eq!(f.format_elem(&a), "3/2");
        let b = f.parse_elem("-10/-4").unwrap();
        assert_eq!(f.format_elem(&b), "5/2");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = f.sample(&mut rng, 30);
            let y = f.sample(&mut rng, 30);
            let s = f.add(&x, &y);
            assert!(s.numer().gcd(s.denom()).is_one());
            assert!(s.denom().sign() != Sign::Minus);
        }
    }

    #[test]
    fn prime_validation() {
        assert_eq!(PrimeField::new(6).unwrap_err(), FieldError::NotPrime(6));
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(1 << 61).is_err());
        assert!(is_prime_u64(2305843009213693951)); // 2^61 - 1
        assert!(!is_prime_u64(2305843009213693953));
    }

    #[test]
    fn canonical_moduli() {
        // F_4: x^2 + x + 1 is the first irreducible quadratic over F_2.
        let f4 = ExtField::new(2, 2).unwrap();
        assert_eq!(f4.modulus_low_coeffs(), &[1, 1]);
        // F_25: x^2 + 2 (squares mod 5 are {0,1,4}, so -2 = 3 is not one).
        let f25 = ExtField::new(5, 2).unwrap();
        assert_eq!(f25.modulus_low_coeffs(), &[2, 0]);
        assert!(ExtField::with_modulus(5, 2, &[1, 0]).is_err()); // x^2+1 has root 2
        assert!(ExtField::with_modulus(5, 2, &[2, 0]).is_ok());
    }

    #[test]
    fn ext_field_roundtrip_and_frobenius() {
        let f = ExtField::new(7, 2).unwrap();
        for idx in 0..f.order_u64() {
            let e = f.elem_from_index(idx);
            assert_eq!(f.elem_index(&e), idx);
        }
        // x^q = x for all field elements
        for idx in 0..f.order_u64() {
            let e = f.elem_from_index(idx);
            assert_eq!(f.pow(&e, f.order_u64()), e);
        }
    }

    #[test]
    fn sqrt_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fp = PrimeField::new(101).unwrap();
        let mut squares = 0;
        for _ in 0..200 {
            let a = fp.sample(&mut rng, 0);
            if let Some(r) = fp.sqrt(&a) {
                assert_eq!(fp.mul(&r, &r), a);
                squares += 1;
            }
        }
        assert!(squares > 50);
        let fe = ExtField::new(5, 2).unwrap();
        for idx in 0..fe.order_u64() {
            let a = fe.elem_from_index(idx);
            if let Some(r) = fe.sqrt(&a) {
                assert_eq!(fe.mul(&r, &r), a);
            }
        }
        let q = Rationals;
        assert_eq!(
            q.sqrt(&q.parse_elem("9/4").unwrap()),
            Some(q.parse_elem("3/2").unwrap())
        );
        assert_eq!(q.sqrt(&q.parse_elem("2").unwrap()), None);
        assert_eq!(q.sqrt(&q.parse_elem("-1").unwrap()), None);
    }

    #[test]
    fn canonical_point_rationals() {
        let f = Rationals;
        let mut v = vec![
            f.parse_elem("-2/3").unwrap(),
            f.parse_elem("4/5").unwrap(),
            f.parse_elem("0").unwrap(),
        ];
        f.canonicalize_point(&mut v);
        assert_eq!(f.format_elem(&v[0]), "10/1");
        assert_eq!(f.format_elem(&v[1]), "-12/1");
        assert_eq!(f.format_elem(&v[2]), "0/1");
        // idempotent
        let snapshot = v.clone();
        f.canonicalize_point(&mut v);
        assert_eq!(v, snapshot);
    }

    #[test]
    fn field_spec_parsing() {
        assert_eq!(FieldSpec::parse("Q").unwrap(), FieldSpec::Rationals);
        assert_eq!(FieldSpec::parse("7").unwrap(), FieldSpec::Prime { p: 7 });
        let s25 = FieldSpec::parse("25").unwrap();
        assert_eq!(s25.order(), Some(25));
        assert_eq!(s25, FieldSpec::parse("5^2").unwrap());
        assert!(FieldSpec::parse("6").is_err());
        assert!(FieldSpec::parse("x").is_err());
    }

    #[test]
    fn bigint_ln_matches_f64() {
        let x = BigInt::from(12345u64);
        assert!((bigint_ln(&x) - 12345f64.ln()).abs() < 1e-12);
        let big = BigInt::from(7u32).pow(5000);
        let expect = 5000.0 * 7f64.ln();
        assert!((bigint_ln(&big) - expect).abs() < 1e-6 * expect);
    }
}
