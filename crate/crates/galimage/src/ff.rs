//! Prime fields and their extensions GF(p^k).
//!
//! Fields are interned: `make_field` returns a `&'static Field`, so elements
//! are small `Copy` values and field identity is pointer identity.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_prime::nt_funcs::{factorize64, is_prime64};
use thiserror::Error;

pub const MAX_DEGREE: usize = 16;
/// Coefficient products are accumulated in `u64` without intermediate reduction.
pub const MAX_PRIME: u64 = 1 << 28;
/// Below this field size `sqrt_exhaustive` is cheap enough to use as an oracle.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("prime {0} exceeds the supported bound 2^28")]
    PrimeTooLarge(u64),
    #[error("extension degree {0} outside 1..=16")]
    DegreeOutOfRange(usize),
    #[error("GF({p}^{k}) has at least 2^64 elements")]
    FieldTooLarge { p: u64, k: usize },
    #[error("{n} does not divide {p}^{k} - 1")]
    NoRootOfUnity { p: u64, k: usize, n: u64 },
    #[error("operands live in different fields")]
    FieldMismatch,
}

type Coeffs = [u32; MAX_DEGREE];

pub struct Field {
    pub p: u64,
    pub k: usize,
    /// Monic modulus, constant term first, length k + 1.
    pub modulus: Vec<u64>,
    q: u64,
    neg_mod: Vec<u64>,
    group_primes: Vec<u64>,
    generator: OnceLock<Coeffs>,
    nonsquare: OnceLock<Coeffs>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

pub type FieldRef = &'static Field;

fn registry() -> &'static Mutex<HashMap<(u64, usize), FieldRef>> {
    static REG: OnceLock<Mutex<HashMap<(u64, usize), FieldRef>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn is_odd_prime(p: u64) -> bool {
    p > 2 && is_prime64(p)
}

/// GF(p^k) with the least monic irreducible modulus of degree k.
pub fn make_field(p: u64, k: usize) -> Result<FieldRef, FfError> {
    if !is_odd_prime(p) {
        return Err(FfError::NotOddPrime(p));
    }
    if p >= MAX_PRIME {
        return Err(FfError::PrimeTooLarge(p));
    }
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(FfError::DegreeOutOfRange(k));
    }
    let q = p
        .checked_pow(k as u32)
        .filter(|q| *q < u64::MAX)
        .ok_or(FfError::FieldTooLarge { p, k })?;
    if let Some(f) = registry().lock().unwrap().get(&(p, k)) {
        return Ok(*f);
    }
    let field = build_field(p, k, q);
    let leaked: FieldRef = Box::leak(Box::new(field));
    let mut reg = registry().lock().unwrap();
    Ok(*reg.entry((p, k)).or_insert(leaked))
}

fn build_field(p: u64, k: usize, q: u64) -> Field {
    let modulus = least_irreducible(p, k);
    let neg_mod = modulus[..k].iter().map(|c| (p - c) % p).collect();
    let group_primes: Vec<u64> = factorize64(q - 1).keys().copied().collect();
    Field {
        p,
        k,
        modulus,
        q,
        neg_mod,
        group_primes,
        generator: OnceLock::new(),
        nonsquare: OnceLock::new(),
    }
}

impl Field {
    pub fn order(&self) -> u64 {
        self.q
    }
    pub fn zero(&'static self) -> FqElem {
        FqElem { f: self, c: [0; MAX_DEGREE] }
    }
    pub fn one(&'static self) -> FqElem {
        self.int(1)
    }
    pub fn int(&'static self, a: i64) -> FqElem {
        let mut c = [0; MAX_DEGREE];
        c[0] = a.rem_euclid(self.p as i64) as u32;
        FqElem { f: self, c }
    }
    /// The class of x in F_p[x]/(modulus); equals an integer when k = 1.
    pub fn x(&'static self) -> FqElem {
        if self.k == 1 {
            return self.int((self.p - self.modulus[0]) as i64);
        }
        let mut c = [0; MAX_DEGREE];
        c[1] = 1;
        FqElem { f: self, c }
    }
    /// Least primitive root in index order.
    pub fn primitive_root(&'static self) -> FqElem {
        let c = *self.generator.get_or_init(|| {
            (1..self.q)
                .map(|i| FqElem::from_index(self, i))
                .find(|x| self.group_primes.iter().all(|r| !x.pow((self.q - 1) / r).is_one()))
                .expect("multiplicative group is cyclic")
                .c
        });
        FqElem { f: self, c }
    }
    /// Least non-square; y^2 = this defines the canonical quadratic extension.
    pub fn nonsquare(&'static self) -> FqElem {
        let c = *self.nonsquare.get_or_init(|| {
            (1..self.q)
                .map(|i| FqElem::from_index(self, i))
                .find(|x| !x.pow((self.q - 1) / 2).is_one())
                .expect("odd characteristic has non-squares")
                .c
        });
        FqElem { f: self, c }
    }
    pub fn elements(&'static self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(move |i| FqElem::from_index(self, i))
    }
    /// The prime subfield F_p as elements of this field.
    pub fn prime_elements(&'static self) -> impl Iterator<Item = FqElem> {
        (0..self.p).map(move |i| self.int(i as i64))
    }
}

#[derive(Clone, Copy)]
pub struct FqElem {
    f: FieldRef,
    c: Coeffs,
}

impl FqElem {
    pub fn field(&self) -> FieldRef {
        self.f
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.c[..self.f.k]
    }
    pub fn from_coeffs(f: FieldRef, coeffs: &[i64]) -> FqElem {
        assert!(coeffs.len() <= f.k, "too many coefficients for {:?}", f);
        let mut c = [0; MAX_DEGREE];
        for (i, a) in coeffs.iter().enumerate() {
            c[i] = a.rem_euclid(f.p as i64) as u32;
        }
        FqElem { f, c }
    }
    /// Base-p digits of `idx`, constant coefficient first.
    pub fn from_index(f: FieldRef, mut idx: u64) -> FqElem {
        let mut c = [0; MAX_DEGREE];
        for ci in c.iter_mut().take(f.k) {
            *ci = (idx % f.p) as u32;
            idx /= f.p;
        }
        FqElem { f, c }
    }
    pub fn index(&self) -> u64 {
        self.coeffs().iter().rev().fold(0, |acc, &d| acc * self.f.p + d as u64)
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&d| d == 0)
    }
    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&d| d == 0)
    }
    pub fn same_field(&self, other: &FqElem) -> bool {
        std::ptr::eq(self.f, other.f)
    }
    fn check(&self, other: &FqElem) {
        assert!(self.same_field(other), "{}: {:?} vs {:?}", FfError::FieldMismatch, self.f, other.f);
    }
    pub fn try_mul(&self, other: &FqElem) -> Result<FqElem, FfError> {
        if !self.same_field(other) {
            return Err(FfError::FieldMismatch);
        }
        Ok(*self * *other)
    }
    pub fn try_add(&self, other: &FqElem) -> Result<FqElem, FfError> {
        if !self.same_field(other) {
            return Err(FfError::FieldMismatch);
        }
        Ok(*self + *other)
    }

    pub fn pow(&self, mut e: u64) -> FqElem {
        let mut base = *self;
        let mut acc = self.f.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    pub fn frobenius(&self) -> FqElem {
        self.pow(self.f.p)
    }
    pub fn inv(&self) -> Option<FqElem> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(self.f.q - 2))
        }
    }
    /// Multiplicative order, or None for zero.
    pub fn order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut n = self.f.q - 1;
        for &r in &self.f.group_primes {
            while n % r == 0 && self.pow(n / r).is_one() {
                n /= r;
            }
        }
        Some(n)
    }
    pub fn is_square(&self) -> bool {
        self.is_zero() || self.pow((self.f.q - 1) / 2).is_one()
    }
    /// The square root with the lexicographically smaller coefficient list.
    pub fn sqrt(&self) -> Option<FqElem> {
        if self.is_zero() {
            return Some(*self);
        }
        if !self.is_square() {
            return None;
        }
        let r = tonelli_shanks(*self);
        debug_assert!(r * r == *self);
        Some(std::cmp::min(r, -r))
    }
    /// Exhaustive square-root search, same tie-break as `sqrt`.
    pub fn sqrt_exhaustive(&self) -> Option<FqElem> {
        self.f.elements().filter(|y| *y * *y == *self).min()
    }
    pub fn in_prime_subfield(&self) -> bool {
        self.frobenius() == *self
    }
    /// The integer in 0..p when the element lies in F_p.
    pub fn as_prime(&self) -> Option<u64> {
        if self.c[1..].iter().all(|&d| d == 0) {
            Some(self.c[0] as u64)
        } else {
            None
        }
    }
}

fn tonelli_shanks(a: FqElem) -> FqElem {
    let f = a.f;
    let mut s = 0;
    let mut t = f.q - 1;
    while t % 2 == 0 {
        t /= 2;
        s += 1;
    }
    let mut m = s;
    let mut c = f.nonsquare().pow(t);
    let mut x = a.pow(t.div_ceil(2));
    let mut b = a.pow(t);
    while !b.is_one() {
        let mut i = 0;
        let mut b2 = b;
        while !b2.is_one() {
            b2 = b2 * b2;
            i += 1;
        }
        let mut g = c;
        for _ in 0..(m - i - 1) {
            g = g * g;
        }
        x = x * g;
        c = g * g;
        b = b * c;
        m = i;
    }
    x
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.c == other.c
    }
}
impl Eq for FqElem {}

impl Hash for FqElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.c[..self.f.k].hash(state);
    }
}

impl PartialOrd for FqElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FqElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.cmp(&other.c)
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.f.k == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let terms: Vec<String> = (0..self.f.k)
            .filter(|&i| self.c[i] != 0)
            .map(|i| match i {
                0 => format!("{}", self.c[0]),
                1 => format!("{}*x", self.c[1]),
                _ => format!("{}*x^{}", self.c[i], i),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

impl Add for FqElem {
    type Output = FqElem;
    fn add(self, o: FqElem) -> FqElem {
        self.check(&o);
        let p = self.f.p as u32;
        let mut c = self.c;
        for i in 0..self.f.k {
            let s = c[i] + o.c[i];
            c[i] = if s >= p { s - p } else { s };
        }
        FqElem { f: self.f, c }
    }
}

impl Sub for FqElem {
    type Output = FqElem;
    fn sub(self, o: FqElem) -> FqElem {
        self + (-o)
    }
}

impl Neg for FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        let p = self.f.p as u32;
        let mut c = self.c;
        for ci in c.iter_mut().take(self.f.k) {
            if *ci != 0 {
                *ci = p - *ci;
            }
        }
        FqElem { f: self.f, c }
    }
}

impl Mul for FqElem {
    type Output = FqElem;
    fn mul(self, o: FqElem) -> FqElem {
        self.check(&o);
        let f = self.f;
        let p = f.p;
        let k = f.k;
        if k == 1 {
            let mut c = [0; MAX_DEGREE];
            c[0] = ((self.c[0] as u64 * o.c[0] as u64) % p) as u32;
            return FqElem { f, c };
        }
        let mut r = [0u64; 2 * MAX_DEGREE];
        for i in 0..k {
            let a = self.c[i] as u64;
            if a == 0 {
                continue;
            }
            for j in 0..k {
                r[i + j] += a * o.c[j] as u64;
            }
        }
        for i in (k..2 * k - 1).rev() {
            let t = r[i] % p;
            if t == 0 {
                continue;
            }
            for j in 0..k {
                r[i - k + j] += t * f.neg_mod[j];
            }
        }
        let mut c = [0; MAX_DEGREE];
        for i in 0..k {
            c[i] = (r[i] % p) as u32;
        }
        FqElem { f, c }
    }
}

impl Div for FqElem {
    type Output = FqElem;
    fn div(self, o: FqElem) -> FqElem {
        self * o.inv().expect("division by zero in finite field")
    }
}

/// Euler's criterion for an odd prime p.
pub fn legendre(a: i64, p: u64) -> Result<i8, FfError> {
    if !is_odd_prime(p) {
        return Err(FfError::NotOddPrime(p));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    Ok(if modpow(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

pub fn modpow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = (b % m) as u128;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

/// An element of exact order n, namely g^((q-1)/n) for the least primitive root g.
pub fn nth_root_of_unity(f: FieldRef, n: u64) -> Result<FqElem, FfError> {
    if n == 0 || (f.q - 1) % n != 0 {
        return Err(FfError::NoRootOfUnity { p: f.p, k: f.k, n });
    }
    Ok(f.primitive_root().pow((f.q - 1) / n))
}

pub fn sqrt(x: &FqElem) -> Option<FqElem> {
    x.sqrt()
}

pub fn in_prime_subfield(x: &FqElem) -> bool {
    x.in_prime_subfield()
}

/// Multiplicative order of p modulo n (n coprime to p), i.e. the degree of
/// the smallest extension of F_p holding the n-th roots of unity.
pub fn mult_order_mod(p: u64, n: u64) -> Option<usize> {
    if n == 1 || n == 2 {
        return Some(1);
    }
    if gcd(p, n) != 1 {
        return None;
    }
    let mut x = p % n;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * p as u128) % n as u128) as u64;
        k += 1;
    }
    Some(k)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

// Dense polynomials over F_p, constant term first, used only for the
// irreducibility search.

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    poly_rem(r, m, p)
}

fn poly_rem(mut r: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    let lead_inv = modpow(m[dm], p - 2, p);
    while r.len() > dm && !r.is_empty() {
        let top = r.len() - 1;
        let t = r[top] * lead_inv % p;
        if t != 0 {
            for j in 0..=dm {
                let idx = top - dm + j;
                r[idx] = (r[idx] + (p - m[j]) * t) % p;
            }
        }
        r.pop();
        r = poly_trim(r);
    }
    poly_trim(r)
}

fn poly_gcd(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut a, mut b) = (poly_trim(a), poly_trim(b));
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base.to_vec(), m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

/// gcd(x^(p^i) - x, m) = 1 for 1 <= i <= deg(m)/2.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let m = poly_trim(m.to_vec());
    let k = m.len() - 1;
    if k <= 1 {
        return k == 1;
    }
    let x = vec![0, 1];
    let mut xp = x.clone();
    for _ in 1..=k / 2 {
        xp = poly_powmod(&xp, p, &m, p);
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(m.clone(), diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    for idx in 0.. {
        let mut m = vec![0u64; k + 1];
        let mut j: u64 = idx;
        for c in m.iter_mut().take(k) {
            *c = j % p;
            j /= p;
        }
        m[k] = 1;
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!()
}

/// Element of the canonical quadratic extension E[y]/(y^2 - eta), with eta
/// the least non-square of E.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fq2Elem {
    pub re: FqElem,
    pub im: FqElem,
}

impl Fq2Elem {
    pub fn base(x: FqElem) -> Fq2Elem {
        Fq2Elem { re: x, im: x.field().zero() }
    }
    pub fn y(f: FieldRef) -> Fq2Elem {
        Fq2Elem { re: f.zero(), im: f.one() }
    }
    pub fn field(&self) -> FieldRef {
        self.re.field()
    }
    pub fn is_base(&self) -> bool {
        self.im.is_zero()
    }
    pub fn to_base(&self) -> Option<FqElem> {
        self.is_base().then_some(self.re)
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    pub fn inv(&self) -> Option<Fq2Elem> {
        let eta = self.field().nonsquare();
        let norm = self.re * self.re - eta * self.im * self.im;
        let ni = norm.inv()?;
        Some(Fq2Elem { re: self.re * ni, im: -self.im * ni })
    }
    /// Membership in F_p, the prime field under E.
    pub fn in_prime_subfield(&self) -> bool {
        self.is_base() && self.re.in_prime_subfield()
    }
    /// Square root of a base element, possibly outside E.
    pub fn sqrt_of(x: FqElem) -> Fq2Elem {
        match x.sqrt() {
            Some(r) => Fq2Elem::base(r),
            None => {
                let f = x.field();
                let s = (x / f.nonsquare()).sqrt().expect("x/eta is a square");
                Fq2Elem { re: f.zero(), im: s }
            }
        }
    }
}

impl fmt::Debug for Fq2Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_base() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({})+({})*y", self.re, self.im)
        }
    }
}

impl Add for Fq2Elem {
    type Output = Fq2Elem;
    fn add(self, o: Fq2Elem) -> Fq2Elem {
        Fq2Elem { re: self.re + o.re, im: self.im + o.im }
    }
}
impl Sub for Fq2Elem {
    type Output = Fq2Elem;
    fn sub(self, o: Fq2Elem) -> Fq2Elem {
        Fq2Elem { re: self.re - o.re, im: self.im - o.im }
    }
}
impl Neg for Fq2Elem {
    type Output = Fq2Elem;
    fn neg(self) -> Fq2Elem {
        Fq2Elem { re: -self.re, im: -self.im }
    }
}
impl Mul for Fq2Elem {
    type Output = Fq2Elem;
    fn mul(self, o: Fq2Elem) -> Fq2Elem {
        let eta = self.field().nonsquare();
        Fq2Elem {
            re: self.re * o.re + eta * self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}
impl Div for Fq2Elem {
    type Output = Fq2Elem;
    fn div(self, o: Fq2Elem) -> Fq2Elem {
        self * o.inv().expect("division by zero in quadratic extension")
    }
}


impl serde::Serialize for FqElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl serde::Serialize for Fq2Elem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{self:?}"))
    }
}
