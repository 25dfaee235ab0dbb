//! Exact numbers (1/d)·Σ a_i ζ_n^i in the power basis of Q(ζ_n).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ff::{self, FfError, FieldRef, FqElem};

pub const MAX_CONDUCTOR: u32 = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("conductor {0} outside 1..=1000")]
    ConductorOutOfRange(u32),
    #[error("p = {p} divides the denominator {d}")]
    BadReduction { p: u64, d: i64 },
    #[error("GF({p}^{k}) lacks the {n}-th roots of unity")]
    FieldTooSmall { p: u64, k: usize, n: u32 },
    #[error(transparent)]
    Field(#[from] FfError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn poly_cache() -> &'static Mutex<HashMap<u32, Vec<i64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<i64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Φ_n, constant term first, by exact division of x^n - 1 by Φ_d for d | n, d < n.
pub fn cyclotomic_poly(n: u32) -> Result<Vec<i64>, CycloError> {
    if !(1..=MAX_CONDUCTOR).contains(&n) {
        return Err(CycloError::ConductorOutOfRange(n));
    }
    if let Some(p) = poly_cache().lock().unwrap().get(&n) {
        return Ok(p.clone());
    }
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d)?;
            num = exact_div(&num, &phi_d);
        }
    }
    poly_cache().lock().unwrap().insert(n, num.clone());
    Ok(num)
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    assert_eq!(den[dn], 1, "divisor must be monic");
    let mut r = num.to_vec();
    let mut quo = vec![0i64; num.len() - dn];
    for i in (0..quo.len()).rev() {
        let t = r[i + dn];
        quo[i] = t;
        for j in 0..=dn {
            r[i + j] -= t * den[j];
        }
    }
    assert!(r.iter().all(|&x| x == 0), "division was not exact");
    quo
}

pub fn euler_phi(n: u32) -> usize {
    let mut m = n;
    let mut res = n;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            while m % q == 0 {
                m /= q;
            }
            res -= res / q;
        }
        q += 1;
    }
    if m > 1 {
        res -= res / m;
    }
    res as usize
}

fn gcd_i(a: i64, b: i64) -> i64 {
    ff::gcd(a.unsigned_abs(), b.unsigned_abs()) as i64
}

/// Reduce an integer polynomial in ζ_n modulo Φ_n.
fn reduce_poly(mut a: Vec<i64>, n: u32) -> Vec<i64> {
    let phi = cyclotomic_poly(n).expect("conductor checked by caller");
    let dp = phi.len() - 1;
    for i in (dp..a.len()).rev() {
        let t = a[i];
        if t == 0 {
            continue;
        }
        for j in 0..=dp {
            a[i - dp + j] = a[i - dp + j]
                .checked_sub(t.checked_mul(phi[j]).expect("cyclotomic coefficient overflow"))
                .expect("cyclotomic coefficient overflow");
        }
    }
    a.resize(dp, 0);
    a
}

#[derive(Clone)]
pub struct CycNum {
    n: u32,
    d: i64,
    coeffs: Vec<i64>,
}

impl CycNum {
    /// `coeffs` may have any length; exponents are reduced modulo Φ_n.
    pub fn new(n: u32, coeffs: Vec<i64>, d: i64) -> Result<CycNum, CycloError> {
        if !(1..=MAX_CONDUCTOR).contains(&n) {
            return Err(CycloError::ConductorOutOfRange(n));
        }
        assert!(d != 0, "zero denominator");
        let mut c = CycNum { n, d, coeffs: reduce_poly(coeffs, n) };
        c.normalize();
        Ok(c)
    }
    fn normalize(&mut self) {
        if self.d < 0 {
            self.d = -self.d;
            self.coeffs.iter_mut().for_each(|x| *x = -*x);
        }
        let g = self.coeffs.iter().fold(self.d, |g, &x| gcd_i(g, x));
        if g > 1 {
            self.d /= g;
            self.coeffs.iter_mut().for_each(|x| *x /= g);
        }
        if self.coeffs.iter().all(|&x| x == 0) {
            self.d = 1;
        }
    }
    pub fn int(a: i64) -> CycNum {
        CycNum { n: 1, d: 1, coeffs: vec![a] }
    }
    /// ζ_n^k.
    pub fn root_of_unity(n: u32, k: u32) -> Result<CycNum, CycloError> {
        let mut c = vec![0; (k % n) as usize + 1];
        c[(k % n) as usize] = 1;
        CycNum::new(n, c, 1)
    }
    pub fn conductor(&self) -> u32 {
        self.n
    }
    pub fn denominator(&self) -> i64 {
        self.d
    }
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0)
    }
    /// Same value at conductor m, a multiple of the current one.
    pub fn lift(&self, m: u32) -> Result<CycNum, CycloError> {
        assert!(m % self.n == 0, "{} does not divide {}", self.n, m);
        let step = (m / self.n) as usize;
        let mut a = vec![0i64; (self.coeffs.len().max(1) - 1) * step + 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            a[i * step] = x;
        }
        CycNum::new(m, a, self.d)
    }
    fn common(&self, o: &CycNum) -> (CycNum, CycNum) {
        let m = ff::lcm(self.n as u64, o.n as u64) as u32;
        (self.lift(m).expect("lcm conductor in range"), o.lift(m).expect("lcm conductor in range"))
    }
    pub fn pow(&self, mut e: u32) -> CycNum {
        let mut acc = CycNum::int(1);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        acc
    }
    pub fn is_one(&self) -> bool {
        *self == CycNum::int(1)
    }
    /// Exact order when this is a root of unity. Roots of unity in Q(ζ_n)
    /// have order dividing lcm(2, n).
    pub fn is_root_of_unity(&self) -> Option<u32> {
        if self.d != 1 || self.is_zero() {
            return None;
        }
        let l = ff::lcm(2, self.n as u64) as u32;
        (1..=l).filter(|m| l % m == 0).find(|&m| self.pow(m).is_one())
    }
    /// Image under ζ_n ↦ nth_root_of_unity(f, n).
    pub fn reduce_mod_p(&self, f: FieldRef) -> Result<FqElem, CycloError> {
        let p = f.p;
        if self.d.unsigned_abs() % p == 0 {
            return Err(CycloError::BadReduction { p, d: self.d });
        }
        let z = ff::nth_root_of_unity(f, self.n as u64)
            .map_err(|_| CycloError::FieldTooSmall { p, k: f.k, n: self.n })?;
        let mut acc = f.zero();
        let mut zi = f.one();
        for &c in &self.coeffs {
            acc = acc + f.int(c) * zi;
            zi = zi * z;
        }
        Ok(acc / f.int(self.d))
    }

    pub fn parse(s: &str) -> Result<CycNum, ParseError> {
        Parser { s: s.as_bytes(), pos: 0 }.parse()
    }
}

pub fn reduce_mod_p(c: &CycNum, f: FieldRef) -> Result<FqElem, CycloError> {
    c.reduce_mod_p(f)
}

pub fn is_root_of_unity(c: &CycNum) -> Option<u32> {
    c.is_root_of_unity()
}

impl PartialEq for CycNum {
    fn eq(&self, o: &CycNum) -> bool {
        let (a, b) = self.common(o);
        a.d == b.d && a.coeffs == b.coeffs
    }
}
impl Eq for CycNum {}

impl<'a> Add<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn add(self, o: &CycNum) -> CycNum {
        let (a, b) = self.common(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * b.d + y * a.d).collect();
        CycNum::new(a.n, coeffs, a.d * b.d).expect("conductor in range")
    }
}

impl<'a> Sub<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn sub(self, o: &CycNum) -> CycNum {
        self + &(-o)
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum { n: self.n, d: self.d, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }
}

impl<'a> Mul<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn mul(self, o: &CycNum) -> CycNum {
        let (a, b) = self.common(o);
        let mut prod = vec![0i64; (a.coeffs.len() + b.coeffs.len()).max(1)];
        for (i, x) in a.coeffs.iter().enumerate() {
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] += x.checked_mul(*y).expect("cyclotomic coefficient overflow");
            }
        }
        CycNum::new(a.n, prod, a.d * b.d).expect("conductor in range")
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            let mono = match (i, mag) {
                (0, _) => format!("{mag}"),
                (1, 1) => "z".to_string(),
                (1, _) => format!("{mag}*z"),
                (_, 1) => format!("z^{i}"),
                _ => format!("{mag}*z^{i}"),
            };
            if body.is_empty() {
                body = if c < 0 { format!("-{mono}") } else { mono };
            } else {
                body.push_str(if c < 0 { " - " } else { " + " });
                body.push_str(&mono);
            }
        }
        if body.is_empty() {
            body.push('0');
        }
        if self.n == 1 && self.d == 1 {
            return write!(f, "{body}");
        }
        write!(f, "({body})")?;
        if self.d != 1 {
            write!(f, "/{}", self.d)?;
        }
        if self.n != 1 {
            write!(f, " @ {}", self.n)?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<CycNum, D::Error> {
        let s = String::deserialize(d)?;
        CycNum::parse(&s).map_err(|e| serde::de::Error::custom(format!("cyclotomic number {s:?} {e}")))
    }
}

// Grammar: [ '(' sum ')' | sum ] [ '/' int ] [ '@' int ]
//          sum  := [sign] term { sign term }
//          term := int [ '*' zpow ] | zpow ;  zpow := 'z' [ '^' int ]
struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }
    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return self.err("expected an integer");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse().or_else(|_| {
            self.pos = start;
            self.err("integer too large")
        })
    }
    fn term(&mut self, terms: &mut Vec<(i64, u32)>, sign: i64) -> Result<(), ParseError> {
        let coef = match self.peek() {
            Some(b'z') => 1,
            Some(c) if c.is_ascii_digit() => {
                let v = self.int()?;
                if !self.eat(b'*') {
                    terms.push((sign * v, 0));
                    return Ok(());
                }
                v
            }
            _ => return self.err("expected a term"),
        };
        if !self.eat(b'z') {
            return self.err("expected 'z'");
        }
        let mut e = 1;
        if self.eat(b'^') {
            let at = self.pos;
            let v = self.int()?;
            e = u32::try_from(v).or_else(|_| {
                self.pos = at;
                self.err("exponent too large")
            })?;
        }
        terms.push((sign * coef, e));
        Ok(())
    }
    fn sum(&mut self) -> Result<Vec<(i64, u32)>, ParseError> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(b'-') {
            -1
        } else {
            self.eat(b'+');
            1
        };
        loop {
            self.term(&mut terms, sign)?;
            sign = if self.eat(b'+') {
                1
            } else if self.eat(b'-') {
                -1
            } else {
                return Ok(terms);
            };
        }
    }
    fn parse(mut self) -> Result<CycNum, ParseError> {
        let terms = if self.eat(b'(') {
            let t = self.sum()?;
            if !self.eat(b')') {
                return self.err("expected ')'");
            }
            t
        } else {
            self.sum()?
        };
        let mut d = 1;
        if self.eat(b'/') {
            self.skip_ws();
            let at = self.pos;
            d = self.int()?;
            if d == 0 {
                self.pos = at;
                return self.err("zero denominator");
            }
        }
        let mut n = 1u32;
        let mut n_pos = self.pos;
        if self.eat(b'@') {
            self.skip_ws();
            n_pos = self.pos;
            let v = self.int()?;
            if !(1..=MAX_CONDUCTOR as i64).contains(&v) {
                self.pos = n_pos;
                return self.err("conductor must lie in 1..=1000");
            }
            n = v as u32;
        }
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        if n == 1 && terms.iter().any(|&(_, e)| e > 0) {
            self.pos = n_pos;
            return self.err("'z' needs a conductor given as '@ n'");
        }
        let max_e = terms.iter().map(|&(_, e)| e).max().unwrap_or(0) as usize;
        let mut coeffs = vec![0i64; max_e + 1];
        for (c, e) in terms {
            coeffs[e as usize] += c;
        }
        Ok(CycNum::new(n, coeffs, d).expect("conductor validated"))
    }
}
