//! 2×2 and 4×4 matrices over GF(p^k).
//!
//! `kron(M, N)` uses the left-factor-outer convention: entry (2i + k, 2j + l)
//! is M[i][j]·N[k][l], i.e. M's entries scale copies of N.

use std::fmt;
use std::ops::{Mul, Sub};

use serde::Serialize;

use crate::ff::{FieldRef, Fq2Elem, FqElem};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    /// Row-major [a, b, c, d] for [[a, b], [c, d]].
    pub e: [FqElem; 4],
}

impl Mat2 {
    pub fn new(a: FqElem, b: FqElem, c: FqElem, d: FqElem) -> Mat2 {
        assert!(a.same_field(&b) && a.same_field(&c) && a.same_field(&d), "entries from different fields");
        Mat2 { e: [a, b, c, d] }
    }
    pub fn from_ints(f: FieldRef, v: [i64; 4]) -> Mat2 {
        Mat2 { e: v.map(|x| f.int(x)) }
    }
    pub fn field(&self) -> FieldRef {
        self.e[0].field()
    }
    pub fn identity(f: FieldRef) -> Mat2 {
        Mat2::scalar(f.one())
    }
    pub fn scalar(s: FqElem) -> Mat2 {
        let z = s.field().zero();
        Mat2 { e: [s, z, z, s] }
    }
    /// Δ_{a,b} = diag(a, b).
    pub fn diag(a: FqElem, b: FqElem) -> Mat2 {
        let z = a.field().zero();
        Mat2::new(a, z, z, b)
    }
    /// U = [[1, 1], [0, 1]].
    pub fn unipotent(f: FieldRef) -> Mat2 {
        Mat2::from_ints(f, [1, 1, 0, 1])
    }
    pub fn det(&self) -> FqElem {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }
    pub fn trace(&self) -> FqElem {
        self.e[0] + self.e[3]
    }
    pub fn is_scalar(&self) -> bool {
        self.e[1].is_zero() && self.e[2].is_zero() && self.e[0] == self.e[3]
    }
    pub fn is_identity(&self) -> bool {
        self.is_scalar() && self.e[0].is_one()
    }
    pub fn scale(&self, s: FqElem) -> Mat2 {
        Mat2 { e: self.e.map(|x| x * s) }
    }
    pub fn inverse(&self) -> Option<Mat2> {
        let di = self.det().inv()?;
        let [a, b, c, d] = self.e;
        Some(Mat2 { e: [d * di, -b * di, -c * di, a * di] })
    }
    pub fn pow(&self, mut e: u64) -> Mat2 {
        let mut acc = Mat2::identity(self.field());
        let mut b = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        acc
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.e;
        let [w, x, y, z] = o.e;
        Mat2 { e: [a * w + b * y, a * x + b * z, c * w + d * y, c * x + d * z] }
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.e[0], self.e[1], self.e[2], self.e[3])
    }
}

impl Serialize for Mat2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = [[self.e[0].to_string(), self.e[1].to_string()], [self.e[2].to_string(), self.e[3].to_string()]];
        rows.serialize(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat4 {
    pub e: [FqElem; 16],
}

impl Mat4 {
    pub fn identity(f: FieldRef) -> Mat4 {
        let mut e = [f.zero(); 16];
        for i in 0..4 {
            e[5 * i] = f.one();
        }
        Mat4 { e }
    }
    pub fn zero(f: FieldRef) -> Mat4 {
        Mat4 { e: [f.zero(); 16] }
    }
    pub fn field(&self) -> FieldRef {
        self.e[0].field()
    }
    pub fn at(&self, i: usize, j: usize) -> FqElem {
        self.e[4 * i + j]
    }
    pub fn trace(&self) -> FqElem {
        (1..4).fold(self.e[0], |acc, i| acc + self.e[5 * i])
    }
    pub fn det(&self) -> FqElem {
        det_laplace(&self.e, 4, &[0, 1, 2, 3], &[0, 1, 2, 3])
    }
    pub fn minus_scalar(&self, s: FqElem) -> Mat4 {
        let mut e = self.e;
        for i in 0..4 {
            e[5 * i] = e[5 * i] - s;
        }
        Mat4 { e }
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let f = self.field();
        let mut e = [f.zero(); 16];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = f.zero();
                for k in 0..4 {
                    acc = acc + self.e[4 * i + k] * o.e[4 * k + j];
                }
                e[4 * i + j] = acc;
            }
        }
        Mat4 { e }
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        let mut e = self.e;
        for (x, y) in e.iter_mut().zip(o.e.iter()) {
            *x = *x - *y;
        }
        Mat4 { e }
    }
}

impl fmt::Debug for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..4)
            .map(|i| format!("[{}]", (0..4).map(|j| self.at(i, j).to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

pub fn kron(m: &Mat2, n: &Mat2) -> Mat4 {
    assert!(m.e[0].same_field(&n.e[0]), "kron of matrices over different fields");
    let f = m.field();
    let mut e = [f.zero(); 16];
    for i in 0..2 {
        for j in 0..2 {
            let s = m.e[2 * i + j];
            for k in 0..2 {
                for l in 0..2 {
                    e[4 * (2 * i + k) + (2 * j + l)] = s * n.e[2 * k + l];
                }
            }
        }
    }
    Mat4 { e }
}

/// Row reduction without divisions: eliminating with `pivot·row - factor·pivot_row`
/// keeps the row space, so no field inversions are needed.
pub fn rank(a: &Mat4) -> usize {
    let mut m = a.e;
    let mut r = 0;
    for col in 0..4 {
        let Some(piv) = (r..4).find(|&i| !m[4 * i + col].is_zero()) else {
            continue;
        };
        if piv != r {
            for j in 0..4 {
                m.swap(4 * piv + j, 4 * r + j);
            }
        }
        let pv = m[4 * r + col];
        for i in (r + 1)..4 {
            let fac = m[4 * i + col];
            if fac.is_zero() {
                continue;
            }
            for j in col..4 {
                m[4 * i + j] = pv * m[4 * i + j] - fac * m[4 * r + j];
            }
        }
        r += 1;
        if r == 4 {
            break;
        }
    }
    r
}

pub fn kernel_dim(a: &Mat4) -> usize {
    4 - rank(a)
}

fn det_laplace(e: &[FqElem; 16], n: usize, rows: &[usize], cols: &[usize]) -> FqElem {
    if n == 1 {
        return e[4 * rows[0] + cols[0]];
    }
    let f = e[0].field();
    let mut acc = f.zero();
    let sub_rows = &rows[1..];
    for (j, &c) in cols.iter().enumerate() {
        let x = e[4 * rows[0] + c];
        if x.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let minor = det_laplace(e, n - 1, sub_rows, &sub_cols);
        acc = if j % 2 == 0 { acc + x * minor } else { acc - x * minor };
    }
    acc
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    (0u32..16)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..4).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Rank as the size of the largest non-vanishing minor. Shares no code with
/// `rank` and serves to re-verify witnesses.
pub fn rank_by_minors(a: &Mat4) -> usize {
    for k in (1..=4).rev() {
        let sets = subsets(k);
        for rs in &sets {
            for cs in &sets {
                if !det_laplace(&a.e, k, rs, cs).is_zero() {
                    return k;
                }
            }
        }
    }
    0
}

#[derive(Clone, Debug)]
pub struct EigenData {
    /// Distinct eigenvalues with algebraic multiplicity.
    pub eigenvalues: Vec<(Fq2Elem, u32)>,
    pub semisimple: bool,
    /// True when every eigenvalue lies in the matrix's own field.
    pub in_base: bool,
}

impl EigenData {
    /// Each eigenvalue listed with multiplicity.
    pub fn values(&self) -> Vec<Fq2Elem> {
        self.eigenvalues.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize)).collect()
    }
}

fn fq2_key(x: &Fq2Elem) -> (FqElem, FqElem) {
    (x.re, x.im)
}

/// Roots of x^2 - tr·x + det, in the base field when the discriminant is a
/// square there and in the canonical quadratic extension otherwise.
pub fn eigen2(m: &Mat2) -> EigenData {
    let f = m.field();
    let t = m.trace();
    let disc = t * t - f.int(4) * m.det();
    let half = f.int(2).inv().expect("odd characteristic");
    if disc.is_zero() {
        let lam = Fq2Elem::base(t * half);
        return EigenData { eigenvalues: vec![(lam, 2)], semisimple: m.is_scalar(), in_base: true };
    }
    let s = Fq2Elem::sqrt_of(disc);
    let h = Fq2Elem::base(half);
    let tt = Fq2Elem::base(t);
    let mut ev = vec![((tt + s) * h, 1), ((tt - s) * h, 1)];
    ev.sort_by_key(|(x, _)| fq2_key(x));
    EigenData { eigenvalues: ev, semisimple: true, in_base: s.is_base() }
}
