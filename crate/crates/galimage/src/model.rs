//! Pair specifications and the mod-p image model built from them.
//!
//! A spec describes f through the abelian group Gal(H/Q), its nebentypus
//! ε_f on that group and the square-class datum ν(σ) = α²/ε_f(σ); g is given
//! by explicit generator matrices over cyclotomic integers, each tagged with
//! its image in Gal(H/Q). The model at p has one block per σ: the f-side coset
//! Δ_{α, α⁻¹ε_f(σ)}·SL2(F_p) (never materialized) and the g-side coset of
//! ρ_g(G_H) lying over σ.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_prime::nt_funcs::factorize64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cyclo::{CycNum, CycloError};
use crate::ff::{self, make_field, mult_order_mod, FfError, FieldRef, FqElem};
use crate::grp::{closure, GrpError, MatrixGroup, DEFAULT_CAP};
use crate::mat::Mat2;

pub const SPEC_VERSION: u32 = 1;
const MAX_EXT_DEGREE: usize = 16;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("spec parse error: {0}")]
    Parse(String),
    #[error("spec is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("bad prime {p}: {}", .reasons.join(", "))]
    BadPrime { p: u64, reasons: Vec<String> },
    #[error("spec has no g generators")]
    NoGPart,
    #[error("needs GF(p^{0}), beyond the degree cap")]
    DegreeCap(usize),
    #[error("reduction mod {p} shrinks the g-group from {expected} to {got} elements")]
    ReductionCollapse { p: u64, expected: usize, got: usize },
    #[error(transparent)]
    Cyclo(#[from] CycloError),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error(transparent)]
    Group(#[from] GrpError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub invariant: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

fn violation(invariant: &str, detail: impl Into<String>) -> Violation {
    Violation { invariant: invariant.into(), detail: detail.into() }
}

/// Nonzero rational in lowest terms, den > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Option<Rational> {
        if den == 0 {
            return None;
        }
        let g = ff::gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = den.signum();
        Some(Rational { num: s * num / g, den: s * den / g })
    }
    pub fn int(a: i64) -> Rational {
        Rational { num: a, den: 1 }
    }
    /// Signed squarefree integer in the same class of Q^×/Q^×².
    pub fn square_class(&self) -> i64 {
        assert!(self.num != 0, "zero has no square class");
        let n = self.num.unsigned_abs() * self.den.unsigned_abs();
        let sf: u64 = factorize64(n).into_iter().filter(|(_, e)| e % 2 == 1).map(|(q, _)| q).product();
        self.num.signum() * sf as i64
    }
    pub fn is_square(&self) -> bool {
        self.square_class() == 1
    }
    pub fn reduce(&self, f: FieldRef) -> Option<FqElem> {
        let d = f.int(self.den);
        if d.is_zero() {
            return None;
        }
        Some(f.int(self.num) / d)
    }
    pub fn parse(s: &str) -> Option<Rational> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) => Rational::new(a.trim().parse().ok()?, b.trim().parse().ok()?),
            None => Some(Rational::int(s.parse().ok()?)),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.den == 1 {
            s.serialize_i64(self.num)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(a) => Ok(Rational::int(a)),
            Raw::Text(s) => Rational::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))),
        }
    }
}

/// Finite abelian group Z/n_1 × ... × Z/n_r. Elements are exponent vectors,
/// indexed in mixed radix with the first coordinate varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GalGroup {
    pub orders: Vec<u32>,
}

impl GalGroup {
    pub fn size(&self) -> usize {
        self.orders.iter().map(|&n| n as usize).product()
    }
    pub fn element(&self, mut i: usize) -> Vec<u32> {
        self.orders
            .iter()
            .map(|&n| {
                let e = (i % n as usize) as u32;
                i /= n as usize;
                e
            })
            .collect()
    }
    pub fn index(&self, e: &[u32]) -> Option<usize> {
        if e.len() != self.orders.len() || e.iter().zip(&self.orders).any(|(x, n)| x >= n) {
            return None;
        }
        let mut i = 0;
        for (x, n) in e.iter().zip(&self.orders).rev() {
            i = i * *n as usize + *x as usize;
        }
        Some(i)
    }
    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.element(a), self.element(b));
        let s: Vec<u32> = x.iter().zip(&y).zip(&self.orders).map(|((u, v), n)| (u + v) % n).collect();
        self.index(&s).unwrap()
    }
    pub fn label(&self, i: usize) -> String {
        let e = self.element(i);
        format!("({})", e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSubfield {
    /// ±1-character of Gal(H/Q) as bits on the generators (1 ↦ −1).
    pub character: Vec<u8>,
    pub disc: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalSpec {
    pub orders: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generator_names: Vec<String>,
    pub c: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadratic_subfields: Vec<QuadSubfield>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalValue<T> {
    pub sigma: Vec<u32>,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub matrix: [CycNum; 4],
    /// Image of this generator in Gal(H/Q); the kernel of the induced map is ρ_g(G_H).
    pub sigma: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub n_f: u64,
    #[serde(default = "one_u64")]
    pub n_g: u64,
}

fn one_u64() -> u64 {
    1
}
fn one_u32() -> u32 {
    1
}
fn base_q() -> String {
    "Q".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub spec_version: u32,
    pub label_f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_g: Option<String>,
    pub weight_f: u32,
    #[serde(default = "one_u32")]
    pub weight_g: u32,
    #[serde(default = "base_q")]
    pub base_field: String,
    pub gal_hq: GalSpec,
    pub eps_f: Vec<GalValue<CycNum>>,
    pub nu: Vec<GalValue<Rational>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g_generators: Vec<GenSpec>,
    /// Declared ε_g(ρ_g(G_H)) as a set of roots of unity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_g_on_h_image: Option<Vec<CycNum>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm_field_disc: Option<i64>,
    /// Declared |ρ'_g(G_Q)|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceptional_q: Option<u64>,
    pub levels: Levels,
    pub disc_l: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl PairSpec {
    pub fn from_json(text: &str) -> Result<PairSpec, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }
    pub fn gal(&self) -> GalGroup {
        GalGroup { orders: self.gal_hq.orders.clone() }
    }
    pub fn has_g(&self) -> bool {
        !self.g_generators.is_empty()
    }
    /// ν indexed by Gal(H/Q) element; None if the table is incomplete.
    pub fn nu_table(&self) -> Option<Vec<Rational>> {
        table(&self.gal(), &self.nu)
    }
    pub fn eps_f_table(&self) -> Option<Vec<CycNum>> {
        table(&self.gal(), &self.eps_f)
    }
    pub fn c_index(&self) -> Option<usize> {
        self.gal().index(&self.gal_hq.c)
    }
    /// Values (±1) of a quadratic character given by generator bits.
    pub fn character_values(&self, bits: &[u8]) -> Vec<i8> {
        let g = self.gal();
        (0..g.size())
            .map(|i| {
                let par: u32 = g.element(i).iter().zip(bits).map(|(e, b)| e * *b as u32).sum();
                if par % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
    pub fn subfield_character(&self, disc: i64) -> Option<Vec<i8>> {
        self.gal_hq
            .quadratic_subfields
            .iter()
            .find(|q| q.disc == disc)
            .map(|q| self.character_values(&q.character))
    }
    fn conductor(&self) -> u64 {
        let mut n = 1;
        for g in &self.g_generators {
            for e in &g.matrix {
                n = ff::lcm(n, e.conductor() as u64);
            }
        }
        for e in &self.eps_f {
            n = ff::lcm(n, e.value.conductor() as u64);
        }
        n
    }
    fn denominators(&self) -> u64 {
        let mut n = 1;
        for g in &self.g_generators {
            for e in &g.matrix {
                n = ff::lcm(n, e.denominator().unsigned_abs());
            }
        }
        n
    }
}

fn table<T: Clone>(g: &GalGroup, vals: &[GalValue<T>]) -> Option<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; g.size()];
    for v in vals {
        let i = g.index(&v.sigma)?;
        if out[i].is_some() {
            return None;
        }
        out[i] = Some(v.value.clone());
    }
    out.into_iter().collect()
}

fn det_cyc(m: &[CycNum; 4]) -> CycNum {
    &(&m[0] * &m[3]) - &(&m[1] * &m[2])
}

pub fn validate_spec(s: &PairSpec) -> Vec<Violation> {
    let mut v = Vec::new();
    if s.spec_version != SPEC_VERSION {
        v.push(violation("spec_version", format!("expected {SPEC_VERSION}, found {}", s.spec_version)));
    }
    if s.base_field != "Q" {
        v.push(violation("base_field", format!("unsupported base field {:?}; only F = Q is modeled", s.base_field)));
    }
    if s.weight_f < 2 {
        v.push(violation("weight_f", "weight of f must be at least 2"));
    }
    if s.weight_g != 1 {
        v.push(violation("weight_g", "g must have weight 1"));
    }
    let g = s.gal();
    if s.gal_hq.orders.iter().any(|&n| n == 0) || g.size() > 64 {
        v.push(violation("gal_hq", "generator orders must be positive with group size at most 64"));
        return v;
    }
    let c = s.c_index();
    if c.is_none() {
        v.push(violation("gal_hq.c", "complex conjugation is not a group element"));
    }
    if let Some(s0) = &s.gal_hq.sigma0 {
        if g.index(s0).is_none() {
            v.push(violation("gal_hq.sigma0", "not a group element"));
        }
    }
    for q in &s.gal_hq.quadratic_subfields {
        let ok = q.character.len() == g.orders.len()
            && q.character.iter().zip(&g.orders).all(|(&b, &n)| b <= 1 && (b == 0 || n % 2 == 0))
            && q.character.iter().any(|&b| b == 1);
        if !ok {
            v.push(violation("gal_hq.quadratic_subfields", format!("disc {}: not a nontrivial quadratic character", q.disc)));
        }
    }

    match s.eps_f_table() {
        None => v.push(violation("eps_f", "must list every Gal(H/Q) element exactly once")),
        Some(eps) => {
            if eps.iter().any(|e| e.is_root_of_unity().is_none()) {
                v.push(violation("eps_f", "values must be roots of unity"));
            } else {
                let bad = (0..g.size())
                    .flat_map(|a| (0..g.size()).map(move |b| (a, b)))
                    .find(|&(a, b)| eps[g.add(a, b)] != &eps[a] * &eps[b]);
                if let Some((a, b)) = bad {
                    v.push(violation("eps_f", format!("not a character at {} and {}", g.label(a), g.label(b))));
                }
                if let Some(c) = c {
                    let want = CycNum::int(if s.weight_f % 2 == 0 { 1 } else { -1 });
                    if eps[c] != want {
                        v.push(violation(
                            "eps_f parity",
                            format!("eps_f(c) = {} but weight {} forces {}", eps[c], s.weight_f, want),
                        ));
                    }
                }
            }
        }
    }

    match s.nu_table() {
        None => v.push(violation("nu", "must list every Gal(H/Q) element exactly once")),
        Some(nu) => {
            if nu.iter().any(|r| r.num == 0) {
                v.push(violation("nu", "values must be nonzero"));
            } else {
                if !nu[0].is_square() {
                    v.push(violation("nu", "nu(identity) must be a square"));
                }
                'outer: for a in 0..g.size() {
                    for b in 0..g.size() {
                        let ab = g.add(a, b);
                        let q = Rational::new(nu[a].num * nu[b].num * nu[ab].den, nu[a].den * nu[b].den * nu[ab].num)
                            .expect("nonzero");
                        if !q.is_square() {
                            v.push(violation(
                                "nu multiplicativity",
                                format!(
                                    "nu({})·nu({})/nu({}) = {} is not a square",
                                    g.label(a),
                                    g.label(b),
                                    g.label(ab),
                                    q
                                ),
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    if !s.has_g() {
        return v;
    }
    for (i, gen) in s.g_generators.iter().enumerate() {
        if g.index(&gen.sigma).is_none() {
            v.push(violation("g_generators", format!("generator {i} has an invalid sigma")));
        }
        if det_cyc(&gen.matrix).is_root_of_unity().is_none() {
            v.push(violation("g_generators", format!("det of generator {i} is not a root of unity")));
        }
    }
    if !v.is_empty() {
        return v;
    }
    match g_data(s) {
        Err(e) => v.push(violation("g_generators", e.to_string())),
        Ok(gd) => {
            let eps = s.eps_f_table().unwrap();
            let f = gd.field;
            let eps_g_f_trivial = gd.gq.elements.iter().zip(&gd.labels).all(|(m, &l)| {
                (eps[l].reduce_mod_p(f).expect("aux prime reduces eps_f") * m.det()).is_one()
            });
            if eps_g_f_trivial {
                v.push(violation("eps_f·eps_g", "the product character is trivial"));
            }
            if let Some(decl) = &s.eps_g_on_h_image {
                let mut want: Vec<FqElem> = Vec::new();
                for e in decl {
                    match (e.is_root_of_unity(), e.reduce_mod_p(f)) {
                        (Some(_), Ok(x)) => want.push(x),
                        _ => v.push(violation("eps_g_on_h_image", format!("{e} is not a reducible root of unity"))),
                    }
                }
                want.sort();
                want.dedup();
                if want != gd.gh.determinants() {
                    v.push(violation(
                        "eps_g_on_h_image",
                        format!("declared {} values, det on rho_g(G_H) has {}", want.len(), gd.gh.determinants().len()),
                    ));
                }
            }
            if let Some(q) = s.exceptional_q {
                if q != gd.gq.proj_order as u64 {
                    v.push(violation(
                        "exceptional_q",
                        format!("declared {q}, projective image has order {}", gd.gq.proj_order),
                    ));
                }
            }
        }
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodPrime {
    pub p: u64,
    pub good: bool,
    pub reasons: Vec<String>,
    /// The surjectivity half of the definition is assumed, never computed.
    pub assumes_surjectivity: bool,
}

pub fn good_prime(s: &PairSpec, p: u64) -> GoodPrime {
    let mut reasons = Vec::new();
    if !ff::is_odd_prime(p) {
        reasons.push(format!("{p} is not an odd prime"));
    } else {
        if 30 % p == 0 {
            reasons.push("p | 30".into());
        }
        if s.levels.n_f % p == 0 {
            reasons.push("p | N_f".into());
        }
        if s.levels.n_g % p == 0 {
            reasons.push("p | N_g".into());
        }
        if s.disc_l.unsigned_abs() % p == 0 {
            reasons.push("p | disc_L".into());
        }
    }
    GoodPrime { p, good: reasons.is_empty(), reasons, assumes_surjectivity: true }
}

/// The g-group reduced at an auxiliary prime where reduction is faithful;
/// used for the characteristic-zero group theory.
#[derive(Clone, Debug)]
pub struct GData {
    pub aux_p: u64,
    pub field: FieldRef,
    pub gq: MatrixGroup,
    /// Gal(H/Q) index of every element of gq.
    pub labels: Vec<usize>,
    pub gh: MatrixGroup,
}

fn aux_primes(s: &PairSpec, count: usize) -> Vec<u64> {
    let n = ff::lcm(s.conductor(), 2);
    let bad = 30 * s.levels.n_f * s.levels.n_g * s.disc_l.unsigned_abs().max(1) * s.denominators();
    (1..)
        .map(|t| 1 + n * t)
        .filter(|&q| q > 7 && ff::is_odd_prime(q) && bad % q != 0)
        .take(count)
        .collect()
}

fn reduce_gens(s: &PairSpec, f: FieldRef) -> Result<Vec<Mat2>, ModelError> {
    s.g_generators
        .iter()
        .map(|g| {
            let e: Vec<FqElem> = g.matrix.iter().map(|x| x.reduce_mod_p(f)).collect::<Result<_, _>>()?;
            Ok(Mat2::new(e[0], e[1], e[2], e[3]))
        })
        .collect()
}

fn labelled_group(s: &PairSpec, f: FieldRef) -> Result<(MatrixGroup, Vec<usize>, MatrixGroup), ModelError> {
    let gal = s.gal();
    let gens = reduce_gens(s, f)?;
    let gq = closure(&gens, DEFAULT_CAP)?;
    let images: Vec<usize> = s.g_generators.iter().map(|g| gal.index(&g.sigma).expect("validated")).collect();
    let labels = gq.hom_values(&images, 0, |a, b| gal.add(*a, *b))?;
    let ker: Vec<usize> = (0..gq.order()).filter(|&i| labels[i] == 0).collect();
    let gh = gq.subgroup(&ker)?;
    Ok((gq, labels, gh))
}

pub fn g_data(s: &PairSpec) -> Result<GData, ModelError> {
    if !s.has_g() {
        return Err(ModelError::NoGPart);
    }
    let ps = aux_primes(s, 2);
    let mut out: Option<GData> = None;
    for &q in &ps {
        let f = make_field(q, 1)?;
        let (gq, labels, gh) = labelled_group(s, f)?;
        match &out {
            None => out = Some(GData { aux_p: q, field: f, gq, labels, gh }),
            Some(prev) if prev.gq.order() != gq.order() => {
                return Err(ModelError::ReductionCollapse {
                    p: q.min(prev.aux_p),
                    expected: gq.order().max(prev.gq.order()),
                    got: gq.order().min(prev.gq.order()),
                })
            }
            _ => {}
        }
    }
    let gd = out.expect("aux primes exist");
    let gal = s.gal();
    let hit: HashSet<usize> = gd.labels.iter().copied().collect();
    if hit.len() != gal.size() {
        return Err(ModelError::Invalid(vec![violation(
            "g_generators",
            "the map to Gal(H/Q) is not surjective, so some coset has no g-part",
        )]));
    }
    Ok(gd)
}

#[derive(Clone, Debug)]
pub struct Block {
    pub sigma: usize,
    pub label: String,
    pub d: FqElem,
    /// ν(σ) reduced into F_p.
    pub nu: FqElem,
    pub alpha: FqElem,
    pub g_part: Vec<Mat2>,
}

impl Block {
    /// Δ_{α, α⁻¹d}.
    pub fn scaling(&self) -> Mat2 {
        Mat2::diag(self.alpha, self.d / self.alpha)
    }
}

/// SL2-side of every block: all of SL2(F_p), or an explicit list for mocks.
#[derive(Clone, Debug)]
pub enum FPart {
    Sl2,
    Explicit(Vec<Mat2>),
}

#[derive(Clone, Debug)]
pub struct ImageModel {
    pub p: u64,
    pub field: FieldRef,
    pub gal: GalGroup,
    pub blocks: Vec<Block>,
    pub f_part: FPart,
    pub g_order: usize,
    pub gh_order: usize,
}

impl ImageModel {
    pub fn block(&self, sigma: usize) -> &Block {
        &self.blocks[sigma]
    }
    pub fn with_negated_alpha(&self) -> ImageModel {
        let mut m = self.clone();
        m.blocks.iter_mut().for_each(|b| b.alpha = -b.alpha);
        m
    }
}

pub fn build_image(s: &PairSpec, p: u64) -> Result<ImageModel, ModelError> {
    let gp = good_prime(s, p);
    if !gp.good {
        return Err(ModelError::BadPrime { p, reasons: gp.reasons });
    }
    let violations = validate_spec(s);
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    let gd = g_data(s)?;
    let nu = s.nu_table().expect("validated");
    let eps = s.eps_f_table().expect("validated");
    if let Some(r) = nu.iter().find(|r| r.num.unsigned_abs() % p == 0 || r.den.unsigned_abs() % p == 0) {
        return Err(ModelError::BadPrime { p, reasons: vec![format!("p divides nu value {r}")] });
    }

    let k1 = mult_order_mod(p, s.conductor()).expect("good primes are prime to the conductor");
    let exponent = {
        let f1 = make_field(p, k1)?;
        let gq = closure(&reduce_gens(s, f1)?, DEFAULT_CAP)?;
        gq.elements.iter().fold(1u64, |e, m| ff::lcm(e, gq.element_order(m) as u64))
    };
    let mut k = ff::lcm(k1 as u64, mult_order_mod(p, exponent).expect("p prime to |G|") as u64) as usize;
    let need_sqrt = |f: FieldRef| -> Result<bool, ModelError> {
        for (r, e) in nu.iter().zip(&eps) {
            if !(r.reduce(f).unwrap() * e.reduce_mod_p(f)?).is_square() {
                return Ok(true);
            }
        }
        Ok(false)
    };
    if k > MAX_EXT_DEGREE {
        return Err(ModelError::DegreeCap(k));
    }
    if need_sqrt(make_field(p, k)?)? {
        k *= 2;
    }
    if k > MAX_EXT_DEGREE {
        return Err(ModelError::DegreeCap(k));
    }
    let f = make_field(p, k)?;
    let (gq, labels, gh) = labelled_group(s, f)?;
    if gq.order() != gd.gq.order() {
        return Err(ModelError::ReductionCollapse { p, expected: gd.gq.order(), got: gq.order() });
    }
    let gal = s.gal();
    let mut blocks = Vec::with_capacity(gal.size());
    for sigma in 0..gal.size() {
        let d = eps[sigma].reduce_mod_p(f)?;
        let nu_r = nu[sigma].reduce(f).unwrap();
        let alpha = (nu_r * d).sqrt().expect("extension chosen to hold every alpha");
        let g_part: Vec<Mat2> = (0..gq.order()).filter(|&i| labels[i] == sigma).map(|i| gq.elements[i]).collect();
        blocks.push(Block { sigma, label: gal.label(sigma), d, nu: nu_r, alpha, g_part });
    }
    Ok(ImageModel { p, field: f, gal, blocks, f_part: FPart::Sl2, g_order: gq.order(), gh_order: gh.order() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCheck {
    pub ok: bool,
    pub failures: Vec<String>,
}

/// The modeled image is closed under products: the f-side scalings compose
/// up to F_p^× and SL2 (λ = α_σα_τ/α_στ ∈ F_p, d multiplicative) and the
/// g-side cosets multiply into the right coset.
pub fn block_product_check(m: &ImageModel) -> ProductCheck {
    let mut failures = Vec::new();
    let n = m.blocks.len();
    for a in 0..n {
        for b in 0..n {
            let (x, y) = (&m.blocks[a], &m.blocks[b]);
            let z = &m.blocks[m.gal.add(a, b)];
            if x.d * y.d != z.d {
                failures.push(format!("d({})·d({}) != d({})", x.label, y.label, z.label));
            }
            let lambda = x.alpha * y.alpha / z.alpha;
            if !lambda.in_prime_subfield() {
                failures.push(format!("alpha({})·alpha({})/alpha({}) is not in F_p", x.label, y.label, z.label));
            }
            let target: HashSet<&Mat2> = z.g_part.iter().collect();
            let stray = x.g_part.iter().flat_map(|u| y.g_part.iter().map(move |v| *u * *v)).any(|w| !target.contains(&w));
            if stray {
                failures.push(format!("g_part({})·g_part({}) leaves g_part({})", x.label, y.label, z.label));
            }
        }
    }
    ProductCheck { ok: failures.is_empty(), failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_json(nu: &str, eps: &str, weight: u32) -> String {
        format!(
            r#"{{
            "spec_version": 1, "label_f": "toy", "weight_f": {weight},
            "gal_hq": {{"orders": [2], "c": [1], "sigma0": [1]}},
            "eps_f": [{{"sigma": [0], "value": "1"}}, {{"sigma": [1], "value": "{eps}"}}],
            "nu": [{{"sigma": [0], "value": 1}}, {{"sigma": [1], "value": {nu}}}],
            "g_generators": [
                {{"matrix": ["z^2 @ 6", "0", "0", "-z^4 @ 6"], "sigma": [1]}},
                {{"matrix": ["0", "1", "-1", "0"], "sigma": [0]}}
            ],
            "levels": {{"n_f": 63, "n_g": 1452}},
            "disc_l": 12
        }}"#
        )
    }

    #[test]
    fn rationals() {
        assert_eq!(Rational::parse("6/4"), Rational::new(3, 2));
        assert_eq!(Rational::new(3, 2).unwrap().square_class(), 6);
        assert_eq!(Rational::int(-12).square_class(), -3);
        assert!(Rational::new(9, 4).unwrap().is_square());
        assert!(!Rational::int(-1).is_square());
    }

    #[test]
    fn gal_indexing_roundtrip() {
        let g = GalGroup { orders: vec![2, 3, 2] };
        assert_eq!(g.size(), 12);
        for i in 0..12 {
            assert_eq!(g.index(&g.element(i)), Some(i));
            assert_eq!(g.add(i, 0), i);
        }
        assert_eq!(g.element(1), vec![1, 0, 0]);
    }

    #[test]
    fn validation_cases() {
        let s = PairSpec::from_json(&toy_json("3", "1", 2)).unwrap();
        assert_eq!(validate_spec(&s), vec![]);
        let bad = PairSpec::from_json(&toy_json("3", "1", 3)).unwrap();
        let v = validate_spec(&bad);
        assert!(v.iter().any(|x| x.invariant == "eps_f parity"), "{v:?}");
        let unknown = toy_json("3", "1", 2).replacen("\"disc_l\"", "\"extra\": 1, \"disc_l\"", 1);
        assert!(matches!(PairSpec::from_json(&unknown), Err(ModelError::Parse(_))));
    }

    #[test]
    fn nu_multiplicativity_violation() {
        let j = r#"{
            "spec_version": 1, "label_f": "toy", "weight_f": 2,
            "gal_hq": {"orders": [2, 2], "c": [0, 0]},
            "eps_f": [{"sigma": [0,0], "value": "1"}, {"sigma": [1,0], "value": "1"},
                      {"sigma": [0,1], "value": "1"}, {"sigma": [1,1], "value": "1"}],
            "nu": [{"sigma": [0,0], "value": 1}, {"sigma": [1,0], "value": 2},
                   {"sigma": [0,1], "value": 3}, {"sigma": [1,1], "value": 5}],
            "levels": {"n_f": 1}, "disc_l": 1
        }"#;
        let s = PairSpec::from_json(j).unwrap();
        let v = validate_spec(&s);
        assert!(v.iter().any(|x| x.invariant == "nu multiplicativity"), "{v:?}");
    }

    #[test]
    fn good_prime_reasons() {
        let s = PairSpec::from_json(&toy_json("3", "1", 2)).unwrap();
        assert!(good_prime(&s, 13).good);
        assert_eq!(good_prime(&s, 11).reasons, vec!["p | N_g"]);
        assert_eq!(good_prime(&s, 5).reasons, vec!["p | 30"]);
    }

    #[test]
    fn alpha_in_base_or_extension() {
        let s = PairSpec::from_json(&toy_json("3", "1", 2)).unwrap();
        let m = build_image(&s, 13).unwrap();
        assert_eq!(m.blocks.len(), 2);
        let b0 = &m.blocks[0];
        assert!(b0.d.is_one() && b0.alpha.is_one());
        let b1 = &m.blocks[1];
        assert_eq!(b1.alpha * b1.alpha, m.field.int(3));
        assert!(b1.alpha.in_prime_subfield());
        assert_eq!(b1.alpha.as_prime(), Some(4));
        let m17 = build_image(&s, 17).unwrap();
        assert!(!m17.blocks[1].alpha.in_prime_subfield());
        assert!(block_product_check(&m).ok);
        assert!(block_product_check(&m17).ok);
        assert_eq!(m.blocks[0].g_part.len(), m17.blocks[0].g_part.len());
    }
}
