//! Deciders for (N), (gI), (rI), (wE) and (sE) on an image model.
//!
//! (sE) at p is decided as rank(kron(M, N) − I) = 3 over the residue field.
//! The brute decider sweeps SL2(F_p) for every block. The symbolic decider
//! uses the trace criterion below (derivation in docs/criterion.md):
//!
//! a block (d = ε_f(σ), α) admits a witness iff some non-scalar N in its
//! g-part has an eigenvalue u with (u⁻¹ + d·u)/α ∈ F_p, and either N is
//! semisimple with other eigenvalue v and d·u·v ≠ 1, or N is a Jordan block
//! and d·u² ≠ 1.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{FieldRef, Fq2Elem, FqElem};
use crate::grp::{projective_type, MatrixGroup, ProjType};
use crate::mat::{eigen2, kron, rank, rank_by_minors, Mat2, Mat4};
use crate::model::{build_image, g_data, good_prime, FPart, GData, GoodPrime, ImageModel, ModelError, PairSpec};
use crate::pairing;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotDecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Brute,
    Symbolic,
    CriterionSpecial2,
    CriterionSpecialq,
    CriterionRi,
    Pairing,
    Burnside,
    Structural,
}

#[derive(Debug, Error)]
pub enum ChecksError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("brute force needs {needed} pairs, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("Q = {0} is odd; a projective dihedral order is even")]
    OddQ(u64),
    #[error("descriptor does not produce a witness: {0}")]
    InvalidDescriptor(String),
    #[error("the symbolic criterion needs the full SL2 f-part")]
    NeedsFullSl2,
    #[error("{condition}: methods disagree ({details})")]
    Disagreement { condition: String, details: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub sigma: String,
    /// S ∈ SL2(F_p) with f_part = scaling(σ)·S.
    pub s_part: Mat2,
    pub f_part: Mat2,
    pub g_part_elem: Mat2,
    pub tensor_rank_defect: usize,
}

impl Witness {
    /// Re-verify with both rank routines.
    pub fn verify(&self) -> bool {
        let k = kron(&self.f_part, &self.g_part_elem).minus_scalar(self.f_part.field().one());
        rank(&k) == 3 && rank_by_minors(&k) == 3 && self.s_part.det().is_one()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessDescriptor {
    pub sigma: usize,
    pub label: String,
    pub n: Mat2,
    pub u: Fq2Elem,
    /// (u⁻¹ + d·u)/α, which lies in F_p.
    pub t: FqElem,
    pub n_semisimple: bool,
}

pub fn sl2_count(p: u64) -> u64 {
    p * p * p - p
}

/// The i-th element of SL2(F_p) in Bruhat order: first the Borel part
/// [[a, b], [0, a⁻¹]] (a = 1 first, then increasing a; b increasing), then
/// the big cell [[b, bc − a], [a⁻¹, a⁻¹c]] ordered by (a, b, c).
pub fn sl2_element(f: FieldRef, i: u64) -> Mat2 {
    let p = f.p;
    let borel = (p - 1) * p;
    if i < borel {
        let a = f.int((i / p + 1) as i64);
        let b = f.int((i % p) as i64);
        return Mat2::new(a, b, f.zero(), a.inv().unwrap());
    }
    let j = i - borel;
    let a = f.int((j / (p * p) + 1) as i64);
    let b = f.int(((j / p) % p) as i64);
    let c = f.int((j % p) as i64);
    let ai = a.inv().unwrap();
    Mat2::new(b, b * c - a, ai, ai * c)
}

fn is_witness(m: &Mat2, n: &Mat2) -> bool {
    let one = m.field().one();
    rank(&kron(m, n).minus_scalar(one)) == 3
}

/// No element of this block has d·det N ≠ 1, so no kernel can be a line.
fn block_skippable(b: &crate::model::Block) -> bool {
    b.g_part.iter().all(|n| (b.d * n.det()).is_one())
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteResult {
    pub witness: Option<Witness>,
    pub skipped_blocks: Vec<String>,
    /// |SL2| · Σ|g_part| over the blocks actually swept.
    pub pairs_in_scope: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteOptions {
    pub budget: u64,
    pub parallel: bool,
    /// Sweep blocks even when the determinant test rules them out.
    pub force_skipped: bool,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions { budget: DEFAULT_BUDGET, parallel: true, force_skipped: false }
    }
}

fn f_part_len(m: &ImageModel) -> u64 {
    match &m.f_part {
        FPart::Sl2 => sl2_count(m.p),
        FPart::Explicit(v) => v.len() as u64,
    }
}

fn f_part_elem(m: &ImageModel, i: u64) -> Mat2 {
    match &m.f_part {
        FPart::Sl2 => sl2_element(m.field, i),
        FPart::Explicit(v) => v[i as usize],
    }
}

pub fn check_se_brute(m: &ImageModel, opts: BruteOptions) -> Result<BruteResult, ChecksError> {
    let mut skipped = Vec::new();
    let mut swept = Vec::new();
    for b in &m.blocks {
        if !opts.force_skipped && block_skippable(b) {
            skipped.push(b.label.clone());
        } else {
            swept.push(b);
        }
    }
    let count = f_part_len(m);
    let pairs: u64 = swept.iter().map(|b| count * b.g_part.len() as u64).sum();
    if pairs > opts.budget {
        return Err(ChecksError::BudgetExceeded { needed: pairs, budget: opts.budget });
    }
    for b in swept {
        let scaling = b.scaling();
        let probe = |i: u64| -> Option<(u64, usize)> {
            let fm = scaling * f_part_elem(m, i);
            b.g_part.iter().position(|n| is_witness(&fm, n)).map(|j| (i, j))
        };
        let hit = if opts.parallel {
            (0..count).into_par_iter().find_map_first(probe)
        } else {
            (0..count).find_map(probe)
        };
        if let Some((i, j)) = hit {
            let s = f_part_elem(m, i);
            let w = Witness {
                sigma: b.label.clone(),
                s_part: s,
                f_part: scaling * s,
                g_part_elem: b.g_part[j],
                tensor_rank_defect: 1,
            };
            return Ok(BruteResult { witness: Some(w), skipped_blocks: skipped, pairs_in_scope: pairs });
        }
    }
    Ok(BruteResult { witness: None, skipped_blocks: skipped, pairs_in_scope: pairs })
}

fn descriptor_for(d: FqElem, alpha: FqElem, n: &Mat2) -> Option<(Fq2Elem, FqElem, bool)> {
    if n.is_scalar() {
        return None;
    }
    let e = eigen2(n);
    let vals: Vec<Fq2Elem> = e.eigenvalues.iter().map(|x| x.0).collect();
    let dd = Fq2Elem::base(d);
    let ainv = Fq2Elem::base(alpha.inv().expect("alpha is a unit"));
    for (i, &u) in vals.iter().enumerate() {
        let uinv = u.inv().expect("eigenvalues of invertible matrices are units");
        let t = (uinv + dd * u) * ainv;
        if !t.in_prime_subfield() {
            continue;
        }
        let ok = if e.semisimple {
            let v = vals[1 - i];
            !(dd * u * v).is_one()
        } else {
            !(dd * u * u).is_one()
        };
        if ok {
            return Some((u, t.to_base().expect("prime subfield lies in the base"), e.semisimple));
        }
    }
    None
}

pub fn check_we_symbolic(m: &ImageModel) -> Result<Option<WitnessDescriptor>, ChecksError> {
    if !matches!(m.f_part, FPart::Sl2) {
        return Err(ChecksError::NeedsFullSl2);
    }
    for b in &m.blocks {
        let mut seen = HashSet::new();
        for n in &b.g_part {
            // The outcome depends on N only through (tr, det, scalar or not).
            if !seen.insert((n.trace(), n.det(), n.is_scalar())) {
                continue;
            }
            if let Some((u, t, n_semisimple)) = descriptor_for(b.d, b.alpha, n) {
                return Ok(Some(WitnessDescriptor { sigma: b.sigma, label: b.label.clone(), n: *n, u, t, n_semisimple }));
            }
        }
    }
    Ok(None)
}

/// f_part = Δ_{α, α⁻¹d}·[[t, −1], [1, 0]] has characteristic polynomial
/// (x − u⁻¹)(x − d·u), which pairs u⁻¹ with the eigenvalue u of N.
pub fn construct_witness(m: &ImageModel, desc: &WitnessDescriptor) -> Result<Witness, ChecksError> {
    let b = &m.blocks[desc.sigma];
    let f = m.field;
    let u = desc.u;
    let t = (u.inv().ok_or_else(|| ChecksError::InvalidDescriptor("u = 0".into()))? + Fq2Elem::base(b.d) * u)
        * Fq2Elem::base(b.alpha.inv().unwrap());
    let t = t
        .to_base()
        .filter(|x| x.in_prime_subfield())
        .ok_or_else(|| ChecksError::InvalidDescriptor("(u⁻¹ + d·u)/α is not in F_p".into()))?;
    let s = Mat2::new(t, -f.one(), f.one(), f.zero());
    let fm = b.scaling() * s;
    let w = Witness {
        sigma: b.label.clone(),
        s_part: s,
        f_part: fm,
        g_part_elem: desc.n,
        tensor_rank_defect: 4 - rank(&kron(&fm, &desc.n).minus_scalar(f.one())),
    };
    if !w.verify() {
        return Err(ChecksError::InvalidDescriptor(format!("rank defect {} instead of 1", w.tensor_rank_defect)));
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct NResult {
    pub verdict: Verdict,
    /// (σ, f-part, g-part) with kron = −I₄.
    pub witness: Option<(String, Mat2, Mat2)>,
}

/// kron(M, N) = −I₄ forces N = cI and M = −c⁻¹I; look for such a pair.
pub fn check_n(m: &ImageModel) -> NResult {
    for b in &m.blocks {
        for n in b.g_part.iter().filter(|n| n.is_scalar()) {
            let target = Mat2::scalar(-n.e[0].inv().unwrap());
            let s = b.scaling().inverse().unwrap() * target;
            let member = match &m.f_part {
                FPart::Sl2 => s.e.iter().all(|x| x.in_prime_subfield()) && s.det().is_one(),
                FPart::Explicit(v) => v.contains(&s),
            };
            if member {
                return NResult { verdict: Verdict::Holds, witness: Some((b.label.clone(), target, *n)) };
            }
        }
    }
    NResult { verdict: Verdict::Fails, witness: None }
}

fn flat(a: &Mat4) -> Vec<FqElem> {
    a.e.to_vec()
}

/// Row-echelon basis of a subspace of E^16.
struct Span {
    rows: Vec<(usize, Vec<FqElem>)>,
}

impl Span {
    fn insert(&mut self, mut v: Vec<FqElem>) -> bool {
        for (piv, r) in &self.rows {
            if !v[*piv].is_zero() {
                let c = v[*piv];
                for (x, y) in v.iter_mut().zip(r) {
                    *x = *x - c * *y;
                }
            }
        }
        let Some(piv) = v.iter().position(|x| !x.is_zero()) else { return false };
        let inv = v[piv].inv().unwrap();
        v.iter_mut().for_each(|x| *x = *x * inv);
        for (_, r) in self.rows.iter_mut() {
            if !r[piv].is_zero() {
                let c = r[piv];
                for (x, y) in r.iter_mut().zip(&v) {
                    *x = *x - c * *y;
                }
            }
        }
        self.rows.push((piv, v));
        true
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IrredResult {
    pub absolutely_irreducible: bool,
    pub span_dim: usize,
}

/// Burnside: the image spans M_4(E) iff it acts absolutely irreducibly.
/// The algebra is grown from I₄ by right multiplication with a generating
/// set of the modeled image.
pub fn check_irreducible(m: &ImageModel) -> IrredResult {
    let f = m.field;
    let i2 = Mat2::identity(f);
    let mut gens: Vec<Mat4> = Vec::new();
    match &m.f_part {
        FPart::Sl2 => {
            gens.push(kron(&Mat2::unipotent(f), &i2));
            gens.push(kron(&Mat2::from_ints(f, [1, 0, 1, 1]), &i2));
            for n in &m.blocks[0].g_part {
                gens.push(kron(&i2, n));
            }
            for b in &m.blocks[1..] {
                gens.push(kron(&b.scaling(), &b.g_part[0]));
            }
        }
        FPart::Explicit(v) => {
            for b in &m.blocks {
                for s in v {
                    for n in &b.g_part {
                        gens.push(kron(&(b.scaling() * *s), n));
                    }
                }
            }
        }
    }
    let mut span = Span { rows: Vec::new() };
    let mut basis = vec![Mat4::identity(f)];
    span.insert(flat(&basis[0]));
    let mut k = 0;
    while k < basis.len() && basis.len() < 16 {
        let x = basis[k];
        for g in &gens {
            let y = x * *g;
            if span.insert(flat(&y)) {
                basis.push(y);
            }
        }
        k += 1;
    }
    IrredResult { absolutely_irreducible: basis.len() == 16, span_dim: basis.len() }
}

/// True iff Q/2 is a positive power of p, where the residual irreducibility
/// statement gives no guarantee.
pub fn ri_exception(q: u64, p: u64) -> Result<bool, ChecksError> {
    if q % 2 == 1 {
        return Err(ChecksError::OddQ(q));
    }
    let mut m = q / 2;
    if m < p {
        return Ok(false);
    }
    while m % p == 0 {
        m /= p;
    }
    Ok(m == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome", content = "reason")]
pub enum CriterionOutcome {
    Sufficient(String),
    Exceptional(String),
    Inapplicable(String),
}

impl CriterionOutcome {
    pub fn is_sufficient(&self) -> bool {
        matches!(self, CriterionOutcome::Sufficient(_))
    }
    pub fn is_exceptional(&self) -> bool {
        matches!(self, CriterionOutcome::Exceptional(_))
    }
}

fn squares(xs: &[FqElem]) -> Vec<FqElem> {
    let mut v: Vec<FqElem> = xs.iter().map(|x| *x * *x).collect();
    v.sort();
    v.dedup();
    v
}

fn cm_inside_h(s: &PairSpec) -> bool {
    s.cm_field_disc.is_some_and(|d| s.subfield_character(d).is_some())
}

/// The −1 ∈ ε_g(G_H) dichotomy: either the dihedral exceptional
/// configuration occurs or (sE) holds.
pub fn criterion_special2(s: &PairSpec) -> Result<CriterionOutcome, ChecksError> {
    let gd = g_data(s)?;
    Ok(special2_on(s, &gd))
}

fn special2_on(s: &PairSpec, gd: &GData) -> CriterionOutcome {
    let f = gd.field;
    let dets = gd.gh.determinants();
    if !dets.contains(&(-f.one())) {
        return CriterionOutcome::Inapplicable("-1 is not in eps_g(G_H)".into());
    }
    if cm_inside_h(s) {
        return CriterionOutcome::Inapplicable("the CM field of g lies in H".into());
    }
    let proper = gd.gh.order() < gd.gq.order();
    let minus_one_sq = squares(&dets).contains(&(-f.one()));
    let ty = projective_type(&gd.gq).ok();
    let n = match ty {
        Some(ProjType::Dihedral(n)) if n > 2 => Some(n),
        _ => None,
    };
    let exceptional = proper
        && minus_one_sq
        && n.is_some_and(|n| n % 2 == 1 || (n % 4 != 0 && gd.gh.proj_order != gd.gq.proj_order));
    if exceptional {
        CriterionOutcome::Exceptional(format!(
            "proper G_H, -1 in eps_g(G_H)^2, projective image dihedral of order {}",
            2 * n.unwrap()
        ))
    } else {
        CriterionOutcome::Sufficient("exceptional configuration excluded".into())
    }
}

fn prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            out.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Odd prime q ≠ p dividing |ρ'_g(G_Q)| with an order-q element in ε_g(G_H).
pub fn criterion_specialq(s: &PairSpec, p: u64) -> Result<CriterionOutcome, ChecksError> {
    let gd = g_data(s)?;
    Ok(specialq_on(s, &gd, p))
}

fn specialq_on(s: &PairSpec, gd: &GData, p: u64) -> CriterionOutcome {
    let dets = gd.gh.determinants();
    let det_orders: Vec<u64> = dets.iter().map(|x| x.order().unwrap()).collect();
    let qs: Vec<u64> = prime_factors(gd.gq.proj_order as u64)
        .into_iter()
        .filter(|&q| q != 2 && q != p && det_orders.iter().any(|o| o % q == 0))
        .collect();
    if qs.is_empty() {
        return CriterionOutcome::Inapplicable("no odd prime q fits".into());
    }
    let tq = projective_type(&gd.gq).ok();
    let th = projective_type(&gd.gh).ok();
    let h_degree = s.gal().size() as u64;
    for &q in &qs {
        let first = q == 3
            && h_degree % 3 == 0
            && tq == Some(ProjType::TetraA4)
            && th == Some(ProjType::Dihedral(2));
        let second = q == 3
            && tq == Some(ProjType::TetraA4)
            && th == Some(ProjType::TetraA4)
            && det_orders.iter().any(|o| o % 9 == 0)
            && sl_projection(&gd.gh) < gd.gh.proj_order;
        if !first && !second {
            return CriterionOutcome::Sufficient(format!("q = {q}"));
        }
    }
    CriterionOutcome::Exceptional(format!("A4 configuration for q in {qs:?}"))
}

/// |image of G ∩ SL2 in PGL2|.
fn sl_projection(g: &MatrixGroup) -> usize {
    let sl: Vec<&Mat2> = g.elements.iter().filter(|m| m.det().is_one()).collect();
    let z = sl.iter().filter(|m| m.is_scalar()).count();
    sl.len() / z
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub verdict: Verdict,
    pub methods: Vec<MethodOutcome>,
}

impl ConditionResult {
    fn from_methods(condition: &str, methods: Vec<MethodOutcome>) -> Result<ConditionResult, ChecksError> {
        let decided: Vec<&MethodOutcome> = methods.iter().filter(|m| m.verdict != Verdict::NotDecided).collect();
        let verdict = decided.first().map_or(Verdict::NotDecided, |m| m.verdict);
        if decided.iter().any(|m| m.verdict != verdict) {
            let details = decided.iter().map(|m| format!("{:?}={:?}", m.method, m.verdict)).collect::<Vec<_>>().join(", ");
            return Err(ChecksError::Disagreement { condition: condition.into(), details });
        }
        Ok(ConditionResult { verdict, methods })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Conditions {
    pub n: ConditionResult,
    pub g_i: ConditionResult,
    pub r_i: ConditionResult,
    pub w_e: ConditionResult,
    pub s_e: ConditionResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub label: String,
    pub p: u64,
    pub field: String,
    pub good_prime: GoodPrime,
    pub group_order: usize,
    pub gh_order: usize,
    pub projective_type: Option<ProjType>,
    pub conditions: Conditions,
    pub euler_type: Verdict,
    pub euler_adapted: Verdict,
    pub witness: Option<Witness>,
    pub descriptor: Option<WitnessDescriptor>,
    pub special2: CriterionOutcome,
    pub specialq: CriterionOutcome,
    pub skipped_blocks: Vec<String>,
    pub assumptions: Vec<String>,
    /// Wall-clock milliseconds per phase; excluded from deterministic output.
    #[serde(skip)]
    pub timings_ms: BTreeMap<String, u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMode {
    /// Run when within budget.
    Auto,
    Always,
    Never,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub budget: u64,
    pub brute: BruteMode,
    pub parallel: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { budget: DEFAULT_BUDGET, brute: BruteMode::Auto, parallel: true }
    }
}

fn and3(a: Verdict, b: Verdict, c: Verdict) -> Verdict {
    let v = [a, b, c];
    if v.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if v.iter().all(|x| *x == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::NotDecided
    }
}

fn outcome(method: Method, verdict: Verdict) -> MethodOutcome {
    MethodOutcome { method, verdict }
}

fn holds_or_fails(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

pub fn classify(s: &PairSpec, p: u64, opts: ClassifyOptions) -> Result<CheckReport, ChecksError> {
    let mut timings = BTreeMap::new();
    let clock = Instant::now();
    let gp = good_prime(s, p);
    let m = build_image(s, p)?;
    let gd = g_data(s)?;
    timings.insert("build".into(), clock.elapsed().as_millis());

    let clock = Instant::now();
    let nres = check_n(&m);
    let irr = check_irreducible(&m);
    let q = gd.gq.proj_order as u64;
    let ri_exc = ri_exception(q, p)?;
    let burnside = if irr.absolutely_irreducible { Verdict::Holds } else { Verdict::NotDecided };
    let n = ConditionResult::from_methods("N", vec![outcome(Method::Structural, nres.verdict)])?;
    let g_i = ConditionResult::from_methods("gI", vec![outcome(Method::Burnside, burnside)])?;
    let ri_crit = if ri_exc { Verdict::NotDecided } else { Verdict::Holds };
    let r_i =
        ConditionResult::from_methods("rI", vec![outcome(Method::Burnside, burnside), outcome(Method::CriterionRi, ri_crit)])?;
    timings.insert("structure".into(), clock.elapsed().as_millis());

    let clock = Instant::now();
    let descriptor = check_we_symbolic(&m)?;
    let mut witness = match &descriptor {
        Some(d) => Some(construct_witness(&m, d)?),
        None => None,
    };
    let symbolic = holds_or_fails(descriptor.is_some());
    timings.insert("symbolic".into(), clock.elapsed().as_millis());

    let clock = Instant::now();
    let bopts = BruteOptions { budget: opts.budget, parallel: opts.parallel, force_skipped: false };
    let brute = match opts.brute {
        BruteMode::Never => None,
        BruteMode::Always => Some(check_se_brute(&m, bopts)?),
        BruteMode::Auto => match check_se_brute(&m, bopts) {
            Ok(r) => Some(r),
            Err(ChecksError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    timings.insert("brute".into(), clock.elapsed().as_millis());
    let mut skipped = Vec::new();
    let brute_verdict = brute.as_ref().map(|r| holds_or_fails(r.witness.is_some()));
    if let Some(r) = brute {
        skipped = r.skipped_blocks;
        if r.witness.is_some() {
            witness = r.witness;
        }
    }

    let special2 = special2_on(s, &gd);
    let specialq = specialq_on(s, &gd, p);
    let pairing = pairing::we_iff_pairing(s, p).ok();

    let mut we_methods = vec![outcome(Method::Symbolic, symbolic)];
    let mut se_methods = vec![outcome(Method::Symbolic, symbolic)];
    if let Some(v) = brute_verdict {
        we_methods.push(outcome(Method::Brute, v));
        se_methods.push(outcome(Method::Brute, v));
    }
    // Recorded as not-decided when the standing hypothesis does not apply.
    let pairing = pairing.unwrap_or(Verdict::NotDecided);
    we_methods.push(outcome(Method::Pairing, pairing));
    se_methods.push(outcome(Method::Pairing, pairing));
    if special2.is_sufficient() {
        se_methods.push(outcome(Method::CriterionSpecial2, Verdict::Holds));
    }
    if specialq.is_sufficient() {
        se_methods.push(outcome(Method::CriterionSpecialq, Verdict::Holds));
    }
    let w_e = ConditionResult::from_methods("wE", we_methods)?;
    let s_e = ConditionResult::from_methods("sE", se_methods)?;
    if let Some(w) = &witness {
        if !w.verify() {
            return Err(ChecksError::InvalidDescriptor("witness failed re-verification".into()));
        }
    }

    let euler_type = and3(n.verdict, g_i.verdict, w_e.verdict);
    let euler_adapted = and3(n.verdict, r_i.verdict, s_e.verdict);
    let mut assumptions = vec!["surjectivity clause of the good-prime definition assumed".to_string()];
    if ri_exc {
        assumptions.push(format!("Q/2 = {} is a power of p; (rI) rests on the Burnside test alone", q / 2));
    }
    Ok(CheckReport {
        label: format!("{} x {}", s.label_f, s.label_g.as_deref().unwrap_or("?")),
        p,
        field: format!("GF({}^{})", m.field.p, m.field.k),
        good_prime: gp,
        group_order: m.g_order,
        gh_order: m.gh_order,
        projective_type: projective_type(&gd.gq).ok(),
        conditions: Conditions { n, g_i, r_i, w_e, s_e },
        euler_type,
        euler_adapted,
        witness,
        descriptor,
        special2,
        specialq,
        skipped_blocks: skipped,
        assumptions,
        timings_ms: timings,
    })
}
