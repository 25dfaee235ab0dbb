//! The quadratic pairing B(σ,τ) = τ(√ν(σ))/√ν(σ) and what it decides.
//!
//! With F = Q, B(σ, Frob_p) is the Legendre symbol of ν(σ) at p, and the left
//! kernel M is the set of σ whose ν(σ) is a rational square.

use serde::Serialize;
use thiserror::Error;

use crate::checks::Verdict;
use crate::ff::{is_odd_prime, legendre};
use crate::model::{g_data, good_prime, validate_spec, PairSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("spec is invalid: {0}")]
    Invalid(String),
    #[error("bad prime {p}: {reasons}")]
    BadPrime { p: u64, reasons: String },
    #[error("p = {p} divides nu({sigma})")]
    PDividesNu { p: u64, sigma: String },
    #[error("standing hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("M disagrees with the kernels of B_p over the first {0} good primes")]
    CrossCheck(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingTable {
    pub p: u64,
    /// B_p(σ) for σ in Gal(H/Q) index order.
    pub values: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelM {
    pub elements: Vec<usize>,
}

fn nu_or_err(s: &PairSpec) -> Result<Vec<crate::model::Rational>, PairingError> {
    if s.base_field != "Q" {
        return Err(PairingError::Invalid("only F = Q is supported".into()));
    }
    s.nu_table().ok_or_else(|| PairingError::Invalid("incomplete nu table".into()))
}

pub fn compute_bp(s: &PairSpec, p: u64) -> Result<PairingTable, PairingError> {
    let gp = good_prime(s, p);
    if !gp.good {
        return Err(PairingError::BadPrime { p, reasons: gp.reasons.join(", ") });
    }
    let gal = s.gal();
    let values = nu_or_err(s)?
        .iter()
        .enumerate()
        .map(|(i, r)| match legendre(r.square_class(), p) {
            Ok(0) | Err(_) => Err(PairingError::PDividesNu { p, sigma: gal.label(i) }),
            Ok(v) => Ok(v),
        })
        .collect::<Result<_, _>>()?;
    Ok(PairingTable { p, values })
}

pub fn compute_m(s: &PairSpec) -> Result<KernelM, PairingError> {
    let nu = nu_or_err(s)?;
    Ok(KernelM { elements: (0..nu.len()).filter(|&i| nu[i].is_square()).collect() })
}

/// compute_m, cross-checked against ∩ ker B_p over the first `count` usable primes.
pub fn compute_m_checked(s: &PairSpec, count: usize) -> Result<KernelM, PairingError> {
    let m = compute_m(s)?;
    let size = s.gal().size();
    let mut in_all = vec![true; size];
    let tables = (7u64..)
        .filter(|&p| is_odd_prime(p))
        .filter_map(|p| compute_bp(s, p).ok())
        .take(count);
    for t in tables {
        for (i, v) in t.values.iter().enumerate() {
            in_all[i] &= *v == 1;
        }
    }
    let inter: Vec<usize> = (0..size).filter(|&i| in_all[i]).collect();
    if inter != m.elements {
        return Err(PairingError::CrossCheck(count));
    }
    Ok(m)
}

/// ε for the standing hypothesis: g has CM by the quadratic field of ε and
/// ε_g = ε_f⁻¹ε. Returns ε's values on Gal(H/Q).
pub fn standing_hypothesis(s: &PairSpec) -> Result<Vec<i8>, PairingError> {
    let v = validate_spec(s);
    if !v.is_empty() {
        return Err(PairingError::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")));
    }
    let disc = s.cm_field_disc.ok_or_else(|| PairingError::Hypothesis("g has no declared CM field".into()))?;
    let eps = s
        .subfield_character(disc)
        .ok_or_else(|| PairingError::Hypothesis(format!("the CM field of discriminant {disc} is not inside H")))?;
    let gd = g_data(s).map_err(|e| PairingError::Invalid(e.to_string()))?;
    let eps_f = s.eps_f_table().expect("validated");
    let f = gd.field;
    for (m, &l) in gd.gq.elements.iter().zip(&gd.labels) {
        let ef = eps_f[l].reduce_mod_p(f).expect("aux prime reduces eps_f");
        if m.det() * ef != f.int(eps[l] as i64) {
            return Err(PairingError::Hypothesis("eps_g differs from eps_f^-1·eps".into()));
        }
    }
    Ok(eps)
}

/// The answer is negative exactly when ε(M) = 1.
pub fn answer_negative(s: &PairSpec, eps: &[i8]) -> Result<bool, PairingError> {
    let m = compute_m(s)?;
    Ok(m.elements.iter().all(|&i| eps[i] == 1))
}

/// (wE) ⟺ (sE) ⟺ B_p ≠ ε.
pub fn we_iff_pairing(s: &PairSpec, p: u64) -> Result<Verdict, PairingError> {
    let eps = standing_hypothesis(s)?;
    let bp = compute_bp(s, p)?;
    Ok(if bp.values != eps { Verdict::Holds } else { Verdict::Fails })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpsilonChoice {
    /// Generator bits (1 ↦ −1).
    pub bits: Vec<u8>,
    pub values: Vec<i8>,
    /// Discriminant of its quadratic field, when the spec names it.
    pub disc: Option<i64>,
}

/// Least nontrivial quadratic character (bits read as a binary number, first
/// generator lowest) that kills M and sends c to (−1)^{k−1}.
pub fn exists_epsilon(s: &PairSpec) -> Result<Option<EpsilonChoice>, PairingError> {
    let m = compute_m(s)?;
    let orders = &s.gal_hq.orders;
    let c = s.c_index().ok_or_else(|| PairingError::Invalid("c is not a group element".into()))?;
    let want_c: i8 = if s.weight_f % 2 == 1 { 1 } else { -1 };
    let even: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] % 2 == 0).collect();
    for mask in 1u64..(1u64 << even.len()) {
        let mut bits = vec![0u8; orders.len()];
        for (j, &i) in even.iter().enumerate() {
            bits[i] = ((mask >> j) & 1) as u8;
        }
        let values = s.character_values(&bits);
        if values[c] == want_c && m.elements.iter().all(|&i| values[i] == 1) {
            let disc = s.gal_hq.quadratic_subfields.iter().find(|q| q.character == bits).map(|q| q.disc);
            return Ok(Some(EpsilonChoice { bits, values, disc }));
        }
    }
    Ok(None)
}
