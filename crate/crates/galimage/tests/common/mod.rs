#![allow(dead_code)]

use std::collections::BTreeMap;

use galimage::cyclo::CycNum;
use galimage::model::{validate_spec, GalSpec, GalValue, GenSpec, Levels, PairSpec, Rational};
use rand::Rng;

const CONDUCTORS: [u32; 6] = [2, 3, 4, 6, 8, 12];
const NUS: [i64; 5] = [1, 2, 3, 5, 6];

fn root(n: u32, k: u32) -> CycNum {
    CycNum::root_of_unity(n, k).unwrap()
}

fn random_matrix<R: Rng>(rng: &mut R) -> [CycNum; 4] {
    let n = CONDUCTORS[rng.gen_range(0..CONDUCTORS.len())];
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    if rng.gen_bool(0.5) {
        [root(n, i), CycNum::int(0), CycNum::int(0), root(n, j)]
    } else {
        [CycNum::int(0), root(n, i), root(n, j), CycNum::int(0)]
    }
}

/// A toy pair over Gal(H/Q) = Z/2 × Z/2 with c = (1,0): random g-group from
/// diagonal and antidiagonal roots of unity, ν(a), ν(b) ∈ {1,2,3,5,6},
/// random quadratic ε_f of the right parity. None when the draw is not a
/// valid spec (e.g. the generator labels do not define a homomorphism).
pub fn toy_spec<R: Rng>(rng: &mut R) -> Option<PairSpec> {
    let weight_f = rng.gen_range(2..=3u32);
    let e0 = (weight_f % 2) as i64;
    let e1 = rng.gen_range(0..2i64);
    let sign = |b: i64| if b == 1 { -1 } else { 1 };
    let elems = [[0u32, 0], [1, 0], [0, 1], [1, 1]];
    let eps_f = elems
        .iter()
        .map(|s| GalValue { sigma: s.to_vec(), value: CycNum::int(sign(e0 * s[0] as i64) * sign(e1 * s[1] as i64)) })
        .collect();
    let (na, nb) = (NUS[rng.gen_range(0..5)], NUS[rng.gen_range(0..5)]);
    let nu_vals = [1, na, nb, na * nb];
    let nu = elems.iter().zip(nu_vals).map(|(s, v)| GalValue { sigma: s.to_vec(), value: Rational::int(v) }).collect();
    let mut g_generators = vec![
        GenSpec { matrix: random_matrix(rng), sigma: vec![1, 0] },
        GenSpec { matrix: random_matrix(rng), sigma: vec![0, 1] },
    ];
    if rng.gen_bool(0.5) {
        g_generators.push(GenSpec { matrix: random_matrix(rng), sigma: vec![0, 0] });
    }
    let s = PairSpec {
        spec_version: 1,
        label_f: "toy".into(),
        label_g: Some("toy".into()),
        weight_f,
        weight_g: 1,
        base_field: "Q".into(),
        gal_hq: GalSpec {
            orders: vec![2, 2],
            generator_names: vec![],
            c: vec![1, 0],
            sigma0: None,
            quadratic_subfields: vec![],
        },
        eps_f,
        nu,
        g_generators,
        eps_g_on_h_image: None,
        cm_field_disc: None,
        exceptional_q: None,
        levels: Levels { n_f: 1, n_g: 1 },
        disc_l: 1,
        provenance: BTreeMap::new(),
    };
    validate_spec(&s).is_empty().then_some(s)
}

/// The first `count` valid toy specs from a seeded stream, with the number of
/// rejected draws.
pub fn toy_specs(seed: u64, count: usize) -> (Vec<PairSpec>, usize) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut rejected = 0;
    while out.len() < count {
        match toy_spec(&mut rng) {
            Some(s) => out.push(s),
            None => rejected += 1,
        }
    }
    (out, rejected)
}

pub const SHIPPED_WITH_G: [&str; 7] =
    ["case_a.json", "case_b.json", "case_c.json", "case_d.json", "case_e.json", "case_pos.json", "pair_675cb.json"];

/// (element-order multiset, |center|, |derived subgroup|).
pub type Profile = (BTreeMap<usize, usize>, usize, usize);

pub fn order_profile(g: &galimage::grp::MatrixGroup) -> Profile {
    let mut orders = BTreeMap::new();
    for m in &g.elements {
        *orders.entry(g.element_order(m)).or_insert(0) += 1;
    }
    let center = g.elements.iter().filter(|&&a| g.elements.iter().all(|&b| a * b == b * a)).count();
    (orders, center, galimage::grp::derived_subgroup(g).order())
}

/// The same profile for S3 × Z/8, from permutations of {0,1,2} and integers mod 8.
pub fn s3_times_z8_profile() -> Profile {
    let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
    let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
    let perm_order = |a: &[usize; 3]| (1..=6).find(|&k| (1..k).fold(*a, |x, _| compose(&x, a)) == [0, 1, 2]).unwrap();
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let mut orders = BTreeMap::new();
    for p in &perms {
        for z in 0..8usize {
            let oz = 8 / gcd(z, 8);
            let op = perm_order(p);
            *orders.entry(op * oz / gcd(op, oz)).or_insert(0) += 1;
        }
    }
    // Center {id} × Z/8; derived subgroup A3 × 0.
    (orders, 8, 3)
}
