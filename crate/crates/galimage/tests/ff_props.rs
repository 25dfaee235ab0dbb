use galimage::cyclo::{cyclotomic_poly, CycNum};
use galimage::ff::{legendre, make_field, modpow, nth_root_of_unity, FieldRef, FqElem};
use proptest::prelude::*;

const FIELDS: [(u64, usize); 6] = [(5, 1), (7, 2), (13, 1), (13, 2), (17, 2), (3, 4)];

fn field_and_elems(n: usize) -> impl Strategy<Value = (FieldRef, Vec<FqElem>)> {
    (0..FIELDS.len()).prop_flat_map(move |i| {
        let f = make_field(FIELDS[i].0, FIELDS[i].1).unwrap();
        proptest::collection::vec(0..f.order(), n)
            .prop_map(move |ix| (f, ix.into_iter().map(|k| FqElem::from_index(f, k)).collect()))
    })
}

proptest! {
    #[test]
    fn ring_axioms((_f, v) in field_and_elems(3)) {
        let (a, b, c) = (v[0], v[1], v[2]);
        prop_assert_eq!((a + b) * c, a * c + b * c);
        prop_assert_eq!(a * (b * c), (a * b) * c);
        prop_assert_eq!(a - b + b, a);
        if !b.is_zero() {
            prop_assert_eq!(a / b * b, a);
        }
    }

    #[test]
    fn frobenius_is_a_ring_homomorphism((_f, v) in field_and_elems(2)) {
        let (a, b) = (v[0], v[1]);
        prop_assert_eq!((a + b).frobenius(), a.frobenius() + b.frobenius());
        prop_assert_eq!((a * b).frobenius(), a.frobenius() * b.frobenius());
        prop_assert_eq!(a.frobenius(), a.pow(a.field().p));
    }

    #[test]
    fn sqrt_agrees_with_exhaustive_search((_f, v) in field_and_elems(1)) {
        let a = v[0];
        let fast = a.sqrt();
        prop_assert_eq!(fast, a.sqrt_exhaustive());
        prop_assert_eq!(fast.is_some(), a.is_square());
        if let Some(r) = fast {
            prop_assert_eq!(r * r, a);
            prop_assert!(r <= -r);
        }
    }

    #[test]
    fn legendre_is_multiplicative(a in -500i64..500, b in -500i64..500, pi in 0usize..6) {
        let p = [7u64, 11, 13, 17, 19, 23][pi];
        let (la, lb, lab) = (legendre(a, p).unwrap(), legendre(b, p).unwrap(), legendre(a * b, p).unwrap());
        prop_assert_eq!(lab, la * lb);
        // Euler's criterion as an independent oracle.
        let r = a.rem_euclid(p as i64) as u64;
        let euler = modpow(r, (p - 1) / 2, p);
        let want = if r == 0 { 0 } else if euler == 1 { 1 } else { -1 };
        prop_assert_eq!(la, want);
    }

    #[test]
    fn cyclotomic_reduction_is_a_ring_homomorphism(
        n in prop::sample::select(vec![3u32, 4, 5, 8, 12, 20]),
        ca in proptest::collection::vec(-4i64..5, 8),
        cb in proptest::collection::vec(-4i64..5, 8),
    ) {
        // p ≡ 1 mod n, so Φ_n splits and reduction lands in F_p.
        let p = (1..).map(|t| 1 + 2 * n as u64 * t).find(|&q| galimage::ff::is_odd_prime(q) && q > 7).unwrap();
        let f = make_field(p, 1).unwrap();
        let a = CycNum::new(n, ca, 1).unwrap();
        let b = CycNum::new(n, cb, 1).unwrap();
        let (ra, rb) = (a.reduce_mod_p(f).unwrap(), b.reduce_mod_p(f).unwrap());
        prop_assert_eq!((&a + &b).reduce_mod_p(f).unwrap(), ra + rb);
        prop_assert_eq!((&a * &b).reduce_mod_p(f).unwrap(), ra * rb);
    }
}

#[test]
fn roots_of_unity_have_exact_order_and_are_compatible() {
    let f = make_field(13, 2).unwrap();
    for n in [2u64, 3, 4, 6, 7, 8, 12, 14, 24, 28, 56, 84, 168] {
        let z = nth_root_of_unity(f, n).unwrap();
        assert_eq!(z.order(), Some(n), "n = {n}");
        for m in [2u64, 3, 4, 6, 7] {
            if n % m == 0 {
                assert_eq!(z.pow(n / m), nth_root_of_unity(f, m).unwrap());
            }
        }
    }
}

/// x^n − 1 = ∏_{d | n} Φ_d(x), by schoolbook multiplication.
#[test]
fn cyclotomic_polynomials_multiply_to_x_n_minus_1() {
    let mul = |a: &[i64], b: &[i64]| {
        let mut c = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        c
    };
    for n in 1..=60u32 {
        let prod = (1..=n).filter(|d| n % d == 0).fold(vec![1i64], |acc, d| mul(&acc, &cyclotomic_poly(d).unwrap()));
        let mut want = vec![0i64; n as usize + 1];
        want[0] = -1;
        want[n as usize] = 1;
        assert_eq!(prod, want, "n = {n}");
    }
}
