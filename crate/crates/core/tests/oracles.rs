//! Small worked values and brute-force oracles against the public API.

use std::collections::BTreeSet;

use proptest::prelude::*;
use sumprodlab_core::energy::{additive_energy, cubic_energy, energy_s, mult_energy};
use sumprodlab_core::generators::{interval, SplitMix64};
use sumprodlab_core::{q, Op, RSet, Rational};

fn ints(v: &[i64]) -> RSet {
    RSet::from_integers(v.iter().copied()).unwrap()
}

fn brute(a: &RSet, b: &RSet, f: impl Fn(&Rational, &Rational) -> Option<Rational>) -> BTreeSet<Rational> {
    a.iter().flat_map(|x| b.iter().filter_map(|y| f(x, y)).collect::<Vec<_>>()).collect()
}

fn brute_energy(a: &RSet, power: u32) -> u128 {
    let mut r = std::collections::BTreeMap::new();
    for x in a {
        for y in a {
            *r.entry(x - y).or_insert(0u128) += 1;
        }
    }
    r.values().map(|c| c.pow(power)).sum()
}

#[test]
fn worked_values() {
    let a = ints(&[1, 2, 3]);
    assert_eq!(a.sumset(&a), ints(&[2, 3, 4, 5, 6]));
    assert_eq!(interval(4).unwrap().prodset(&interval(4).unwrap()).len(), 9);
    let b = ints(&[1, 2]);
    assert_eq!(b.ratioset(&b).unwrap(), RSet::new(vec![q(1, 2), q(1, 1), q(2, 1)]).unwrap());
    assert_eq!(additive_energy(&a), 19);
    assert_eq!(mult_energy(&interval(4).unwrap()).unwrap().as_u128(), Some(32));
}

#[test]
fn ratio_set_of_an_interval() {
    let a = interval(8).unwrap();
    let oracle = brute(&a, &a, |x, y| Some(x / y));
    assert_eq!(a.ratioset(&a).unwrap().len(), oracle.len());
    assert_eq!(oracle.len(), 43);
}

#[test]
fn splitmix_reference_stream() {
    let mut r = SplitMix64::new(0);
    assert_eq!(r.next_u64(), 0xe220a8397b1dcdaf);
    assert_eq!(r.next_u64(), 0x6e789e6aa1b965f4);
}

#[test]
fn ratio_set_rejects_zero() {
    let a = ints(&[0, 1, 2]);
    assert!(a.ratioset(&a).is_err());
}

fn small_set() -> impl Strategy<Value = RSet> {
    prop::collection::btree_set((-12i64..12, 1i64..4), 1..9)
        .prop_map(|v| RSet::new(v.into_iter().map(|(n, d)| q(n, d)).collect()).unwrap())
}

fn positive_set() -> impl Strategy<Value = RSet> {
    prop::collection::btree_set((1i64..20, 1i64..4), 1..9)
        .prop_map(|v| RSet::new(v.into_iter().map(|(n, d)| q(n, d)).collect()).unwrap())
}

proptest! {
    #[test]
    fn set_operations_match_brute_force(a in small_set(), b in small_set()) {
        prop_assert_eq!(a.sumset(&b).elements().to_vec(), brute(&a, &b, |x, y| Some(x + y)).into_iter().collect::<Vec<_>>());
        prop_assert_eq!(a.diffset(&b).elements().to_vec(), brute(&a, &b, |x, y| Some(x - y)).into_iter().collect::<Vec<_>>());
        prop_assert_eq!(a.prodset(&b).elements().to_vec(), brute(&a, &b, |x, y| Some(x * y)).into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn realisations_count_every_pair(a in small_set(), b in small_set()) {
        for op in [Op::Sum, Op::Difference, Op::Product] {
            let m = a.realisations(&b, op).unwrap();
            prop_assert_eq!(m.total(), (a.len() * b.len()) as u64);
        }
    }

    #[test]
    fn energies_match_brute_force(a in small_set()) {
        prop_assert_eq!(additive_energy(&a), brute_energy(&a, 2));
        prop_assert_eq!(cubic_energy(&a, &a).to_string(), brute_energy(&a, 3).to_string());
        let e3 = energy_s(&a, &a, &Rational::from(3i64)).unwrap();
        prop_assert_eq!(e3.as_u128(), Some(brute_energy(&a, 3)));
    }

    #[test]
    fn mult_energy_counts_quadruples(a in positive_set()) {
        let xs = a.elements();
        let mut n = 0u128;
        for x in xs { for y in xs { for z in xs { for w in xs {
            n += (x * w == y * z) as u128;
        }}}}
        prop_assert_eq!(mult_energy(&a).unwrap().as_u128(), Some(n));
    }
}
