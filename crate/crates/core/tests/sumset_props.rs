use std::collections::BTreeSet;

use folkman_core::sumset::{
    dyadic, equal_sum_disjoint_pair, finite_sums, is_sum_distinct, prime_scaled_family,
    representative_set, KSet,
};
use proptest::collection::btree_set;
use proptest::prelude::*;

fn naive_sums(a: &[u64]) -> BTreeSet<u64> {
    (1u32..1 << a.len())
        .map(|m| (0..a.len()).filter(|i| m >> i & 1 == 1).map(|i| a[i]).sum())
        .collect()
}

fn kset(max_k: usize, max_elem: u64) -> impl Strategy<Value = KSet> {
    btree_set(1..=max_elem, 1..=max_k).prop_map(|s| KSet::new(s.into_iter().collect()).unwrap())
}

/// Sets whose elements grow fast enough to make sum collisions rare.
fn spread_kset(max_k: usize) -> impl Strategy<Value = KSet> {
    btree_set(1u64..1 << 24, 1..=max_k).prop_map(|s| KSet::new(s.into_iter().collect()).unwrap())
}

proptest! {
    #[test]
    fn finite_sums_match_subset_enumeration(a in kset(12, 2000)) {
        let s = finite_sums(&a).unwrap();
        let naive = naive_sums(a.elements());
        prop_assert_eq!(s.to_vec(), naive.into_iter().collect::<Vec<_>>());
        prop_assert_eq!(s.max(), a.total());
        prop_assert_eq!(s.min(), KSet::min(&a));
    }

    #[test]
    fn pair_exists_iff_sums_collide(a in kset(8, 60)) {
        let s = finite_sums(&a).unwrap();
        let full = s.count() == (1u64 << a.k()) - 1;
        prop_assert_eq!(is_sum_distinct(&a).unwrap(), full);
        match equal_sum_disjoint_pair(&a).unwrap() {
            None => prop_assert!(full),
            Some(p) => {
                prop_assert!(!full);
                prop_assert_eq!(p.first.iter().sum::<u64>(), p.sum);
                prop_assert_eq!(p.second.iter().sum::<u64>(), p.sum);
                prop_assert!(p.first.iter().all(|x| !p.second.contains(x)));
            }
        }
    }

    #[test]
    fn representatives_of_sum_distinct_sets(a in spread_kset(7)) {
        prop_assume!(is_sum_distinct(&a).unwrap());
        let s = finite_sums(&a).unwrap();
        let b = representative_set(&s);
        prop_assert!(b.len() as u64 >= 1u64 << (a.k() - 1));
        let odd: BTreeSet<u64> = s.iter().map(|v| v >> v.trailing_zeros()).collect();
        prop_assert_eq!(odd.len(), b.len());
        for v in &b {
            prop_assert!(s.contains(*v));
            let t = v >> v.trailing_zeros();
            prop_assert!(s.iter().all(|w| w >> w.trailing_zeros() != t || w >= *v));
        }
    }

    #[test]
    fn half_the_subsets_hit_the_minimal_exponent(a in kset(10, 4096)) {
        let s_min = a.elements().iter().map(|x| x.trailing_zeros()).min().unwrap();
        let subsets: Vec<u64> = (1u32..1 << a.k())
            .map(|m| (0..a.k()).filter(|i| m >> i & 1 == 1).map(|i| a.elements()[i]).sum())
            .collect();
        let hits: Vec<u64> = subsets.iter().copied().filter(|v| v.trailing_zeros() == s_min).collect();
        prop_assert_eq!(hits.len() as u64, 1u64 << (a.k() - 1));
        if is_sum_distinct(&a).unwrap() {
            let distinct: BTreeSet<u64> = hits.into_iter().collect();
            prop_assert_eq!(distinct.len() as u64, 1u64 << (a.k() - 1));
        }
    }

    #[test]
    fn dyadic_round_trips(m in 1u64..u64::MAX) {
        let d = dyadic(m).unwrap();
        prop_assert_eq!(d.odd_part % 2, 1);
        prop_assert_eq!(d.value(), m);
        prop_assert_eq!(d.odd_part << d.exponent, m);
    }

    #[test]
    fn kset_text_round_trips(a in kset(12, 1 << 40)) {
        let back: KSet = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn exhaustive_pigeonhole_up_to_twenty() {
    for mask in 1u32..(1 << 20) {
        let size = mask.count_ones();
        if !(1..=5).contains(&size) {
            continue;
        }
        let elems: Vec<u64> = (0..20)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| i + 1)
            .collect();
        let a = KSet::new(elems.clone()).unwrap();
        let none = equal_sum_disjoint_pair(&a).unwrap().is_none();
        assert_eq!(none, naive_sums(&elems).len() == (1 << size) - 1, "{a}");
    }
}

#[test]
fn progressions_partition_the_interval() {
    let n = 5000u64;
    let mut owner = vec![0u64; n as usize + 1];
    for t in (1..=n).step_by(2) {
        let mut x = t;
        while x <= n {
            assert_eq!(owner[x as usize], 0, "{x} in two progressions");
            owner[x as usize] = t;
            x *= 2;
        }
    }
    for x in 1..=n {
        assert_eq!(owner[x as usize], dyadic(x).unwrap().odd_part);
    }
}

#[test]
fn prime_family_members_are_disjoint_and_scaled() {
    let fam = prime_scaled_family(1_000_000, 4).unwrap();
    let base = finite_sums(&KSet::new(vec![1, 2, 3, 4]).unwrap())
        .unwrap()
        .to_vec();
    let mut all = BTreeSet::new();
    assert_eq!(fam.primes.len(), fam.members.len());
    for (p, m) in fam.primes.iter().zip(&fam.members) {
        assert!(*p > fam.interval.0 && *p <= fam.interval.1);
        let s = finite_sums(m).unwrap().to_vec();
        assert_eq!(s, base.iter().map(|v| v * p).collect::<Vec<_>>());
        for v in s {
            assert!(all.insert(v));
        }
    }
}

#[test]
fn rejects_malformed_sets() {
    assert!(KSet::new(vec![]).is_err());
    assert!(KSet::new(vec![0, 1]).is_err());
    assert!(KSet::new(vec![2, 1]).is_err());
    assert!(KSet::new(vec![1, 1]).is_err());
    assert!(KSet::new(vec![u64::MAX / 2, u64::MAX / 2 + 1]).is_err());
    assert!("1,,2".parse::<KSet>().is_err());
    assert!("1,x".parse::<KSet>().is_err());
}
