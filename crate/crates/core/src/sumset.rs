//! Finite-sum sets `S(A)` and the structure around them: sum-distinctness,
//! equal-sum disjoint subsets, odd parts, the geometric progressions
//! `G_m = {m, 2m, 4m, ...}` and least-element transversals of `S(A)`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::bitset;
use crate::error::{Error, Result};

/// Largest element sum accepted by [`finite_sums`]; the bitmap costs `total / 8` bytes.
pub const MAX_DENSE_TOTAL: u64 = 1 << 32;

/// A finite set of distinct positive integers, stored in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSet {
    elements: Vec<u64>,
    total: u64,
}

impl KSet {
    /// Builds a set from strictly increasing positive integers.
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidSet("a set needs at least one element".into()));
        }
        if elements[0] == 0 {
            return Err(Error::InvalidSet("elements must be positive".into()));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSet(format!(
                "elements must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let total = elements
            .iter()
            .try_fold(0u64, |acc, &x| acc.checked_add(x))
            .filter(|&t| t <= i64::MAX as u64)
            .ok_or(Error::SumOverflow)?;
        Ok(Self { elements, total })
    }

    /// Sorts the input first; duplicates are still rejected.
    pub fn from_unordered(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elements.into_iter().collect();
        v.sort_unstable();
        Self::new(v)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn k(&self) -> usize {
        self.elements.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn min(&self) -> u64 {
        self.elements[0]
    }

    pub fn max(&self) -> u64 {
        self.elements[self.elements.len() - 1]
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.elements)
    }
}

impl FromStr for KSet {
    type Err = Error;

    /// Parses the line format `a1,a2,...,ak` (ascending, whitespace around commas allowed).
    fn from_str(s: &str) -> Result<Self> {
        let elements = s
            .trim()
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("not a positive integer: {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }
}

/// Parses one set per line, skipping blank lines and `#` comments.
pub fn parse_kset_lines(text: &str) -> Result<Vec<KSet>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(KSet::from_str)
        .collect()
}

pub(crate) fn write_list(f: &mut impl fmt::Write, values: &[u64]) -> fmt::Result {
    for (i, x) in values.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// `S(A)` as a dense bitmap over `[1, total]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumSet {
    bits: Vec<u64>,
    total: u64,
    count: u64,
    generator_k: usize,
}

impl SumSet {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct subset sums.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn generator_k(&self) -> usize {
        self.generator_k
    }

    pub fn contains(&self, v: u64) -> bool {
        v <= self.total && bitset::get(&self.bits, v as usize)
    }

    pub fn min(&self) -> u64 {
        bitset::lowest(&self.bits).expect("sum sets are nonempty") as u64
    }

    pub fn max(&self) -> u64 {
        self.total
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        bitset::ones(&self.bits).map(|v| v as u64)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }
}

/// All sums of nonempty subsets of `a`, by incremental shift-or.
pub fn finite_sums(a: &KSet) -> Result<SumSet> {
    let total = a.total();
    if total > MAX_DENSE_TOTAL {
        return Err(Error::SumSetTooLarge {
            total,
            limit: MAX_DENSE_TOTAL,
        });
    }
    let mut bits = vec![0u64; bitset::words_for(total as usize)];
    for &x in a.elements() {
        bitset::or_shifted_in_place(&mut bits, x as usize);
        bitset::set(&mut bits, x as usize);
    }
    let count = bitset::count(&bits);
    Ok(SumSet {
        bits,
        total,
        count,
        generator_k: a.k(),
    })
}

/// `true` iff all `2^k - 1` nonempty subset sums are distinct.
pub fn is_sum_distinct(a: &KSet) -> Result<bool> {
    let s = finite_sums(a)?;
    Ok(subsets_nonempty(a.k()).is_some_and(|full| s.count() == full))
}

/// `2^k - 1`, when it fits.
pub(crate) fn subsets_nonempty(k: usize) -> Option<u64> {
    1u64.checked_shl(k as u32).map(|p| p - 1)
}

/// Two disjoint nonempty subsets with the same element sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointPair {
    pub first: Vec<u64>,
    pub second: Vec<u64>,
    pub sum: u64,
}

impl fmt::Display for DisjointPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("({")?;
        write_list(f, &self.first)?;
        f.write_str("},{")?;
        write_list(f, &self.second)?;
        f.write_str("})")
    }
}

/// Finds an equal-sum disjoint pair, if `a` is not sum-distinct.
///
/// The collision sum is minimized first. At that sum every pair of distinct
/// representations is already disjoint (a shared element would give a smaller
/// collision). Each pair is oriented so that `first` holds the larger maximum,
/// then the lexicographically smallest `(first, second)` is returned.
pub fn equal_sum_disjoint_pair(a: &KSet) -> Result<Option<DisjointPair>> {
    let total = a.total();
    if total > MAX_DENSE_TOTAL {
        return Err(Error::SumSetTooLarge {
            total,
            limit: MAX_DENSE_TOTAL,
        });
    }
    let words = bitset::words_for(total as usize);
    let elems = a.elements();

    // prefix[i] holds the sums (including the empty sum 0) of subsets of elems[..i].
    let mut prefix: Vec<Vec<u64>> = Vec::with_capacity(elems.len() + 1);
    let mut current = vec![0u64; words];
    bitset::set(&mut current, 0);
    prefix.push(current.clone());
    let mut collision: Option<u64> = None;
    let mut shifted = vec![0u64; words];
    for &x in elems {
        shifted.iter_mut().for_each(|w| *w = 0);
        bitset::or_shifted(&mut shifted, &current, x as usize);
        let hit = current
            .iter()
            .zip(&shifted)
            .enumerate()
            .find(|(_, (c, s))| *c & *s != 0)
            .map(|(i, (c, s))| (i * bitset::WORD) as u64 + (c & s).trailing_zeros() as u64);
        if let Some(v) = hit {
            collision = Some(collision.map_or(v, |c| c.min(v)));
        }
        current.iter_mut().zip(&shifted).for_each(|(c, s)| *c |= s);
        prefix.push(current.clone());
    }
    let Some(target) = collision else {
        return Ok(None);
    };

    let mut reps: Vec<Vec<u64>> = Vec::new();
    let mut chosen: Vec<u64> = Vec::new();
    collect_representations(elems, &prefix, elems.len(), target, &mut chosen, &mut reps);
    debug_assert!(reps.len() >= 2);

    let mut best: Option<DisjointPair> = None;
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (first, second) = if reps[i].last() > reps[j].last() {
                (&reps[i], &reps[j])
            } else {
                (&reps[j], &reps[i])
            };
            let better = match &best {
                None => true,
                Some(b) => (first, second) < (&b.first, &b.second),
            };
            if better {
                best = Some(DisjointPair {
                    first: first.clone(),
                    second: second.clone(),
                    sum: target,
                });
            }
        }
    }
    Ok(best)
}

/// Every subset of `elems[..len]` with sum `target`, each reported ascending.
fn collect_representations(
    elems: &[u64],
    prefix: &[Vec<u64>],
    len: usize,
    target: u64,
    chosen: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if target == 0 {
        let mut rep = chosen.clone();
        rep.reverse();
        out.push(rep);
        return;
    }
    if len == 0 {
        return;
    }
    let x = elems[len - 1];
    let below = &prefix[len - 1];
    if target >= x && bitset::get(below, (target - x) as usize) {
        chosen.push(x);
        collect_representations(elems, prefix, len - 1, target - x, chosen, out);
        chosen.pop();
    }
    if bitset::get(below, target as usize) {
        collect_representations(elems, prefix, len - 1, target, chosen, out);
    }
}

/// `m = 2^exponent * odd_part` with `odd_part` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicDecomposition {
    pub odd_part: u64,
    pub exponent: u32,
}

impl DyadicDecomposition {
    pub fn value(&self) -> u64 {
        self.odd_part << self.exponent
    }
}

pub fn dyadic(m: u64) -> Result<DyadicDecomposition> {
    if m == 0 {
        return Err(Error::InvalidArgument("dyadic decomposition of 0".into()));
    }
    Ok(split_dyadic(m))
}

#[inline]
pub(crate) fn split_dyadic(m: u64) -> DyadicDecomposition {
    debug_assert!(m > 0);
    let exponent = m.trailing_zeros();
    DyadicDecomposition {
        odd_part: m >> exponent,
        exponent,
    }
}

/// Least element of `S(A) ∩ G_m` for every odd `m` where the intersection is
/// nonempty, in ascending order.
pub fn representative_set(s: &SumSet) -> Vec<u64> {
    let mut seen = vec![0u64; bitset::words_for(s.total() as usize)];
    let mut out = Vec::new();
    for v in s.iter() {
        let t = split_dyadic(v).odd_part as usize;
        if !bitset::get(&seen, t) {
            bitset::set(&mut seen, t);
            out.push(v);
        }
    }
    out
}

/// The family `{p, 2p, ..., kp}` over primes `p` in `[n / log2(n)^2, 2n / log2(n)^2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFamily {
    pub n: u64,
    pub k: usize,
    /// Floored endpoints of the prime interval.
    pub interval: (u64, u64),
    pub primes: Vec<u64>,
    pub members: Vec<KSet>,
    /// Primes dropped because their sum set met an earlier member's.
    pub overlapping: Vec<u64>,
}

impl PrimeFamily {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn prime_scaled_family(n: u64, k: usize) -> Result<PrimeFamily> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "prime family needs n >= 16, got {n}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let log2n = (n as f64).log2();
    let denom = log2n * log2n;
    let lo = (n as f64 / denom).floor() as u64;
    let hi = (2.0 * n as f64 / denom).floor() as u64;
    let triangle = (k as u64)
        .checked_mul(k as u64 + 1)
        .map(|t| t / 2)
        .ok_or(Error::SumOverflow)?;

    let mut family = PrimeFamily {
        n,
        k,
        interval: (lo, hi),
        primes: Vec::new(),
        members: Vec::new(),
        overlapping: Vec::new(),
    };
    let mut covered: HashSet<u64> = HashSet::new();
    for p in primes_up_to(hi).into_iter().filter(|&p| p >= lo) {
        if p.checked_mul(triangle).is_none_or(|t| t > n) {
            continue;
        }
        let set = KSet::new((1..=k as u64).map(|i| i * p).collect())?;
        let sums = finite_sums(&set)?;
        if sums.iter().any(|v| covered.contains(&v)) {
            family.overlapping.push(p);
            continue;
        }
        covered.extend(sums.iter());
        family.primes.push(p);
        family.members.push(set);
    }
    Ok(family)
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}
