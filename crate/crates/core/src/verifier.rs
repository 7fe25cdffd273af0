//! Witness search: given a coloring of `[n]`, look for a `k`-set `A` with
//! `ΣA <= n` (equivalently `S(A) ⊆ [n]`) whose finite sums share a color.
//!
//! Candidates are visited by depth-first search over ascending elements. The
//! running sum set only grows along a branch, so a branch dies as soon as it
//! holds both colors. Work is split into blocks by the smallest element; the
//! canonical (lexicographically first) witness is the first one of the
//! lowest block that has any, whatever the worker count.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rug::Integer;

use crate::bitset;
use crate::bounds::new_lower_bound;
use crate::coloring::{doubling_coloring, Color, Coloring, ColoringKind};
use crate::error::{Error, Result};
use crate::sumset::{split_dyadic, write_list, KSet};

/// Largest `n` accepted for an explicit-range verification run.
pub const MAX_DESK_N: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Generic,
    /// Also drops prefixes with a repeated subset sum or an odd-part parity
    /// conflict. Sound only on doubling colorings, where such sum sets always
    /// contain some `y` and `2y`.
    SumDistinctPruned,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Generic => "generic",
            Mode::SumDistinctPruned => "sum-distinct-pruned",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(Mode::Generic),
            "sum-distinct-pruned" | "pruned" => Ok(Mode::SumDistinctPruned),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// A `k`-set whose finite sums lie in `[n]` and share one color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub a: KSet,
    pub color: Color,
    pub sum_total: u64,
}

impl Witness {
    /// `witness a=<list> color=<c> n=<n> seed=<seed> kind=<kind>`
    pub fn report_line(&self, c: &Coloring) -> String {
        format!(
            "witness a={} color={} n={} seed={} kind={}",
            self.a,
            self.color,
            c.n(),
            c.seed(),
            c.kind()
        )
    }
}

/// Result of a full scan of one coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanResult {
    /// Canonical first witness.
    pub first: Option<Witness>,
    /// Number of witness sets (the count `X`).
    pub witnesses: u64,
    /// DFS nodes generated: prefixes of size `1..=k` that passed the sum bound.
    pub candidates: u64,
}

/// Outcome of a first-witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstWitness {
    pub witness: Option<Witness>,
    /// DFS nodes generated in canonical order up to the witness (all of them when none).
    pub candidates: u64,
}

/// Elements of a witness and its color.
type Found = Option<(Vec<u64>, Color)>;

struct Dfs<'a> {
    n: usize,
    k: usize,
    mode: Mode,
    red: &'a [u64],
    blue: &'a [u64],
    layers: Vec<Vec<u64>>,
    counts: Vec<u64>,
    parity: Vec<u8>,
    undo: Vec<usize>,
    chosen: Vec<u64>,
    stop_at_first: bool,
    cancel: Option<(&'a AtomicU64, u64)>,
    candidates: u64,
    witnesses: u64,
    first: Found,
    cancelled: bool,
}

enum Step {
    Continue,
    Stop,
}

impl<'a> Dfs<'a> {
    fn new(c: &Coloring, red: &'a [u64], blue: &'a [u64], k: usize, mode: Mode) -> Self {
        let n = c.n() as usize;
        let words = bitset::words_for(n);
        Self {
            n,
            k,
            mode,
            red,
            blue,
            layers: vec![vec![0u64; words]; k + 1],
            counts: vec![0; k + 1],
            parity: if mode == Mode::SumDistinctPruned {
                vec![0; n + 1]
            } else {
                Vec::new()
            },
            undo: Vec::new(),
            chosen: Vec::with_capacity(k),
            stop_at_first: false,
            cancel: None,
            candidates: 0,
            witnesses: 0,
            first: None,
            cancelled: false,
        }
    }

    /// Sum bound: `x` plus the `r - 1` next integers must fit in `budget`.
    #[inline]
    fn fits(x: u64, r: u64, budget: u64) -> bool {
        r * x + r * (r - 1) / 2 <= budget
    }

    fn block(&mut self, a1: u64) -> Step {
        self.extend(0, a1, 0, None)
    }

    fn descend(&mut self, depth: usize, start: u64, partial: u64, color: Color) -> Step {
        let r = (self.k - depth) as u64;
        let budget = self.n as u64 - partial;
        let mut x = start;
        while Self::fits(x, r, budget) {
            if let Step::Stop = self.extend(depth, x, partial, Some(color)) {
                return Step::Stop;
            }
            x += 1;
        }
        Step::Continue
    }

    fn extend(&mut self, depth: usize, x: u64, partial: u64, color: Option<Color>) -> Step {
        if let Some((best, mine)) = self.cancel {
            if best.load(Ordering::Relaxed) < mine {
                self.cancelled = true;
                return Step::Stop;
            }
        }
        self.candidates += 1;

        let (lower, upper) = self.layers.split_at_mut(depth + 1);
        let prev = &lower[depth];
        let next = &mut upper[0];
        next.copy_from_slice(prev);
        bitset::or_shifted(next, prev, x as usize);
        bitset::set(next, x as usize);
        let count = bitset::count(next);
        self.counts[depth + 1] = count;

        let undo_mark = self.undo.len();
        if self.mode == Mode::SumDistinctPruned {
            if count != 2 * self.counts[depth] + 1 {
                return Step::Continue;
            }
            if self.parity_conflict(depth) {
                self.rollback(undo_mark);
                return Step::Continue;
            }
        }

        let color = color.unwrap_or_else(|| {
            if bitset::get(self.blue, x as usize) {
                Color::Blue
            } else {
                Color::Red
            }
        });
        let other = match color {
            Color::Red => self.blue,
            Color::Blue => self.red,
        };
        let next = &self.layers[depth + 1];
        if next.iter().zip(other).any(|(s, o)| s & o != 0) {
            self.rollback(undo_mark);
            return Step::Continue;
        }

        self.chosen.push(x);
        let step = if depth + 1 == self.k {
            self.witnesses += 1;
            if self.first.is_none() {
                self.first = Some((self.chosen.clone(), color));
            }
            if self.stop_at_first {
                Step::Stop
            } else {
                Step::Continue
            }
        } else {
            self.descend(depth + 1, x + 1, partial + x, color)
        };
        self.chosen.pop();
        self.rollback(undo_mark);
        step
    }

    /// Records the exponent parity of each new sum's odd part; `true` on a clash.
    fn parity_conflict(&mut self, depth: usize) -> bool {
        let prev = &self.layers[depth];
        let next = &self.layers[depth + 1];
        for (i, (p, q)) in prev.iter().zip(next).enumerate() {
            let mut fresh = q & !p;
            while fresh != 0 {
                let v = (i * bitset::WORD + fresh.trailing_zeros() as usize) as u64;
                fresh &= fresh - 1;
                let d = split_dyadic(v);
                let tag = 1 + (d.exponent % 2) as u8;
                let slot = &mut self.parity[d.odd_part as usize];
                if *slot == 0 {
                    *slot = tag;
                    self.undo.push(d.odd_part as usize);
                } else if *slot != tag {
                    return true;
                }
            }
        }
        false
    }

    fn rollback(&mut self, mark: usize) {
        for t in self.undo.drain(mark..) {
            self.parity[t] = 0;
        }
    }
}

fn check_request(c: &Coloring, k: usize, mode: Mode) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if mode == Mode::SumDistinctPruned && c.kind() != ColoringKind::Doubling {
        return Err(Error::PruneNeedsDoubling(c.kind().to_string()));
    }
    Ok(())
}

/// Smallest-element values that can start a `k`-set with sum at most `n`.
fn first_elements(n: u64, k: usize) -> impl IndexedParallelIterator<Item = u64> {
    let range = first_element_range(n, k);
    (range.start as usize..range.end as usize)
        .into_par_iter()
        .map(|a1| a1 as u64)
}

fn first_element_range(n: u64, k: usize) -> std::ops::Range<u64> {
    let r = k as u64;
    let top = if Dfs::fits(1, r, n) {
        (n - r * (r - 1) / 2) / r
    } else {
        0
    };
    1..top + 1
}

fn witness_from(found: Found) -> Result<Option<Witness>> {
    found
        .map(|(elems, color)| {
            let a = KSet::new(elems)?;
            Ok(Witness {
                sum_total: a.total(),
                a,
                color,
            })
        })
        .transpose()
}

/// Canonical first witness, with an early stop shared across workers.
pub fn search_first(c: &Coloring, k: usize, mode: Mode) -> Result<FirstWitness> {
    check_request(c, k, mode)?;
    let (red, blue) = c.masks();
    let best = AtomicU64::new(u64::MAX);
    let blocks: Vec<(u64, u64, Found, bool)> = first_elements(c.n(), k)
        .map(|a1| {
            if best.load(Ordering::Relaxed) < a1 {
                return (a1, 0, None, true);
            }
            let mut dfs = Dfs::new(c, &red, &blue, k, mode);
            dfs.stop_at_first = true;
            dfs.cancel = Some((&best, a1));
            dfs.block(a1);
            if dfs.first.is_some() {
                best.fetch_min(a1, Ordering::Relaxed);
            }
            (a1, dfs.candidates, dfs.first, dfs.cancelled)
        })
        .collect();

    let mut candidates = 0;
    for (a1, count, found, cancelled) in blocks {
        // Blocks below the winner never see a smaller `best`, so they ran to completion.
        debug_assert!(!cancelled || found.is_none());
        if cancelled {
            break;
        }
        candidates += count;
        if found.is_some() {
            debug_assert_eq!(a1, best.load(Ordering::Relaxed));
            return Ok(FirstWitness {
                witness: witness_from(found)?,
                candidates,
            });
        }
    }
    Ok(FirstWitness {
        witness: None,
        candidates,
    })
}

/// Lexicographically first witness, or `None` when `c` is witness-free for `k`.
pub fn find_witness(c: &Coloring, k: usize, mode: Mode) -> Result<Option<Witness>> {
    Ok(search_first(c, k, mode)?.witness)
}

/// Full enumeration: first witness plus the total witness count.
pub fn scan_coloring(c: &Coloring, k: usize, mode: Mode) -> Result<ScanResult> {
    check_request(c, k, mode)?;
    let (red, blue) = c.masks();
    let blocks: Vec<(u64, u64, Found)> = first_elements(c.n(), k)
        .map(|a1| {
            let mut dfs = Dfs::new(c, &red, &blue, k, mode);
            dfs.block(a1);
            (dfs.candidates, dfs.witnesses, dfs.first)
        })
        .collect();
    let mut out = ScanResult {
        first: None,
        witnesses: 0,
        candidates: 0,
    };
    for (candidates, witnesses, first) in blocks {
        out.candidates += candidates;
        out.witnesses += witnesses;
        if out.first.is_none() && first.is_some() {
            out.first = witness_from(first)?;
        }
    }
    Ok(out)
}

/// Number of `k`-subsets of `[n]` with element sum at most `n`.
pub fn count_candidates(n: u64, k: usize) -> Integer {
    if k == 0 {
        return Integer::from(1);
    }
    let r = k as u64;
    if r * (r + 1) / 2 > n {
        return Integer::ZERO;
    }
    let n = n as usize;
    // ways[j][s]: j-subsets of the elements seen so far with sum exactly s.
    let mut ways = vec![vec![Integer::ZERO; n + 1]; k + 1];
    ways[0][0] = Integer::from(1);
    for x in 1..=n {
        for j in (1..=k.min(x)).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            let (src, dst) = (&lower[j - 1], &mut upper[0]);
            for s in (x..=n).rev() {
                if src[s - x] != 0 {
                    dst[s] += &src[s - x];
                }
            }
        }
    }
    ways[k].iter().sum()
}

/// Per-seed line of a verification run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedResult {
    pub seed: u64,
    pub witnesses: u64,
    pub candidates: u64,
    pub first: Option<Witness>,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub n: u64,
    pub k: usize,
    pub mode: Mode,
    pub colorings_checked: u64,
    /// Total number of witness sets over all colorings.
    pub witnesses_found: u64,
    pub candidates_enumerated: u64,
    pub per_seed: Vec<SeedResult>,
    /// Wall time; kept out of the canonical text so reports stay reproducible.
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.witnesses_found == 0
    }

    pub fn summary_line(&self) -> String {
        format!(
            "verify k={} n={} mode={} colorings={} witnesses={} candidates={} result={}",
            self.k,
            self.n,
            self.mode,
            self.colorings_checked,
            self.witnesses_found,
            self.candidates_enumerated,
            if self.passed() {
                "witness-free"
            } else {
                "witnessed"
            }
        )
    }

    /// Summary, then one line per seed (and its first witness) when `verbose`.
    pub fn render(&self, verbose: bool) -> String {
        let mut out = self.summary_line();
        out.push('\n');
        if verbose {
            for s in &self.per_seed {
                out.push_str(&format!(
                    "seed={} witnesses={} candidates={}\n",
                    s.seed, s.witnesses, s.candidates
                ));
                if let Some(w) = &s.first {
                    let mut list = String::new();
                    write_list(&mut list, w.a.elements()).expect("writing to a String");
                    out.push_str(&format!(
                        "witness a={} color={} n={} seed={} kind={}\n",
                        list,
                        w.color,
                        self.n,
                        s.seed,
                        ColoringKind::Doubling
                    ));
                }
            }
        }
        out
    }
}

/// The lower-bound regime: `n = floor(2^(2^(k-1)/k))` for `4 <= k <= 7`.
pub fn theorem_n(k: usize, mode: Mode) -> Result<u64> {
    if k < 4 {
        return Err(Error::InvalidArgument(format!(
            "the doubling-coloring argument covers k >= 4, got k = {k}; use the exact search for small k"
        )));
    }
    if k >= 8 {
        let log2n = (1u64 << (k.min(64) - 1)) as f64 / k as f64;
        return Err(Error::BeyondDeskScale(format!(
            "k = {k} gives n = 2^{log2n:.3}, too large for exhaustive enumeration; \
             sample colorings with `prob` or use the bound table instead"
        )));
    }
    if k == 7 && mode == Mode::Generic {
        return Err(Error::BeyondDeskScale(
            "generic mode at k = 7, n = 565 is out of budget; use sum-distinct-pruned".into(),
        ));
    }
    let n = new_lower_bound(k as u32)?;
    Ok(n.to_u64().expect("k <= 7 keeps n small"))
}

/// Checks seeded doubling colorings of `[n]`, `n` from [`theorem_n`].
pub fn verify_theorem(k: usize, seeds: &[u64], mode: Mode) -> Result<VerificationReport> {
    let n = theorem_n(k, mode)?;
    verify_doubling(n, k, seeds, mode)
}

/// [`verify_theorem`] with seeds `0..num_seeds`.
pub fn verify_theorem_seeds(k: usize, num_seeds: u64, mode: Mode) -> Result<VerificationReport> {
    let seeds: Vec<u64> = (0..num_seeds).collect();
    verify_theorem(k, &seeds, mode)
}

/// Scans seeded doubling colorings of an explicit `[n]`.
pub fn verify_doubling(n: u64, k: usize, seeds: &[u64], mode: Mode) -> Result<VerificationReport> {
    if n == 0 || n > MAX_DESK_N {
        return Err(Error::BeyondDeskScale(format!(
            "explicit n must lie in [1, {MAX_DESK_N}], got {n}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let started = Instant::now();
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let c = doubling_coloring(n, seed)?;
            let scan = scan_coloring(&c, k, mode)?;
            Ok(SeedResult {
                seed,
                witnesses: scan.witnesses,
                candidates: scan.candidates,
                first: scan.first,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        n,
        k,
        mode,
        colorings_checked: per_seed.len() as u64,
        witnesses_found: per_seed.iter().map(|s| s.witnesses).sum(),
        candidates_enumerated: per_seed.iter().map(|s| s.candidates).sum(),
        per_seed,
        elapsed: started.elapsed(),
    })
}
