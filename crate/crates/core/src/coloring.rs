//! Red/blue colorings of `[n]`: the uniform coloring, the doubling coloring
//! (odd elements get independent fair colors and `color(2x) != color(x)`),
//! and exact monochromatic probabilities of `S(A)` under the doubling law.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bitset;
use crate::error::{Error, Result};
use crate::sumset::{finite_sums, split_dyadic, KSet, SumSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red = 0,
    Blue = 1,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    fn from_bit(bit: bool) -> Self {
        if bit {
            Color::Blue
        } else {
            Color::Red
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Red => "red",
            Color::Blue => "blue",
        })
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            other => Err(Error::Parse(format!("unknown color {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColoringKind {
    Uniform,
    Doubling,
}

impl fmt::Display for ColoringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColoringKind::Uniform => "uniform",
            ColoringKind::Doubling => "doubling",
        })
    }
}

impl FromStr for ColoringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ColoringKind::Uniform),
            "doubling" => Ok(ColoringKind::Doubling),
            other => Err(Error::Parse(format!("unknown coloring kind {other:?}"))),
        }
    }
}

/// Seeded counter-based bit source.
///
/// Bit `i` of the stream for a seed is bit `i % 32` of ChaCha8 word `i / 32`,
/// so any bit can be read without generating its predecessors and every
/// prefix of the stream is independent of how much of it is consumed.
#[derive(Debug, Clone)]
pub struct CounterBits {
    rng: ChaCha8Rng,
}

impl CounterBits {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Random access to bit `index`.
    pub fn bit(&mut self, index: u64) -> bool {
        self.rng.set_word_pos(u128::from(index / 32));
        (self.rng.next_u32() >> (index % 32)) & 1 == 1
    }

    /// The first `len` bits, packed 32 per word.
    pub fn prefix(&mut self, len: u64) -> Vec<u32> {
        self.rng.set_word_pos(0);
        (0..len.div_ceil(32)).map(|_| self.rng.next_u32()).collect()
    }
}

#[inline]
fn packed_bit(words: &[u32], index: u64) -> bool {
    (words[(index / 32) as usize] >> (index % 32)) & 1 == 1
}

/// A red/blue assignment on `[n]`. Red is 0, blue is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    n: u64,
    /// Value-indexed: bit `x` set iff `x` is blue; bit 0 is unused.
    blue: Vec<u64>,
    kind: ColoringKind,
    seed: u64,
    note: Option<String>,
}

impl Coloring {
    /// Builds a coloring from explicit colors of `1..=n` (`colors[i]` colors `i + 1`).
    pub fn from_colors(kind: ColoringKind, seed: u64, colors: &[Color]) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidArgument("a coloring needs n >= 1".into()));
        }
        let n = colors.len() as u64;
        let mut blue = vec![0u64; bitset::words_for(n as usize)];
        for (i, c) in colors.iter().enumerate() {
            if *c == Color::Blue {
                bitset::set(&mut blue, i + 1);
            }
        }
        let coloring = Self {
            n,
            blue,
            kind,
            seed,
            note: None,
        };
        if kind == ColoringKind::Doubling {
            coloring.check_doubling()?;
        }
        Ok(coloring)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn kind(&self) -> ColoringKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// Color of `x`; panics outside `[1, n]`.
    pub fn color(&self, x: u64) -> Color {
        assert!(x >= 1 && x <= self.n, "{x} outside [1, {}]", self.n);
        Color::from_bit(bitset::get(&self.blue, x as usize))
    }

    pub fn get(&self, x: u64) -> Option<Color> {
        (x >= 1 && x <= self.n).then(|| self.color(x))
    }

    pub fn colors(&self) -> Vec<Color> {
        (1..=self.n).map(|x| self.color(x)).collect()
    }

    pub fn count(&self, color: Color) -> u64 {
        let blue = bitset::count(&self.blue);
        match color {
            Color::Blue => blue,
            Color::Red => self.n - blue,
        }
    }

    /// Value-indexed color masks over `0..=n`, as `(red, blue)`.
    pub(crate) fn masks(&self) -> (Vec<u64>, Vec<u64>) {
        let mut red: Vec<u64> = self.blue.iter().map(|w| !w).collect();
        let len = self.n as usize + 1;
        let tail = len % bitset::WORD;
        if tail != 0 {
            *red.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        red[0] &= !1;
        (red, self.blue.clone())
    }

    fn check_doubling(&self) -> Result<()> {
        for x in 1..=self.n / 2 {
            if self.color(2 * x) == self.color(x) {
                return Err(Error::InvalidArgument(format!(
                    "not a doubling coloring: {x} and {} share a color",
                    2 * x
                )));
            }
        }
        Ok(())
    }

    /// The versioned two-line text form.
    pub fn encode(&self) -> String {
        let mut out = format!(
            "folkman-coloring v1 n={} kind={} seed={}",
            self.n, self.kind, self.seed
        );
        if let Some(note) = &self.note {
            out.push_str(" # ");
            out.push_str(note);
        }
        out.push('\n');
        let digits = self.n.div_ceil(4);
        out.reserve(digits as usize + 1);
        for j in 0..digits {
            let mut nibble = 0u32;
            for r in 0..4 {
                let x = 4 * j + r + 1;
                if x <= self.n && bitset::get(&self.blue, x as usize) {
                    nibble |= 1 << r;
                }
            }
            out.push(char::from_digit(nibble, 16).unwrap());
        }
        out.push('\n');
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty coloring file".into()))?;
        let (fields, note) = match header.split_once(" # ") {
            Some((f, c)) => (f, Some(c.trim().to_string())),
            None => (header, None),
        };
        let mut tokens = fields.split_whitespace();
        if tokens.next() != Some("folkman-coloring") || tokens.next() != Some("v1") {
            return Err(Error::Parse(format!("bad coloring header {header:?}")));
        }
        let mut n = None;
        let mut kind = None;
        let mut seed = None;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {tok:?}")))?;
            let bad = || Error::Parse(format!("bad value in {tok:?}"));
            match key {
                "n" => n = Some(value.parse::<u64>().map_err(|_| bad())?),
                "kind" => kind = Some(value.parse::<ColoringKind>()?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(Error::Parse(format!("unknown header field {key:?}"))),
            }
        }
        let missing = |f: &str| Error::Parse(format!("coloring header lacks {f}"));
        let n = n.ok_or_else(|| missing("n"))?;
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;
        if n == 0 {
            return Err(Error::Parse("coloring with n = 0".into()));
        }
        let hex = lines.next().unwrap_or("").trim();
        if hex.len() as u64 != n.div_ceil(4) {
            return Err(Error::Parse(format!(
                "expected {} hex digits for n={n}, found {}",
                n.div_ceil(4),
                hex.len()
            )));
        }
        let mut colors = Vec::with_capacity(n as usize);
        for (j, ch) in hex.chars().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))?;
            for r in 0..4u64 {
                let x = 4 * j as u64 + r + 1;
                let bit = (nibble >> r) & 1 == 1;
                if x <= n {
                    colors.push(Color::from_bit(bit));
                } else if bit {
                    return Err(Error::Parse("padding bits beyond n must be zero".into()));
                }
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after hex line".into()));
        }
        let mut coloring = Self::from_colors(kind, seed, &colors)?;
        coloring.note = note;
        Ok(coloring)
    }
}

/// Odd elements take independent fair bits; `color(2^j t) = base(t) xor (j mod 2)`.
///
/// `base(t)` is stream bit `(t - 1) / 2`, so colorings of different `n` with the
/// same seed agree on their common prefix.
pub fn doubling_coloring(n: u64, seed: u64) -> Result<Coloring> {
    if n == 0 {
        return Err(Error::InvalidArgument("a coloring needs n >= 1".into()));
    }
    let odd_count = n.div_ceil(2);
    let stream = CounterBits::new(seed).prefix(odd_count);
    let mut blue = vec![0u64; bitset::words_for(n as usize)];
    for x in 1..=n {
        let is_blue = if x % 2 == 1 {
            packed_bit(&stream, (x - 1) / 2)
        } else {
            !bitset::get(&blue, (x / 2) as usize)
        };
        if is_blue {
            bitset::set(&mut blue, x as usize);
        }
    }
    Ok(Coloring {
        n,
        blue,
        kind: ColoringKind::Doubling,
        seed,
        note: None,
    })
}

/// `n` independent fair bits; element `i` takes stream bit `i - 1`.
pub fn uniform_coloring(n: u64, seed: u64) -> Result<Coloring> {
    if n == 0 {
        return Err(Error::InvalidArgument("a coloring needs n >= 1".into()));
    }
    let stream = CounterBits::new(seed).prefix(n);
    let mut blue = vec![0u64; bitset::words_for(n as usize)];
    for x in 1..=n {
        if packed_bit(&stream, x - 1) {
            bitset::set(&mut blue, x as usize);
        }
    }
    Ok(Coloring {
        n,
        blue,
        kind: ColoringKind::Uniform,
        seed,
        note: None,
    })
}

/// The common color of every member of `s`, if there is one.
pub fn is_monochromatic(c: &Coloring, s: &SumSet) -> Result<Option<Color>> {
    if s.max() > c.n() {
        return Err(Error::OutOfRange {
            value: s.max(),
            n: c.n(),
        });
    }
    let members = s.words();
    let any_blue = members.iter().zip(&c.blue).any(|(m, b)| m & b != 0);
    let any_red = members.iter().zip(&c.blue).any(|(m, b)| m & !b != 0);
    Ok(match (any_red, any_blue) {
        (false, true) => Some(Color::Blue),
        (true, false) => Some(Color::Red),
        _ => None,
    })
}

/// Probability that `S(A)` is monochromatic under the doubling coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonoProbability {
    /// `Some(e)` for probability `2^e`, `None` for probability 0.
    pub log2: Option<i64>,
    /// Number of distinct odd parts among the members of `S(A)`.
    pub distinct_odd_parts: u64,
}

impl MonoProbability {
    pub fn is_zero(&self) -> bool {
        self.log2.is_none()
    }

    pub fn value(&self) -> f64 {
        self.log2.map_or(0.0, |e| (e as f64).exp2())
    }

    /// `true` iff the probability is at most `2^e`.
    pub fn at_most_pow2(&self, e: i64) -> bool {
        self.log2.is_none_or(|p| p <= e)
    }
}

impl fmt::Display for MonoProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log2 {
            None => f.write_str("0"),
            Some(e) => write!(f, "2^{e}"),
        }
    }
}

/// Exact probability via parity grouping.
///
/// Under the doubling law `color(2^j t) = base(t) xor (j mod 2)`, so `S(A)` is
/// monochromatic iff inside each odd-part group all exponents share a parity
/// and the `d` free base bits line up, one way per color: `2 / 2^d`.
pub fn exact_mono_probability(a: &KSet) -> Result<MonoProbability> {
    let s = finite_sums(a)?;
    Ok(mono_probability_of(&s))
}

pub fn mono_probability_of(s: &SumSet) -> MonoProbability {
    let words = bitset::words_for(s.total() as usize);
    let mut even = vec![0u64; words];
    let mut odd = vec![0u64; words];
    let mut distinct = 0u64;
    let mut conflict = false;
    for v in s.iter() {
        let d = split_dyadic(v);
        let t = d.odd_part as usize;
        let (mine, other) = if d.exponent.is_multiple_of(2) {
            (&mut even, &odd)
        } else {
            (&mut odd, &even)
        };
        if bitset::get(other, t) {
            conflict = true;
        }
        if !bitset::get(mine, t) && !bitset::get(other, t) {
            distinct += 1;
        }
        bitset::set(mine, t);
    }
    MonoProbability {
        log2: (!conflict).then(|| 1 - distinct as i64),
        distinct_odd_parts: distinct,
    }
}

/// Monte Carlo tally of monochromatic `S(A)` over seeded doubling colorings of `[ΣA]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub hits: u64,
    pub trials: u64,
}

impl MonteCarlo {
    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// `|hits - trials p|` in units of the binomial standard deviation; a zero-variance
    /// law gives 0 on exact agreement and infinity otherwise.
    pub fn deviation(&self, p: f64) -> f64 {
        let mean = self.trials as f64 * p;
        let sd = (self.trials as f64 * p * (1.0 - p)).sqrt();
        let diff = (self.hits as f64 - mean).abs();
        if sd == 0.0 {
            if diff < 0.5 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sd
        }
    }
}

/// Seeds `first_seed .. first_seed + trials`.
pub fn monte_carlo_mono(a: &KSet, trials: u64, first_seed: u64) -> Result<MonteCarlo> {
    let s = finite_sums(a)?;
    let n = a.total();
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| {
            let c = doubling_coloring(n, first_seed.wrapping_add(i))?;
            Ok(u64::from(is_monochromatic(&c, &s)?.is_some()))
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;
    Ok(MonteCarlo { hits, trials })
}
