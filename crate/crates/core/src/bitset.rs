//! Word-level helpers for value-indexed bitmaps (bit `v` stands for the integer `v`).

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(max_value: usize) -> usize {
    max_value / WORD + 1
}

#[inline]
pub(crate) fn get(words: &[u64], v: usize) -> bool {
    words
        .get(v / WORD)
        .is_some_and(|w| (w >> (v % WORD)) & 1 == 1)
}

#[inline]
pub(crate) fn set(words: &mut [u64], v: usize) {
    words[v / WORD] |= 1u64 << (v % WORD);
}

/// `dst |= src << shift`, truncated to the length of `dst`.
pub(crate) fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let word_shift = shift / WORD;
    let bit_shift = shift % WORD;
    if word_shift >= dst.len() {
        return;
    }
    for i in (word_shift..dst.len()).rev() {
        let j = i - word_shift;
        let mut w = src.get(j).copied().unwrap_or(0) << bit_shift;
        if bit_shift != 0 && j >= 1 {
            w |= src.get(j - 1).copied().unwrap_or(0) >> (WORD - bit_shift);
        }
        dst[i] |= w;
    }
}

/// `words |= words << shift`, in place.
pub(crate) fn or_shifted_in_place(words: &mut [u64], shift: usize) {
    let word_shift = shift / WORD;
    let bit_shift = shift % WORD;
    if word_shift >= words.len() {
        return;
    }
    for i in (word_shift..words.len()).rev() {
        let j = i - word_shift;
        let mut w = words[j] << bit_shift;
        if bit_shift != 0 && j >= 1 {
            w |= words[j - 1] >> (WORD - bit_shift);
        }
        words[i] |= w;
    }
}

pub(crate) fn count(words: &[u64]) -> u64 {
    words.iter().map(|w| u64::from(w.count_ones())).sum()
}

pub(crate) fn lowest(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
}

/// Ascending iterator over set bits.
pub(crate) fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD + b)
            }
        })
    })
}
