//! Bound arithmetic: the doubly exponential lower bound `⌊2^(2^(k-1)/k)⌋`
//! with a certified floor, the `2^(c k^2 / log k)` bound, and the
//! first-moment chain `E[X] <= C(n,k) 2^(1 - 2^(k-1)) <= 2 (e/k)^k`.

use std::fmt::Write as _;

use rug::float::Round;
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Largest `k` for which [`new_lower_bound`] produces the exact integer.
pub const EXACT_MAX_K: u32 = 30;

/// Largest `k` accepted by [`check_first_moment`].
pub const TABLE_MAX_K: u32 = 64;

/// Rows of the bound table up to this `k` evaluate `C(n, k)` on the exact `n`.
pub const TABLE_EXACT_MAX_K: u32 = 24;

const MAX_REFINEMENTS: u32 = 8;

/// `2^(k-1) / k`, the base-2 logarithm of the new bound.
pub fn lower_bound_exponent(k: u32) -> f64 {
    (f64::from(k) - 1.0).exp2() / f64::from(k)
}

/// An exact floor together with the enclosure that certifies it.
#[derive(Debug, Clone)]
pub struct CertifiedFloor {
    pub k: u32,
    pub floor: Integer,
    /// `2^(k-1)/k` is an integer (k is a power of two) and no rounding was involved.
    pub exact_power: bool,
    /// Working precision of the accepted enclosure, in bits.
    pub precision: u32,
    /// `lower < 2^(2^(k-1)/k) < upper`, with `floor <= lower` and `upper < floor + 1`.
    pub lower: Option<Float>,
    pub upper: Option<Float>,
}

/// `⌊2^(2^(k-1)/k)⌋` for `1 <= k <= EXACT_MAX_K`.
pub fn new_lower_bound(k: u32) -> Result<Integer> {
    Ok(certified_lower_bound(k)?.floor)
}

/// Writes `2^(k-1)/k = q + r/k`. For `r = 0` the value is `2^q`. Otherwise
/// `2^(r/k)` is irrational and is enclosed by a downward-rounded MPFR root
/// and its successor; the enclosure is scaled by `2^q` and refined by
/// doubling the precision until no integer separates the two ends.
pub fn certified_lower_bound(k: u32) -> Result<CertifiedFloor> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > EXACT_MAX_K {
        return Err(Error::PrecisionLimit {
            k,
            max: EXACT_MAX_K,
        });
    }
    let m = 1u64 << (k - 1);
    let q = (m / u64::from(k)) as u32;
    let r = (m % u64::from(k)) as u32;
    if r == 0 {
        return Ok(CertifiedFloor {
            k,
            floor: Integer::from(1) << q,
            exact_power: true,
            precision: 0,
            lower: None,
            upper: None,
        });
    }

    let mut precision = q + 64;
    for _ in 0..MAX_REFINEMENTS {
        let base = Float::with_val(precision, 1) << r;
        let (mut lower, dir) = Float::with_val_round(precision, base.root_ref(k), Round::Down);
        let mut upper = lower.clone();
        if dir != std::cmp::Ordering::Equal {
            upper.next_up();
        }
        lower <<= q;
        upper <<= q;
        let (floor, _) = lower
            .to_integer_round(Round::Down)
            .expect("finite enclosure");
        let next = Integer::from(&floor + 1u32);
        if upper < next {
            return Ok(CertifiedFloor {
                k,
                floor,
                exact_power: false,
                precision,
                lower: Some(lower),
                upper: Some(upper),
            });
        }
        precision = precision.saturating_mul(2);
    }
    Err(Error::BudgetExceeded(format!(
        "floor of 2^(2^{}/{k}) not separated after {MAX_REFINEMENTS} refinements",
        k - 1
    )))
}

/// `c k^2 / log2 k`, the base-2 logarithm of the earlier quadratic-exponent bound.
pub fn es_lower_bound(k: u32, c: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "log2 k vanishes at k = 1; need k >= 2".into(),
        ));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c must be positive, got {c}"
        )));
    }
    let k = f64::from(k);
    Ok(c * k * k / k.log2())
}

/// Least `k <= TABLE_MAX_K` from which `2^(k-1)/k > c k^2 / log2 k` holds for every
/// larger `k` up to `TABLE_MAX_K`.
pub fn dominance_crossover(c: f64) -> Result<Option<u32>> {
    let mut since = None;
    for k in 2..=TABLE_MAX_K {
        if lower_bound_exponent(k) > es_lower_bound(k, c)? {
            since.get_or_insert(k);
        } else {
            since = None;
        }
    }
    Ok(since)
}

/// Base-2 logarithm of a positive integer, from its top 64 bits.
pub fn log2_integer(n: &Integer) -> f64 {
    assert!(*n > 0, "log2 of a non-positive integer");
    let bits = n.significant_bits();
    if bits <= 64 {
        return n.to_f64().log2();
    }
    let shift = bits - 64;
    let top = Integer::from(n >> shift)
        .to_u64()
        .expect("64 significant bits");
    f64::from(shift) + (top as f64).log2()
}

/// `log2 C(n, k)`, from the exact binomial; `-inf` when `n < k`.
pub fn log2_binomial(n: &Integer, k: u32) -> f64 {
    if *n < k {
        return f64::NEG_INFINITY;
    }
    log2_integer(&Integer::from(n.binomial_ref(k)))
}

/// `log2(C(n, k) 2^(1 - 2^(k-1)))`.
pub fn expectation_log_bound(k: u32, n: &Integer) -> Result<f64> {
    if k == 0 || k > TABLE_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {TABLE_MAX_K}], got {k}"
        )));
    }
    Ok(log2_binomial(n, k) + 1.0 - (f64::from(k) - 1.0).exp2())
}

/// `log2(2 (e/k)^k) = 1 + k (log2 e - log2 k)`.
pub fn chain_log_bound(k: u32) -> f64 {
    let k = f64::from(k);
    1.0 + k * (std::f64::consts::LOG2_E - k.log2())
}

/// One row of the first-moment table.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub k: u32,
    pub n_exact: Option<Integer>,
    /// `2^(k-1)/k`.
    pub log2_n: f64,
    pub log2_binom: f64,
    pub log2_expectation_bound: f64,
    pub log2_chain_bound: f64,
    pub pass: bool,
}

impl BoundReport {
    /// `n` in decimal when it fits in 64 bits, otherwise `2^<log2 n>`.
    pub fn n_or_log2n(&self) -> String {
        match &self.n_exact {
            Some(n) if n.significant_bits() <= 64 => n.to_string(),
            _ => format!("2^{:.6}", self.log2_n),
        }
    }
}

/// Row for `k`; exact `n` up to [`TABLE_EXACT_MAX_K`], log form beyond.
///
/// In log form `log2 C(n, k) <= k (log2 n - log2 k + log2 e)`; since
/// `k log2 n = 2^(k-1)` exactly, the expectation bound reduces to
/// `1 + k (log2 e - log2 k)` without subtracting two huge floats.
pub fn bound_report(k: u32) -> Result<BoundReport> {
    if k == 0 || k > TABLE_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {TABLE_MAX_K}], got {k}"
        )));
    }
    let log2_n = lower_bound_exponent(k);
    let chain = chain_log_bound(k);
    let (n_exact, log2_binom, expectation) = if k <= TABLE_EXACT_MAX_K {
        let n = new_lower_bound(k)?;
        let binom = log2_binomial(&n, k);
        let ex = expectation_log_bound(k, &n)?;
        (Some(n), binom, ex)
    } else {
        let kf = f64::from(k);
        let binom = kf * (log2_n - kf.log2() + std::f64::consts::LOG2_E);
        (None, binom, chain)
    };
    Ok(BoundReport {
        k,
        n_exact,
        log2_n,
        log2_binom,
        log2_expectation_bound: expectation,
        log2_chain_bound: chain,
        pass: expectation < 0.0 && chain < 0.0,
    })
}

pub fn check_first_moment(k_min: u32, k_max: u32) -> Result<Vec<BoundReport>> {
    if k_min == 0 || k_min > k_max || k_max > TABLE_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= kmin <= kmax <= {TABLE_MAX_K}, got {k_min}..{k_max}"
        )));
    }
    (k_min..=k_max).map(bound_report).collect()
}

pub const BOUND_TABLE_HEADER: &str = "k,n_or_log2n,log2_binom,log2_EX_bound,log2_chain_bound,pass";

pub fn bound_table_csv(rows: &[BoundReport]) -> String {
    let mut out = String::from(BOUND_TABLE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{}",
            r.k,
            r.n_or_log2n(),
            r.log2_binom,
            r.log2_expectation_bound,
            r.log2_chain_bound,
            r.pass
        )
        .expect("writing to a String");
    }
    out
}
