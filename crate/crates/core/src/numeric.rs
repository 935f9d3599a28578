//! Outward rounding for probability bounds.
//!
//! Bounds computed in `f64` are widened so that a lower bound never exceeds the
//! exact value and an upper bound never falls below it, even though the stored
//! probabilities are themselves rounded. All values handled here lie in `[0, 1]`.

/// Relative slack per accumulated term.
pub const ULP_SLACK: f64 = 4.0 * f64::EPSILON;

/// Sound `(lower, upper)` bounds on `Σ p·(l, u)` over a successor list.
///
/// All terms are nonnegative, so the rounding error of the sum is relative to the
/// sum itself. Exact zeros and a single certain successor are kept exactly.
pub fn weighted_bounds(terms: impl ExactSizeIterator<Item = (f64, f64, f64)>) -> (f64, f64) {
    let n = terms.len();
    let mut lo = 0.0;
    let mut hi = 0.0;
    let mut certain = n == 1;
    let mut positive = false;
    for (p, l, u) in terms {
        certain &= p == 1.0;
        positive |= u > 0.0;
        lo += p * l;
        hi += p * u;
    }
    if certain {
        return (lo, hi);
    }
    let c = ULP_SLACK * (n + 1) as f64;
    let lo = (lo - lo * c).max(0.0);
    // MIN_POSITIVE covers products that underflowed to zero
    let hi = if positive {
        (hi + hi * c + f64::MIN_POSITIVE).min(1.0)
    } else {
        0.0
    };
    (lo, hi)
}

/// Bounds on `x / y` from one correctly rounded division; exact quotients stay exact.
fn quotient_bounds(x: f64, y: f64) -> (f64, f64) {
    let q = x / y;
    if q.mul_add(y, -x) == 0.0 {
        (q, q)
    } else {
        (q.next_down(), q.next_up())
    }
}

/// Sound bounds on `[lo, hi] / r_max` for rewards `0 ≤ lo ≤ hi ≤ r_max`.
pub fn normalized_bounds(lo: f64, hi: f64, r_max: f64) -> (f64, f64) {
    let l = if lo <= 0.0 { 0.0 } else { quotient_bounds(lo, r_max).0 };
    let u = if hi >= r_max { 1.0 } else { quotient_bounds(hi, r_max).1 };
    (l.clamp(0.0, 1.0), u.clamp(0.0, 1.0))
}
