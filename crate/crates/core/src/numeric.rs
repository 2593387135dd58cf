//! Exact and directed-rounding numerics on arbitrary-precision values.
//!
//! The codec needs `ceil(-log2 p)` exactly (it fixes the payload width),
//! while the harness needs real-valued quantities like `-log2 D(x)` and
//! `H(D)` only as *directed bounds*: every inequality is checked against a
//! bound rounded in the conservative direction, so approximation can never
//! turn a failing check into a passing one.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact `ceil(-log2(num/den))` for `0 < num/den <= 1`: the smallest
/// `m >= 0` with `num * 2^m >= den`.
pub fn ceil_neg_log2(num: &BigUint, den: &BigUint) -> u64 {
    assert!(!num.is_zero(), "log of zero");
    assert!(num <= den, "value above one");
    let gap = den.bits() - num.bits();
    let mut m = gap.saturating_sub(1);
    while (num << m) < *den {
        m += 1;
    }
    m
}

/// A floating big-number `mant * 2^exp` with bounded mantissa width.
#[derive(Debug, Clone)]
struct BigFloat {
    mant: BigUint,
    exp: i128,
}

impl BigFloat {
    /// Truncates the mantissa to `prec` bits, rounding the value down or up.
    fn normalize(mut self, prec: u64, round_up: bool) -> Self {
        let bits = self.mant.bits();
        if bits > prec {
            let shift = bits - prec;
            let dropped = if round_up {
                let mask = (BigUint::one() << shift) - BigUint::one();
                !(self.mant.clone() & mask).is_zero()
            } else {
                false
            };
            self.mant >>= shift;
            if dropped {
                self.mant += BigUint::one();
            }
            self.exp += shift as i128;
        }
        self
    }

    fn square(&self, prec: u64, round_up: bool) -> Self {
        BigFloat {
            mant: &self.mant * &self.mant,
            exp: self.exp * 2,
        }
        .normalize(prec, round_up)
    }
}

/// `num/den` as a `prec`-bit float, rounded down or up.
fn quotient_float(num: &BigUint, den: &BigUint, prec: u64, round_up: bool) -> BigFloat {
    assert!(!num.is_zero() && !den.is_zero());
    // Shift so the integer quotient carries prec+1 significant bits.
    let shift = (den.bits() + prec + 1) as i128 - num.bits() as i128;
    let (n, d) = if shift >= 0 {
        (num << shift as u64, den.clone())
    } else {
        (num.clone(), den << (-shift) as u64)
    };
    let (q, r) = n.div_rem(&d);
    let mant = if round_up && !r.is_zero() {
        q + BigUint::one()
    } else {
        q
    };
    BigFloat { mant, exp: -shift }.normalize(prec, round_up)
}

/// Directed dyadic bounds `(lo, hi)` with `lo <= log2(num/den) <= hi` and
/// `hi - lo <= 2^(1-frac_bits)` or so.
///
/// Uses the power method: `log2 x = log2(x^(2^k)) / 2^k`, with the repeated
/// squaring carried out twice under floor and ceiling rounding.
pub fn log2_bounds(num: &BigUint, den: &BigUint, frac_bits: u32) -> (BigRational, BigRational) {
    let k = frac_bits as u64 + 2;
    let prec = frac_bits as u64 + 16;
    let mut lo = quotient_float(num, den, prec, false);
    let mut hi = quotient_float(num, den, prec, true);
    for _ in 0..k {
        lo = lo.square(prec, false);
        hi = hi.square(prec, true);
    }
    // 2^L <= lo <= x^(2^k) and x^(2^k) <= hi < 2^U.
    let l = lo.exp + lo.mant.bits() as i128 - 1;
    let u = hi.exp + hi.mant.bits() as i128;
    let scale = BigInt::from(BigUint::one() << k);
    (
        BigRational::new(BigInt::from(l), scale.clone()),
        BigRational::new(BigInt::from(u), scale),
    )
}

/// Directed bounds on `-log2 r` for a rational `r` in `(0, 1]`.
pub fn neg_log2_bounds(r: &BigRational, frac_bits: u32) -> (BigRational, BigRational) {
    assert!(r.is_positive(), "-log2 of nonpositive value");
    let (lo, hi) = log2_bounds(r.numer().magnitude(), r.denom().magnitude(), frac_bits);
    (-hi, -lo)
}

/// Directed bounds on `log2 v` for a positive integer `v`.
pub fn log2_u64_bounds(v: u64, frac_bits: u32) -> (BigRational, BigRational) {
    log2_bounds(&BigUint::from(v), &BigUint::one(), frac_bits)
}

/// Upper bound on `ln 2` as an exact rational.
fn ln2_upper() -> BigRational {
    BigRational::new(BigInt::from(693_148u32), BigInt::from(1_000_000u32))
}

/// Minimal Monte-Carlo sample count for additive accuracy `1/err` with
/// failure probability at most `1/err`, by the Hoeffding bound:
/// `T >= err^2 * ln(2 err) / 2`, rounded up.
pub fn hoeffding_min_trials(err: &BigUint) -> BigUint {
    assert!(*err >= BigUint::from(2u32), "error parameter below 2");
    let two_err = err << 1u32;
    let (_, log2_hi) = log2_bounds(&two_err, &BigUint::one(), 32);
    let ln_hi = log2_hi * ln2_upper();
    let t = BigRational::new(BigInt::from(err * err), BigInt::from(2u32)) * ln_hi;
    ratio_ceil(&t)
}

/// Minimal self-test sample count for additive accuracy `acc` (a rational
/// in `(0,1)`) with failure probability at most `2^-n`:
/// `T >= ln(2^(n+1)) / (2 acc^2)`, rounded up.
pub fn hoeffding_trials_for(acc: &BigRational, n: u64) -> u64 {
    assert!(acc.is_positive() && *acc < BigRational::one());
    let num = BigRational::from_integer(BigInt::from(n + 1)) * ln2_upper();
    let den = BigRational::from_integer(BigInt::from(2u32)) * acc * acc;
    ratio_ceil(&(num / den)).to_u64().expect("trial count fits")
}

/// `3 * sqrt(p (1-p) / trials)`, rounded up (a hair of extra slack keeps
/// the statistical thresholds sound under the rounding).
pub fn three_sigma_slack(p: &BigRational, trials: u64) -> BigRational {
    assert!(!p.is_negative() && *p <= BigRational::one());
    let var = p * (BigRational::one() - p) / BigRational::from_integer(BigInt::from(trials));
    // sqrt(a/b) <= (isqrt(a*b) + 1) / b.
    let a = var.numer().magnitude();
    let b = var.denom().magnitude();
    let root = (a * b).sqrt() + BigUint::one();
    BigRational::new(BigInt::from(root * BigUint::from(3u32)), BigInt::from(b.clone()))
}

/// Exact ceiling of a nonnegative rational as a `BigUint`.
pub fn ratio_ceil(r: &BigRational) -> BigUint {
    assert!(!r.is_negative());
    let (q, rem) = r.numer().magnitude().div_rem(r.denom().magnitude());
    if rem.is_zero() {
        q
    } else {
        q + BigUint::one()
    }
}

/// Rational `num/den` from unsigned parts.
pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from big unsigned parts.
pub fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
