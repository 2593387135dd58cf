//! The encoder/decoder pair and the robustified wrapper.
//!
//! Encoding walks the string position by position, querying the
//! pseudo-deterministic predictor for the conditional probability of each
//! bit. Positions whose predicted probability falls at or below
//! `2 / q_mod` are escaped verbatim into the light list `L`; the rest
//! shrink the interval `[p_<, p_< + p_=)` exactly as in arithmetic coding.
//! The payload `v` is the first `ceil(-log2 p_=) + 1` bits of the interval
//! midpoint `p_< + p_=/2`, which pins a point strictly inside the final
//! interval. If the payload would exceed `4 * ell` bits the encoder gives
//! up and stores the suffix raw (the canonical fallback).
//!
//! The decoder replays the walk. It derives fresh predictor seeds; no
//! randomness is shared with the encoder beyond the advice integer inside
//! the container. Whenever every predictor call agrees between the two
//! sides (which the advice mechanism guarantees with probability
//! `1 - 1/q_mod`), comparing `v` against `p_< + p_= * q_0` recovers each
//! coded bit, and the light list supplies the escaped ones.
//!
//! All state is kept as exact integers over the implicit denominator
//! `grid_den^steps`, so the comparison in the decoder is integer-exact.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bits::{Bit, BitString};
use crate::constants::{HEADER_LOG_FACTOR, LIGHT_BITS_LOG_FACTOR};
use crate::container;
use crate::numeric::{big_ratio, ceil_neg_log2, hoeffding_trials_for, log2_bounds, neg_log2_bounds, ratio};
use crate::predictor::{
    check_base_error, pseudo_predict_grid, sample_advice, Advice, BasePredictor, PredictorParams,
};
use crate::rng::{derive_seed, Role};
use crate::source::{ExactProb, SourceSpec};
use crate::{Error, Result};

/// Payload width cap, as a multiple of `ell`; beyond it the encoder falls
/// back to storing the suffix raw.
pub const FALLBACK_PAYLOAD_FACTOR: u64 = 4;

/// An encoded suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encoding {
    /// Arithmetic-coded container `(v, L, alpha, n, k)` plus the error
    /// parameter `q` the decoder must replay with.
    Arithmetic {
        /// Truncated binary expansion of the interval midpoint.
        v: BitString,
        /// Escaped light positions, strictly increasing, each in `[k, ell]`.
        light: Vec<(u32, Bit)>,
        /// The shared advice.
        alpha: BigUint,
        /// Instance index.
        n: u64,
        /// First encoded position; `ell + 1` encodes the empty suffix.
        k: u32,
        /// User error parameter.
        q: u64,
    },
    /// Canonical fallback: the suffix stored verbatim.
    Fallback { raw: BitString },
}

impl Encoding {
    /// Serialized size in bits (whole bytes, including padding).
    pub fn serialized_bits(&self) -> u64 {
        container::serialized_bits(&container::serialize(self))
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, Encoding::Fallback { .. })
    }
}

/// Final interval state of an encoding pass, exposed for the interval
/// soundness assertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecState {
    pub p_less: ExactProb,
    pub p_eq: ExactProb,
}

/// Integer interval state over the implicit denominator `grid_den^steps`.
struct IntervalState {
    p_less: BigUint,
    p_eq: BigUint,
    den: BigUint,
}

impl IntervalState {
    fn fresh() -> Self {
        IntervalState {
            p_less: BigUint::zero(),
            p_eq: BigUint::one(),
            den: BigUint::one(),
        }
    }

    /// Consumes one heavy position: `n0` is the grid numerator for bit 0,
    /// `bit` the value actually taken.
    fn step(&mut self, grid_den: &BigUint, n0: &BigUint, bit: Bit) {
        if bit {
            self.p_less = &self.p_less * grid_den + &self.p_eq * n0;
            self.p_eq = &self.p_eq * &(grid_den - n0);
        } else {
            self.p_less = &self.p_less * grid_den;
            self.p_eq = &self.p_eq * n0;
        }
        self.den *= grid_den;
    }

    fn to_rationals(&self) -> CodecState {
        CodecState {
            p_less: big_ratio(self.p_less.clone(), self.den.clone()),
            p_eq: big_ratio(self.p_eq.clone(), self.den.clone()),
        }
    }
}

fn check_k(params: &PredictorParams, k: u32) -> Result<()> {
    if k == 0 || k > params.ell() + 1 {
        return Err(Error::InvalidArgument {
            detail: format!("start index {k} outside 1..={}", params.ell() + 1),
        });
    }
    Ok(())
}

/// Encodes `x[k..=ell]` given that the decoder will know `x[..k-1]`.
///
/// Samples the advice from the root seed; see [`encode_with_advice`] for
/// the deterministic form used by golden vectors.
pub fn encode(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    x: &BitString,
    k: u32,
    root_seed: u64,
) -> Result<Encoding> {
    let advice = sample_advice(params, derive_seed(root_seed, Role::Advice, 0));
    encode_with_advice(base, params, x, k, &advice, root_seed).map(|(enc, _)| enc)
}

/// Encoding pass with a caller-chosen advice value; also returns the final
/// interval state.
pub fn encode_with_advice(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    x: &BitString,
    k: u32,
    advice: &Advice,
    root_seed: u64,
) -> Result<(Encoding, CodecState)> {
    check_base_error(base, params)?;
    check_k(params, k)?;
    let ell = params.ell();
    if x.len() != ell as usize {
        return Err(Error::InvalidLength {
            expected: ell as usize,
            got: x.len(),
        });
    }
    let grid_den = params.grid_den();
    let mut state = IntervalState::fresh();
    let mut light: Vec<(u32, Bit)> = Vec::new();

    for i in k..=ell {
        let seed_i = derive_seed(root_seed, Role::EncoderStep, i as u64);
        let n0 = pseudo_predict_grid(base, params, x.prefix(i as usize - 1), advice, seed_i)?;
        let bit = x.bit(i as usize);
        let n_bit = if bit { grid_den - &n0 } else { n0.clone() };
        if n_bit <= *params.light_max() {
            light.push((i, bit));
            continue;
        }
        state.step(grid_den, &n0, bit);
    }

    let final_state = state.to_rationals();
    let payload_len = ceil_neg_log2(&state.p_eq, &state.den) + 1;
    if payload_len > FALLBACK_PAYLOAD_FACTOR * ell as u64 {
        return Ok((
            Encoding::Fallback {
                raw: x.suffix(k as usize),
            },
            final_state,
        ));
    }

    // First payload_len bits of (p_less + p_eq/2) = (2 p_less + p_eq) / (2 den).
    let mut num = (&state.p_less << 1u32) + &state.p_eq;
    let den2 = &state.den << 1u32;
    let mut v = Vec::with_capacity(payload_len as usize);
    for _ in 0..payload_len {
        num <<= 1u32;
        if num >= den2 {
            v.push(true);
            num -= &den2;
        } else {
            v.push(false);
        }
    }

    Ok((
        Encoding::Arithmetic {
            v: BitString::from_bits(v),
            light,
            alpha: advice.alpha().clone(),
            n: params.n(),
            k,
            q: params.q(),
        },
        final_state,
    ))
}

/// Decodes a suffix given the conditioning prefix `x[..k-1]`.
///
/// Derives its own predictor seeds from `root_seed`; correctness against a
/// given encoding rests on the predictor's pseudo-determinism, not on any
/// shared randomness.
pub fn decode(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    enc: &Encoding,
    prefix: &[Bit],
    root_seed: u64,
) -> Result<BitString> {
    check_base_error(base, params)?;
    let ell = params.ell();
    let malformed = |detail: &str| Error::MalformedEncoding {
        detail: detail.to_string(),
    };

    let (v, light, alpha, n, k, q) = match enc {
        Encoding::Fallback { raw } => {
            if prefix.len() + raw.len() != ell as usize {
                return Err(malformed("fallback length does not cover the string"));
            }
            return Ok(raw.clone());
        }
        Encoding::Arithmetic {
            v,
            light,
            alpha,
            n,
            k,
            q,
        } => (v, light, alpha, n, k, q),
    };

    if *n != params.n() || *q != params.q() {
        return Err(malformed("container parameters do not match the decoder's"));
    }
    check_k(params, *k)?;
    if prefix.len() != *k as usize - 1 {
        return Err(Error::InvalidArgument {
            detail: format!("prefix length {} != k - 1 = {}", prefix.len(), k - 1),
        });
    }
    let advice =
        Advice::new(alpha.clone(), params).map_err(|_| malformed("advice out of range"))?;
    let mut prev = 0u32;
    for &(index, _) in light {
        if index < *k || index > ell || (prev >= index && prev != 0) {
            return Err(malformed("light index out of range or unordered"));
        }
        prev = index;
    }
    if *k <= ell && v.is_empty() {
        return Err(malformed("empty payload with a nonempty suffix"));
    }

    let grid_den = params.grid_den();
    let v_num = {
        let mut acc = BigUint::zero();
        for &b in v.as_bits() {
            acc <<= 1u32;
            if b {
                acc += BigUint::one();
            }
        }
        acc
    };
    let v_bits = v.len() as u32;

    let mut light_iter = light.iter().peekable();
    let mut xt: Vec<Bit> = prefix.to_vec();
    let mut state = IntervalState::fresh();

    for i in *k..=ell {
        if let Some(&&(index, bit)) = light_iter.peek() {
            if index == i {
                light_iter.next();
                xt.push(bit);
                continue;
            }
        }
        let seed_i = derive_seed(root_seed, Role::DecoderStep, i as u64);
        let n0 = pseudo_predict_grid(base, params, &xt, &advice, seed_i)?;
        // Emit 1 iff v >= p_less + p_eq * q0, with the threshold over the
        // denominator den * grid_den and v over 2^v_bits.
        let threshold_num = &state.p_less * grid_den + &state.p_eq * &n0;
        let lhs = &v_num * &state.den * grid_den;
        let rhs = &threshold_num << v_bits;
        let bit = lhs >= rhs;
        xt.push(bit);
        state.step(grid_den, &n0, bit);
    }

    Ok(BitString::from_bits(xt[*k as usize - 1..].to_vec()))
}

/// Conservative (rounded-down) evaluation of the length guarantee for one
/// string:
///
/// `-log2 D*(x[k..] | x[..k-1]) + m * C1 * log2(ell) + C2 * log2(n ell q) + 3`
///
/// with `m` the number of `1/q`-light positions in `[k, ell]` and `C1`,
/// `C2` the frozen container constants.
pub fn length_bound_bits(
    src: &SourceSpec,
    params: &PredictorParams,
    x: &BitString,
    k: u32,
) -> Result<BigRational> {
    let suffix_mass = src.suffix_mass(x, k)?;
    if suffix_mass.is_zero() {
        return Err(Error::ZeroMassPrefix { prefix: x.clone() });
    }
    let (neg_log_lo, _) = neg_log2_bounds(&suffix_mass, 32);
    let delta = ratio(1, params.q());
    let m = src.light_count(x, &delta, k, params.ell())?;
    let (log_ell_lo, _) = log2_bounds(&BigUint::from(params.ell()), &BigUint::one(), 32);
    let nlq = BigUint::from(params.n().max(1)) * BigUint::from(params.ell()) * BigUint::from(params.q());
    let (log_nlq_lo, _) = log2_bounds(&nlq, &BigUint::one(), 32);
    Ok(neg_log_lo
        + BigRational::from_integer((m * LIGHT_BITS_LOG_FACTOR).into()) * log_ell_lo
        + BigRational::from_integer(HEADER_LOG_FACTOR.into()) * log_nlq_lo
        + BigRational::from_integer(3.into()))
}

/// Output of the robustified encoder: either a coded container or the
/// input stored verbatim after a failed self-test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobustEncoding {
    Coded(Encoding),
    Verbatim(BitString),
}

impl RobustEncoding {
    pub fn serialized_bits(&self) -> u64 {
        container::serialized_bits(&container::serialize_robust(self))
    }
}

/// Threshold controls for the robustified encoder.
#[derive(Debug, Clone, Default)]
pub struct RobustConfig {
    /// Self-test sample count; defaults to the Hoeffding count for
    /// additive accuracy `1/(8 ell)` with failure probability `2^-n`.
    pub self_test_trials: Option<u64>,
    /// Pass threshold for the estimated success probability; defaults to
    /// `1 - 3/(4 ell)`.
    pub pass_threshold: Option<ExactProb>,
}

/// Number of self-test trials the default configuration runs.
pub fn default_self_test_trials(params: &PredictorParams) -> u64 {
    let acc = big_ratio(BigUint::one(), BigUint::from(8u32 * params.ell()));
    hoeffding_trials_for(&acc, params.n())
}

/// Whole-string encoder with a worst-case safety net.
///
/// Estimates the probability that a fresh encode/decode round trip both
/// succeeds and meets the length bound; on a passing estimate it emits a
/// fresh coded container, otherwise it ships the string verbatim. The
/// verbatim path costs `ell + O(log ell)` bits but makes decoding
/// unconditional, which is what buys the per-string `2/3` success
/// guarantee under an arbitrarily broken predictor.
pub fn robustify_encode(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    src: &SourceSpec,
    x: &BitString,
    cfg: &RobustConfig,
    root_seed: u64,
) -> Result<RobustEncoding> {
    let ell = params.ell();
    if x.len() != ell as usize {
        return Err(Error::InvalidLength {
            expected: ell as usize,
            got: x.len(),
        });
    }
    let trials = cfg
        .self_test_trials
        .unwrap_or_else(|| default_self_test_trials(params));
    let threshold = cfg.pass_threshold.clone().unwrap_or_else(|| {
        ExactProb::one() - big_ratio(BigUint::from(3u32), BigUint::from(4 * ell))
    });
    let bound = length_bound_bits(src, params, x, 1)?;

    let mut successes: u64 = 0;
    for trial in 0..trials {
        let trial_root = derive_seed(root_seed, Role::SelfTest, trial);
        let enc_seed = derive_seed(trial_root, Role::Trial, 0);
        let dec_seed = derive_seed(trial_root, Role::Trial, 1);
        let Ok(enc) = encode(base, params, x, 1, enc_seed) else {
            continue;
        };
        let bits = BigRational::from_integer(enc.serialized_bits().into());
        if bits > bound {
            continue;
        }
        if decode(base, params, &enc, &[], dec_seed).as_ref() == Ok(x) {
            successes += 1;
        }
    }

    let estimate = ratio(successes, trials.max(1));
    if estimate >= threshold {
        let fresh = derive_seed(root_seed, Role::FreshEncode, 0);
        Ok(RobustEncoding::Coded(encode(base, params, x, 1, fresh)?))
    } else {
        Ok(RobustEncoding::Verbatim(x.clone()))
    }
}

/// Decoder for [`robustify_encode`] output.
pub fn robustify_decode(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    enc: &RobustEncoding,
    root_seed: u64,
) -> Result<BitString> {
    match enc {
        RobustEncoding::Verbatim(x) => Ok(x.clone()),
        RobustEncoding::Coded(inner) => decode(base, params, inner, &[], root_seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use crate::predictor::{Advice, ConstBase, FaultyBase, OracleBase};
    use num_traits::Signed;

    fn uniform_setup(ell: u32, q: u64) -> (SourceSpec, PredictorParams, OracleBase) {
        let src = SourceSpec::uniform(1, ell).unwrap();
        let params = PredictorParams::new(1, ell, q).unwrap();
        let base = OracleBase::new(src.clone());
        (src, params, base)
    }

    #[test]
    fn hand_traced_uniform_example() {
        // ell = 2, q = 8, alpha forced to 0, x = 10: both conditionals are
        // exactly 1/2, no light bits, p_eq ends at 1/4, and the payload is
        // the first 3 bits of 1/2 + 1/8 = 0.101....
        let (_, params, base) = uniform_setup(2, 8);
        let advice = Advice::new(BigUint::zero(), &params).unwrap();
        let x: BitString = "10".parse().unwrap();
        let (enc, state) = encode_with_advice(&base, &params, &x, 1, &advice, 7).unwrap();
        assert_eq!(state.p_eq, ratio(1, 4));
        assert_eq!(state.p_less, ratio(1, 2));
        match &enc {
            Encoding::Arithmetic { v, light, .. } => {
                assert_eq!(v.to_string(), "101");
                assert!(light.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        let decoded = decode(&base, &params, &enc, &[], 12345).unwrap();
        assert_eq!(decoded, x);
    }

    #[test]
    fn empty_suffix_has_unit_interval() {
        let (_, params, base) = uniform_setup(4, 8);
        let x: BitString = "0110".parse().unwrap();
        let k = params.ell() + 1;
        let enc = encode(&base, &params, &x, k, 3).unwrap();
        match &enc {
            Encoding::Arithmetic { v, light, .. } => {
                assert_eq!(v.to_string(), "1");
                assert!(light.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        let decoded = decode(&base, &params, &enc, x.as_bits(), 9).unwrap();
        assert!(decoded.is_empty());
    }

    #[test]
    fn exhaustive_round_trip_small_uniform() {
        let (_, params, base) = uniform_setup(6, 8);
        for value in 0u64..64 {
            let x = BitString::from_uint(value, 6);
            for k in [1u32, 3, 7] {
                let enc = encode(&base, &params, &x, k, value ^ 0xabcd).unwrap();
                let decoded =
                    decode(&base, &params, &enc, x.prefix(k as usize - 1), value ^ 0x1234)
                        .unwrap();
                assert_eq!(decoded, x.suffix(k as usize), "value {value} k {k}");
            }
        }
    }

    #[test]
    fn exhaustive_uniform_l8_at_q64_with_fixed_advice() {
        let (_, params, base) = uniform_setup(8, 64);
        let advice = Advice::new(BigUint::from(100u32), &params).unwrap();
        for value in 0u64..256 {
            let x = BitString::from_uint(value, 8);
            let (enc, _) = encode_with_advice(&base, &params, &x, 1, &advice, value).unwrap();
            let decoded = decode(&base, &params, &enc, &[], value ^ 0xffff).unwrap();
            assert_eq!(decoded, x, "value {value}");
        }
    }

    #[test]
    fn light_branch_fires_for_rare_bits() {
        // 2/q_mod = 2/193 > 1/100 + 1/q_mod^2, so a 0 bit under
        // Bernoulli(99/100) must take the light branch.
        let src = SourceSpec::iid(1, 16, ratio(99, 100)).unwrap();
        let params = PredictorParams::new(1, 16, 12).unwrap();
        assert_eq!(params.q_mod(), &BigUint::from(193u32));
        let base = OracleBase::new(src.clone());
        let mut x: BitString = "1111111111111111".parse().unwrap();
        let x_bits = {
            let mut bits = x.as_bits().to_vec();
            bits[6] = false;
            bits
        };
        x = BitString::from_bits(x_bits);
        let enc = encode(&base, &params, &x, 1, 5).unwrap();
        match &enc {
            Encoding::Arithmetic { light, .. } => {
                assert_eq!(light.as_slice(), &[(7u32, false)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let decoded = decode(&base, &params, &enc, &[], 77).unwrap();
        assert_eq!(decoded, x);
    }

    #[test]
    fn light_and_heavy_classification_against_the_oracle() {
        // Every escaped position is 3/q_mod-light, every coded one is
        // strictly heavier than 1/q_mod.
        let src = SourceSpec::iid(1, 16, ratio(99, 100)).unwrap();
        let params = PredictorParams::new(1, 16, 12).unwrap();
        let base = OracleBase::new(src.clone());
        let three = big_ratio(BigUint::from(3u32), params.q_mod().clone());
        for seed in 0..40u64 {
            let x = src.sample(seed);
            let enc = encode(&base, &params, &x, 1, seed).unwrap();
            let light = match &enc {
                Encoding::Arithmetic { light, .. } => light.clone(),
                Encoding::Fallback { .. } => panic!("unexpected fallback"),
            };
            let escaped: std::collections::BTreeSet<u32> =
                light.iter().map(|&(i, _)| i).collect();
            for i in 1..=16u32 {
                let cond = src
                    .exact_conditional(x.prefix(i as usize - 1), x.bit(i as usize))
                    .unwrap();
                if escaped.contains(&i) {
                    assert!(cond <= three, "escaped bit {i} too heavy: {cond}");
                } else {
                    assert!(cond > params.inv_q_mod(), "coded bit {i} too light: {cond}");
                }
            }
        }
    }

    #[test]
    fn interval_soundness_and_p_eq_floor() {
        let src = SourceSpec::markov(
            1,
            12,
            [ratio(1, 2), ratio(1, 2)],
            [[ratio(3, 4), ratio(1, 4)], [ratio(1, 4), ratio(3, 4)]],
        )
        .unwrap();
        let params = PredictorParams::new(1, 12, 12).unwrap();
        let base = OracleBase::new(src.clone());
        for seed in 0..40u64 {
            let x = src.sample(seed);
            let advice = sample_advice(&params, seed.wrapping_mul(31));
            let (enc, state) = encode_with_advice(&base, &params, &x, 1, &advice, seed).unwrap();
            let v = match &enc {
                Encoding::Arithmetic { v, .. } => v,
                Encoding::Fallback { .. } => panic!("unexpected fallback"),
            };
            let mut v_real = ExactProb::zero();
            let mut scale = ratio(1, 2);
            for &b in v.as_bits() {
                if b {
                    v_real += &scale;
                }
                scale /= ExactProb::from_integer(2.into());
            }
            // p_< < v <= p_< + p_=/2 < p_< + p_=.
            assert!(v_real > state.p_less);
            let midpoint = &state.p_less + &state.p_eq / ExactProb::from_integer(2.into());
            assert!(v_real <= midpoint);
            // -log2 p_= <= -log2 D(x) + 3, i.e. p_= >= D(x) / 8, exactly.
            let mass = src.mass(&x).unwrap();
            assert!(state.p_eq >= mass / ExactProb::from_integer(8.into()));
            assert!(!state.p_less.is_negative() && state.p_eq.is_positive());
            assert!(&state.p_less + &state.p_eq <= ExactProb::one());
        }
    }

    #[test]
    fn fallback_triggers_on_absurd_models_and_still_decodes() {
        // A constant base far from the truth inflates -log2 p_= beyond
        // 4 * ell; q_mod = 65 keeps 1/20 on the heavy side of 2/65.
        let (_, params, _) = uniform_setup(8, 8);
        let base = ConstBase::new(ratio(1, 20));
        let x: BitString = "00000000".parse().unwrap();
        let enc = encode(&base, &params, &x, 1, 3).unwrap();
        assert!(enc.is_fallback());
        let decoded = decode(&base, &params, &enc, &[], 99).unwrap();
        assert_eq!(decoded, x);
        // The fallback payload is the raw suffix regardless of the base.
        let oracle = OracleBase::new(SourceSpec::uniform(1, 8).unwrap());
        assert_eq!(decode(&oracle, &params, &enc, &[], 1).unwrap(), x);
    }

    #[test]
    fn decode_validates_its_inputs() {
        let (_, params, base) = uniform_setup(4, 8);
        let x: BitString = "0110".parse().unwrap();
        let enc = encode(&base, &params, &x, 2, 3).unwrap();
        // Wrong prefix length.
        assert!(decode(&base, &params, &enc, &[], 3).is_err());
        // Tampered light index beyond ell.
        let bad = Encoding::Arithmetic {
            v: "1".parse().unwrap(),
            light: vec![(9, true)],
            alpha: BigUint::zero(),
            n: 1,
            k: 1,
            q: 8,
        };
        assert!(matches!(
            decode(&base, &params, &bad, &[], 3),
            Err(Error::MalformedEncoding { .. })
        ));
        // Advice outside its range.
        let bad = Encoding::Arithmetic {
            v: "1".parse().unwrap(),
            light: vec![],
            alpha: params.advice_count().clone(),
            n: 1,
            k: 1,
            q: 8,
        };
        assert!(decode(&base, &params, &bad, &[], 3).is_err());
        // Parameter mismatch between container and decoder.
        let other_params = PredictorParams::new(1, 4, 16).unwrap();
        assert!(decode(&base, &other_params, &enc, &[false], 3).is_err());
        // Empty payload with a nonempty suffix.
        let bad = Encoding::Arithmetic {
            v: BitString::new(),
            light: vec![],
            alpha: BigUint::zero(),
            n: 1,
            k: 1,
            q: 8,
        };
        assert!(decode(&base, &params, &bad, &[], 3).is_err());
    }

    #[test]
    fn encode_rejects_wrong_length_and_bad_k() {
        let (_, params, base) = uniform_setup(4, 8);
        let short: BitString = "01".parse().unwrap();
        assert!(matches!(
            encode(&base, &params, &short, 1, 0),
            Err(Error::InvalidLength { .. })
        ));
        let x: BitString = "0110".parse().unwrap();
        assert!(encode(&base, &params, &x, 0, 0).is_err());
        assert!(encode(&base, &params, &x, 6, 0).is_err());
    }

    #[test]
    fn robustify_oracle_base_always_codes() {
        let (src, params, base) = uniform_setup(8, 2);
        let cfg = RobustConfig {
            self_test_trials: Some(64),
            ..Default::default()
        };
        for seed in 0..8u64 {
            let x = src.sample(seed);
            let enc = robustify_encode(&base, &params, &src, &x, &cfg, seed).unwrap();
            assert!(matches!(enc, RobustEncoding::Coded(_)));
            assert_eq!(robustify_decode(&base, &params, &enc, seed ^ 1).unwrap(), x);
        }
    }

    #[test]
    fn robustify_broken_base_falls_back_to_verbatim() {
        let src = SourceSpec::uniform(4, 10).unwrap();
        let params = PredictorParams::new(4, 10, 1).unwrap();
        // Violates its contract on every call.
        let base = FaultyBase::new(src.clone(), params.base_err().clone(), 1, 1);
        let cfg = RobustConfig {
            self_test_trials: Some(64),
            ..Default::default()
        };
        let x = src.sample(3);
        let enc = robustify_encode(&base, &params, &src, &x, &cfg, 17).unwrap();
        assert!(matches!(enc, RobustEncoding::Verbatim(_)));
        assert_eq!(robustify_decode(&base, &params, &enc, 55).unwrap(), x);
    }

    #[test]
    fn default_self_test_count_matches_the_hoeffding_formula() {
        let params = PredictorParams::new(4, 10, 1).unwrap();
        assert_eq!(default_self_test_trials(&params), 11091);
    }

    #[test]
    fn length_bound_is_met_by_the_oracle_base() {
        let (src, params, base) = uniform_setup(8, 8);
        for seed in 0..16u64 {
            let x = src.sample(seed);
            let enc = encode(&base, &params, &x, 1, seed).unwrap();
            let bound = length_bound_bits(&src, &params, &x, 1).unwrap();
            let bits = BigRational::from_integer(enc.serialized_bits().into());
            assert!(bits <= bound, "{bits} > {bound}");
        }
    }
}
