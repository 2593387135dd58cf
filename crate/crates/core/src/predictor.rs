//! Next-bit predictors and the pseudo-deterministic wrapper.
//!
//! A [`BasePredictor`] is a randomized estimator of the conditional
//! next-bit probability: on all but a `1/E` fraction of its seeds it must
//! land within `1/E` of the true conditional, where `E` is its declared
//! error parameter. [`pseudo_predict`] wraps any such base so that, for a
//! good choice of the shared advice integer, *every* seed produces the same
//! output: it queries the base at `b = 0`, shifts the estimate by
//! `advice * noise_step`, and snaps the result onto a coarse grid (ties
//! round down). The grid is so much coarser than the base error plus one
//! noise step that at most one advice value per position can leave the
//! rounding unstable, which is what makes encoder and decoder agree without
//! any shared randomness.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bits::Bit;
use crate::numeric::{big_ratio, hoeffding_min_trials};
use crate::rng::{binomial_count, derive_seed, DetRng, Role};
use crate::source::{ExactProb, SourceSpec};
use crate::{Error, Result};

/// The derived parameter chain for one predictor instantiation.
///
/// For user error parameter `q`, all wrapper quantities are instantiated at
/// the modified parameter `q_mod = ell * q + 1`:
///
/// - `base_err = 32 * ell * q_mod^3`: the error parameter demanded of the
///   base predictor;
/// - `grid = 1 / (4 q_mod^2)`: outputs are multiples of this;
/// - `noise_step = 1 / (8 ell q_mod^3)`: the advice-controlled shift;
/// - advice ranges over `{0, ..., 2 ell q_mod - 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictorParams {
    n: u64,
    ell: u32,
    q: u64,
    q_mod: BigUint,
    base_err: BigUint,
    /// Denominator of the rounding grid, `4 q_mod^2`.
    grid_den: BigUint,
    /// Denominator of one noise step, `8 ell q_mod^3`.
    noise_den: BigUint,
    /// Number of advice values, `2 ell q_mod` (advice max is this minus 1).
    advice_count: BigUint,
    /// Grid numerators at or below this are light: `N <= 8 q_mod` iff
    /// `N/grid_den <= 2/q_mod`.
    light_max: BigUint,
}

impl PredictorParams {
    pub fn new(n: u64, ell: u32, q: u64) -> Result<Self> {
        if ell == 0 || q == 0 {
            return Err(Error::InvalidArgument {
                detail: format!("ell = {ell} and q = {q} must be positive"),
            });
        }
        let ell_big = BigUint::from(ell);
        let q_mod = &ell_big * BigUint::from(q) + BigUint::one();
        let q_mod_sq = &q_mod * &q_mod;
        let q_mod_cu = &q_mod_sq * &q_mod;
        let base_err = BigUint::from(32u32) * &ell_big * &q_mod_cu;
        let grid_den = BigUint::from(4u32) * &q_mod_sq;
        let noise_den = BigUint::from(8u32) * &ell_big * &q_mod_cu;
        let advice_count = BigUint::from(2u32) * &ell_big * &q_mod;
        let light_max = BigUint::from(8u32) * &q_mod;
        Ok(PredictorParams {
            n,
            ell,
            q,
            q_mod,
            base_err,
            grid_den,
            noise_den,
            advice_count,
            light_max,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn q_mod(&self) -> &BigUint {
        &self.q_mod
    }

    pub fn base_err(&self) -> &BigUint {
        &self.base_err
    }

    pub fn grid_den(&self) -> &BigUint {
        &self.grid_den
    }

    pub fn grid(&self) -> ExactProb {
        big_ratio(BigUint::one(), self.grid_den.clone())
    }

    pub fn noise_step(&self) -> ExactProb {
        big_ratio(BigUint::one(), self.noise_den.clone())
    }

    pub fn advice_count(&self) -> &BigUint {
        &self.advice_count
    }

    pub fn advice_max(&self) -> BigUint {
        &self.advice_count - BigUint::one()
    }

    /// Grid numerators at or below this value take the light branch.
    pub fn light_max(&self) -> &BigUint {
        &self.light_max
    }

    /// `1 / q_mod`, the light threshold the classification guarantees are
    /// stated at.
    pub fn inv_q_mod(&self) -> ExactProb {
        big_ratio(BigUint::one(), self.q_mod.clone())
    }
}

/// Shared advice: the noise multiplier shipped inside the encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advice {
    alpha: BigUint,
}

impl Advice {
    pub fn new(alpha: BigUint, params: &PredictorParams) -> Result<Self> {
        if alpha >= params.advice_count {
            return Err(Error::InvalidArgument {
                detail: format!("advice {alpha} outside 0..={}", params.advice_max()),
            });
        }
        Ok(Advice { alpha })
    }

    pub fn alpha(&self) -> &BigUint {
        &self.alpha
    }
}

/// Uniform advice draw, deterministic in `seed`.
pub fn sample_advice(params: &PredictorParams, seed: u64) -> Advice {
    let mut rng = DetRng::new(seed);
    Advice {
        alpha: rng.biguint_below(&params.advice_count),
    }
}

/// The base-predictor contract: estimate `D*(b | prefix)` from a seed.
///
/// The declared error parameter `E` promises that for every supported
/// prefix, `Pr_seed[|output - D*(b|prefix)| <= 1/E] >= 1 - 1/E`. A return
/// of `None` declares the estimate exact (the contract holds for every
/// `E`).
pub trait BasePredictor: Sync {
    fn predict(&self, prefix: &[Bit], b: Bit, seed: u64) -> Result<ExactProb>;

    /// Declared error parameter; `None` means exact.
    fn error_param(&self) -> Option<&BigUint>;
}

/// Checks a base against the error demanded by the wrapper parameters.
pub fn check_base_error(base: &dyn BasePredictor, params: &PredictorParams) -> Result<()> {
    match base.error_param() {
        None => Ok(()),
        Some(e) if *e >= params.base_err => Ok(()),
        Some(e) => Err(Error::InvalidArgument {
            detail: format!(
                "base error parameter {e} below required {}",
                params.base_err
            ),
        }),
    }
}

/// Exact oracle base: returns the true conditional, ignoring the seed.
#[derive(Debug, Clone)]
pub struct OracleBase {
    src: SourceSpec,
}

impl OracleBase {
    pub fn new(src: SourceSpec) -> Self {
        OracleBase { src }
    }
}

impl BasePredictor for OracleBase {
    fn predict(&self, prefix: &[Bit], b: Bit, _seed: u64) -> Result<ExactProb> {
        self.src.exact_conditional(prefix, b)
    }

    fn error_param(&self) -> Option<&BigUint> {
        None
    }
}

/// Monte-Carlo base: estimates the conditional as the empirical frequency
/// of `trials` conditioned next-bit samples.
///
/// Construction requires `trials` to be at least the Hoeffding count
/// `ceil(err^2 ln(2 err) / 2)`, which yields additive accuracy `1/err`
/// with failure probability at most `1/err` per call. Sample counts above
/// [`crate::rng::LITERAL_DRAW_LIMIT`] are drawn through the clamped normal
/// approximation of the binomial (see [`binomial_count`]); the clamp keeps
/// the declared accuracy window with certainty.
#[derive(Debug, Clone)]
pub struct MonteCarloBase {
    src: SourceSpec,
    err: BigUint,
    trials: BigUint,
    clamp_sigmas: f64,
}

impl MonteCarloBase {
    pub fn new(src: SourceSpec, err: BigUint, trials: BigUint) -> Result<Self> {
        let needed = hoeffding_min_trials(&err);
        if trials < needed {
            return Err(Error::InvalidArgument {
                detail: format!(
                    "{trials} Monte-Carlo samples below the required {needed} for error {err}"
                ),
            });
        }
        let err_f = num_traits::ToPrimitive::to_f64(&err).unwrap_or(f64::MAX);
        let clamp_sigmas = (2.0 * (2.0 * err_f).ln()).sqrt() * 0.999;
        Ok(MonteCarloBase {
            src,
            err,
            trials,
            clamp_sigmas,
        })
    }

    /// Base with the minimal admissible sample count for `err`.
    pub fn with_min_trials(src: SourceSpec, err: BigUint) -> Result<Self> {
        let trials = hoeffding_min_trials(&err);
        Self::new(src, err, trials)
    }

    pub fn trials(&self) -> &BigUint {
        &self.trials
    }
}

impl BasePredictor for MonteCarloBase {
    fn predict(&self, prefix: &[Bit], b: Bit, seed: u64) -> Result<ExactProb> {
        let p = self.src.exact_conditional(prefix, b)?;
        let mut rng = DetRng::new(seed);
        let hits = binomial_count(&mut rng, &self.trials, &p, self.clamp_sigmas);
        Ok(big_ratio(hits, self.trials.clone()))
    }

    fn error_param(&self) -> Option<&BigUint> {
        Some(&self.err)
    }
}

/// Worst-case-compliant base: returns `D* + s/err` with the sign `s` drawn
/// fresh per seed. Always exactly at the edge of its declared accuracy, so
/// it maximally stresses the rounding-stability argument.
#[derive(Debug, Clone)]
pub struct AdversarialBase {
    src: SourceSpec,
    err: BigUint,
}

impl AdversarialBase {
    pub fn new(src: SourceSpec, err: BigUint) -> Self {
        AdversarialBase { src, err }
    }
}

impl BasePredictor for AdversarialBase {
    fn predict(&self, prefix: &[Bit], b: Bit, seed: u64) -> Result<ExactProb> {
        let truth = self.src.exact_conditional(prefix, b)?;
        let step = big_ratio(BigUint::one(), self.err.clone());
        let mut rng = DetRng::new(seed);
        let v = if rng.next_bit() { truth + step } else { truth - step };
        Ok(clamp_unit(v))
    }

    fn error_param(&self) -> Option<&BigUint> {
        Some(&self.err)
    }
}

/// Contract-violating base: on a fixed fraction of seeds it ignores the
/// source and returns a uniform garbage value. Used to exercise fallback
/// and robustification paths; its declared error parameter is a lie by
/// design.
#[derive(Debug, Clone)]
pub struct FaultyBase {
    src: SourceSpec,
    claimed_err: BigUint,
    violation_num: u64,
    violation_den: u64,
}

impl FaultyBase {
    pub fn new(src: SourceSpec, claimed_err: BigUint, violation_num: u64, violation_den: u64) -> Self {
        assert!(violation_den > 0 && violation_num <= violation_den);
        FaultyBase {
            src,
            claimed_err,
            violation_num,
            violation_den,
        }
    }
}

impl BasePredictor for FaultyBase {
    fn predict(&self, prefix: &[Bit], b: Bit, seed: u64) -> Result<ExactProb> {
        let mut rng = DetRng::new(seed);
        if rng.below(self.violation_den) < self.violation_num {
            let junk = rng.next_u64();
            return Ok(big_ratio(
                BigUint::from(junk),
                BigUint::one() << 64u32,
            ));
        }
        self.src.exact_conditional(prefix, b)
    }

    fn error_param(&self) -> Option<&BigUint> {
        Some(&self.claimed_err)
    }
}

/// Constant base: always returns the same value. A blunt instrument for
/// forcing specific codec branches in tests.
#[derive(Debug, Clone)]
pub struct ConstBase {
    value: ExactProb,
}

impl ConstBase {
    pub fn new(value: ExactProb) -> Self {
        ConstBase { value }
    }
}

impl BasePredictor for ConstBase {
    fn predict(&self, _prefix: &[Bit], b: Bit, _seed: u64) -> Result<ExactProb> {
        Ok(if b {
            ExactProb::one() - &self.value
        } else {
            self.value.clone()
        })
    }

    fn error_param(&self) -> Option<&BigUint> {
        None
    }
}

fn clamp_unit(v: ExactProb) -> ExactProb {
    if v.is_negative() {
        ExactProb::zero()
    } else if v > ExactProb::one() {
        ExactProb::one()
    } else {
        v
    }
}

/// The wrapper output for `b = 0`, as a grid numerator `N` (the value is
/// `N / grid_den`).
///
/// Queries the base once at `b = 0`, adds `advice * noise_step`, clamps
/// into `[0, 1]`, and rounds to the nearest grid multiple with ties broken
/// downward. All arithmetic is integer-exact.
pub fn pseudo_predict_grid(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    prefix: &[Bit],
    advice: &Advice,
    seed: u64,
) -> Result<BigUint> {
    let v0 = clamp_unit(base.predict(prefix, false, seed)?);
    let a = v0.numer().magnitude();
    let b = v0.denom().magnitude();
    // (v0 + alpha/noise_den) * grid_den = (a*noise_den + alpha*b) / (b * 2 ell q_mod),
    // using noise_den = advice_count * grid_den.
    let num = a * &params.noise_den + &advice.alpha * b;
    let den = b * &params.advice_count;
    let twice_num = &num << 1u32;
    let n = if twice_num <= den {
        BigUint::zero()
    } else {
        // ceil((2 num - den) / (2 den)) implements round-half-down.
        let (q, r) = (twice_num - &den).div_rem(&(&den << 1u32));
        if r.is_zero() {
            q
        } else {
            q + BigUint::one()
        }
    };
    Ok(if n > params.grid_den {
        params.grid_den.clone()
    } else {
        n
    })
}

/// The pseudo-deterministic prediction `P~(prefix, b, advice; seed)`.
///
/// For `b = 0` this is a grid multiple; for `b = 1` it is exactly one minus
/// the `b = 0` value, so the two outputs always sum to 1.
pub fn pseudo_predict(
    base: &dyn BasePredictor,
    params: &PredictorParams,
    prefix: &[Bit],
    b: Bit,
    advice: &Advice,
    seed: u64,
) -> Result<ExactProb> {
    let n = pseudo_predict_grid(base, params, prefix, advice, seed)?;
    let num = if b { &params.grid_den - &n } else { n };
    Ok(big_ratio(num, params.grid_den.clone()))
}

/// Per-position predictor seed for one side of the codec.
pub fn step_seed(root: u64, role: Role, position: u32) -> u64 {
    derive_seed(root, role, position as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use crate::source::SourceSpec;
    use num_traits::ToPrimitive;

    fn uniform_params() -> (SourceSpec, PredictorParams) {
        let src = SourceSpec::uniform(1, 2).unwrap();
        let params = PredictorParams::new(1, 2, 8).unwrap();
        (src, params)
    }

    #[test]
    fn parameter_chain_example() {
        let (_, params) = uniform_params();
        assert_eq!(params.q_mod(), &BigUint::from(17u32));
        assert_eq!(params.grid(), ratio(1, 1156));
        assert_eq!(params.noise_step(), ratio(1, 78608));
        assert_eq!(params.advice_max(), BigUint::from(67u32));
        assert_eq!(params.base_err(), &BigUint::from(32u32 * 2 * 4913));
        // noise_step < grid, needed for rounding stability.
        assert!(params.noise_step() < params.grid());
    }

    #[test]
    fn oracle_base_examples() {
        let (src, _) = uniform_params();
        let base = OracleBase::new(src);
        assert_eq!(base.predict(&[], true, 0).unwrap(), ratio(1, 2));

        let src = SourceSpec::iid(1, 4, ratio(9, 10)).unwrap();
        let base = OracleBase::new(src);
        assert_eq!(base.predict(&[true], true, 0).unwrap(), ratio(9, 10));

        let src = SourceSpec::markov(
            1,
            2,
            [ratio(1, 2), ratio(1, 2)],
            [[ratio(3, 4), ratio(1, 4)], [ratio(1, 4), ratio(3, 4)]],
        )
        .unwrap();
        let base = OracleBase::new(src);
        assert_eq!(base.predict(&[false], true, 7).unwrap(), ratio(1, 4));
    }

    #[test]
    fn pseudo_predict_keeps_exact_grid_values() {
        let (src, params) = uniform_params();
        let base = OracleBase::new(src);
        let advice = Advice::new(BigUint::zero(), &params).unwrap();
        let out = pseudo_predict(&base, &params, &[], false, &advice, 0).unwrap();
        assert_eq!(out, ratio(1, 2));
        let out1 = pseudo_predict(&base, &params, &[], true, &advice, 0).unwrap();
        assert_eq!(out1, ratio(1, 2));
    }

    #[test]
    fn complement_property_is_structural() {
        let (src, params) = uniform_params();
        let base = AdversarialBase::new(src, params.base_err().clone());
        for seed in 0..50u64 {
            let advice = sample_advice(&params, seed.wrapping_mul(99991));
            let p0 = pseudo_predict(&base, &params, &[true], false, &advice, seed).unwrap();
            let p1 = pseudo_predict(&base, &params, &[true], true, &advice, seed).unwrap();
            assert_eq!(p0 + p1, ExactProb::one());
        }
    }

    #[test]
    fn ties_round_toward_zero() {
        let (_, params) = uniform_params();
        // Base value exactly halfway between grid multiples 1 and 2.
        let half_step = big_ratio(BigUint::from(3u32), &params.grid_den << 1u32);
        let base = ConstBase::new(half_step);
        let advice = Advice::new(BigUint::zero(), &params).unwrap();
        let n = pseudo_predict_grid(&base, &params, &[], &advice, 0).unwrap();
        assert_eq!(n, BigUint::one());
    }

    #[test]
    fn outputs_clamp_into_the_unit_interval() {
        let (_, params) = uniform_params();
        let base = ConstBase::new(ExactProb::one());
        let advice = Advice::new(params.advice_max(), &params).unwrap();
        let n = pseudo_predict_grid(&base, &params, &[], &advice, 1).unwrap();
        assert_eq!(n, params.grid_den().clone());
    }

    #[test]
    fn accuracy_bound_holds_whenever_base_is_accurate() {
        // |P~ - D*| <= 1/q_mod^2 for every advice value, when the base is
        // within 1/base_err.
        let src = SourceSpec::iid(1, 4, ratio(3, 4)).unwrap();
        let params = PredictorParams::new(1, 4, 4).unwrap();
        let base = AdversarialBase::new(src.clone(), params.base_err().clone());
        let tol = big_ratio(BigUint::one(), params.q_mod() * params.q_mod());
        let truth = src.exact_conditional(&[], false).unwrap();
        for alpha in 0u32..64 {
            let advice = Advice::new(BigUint::from(alpha), &params).unwrap();
            for seed in 0..8u64 {
                let out = pseudo_predict(&base, &params, &[], false, &advice, seed).unwrap();
                let diff = if out > truth {
                    out - &truth
                } else {
                    truth.clone() - out
                };
                assert!(diff <= tol, "diff {diff} > {tol} at alpha {alpha}");
            }
        }
    }

    #[test]
    fn non_light_bits_get_multiplicative_accuracy() {
        let src = SourceSpec::iid(1, 4, ratio(3, 4)).unwrap();
        let params = PredictorParams::new(1, 4, 4).unwrap();
        let base = AdversarialBase::new(src.clone(), params.base_err().clone());
        let truth = src.exact_conditional(&[], true).unwrap();
        assert!(truth > params.inv_q_mod());
        let rel = params.inv_q_mod();
        let lo = &truth * (ExactProb::one() - &rel);
        let hi = &truth * (ExactProb::one() + &rel);
        for seed in 0..100u64 {
            let advice = sample_advice(&params, seed);
            let out = pseudo_predict(&base, &params, &[], true, &advice, seed).unwrap();
            assert!(out >= lo && out <= hi, "{out} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn monte_carlo_base_enforces_sample_floor_and_contract() {
        let src = SourceSpec::uniform(1, 4).unwrap();
        let err = BigUint::from(10u32);
        assert!(MonteCarloBase::new(src.clone(), err.clone(), BigUint::from(149u32)).is_err());
        let base = MonteCarloBase::new(src, err, BigUint::from(150u32)).unwrap();
        // Determinism in the seed.
        assert_eq!(
            base.predict(&[], false, 42).unwrap(),
            base.predict(&[], false, 42).unwrap()
        );
        let lo = ratio(2, 5);
        let hi = ratio(3, 5);
        let in_range = (0..200u64)
            .filter(|&s| {
                let v = base.predict(&[], false, s).unwrap();
                v >= lo && v <= hi
            })
            .count();
        assert!(in_range >= 180, "{in_range}/200 within 1/err");
    }

    #[test]
    fn monte_carlo_contract_at_err_100() {
        let src = SourceSpec::iid(1, 4, ratio(9, 10)).unwrap();
        let err = BigUint::from(100u32);
        let base = MonteCarloBase::with_min_trials(src, err).unwrap();
        let lo = ratio(89, 100);
        let hi = ratio(91, 100);
        let in_range = (0..100u64)
            .filter(|&s| {
                let v = base.predict(&[], true, s).unwrap();
                v >= lo && v <= hi
            })
            .count();
        // Contract promises >= 99/100; the Hoeffding sizing overshoots it.
        assert!(in_range >= 97, "{in_range}/100 within 1/err");
    }

    #[test]
    fn monte_carlo_large_path_is_pinned_to_the_truth() {
        let src = SourceSpec::iid(1, 4, ratio(9, 10)).unwrap();
        let err = BigUint::from(1_000_000_000u64);
        let base = MonteCarloBase::with_min_trials(src, err.clone()).unwrap();
        assert!(base.trials() > &BigUint::from(crate::rng::LITERAL_DRAW_LIMIT));
        let tol = big_ratio(BigUint::one(), err);
        let truth = ratio(1, 10);
        for seed in 0..20u64 {
            let v = base.predict(&[], false, seed).unwrap();
            let diff = if v > truth { v - &truth } else { truth.clone() - v };
            assert!(diff <= tol);
        }
    }

    #[test]
    fn advice_sampling_is_uniform_and_deterministic() {
        // ell = 1, q = 7 gives q_mod = 8 and 16 advice values.
        let params = PredictorParams::new(1, 1, 7).unwrap();
        assert_eq!(params.advice_count(), &BigUint::from(16u32));
        assert_eq!(sample_advice(&params, 9).alpha(), sample_advice(&params, 9).alpha());
        let mut counts = [0u32; 16];
        let draws = 10_000;
        for seed in 0..draws {
            let a = sample_advice(&params, seed);
            counts[a.alpha().to_usize().unwrap()] += 1;
        }
        // Chi-squared against uniform: 15 dof, reject far beyond the
        // p = 0.001 quantile (37.7).
        let expected = draws as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 40.0, "chi2 = {chi2}, counts = {counts:?}");
        for c in counts {
            assert!(c > 0);
        }
    }

    #[test]
    fn base_error_check_rejects_weak_bases() {
        let (src, params) = uniform_params();
        let weak = AdversarialBase::new(src.clone(), BigUint::from(100u32));
        assert!(check_base_error(&weak, &params).is_err());
        let exact = OracleBase::new(src);
        assert!(check_base_error(&exact, &params).is_ok());
    }
}
