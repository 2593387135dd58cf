//! Experiment runners and bound checkers.
//!
//! Each runner drives the codec over a source, aggregates per-trial
//! records, and evaluates the quantitative guarantees it is responsible
//! for. Every verdict is reproducible bit-for-bit from the root seed, and
//! every statistical threshold carries an explicit `3 sigma` Bernoulli
//! slack; exact checks (oracle base, enumeration modes) use zero
//! tolerance.

use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{
    decode, encode, length_bound_bits, robustify_decode, robustify_encode, RobustConfig,
};
use crate::constants::{MEAN_OVERHEAD_LOG_FACTOR, ROBUST_MEAN_LOG_FACTOR, WORST_CASE_LOG_FACTOR};
use crate::numeric::{big_ratio, log2_bounds, ratio, three_sigma_slack};
use crate::predictor::{
    pseudo_predict, pseudo_predict_grid, sample_advice, AdversarialBase, BasePredictor,
    FaultyBase, MonteCarloBase, OracleBase, PredictorParams,
};
use crate::rng::{derive_seed, Role};
use crate::source::{ExactProb, SourceSpec};
use crate::{Error, Result};

/// Which base predictor an experiment runs on.
#[derive(Debug, Clone)]
pub enum PredictorChoice {
    /// The exact conditional oracle.
    Oracle,
    /// Monte-Carlo estimator at the wrapper's required error parameter;
    /// `trials = None` uses the minimal admissible sample count.
    Noisy { trials: Option<BigUint> },
    /// Exactly at the edge of the required error parameter, worst sign
    /// per seed.
    Adversarial,
    /// Violates the contract on `num/den` of its calls.
    Faulty { num: u64, den: u64 },
}

impl PredictorChoice {
    pub fn build(
        &self,
        src: &SourceSpec,
        params: &PredictorParams,
    ) -> Result<Box<dyn BasePredictor>> {
        Ok(match self {
            PredictorChoice::Oracle => Box::new(OracleBase::new(src.clone())),
            PredictorChoice::Noisy { trials } => {
                let err = params.base_err().clone();
                Box::new(match trials {
                    Some(t) => MonteCarloBase::new(src.clone(), err, t.clone())?,
                    None => MonteCarloBase::with_min_trials(src.clone(), err)?,
                })
            }
            PredictorChoice::Adversarial => {
                Box::new(AdversarialBase::new(src.clone(), params.base_err().clone()))
            }
            PredictorChoice::Faulty { num, den } => Box::new(FaultyBase::new(
                src.clone(),
                params.base_err().clone(),
                *num,
                *den,
            )),
        })
    }
}

/// One experiment's knobs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub q: u64,
    /// First coded position; 1 codes the whole string.
    pub k: u32,
    pub trials: u64,
    pub root_seed: u64,
    pub predictor: PredictorChoice,
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<PredictorParams> {
        PredictorParams::new(self.source.n(), self.source.ell(), self.q)
    }
}

/// Directed bounds on a source entropy, in bits.
#[derive(Debug, Clone)]
pub struct EntropyStat {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl EntropyStat {
    pub fn of(src: &SourceSpec) -> Self {
        let (lo, hi) = src.entropy_bounds(32);
        // The true entropy sits in [lo, hi] and within [0, ell]; the hi
        // bound itself may overshoot ell by the rounding slack.
        debug_assert!(!lo.is_negative() && lo <= hi);
        debug_assert!(lo <= BigRational::from_integer(BigInt::from(src.ell())));
        EntropyStat { lo, hi }
    }
}

/// Per-trial record.
///
/// `neg_log_mass` is the dyadic lower bound (error below `2^-32`) of
/// `-log2` of the coded suffix's conditional mass, rendered `num/den`; all
/// inequality checks consume it in the conservative direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_id: u64,
    pub x: String,
    pub neg_log_mass: String,
    pub m_light: u32,
    pub enc_bits: u64,
    pub decode_ok: bool,
    pub fallback_used: bool,
    pub bound_ok: bool,
}

/// One named pass/fail verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn compare(name: &str, lhs: &BigRational, op: &str, rhs: &BigRational, passed: bool) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: format!(
                "{} {} {} ({} vs {})",
                approx(lhs),
                op,
                approx(rhs),
                lhs,
                rhs
            ),
        }
    }
}

fn approx(r: &BigRational) -> String {
    match r.to_f64() {
        Some(f) => format!("{f:.6}"),
        None => "?".to_string(),
    }
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Outcome of an encode/decode experiment (average or conditional mode).
#[derive(Debug, Clone)]
pub struct CodingOutcome {
    pub reports: Vec<TrialReport>,
    pub mean_len_bits: BigRational,
    pub success_rate: BigRational,
    pub bound_rate: BigRational,
    pub frac_no_light: BigRational,
    pub fallback_count: u64,
    pub entropy: EntropyStat,
    pub checks: Vec<Check>,
}

impl CodingOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "trials": self.reports.len(),
            "mean_len_bits": rational_string(&self.mean_len_bits),
            "success_rate": rational_string(&self.success_rate),
            "bound_rate": rational_string(&self.bound_rate),
            "frac_no_light": rational_string(&self.frac_no_light),
            "fallback_count": self.fallback_count,
            "entropy_lo": rational_string(&self.entropy.lo),
            "entropy_hi": rational_string(&self.entropy.hi),
            "checks": self.checks,
        })
    }
}

/// Samples, encodes, and decodes `cfg.trials` times; every trial gets
/// independent encoder/decoder seed streams. `cfg.k = 1` is the
/// whole-string (average-case) mode; larger `k` is suffix-given-prefix
/// coding against the conditional bound.
pub fn run_coding_experiment(cfg: &ExperimentConfig) -> Result<CodingOutcome> {
    let params = cfg.params()?;
    let ell = params.ell();
    if cfg.k == 0 || cfg.k > ell + 1 {
        return Err(Error::InvalidArgument {
            detail: format!("k = {} outside 1..={}", cfg.k, ell + 1),
        });
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument {
            detail: "trials must be positive".into(),
        });
    }
    let base = cfg.predictor.build(&cfg.source, &params)?;
    let delta = ratio(1, cfg.q);

    let reports: Vec<TrialReport> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialReport> {
            let x = cfg.source.sample(derive_seed(cfg.root_seed, Role::Sample, t));
            let trial_root = derive_seed(cfg.root_seed, Role::Trial, t);
            let enc_root = derive_seed(trial_root, Role::Trial, 0);
            let dec_root = derive_seed(trial_root, Role::Trial, 1);

            let enc = encode(base.as_ref(), &params, &x, cfg.k, enc_root)?;
            let enc_bits = enc.serialized_bits();
            let suffix = x.suffix(cfg.k as usize);
            let decode_ok = decode(base.as_ref(), &params, &enc, x.prefix(cfg.k as usize - 1), dec_root)
                .map(|d| d == suffix)
                .unwrap_or(false);

            let bound = length_bound_bits(&cfg.source, &params, &x, cfg.k)?;
            let bound_ok = BigRational::from_integer(enc_bits.into()) <= bound;
            let m_light = cfg.source.light_count(&x, &delta, cfg.k, ell)?;
            let suffix_mass = cfg.source.suffix_mass(&x, cfg.k)?;
            let (neg_log_lo, _) = crate::numeric::neg_log2_bounds(&suffix_mass, 32);

            Ok(TrialReport {
                trial_id: t,
                x: x.to_string(),
                neg_log_mass: rational_string(&neg_log_lo),
                m_light,
                enc_bits,
                decode_ok,
                fallback_used: enc.is_fallback(),
                bound_ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let trials = cfg.trials;
    let count =
        |f: &dyn Fn(&TrialReport) -> bool| reports.iter().filter(|r| f(r)).count() as u64;
    let successes = count(&|r| r.decode_ok);
    let bound_holds = count(&|r| r.bound_ok);
    let no_light = count(&|r| r.m_light == 0);
    let fallback_count = count(&|r| r.fallback_used);
    let total_bits: BigUint = reports.iter().map(|r| BigUint::from(r.enc_bits)).sum();

    let mean_len_bits = big_ratio(total_bits, BigUint::from(trials));
    let success_rate = ratio(successes, trials);
    let bound_rate = ratio(bound_holds, trials);
    let frac_no_light = ratio(no_light, trials);
    let entropy = EntropyStat::of(&cfg.source);

    let mut checks = Vec::new();
    {
        // Round-trip success: >= 1 - 1/q_mod - 3 sigma.
        let p = big_ratio(BigUint::one(), params.q_mod().clone());
        let required = BigRational::one() - &p - three_sigma_slack(&p, trials);
        checks.push(Check::compare(
            "roundtrip-success-rate",
            &success_rate,
            ">=",
            &required,
            success_rate >= required,
        ));
    }
    {
        // Per-trial length bound: >= 1 - 1/(q ell) - 3 sigma.
        let p = big_ratio(
            BigUint::one(),
            BigUint::from(cfg.q) * BigUint::from(ell),
        );
        let required = BigRational::one() - &p - three_sigma_slack(&p, trials);
        checks.push(Check::compare(
            "length-bound-rate",
            &bound_rate,
            ">=",
            &required,
            bound_rate >= required,
        ));
    }
    if cfg.k == 1 {
        // Expected length against the entropy, both directions.
        let nl = BigUint::from(cfg.source.n().max(1)) * BigUint::from(ell);
        let (log_nl_lo, _) = log2_bounds(&nl, &BigUint::one(), 32);
        let cap = &entropy.lo
            + BigRational::from_integer(MEAN_OVERHEAD_LOG_FACTOR.into()) * log_nl_lo;
        checks.push(Check::compare(
            "mean-length-upper",
            &mean_len_bits,
            "<=",
            &cap,
            mean_len_bits <= cap,
        ));
        let floor = &entropy.hi - BigRational::one();
        checks.push(Check::compare(
            "mean-length-floor",
            &mean_len_bits,
            ">=",
            &floor,
            mean_len_bits >= floor,
        ));
    }

    Ok(CodingOutcome {
        reports,
        mean_len_bits,
        success_rate,
        bound_rate,
        frac_no_light,
        fallback_count,
        entropy,
        checks,
    })
}

/// Whole-string average-case experiment (`k = 1`).
pub fn run_average_experiment(cfg: &ExperimentConfig) -> Result<CodingOutcome> {
    let mut cfg = cfg.clone();
    cfg.k = 1;
    run_coding_experiment(&cfg)
}

/// Suffix-given-prefix experiment at the configured `k`.
pub fn run_conditional_experiment(cfg: &ExperimentConfig) -> Result<CodingOutcome> {
    run_coding_experiment(cfg)
}

/// The error parameter `ell^kappa` with `kappa = ceil(C1/eps)` that makes
/// the worst-case light-bit cost absorbable into `eps * (-log2 D(x))`.
pub fn worst_case_q(ell: u32, eps: &BigRational) -> Result<u64> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument {
            detail: "eps must be positive".into(),
        });
    }
    let kappa = crate::numeric::ratio_ceil(
        &(BigRational::from_integer(crate::constants::LIGHT_BITS_LOG_FACTOR.into()) / eps),
    );
    let kappa = kappa.to_u32().ok_or_else(|| Error::InvalidArgument {
        detail: "eps too small".into(),
    })?;
    (ell as u64)
        .checked_pow(kappa)
        .ok_or_else(|| Error::InvalidArgument {
            detail: format!("ell^{kappa} exceeds 64 bits"),
        })
}

/// Outcome of the worst-case enumeration.
#[derive(Debug, Clone)]
pub struct WorstCaseOutcome {
    pub strings: u64,
    pub violations: u64,
    /// Largest `length - ((1+eps)(-log2 D(x)) + C3 log2 n)` over the
    /// support, in bits (negative when everything passes with room).
    pub max_slack_bits: BigRational,
    pub checks: Vec<Check>,
}

impl WorstCaseOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Enumerates every support string and asserts the `(1+eps)` worst-case
/// length bound on each. Oracle base only; requires `ell <= 16`.
pub fn run_worst_case_enumeration(
    cfg: &ExperimentConfig,
    eps: &BigRational,
) -> Result<WorstCaseOutcome> {
    let ell = cfg.source.ell();
    if ell > 16 {
        return Err(Error::SupportTooLarge { ell, max: 16 });
    }
    let params = cfg.params()?;
    let base = OracleBase::new(cfg.source.clone());
    let support = cfg.source.support()?;
    let n_big = BigUint::from(cfg.source.n().max(1));
    let (log_n_lo, _) = log2_bounds(&n_big, &BigUint::one(), 32);
    let header = BigRational::from_integer(WORST_CASE_LOG_FACTOR.into()) * log_n_lo;
    let one_plus_eps = BigRational::one() + eps;

    let slacks: Vec<BigRational> = support
        .par_iter()
        .enumerate()
        .map(|(idx, x)| -> Result<BigRational> {
            let enc = encode(&base, &params, x, 1, derive_seed(cfg.root_seed, Role::Trial, idx as u64))?;
            let bits = BigRational::from_integer(enc.serialized_bits().into());
            let (neg_log_lo, _) = cfg.source.neg_log_mass_bounds(x, 32)?;
            Ok(bits - (&one_plus_eps * neg_log_lo + &header))
        })
        .collect::<Result<Vec<_>>>()?;

    let violations = slacks.iter().filter(|s| s.is_positive()).count() as u64;
    let max_slack_bits = slacks
        .into_iter()
        .max()
        .unwrap_or_else(BigRational::zero);
    let checks = vec![Check {
        name: "worst-case-length".to_string(),
        passed: violations == 0,
        detail: format!(
            "{} support strings, {} violations, max slack {} bits",
            support.len(),
            violations,
            approx(&max_slack_bits)
        ),
    }];
    Ok(WorstCaseOutcome {
        strings: support.len() as u64,
        violations,
        max_slack_bits,
        checks,
    })
}

/// Outcome of the pseudo-determinism measurement.
#[derive(Debug, Clone)]
pub struct PseudoDetOutcome {
    pub trials: u64,
    /// Fraction of (advice, seed-pair) draws where agreement and accuracy
    /// held at every position.
    pub joint_rate: BigRational,
    /// Fraction of calls where the same-seed complement was exact; must
    /// be 1.
    pub complement_rate: BigRational,
    pub checks: Vec<Check>,
}

impl PseudoDetOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Draws advice plus `2 ell` independent seeds per trial and checks the
/// wrapper's three properties at every position of a sampled string:
/// equal outputs across the seed pair, exact complement between the two
/// bit queries, and accuracy `1/q_mod^2` against the exact conditional.
pub fn check_pseudodeterminism(cfg: &ExperimentConfig) -> Result<PseudoDetOutcome> {
    let params = cfg.params()?;
    let ell = params.ell();
    let base = cfg.predictor.build(&cfg.source, &params)?;
    let tolerance = big_ratio(BigUint::one(), params.q_mod() * params.q_mod());

    let results: Vec<(bool, u64, u64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, u64, u64)> {
            let x = cfg.source.sample(derive_seed(cfg.root_seed, Role::Sample, t));
            let advice = sample_advice(&params, derive_seed(cfg.root_seed, Role::Advice, t));
            let trial_root = derive_seed(cfg.root_seed, Role::Trial, t);
            let mut joint = true;
            let mut complement_hits = 0u64;
            for i in 1..=ell {
                let prefix = x.prefix(i as usize - 1);
                let r = derive_seed(trial_root, Role::EncoderStep, i as u64);
                let r2 = derive_seed(trial_root, Role::DecoderStep, i as u64);
                let n_r = pseudo_predict_grid(base.as_ref(), &params, prefix, &advice, r)?;
                let n_r2 = pseudo_predict_grid(base.as_ref(), &params, prefix, &advice, r2)?;
                // Property 2, same seed: exact complement by construction.
                let p0 = pseudo_predict(base.as_ref(), &params, prefix, false, &advice, r)?;
                let p1 = pseudo_predict(base.as_ref(), &params, prefix, true, &advice, r)?;
                if p0.clone() + p1 == ExactProb::one() {
                    complement_hits += 1;
                }
                // Property 1 (and the cross-seed form of property 2).
                if n_r != n_r2 {
                    joint = false;
                }
                // Property 3 at both seeds.
                let truth = cfg.source.exact_conditional(prefix, false)?;
                for n in [&n_r, &n_r2] {
                    let out = big_ratio(n.clone(), params.grid_den().clone());
                    let diff = if out > truth {
                        out - &truth
                    } else {
                        truth.clone() - out
                    };
                    if diff > tolerance {
                        joint = false;
                    }
                }
            }
            Ok((joint, complement_hits, ell as u64))
        })
        .collect::<Result<Vec<_>>>()?;

    let joint_hits = results.iter().filter(|(j, _, _)| *j).count() as u64;
    let complement_hits: u64 = results.iter().map(|(_, c, _)| c).sum();
    let calls: u64 = results.iter().map(|(_, _, n)| n).sum();
    let joint_rate = ratio(joint_hits, cfg.trials);
    let complement_rate = ratio(complement_hits, calls);

    let p = big_ratio(BigUint::one(), params.q_mod().clone());
    let required = BigRational::one() - &p - three_sigma_slack(&p, cfg.trials);
    let checks = vec![
        Check::compare(
            "pseudodeterminism-rate",
            &joint_rate,
            ">=",
            &required,
            joint_rate >= required,
        ),
        Check::compare(
            "complement-exact",
            &complement_rate,
            "==",
            &BigRational::one(),
            complement_rate == BigRational::one(),
        ),
    ];
    Ok(PseudoDetOutcome {
        trials: cfg.trials,
        joint_rate,
        complement_rate,
        checks,
    })
}

/// Outcome of the exact light-bit bound check.
#[derive(Debug, Clone)]
pub struct LightBoundOutcome {
    pub probability: ExactProb,
    pub bound: ExactProb,
    pub checks: Vec<Check>,
}

impl LightBoundOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Exact check that `Pr[some delta-light bit] <= ell * delta`.
/// Enumerates the support, so it is gated to `ell <= 12`.
pub fn check_light_bound(src: &SourceSpec, delta: &ExactProb) -> Result<LightBoundOutcome> {
    if src.ell() > 12 {
        return Err(Error::SupportTooLarge {
            ell: src.ell(),
            max: 12,
        });
    }
    let probability = src.light_event_prob(delta)?;
    let bound = BigRational::from_integer(BigInt::from(src.ell())) * delta;
    let passed = probability <= bound;
    let checks = vec![Check::compare(
        "light-event-bound",
        &probability,
        "<=",
        &bound,
        passed,
    )];
    Ok(LightBoundOutcome {
        probability,
        bound,
        checks,
    })
}

/// Outcome of the robustified per-string experiment.
#[derive(Debug, Clone)]
pub struct RobustOutcome {
    pub strings: u64,
    pub reps_per_string: u64,
    /// Per-string success rates, support order.
    pub per_string_rate: Vec<BigRational>,
    pub min_rate: BigRational,
    /// Mean serialized length weighted by the source mass.
    pub mean_len_bits: BigRational,
    pub entropy: EntropyStat,
    pub checks: Vec<Check>,
}

impl RobustOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs `reps` independent robustified round trips on every support
/// string, asserting the per-string `2/3` success guarantee (with `3
/// sigma` slack) and the mean-length bound `H + C5 log2 n + 1`.
pub fn run_robustified_experiment(
    cfg: &ExperimentConfig,
    robust: &RobustConfig,
    reps: u64,
) -> Result<RobustOutcome> {
    let params = cfg.params()?;
    let base = cfg.predictor.build(&cfg.source, &params)?;
    let support = cfg.source.support()?;
    if reps == 0 || support.is_empty() {
        return Err(Error::InvalidArgument {
            detail: "need a nonempty support and at least one repetition".into(),
        });
    }

    let items: Vec<(usize, u64)> = (0..support.len())
        .flat_map(|si| (0..reps).map(move |r| (si, r)))
        .collect();
    let raw: Vec<(usize, bool, u64)> = items
        .into_par_iter()
        .map(|(si, rep)| -> Result<(usize, bool, u64)> {
            let x = &support[si];
            let string_root = derive_seed(cfg.root_seed, Role::Trial, si as u64);
            let rep_root = derive_seed(string_root, Role::Trial, rep);
            let enc = robustify_encode(
                base.as_ref(),
                &params,
                &cfg.source,
                x,
                robust,
                derive_seed(rep_root, Role::Trial, 0),
            )?;
            let bits = enc.serialized_bits();
            let ok = robustify_decode(base.as_ref(), &params, &enc, derive_seed(rep_root, Role::Trial, 1))
                .map(|d| d == *x)
                .unwrap_or(false);
            Ok((si, ok, bits))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut hits = vec![0u64; support.len()];
    let mut bit_totals = vec![BigUint::zero(); support.len()];
    for (si, ok, bits) in raw {
        if ok {
            hits[si] += 1;
        }
        bit_totals[si] += BigUint::from(bits);
    }
    let per_string_rate: Vec<BigRational> =
        hits.iter().map(|&h| ratio(h, reps)).collect();
    let min_rate = per_string_rate
        .iter()
        .cloned()
        .min()
        .expect("nonempty support");

    let mut mean_len_bits = BigRational::zero();
    for (si, x) in support.iter().enumerate() {
        let mass = cfg.source.mass(x)?;
        let avg = big_ratio(bit_totals[si].clone(), BigUint::from(reps));
        mean_len_bits += mass * avg;
    }

    let entropy = EntropyStat::of(&cfg.source);
    let two_thirds = ratio(2, 3);
    let required = &two_thirds - three_sigma_slack(&two_thirds, reps);
    let n_big = BigUint::from(cfg.source.n().max(1));
    let (log_n_lo, _) = log2_bounds(&n_big, &BigUint::one(), 32);
    let len_cap = &entropy.lo
        + BigRational::from_integer(ROBUST_MEAN_LOG_FACTOR.into()) * log_n_lo
        + BigRational::one();

    let checks = vec![
        Check::compare(
            "robust-per-string-success",
            &min_rate,
            ">=",
            &required,
            min_rate >= required,
        ),
        Check::compare(
            "robust-mean-length",
            &mean_len_bits,
            "<=",
            &len_cap,
            mean_len_bits <= len_cap,
        ),
    ];

    Ok(RobustOutcome {
        strings: support.len() as u64,
        reps_per_string: reps,
        per_string_rate,
        min_rate,
        mean_len_bits,
        entropy,
        checks,
    })
}

/// Writes line-delimited trial records followed by one summary line.
pub fn emit_report(
    path: &std::path::Path,
    reports: &[TrialReport],
    summary: &serde_json::Value,
) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        detail: format!("{}: {e}", path.display()),
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    for r in reports {
        let line = serde_json::to_string(r).expect("report serializes");
        writeln!(w, "{line}").map_err(io_err)?;
    }
    let line = serde_json::to_string(&serde_json::json!({ "summary": summary }))
        .expect("summary serializes");
    writeln!(w, "{line}").map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Reads a report file back: the trial records and the summary value.
pub fn parse_report(path: &std::path::Path) -> Result<(Vec<TrialReport>, serde_json::Value)> {
    let io_err = |e: std::io::Error| Error::Io {
        detail: format!("{}: {e}", path.display()),
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let reader = std::io::BufReader::new(file);
    let mut reports = Vec::new();
    let mut summary = None;
    for line in reader.lines() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedEncoding {
                detail: format!("report line: {e}"),
            })?;
        if let Some(s) = value.get("summary") {
            summary = Some(s.clone());
        } else {
            let report: TrialReport =
                serde_json::from_value(value).map_err(|e| Error::MalformedEncoding {
                    detail: format!("trial record: {e}"),
                })?;
            reports.push(report);
        }
    }
    let summary = summary.ok_or_else(|| Error::MalformedEncoding {
        detail: "report has no summary line".to_string(),
    })?;
    Ok((reports, summary))
}

/// Recomputes the aggregate fields from trial records; used to verify a
/// written report against its summary.
pub fn reaggregate(reports: &[TrialReport]) -> serde_json::Value {
    let trials = reports.len() as u64;
    let total_bits: BigUint = reports.iter().map(|r| BigUint::from(r.enc_bits)).sum();
    let successes = reports.iter().filter(|r| r.decode_ok).count() as u64;
    let bound_holds = reports.iter().filter(|r| r.bound_ok).count() as u64;
    let no_light = reports.iter().filter(|r| r.m_light == 0).count() as u64;
    serde_json::json!({
        "trials": trials,
        "mean_len_bits": rational_string(&big_ratio(total_bits, BigUint::from(trials.max(1)))),
        "success_rate": rational_string(&ratio(successes, trials.max(1))),
        "bound_rate": rational_string(&ratio(bound_holds, trials.max(1))),
        "frac_no_light": rational_string(&ratio(no_light, trials.max(1))),
    })
}
