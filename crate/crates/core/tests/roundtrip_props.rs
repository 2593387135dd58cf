//! Property tests: source-model identities, wrapper structure, codec
//! round trips, and container canonicality under random inputs.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use nextbit_codec::codec::{decode, encode, Encoding};
use nextbit_codec::container::{deserialize, serialize};
use nextbit_codec::numeric::ratio;
use nextbit_codec::predictor::{
    pseudo_predict, sample_advice, AdversarialBase, OracleBase, PredictorParams,
};
use nextbit_codec::source::{ExactProb, SourceSpec};
use nextbit_codec::BitString;

fn prob_strategy() -> impl Strategy<Value = ExactProb> {
    (1u64..=16, 0u64..=16).prop_map(|(den, num)| ratio(num.min(den), den))
}

fn source_strategy() -> impl Strategy<Value = SourceSpec> {
    let ell = 1u32..=8;
    let uniform = ell.clone().prop_map(|ell| SourceSpec::uniform(1, ell).unwrap());
    let iid = (ell.clone(), prob_strategy())
        .prop_map(|(ell, p)| SourceSpec::iid(1, ell, p).unwrap());
    let markov = (ell.clone(), prob_strategy(), prob_strategy(), prob_strategy()).prop_map(
        |(ell, s1, a, b)| {
            let one = ExactProb::one();
            SourceSpec::markov(
                1,
                ell,
                [&one - &s1, s1],
                [[&one - &a, a], [&one - &b, b]],
            )
            .unwrap()
        },
    );
    let sampler = (ell, 1u32..=3).prop_flat_map(|(ell, r)| {
        proptest::collection::vec(
            proptest::collection::vec(any::<bool>(), ell as usize),
            1usize << r,
        )
        .prop_map(move |rows| {
            let table = rows.into_iter().map(BitString::from_bits).collect();
            SourceSpec::sampler(1, ell, r, table).unwrap()
        })
    });
    prop_oneof![uniform, iid, markov, sampler]
}

/// A support string drawn from the source by its own sampler.
fn support_sample(src: &SourceSpec, seed: u64) -> BitString {
    src.sample(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn conditionals_normalize_and_chain_to_the_mass(src in source_strategy(), seed in any::<u64>()) {
        let x = support_sample(&src, seed);
        let mut product = ExactProb::one();
        for i in 1..=x.len() {
            let prefix = x.prefix(i - 1);
            let p0 = src.exact_conditional(prefix, false).unwrap();
            let p1 = src.exact_conditional(prefix, true).unwrap();
            prop_assert_eq!(&p0 + &p1, ExactProb::one());
            product *= if x.bit(i) { p1 } else { p0 };
        }
        prop_assert_eq!(product, src.mass(&x).unwrap());
    }

    #[test]
    fn light_counts_are_monotone(src in source_strategy(), seed in any::<u64>(),
                                 d1 in prob_strategy(), d2 in prob_strategy()) {
        let x = support_sample(&src, seed);
        let ell = src.ell();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let m_lo = src.light_count(&x, &lo, 1, ell).unwrap();
        let m_hi = src.light_count(&x, &hi, 1, ell).unwrap();
        prop_assert!(m_lo <= m_hi);
        if ell >= 2 {
            let inner = src.light_count(&x, &hi, 2, ell - 1).unwrap();
            prop_assert!(inner <= m_hi);
        }
    }

    #[test]
    fn wrapper_outputs_complement_and_sit_on_the_grid(
        src in source_strategy(), q in 1u64..=12, seed in any::<u64>(), advice_seed in any::<u64>()
    ) {
        let params = PredictorParams::new(1, src.ell(), q).unwrap();
        let base = AdversarialBase::new(src.clone(), params.base_err().clone());
        let advice = sample_advice(&params, advice_seed);
        let x = support_sample(&src, seed);
        for i in 1..=x.len() {
            let prefix = x.prefix(i - 1);
            let p0 = pseudo_predict(&base, &params, prefix, false, &advice, seed).unwrap();
            let p1 = pseudo_predict(&base, &params, prefix, true, &advice, seed).unwrap();
            prop_assert_eq!(&p0 + &p1, ExactProb::one());
            // Grid membership: p0 * grid_den is an integer within range.
            let scaled = &p0 * BigRational::from_integer(params.grid_den().clone().into());
            prop_assert!(scaled.is_integer());
            prop_assert!(scaled <= BigRational::from_integer(params.grid_den().clone().into()));
            // Accuracy within 1/q_mod^2 of the exact conditional.
            let truth = src.exact_conditional(prefix, false).unwrap();
            let tol = BigRational::new(
                1.into(),
                (params.q_mod() * params.q_mod()).into(),
            );
            let diff = if p0 > truth { p0 - &truth } else { truth.clone() - p0 };
            prop_assert!(diff <= tol);
        }
    }

    #[test]
    fn oracle_round_trip_holds_for_every_source_k_and_q(
        src in source_strategy(), q in 1u64..=12, seed in any::<u64>(), k_pick in 0u32..=9
    ) {
        let ell = src.ell();
        let k = 1 + k_pick % (ell + 1);
        let params = PredictorParams::new(1, ell, q).unwrap();
        let base = OracleBase::new(src.clone());
        let x = support_sample(&src, seed);
        let enc = encode(&base, &params, &x, k, seed).unwrap();
        let decoded = decode(&base, &params, &enc, x.prefix(k as usize - 1), !seed).unwrap();
        prop_assert_eq!(decoded, x.suffix(k as usize));
    }

    #[test]
    fn containers_round_trip(
        v in proptest::collection::vec(any::<bool>(), 0..24),
        raw in proptest::collection::vec(any::<bool>(), 0..24),
        light_bits in proptest::collection::vec(any::<bool>(), 0..6),
        gaps in proptest::collection::vec(1u32..5, 0..6),
        alpha in 0u64..1_000_000,
        n in any::<u64>(),
        k in 1u32..64,
        q in 1u64..1_000_000,
        fallback in any::<bool>(),
    ) {
        let enc = if fallback {
            Encoding::Fallback { raw: BitString::from_bits(raw) }
        } else {
            let mut light = Vec::new();
            let mut index = k;
            for (gap, bit) in gaps.iter().zip(light_bits.iter()) {
                index = index.saturating_add(*gap);
                light.push((index, *bit));
            }
            Encoding::Arithmetic {
                v: BitString::from_bits(v),
                light,
                alpha: BigUint::from(alpha),
                n,
                k,
                q,
            }
        };
        let bytes = serialize(&enc);
        prop_assert_eq!(deserialize(&bytes).unwrap(), enc);
    }

    #[test]
    fn random_bytes_never_panic_and_reserialize_canonically(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        if let Ok(enc) = deserialize(&bytes) {
            prop_assert_eq!(serialize(&enc), bytes);
        }
    }
}
