//! Golden-vector verification for the container format.
//!
//! A vector file pins input, serialized bytes, and decode output for a
//! handful of configurations. The vectors were generated by the first
//! verified build and then frozen; any drift in the container format or
//! the exact-arithmetic codec path fails at least one of them,
//! independently of the codec's own tests. They also give
//! alternate-language implementations a cross-check target.
//!
//! File format: blocks introduced by `[vector]`, then `key = value` lines
//! (`#` comments allowed). Keys: `name`, `source` (inline source config,
//! `;`-separated), `q`, `k`, `alpha`, `root_seed`, `x`, `bytes` (hex),
//! `decoded` (bits; empty for an empty suffix). Vectors always run against
//! the exact oracle base.

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::codec::{decode, encode_with_advice};
use crate::container::{deserialize, serialize};
use crate::predictor::{Advice, OracleBase, PredictorParams};
use crate::source::parse_source_config;
use crate::{Error, Result};

/// One pinned test vector.
#[derive(Debug, Clone)]
pub struct GoldenVector {
    pub name: String,
    pub source_config: String,
    pub q: u64,
    pub k: u32,
    pub alpha: BigUint,
    pub root_seed: u64,
    pub x: BitString,
    pub expected_bytes: Vec<u8>,
    pub expected_decoded: BitString,
}

/// Verification result for one vector.
#[derive(Debug)]
pub struct VectorReport {
    pub name: String,
    pub result: Result<()>,
}

fn field_err(name: &str, detail: impl Into<String>) -> Error {
    Error::Config {
        field: name.to_string(),
        detail: detail.into(),
    }
}

fn parse_hex(field: &str, text: &str) -> Result<Vec<u8>> {
    let text = text.trim();
    if !text.len().is_multiple_of(2) {
        return Err(field_err(field, "odd number of hex digits"));
    }
    (0..text.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&text[i..i + 2], 16)
                .map_err(|_| field_err(field, format!("bad hex at offset {i}")))
        })
        .collect()
}

/// Parses a vector file.
pub fn parse_vectors(text: &str) -> Result<Vec<GoldenVector>> {
    let mut blocks: Vec<Vec<(String, String)>> = Vec::new();
    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "[vector]" {
            blocks.push(Vec::new());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| field_err(line, "expected `key = value`"))?;
        let block = blocks
            .last_mut()
            .ok_or_else(|| field_err(key.trim(), "field before any [vector] header"))?;
        block.push((key.trim().to_string(), value.trim().to_string()));
    }

    blocks
        .into_iter()
        .enumerate()
        .map(|(idx, fields)| {
            let lookup = |name: &str| -> Result<String> {
                fields
                    .iter()
                    .find(|(k, _)| k == name)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| field_err(name, format!("missing in vector #{idx}")))
            };
            let name = lookup("name")?;
            Ok(GoldenVector {
                source_config: lookup("source")?,
                q: lookup("q")?
                    .parse()
                    .map_err(|_| field_err("q", "not an integer"))?,
                k: lookup("k")?
                    .parse()
                    .map_err(|_| field_err("k", "not an integer"))?,
                alpha: lookup("alpha")?
                    .parse()
                    .map_err(|_| field_err("alpha", "not an integer"))?,
                root_seed: lookup("root_seed")?
                    .parse()
                    .map_err(|_| field_err("root_seed", "not an integer"))?,
                x: lookup("x")?
                    .parse()
                    .map_err(|e| field_err("x", format!("{e}")))?,
                expected_bytes: parse_hex("bytes", &lookup("bytes")?)?,
                expected_decoded: lookup("decoded")?
                    .parse()
                    .map_err(|e| field_err("decoded", format!("{e}")))?,
                name,
            })
        })
        .collect()
}

fn first_divergence(expected: &[u8], got: &[u8]) -> String {
    let limit = expected.len().min(got.len());
    for i in 0..limit {
        if expected[i] != got[i] {
            let diff = expected[i] ^ got[i];
            let bit = diff.leading_zeros() as usize;
            return format!(
                "first divergent bit at byte {i} bit {bit} (expected {:#04x}, got {:#04x})",
                expected[i], got[i]
            );
        }
    }
    format!(
        "lengths differ: expected {} bytes, got {}",
        expected.len(),
        got.len()
    )
}

/// Re-encodes a vector's input with forced advice and seeds, compares the
/// bytes exactly, then decodes the pinned bytes and compares the output.
pub fn verify_vector(v: &GoldenVector) -> Result<()> {
    let mismatch = |detail: String| Error::VectorMismatch {
        vector: v.name.clone(),
        detail,
    };
    let src = parse_source_config(&v.source_config)?;
    let params = PredictorParams::new(src.n(), src.ell(), v.q)?;
    let advice = Advice::new(v.alpha.clone(), &params)
        .map_err(|e| mismatch(format!("advice: {e}")))?;
    let base = OracleBase::new(src.clone());

    let (enc, _) = encode_with_advice(&base, &params, &v.x, v.k, &advice, v.root_seed)?;
    let got = serialize(&enc);
    if got != v.expected_bytes {
        return Err(mismatch(first_divergence(&v.expected_bytes, &got)));
    }

    let parsed = deserialize(&v.expected_bytes)
        .map_err(|e| mismatch(format!("pinned bytes do not parse: {e}")))?;
    let decoded = decode(
        &base,
        &params,
        &parsed,
        v.x.prefix(v.k as usize - 1),
        v.root_seed,
    )?;
    if decoded != v.expected_decoded {
        return Err(mismatch(format!(
            "decode produced {decoded}, expected {}",
            v.expected_decoded
        )));
    }
    Ok(())
}

/// Verifies every vector in a file's text; one report per vector.
pub fn verify_vectors(text: &str) -> Result<Vec<VectorReport>> {
    let vectors = parse_vectors(text)?;
    Ok(vectors
        .iter()
        .map(|v| VectorReport {
            name: v.name.clone(),
            result: verify_vector(v),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# hand-traced container
[vector]
name = uniform-l2-x10
source = kind=uniform; n=1; ell=2
q = 8
k = 1
alpha = 0
root_seed = 7
x = 10
bytes = 288c94
decoded = 10
";

    #[test]
    fn hand_traced_vector_verifies() {
        let reports = verify_vectors(SAMPLE).unwrap();
        assert_eq!(reports.len(), 1);
        assert!(reports[0].result.is_ok(), "{:?}", reports[0].result);
    }

    #[test]
    fn corrupted_vector_is_named_with_the_divergent_bit() {
        let corrupted = SAMPLE.replace("288c94", "288c95");
        let reports = verify_vectors(&corrupted).unwrap();
        match &reports[0].result {
            Err(Error::VectorMismatch { vector, detail }) => {
                assert_eq!(vector, "uniform-l2-x10");
                assert!(detail.contains("byte 2"), "{detail}");
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn missing_fields_are_reported() {
        let err = parse_vectors("[vector]\nname = x\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    /// Regenerates the pinned vector file contents. Run with
    /// `cargo test -p nextbit-codec regenerate_golden_vectors -- --ignored --nocapture`
    /// after an intentional format change, then update
    /// `tests/data/golden_vectors.txt` and re-verify by hand.
    #[test]
    #[ignore]
    fn regenerate_golden_vectors() {
        let specs: &[(&str, &str, u64, u32, u64, u64, &str)] = &[
            ("uniform-l2-x10", "kind=uniform; n=1; ell=2", 8, 1, 0, 7, "10"),
            ("empty-suffix", "kind=uniform; n=1; ell=4", 8, 5, 3, 1, "0110"),
            (
                "iid-light-escape",
                "kind=iid_bernoulli; n=1; ell=16; p=99/100",
                12,
                1,
                40,
                9,
                "1111110111111101",
            ),
            (
                "markov-conditional",
                "kind=markov; n=2; ell=8; start0=1/2; start1=1/2; t00=3/4; t01=1/4; t10=1/4; t11=3/4",
                8,
                5,
                17,
                3,
                "00111101",
            ),
            (
                "sampler-source",
                "kind=sampler; n=1; ell=3; r=2; map 00 = 000; map 01 = 010; map 10 = 010; map 11 = 111",
                4,
                1,
                5,
                11,
                "010",
            ),
            (
                "oracle-fallback",
                "kind=iid_bernoulli; n=1; ell=4; p=15/16",
                8,
                1,
                2,
                5,
                "0000",
            ),
        ];
        for (name, source, q, k, alpha, root_seed, x) in specs {
            let src = parse_source_config(source).unwrap();
            let params = PredictorParams::new(src.n(), src.ell(), *q).unwrap();
            let advice = Advice::new(BigUint::from(*alpha), &params).unwrap();
            let base = OracleBase::new(src.clone());
            let x_bits: BitString = x.parse().unwrap();
            let (enc, _) =
                encode_with_advice(&base, &params, &x_bits, *k, &advice, *root_seed).unwrap();
            let bytes = serialize(&enc);
            let decoded = decode(
                &base,
                &params,
                &enc,
                x_bits.prefix(*k as usize - 1),
                *root_seed,
            )
            .unwrap();
            let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
            let decoded: String = decoded
                .as_bits()
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            println!("[vector]");
            println!("name = {name}");
            println!("source = {source}");
            println!("q = {q}");
            println!("k = {k}");
            println!("alpha = {alpha}");
            println!("root_seed = {root_seed}");
            println!("x = {x}");
            println!("bytes = {hex}");
            println!("decoded = {decoded}");
            println!();
        }
    }
}
