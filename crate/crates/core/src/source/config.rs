//! Text configuration format for sources.
//!
//! The grammar is line oriented; statements may also be separated by `;`
//! so a whole source fits on one line. `#` starts a comment. Rationals are
//! written `num/den` or as plain integers.
//!
//! ```text
//! kind = markov
//! n = 1
//! ell = 32
//! start0 = 1/2
//! start1 = 1/2
//! t00 = 3/4
//! t01 = 1/4
//! t10 = 1/4
//! t11 = 3/4
//! ```
//!
//! Kind-specific fields: `p` for `iid_bernoulli`; `start0 start1 t00 t01
//! t10 t11` for `markov`; `r` and one `map <randomness> = <output>` per
//! randomness string for `sampler`. Unknown or missing fields are reported
//! by name.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::bits::BitString;
use crate::{Error, Result};

use super::{SourceKind, SourceSpec};

fn config_err(field: &str, detail: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        detail: detail.into(),
    }
}

fn parse_rational(field: &str, text: &str) -> Result<BigRational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| config_err(field, format!("cannot parse numerator in {text:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| config_err(field, format!("cannot parse denominator in {text:?}")))?;
    if den == BigInt::from(0) {
        return Err(config_err(field, "denominator is zero"));
    }
    Ok(BigRational::new(num, den))
}

fn parse_uint<T: std::str::FromStr>(field: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| config_err(field, format!("cannot parse integer from {text:?}")))
}

/// Parses a source configuration from text. See the module docs for the
/// grammar.
pub fn parse_source_config(text: &str) -> Result<SourceSpec> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut maps: Vec<(BitString, BitString)> = Vec::new();

    for raw_line in text.lines() {
        // Comments run to the end of the line, so strip them before
        // splitting into `;`-separated statements.
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        for raw in line.split(';') {
            let stmt = raw.trim();
            if stmt.is_empty() {
                continue;
            }
            let (key, value) = stmt
                .split_once('=')
                .ok_or_else(|| config_err(stmt, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(randomness) = key.strip_prefix("map ") {
                let r: BitString = randomness
                    .trim()
                    .parse()
                    .map_err(|_| config_err("map", format!("bad randomness bits {randomness:?}")))?;
                let out: BitString = value
                    .parse()
                    .map_err(|_| config_err("map", format!("bad output bits {value:?}")))?;
                maps.push((r, out));
            } else if fields.insert(key.to_string(), value.to_string()).is_some() {
                return Err(config_err(key, "field given twice"));
            }
        }
    }

    let mut take = |key: &str| -> Result<String> {
        fields
            .remove(key)
            .ok_or_else(|| config_err(key, "missing required field"))
    };

    let kind_name = take("kind")?;
    let n: u64 = parse_uint("n", &take("n")?)?;
    let ell: u32 = parse_uint("ell", &take("ell")?)?;

    let kind = match kind_name.as_str() {
        "uniform" => SourceKind::Uniform,
        "iid_bernoulli" => SourceKind::IidBernoulli {
            p: parse_rational("p", &take("p")?)?,
        },
        "markov" => SourceKind::Markov {
            start: [
                parse_rational("start0", &take("start0")?)?,
                parse_rational("start1", &take("start1")?)?,
            ],
            trans: [
                [
                    parse_rational("t00", &take("t00")?)?,
                    parse_rational("t01", &take("t01")?)?,
                ],
                [
                    parse_rational("t10", &take("t10")?)?,
                    parse_rational("t11", &take("t11")?)?,
                ],
            ],
        },
        "sampler" => {
            let r: u32 = parse_uint("r", &take("r")?)?;
            if r > super::SAMPLER_RANDOMNESS_LIMIT {
                return Err(config_err("r", "randomness width too large"));
            }
            let mut table: Vec<Option<BitString>> =
                vec![None; 1usize.checked_shl(r).unwrap_or(0)];
            if table.is_empty() {
                return Err(config_err("r", "randomness width must be positive"));
            }
            for (randomness, output) in maps.drain(..) {
                if randomness.len() != r as usize {
                    return Err(config_err(
                        "map",
                        format!("randomness {randomness} does not have {r} bits"),
                    ));
                }
                let mut idx = 0usize;
                for &b in randomness.as_bits() {
                    idx = (idx << 1) | b as usize;
                }
                if table[idx].replace(output).is_some() {
                    return Err(config_err("map", format!("randomness {randomness} mapped twice")));
                }
            }
            let table: Vec<BitString> = table
                .into_iter()
                .enumerate()
                .map(|(idx, entry)| {
                    entry.ok_or_else(|| {
                        config_err("map", format!("randomness index {idx} has no mapping"))
                    })
                })
                .collect::<Result<_>>()?;
            SourceKind::Sampler {
                randomness_bits: r,
                table,
            }
        }
        other => return Err(config_err("kind", format!("unknown kind {other:?}"))),
    };

    if !maps.is_empty() && !matches!(kind, SourceKind::Sampler { .. }) {
        return Err(config_err("map", "map entries only belong to sampler sources"));
    }
    if let Some(stray) = fields.keys().next() {
        return Err(config_err(stray, "unknown field for this kind"));
    }

    SourceSpec::new(kind, n, ell)
}
