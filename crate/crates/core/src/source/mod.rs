//! Toy distribution families with exactly computable probability mass and
//! conditional next-bit probabilities.
//!
//! These sources are the ground truth the coding guarantees are tested
//! against: every probability is an exact rational, so the chain rule,
//! normalization, and all bound checks hold with zero tolerance. The
//! sampler kind conditions by exhaustive enumeration of its randomness,
//! which is why its randomness width is capped.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bits::{Bit, BitString};
use crate::numeric::{self, neg_log2_bounds};
use crate::rng::DetRng;
use crate::{Error, Result};

/// An exact probability: a rational in `[0, 1]`, never rounded.
pub type ExactProb = BigRational;

/// Maximum output length for operations that enumerate the whole support.
pub const ENUMERATION_LIMIT: u32 = 20;

/// Maximum randomness width of a sampler source.
pub const SAMPLER_RANDOMNESS_LIMIT: u32 = 24;

/// The distribution family of a source.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)] // the sampler table dwarfs the others
pub enum SourceKind {
    /// Uniform over all strings of the output length.
    Uniform,
    /// Independent bits, each 1 with probability `p`.
    IidBernoulli { p: ExactProb },
    /// Binary Markov chain: initial distribution and 2x2 transition matrix,
    /// indexed `start[bit]` and `trans[prev][next]`.
    Markov {
        start: [ExactProb; 2],
        trans: [[ExactProb; 2]; 2],
    },
    /// Deterministic table from `r`-bit randomness to an output string;
    /// the distribution is the push-forward of uniform randomness.
    Sampler {
        randomness_bits: u32,
        /// `table[u]` is the output for randomness `u`, all of output length.
        table: Vec<BitString>,
    },
}

/// A fully described distribution over `{0,1}^ell` with instance index `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    kind: SourceKind,
    n: u64,
    ell: u32,
    /// Sampler outputs sorted lexicographically; empty for other kinds.
    sorted_outputs: Vec<BitString>,
}

fn check_prob(field: &str, p: &ExactProb) -> Result<()> {
    if p.is_negative() || *p > ExactProb::one() {
        return Err(Error::Config {
            field: field.to_string(),
            detail: format!("probability {p} outside [0, 1]"),
        });
    }
    Ok(())
}

impl SourceSpec {
    pub fn uniform(n: u64, ell: u32) -> Result<Self> {
        Self::new(SourceKind::Uniform, n, ell)
    }

    pub fn iid(n: u64, ell: u32, p: ExactProb) -> Result<Self> {
        Self::new(SourceKind::IidBernoulli { p }, n, ell)
    }

    pub fn markov(n: u64, ell: u32, start: [ExactProb; 2], trans: [[ExactProb; 2]; 2]) -> Result<Self> {
        Self::new(SourceKind::Markov { start, trans }, n, ell)
    }

    pub fn sampler(n: u64, ell: u32, randomness_bits: u32, table: Vec<BitString>) -> Result<Self> {
        Self::new(
            SourceKind::Sampler {
                randomness_bits,
                table,
            },
            n,
            ell,
        )
    }

    pub fn new(kind: SourceKind, n: u64, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Config {
                field: "ell".to_string(),
                detail: "output length must be positive".to_string(),
            });
        }
        match &kind {
            SourceKind::Uniform => {}
            SourceKind::IidBernoulli { p } => check_prob("p", p)?,
            SourceKind::Markov { start, trans } => {
                check_prob("start0", &start[0])?;
                check_prob("start1", &start[1])?;
                if &start[0] + &start[1] != ExactProb::one() {
                    return Err(Error::Config {
                        field: "start0".to_string(),
                        detail: "initial distribution must sum to 1".to_string(),
                    });
                }
                for (prev, row) in trans.iter().enumerate() {
                    check_prob(&format!("t{prev}0"), &row[0])?;
                    check_prob(&format!("t{prev}1"), &row[1])?;
                    if &row[0] + &row[1] != ExactProb::one() {
                        return Err(Error::Config {
                            field: format!("t{prev}0"),
                            detail: format!("transition row {prev} must sum to 1"),
                        });
                    }
                }
            }
            SourceKind::Sampler {
                randomness_bits,
                table,
            } => {
                if *randomness_bits == 0 || *randomness_bits > SAMPLER_RANDOMNESS_LIMIT {
                    return Err(Error::Config {
                        field: "r".to_string(),
                        detail: format!(
                            "randomness width must be in 1..={SAMPLER_RANDOMNESS_LIMIT}"
                        ),
                    });
                }
                if table.len() != 1usize << randomness_bits {
                    return Err(Error::Config {
                        field: "map".to_string(),
                        detail: format!(
                            "table has {} entries, expected {}",
                            table.len(),
                            1usize << randomness_bits
                        ),
                    });
                }
                for out in table {
                    if out.len() != ell as usize {
                        return Err(Error::Config {
                            field: "map".to_string(),
                            detail: format!(
                                "table output {out} has length {}, expected {ell}",
                                out.len()
                            ),
                        });
                    }
                }
            }
        }
        let sorted_outputs = match &kind {
            SourceKind::Sampler { table, .. } => {
                let mut sorted = table.clone();
                sorted.sort();
                sorted
            }
            _ => Vec::new(),
        };
        Ok(SourceSpec {
            kind,
            n,
            ell,
            sorted_outputs,
        })
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Number of sampler outputs (with multiplicity) extending `prefix`.
    ///
    /// The outputs are sorted, so the extensions of a prefix form a
    /// contiguous run.
    fn sampler_prefix_count(&self, prefix: &[Bit]) -> u64 {
        let lo = self
            .sorted_outputs
            .partition_point(|s| &s.as_bits()[..prefix.len()] < prefix);
        let hi = self
            .sorted_outputs
            .partition_point(|s| &s.as_bits()[..prefix.len()] <= prefix);
        (hi - lo) as u64
    }

    /// Exact conditional probability of the next bit being 0 after `prefix`.
    ///
    /// Errors with [`Error::ZeroMassPrefix`] when `prefix` is outside the
    /// support; the conditional is undefined there.
    pub fn cond_zero(&self, prefix: &[Bit]) -> Result<ExactProb> {
        if prefix.len() >= self.ell as usize {
            return Err(Error::InvalidArgument {
                detail: format!(
                    "prefix length {} leaves no next bit at ell = {}",
                    prefix.len(),
                    self.ell
                ),
            });
        }
        match &self.kind {
            SourceKind::Uniform => Ok(numeric::ratio(1, 2)),
            SourceKind::IidBernoulli { p } => {
                // Degenerate p makes some prefixes unreachable.
                let q = ExactProb::one() - p;
                for &b in prefix {
                    let pb = if b { p } else { &q };
                    if pb.is_zero() {
                        return Err(Error::ZeroMassPrefix {
                            prefix: prefix.into(),
                        });
                    }
                }
                Ok(q)
            }
            SourceKind::Markov { start, trans } => {
                let mut mass_positive = true;
                let mut prev: Option<Bit> = None;
                for &b in prefix {
                    let step = match prev {
                        None => &start[b as usize],
                        Some(pb) => &trans[pb as usize][b as usize],
                    };
                    if step.is_zero() {
                        mass_positive = false;
                        break;
                    }
                    prev = Some(b);
                }
                if !mass_positive {
                    return Err(Error::ZeroMassPrefix {
                        prefix: prefix.into(),
                    });
                }
                Ok(match prev {
                    None => start[0].clone(),
                    Some(pb) => trans[pb as usize][0].clone(),
                })
            }
            SourceKind::Sampler { .. } => {
                let total = self.sampler_prefix_count(prefix);
                if total == 0 {
                    return Err(Error::ZeroMassPrefix {
                        prefix: prefix.into(),
                    });
                }
                let mut extended = prefix.to_vec();
                extended.push(false);
                let zeros = self.sampler_prefix_count(&extended);
                Ok(numeric::ratio(zeros, total))
            }
        }
    }

    /// Exact conditional probability `D*(b | prefix)`.
    pub fn exact_conditional(&self, prefix: &[Bit], b: Bit) -> Result<ExactProb> {
        let zero = self.cond_zero(prefix)?;
        Ok(if b { ExactProb::one() - zero } else { zero })
    }

    /// Exact mass `D(x)`; zero for strings outside the support.
    pub fn mass(&self, x: &BitString) -> Result<ExactProb> {
        if x.len() != self.ell as usize {
            return Err(Error::InvalidLength {
                expected: self.ell as usize,
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            SourceKind::Uniform => {
                numeric::big_ratio(BigUint::one(), BigUint::one() << self.ell)
            }
            SourceKind::IidBernoulli { p } => {
                let q = ExactProb::one() - p;
                let mut m = ExactProb::one();
                for &b in x.as_bits() {
                    m *= if b { p } else { &q };
                }
                m
            }
            SourceKind::Markov { start, trans } => {
                let mut m = start[x.bit(1) as usize].clone();
                for i in 2..=x.len() {
                    m *= &trans[x.bit(i - 1) as usize][x.bit(i) as usize];
                }
                m
            }
            SourceKind::Sampler {
                randomness_bits, ..
            } => {
                let count = self.sampler_prefix_count(x.as_bits());
                numeric::big_ratio(BigUint::from(count), BigUint::one() << *randomness_bits)
            }
        })
    }

    /// Conditional mass `D*(x_[k:ell] | x_[k-1])`, the quantity the
    /// conditional coding bound compares against. `k = ell + 1` gives 1.
    pub fn suffix_mass(&self, x: &BitString, k: u32) -> Result<ExactProb> {
        if x.len() != self.ell as usize {
            return Err(Error::InvalidLength {
                expected: self.ell as usize,
                got: x.len(),
            });
        }
        let mut m = ExactProb::one();
        for i in k..=self.ell {
            let cond = self.exact_conditional(x.prefix(i as usize - 1), x.bit(i as usize))?;
            m *= cond;
        }
        Ok(m)
    }

    /// Draws a sample; deterministic in `seed`, and distributed exactly as
    /// the source over a uniformly random seed stream.
    pub fn sample(&self, seed: u64) -> BitString {
        let mut rng = DetRng::new(seed);
        match &self.kind {
            SourceKind::Uniform => {
                let mut bits = Vec::with_capacity(self.ell as usize);
                for _ in 0..self.ell {
                    bits.push(rng.next_bit());
                }
                BitString::from_bits(bits)
            }
            SourceKind::IidBernoulli { p } => {
                let mut bits = Vec::with_capacity(self.ell as usize);
                for _ in 0..self.ell {
                    bits.push(rng.bernoulli(p));
                }
                BitString::from_bits(bits)
            }
            SourceKind::Markov { start, trans } => {
                let mut bits = Vec::with_capacity(self.ell as usize);
                let first = rng.bernoulli(&start[1]);
                bits.push(first);
                let mut prev = first;
                for _ in 1..self.ell {
                    let b = rng.bernoulli(&trans[prev as usize][1]);
                    bits.push(b);
                    prev = b;
                }
                BitString::from_bits(bits)
            }
            SourceKind::Sampler {
                randomness_bits,
                table,
            } => {
                let mut idx: usize = 0;
                for _ in 0..*randomness_bits {
                    idx = (idx << 1) | rng.next_bit() as usize;
                }
                table[idx].clone()
            }
        }
    }

    /// Number of positions `i` in `[from, to]` whose observed bit has
    /// conditional probability at most `delta`. An empty range
    /// (`from = to + 1`) counts zero.
    pub fn light_count(
        &self,
        x: &BitString,
        delta: &ExactProb,
        from: u32,
        to: u32,
    ) -> Result<u32> {
        if from == 0 || to as usize > x.len() || from > to + 1 {
            return Err(Error::InvalidArgument {
                detail: format!("light_count range [{from}, {to}] invalid for |x| = {}", x.len()),
            });
        }
        let mut count = 0;
        for i in from..=to {
            let cond = self.exact_conditional(x.prefix(i as usize - 1), x.bit(i as usize))?;
            if cond <= *delta {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Exact probability that a sample has at least one `delta`-light bit,
    /// by enumeration of the support tree. Requires `ell <= 20`.
    pub fn light_event_prob(&self, delta: &ExactProb) -> Result<ExactProb> {
        if self.ell > ENUMERATION_LIMIT {
            return Err(Error::SupportTooLarge {
                ell: self.ell,
                max: ENUMERATION_LIMIT,
            });
        }
        let mut prefix: Vec<Bit> = Vec::with_capacity(self.ell as usize);
        self.light_walk(&mut prefix, &ExactProb::one(), delta)
    }

    fn light_walk(
        &self,
        prefix: &mut Vec<Bit>,
        mass: &ExactProb,
        delta: &ExactProb,
    ) -> Result<ExactProb> {
        let mut acc = ExactProb::zero();
        let zero = self.cond_zero(prefix)?;
        for b in [false, true] {
            let cond = if b { ExactProb::one() - &zero } else { zero.clone() };
            if cond.is_zero() {
                continue;
            }
            let branch_mass = mass * &cond;
            if cond <= *delta {
                // Every completion through this edge has a light bit here.
                acc += branch_mass;
            } else if prefix.len() + 1 < self.ell as usize {
                prefix.push(b);
                acc += self.light_walk(prefix, &branch_mass, delta)?;
                prefix.pop();
            }
        }
        Ok(acc)
    }

    /// All support strings, in lexicographic order. Requires `ell <= 20`.
    pub fn support(&self) -> Result<Vec<BitString>> {
        if self.ell > ENUMERATION_LIMIT {
            return Err(Error::SupportTooLarge {
                ell: self.ell,
                max: ENUMERATION_LIMIT,
            });
        }
        let mut out = Vec::new();
        let mut prefix: Vec<Bit> = Vec::with_capacity(self.ell as usize);
        self.support_walk(&mut prefix, &mut out)?;
        Ok(out)
    }

    fn support_walk(&self, prefix: &mut Vec<Bit>, out: &mut Vec<BitString>) -> Result<()> {
        if prefix.len() == self.ell as usize {
            out.push(BitString::from_bits(prefix.clone()));
            return Ok(());
        }
        let zero = self.cond_zero(prefix)?;
        for b in [false, true] {
            let cond = if b { ExactProb::one() - &zero } else { zero.clone() };
            if cond.is_zero() {
                continue;
            }
            prefix.push(b);
            self.support_walk(prefix, out)?;
            prefix.pop();
        }
        Ok(())
    }

    /// Directed dyadic bounds on the Shannon entropy `H(D)` in bits.
    ///
    /// Uniform and i.i.d./Markov kinds use the closed forms; the sampler
    /// kind enumerates its (at most `2^r`) outputs.
    pub fn entropy_bounds(&self, frac_bits: u32) -> (BigRational, BigRational) {
        match &self.kind {
            SourceKind::Uniform => {
                let h = BigRational::from_integer(BigInt::from(self.ell));
                (h.clone(), h)
            }
            SourceKind::IidBernoulli { p } => {
                let (lo, hi) = binary_entropy_bounds(p, frac_bits);
                let ell = BigRational::from_integer(BigInt::from(self.ell));
                (lo * &ell, hi * ell)
            }
            SourceKind::Markov { start, trans } => {
                let (mut lo, mut hi) = binary_entropy_bounds(&start[1], frac_bits);
                let mut dist = [start[0].clone(), start[1].clone()];
                for _ in 2..=self.ell {
                    for s in 0..2 {
                        if dist[s].is_zero() {
                            continue;
                        }
                        let (row_lo, row_hi) = binary_entropy_bounds(&trans[s][1], frac_bits);
                        lo += &dist[s] * row_lo;
                        hi += &dist[s] * row_hi;
                    }
                    dist = [
                        &dist[0] * &trans[0][0] + &dist[1] * &trans[1][0],
                        &dist[0] * &trans[0][1] + &dist[1] * &trans[1][1],
                    ];
                }
                (lo, hi)
            }
            SourceKind::Sampler {
                randomness_bits, ..
            } => {
                let mut lo = BigRational::zero();
                let mut hi = BigRational::zero();
                let total = BigUint::one() << *randomness_bits;
                let mut i = 0;
                while i < self.sorted_outputs.len() {
                    let mut j = i + 1;
                    while j < self.sorted_outputs.len()
                        && self.sorted_outputs[j] == self.sorted_outputs[i]
                    {
                        j += 1;
                    }
                    let mass =
                        numeric::big_ratio(BigUint::from((j - i) as u64), total.clone());
                    let (t_lo, t_hi) = neg_log2_bounds(&mass, frac_bits);
                    lo += &mass * t_lo;
                    hi += &mass * t_hi;
                    i = j;
                }
                (lo, hi)
            }
        }
    }

    /// Directed bounds on `-log2 D(x)`; errors on zero mass.
    pub fn neg_log_mass_bounds(
        &self,
        x: &BitString,
        frac_bits: u32,
    ) -> Result<(BigRational, BigRational)> {
        let m = self.mass(x)?;
        if m.is_zero() {
            return Err(Error::ZeroMassPrefix { prefix: x.clone() });
        }
        Ok(neg_log2_bounds(&m, frac_bits))
    }
}

/// Directed bounds on the binary entropy `h(p)` in bits.
pub fn binary_entropy_bounds(p: &ExactProb, frac_bits: u32) -> (BigRational, BigRational) {
    let q = ExactProb::one() - p;
    let (mut lo, mut hi) = (BigRational::zero(), BigRational::zero());
    for part in [p, &q] {
        if part.is_zero() || part.is_one() {
            continue;
        }
        let (t_lo, t_hi) = neg_log2_bounds(part, frac_bits);
        lo += part * t_lo;
        hi += part * t_hi;
    }
    (lo, hi)
}

mod config;
pub use config::parse_source_config;
