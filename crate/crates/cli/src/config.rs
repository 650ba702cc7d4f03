//! Command-line arguments. The parsed form doubles as a serializable run
//! configuration, printed with `--emit-config` for the record.

use std::str::FromStr;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use zb_core::continuation::{Approach, LimitProfile};
use zb_core::experiments::SequenceSpec;
use zb_core::fixed::QuadraticSurd;
use zb_core::numeration::parse_digits;
use zb_core::{NumerationSystem, PrincipalBlock};

pub const DEFAULT_DIGITS: usize = 12;
pub const DEFAULT_SYSTEMS: [&str; 5] = ["1,0", "1,1", "2,1", "3,2,1", "9,9"];

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "zb", version, about = "Generalized Zeckendorf expansions and leading-block statistics")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    pub format: Format,
    /// Significant digits for floating-point output.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS, value_parser = clap::value_parser!(u16).range(1..=17).map(usize::from))]
    pub digits: usize,
    /// Worker threads; 1 runs everything sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print this run's configuration as JSON instead of running it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub emit_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Greedy expansion of n over the collection generated by a principal
    /// block: the coefficient function whose convolution with the
    /// fundamental sequence H gives n.
    Expand {
        #[command(flatten)]
        system: SystemArg,
        /// Positive integer to expand.
        #[arg(long, value_parser = positive_integer)]
        n: String,
    },
    /// The family of leading blocks of length s with their Benford
    /// probabilities log_psi(b~ . H-hat / b . H-hat).
    Blocks {
        #[command(flatten)]
        system: SystemArg,
        /// Block length.
        #[arg(long)]
        s: usize,
    },
    /// Probability of one leading block: the strong Benford probability, or
    /// the probability induced by another continuation profile.
    Prob {
        #[command(flatten)]
        system: SystemArg,
        /// Leading block, comma-separated.
        #[arg(long, value_parser = digit_list)]
        lb: String,
        /// Limit profile of the continuation.
        #[arg(long, default_value = "benford", value_parser = profile_name)]
        profile: String,
    },
    /// Empirical leading-block frequencies of an integer sequence against
    /// the strong Benford probabilities.
    Freq {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        sequence: SequenceArg,
        /// Block length.
        #[arg(long)]
        s: usize,
        /// Number of terms.
        #[arg(long, default_value_t = 5000)]
        count: usize,
    },
    /// Sequence synthesized from a continuation profile:
    /// K_n = floor(H_(n+o) + (H_(n+o+1) - H_(n+o)) f({n pi})).
    Synth {
        #[command(flatten)]
        system: SystemArg,
        /// Limit profile f.
        #[arg(long, default_value = "benford", value_parser = profile_name)]
        profile: String,
        /// Number of terms.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Index offset o.
        #[arg(long, default_value_t = 0)]
        offset: usize,
    },
    /// Fractional parts of the inverse continuation applied to a sequence,
    /// with their star discrepancy.
    Equidist {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        sequence: SequenceArg,
        /// Limit profile of the continuation.
        #[arg(long, default_value = "benford", value_parser = profile_name)]
        profile: String,
        /// Number of terms.
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
    /// Running proportion of k^a with a given leading block over windows
    /// H_m <= k^a < H_(m+1), with its closed-form limsup and liminf.
    Oscillate {
        #[command(flatten)]
        system: SystemArg,
        /// Leading block, comma-separated.
        #[arg(long, value_parser = digit_list)]
        lb: String,
        /// Exponent a of the monomial k^a.
        #[arg(long, default_value_t = 1)]
        a: u32,
        /// First window index.
        #[arg(long, default_value_t = 20)]
        m_lo: usize,
        /// Last window index.
        #[arg(long, default_value_t = 30)]
        m_hi: usize,
    },
    /// Within-expansion statistic: the digit-weighted share of summands of a
    /// random n's outer expansion whose terms have leading block b under the
    /// inner system.
    Within {
        /// Outer principal block.
        #[arg(long, default_value = "1,1", value_parser = digit_list)]
        outer: String,
        /// Inner principal block.
        #[arg(long, default_value = "1,0", value_parser = digit_list)]
        inner: String,
        /// Leading block under the inner system.
        #[arg(long, value_parser = digit_list)]
        lb: String,
        /// n is drawn uniformly below K_(t+1).
        #[arg(long, default_value_t = 40)]
        t: usize,
        /// Tolerance around the Benford probability.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Number of sampled n.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Seed for the sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expansion of a real beta in (0, 1) as sum mu(k) theta^k, theta = 1/psi.
    RealExpand {
        #[command(flatten)]
        system: SystemArg,
        /// Real number in (0, 1).
        #[arg(long)]
        beta: f64,
        /// Number of digits.
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// The leading block of length s that carries a sequence with
    /// K_n ~ a psi^n.
    Concentrate {
        #[command(flatten)]
        system: SystemArg,
        /// Limit constant a.
        #[arg(long)]
        a: f64,
        /// Block length.
        #[arg(long)]
        s: usize,
        /// Side from which the fractional parts approach their limit.
        #[arg(long, value_enum, default_value_t = Side::Unknown)]
        approach: Side,
    },
    /// Absolute Benford check: frequency reports of one sequence under
    /// several collections and every block length up to s-max.
    Absolute {
        #[command(flatten)]
        sequence: SequenceArg,
        /// Principal block of a collection; repeat for several.
        #[arg(long = "system", value_parser = digit_list, default_values_t = DEFAULT_SYSTEMS.map(String::from))]
        systems: Vec<String>,
        /// Largest block length.
        #[arg(long, default_value_t = 3)]
        s_max: usize,
        /// Number of terms.
        #[arg(long, default_value_t = 5000)]
        count: usize,
        /// Deviations above this are flagged.
        #[arg(long, default_value_t = zb_core::experiments::DEFAULT_DEVIATION_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SystemArg {
    /// Principal block, comma-separated (1,0 is the Fibonacci system).
    #[arg(long, default_value = "1,0", value_parser = digit_list)]
    pub block: String,
}

impl SystemArg {
    pub fn system(&self) -> zb_core::Result<NumerationSystem> {
        system(&self.block)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SequenceArg {
    /// Integer sequence: power:A, monomial:A, lucas, recurrence:C1,..,Cd/K1,..,Kd,
    /// or floor-geometric:C:GAMMA with C one of golden, lucas, or a rational.
    #[arg(long, default_value = "power:2", value_parser = sequence_name)]
    pub seq: String,
}

impl SequenceArg {
    pub fn spec(&self) -> SequenceSpec {
        parse_sequence(&self.seq).expect("validated at parse time")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
    Unknown,
}

impl From<Side> for Approach {
    fn from(s: Side) -> Self {
        match s {
            Side::Above => Approach::FromAbove,
            Side::Below => Approach::FromBelow,
            Side::Unknown => Approach::Unknown,
        }
    }
}

pub fn system(block: &str) -> zb_core::Result<NumerationSystem> {
    NumerationSystem::new(PrincipalBlock::from_str(block)?)
}

fn digit_list(s: &str) -> Result<String, String> {
    let d = parse_digits(s).map_err(|e| e.to_string())?;
    Ok(d.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
}

fn positive_integer(s: &str) -> Result<String, String> {
    match BigUint::from_str(s.trim()) {
        Ok(n) if n > BigUint::ZERO => Ok(n.to_string()),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn profile_name(s: &str) -> Result<String, String> {
    parse_profile(s, None).map(|_| s.to_string())
}

fn sequence_name(s: &str) -> Result<String, String> {
    parse_sequence(s).map(|_| s.to_string())
}

/// `benford`, `line`, `power:E`, or `interpolated:S` (piecewise-linear
/// through the Benford profile at the length-S block boundaries).
pub fn parse_profile(s: &str, system: Option<&NumerationSystem>) -> Result<LimitProfile, String> {
    let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
    let need = |what: &str| arg.ok_or_else(|| format!("profile `{s}` needs {what}"));
    match kind {
        "line" if arg.is_none() => Ok(LimitProfile::Line),
        "benford" if arg.is_none() => Ok(system.map_or(LimitProfile::Line, LimitProfile::benford)),
        "power" => {
            let e = need("an exponent")?;
            let e: f64 = e.parse().map_err(|_| format!("bad exponent `{e}`"))?;
            LimitProfile::power(e).map_err(|e| e.to_string())
        }
        "interpolated" => {
            let n = need("a block length")?;
            let n: usize = n.parse().map_err(|_| format!("bad block length `{n}`"))?;
            match system {
                Some(sys) => LimitProfile::interpolated_benford(sys, n).map_err(|e| e.to_string()),
                None => Ok(LimitProfile::Line),
            }
        }
        _ => Err(format!("unknown profile `{s}`")),
    }
}

pub fn parse_sequence(s: &str) -> Result<SequenceSpec, String> {
    let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
    let need = || arg.ok_or_else(|| format!("sequence `{s}` needs a parameter"));
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("bad integer `{t}`"));
    let spec = match kind {
        "lucas" if arg.is_none() => SequenceSpec::lucas(),
        "power" => {
            let a = need()?;
            SequenceSpec::Power { base: a.parse().map_err(|_| format!("bad base `{a}`"))? }
        }
        "monomial" => {
            let a = need()?;
            SequenceSpec::Monomial { exponent: a.parse().map_err(|_| format!("bad exponent `{a}`"))? }
        }
        "recurrence" => {
            let (c, k) = need()?.split_once('/').ok_or_else(|| format!("`{s}` needs COEFFS/INIT"))?;
            let coeffs = c.split(',').map(int).collect::<Result<_, _>>()?;
            let init = k.split(',').map(int).collect::<Result<_, _>>()?;
            SequenceSpec::LinearRecurrence { coeffs, init }
        }
        "floor-geometric" => {
            let (c, g) = need()?.split_once(':').ok_or_else(|| format!("`{s}` needs C:GAMMA"))?;
            let c = match c {
                "golden" => QuadraticSurd::golden_over_sqrt5(),
                "lucas" => QuadraticSurd::lucas_leading(),
                r => {
                    let r = rational(r)?;
                    QuadraticSurd::rational(r.numer().clone(), r.denom().magnitude().clone())
                }
            };
            SequenceSpec::FloorGeometric { c, gamma: rational(g)? }
        }
        _ => return Err(format!("unknown sequence `{s}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn rational(t: &str) -> Result<BigRational, String> {
    let bad = || format!("bad rational `{t}`");
    let r = match t.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            if q == num_bigint::BigInt::ZERO {
                return Err(bad());
            }
            BigRational::new(p, q)
        }
        None => BigRational::from_integer(t.trim().parse().map_err(|_| bad())?),
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let argv = ["zb", "--format", "csv", "--digits", "8", "freq", "--block", "2,1", "--seq", "lucas", "--s", "4"];
        let cfg = RunConfig::parse_from(argv);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        let again = serde_json::to_string(&back).unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn every_subcommand_round_trips() {
        let cases: &[&[&str]] = &[
            &["expand", "--n", "243"],
            &["blocks", "--s", "3"],
            &["prob", "--lb", "1,0,0", "--profile", "power:2"],
            &["synth", "--profile", "line"],
            &["equidist", "--seq", "floor-geometric:golden:89/55"],
            &["oscillate", "--lb", "1,0,0"],
            &["within", "--lb", "1,0,1", "--seed", "9"],
            &["real-expand", "--beta", "0.25"],
            &["concentrate", "--a", "1.0", "--s", "4", "--approach", "above"],
            &["absolute", "--seq", "recurrence:1,1/2,1", "--system", "1,0", "--system", "9,9"],
        ];
        for args in cases {
            let cfg = RunConfig::parse_from(std::iter::once("zb").chain(args.iter().copied()));
            let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
            assert_eq!(cfg, back, "{args:?}");
        }
    }

    #[test]
    fn sequences_parse() {
        assert_eq!(parse_sequence("power:3").unwrap(), SequenceSpec::Power { base: 3 });
        assert_eq!(parse_sequence("lucas").unwrap(), SequenceSpec::lucas());
        assert!(parse_sequence("power:1").is_err());
        assert!(parse_sequence("floor-geometric:golden:1/2").is_err());
        let err = parse_sequence("recurrence:1,x/2,1").unwrap_err();
        assert!(err.contains("`x`"), "{err}");
    }

    #[test]
    fn digit_lists_are_normalized() {
        assert_eq!(digit_list(" 1, 0 ,1").unwrap(), "1,0,1");
        assert!(digit_list("1,a").unwrap_err().contains("`a`"));
    }
}
