//! Dispatch from a parsed configuration to the core operations.

use num_bigint::BigUint;
use serde_json::json;
use zb_core::blocks::{self, LeadingBlock};
use zb_core::continuation::{self, LimitProfile};
use zb_core::experiments;
use zb_core::numeration::parse_digits;
use zb_core::{Error, Execution, NumerationSystem, Result};

use crate::config::{self, parse_profile, Command};
use crate::output::{sig, summary, Cell, Output};

pub fn run(command: &Command, exec: Execution, digits: usize) -> Result<Output> {
    let f = |x: f64| sig(x, digits);
    match command {
        Command::Expand { system, n } => {
            let sys = system.system()?;
            let n: BigUint = n.parse().map_err(|_| Error::NonPositive(n.clone()))?;
            let e = sys.expand(&n)?;
            let text = compact(e.digits());
            let json = json!({ "system": sys.id(), "n": n.to_string(), "digits": e.digits(), "length": e.len() });
            Ok(Output::new(json, vec!["n", "digits"], vec![vec![n.to_string().into(), text.clone().into()]])
                .with_text(text))
        }
        Command::Blocks { system, s } => {
            let sys = system.system()?;
            let fam = blocks::enumerate_blocks(*s, &sys)?;
            let probs = fam.probabilities(&sys, exec);
            let rows: Vec<Vec<Cell>> = fam
                .blocks
                .iter()
                .zip(&probs)
                .map(|(b, &p)| vec![b.to_string().into(), blocks::log_position(b, &sys).into(), p.into()])
                .collect();
            let json = json!({
                "system": sys.id(),
                "s": s,
                "exclusive": fam.exclusive.to_string(),
                "blocks": fam.blocks.iter().zip(&probs).map(|(b, p)| json!({
                    "block": b.to_string(),
                    "log_position": blocks::log_position(b, &sys),
                    "probability": p,
                })).collect::<Vec<_>>(),
            });
            Ok(Output::new(json, vec!["block", "log_position", "probability"], rows))
        }
        Command::Prob { system, lb, profile } => {
            let sys = system.system()?;
            let b = LeadingBlock::new(&parse_digits(lb)?, &sys)?;
            let prof = profile_for(profile, &sys)?;
            let p = match prof {
                LimitProfile::Benford { .. } => blocks::benford_probability(&b, &sys)?,
                _ => continuation::profile_probability(&b, &prof, &sys)?,
            };
            let json = json!({ "system": sys.id(), "block": b.to_string(), "profile": prof.name(), "probability": p });
            Ok(Output::new(json, vec!["block", "probability"], vec![vec![b.to_string().into(), p.into()]])
                .with_text(f(p)))
        }
        Command::Freq { system, sequence, s, count } => {
            let sys = system.system()?;
            let r = experiments::empirical_block_frequency(&sequence.spec(), &sys, *s, *count, exec)?;
            let rows = r
                .rows
                .iter()
                .map(|x| {
                    vec![
                        x.block.clone().into(),
                        x.count.into(),
                        x.empirical.into(),
                        x.theoretical.into(),
                        x.deviation.into(),
                    ]
                })
                .collect();
            let json = to_json(&r)?;
            Ok(Output::new(json, vec!["block", "count", "empirical", "theoretical", "deviation"], rows))
        }
        Command::Synth { system, profile, count, offset } => {
            let sys = system.system()?;
            let prof = profile_for(profile, &sys)?;
            let terms = continuation::synthesize(&prof, &sys, *count, *offset, exec)?;
            let strings: Vec<String> = terms.iter().map(BigUint::to_string).collect();
            let rows = strings.iter().enumerate().map(|(i, t)| vec![(i + 1).into(), t.clone().into()]).collect();
            let json = json!({ "system": sys.id(), "profile": prof.name(), "offset": offset, "terms": strings });
            Ok(Output::new(json, vec!["n", "term"], rows).with_text(strings.join(" ")))
        }
        Command::Equidist { system, sequence, profile, count } => {
            let sys = system.system()?;
            let prof = profile_for(profile, &sys)?;
            let terms = experiments::generate(&sequence.spec(), *count, exec)?;
            let parts = continuation::fractional_parts(&terms, &prof, &sys, exec)?;
            let d = continuation::star_discrepancy(&parts, exec)?;
            let rows = parts.iter().enumerate().map(|(i, &p)| vec![(i + 1).into(), p.into()]).collect();
            let json = json!({
                "system": sys.id(),
                "sequence": sequence.seq,
                "profile": prof.name(),
                "count": count,
                "star_discrepancy": d,
                "fractional_parts": parts,
            });
            let text = summary(&[("terms", count.to_string()), ("star discrepancy", f(d))]);
            Ok(Output::new(json, vec!["n", "fractional_part"], rows).with_text(text))
        }
        Command::Oscillate { system, lb, a, m_lo, m_hi } => {
            let sys = system.system()?;
            let b = LeadingBlock::new(&parse_digits(lb)?, &sys)?;
            let t = experiments::oscillation_scan(*a, &b, &sys, *m_lo, *m_hi, exec)?;
            let rows = t.points.iter().map(|p| vec![p.n.into(), p.m.into(), p.p.into(), p.proportion.into()]).collect();
            let mut pairs = vec![
                ("block", t.block.clone()),
                ("exponent", a.to_string()),
                ("windows", format!("{m_lo}..={m_hi}")),
                ("empirical max", f(t.empirical_max)),
                ("empirical min", f(t.empirical_min)),
            ];
            if let Some((sup, inf)) = t.closed_form {
                pairs.extend([("limsup", f(sup)), ("liminf", f(inf))]);
            }
            let text = summary(&pairs);
            Ok(Output::new(to_json(&t)?, vec!["n", "m", "p", "proportion"], rows).with_text(text))
        }
        Command::Within { outer, inner, lb, t, epsilon, samples, seed } => {
            let (outer, inner) = (config::system(outer)?, config::system(inner)?);
            let b = LeadingBlock::new(&parse_digits(lb)?, &inner)?;
            let r = experiments::within_expansion(&outer, &inner, &b, *t, *epsilon, *samples, *seed, exec)?;
            let row = vec![r.t.into(), r.expected.into(), r.fraction.into(), r.mean.into()];
            let text = summary(&[
                ("expected", f(r.expected)),
                ("mean share", f(r.mean)),
                ("fraction within epsilon", f(r.fraction)),
                ("indices with block", format!("{} of {}", r.hits, r.t)),
            ]);
            Ok(Output::new(to_json(&r)?, vec!["t", "expected", "fraction", "mean"], vec![row]).with_text(text))
        }
        Command::RealExpand { system, beta, depth } => {
            let sys = system.system()?;
            let e = continuation::real_expansion(*beta, &sys, *depth)?;
            let text = compact(&e.digits);
            let json = json!({
                "system": sys.id(),
                "beta": beta,
                "digits": e.digits,
                "folded": e.folded,
                "partial_sum": e.partial_sum(&sys),
            });
            Ok(Output::new(json, vec!["beta", "digits"], vec![vec![(*beta).into(), text.clone().into()]])
                .with_text(text))
        }
        Command::Concentrate { system, a, s, approach } => {
            let sys = system.system()?;
            let b = continuation::concentration_block(*a, &sys, *s, (*approach).into())?;
            let json = json!({ "system": sys.id(), "a": a, "s": s, "block": b.to_string() });
            Ok(Output::new(json, vec!["block"], vec![vec![b.to_string().into()]]).with_text(b.to_string()))
        }
        Command::Absolute { sequence, systems, s_max, count, threshold } => {
            let systems = systems.iter().map(|b| config::system(b)).collect::<Result<Vec<NumerationSystem>>>()?;
            let r = experiments::absolute_benford_suite(&sequence.spec(), &systems, *s_max, *count, *threshold, exec)?;
            let rows = r
                .reports
                .iter()
                .map(|x| {
                    let flagged = r.flagged.iter().filter(|d| d.system == x.system && d.s == x.s).count();
                    vec![x.system.clone().into(), x.s.into(), x.max_deviation.into(), flagged.into()]
                })
                .collect();
            Ok(Output::new(to_json(&r)?, vec!["system", "s", "max_deviation", "flagged"], rows))
        }
    }
}

fn profile_for(name: &str, system: &NumerationSystem) -> Result<LimitProfile> {
    parse_profile(name, Some(system)).map_err(Error::InvalidSpec)
}

fn to_json(x: &impl serde::Serialize) -> Result<serde_json::Value> {
    serde_json::to_value(x).map_err(|e| Error::Internal(e.to_string()))
}

/// Digits run together when each is a single decimal digit, else comma-separated.
fn compact(digits: &[u32]) -> String {
    if digits.iter().all(|&d| d < 10) {
        digits.iter().map(u32::to_string).collect()
    } else {
        digits.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}
