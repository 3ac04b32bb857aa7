//! Descriptor ingestion: JSON files plus inline shorthand.
//!
//! Shorthand forms:
//!   middle:1/3
//!   ifs:0,1:1/4@0,1/4@3/4          (hull_lo,hull_hi then ratio@offset pairs)
//!   gaps:0,1:(2/5,1/2);(3/5,7/10)  (hull then open gaps)

use anyhow::{anyhow, bail, Context, Result};

use thicket::interval::Interval;
use thicket::rational::Q;
use thicket::SetDescriptor;

fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|e| anyhow!("bad rational `{s}`: {e}"))
}

fn parse_hull(s: &str) -> Result<Interval> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("hull must be `lo,hi`, got `{s}`"))?;
    Interval::new(parse_q(lo)?, parse_q(hi)?).map_err(|e| anyhow!("bad hull: {e}"))
}

pub fn parse_descriptor(arg: &str) -> Result<SetDescriptor> {
    if let Some(rest) = arg.strip_prefix("middle:") {
        let eps = parse_q(rest)?;
        return SetDescriptor::middle_epsilon(eps).map_err(|e| anyhow!("{e}"));
    }
    if let Some(rest) = arg.strip_prefix("ifs:") {
        let (hull_part, children_part) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("ifs shorthand is `ifs:lo,hi:r@o,r@o,...`"))?;
        let hull = parse_hull(hull_part)?;
        let mut ratios = Vec::new();
        let mut offsets = Vec::new();
        for pair in children_part.split(',') {
            let (r, o) = pair
                .split_once('@')
                .ok_or_else(|| anyhow!("child must be `ratio@offset`, got `{pair}`"))?;
            ratios.push(parse_q(r)?);
            offsets.push(parse_q(o)?);
        }
        return SetDescriptor::ifs(hull, ratios, offsets).map_err(|e| anyhow!("{e}"));
    }
    if let Some(rest) = arg.strip_prefix("gaps:") {
        let (hull_part, gaps_part) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("gaps shorthand is `gaps:lo,hi:(a,b);(c,d);...`"))?;
        let hull = parse_hull(hull_part)?;
        let mut gaps = Vec::new();
        if !gaps_part.is_empty() {
            for piece in gaps_part.split(';') {
                let inner = piece
                    .trim()
                    .strip_prefix('(')
                    .and_then(|p| p.strip_suffix(')'))
                    .ok_or_else(|| anyhow!("gap must look like `(a,b)`, got `{piece}`"))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| anyhow!("gap must look like `(a,b)`, got `{piece}`"))?;
                gaps.push(
                    Interval::new(parse_q(a)?, parse_q(b)?).map_err(|e| anyhow!("bad gap: {e}"))?,
                );
            }
        }
        return SetDescriptor::explicit_gaps(hull, gaps).map_err(|e| anyhow!("{e}"));
    }
    // Otherwise: a path to a JSON descriptor.
    let text = std::fs::read_to_string(arg)
        .with_context(|| format!("cannot read descriptor file `{arg}`"))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse descriptor `{arg}`"))
}

pub fn parse_q_list(arg: &str) -> Result<Vec<Q>> {
    arg.split(',').map(parse_q).collect()
}

pub fn parse_q_arg(arg: &str) -> Result<Q> {
    parse_q(arg)
}

/// Bob specs: `midpoint:1/2[:factor]`, `gap-seeker[:factor]`,
/// `random[:seed]`, `script:FILE`.
pub enum BobSpec {
    Midpoint { target: Q, factor: Q },
    GapSeeker { factor: Q },
    Random { seed: u64 },
    Script { path: String },
}

pub fn parse_bob(arg: &str) -> Result<BobSpec> {
    let mut parts = arg.split(':');
    match parts.next() {
        Some("midpoint") => {
            let target = parse_q(parts.next().ok_or_else(|| anyhow!("midpoint needs a target"))?)?;
            let factor = match parts.next() {
                Some(f) => parse_q(f)?,
                None => Q::new(1, 2),
            };
            Ok(BobSpec::Midpoint { target, factor })
        }
        Some("gap-seeker") => {
            let factor = match parts.next() {
                Some(f) => parse_q(f)?,
                None => Q::new(1, 2),
            };
            Ok(BobSpec::GapSeeker { factor })
        }
        Some("random") => {
            let seed = match parts.next() {
                Some(s) => s.parse::<u64>().context("random seed must be an integer")?,
                None => 0,
            };
            Ok(BobSpec::Random { seed })
        }
        Some("script") => {
            let path = parts.next().ok_or_else(|| anyhow!("script needs a file path"))?;
            Ok(BobSpec::Script { path: path.to_owned() })
        }
        other => bail!("unknown bob strategy `{other:?}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_forms() {
        let d = parse_descriptor("middle:1/3").unwrap();
        assert!(matches!(d.kind(), thicket::SetKind::MiddleEpsilon { .. }));

        let d = parse_descriptor("ifs:0,1:1/4@0,1/4@3/4").unwrap();
        assert_eq!(d.refine(1).component_count(), 2);

        let d = parse_descriptor("gaps:0,1:(2/5,1/2)").unwrap();
        assert_eq!(d.gaps(1).len(), 1);

        assert!(parse_descriptor("middle:2").is_err());
        assert!(parse_descriptor("ifs:0,1:nope").is_err());
    }
}
