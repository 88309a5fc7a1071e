//! Support-set text format and line-oriented report writers.
//!
//! ```text
//! # comment
//! informants 2
//! alphabet 1: a b c
//! tuple a x
//! tuple b y 0.25
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::ambiguity::{AmbiguityReport, PropertyReport};
use crate::compress::{AsymptoticRegion, BlockGainReport, RateRegion};
use crate::error::{Error, Result};
use crate::protocol::{ShrinkDiagnostics, SweepReport};
use crate::rational::render;
use crate::support::{Built, Label, SupportBuilder, SupportSet};

/// Whitespace-separated tokens of a line with their 1-based columns,
/// stopping at `#`.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &code[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &code[s..]));
    }
    out.into_iter()
        .map(|(byte, t)| (code[..byte].chars().count() + 1, t))
        .collect()
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the support-set format. Zero-weight tuples are dropped and
/// duplicates collapsed; both are counted in the result.
pub fn parse_support_text(text: &str) -> Result<Built> {
    let mut builder: Option<SupportBuilder> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(raw);
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        match keyword {
            "informants" => {
                if builder.is_some() {
                    return Err(parse_err(line, col, "duplicate 'informants' line"));
                }
                let &[_, (ncol, n)] = toks.as_slice() else {
                    return Err(parse_err(line, col, "expected 'informants N'"));
                };
                let n: usize = n
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| parse_err(line, ncol, format!("invalid informant count '{n}'")))?;
                builder = Some(SupportBuilder::new(n)?);
            }
            "alphabet" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| parse_err(line, col, "'alphabet' before 'informants'"))?;
                let rest = &toks[1..];
                let Some(&(icol, head)) = rest.first() else {
                    return Err(parse_err(line, col, "expected 'alphabet i: labels...'"));
                };
                let (index, labels): (&str, Vec<&str>) = match head.split_once(':') {
                    Some((i, "")) => (i, rest[1..].iter().map(|t| t.1).collect()),
                    Some((i, first)) => (
                        i,
                        std::iter::once(first)
                            .chain(rest[1..].iter().map(|t| t.1))
                            .collect(),
                    ),
                    None => match rest.get(1) {
                        Some((_, ":")) => (head, rest[2..].iter().map(|t| t.1).collect()),
                        _ => return Err(parse_err(line, icol, "expected ':' after informant index")),
                    },
                };
                let i: usize = index
                    .parse()
                    .ok()
                    .filter(|&i| (1..=b.n_informants()).contains(&i))
                    .ok_or_else(|| parse_err(line, icol, format!("invalid informant index '{index}'")))?;
                if labels.is_empty() {
                    return Err(parse_err(line, icol, "empty alphabet"));
                }
                b.declare_alphabet(i - 1, labels.into_iter().map(Label::atom).collect())
                    .map_err(|e| parse_err(line, icol, e.to_string()))?;
            }
            "tuple" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| parse_err(line, col, "'tuple' before 'informants'"))?;
                let n = b.n_informants();
                let values = &toks[1..];
                let (labels, weight) = match values.len() {
                    l if l == n => (values, None),
                    l if l == n + 1 => {
                        let (wcol, w) = values[n];
                        let w: f64 = w
                            .parse()
                            .ok()
                            .filter(|w: &f64| w.is_finite() && *w >= 0.0)
                            .ok_or_else(|| parse_err(line, wcol, format!("invalid weight '{w}'")))?;
                        (&values[..n], Some(w))
                    }
                    l => {
                        let at = values.get(n.min(l)).map_or(raw.len() + 1, |t| t.0);
                        return Err(parse_err(
                            line,
                            at,
                            format!("expected {n} values and an optional weight, found {l} tokens"),
                        ));
                    }
                };
                b.push(labels.iter().map(|t| Label::atom(t.1)).collect(), weight)?;
            }
            other => return Err(parse_err(line, col, format!("unknown keyword '{other}'"))),
        }
    }
    let builder = builder.ok_or_else(|| parse_err(last_line.max(1), 1, "missing 'informants' line"))?;
    builder.build()
}

pub fn parse_support_file(path: impl AsRef<Path>) -> Result<Built> {
    parse_support_text(&std::fs::read_to_string(path)?)
}

/// Canonical text form: declared alphabets in rank order, tuples in canonical order.
pub fn emit_support_text(s: &SupportSet) -> String {
    let mut out = format!("informants {}\n", s.n_informants());
    for (i, a) in s.alphabets().iter().enumerate() {
        let labels: Vec<String> = a.iter().map(Label::to_string).collect();
        let _ = writeln!(out, "alphabet {}: {}", i + 1, labels.join(" "));
    }
    for x in s.vectors() {
        let labels: Vec<String> = x.values().iter().map(Label::to_string).collect();
        let _ = writeln!(out, "tuple {}", labels.join(" "));
    }
    out
}

fn ids(informants: &[usize]) -> String {
    informants
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_ambiguity_report(r: &AmbiguityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "informants\t{}", r.n_informants);
    let _ = writeln!(out, "joint_ambiguity\t{}", r.joint_ambiguity);
    let _ = writeln!(out, "information_ambiguity\t{}", r.information_ambiguity);
    for (i, (mu, info)) in r.per_informant.iter().enumerate() {
        let _ = writeln!(out, "ambiguity[X{}]\t{mu}", i + 1);
        let _ = writeln!(out, "information_ambiguity[X{}]\t{info}", i + 1);
    }
    for t in &r.conditionals {
        for (value, count) in &t.entries {
            let _ = writeln!(
                out,
                "conditional_ambiguity[X{}|X{}={value}]\t{count}",
                t.target + 1,
                t.given + 1
            );
        }
        let _ = writeln!(
            out,
            "max_conditional_ambiguity[X{}|X{}]\t{}",
            t.target + 1,
            t.given + 1,
            t.max
        );
    }
    if let Some(c) = &r.chain {
        let _ = writeln!(out, "chain_bound\t{}", c.bits);
        let _ = writeln!(out, "chain_order\t{}", ids(&c.order));
    }
    out
}

pub fn write_property_report(r: &PropertyReport) -> String {
    let mut out = String::new();
    for c in &r.checks {
        let verdict = if c.passed() { "pass" } else { "fail" };
        let _ = writeln!(
            out,
            "{}\t{verdict}\t{}\t{}",
            c.name,
            c.evaluated,
            c.failures.len()
        );
        for f in &c.failures {
            let _ = writeln!(out, "#\t{}\t{f}", c.name);
        }
    }
    out
}

pub fn write_rate_region(r: &RateRegion) -> String {
    let mut out = String::new();
    for b in &r.subset_bounds {
        let _ = writeln!(
            out,
            "subset {} min_bits {}",
            ids(&b.informants),
            render(&b.min_bits)
        );
    }
    for (a, b) in &r.corners {
        let _ = writeln!(out, "corner {} {}", render(a), render(b));
    }
    let _ = writeln!(out, "cb {}", render(&r.c_b));
    out
}

pub fn write_asymptotic_region(r: &AsymptoticRegion) -> String {
    let mut out = String::new();
    for (informants, v) in &r.subset_bounds {
        let _ = writeln!(out, "subset {} min_bits {v:.12}", ids(informants));
    }
    for (a, b) in &r.corners {
        let _ = writeln!(out, "corner {a:.12} {b:.12}");
    }
    let _ = writeln!(out, "cb {:.12}", r.c_b);
    out
}

/// TSV table over block lengths; the last row is the asymptotic bound.
pub fn write_block_report(r: &BlockGainReport) -> String {
    let mut out = String::from("k\tcb_k\tcb_k_per_block\tgap\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            row.k,
            row.c_b_k,
            render(&row.per_block),
            render(&row.gap)
        );
    }
    if let Some(first) = r.rows.first() {
        let one_shot = first.c_b_k as f64;
        let _ = writeln!(
            out,
            "inf\t-\t{:.12}\t{:.12}",
            r.asymptotic.c_b,
            one_shot - r.asymptotic.c_b
        );
    }
    if let Some(note) = &r.truncated {
        let _ = writeln!(out, "# {note}");
    }
    out
}

pub fn write_sweep_report(r: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol\t{}", r.protocol);
    let _ = writeln!(out, "runs\t{}", r.runs);
    let _ = writeln!(out, "max_informant_bits\t{}", r.max_informant_bits);
    let _ = writeln!(out, "mean_informant_bits\t{}", render(&r.mean_informant_bits));
    for (i, b) in r.per_informant_worst.iter().enumerate() {
        let _ = writeln!(out, "worst_bits[X{}]\t{b}", i + 1);
    }
    let _ = writeln!(out, "max_rounds\t{}", r.max_rounds);
    let _ = writeln!(out, "max_sink_bits\t{}", r.max_sink_bits);
    let _ = writeln!(
        out,
        "adversarial_informant_bits\t{}",
        r.adversarial_informant_bits
    );
    let _ = writeln!(out, "lossless\t{}", r.lossless);
    let _ = writeln!(out, "adversary_matches_max_honest\t{}", r.adversary_matches);
    out
}

pub fn write_shrink_diagnostics(d: &ShrinkDiagnostics) -> String {
    let mut out = String::new();
    for (l, e) in d.eps.iter().enumerate() {
        let _ = writeln!(out, "eps[{}]\t{e:.6}", l + 1);
    }
    let _ = writeln!(out, "eps_max\t{:.6}", d.eps_max);
    match d.bound {
        Some(b) => {
            let _ = writeln!(out, "round_bound\t{b}");
        }
        None => {
            let _ = writeln!(out, "round_bound\tvacuous");
        }
    }
    let _ = writeln!(out, "round_bound_holds\t{}", d.holds);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const A: &str = "# eight pairs\ninformants 2\ntuple 1 1\ntuple 2 1\ntuple 3 1\ntuple 4 1\n\
                     tuple 5 1\ntuple 1 2\ntuple 2 3  # trailing\ntuple 3 4 0.5\n";

    #[test]
    fn parses_fixture_a() {
        let b = parse_support_text(A).unwrap();
        assert_eq!(b.support, fixtures::fixture_a());
        assert_eq!((b.duplicates, b.dropped_zero_weight), (0, 0));
    }

    #[test]
    fn zero_weight_line_changes_nothing() {
        let more = format!("{A}tuple 9 9 0.0\ntuple 1 1\n");
        let b = parse_support_text(&more).unwrap();
        assert_eq!(b.support, fixtures::fixture_a());
        assert_eq!((b.duplicates, b.dropped_zero_weight), (1, 1));
    }

    #[test]
    fn arity_error_has_location() {
        let err = parse_support_text("informants 2\ntuple 1 1\n  tuple 7\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 10)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn other_syntax_errors() {
        for (text, line) in [
            ("tuple 1 1\n", 1),
            ("informants x\n", 1),
            ("informants 2\ninformants 2\n", 2),
            ("informants 2\nalphabet 3: a\n", 2),
            ("informants 2\ntuple 1 1 -1\n", 2),
            ("informants 2\nfoo\n", 2),
        ] {
            match parse_support_text(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_support_text("informants 1\ntuple a 0\n"),
            Err(Error::Degenerate)
        ));
    }

    #[test]
    fn declared_order_and_round_trip() {
        let text = "informants 2\nalphabet 1: c b a\nalphabet 2 : y x\ntuple a x\ntuple c y\ntuple b y\n";
        let s = parse_support_text(text).unwrap().support;
        assert_eq!(
            s.alphabet(0),
            &[Label::atom("c"), Label::atom("b"), Label::atom("a")]
        );
        let again = parse_support_text(&emit_support_text(&s)).unwrap().support;
        assert_eq!(again, s);
    }

    #[test]
    fn columns_count_characters() {
        let toks = tokens("  ab\tcd # ef");
        assert_eq!(toks, vec![(3, "ab"), (6, "cd")]);
    }
}
