//! Summary serialization: N-Triples and the JSON report.

use std::io::Write;

use crate::error::Result;
use crate::summarizer::Summary;

/// One `s p o .` line per summary triple.
pub fn write_ntriples<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    for t in &summary.triples {
        writeln!(out, "{t}")?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty-printed `{seeds, k, strategy, nodes, triples, warnings}`.
pub fn write_report<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summarizer::{NodeEntry, Strategy, Warning};
    use crate::term::{Term, Triple};

    fn sample() -> Summary {
        Summary {
            seeds: vec![Term::iri("Person")],
            k: 2,
            strategy: Strategy::ISummary,
            nodes: vec![
                NodeEntry {
                    term: Term::iri("Person"),
                    frequency: 3,
                },
                NodeEntry {
                    term: Term::iri("Organization"),
                    frequency: 2,
                },
            ],
            triples: vec![
                Triple::new(
                    Term::iri("Organization"),
                    Term::iri("affiliatedOf"),
                    Term::iri("Person"),
                ),
                Triple::new(
                    Term::blank("u0"),
                    Term::iri("name"),
                    Term::lang_literal("x", "en"),
                ),
            ],
            warnings: vec![Warning::UnresolvedVariable {
                blank: Term::blank("u0"),
            }],
        }
    }

    #[test]
    fn ntriples_lines() {
        let mut buf = Vec::new();
        write_ntriples(&sample(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "<Organization> <affiliatedOf> <Person> .\n_:u0 <name> \"x\"@en .\n"
        );
    }

    #[test]
    fn report_key_order() {
        let mut buf = Vec::new();
        write_report(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys = [
            "\"seeds\"",
            "\"k\"",
            "\"strategy\"",
            "\"nodes\"",
            "\"triples\"",
            "\"warnings\"",
        ];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["strategy"], "isummary");
        assert_eq!(v["nodes"][1]["frequency"], 2);
        assert_eq!(v["triples"][0][1], "<affiliatedOf>");
        assert_eq!(v["warnings"][0]["kind"], "UnresolvedVariable");
    }
}
