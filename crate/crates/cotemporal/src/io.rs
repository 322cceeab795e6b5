//! Readers for post records, follower edges, partitions and time flags.

use std::io::BufRead;

use chrono::{DateTime, NaiveDate};
use cotemporal_core::{FollowEdgeList, Partition, PostRecord};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{malformed} of {lines} lines are malformed; is this the right file?")]
    MostlyMalformed { malformed: usize, lines: usize },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Deserialize)]
struct RawRecord {
    post_id: String,
    user_id: String,
    timestamp: i64,
    concepts: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRecords {
    pub records: Vec<PostRecord>,
    /// Non-blank lines seen.
    pub lines: usize,
    pub malformed: usize,
}

/// Line-delimited JSON posts. Blank lines are ignored; malformed lines are
/// counted and skipped unless they make up more than half of the input.
pub fn parse_records<R: BufRead>(reader: R) -> Result<ParsedRecords, FormatError> {
    let mut out = ParsedRecords::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.lines += 1;
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(raw) if !raw.post_id.is_empty() => {
                out.records.push(PostRecord::new(raw.post_id, raw.user_id, raw.timestamp, raw.concepts));
            }
            _ => out.malformed += 1,
        }
    }
    if out.malformed * 2 > out.lines {
        return Err(FormatError::MostlyMalformed { malformed: out.malformed, lines: out.lines });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct ParsedEdges {
    pub edges: FollowEdgeList,
    pub malformed: usize,
    /// Self-loops and repeated pairs.
    pub collapsed: usize,
}

/// Two tab-separated user ids per line. Lines without a tab fall back to
/// whitespace separation.
pub fn load_follow_edges<R: BufRead>(reader: R) -> Result<ParsedEdges, FormatError> {
    let mut out = ParsedEdges::default();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        match fields.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => {
                if !out.edges.insert((*a).to_owned(), (*b).to_owned()) {
                    out.collapsed += 1;
                }
            }
            _ => out.malformed += 1,
        }
    }
    Ok(out)
}

/// `id,label` CSV with a header row. Labels are opaque strings.
pub fn read_partition_csv<R: std::io::Read>(reader: R) -> Result<Partition, FormatError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut pairs = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| FormatError::Line { line: i + 2, message: e.to_string() })?;
        match (row.get(0), row.get(1)) {
            (Some(id), Some(label)) if !id.is_empty() => pairs.push((id.to_owned(), label.to_owned())),
            _ => return Err(FormatError::Line { line: i + 2, message: "expected id,label".into() }),
        }
    }
    Partition::from_assignments(pairs).map_err(|e| FormatError::Line { line: 0, message: e.to_string() })
}

/// Epoch seconds, `YYYY-MM-DD` (midnight UTC) or RFC 3339.
pub fn parse_time(s: &str) -> Result<i64, String> {
    let s = s.trim();
    if let Ok(t) = s.parse::<i64>() {
        return Ok(t);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp());
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|_| format!("cannot parse time `{s}`; use epoch seconds, YYYY-MM-DD or RFC 3339"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_record_with_one_concept() {
        let line = r#"{"post_id":"1","user_id":"u1","timestamp":1290000000,"concepts":["New_Year's_Eve"]}"#;
        let out = parse_records(line.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].concepts.len(), 1);
        assert_eq!(out.records[0].timestamp, 1_290_000_000);
    }

    #[test]
    fn empty_input_and_garbage_lines() {
        let out = parse_records(&b""[..]).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.malformed, 0);

        let r = |i| format!(r#"{{"post_id":"{i}","user_id":"u","timestamp":1,"concepts":[]}}"#);
        let text = format!("{}\n{}\nnot json\n{}\n", r(1), r(2), r(3));
        let out = parse_records(text.as_bytes()).unwrap();
        assert_eq!((out.records.len(), out.malformed), (3, 1));

        assert!(matches!(
            parse_records(format!("{}\nx\ny\n", r(1)).as_bytes()),
            Err(FormatError::MostlyMalformed { malformed: 2, lines: 3 })
        ));
    }

    #[test]
    fn empty_post_id_is_malformed() {
        let text = r#"{"post_id":"","user_id":"u","timestamp":1,"concepts":["a"]}
{"post_id":"x","user_id":"u","timestamp":1,"concepts":["a"]}"#;
        let out = parse_records(text.as_bytes()).unwrap();
        assert_eq!((out.records.len(), out.malformed), (1, 1));
    }

    #[test]
    fn follow_edges_dedup_and_self_loops() {
        let out = load_follow_edges(&b"u1\tu2\nu2\tu1\nu3\tu3\nbad\n"[..]).unwrap();
        assert_eq!(out.edges.len(), 1);
        assert_eq!(out.malformed, 1);
        assert_eq!(out.collapsed, 2);
        let out = load_follow_edges(&b"a\tb\nb\tc\nc\td\n"[..]).unwrap();
        assert_eq!(out.edges.len(), 3);
    }

    #[test]
    fn time_flags() {
        assert_eq!(parse_time("1290000000"), Ok(1_290_000_000));
        assert_eq!(parse_time("2010-11-01"), Ok(1_288_569_600));
        assert_eq!(parse_time("2010-11-01T01:00:00Z"), Ok(1_288_573_200));
        assert!(parse_time("yesterday").is_err());
    }

    #[test]
    fn partition_csv_roundtrip_labels() {
        let p = read_partition_csv(&b"id,label\na,x\nb,x\nc,unclustered\n"[..]).unwrap();
        assert_eq!(p.cluster_count(), 2);
        assert_eq!(p.label("a"), p.label("b"));
        assert!(read_partition_csv(&b"id,label\na,x\na,y\n"[..]).is_err());
    }
}
