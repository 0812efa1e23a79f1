//! Line-delimited ledger snapshots.
//!
//! ```text
//! # tangle-snapshot v1
//! # id parent0 parent1 address round
//! 0 0 0 0 0
//! 1 0 0 17 1
//! ```
//!
//! Identities and response markers are not exported.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Address, AttachError, Ledger, TransactionId};

const HEADER: &str = "# tangle-snapshot v1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Attach { line: usize, source: AttachError },
}

pub fn export_snapshot<W: Write>(ledger: &Ledger, mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "# id parent0 parent1 address round")?;
    for tx in ledger.transactions() {
        writeln!(out, "{} {} {} {} {}", tx.id.0, tx.parents[0].0, tx.parents[1].0, tx.issuer_address.0, tx.round)?;
    }
    Ok(())
}

pub fn import_snapshot<R: BufRead>(input: R) -> Result<Ledger, SnapshotError> {
    let mut ledger = Ledger::new();
    let mut saw_genesis = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| SnapshotError::Parse { line: line_no, message };
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|e| parse_err(format!("`{f}`: {e}"))))
            .collect::<Result<_, _>>()?;
        let [id, p0, p1, address, round] = fields[..] else {
            return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
        };
        if !saw_genesis {
            if [id, p0, p1] != [0, 0, 0] {
                return Err(parse_err("first record must be genesis `0 0 0 ...`".into()));
            }
            saw_genesis = true;
            continue;
        }
        if id != ledger.len() as u64 {
            return Err(parse_err(format!("expected id {}, found {id}", ledger.len())));
        }
        ledger
            .attach([TransactionId(p0), TransactionId(p1)], Address(address), None, round)
            .map_err(|source| SnapshotError::Attach { line: line_no, source })?;
        ledger.set_round(ledger.round().max(round));
    }
    if !saw_genesis {
        return Err(SnapshotError::Parse { line: 0, message: "snapshot has no genesis record".into() });
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::tangle::urts_select;

    fn sample_ledger() -> Ledger {
        let mut l = Ledger::new();
        let mut r = rng::stream(11, &[0]);
        for i in 0..40u64 {
            let parents = urts_select(&l, &mut r);
            l.attach(parents, Address(1000 + i), None, 1 + i / 5).unwrap();
        }
        l
    }

    #[test]
    fn golden_prefix() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let a = l.attach([g, g], Address(17), None, 1).unwrap();
        l.attach([a, g], Address(18), None, 2).unwrap();
        let mut buf = Vec::new();
        export_snapshot(&l, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# tangle-snapshot v1\n# id parent0 parent1 address round\n0 0 0 0 0\n1 0 0 17 1\n2 1 0 18 2\n"
        );
    }

    #[test]
    fn export_import_export_is_stable() {
        let l = sample_ledger();
        let mut first = Vec::new();
        export_snapshot(&l, &mut first).unwrap();
        let back = import_snapshot(first.as_slice()).unwrap();
        let mut second = Vec::new();
        export_snapshot(&back, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(back.recompute_tips(), l.recompute_tips());
    }

    #[test]
    fn rejects_forward_references_and_garbage() {
        let bad_parent = "0 0 0 0 0\n1 5 0 1 1\n";
        assert!(matches!(import_snapshot(bad_parent.as_bytes()), Err(SnapshotError::Attach { line: 2, .. })));
        let bad_id = "0 0 0 0 0\n3 0 0 1 1\n";
        assert!(matches!(import_snapshot(bad_id.as_bytes()), Err(SnapshotError::Parse { line: 2, .. })));
        let short = "0 0 0 0\n";
        assert!(import_snapshot(short.as_bytes()).is_err());
        assert!(import_snapshot("".as_bytes()).is_err());
    }
}
