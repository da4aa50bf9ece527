//! Line-delimited revision history.
//!
//! One edit per line, tab separated:
//! `revision  editor  kind  scope  digest`, where `digest` is the first
//! 8 bytes (16 lowercase hex chars) of SHA-256 over the canonical payload.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::page::{ContributorId, Edit, EditKind, Payload, Scope};
use super::SimError;

const DIGEST_HEX_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryRecord {
    pub revision: u64,
    pub editor: ContributorId,
    pub kind: EditKind,
    pub scope: Scope,
    pub digest: String,
}

pub fn payload_digest(payload: &Payload) -> String {
    let mut h = Sha256::new();
    match payload {
        Payload::Add(sentences) => {
            h.update(b"add");
            for tokens in sentences {
                h.update([0x1e]);
                for t in tokens {
                    h.update([0x1f]);
                    h.update(t.as_bytes());
                }
            }
        }
        Payload::Delete(ids) => {
            h.update(b"delete");
            for id in ids {
                h.update(id.0.to_le_bytes());
            }
        }
        Payload::Replace { sentence, tokens } => {
            h.update(b"replace");
            h.update(sentence.0.to_le_bytes());
            for t in tokens {
                h.update([0x1f]);
                h.update(t.as_bytes());
            }
        }
        Payload::Empty => h.update(b"empty"),
    }
    hex::encode(&h.finalize()[..DIGEST_HEX_LEN / 2])
}

impl HistoryRecord {
    /// Record for `edit` applied as the `revision`-th change (1-based).
    pub fn from_edit(revision: u64, edit: &Edit) -> Self {
        Self {
            revision,
            editor: edit.editor,
            kind: edit.kind,
            scope: edit.scope,
            digest: payload_digest(&edit.payload),
        }
    }
}

impl fmt::Display for HistoryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.revision,
            self.editor,
            self.kind,
            self.scope.get(),
            self.digest
        )
    }
}

fn canonical_uint<T: FromStr>(field: &str, line: &str) -> Result<T, SimError> {
    let bad = || SimError::BadRecord(line.to_string());
    // no sign, no leading zeros: keeps parse/format bit-exact
    if field.is_empty()
        || !field.bytes().all(|b| b.is_ascii_digit())
        || (field.len() > 1 && field.starts_with('0'))
    {
        return Err(bad());
    }
    field.parse().map_err(|_| bad())
}

impl FromStr for HistoryRecord {
    type Err = SimError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::BadRecord(line.to_string());
        let fields: Vec<&str> = line.split('\t').collect();
        let [revision, editor, kind, scope, digest] = fields[..] else {
            return Err(bad());
        };
        if digest.len() != DIGEST_HEX_LEN
            || !digest
                .bytes()
                .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
        {
            return Err(bad());
        }
        let scope: u8 = canonical_uint(scope, line)?;
        Ok(Self {
            revision: canonical_uint(revision, line)?,
            editor: ContributorId(canonical_uint(editor, line)?),
            kind: kind.parse()?,
            scope: Scope::new(scope)?,
            digest: digest.to_string(),
        })
    }
}

pub fn write_history<W: Write>(mut out: W, records: &[HistoryRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

pub fn read_history<R: BufRead>(input: R) -> Result<Vec<HistoryRecord>, SimError> {
    input
        .lines()
        .map(|line| {
            let line = line.map_err(|e| SimError::Io(e.to_string()))?;
            line.parse()
        })
        .collect()
}
