use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContributorId(pub u32);

impl fmt::Display for ContributorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentenceId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    AddContent,
    DeleteContent,
    ReviseSentence,
    Proofread,
    ImproveNavigation,
    AddHyperlink,
}

impl EditKind {
    pub const ALL: [EditKind; 6] = [
        EditKind::AddContent,
        EditKind::DeleteContent,
        EditKind::ReviseSentence,
        EditKind::Proofread,
        EditKind::ImproveNavigation,
        EditKind::AddHyperlink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::AddContent => "add_content",
            EditKind::DeleteContent => "delete_content",
            EditKind::ReviseSentence => "revise_sentence",
            EditKind::Proofread => "proofread",
            EditKind::ImproveNavigation => "improve_navigation",
            EditKind::AddHyperlink => "add_hyperlink",
        }
    }

    /// Kinds that can never move ownership.
    pub fn is_cosmetic(self) -> bool {
        matches!(
            self,
            EditKind::Proofread | EditKind::ImproveNavigation | EditKind::AddHyperlink
        )
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EditKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EditKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SimError::UnknownKind(s.to_string()))
    }
}

/// Assessor-rated magnitude of an edit, 1 (minor) to 5 (major).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Scope(u8);

impl Scope {
    pub fn new(value: u8) -> Result<Self, SimError> {
        if (1..=5).contains(&value) {
            Ok(Self(value))
        } else {
            Err(SimError::InvalidScope(value as i64))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Scope {
    type Error = SimError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Scope::new(value)
    }
}

impl From<Scope> for u8 {
    fn from(s: Scope) -> u8 {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// New sentences, each a list of tokens.
    Add(Vec<Vec<String>>),
    Delete(Vec<SentenceId>),
    /// New token list for one sentence.
    Replace {
        sentence: SentenceId,
        tokens: Vec<String>,
    },
    /// Page-level change that touches no sentence (e.g. section links).
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub editor: ContributorId,
    pub kind: EditKind,
    pub scope: Scope,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: SentenceId,
    pub owner: ContributorId,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WikiPage {
    sentences: Vec<Sentence>,
    revision: u64,
    next_id: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnershipCensus {
    pub revision: u64,
    pub counts: BTreeMap<ContributorId, usize>,
}

impl OwnershipCensus {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn get(&self, who: ContributorId) -> usize {
        self.counts.get(&who).copied().unwrap_or(0)
    }
}

/// Length of the longest common subsequence of two token lists.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Tokens of `before` that were deleted or substituted in `after`:
/// everything outside the longest common subsequence.
pub fn changed_tokens<T: PartialEq>(before: &[T], after: &[T]) -> usize {
    before.len() - lcs_len(before, after)
}

/// True when strictly more than half of the original tokens were changed.
pub fn is_major_revision<T: PartialEq>(before: &[T], after: &[T]) -> bool {
    2 * changed_tokens(before, after) > before.len()
}

impl WikiPage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, id: SentenceId) -> Option<&Sentence> {
        self.position(id).map(|p| &self.sentences[p])
    }

    fn position(&self, id: SentenceId) -> Option<usize> {
        self.sentences.iter().position(|s| s.id == id)
    }

    /// Applies one edit. The page is left untouched when the edit is rejected.
    pub fn apply(&mut self, edit: &Edit) -> Result<(), SimError> {
        use EditKind::*;
        match (&edit.payload, edit.kind) {
            (Payload::Add(new), AddContent) => {
                if new.is_empty() {
                    return Err(SimError::EmptyAdd);
                }
                if new.iter().any(|t| t.is_empty()) {
                    return Err(SimError::EmptySentence);
                }
                for tokens in new {
                    let id = SentenceId(self.next_id);
                    self.next_id += 1;
                    self.sentences.push(Sentence {
                        id,
                        owner: edit.editor,
                        tokens: tokens.clone(),
                    });
                }
            }
            (Payload::Delete(ids), DeleteContent) => {
                if ids.is_empty() {
                    return Err(SimError::EmptyDelete);
                }
                if let Some(missing) = ids.iter().find(|id| self.position(**id).is_none()) {
                    return Err(SimError::UnknownSentence(*missing));
                }
                self.sentences.retain(|s| !ids.contains(&s.id));
            }
            (Payload::Replace { sentence, tokens }, kind)
                if kind == ReviseSentence || kind.is_cosmetic() =>
            {
                if tokens.is_empty() {
                    return Err(SimError::EmptySentence);
                }
                let pos = self
                    .position(*sentence)
                    .ok_or(SimError::UnknownSentence(*sentence))?;
                let s = &mut self.sentences[pos];
                if kind == ReviseSentence && is_major_revision(&s.tokens, tokens) {
                    s.owner = edit.editor;
                }
                s.tokens = tokens.clone();
            }
            (Payload::Empty, kind) if kind.is_cosmetic() => {}
            (_, kind) => return Err(SimError::PayloadMismatch(kind)),
        }
        self.revision += 1;
        Ok(())
    }

    pub fn census(&self) -> OwnershipCensus {
        let mut counts = BTreeMap::new();
        for s in &self.sentences {
            *counts.entry(s.owner).or_insert(0) += 1;
        }
        OwnershipCensus {
            revision: self.revision,
            counts,
        }
    }

    /// Replays a history from an empty page.
    pub fn replay<'a>(edits: impl IntoIterator<Item = &'a Edit>) -> Result<Self, SimError> {
        let mut page = Self::new();
        for e in edits {
            page.apply(e)?;
        }
        Ok(page)
    }
}
