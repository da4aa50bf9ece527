//! Sentence-level page simulator with ownership attribution.
//!
//! A sentence belongs to whoever added it until someone changes more than
//! half of its tokens in a single revision, at which point the reviser takes
//! it over. Cosmetic edits (proofreading, navigation, hyperlinks) never move
//! ownership.

mod generate;
mod page;
mod record;

use thiserror::Error;

pub use generate::{
    contributor_id, generate_history, largest_remainder, sentence_targets, HistoryConfig,
    RecordedEdit, FALLBACK_SENTENCES, MAX_EFFORT_DENOMINATOR,
};
pub use page::{
    changed_tokens, is_major_revision, lcs_len, ContributorId, Edit, EditKind, OwnershipCensus,
    Payload, Scope, Sentence, SentenceId, WikiPage,
};
pub use record::{payload_digest, read_history, write_history, HistoryRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown sentence id {}", .0.0)]
    UnknownSentence(SentenceId),
    #[error("add_content edit carries no sentences")]
    EmptyAdd,
    #[error("delete_content edit names no sentences")]
    EmptyDelete,
    #[error("sentences must contain at least one token")]
    EmptySentence,
    #[error("payload does not fit a {0} edit")]
    PayloadMismatch(EditKind),
    #[error("unknown edit kind {0:?}")]
    UnknownKind(String),
    #[error("edit scope must be in 1..=5, got {0}")]
    InvalidScope(i64),
    #[error("malformed history record {0:?}")]
    BadRecord(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Records for a whole history, numbered from revision 1.
pub fn history_records<'a>(edits: impl IntoIterator<Item = &'a Edit>) -> Vec<HistoryRecord> {
    edits
        .into_iter()
        .enumerate()
        .map(|(i, e)| HistoryRecord::from_edit(i as u64 + 1, e))
        .collect()
}

/// Article sizes (edit count, distinct editors) of the nine studied pages.
pub const ARTICLE_PAGES: [(&str, usize, usize); 9] = [
    ("aikido", 72, 62),
    ("angel", 341, 277),
    ("baryon", 73, 62),
    ("board_game", 220, 155),
    ("buckminster_fuller", 65, 55),
    ("cdc", 65, 58),
    ("classical_mechanics", 202, 165),
    ("dartmouth_college", 70, 55),
    ("erin_brockovich", 59, 54),
];

/// Pages used to fit the linear correction; the rest are held out.
pub const TRAINING_PAGES: [&str; 4] = ["aikido", "angel", "baryon", "board_game"];

/// Effort profile where every editor sits on one of a few discrete levels,
/// middle levels being the most common. Each level is used at least once
/// when `editors >= levels.len()`.
pub fn leveled_efforts(
    editors: usize,
    levels: &[f64],
    seed: u64,
) -> Result<crate::game::EffortProfile, crate::game::GameError> {
    use rand::seq::{IndexedRandom, SliceRandom};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = levels.len();
    let weights: Vec<usize> = (0..k).map(|j| 1 + j.min(k - 1 - j)).collect();
    let idx: Vec<usize> = (0..k).collect();
    let mut betas: Vec<f64> = levels.iter().take(editors).copied().collect();
    while betas.len() < editors {
        let j = *idx
            .choose_weighted(&mut rng, |&j| weights[j])
            .expect("non-empty levels");
        betas.push(levels[j]);
    }
    betas.shuffle(&mut rng);
    crate::game::EffortProfile::new(betas)
}
