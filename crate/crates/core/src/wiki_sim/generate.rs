//! Seeded synthetic edit streams that are consistent with the equilibrium.
//!
//! For a given effort profile the generator plans how many sentences each
//! contributor owns at the end (proportional to equilibrium ownership), how
//! many edits each makes (one each, the rest proportional to equilibrium
//! content), and the recorded effort of every edit (mean `beta_i` per
//! contributor). It then plays the edit slots in a random order, choosing
//! additions, takeovers, deletions, minor revisions and cosmetic edits while
//! keeping the final census reachable.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::page::{
    is_major_revision, ContributorId, Edit, EditKind, Payload, Scope, SentenceId, WikiPage,
};
use super::SimError;
use crate::equilibrium::closed_form;
use crate::game::EffortProfile;

/// Largest denominator searched when turning effort coefficients into exact
/// integer sentence counts.
pub const MAX_EFFORT_DENOMINATOR: i64 = 1000;
/// Page size used when the profile has no small common denominator.
pub const FALLBACK_SENTENCES: usize = 1000;

const VOCABULARY: u32 = 400;

#[derive(Debug, Clone)]
pub struct HistoryConfig {
    pub editors: usize,
    pub edits: usize,
    pub efforts: EffortProfile,
    pub seed: u64,
}

/// An edit together with the effort its author spent on it.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedEdit {
    pub edit: Edit,
    pub effort: f64,
}

/// Contributor id of the `i`-th entry of an effort profile.
pub fn contributor_id(index: usize) -> ContributorId {
    ContributorId(index as u32 + 1)
}

/// Final sentence counts whose shares equal `ownership` exactly when the
/// efforts share a denominator up to [`MAX_EFFORT_DENOMINATOR`].
pub fn sentence_targets(
    efforts: &EffortProfile,
    active: &[usize],
    ownership: &[f64],
) -> Vec<usize> {
    let betas = efforts.betas();
    for q in 1..=MAX_EFFORT_DENOMINATOR {
        let scaled: Option<Vec<i64>> = active
            .iter()
            .map(|&i| {
                let v = betas[i] * q as f64;
                let r = v.round();
                ((v - r).abs() <= 1e-9 * v.max(1.0) && r >= 1.0).then_some(r as i64)
            })
            .collect();
        let Some(scaled) = scaled else { continue };
        let total: i64 = scaled.iter().sum();
        let others = active.len() as i64 - 1;
        let raw: Vec<i64> = scaled.iter().map(|b| total - others * b).collect();
        if raw.iter().any(|&c| c <= 0) {
            break;
        }
        let g = raw.iter().fold(0, |acc, &c| gcd(acc, c));
        let mut counts = vec![0; betas.len()];
        for (&i, c) in active.iter().zip(raw) {
            counts[i] = (c / g) as usize;
        }
        return counts;
    }
    largest_remainder(ownership, FALLBACK_SENTENCES)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Splits `total` into integers proportional to `weights`.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = total - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Per-edit efforts averaging exactly `beta` (up to rounding).
fn edit_efforts(beta: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let d: f64 = rng.random_range(0.0..0.5);
        out.push(beta * (1.0 + d));
        out.push(beta * (1.0 - d));
    }
    if n % 2 == 1 {
        out.push(beta);
    }
    out.shuffle(rng);
    out
}

fn scope_for(effort: f64) -> Scope {
    Scope::new(effort.round().clamp(1.0, 5.0) as u8).expect("clamped")
}

struct Planner {
    rng: ChaCha8Rng,
    page: WikiPage,
    targets: Vec<usize>,
    owned: Vec<usize>,
    remaining: Vec<usize>,
    fresh: u64,
}

impl Planner {
    fn deficit(&self, i: usize) -> usize {
        self.targets[i].saturating_sub(self.owned[i])
    }

    fn surplus_total(&self) -> usize {
        self.owned
            .iter()
            .zip(&self.targets)
            .map(|(c, p)| c.saturating_sub(*p))
            .sum()
    }

    fn deficit_editors(&self) -> usize {
        (0..self.targets.len())
            .filter(|&i| self.deficit(i) > 0)
            .count()
    }

    fn index_of(&self, who: ContributorId) -> usize {
        who.0 as usize - 1
    }

    /// Sentences whose owner holds more than their target.
    fn surplus_sentences(&self, excluding: Option<usize>) -> Vec<SentenceId> {
        let mut budget: Vec<usize> = self
            .owned
            .iter()
            .zip(&self.targets)
            .map(|(c, p)| c.saturating_sub(*p))
            .collect();
        let mut out = Vec::new();
        for s in self.page.sentences() {
            let j = self.index_of(s.owner);
            if Some(j) != excluding && budget[j] > 0 {
                budget[j] -= 1;
                out.push(s.id);
            }
        }
        out
    }

    fn random_sentence(&mut self) -> Vec<String> {
        let len = self.rng.random_range(3..=14);
        (0..len)
            .map(|_| format!("w{}", self.rng.random_range(0..VOCABULARY)))
            .collect()
    }

    fn fresh_token(&mut self) -> String {
        self.fresh += 1;
        format!("n{}", self.fresh)
    }

    /// Replaces `count` distinct positions with unseen tokens, so exactly
    /// `count` original tokens fall outside the common subsequence.
    fn substitute(&mut self, tokens: &[String], count: usize) -> Vec<String> {
        let mut positions: Vec<usize> = (0..tokens.len()).collect();
        positions.shuffle(&mut self.rng);
        let mut out = tokens.to_vec();
        for &p in positions.iter().take(count) {
            out[p] = self.fresh_token();
        }
        out
    }

    fn add(&mut self, i: usize, k: usize) -> Payload {
        self.owned[i] += k;
        Payload::Add((0..k).map(|_| self.random_sentence()).collect())
    }

    fn takeover(&mut self, i: usize, id: SentenceId) -> (EditKind, Payload) {
        let tokens = self
            .page
            .sentence(id)
            .expect("live sentence")
            .tokens
            .clone();
        let from = self.index_of(self.page.sentence(id).unwrap().owner);
        let count = tokens.len() / 2 + 1;
        let new = self.substitute(&tokens, count);
        debug_assert!(is_major_revision(&tokens, &new));
        self.owned[from] -= 1;
        self.owned[i] += 1;
        (
            EditKind::ReviseSentence,
            Payload::Replace {
                sentence: id,
                tokens: new,
            },
        )
    }

    fn delete(&mut self, ids: Vec<SentenceId>) -> (EditKind, Payload) {
        for id in &ids {
            let j = self.index_of(self.page.sentence(*id).unwrap().owner);
            self.owned[j] -= 1;
        }
        (EditKind::DeleteContent, Payload::Delete(ids))
    }

    fn minor_revision(&mut self, id: SentenceId) -> (EditKind, Payload) {
        let tokens = self.page.sentence(id).unwrap().tokens.clone();
        let count = self.rng.random_range(0..=tokens.len() / 2);
        let mut new = self.substitute(&tokens, count);
        let inserts = if count == 0 {
            1
        } else {
            self.rng.random_range(0..=2)
        };
        for _ in 0..inserts {
            let at = self.rng.random_range(0..=new.len());
            let t = self.fresh_token();
            new.insert(at, t);
        }
        debug_assert!(!is_major_revision(&tokens, &new));
        (
            EditKind::ReviseSentence,
            Payload::Replace {
                sentence: id,
                tokens: new,
            },
        )
    }

    fn cosmetic(&mut self) -> (EditKind, Payload) {
        let kind = *[
            EditKind::Proofread,
            EditKind::AddHyperlink,
            EditKind::ImproveNavigation,
        ]
        .choose(&mut self.rng)
        .unwrap();
        let ids: Vec<SentenceId> = self.page.sentences().iter().map(|s| s.id).collect();
        let target = ids.choose(&mut self.rng).copied();
        match (kind, target) {
            (EditKind::ImproveNavigation, _) | (_, None) => {
                (EditKind::ImproveNavigation, Payload::Empty)
            }
            (kind, Some(id)) => {
                let mut tokens = self.page.sentence(id).unwrap().tokens.clone();
                let p = self.rng.random_range(0..tokens.len());
                tokens[p] = if kind == EditKind::AddHyperlink {
                    format!("[[{}]]", tokens[p])
                } else {
                    self.fresh_token()
                };
                (
                    kind,
                    Payload::Replace {
                        sentence: id,
                        tokens,
                    },
                )
            }
        }
    }

    /// Chooses the edit for contributor `i`; `left` counts slots still to
    /// play, this one included.
    fn choose(&mut self, i: usize, left: usize) -> (EditKind, Payload) {
        let deficit = self.deficit(i);

        // Last chance for i to reach its target.
        if self.remaining[i] == 1 && deficit > 0 {
            if deficit == 1 && self.rng.random_bool(0.5) {
                if let Some(&id) = self.surplus_sentences(Some(i)).choose(&mut self.rng) {
                    return self.takeover(i, id);
                }
            }
            return (EditKind::AddContent, self.add(i, deficit));
        }

        // Slots not reserved for some contributor's final top-up.
        let free_after = (left - 1) - self.deficit_editors();
        let surplus = self.surplus_total();
        if surplus > 0 && free_after == 0 {
            let ids = self.surplus_sentences(None);
            return self.delete(ids);
        }

        let takeovers = self.surplus_sentences(Some(i));
        let revisable: Vec<SentenceId> = self
            .page
            .sentences()
            .iter()
            .filter(|s| s.tokens.len() >= 2)
            .map(|s| s.id)
            .collect();
        let options = [
            (0, 3u32),
            (1, if takeovers.is_empty() { 0 } else { 2 }),
            (2, if surplus > 0 { 1 } else { 0 }),
            (3, if revisable.is_empty() { 0 } else { 3 }),
            (4, 2),
        ];
        let action = options
            .choose_weighted(&mut self.rng, |o| o.1)
            .expect("cosmetic edits are always possible")
            .0;
        match action {
            0 => {
                let k = self.rng.random_range(1..=3);
                let fills = deficit > 0 && deficit <= k;
                let overshoots = self.owned[i] + k > self.targets[i];
                let deficits_after = self.deficit_editors() - usize::from(fills);
                if !overshoots || (left - 1) - deficits_after >= 1 {
                    (EditKind::AddContent, self.add(i, k))
                } else if deficit > 0 {
                    (EditKind::AddContent, self.add(i, deficit))
                } else {
                    self.cosmetic()
                }
            }
            1 => {
                let id = *takeovers.choose(&mut self.rng).unwrap();
                self.takeover(i, id)
            }
            2 => {
                let mut ids = self.surplus_sentences(None);
                ids.shuffle(&mut self.rng);
                let n = self.rng.random_range(1..=ids.len());
                ids.truncate(n);
                self.delete(ids)
            }
            3 => {
                let id = *revisable.choose(&mut self.rng).unwrap();
                self.minor_revision(id)
            }
            _ => self.cosmetic(),
        }
    }
}

/// Generates a reproducible edit stream for `config`.
pub fn generate_history(config: &HistoryConfig) -> Result<Vec<RecordedEdit>, SimError> {
    let n = config.editors;
    if n < 2 || config.edits < n {
        return Err(SimError::InvalidConfig(format!(
            "need edits >= editors >= 2, got {} edits for {} editors",
            config.edits, n
        )));
    }
    if config.efforts.len() != n {
        return Err(SimError::InvalidConfig(format!(
            "{} effort coefficients for {} editors",
            config.efforts.len(),
            n
        )));
    }
    let eq = closed_form(&config.efforts).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let targets = sentence_targets(&config.efforts, &eq.active, &eq.ownership);

    let extra = largest_remainder(&eq.strategies, config.edits - n);
    let counts: Vec<usize> = extra.iter().map(|e| e + 1).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut efforts: Vec<Vec<f64>> = config
        .efforts
        .betas()
        .iter()
        .zip(&counts)
        .map(|(&b, &c)| edit_efforts(b, c, &mut rng))
        .collect();
    let mut slots: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect();
    slots.shuffle(&mut rng);

    let mut planner = Planner {
        rng,
        page: WikiPage::new(),
        owned: vec![0; n],
        remaining: counts,
        targets,
        fresh: 0,
    };

    let mut out = Vec::with_capacity(config.edits);
    for (t, &i) in slots.iter().enumerate() {
        let (kind, payload) = planner.choose(i, slots.len() - t);
        planner.remaining[i] -= 1;
        let effort = efforts[i].pop().expect("one effort per slot");
        let edit = Edit {
            editor: contributor_id(i),
            kind,
            scope: scope_for(effort),
            payload,
        };
        planner.page.apply(&edit)?;
        out.push(RecordedEdit { edit, effort });
    }

    let census = planner.page.census();
    for (i, &want) in planner.targets.iter().enumerate() {
        if census.get(contributor_id(i)) != want {
            return Err(SimError::InvalidConfig(format!(
                "generator missed the target census for contributor {}",
                contributor_id(i)
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(betas: &[f64], edits: usize, seed: u64) -> HistoryConfig {
        HistoryConfig {
            editors: betas.len(),
            edits,
            efforts: EffortProfile::new(betas.to_vec()).unwrap(),
            seed,
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_history(&config(&[1.0, 1.0], 10, 7)).unwrap();
        let b = generate_history(&config(&[1.0, 1.0], 10, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_history(&config(&[1.0, 1.0], 10, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn census_matches_equilibrium_shares() {
        let edits = generate_history(&config(&[1.0, 1.5, 2.0], 30, 3)).unwrap();
        let page = WikiPage::replay(edits.iter().map(|r| &r.edit)).unwrap();
        let census = page.census();
        let total = census.total() as f64;
        let shares: Vec<f64> = (0..3)
            .map(|i| census.get(contributor_id(i)) as f64 / total)
            .collect();
        for (s, w) in shares.iter().zip([5.0 / 9.0, 3.0 / 9.0, 1.0 / 9.0]) {
            assert!((s - w).abs() < 1e-15);
        }
    }

    #[test]
    fn every_editor_edits_and_efforts_average_to_beta() {
        let betas = [1.0, 1.5, 2.0, 4.0];
        let edits = generate_history(&config(&betas, 40, 11)).unwrap();
        assert_eq!(edits.len(), 40);
        for (i, &b) in betas.iter().enumerate() {
            let mine: Vec<f64> = edits
                .iter()
                .filter(|r| r.edit.editor == contributor_id(i))
                .map(|r| r.effort)
                .collect();
            assert!(!mine.is_empty());
            let mean = mine.iter().sum::<f64>() / mine.len() as f64;
            assert!((mean - b).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_editor_ends_with_nothing() {
        let edits = generate_history(&config(&[1.0, 1.0, 2.0, 3.0], 25, 5)).unwrap();
        let page = WikiPage::replay(edits.iter().map(|r| &r.edit)).unwrap();
        let census = page.census();
        assert_eq!(census.get(contributor_id(2)), 0);
        assert_eq!(census.get(contributor_id(3)), 0);
        assert_eq!(census.get(contributor_id(0)), census.get(contributor_id(1)));
    }

    #[test]
    fn irrational_profile_uses_rounded_targets() {
        let edits =
            generate_history(&config(&[1.0, std::f64::consts::SQRT_2, 1.2], 12, 1)).unwrap();
        let page = WikiPage::replay(edits.iter().map(|r| &r.edit)).unwrap();
        assert_eq!(page.census().total(), FALLBACK_SENTENCES);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            generate_history(&config(&[1.0, 1.0, 1.0], 2, 0)),
            Err(SimError::InvalidConfig(_))
        ));
        let mut c = config(&[1.0, 1.0], 5, 0);
        c.editors = 3;
        assert!(generate_history(&c).is_err());
    }

    #[test]
    fn largest_remainder_sums() {
        assert_eq!(
            largest_remainder(&[1.0, 1.0, 1.0], 10)
                .iter()
                .sum::<usize>(),
            10
        );
        assert_eq!(largest_remainder(&[0.5, 0.25, 0.25], 4), vec![2, 1, 1]);
        assert_eq!(largest_remainder(&[0.0, 0.0], 3), vec![0, 0]);
    }

    #[test]
    fn integer_targets_for_rational_efforts() {
        let e = EffortProfile::new(vec![1.0, 1.5, 2.0]).unwrap();
        let eq = closed_form(&e).unwrap();
        assert_eq!(
            sentence_targets(&e, &eq.active, &eq.ownership),
            vec![5, 3, 1]
        );
    }
}
