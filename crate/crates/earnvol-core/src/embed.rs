//! Embedding ingestion, random embedding generators, and the
//! within-ticker vs. all-dataset cosine comparison.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::baseline::PredictionSet;
use crate::event::{EarningsEvent, EventId};
use crate::stats;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum EmbedError {
    #[error("embedding set is empty")]
    Empty,
    #[error("ragged dimensions: {id} has {got}, expected {expected}")]
    RaggedDimension { id: EventId, got: usize, expected: usize },
    #[error("non-finite entry in vector for {0}")]
    NonFinite(EventId),
    #[error("zero vector for {0}")]
    ZeroVector(EventId),
    #[error("duplicate event id {0}")]
    DuplicateId(EventId),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("no embedding vector for {0}")]
    MissingVector(EventId),
    #[error("need at least 2 embedded events")]
    TooFewEvents,
    #[error("no within-ticker pairs (every ticker has a single event)")]
    NoWithinPairs,
    #[error("prediction sets disagree on (event, tau) keys")]
    KeyMismatch,
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
}

/// Fixed-dimension vectors keyed by event id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    source: String,
    vectors: BTreeMap<EventId, Vec<f64>>,
}

impl EmbeddingSet {
    /// Validates dimensions (inferred from the first vector), finiteness, and
    /// non-zero norms.
    pub fn new(
        source: impl Into<String>,
        rows: impl IntoIterator<Item = (EventId, Vec<f64>)>,
    ) -> Result<Self, EmbedError> {
        let mut vectors: BTreeMap<EventId, Vec<f64>> = BTreeMap::new();
        let mut dim = 0usize;
        for (id, vector) in rows {
            if dim == 0 {
                dim = vector.len();
            }
            if vector.len() != dim || vector.is_empty() {
                return Err(EmbedError::RaggedDimension {
                    id,
                    got: vector.len(),
                    expected: dim,
                });
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(EmbedError::NonFinite(id));
            }
            let norm_sq: f64 = vector.iter().map(|v| v * v).sum();
            if libm::sqrt(norm_sq) <= 1e-12 {
                return Err(EmbedError::ZeroVector(id));
            }
            if vectors.insert(id.clone(), vector).is_some() {
                return Err(EmbedError::DuplicateId(id));
            }
        }
        if vectors.is_empty() {
            return Err(EmbedError::Empty);
        }
        Ok(EmbeddingSet { dim, source: source.into(), vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &EventId) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EventId, &[f64])> {
        self.vectors.iter().map(|(id, v)| (id, v.as_slice()))
    }
}

/// How random embeddings are assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomMode {
    /// Independent vector per event: no semantics, no ticker identity.
    All,
    /// One vector per ticker, shared by its events: ticker identity only.
    Ticker,
}

impl RandomMode {
    pub fn label(&self) -> &'static str {
        match self {
            RandomMode::All => "Random(All)",
            RandomMode::Ticker => "Random(Ticker)",
        }
    }
}

/// Standard-normal random embeddings, deterministic per seed. Vectors are
/// drawn in sorted id/ticker order so input ordering cannot change the set.
pub fn random_embeddings(
    events: &[EarningsEvent],
    mode: RandomMode,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingSet, EmbedError> {
    if dim < 2 {
        return Err(EmbedError::DimensionTooSmall(dim));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha20Rng| -> Vec<f64> {
        (0..dim).map(|_| StandardNormal.sample(rng)).collect()
    };
    let rows: Vec<(EventId, Vec<f64>)> = match mode {
        RandomMode::All => {
            let mut ids: Vec<&EventId> = events.iter().map(|e| &e.id).collect();
            ids.sort();
            ids.into_iter().map(|id| (id.clone(), draw(&mut rng))).collect()
        }
        RandomMode::Ticker => {
            let tickers: BTreeSet<&str> = events.iter().map(|e| e.ticker.as_str()).collect();
            let per_ticker: BTreeMap<&str, Vec<f64>> =
                tickers.into_iter().map(|t| (t, draw(&mut rng))).collect();
            events
                .iter()
                .map(|e| (e.id.clone(), per_ticker[e.ticker.as_str()].clone()))
                .collect()
        }
    };
    EmbeddingSet::new(mode.label(), rows)
}

/// Cosine similarity, exactly 1 for bit-identical vectors and clamped to
/// [-1, 1] against rounding spill.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a == b {
        return 1.0;
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    (dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0)
}

/// Mean pairwise cosines for the within-ticker group and the whole dataset.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupSimilarityReport {
    pub source: String,
    pub within_ticker: f64,
    pub all_dataset: f64,
    pub within_pairs: u64,
    pub all_pairs: u64,
    /// Tickers skipped for the within-ticker mean because they have a single
    /// event.
    pub single_event_tickers: usize,
}

/// Compares same-ticker pairs against all unordered pairs.
///
/// `include_same_ticker_in_all` keeps same-ticker pairs inside the
/// all-dataset mean (each record is compared against everything else); the
/// flag exists for sensitivity checks. Means use pairwise summation.
pub fn group_cosine_similarity(
    embeddings: &EmbeddingSet,
    events: &[EarningsEvent],
    include_same_ticker_in_all: bool,
) -> Result<GroupSimilarityReport, EmbedError> {
    if events.len() < 2 {
        return Err(EmbedError::TooFewEvents);
    }
    let mut indexed: Vec<(&EarningsEvent, &[f64])> = Vec::with_capacity(events.len());
    for event in events {
        let v = embeddings.get(&event.id).ok_or(EmbedError::MissingVector(event.id.clone()))?;
        indexed.push((event, v));
    }
    indexed.sort_by(|a, b| a.0.id.cmp(&b.0.id));

    let mut within: Vec<f64> = Vec::new();
    let mut all: Vec<f64> = Vec::new();
    for i in 0..indexed.len() {
        for j in (i + 1)..indexed.len() {
            let same = indexed[i].0.ticker == indexed[j].0.ticker;
            let c = cosine(indexed[i].1, indexed[j].1);
            if same {
                within.push(c);
            }
            if include_same_ticker_in_all || !same {
                all.push(c);
            }
        }
    }
    let mut ticker_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (event, _) in &indexed {
        *ticker_counts.entry(event.ticker.as_str()).or_insert(0) += 1;
    }
    let single_event_tickers = ticker_counts.values().filter(|&&c| c == 1).count();

    if within.is_empty() {
        return Err(EmbedError::NoWithinPairs);
    }
    if all.is_empty() {
        return Err(EmbedError::TooFewEvents);
    }
    Ok(GroupSimilarityReport {
        source: String::from(embeddings.source()),
        within_ticker: stats::pairwise_sum(&within) / within.len() as f64,
        all_dataset: stats::pairwise_sum(&all) / all.len() as f64,
        within_pairs: within.len() as u64,
        all_pairs: all.len() as u64,
        single_event_tickers,
    })
}

/// Pearson correlation between two prediction sets at one window. The sets
/// must cover identical (event, tau) keys.
pub fn prediction_correlation(
    a: &PredictionSet,
    b: &PredictionSet,
    tau: u32,
) -> Result<f64, EmbedError> {
    let keys_a: Vec<&EventId> =
        a.predictions.iter().filter(|(_, m)| m.contains_key(&tau)).map(|(id, _)| id).collect();
    let keys_b: BTreeSet<&EventId> =
        b.predictions.iter().filter(|(_, m)| m.contains_key(&tau)).map(|(id, _)| id).collect();
    if keys_a.len() != keys_b.len() || keys_a.iter().any(|id| !keys_b.contains(*id)) {
        return Err(EmbedError::KeyMismatch);
    }
    let xs: Vec<f64> = keys_a.iter().map(|id| a.get(id, tau).expect("key present")).collect();
    let ys: Vec<f64> = keys_a.iter().map(|id| b.get(id, tau).expect("key present")).collect();
    Ok(stats::pearson(&xs, &ys)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{MarketSession, Quarter};

    fn event(ticker: &str, date: &str) -> EarningsEvent {
        EarningsEvent::new(
            ticker,
            date.parse().unwrap(),
            MarketSession::BeforeOpen,
            Quarter::new(2021, 1).unwrap(),
        )
    }

    #[test]
    fn validates_vectors() {
        let id = |s: &str| EventId::new(s);
        assert_eq!(
            EmbeddingSet::new("t", vec![
                (id("a"), vec![1.0, 0.0, 0.0, 0.0]),
                (id("b"), vec![0.0, 1.0, 0.0, 0.0]),
            ])
            .unwrap()
            .dim(),
            4
        );
        assert!(matches!(
            EmbeddingSet::new("t", vec![
                (id("a"), vec![1.0, 0.0, 0.0, 0.0]),
                (id("b"), vec![0.0, 1.0, 0.0, 0.0, 0.0]),
            ]),
            Err(EmbedError::RaggedDimension { .. })
        ));
        assert!(matches!(
            EmbeddingSet::new("t", vec![(id("a"), vec![f64::NAN, 0.0])]),
            Err(EmbedError::NonFinite(_))
        ));
        assert!(matches!(
            EmbeddingSet::new("t", vec![(id("a"), vec![0.0, 0.0])]),
            Err(EmbedError::ZeroVector(_))
        ));
        assert!(matches!(
            EmbeddingSet::new("t", vec![
                (id("a"), vec![1.0, 0.0]),
                (id("a"), vec![0.0, 1.0]),
            ]),
            Err(EmbedError::DuplicateId(_))
        ));
    }

    #[test]
    fn ticker_mode_shares_vectors_exactly() {
        let events =
            vec![event("AAA", "2021-02-01"), event("AAA", "2021-05-03"), event("BBB", "2021-02-02")];
        let set = random_embeddings(&events, RandomMode::Ticker, 16, 7).unwrap();
        let a1 = set.get(&events[0].id).unwrap();
        let a2 = set.get(&events[1].id).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(cosine(a1, a2), 1.0);
        assert_ne!(a1, set.get(&events[2].id).unwrap());
    }

    #[test]
    fn all_mode_vectors_concentrate_near_orthogonal() {
        // 2,000 fresh directions at dim 3071: mean |cos| over 1,000 disjoint
        // pairs stays well under 0.05.
        let events: Vec<EarningsEvent> = (0..2000)
            .map(|i| {
                let day = 1 + (i % 27) as u8;
                let month = 1 + (i / 27 % 12) as u8;
                EarningsEvent::new(
                    format!("T{i:04}"),
                    crate::date::Date::new(2021, month, day).unwrap(),
                    MarketSession::BeforeOpen,
                    Quarter::new(2021, 1).unwrap(),
                )
            })
            .collect();
        let set = random_embeddings(&events, RandomMode::All, 3071, 11).unwrap();
        let mut acc = 0.0;
        for pair in events.chunks(2) {
            let a = set.get(&pair[0].id).unwrap();
            let b = set.get(&pair[1].id).unwrap();
            acc += cosine(a, b).abs();
        }
        let mean_abs = acc / 1000.0;
        assert!(mean_abs < 0.05, "mean |cos| = {mean_abs}");
    }

    #[test]
    fn same_seed_same_set() {
        let events = vec![event("AAA", "2021-02-01"), event("BBB", "2021-02-02")];
        let a = random_embeddings(&events, RandomMode::All, 8, 3).unwrap();
        let b = random_embeddings(&events, RandomMode::All, 8, 3).unwrap();
        assert_eq!(a, b);
        assert!(random_embeddings(&events, RandomMode::All, 1, 3).is_err());
    }

    #[test]
    fn identical_vectors_give_unit_means() {
        let events = vec![event("AAA", "2021-02-01"), event("AAA", "2021-05-03")];
        let rows = events.iter().map(|e| (e.id.clone(), vec![0.3, -0.7, 0.1])).collect::<Vec<_>>();
        let set = EmbeddingSet::new("const", rows).unwrap();
        let report = group_cosine_similarity(&set, &events, true).unwrap();
        assert_eq!(report.within_ticker, 1.0);
        assert_eq!(report.all_dataset, 1.0);
        assert_eq!(report.within_pairs, 1);
        assert_eq!(report.all_pairs, 1);
    }

    #[test]
    fn orthogonal_blocks_match_the_combinatorial_oracle() {
        // Two tickers, identical vectors within a block, orthogonal across:
        // within = 1, all-dataset = within-pair share of all pairs.
        let a_events = vec![event("AAA", "2021-02-01"), event("AAA", "2021-05-03")];
        let b_events =
            vec![event("BBB", "2021-02-02"), event("BBB", "2021-05-04"), event("BBB", "2021-08-02")];
        let mut rows = Vec::new();
        for e in &a_events {
            rows.push((e.id.clone(), vec![1.0, 0.0]));
        }
        for e in &b_events {
            rows.push((e.id.clone(), vec![0.0, 1.0]));
        }
        let set = EmbeddingSet::new("blocks", rows).unwrap();
        let mut events = a_events;
        events.extend(b_events);
        let report = group_cosine_similarity(&set, &events, true).unwrap();
        assert_eq!(report.within_ticker, 1.0);
        // Pairs: C(5,2)=10 total, within = C(2,2)+C(3,2) = 1+3 = 4.
        assert_eq!(report.all_pairs, 10);
        assert_eq!(report.within_pairs, 4);
        assert!((report.all_dataset - 0.4).abs() < 1e-12);
        let excl = group_cosine_similarity(&set, &events, false).unwrap();
        assert_eq!(excl.all_pairs, 6);
        assert!(excl.all_dataset.abs() < 1e-12);
    }

    #[test]
    fn single_event_tickers_are_skipped_and_counted() {
        let events = vec![event("AAA", "2021-02-01"), event("AAA", "2021-05-03"), event("ZZZ", "2021-02-05")];
        let set = random_embeddings(&events, RandomMode::All, 4, 5).unwrap();
        let report = group_cosine_similarity(&set, &events, true).unwrap();
        assert_eq!(report.single_event_tickers, 1);
        assert_eq!(report.within_pairs, 1);
    }

    #[test]
    fn correlation_requires_matching_keys() {
        let mut a = PredictionSet::new("a");
        let mut b = PredictionSet::new("b");
        for i in 0..4 {
            let id = EventId::new(format!("E{i}"));
            a.insert(id.clone(), 3, i as f64);
            b.insert(id, 3, 2.0 * i as f64 + 1.0);
        }
        assert!((prediction_correlation(&a, &b, 3).unwrap() - 1.0).abs() < 1e-12);
        b.insert(EventId::new("EXTRA"), 3, 0.0);
        assert!(matches!(prediction_correlation(&a, &b, 3), Err(EmbedError::KeyMismatch)));
    }
}
