//! Evaluation: precision/recall/F1 scoring, 10-fold cross-validation over
//! ground-truth streets, the popularity baseline and per-region statistics.
//!
//! Conventions, stated because they change the numbers: a present-but-wrong
//! prediction counts against precision and recall; an absent prediction
//! counts against recall only; zero predictions report precision 0.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::affix::AffixSet;
use crate::features::top_occupations;
use crate::ids::EntityId;
use crate::index::IndexBundle;
use crate::model::{
    assemble_training_set, link_street, train, Hyperparameters, LinkDecision, ModelError,
};
use crate::retrieve::{retrieve, RetrievalOptions};
use crate::street::StreetRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

impl Metrics {
    pub fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let precision = if predicted > 0 {
            correct as f64 / predicted as f64
        } else {
            0.0
        };
        let recall = if gold > 0 {
            correct as f64 / gold as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f1,
            gold,
            predicted,
            correct,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold standard is empty")]
    EmptyGold,
    #[error("prediction for unknown street {0}")]
    UnknownStreet(String),
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{streets} ground-truth streets cannot fill {folds} folds")]
    NotEnoughStreets { streets: usize, folds: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Score a prediction map against the gold standard. Streets missing from
/// `predictions` count as abstentions.
pub fn score_predictions(
    predictions: &BTreeMap<String, Option<EntityId>>,
    gold: &BTreeMap<String, EntityId>,
) -> Result<Metrics, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if let Some(unknown) = predictions.keys().find(|s| !gold.contains_key(*s)) {
        return Err(EvalError::UnknownStreet(unknown.clone()));
    }
    let mut predicted = 0;
    let mut correct = 0;
    for (street, truth) in gold {
        if let Some(Some(person)) = predictions.get(street) {
            predicted += 1;
            if person == truth {
                correct += 1;
            }
        }
    }
    Ok(Metrics::from_counts(correct, predicted, gold.len()))
}

/// Aggregated cross-validation result: pooled (micro) counts plus the
/// per-fold metrics and their macro averages. The union of the per-fold
/// predictions is kept so callers can re-slice the gold standard.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub micro: Metrics,
    pub folds: Vec<Metrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub pooled_predictions: BTreeMap<String, Option<EntityId>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub negatives_per_street: usize,
    pub hyper: Hyperparameters,
    pub threshold: f64,
    pub retrieval: RetrievalOptions,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 42,
            negatives_per_street: 50,
            hyper: Hyperparameters::default(),
            threshold: 0.5,
            retrieval: RetrievalOptions::default(),
        }
    }
}

/// Deterministic fold assignment: shuffle the streets with a seeded RNG and
/// deal them round-robin. Every street lands in exactly one test fold, and
/// all pairs of a street share its fold.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = alloc::vec![0usize; n];
    for (pos, street) in order.into_iter().enumerate() {
        assignment[street] = pos % folds;
    }
    assignment
}

/// K-fold cross-validation of the full pipeline. Folds partition streets,
/// never pairs; the occupation vocabulary is refit on each training split so
/// the held-out fold leaks nothing into it.
pub fn kfold_cv(
    ground_truth: &[(StreetRecord, EntityId)],
    bundle: &IndexBundle,
    affixes: &AffixSet,
    cfg: CvConfig,
) -> Result<EvalReport, EvalError> {
    if ground_truth.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if cfg.folds < 2 {
        return Err(EvalError::TooFewFolds(cfg.folds));
    }
    if ground_truth.len() < cfg.folds {
        return Err(EvalError::NotEnoughStreets {
            streets: ground_truth.len(),
            folds: cfg.folds,
        });
    }

    let assignment = fold_assignment(ground_truth.len(), cfg.folds, cfg.seed);
    let mut fold_metrics = Vec::with_capacity(cfg.folds);
    let mut pooled_correct = 0;
    let mut pooled_predicted = 0;
    let mut pooled_gold = 0;
    let mut pooled_predictions: BTreeMap<String, Option<EntityId>> = BTreeMap::new();

    for fold in 0..cfg.folds {
        let train_set: Vec<(StreetRecord, EntityId)> = ground_truth
            .iter()
            .zip(&assignment)
            .filter(|(_, f)| **f != fold)
            .map(|(gt, _)| gt.clone())
            .collect();
        let test_set: Vec<&(StreetRecord, EntityId)> = ground_truth
            .iter()
            .zip(&assignment)
            .filter(|(_, f)| **f == fold)
            .map(|(gt, _)| gt)
            .collect();

        let (vocab, _) =
            top_occupations(train_set.iter().map(|(_, person)| person), bundle)
                .map_err(ModelError::from)?;
        let (pairs, _) = assemble_training_set(
            &train_set,
            bundle,
            affixes,
            &vocab,
            cfg.negatives_per_street,
        )?;
        let model = train(&pairs, cfg.hyper, vocab, cfg.threshold)?;

        let mut predictions: BTreeMap<String, Option<EntityId>> = BTreeMap::new();
        let mut gold: BTreeMap<String, EntityId> = BTreeMap::new();
        for (street, truth) in test_set {
            gold.insert(street.osm_id.clone(), truth.clone());
            let decision = link_street(street, &model, bundle, affixes, cfg.retrieval);
            predictions.insert(street.osm_id.clone(), decision.map(|d| d.person));
        }
        let metrics = score_predictions(&predictions, &gold)?;
        pooled_correct += metrics.correct;
        pooled_predicted += metrics.predicted;
        pooled_gold += metrics.gold;
        pooled_predictions.extend(predictions);
        fold_metrics.push(metrics);
    }

    let n = fold_metrics.len() as f64;
    Ok(EvalReport {
        micro: Metrics::from_counts(pooled_correct, pooled_predicted, pooled_gold),
        macro_precision: fold_metrics.iter().map(|m| m.precision).sum::<f64>() / n,
        macro_recall: fold_metrics.iter().map(|m| m.recall).sum::<f64>() / n,
        macro_f1: fold_metrics.iter().map(|m| m.f1).sum::<f64>() / n,
        folds: fold_metrics,
        pooled_predictions,
    })
}

/// The popularity baseline: among the retrieved candidates, pick the person
/// with the highest link count, ties by lexicographic id. The reported score
/// is a rank surrogate, monotone in the link count.
pub fn pop_rank(
    street: &StreetRecord,
    bundle: &IndexBundle,
    affixes: &AffixSet,
    opts: RetrievalOptions,
) -> Option<LinkDecision> {
    let candidates = retrieve(street, bundle, affixes, opts);
    let mut best: Option<(u64, &EntityId)> = None;
    for candidate in &candidates.candidates {
        let links = bundle.link_count(candidate);
        let better = match best {
            None => true,
            Some((bl, _)) => links > bl,
        };
        if better {
            best = Some((links, candidate));
        }
    }
    best.map(|(links, person)| LinkDecision {
        street_id: street.osm_id.clone(),
        person: person.clone(),
        probability: (links as f64 + 1.0) / (links as f64 + 2.0),
    })
}

/// One row of the per-region application statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionRow {
    pub region: EntityId,
    pub streets: usize,
    pub streets_with_candidates: usize,
    pub candidate_persons: usize,
    pub relations: usize,
}

/// Count streets, streets with candidates, candidate persons and identified
/// relations for each region of interest. A street belongs to a region iff
/// the region appears in its containment chain.
pub fn region_stats(
    streets: &[StreetRecord],
    links: &[LinkDecision],
    bundle: &IndexBundle,
    affixes: &AffixSet,
    opts: RetrievalOptions,
    regions: &[EntityId],
) -> Vec<RegionRow> {
    let linked: BTreeSet<&str> = links.iter().map(|l| l.street_id.as_str()).collect();
    let candidate_counts: Vec<usize> = streets
        .iter()
        .map(|s| retrieve(s, bundle, affixes, opts).candidates.len())
        .collect();

    regions
        .iter()
        .map(|region| {
            let mut row = RegionRow {
                region: region.clone(),
                streets: 0,
                streets_with_candidates: 0,
                candidate_persons: 0,
                relations: 0,
            };
            for (street, count) in streets.iter().zip(&candidate_counts) {
                if !street.chain.contains(region) {
                    continue;
                }
                row.streets += 1;
                if *count > 0 {
                    row.streets_with_candidates += 1;
                    row.candidate_persons += count;
                }
                if linked.contains(street.osm_id.as_str()) {
                    row.relations += 1;
                }
            }
            row
        })
        .collect()
}
