//! Evaluation protocol pieces: ROC/AUC via the rank statistic, flip
//! contingency tables, conditional fake probabilities, subject-aware
//! dataset splits, and histograms.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetManifest, Label, ManifestRecord};
use crate::error::Error;
use crate::features::PosePair;

/// A receiver operating characteristic curve with its area.
///
/// Points run from (0, 0) to (1, 1) as the threshold drops; tied scores
/// collapse into a single point, so the trapezoid area equals the
/// Mann-Whitney statistic with ties counted one half.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Decision thresholds, descending; the leading point uses +infinity.
    pub thresholds: Vec<f64>,
    pub false_positive_rates: Vec<f64>,
    pub true_positive_rates: Vec<f64>,
    pub auc: f64,
}

/// Rank the scores and build the ROC curve. Labels are `Fake` = positive.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<RocCurve, Error> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Fake).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes present"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite score".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Descending by score; index tiebreak keeps the sort deterministic.
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });

    let mut thresholds = vec![f64::INFINITY];
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut auc_pairs = 0.0f64;

    let mut k = 0;
    while k < order.len() {
        // Consume the whole tie group at this score.
        let score = scores[order[k]];
        let mut tie_pos = 0usize;
        let mut tie_neg = 0usize;
        while k < order.len() && scores[order[k]] == score {
            match labels[order[k]] {
                Label::Fake => tie_pos += 1,
                Label::Authentic => tie_neg += 1,
            }
            k += 1;
        }
        // Every (pos, neg) pair inside the tie counts one half; negatives
        // already below this score are full wins for these positives.
        auc_pairs += tie_pos as f64 * (n_neg - fp - tie_neg) as f64;
        auc_pairs += 0.5 * tie_pos as f64 * tie_neg as f64;
        tp += tie_pos;
        fp += tie_neg;
        thresholds.push(score);
        fpr.push(fp as f64 / n_neg as f64);
        tpr.push(tp as f64 / n_pos as f64);
    }

    Ok(RocCurve {
        thresholds,
        false_positive_rates: fpr,
        true_positive_rates: tpr,
        auc: auc_pairs / (n_pos as f64 * n_neg as f64),
    })
}

/// Proportions of flip outcomes over the inner and whole-face estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipContingency {
    pub both_flipped: f64,
    pub inner_only: f64,
    pub all_only: f64,
    pub neither: f64,
    /// Share of frames with at least one flipped estimate.
    pub any_flip: f64,
    /// Share with exactly one flipped estimate.
    pub conflicting: f64,
}

pub fn flip_contingency(pairs: &[PosePair]) -> Result<FlipContingency, Error> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("contingency of an empty set"));
    }
    let n = pairs.len() as f64;
    let mut counts = [0usize; 4];
    for pair in pairs {
        let idx = (pair.inner.flipped as usize) << 1 | pair.all.flipped as usize;
        counts[idx] += 1;
    }
    let neither = counts[0b00] as f64 / n;
    let all_only = counts[0b01] as f64 / n;
    let inner_only = counts[0b10] as f64 / n;
    let both_flipped = counts[0b11] as f64 / n;
    Ok(FlipContingency {
        both_flipped,
        inner_only,
        all_only,
        neither,
        any_flip: both_flipped + inner_only + all_only,
        conflicting: inner_only + all_only,
    })
}

/// Empirical P(fake | conflicting) and P(fake | non-conflicting);
/// a conditioning cell with no frames reports None.
pub fn conditional_fake_prob(
    pairs: &[PosePair],
    labels: &[Label],
) -> Result<(Option<f64>, Option<f64>), Error> {
    if pairs.len() != labels.len() {
        return Err(Error::InvalidInput("pairs and labels differ in length".into()));
    }
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("conditional probability of an empty set"));
    }
    let mut conflicting = (0usize, 0usize);
    let mut agreeing = (0usize, 0usize);
    for (pair, label) in pairs.iter().zip(labels.iter()) {
        let cell = if pair.conflicting() {
            &mut conflicting
        } else {
            &mut agreeing
        };
        cell.1 += 1;
        if *label == Label::Fake {
            cell.0 += 1;
        }
    }
    let ratio = |(fake, total): (usize, usize)| {
        (total > 0).then(|| fake as f64 / total as f64)
    };
    Ok((ratio(conflicting), ratio(agreeing)))
}

/// How train and test sets may share depicted identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Frame-level split; subjects may appear on both sides.
    OverlappingSubjects,
    /// No subject token appears on both sides; frames whose subject group
    /// straddles the partition are dropped.
    DisjointSubjects,
}

impl SplitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitMode::OverlappingSubjects => "overlapping-subjects",
            SplitMode::DisjointSubjects => "disjoint-subjects",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "overlapping-subjects" => Ok(SplitMode::OverlappingSubjects),
            "disjoint-subjects" => Ok(SplitMode::DisjointSubjects),
            other => Err(Error::InvalidInput(alloc::format!("unknown split mode: {other}"))),
        }
    }
}

/// Split a manifest into train and test halves.
///
/// Disjoint mode groups frames by connected components of subject
/// co-occurrence, so the two-subject records of fake frames never straddle
/// the partition. With `balance`, excess frames of the majority class are
/// dropped at random under the seed.
pub fn split_dataset(
    manifest: &DatasetManifest,
    mode: SplitMode,
    seed: u64,
    balance: bool,
) -> Result<(DatasetManifest, DatasetManifest), Error> {
    if manifest.is_empty() {
        return Err(Error::SplitInfeasible("empty manifest".into()));
    }
    let records = manifest.records();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut train, mut test): (Vec<ManifestRecord>, Vec<ManifestRecord>) = match mode {
        SplitMode::OverlappingSubjects => {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.shuffle(&mut rng);
            let half = order.len() / 2;
            let train = order[..half].iter().map(|&i| records[i].clone()).collect();
            let test = order[half..].iter().map(|&i| records[i].clone()).collect();
            (train, test)
        }
        SplitMode::DisjointSubjects => {
            let components = subject_components(records);
            let n_components = *components.iter().max().unwrap() + 1;
            if n_components < 2 {
                return Err(Error::SplitInfeasible(
                    "all frames share one connected subject group".into(),
                ));
            }
            // Per-component class counts, then a greedy assignment that
            // keeps BOTH class counts balanced across the sides; subjects
            // often correlate with class, so balancing raw frame counts
            // could starve one side of a class entirely.
            let mut fake = vec![0usize; n_components];
            let mut auth = vec![0usize; n_components];
            for (i, rec) in records.iter().enumerate() {
                match rec.label {
                    Label::Fake => fake[components[i]] += 1,
                    Label::Authentic => auth[components[i]] += 1,
                }
            }
            let mut order: Vec<usize> = (0..n_components).collect();
            order.shuffle(&mut rng);
            let mut side = vec![false; n_components];
            let (mut train_f, mut train_a) = (0i64, 0i64);
            let (mut test_f, mut test_a) = (0i64, 0i64);
            for &c in &order {
                let (f, a) = (fake[c] as i64, auth[c] as i64);
                let as_train = (train_f + f - test_f).abs() + (train_a + a - test_a).abs();
                let as_test = (train_f - test_f - f).abs() + (train_a - test_a - a).abs();
                let to_train = match as_train.cmp(&as_test) {
                    core::cmp::Ordering::Less => true,
                    core::cmp::Ordering::Greater => false,
                    core::cmp::Ordering::Equal => train_f + train_a <= test_f + test_a,
                };
                if to_train {
                    side[c] = true;
                    train_f += f;
                    train_a += a;
                } else {
                    test_f += f;
                    test_a += a;
                }
            }
            let train = records
                .iter()
                .enumerate()
                .filter(|(i, _)| side[components[*i]])
                .map(|(_, r)| r.clone())
                .collect();
            let test = records
                .iter()
                .enumerate()
                .filter(|(i, _)| !side[components[*i]])
                .map(|(_, r)| r.clone())
                .collect();
            (train, test)
        }
    };

    if balance {
        balance_classes(&mut train, &mut rng);
        balance_classes(&mut test, &mut rng);
    }

    for (name, side) in [("train", &train), ("test", &test)] {
        if side.is_empty() {
            return Err(Error::SplitInfeasible(alloc::format!("{name} side is empty")));
        }
    }

    Ok((
        DatasetManifest::new(train).expect("subset of a valid manifest"),
        DatasetManifest::new(test).expect("subset of a valid manifest"),
    ))
}

/// Union-find over subject tokens; returns a component id per record.
fn subject_components(records: &[ManifestRecord]) -> Vec<usize> {
    let mut subjects: Vec<&str> = records
        .iter()
        .flat_map(|r| r.subjects.iter().map(String::as_str))
        .collect();
    subjects.sort_unstable();
    subjects.dedup();
    let subject_id = |s: &str| subjects.binary_search(&s).expect("subject interned");

    let mut parent: Vec<usize> = (0..subjects.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for rec in records {
        let first = subject_id(&rec.subjects[0]);
        for other in rec.subjects.iter().skip(1) {
            let (a, b) = (find(&mut parent, first), find(&mut parent, subject_id(other)));
            if a != b {
                parent[a] = b;
            }
        }
    }

    // Renumber component roots densely in first-seen order.
    let mut dense: Vec<Option<usize>> = vec![None; subjects.len()];
    let mut next = 0usize;
    records
        .iter()
        .map(|rec| {
            let root = find(&mut parent, subject_id(&rec.subjects[0]));
            *dense[root].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

fn balance_classes(side: &mut Vec<ManifestRecord>, rng: &mut ChaCha8Rng) {
    let fake: Vec<usize> = side
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == Label::Fake)
        .map(|(i, _)| i)
        .collect();
    let authentic: Vec<usize> = side
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label == Label::Authentic)
        .map(|(i, _)| i)
        .collect();
    let keep = fake.len().min(authentic.len());
    let mut drop_set: Vec<usize> = Vec::new();
    for class in [fake, authentic] {
        if class.len() > keep {
            let mut shuffled = class;
            shuffled.shuffle(rng);
            drop_set.extend_from_slice(&shuffled[keep..]);
        }
    }
    drop_set.sort_unstable();
    for &idx in drop_set.iter().rev() {
        side.remove(idx);
    }
}

/// Uniform-bin histogram over [min, max]; the last bin is right-inclusive.
/// Degenerate inputs (all values equal) land in the first bin.
pub fn histogram(values: &[f64], bins: usize) -> Result<(Vec<f64>, Vec<usize>), Error> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("histogram of an empty set"));
    }
    if bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite histogram value".into()));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let edges: Vec<f64> = (0..=bins)
        .map(|i| min + (max - min) * i as f64 / bins as f64)
        .collect();
    let width = max - min;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = if width == 0.0 {
            0
        } else {
            // Right-inclusive last bin.
            (((v - min) / width * bins as f64) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    Ok((edges, counts))
}
