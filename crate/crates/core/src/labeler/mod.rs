//! Sequence labeler: an averaged structured perceptron over the feature
//! vectors, decoded with Viterbi under the B-/I-/O transition constraints.

mod model_io;
mod report;

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{featurize, FeatureContext, FeatureValue, FeatureVector};
use crate::training_data::{is_valid_scheme, render_column_batch, repair_labels, Label, LabeledSequence};

pub use report::{FieldReport, FieldStats, REPORT_FIELDS};

const L: usize = Label::COUNT;
const START: usize = L;

#[derive(Debug, Error)]
pub enum LabelerError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("sequence {index}: {tokens} tokens but {features} feature vectors")]
    FeatureCountMismatch { index: usize, tokens: usize, features: usize },
    #[error("sequence {0} violates the B-/I-/O scheme")]
    InvalidSequence(usize),
    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// A labeled sequence together with the feature vectors of its tokens.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub sequence: LabeledSequence,
    pub features: Vec<FeatureVector>,
}

impl TrainingExample {
    pub fn featurize(sequence: LabeledSequence, ctx: &FeatureContext<'_>) -> Self {
        let features = featurize(sequence.tokens(), ctx);
        TrainingExample { sequence, features }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 20, seed: 20170601 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMeta {
    pub epochs: usize,
    pub seed: u64,
    pub examples: usize,
    /// Hex SHA-256 of the training corpus in column format.
    pub corpus_sha256: String,
}

/// Trained weights. `transitions[p][l]` scores label `l` after `p`, with
/// row `L` standing for the sequence start.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub(crate) transitions: [[f64; L]; L + 1],
    pub(crate) weights: HashMap<String, [f64; L]>,
    pub meta: ModelMeta,
}

/// Output of [`Model::predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tagged {
    pub sequence: LabeledSequence,
    /// Per-token confidence in [0, 1].
    pub confidence: Vec<f64>,
}

/// Lowercased token with every digit replaced by `0`.
pub fn word_form(token: &str) -> String {
    token
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_ascii_digit() { '0' } else { c })
        .collect()
}

/// Observation feature names for token `i`: the named features and the word
/// form of the token and its two neighbours, plus bias and position. Boolean
/// features appear only when true. `words` holds [`word_form`] per token.
pub fn observation_features(row: &[FeatureVector], words: &[String], i: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(64);
    out.push("bias".to_string());
    out.push(match i {
        0 => "pos=0".to_string(),
        1 => "pos=1".to_string(),
        2 => "pos=2".to_string(),
        _ => "pos=3+".to_string(),
    });
    if i + 1 == row.len() {
        out.push("pos=last".to_string());
    }
    for offset in [-1i64, 0, 1] {
        let j = i as i64 + offset;
        if j < 0 || j >= row.len() as i64 {
            out.push(format!("{offset}:boundary"));
            continue;
        }
        out.push(format!("{offset}:w={}", words[j as usize]));
        for (name, value) in row[j as usize].named() {
            match value {
                FeatureValue::Bool(true) => out.push(format!("{offset}:{name}")),
                FeatureValue::Bool(false) => {}
                FeatureValue::Class(c) => out.push(format!("{offset}:{name}={c}")),
            }
        }
    }
    out
}

fn allowed(prev: usize, cur: usize) -> bool {
    let prev = (prev != START).then(|| Label::from_index(prev));
    Label::from_index(cur).may_follow(prev)
}

/// Best label path under the scheme constraints.
fn viterbi(emissions: &[[f64; L]], transitions: &[[f64; L]; L + 1]) -> Vec<usize> {
    let n = emissions.len();
    if n == 0 {
        return Vec::new();
    }
    let mut score = vec![[f64::NEG_INFINITY; L]; n];
    let mut back = vec![[0usize; L]; n];
    for l in 0..L {
        if allowed(START, l) {
            score[0][l] = transitions[START][l] + emissions[0][l];
        }
    }
    for i in 1..n {
        for l in 0..L {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for p in 0..L {
                if !allowed(p, l) || score[i - 1][p] == f64::NEG_INFINITY {
                    continue;
                }
                let s = score[i - 1][p] + transitions[p][l];
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            if best > f64::NEG_INFINITY {
                score[i][l] = best + emissions[i][l];
                back[i][l] = arg;
            }
        }
    }
    let mut last = 0;
    for l in 1..L {
        if score[n - 1][l] > score[n - 1][last] {
            last = l;
        }
    }
    let mut path = vec![last; n];
    for i in (1..n).rev() {
        path[i - 1] = back[i][path[i]];
    }
    path
}

/// Per-token softmax over labels with both Viterbi neighbours held fixed.
fn confidences(emissions: &[[f64; L]], transitions: &[[f64; L]; L + 1], path: &[usize]) -> Vec<f64> {
    let n = path.len();
    (0..n)
        .map(|i| {
            let prev = if i == 0 { START } else { path[i - 1] };
            let mut scores = [f64::NEG_INFINITY; L];
            for (l, slot) in scores.iter_mut().enumerate() {
                if !allowed(prev, l) {
                    continue;
                }
                let mut s = emissions[i][l] + transitions[prev][l];
                if i + 1 < n {
                    if !allowed(l, path[i + 1]) {
                        continue;
                    }
                    s += transitions[l][path[i + 1]];
                }
                *slot = s;
            }
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
            let p = (scores[path[i]] - max).exp() / total;
            p.clamp(0.0, 1.0)
        })
        .collect()
}

/// Hex SHA-256 of the corpus in column format.
pub fn corpus_hash(sequences: &[LabeledSequence]) -> String {
    hex::encode(Sha256::digest(render_column_batch(sequences).as_bytes()))
}

struct Averaged {
    w: Vec<f64>,
    u: Vec<f64>,
}

impl Averaged {
    fn new(len: usize) -> Self {
        Averaged { w: vec![0.0; len], u: vec![0.0; len] }
    }

    fn add(&mut self, idx: usize, delta: f64, step: f64) {
        self.w[idx] += delta;
        self.u[idx] += step * delta;
    }

    /// Forget the running sum; the average restarts from the current weights.
    fn restart_average(&mut self) {
        self.u.iter_mut().for_each(|u| *u = 0.0);
    }

    fn averaged(&self, step: f64) -> Vec<f64> {
        self.w.iter().zip(&self.u).map(|(w, u)| w - u / step).collect()
    }
}

/// Train on `corpus`, visiting it in a fresh seeded shuffle every epoch.
///
/// Mistakes are corrected with a passive-aggressive step size, and the
/// returned weights are the average over the second half of the epochs, so
/// the unconverged weights of the first passes do not dilute the result.
pub fn train(corpus: &[TrainingExample], config: TrainConfig) -> Result<Model, LabelerError> {
    if corpus.is_empty() {
        return Err(LabelerError::EmptyCorpus);
    }
    for (index, ex) in corpus.iter().enumerate() {
        if ex.sequence.len() != ex.features.len() {
            return Err(LabelerError::FeatureCountMismatch {
                index,
                tokens: ex.sequence.len(),
                features: ex.features.len(),
            });
        }
        if !is_valid_scheme(ex.sequence.labels()) {
            return Err(LabelerError::InvalidSequence(index));
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let observed: Vec<Vec<Vec<usize>>> = corpus
        .iter()
        .map(|ex| {
            let words: Vec<String> = ex.sequence.tokens().iter().map(|t| word_form(t)).collect();
            (0..ex.features.len())
                .map(|i| {
                    observation_features(&ex.features, &words, i)
                        .into_iter()
                        .map(|f| {
                            *ids.entry(f.clone()).or_insert_with(|| {
                                names.push(f);
                                names.len() - 1
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let gold: Vec<Vec<usize>> = corpus
        .iter()
        .map(|ex| ex.sequence.labels().iter().map(|l| l.index()).collect())
        .collect();

    let n_trans = (L + 1) * L;
    let mut params = Averaged::new(n_trans + names.len() * L);
    let emit_idx = |f: usize, l: usize| n_trans + f * L + l;
    let trans_idx = |p: usize, l: usize| p * L + l;

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut step = 1.0f64;
    let average_from = config.epochs / 2;
    for epoch in 0..config.epochs {
        if epoch == average_from && epoch > 0 {
            params.restart_average();
            step = 1.0;
        }
        order.shuffle(&mut rng);
        for &k in &order {
            let obs = &observed[k];
            let mut transitions = [[0.0; L]; L + 1];
            for (p, row) in transitions.iter_mut().enumerate() {
                for (l, t) in row.iter_mut().enumerate() {
                    *t = params.w[trans_idx(p, l)];
                }
            }
            let emissions: Vec<[f64; L]> = obs
                .iter()
                .map(|feats| {
                    let mut e = [0.0; L];
                    for &f in feats {
                        for (l, slot) in e.iter_mut().enumerate() {
                            *slot += params.w[emit_idx(f, l)];
                        }
                    }
                    e
                })
                .collect();
            let want = &gold[k];
            let pred = viterbi(&emissions, &transitions);
            if pred != *want {
                let mut delta: BTreeMap<usize, f64> = BTreeMap::new();
                for i in 0..want.len() {
                    let (g, p) = (want[i], pred[i]);
                    let (gp, pp) = if i == 0 { (START, START) } else { (want[i - 1], pred[i - 1]) };
                    if g != p {
                        for &f in &obs[i] {
                            *delta.entry(emit_idx(f, g)).or_default() += 1.0;
                            *delta.entry(emit_idx(f, p)).or_default() -= 1.0;
                        }
                    }
                    if (gp, g) != (pp, p) {
                        *delta.entry(trans_idx(gp, g)).or_default() += 1.0;
                        *delta.entry(trans_idx(pp, p)).or_default() -= 1.0;
                    }
                }
                // Passive-aggressive step: just large enough that the gold
                // path beats this prediction by its Hamming loss.
                let margin: f64 = delta.iter().map(|(&i, &d)| params.w[i] * d).sum();
                let loss = want.iter().zip(&pred).filter(|(a, b)| a != b).count() as f64;
                let norm: f64 = delta.values().map(|d| d * d).sum();
                let tau = if norm > 0.0 { ((loss - margin) / norm).max(0.0) } else { 0.0 };
                for (&i, &d) in &delta {
                    params.add(i, tau * d, step);
                }
            }
            step += 1.0;
        }
    }

    let avg = params.averaged(step);
    let mut transitions = [[0.0; L]; L + 1];
    for (p, row) in transitions.iter_mut().enumerate() {
        for (l, t) in row.iter_mut().enumerate() {
            *t = avg[trans_idx(p, l)];
        }
    }
    let mut weights = HashMap::new();
    for (f, name) in names.into_iter().enumerate() {
        let mut w = [0.0; L];
        for (l, slot) in w.iter_mut().enumerate() {
            *slot = avg[emit_idx(f, l)];
        }
        if w.iter().any(|&x| x != 0.0) {
            weights.insert(name, w);
        }
    }
    let sequences: Vec<LabeledSequence> = corpus.iter().map(|ex| ex.sequence.clone()).collect();
    Ok(Model {
        transitions,
        weights,
        meta: ModelMeta {
            epochs: config.epochs,
            seed: config.seed,
            examples: corpus.len(),
            corpus_sha256: corpus_hash(&sequences),
        },
    })
}

impl Model {
    fn emissions<S: AsRef<str>>(&self, tokens: &[S], features: &[FeatureVector]) -> Vec<[f64; L]> {
        let words: Vec<String> = tokens.iter().map(|t| word_form(t.as_ref())).collect();
        (0..features.len())
            .map(|i| {
                let mut e = [0.0; L];
                for f in observation_features(features, &words, i) {
                    if let Some(w) = self.weights.get(&f) {
                        for (slot, x) in e.iter_mut().zip(w) {
                            *slot += x;
                        }
                    }
                }
                e
            })
            .collect()
    }

    /// Label a row. Unknown observation features are ignored.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S], features: &[FeatureVector]) -> Tagged {
        assert_eq!(tokens.len(), features.len(), "one feature vector per token");
        let emissions = self.emissions(tokens, features);
        let path = viterbi(&emissions, &self.transitions);
        let confidence = confidences(&emissions, &self.transitions, &path);
        let mut labels: Vec<Label> = path.into_iter().map(Label::from_index).collect();
        repair_labels(&mut labels);
        let sequence = LabeledSequence::new(tokens.iter().map(|t| t.as_ref().to_string()).collect(), labels)
            .expect("decoded labels are scheme-valid and tokens come from the tokenizer");
        Tagged { sequence, confidence }
    }

    /// Number of observation features with a non-zero weight.
    pub fn feature_count(&self) -> usize {
        self.weights.len()
    }
}

/// Fraction of tokens whose predicted label equals the gold label.
pub fn token_accuracy(model: &Model, corpus: &[TrainingExample]) -> f64 {
    let mut right = 0usize;
    let mut total = 0usize;
    for ex in corpus {
        let tagged = model.predict(ex.sequence.tokens(), &ex.features);
        total += ex.sequence.len();
        right += tagged
            .sequence
            .labels()
            .iter()
            .zip(ex.sequence.labels())
            .filter(|(a, b)| a == b)
            .count();
    }
    if total == 0 {
        1.0
    } else {
        right as f64 / total as f64
    }
}

/// Confidence statistics per predicted field over `rows`.
pub fn evaluate<S: AsRef<str>>(model: &Model, rows: &[(Vec<S>, Vec<FeatureVector>)]) -> FieldReport {
    let mut report = FieldReport::default();
    for (tokens, features) in rows {
        let tagged = model.predict(tokens, features);
        for (&label, &c) in tagged.sequence.labels().iter().zip(&tagged.confidence) {
            report.add(label, c);
        }
    }
    report
}
