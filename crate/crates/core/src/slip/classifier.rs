//! Slip-state classifiers: a multinomial linear model trained by mini-batch
//! gradient descent, and k-nearest-neighbour behind the same interface.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{class_counts, LabeledSample};
use super::features::FEATURE_DIM;
use super::SlipError;
use crate::class::ContactClass;
use crate::rng::{stream, Purpose};

pub const MODEL_VERSION: u32 = 1;

/// Anything that maps a feature vector to a predicted contact class.
pub trait SlipPredictor {
    fn predict(&self, features: &[f64]) -> Result<ContactClass, SlipError>;
}

/// Fixed elementwise map applied before standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTransform {
    #[default]
    Identity,
    /// sign(x)·ln(1 + |x|): keeps small vibration levels distinguishable next
    /// to slip bursts two orders of magnitude larger.
    SignedLog,
}

impl FeatureTransform {
    pub fn apply(self, x: &[f64]) -> Vec<f64> {
        match self {
            FeatureTransform::Identity => x.to_vec(),
            FeatureTransform::SignedLog => x.iter().map(|v| v.signum() * v.abs().ln_1p()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Zero-variance features get unit scale.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> Self {
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for r in rows.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
            n += 1;
        }
        let nf = n.max(1) as f64;
        for m in &mut mean {
            *m /= nf;
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / nf).sqrt();
                if sd > 1e-12 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MultinomialLinear,
    KNearestNeighbor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub transform: FeatureTransform,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// `None` trains on the full batch each step.
    pub batch_size: Option<usize>,
    pub class_weighting: bool,
    pub k: usize,
    /// k-NN keeps at most this many exemplars (evenly strided).
    pub max_exemplars: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::MultinomialLinear,
            transform: FeatureTransform::SignedLog,
            learning_rate: 0.5,
            epochs: 40,
            l2: 1e-4,
            batch_size: Some(256),
            class_weighting: true,
            k: 5,
            max_exemplars: 8000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// One row per class in `class_order`; the last column is the bias.
    MultinomialLinear { weights: Vec<Vec<f64>> },
    KNearestNeighbor {
        k: usize,
        exemplars: Vec<Vec<f64>>,
        labels: Vec<ContactClass>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub version: u32,
    pub class_order: Vec<ContactClass>,
    #[serde(default)]
    pub transform: FeatureTransform,
    pub standardization: Standardizer,
    pub model: Model,
}

fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self.model {
            Model::MultinomialLinear { .. } => ModelKind::MultinomialLinear,
            Model::KNearestNeighbor { .. } => ModelKind::KNearestNeighbor,
        }
    }

    /// Raw per-class scores (linear logits or k-NN vote counts).
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>, SlipError> {
        if features.len() != self.standardization.mean.len() {
            return Err(SlipError::Dimension {
                expected: self.standardization.mean.len(),
                got: features.len(),
            });
        }
        let z = self.standardization.apply(&self.transform.apply(features));
        Ok(match &self.model {
            Model::MultinomialLinear { weights } => weights
                .iter()
                .map(|w| {
                    let (bias, coef) = w.split_last().expect("bias column");
                    coef.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + bias
                })
                .collect(),
            Model::KNearestNeighbor {
                k,
                exemplars,
                labels,
            } => {
                let mut dist: Vec<(f64, usize)> = exemplars
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (e.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                    .collect();
                let k = (*k).min(dist.len()).max(1);
                dist.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).expect("finite"));
                let mut votes = vec![0.0; self.class_order.len()];
                for &(_, i) in &dist[..k] {
                    let slot = self
                        .class_order
                        .iter()
                        .position(|c| *c == labels[i])
                        .expect("label in class order");
                    votes[slot] += 1.0;
                }
                votes
            }
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), SlipError> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SlipError> {
        let c: Classifier = serde_json::from_slice(&std::fs::read(path)?)?;
        if c.version != MODEL_VERSION {
            return Err(SlipError::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                c.version
            )));
        }
        if c.standardization.mean.len() != FEATURE_DIM {
            return Err(SlipError::Model(format!(
                "model expects {} features, this build uses {FEATURE_DIM}",
                c.standardization.mean.len()
            )));
        }
        Ok(c)
    }
}

impl SlipPredictor for Classifier {
    /// Ties resolve towards the earlier class in `class_order`.
    fn predict(&self, features: &[f64]) -> Result<ContactClass, SlipError> {
        let scores = self.scores(features)?;
        Ok(self.class_order[argmax_first(&scores)])
    }
}

pub fn train(samples: &[LabeledSample], config: &TrainConfig) -> Result<Classifier, SlipError> {
    let counts = class_counts(samples);
    if let Some(missing) = ContactClass::ALL.iter().find(|c| counts[c.index()] == 0) {
        return Err(SlipError::MissingClass(*missing));
    }
    let dim = samples[0].features.len();
    if let Some(bad) = samples.iter().find(|s| s.features.len() != dim) {
        return Err(SlipError::Dimension {
            expected: dim,
            got: bad.features.len(),
        });
    }
    let transform = config.transform;
    let transformed: Vec<Vec<f64>> = samples.iter().map(|s| transform.apply(&s.features)).collect();
    let standardization = Standardizer::fit(transformed.iter().map(|r| r.as_slice()), dim);
    let rows: Vec<Vec<f64>> = transformed.iter().map(|r| standardization.apply(r)).collect();
    let class_order = ContactClass::ALL.to_vec();

    let model = match config.kind {
        ModelKind::MultinomialLinear => Model::MultinomialLinear {
            weights: fit_linear(&rows, samples, &counts, config),
        },
        ModelKind::KNearestNeighbor => {
            let stride = rows.len().div_ceil(config.max_exemplars.max(1));
            let picked: Vec<usize> = (0..rows.len()).step_by(stride.max(1)).collect();
            Model::KNearestNeighbor {
                k: config.k.max(1),
                exemplars: picked.iter().map(|&i| rows[i].clone()).collect(),
                labels: picked.iter().map(|&i| samples[i].label).collect(),
            }
        }
    };
    Ok(Classifier {
        version: MODEL_VERSION,
        class_order,
        transform,
        standardization,
        model,
    })
}

fn fit_linear(
    rows: &[Vec<f64>],
    samples: &[LabeledSample],
    counts: &[usize; 3],
    config: &TrainConfig,
) -> Vec<Vec<f64>> {
    let n_classes = ContactClass::ALL.len();
    let dim = rows[0].len();
    let total = samples.len() as f64;
    let class_weight: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if config.class_weighting {
                total / (n_classes as f64 * c as f64)
            } else {
                1.0
            }
        })
        .collect();

    let mut weights = vec![vec![0.0; dim + 1]; n_classes];
    let mut grad = vec![vec![0.0; dim + 1]; n_classes];
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut rng = stream(config.seed, Purpose::Training, 0);
    let batch = config.batch_size.unwrap_or(rows.len()).clamp(1, rows.len());
    let mut probs = vec![0.0; n_classes];

    for _ in 0..config.epochs {
        if config.batch_size.is_some() {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            for g in grad.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            let mut weight_sum = 0.0;
            for &i in chunk {
                let x = &rows[i];
                let label = samples[i].label.index();
                let w_i = class_weight[label];
                weight_sum += w_i;
                for (p, w) in probs.iter_mut().zip(&weights) {
                    let (bias, coef) = w.split_last().expect("bias column");
                    *p = coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias;
                }
                softmax_in_place(&mut probs);
                for (c, g) in grad.iter_mut().enumerate() {
                    let err = w_i * (probs[c] - if c == label { 1.0 } else { 0.0 });
                    for (gj, xj) in g.iter_mut().zip(x) {
                        *gj += err * xj;
                    }
                    g[dim] += err;
                }
            }
            for (w, g) in weights.iter_mut().zip(&grad) {
                for j in 0..=dim {
                    let reg = if j < dim { config.l2 * w[j] } else { 0.0 };
                    w[j] -= config.learning_rate * (g[j] / weight_sum + reg);
                }
            }
        }
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn clusters(per_class: usize, seed: u64) -> Vec<LabeledSample> {
        let mut rng = stream(seed, Purpose::Training, 9);
        let centers = [[4.0, 0.0], [-2.0, 3.5], [-2.0, -3.5]];
        let mut out = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for i in 0..per_class {
                out.push(LabeledSample {
                    trial_id: 0,
                    finger_id: 0,
                    tick: i as u64,
                    features: vec![
                        center[0] + rng.gen_range(-0.5..0.5),
                        center[1] + rng.gen_range(-0.5..0.5),
                    ],
                    label: ContactClass::ALL[c],
                });
            }
        }
        out
    }

    fn accuracy(clf: &Classifier, samples: &[LabeledSample]) -> f64 {
        let hits = samples
            .iter()
            .filter(|s| clf.predict(&s.features).unwrap() == s.label)
            .count();
        hits as f64 / samples.len() as f64
    }

    #[test]
    fn separable_clusters_are_learned() {
        let data = clusters(60, 1);
        let clf = train(&data, &TrainConfig::default()).unwrap();
        assert_eq!(accuracy(&clf, &data), 1.0);
        let knn = train(
            &data,
            &TrainConfig {
                kind: ModelKind::KNearestNeighbor,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(accuracy(&knn, &data), 1.0);
        // cluster centers
        assert_eq!(clf.predict(&[4.0, 0.0]).unwrap(), ContactClass::Slip);
        assert_eq!(clf.predict(&[-2.0, -3.5]).unwrap(), ContactClass::NoContact);
    }

    #[test]
    fn duplication_leaves_weights_unchanged() {
        let data = clusters(30, 2);
        let doubled: Vec<_> = data.iter().chain(data.iter()).cloned().collect();
        let cfg = TrainConfig {
            batch_size: None,
            epochs: 200,
            ..TrainConfig::default()
        };
        let a = train(&data, &cfg).unwrap();
        let b = train(&doubled, &cfg).unwrap();
        let (Model::MultinomialLinear { weights: wa }, Model::MultinomialLinear { weights: wb }) =
            (&a.model, &b.model)
        else {
            unreachable!()
        };
        for (ra, rb) in wa.iter().zip(wb) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let data = clusters(40, 3);
        let cfg = TrainConfig {
            seed: 17,
            ..TrainConfig::default()
        };
        assert_eq!(train(&data, &cfg).unwrap(), train(&data, &cfg).unwrap());
    }

    #[test]
    fn missing_class_is_named() {
        let data: Vec<_> = clusters(10, 4)
            .into_iter()
            .filter(|s| s.label != ContactClass::Contact)
            .collect();
        let err = train(&data, &TrainConfig::default()).unwrap_err();
        assert!(err.to_string().contains("contact"), "{err}");
    }

    #[test]
    fn weight_scaling_keeps_argmax_and_ties_favor_slip() {
        let data = clusters(20, 5);
        let mut clf = train(&data, &TrainConfig::default()).unwrap();
        let before: Vec<_> = data.iter().map(|s| clf.predict(&s.features).unwrap()).collect();
        if let Model::MultinomialLinear { weights } = &mut clf.model {
            for w in weights.iter_mut().flatten() {
                *w *= 2.0;
            }
        }
        let after: Vec<_> = data.iter().map(|s| clf.predict(&s.features).unwrap()).collect();
        assert_eq!(before, after);

        // all-zero weights: every class scores 0, slip must win
        if let Model::MultinomialLinear { weights } = &mut clf.model {
            for w in weights.iter_mut().flatten() {
                *w = 0.0;
            }
        }
        assert_eq!(clf.predict(&[1.0, 1.0]).unwrap(), ContactClass::Slip);
        // slip and contact tied above no-contact
        if let Model::MultinomialLinear { weights } = &mut clf.model {
            weights[2][2] = -1.0;
        }
        assert_eq!(clf.predict(&[0.3, -0.2]).unwrap(), ContactClass::Slip);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let clf = train(&clusters(10, 6), &TrainConfig::default()).unwrap();
        assert!(matches!(
            clf.predict(&[1.0, 2.0, 3.0]),
            Err(SlipError::Dimension { .. })
        ));
    }

    #[test]
    fn standardizer_round_trip() {
        let rows = vec![vec![1.0, 5.0, 2.0], vec![3.0, 5.0, -4.0], vec![-2.0, 5.0, 0.5]];
        let st = Standardizer::fit(rows.iter().map(|r| r.as_slice()), 3);
        assert_eq!(st.std[1], 1.0);
        for r in &rows {
            let back = st.invert(&st.apply(r));
            for (a, b) in back.iter().zip(r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
