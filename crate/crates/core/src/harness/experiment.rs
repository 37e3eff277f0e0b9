use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{preprocess_all, DatasetManifest, FaceSet, FailureMode};
use super::table::{recognition_rate, Rate, ResultsTable};
use crate::classify::{fit_min_distance, MinDistModel, MlpConfig, MlpModel};
use crate::codec::{put_f64s, put_u32, Reader};
use crate::eigen::{fit_pca, split_train_test, EigenModel, FeatureMatrix};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lbp::{block_features, lbp_image, BLOCK_SIZE};
use crate::wavelet::{average_detail, confidence_matrix, dwt2_single, flatten, sweep_weights, FusionWeights};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Fused Haar approximation and detail bands.
    #[default]
    Wavelet,
    /// Concatenated 8x8 block LBP histograms.
    Lbp,
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wavelet" => Ok(FeatureKind::Wavelet),
            "lbp" => Ok(FeatureKind::Lbp),
            _ => Err(Error::Format(format!("unknown feature {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Ann,
    MinDist,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ann" | "mlp" => Ok(ClassifierKind::Ann),
            "mindist" => Ok(ClassifierKind::MinDist),
            _ => Err(Error::Format(format!("unknown classifier {s:?}"))),
        }
    }
}

/// One experiment. JSON config files use these field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub feature: FeatureKind,
    pub classifier: ClassifierKind,
    /// Eigenvector counts for the network columns.
    pub eigen_counts: Vec<usize>,
    /// Run all eleven weight pairs instead of the single `beta`.
    pub sweep: bool,
    /// Detail weight when not sweeping; the approximation gets `1 - beta`.
    pub beta: f64,
    /// Eigenvector count used by the minimum-distance column.
    pub min_dist_eigen: usize,
    /// Hidden widths, rate, momentum, epochs and stopping loss. Input and
    /// output widths follow the data.
    pub mlp: MlpConfig,
    pub seed: u64,
    /// Drop failing images with their split partner instead of aborting.
    pub lenient: bool,
    /// Use only the first `n` images of each subject.
    pub per_subject: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            feature: FeatureKind::Wavelet,
            classifier: ClassifierKind::Ann,
            eigen_counts: vec![10, 20, 30, 40, 50],
            sweep: false,
            beta: 0.2,
            min_dist_eigen: 40,
            mlp: MlpConfig::default(),
            seed: 0,
            lenient: false,
            per_subject: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eigen_counts.is_empty() || self.eigen_counts.contains(&0) {
            return Err(Error::size(format!(
                "eigen counts {:?} must be non-empty and positive",
                self.eigen_counts
            )));
        }
        if self.min_dist_eigen == 0 {
            return Err(Error::size("min_dist_eigen must be positive"));
        }
        FusionWeights::from_beta(self.beta)?;
        self.mlp.validate()
    }

    fn failure_mode(&self) -> FailureMode {
        if self.lenient {
            FailureMode::Lenient
        } else {
            FailureMode::Strict
        }
    }

    fn weights(&self) -> Result<Vec<FusionWeights>> {
        if self.sweep {
            Ok(sweep_weights())
        } else {
            Ok(vec![FusionWeights::from_beta(self.beta)?])
        }
    }

    /// Network settings for `k` inputs and `classes` outputs.
    fn mlp_for(&self, k: usize, classes: usize) -> MlpConfig {
        let mut cfg = self.mlp.clone();
        cfg.layer_sizes[0] = k;
        cfg.layer_sizes[4] = classes;
        cfg.seed = self.seed;
        cfg
    }
}

/// Flattened `alpha LL + beta D` of one face.
pub fn wavelet_feature(face: &GrayImage, w: FusionWeights) -> Result<Vec<f64>> {
    let bands = dwt2_single(&face.to_real())?;
    let detail = average_detail(&bands);
    Ok(flatten(&confidence_matrix(&bands.ll, &detail, w)?))
}

/// Block LBP histograms of one face.
pub fn lbp_feature(face: &GrayImage) -> Result<Vec<f64>> {
    Ok(block_features(&lbp_image(face)?, BLOCK_SIZE)?.data)
}

/// Which feature a pipeline extracts, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureSpec {
    Wavelet(FusionWeights),
    Lbp,
}

impl FeatureSpec {
    pub fn extract(&self, face: &GrayImage) -> Result<Vec<f64>> {
        match *self {
            FeatureSpec::Wavelet(w) => wavelet_feature(face, w),
            FeatureSpec::Lbp => lbp_feature(face),
        }
    }

    /// Features for every face, computed in parallel, in input order.
    pub fn extract_all(&self, set: &FaceSet) -> Result<FeatureMatrix> {
        let rows = set
            .faces
            .par_iter()
            .map(|f| self.extract(f))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::from_rows(rows, set.labels.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainedClassifier {
    Mlp(MlpModel),
    MinDist(MinDistModel),
}

/// PCA projection followed by a classifier.
///
/// Network inputs are the eigenspace coordinates divided by the square root of
/// the leading eigenvalue, which keeps them near unit scale whatever the
/// feature's units.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenClassifier {
    pub eigen: EigenModel,
    pub input_scale: f64,
    pub classifier: TrainedClassifier,
}

impl EigenClassifier {
    pub fn fit(train: &FeatureMatrix, k: usize, kind: ClassifierKind, cfg: &ExperimentConfig) -> Result<Self> {
        let eigen = fit_pca(train, k)?;
        let coords = eigen.project_all(train)?;
        Ok(match kind {
            ClassifierKind::MinDist => EigenClassifier {
                eigen,
                input_scale: 1.0,
                classifier: TrainedClassifier::MinDist(fit_min_distance(&coords)?),
            },
            ClassifierKind::Ann => {
                let lead = eigen.eigenvalues.first().copied().unwrap_or(0.0);
                let input_scale = if lead > 0.0 { 1.0 / lead.sqrt() } else { 1.0 };
                let scaled = scale_rows(&coords, input_scale)?;
                let classes = distinct(train.labels()).len();
                let (model, _) = MlpModel::train(&scaled, &cfg.mlp_for(k, classes))?;
                EigenClassifier {
                    eigen,
                    input_scale,
                    classifier: TrainedClassifier::Mlp(model),
                }
            }
        })
    }

    pub fn predict(&self, feature: &[f64]) -> Result<u32> {
        let mut coords = self.eigen.project(feature)?;
        match &self.classifier {
            TrainedClassifier::MinDist(m) => m.classify(&coords),
            TrainedClassifier::Mlp(m) => {
                coords.iter_mut().for_each(|c| *c *= self.input_scale);
                m.predict(&coords)
            }
        }
    }

    pub fn predict_all(&self, m: &FeatureMatrix) -> Result<Vec<u32>> {
        (0..m.rows()).map(|i| self.predict(m.row(i))).collect()
    }

    pub fn rate(&self, test: &FeatureMatrix) -> Result<Rate> {
        recognition_rate(&self.predict_all(test)?, test.labels())
    }
}

fn distinct(labels: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    for &l in labels {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

fn scale_rows(m: &FeatureMatrix, s: f64) -> Result<FeatureMatrix> {
    let rows = (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v * s).collect())
        .collect();
    FeatureMatrix::from_rows(rows, m.labels().to_vec())
}

/// Train on the odd rows, report the rate on the even rows.
pub fn evaluate_split(
    features: &FeatureMatrix,
    k: usize,
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
) -> Result<Rate> {
    let (train, test) = split_train_test(features)?;
    EigenClassifier::fit(&train, k, kind, cfg)?.rate(&test)
}

fn weight_label(w: FusionWeights) -> String {
    format!("{:.1}/{:.1}", w.alpha(), w.beta())
}

fn min_dist_label(k: usize) -> String {
    format!("MinDist k={k}")
}

/// Evaluates every `(row, col)` cell in parallel; results keep grid order.
fn grid<F>(rows: usize, cols: usize, cell: F) -> Result<Vec<Vec<Rate>>>
where
    F: Fn(usize, usize) -> Result<Rate> + Sync,
{
    let flat = (0..rows * cols)
        .into_par_iter()
        .map(|i| cell(i / cols, i % cols))
        .collect::<Result<Vec<Rate>>>()?;
    Ok(flat.chunks(cols.max(1)).map(<[Rate]>::to_vec).collect())
}

/// Wavelet-confidence experiment on already normalized faces.
///
/// Rows follow the weight pairs (all eleven when sweeping). With the network
/// there is one column per eigenvector count; with the minimum-distance rule a
/// single column at `min_dist_eigen`.
pub fn wavelet_experiment(set: &FaceSet, cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let weights = cfg.weights()?;
    let features = weights
        .iter()
        .map(|&w| FeatureSpec::Wavelet(w).extract_all(set))
        .collect::<Result<Vec<_>>>()?;
    let (cols, caption): (Vec<(usize, ClassifierKind)>, String) = match cfg.classifier {
        ClassifierKind::Ann => (
            cfg.eigen_counts.iter().map(|&k| (k, ClassifierKind::Ann)).collect(),
            format!(
                "{}: wavelet confidence, ANN, recognition rate (%) by alpha/beta and eigenvector count",
                set.name
            ),
        ),
        ClassifierKind::MinDist => (
            vec![(cfg.min_dist_eigen, ClassifierKind::MinDist)],
            format!(
                "{}: wavelet confidence, minimum distance with {} eigenvectors, recognition rate (%)",
                set.name, cfg.min_dist_eigen
            ),
        ),
    };
    let cells = grid(weights.len(), cols.len(), |r, c| {
        let (k, kind) = cols[c];
        evaluate_split(&features[r], k, kind, cfg)
    })?;
    let col_labels = cols
        .iter()
        .map(|&(k, kind)| match kind {
            ClassifierKind::Ann => k.to_string(),
            ClassifierKind::MinDist => min_dist_label(k),
        })
        .collect();
    ResultsTable::new(
        caption,
        "alpha/beta",
        weights.iter().map(|&w| weight_label(w)).collect(),
        col_labels,
        cells,
    )
}

/// LBP experiment on already normalized faces: one row named after the set.
/// With the network, one column per eigenvector count plus the
/// minimum-distance column; otherwise only the minimum-distance column.
pub fn lbp_experiment(set: &FaceSet, cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let features = FeatureSpec::Lbp.extract_all(set)?;
    let mut cols: Vec<(usize, ClassifierKind)> = match cfg.classifier {
        ClassifierKind::Ann => cfg.eigen_counts.iter().map(|&k| (k, ClassifierKind::Ann)).collect(),
        ClassifierKind::MinDist => Vec::new(),
    };
    cols.push((cfg.min_dist_eigen, ClassifierKind::MinDist));
    let cells = grid(1, cols.len(), |_, c| {
        let (k, kind) = cols[c];
        evaluate_split(&features, k, kind, cfg)
    })?;
    let col_labels = cols
        .iter()
        .map(|&(k, kind)| match kind {
            ClassifierKind::Ann => format!("ANN k={k}"),
            ClassifierKind::MinDist => min_dist_label(k),
        })
        .collect();
    ResultsTable::new(
        "LBP block histograms, recognition rate (%)",
        "database",
        vec![set.name.clone()],
        col_labels,
        cells,
    )
}

fn load(manifest: &DatasetManifest, cfg: &ExperimentConfig) -> Result<FaceSet> {
    let manifest = match cfg.per_subject {
        Some(n) => manifest.clone().truncated(n)?,
        None => manifest.clone(),
    };
    preprocess_all(&manifest, cfg.failure_mode())
}

pub fn run_wavelet_experiment(manifest: &DatasetManifest, cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    wavelet_experiment(&load(manifest, cfg)?, cfg)
}

pub fn run_lbp_experiment(manifest: &DatasetManifest, cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    lbp_experiment(&load(manifest, cfg)?, cfg)
}

/// Dispatches on `cfg.feature`.
pub fn run_experiment(manifest: &DatasetManifest, cfg: &ExperimentConfig) -> Result<ResultsTable> {
    match cfg.feature {
        FeatureKind::Wavelet => run_wavelet_experiment(manifest, cfg),
        FeatureKind::Lbp => run_lbp_experiment(manifest, cfg),
    }
}

/// A trained end-to-end recognizer: feature extraction, projection,
/// classifier, and the subject names behind its labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    pub feature: FeatureSpec,
    pub model: EigenClassifier,
    pub subjects: Vec<String>,
}

const PIPELINE_MAGIC: &[u8; 8] = b"TFRSPIP1";

impl Pipeline {
    /// Fits on the training half of `set`. The eigenvector count is the first
    /// of `eigen_counts` for the network and `min_dist_eigen` otherwise; a
    /// sweep is ignored in favour of `beta`.
    pub fn train(set: &FaceSet, subjects: Vec<String>, cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let feature = match cfg.feature {
            FeatureKind::Wavelet => FeatureSpec::Wavelet(FusionWeights::from_beta(cfg.beta)?),
            FeatureKind::Lbp => FeatureSpec::Lbp,
        };
        let k = match cfg.classifier {
            ClassifierKind::Ann => cfg.eigen_counts[0],
            ClassifierKind::MinDist => cfg.min_dist_eigen,
        };
        let (train, _) = split_train_test(&feature.extract_all(set)?)?;
        Ok(Pipeline {
            feature,
            model: EigenClassifier::fit(&train, k, cfg.classifier, cfg)?,
            subjects,
        })
    }

    pub fn predict(&self, face: &GrayImage) -> Result<u32> {
        self.model.predict(&self.feature.extract(face)?)
    }

    pub fn subject_name(&self, label: u32) -> Option<&str> {
        self.subjects.get(label as usize).map(String::as_str)
    }

    /// `TFRSPIP1`; feature tag (`u32`, 0 wavelet, 1 LBP) and beta (`f64`);
    /// subject count and length-prefixed UTF-8 names; input scale; then the
    /// length-prefixed eigen model, a classifier tag (0 network, 1 minimum
    /// distance) and the length-prefixed classifier. Little-endian throughout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = PIPELINE_MAGIC.to_vec();
        let (tag, beta) = match self.feature {
            FeatureSpec::Wavelet(w) => (0, w.beta()),
            FeatureSpec::Lbp => (1, 0.0),
        };
        put_u32(&mut out, tag);
        put_f64s(&mut out, &[beta]);
        put_u32(&mut out, self.subjects.len() as u32);
        for s in &self.subjects {
            put_u32(&mut out, s.len() as u32);
            out.extend_from_slice(s.as_bytes());
        }
        put_f64s(&mut out, &[self.model.input_scale]);
        let eigen = self.model.eigen.to_bytes();
        put_u32(&mut out, eigen.len() as u32);
        out.extend_from_slice(&eigen);
        let (tag, bytes) = match &self.model.classifier {
            TrainedClassifier::Mlp(m) => (0, m.to_bytes()),
            TrainedClassifier::MinDist(m) => (1, m.to_bytes()),
        };
        put_u32(&mut out, tag);
        put_u32(&mut out, bytes.len() as u32);
        out.extend_from_slice(&bytes);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(PIPELINE_MAGIC)?;
        let tag = r.u32()?;
        let beta = r.f64()?;
        let feature = match tag {
            0 => FeatureSpec::Wavelet(FusionWeights::from_beta(beta)?),
            1 => FeatureSpec::Lbp,
            t => return Err(Error::Format(format!("unknown feature tag {t}"))),
        };
        let n = r.u32()? as usize;
        let mut subjects = Vec::new();
        for _ in 0..n {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.bytes(len)?).map_err(|e| Error::Format(format!("subject name: {e}")))?;
            subjects.push(name.to_owned());
        }
        let input_scale = r.f64()?;
        let len = r.u32()? as usize;
        let eigen = EigenModel::from_bytes(r.bytes(len)?)?;
        let tag = r.u32()?;
        let len = r.u32()? as usize;
        let body = r.bytes(len)?;
        let classifier = match tag {
            0 => TrainedClassifier::Mlp(MlpModel::from_bytes(body)?),
            1 => TrainedClassifier::MinDist(MinDistModel::from_bytes(body)?),
            t => return Err(Error::Format(format!("unknown classifier tag {t}"))),
        };
        r.finish()?;
        Ok(Pipeline {
            feature,
            model: EigenClassifier {
                eigen,
                input_scale,
                classifier,
            },
            subjects,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{FACE_HEIGHT, FACE_WIDTH};

    /// Two faces per subject, each pair identical, so train and test halves
    /// coincide.
    fn duplicated(subjects: usize) -> FaceSet {
        let mut faces = Vec::new();
        let mut labels = Vec::new();
        for s in 0..subjects {
            let face = GrayImage::from_fn(FACE_WIDTH, FACE_HEIGHT, |x, y| {
                ((x * (s + 1) + y * (2 * s + 3) + s * 37) % 256) as u8
            });
            faces.push(face.clone());
            faces.push(face);
            labels.extend([s as u32, s as u32]);
        }
        FaceSet::from_faces("dup", faces, labels).unwrap()
    }

    fn quick_cfg() -> ExperimentConfig {
        ExperimentConfig {
            eigen_counts: vec![1, 2, 3],
            min_dist_eigen: 3,
            mlp: MlpConfig {
                epochs: 5,
                ..MlpConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn wavelet_min_dist_on_identical_halves_is_perfect() {
        let cfg = ExperimentConfig {
            classifier: ClassifierKind::MinDist,
            sweep: true,
            ..quick_cfg()
        };
        let t = wavelet_experiment(&duplicated(4), &cfg).unwrap();
        assert_eq!(t.shape(), (11, 1));
        assert_eq!(t.row_labels[0], "1.0/0.0");
        assert_eq!(t.row_labels[10], "0.0/1.0");
        assert!(t.cells.iter().flatten().all(|&r| r == Rate::MAX));
    }

    #[test]
    fn lbp_min_dist_on_identical_halves_is_perfect() {
        let cfg = ExperimentConfig {
            feature: FeatureKind::Lbp,
            classifier: ClassifierKind::MinDist,
            ..quick_cfg()
        };
        let t = lbp_experiment(&duplicated(4), &cfg).unwrap();
        assert_eq!(t.shape(), (1, 1));
        assert_eq!(t.get(0, 0), Rate::MAX);
    }

    #[test]
    fn table_shapes() {
        let set = duplicated(4);
        let cfg = ExperimentConfig {
            sweep: true,
            ..quick_cfg()
        };
        assert_eq!(wavelet_experiment(&set, &cfg).unwrap().shape(), (11, 3));
        let single = ExperimentConfig {
            sweep: false,
            ..cfg.clone()
        };
        let t = wavelet_experiment(&set, &single).unwrap();
        assert_eq!(t.row_labels, vec!["0.8/0.2"]);
        let lbp = lbp_experiment(
            &set,
            &ExperimentConfig {
                feature: FeatureKind::Lbp,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(lbp.shape(), (1, 4));
        assert_eq!(lbp.col_labels.last().unwrap(), "MinDist k=3");
    }

    #[test]
    fn rank_errors_surface() {
        let cfg = ExperimentConfig {
            classifier: ClassifierKind::MinDist,
            min_dist_eigen: 9,
            ..quick_cfg()
        };
        assert!(matches!(
            wavelet_experiment(&duplicated(4), &cfg),
            Err(Error::Rank { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig {
            eigen_counts: vec![],
            ..quick_cfg()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            eigen_counts: vec![0],
            ..quick_cfg()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            beta: 1.5,
            ..quick_cfg()
        }
        .validate()
        .is_err());
        let json = r#"{"feature":"lbp","classifier":"mindist","eigen_counts":[5],"mlp":{"epochs":3}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.feature, FeatureKind::Lbp);
        assert_eq!(cfg.mlp.epochs, 3);
        assert_eq!(cfg.mlp.learning_rate, 0.02);
        assert_eq!(cfg.min_dist_eigen, 40);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn untrained_network_scores_near_chance() {
        // Balanced ten-class test set scored by a randomly initialized network.
        let classes: Vec<u32> = (0..10).collect();
        let mut total = 0.0;
        let trials = 20;
        for seed in 0..trials {
            let cfg = MlpConfig {
                layer_sizes: [4, 8, 8, 8, 10],
                seed,
                ..MlpConfig::default()
            };
            let net = MlpModel::init(&cfg, classes.clone()).unwrap();
            let n = 600;
            let actual: Vec<u32> = (0..n).map(|i| (i % 10) as u32).collect();
            let predicted: Vec<u32> = (0..n)
                .map(|i| {
                    let x: Vec<f64> = (0..4)
                        .map(|j| (((i * 7919 + j * 104_729) % 1000) as f64 / 500.0) - 1.0)
                        .collect();
                    net.predict(&x).unwrap()
                })
                .collect();
            total += recognition_rate(&predicted, &actual).unwrap().percent();
        }
        let mean = total / trials as f64;
        // Standard error of the mean of 20 rates over 600 draws at p = 0.1.
        let sigma = 100.0 * (0.1f64 * 0.9 / 600.0).sqrt() / (trials as f64).sqrt();
        assert!((mean - 10.0).abs() <= 3.0 * sigma.max(1.0), "mean {mean}");
    }

    #[test]
    fn pipeline_round_trip() {
        let set = duplicated(3);
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        for cfg in [
            ExperimentConfig {
                classifier: ClassifierKind::MinDist,
                ..quick_cfg()
            },
            ExperimentConfig {
                feature: FeatureKind::Lbp,
                eigen_counts: vec![2],
                ..quick_cfg()
            },
        ] {
            let p = Pipeline::train(&set, names.clone(), &cfg).unwrap();
            let back = Pipeline::from_bytes(&p.to_bytes()).unwrap();
            assert_eq!(back, p);
            for (face, &label) in set.faces.iter().zip(&set.labels) {
                assert_eq!(back.predict(face).unwrap(), p.predict(face).unwrap());
                if cfg.classifier == ClassifierKind::MinDist {
                    assert_eq!(back.predict(face).unwrap(), label);
                }
            }
        }
        assert!(Pipeline::from_bytes(b"TFRSPIP1").is_err());
    }
}
