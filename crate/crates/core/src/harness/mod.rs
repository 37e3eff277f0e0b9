//! Dataset ingestion, the synthetic dataset generator, the odd/even
//! experiment protocols and result tables.

mod dataset;
mod experiment;
mod table;

pub use dataset::{
    load_gray, preprocess_all, preprocess_file, scan_dataset, synth_dataset, synth_images, DatasetManifest, FaceSet,
    FailureMode, Skipped, Subject, SYNTH_SIZE,
};
pub use experiment::{
    evaluate_split, lbp_experiment, lbp_feature, run_experiment, run_lbp_experiment, run_wavelet_experiment,
    wavelet_experiment, wavelet_feature, ClassifierKind, EigenClassifier, ExperimentConfig, FeatureKind, FeatureSpec,
    Pipeline, TrainedClassifier,
};
pub use table::{emit_results, recognition_rate, OutputFormat, Rate, ResultsTable};
