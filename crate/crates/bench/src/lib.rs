//! Fixture loading shared by the benchmarks.

use std::path::{Path, PathBuf};

use gostcite::labeler::{train, Model, TrainConfig, TrainingExample};
use gostcite::{Config, FeatureContext, Lexicons};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn annotations_path() -> PathBuf {
    workspace_root().join("crates/core/tests/fixtures/annotations.xml")
}

pub fn large_document_path() -> PathBuf {
    workspace_root().join("crates/cli/tests/fixtures/large/report20.json")
}

pub fn collection_path() -> PathBuf {
    workspace_root().join("crates/cli/tests/fixtures/collection.jsonl")
}

pub fn training_examples(lexicons: &Lexicons) -> Vec<TrainingExample> {
    let ctx = FeatureContext::new(lexicons, Config::default().year_range());
    gostcite::training_data::load_annotations(&annotations_path())
        .expect("annotation fixture")
        .into_iter()
        .map(|s| TrainingExample::featurize(s, &ctx))
        .collect()
}

/// The model the CLI would train with default settings.
pub fn fixture_model(lexicons: &Lexicons) -> Model {
    train(&training_examples(lexicons), TrainConfig::default()).expect("training succeeds")
}
