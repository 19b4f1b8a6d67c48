//! Pair scoring: sequence and graph pair features feeding one shared
//! logistic classifier. Both detectors take two units and return one score.

mod classifier;
mod features;
mod wl;

pub use classifier::{
    batch_gradient, batch_loss, predict, predict_with_threshold, train_classifier, train_classifier_with_validation,
    ClassifierModel, EpochRecord, FeatureScaler, LossKind, Prediction, TrainConfig, DEFAULT_THRESHOLD, FEATURE_SCHEMA_VERSION,
};
pub use features::{
    graph_features, histogram_cosine, sequence_features, FeatureKind, PairFeatures, GRAPH_FEATURES, SEQUENCE_FEATURES,
};
pub use wl::{
    multiset_jaccard, raw_wl_signature, wl_level_similarities, wl_signature, wl_signature_with, wl_similarity, LeafMode,
    WlSignature, DEFAULT_WL_ITERATIONS,
};

use crate::graph::GraphError;
use crate::tokens::TokenError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error("signatures have {left} and {right} iterations")]
    IterationMismatch { left: usize, right: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least two examples, found {found}")]
    TooFewExamples { found: usize },
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("feature vectors differ in kind or width")]
    MixedFeatures,
    #[error("training loss became non-finite")]
    NonFiniteLoss,
}
