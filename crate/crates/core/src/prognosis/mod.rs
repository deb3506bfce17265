//! Exemplar library, similarity retrieval, TSK aggregation and rule mining.

pub mod library;
pub mod rules;
pub mod similarity;
pub mod storage;
pub mod tsk;

pub use library::{build_library, run_signature, run_window, BuildMetadata, ExemplarLibrary};
pub use rules::{explain, mine_rule, render_rule, Antecedent, MinedRule, MAX_ANTECEDENTS};
pub use similarity::{jaccard, jaccard_similarity, retrieve_top_k, Match};
pub use storage::{decode_library, encode_library, export_text, read_library_file, write_library_file};
pub use tsk::{
    predict, predict_rul, prediction_interval, tsk_aggregate, weighted_quantile, Interval,
    PredictParams, Prediction, QueryRef, DEFAULT_INTERVAL_LEVEL, DEFAULT_TOP_K,
};
