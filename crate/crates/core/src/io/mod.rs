//! Tables, generated desk-scale data, and model manifests.

mod generate;
mod manifest;
mod tables;

pub use generate::{compute_feature_table, generate_performance, Optimizer, SuiteConfig};
pub use manifest::{
    load_manifest, save_manifest, ClassSummary, ClassifierSummary, Manifest, MemberSummary,
    MANIFEST_FORMAT,
};
pub use tables::{
    load_feature_table, load_performance_table, read_features, read_performance,
    save_feature_table, save_performance_table, write_features, write_performance,
    PerformanceRecord, PERFORMANCE_HEADER,
};
