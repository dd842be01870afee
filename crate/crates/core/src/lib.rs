//! Feature pipeline for comparing the visual and textual framing of two
//! video corpora: per-frame color statistics, per-video aggregation over
//! segments, two-group comparison with FDR control, transcript features,
//! and tabular classifiers with cross-validated evaluation.

pub mod colorfeat;
pub mod ingest;
pub mod learn;
pub mod par;
pub mod stats;
pub mod textfeat;
