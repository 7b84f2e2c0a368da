//! Certification: grid checks of the scalar inequalities, stable-version
//! margins, the equality-case detector and a perturbation search around
//! `f_opt`.

pub mod analytic;
pub mod equality;
pub mod margin;
pub mod report;
pub mod search;

pub use analytic::{
    certify_all, certify_change_of_measure, certify_rsq_phi, certify_tail_phi, certify_threshold,
    change_of_measure_default_grids, rsq_phi_default_grids, tail_phi_default_grids, threshold_default_grids, Constants,
};
pub use equality::{equality_case_detect, EqualityFit};
pub use margin::{theorem_margin, theorem_margin_with, MarginKind, TheoremMargin};
pub use report::{CertificateReport, Grid, Segment, Verdict};
pub use search::{perturbation_search, SearchConfig, SearchInit, SearchRecord};
