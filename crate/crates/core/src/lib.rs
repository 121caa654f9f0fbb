//! Educational homophily toolkit.
//!
//! Indicators of assortative mating on couple contingency tables,
//! counterfactual tables under competing association-preserving methods,
//! executable analytical criteria, counterfactual decomposition of homogamy
//! trends and decade-by-state trend scoring.

pub mod error;
pub mod counterfactual;
pub mod criteria;
pub mod decomposition;
pub mod indicators;
pub mod io;
pub mod panel;
pub mod tables;
pub mod trend;

pub use error::{Error, Result};
pub use tables::{
    enumerate_tables, homogamy_share, marginals, merge_categories, pam_match, random_match,
    ContingencyTable, Marginals, Partition, TableWithSingles,
};
pub use counterfactual::{fit, fit_observed, CounterfactualResult, FitOptions, Method};
pub use decomposition::{cumulative_series, decompose, decompose_observed, DecompositionResult, Scheme};
pub use indicators::{IndicatorTag, Rounding};
pub use panel::{CategoryScheme, IncomePanel, PanelDataset};
pub use trend::{score, DecadeChange, TrendStats};
