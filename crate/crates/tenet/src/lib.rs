//! Directed causal networks from financial time series.
//!
//! The pipeline: intraday prices become log returns sampled every `tau`
//! rows, each return series is discretized into quantile bins, and for each
//! lag the transfer entropy `I(A_m; B_n | A_n)` is estimated for every
//! ordered pair of instruments with the Schurmann-Grassberger entropy
//! estimator. Links are validated against a Gamma null (or shuffle
//! surrogates) with Bonferroni correction over the N^2 ordered pairs, and
//! the validated networks feed the network-level statistics: link counts
//! per lag, magnitude summaries, TE histograms, cross-lag correlation,
//! degree distributions, tail fits, and sector breakdowns.
//!
//! See the `examples/` directory for a runnable tour of each capability.

pub mod error;
pub mod infocore;
pub mod ingest;
pub mod netstats;
pub mod run;
pub mod significance;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use infocore::{
    build_counts, conditional_mutual_information, freq_conditional_mutual_information,
    freq_entropy, freq_mutual_information, mutual_information, sg_entropy, te_matrix,
    transfer_entropy, transfer_entropy_cond_form, CountTable, TeMatrix,
};
pub use ingest::{
    compute_log_returns, discretize_matrix, discretize_quantiles, load_price_matrix,
    split_lagged, DiscreteMatrix, DiscreteSeries, LaggedPair, PriceMatrix, ReturnMatrix,
};
pub use netstats::{
    build_network, cross_lag_correlation, degree_distributions, export_network,
    fit_distributions, link_count_sweep, magnitude_summary, sector_stats, te_histogram,
    CausalNetwork, DistributionFit, ExportFormat,
};
pub use run::{analyze, calibrate_gamma_null, write_synth_dataset, Manifest, RunConfig};
pub use significance::{
    bonferroni, dof, gamma_threshold, permutation_pvalue, validate_matrix, SignificanceMask,
    SignificanceModel, ValidatorKind,
};
pub use synth::{gen_prices, gen_returns, Coupling, CouplingKind, SynthSpec};
