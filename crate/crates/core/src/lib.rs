//! Directed information flow between the columns of a price panel.
//!
//! The pipeline is:
//!
//! 1. [`ingest`]: load and align a panel of closing prices, then take log returns.
//! 2. [`symbolic`]: discretize each return column into `q` equal-width bins.
//! 3. [`entropy`]: plug-in symbolic transfer entropy for every ordered pair of
//!    columns, plus the antisymmetric flow matrix.
//! 4. [`flow`]: per-node average outflow/inflow, net flow rankings and the
//!    outflow-on-inflow least-squares fit.
//! 5. [`evolution`]: the same analysis over calendar-year or fixed-length
//!    windows, reduced to market-wide averages.
//!
//! [`synthetic`] generates coupled processes whose transfer entropy is known
//! in closed form, and [`cli`] wires everything into batch runs.
//!
//! Matrix convention used everywhere: entry `(i, j)` is the flow **from** `i`
//! **to** `j`.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod flow;
pub mod format;
pub mod ingest;
pub mod sectors;
pub mod stats;
pub mod symbolic;
pub mod synthetic;

pub use entropy::{
    accumulate_counts, asymmetry_matrix, brute_force_te, te_matrix, transfer_entropy,
    transfer_entropy_pair, EstimatorConfig, JointCounts, MatrixKind, TEMatrix,
};
pub use error::{Error, Result};
pub use evolution::{
    mean_abs_asymmetry, mean_te_of_matrix, scan_q, split_windows, windowed_te, BinningMode,
    EvolutionSeries, WindowScheme, WindowSpec,
};
pub use flow::{flow_summary, ols_outflow_on_inflow, rank_by_net_flow, FlowSummary, RegressionResult};
pub use ingest::{
    align_panel, compute_log_returns, load_price_panel, AlignmentPolicy, PanelFormat, PricePanel,
    ReturnPanel,
};
pub use symbolic::{fit_bins, symbolize, symbolize_panel, BinningSpec, SymbolSeries};
pub use synthetic::{analytic_te, generate, CoupledProcessSpec, ProcessKind};
