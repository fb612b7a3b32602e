//! Dörfler marking, the adaptive loop, data approximation, convergence
//! histories and the verification operations for the analysis of the loop.

mod afem;
mod contraction;
mod history;
mod marking;
pub mod verify;

pub use afem::{
    amfem, approx_data, optimal_amfem, AmfemOptions, AmfemOutcome, ApproxOutcome, OptimalOutcome,
    ReferenceSolution, Strategy, THETA_OSC,
};
pub use contraction::{contraction_report, BetaContraction, ContractionReport, BETA_GRID};
pub use history::{fit_log_slope, fit_rate, ConvergenceHistory, HistoryRecord, RateAxis, RateQuantity, CSV_HEADER};
pub use marking::{brute_force_min_cardinality, dorfler_mark, dorfler_select};
