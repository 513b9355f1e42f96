//! Transfer function, frequency-response measurement, decay fitting and
//! condition reports.

mod fit;
mod freqresp;
mod report;
mod transfer;

pub use fit::{fit_decay, DecayReport, FitOptions, MIN_FIT_SAMPLES};
pub use freqresp::{measure_frequency_response, measure_response, FREQRESP_TRANSIENT_LENGTHS};
pub use report::{condition_report, ConditionReport, DelayRegime, SanoWindow};
pub use transfer::{transfer_function, TransferEval};
