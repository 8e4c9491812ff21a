//! Monte-Carlo view of the Gaussian encoding: sample `(x, y)` pairs through
//! the noisy position measurement, estimate their mutual information, and
//! check the convex-closure identity on explicit pure-state ensembles.

mod em;
mod estimate;
mod sample;

pub use em::{
    check_pure_ensemble, em_trial, optimal_ensemble_average, verify_em_identity,
    EmIdentityReport, EmTrial, EnsembleMoments, PureEnsemble, EM_DISPLACEMENT_SAMPLES,
};
pub use estimate::{estimate_mutual_information, histogram_bins, Estimator, MiEstimate};
pub use sample::{
    analytic_mutual_information, sample_channel, sample_chunk, chunk_count, EncodingSample,
    SimulationConfig, SAMPLE_CHUNK,
};
