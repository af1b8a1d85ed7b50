//! Stochastic Pauli noise: channels, error models, layer infidelities.

pub mod channel;
pub mod epsilon;
pub mod model;

pub use channel::{
    channel_infidelity, channel_polarization, depolarizing_channel, depolarizing_on, polarization, GateNoise,
    StochasticPauliChannel,
};
pub use epsilon::{epsilon_layer, epsilon_omega, Estimate, OmegaEstimate};
pub use model::{
    build_model1, build_model2, sample_random_model, CrosstalkSpec, ErrorModel, RandomModelSpec, MODEL_SCHEMA,
};
