//! Federated learning with differentially private local training, and an
//! f-DP accountant that turns a federation's configuration into weak and
//! strong federated Gaussian-DP guarantees.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what the CLI uses.

pub mod accountant;
pub mod data;
pub mod engine;
pub mod error;
pub mod rng;
pub mod scalar;
pub mod tradeoff;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Curve = tradeoff::TradeoffCurve<f64>;
pub type CurveF32 = tradeoff::TradeoffCurve<f32>;
pub type Guarantee = tradeoff::GaussianGuarantee<f64>;
pub type Dataset = data::LabeledDataset<f64>;
pub type DatasetF32 = data::LabeledDataset<f32>;
pub type Model = engine::ModelVector<f64>;
pub type ModelF32 = engine::ModelVector<f32>;
pub type Federation = engine::FederationState<f64>;
pub type Config = engine::SyncConfig<f64>;
pub type PrivacyParams = accountant::ClientPrivacyParams<f64>;
pub type PrivacyReport = accountant::FederatedPrivacyReport<f64>;
