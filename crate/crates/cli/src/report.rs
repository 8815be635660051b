//! The JSON privacy report.

use std::collections::HashMap;
use std::path::Path;

use fedfdp::accountant::{ClientPrivacyParams, FederatedPrivacyReport, REGIME_NOTE};
use serde::{Deserialize, Serialize};

use crate::error::{write_file, CliResult};

pub const SINGLE_CLIENT_NOTE: &str = "strong guarantee omitted: with one client there is no coalition of other clients";
pub const NO_NOISE_NOTE: &str = "noise_scale is 0: the run is not differentially private and carries no guarantee";
pub const NO_ROUNDS_NOTE: &str = "sync_rounds is 0: nothing is released, so every client is 0-GDP";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientEntry {
    pub client: usize,
    pub batch_size: usize,
    pub dataset_size: usize,
    pub noise_scale: f64,
    pub clip_norm: f64,
    pub local_iters: usize,
    pub sync_rounds: usize,
    pub client_sampling_p: f64,
    pub mu: Option<f64>,
    /// Single-round curve, relative to the report's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReportDoc {
    pub num_clients: usize,
    pub mu_max: Option<f64>,
    pub weak_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub regime_note: String,
    pub clients: Vec<ClientEntry>,
}

impl PrivacyReportDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn entry(i: usize, p: &ClientPrivacyParams, mu: Option<f64>) -> ClientEntry {
    ClientEntry {
        client: i,
        batch_size: p.batch_size,
        dataset_size: p.dataset_size,
        noise_scale: p.noise_scale,
        clip_norm: p.clip_norm,
        local_iters: p.local_iters,
        sync_rounds: p.sync_rounds,
        client_sampling_p: p.client_sampling_p,
        mu,
        curve_file: None,
    }
}

/// Runs the accountant. With `curve_grid`, each distinct single-round curve
/// is written under `<out_dir>/curves/`.
pub fn build_report(params: &[ClientPrivacyParams], curve_grid: Option<usize>, out_dir: &Path) -> CliResult<PrivacyReportDoc> {
    if params.iter().all(|p| p.noise_scale == 0.0) {
        return Ok(PrivacyReportDoc {
            num_clients: params.len(),
            mu_max: None,
            weak_mu: None,
            strong_mu: None,
            notes: vec![NO_NOISE_NOTE.to_string()],
            regime_note: REGIME_NOTE.to_string(),
            clients: params.iter().enumerate().map(|(i, p)| entry(i, p, None)).collect(),
        });
    }

    if params.iter().all(|p| p.sync_rounds == 0) {
        let m = params.len();
        let mut notes = vec![NO_ROUNDS_NOTE.to_string()];
        if m < 2 {
            notes.push(SINGLE_CLIENT_NOTE.to_string());
        }
        return Ok(PrivacyReportDoc {
            num_clients: m,
            mu_max: Some(0.0),
            weak_mu: Some(0.0),
            strong_mu: (m >= 2).then_some(0.0),
            notes,
            regime_note: REGIME_NOTE.to_string(),
            clients: params.iter().enumerate().map(|(i, p)| entry(i, p, Some(0.0))).collect(),
        });
    }

    let report = FederatedPrivacyReport::compute(params, curve_grid)?;
    let mut clients: Vec<ClientEntry> = params
        .iter()
        .zip(&report.per_client_mu)
        .enumerate()
        .map(|(i, (p, &mu))| entry(i, p, Some(mu)))
        .collect();

    let mut written: HashMap<String, String> = HashMap::new();
    for (c, curve) in clients.iter_mut().zip(&report.single_round_curves) {
        let text = curve.to_text();
        let next = written.len();
        if !written.contains_key(&text) {
            let rel = format!("curves/single_round_{next}.txt");
            write_file(&out_dir.join(&rel), &text)?;
            written.insert(text.clone(), rel);
        }
        c.curve_file = Some(written[&text].clone());
    }

    let mut notes = Vec::new();
    if report.strong_guarantee.is_none() {
        notes.push(SINGLE_CLIENT_NOTE.to_string());
    }
    Ok(PrivacyReportDoc {
        num_clients: params.len(),
        mu_max: Some(report.mu_max),
        weak_mu: Some(report.weak_guarantee.mu()),
        strong_mu: report.strong_guarantee.map(|g| g.mu()),
        notes,
        regime_note: report.regime_note.to_string(),
        clients,
    })
}
