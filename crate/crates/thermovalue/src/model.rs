//! A fitted energy-value relation packaged as a price model: predicts
//! log prices from `ΣE`, reports residuals, and checks the gold-anchored
//! logarithmic consistency argument.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::ValidatedDataset;
use crate::stats::{self, StatsError, YearSample};
use crate::thermo::ThermoConditions;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("gold (Au) is absent from the dataset or has no price for year {year}")]
    GoldAbsent { year: u16 },
    #[error("fitted slope is zero; the model cannot be inverted")]
    DegenerateFit,
}

/// Fitted parameters mapping `ΣE` to log10 price. b is normalised to 1,
/// so only the ratio a/b and the affine map are carried.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyValueModel {
    pub ratio: f64,
    /// log10 USD/mol per kJ/mol
    pub slope: f64,
    /// log10 USD(1992)/mol
    pub intercept: f64,
    pub conditions: ThermoConditions,
    pub fit_year: u16,
    pub pearson_r: f64,
    pub n: usize,
}

#[derive(Serialize)]
struct ModelFile {
    ratio: f64,
    slope: f64,
    intercept: f64,
    temperature: f64,
    fit_year: u16,
    pearson_r: f64,
    n: usize,
}

/// One element's observed-vs-predicted log price.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub symbol: String,
    pub observed_log10: f64,
    pub predicted_log10: f64,
    pub residual: f64,
    /// Set when the price is more than a decade off the prediction.
    pub flagged: bool,
}

/// Both evaluations of gold's refining cost: directly from
/// concentrations, and implied by inverting the fitted affine map at
/// gold's observed price.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldAnchorReport {
    pub sigma_e_direct: f64,
    pub sigma_e_implied: f64,
    /// kJ/mol
    pub discrepancy: f64,
    /// Full width (max - min) of the fit residuals, expressed in kJ/mol.
    pub residual_spread: f64,
    pub within_spread: bool,
}

/// OLS of log10 price on `ΣE(ratio)` for one year.
pub fn build_model(
    dataset: &ValidatedDataset,
    year: u16,
    cond: &ThermoConditions,
    ratio: f64,
) -> Result<EnergyValueModel, ModelError> {
    let sample = stats::year_sample(dataset, year, cond)?;
    let fit = stats::ols(&sample.sigma_e(ratio), &sample.log_price)?;
    Ok(EnergyValueModel {
        ratio,
        slope: fit.slope,
        intercept: fit.intercept,
        conditions: *cond,
        fit_year: year,
        pearson_r: fit.pearson_r,
        n: fit.n,
    })
}

impl EnergyValueModel {
    /// `slope · (ratio·ΔG + ΔG°) + intercept`
    pub fn predict_log_price(&self, delta_g: f64, delta_g0: f64) -> f64 {
        self.slope * (self.ratio * delta_g + delta_g0) + self.intercept
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            ratio: self.ratio,
            slope: self.slope,
            intercept: self.intercept,
            temperature: self.conditions.temperature,
            fit_year: self.fit_year,
            pearson_r: self.pearson_r,
            n: self.n,
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }
}

fn sample_residuals(model: &EnergyValueModel, sample: &YearSample) -> Vec<ResidualEntry> {
    sample
        .symbols
        .iter()
        .enumerate()
        .map(|(i, symbol)| {
            let predicted = model.predict_log_price(sample.delta_g[i], sample.delta_g0[i]);
            let residual = sample.log_price[i] - predicted;
            ResidualEntry {
                symbol: symbol.clone(),
                observed_log10: sample.log_price[i],
                predicted_log10: predicted,
                residual,
                flagged: residual.abs() > 1.0,
            }
        })
        .collect()
}

/// Residual table for a year, sorted by descending residual (most
/// over-priced first).
pub fn residual_report(
    model: &EnergyValueModel,
    dataset: &ValidatedDataset,
    year: u16,
) -> Result<Vec<ResidualEntry>, ModelError> {
    let sample = stats::year_sample(dataset, year, &model.conditions)?;
    let mut entries = sample_residuals(model, &sample);
    entries.sort_by(|a, b| b.residual.total_cmp(&a.residual).then(a.symbol.cmp(&b.symbol)));
    Ok(entries)
}

/// Evaluates gold's `ΣE` from concentrations and from the
/// price-substituted form, reporting the discrepancy in kJ/mol.
pub fn gold_anchor_consistency(
    model: &EnergyValueModel,
    dataset: &ValidatedDataset,
    year: u16,
) -> Result<GoldAnchorReport, ModelError> {
    if model.slope == 0.0 {
        return Err(ModelError::DegenerateFit);
    }
    let sample = stats::year_sample(dataset, year, &model.conditions)?;
    let idx = sample
        .symbols
        .iter()
        .position(|s| s == "Au")
        .ok_or(ModelError::GoldAbsent { year })?;

    let sigma_e_direct = model.ratio * sample.delta_g[idx] + sample.delta_g0[idx];
    // log price stands in for log concentration up to the fitted affine map
    let sigma_e_implied = (sample.log_price[idx] - model.intercept) / model.slope;
    let discrepancy = (sigma_e_direct - sigma_e_implied).abs();

    let residuals = sample_residuals(model, &sample);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &residuals {
        lo = lo.min(r.residual);
        hi = hi.max(r.residual);
    }
    let residual_spread = (hi - lo) / model.slope.abs();

    Ok(GoldAnchorReport {
        sigma_e_direct,
        sigma_e_implied,
        discrepancy,
        residual_spread,
        within_spread: discrepancy <= residual_spread,
    })
}

/// `symbol,observed_log10,predicted_log10,residual` rows.
pub fn residuals_to_csv(entries: &[ResidualEntry]) -> String {
    let mut out = String::from("symbol,observed_log10,predicted_log10,residual\n");
    for e in entries {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            e.symbol, e.observed_log10, e.predicted_log10, e.residual
        ));
    }
    out
}
