//! Thermodynamic refining-energy model of chemical element prices.
//!
//! The library computes, for each purified element, the Gibbs energy of
//! concentrating it from its crustal abundance to the traded form
//! (`ΔG = RT ln c_pure/c_env`), an electronegativity-derived standard
//! free-energy change of extraction (`ΔG°`), and the combined refining
//! cost `ΣE = aΔG + bΔG°`. It then correlates `ΣE` against market prices
//! expressed in constant 1992 US dollars per mole, fits the efficiency
//! ratio `a/b` by grid search, and reports per-year correlation series
//! and residual stratification.
//!
//! A reference dataset (65 elements, US market prices 1959-1998, GDP
//! deflator rebased to 1992 = 100) ships in `data/`.

pub mod dataset;
pub mod model;
pub mod plot;
pub mod stats;
pub mod thermo;

pub use dataset::{
    DatasetError, DeflatorTable, ElementRecord, GibbsClass, PriceQuote, PriceUnit, TradingForm,
    ValidatedDataset,
};
pub use model::EnergyValueModel;
pub use stats::{FitResult, GridSpec, RatioFit, YearCorrelation};
pub use thermo::{ElementEnergy, ThermoConditions};
