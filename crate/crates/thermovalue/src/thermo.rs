//! Concentration Gibbs energy, standard free-energy change, and the
//! combined refining cost `ΣE = aΔG + bΔG°`.
//!
//! All operations are pure; energies are accumulated in J/mol internally
//! and reported in kJ/mol.

use thiserror::Error;

use crate::dataset::{ElementRecord, TradingForm, ValidatedDataset};

/// Gas constant, J/(mol·K).
pub const GAS_CONSTANT_J_MOL_K: f64 = 8.314;
/// Gas constant in volume units, L·atm/(mol·K).
pub const GAS_CONSTANT_L_ATM_MOL_K: f64 = 0.082057;
/// Faraday conversion, kJ/mol per eV of potential.
pub const FARADAY_KJ_MOL_EV: f64 = 96.485;

/// Room conditions under which the traded form is characterised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoConditions {
    /// K
    pub temperature: f64,
    /// atm
    pub pressure: f64,
}

impl Default for ThermoConditions {
    fn default() -> Self {
        Self {
            temperature: 295.0,
            pressure: 1.0,
        }
    }
}

impl ThermoConditions {
    pub fn new(temperature: f64, pressure: f64) -> Result<Self, ThermoError> {
        if temperature <= 0.0 || !temperature.is_finite() {
            return Err(ThermoError::NonPositiveTemperature(temperature));
        }
        if pressure <= 0.0 || !pressure.is_finite() {
            return Err(ThermoError::NonPositivePressure(pressure));
        }
        Ok(Self {
            temperature,
            pressure,
        })
    }

    pub fn with_temperature(temperature: f64) -> Result<Self, ThermoError> {
        Self::new(temperature, 1.0)
    }
}

/// Per-element energy quantities, kJ/mol.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementEnergy {
    pub symbol: String,
    /// mol/L of the traded pure form
    pub c_pure: f64,
    /// mol/L in the upper continental crust
    pub c_env: f64,
    /// ΔG, kJ/mol
    pub delta_g: f64,
    /// ΔG°, kJ/mol
    pub delta_g0: f64,
    /// ΣE = aΔG + bΔG°, kJ/mol
    pub sigma_e: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("concentration must be positive")]
    NonPositiveConcentration,
    #[error("coefficient a must be positive, got {0}")]
    NonPositiveA(f64),
    #[error("coefficient b must be non-negative, got {0}")]
    NegativeB(f64),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("pressure must be positive, got {0}")]
    NonPositivePressure(f64),
    #[error("element {symbol}: {source}")]
    Element {
        symbol: String,
        #[source]
        source: Box<ThermoError>,
    },
}

/// Mole concentration of the traded pure form.
///
/// Condensed forms use their density; gases use the ideal-gas molar
/// concentration at the stated conditions.
pub fn pure_molar_concentration(record: &ElementRecord, cond: &ThermoConditions) -> f64 {
    match record.trading_form {
        TradingForm::Solid | TradingForm::Liquid => record.density * 1000.0 / record.molar_mass,
        TradingForm::Gas => cond.pressure / (GAS_CONSTANT_L_ATM_MOL_K * cond.temperature),
    }
}

/// Mole concentration in the natural environment: mass fraction of the
/// upper crust expressed per litre of crust.
pub fn env_molar_concentration(record: &ElementRecord, crust_density: f64) -> f64 {
    record.abundance_env * crust_density / record.molar_mass * 1e-3
}

/// `ΔG = RT ln(c_pure / c_env)`, kJ/mol.
pub fn concentration_gibbs(
    c_pure: f64,
    c_env: f64,
    cond: &ThermoConditions,
) -> Result<f64, ThermoError> {
    if c_pure <= 0.0 || c_env <= 0.0 {
        return Err(ThermoError::NonPositiveConcentration);
    }
    let joules = GAS_CONSTANT_J_MOL_K * cond.temperature * (c_pure / c_env).ln();
    Ok(joules / 1000.0)
}

/// `ΔG° = χ · z · F`, kJ/mol: the energy to supply one mole of z electrons
/// at the element's extraction potential.
pub fn standard_gibbs(record: &ElementRecord) -> f64 {
    record.abs_electronegativity * f64::from(record.oxidation_state) * FARADAY_KJ_MOL_EV
}

/// `ΣE = a·ΔG + b·ΔG°`, kJ/mol.
pub fn total_energy_cost(delta_g: f64, delta_g0: f64, a: f64, b: f64) -> Result<f64, ThermoError> {
    if a <= 0.0 || !a.is_finite() {
        return Err(ThermoError::NonPositiveA(a));
    }
    if b < 0.0 || !b.is_finite() {
        return Err(ThermoError::NegativeB(b));
    }
    Ok(a * delta_g + b * delta_g0)
}

/// Composes the four operations above for every element, in symbol order.
pub fn compute_energies(
    dataset: &ValidatedDataset,
    cond: &ThermoConditions,
    a: f64,
    b: f64,
) -> Result<Vec<ElementEnergy>, ThermoError> {
    dataset
        .elements()
        .iter()
        .map(|record| {
            element_energy(record, cond, dataset.crust_density(), a, b).map_err(|source| {
                ThermoError::Element {
                    symbol: record.symbol.clone(),
                    source: Box::new(source),
                }
            })
        })
        .collect()
}

/// Energies of a single element.
pub fn element_energy(
    record: &ElementRecord,
    cond: &ThermoConditions,
    crust_density: f64,
    a: f64,
    b: f64,
) -> Result<ElementEnergy, ThermoError> {
    let c_pure = pure_molar_concentration(record, cond);
    let c_env = env_molar_concentration(record, crust_density);
    let delta_g = concentration_gibbs(c_pure, c_env, cond)?;
    let delta_g0 = standard_gibbs(record);
    let sigma_e = total_energy_cost(delta_g, delta_g0, a, b)?;
    Ok(ElementEnergy {
        symbol: record.symbol.clone(),
        c_pure,
        c_env,
        delta_g,
        delta_g0,
        sigma_e,
    })
}

pub fn energies_to_csv(energies: &[ElementEnergy]) -> String {
    let mut out =
        String::from("symbol,c_pure_mol_L,c_env_mol_L,delta_g_kJ_mol,delta_g0_kJ_mol,sigma_e_kJ_mol\n");
    for e in energies {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.symbol, e.c_pure, e.c_env, e.delta_g, e.delta_g0, e.sigma_e
        ));
    }
    out
}
