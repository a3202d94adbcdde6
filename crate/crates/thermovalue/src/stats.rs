//! Correlation and fitting: Pearson r, ordinary least squares on log
//! prices, the one-dimensional efficiency-ratio grid search, per-year
//! correlation series, and residual stratification.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::dataset::{price_per_mole, DatasetError, GibbsClass, ValidatedDataset};
use crate::thermo::{self, ThermoConditions, ThermoError};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("input vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("{which} vector is constant (zero variance)")]
    ConstantVector { which: &'static str },
    #[error("insufficient data for year {year}: {n} priced element(s), need at least 3")]
    InsufficientData { year: u16, n: usize },
    #[error("ratio grid is empty")]
    EmptyGrid,
    #[error("invalid ratio grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Ordinary least-squares fit of `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub n: usize,
}

/// Log-spaced candidate ratios for the a/b search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 0.1,
            max: 1000.0,
            points: 200,
        }
    }
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self, StatsError> {
        if points == 0 {
            return Err(StatsError::EmptyGrid);
        }
        if !(min > 0.0 && min.is_finite() && max >= min && max.is_finite()) {
            return Err(StatsError::BadGrid(format!(
                "need 0 < min <= max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max, points })
    }

    /// The grid, ascending.
    pub fn ratios(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let ln_min = self.min.ln();
        let step = (self.max.ln() - ln_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (ln_min + step * i as f64).exp())
            .collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} log-spaced ratios over [{}, {}]",
            self.points, self.min, self.max
        )
    }
}

/// Result of the efficiency-ratio grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFit {
    /// Grid ratio maximising Pearson r (smallest among exact ties).
    pub ratio: f64,
    pub pearson_r_at_ratio: f64,
    pub grid: GridSpec,
    /// True when every grid point yields the same r (ΔG° carries no
    /// signal and the ratio is unidentifiable).
    pub degenerate: bool,
}

/// One year of the correlation series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearCorrelation {
    pub year: u16,
    pub pearson_r: f64,
    pub n: usize,
}

/// Output of `yearly_correlation_series`: qualifying years plus the
/// years omitted for lack of data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct YearlySeries {
    pub entries: Vec<YearCorrelation>,
    pub omitted: Vec<u16>,
}

/// Per-class residual statistics for the stratification check.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassResidualStats {
    pub class: GibbsClass,
    pub n: usize,
    pub mean_residual: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratificationReport {
    /// Present classes in High, Mid, Low order.
    pub classes: Vec<ClassResidualStats>,
    /// Classes with zero members.
    pub absent: Vec<GibbsClass>,
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewSamples(xs.len()));
    }
    Ok(())
}

fn moments(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    (mx, my, cov, vx, vy)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys)?;
    let (_, _, cov, vx, vy) = moments(xs, ys);
    if vx == 0.0 {
        return Err(StatsError::ConstantVector { which: "x" });
    }
    if vy == 0.0 {
        return Err(StatsError::ConstantVector { which: "y" });
    }
    // Exactly collinear data lands on ±1 without rounding through sqrt.
    if cov * cov == vx * vy {
        return Ok(1.0_f64.copysign(cov));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Closed-form least squares with the correlation of the fit.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<FitResult, StatsError> {
    check_pair(xs, ys)?;
    let (mx, my, cov, vx, vy) = moments(xs, ys);
    if vx == 0.0 {
        return Err(StatsError::ConstantVector { which: "x" });
    }
    if vy == 0.0 {
        return Err(StatsError::ConstantVector { which: "y" });
    }
    let slope = cov / vx;
    let intercept = my - slope * mx;
    let pearson_r = if cov * cov == vx * vy {
        1.0_f64.copysign(cov)
    } else {
        (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        pearson_r,
        n: xs.len(),
    })
}

/// Elements of one year paired with their energies and log prices,
/// ordered by symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSample {
    pub year: u16,
    pub symbols: Vec<String>,
    pub delta_g: Vec<f64>,
    pub delta_g0: Vec<f64>,
    pub log_price: Vec<f64>,
    /// Elements without a quote that year, by symbol.
    pub excluded: Vec<String>,
}

impl YearSample {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    /// `ΣE` vector at ratio `a/b` with b normalised to 1.
    pub fn sigma_e(&self, ratio: f64) -> Vec<f64> {
        self.delta_g
            .iter()
            .zip(&self.delta_g0)
            .map(|(&g, &g0)| ratio * g + g0)
            .collect()
    }
}

/// Gathers the per-element `(ΔG, ΔG°, log10 price)` sample for a year.
/// Elements without a quote are excluded and listed.
pub fn year_sample(
    dataset: &ValidatedDataset,
    year: u16,
    cond: &ThermoConditions,
) -> Result<YearSample, StatsError> {
    let mut symbols = Vec::new();
    let mut delta_g = Vec::new();
    let mut delta_g0 = Vec::new();
    let mut log_price = Vec::new();
    let mut excluded = Vec::new();
    for record in dataset.elements() {
        let Some(quote) = dataset.quote(&record.symbol, year) else {
            excluded.push(record.symbol.clone());
            continue;
        };
        let c_pure = thermo::pure_molar_concentration(record, cond);
        let c_env = thermo::env_molar_concentration(record, dataset.crust_density());
        delta_g.push(thermo::concentration_gibbs(c_pure, c_env, cond)?);
        delta_g0.push(thermo::standard_gibbs(record));
        log_price.push(price_per_mole(quote, record, dataset.deflators())?.log10());
        symbols.push(record.symbol.clone());
    }
    if symbols.len() < 3 {
        return Err(StatsError::InsufficientData {
            year,
            n: symbols.len(),
        });
    }
    Ok(YearSample {
        year,
        symbols,
        delta_g,
        delta_g0,
        log_price,
        excluded,
    })
}

/// Paired symbol / log10-price vectors for one year, in deterministic
/// symbol order, with the unpriced elements listed.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPriceVector {
    pub symbols: Vec<String>,
    pub log_prices: Vec<f64>,
    pub excluded: Vec<String>,
}

pub fn log_price_vector(
    dataset: &ValidatedDataset,
    year: u16,
) -> Result<LogPriceVector, StatsError> {
    let sample = year_sample(dataset, year, &ThermoConditions::default())?;
    Ok(LogPriceVector {
        symbols: sample.symbols,
        log_prices: sample.log_price,
        excluded: sample.excluded,
    })
}

/// Pearson r of `ΣE(ratio)` against log price at every grid ratio.
pub fn ratio_scan(
    sample: &YearSample,
    grid: &GridSpec,
) -> Result<Vec<(f64, f64)>, StatsError> {
    let ratios = grid.ratios();
    if ratios.is_empty() {
        return Err(StatsError::EmptyGrid);
    }
    ratios
        .into_iter()
        .map(|ratio| Ok((ratio, pearson(&sample.sigma_e(ratio), &sample.log_price)?)))
        .collect()
}

/// Grid search for the efficiency ratio a/b maximising the energy-value
/// correlation. Only the ratio is identifiable, so b is normalised to 1.
/// Ties resolve to the smallest ratio.
pub fn fit_efficiency_ratio(
    dataset: &ValidatedDataset,
    year: u16,
    cond: &ThermoConditions,
    grid: &GridSpec,
) -> Result<RatioFit, StatsError> {
    let sample = year_sample(dataset, year, cond)?;
    let scan = ratio_scan(&sample, grid)?;
    // A flat dG0 vector only shifts SigmaE, so r is the same at every
    // ratio and the argmax is meaningless.
    let degenerate = sample
        .delta_g0
        .iter()
        .all(|&g0| g0 == sample.delta_g0[0]);
    if degenerate {
        return Ok(RatioFit {
            ratio: scan[0].0,
            pearson_r_at_ratio: scan[0].1,
            grid: *grid,
            degenerate,
        });
    }
    let (mut best_ratio, mut best_r) = scan[0];
    for &(ratio, r) in &scan[1..] {
        if r > best_r {
            best_ratio = ratio;
            best_r = r;
        }
    }
    Ok(RatioFit {
        ratio: best_ratio,
        pearson_r_at_ratio: best_r,
        grid: *grid,
        degenerate,
    })
}

/// Per-year Pearson r of `ΣE(ratio)` vs log price. Years with fewer than
/// 3 priced elements (or a degenerate sample) are omitted and listed.
pub fn yearly_correlation_series(
    dataset: &ValidatedDataset,
    cond: &ThermoConditions,
    ratio: f64,
    years: RangeInclusive<u16>,
) -> YearlySeries {
    let mut series = YearlySeries::default();
    for year in years {
        match year_sample(dataset, year, cond)
            .and_then(|s| pearson(&s.sigma_e(ratio), &s.log_price).map(|r| (r, s.n())))
        {
            Ok((pearson_r, n)) => series.entries.push(YearCorrelation {
                year,
                pearson_r,
                n,
            }),
            Err(_) => series.omitted.push(year),
        }
    }
    series
}

/// Groups residuals of a ΔG-vs-log-price fit by Gibbs class.
pub fn stratify_residuals(
    dataset: &ValidatedDataset,
    year: u16,
    cond: &ThermoConditions,
    fit: &FitResult,
) -> Result<StratificationReport, StatsError> {
    let sample = year_sample(dataset, year, cond)?;
    let mut groups: BTreeMap<GibbsClass, Vec<f64>> = BTreeMap::new();
    for (i, symbol) in sample.symbols.iter().enumerate() {
        let class = dataset
            .element(symbol)
            .expect("sample symbols come from the dataset")
            .gibbs_class;
        let predicted = fit.slope * sample.delta_g[i] + fit.intercept;
        groups
            .entry(class)
            .or_default()
            .push(sample.log_price[i] - predicted);
    }
    let mut classes = Vec::new();
    let mut absent = Vec::new();
    for class in GibbsClass::ALL {
        match groups.get(&class) {
            Some(residuals) => {
                let n = residuals.len();
                let mean = residuals.iter().sum::<f64>() / n as f64;
                let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n as f64;
                classes.push(ClassResidualStats {
                    class,
                    n,
                    mean_residual: mean,
                    stddev: var.sqrt(),
                });
            }
            None => absent.push(class),
        }
    }
    Ok(StratificationReport { classes, absent })
}

/// `year,n,pearson_r` rows; omitted years go on a leading comment line.
pub fn yearly_series_to_csv(series: &YearlySeries) -> String {
    let mut out = String::new();
    if !series.omitted.is_empty() {
        let years: Vec<String> = series.omitted.iter().map(u16::to_string).collect();
        out.push_str(&format!("# omitted years: {}\n", years.join(" ")));
    }
    out.push_str("year,n,pearson_r\n");
    for e in &series.entries {
        out.push_str(&format!("{},{},{:.6}\n", e.year, e.n, e.pearson_r));
    }
    out
}

/// `ratio,pearson_r` rows of a grid scan.
pub fn ratio_scan_to_csv(scan: &[(f64, f64)]) -> String {
    let mut out = String::from("ratio,pearson_r\n");
    for &(ratio, r) in scan {
        out.push_str(&format!("{ratio:.6},{r:.6}\n"));
    }
    out
}
