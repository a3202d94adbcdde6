//! Command-line front end: validate data, run computations and fits,
//! emit correlation reports, and render scatter plots as headless SVG.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use thermovalue::dataset::{self, DatasetError, DatasetIoError, ValidatedDataset};
use thermovalue::model::{self, ModelError};
use thermovalue::plot::{self, FitLine, PlotPoint, ScatterPlot};
use thermovalue::stats::{self, GridSpec, StatsError};
use thermovalue::thermo::{self, ThermoConditions, ThermoError};

const ENV_DATASET: &str = "THERMOVALUE_DATASET";

/// Exit codes are stable: 0 success, 1 parse/IO, 2 data integrity,
/// 3 insufficient data, 4 bad arguments.
#[derive(Debug)]
enum AppError {
    ParseIo(String),
    Integrity(String),
    Insufficient(String),
    BadArgs(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            Self::ParseIo(_) => 1,
            Self::Integrity(_) => 2,
            Self::Insufficient(_) => 3,
            Self::BadArgs(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ParseIo(m) | Self::Integrity(m) | Self::Insufficient(m) | Self::BadArgs(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl From<DatasetIoError> for AppError {
    fn from(e: DatasetIoError) -> Self {
        match e {
            DatasetIoError::Io { .. } => Self::ParseIo(e.to_string()),
            DatasetIoError::Data(d) => d.into(),
        }
    }
}

impl From<DatasetError> for AppError {
    fn from(e: DatasetError) -> Self {
        if e.is_integrity() {
            Self::Integrity(e.to_string())
        } else {
            Self::ParseIo(e.to_string())
        }
    }
}

impl From<StatsError> for AppError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Dataset(d) => d.into(),
            StatsError::EmptyGrid | StatsError::BadGrid(_) => Self::BadArgs(e.to_string()),
            _ => Self::Insufficient(e.to_string()),
        }
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Stats(s) => s.into(),
            ModelError::GoldAbsent { .. } | ModelError::DegenerateFit => {
                Self::Insufficient(e.to_string())
            }
        }
    }
}

impl From<ThermoError> for AppError {
    fn from(e: ThermoError) -> Self {
        Self::Integrity(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "thermovalue",
    version,
    about = "Thermodynamic refining-energy model of chemical element prices",
    long_about = "Computes the Gibbs energy of concentrating each element from its crustal\n\
                  abundance (dG), an electronegativity-derived extraction energy (dG0), and\n\
                  the combined refining cost SigmaE = a*dG + b*dG0, then correlates SigmaE\n\
                  against market prices in constant 1992 US dollars per mole.\n\n\
                  Plot axes: x = energy (kJ/mol), y = log10 price (1992 US$/mol).\n\
                  The dataset directory defaults to $THERMOVALUE_DATASET."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Directory holding elements.csv, prices.csv, deflator.csv
    /// (default: $THERMOVALUE_DATASET).
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Temperature in kelvin.
    #[arg(long, value_name = "K", default_value_t = 295.0)]
    temp: f64,
    /// Upper-crust reference density, g/cm3.
    #[arg(long = "crust-density", value_name = "G", default_value_t = 2.7)]
    crust_density: f64,
    /// Element symbols to drop, comma separated.
    #[arg(long, value_name = "SYM,SYM", value_delimiter = ',')]
    exclude: Vec<String>,
    /// Drop elements traded as gases (whose reference abundance may be
    /// atmospheric rather than crustal).
    #[arg(long)]
    crustal_only: bool,
    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_name = "csv|svg|text")]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the three input tables and report integrity problems.
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Write per-element energies (dG, dG0, SigmaE) as CSV.
    Compute {
        #[command(flatten)]
        common: CommonOpts,
        /// Efficiency ratio a/b used for the SigmaE column.
        #[arg(long, default_value = "13")]
        ratio: String,
    },
    /// Fit the energy-value model for one year.
    Fit {
        #[command(flatten)]
        common: CommonOpts,
        /// Calendar year of the fit.
        #[arg(long)]
        year: u16,
        /// Efficiency ratio a/b, or "fit" to grid-search it.
        #[arg(long, default_value = "fit")]
        ratio: String,
    },
    /// Per-year correlation series over a year range.
    Correlate {
        #[command(flatten)]
        common: CommonOpts,
        /// Year range A:B (inclusive).
        #[arg(long, value_name = "A:B")]
        years: String,
        /// Efficiency ratio a/b.
        #[arg(long, default_value = "13")]
        ratio: String,
    },
    /// Scatter plot of the energy-value correlation as SVG (plus a CSV
    /// of the plotted points next to --out).
    Plot {
        #[command(flatten)]
        common: CommonOpts,
        /// Figure variant: 3 = dG axis with class colours, 4 = SigmaE axis.
        #[arg(long)]
        fig: u8,
        /// Calendar year to plot.
        #[arg(long)]
        year: u16,
        /// Efficiency ratio a/b (figure 4).
        #[arg(long, default_value = "13")]
        ratio: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(4);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Validate { common } => cmd_validate(&common),
        Command::Compute { common, ratio } => cmd_compute(&common, &ratio),
        Command::Fit {
            common,
            year,
            ratio,
        } => cmd_fit(&common, year, &ratio),
        Command::Correlate {
            common,
            years,
            ratio,
        } => cmd_correlate(&common, &years, &ratio),
        Command::Plot {
            common,
            fig,
            year,
            ratio,
        } => cmd_plot(&common, fig, year, &ratio),
    }
}

fn dataset_dir(common: &CommonOpts) -> Result<PathBuf, AppError> {
    if let Some(dir) = &common.dataset {
        return Ok(dir.clone());
    }
    if let Ok(dir) = std::env::var(ENV_DATASET) {
        if !dir.is_empty() {
            return Ok(PathBuf::from(dir));
        }
    }
    Err(AppError::BadArgs(format!(
        "no dataset directory: pass --dataset or set {ENV_DATASET}"
    )))
}

fn conditions(common: &CommonOpts) -> Result<ThermoConditions, AppError> {
    ThermoConditions::with_temperature(common.temp)
        .map_err(|e| AppError::BadArgs(e.to_string()))
}

fn load(common: &CommonOpts) -> Result<ValidatedDataset, AppError> {
    if common.crust_density <= 0.0 || !common.crust_density.is_finite() {
        return Err(AppError::BadArgs(format!(
            "crust density must be positive, got {}",
            common.crust_density
        )));
    }
    let dir = dataset_dir(common)?;
    let mut ds = dataset::load_dataset_dir(&dir, common.crust_density)?;
    if common.crustal_only {
        ds = ds.crustal_only()?;
    }
    if !common.exclude.is_empty() {
        ds = ds
            .without_symbols(&common.exclude)
            .map_err(|e| AppError::BadArgs(e.to_string()))?;
    }
    Ok(ds)
}

fn parse_ratio(s: &str) -> Result<f64, AppError> {
    let v: f64 = s
        .parse()
        .map_err(|_| AppError::BadArgs(format!("ratio must be a positive number, got `{s}`")))?;
    if v <= 0.0 || !v.is_finite() {
        return Err(AppError::BadArgs(format!(
            "ratio must be a positive number, got `{s}`"
        )));
    }
    Ok(v)
}

fn parse_years(s: &str) -> Result<(u16, u16), AppError> {
    let err = || AppError::BadArgs(format!("year range must be A:B with A <= B, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    let a: u16 = a.trim().parse().map_err(|_| err())?;
    let b: u16 = b.trim().parse().map_err(|_| err())?;
    if a > b {
        return Err(err());
    }
    Ok((a, b))
}

fn emit(common: &CommonOpts, content: &str) -> Result<(), AppError> {
    match &common.out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), AppError> {
    std::fs::write(path, content)
        .map_err(|e| AppError::ParseIo(format!("cannot write {}: {e}", path.display())))
}

fn cmd_validate(common: &CommonOpts) -> Result<(), AppError> {
    let dir = dataset_dir(common)?;
    let read = |name: &str| -> Result<String, AppError> {
        let path = dir.join(name);
        std::fs::read_to_string(&path)
            .map_err(|e| AppError::ParseIo(format!("cannot read {}: {e}", path.display())))
    };
    let elements_text = read("elements.csv")?;
    let prices_text = read("prices.csv")?;
    let deflator_text = read("deflator.csv")?;

    let elements = dataset::parse_element_table(&elements_text).map_err(print_and_wrap)?;
    let prices = dataset::parse_price_table(&prices_text).map_err(print_and_wrap)?;
    let deflators = dataset::parse_deflator_table(&deflator_text).map_err(print_and_wrap)?;

    let ds = dataset::validate_dataset(elements, prices, deflators, common.crust_density)
        .map_err(print_and_wrap)?;
    let ds = if common.crustal_only {
        ds.crustal_only().map_err(print_and_wrap)?
    } else {
        ds
    };
    println!("{}", ds.summary());
    println!("integrity: OK");
    Ok(())
}

fn print_and_wrap(e: DatasetError) -> AppError {
    // every row error on its own line for readability
    if let DatasetError::Parse(rows) = &e {
        for r in &rows.errors {
            eprintln!("{r}");
        }
    }
    e.into()
}

fn cmd_compute(common: &CommonOpts, ratio: &str) -> Result<(), AppError> {
    let ratio = parse_ratio(ratio)?;
    let ds = load(common)?;
    let cond = conditions(common)?;
    let energies = thermo::compute_energies(&ds, &cond, ratio, 1.0)?;
    emit(common, &thermo::energies_to_csv(&energies))
}

fn cmd_fit(common: &CommonOpts, year: u16, ratio: &str) -> Result<(), AppError> {
    let ds = load(common)?;
    let cond = conditions(common)?;
    let grid = GridSpec::default();

    let (ratio_value, fitted) = if ratio == "fit" {
        let fit = stats::fit_efficiency_ratio(&ds, year, &cond, &grid)?;
        if fit.degenerate {
            println!("note: ratio is unidentifiable (dG0 carries no signal); r is flat across the grid");
        }
        (fit.ratio, true)
    } else {
        (parse_ratio(ratio)?, false)
    };

    let model = model::build_model(&ds, year, &cond, ratio_value)?;
    println!(
        "year {}  ratio {:.6}{}  r {:.6}  slope {:.8}  intercept {:.6}  n {}",
        model.fit_year,
        model.ratio,
        if fitted { " (grid argmax)" } else { "" },
        model.pearson_r,
        model.slope,
        model.intercept,
        model.n
    );

    if let Some(out) = &common.out {
        write_file(out, &(model.to_json() + "\n"))?;
        if fitted && common.format.as_deref() == Some("csv") {
            let sample = stats::year_sample(&ds, year, &cond)?;
            let scan = stats::ratio_scan(&sample, &grid)?;
            let scan_path = out.with_extension("scan.csv");
            write_file(&scan_path, &stats::ratio_scan_to_csv(&scan))?;
        }
    } else if fitted && common.format.as_deref() == Some("csv") {
        let sample = stats::year_sample(&ds, year, &cond)?;
        let scan = stats::ratio_scan(&sample, &grid)?;
        print!("{}", stats::ratio_scan_to_csv(&scan));
    }
    Ok(())
}

fn cmd_correlate(common: &CommonOpts, years: &str, ratio: &str) -> Result<(), AppError> {
    let (a, b) = parse_years(years)?;
    let ratio = parse_ratio(ratio)?;
    let ds = load(common)?;
    let cond = conditions(common)?;
    let series = stats::yearly_correlation_series(&ds, &cond, ratio, a..=b);
    emit(common, &stats::yearly_series_to_csv(&series))
}

fn cmd_plot(common: &CommonOpts, fig: u8, year: u16, ratio: &str) -> Result<(), AppError> {
    if fig != 3 && fig != 4 {
        return Err(AppError::BadArgs(format!("--fig must be 3 or 4, got {fig}")));
    }
    let ratio = parse_ratio(ratio)?;
    let ds = load(common)?;
    let cond = conditions(common)?;
    let sample = stats::year_sample(&ds, year, &cond)?;

    let (xs, x_label, title, color_by_class) = if fig == 3 {
        (
            sample.delta_g.clone(),
            "ΔG (kJ/mol)".to_string(),
            format!("Gibbs energy of concentration vs market value, {year}"),
            true,
        )
    } else {
        (
            sample.sigma_e(ratio),
            format!("ΣE = {ratio}·ΔG + ΔG° (kJ/mol)"),
            format!("Total refining energy vs market value, {year}"),
            false,
        )
    };

    let fit = stats::ols(&xs, &sample.log_price)?;
    let points: Vec<PlotPoint> = sample
        .symbols
        .iter()
        .enumerate()
        .map(|(i, symbol)| PlotPoint {
            symbol: symbol.clone(),
            x: xs[i],
            y: sample.log_price[i],
            class: ds
                .element(symbol)
                .expect("sample symbols come from the dataset")
                .gibbs_class,
        })
        .collect();

    let plot = ScatterPlot {
        title,
        x_label,
        y_label: "log10 price (1992 US$/mol)".to_string(),
        points,
        fit_line: Some(FitLine {
            slope: fit.slope,
            intercept: fit.intercept,
        }),
        annotation: Some(format!("r = {:.6}, n = {}", fit.pearson_r, fit.n)),
        color_by_class,
    };

    let svg = plot.to_svg();
    match &common.out {
        Some(out) => {
            write_file(out, &svg)?;
            write_file(&out.with_extension("csv"), &plot::points_to_csv(&plot.points))?;
        }
        None => print!("{svg}"),
    }
    Ok(())
}
