//! Input tables: parsing, validation, and constant-dollar conversion.
//!
//! Three CSV tables feed the pipeline: element constants, annual price
//! quotes, and the deflator index used to express prices in constant
//! 1992 dollars. Parsing never silently drops a row; every malformed row
//! is reported with its line number and column. A [`ValidatedDataset`] is
//! immutable after construction.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Upper-crust reference density, g/cm³.
pub const DEFAULT_CRUST_DENSITY: f64 = 2.7;

/// All prices are expressed in dollars of this year.
pub const BASE_YEAR: u16 = 1992;

const ELEMENTS_HEADER: [&str; 9] = [
    "symbol",
    "name",
    "molar_mass_g_mol",
    "density_g_cm3",
    "trading_form",
    "abundance_mg_kg",
    "abs_electronegativity_eV",
    "oxidation_state",
    "gibbs_class",
];
const PRICES_HEADER: [&str; 5] = ["symbol", "year", "nominal_price_usd", "unit", "purity_note"];
const DEFLATOR_HEADER: [&str; 2] = ["year", "index_1992_base"];

/// Physical state of the traded pure form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradingForm {
    Solid,
    Liquid,
    Gas,
}

impl TradingForm {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "solid" => Some(Self::Solid),
            "liquid" => Some(Self::Liquid),
            "gas" => Some(Self::Gas),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Solid => "solid",
            Self::Liquid => "liquid",
            Self::Gas => "gas",
        }
    }
}

/// Banding of the standard free-energy change, used to colour scatter plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GibbsClass {
    High,
    Mid,
    Low,
}

impl GibbsClass {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "high" => Some(Self::High),
            "mid" => Some(Self::Mid),
            "low" => Some(Self::Low),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::High => "high",
            Self::Mid => "mid",
            Self::Low => "low",
        }
    }

    pub const ALL: [GibbsClass; 3] = [Self::High, Self::Mid, Self::Low];
}

/// Quoted mass unit of a nominal price.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceUnit {
    UsdPerKg,
    UsdPerLb,
    UsdPerG,
    UsdPerTroyOz,
}

impl PriceUnit {
    /// Grams in one quoted unit (exact conversion constants).
    pub fn grams(self) -> f64 {
        match self {
            Self::UsdPerKg => 1000.0,
            Self::UsdPerLb => 453.59237,
            Self::UsdPerG => 1.0,
            Self::UsdPerTroyOz => 31.103_476_8,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "USD_per_kg" => Some(Self::UsdPerKg),
            "USD_per_lb" => Some(Self::UsdPerLb),
            "USD_per_g" => Some(Self::UsdPerG),
            "USD_per_troy_oz" => Some(Self::UsdPerTroyOz),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::UsdPerKg => "USD_per_kg",
            Self::UsdPerLb => "USD_per_lb",
            Self::UsdPerG => "USD_per_g",
            Self::UsdPerTroyOz => "USD_per_troy_oz",
        }
    }

    pub const ALL: [PriceUnit; 4] = [Self::UsdPerKg, Self::UsdPerLb, Self::UsdPerG, Self::UsdPerTroyOz];
}

/// One element's physical and geochemical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementRecord {
    pub symbol: String,
    pub name: String,
    /// g/mol
    pub molar_mass: f64,
    /// g/cm³ of the traded pure form
    pub density: f64,
    pub trading_form: TradingForm,
    /// Mass fraction in the upper continental crust, mg/kg.
    pub abundance_env: f64,
    /// Adapted extraction electronegativity, eV per unit charge.
    pub abs_electronegativity: f64,
    /// Common cation charge.
    pub oxidation_state: u8,
    pub gibbs_class: GibbsClass,
}

/// One nominal annual price quote.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceQuote {
    pub symbol: String,
    pub year: u16,
    /// USD of `year`, per `unit`.
    pub nominal_price: f64,
    pub unit: PriceUnit,
    pub purity_note: Option<String>,
}

/// Year → price index, base year 1992 = 100.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeflatorTable {
    entries: BTreeMap<u16, f64>,
}

impl DeflatorTable {
    /// Builds a table, enforcing positive indices and the 1992 = 100 anchor.
    pub fn from_entries(entries: impl IntoIterator<Item = (u16, f64)>) -> Result<Self, DatasetError> {
        let mut map = BTreeMap::new();
        for (year, index) in entries {
            if index <= 0.0 || !index.is_finite() {
                return Err(DatasetError::NonPositiveIndex { year });
            }
            if map.insert(year, index).is_some() {
                return Err(DatasetError::DuplicateYear { year });
            }
        }
        let table = Self { entries: map };
        table.check_base()?;
        Ok(table)
    }

    fn check_base(&self) -> Result<(), DatasetError> {
        match self.entries.get(&BASE_YEAR) {
            None => Err(DatasetError::MissingBaseYear),
            Some(&idx) if idx != 100.0 => Err(DatasetError::BadBaseIndex(idx)),
            Some(_) => Ok(()),
        }
    }

    pub fn index(&self, year: u16) -> Option<f64> {
        self.entries.get(&year).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = u16> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u16, f64)> + '_ {
        self.entries.iter().map(|(&y, &i)| (y, i))
    }
}

/// The three tables after referential-integrity checks, with elements
/// sorted by symbol and quotes sorted by (symbol, year).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedDataset {
    elements: Vec<ElementRecord>,
    prices: Vec<PriceQuote>,
    deflators: DeflatorTable,
    crust_density: f64,
    by_symbol: HashMap<String, usize>,
}

/// Counts reported by `validate_dataset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub n_elements: usize,
    pub n_quotes: usize,
    pub n_deflator_years: usize,
    pub quote_years: Option<(u16, u16)>,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} elements", self.n_elements)?;
        match self.quote_years {
            Some((a, b)) => writeln!(f, "{} price quotes spanning {}-{}", self.n_quotes, a, b)?,
            None => writeln!(f, "0 price quotes")?,
        }
        write!(f, "{} deflator years", self.n_deflator_years)
    }
}

impl ValidatedDataset {
    pub fn elements(&self) -> &[ElementRecord] {
        &self.elements
    }

    pub fn element(&self, symbol: &str) -> Option<&ElementRecord> {
        self.by_symbol.get(symbol).map(|&i| &self.elements[i])
    }

    pub fn prices(&self) -> &[PriceQuote] {
        &self.prices
    }

    pub fn quote(&self, symbol: &str, year: u16) -> Option<&PriceQuote> {
        self.prices
            .binary_search_by(|q| (q.symbol.as_str(), q.year).cmp(&(symbol, year)))
            .ok()
            .map(|i| &self.prices[i])
    }

    pub fn quotes_for_year(&self, year: u16) -> impl Iterator<Item = &PriceQuote> {
        self.prices.iter().filter(move |q| q.year == year)
    }

    pub fn deflators(&self) -> &DeflatorTable {
        &self.deflators
    }

    pub fn crust_density(&self) -> f64 {
        self.crust_density
    }

    pub fn summary(&self) -> DatasetSummary {
        let quote_years = if self.prices.is_empty() {
            None
        } else {
            let mut lo = u16::MAX;
            let mut hi = u16::MIN;
            for q in &self.prices {
                lo = lo.min(q.year);
                hi = hi.max(q.year);
            }
            Some((lo, hi))
        };
        DatasetSummary {
            n_elements: self.elements.len(),
            n_quotes: self.prices.len(),
            n_deflator_years: self.deflators.len(),
            quote_years,
        }
    }

    /// Dataset with the given symbols removed (prices included).
    pub fn without_symbols<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Self, DatasetError> {
        let mut unknown = Vec::new();
        let mut drop = HashSet::new();
        for s in symbols {
            let s = s.as_ref();
            if self.by_symbol.contains_key(s) {
                drop.insert(s.to_string());
            } else {
                unknown.push(s.to_string());
            }
        }
        if !unknown.is_empty() {
            unknown.sort();
            return Err(DatasetError::UnknownSymbols { symbols: unknown });
        }
        let elements = self
            .elements
            .iter()
            .filter(|e| !drop.contains(&e.symbol))
            .cloned()
            .collect();
        let prices = self
            .prices
            .iter()
            .filter(|q| !drop.contains(&q.symbol))
            .cloned()
            .collect();
        validate_dataset(elements, prices, self.deflators.clone(), self.crust_density)
    }

    /// Dataset restricted to elements whose traded form is condensed
    /// (drops gases, whose abundance may be atmospheric rather than crustal).
    pub fn crustal_only(&self) -> Result<Self, DatasetError> {
        let gases: Vec<String> = self
            .elements
            .iter()
            .filter(|e| e.trading_form == TradingForm::Gas)
            .map(|e| e.symbol.clone())
            .collect();
        self.without_symbols(&gases)
    }

    pub fn elements_csv(&self) -> String {
        elements_to_csv(&self.elements)
    }

    pub fn prices_csv(&self) -> String {
        prices_to_csv(&self.prices)
    }

    pub fn deflator_csv(&self) -> String {
        deflator_to_csv(&self.deflators)
    }
}

/// One malformed row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub column: &'static str,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column `{}`: {}", self.line, self.column, self.message)
    }
}

/// Accounting for a parse pass: every input row is either a record or an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowErrors {
    pub rows_seen: usize,
    pub rows_ok: usize,
    pub errors: Vec<RowError>,
}

impl fmt::Display for RowErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} rows rejected: ",
            self.errors.len(),
            self.rows_seen
        )?;
        let mut first = true;
        for e in &self.errors {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("{0}")]
    Parse(RowErrors),
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },
    #[error("deflator table is missing base year {BASE_YEAR}")]
    MissingBaseYear,
    #[error("base year {BASE_YEAR} index must be exactly 100, got {0}")]
    BadBaseIndex(f64),
    #[error("non-positive index for year {year}")]
    NonPositiveIndex { year: u16 },
    #[error("duplicate deflator year {year}")]
    DuplicateYear { year: u16 },
    #[error("duplicate symbol `{symbol}`")]
    DuplicateSymbol { symbol: String },
    #[error("duplicate quote for ({symbol}, {year})")]
    DuplicateQuote { symbol: String, year: u16 },
    #[error("year {0} absent from deflator table")]
    YearNotInTable(u16),
    #[error("price quotes reference unknown element symbols: {}", symbols.join(", "))]
    OrphanPriceSymbols { symbols: Vec<String> },
    #[error("price quotes reference years missing from the deflator table: {}",
            years.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(", "))]
    MissingPriceYears { years: Vec<u16> },
    #[error("element table is empty")]
    EmptyElementTable,
    #[error("crust density must be positive, got {0}")]
    NonPositiveCrustDensity(f64),
    #[error("quote symbol `{quote}` does not match element record `{record}`")]
    SymbolMismatch { quote: String, record: String },
    #[error("unknown element symbols: {}", symbols.join(", "))]
    UnknownSymbols { symbols: Vec<String> },
}

impl DatasetError {
    /// Integrity violations are distinguished from parse failures for
    /// exit-code mapping (2 vs 1).
    pub fn is_integrity(&self) -> bool {
        matches!(
            self,
            Self::OrphanPriceSymbols { .. }
                | Self::MissingPriceYears { .. }
                | Self::EmptyElementTable
                | Self::DuplicateSymbol { .. }
                | Self::DuplicateQuote { .. }
                | Self::NonPositiveCrustDensity(_)
                | Self::UnknownSymbols { .. }
        )
    }
}

/// IO wrapper used when loading a dataset directory.
#[derive(Debug, Error)]
pub enum DatasetIoError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] DatasetError),
}

struct TableReader<'a> {
    rx: csv::StringRecordsIntoIter<&'a [u8]>,
    rows_seen: usize,
    rows_ok: usize,
    errors: Vec<RowError>,
}

impl<'a> TableReader<'a> {
    fn new(text: &'a str, expected_header: &[&str]) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(text.as_bytes());
        let found: Vec<String> = rdr
            .headers()
            .map_err(|e| DatasetError::HeaderMismatch {
                expected: expected_header.join(","),
                found: format!("<unreadable: {e}>"),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        if found != expected_header {
            return Err(DatasetError::HeaderMismatch {
                expected: expected_header.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            rx: rdr.into_records(),
            rows_seen: 0,
            rows_ok: 0,
            errors: Vec::new(),
        })
    }

    fn next_row(&mut self) -> Option<(csv::StringRecord, u64)> {
        loop {
            match self.rx.next()? {
                Ok(rec) => {
                    self.rows_seen += 1;
                    let line = rec.position().map_or(0, csv::Position::line);
                    return Some((rec, line));
                }
                Err(e) => {
                    self.rows_seen += 1;
                    let line = e.position().map_or(0, csv::Position::line);
                    self.errors.push(RowError {
                        line,
                        column: "row",
                        message: format!("malformed row: {e}"),
                    });
                }
            }
        }
    }

    fn reject(&mut self, line: u64, column: &'static str, message: String) {
        self.errors.push(RowError { line, column, message });
    }

    fn finish(self) -> Result<(), DatasetError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(DatasetError::Parse(RowErrors {
                rows_seen: self.rows_seen,
                rows_ok: self.rows_ok,
                errors: self.errors,
            }))
        }
    }
}

fn parse_positive(field: &str) -> Result<f64, String> {
    let v: f64 = field
        .parse()
        .map_err(|_| format!("not a number: `{field}`"))?;
    if !v.is_finite() {
        return Err(format!("not finite: `{field}`"));
    }
    if v <= 0.0 {
        return Err("non-positive numeric field".to_string());
    }
    Ok(v)
}

fn parse_non_negative(field: &str) -> Result<f64, String> {
    let v: f64 = field
        .parse()
        .map_err(|_| format!("not a number: `{field}`"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("negative or non-finite field: `{field}`"));
    }
    Ok(v)
}

fn valid_symbol(s: &str) -> bool {
    (1..=2).contains(&s.len()) && s.chars().all(|c| c.is_ascii_alphabetic())
}

/// Parses the element table. Rejects duplicates and invariant violations,
/// reporting every offending row.
pub fn parse_element_table(text: &str) -> Result<Vec<ElementRecord>, DatasetError> {
    let mut t = TableReader::new(text, &ELEMENTS_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();

    while let Some((rec, line)) = t.next_row() {
        let get = |i: usize| rec.get(i).unwrap_or("");
        let mut ok = true;
        let fail = |t: &mut TableReader, col, msg| {
            t.reject(line, col, msg);
        };

        let symbol = get(0).to_string();
        if !valid_symbol(&symbol) {
            fail(&mut t, "symbol", format!("invalid element symbol `{symbol}`"));
            ok = false;
        } else if !seen.insert(symbol.clone()) {
            fail(&mut t, "symbol", format!("duplicate symbol `{symbol}`"));
            ok = false;
        }
        let name = get(1).to_string();
        if name.is_empty() {
            fail(&mut t, "name", "empty name".to_string());
            ok = false;
        }
        let molar_mass = parse_positive(get(2)).unwrap_or_else(|m| {
            fail(&mut t, "molar_mass_g_mol", m);
            ok = false;
            f64::NAN
        });
        let density = parse_positive(get(3)).unwrap_or_else(|m| {
            fail(&mut t, "density_g_cm3", m);
            ok = false;
            f64::NAN
        });
        let trading_form = TradingForm::parse(get(4)).unwrap_or_else(|| {
            fail(&mut t, "trading_form", format!("unknown trading form `{}`", get(4)));
            ok = false;
            TradingForm::Solid
        });
        let abundance_env = parse_positive(get(5)).unwrap_or_else(|m| {
            fail(&mut t, "abundance_mg_kg", m);
            ok = false;
            f64::NAN
        });
        let abs_electronegativity = parse_non_negative(get(6)).unwrap_or_else(|m| {
            fail(&mut t, "abs_electronegativity_eV", m);
            ok = false;
            f64::NAN
        });
        let oxidation_state: u8 = match get(7).parse::<u8>() {
            Ok(z) if z >= 1 => z,
            _ => {
                fail(
                    &mut t,
                    "oxidation_state",
                    format!("must be a positive integer, got `{}`", get(7)),
                );
                ok = false;
                1
            }
        };
        let gibbs_class = GibbsClass::parse(get(8)).unwrap_or_else(|| {
            fail(&mut t, "gibbs_class", format!("unknown class `{}`", get(8)));
            ok = false;
            GibbsClass::Mid
        });

        if ok {
            t.rows_ok += 1;
            out.push(ElementRecord {
                symbol,
                name,
                molar_mass,
                density,
                trading_form,
                abundance_env,
                abs_electronegativity,
                oxidation_state,
                gibbs_class,
            });
        }
    }
    t.finish()?;
    Ok(out)
}

/// Parses the price table. One quote per (symbol, year).
pub fn parse_price_table(text: &str) -> Result<Vec<PriceQuote>, DatasetError> {
    let mut t = TableReader::new(text, &PRICES_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();

    while let Some((rec, line)) = t.next_row() {
        let get = |i: usize| rec.get(i).unwrap_or("");
        let mut ok = true;
        let fail = |t: &mut TableReader, col, msg| {
            t.reject(line, col, msg);
        };

        let symbol = get(0).to_string();
        if !valid_symbol(&symbol) {
            fail(&mut t, "symbol", format!("invalid element symbol `{symbol}`"));
            ok = false;
        }
        let year: u16 = match get(1).parse::<u16>() {
            Ok(y) if (1900..=2100).contains(&y) => y,
            _ => {
                fail(&mut t, "year", format!("year out of range 1900-2100: `{}`", get(1)));
                ok = false;
                0
            }
        };
        if ok && !seen.insert((symbol.clone(), year)) {
            fail(
                &mut t,
                "year",
                format!("duplicate quote for ({symbol}, {year})"),
            );
            ok = false;
        }
        let nominal_price = parse_positive(get(2)).unwrap_or_else(|m| {
            fail(&mut t, "nominal_price_usd", m);
            ok = false;
            f64::NAN
        });
        let unit = PriceUnit::parse(get(3)).unwrap_or_else(|| {
            fail(&mut t, "unit", format!("unknown unit `{}`", get(3)));
            ok = false;
            PriceUnit::UsdPerKg
        });
        let purity_note = match get(4) {
            "" => None,
            s => Some(s.to_string()),
        };

        if ok {
            t.rows_ok += 1;
            out.push(PriceQuote {
                symbol,
                year,
                nominal_price,
                unit,
                purity_note,
            });
        }
    }
    t.finish()?;
    Ok(out)
}

/// Parses the deflator table and checks the 1992 = 100 anchor.
pub fn parse_deflator_table(text: &str) -> Result<DeflatorTable, DatasetError> {
    let mut t = TableReader::new(text, &DEFLATOR_HEADER)?;
    let mut entries = BTreeMap::new();

    while let Some((rec, line)) = t.next_row() {
        let get = |i: usize| rec.get(i).unwrap_or("");
        let mut ok = true;
        let year: u16 = match get(0).parse::<u16>() {
            Ok(y) => y,
            _ => {
                t.reject(line, "year", format!("not a year: `{}`", get(0)));
                ok = false;
                0
            }
        };
        let index = parse_positive(get(1)).unwrap_or_else(|m| {
            t.reject(line, "index_1992_base", m);
            ok = false;
            f64::NAN
        });
        if ok {
            if entries.insert(year, index).is_some() {
                t.reject(line, "year", format!("duplicate deflator year {year}"));
            } else {
                t.rows_ok += 1;
            }
        }
    }
    t.finish()?;
    let table = DeflatorTable { entries };
    table.check_base()?;
    Ok(table)
}

/// Converts a nominal price to constant 1992 dollars:
/// `nominal × index(1992) / index(year)`.
pub fn to_real_price(nominal: f64, year: u16, table: &DeflatorTable) -> Result<f64, DatasetError> {
    let idx = table.index(year).ok_or(DatasetError::YearNotInTable(year))?;
    let base = table
        .index(BASE_YEAR)
        .ok_or(DatasetError::MissingBaseYear)?;
    Ok(nominal * base / idx)
}

/// Constant-1992-dollar price of one mole of the element.
///
/// The quoted unit mass is converted to grams (kg = 1000 g,
/// lb = 453.59237 g, troy oz = 31.1034768 g) before scaling by molar mass.
pub fn price_per_mole(
    quote: &PriceQuote,
    record: &ElementRecord,
    table: &DeflatorTable,
) -> Result<f64, DatasetError> {
    if quote.symbol != record.symbol {
        return Err(DatasetError::SymbolMismatch {
            quote: quote.symbol.clone(),
            record: record.symbol.clone(),
        });
    }
    let per_gram = quote.nominal_price / quote.unit.grams();
    let real_per_gram = to_real_price(per_gram, quote.year, table)?;
    Ok(real_per_gram * record.molar_mass)
}

/// Enforces referential integrity and freezes the dataset.
pub fn validate_dataset(
    elements: Vec<ElementRecord>,
    prices: Vec<PriceQuote>,
    deflators: DeflatorTable,
    crust_density: f64,
) -> Result<ValidatedDataset, DatasetError> {
    if elements.is_empty() {
        return Err(DatasetError::EmptyElementTable);
    }
    if crust_density <= 0.0 || !crust_density.is_finite() {
        return Err(DatasetError::NonPositiveCrustDensity(crust_density));
    }
    deflators.check_base()?;

    let mut elements = elements;
    elements.sort_by(|a, b| a.symbol.cmp(&b.symbol));
    let mut by_symbol = HashMap::new();
    for (i, e) in elements.iter().enumerate() {
        if by_symbol.insert(e.symbol.clone(), i).is_some() {
            return Err(DatasetError::DuplicateSymbol {
                symbol: e.symbol.clone(),
            });
        }
    }

    let mut prices = prices;
    prices.sort_by(|a, b| (&a.symbol, a.year).cmp(&(&b.symbol, b.year)));
    let mut orphans = Vec::new();
    let mut missing_years = Vec::new();
    for w in prices.windows(2) {
        if w[0].symbol == w[1].symbol && w[0].year == w[1].year {
            return Err(DatasetError::DuplicateQuote {
                symbol: w[0].symbol.clone(),
                year: w[0].year,
            });
        }
    }
    for q in &prices {
        if !by_symbol.contains_key(&q.symbol) && !orphans.contains(&q.symbol) {
            orphans.push(q.symbol.clone());
        }
        if deflators.index(q.year).is_none() && !missing_years.contains(&q.year) {
            missing_years.push(q.year);
        }
    }
    if !orphans.is_empty() {
        orphans.sort();
        return Err(DatasetError::OrphanPriceSymbols { symbols: orphans });
    }
    if !missing_years.is_empty() {
        missing_years.sort_unstable();
        return Err(DatasetError::MissingPriceYears {
            years: missing_years,
        });
    }

    Ok(ValidatedDataset {
        elements,
        prices,
        deflators,
        crust_density,
        by_symbol,
    })
}

fn fnum(v: f64) -> String {
    // Shortest representation that round-trips through f64.
    let s = format!("{v}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), v);
    s
}

pub fn elements_to_csv(elements: &[ElementRecord]) -> String {
    let mut out = String::from(
        "symbol,name,molar_mass_g_mol,density_g_cm3,trading_form,abundance_mg_kg,\
         abs_electronegativity_eV,oxidation_state,gibbs_class\n",
    );
    for e in elements {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            e.symbol,
            e.name,
            fnum(e.molar_mass),
            fnum(e.density),
            e.trading_form.as_str(),
            fnum(e.abundance_env),
            fnum(e.abs_electronegativity),
            e.oxidation_state,
            e.gibbs_class.as_str(),
        ));
    }
    out
}

pub fn prices_to_csv(prices: &[PriceQuote]) -> String {
    let mut out = String::from("symbol,year,nominal_price_usd,unit,purity_note\n");
    for q in prices {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            q.symbol,
            q.year,
            fnum(q.nominal_price),
            q.unit.as_str(),
            q.purity_note.as_deref().unwrap_or(""),
        ));
    }
    out
}

pub fn deflator_to_csv(table: &DeflatorTable) -> String {
    let mut out = String::from("year,index_1992_base\n");
    for (year, index) in table.entries() {
        out.push_str(&format!("{},{}\n", year, fnum(index)));
    }
    out
}

/// Reads `elements.csv`, `prices.csv`, and `deflator.csv` from a directory
/// and validates the result.
pub fn load_dataset_dir(dir: &Path, crust_density: f64) -> Result<ValidatedDataset, DatasetIoError> {
    let read = |name: &str| -> Result<String, DatasetIoError> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|source| DatasetIoError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    let elements = parse_element_table(&read("elements.csv")?)?;
    let prices = parse_price_table(&read("prices.csv")?)?;
    let deflators = parse_deflator_table(&read("deflator.csv")?)?;
    Ok(validate_dataset(elements, prices, deflators, crust_density)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EL_HDR: &str = "symbol,name,molar_mass_g_mol,density_g_cm3,trading_form,abundance_mg_kg,abs_electronegativity_eV,oxidation_state,gibbs_class\n";
    const PR_HDR: &str = "symbol,year,nominal_price_usd,unit,purity_note\n";
    const DF_HDR: &str = "year,index_1992_base\n";

    fn table_with(base: f64) -> DeflatorTable {
        DeflatorTable::from_entries([(1970, base), (1992, 100.0), (1998, 111.62)]).unwrap()
    }

    #[test]
    fn parses_gold_row() {
        let text = format!("{EL_HDR}Au,Gold,196.97,19.3,solid,0.0015,5.77,3,low\n");
        let rows = parse_element_table(&text).unwrap();
        assert_eq!(rows.len(), 1);
        let au = &rows[0];
        assert_eq!(au.symbol, "Au");
        assert_eq!(au.name, "Gold");
        assert_eq!(au.molar_mass, 196.97);
        assert_eq!(au.density, 19.3);
        assert_eq!(au.trading_form, TradingForm::Solid);
        assert_eq!(au.abundance_env, 0.0015);
        assert_eq!(au.abs_electronegativity, 5.77);
        assert_eq!(au.oxidation_state, 3);
        assert_eq!(au.gibbs_class, GibbsClass::Low);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_element_table(EL_HDR).unwrap().is_empty());
    }

    #[test]
    fn rejects_non_positive_molar_mass() {
        let text = format!("{EL_HDR}Au,Gold,-1,19.3,solid,0.0015,5.77,3,low\n");
        let err = parse_element_table(&text).unwrap_err();
        match err {
            DatasetError::Parse(rows) => {
                assert_eq!(rows.errors.len(), 1);
                assert_eq!(rows.errors[0].column, "molar_mass_g_mol");
                assert!(rows.errors[0].message.contains("non-positive numeric field"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_symbol() {
        let text = format!(
            "{EL_HDR}Au,Gold,196.97,19.3,solid,0.0015,5.77,3,low\nAu,Gold,196.97,19.3,solid,0.0015,5.77,3,low\n"
        );
        let err = parse_element_table(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate symbol `Au`"));
    }

    #[test]
    fn rejects_wrong_header() {
        let err = parse_element_table("a,b,c\n").unwrap_err();
        assert!(matches!(err, DatasetError::HeaderMismatch { .. }));
    }

    #[test]
    fn row_accounting_is_exact() {
        let text = format!(
            "{EL_HDR}Au,Gold,196.97,19.3,solid,0.0015,5.77,3,low\n\
             Xx,Bad,-5,19.3,solid,0.0015,5.77,3,low\n\
             Cu,Copper,63.55,8.96,solid,28,3.9,2,mid\n\
             Yy,Bad,1,1,solid,1,1,0,low\n"
        );
        match parse_element_table(&text).unwrap_err() {
            DatasetError::Parse(rows) => {
                assert_eq!(rows.rows_seen, 4);
                assert_eq!(rows.rows_ok + rows.errors.len(), rows.rows_seen);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parses_price_row() {
        let text = format!("{PR_HDR}Au,1998,294.24,USD_per_troy_oz,\n");
        let rows = parse_price_table(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].symbol, "Au");
        assert_eq!(rows[0].year, 1998);
        assert_eq!(rows[0].nominal_price, 294.24);
        assert_eq!(rows[0].unit, PriceUnit::UsdPerTroyOz);
        assert_eq!(rows[0].purity_note, None);
    }

    #[test]
    fn rejects_duplicate_quote() {
        let text = format!(
            "{PR_HDR}Cu,1998,0.75,USD_per_lb,\nCu,1998,0.80,USD_per_lb,\n"
        );
        let err = parse_price_table(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate quote for (Cu, 1998)"));
    }

    #[test]
    fn rejects_unknown_unit() {
        let text = format!("{PR_HDR}Cu,1998,0.75,USD_per_ton,\n");
        let err = parse_price_table(&text).unwrap_err();
        assert!(err.to_string().contains("unknown unit `USD_per_ton`"));
    }

    #[test]
    fn deflator_requires_base_year() {
        let ok = format!("{DF_HDR}1970,31.8\n1992,100\n");
        let table = parse_deflator_table(&ok).unwrap();
        assert_eq!(table.index(1970), Some(31.8));
        assert_eq!(table.index(1992), Some(100.0));

        let missing = format!("{DF_HDR}1970,31.8\n");
        assert!(matches!(
            parse_deflator_table(&missing).unwrap_err(),
            DatasetError::MissingBaseYear
        ));

        let wrong = format!("{DF_HDR}1992,99.5\n");
        assert!(matches!(
            parse_deflator_table(&wrong).unwrap_err(),
            DatasetError::BadBaseIndex(_)
        ));
    }

    #[test]
    fn real_price_identity_at_base_year() {
        let table = table_with(50.0);
        assert_eq!(to_real_price(50.0, 1992, &table).unwrap(), 50.0);
    }

    #[test]
    fn real_price_halves_at_double_index() {
        let table = table_with(50.0);
        assert_eq!(to_real_price(10.0, 1970, &table).unwrap(), 20.0);
    }

    #[test]
    fn real_price_rejects_unknown_year() {
        let table = table_with(50.0);
        assert!(matches!(
            to_real_price(1.0, 1800, &table),
            Err(DatasetError::YearNotInTable(1800))
        ));
    }

    #[test]
    fn real_price_matches_hand_ratio() {
        // 1970 copper at $0.58/lb against the bundled-style index 31.8:
        // hand evaluation of nominal * 100 / index.
        let table = parse_deflator_table(&format!("{DF_HDR}1970,31.8\n1992,100\n")).unwrap();
        let real = to_real_price(0.58, 1970, &table).unwrap();
        let hand = 0.58 * 100.0 / 31.8;
        assert!((real - hand).abs() <= 1e-15 * hand.abs());
    }

    fn record(symbol: &str, molar_mass: f64) -> ElementRecord {
        ElementRecord {
            symbol: symbol.to_string(),
            name: symbol.to_string(),
            molar_mass,
            density: 10.0,
            trading_form: TradingForm::Solid,
            abundance_env: 1.0,
            abs_electronegativity: 1.0,
            oxidation_state: 1,
            gibbs_class: GibbsClass::Mid,
        }
    }

    fn quote(symbol: &str, year: u16, price: f64, unit: PriceUnit) -> PriceQuote {
        PriceQuote {
            symbol: symbol.to_string(),
            year,
            nominal_price: price,
            unit,
            purity_note: None,
        }
    }

    #[test]
    fn per_mole_unit_algebra() {
        let table = table_with(50.0);
        let rec = record("Xy", 10.0);
        let q = quote("Xy", 1992, 1.0, PriceUnit::UsdPerG);
        assert_eq!(price_per_mole(&q, &rec, &table).unwrap(), 10.0);
    }

    #[test]
    fn per_mole_kg_lb_equivalence() {
        let table = table_with(50.0);
        let rec = record("Xy", 55.0);
        let kg = quote("Xy", 1998, 2.204_622_621_848_776, PriceUnit::UsdPerKg);
        let lb = quote("Xy", 1998, 1.0, PriceUnit::UsdPerLb);
        let a = price_per_mole(&kg, &rec, &table).unwrap();
        let b = price_per_mole(&lb, &rec, &table).unwrap();
        assert!(((a - b) / b).abs() < 1e-6, "a={a} b={b}");
    }

    #[test]
    fn per_mole_rejects_symbol_mismatch() {
        let table = table_with(50.0);
        let rec = record("Cu", 63.55);
        let q = quote("Au", 1998, 1.0, PriceUnit::UsdPerG);
        assert!(matches!(
            price_per_mole(&q, &rec, &table),
            Err(DatasetError::SymbolMismatch { .. })
        ));
    }

    #[test]
    fn validate_rejects_orphan_symbol() {
        let err = validate_dataset(
            vec![record("Cu", 63.55)],
            vec![quote("Xx", 1998, 1.0, PriceUnit::UsdPerKg)],
            table_with(50.0),
            DEFAULT_CRUST_DENSITY,
        )
        .unwrap_err();
        match err {
            DatasetError::OrphanPriceSymbols { symbols } => assert_eq!(symbols, vec!["Xx"]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_empty_elements() {
        assert!(matches!(
            validate_dataset(vec![], vec![], table_with(50.0), DEFAULT_CRUST_DENSITY),
            Err(DatasetError::EmptyElementTable)
        ));
    }

    #[test]
    fn validate_rejects_quote_year_missing_from_deflator() {
        let err = validate_dataset(
            vec![record("Cu", 63.55)],
            vec![quote("Cu", 1800, 1.0, PriceUnit::UsdPerKg)],
            table_with(50.0),
            DEFAULT_CRUST_DENSITY,
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::MissingPriceYears { .. }));
    }

    #[test]
    fn without_symbols_rejects_unknown() {
        let ds = validate_dataset(
            vec![record("Cu", 63.55)],
            vec![],
            table_with(50.0),
            DEFAULT_CRUST_DENSITY,
        )
        .unwrap();
        assert!(matches!(
            ds.without_symbols(&["Qq"]),
            Err(DatasetError::UnknownSymbols { .. })
        ));
    }

    fn reference_dir() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
    }

    #[test]
    fn reference_dataset_has_65_elements() {
        let ds = load_dataset_dir(&reference_dir(), DEFAULT_CRUST_DENSITY).unwrap();
        assert_eq!(ds.elements().len(), 65);
        assert_eq!(ds.summary().n_elements, 65);
    }

    #[test]
    fn reference_gold_1998_per_mole_in_top_decades() {
        let ds = load_dataset_dir(&reference_dir(), DEFAULT_CRUST_DENSITY).unwrap();
        let au = ds.element("Au").unwrap();
        let q = ds.quote("Au", 1998).unwrap();
        let per_mole = price_per_mole(q, au, ds.deflators()).unwrap();
        assert!(
            (1e3..=1e4).contains(&per_mole),
            "gold 1998 price per mole {per_mole}"
        );
    }

    #[test]
    fn reference_round_trips() {
        let ds = load_dataset_dir(&reference_dir(), DEFAULT_CRUST_DENSITY).unwrap();
        let e2 = parse_element_table(&ds.elements_csv()).unwrap();
        let p2 = parse_price_table(&ds.prices_csv()).unwrap();
        let d2 = parse_deflator_table(&ds.deflator_csv()).unwrap();
        let ds2 = validate_dataset(e2, p2, d2, ds.crust_density()).unwrap();
        assert_eq!(ds, ds2);
    }

    prop_compose! {
        fn arb_record()(
            s1 in "[A-Z]",
            s2 in "[a-z]?",
            molar_mass in 1.0..300.0f64,
            density in 0.1..25.0f64,
            form in prop::sample::select(vec![TradingForm::Solid, TradingForm::Liquid, TradingForm::Gas]),
            abundance in 1e-9..1e5f64,
            chi in 0.0..10.0f64,
            z in 1..7u8,
            class in prop::sample::select(vec![GibbsClass::High, GibbsClass::Mid, GibbsClass::Low]),
        ) -> ElementRecord {
            ElementRecord {
                symbol: format!("{s1}{s2}"),
                name: format!("El{s1}{s2}"),
                molar_mass,
                density,
                trading_form: form,
                abundance_env: abundance,
                abs_electronegativity: chi,
                oxidation_state: z,
                gibbs_class: class,
            }
        }
    }

    proptest! {
        #[test]
        fn real_price_is_multiplicative(nominal in 1e-6..1e6f64, k in 0.001..1000.0f64) {
            let table = table_with(43.7);
            let a = to_real_price(nominal, 1970, &table).unwrap();
            let b = to_real_price(k * nominal, 1970, &table).unwrap();
            prop_assert!(((b - k * a) / b).abs() < 1e-12);
        }

        #[test]
        fn per_mole_invariant_under_unit_reexpression(
            price in 1e-6..1e6f64,
            molar in 1.0..300.0f64,
            from in prop::sample::select(PriceUnit::ALL.to_vec()),
            to in prop::sample::select(PriceUnit::ALL.to_vec()),
        ) {
            let table = table_with(43.7);
            let rec = record("Xy", molar);
            let q1 = quote("Xy", 1998, price, from);
            // same price expressed in the other unit
            let q2 = quote("Xy", 1998, price * to.grams() / from.grams(), to);
            let a = price_per_mole(&q1, &rec, &table).unwrap();
            let b = price_per_mole(&q2, &rec, &table).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-9, "a={} b={}", a, b);
        }

        #[test]
        fn dataset_round_trip_identity(
            records in prop::collection::vec(arb_record(), 1..8),
            prices_per in prop::collection::vec((0usize..8, 1959u16..1999, 1e-6..1e6f64), 0..12),
        ) {
            // unique symbols
            let mut seen = HashSet::new();
            let records: Vec<_> = records.into_iter().filter(|r| seen.insert(r.symbol.clone())).collect();
            let mut quotes = Vec::new();
            let mut used = HashSet::new();
            for (i, year, price) in prices_per {
                let rec = &records[i % records.len()];
                if used.insert((rec.symbol.clone(), year)) {
                    quotes.push(quote(&rec.symbol, year, price, PriceUnit::UsdPerKg));
                }
            }
            let mut entries: Vec<(u16, f64)> = (1959..1999).map(|y| (y, 20.0 + y as f64 / 10.0)).collect();
            entries.push((1992, 0.0)); // replaced below
            entries.retain(|(y, _)| *y != 1992);
            entries.push((1992, 100.0));
            let table = DeflatorTable::from_entries(entries).unwrap();

            let ds = validate_dataset(records, quotes, table, DEFAULT_CRUST_DENSITY).unwrap();
            let e2 = parse_element_table(&ds.elements_csv()).unwrap();
            let p2 = parse_price_table(&ds.prices_csv()).unwrap();
            let d2 = parse_deflator_table(&ds.deflator_csv()).unwrap();
            let ds2 = validate_dataset(e2, p2, d2, ds.crust_density()).unwrap();
            prop_assert_eq!(ds, ds2);
        }
    }
}
