//! Country-year index records: CSV reading/writing, validation and the
//! abnormal-point screen.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{mean, sample_variance, DataMatrix, Matrix, Unit};

pub const DEFAULT_OUTLIER_CUTOFF: f64 = 4.0;

/// The seven stability indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    /// Long-term average precipitation
    Lap,
    /// Annual average temperature
    Aat,
    /// Flood occurrence
    Fo,
    /// Drought occurrence
    Do,
    /// Annual military spending
    Ams,
    /// Law level
    Ll,
    /// Public support rate
    Psr,
}

impl IndexKind {
    pub const ALL: [IndexKind; 7] = [
        IndexKind::Lap,
        IndexKind::Aat,
        IndexKind::Fo,
        IndexKind::Do,
        IndexKind::Ams,
        IndexKind::Ll,
        IndexKind::Psr,
    ];

    /// The network inputs, in model-file order.
    pub const NETWORK_INPUTS: [IndexKind; 5] =
        [IndexKind::Lap, IndexKind::Aat, IndexKind::Fo, IndexKind::Ams, IndexKind::Psr];

    pub fn code(self) -> &'static str {
        match self {
            IndexKind::Lap => "LAP",
            IndexKind::Aat => "AAT",
            IndexKind::Fo => "FO",
            IndexKind::Do => "DO",
            IndexKind::Ams => "AMS",
            IndexKind::Ll => "LL",
            IndexKind::Psr => "PSR",
        }
    }

    pub fn csv_column(self) -> &'static str {
        match self {
            IndexKind::Lap => "lap_mm",
            IndexKind::Aat => "aat_c",
            IndexKind::Fo => "fo",
            IndexKind::Do => "do",
            IndexKind::Ams => "ams_pct",
            IndexKind::Ll => "ll",
            IndexKind::Psr => "psr_pct",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            IndexKind::Lap => Unit::Millimetre,
            IndexKind::Aat => Unit::Celsius,
            IndexKind::Ams | IndexKind::Psr => Unit::Percent,
            IndexKind::Fo | IndexKind::Do | IndexKind::Ll => Unit::Dimensionless,
        }
    }

    /// Accepts the short code (any case); `DF` is read as drought occurrence.
    pub fn from_code(code: &str) -> Option<Self> {
        let up = code.trim().to_ascii_uppercase();
        if up == "DF" {
            return Some(IndexKind::Do);
        }
        Self::ALL.into_iter().find(|k| k.code() == up)
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryYearRecord {
    pub country: String,
    pub year: i32,
    pub lap_mm: f64,
    pub aat_c: f64,
    pub fo: f64,
    /// Percent of GDP, in percentage points.
    pub ams_pct: f64,
    /// Percentage points, 0-100.
    pub psr_pct: f64,
    pub ll: Option<f64>,
    pub do_: Option<f64>,
    /// Raw fragility label.
    pub fsi: Option<f64>,
    /// Precomputed RS value, when the source already carries one.
    pub rs: Option<f64>,
}

impl CountryYearRecord {
    pub fn index(&self, kind: IndexKind) -> Option<f64> {
        match kind {
            IndexKind::Lap => Some(self.lap_mm),
            IndexKind::Aat => Some(self.aat_c),
            IndexKind::Fo => Some(self.fo),
            IndexKind::Do => self.do_,
            IndexKind::Ams => Some(self.ams_pct),
            IndexKind::Ll => self.ll,
            IndexKind::Psr => Some(self.psr_pct),
        }
    }

    pub fn index_mut(&mut self, kind: IndexKind) -> Option<&mut f64> {
        match kind {
            IndexKind::Lap => Some(&mut self.lap_mm),
            IndexKind::Aat => Some(&mut self.aat_c),
            IndexKind::Fo => Some(&mut self.fo),
            IndexKind::Do => self.do_.as_mut(),
            IndexKind::Ams => Some(&mut self.ams_pct),
            IndexKind::Ll => self.ll.as_mut(),
            IndexKind::Psr => Some(&mut self.psr_pct),
        }
    }

    pub fn network_inputs(&self) -> Vec<f64> {
        IndexKind::NETWORK_INPUTS
            .iter()
            .map(|&k| self.index(k).expect("network inputs are required fields"))
            .collect()
    }
}

const REQUIRED: [&str; 7] = ["country", "year", "lap_mm", "aat_c", "fo", "ams_pct", "psr_pct"];
const OPTIONAL: [&str; 4] = ["ll", "do", "fsi", "rs"];

/// Parses a numeric cell. Accepts a decimal comma (`2,89`), surrounding
/// whitespace and a trailing unit suffix (`%`, `mm`, `°C`).
pub fn parse_number(cell: &str) -> Option<f64> {
    let mut s = cell.trim();
    for suffix in ["%", "mm", "°C", "°c", "C"] {
        if let Some(stripped) = s.strip_suffix(suffix) {
            s = stripped.trim_end();
            break;
        }
    }
    let normalized;
    if s.contains(',') {
        if s.contains('.') || s.matches(',').count() > 1 {
            return None;
        }
        normalized = s.replace(',', ".");
        s = &normalized;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn validate_range(row: usize, column: &str, value: f64) -> Result<f64> {
    let ok = match column {
        "lap_mm" | "fo" | "ams_pct" | "do" => value >= 0.0,
        "psr_pct" => (0.0..=100.0).contains(&value),
        _ => true,
    };
    if ok {
        Ok(value)
    } else {
        Err(Error::RangeViolation { row, column: column.to_string(), value })
    }
}

/// Reads records from any CSV source with a header row.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CountryYearRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut cols = BTreeMap::new();
    for name in REQUIRED {
        let pos = position(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        cols.insert(name, pos);
    }
    for name in OPTIONAL {
        if let Some(pos) = position(name) {
            cols.insert(name, pos);
        }
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |name: &str| cols.get(name).and_then(|&p| rec.get(p)).unwrap_or("").trim();
        let parse_err = |name: &str| Error::ParseError {
            row,
            column: name.to_string(),
            value: cell(name).to_string(),
        };
        let required = |name: &str| -> Result<f64> {
            let v = parse_number(cell(name)).ok_or_else(|| parse_err(name))?;
            validate_range(row, name, v)
        };
        let optional = |name: &str| -> Result<Option<f64>> {
            let c = cell(name);
            if c.is_empty() {
                return Ok(None);
            }
            let v = parse_number(c).ok_or_else(|| parse_err(name))?;
            validate_range(row, name, v).map(Some)
        };

        let country = cell("country").to_string();
        if country.is_empty() {
            return Err(parse_err("country"));
        }
        let year: i32 = cell("year").parse().map_err(|_| parse_err("year"))?;
        let record = CountryYearRecord {
            lap_mm: required("lap_mm")?,
            aat_c: required("aat_c")?,
            fo: required("fo")?,
            ams_pct: required("ams_pct")?,
            psr_pct: required("psr_pct")?,
            ll: optional("ll")?,
            do_: optional("do")?,
            fsi: optional("fsi")?,
            rs: optional("rs")?,
            country,
            year,
        };
        if !seen.insert((record.country.clone(), record.year)) {
            return Err(Error::DuplicateKey { country: record.country, year: record.year });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<CountryYearRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Loads and concatenates several files, rejecting keys repeated across them.
pub fn load_many<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<CountryYearRecord>> {
    let mut all: Vec<CountryYearRecord> = Vec::new();
    let mut seen = HashSet::new();
    for p in paths {
        for r in load_csv(p)? {
            if !seen.insert((r.country.clone(), r.year)) {
                return Err(Error::DuplicateKey { country: r.country, year: r.year });
            }
            all.push(r);
        }
    }
    Ok(all)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records with the full header and canonical decimal points.
pub fn write_csv<W: Write>(writer: W, records: &[CountryYearRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REQUIRED.iter().chain(OPTIONAL.iter()))?;
    for r in records {
        w.write_record([
            r.country.clone(),
            r.year.to_string(),
            r.lap_mm.to_string(),
            r.aat_c.to_string(),
            r.fo.to_string(),
            r.ams_pct.to_string(),
            r.psr_pct.to_string(),
            fmt_opt(r.ll),
            fmt_opt(r.do_),
            fmt_opt(r.fsi),
            fmt_opt(r.rs),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Builds an observation matrix over the given indexes, one row per record.
pub fn index_matrix(records: &[CountryYearRecord], kinds: &[IndexKind]) -> Result<DataMatrix> {
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let row: Vec<f64> = kinds
            .iter()
            .map(|&k| r.index(k).ok_or_else(|| Error::MissingColumn(k.csv_column().to_string())))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::TooFewRecords { needed: 2, got: 0 });
    }
    DataMatrix::new(
        Matrix::from_rows(&rows)?,
        kinds.iter().map(|k| k.code().to_string()).collect(),
        kinds.iter().map(|k| k.unit()).collect(),
    )
}

/// Groups records by country (sorted by name), each group sorted by year.
pub fn by_country(records: &[CountryYearRecord]) -> BTreeMap<String, Vec<CountryYearRecord>> {
    let mut map: BTreeMap<String, Vec<CountryYearRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.country.clone()).or_default().push(r.clone());
    }
    for group in map.values_mut() {
        group.sort_by_key(|r| r.year);
    }
    map
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedRecord {
    pub record: CountryYearRecord,
    pub index: IndexKind,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Screened {
    /// Records that survive; equals the input unless dropping was requested.
    pub records: Vec<CountryYearRecord>,
    /// One entry per flagged record, naming its most extreme index.
    pub flagged: Vec<FlaggedRecord>,
}

/// Flags records whose z-score on any index exceeds `cutoff` in magnitude.
///
/// Z-scores use the column mean and sample standard deviation over all
/// records; indexes missing from some record and constant indexes are
/// skipped. Flagged records are removed only when `drop_flagged` is set.
pub fn preprocess(records: &[CountryYearRecord], cutoff: f64, drop_flagged: bool) -> Result<Screened> {
    const MIN_RECORDS: usize = 3;
    if records.len() < MIN_RECORDS {
        return Err(Error::TooFewRecords { needed: MIN_RECORDS, got: records.len() });
    }
    let mut worst: Vec<Option<(IndexKind, f64)>> = vec![None; records.len()];
    for kind in IndexKind::ALL {
        let Some(col) = records.iter().map(|r| r.index(kind)).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        let sd = sample_variance(&col).sqrt();
        if sd == 0.0 {
            continue;
        }
        let m = mean(&col);
        for (i, x) in col.iter().enumerate() {
            let z = (x - m) / sd;
            if z.abs() > cutoff && worst[i].is_none_or(|(_, w)| z.abs() > w.abs()) {
                worst[i] = Some((kind, z));
            }
        }
    }
    let mut kept = Vec::new();
    let mut flagged = Vec::new();
    for (r, w) in records.iter().zip(worst) {
        match w {
            Some((index, z)) => {
                flagged.push(FlaggedRecord { record: r.clone(), index, z });
                if !drop_flagged {
                    kept.push(r.clone());
                }
            }
            None => kept.push(r.clone()),
        }
    }
    Ok(Screened { records: kept, flagged })
}
