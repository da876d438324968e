//! Forest-fires data: strict CSV ingestion, ordinal encoding of month and
//! day, Z-score normalization of the features and `ln(1 + area)` targets.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names of the UCI `forestfires.csv` file, in order.
pub const HEADER: [&str; 13] = [
    "X", "Y", "month", "day", "FFMC", "DMC", "DC", "ISI", "temp", "RH", "wind", "rain", "area",
];

/// Number of records in the canonical file.
pub const CANONICAL_ROWS: usize = 517;

/// Environment variable naming the default dataset path.
pub const DATASET_ENV: &str = "ANOVA_FORESTFIRES_CSV";

const MONTHS: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];
const DAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

/// Attribute groups of the forest-fires data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "S")]
    Spatial,
    #[serde(rename = "T")]
    Temporal,
    #[serde(rename = "FWI")]
    Fwi,
    #[serde(rename = "M")]
    Meteorological,
}

impl Group {
    pub fn code(self) -> &'static str {
        match self {
            Self::Spatial => "S",
            Self::Temporal => "T",
            Self::Fwi => "FWI",
            Self::Meteorological => "M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    X,
    Y,
    Month,
    Day,
    Ffmc,
    Dmc,
    Dc,
    Isi,
    Temp,
    Rh,
    Wind,
    Rain,
}

impl Attribute {
    pub const ALL: [Attribute; 12] = [
        Self::X,
        Self::Y,
        Self::Month,
        Self::Day,
        Self::Ffmc,
        Self::Dmc,
        Self::Dc,
        Self::Isi,
        Self::Temp,
        Self::Rh,
        Self::Wind,
        Self::Rain,
    ];

    /// 1-based attribute number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        HEADER[self as usize]
    }

    pub fn group(self) -> Group {
        match self {
            Self::X | Self::Y => Group::Spatial,
            Self::Month | Self::Day => Group::Temporal,
            Self::Ffmc | Self::Dmc | Self::Dc | Self::Isi => Group::Fwi,
            Self::Temp | Self::Rh | Self::Wind | Self::Rain => Group::Meteorological,
        }
    }

    fn lookup(token: &str) -> Option<Self> {
        if let Ok(n) = token.parse::<usize>() {
            return (1..=12).contains(&n).then(|| Self::ALL[n - 1]);
        }
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(token))
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the raw file with month and day already ordinal-encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub x: u8,
    pub y: u8,
    /// 1 = jan … 12 = dec.
    pub month: u8,
    /// 1 = mon … 7 = sun.
    pub day: u8,
    pub ffmc: f64,
    pub dmc: f64,
    pub dc: f64,
    pub isi: f64,
    pub temp: f64,
    pub rh: f64,
    pub wind: f64,
    pub rain: f64,
    /// Burned area in hectares.
    pub area: f64,
}

impl RawRecord {
    pub fn feature(&self, a: Attribute) -> f64 {
        match a {
            Attribute::X => self.x as f64,
            Attribute::Y => self.y as f64,
            Attribute::Month => self.month as f64,
            Attribute::Day => self.day as f64,
            Attribute::Ffmc => self.ffmc,
            Attribute::Dmc => self.dmc,
            Attribute::Dc => self.dc,
            Attribute::Isi => self.isi,
            Attribute::Temp => self.temp,
            Attribute::Rh => self.rh,
            Attribute::Wind => self.wind,
            Attribute::Rain => self.rain,
        }
    }

    fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.x,
            self.y,
            MONTHS[self.month as usize - 1],
            DAYS[self.day as usize - 1],
            self.ffmc,
            self.dmc,
            self.dc,
            self.isi,
            self.temp,
            self.rh,
            self.wind,
            self.rain,
            self.area
        )
    }
}

/// Reads and validates a forest-fires CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, path)
}

/// Parses forest-fires CSV content; `origin` is only used in error messages.
pub fn parse_csv<R: Read>(reader: R, origin: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let origin = origin.as_ref().to_path_buf();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != HEADER {
        return Err(parse_err(
            1,
            format!(
                "expected header {}, found {}",
                HEADER.join(","),
                found.join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        let real = |i: usize| -> Result<f64> {
            let v: f64 = field(i).parse().map_err(|_| {
                parse_err(
                    line,
                    format!("{}: `{}` is not a number", HEADER[i], field(i)),
                )
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(
                    line,
                    format!("{}: value is not finite", HEADER[i]),
                ))
            }
        };
        let grid = |i: usize| -> Result<u8> {
            match field(i).parse::<u8>() {
                Ok(v) if (1..=9).contains(&v) => Ok(v),
                _ => Err(parse_err(
                    line,
                    format!("{}: `{}` is not an integer in 1..=9", HEADER[i], field(i)),
                )),
            }
        };
        let token = |i: usize, vocab: &[&str]| -> Result<u8> {
            vocab
                .iter()
                .position(|v| *v == field(i))
                .map(|p| p as u8 + 1)
                .ok_or_else(|| {
                    parse_err(line, format!("{}: unknown token `{}`", HEADER[i], field(i)))
                })
        };
        let area = real(12)?;
        if area < 0.0 {
            return Err(parse_err(line, format!("area: negative value {area}")));
        }
        records.push(RawRecord {
            x: grid(0)?,
            y: grid(1)?,
            month: token(2, &MONTHS)?,
            day: token(3, &DAYS)?,
            ffmc: real(4)?,
            dmc: real(5)?,
            dc: real(6)?,
            isi: real(7)?,
            temp: real(8)?,
            rh: real(9)?,
            wind: real(10)?,
            rain: real(11)?,
            area,
        });
    }
    Ok(records)
}

/// Serializes records in the UCI layout.
pub fn records_to_csv(records: &[RawRecord]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

/// Resolves the dataset path from an explicit argument or [`DATASET_ENV`].
pub fn default_dataset_path(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATASET_ENV).map(PathBuf::from))
}

/// A nonempty ordered set of attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSelection {
    attributes: Vec<Attribute>,
}

impl AttributeSelection {
    pub fn new(mut attributes: Vec<Attribute>) -> Result<Self> {
        attributes.sort();
        attributes.dedup();
        if attributes.is_empty() {
            return Err(Error::InvalidArgument(
                "attribute selection is empty".into(),
            ));
        }
        Ok(Self { attributes })
    }

    pub fn all() -> Self {
        Self {
            attributes: Attribute::ALL.to_vec(),
        }
    }

    pub fn groups(groups: &[Group]) -> Result<Self> {
        Self::new(
            Attribute::ALL
                .into_iter()
                .filter(|a| groups.contains(&a.group()))
                .collect(),
        )
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Compact label, e.g. `STFWI` for group selections or `month,DC,temp`.
    pub fn label(&self) -> String {
        let mut codes = String::new();
        for g in [
            Group::Spatial,
            Group::Temporal,
            Group::Fwi,
            Group::Meteorological,
        ] {
            let members: Vec<Attribute> = Attribute::ALL
                .into_iter()
                .filter(|a| a.group() == g)
                .collect();
            let picked = members
                .iter()
                .filter(|a| self.attributes.contains(a))
                .count();
            if picked == members.len() {
                codes.push_str(g.code());
            } else if picked > 0 {
                codes.clear();
                break;
            }
        }
        if codes.is_empty() {
            let names: Vec<&str> = self.attributes.iter().map(|a| a.name()).collect();
            names.join(",")
        } else if codes == "STFWIM" {
            "ALL".to_string()
        } else {
            codes
        }
    }
}

impl FromStr for AttributeSelection {
    type Err = Error;

    /// Accepts `ALL`, concatenated group codes (`STFWI`, `S T M`, `FWI`) or a
    /// comma-separated list of attribute names or 1-based numbers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        if s.contains(',') {
            let attrs = s
                .split(',')
                .map(|t| {
                    Attribute::lookup(t.trim()).ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown attribute `{}`", t.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::new(attrs);
        }
        let compact: String = s.split_whitespace().collect();
        let mut rest = compact.as_str();
        let mut groups = Vec::new();
        while !rest.is_empty() {
            let (g, len) = if rest.starts_with("FWI") {
                (Group::Fwi, 3)
            } else if rest.starts_with('S') {
                (Group::Spatial, 1)
            } else if rest.starts_with('T') {
                (Group::Temporal, 1)
            } else if rest.starts_with('M') {
                (Group::Meteorological, 1)
            } else {
                break;
            };
            groups.push(g);
            rest = &rest[len..];
        }
        if rest.is_empty() && !groups.is_empty() {
            return Self::groups(&groups);
        }
        // a single attribute name such as `temp`
        Attribute::lookup(s)
            .map(|a| Self::new(vec![a]))
            .unwrap_or_else(|| Err(Error::InvalidArgument(format!("unknown selection `{s}`"))))
    }
}

/// Per-column normalization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub group: Group,
    pub mean: f64,
    /// Population standard deviation (divisor `M`).
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    /// `y = ln(1 + area)`.
    Log1p,
}

/// Everything needed to map raw inputs into the model's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub columns: Vec<ColumnMeta>,
    pub target: TargetTransform,
}

impl Preprocessing {
    pub fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.columns.iter().cycle())
            .map(|(v, c)| (v - c.mean) / c.std)
            .collect()
    }
}

/// Normalized features and transformed targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    attributes: Vec<Attribute>,
    raw: Vec<f64>,
    nodes: Vec<f64>,
    targets: Vec<f64>,
    areas: Vec<f64>,
    preprocessing: Preprocessing,
}

/// Column statistics over the given rows of a row-major buffer.
fn column_stats(
    raw: &[f64],
    d: usize,
    rows: &[usize],
    names: &[Attribute],
) -> Result<Vec<ColumnMeta>> {
    let n = rows.len() as f64;
    (0..d)
        .map(|j| {
            let mean = rows.iter().map(|&r| raw[r * d + j]).sum::<f64>() / n;
            let var = rows
                .iter()
                .map(|&r| (raw[r * d + j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            if std.is_nan() || std <= 1e-12 * mean.abs().max(1.0) {
                return Err(Error::ZeroStd(names[j].name().to_string()));
            }
            Ok(ColumnMeta {
                name: names[j].name().to_string(),
                group: names[j].group(),
                mean,
                std,
            })
        })
        .collect()
}

/// Z-scores the selected columns over all records and log-transforms the area.
pub fn preprocess(records: &[RawRecord], selection: &AttributeSelection) -> Result<DesignMatrix> {
    if records.is_empty() {
        return Err(Error::Data("no records to preprocess".into()));
    }
    let attrs = selection.attributes().to_vec();
    let d = attrs.len();
    let raw: Vec<f64> = records
        .iter()
        .flat_map(|r| attrs.iter().map(move |&a| r.feature(a)))
        .collect();
    let all: Vec<usize> = (0..records.len()).collect();
    let columns = column_stats(&raw, d, &all, &attrs)?;
    let preprocessing = Preprocessing {
        columns,
        target: TargetTransform::Log1p,
    };
    let nodes = preprocessing.standardize(&raw);
    let areas: Vec<f64> = records.iter().map(|r| r.area).collect();
    Ok(DesignMatrix {
        attributes: attrs,
        raw,
        nodes,
        targets: areas.iter().map(|a| a.ln_1p()).collect(),
        areas,
        preprocessing,
    })
}

/// Maps a model output on the log scale back to hectares, clamped at zero.
pub fn inverse_target(yhat: f64) -> f64 {
    yhat.exp_m1().max(0.0)
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn dim(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    /// Row-major `M × d` Z-scored features.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, m: usize) -> &[f64] {
        &self.nodes[m * self.dim()..(m + 1) * self.dim()]
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// `ln(1 + area)`.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Burned area in hectares.
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn preprocessing(&self) -> &Preprocessing {
        &self.preprocessing
    }

    /// Gathers rows of the globally normalized features.
    pub fn gather(&self, rows: &[usize]) -> Vec<f64> {
        rows.iter()
            .flat_map(|&r| self.node(r).iter().copied())
            .collect()
    }

    /// Normalization statistics computed from `rows` only.
    pub fn fit_preprocessing(&self, rows: &[usize]) -> Result<Preprocessing> {
        Ok(Preprocessing {
            columns: column_stats(&self.raw, self.dim(), rows, &self.attributes)?,
            target: TargetTransform::Log1p,
        })
    }

    /// Gathers raw rows and normalizes them with `pre`.
    pub fn gather_with(&self, rows: &[usize], pre: &Preprocessing) -> Vec<f64> {
        let d = self.dim();
        let raw: Vec<f64> = rows
            .iter()
            .flat_map(|&r| self.raw[r * d..(r + 1) * d].iter().copied())
            .collect();
        pre.standardize(&raw)
    }

    /// Restricts to a subset of the current attributes, re-deriving the
    /// normalization of the kept columns.
    pub fn select(&self, selection: &AttributeSelection) -> Result<DesignMatrix> {
        let d = self.dim();
        let cols: Vec<usize> = selection
            .attributes()
            .iter()
            .map(|a| {
                self.attributes.iter().position(|b| b == a).ok_or_else(|| {
                    Error::InvalidArgument(format!("attribute {a} is not in the design matrix"))
                })
            })
            .collect::<Result<_>>()?;
        let raw: Vec<f64> = (0..self.rows())
            .flat_map(|r| cols.iter().map(move |&c| self.raw[r * d + c]))
            .collect();
        let columns: Vec<ColumnMeta> = cols
            .iter()
            .map(|&c| self.preprocessing.columns[c].clone())
            .collect();
        let preprocessing = Preprocessing {
            columns,
            target: self.preprocessing.target,
        };
        let nodes = preprocessing.standardize(&raw);
        Ok(DesignMatrix {
            attributes: selection.attributes().to_vec(),
            raw,
            nodes,
            targets: self.targets.clone(),
            areas: self.areas.clone(),
            preprocessing,
        })
    }

    /// Normalized dataset as CSV: the selected columns followed by `target`.
    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = vec![{
            let mut h: Vec<&str> = self.attributes.iter().map(|a| a.name()).collect();
            h.push("target");
            h.join(",")
        }];
        for m in 0..self.rows() {
            let mut row: Vec<String> = self.node(m).iter().map(f64::to_string).collect();
            row.push(self.targets[m].to_string());
            out.push(row.join(","));
        }
        out.join("\n") + "\n"
    }

    /// Normalized dataset plus metadata as JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows(),
            "preprocessing": self.preprocessing,
            "nodes": self.nodes,
            "targets": self.targets,
        })
    }
}

/// Synthetic records with the forest-fires schema and value ranges.
///
/// Burned area depends mostly on month, DC and temperature, with a large
/// share of zero-area fires. Useful for demos and tests when the real file is
/// not at hand; it is not a substitute for it.
pub fn synthetic_records(m: usize, seed: u64) -> Vec<RawRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Normal<f64> = Normal::new(0.0, 1.0).expect("unit normal");
    (0..m)
        .map(|_| {
            let month: u8 = if rng.random_bool(0.7) {
                rng.random_range(7..=9)
            } else {
                rng.random_range(1..=12)
            };
            let summer = (7..=9).contains(&month);
            let temp =
                (if summer { 22.0 } else { 13.0 } + 4.5 * noise.sample(&mut rng)).clamp(2.0, 33.0);
            let dc = (if summer { 620.0 } else { 250.0 } + 180.0 * noise.sample(&mut rng))
                .clamp(7.0, 860.0);
            let dmc = (0.17 * dc + 40.0 * noise.sample(&mut rng)).clamp(1.0, 290.0);
            let ffmc = (91.0 + 3.0 * noise.sample(&mut rng)).clamp(18.0, 96.2);
            let isi = (9.0 + 4.0 * noise.sample(&mut rng)).clamp(0.0, 56.0);
            let rh =
                (44.0 - 0.8 * (temp - 19.0) + 14.0 * noise.sample(&mut rng)).clamp(15.0, 100.0);
            let wind = (4.0 + 1.8 * noise.sample(&mut rng)).clamp(0.4, 9.4);
            let rain: f64 = if rng.random_bool(0.03) {
                rng.random_range(0.2..6.4)
            } else {
                0.0
            };
            let drive = 0.9 * (temp - 19.0) / 6.0
                + 0.6 * (dc - 550.0) / 250.0
                + if month == 9 { 0.8 } else { 0.0 };
            let area = if rng.random_bool(0.48) {
                0.0
            } else {
                let log_area = (1.1 + 0.8 * drive + 1.2 * noise.sample(&mut rng)).max(0.0);
                (log_area.exp_m1() * 100.0).round() / 100.0
            };
            RawRecord {
                x: rng.random_range(1..=9),
                y: rng.random_range(2..=9),
                month,
                day: rng.random_range(1..=7),
                ffmc: (ffmc * 10.0).round() / 10.0,
                dmc: (dmc * 10.0).round() / 10.0,
                dc: (dc * 10.0).round() / 10.0,
                isi: (isi * 10.0).round() / 10.0,
                temp: (temp * 10.0).round() / 10.0,
                rh: rh.round(),
                wind: (wind * 10.0).round() / 10.0,
                rain: (rain * 10.0).round() / 10.0,
                area,
            }
        })
        .collect()
}
