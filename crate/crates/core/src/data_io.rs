//! Wind-speed series model, CSV ingestion/export, calibrated synthetic
//! generation and chronological splitting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement height assumed for CSV input when none is given (met-mast standard).
pub const DEFAULT_MEASUREMENT_HEIGHT: f64 = 10.0;

/// Lag-one autocorrelation of the synthetic 10-minute wind process.
pub const SYNTH_PERSISTENCE: f64 = 0.97;

/// First timestamp of generated series: 2019-03-01T00:00:00Z.
pub const SYNTH_EPOCH_START: i64 = 1_551_398_400;

/// Uniformly sampled wind-speed series.
///
/// Immutable once built; the constructor enforces strictly increasing
/// timestamps with constant spacing `dt`, finite non-negative speeds and a
/// length of at least two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindSeries {
    timestamps: Vec<i64>,
    values: Vec<f64>,
    dt: i64,
    height: f64,
}

impl WindSeries {
    pub fn new(timestamps: Vec<i64>, values: Vec<f64>, dt: i64, height: f64) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::shape(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::size(format!(
                "a wind series needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if dt <= 0 {
            return Err(Error::domain(format!("sampling interval must be positive, got {dt}")));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::domain(format!("measurement height must be positive, got {height}")));
        }
        for (row, &v) in values.iter().enumerate() {
            check_speed(row, v)?;
        }
        for row in 1..timestamps.len() {
            let found = timestamps[row] - timestamps[row - 1];
            if found != dt {
                return Err(Error::Spacing {
                    row,
                    expected: dt,
                    found,
                });
            }
        }
        Ok(Self {
            timestamps,
            values,
            dt,
            height,
        })
    }

    /// Builds a series on a regular grid starting at `start`.
    pub fn from_values(start: i64, dt: i64, height: f64, values: Vec<f64>) -> Result<Self> {
        let timestamps = (0..values.len() as i64).map(|i| start + i * dt).collect();
        Self::new(timestamps, values, dt, height)
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> i64 {
        self.dt
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same samples, relabelled with a different measurement height.
    pub fn with_height(mut self, height: f64) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::domain(format!("measurement height must be positive, got {height}")));
        }
        self.height = height;
        Ok(self)
    }

    /// Same timestamps with new values at a new height.
    pub fn map_values(&self, height: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(self.timestamps.clone(), values, self.dt, height)
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(
            self.timestamps[range.clone()].to_vec(),
            self.values[range].to_vec(),
            self.dt,
            self.height,
        )
    }
}

fn check_speed(row: usize, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Value {
            row,
            reason: format!("speed {v} is not finite"),
        });
    }
    if v < 0.0 {
        return Err(Error::Value {
            row,
            reason: format!("speed {v} is negative"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Onshore,
    Offshore,
}

impl SiteKind {
    /// Typical surface roughness length (m).
    pub fn roughness_length(self) -> f64 {
        match self {
            SiteKind::Onshore => 0.005,
            SiteKind::Offshore => 0.0002,
        }
    }
}

/// Wind-farm site description: roughness length and 10 m speed statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSpec {
    pub name: String,
    pub z0: f64,
    pub mean_speed: f64,
    pub sd_speed: f64,
    pub kind: SiteKind,
}

/// March 2019 site statistics (10 m speeds, m/s).
const SITES: &[(&str, SiteKind, f64, f64)] = &[
    ("amakhala_emoyeni", SiteKind::Onshore, 6.264, 3.198),
    ("clyde", SiteKind::Onshore, 3.829, 1.626),
    ("gansu", SiteKind::Onshore, 4.000, 2.477),
    ("mccain_foods", SiteKind::Onshore, 6.491, 3.519),
    ("shephards_flat", SiteKind::Onshore, 6.074, 2.618),
    ("akhfenir", SiteKind::Onshore, 3.096, 1.505),
    ("amrumbank", SiteKind::Offshore, 11.176, 4.962),
    ("anholt", SiteKind::Offshore, 8.999, 3.537),
    ("gemini", SiteKind::Offshore, 7.577, 4.174),
    ("horns_rev_2", SiteKind::Offshore, 11.183, 4.546),
    ("veja_mate", SiteKind::Offshore, 11.490, 4.685),
    ("walney", SiteKind::Offshore, 11.342, 5.015),
];

impl SiteSpec {
    pub fn new(name: impl Into<String>, kind: SiteKind, mean_speed: f64, sd_speed: f64) -> Result<Self> {
        Self::with_roughness(name, kind, kind.roughness_length(), mean_speed, sd_speed)
    }

    pub fn with_roughness(
        name: impl Into<String>,
        kind: SiteKind,
        z0: f64,
        mean_speed: f64,
        sd_speed: f64,
    ) -> Result<Self> {
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::domain(format!("roughness length must be positive, got {z0}")));
        }
        if !(sd_speed.is_finite() && sd_speed >= 0.0) {
            return Err(Error::domain(format!("speed SD must be non-negative, got {sd_speed}")));
        }
        if !(mean_speed.is_finite() && mean_speed >= 0.0) {
            return Err(Error::domain(format!("mean speed must be non-negative, got {mean_speed}")));
        }
        Ok(Self {
            name: name.into(),
            z0,
            mean_speed,
            sd_speed,
            kind,
        })
    }

    /// Looks up one of the twelve built-in sites by name (case and
    /// separator insensitive, e.g. `Horns Rev 2` or `horns_rev_2`).
    pub fn lookup(name: &str) -> Option<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        SITES
            .iter()
            .find(|(n, ..)| n.replace('_', "") == key)
            .map(|&(n, kind, mean, sd)| Self {
                name: n.to_string(),
                z0: kind.roughness_length(),
                mean_speed: mean,
                sd_speed: sd,
                kind,
            })
    }

    pub fn builtin() -> Vec<Self> {
        SITES.iter().filter_map(|(n, ..)| Self::lookup(n)).collect()
    }
}

/// Chronological split point: rows `[0, train_end)` train, `[train_end, total)` test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIndex {
    pub train_end: usize,
    pub total: usize,
}

impl SplitIndex {
    /// Splits `total` rows at `round(train_frac * total)`; both parts must
    /// hold at least `min_part` rows.
    pub fn new(total: usize, train_frac: f64, min_part: usize) -> Result<Self> {
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(Error::domain(format!("train fraction must lie in (0, 1), got {train_frac}")));
        }
        let train_end = (train_frac * total as f64).round() as usize;
        let test = total.saturating_sub(train_end);
        if train_end < min_part.max(1) || test < min_part.max(1) {
            return Err(Error::size(format!(
                "split of {total} rows at {train_frac} gives parts of {train_end} and {test}, need at least {min_part} each"
            )));
        }
        Ok(Self { train_end, total })
    }

    pub fn test_len(&self) -> usize {
        self.total - self.train_end
    }
}

/// Chronological (unshuffled) split into train and test series.
pub fn split_train_test(s: &WindSeries, train_frac: f64) -> Result<(WindSeries, WindSeries)> {
    let split = SplitIndex::new(s.len(), train_frac, 2)?;
    Ok((s.slice(0..split.train_end)?, s.slice(split.train_end..split.total)?))
}

/// Generates a synthetic 10 m wind-speed series whose sample mean and SD
/// match the site statistics.
///
/// The underlying process is a zero-mean AR(1) with lag-one coefficient
/// [`SYNTH_PERSISTENCE`]. Its sample moments are normalised, then an affine
/// map followed by clipping at zero is tuned so the clipped series hits the
/// target mean and SD.
pub fn synth_series(site: &SiteSpec, n: usize, dt: i64, seed: u64) -> Result<WindSeries> {
    if n < 2 {
        return Err(Error::size(format!("synthetic series needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = SYNTH_PERSISTENCE;
    let innovation_sd = (1.0 - phi * phi).sqrt();
    let mut z = Vec::with_capacity(n);
    let mut prev: f64 = StandardNormal.sample(&mut rng);
    z.push(prev);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        prev = phi * prev + innovation_sd * e;
        z.push(prev);
    }
    let (m, s) = mean_sd(&z);
    if s > 0.0 {
        z.iter_mut().for_each(|v| *v = (*v - m) / s);
    } else {
        z.iter_mut().for_each(|v| *v = 0.0);
    }

    let target_mean = site.mean_speed;
    let target_sd = site.sd_speed;
    let mut loc = target_mean;
    let mut scale = target_sd;
    let clip = |loc: f64, scale: f64| -> Vec<f64> { z.iter().map(|&v| (loc + scale * v).max(0.0)).collect() };
    let mut values = clip(loc, scale);
    if target_sd > 0.0 {
        for _ in 0..100 {
            let (mv, sv) = mean_sd(&values);
            let dm = target_mean - mv;
            let rs = if sv > 0.0 { target_sd / sv } else { 1.0 };
            if dm.abs() <= 1e-12 * target_mean.max(1.0) && (rs - 1.0).abs() <= 1e-12 {
                break;
            }
            loc += dm;
            scale *= rs;
            values = clip(loc, scale);
        }
    }
    WindSeries::from_values(SYNTH_EPOCH_START, dt, DEFAULT_MEASUREMENT_HEIGHT, values)
}

/// Sample mean and (n-1) standard deviation.
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Parses an ISO-8601 timestamp; offsets are converted to UTC and naive
/// timestamps are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Utc.from_utc_datetime(&t).timestamp());
        }
    }
    None
}

pub fn format_timestamp(t: i64) -> String {
    match Utc.timestamp_opt(t, 0).single() {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.to_string(),
    }
}

/// Shortest round-trip decimal, padded to at least six significant digits.
pub fn format_speed(v: f64) -> String {
    let mut s = format!("{v}");
    if !v.is_finite() {
        return s;
    }
    let sig = s
        .trim_start_matches('-')
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count();
    let sig = if v == 0.0 { 1 } else { sig };
    if sig < 6 {
        if !s.contains('.') {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', 6 - sig));
    }
    s
}

/// Reads a `timestamp,speed_mps` CSV (header optional).
///
/// Rows are sorted by timestamp before spacing is checked. Error row
/// indices are zero-based over data rows.
pub fn load_csv(path: impl AsRef<Path>, dt_expected: i64) -> Result<WindSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<(i64, f64)> = Vec::new();
    let mut data_row = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let ts_field = record.get(0).unwrap_or("");
        let ts = match parse_timestamp(ts_field) {
            Some(t) => t,
            None if line == 0 => continue, // header
            None => {
                return Err(Error::Value {
                    row: data_row,
                    reason: format!("unparseable timestamp {ts_field:?}"),
                })
            }
        };
        let speed_field = record.get(1).ok_or_else(|| Error::Value {
            row: data_row,
            reason: "missing speed column".into(),
        })?;
        let speed: f64 = speed_field.parse().map_err(|_| Error::Value {
            row: data_row,
            reason: format!("unparseable speed {speed_field:?}"),
        })?;
        check_speed(data_row, speed)?;
        rows.push((ts, speed));
        data_row += 1;
    }
    rows.sort_by_key(|r| r.0);
    let (timestamps, values) = rows.into_iter().unzip();
    WindSeries::new(timestamps, values, dt_expected, DEFAULT_MEASUREMENT_HEIGHT)
}

/// Writes the series as `timestamp,speed_mps`.
pub fn export_csv(s: &WindSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "timestamp,speed_mps")?;
        for (t, v) in s.timestamps.iter().zip(&s.values) {
            writeln!(out, "{},{}", format_timestamp(*t), format_speed(*v))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Writes named numeric columns of equal length as CSV, with an optional
/// leading timestamp column.
pub fn write_columns(
    path: impl AsRef<Path>,
    timestamps: Option<&[i64]>,
    columns: &[(&str, &[f64])],
) -> Result<()> {
    let path = path.as_ref();
    let len = columns.first().map(|c| c.1.len()).unwrap_or(0);
    if columns.iter().any(|c| c.1.len() != len) || timestamps.is_some_and(|t| t.len() != len) {
        return Err(Error::shape("all exported columns must share one length"));
    }
    let mut out = create(path)?;
    let mut write = || -> std::io::Result<()> {
        let mut header: Vec<&str> = Vec::new();
        if timestamps.is_some() {
            header.push("timestamp");
        }
        header.extend(columns.iter().map(|c| c.0));
        writeln!(out, "{}", header.join(","))?;
        for i in 0..len {
            let mut fields: Vec<String> = Vec::with_capacity(columns.len() + 1);
            if let Some(ts) = timestamps {
                fields.push(format_timestamp(ts[i]));
            }
            fields.extend(columns.iter().map(|c| format!("{}", c.1[i])));
            writeln!(out, "{}", fields.join(","))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Reads one numeric column (by header name, or the last column when
/// `column` is `None`) from a CSV file with a header row.
pub fn read_column(path: impl AsRef<Path>, column: Option<&str>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let idx = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("{}: no column named {name:?}", path.display())))?,
        None => headers
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Parse(format!("{}: empty header", path.display())))?,
    };
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let field = record.get(idx).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| Error::Value {
            row,
            reason: format!("unparseable number {field:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}
