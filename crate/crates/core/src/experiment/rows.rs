//! Result rows and their CSV form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::ExperimentError;

pub const CSV_HEADER: &str = "experiment_id,classifier,n,kappa,mean,std,trials,seed,wall_time_ms";

/// What a row measures; serialized in the `kappa` column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    /// Plain accuracy, written as `accuracy`.
    Accuracy,
    /// Astuteness at this `kappa`.
    Astuteness(f64),
    /// Weight outside the probability-`p` ball, written as `cond2:p=<p>`.
    Cond2 { p: f64 },
    /// `t_n` times the largest weight, written as `cond3`.
    Cond3,
}

impl Measure {
    fn rank(&self) -> u8 {
        match self {
            Measure::Accuracy => 0,
            Measure::Astuteness(_) => 1,
            Measure::Cond2 { .. } => 2,
            Measure::Cond3 => 3,
        }
    }

    fn value(&self) -> f64 {
        match *self {
            Measure::Astuteness(k) => k,
            Measure::Cond2 { p } => p,
            _ => 0.0,
        }
    }

    /// Accuracy first, then increasing `kappa`, then condition estimates.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.value().total_cmp(&other.value()))
    }

    /// Whether the row holds a fraction of test points.
    pub fn is_fraction(&self) -> bool {
        matches!(self, Measure::Accuracy | Measure::Astuteness(_))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Measure::Accuracy => f.write_str("accuracy"),
            Measure::Astuteness(k) => f.write_str(&sig6(k)),
            Measure::Cond2 { p } => write!(f, "cond2:p={}", sig6(p)),
            Measure::Cond3 => f.write_str("cond3"),
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "accuracy" => Ok(Measure::Accuracy),
            "cond3" => Ok(Measure::Cond3),
            _ => {
                if let Some(p) = s.strip_prefix("cond2:p=") {
                    return p.parse().map(|p| Measure::Cond2 { p }).map_err(|_| format!("bad kappa field `{s}`"));
                }
                s.parse().map(Measure::Astuteness).map_err(|_| format!("bad kappa field `{s}`"))
            }
        }
    }
}

/// One line of an experiment CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    pub classifier: String,
    pub n: usize,
    pub measure: Measure,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl ResultRow {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.std >= 0.0) {
            return Err(format!("negative std {}", self.std));
        }
        if self.measure.is_fraction() && !(0.0..=1.0).contains(&self.mean) {
            return Err(format!("mean {} outside [0, 1]", self.mean));
        }
        if !(self.mean >= 0.0 && self.mean.is_finite()) {
            return Err(format!("mean {} must be non-negative", self.mean));
        }
        Ok(())
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.experiment_id
            .cmp(&other.experiment_id)
            .then_with(|| self.classifier.cmp(&other.classifier))
            .then_with(|| self.n.cmp(&other.n))
            .then_with(|| self.measure.canonical_cmp(&other.measure))
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.canonical_cmp(b));
}

/// Formats like C's `%g`: six significant digits, trailing zeros dropped.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        trim_zeros(format!("{:.*}", (5 - exp) as usize, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Renders rows, in the order given, under the fixed header.
pub fn write_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.experiment_id.clone(),
            r.classifier.clone(),
            r.n.to_string(),
            r.measure.to_string(),
            sig6(r.mean),
            sig6(r.std),
            r.trials.to_string(),
            r.seed.to_string(),
            r.wall_time_ms.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, ExperimentError> {
    let bad = |line: u64, msg: String| ExperimentError::Csv(format!("line {line}: {msg}"));
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(bad(1, format!("expected header `{CSV_HEADER}`")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ExperimentError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default();
        fn num<V: FromStr>(s: &str, name: &str) -> Result<V, String> {
            s.parse().map_err(|_| format!("bad {name} `{s}`"))
        }
        let row = (|| -> Result<ResultRow, String> {
            let row = ResultRow {
                experiment_id: field(0).to_string(),
                classifier: field(1).to_string(),
                n: num(field(2), "n")?,
                measure: field(3).parse()?,
                mean: num(field(4), "mean")?,
                std: num(field(5), "std")?,
                trials: num(field(6), "trials")?,
                seed: num(field(7), "seed")?,
                wall_time_ms: num(field(8), "wall_time_ms")?,
            };
            row.validate()?;
            Ok(row)
        })()
        .map_err(|m| bad(line, m))?;
        rows.push(row);
    }
    Ok(rows)
}
