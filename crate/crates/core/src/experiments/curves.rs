use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DensityMatrix;

/// Where a curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Continuous,
    Frequent,
    Analytic,
    Oracle,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Continuous => "continuous",
            Scheme::Frequent => "frequent",
            Scheme::Analytic => "analytic",
            Scheme::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub x: f64,
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
    pub leaked: f64,
}

impl Row {
    pub fn from_state(x: f64, rho: &DensityMatrix) -> Self {
        let o = rho.occupations();
        Row {
            x,
            p1: o.p1,
            p2: o.p2,
            pr: o.pr,
            leaked: o.leaked,
        }
    }

    /// Row with only the dot populations known; the remainder is booked as
    /// leaked.
    pub fn from_dots(x: f64, p1: f64, p2: f64) -> Self {
        Row {
            x,
            p1,
            p2,
            pr: 0.0,
            leaked: 1.0 - p1 - p2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub scheme: Scheme,
    pub rows: Vec<Row>,
}

impl Series {
    pub fn abscissa(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn p1(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p1).collect()
    }

    pub fn p2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p2).collect()
    }
}

/// Labelled curves sharing one abscissa, serialized as
/// `<abscissa>,<label>,scheme,P1,P2,PR,Pleaked`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSet {
    pub name: String,
    pub abscissa: String,
    pub label: String,
    pub series: Vec<Series>,
}

/// Probabilities may overshoot `[0, 1]` by round-off only.
const PROBABILITY_SLACK: f64 = 1e-9;

impl CurveSet {
    pub fn new(name: impl Into<String>, abscissa: impl Into<String>, label: impl Into<String>) -> Self {
        CurveSet {
            name: name.into(),
            abscissa: abscissa.into(),
            label: label.into(),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, scheme: Scheme, rows: Vec<Row>) {
        self.series.push(Series {
            label: label.into(),
            scheme,
            rows,
        });
    }

    pub fn find(&self, label: &str, scheme: Scheme) -> Option<&Series> {
        self.series
            .iter()
            .find(|s| s.label == label && s.scheme == scheme)
    }

    pub fn header(&self) -> [String; 7] {
        [
            self.abscissa.clone(),
            self.label.clone(),
            "scheme".into(),
            "P1".into(),
            "P2".into(),
            "PR".into(),
            "Pleaked".into(),
        ]
    }

    /// Rows ascending within each series, probabilities within `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        for s in &self.series {
            if s.rows.windows(2).any(|w| !(w[1].x > w[0].x)) {
                return Err(Error::Alignment(format!(
                    "series {}/{} is not sorted by {}",
                    s.label, s.scheme, self.abscissa
                )));
            }
            for r in &s.rows {
                for p in [r.p1, r.p2, r.pr, r.leaked] {
                    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
                        return Err(Error::NumericalFailure {
                            time: r.x,
                            reason: format!("probability {p} outside [0, 1] in {}/{}", s.label, s.scheme),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        for s in &self.series {
            for r in &s.rows {
                w.write_record([
                    r.x.to_string(),
                    s.label.clone(),
                    s.scheme.to_string(),
                    r.p1.to_string(),
                    r.p2.to_string(),
                    r.pr.to_string(),
                    r.leaked.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    /// gnuplot script drawing `P1` for every series, reading only `csv_file`.
    pub fn plot_script(&self, csv_file: &str) -> String {
        let mut out = String::new();
        out.push_str("# gnuplot script; run with `gnuplot -p <this file>`\n");
        out.push_str("set datafile separator ','\n");
        out.push_str(&format!("set xlabel '{}'\n", self.abscissa));
        out.push_str("set ylabel 'P1'\n");
        out.push_str("set key outside\n");
        let clauses: Vec<String> = self
            .series
            .iter()
            .map(|s| {
                let style = match s.scheme {
                    Scheme::Continuous | Scheme::Oracle => "points pt 7 ps 0.4",
                    Scheme::Frequent | Scheme::Analytic => "lines",
                };
                format!(
                    "'{csv_file}' skip 1 using 1:((strcol(2) eq '{label}' && strcol(3) eq '{scheme}') ? $4 : 1/0) with {style} title '{name}={label} {scheme}'",
                    label = s.label,
                    scheme = s.scheme,
                    name = self.label,
                )
            })
            .collect();
        out.push_str("plot ");
        out.push_str(&clauses.join(", \\\n     "));
        out.push('\n');
        out
    }
}

/// Format a numeric label the way it appears in the CSV.
pub fn label(v: f64) -> String {
    v.to_string()
}
