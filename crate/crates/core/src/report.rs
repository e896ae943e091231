//! Report emission: CSV, JSON and plot-ready data with a fixed float
//! format, so identical experiments byte-reproduce their payloads.
//!
//! Formats (UTF-8, LF line endings):
//!   - CSV: header `N,re,im`, one row per checkpoint.
//!   - plotdata: two columns `log10_n value` separated by one space, where
//!     value is the real part of the series.
//!   - JSON: `{"config": <string>, "series": {<name>: [[N, re, im], ...]},
//!     "scalars": {<name>: <float>}, "metadata": {...}}`. Every float is
//!     rendered with 17 significant digits; the timestamp lives only in
//!     `metadata` so payload comparison can drop it.

use crate::averaging::ConvergenceReport;
use num_complex::Complex64;

/// Fixed 17-significant-digit rendering, the contract for every float in
/// CSV/JSON payloads.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One named series of checkpointed complex values.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(u64, Complex64)>,
}

impl Series {
    pub fn from_report(name: impl Into<String>, report: &ConvergenceReport) -> Self {
        Series { name: name.into(), points: report.points.clone() }
    }

    pub fn from_real_points(name: impl Into<String>, points: &[(u64, f64)]) -> Self {
        Series {
            name: name.into(),
            points: points.iter().map(|&(n, v)| (n, Complex64::new(v, 0.0))).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,re,im\n");
        for &(n, v) in &self.points {
            out.push_str(&format!("{n},{},{}\n", fmt_f64(v.re), fmt_f64(v.im)));
        }
        out
    }

    pub fn to_plotdata(&self) -> String {
        let mut out = String::new();
        for &(n, v) in &self.points {
            out.push_str(&format!("{} {}\n", fmt_f64((n as f64).log10()), fmt_f64(v.re)));
        }
        out
    }
}

/// Whole-experiment report: the verbatim config echo, any number of series
/// and scalar results, and regeneration metadata.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub config_text: String,
    pub series: Vec<Series>,
    pub scalars: Vec<(String, f64)>,
    pub metadata: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn push_series(&mut self, s: Series) {
        self.series.push(s);
    }

    pub fn push_scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.push((name.into(), value));
    }

    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    /// JSON with deterministic field order; `metadata` is the only
    /// non-reproducible part.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"config\": {},\n", json_string(&self.config_text)));
        out.push_str("  \"series\": {");
        for (i, s) in self.series.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n    {}: [", json_string(&s.name)));
            for (j, &(n, v)) in s.points.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("[{n},{},{}]", fmt_f64(v.re), fmt_f64(v.im)));
            }
            out.push(']');
        }
        out.push_str("\n  },\n");
        out.push_str("  \"scalars\": {");
        for (i, (k, v)) in self.scalars.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n    {}: {}", json_string(k), fmt_f64(*v)));
        }
        out.push_str("\n  },\n");
        out.push_str("  \"metadata\": {");
        for (i, (k, v)) in self.metadata.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\n    {}: {}", json_string(k), json_string(v)));
        }
        out.push_str("\n  }\n}\n");
        out
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(-1.0 / 3.0), "-3.3333333333333331e-1");
        let x: f64 = 0.123_456_789_012_345_68;
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits()); // 17 digits round-trip f64
    }

    #[test]
    fn csv_shape() {
        let s = Series {
            name: "t".into(),
            points: vec![(10, Complex64::new(0.5, 0.0)), (100, Complex64::new(-0.25, 1.0))],
        };
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "N,re,im");
        assert_eq!(lines.next().unwrap(), "10,5.0000000000000000e-1,0.0000000000000000e0");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_escapes_config_text() {
        let mut r = ExperimentReport {
            config_text: "kind = x\n# a \"quote\"\n".into(),
            ..Default::default()
        };
        r.push_scalar("value", 1.0);
        r.push_metadata("timestamp", "whenever");
        let j = r.to_json();
        assert!(j.contains("\\n"));
        assert!(j.contains("\\\"quote\\\""));
        assert!(j.contains("\"value\": 1.0000000000000000e0"));
    }
}
