//! Experiment reports and their deterministic on-disk formats.
//!
//! Every experiment emits one CSV (header, one row per member, footer summary
//! row) and one summary record (single JSON object with a fixed key order).
//! Floats print with 17 significant digits and a locale-independent decimal
//! point, so identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// 17-significant-digit, locale-independent float formatting.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct MemberRow {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub id: String,
    pub kind: String,
    /// Ordered parameter list, reproduced verbatim in the summary record.
    pub params: Vec<(String, String)>,
    pub rows: Vec<MemberRow>,
    /// Empirical constant: the largest member ratio.
    pub constant: f64,
    /// max ratio / min ratio across members.
    pub spread: f64,
    /// Fitted scaling slope and its half-width, when the experiment fits one.
    pub slope: Option<(f64, f64)>,
    /// Named pass/fail checks; the experiment passes iff all hold.
    pub checks: Vec<(String, bool)>,
    pub warnings: Vec<String>,
    pub runtime_s: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    /// Aggregates rows into (constant, spread); NaN-free inputs assumed.
    pub fn aggregate(rows: &[MemberRow]) -> (f64, f64) {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for r in rows {
            max = max.max(r.ratio);
            min = min.min(r.ratio);
        }
        if rows.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (max, max / min)
        }
    }

    /// CSV: header, one row per member, footer summary row.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("id,lhs,rhs,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.id,
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.ratio)
            ));
        }
        let verdict = if self.passed() { "pass" } else { "fail" };
        out.push_str(&format!(
            "summary,{},{},{}\n",
            fmt_f64(self.constant),
            fmt_f64(self.spread),
            verdict
        ));
        out
    }

    /// Summary record: one JSON object, fixed key order.
    pub fn summary_string(&self) -> String {
        let mut s = String::from("{\n");
        s.push_str(&format!("  \"experiment\": \"{}\",\n", self.id));
        s.push_str(&format!("  \"kind\": \"{}\",\n", self.kind));
        s.push_str("  \"params\": {");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("\"{k}\": \"{v}\""));
        }
        s.push_str("},\n");
        s.push_str(&format!("  \"members\": {},\n", self.rows.len()));
        s.push_str(&format!("  \"constant\": \"{}\",\n", fmt_f64(self.constant)));
        s.push_str(&format!("  \"spread\": \"{}\",\n", fmt_f64(self.spread)));
        match self.slope {
            Some((sl, hw)) => {
                s.push_str(&format!("  \"slope\": \"{}\",\n", fmt_f64(sl)));
                s.push_str(&format!("  \"slope_halfwidth\": \"{}\",\n", fmt_f64(hw)));
            }
            None => {
                s.push_str("  \"slope\": null,\n");
                s.push_str("  \"slope_halfwidth\": null,\n");
            }
        }
        s.push_str("  \"checks\": {");
        for (i, (k, v)) in self.checks.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("\"{k}\": {v}"));
        }
        s.push_str("},\n");
        s.push_str("  \"warnings\": [");
        for (i, w) in self.warnings.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("\"{w}\""));
        }
        s.push_str("],\n");
        s.push_str(&format!(
            "  \"verdict\": \"{}\",\n",
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        s.push_str(&format!("  \"runtime_s\": \"{:.3}\"\n", self.runtime_s));
        s.push('}');
        s.push('\n');
        s
    }

    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut csv = std::fs::File::create(dir.join(format!("{}.csv", self.id)))?;
        csv.write_all(self.csv_string().as_bytes())?;
        let mut summary = std::fs::File::create(dir.join(format!("{}.summary.json", self.id)))?;
        summary.write_all(self.summary_string().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(n: usize) -> ExperimentReport {
        let rows: Vec<MemberRow> = (0..n)
            .map(|i| MemberRow {
                id: format!("m-{i}"),
                lhs: 1.0 + i as f64,
                rhs: 2.0,
                ratio: (1.0 + i as f64) / 2.0,
            })
            .collect();
        let (constant, spread) = ExperimentReport::aggregate(&rows);
        ExperimentReport {
            id: "demo".into(),
            kind: "demo-kind".into(),
            params: vec![("q".into(), "2".into())],
            rows,
            constant,
            spread,
            slope: None,
            checks: vec![("stable".into(), true)],
            warnings: vec![],
            runtime_s: 0.0,
        }
    }

    #[test]
    fn csv_line_counts() {
        assert_eq!(report(0).csv_string().lines().count(), 2); // header + footer
        assert_eq!(report(3).csv_string().lines().count(), 5);
    }

    #[test]
    fn float_format_is_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        // roundtrip exactness
        let x = 0.1234567890123456789;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn summary_has_fixed_key_order() {
        let s = report(2).summary_string();
        let keys = ["experiment", "kind", "params", "members", "constant", "spread", "slope", "checks", "warnings", "verdict", "runtime_s"];
        let mut pos = 0;
        for k in keys {
            let p = s.find(&format!("\"{k}\"")).unwrap_or_else(|| panic!("missing key {k}"));
            assert!(p >= pos, "key {k} out of order");
            pos = p;
        }
    }
}
