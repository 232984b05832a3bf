use std::fmt::Write as _;

use serde::Serialize;

use crate::sums::Variant;

use super::config::Format;

pub const CSV_HEADER: &str = "p,k,variant,nu,A,B,C,D,M,seed,sum_abs_oracle,sum_abs_collapsed,I,J,thm11,trivial,bilinear_equiv,incidence_bound,moment,moment_bound,uv_bound,ratio_thm11,ratio_trivial,chain_ok,bcd_le_p2,nontrivial_bcd,nontrivial_a,time_ms";

/// Outcome of one exact check on a row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// One `(instance, variant, nu)` line of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ReportRow {
    pub p: u64,
    pub k: u64,
    pub variant: Variant,
    pub nu: u32,
    pub A: usize,
    pub B: usize,
    pub C: usize,
    pub D: usize,
    pub M: usize,
    pub seed: u64,
    pub sum_abs_oracle: f64,
    pub sum_abs_collapsed: f64,
    pub I: u64,
    pub J: u64,
    pub thm11: f64,
    pub trivial: f64,
    /// `sqrt(p sum|alpha|^2 sum|W|^2)`: the bilinear bound applied to the collapsed form.
    pub bilinear_equiv: f64,
    pub incidence_bound: f64,
    pub moment: f64,
    pub moment_bound: f64,
    pub uv_bound: f64,
    pub ratio_thm11: f64,
    pub ratio_trivial: f64,
    pub chain_ok: bool,
    pub bcd_le_p2: bool,
    pub nontrivial_bcd: bool,
    pub nontrivial_a: bool,
    pub time_ms: f64,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

impl ReportRow {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// 17 significant digits, enough to round-trip binary64.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::with_capacity(256 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.k,
            r.variant,
            r.nu,
            r.A,
            r.B,
            r.C,
            r.D,
            r.M,
            r.seed,
            float(r.sum_abs_oracle),
            float(r.sum_abs_collapsed),
            r.I,
            r.J,
            float(r.thm11),
            float(r.trivial),
            float(r.bilinear_equiv),
            float(r.incidence_bound),
            float(r.moment),
            float(r.moment_bound),
            float(r.uv_bound),
            float(r.ratio_thm11),
            float(r.ratio_trivial),
            r.chain_ok,
            r.bcd_le_p2,
            r.nontrivial_bcd,
            r.nontrivial_a,
            float(r.time_ms),
        );
    }
    out
}

pub fn to_json(rows: &[ReportRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Renders rows; `None` for an empty report.
pub fn emit(rows: &[ReportRow], format: Format) -> Option<Vec<u8>> {
    if rows.is_empty() {
        return None;
    }
    Some(match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
    .into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            p: 101,
            k: 50,
            variant: Variant::S,
            nu: 1,
            A: 8,
            B: 8,
            C: 8,
            D: 8,
            M: 8,
            seed: 0,
            sum_abs_oracle: 0.1,
            sum_abs_collapsed: 0.1,
            I: 600,
            J: 610,
            thm11: 1.0 / 3.0,
            trivial: 2.0,
            bilinear_equiv: 3.0,
            incidence_bound: 4.0,
            moment: 5.0,
            moment_bound: 6.0,
            uv_bound: 7.0,
            ratio_thm11: 8.0,
            ratio_trivial: 9.0,
            chain_ok: true,
            bcd_le_p2: true,
            nontrivial_bcd: false,
            nontrivial_a: false,
            time_ms: 0.0,
            checks: vec![],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[row()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[2], "S");
        assert_eq!(fields[10], "1.0000000000000001e-1");
        assert_eq!(fields[14].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[23], "true");
    }

    #[test]
    fn json_mirrors_csv_columns() {
        let json: serde_json::Value = serde_json::from_str(&to_json(&[row()])).unwrap();
        let obj = json[0].as_object().unwrap();
        let keys: Vec<&str> = CSV_HEADER.split(',').collect();
        assert_eq!(obj.len(), keys.len());
        for k in keys {
            assert!(obj.contains_key(k), "missing {k}");
        }
        assert_eq!(obj["variant"], "S");
    }

    #[test]
    fn empty_report_emits_nothing() {
        assert!(emit(&[], Format::Csv).is_none());
        assert!(emit(&[row()], Format::Json).is_some());
    }
}
