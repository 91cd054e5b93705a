//! Text and CSV renderings of [`BoundReport`]s. JSON comes from serde.

use crate::bounds::{BoundReport, BoundaryRow, Tagged};

/// Version tag written in the first CSV column.
pub const CSV_SCHEMA: &str = "v1";

pub const BOUND_CSV_HEADER: [&str; 11] = [
    "schema",
    "regime",
    "log_q",
    "log_n",
    "dual",
    "log_lower_bound",
    "method",
    "asymptotic",
    "y_effective",
    "exact_delta",
    "notes",
];

pub const VERIFY_CSV_HEADER: [&str; 13] = [
    "schema",
    "q",
    "N",
    "family",
    "squarefree",
    "mode",
    "x",
    "ratio",
    "ceiling",
    "exact_delta",
    "log_lower_bound",
    "regime",
    "pass",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn bound_csv_record(r: &BoundReport) -> Vec<String> {
    vec![
        CSV_SCHEMA.to_string(),
        r.regime.to_string(),
        r.log_q.value.to_string(),
        r.log_n.value.to_string(),
        r.dual.to_string(),
        r.log_lower_bound.value.to_string(),
        r.log_lower_bound.method.to_string(),
        r.asymptotic.to_string(),
        opt(r.smoothness_claim.map(|c| c.y_effective.value)),
        opt(r.exact_delta.map(|t| t.value)),
        r.notes.join("; "),
    ]
}

/// One verify row; `family` and `squarefree` describe the resonator used.
pub fn verify_csv_record(r: &BoundReport, family: &str, squarefree: bool) -> Vec<String> {
    let ineq = r.inequality;
    vec![
        CSV_SCHEMA.to_string(),
        opt(r.q.map(|t| t.value)),
        opt(r.n.map(|t| t.value)),
        family.to_string(),
        squarefree.to_string(),
        ineq.map_or_else(String::new, |i| mode_name(i.mode).to_string()),
        opt(r.param("x")),
        opt(ineq.map(|i| i.ratio.value)),
        opt(ineq.map(|i| i.ceiling.value)),
        opt(r.exact_delta.map(|t| t.value)),
        r.log_lower_bound.value.to_string(),
        r.regime.to_string(),
        if ineq.map_or(false, |i| i.holds) { "pass" } else { "FAIL" }.to_string(),
    ]
}

pub fn mode_name(m: crate::characters::RatioMode) -> &'static str {
    use crate::characters::RatioMode::*;
    match m {
        FirstMoment => "first_moment",
        SecondMoment => "second_moment",
        DualFirst => "dual_first",
        DualSecond => "dual_second",
    }
}

/// Compact numeric rendering for text output.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let a = v.abs();
    if (1e-4..1e9).contains(&a) {
        let s = format!("{v:.9}");
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    } else {
        format!("{v:.9e}")
    }
}

fn tagged(t: &Tagged) -> String {
    format!("{} [{}]", fmt_num(t.value), t.method)
}

/// Left-aligned columns padded to the widest cell.
pub fn align(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut w = vec![0usize; ncol];
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            w[i] = w[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (i, c) in r.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(c);
            if i + 1 < r.len() {
                line.push_str(&" ".repeat(w[i] - c.chars().count()));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Field/value listing of one report.
pub fn text_report(r: &BoundReport) -> String {
    let mut rows: Vec<Vec<String>> = vec![vec!["regime".into(), r.regime.to_string()]];
    if let Some(q) = &r.q {
        rows.push(vec!["q".into(), tagged(q)]);
    }
    rows.push(vec!["log q".into(), tagged(&r.log_q)]);
    if let Some(n) = &r.n {
        rows.push(vec!["N".into(), tagged(n)]);
    }
    rows.push(vec!["log N".into(), tagged(&r.log_n)]);
    rows.push(vec!["dual".into(), r.dual.to_string()]);
    rows.push(vec!["log lower bound".into(), tagged(&r.log_lower_bound)]);
    rows.push(vec!["asymptotic".into(), r.asymptotic.to_string()]);
    if let Some(c) = &r.smoothness_claim {
        rows.push(vec!["y effective".into(), tagged(&c.y_effective)]);
    }
    if let Some(d) = &r.exact_delta {
        rows.push(vec!["exact Δ".into(), tagged(d)]);
    }
    if let Some(i) = &r.inequality {
        rows.push(vec!["ratio ≤ ceiling".into(), format!("{} ≤ {} : {}", fmt_num(i.ratio.value), fmt_num(i.ceiling.value), i.holds)]);
    }
    for (k, v) in &r.parameters {
        rows.push(vec![format!("  {k}"), tagged(v)]);
    }
    rows.push(vec!["form".into(), r.predicted_form.clone()]);
    for n in &r.notes {
        rows.push(vec!["note".into(), n.clone()]);
    }
    align(&rows)
}

/// One line per report.
pub fn text_table(reports: &[BoundReport]) -> String {
    let mut rows = vec![["regime", "log q", "log N", "dual", "log bound", "method", "y_eff", "exact Δ"].map(String::from).to_vec()];
    for r in reports {
        rows.push(vec![
            r.regime.to_string(),
            fmt_num(r.log_q.value),
            fmt_num(r.log_n.value),
            r.dual.to_string(),
            fmt_num(r.log_lower_bound.value),
            r.log_lower_bound.method.to_string(),
            r.smoothness_claim.map_or_else(|| "-".into(), |c| fmt_num(c.y_effective.value)),
            r.exact_delta.map_or_else(|| "-".into(), |d| fmt_num(d.value)),
        ]);
    }
    align(&rows)
}

pub fn boundary_text(rows: &[BoundaryRow]) -> String {
    let mut out = vec![["boundary", "log q", "log N", "left", "left bound", "right", "right bound", "exponent", "|Δb|/exp", "pass"]
        .map(String::from)
        .to_vec()];
    for r in rows {
        out.push(vec![
            r.boundary.clone(),
            fmt_num(r.log_q),
            fmt_num(r.log_n),
            r.left.to_string(),
            fmt_num(r.left_bound),
            r.right.to_string(),
            fmt_num(r.right_bound),
            fmt_num(r.exponent),
            fmt_num(r.ratio),
            r.pass.to_string(),
        ]);
    }
    align(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(fmt_num(1.5), "1.5");
        assert_eq!(fmt_num(1e12), "1.000000000e12");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn alignment() {
        let t = align(&[vec!["a".into(), "bb".into()], vec!["ccc".into(), "d".into()]]);
        assert_eq!(t, "a    bb\nccc  d\n");
    }

    #[test]
    fn bound_record_width() {
        let r = crate::bounds::bound_theorem3(1e6, 2000.0, false).unwrap();
        assert_eq!(bound_csv_record(&r).len(), BOUND_CSV_HEADER.len());
        assert!(text_report(&r).contains("THM3"));
    }
}
