//! Short human-readable summary of a report. Scalars are listed per
//! section; arrays and nested objects are left to the JSON.

use std::fmt::Write;

use serde_json::Value;

use super::AnalysisReport;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if !n.is_u64() && !n.is_i64() && x != 0.0 && x.abs() < 1e-3 => format!("{x:.3e}"),
            Some(x) if !n.is_u64() && !n.is_i64() => format!("{x:.4}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("n/a".into()),
        _ => None,
    }
}

fn table(s: &mut String, v: &Value, prefix: &str, depth: usize) {
    let Value::Object(map) = v else { return };
    for (k, v) in map {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match scalar(v) {
            Some(text) => writeln!(s, "| {key} | {} |", text.replace('|', "\\|")).unwrap(),
            None if depth > 0 && v.is_object() => table(s, v, &key, depth - 1),
            None => {}
        }
    }
}

pub fn render(report: &AnalysisReport) -> String {
    let mut s = String::new();
    writeln!(s, "# {} {}: {}\n", report.tool, report.version, report.command).unwrap();
    writeln!(s, "Random generator: {}\n", report.rng).unwrap();
    if !report.inputs.is_empty() {
        writeln!(s, "| input | sha256 | bytes |\n|---|---|---|").unwrap();
        for i in &report.inputs {
            writeln!(s, "| {} | `{}` | {} |", i.name, i.sha256, i.bytes).unwrap();
        }
        s.push('\n');
    }
    for (name, section) in &report.sections {
        writeln!(s, "## {name}\n\nOperation: `{}`\n", section.operation).unwrap();
        writeln!(s, "| quantity | value |\n|---|---|").unwrap();
        table(&mut s, &section.settings, "settings", 1);
        table(&mut s, &section.result, "", 2);
        s.push('\n');
    }
    if !report.skipped.is_empty() {
        writeln!(s, "## skipped\n").unwrap();
        for (name, reason) in &report.skipped {
            writeln!(s, "- {name}: {reason}").unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Section;
    use serde_json::json;

    #[test]
    fn lists_scalars() {
        let mut r = AnalysisReport::new("symmetry", json!({})).unwrap();
        r.insert(
            "symmetry",
            Section::new("symmetry_score", json!({"norm": "frobenius"}), json!({"s": 0.25, "ids": ["a"]})).unwrap(),
        );
        let md = render(&r);
        assert!(md.contains("| s | 0.2500 |"));
        assert!(md.contains("| settings.norm | frobenius |"));
        assert!(!md.contains("ids"));
    }
}
