use std::fmt::Write;

use dendeg::boundrules::roster::RuleSpec;
use dendeg::boundrules::{BoundResult, CertificateReport, FactValue, Request, RuleError};
use dendeg::localsolve::LocalCertificate;
use dendeg::rootnumber::ParityTwist;
use serde_json::{json, Value};

use crate::cache::Origin;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Text,
    Json,
    Pretty,
}

/// A rendered result in both forms, plus the exit code.
pub struct Output {
    json: Value,
    text: String,
    pub code: u8,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, code: 0 }
    }

    pub fn emit(&self, style: Style) {
        match style {
            Style::Text => print!("{}", self.text),
            _ => println!("{}", render_json(&self.json, style)),
        }
    }
}

pub fn render_json(v: &Value, style: Style) -> String {
    if style == Style::Pretty {
        serde_json::to_string_pretty(v).expect("serializable")
    } else {
        serde_json::to_string(v).expect("serializable")
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn bound_json(op: &str, r: &BoundResult) -> Value {
    json!({
        "op": op,
        "window": r.window,
        "summary": {
            "lower": r.lower.window_summary(r.window),
            "upper": r.upper.window_summary(r.window),
            "exact": r.exact,
        },
        "result": r,
    })
}

fn fact_text(v: &FactValue) -> String {
    match v {
        FactValue::Bool(b) => b.to_string(),
        FactValue::Int(n) => n.to_string(),
        FactValue::Rat(s) => s.clone(),
    }
}

fn bound_text(op: &str, r: &BoundResult) -> String {
    let w = r.window;
    let mut s = String::new();
    let _ = writeln!(s, "{op} on [1, {w}]");
    let _ = writeln!(s, "  lower  {}", r.lower.window_summary(w));
    let _ = writeln!(s, "  upper  {}", r.upper.window_summary(w));
    let _ = writeln!(s, "  exact on window: {}", yes(r.exact));
    let tags: Vec<&str> = r.assumptions.iter().map(|a| a.tag()).collect();
    let _ = writeln!(s, "  assumptions: {}", if tags.is_empty() { "none".to_string() } else { tags.join(", ") });
    if let Some(e) = &r.effective_index {
        let bound = e.e().map(|b| format!(", eff-ind <= {b}")).unwrap_or_default();
        let _ = writeln!(s, "  index {}{bound}", e.index);
    }
    for (name, c) in &r.components {
        let _ = writeln!(
            s,
            "  component {name}: lower {} / upper {}",
            c.lower.window_summary(w),
            c.upper.window_summary(w)
        );
    }
    let _ = writeln!(s, "trace:");
    for t in &r.trace {
        let _ = writeln!(s, "  {} [{}]", t.rule, t.roles.join(", "));
        let _ = writeln!(s, "    {}", t.anchor);
        let facts: Vec<String> = t.facts.iter().map(|(k, v)| format!("{k}={}", fact_text(&v.value))).collect();
        if !facts.is_empty() {
            let _ = writeln!(s, "    facts: {}", facts.join(", "));
        }
        if !t.assumptions.is_empty() {
            let tags: Vec<&str> = t.assumptions.iter().map(|a| a.tag()).collect();
            let _ = writeln!(s, "    assumes: {}", tags.join(", "));
        }
        if let Some(l) = &t.lower {
            let _ = writeln!(s, "    lower += {l}");
        }
        if let Some(u) = &t.upper {
            let _ = writeln!(s, "    upper within {u}");
        }
        if let Some(n) = &t.note {
            let _ = writeln!(s, "    note: {n}");
        }
        if let Some(n) = &t.review {
            let _ = writeln!(s, "    review: {n}");
        }
    }
    s
}

pub fn bound(op: &str, r: &BoundResult) -> Output {
    Output::ok(bound_json(op, r), bound_text(op, r))
}

pub fn batch(requests: &[Request], results: &[Result<BoundResult, RuleError>]) -> Output {
    let mut code = 0;
    let mut text = String::new();
    let mut items = Vec::new();
    for (i, (req, res)) in requests.iter().zip(results).enumerate() {
        let op = req.query.op();
        match res {
            Ok(r) => {
                items.push(json!({ "index": i, "ok": bound_json(op, r) }));
                let _ = writeln!(
                    text,
                    "#{i} {op}: lower {} / upper {}",
                    r.lower.window_summary(r.window),
                    r.upper.window_summary(r.window)
                );
            }
            Err(e) => {
                let kind = if e.is_needs_fact() { "needs-fact" } else { "error" };
                code = code.max(if e.is_needs_fact() { 2 } else { 1 });
                items.push(json!({ "index": i, "error": kind, "message": e.to_string() }));
                let _ = writeln!(text, "#{i} {op}: {e}");
            }
        }
    }
    Output { json: Value::Array(items), text, code }
}

pub fn local(summary: Value, cert: LocalCertificate) -> Output {
    let mut text = String::new();
    match &cert {
        LocalCertificate::QuadraticObstruction { p, fields, conclusion, .. } => {
            let _ = writeln!(
                text,
                "fields of degree <= 2 over Q_{p}: {}",
                serde_json::to_string(conclusion).unwrap().trim_matches('"')
            );
            for f in fields {
                let _ = writeln!(text, "  {}: C {}, D {}", field_name(&f.field), f.c.label(), f.d.label());
            }
        }
        LocalCertificate::DegreeDivisibility { p, degrees, .. } => {
            for d in degrees {
                let wild = if d.wild { " (wild extensions not searched)" } else { "" };
                let status = serde_json::to_string(&d.status).unwrap();
                let _ = writeln!(text, "degree {} over Q_{p}: {}{wild}", d.degree, status.trim_matches('"'));
                for f in &d.fields {
                    let _ = writeln!(text, "  {}: {}", field_name(&f.field), f.verdict.label());
                }
            }
        }
    }
    let mut json = summary;
    json["certificate"] = serde_json::to_value(&cert).expect("certificate serializes");
    Output::ok(json, text)
}

fn field_name(f: &dendeg::localsolve::LocalField) -> String {
    serde_json::to_string(f).expect("field serializes")
}

pub fn verified(ok: bool) -> Output {
    let text = if ok { "certificate accepted\n" } else { "certificate rejected\n" };
    Output { json: json!({ "verified": ok }), text: text.to_string(), code: if ok { 0 } else { 1 } }
}

pub fn twist(t: &ParityTwist) -> Output {
    let mut text = format!("d = {}\n", t.d);
    for (p, s) in &t.splitting {
        let _ = writeln!(text, "  {p}: {}", serde_json::to_string(s).unwrap().trim_matches('"'));
    }
    let _ = writeln!(text, "root numbers over Q(sqrt({})): {}, {}", t.d, t.root_numbers[0], t.root_numbers[1]);
    let _ = writeln!(text, "{}", t.assumption);
    Output::ok(serde_json::to_value(t).expect("twist serializes"), text)
}

pub fn certificate(r: &CertificateReport) -> Output {
    let mut text = format!("{}\n", if r.verified { "verified" } else { "not verified" });
    for c in &r.checks {
        let detail = c.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default();
        let _ = writeln!(text, "  [{}] {}{detail}", if c.passed { "ok" } else { "FAIL" }, c.name);
    }
    Output { json: serde_json::to_value(r).expect("report serializes"), text, code: if r.verified { 0 } else { 1 } }
}

pub fn fetched(curve: &Value, origin: Origin) -> Output {
    let text = format!("{}\n(from {})\n", serde_json::to_string_pretty(curve).expect("serializable"), origin.name());
    Output::ok(json!({ "source": origin.name(), "curve": curve }), text)
}

pub fn selftest(rows: Vec<(String, Vec<String>)>, unanchored: Vec<String>) -> Output {
    let mut text = String::new();
    let mut failed = 0;
    let mut items = Vec::new();
    for (name, mismatches) in &rows {
        if mismatches.is_empty() {
            let _ = writeln!(text, "ok    {name}");
        } else {
            failed += 1;
            let _ = writeln!(text, "FAIL  {name}: {}", mismatches.join("; "));
        }
        items.push(json!({ "case": name, "mismatches": mismatches }));
    }
    for u in &unanchored {
        let _ = writeln!(text, "FAIL  {u}");
    }
    let ok = failed == 0 && unanchored.is_empty();
    let _ = writeln!(text, "{} of {} cases passed", rows.len() - failed, rows.len());
    Output {
        json: json!({ "passed": ok, "cases": items, "unanchored": unanchored }),
        text,
        code: if ok { 0 } else { 1 },
    }
}

pub fn roster(rules: &[RuleSpec]) -> Output {
    let mut text = String::new();
    for r in rules {
        let tag = r.assumption.map(|a| format!(" [{}]", a.tag())).unwrap_or_default();
        let _ = writeln!(text, "{}{tag}\n    {}", r.id, r.anchor);
    }
    Output::ok(serde_json::to_value(rules).expect("roster serializes"), text)
}
