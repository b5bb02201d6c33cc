use diffeolab::dsl::ast::Item;
use diffeolab::dsl::{self, emit_document, parse, run_document, Document, RunConfig};
use diffeolab::error::Error;

fn without_lines(doc: &Document) -> Document {
    let mut d = doc.clone();
    for item in &mut d.items {
        if let Item::Run(c) = item {
            c.line = 0;
        }
    }
    d
}

#[test]
fn shipped_document_matches_its_golden_report() {
    let doc = parse(dsl::PAPER_DOCUMENT).unwrap();
    let report = run_document(&doc, &RunConfig::default());
    assert_eq!(report.mismatches(), 0, "{}", report.to_text());
    assert_eq!(report.to_json() + "\n", dsl::PAPER_GOLDEN);
}

#[test]
fn shipped_document_survives_a_round_trip() {
    let doc = parse(dsl::PAPER_DOCUMENT).unwrap();
    let again = parse(&emit_document(&doc)).unwrap();
    assert_eq!(without_lines(&doc), without_lines(&again));
    assert_eq!(emit_document(&again), emit_document(&doc));
}

#[test]
fn empty_document_gives_an_empty_report() {
    let report = run_document(&parse("").unwrap(), &RunConfig::default());
    assert_eq!(report.to_json(), "[]");
    assert_eq!(report.to_text(), "");
    assert_eq!(report.mismatches(), 0);
}

#[test]
fn dual_entry_has_the_documented_shape() {
    let doc = parse("space V = generated(3; (abs(x1)*0, 0, abs(x1)))\ndual V").unwrap();
    let json = run_document(&doc, &RunConfig::default()).to_json();
    let compact: String = json.chars().filter(|c| !c.is_whitespace()).collect();
    assert_eq!(
        compact,
        r#"[{"command":"dual","object":"V","status":"ok","dimension":2,"basis":[["1","0","0"],["0","1","0"]]}]"#
    );
}

#[test]
fn nonexistence_entry_names_the_obstruction() {
    let doc = parse("bundle N = generated(4, 2; (x1, x2, 0, x2*abs(y1)))\nfind_metric N").unwrap();
    let report = run_document(&doc, &RunConfig::default());
    let e = &report.entries[0];
    assert_eq!(e.status, "not_exists");
    assert_eq!(e.reason.as_deref(), Some("coefficients b,c forced to 0; rank 1 < required 2 on stratum x2=0"));
}

#[test]
fn unknown_membership_carries_a_reason() {
    let doc = parse("space H = generated(2; (0, abs(x1)))\nmember H (0, x1^3*abs(x1))").unwrap();
    let report = run_document(&doc, &RunConfig::default());
    let e = &report.entries[0];
    assert_eq!(e.status, "unknown");
    assert!(e.reason.as_deref().is_some_and(|r| !r.is_empty()));
    assert!(e.to_owned().as_expected());
}

#[test]
fn expectations_drive_the_mismatch_count() {
    let text = "space V = standard(2)\ndual V expect ok dimension 2\ndual V expect ok dimension 1\ndual V expect coarse\n";
    let report = run_document(&parse(text).unwrap(), &RunConfig::default());
    assert_eq!(report.mismatches(), 2);
    assert!(report.to_text().contains("MISMATCH at line 3"));
}

#[test]
fn module_errors_become_error_entries() {
    let text = "bundle B = standard(3, 1)\nfibre B at (1, 2)\nfibre B at (1, 2) expect error\n";
    let report = run_document(&parse(text).unwrap(), &RunConfig::default());
    assert_eq!(report.entries[0].status, "error");
    assert!(report.entries[0].reason.as_deref().unwrap().contains("base has dimension 1"));
    assert_eq!(report.mismatches(), 1);
}

#[test]
fn degree_bound_reaches_the_search() {
    // The delta section needs no polynomial part, so degree 0 still finds it.
    let doc = parse("bundle B = generated(2, 1; (x1, abs(x1)*abs(y1)))\nfind_metric B expect exists").unwrap();
    assert_eq!(run_document(&doc, &RunConfig { degree: 0 }).mismatches(), 0);
}

#[test]
fn break_locus_is_reported_at_the_abs() {
    let e = parse("space V = standard(1)\nmember V (abs(x1*x1))").unwrap_err();
    assert!(matches!(e, Error::ParseBreakLocus { line: 2, column: 11, .. }), "{e:?}");
}

#[test]
fn parse_errors_point_inside_the_offending_token() {
    let cases = [
        ("space V = standrd(2)", "standrd"),
        ("space V = standard(2)\ndual W", "W"),
        ("space V = standard(2) extra", "extra"),
        ("bundle B = generated(2, 1; (x1, abs(x1)*abs(z1)))", "z1"),
        ("space V = standard(2)\nmember V (x1 @ 2)", "@"),
    ];
    for (text, token) in cases {
        let Err(Error::Parse { line, column, .. }) = parse(text) else { panic!("{text} should not parse") };
        let src = text.lines().nth(line - 1).unwrap();
        assert!(src[column - 1..].starts_with(token), "{text}: {line}:{column}");
    }
}
