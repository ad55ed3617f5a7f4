use proptest::prelude::*;
use reviewfix::corpus::{RepairInstance, Source};
use reviewfix::prompt::{annotate_snippet, render_prompt, strip_inserted_lines, PromptKind, BUG_LOCATION, FIX_END, FIX_START};
use reviewfix::synth;

const INSTRUCTIONS: [(PromptKind, &str); 7] = [
    (PromptKind::P1, "Fix the following buggy code snippet. In your response, output the fixed code only."),
    (
        PromptKind::P2,
        "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line. In your response, output the fixed code only.",
    ),
    (PromptKind::P3, "Fix the following buggy code snippet."),
    (PromptKind::P4, "Fix the following buggy code snippet. [BUG_LOCATION] marks the bug location."),
    (PromptKind::P5, "Fix the following buggy code snippet. [FIX_START] and [FIX_END] mark the range of the patch."),
    (PromptKind::P6, "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line."),
    (
        PromptKind::P7,
        "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line. [FIX_START] and [FIX_END] mark the range of the patch.",
    ),
];

#[test]
fn instruction_strings_are_verbatim() {
    for (kind, text) in INSTRUCTIONS {
        assert_eq!(kind.instruction_text(), text);
        assert_eq!(reviewfix::prompt::instruction_text(kind), text);
    }
}

#[test]
fn flags_table() {
    use PromptKind::*;
    let comment: Vec<_> = PromptKind::ALL.into_iter().filter(|k| k.needs_comment()).collect();
    let defect: Vec<_> = PromptKind::ALL.into_iter().filter(|k| k.needs_defect_line()).collect();
    let range: Vec<_> = PromptKind::ALL.into_iter().filter(|k| k.needs_fix_range()).collect();
    assert_eq!(comment, [P2, P6, P7]);
    assert_eq!(defect, [P4]);
    assert_eq!(range, [P5, P7]);
}

fn code_line() -> impl Strategy<Value = String> {
    ("[ \t]{0,6}", prop::sample::select(vec!["a();", "int x = 1;", "}", "if (k == null) {", "", "return y;", "// c", "foo(bar)"]))
        .prop_map(|(i, b)| format!("{i}{b}"))
}

prop_compose! {
    fn instance()(
        lines in prop::collection::vec(code_line(), 1..12),
        trailing in any::<bool>(),
        crlf in any::<bool>(),
        a in any::<prop::sample::Index>(),
        b in any::<prop::sample::Index>(),
        d in any::<prop::sample::Index>(),
        has_defect in any::<bool>(),
        comment in "[a-z ?]{1,12}(\n[a-z ]{1,8}){0,2}",
    ) -> RepairInstance {
        let sep = if crlf { "\r\n" } else { "\n" };
        let mut code = lines.join(sep);
        if trailing {
            code.push_str(sep);
        }
        if code.lines().count() == 0 {
            code.insert_str(0, "a();");
        }
        let count = code.lines().count();
        let (x, y) = (a.index(count + 1), b.index(count + 1));
        RepairInstance {
            id: "p".into(),
            source: Source::RD,
            rule_id: None,
            language: "java".into(),
            buggy_code: code,
            fixed_code: "x();".into(),
            comment: format!("z{comment}"),
            defect_line: has_defect.then(|| d.index(count)),
            fix_start: x.min(y),
            fix_end: x.max(y),
        }
    }
}

fn is_subsequence(small: &[&str], big: &[&str]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

fn check(inst: &RepairInstance) -> Result<(), TestCaseError> {
    let p3 = annotate_snippet(inst, PromptKind::P3).unwrap();
    prop_assert_eq!(&p3, &inst.buggy_code);
    let p3_lines: Vec<&str> = p3.split('\n').collect();
    for kind in PromptKind::ALL {
        let Ok(s) = annotate_snippet(inst, kind) else {
            prop_assert!(kind == PromptKind::P4 && inst.defect_line.is_none());
            continue;
        };
        prop_assert_eq!(strip_inserted_lines(&s), inst.buggy_code.clone(), "{:?}", kind);
        let lines: Vec<&str> = s.split('\n').collect();
        prop_assert!(is_subsequence(&p3_lines, &lines));
        let count = |m: &str| lines.iter().filter(|l| l.trim() == m).count();
        prop_assert_eq!(count(BUG_LOCATION), usize::from(kind.needs_defect_line()));
        prop_assert_eq!(count(FIX_START), usize::from(kind.needs_fix_range()));
        prop_assert_eq!(count(FIX_END), usize::from(kind.needs_fix_range()));
        let comments = lines.iter().filter(|l| l.trim_start().starts_with("//<Comment> ")).count();
        prop_assert_eq!(comments, usize::from(kind.needs_comment()));
        if kind.needs_fix_range() {
            let s = lines.iter().position(|l| l.trim() == FIX_START).unwrap();
            let e = lines.iter().position(|l| l.trim() == FIX_END).unwrap();
            prop_assert!(s < e);
        }
        if let Some(d) = inst.defect_line.filter(|_| kind == PromptKind::P4) {
            let at = lines.iter().position(|l| l.trim() == BUG_LOCATION).unwrap();
            prop_assert_eq!(at, d);
        }
        let rendered = render_prompt(inst, kind).unwrap();
        prop_assert!(rendered.text.starts_with(kind.instruction_text()));
        prop_assert!(rendered.text.ends_with("\n<Fixed Code>\n"));
        prop_assert_eq!(rendered.marker_positions.len(), comments + count(BUG_LOCATION) + 2 * count(FIX_START));
        prop_assert_eq!(render_prompt(inst, kind).unwrap(), rendered);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn annotation_only_inserts_lines(inst in instance()) {
        check(&inst)?;
    }
}

#[test]
fn synthetic_corpora_hold_invariants() {
    for source in [Source::RD, Source::PD] {
        for inst in &synth::generate(source, 300, 5).instances {
            check(inst).unwrap();
        }
    }
}
