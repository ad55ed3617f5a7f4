//! Deterministic synthetic repair instances shaped like the two corpus
//! families: reviewer comments on method bodies, and checker rule findings.
//!
//! Used for tests, smoke runs and fixture files; every generated instance is
//! valid and survives pruning.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, RepairInstance, Source};

/// Checker rule descriptions, in the order the per-rule report lists them.
pub const PD_RULES: [&str; 30] = [
    "Unnecessary return",
    "Empty statement",
    "Use isEmpty()",
    "Simplified to while loop",
    "Use existing BigDecimal instances",
    "Add default in switch",
    "Use String.indexOf(char)",
    "Convert primitives to Strings directly",
    "Literal first in comparison",
    "Compare boolean literal",
    "Use instanceof w/o null check",
    "Nested if",
    "Return boolean directly",
    "Make properties in enum final",
    "Use BigDecimal.valueOf()",
    "No instantiating Boolean object",
    "DateFormatter is not thread safe",
    "No instantiating String object",
    "Use equals instead of \"==\"",
    "Append literal to String directly",
    "Make final fields static",
    "Inefficient String Buffer",
    "Remove unused variables",
    "Use String.equalsIgnoreCase()",
    "Use StringUtils.isBlank()",
    "Use separate catch clause",
    "Return value w/o storing",
    "Use \"==\" to check null",
    "Remove unused imports",
    "Catch exception when parsing double",
];

const VARS: &[&str] = &[
    "value", "count", "key", "result", "item", "name", "total", "index", "buffer", "entry", "config", "session", "user",
    "order", "price", "amount", "label", "token", "path", "status",
];
const METHODS: &[&str] = &[
    "process", "handle", "compute", "update", "resolve", "build", "load", "check", "apply", "render", "validate",
    "refresh", "collect", "format", "merge",
];
const CLASSES: &[&str] = &["Order", "User", "Invoice", "Session", "Payment", "Account", "Report", "Ticket", "Widget"];
const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "ready", "error", "done", "open", "closed", "ok"];

/// One generated defect before it is laid out as an instance.
struct Case {
    before: Vec<String>,
    bug: Vec<String>,
    fix: Vec<String>,
    after: Vec<String>,
    comment: String,
}

struct Names {
    a: &'static str,
    b: &'static str,
    m: &'static str,
    m2: &'static str,
    class: &'static str,
    word: &'static str,
    word2: &'static str,
    n: u32,
    ind: &'static str,
}

impl Names {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let a = *VARS.choose(rng).expect("non-empty");
        let mut b = *VARS.choose(rng).expect("non-empty");
        while b == a {
            b = VARS.choose(rng).expect("non-empty");
        }
        let m = *METHODS.choose(rng).expect("non-empty");
        let mut m2 = *METHODS.choose(rng).expect("non-empty");
        while m2 == m {
            m2 = METHODS.choose(rng).expect("non-empty");
        }
        let word = *WORDS.choose(rng).expect("non-empty");
        let mut word2 = *WORDS.choose(rng).expect("non-empty");
        while word2 == word {
            word2 = WORDS.choose(rng).expect("non-empty");
        }
        Names {
            a,
            b,
            m,
            m2,
            class: CLASSES.choose(rng).expect("non-empty"),
            word,
            word2,
            n: rng.random_range(2..500),
            ind: if rng.random_bool(0.5) { "  " } else { "    " },
        }
    }
}

fn lines(ind: &str, depth: usize, src: &[&str]) -> Vec<String> {
    src.iter().map(|l| format!("{}{}", ind.repeat(depth), l)).collect()
}

/// A method wrapper: signature, shared body lines, defect, shared tail.
fn method(n: &Names, sig: &str, pre: &[&str], bug: &[&str], fix: &[&str], post: &[&str], comment: String) -> Case {
    let mut before = vec![format!("{sig} {{")];
    before.extend(lines(n.ind, 1, pre));
    let mut after = lines(n.ind, 1, post);
    after.push("}".into());
    Case { before, bug: lines(n.ind, 1, bug), fix: lines(n.ind, 1, fix), after, comment }
}

fn pd_case(rule: usize, n: &Names) -> Case {
    let (a, b, m, m2, c, w, w2, k) = (n.a, n.b, n.m, n.m2, n.class, n.word, n.word2, n.n);
    let comment = PD_RULES[rule].to_string();
    match rule {
        0 => method(n, &format!("public void {m}({c} {a})"), &[&format!("{a}.{m2}();")], &["return;"], &[], &[], comment),
        1 => method(
            n,
            &format!("public void {m}()"),
            &[&format!("int {a} = {k};")],
            &[&format!("{m2}({a});;")],
            &[&format!("{m2}({a});")],
            &[],
            comment,
        ),
        2 => method(
            n,
            &format!("public boolean {m}(List<{c}> {a})"),
            &[],
            &[&format!("if ({a}.size() == 0) {{")],
            &[&format!("if ({a}.isEmpty()) {{")],
            &["  return false;", "}", "return true;"],
            comment,
        ),
        3 => method(
            n,
            &format!("public void {m}(Iterator<{c}> {a})"),
            &[],
            &[&format!("for (; {a}.hasNext(); ) {{")],
            &[&format!("while ({a}.hasNext()) {{")],
            &[&format!("  {m2}({a}.next());"), "}"],
            comment,
        ),
        4 => method(
            n,
            &format!("public BigDecimal {m}()"),
            &[],
            &[&format!("BigDecimal {a} = new BigDecimal(0);")],
            &[&format!("BigDecimal {a} = BigDecimal.ZERO;")],
            &[&format!("return {a}.add({b});")],
            comment,
        ),
        5 => method(
            n,
            &format!("public String {m}(int {a})"),
            &[&format!("switch ({a}) {{"), &format!("  case {k}:"), &format!("    return \"{w}\";")],
            &["}"],
            &["  default:", "    break;", "}"],
            &["return null;"],
            comment,
        ),
        6 => method(
            n,
            &format!("public int {m}(String {a})"),
            &[],
            &[&format!("return {a}.indexOf(\"{}\");", &w[..1])],
            &[&format!("return {a}.indexOf('{}');", &w[..1])],
            &[],
            comment,
        ),
        7 => method(
            n,
            &format!("public String {m}(int {a})"),
            &[],
            &[&format!("return new Integer({a}).toString();")],
            &[&format!("return Integer.toString({a});")],
            &[],
            comment,
        ),
        8 => method(
            n,
            &format!("public boolean {m}(String {a})"),
            &[],
            &[&format!("return {a}.equals(\"{w}\");")],
            &[&format!("return \"{w}\".equals({a});")],
            &[],
            comment,
        ),
        9 => method(
            n,
            &format!("public void {m}(boolean {a})"),
            &[],
            &[&format!("if ({a} == true) {{")],
            &[&format!("if ({a}) {{")],
            &[&format!("  {m2}();"), "}"],
            comment,
        ),
        10 => method(
            n,
            &format!("public boolean {m}(Object {a})"),
            &[],
            &[&format!("return {a} != null && {a} instanceof {c};")],
            &[&format!("return {a} instanceof {c};")],
            &[],
            comment,
        ),
        11 => method(
            n,
            &format!("public void {m}(boolean {a}, boolean {b})"),
            &[],
            &[&format!("if ({a}) {{"), &format!("  if ({b}) {{"), &format!("    {m2}();"), "  }", "}"],
            &[&format!("if ({a} && {b}) {{"), &format!("  {m2}();"), "}"],
            &[],
            comment,
        ),
        12 => method(
            n,
            &format!("public boolean {m}(int {a})"),
            &[],
            &[&format!("if ({a} > {k}) {{"), "  return true;", "} else {", "  return false;", "}"],
            &[&format!("return {a} > {k};")],
            &[],
            comment,
        ),
        13 => Case {
            before: vec![format!("public enum {c}Kind {{"), format!("{}{}({k});", n.ind, w.to_uppercase())],
            bug: lines(n.ind, 1, &[&format!("private int {a};")]),
            fix: lines(n.ind, 1, &[&format!("private final int {a};")]),
            after: {
                let mut v = lines(n.ind, 1, &[&format!("{c}Kind(int {a}) {{"), &format!("  this.{a} = {a};"), "}"]);
                v.push("}".into());
                v
            },
            comment,
        },
        14 => method(
            n,
            &format!("public BigDecimal {m}()"),
            &[],
            &[&format!("return new BigDecimal({k}.5);")],
            &[&format!("return BigDecimal.valueOf({k}.5);")],
            &[],
            comment,
        ),
        15 => method(
            n,
            &format!("public Boolean {m}()"),
            &[],
            &[&format!("Boolean {a} = new Boolean(true);")],
            &[&format!("Boolean {a} = Boolean.TRUE;")],
            &[&format!("return {a};")],
            comment,
        ),
        16 => method(
            n,
            &format!("public Date {m}(String {a}) throws ParseException"),
            &[],
            &[&format!("return DATE_FORMAT.parse({a});")],
            &["synchronized (DATE_FORMAT) {", &format!("  return DATE_FORMAT.parse({a});"), "}"],
            &[],
            comment,
        ),
        17 => method(
            n,
            &format!("public String {m}()"),
            &[],
            &[&format!("String {a} = new String(\"{w}\");")],
            &[&format!("String {a} = \"{w}\";")],
            &[&format!("return {a};")],
            comment,
        ),
        18 => method(
            n,
            &format!("public boolean {m}(String {a}, String {b})"),
            &[],
            &[&format!("return {a} == {b};")],
            &[&format!("return {a}.equals({b});")],
            &[],
            comment,
        ),
        19 => method(
            n,
            &format!("public String {m}(StringBuilder {a})"),
            &[],
            &[&format!("{a}.append(\"{w}\");"), &format!("{a}.append(\"{w2}\");")],
            &[&format!("{a}.append(\"{w}{w2}\");")],
            &[&format!("return {a}.toString();")],
            comment,
        ),
        20 => Case {
            before: vec![format!("public class {c}Limits {{")],
            bug: lines(n.ind, 1, &[&format!("private final int {} = {k};", a.to_uppercase())]),
            fix: lines(n.ind, 1, &[&format!("private static final int {} = {k};", a.to_uppercase())]),
            after: {
                let mut v = lines(n.ind, 1, &[&format!("public int {m}() {{"), &format!("  return {};", a.to_uppercase()), "}"]);
                v.push("}".into());
                v
            },
            comment,
        },
        21 => method(
            n,
            &format!("public void {m}(StringBuffer {a}, String {b})"),
            &[],
            &[&format!("{a}.append(\"{w}\" + {b});")],
            &[&format!("{a}.append(\"{w}\").append({b});")],
            &[],
            comment,
        ),
        22 => method(
            n,
            &format!("public int {m}(int {a})"),
            &[],
            &[&format!("int {b} = {k};")],
            &[],
            &[&format!("return {a} * 2;")],
            comment,
        ),
        23 => method(
            n,
            &format!("public boolean {m}(String {a}, String {b})"),
            &[],
            &[&format!("return {a}.toLowerCase().equals({b}.toLowerCase());")],
            &[&format!("return {a}.equalsIgnoreCase({b});")],
            &[],
            comment,
        ),
        24 => method(
            n,
            &format!("public void {m}(String {a})"),
            &[],
            &[&format!("if ({a} == null || {a}.trim().length() == 0) {{")],
            &[&format!("if (StringUtils.isBlank({a})) {{")],
            &["  return;", "}", &format!("{m2}({a});")],
            comment,
        ),
        25 => method(
            n,
            &format!("public void {m}()"),
            &["try {", &format!("  {m2}();")],
            &["} catch (Exception e) {", "  LOG.warn(\"failed\", e);", "}"],
            &[
                "} catch (IOException e) {",
                "  LOG.warn(\"failed\", e);",
                "} catch (RuntimeException e) {",
                "  LOG.warn(\"failed\", e);",
                "}",
            ],
            &[],
            comment,
        ),
        26 => method(
            n,
            &format!("public int {m}(int {a})"),
            &[],
            &[&format!("int {b} = {m2}({a});"), &format!("return {b};")],
            &[&format!("return {m2}({a});")],
            &[],
            comment,
        ),
        27 => method(
            n,
            &format!("public boolean {m}({c} {a})"),
            &[],
            &[&format!("return {a}.equals(null);")],
            &[&format!("return {a} == null;")],
            &[],
            comment,
        ),
        28 => Case {
            before: vec!["import java.util.ArrayList;".into()],
            bug: vec!["import java.util.Map;".into()],
            fix: vec![],
            after: vec![
                "import java.util.List;".into(),
                String::new(),
                format!("public class {c}Store {{"),
                format!("{}private final List<{c}> {a} = new ArrayList<>();", n.ind),
                "}".into(),
            ],
            comment,
        },
        _ => method(
            n,
            &format!("public double {m}(String {a})"),
            &[],
            &[&format!("return Double.parseDouble({a});")],
            &[
                "try {",
                &format!("  return Double.parseDouble({a});"),
                "} catch (NumberFormatException e) {",
                "  return 0.0;",
                "}",
            ],
            &[],
            comment,
        ),
    }
}

const RD_TEMPLATES: usize = 12;

fn rd_case(template: usize, n: &Names) -> Case {
    let (a, b, m, m2, c, w, k) = (n.a, n.b, n.m, n.m2, n.class, n.word, n.n);
    match template {
        0 => method(
            n,
            &format!("public static Integer get(String {a})"),
            &[],
            &[],
            &[&format!("if ({a} == null) {{"), "  return R.drawable.acc_none;", "}"],
            &[&format!("return MAP.get({a});")],
            format!("Can this {a} ever get null?"),
        ),
        1 => method(
            n,
            &format!("public int {m}(String {a})"),
            &[&format!("if ({a}.isEmpty()) {{")],
            &["  throw new RuntimeException(\"Error parsing period\");"],
            &["  return TYPE_ERROR;"],
            &["}", &format!("return {a}.length();")],
            "Throwing here crashes the caller; return TYPE_ERROR instead.".into(),
        ),
        2 => method(
            n,
            &format!("public long {m}(long {a})"),
            &[],
            &[&format!("return {a} * {k};")],
            &[&format!("return {a} * {}_FACTOR;", w.to_uppercase())],
            &[],
            format!("Please use the {}_FACTOR constant instead of a magic number.", w.to_uppercase()),
        ),
        3 => method(
            n,
            &format!("public void {m}({c} {a})"),
            &[&format!("{a}.{m2}();")],
            &[&format!("System.out.println(\"{w}\");")],
            &[&format!("LOG.debug(\"{w}\");")],
            &[],
            "Don't print to stdout, use the logger.".into(),
        ),
        4 => method(
            n,
            &format!("public Object {m}(String {a})"),
            &["synchronized (LOCK) {"],
            &[&format!("  return CACHE.get({a});")],
            &[&format!("  return CACHE.getOrDefault({a}, DEFAULT);")],
            &["}"],
            "This can return null for unknown keys; fall back to DEFAULT.".into(),
        ),
        5 => method(
            n,
            &format!("public void {m}(List<{c}> {a})"),
            &[&format!("for ({c} {b} : {a}) {{")],
            &[&format!("  {b}.{m2}();")],
            &[&format!("  if ({b} != null) {{"), &format!("    {b}.{m2}();"), "  }"],
            &["}"],
            format!("Entries in {a} may be null here, please guard."),
        ),
        6 => method(
            n,
            &format!("public void {m}(InputStream {a}) throws IOException"),
            &[],
            &[&format!("{m2}({a});")],
            &["try {", &format!("  {m2}({a});"), "} finally {", &format!("  {a}.close();"), "}"],
            &[],
            "The stream is never closed when an exception is thrown.".into(),
        ),
        7 => method(
            n,
            &format!("private void {m}()"),
            &[&format!("if ({a} != null && {b} != null")],
            &[&format!("    && !{a}.isZero()) {{")],
            &[&format!("    && !{a}.isZero() && !{b}.isEmpty()) {{")],
            &[&format!("  {a} = {a}.plus({b});"), "}"],
            format!("Also skip when {b} is empty."),
        ),
        8 => method(
            n,
            &format!("public int {m}(int[] {a})"),
            &[&format!("int {b} = 0;")],
            &[&format!("for (int i = 0; i <= {a}.length; i++) {{")],
            &[&format!("for (int i = 0; i < {a}.length; i++) {{")],
            &[&format!("  {b} += {a}[i];"), "}", &format!("return {b};")],
            "Off by one: this reads past the end of the array.".into(),
        ),
        9 => method(
            n,
            &format!("public String {m}({c} {a})"),
            &[],
            &[&format!("return {a}.getName() + \":\" + {a}.getId();")],
            &[&format!("return String.format(\"%s:%d\", {a}.getName(), {a}.getId());")],
            &[],
            "Nit: String.format reads better here.".into(),
        ),
        10 => method(
            n,
            &format!("public {c} {m}(long {a})"),
            &[&format!("{c} {b} = REPO.find({a});")],
            &[&format!("return {b};")],
            &[&format!("return Optional.ofNullable({b}).orElseThrow(() -> new NotFoundException({a}));")],
            &[],
            format!("Callers don't expect null, throw NotFoundException when the {c} is missing."),
        ),
        _ => method(
            n,
            &format!("public void {m}(Map<String, {c}> {a})"),
            &[],
            &[&format!("{a}.put(\"{w}\", {b});")],
            &[&format!("{a}.putIfAbsent(\"{w}\", {b});")],
            &[&format!("{m2}({a});")],
            format!("This overwrites an existing {w} entry, use putIfAbsent?"),
        ),
    }
}

fn layout(id: String, source: Source, rule_id: Option<String>, case: Case) -> RepairInstance {
    let Case { before, bug, fix, after, comment } = case;
    let fix_start = before.len();
    let fix_end = fix_start + bug.len();
    let buggy: Vec<&String> = before.iter().chain(&bug).chain(&after).collect();
    let fixed: Vec<&String> = before.iter().chain(&fix).chain(&after).collect();
    let join = |v: Vec<&String>| v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n");
    let buggy_code = join(buggy);
    let line_total = buggy_code.lines().count();
    RepairInstance {
        id,
        source,
        rule_id,
        language: "java".into(),
        buggy_code,
        fixed_code: join(fixed),
        comment,
        defect_line: Some(fix_start.min(line_total - 1)),
        fix_start,
        fix_end,
    }
}

/// One instance; `index` picks the template round-robin and names the id.
pub fn instance(source: Source, index: usize, rng: &mut ChaCha8Rng) -> RepairInstance {
    let names = Names::draw(rng);
    match source {
        Source::PD => {
            let rule = index % PD_RULES.len();
            layout(format!("pd-{index:06}"), source, Some(PD_RULES[rule].to_string()), pd_case(rule, &names))
        }
        Source::RD => layout(format!("rd-{index:06}"), source, None, rd_case(index % RD_TEMPLATES, &names)),
    }
}

pub fn generate(source: Source, count: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..count).map(|i| instance(source, i, &mut rng)).collect();
    Corpus::new(source.to_string(), instances)
}

/// Instances of a single checker rule.
pub fn generate_rule(rule: usize, count: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..count)
        .map(|i| {
            let names = Names::draw(&mut rng);
            let id = format!("pd-r{rule:02}-{i:06}");
            layout(id, Source::PD, Some(PD_RULES[rule].to_string()), pd_case(rule, &names))
        })
        .collect();
    Corpus::new("PD", instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codenorm::normalize;
    use crate::corpus::{prune, PruneConfig};

    #[test]
    fn every_template_is_valid_parseable_and_survives_pruning() {
        for source in [Source::RD, Source::PD] {
            let corpus = generate(source, 120, 11);
            for inst in &corpus.instances {
                assert_eq!(inst.violation(), None, "{}", inst.id);
                assert!(normalize(&inst.buggy_code).parse_ok, "{}:\n{}", inst.id, inst.buggy_code);
                assert!(normalize(&inst.fixed_code).parse_ok, "{}:\n{}", inst.id, inst.fixed_code);
            }
            let (kept, report) = prune(&corpus, &PruneConfig::default());
            assert_eq!(kept.len(), corpus.len(), "{:?}", report.dropped_ids);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(Source::PD, 40, 3), generate(Source::PD, 40, 3));
        assert_ne!(generate(Source::PD, 40, 3), generate(Source::PD, 40, 4));
    }

    #[test]
    fn pd_covers_all_rules() {
        let c = generate(Source::PD, 60, 1);
        let rules: std::collections::HashSet<_> = c.instances.iter().filter_map(|i| i.rule_id.clone()).collect();
        assert_eq!(rules.len(), 30);
    }
}
