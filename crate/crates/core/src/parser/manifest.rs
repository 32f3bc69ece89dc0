//! Line-oriented model manifests.
//!
//! ```text
//! [manifold]
//! name = "schwarzschild"
//! dim = 4
//! coords = ["t", "r", "theta", "phi"]
//! [constants]
//! M = free            # or a rational value, e.g. 1/2
//! [metric]
//! g[0][0] = "-(1 - 2*M/r)"
//! [potential]
//! phi[0] = "Q/r"
//! [scalars]
//! J = "1"
//! ```
//!
//! Only the upper triangle of the metric is required; a lower entry must agree
//! with its mirror.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{parse_expr, ParseError};
use crate::expr::{self, Bindings, Expr, Func, Rational, Value, PI};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    /// Constants in declaration order; `None` means free.
    pub constants: Vec<(String, Option<Rational>)>,
    /// Upper-triangle metric components, keyed `(i, j)` with `i <= j`.
    pub metric: BTreeMap<(usize, usize), Expr>,
    pub potential: BTreeMap<usize, Expr>,
    pub scalars: BTreeMap<String, Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManifestError {
    Parse(ParseError),
    Validation { line: Option<usize>, message: String },
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestError::Parse(e) => write!(f, "parse error at {e}"),
            ManifestError::Validation { line: Some(l), message } => {
                write!(f, "invalid manifest (line {l}): {message}")
            }
            ManifestError::Validation { line: None, message } => write!(f, "invalid manifest: {message}"),
        }
    }
}

impl std::error::Error for ManifestError {}

impl From<ParseError> for ManifestError {
    fn from(e: ParseError) -> ManifestError {
        ManifestError::Parse(e)
    }
}

fn invalid(line: usize, message: impl Into<String>) -> ManifestError {
    ManifestError::Validation { line: Some(line), message: message.into() }
}

fn syntax(line: usize, offset: usize, expected: &[&str], found: impl Into<String>) -> ManifestError {
    ManifestError::Parse(ParseError {
        offset,
        line: Some(line),
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Manifold,
    Constants,
    Metric,
    Potential,
    Scalars,
}

/// One `key = value` line after comment stripping.
struct Entry<'a> {
    line: usize,
    /// Byte offset of the line start within the manifest.
    base: usize,
    key: &'a str,
    value: &'a str,
    /// Byte offset of `value` within the line.
    value_at: usize,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn reserved(s: &str) -> bool {
    s == PI || s == "sqrt" || Func::from_name(s).is_some()
}

impl Entry<'_> {
    fn string(&self) -> Result<&str, ManifestError> {
        let v = self.value;
        if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') && !v[1..v.len() - 1].contains('"') {
            Ok(&v[1..v.len() - 1])
        } else {
            Err(syntax(self.line, self.base + self.value_at, &["quoted string"], format!("`{v}`")))
        }
    }

    fn expr(&self) -> Result<Expr, ManifestError> {
        let s = self.string()?;
        parse_expr(s).map_err(|mut e| {
            e.offset += self.base + self.value_at + 1;
            e.line = Some(self.line);
            ManifestError::Parse(e)
        })
    }

    fn integer(&self) -> Result<usize, ManifestError> {
        self.value
            .parse()
            .map_err(|_| syntax(self.line, self.base + self.value_at, &["non-negative integer"], format!("`{}`", self.value)))
    }

    fn string_list(&self) -> Result<Vec<String>, ManifestError> {
        let v = self.value;
        let at = self.base + self.value_at;
        if !(v.starts_with('[') && v.ends_with(']')) {
            return Err(syntax(self.line, at, &["list of quoted strings"], format!("`{v}`")));
        }
        let inner = v[1..v.len() - 1].trim();
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for item in inner.split(',') {
            let item = item.trim();
            if item.len() >= 2 && item.starts_with('"') && item.ends_with('"') {
                out.push(item[1..item.len() - 1].to_string());
            } else {
                return Err(syntax(self.line, at, &["quoted string"], format!("`{item}`")));
            }
        }
        Ok(out)
    }

    fn rational_or_free(&self) -> Result<Option<Rational>, ManifestError> {
        let v = self.value;
        if v == "free" {
            return Ok(None);
        }
        let bad = || syntax(self.line, self.base + self.value_at, &["`free`", "rational literal"], format!("`{v}`"));
        let (n, d) = match v.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (v, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() || d < BigInt::zero() {
            return Err(bad());
        }
        Ok(Some(Rational::new(n, d)))
    }

    /// Parse `name[i]` or `name[i][j]` keys.
    fn indices(&self, name: &str, count: usize) -> Result<Vec<usize>, ManifestError> {
        let bad = || {
            let pattern = format!("`{name}{}`", "[i]".repeat(count));
            syntax(self.line, self.base, &[pattern.as_str()], format!("`{}`", self.key))
        };
        let mut rest = self.key.strip_prefix(name).ok_or_else(bad)?;
        let mut out = Vec::new();
        while !rest.is_empty() {
            let r = rest.strip_prefix('[').ok_or_else(bad)?;
            let (num, tail) = r.split_once(']').ok_or_else(bad)?;
            out.push(num.trim().parse().map_err(|_| bad())?);
            rest = tail;
        }
        if out.len() != count {
            return Err(bad());
        }
        Ok(out)
    }
}

/// Parse and validate a manifest.
pub fn parse_manifest(text: &str) -> Result<ModelSpec, ManifestError> {
    let mut section = Section::None;
    let mut seen_sections = BTreeSet::new();
    let mut name = None;
    let mut dim = None;
    let mut coords: Option<Vec<String>> = None;
    let mut constants: Vec<(String, Option<Rational>)> = Vec::new();
    let mut metric_entries: Vec<(usize, usize, usize, Expr)> = Vec::new();
    let mut potential_entries: Vec<(usize, usize, Expr)> = Vec::new();
    let mut scalars = BTreeMap::new();
    let mut keys_seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut manifold_line = 1;

    let mut base = 0;
    for (n, raw) in text.split('\n').enumerate() {
        let line_no = n + 1;
        let line_base = base;
        base += raw.len() + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = body.len() - body.trim_start().len();
        if trimmed.starts_with('[') {
            let Some(head) = trimmed.strip_prefix('[').and_then(|t| t.strip_suffix(']')) else {
                return Err(syntax(line_no, line_base + lead, &["`[section]`"], format!("`{trimmed}`")));
            };
            section = match head.trim() {
                "manifold" => Section::Manifold,
                "constants" => Section::Constants,
                "metric" => Section::Metric,
                "potential" => Section::Potential,
                "scalars" => Section::Scalars,
                other => {
                    return Err(syntax(
                        line_no,
                        line_base + lead,
                        &["manifold", "constants", "metric", "potential", "scalars"],
                        format!("section `{other}`"),
                    ))
                }
            };
            if section == Section::Manifold {
                manifold_line = line_no;
            }
            if !seen_sections.insert(head.trim().to_string()) {
                return Err(invalid(line_no, format!("section `{}` appears twice", head.trim())));
            }
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(syntax(line_no, line_base + body.len(), &["`=`"], "end of line"));
        };
        let key = body[..eq].trim();
        let after = &body[eq + 1..];
        let value = after.trim();
        let value_at = eq + 1 + (after.len() - after.trim_start().len());
        let entry = Entry { line: line_no, base: line_base, key, value, value_at };
        if key.is_empty() {
            return Err(syntax(line_no, line_base + lead, &["key"], "`=`"));
        }
        if !keys_seen.insert((format!("{section:?}"), key.replace(' ', ""))) {
            return Err(invalid(line_no, format!("duplicate key `{key}`")));
        }
        match section {
            Section::None => {
                return Err(syntax(line_no, line_base + lead, &["`[section]`"], format!("`{key}`")));
            }
            Section::Manifold => match key {
                "name" => name = Some(entry.string()?.to_string()),
                "dim" => dim = Some((entry.integer()?, line_no)),
                "coords" => coords = Some(entry.string_list()?),
                other => {
                    return Err(syntax(line_no, line_base + lead, &["name", "dim", "coords"], format!("`{other}`")))
                }
            },
            Section::Constants => {
                if !is_ident(key) || reserved(key) {
                    return Err(invalid(line_no, format!("`{key}` is not a valid constant name")));
                }
                constants.push((key.to_string(), entry.rational_or_free()?));
            }
            Section::Metric => {
                let ix = entry.indices("g", 2)?;
                metric_entries.push((line_no, ix[0], ix[1], entry.expr()?));
            }
            Section::Potential => {
                let ix = entry.indices("phi", 1)?;
                potential_entries.push((line_no, ix[0], entry.expr()?));
            }
            Section::Scalars => {
                if !is_ident(key) || reserved(key) {
                    return Err(invalid(line_no, format!("`{key}` is not a valid scalar name")));
                }
                scalars.insert(key.to_string(), (line_no, entry.expr()?));
            }
        }
    }

    let (dim, dim_line) = dim.ok_or_else(|| invalid(manifold_line, "missing `dim`"))?;
    let coords = coords.ok_or_else(|| invalid(manifold_line, "missing `coords`"))?;
    if dim == 0 {
        return Err(invalid(dim_line, "dimension must be at least 1"));
    }
    if coords.len() != dim {
        return Err(invalid(dim_line, format!("{} coordinates declared for dimension {dim}", coords.len())));
    }
    let mut known: BTreeSet<String> = BTreeSet::new();
    for c in &coords {
        if !is_ident(c) || reserved(c) {
            return Err(invalid(manifold_line, format!("`{c}` is not a valid coordinate name")));
        }
        if !known.insert(c.clone()) {
            return Err(invalid(manifold_line, format!("coordinate `{c}` declared twice")));
        }
    }
    for (c, _) in &constants {
        if known.contains(c) {
            return Err(invalid(manifold_line, format!("constant `{c}` shadows a coordinate")));
        }
        known.insert(c.clone());
    }
    if !seen_sections.contains("metric") {
        return Err(invalid(text.split('\n').count(), "missing `[metric]` section"));
    }
    let check_symbols = |line: usize, e: &Expr| -> Result<(), ManifestError> {
        match e.free_symbols().into_iter().find(|s| s != PI && !known.contains(s)) {
            Some(s) => Err(invalid(line, format!("unknown symbol `{s}`"))),
            None => Ok(()),
        }
    };

    let mut metric: BTreeMap<(usize, usize), Expr> = BTreeMap::new();
    let mut lower = Vec::new();
    for (line, i, j, e) in metric_entries {
        if i >= dim || j >= dim {
            return Err(invalid(line, format!("index g[{i}][{j}] out of range for dimension {dim}")));
        }
        check_symbols(line, &e)?;
        if i <= j {
            metric.insert((i, j), e);
        } else {
            lower.push((line, j, i, e));
        }
    }
    for (line, i, j, e) in lower {
        match metric.get(&(i, j)) {
            None => {
                metric.insert((i, j), e);
            }
            Some(upper) => {
                let same = expr::equivalent(upper, &e, 0).map_err(|err| invalid(line, err.to_string()))?;
                if !same {
                    return Err(invalid(
                        line,
                        format!("metric is not symmetric: g[{j}][{i}] = {e} but g[{i}][{j}] = {upper}"),
                    ));
                }
            }
        }
    }
    metric.retain(|_, e| !e.is_zero());

    let mut potential = BTreeMap::new();
    for (line, i, e) in potential_entries {
        if i >= dim {
            return Err(invalid(line, format!("index phi[{i}] out of range for dimension {dim}")));
        }
        check_symbols(line, &e)?;
        potential.insert(i, e);
    }
    let mut out_scalars = BTreeMap::new();
    for (k, (line, e)) in scalars {
        check_symbols(line, &e)?;
        out_scalars.insert(k, e);
    }

    Ok(ModelSpec {
        name: name.unwrap_or_default(),
        dim,
        coords,
        constants,
        metric,
        potential,
        scalars: out_scalars,
    })
}

impl ModelSpec {
    /// Metric component `g[i][j]`, zero when undeclared.
    pub fn metric_component(&self, i: usize, j: usize) -> Expr {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.metric.get(&key).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn potential_component(&self, i: usize) -> Expr {
        self.potential.get(&i).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn has_potential(&self) -> bool {
        !self.potential.is_empty()
    }

    pub fn scalar(&self, name: &str) -> Option<&Expr> {
        self.scalars.get(name)
    }

    /// Values of every constant that is not free.
    pub fn bindings(&self) -> Bindings {
        self.constants
            .iter()
            .filter_map(|(k, v)| v.clone().map(|q| (k.clone(), Value::Exact(q))))
            .collect()
    }

    pub fn free_constants(&self) -> Vec<String> {
        self.constants.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k.clone()).collect()
    }

    /// Assign a value to a constant, declaring it if needed.
    pub fn set_constant(&mut self, name: &str, value: Option<Rational>) {
        match self.constants.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.constants.push((name.to_string(), value)),
        }
    }

    /// Serialize back to manifest text.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        s.push_str("[manifold]\n");
        s.push_str(&format!("name = \"{}\"\n", self.name));
        s.push_str(&format!("dim = {}\n", self.dim));
        let cs: Vec<String> = self.coords.iter().map(|c| format!("\"{c}\"")).collect();
        s.push_str(&format!("coords = [{}]\n", cs.join(", ")));
        if !self.constants.is_empty() {
            s.push_str("[constants]\n");
            for (k, v) in &self.constants {
                match v {
                    Some(q) => s.push_str(&format!("{k} = {q}\n")),
                    None => s.push_str(&format!("{k} = free\n")),
                }
            }
        }
        s.push_str("[metric]\n");
        for ((i, j), e) in &self.metric {
            s.push_str(&format!("g[{i}][{j}] = \"{e}\"\n"));
        }
        if !self.potential.is_empty() {
            s.push_str("[potential]\n");
            for (i, e) in &self.potential {
                s.push_str(&format!("phi[{i}] = \"{e}\"\n"));
            }
        }
        if !self.scalars.is_empty() {
            s.push_str("[scalars]\n");
            for (k, e) in &self.scalars {
                s.push_str(&format!("{k} = \"{e}\"\n"));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    const SCHWARZSCHILD: &str = r#"
[manifold]
name = "schwarzschild"
dim = 4
coords = ["t", "r", "theta", "phi"]
[constants]
M = free            # or a rational value, e.g. 1/2
[metric]
g[0][0] = "-(1 - 2*M/r)"
g[1][1] = "1/(1 - 2*M/r)"
g[2][2] = "r^2"
g[3][3] = "r^2*sin(theta)^2"
"#;

    #[test]
    fn minimal_flat_manifest() {
        let text = "[manifold]\ndim = 2\ncoords = [\"x\", \"y\"]\n[metric]\ng[0][0] = \"1\"\ng[1][1] = \"1\"\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.dim, 2);
        assert!(m.metric_component(0, 0).is_one());
        assert!(m.metric_component(1, 1).is_one());
        assert!(m.metric_component(0, 1).is_zero());
    }

    #[test]
    fn schwarzschild_manifest_round_trips() {
        let m = parse_manifest(SCHWARZSCHILD).unwrap();
        assert_eq!(m.dim, 4);
        assert_eq!(m.constants, vec![("M".to_string(), None)]);
        assert_eq!(m.metric_component(3, 3), parse_expr("r^2*sin(theta)^2").unwrap());
        let again = parse_manifest(&m.to_manifest()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let text = "[manifold]\ndim = 2\ncoords = [\"r\", \"s\"]\n[metric]\ng[0][1] = \"r\"\ng[1][0] = \"r+1\"\n";
        match parse_manifest(text) {
            Err(ManifestError::Validation { line: Some(6), message }) => assert!(message.contains("symmetric")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn consistent_lower_entry_is_accepted() {
        let text = "[manifold]\ndim = 2\ncoords = [\"r\", \"s\"]\n[metric]\ng[0][1] = \"r*s\"\ng[1][0] = \"s*r\"\n";
        assert!(parse_manifest(text).is_ok());
    }

    #[test]
    fn bad_index_and_unknown_symbol() {
        let text = "[manifold]\ndim = 2\ncoords = [\"x\", \"y\"]\n[metric]\ng[0][2] = \"1\"\n";
        assert!(matches!(parse_manifest(text), Err(ManifestError::Validation { line: Some(5), .. })));
        let text = "[manifold]\ndim = 2\ncoords = [\"x\", \"y\"]\n[metric]\ng[0][0] = \"z\"\n";
        match parse_manifest(text) {
            Err(ManifestError::Validation { message, .. }) => assert!(message.contains("`z`")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expression_errors_point_into_the_manifest() {
        let text = "[manifold]\ndim = 1\ncoords = [\"x\"]\n[metric]\ng[0][0] = \"1 +\"\n";
        match parse_manifest(text) {
            Err(ManifestError::Parse(e)) => {
                assert_eq!(e.line, Some(5));
                assert_eq!(e.offset, text.find("1 +").unwrap() + 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rational_constants_and_scalars() {
        let text = "[manifold]\ndim = 1\ncoords = [\"x\"]\n[constants]\nQ = -3/4\n[metric]\ng[0][0] = \"1\"\n[potential]\nphi[0] = \"Q/x\"\n[scalars]\nJ = \"1\"\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.bindings().get("Q"), Some(&Value::Exact(Rational::new((-3).into(), 4.into()))));
        assert!(m.scalar("J").unwrap().is_one());
        assert!(m.has_potential());
    }
}
