//! Problem files: `[section]` headers, `key value...` lines and numeric
//! tables whose rows follow their key. `#` starts a comment. Numbers may be
//! written as fractions (`1/3`).
//!
//! ```text
//! [network]
//! parties 2
//! inputs 2 2
//! outputs 1 2
//! channel          # one row per input configuration
//! 1 0
//! 0 1
//! 1 0
//! 0 1
//!
//! [psi]
//! kind all         # all | independent | explicit (rows under `laws`)
//! grid 11
//! ```

use std::fmt::Write as _;

use cutset_core::cutset::{NetworkSpec, PermissibleSet, RateMatrix};
use cutset_core::probkit::JointPmf;
use cutset_core::scalar::Scalar;
use cutset_core::virtualsrc::{DistortionSpec, Reconstruction, SourceSpec, DEFAULT_SEARCH_CAP};
use thiserror::Error;

/// Diagnostic pointing at a place in the problem text (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const SECTIONS: [&str; 8] = [
    "network",
    "psi",
    "source",
    "functions",
    "distortion",
    "reconstruction",
    "rates",
    "search",
];

/// Reconstruction search settings from the `[search]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSettings {
    pub grid: usize,
    pub deterministic: bool,
    pub cap: u128,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            grid: 3,
            deterministic: false,
            cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// A parsed and cross-checked problem. Sections are optional here; each
/// command checks for the ones it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub network: Option<NetworkSpec<f64>>,
    pub psi: Option<PermissibleSet<f64>>,
    pub source: Option<SourceSpec<f64>>,
    pub distortion: Option<DistortionSpec<f64>>,
    pub epsilon: Option<f64>,
    pub reconstruction: Option<Reconstruction<f64>>,
    pub rates: Option<RateMatrix<f64>>,
    pub search: SearchSettings,
}

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Tok {
    text: String,
    line: usize,
    col: usize,
}

impl Tok {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }
}

#[derive(Debug)]
struct Entry {
    key: Tok,
    values: Vec<Tok>,
    rows: Vec<Vec<Tok>>,
}

#[derive(Debug)]
struct Section {
    name: Tok,
    entries: Vec<Entry>,
}

fn tokens(line: &str, line_no: usize) -> Vec<Tok> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (col, ch) in body
        .chars()
        .enumerate()
        .chain(std::iter::once((body.chars().count(), ' ')))
    {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(col),
            (true, Some(s)) => {
                out.push(Tok {
                    text: body.chars().skip(s).take(col - s).collect(),
                    line: line_no,
                    col: s + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn is_key(text: &str) -> bool {
    text.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

fn lex(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokens(line, line_no);
        let Some(first) = toks.first() else { continue };
        if first.text.starts_with('[') {
            if toks.len() != 1 || !first.text.ends_with(']') {
                return Err(first.err("section header must be a single `[name]`"));
            }
            let name = first.text[1..first.text.len() - 1].to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(first.err(format!(
                    "unknown section `[{name}]`; expected one of {}",
                    SECTIONS.map(|s| format!("[{s}]")).join(", ")
                )));
            }
            if sections.iter().any(|s| s.name.text == name) {
                return Err(first.err(format!("section `[{name}]` appears twice")));
            }
            sections.push(Section {
                name: Tok {
                    text: name,
                    ..first.clone()
                },
                entries: Vec::new(),
            });
            continue;
        }
        let Some(section) = sections.last_mut() else {
            return Err(first.err("content before the first section header"));
        };
        if is_key(&first.text) {
            if section.entries.iter().any(|e| e.key.text == first.text) {
                return Err(first.err(format!("key `{}` appears twice in [{}]", first.text, section.name.text)));
            }
            section.entries.push(Entry {
                key: first.clone(),
                values: toks[1..].to_vec(),
                rows: Vec::new(),
            });
        } else {
            match section.entries.last_mut() {
                Some(entry) => entry.rows.push(toks),
                None => section.entries.push(Entry {
                    key: Tok {
                        text: String::new(),
                        ..first.clone()
                    },
                    values: Vec::new(),
                    rows: vec![toks],
                }),
            }
        }
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Typed access
// ---------------------------------------------------------------------------

fn number(tok: &Tok) -> Result<f64, ParseError> {
    let value = match tok.text.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (a.parse::<f64>(), b.parse::<f64>());
            match (a, b) {
                (Ok(a), Ok(b)) if b != 0.0 => a / b,
                _ => return Err(tok.err(format!("`{}` is not a valid fraction", tok.text))),
            }
        }
        None => tok
            .text
            .parse::<f64>()
            .map_err(|_| tok.err(format!("`{}` is not a number", tok.text)))?,
    };
    if !value.is_finite() {
        return Err(tok.err(format!("`{}` is not finite", tok.text)));
    }
    Ok(value)
}

fn count(tok: &Tok) -> Result<usize, ParseError> {
    tok.text
        .parse::<usize>()
        .map_err(|_| tok.err(format!("`{}` is not a nonnegative integer", tok.text)))
}

impl Section {
    fn check_keys(&self, allowed: &[&str]) -> Result<(), ParseError> {
        for e in &self.entries {
            let ok = allowed.iter().any(|a| match a.strip_suffix('*') {
                Some(prefix) => e
                    .key
                    .text
                    .strip_prefix(prefix)
                    .is_some_and(|n| n.parse::<usize>().is_ok()),
                None => e.key.text == *a,
            });
            if !ok {
                let what = if e.key.text.is_empty() {
                    "table rows without a key".to_string()
                } else {
                    format!("unknown key `{}`", e.key.text)
                };
                return Err(e.key.err(format!("{what} in [{}]", self.name.text)));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key.text == key)
    }

    fn require(&self, key: &str) -> Result<&Entry, ParseError> {
        self.get(key)
            .ok_or_else(|| self.name.err(format!("[{}] is missing `{key}`", self.name.text)))
    }
}

impl Entry {
    fn single(&self) -> Result<&Tok, ParseError> {
        match self.values.as_slice() {
            [v] if self.rows.is_empty() => Ok(v),
            _ => Err(self.key.err(format!("`{}` takes exactly one value", self.key.text))),
        }
    }

    fn counts(&self, expected: usize) -> Result<Vec<usize>, ParseError> {
        if self.values.len() != expected || !self.rows.is_empty() {
            return Err(self.key.err(format!(
                "`{}` needs {expected} values on its line, got {}",
                self.key.text,
                self.values.len()
            )));
        }
        self.values
            .iter()
            .map(|t| {
                let n = count(t)?;
                if n == 0 {
                    return Err(t.err("alphabet sizes must be positive"));
                }
                Ok(n)
            })
            .collect()
    }

    /// Values on the key line followed by every row, flattened.
    fn all_tokens(&self) -> impl Iterator<Item = &Tok> {
        self.values.iter().chain(self.rows.iter().flatten())
    }

    fn numbers(&self, expected: usize) -> Result<Vec<f64>, ParseError> {
        let toks: Vec<&Tok> = self.all_tokens().collect();
        if toks.len() != expected {
            return Err(self.key.err(format!(
                "`{}` needs {expected} numbers, got {}",
                self.display_key(),
                toks.len()
            )));
        }
        toks.into_iter().map(number).collect()
    }

    fn indices(&self, expected: usize, bound: usize) -> Result<Vec<usize>, ParseError> {
        let toks: Vec<&Tok> = self.all_tokens().collect();
        if toks.len() != expected {
            return Err(self.key.err(format!(
                "`{}` needs {expected} symbols, got {}",
                self.key.text,
                toks.len()
            )));
        }
        toks.into_iter()
            .map(|t| {
                let s = count(t)?;
                if s >= bound {
                    return Err(t.err(format!("symbol {s} outside an alphabet of size {bound}")));
                }
                Ok(s)
            })
            .collect()
    }

    /// A `rows x cols` table given one row per line.
    fn table(&self, rows: usize, cols: usize) -> Result<Vec<(Tok, Vec<f64>)>, ParseError> {
        if !self.values.is_empty() {
            return Err(self.values[0].err(format!(
                "`{}` is a table; put its rows on the following lines",
                self.display_key()
            )));
        }
        if self.rows.len() != rows {
            return Err(self.key.err(format!(
                "`{}` needs {rows} rows, got {}",
                self.display_key(),
                self.rows.len()
            )));
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                if row.len() != cols {
                    return Err(row[0].err(format!(
                        "row {} of `{}` needs {cols} entries, got {}",
                        r + 1,
                        self.display_key(),
                        row.len()
                    )));
                }
                Ok((row[0].clone(), row.iter().map(number).collect::<Result<Vec<_>, _>>()?))
            })
            .collect()
    }

    fn display_key(&self) -> &str {
        if self.key.text.is_empty() {
            "table"
        } else {
            &self.key.text
        }
    }
}

/// Checks a probability row: nonnegative entries summing to one.
fn check_distribution(at: &Tok, what: &str, values: &[f64]) -> Result<(), ParseError> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(at.err(format!("{what}: entry {} is negative ({v})", i + 1)));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > f64::NORM_TOL.max(1e-12) {
        return Err(at.err(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn core_err(at: &Tok, e: cutset_core::Error) -> ParseError {
    at.err(e.to_string())
}

fn product(sizes: &[usize], at: &Tok) -> Result<usize, ParseError> {
    sizes
        .iter()
        .try_fold(1usize, |a, &b| a.checked_mul(b))
        .filter(|&n| n <= cutset_core::probkit::DEFAULT_TABLE_CAP)
        .ok_or_else(|| at.err("alphabet product is too large"))
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let sections = lex(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name.text == name);

    let network = find("network").map(parse_network).transpose()?;
    let m_net = network.as_ref().map(|(n, _)| n.m());

    let psi = match find("psi") {
        Some(s) => {
            let Some((net, _)) = &network else {
                return Err(s.name.err("[psi] needs a [network] section"));
            };
            Some(parse_psi(s, net)?)
        }
        None => None,
    };

    let source = match (find("source"), find("functions")) {
        (Some(s), Some(f)) => Some(parse_source(s, f)?),
        (Some(s), None) => return Err(s.name.err("[source] needs a [functions] section")),
        (None, Some(f)) => return Err(f.name.err("[functions] needs a [source] section")),
        (None, None) => None,
    };
    if let (Some(m), Some((src, at))) = (m_net, &source) {
        if src.m() != m {
            return Err(at.err(format!("source has {} parties, network has {m}", src.m())));
        }
    }

    let (distortion, epsilon) = match find("distortion") {
        Some(s) => {
            let Some((src, _)) = &source else {
                return Err(s.name.err("[distortion] needs [source] and [functions] sections"));
            };
            let (d, eps) = parse_distortion(s, src)?;
            (Some(d), eps)
        }
        None => (None, None),
    };

    let reconstruction = match find("reconstruction") {
        Some(s) => {
            let Some((src, _)) = &source else {
                return Err(s.name.err("[reconstruction] needs [source] and [functions] sections"));
            };
            Some(parse_reconstruction(s, src)?)
        }
        None => None,
    };

    let rates = match find("rates") {
        Some(s) => {
            let m = m_net
                .or(source.as_ref().map(|(src, _)| src.m()))
                .ok_or_else(|| s.name.err("[rates] needs a [network] section to fix the party count"))?;
            Some(parse_rates(s, m)?)
        }
        None => None,
    };

    let search = find("search").map(parse_search).transpose()?.unwrap_or_default();

    Ok(ProblemSpec {
        network: network.map(|(n, _)| n),
        psi,
        source: source.map(|(s, _)| s),
        distortion,
        epsilon,
        reconstruction,
        rates,
        search,
    })
}

fn parse_network(s: &Section) -> Result<(NetworkSpec<f64>, Tok), ParseError> {
    s.check_keys(&["parties", "inputs", "outputs", "channel"])?;
    let parties = s.require("parties")?;
    let m = count(parties.single()?)?;
    if m < 2 {
        return Err(parties.key.err(format!("a network needs at least 2 parties, got {m}")));
    }
    let inputs = s.require("inputs")?.counts(m)?;
    let outputs = s.require("outputs")?.counts(m)?;
    let ch = s.require("channel")?;
    let rows = product(&inputs, &ch.key)?;
    let cols = product(&outputs, &ch.key)?;
    let table = ch.table(rows, cols)?;
    for (r, (at, row)) in table.iter().enumerate() {
        check_distribution(at, &format!("channel row {}", r + 1), row)?;
    }
    let flat = table.into_iter().flat_map(|(_, r)| r).collect();
    let net = NetworkSpec::from_table(&inputs, &outputs, flat).map_err(|e| core_err(&ch.key, e))?;
    Ok((net, s.name.clone()))
}

fn parse_psi(s: &Section, net: &NetworkSpec<f64>) -> Result<PermissibleSet<f64>, ParseError> {
    s.check_keys(&["kind", "grid", "laws"])?;
    let kind = s.require("kind")?;
    let grid = |s: &Section| -> Result<usize, ParseError> {
        let g = s.require("grid")?;
        let n = count(g.single()?)?;
        if n < 2 {
            return Err(g.values[0].err(format!("grid resolution must be at least 2, got {n}")));
        }
        Ok(n)
    };
    let no = |key: &str, why: &str| -> Result<(), ParseError> {
        match s.get(key) {
            Some(e) => Err(e.key.err(format!("`{key}` is not used {why}"))),
            None => Ok(()),
        }
    };
    match kind.single()?.text.as_str() {
        "all" => {
            no("laws", "with kind all")?;
            Ok(PermissibleSet::All { grid: grid(s)? })
        }
        "independent" => {
            no("laws", "with kind independent")?;
            Ok(PermissibleSet::Independent { grid: grid(s)? })
        }
        "explicit" => {
            no("grid", "with kind explicit")?;
            let laws = s.require("laws")?;
            let len = product(&net.input_sizes(), &laws.key)?;
            if laws.rows.is_empty() {
                return Err(laws.key.err("`laws` needs at least one row"));
            }
            let table = laws.table(laws.rows.len(), len)?;
            table
                .into_iter()
                .enumerate()
                .map(|(r, (at, row))| {
                    check_distribution(&at, &format!("law {}", r + 1), &row)?;
                    JointPmf::new(net.input_vars().to_vec(), row).map_err(|e| core_err(&at, e))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(PermissibleSet::Explicit)
        }
        other => Err(kind.values[0].err(format!("unknown kind `{other}`; expected all, independent or explicit"))),
    }
}

fn parse_source(s: &Section, f: &Section) -> Result<(SourceSpec<f64>, Tok), ParseError> {
    s.check_keys(&["alphabets", "joint"])?;
    f.check_keys(&["messages", "f*"])?;
    let alphabets = s.require("alphabets")?;
    let m = alphabets.values.len();
    if m < 2 {
        return Err(alphabets.key.err("a source needs at least 2 parties"));
    }
    let sizes = alphabets.counts(m)?;
    let joint = s.require("joint")?;
    let nw = product(&sizes, &joint.key)?;
    let table = joint.numbers(nw)?;
    check_distribution(&joint.key, "source joint", &table)?;
    let messages = f.require("messages")?.counts(m)?;
    let functions = (0..m)
        .map(|i| f.require(&format!("f{}", i + 1))?.indices(nw, messages[i]))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(extra) = f.entries.iter().find(|e| {
        e.key
            .text
            .strip_prefix('f')
            .and_then(|n| n.parse::<usize>().ok())
            .is_some_and(|n| n == 0 || n > m)
    }) {
        return Err(extra
            .key
            .err(format!("`{}` does not name one of the {m} parties", extra.key.text)));
    }
    let src = SourceSpec::from_table(&sizes, table, messages, functions).map_err(|e| core_err(&joint.key, e))?;
    Ok((src, s.name.clone()))
}

fn parse_distortion(s: &Section, src: &SourceSpec<f64>) -> Result<(DistortionSpec<f64>, Option<f64>), ParseError> {
    s.check_keys(&["targets", "epsilon", "delta*"])?;
    let m = src.m();
    let targets_entry = s.require("targets")?;
    let targets = targets_entry.numbers(m)?;
    if let Some((i, _)) = targets.iter().enumerate().find(|(_, &d)| d < 0.0) {
        return Err(targets_entry.values[i].err("distortion targets must be nonnegative"));
    }
    let epsilon = match s.get("epsilon") {
        Some(e) => {
            let tok = e.single()?;
            let v = number(tok)?;
            if v < 0.0 {
                return Err(tok.err("epsilon must be nonnegative"));
            }
            Some(v)
        }
        None => None,
    };
    let sizes = src.message_sizes().to_vec();
    let mut matrices = Vec::with_capacity(m);
    for (i, &k) in sizes.iter().enumerate() {
        let entry = s.require(&format!("delta{}", i + 1))?;
        let table = entry.table(k, k)?;
        for (a, (_, row)) in table.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let tok = &entry.rows[a][b];
                if v < 0.0 {
                    return Err(tok.err(format!(
                        "distortion matrix {} entry ({},{}) is negative",
                        i + 1,
                        a + 1,
                        b + 1
                    )));
                }
                if a == b && v != 0.0 {
                    return Err(tok.err(format!(
                        "distortion matrix {} must satisfy Δ(m,m)=0, but entry ({},{}) is {v}",
                        i + 1,
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        matrices.push(table.into_iter().flat_map(|(_, r)| r).collect());
    }
    if let Some(extra) = s.entries.iter().find(|e| {
        e.key
            .text
            .strip_prefix("delta")
            .and_then(|n| n.parse::<usize>().ok())
            .is_some_and(|n| n == 0 || n > m)
    }) {
        return Err(extra
            .key
            .err(format!("`{}` does not name one of the {m} parties", extra.key.text)));
    }
    let dist = DistortionSpec::new(sizes, matrices, targets).map_err(|e| core_err(&s.name, e))?;
    Ok((dist, epsilon))
}

fn parse_reconstruction(s: &Section, src: &SourceSpec<f64>) -> Result<Reconstruction<f64>, ParseError> {
    s.check_keys(&["table"])?;
    let entry = s.require("table")?;
    let rows = product(&src.source_sizes(), &entry.key)?;
    let cols = product(src.message_sizes(), &entry.key)?;
    let table = entry.table(rows, cols)?;
    for (r, (at, row)) in table.iter().enumerate() {
        check_distribution(at, &format!("reconstruction row {}", r + 1), row)?;
    }
    Reconstruction::from_table(src, table.into_iter().flat_map(|(_, r)| r).collect())
        .map_err(|e| core_err(&entry.key, e))
}

fn parse_rates(s: &Section, m: usize) -> Result<RateMatrix<f64>, ParseError> {
    s.check_keys(&[""])?;
    let entry = s
        .entries
        .first()
        .ok_or_else(|| s.name.err("[rates] needs an m x m table"))?;
    let table = entry.table(m, m)?;
    for (r, (_, row)) in table.iter().enumerate() {
        if let Some(j) = row.iter().position(|&x| x < 0.0) {
            return Err(entry.rows[r][j].err("rates must be nonnegative"));
        }
    }
    RateMatrix::new(m, table.into_iter().flat_map(|(_, r)| r).collect()).map_err(|e| core_err(&s.name, e))
}

fn parse_search(s: &Section) -> Result<SearchSettings, ParseError> {
    s.check_keys(&["grid", "deterministic", "cap"])?;
    let mut out = SearchSettings::default();
    if let Some(g) = s.get("grid") {
        let tok = g.single()?;
        out.grid = count(tok)?;
        if out.grid < 2 {
            return Err(tok.err("search grid must be at least 2"));
        }
    }
    if let Some(d) = s.get("deterministic") {
        let tok = d.single()?;
        out.deterministic = match tok.text.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(tok.err(format!("expected true or false, got `{other}`"))),
        };
    }
    if let Some(c) = s.get("cap") {
        let tok = c.single()?;
        out.cap = tok
            .text
            .parse::<u128>()
            .map_err(|_| tok.err(format!("`{}` is not a nonnegative integer", tok.text)))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_rows(out: &mut String, table: &[f64], cols: usize) {
    for row in table.chunks(cols.max(1)) {
        let _ = writeln!(out, "{}", join(row));
    }
}

/// Writes a problem back in the canonical layout; parsing the result gives
/// an equal [`ProblemSpec`].
pub fn serialize_problem(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    if let Some(net) = &spec.network {
        let _ = writeln!(out, "[network]\nparties {}", net.m());
        let _ = writeln!(out, "inputs {}", join(net.input_sizes()));
        let _ = writeln!(out, "outputs {}", join(net.output_sizes()));
        let _ = writeln!(out, "channel");
        write_rows(&mut out, net.channel().table(), net.channel().output_len());
        out.push('\n');
    }
    if let Some(psi) = &spec.psi {
        out.push_str("[psi]\n");
        match psi {
            PermissibleSet::All { grid } => {
                let _ = writeln!(out, "kind all\ngrid {grid}");
            }
            PermissibleSet::Independent { grid } => {
                let _ = writeln!(out, "kind independent\ngrid {grid}");
            }
            PermissibleSet::Explicit(laws) => {
                out.push_str("kind explicit\nlaws\n");
                for law in laws {
                    let _ = writeln!(out, "{}", join(law.table()));
                }
            }
        }
        out.push('\n');
    }
    if let Some(src) = &spec.source {
        let _ = writeln!(out, "[source]\nalphabets {}", join(src.source_sizes()));
        let _ = writeln!(out, "joint\n{}\n", join(src.joint().table()));
        let _ = writeln!(out, "[functions]\nmessages {}", join(src.message_sizes()));
        for (i, f) in src.functions().iter().enumerate() {
            let _ = writeln!(out, "f{} {}", i + 1, join(f));
        }
        out.push('\n');
    }
    if let Some(dist) = &spec.distortion {
        let _ = writeln!(out, "[distortion]\ntargets {}", join(dist.targets()));
        if let Some(eps) = spec.epsilon {
            let _ = writeln!(out, "epsilon {eps}");
        }
        for (i, (mat, &k)) in dist.matrices().iter().zip(dist.sizes()).enumerate() {
            let _ = writeln!(out, "delta{}", i + 1);
            write_rows(&mut out, mat, k);
        }
        out.push('\n');
    }
    if let Some(rec) = &spec.reconstruction {
        out.push_str("[reconstruction]\ntable\n");
        write_rows(&mut out, rec.channel().table(), rec.channel().output_len());
        out.push('\n');
    }
    if let Some(rates) = &spec.rates {
        out.push_str("[rates]\n");
        write_rows(&mut out, rates.rates(), rates.m());
        out.push('\n');
    }
    let s = spec.search;
    let _ = writeln!(
        out,
        "[search]\ngrid {}\ndeterministic {}\ncap {}",
        s.grid, s.deterministic, s.cap
    );
    out
}
