//! Reading towers from CAS transcripts and from the canonical text format.
//!
//! # Transcript grammar
//!
//! Lines that match none of the shapes below are skipped, so program
//! listings and commentary may be interleaved.
//!
//! * header: any line containing `CK0=[...]`, with whitespace-separated
//!   `key=value` pairs (`p`, `Nn` or `N`, `f`, `PK`, `ell`, `r`);
//! * structure: `CKn=[a_1,...]` optionally followed by `=[p-part]`;
//! * action: one or more `h_j^[(S-1)^i]=[...]` per line;
//! * norm: `norm in Kn/K of the component j of CKn:[...]`, or
//!   `norm in Kn/K of CKn:[...]` for a cyclic layer;
//! * verdict: `Complete|Incomplete|No capitulation[ (stability from Kj)], m(Kn)=.., e(Kn)=..`;
//! * prediction: `Complete|Incomplete|No capitulation in Kn[ (stability from Kj)]`.
//!
//! A line with two or more `CKn=` tokens (and no `CK0`) starts a block of
//! side-by-side columns, read column by column until the next blank line.
//!
//! # Canonical format
//!
//! Line oriented, `#` starts a comment, fields are separated by single spaces.
//!
//! ```text
//! capnorm-tower 1
//! p <prime>
//! height <N>
//! ell <ell>                         (optional)
//! r <r>                             (optional)
//! label <text>                      (optional)
//! base <exponents...>
//! predict <Complete|Partial|None> <layer> <raw text>
//! layer <n>
//! label <text>                      (optional)
//! group <exponents...>              (structure-only layers)
//! module <N> <generator exponents...>
//! delta <row>                       (one per generator, after `module`)
//! norm <j> <vector>                 (j is 1-based)
//! power <i> <j> <vector>
//! verdict <kind> <m|-> <e|-> <label layer|-> <raw text>
//! end
//! ```
//!
//! Generator exponents after `module` may be in any order; the reader sorts
//! them, permuting `delta`, `norm` and `power` data to match, and warns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::padic;
use crate::pmodule::{ModuleError, PGroupModule, VerdictKind};
use crate::tower::{GroupType, LayerRecord, PrintedPrediction, PrintedVerdict, TowerData, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("no layers found")]
    NoLayers,
    #[error("no header line with CK0=[...]")]
    NoHeader,
    #[error("line {line}: a second header line")]
    SecondHeader { line: usize },
    #[error("line {line}: {what} outside any layer")]
    Orphan { line: usize, what: &'static str },
    #[error("line {line}: layer {n} appears twice")]
    DuplicateLayer { line: usize, n: u32 },
    #[error("line {line}: norm line refers to layer {n}, which was not declared")]
    UnknownLayer { line: usize, n: u32 },
    #[error("line {line}: bad integer {token:?}")]
    BadInteger { line: usize, token: String },
    #[error("line {line}: vector of length {found}, layer {n} has {listed} listed generators ({kept} with p-part)")]
    Length { line: usize, n: u32, listed: usize, kept: usize, found: usize },
    #[error("line {line}: generator {j} is out of range for layer {n}")]
    GeneratorRange { line: usize, n: u32, j: usize },
    #[error("line {line}: conflicting values for {what}")]
    Conflict { line: usize, what: String },
    #[error("layer {n}: action rows h_j^[(S-1)^1] missing for generators {missing:?}; the module is underdetermined")]
    MissingRows { n: u32, missing: Vec<usize> },
    #[error("cannot infer p: candidates {0:?}")]
    AmbiguousPrime(Vec<u64>),
    #[error("{0}")]
    Prime(#[from] padic::PadicError),
    #[error("layer {n}: {source}")]
    Module { n: u32, source: ModuleError },
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error("line {line}: {msg}")]
    Canonical { line: usize, msg: String },
}

/// A parsed tower with the non-fatal notes gathered on the way.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub tower: TowerData,
    pub warnings: Vec<String>,
}

static HEADER_PAIR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\w+)=(\S+)").unwrap());
static CK_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"CK([1-9]\d*)=\[").unwrap());
static STRUCTURE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^CK([1-9]\d*)=\[([^\]]*)\](?:=\[([^\]]*)\])?(.*)$").unwrap());
static ACTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"h_(\d+)\^\[\(S-1\)\^(\d+)\]=\[([^\]]*)\]").unwrap());
static NORM: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"norm in K(\d+)/K of (?:the component (\d+) of )?CK(\d+):\[([^\]]*)\]").unwrap()
});
static VERDICT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(Complete|Incomplete|No) capitulation(?:\s*\(stability from K(\d*)\))?\s*,\s*m\(K(\d+)\)=(\d+)\s*,\s*e\(K(\d+)\)=(\d+)")
        .unwrap()
});
static PREDICTION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(Complete|Incomplete|No) capitulation in K(\d+)(?:\s*\(stability from K(\d*)\))?").unwrap()
});

#[derive(Default)]
struct Header {
    fields: BTreeMap<String, String>,
    base: Vec<u64>,
}

#[derive(Default)]
struct RawLayer {
    n: u32,
    listed: Vec<u64>,
    ppart: Option<Vec<u64>>,
    label: Option<String>,
    /// `(i, j) -> (line, vector)`, `j` 1-based over the listed generators.
    actions: BTreeMap<(u32, usize), (usize, Vec<i64>)>,
    norms: BTreeMap<usize, (usize, Vec<i64>)>,
    verdict: Option<PrintedVerdict>,
}

/// Parses a transcript, discarding warnings.
pub fn parse_transcript(text: &str) -> Result<TowerData, IngestError> {
    parse_transcript_with_warnings(text).map(|p| p.tower)
}

pub fn parse_transcript_with_warnings(text: &str) -> Result<Parsed, IngestError> {
    let lines = logical_lines(text);
    let mut header: Option<Header> = None;
    let mut layers: Vec<RawLayer> = Vec::new();
    let mut predictions = Vec::new();
    let mut warnings = Vec::new();

    for (lineno, line) in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.contains("CK0=[") {
            if header.is_some() {
                return Err(IngestError::SecondHeader { line: lineno });
            }
            header = Some(parse_header(t, lineno)?);
            continue;
        }
        if let Some(c) = STRUCTURE.captures(t) {
            let n: u32 = int(&c[1], lineno)?;
            if layers.iter().any(|l| l.n == n) {
                return Err(IngestError::DuplicateLayer { line: lineno, n });
            }
            let listed = parse_list(&c[2], lineno)?.into_iter().map(|x| x.unsigned_abs()).collect();
            let ppart = c
                .get(3)
                .map(|m| parse_list(m.as_str(), lineno).map(|v| v.into_iter().map(|x| x.unsigned_abs()).collect()))
                .transpose()?;
            let rest = c[4].trim();
            layers.push(RawLayer {
                n,
                listed,
                ppart,
                label: (!rest.is_empty()).then(|| rest.to_string()),
                ..Default::default()
            });
            continue;
        }
        let mut matched = false;
        for c in ACTION.captures_iter(t) {
            matched = true;
            let layer = layers.last_mut().ok_or(IngestError::Orphan { line: lineno, what: "action row" })?;
            let j: usize = int(&c[1], lineno)?;
            let i: u32 = int(&c[2], lineno)?;
            let v = parse_list(&c[3], lineno)?;
            if let Some((_, old)) = layer.actions.get(&(i, j)) {
                if *old != v {
                    return Err(IngestError::Conflict { line: lineno, what: format!("h_{j}^[(S-1)^{i}]") });
                }
            }
            layer.actions.insert((i, j), (lineno, v));
        }
        if matched {
            continue;
        }
        if let Some(c) = NORM.captures(t) {
            let n: u32 = int(&c[1], lineno)?;
            let j: usize = c.get(2).map_or(Ok(1), |m| int(m.as_str(), lineno))?;
            let v = parse_list(&c[4], lineno)?;
            let layer = layers
                .iter_mut()
                .find(|l| l.n == n)
                .ok_or(IngestError::UnknownLayer { line: lineno, n })?;
            if let Some((_, old)) = layer.norms.get(&j) {
                if *old != v {
                    return Err(IngestError::Conflict { line: lineno, what: format!("norm of component {j} in K{n}") });
                }
                warnings.push(format!("line {lineno}: repeated norm of component {j} in K{n}"));
            }
            layer.norms.insert(j, (lineno, v));
            continue;
        }
        if let Some(c) = VERDICT.captures(t) {
            let layer = layers.last_mut().ok_or(IngestError::Orphan { line: lineno, what: "verdict" })?;
            if layer.verdict.is_some() {
                return Err(IngestError::Conflict { line: lineno, what: format!("verdict of K{}", layer.n) });
            }
            let label: u32 = int(&c[3], lineno)?;
            let label_e: u32 = int(&c[5], lineno)?;
            if label != layer.n || label_e != layer.n {
                warnings.push(format!(
                    "line {lineno}: verdict under CK{} is labelled m(K{label}), e(K{label_e})",
                    layer.n
                ));
            }
            layer.verdict = Some(PrintedVerdict {
                kind: VerdictKind::from_word(&c[1]).expect("regex alternatives"),
                m: Some(int(&c[4], lineno)?),
                e: Some(int(&c[6], lineno)?),
                label_layer: Some(label),
                raw: t.to_string(),
            });
            continue;
        }
        for c in PREDICTION.captures_iter(t) {
            predictions.push(PrintedPrediction {
                kind: VerdictKind::from_word(&c[1]).expect("regex alternatives"),
                layer: int(&c[2], lineno)?,
                raw: c[0].to_string(),
            });
        }
    }

    let header = header.ok_or(IngestError::NoHeader)?;
    if layers.is_empty() {
        return Err(IngestError::NoLayers);
    }
    let p = match header.fields.get("p") {
        Some(s) => {
            let p = int(s, 0)?;
            padic::check_prime(p)?;
            p
        }
        None => {
            let p = infer_prime(&header, &layers)?;
            warnings.push(format!("p not given, inferred p = {p}"));
            p
        }
    };
    let ell = header.fields.get("ell").map(|s| int(s, 0)).transpose()?;
    let r = header.fields.get("r").map(|s| int(s, 0)).transpose()?;
    let declared: Option<u32> = header
        .fields
        .get("Nn")
        .or_else(|| header.fields.get("N"))
        .map(|s| int(s, 0))
        .transpose()?;
    let label = ["f", "PK"]
        .iter()
        .find_map(|k| header.fields.get(*k).map(|v| format!("{k}={v}")))
        .unwrap_or_default();
    let base = GroupType::new(header.base.iter().map(|&a| p_exponent(a, p)).collect());

    let mut records = Vec::new();
    for raw in layers {
        records.push(build_layer(raw, p, &mut warnings)?);
    }
    records.sort_by_key(|l| l.n);
    let top = records.last().map_or(0, |l| l.n);
    let tower = TowerData {
        p,
        n: declared.unwrap_or(0).max(top),
        ell,
        r,
        base,
        label,
        layers: records,
        predictions,
    };
    tower.validate()?;
    Ok(Parsed { tower, warnings })
}

/// Splits side-by-side column blocks into consecutive lines, keeping source line numbers.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let raw: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < raw.len() {
        let line = raw[i];
        let starts: Vec<usize> = CK_TOKEN.find_iter(line).map(|m| m.start()).collect();
        if starts.len() < 2 || line.contains("CK0=") {
            out.push((i + 1, line.to_string()));
            i += 1;
            continue;
        }
        let mut cuts = starts.clone();
        cuts[0] = 0;
        let mut end = i;
        while end < raw.len() && !raw[end].trim().is_empty() && !raw[end].contains("CK0=") {
            end += 1;
        }
        for (k, &from) in cuts.iter().enumerate() {
            for (off, l) in raw[i..end].iter().enumerate() {
                let to = cuts.get(k + 1).copied().unwrap_or(usize::MAX);
                let seg = slice_chars(l, from, to);
                out.push((i + off + 1, seg));
            }
        }
        i = end;
    }
    out
}

fn slice_chars(s: &str, from: usize, to: usize) -> String {
    s.chars().skip(from).take(to.saturating_sub(from)).collect()
}

fn parse_header(t: &str, lineno: usize) -> Result<Header, IngestError> {
    let mut h = Header::default();
    for c in HEADER_PAIR.captures_iter(t) {
        let (k, v) = (c[1].to_string(), c[2].to_string());
        if k == "CK0" {
            let inner = v.trim_start_matches('[').trim_end_matches(']');
            h.base = parse_list(inner, lineno)?.into_iter().map(|x| x.unsigned_abs()).collect();
        }
        h.fields.insert(k, v);
    }
    Ok(h)
}

fn int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, IngestError> {
    s.trim().parse().map_err(|_| IngestError::BadInteger { line, token: s.trim().to_string() })
}

fn parse_list(s: &str, line: usize) -> Result<Vec<i64>, IngestError> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(|t| int(t, line)).collect()
}

/// `v_p(a)` for `a >= 1`; `0` maps to `0`.
fn p_exponent(a: u64, p: u64) -> u32 {
    if a == 0 {
        0
    } else {
        padic::valuation_u64(a, p).expect("p checked")
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The unique prime that every printed p-part is a power of, narrowed by
/// `p | ell - 1` when `ell` is known.
fn infer_prime(header: &Header, layers: &[RawLayer]) -> Result<u64, IngestError> {
    let mut entries: Vec<u64> = header.base.clone();
    for l in layers {
        entries.extend(l.ppart.as_ref().unwrap_or(&l.listed));
    }
    let mut cands: Vec<u64> = entries.iter().filter(|&&a| a > 1).flat_map(|&a| prime_factors(a)).collect();
    cands.sort_unstable();
    cands.dedup();
    if let Some(ell) = header.fields.get("ell").and_then(|s| s.parse::<u64>().ok()) {
        let narrowed: Vec<u64> = cands.iter().copied().filter(|q| (ell - 1) % q == 0).collect();
        if !narrowed.is_empty() {
            cands = narrowed;
        }
    }
    match cands.as_slice() {
        [p] => Ok(*p),
        _ => Err(IngestError::AmbiguousPrime(cands)),
    }
}

fn build_layer(raw: RawLayer, p: u64, warnings: &mut Vec<String>) -> Result<LayerRecord, IngestError> {
    let n = raw.n;
    let listed_exps: Vec<u32> = match &raw.ppart {
        Some(pp) => {
            for (k, &a) in pp.iter().enumerate() {
                let e = p_exponent(a, p);
                if p.checked_pow(e) != Some(a) {
                    warnings.push(format!("K{n}: p-part entry {a} is not a power of {p}"));
                }
                if let Some(&l) = raw.listed.get(k) {
                    if p_exponent(l, p) != e {
                        warnings.push(format!("K{n}: p-part {a} does not match listed order {l}"));
                    }
                }
            }
            (0..raw.listed.len().max(pp.len()))
                .map(|k| pp.get(k).map_or(0, |&a| p_exponent(a, p)))
                .collect()
        }
        None => raw.listed.iter().map(|&a| p_exponent(a, p)).collect(),
    };
    // `kept[t]` is the 0-based listed index of the t-th generator with nontrivial p-part.
    let kept: Vec<usize> = (0..listed_exps.len()).filter(|&k| listed_exps[k] > 0).collect();
    let orders: Vec<u32> = kept.iter().map(|&k| listed_exps[k]).collect();
    let group = GroupType::new(orders.clone());
    let listed = listed_exps.len();

    let project = |line: usize, v: &[i64]| -> Result<Vec<u64>, IngestError> {
        let coords: Vec<i64> = if v.len() == listed {
            kept.iter().map(|&k| v[k]).collect()
        } else if v.len() == kept.len() {
            v.to_vec()
        } else {
            return Err(IngestError::Length { line, n, listed, kept: kept.len(), found: v.len() });
        };
        Ok(coords
            .iter()
            .zip(&orders)
            .map(|(&x, &e)| x.rem_euclid(p.pow(e) as i64) as u64)
            .collect())
    };
    // Maps a 1-based generator index to its position in `kept`.
    let position = |line: usize, j: usize| -> Result<Option<usize>, IngestError> {
        if j == 0 || (j > listed && j > kept.len()) {
            return Err(IngestError::GeneratorRange { line, n, j });
        }
        if listed == kept.len() || j > listed {
            return Ok(Some(j - 1));
        }
        Ok(kept.iter().position(|&k| k == j - 1))
    };

    let mut rows: Vec<Option<Vec<u64>>> = vec![None; kept.len()];
    let mut powers = Vec::new();
    for (&(i, j), (line, v)) in &raw.actions {
        let vec = project(*line, v)?;
        let Some(pos) = position(*line, j)? else {
            if vec.iter().any(|&x| x != 0) {
                warnings.push(format!("K{n}: ignoring action row of h_{j}, which has trivial p-part"));
            }
            continue;
        };
        if i == 1 {
            rows[pos] = Some(vec);
        } else if i >= 2 {
            powers.push((i, pos, vec));
        }
    }
    let mut norms: Vec<Option<Vec<u64>>> = vec![None; kept.len()];
    for (&j, (line, v)) in &raw.norms {
        let vec = project(*line, v)?;
        match position(*line, j)? {
            Some(pos) => norms[pos] = Some(vec),
            None if vec.iter().any(|&x| x != 0) => {
                warnings.push(format!("K{n}: norm of h_{j}, which has trivial p-part, is nonzero"));
            }
            None => {}
        }
    }

    let have_rows = rows.iter().any(Option::is_some);
    let module = if kept.is_empty() {
        Some((PGroupModule::trivial(p, n).map_err(|source| IngestError::Module { n, source })?, vec![]))
    } else if !have_rows {
        warnings.push(format!("K{n}: no action rows, structure only"));
        None
    } else {
        let missing: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_none())
            .map(|(t, _)| kept[t] + 1)
            .collect();
        if !missing.is_empty() {
            return Err(IngestError::MissingRows { n, missing });
        }
        Some(rows.into_iter().map(Option::unwrap).collect::<Vec<_>>())
            .map(|delta| assemble(p, orders.clone(), delta, n))
            .transpose()?
    };

    let (module, perm) = match module {
        Some((m, perm)) => (Some(m), perm),
        None => (None, (0..kept.len()).collect()),
    };
    if perm.iter().enumerate().any(|(a, &b)| a != b) {
        warnings.push(format!("K{n}: generators reordered by decreasing order {perm:?}"));
    }
    let printed_norms = if norms.is_empty() || norms.iter().all(Option::is_none) {
        None
    } else if norms.iter().any(Option::is_none) {
        warnings.push(format!("K{n}: norms printed for only some generators, ignored"));
        None
    } else {
        let norms: Vec<Vec<u64>> = norms.into_iter().map(Option::unwrap).collect();
        Some(perm.iter().map(|&old| permute(&norms[old], &perm)).collect())
    };
    let inverse = invert(&perm);
    let printed_powers = powers
        .into_iter()
        .map(|(i, pos, v)| (i, inverse[pos], permute(&v, &perm)))
        .collect();
    Ok(LayerRecord { n, group, module, printed_norms, printed_powers, verdict: raw.verdict, label: raw.label })
}

/// Builds a module from rows in generator order; sorts when needed.
fn assemble(
    p: u64,
    orders: Vec<u32>,
    delta: Vec<Vec<u64>>,
    n: u32,
) -> Result<(PGroupModule, Vec<usize>), IngestError> {
    PGroupModule::from_unsorted(p, orders, delta, n).map_err(|source| IngestError::Module { n, source })
}

fn permute(v: &[u64], perm: &[usize]) -> Vec<u64> {
    perm.iter().map(|&i| v[i]).collect()
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

const CANONICAL_MAGIC: &str = "capnorm-tower 1";

fn kind_word(k: VerdictKind) -> &'static str {
    match k {
        VerdictKind::Complete => "Complete",
        VerdictKind::Partial => "Partial",
        VerdictKind::None => "None",
    }
}

fn join(v: impl IntoIterator<Item = impl ToString>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn line_with(key: &str, rest: &str) -> String {
    if rest.is_empty() {
        format!("{key}\n")
    } else {
        format!("{key} {rest}\n")
    }
}

/// Serializes a tower to the canonical format.
pub fn to_canonical(t: &TowerData) -> String {
    let mut s = String::new();
    writeln!(s, "{CANONICAL_MAGIC}").unwrap();
    writeln!(s, "p {}", t.p).unwrap();
    writeln!(s, "height {}", t.n).unwrap();
    if let Some(ell) = t.ell {
        writeln!(s, "ell {ell}").unwrap();
    }
    if let Some(r) = t.r {
        writeln!(s, "r {r}").unwrap();
    }
    if !t.label.is_empty() {
        writeln!(s, "label {}", t.label).unwrap();
    }
    s += &line_with("base", &join(t.base.exponents()));
    for pr in &t.predictions {
        s += &line_with(&format!("predict {} {}", kind_word(pr.kind), pr.layer), &pr.raw);
    }
    for l in &t.layers {
        writeln!(s, "layer {}", l.n).unwrap();
        if let Some(label) = &l.label {
            writeln!(s, "label {label}").unwrap();
        }
        match &l.module {
            Some(m) => {
                s += &line_with(&format!("module {}", m.n()), &join(m.orders()));
                for row in m.delta() {
                    s += &line_with("delta", &join(row));
                }
            }
            None => s += &line_with("group", &join(l.group.exponents())),
        }
        if let Some(norms) = &l.printed_norms {
            for (j, v) in norms.iter().enumerate() {
                s += &line_with(&format!("norm {}", j + 1), &join(v));
            }
        }
        for (i, j, v) in &l.printed_powers {
            s += &line_with(&format!("power {i} {}", j + 1), &join(v));
        }
        if let Some(v) = &l.verdict {
            let opt = |x: Option<u32>| x.map_or("-".to_string(), |x| x.to_string());
            let head = format!(
                "verdict {} {} {} {}",
                kind_word(v.kind),
                opt(v.m),
                opt(v.e),
                opt(v.label_layer)
            );
            s += &line_with(&head, &v.raw);
        }
        writeln!(s, "end").unwrap();
    }
    s
}

pub fn parse_canonical(text: &str) -> Result<TowerData, IngestError> {
    parse_canonical_with_warnings(text).map(|p| p.tower)
}

#[derive(Default)]
struct CanonLayer {
    n: u32,
    label: Option<String>,
    group: Option<Vec<u32>>,
    module: Option<(u32, Vec<u32>)>,
    delta: Vec<Vec<u64>>,
    norms: Vec<Vec<u64>>,
    powers: Vec<(u32, usize, Vec<u64>)>,
    verdict: Option<PrintedVerdict>,
    line: usize,
}

pub fn parse_canonical_with_warnings(text: &str) -> Result<Parsed, IngestError> {
    let err = |line: usize, msg: String| IngestError::Canonical { line, msg };
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    match lines.next() {
        Some((_, l)) if l.trim() == CANONICAL_MAGIC => {}
        Some((n, l)) => return Err(err(n, format!("expected {CANONICAL_MAGIC:?}, found {l:?}"))),
        None => return Err(err(0, "empty input".into())),
    }
    let mut p = None;
    let mut height = None;
    let mut ell = None;
    let mut r = None;
    let mut label = String::new();
    let mut base = None;
    let mut predictions = Vec::new();
    let mut layers: Vec<CanonLayer> = Vec::new();
    let mut current: Option<CanonLayer> = None;
    let mut warnings = Vec::new();

    let nums = |line: usize, s: &str| -> Result<Vec<u64>, IngestError> {
        s.split_whitespace()
            .map(|t| t.parse().map_err(|_| err(line, format!("bad integer {t:?}"))))
            .collect()
    };
    let one = |line: usize, s: &str| -> Result<u64, IngestError> {
        match nums(line, s)?.as_slice() {
            [x] => Ok(*x),
            _ => Err(err(line, format!("expected one integer, found {s:?}"))),
        }
    };

    for (ln, l) in lines {
        let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
        match (key, current.as_mut()) {
            ("layer", None) => {
                current = Some(CanonLayer { n: one(ln, rest)? as u32, line: ln, ..Default::default() });
            }
            ("end", Some(_)) => layers.push(current.take().unwrap()),
            ("label", Some(c)) => c.label = Some(rest.to_string()),
            ("group", Some(c)) => c.group = Some(nums(ln, rest)?.into_iter().map(|x| x as u32).collect()),
            ("module", Some(c)) => {
                let v = nums(ln, rest)?;
                let (&n, ords) = v.split_first().ok_or_else(|| err(ln, "module needs N".into()))?;
                c.module = Some((n as u32, ords.iter().map(|&x| x as u32).collect()));
            }
            ("delta", Some(c)) => c.delta.push(nums(ln, rest)?),
            ("norm", Some(c)) => {
                let v = nums(ln, rest)?;
                let (&j, vec) = v.split_first().ok_or_else(|| err(ln, "norm needs an index".into()))?;
                if j as usize != c.norms.len() + 1 {
                    return Err(err(ln, format!("norm {j} out of sequence")));
                }
                c.norms.push(vec.to_vec());
            }
            ("power", Some(c)) => {
                let v = nums(ln, rest)?;
                if v.len() < 2 || v[1] == 0 {
                    return Err(err(ln, "power needs i and j >= 1".into()));
                }
                c.powers.push((v[0] as u32, v[1] as usize - 1, v[2..].to_vec()));
            }
            ("verdict", Some(c)) => {
                let parts: Vec<&str> = rest.splitn(5, ' ').collect();
                if parts.len() < 4 {
                    return Err(err(ln, "verdict needs kind, m, e and label layer".into()));
                }
                let kind = match parts[0] {
                    "Complete" => VerdictKind::Complete,
                    "Partial" => VerdictKind::Partial,
                    "None" => VerdictKind::None,
                    k => return Err(err(ln, format!("unknown verdict kind {k:?}"))),
                };
                let opt = |s: &str| -> Result<Option<u32>, IngestError> {
                    if s == "-" {
                        Ok(None)
                    } else {
                        one(ln, s).map(|x| Some(x as u32))
                    }
                };
                c.verdict = Some(PrintedVerdict {
                    kind,
                    m: opt(parts[1])?,
                    e: opt(parts[2])?,
                    label_layer: opt(parts[3])?,
                    raw: parts.get(4).unwrap_or(&"").to_string(),
                });
            }
            ("p", None) => p = Some(one(ln, rest)?),
            ("height", None) => height = Some(one(ln, rest)? as u32),
            ("ell", None) => ell = Some(one(ln, rest)?),
            ("r", None) => r = Some(one(ln, rest)? as u32),
            ("label", None) => label = rest.to_string(),
            ("base", None) => base = Some(nums(ln, rest)?.into_iter().map(|x| x as u32).collect::<Vec<_>>()),
            ("predict", None) => {
                let parts: Vec<&str> = rest.splitn(3, ' ').collect();
                if parts.len() < 2 {
                    return Err(err(ln, "predict needs kind and layer".into()));
                }
                let kind = match parts[0] {
                    "Complete" => VerdictKind::Complete,
                    "Partial" => VerdictKind::Partial,
                    "None" => VerdictKind::None,
                    k => return Err(err(ln, format!("unknown verdict kind {k:?}"))),
                };
                predictions.push(PrintedPrediction {
                    kind,
                    layer: one(ln, parts[1])? as u32,
                    raw: parts.get(2).unwrap_or(&"").to_string(),
                });
            }
            (k, Some(_)) => return Err(err(ln, format!("unexpected {k:?} inside a layer"))),
            (k, None) => return Err(err(ln, format!("unexpected {k:?} outside a layer"))),
        }
    }
    if let Some(c) = current {
        return Err(err(c.line, format!("layer {} has no end", c.n)));
    }
    let p = p.ok_or_else(|| err(0, "missing p".into()))?;
    padic::check_prime(p)?;
    let base = base.ok_or_else(|| err(0, "missing base".into()))?;

    let mut records = Vec::new();
    for c in layers {
        let n = c.n;
        let (group, module, perm) = match (c.group, c.module) {
            (Some(_), Some(_)) => return Err(err(c.line, format!("layer {n} has both group and module"))),
            (None, None) => return Err(err(c.line, format!("layer {n} has neither group nor module"))),
            (Some(g), None) => {
                if !c.delta.is_empty() {
                    return Err(err(c.line, format!("layer {n}: delta rows without module")));
                }
                (GroupType::new(g), None, vec![])
            }
            (None, Some((mn, ords))) => {
                let (m, perm) = PGroupModule::from_unsorted(p, ords.clone(), c.delta, mn)
                    .map_err(|source| IngestError::Module { n, source })?;
                if perm.iter().enumerate().any(|(a, &b)| a != b) {
                    warnings.push(format!("layer {n}: generators reordered by decreasing order {perm:?}"));
                }
                (GroupType::new(ords), Some(m), perm)
            }
        };
        let r = group.rank();
        let check = |v: &Vec<u64>, what: &str| {
            if v.len() == r {
                Ok(())
            } else {
                Err(err(c.line, format!("layer {n}: {what} has length {}, expected {r}", v.len())))
            }
        };
        let printed_norms = if c.norms.is_empty() {
            None
        } else {
            if c.norms.len() != r {
                return Err(err(c.line, format!("layer {n}: {} norms for {r} generators", c.norms.len())));
            }
            for v in &c.norms {
                check(v, "norm")?;
            }
            Some(if module.is_some() {
                perm.iter().map(|&old| permute(&c.norms[old], &perm)).collect()
            } else {
                c.norms
            })
        };
        let inverse = invert(&perm);
        let mut printed_powers = Vec::new();
        for (i, j, v) in c.powers {
            check(&v, "power row")?;
            if j >= r {
                return Err(err(c.line, format!("layer {n}: power row for generator {}", j + 1)));
            }
            printed_powers.push(if module.is_some() { (i, inverse[j], permute(&v, &perm)) } else { (i, j, v) });
        }
        records.push(LayerRecord {
            n,
            group,
            module,
            printed_norms,
            printed_powers,
            verdict: c.verdict,
            label: c.label,
        });
    }
    if records.is_empty() {
        return Err(IngestError::NoLayers);
    }
    let top = records.iter().map(|l| l.n).max().unwrap_or(0);
    let tower = TowerData {
        p,
        n: height.unwrap_or(top),
        ell,
        r,
        base: GroupType::new(base),
        label,
        layers: records,
        predictions,
    };
    tower.validate()?;
    Ok(Parsed { tower, warnings })
}
