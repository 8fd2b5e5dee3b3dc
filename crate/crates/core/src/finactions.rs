//! Finite self-maps, the normalized Hamming metric, and witness checkers.
//!
//! A witness assigns to each group-element label a self-map of a common
//! finite carrier. Three grades of verification: `check_sofic` allows a
//! defect of at most `eps` per product and demands near-freeness of
//! non-identity labels; `check_lef` demands exact multiplicativity and
//! nontriviality; `check_compressed` relaxes the identity-distance bound to
//! a per-label constant, which tensor-power amplification
//! (`amplify_witness`) then boosts by the exact law
//! `d(f⊗k, g⊗k) = 1 − (1 − d(f,g))^k`.
//!
//! All distances are exact rationals. Composition convention: `compose(f, g)`
//! is `x ↦ f(g(x))`, the left map applied last, so a multiplicative witness
//! satisfies `theta(fg) = compose(theta(f), theta(g))`.

use crate::budget::{check, BudgetExceeded};
use crate::ratio::{rational, Rational};
use crate::report::Report;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FinError {
    #[error("carrier mismatch: {0} vs {1}")]
    CarrierMismatch(usize, usize),
    #[error("missing label `{0}`")]
    MissingLabel(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid witness spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A finite carrier {0, …, size−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Carrier(usize);

impl Carrier {
    pub fn new(size: usize) -> Result<Carrier, FinError> {
        if size == 0 {
            return Err(FinError::InvalidSpec("carrier must be nonempty".into()));
        }
        Ok(Carrier(size))
    }

    pub fn size(&self) -> usize {
        self.0
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A self-map of a finite carrier, as a full image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMap {
    size: usize,
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(carrier: Carrier, table: Vec<usize>) -> Result<FiniteMap, FinError> {
        if table.len() != carrier.size() {
            return Err(FinError::InvalidMap(format!(
                "table length {} != carrier size {}",
                table.len(),
                carrier.size()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= carrier.size()) {
            return Err(FinError::InvalidMap(format!("entry {bad} out of range")));
        }
        Ok(FiniteMap { size: carrier.size(), table })
    }

    pub fn identity(carrier: Carrier) -> FiniteMap {
        FiniteMap { size: carrier.size(), table: (0..carrier.size()).collect() }
    }

    /// Builds the map `x ↦ f(x)` pointwise.
    pub fn from_fn(
        carrier: Carrier,
        f: impl FnMut(usize) -> usize,
    ) -> Result<FiniteMap, FinError> {
        FiniteMap::new(carrier, (0..carrier.size()).map(f).collect())
    }

    pub fn carrier(&self) -> Carrier {
        Carrier(self.size)
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &y)| i == y)
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.size];
        for &y in &self.table {
            if seen[y] {
                return false;
            }
            seen[y] = true;
        }
        true
    }
}

/// `x ↦ f(g(x))`: the left map applied last.
pub fn compose(f: &FiniteMap, g: &FiniteMap) -> Result<FiniteMap, FinError> {
    if f.size != g.size {
        return Err(FinError::CarrierMismatch(f.size, g.size));
    }
    Ok(FiniteMap { size: f.size, table: g.table.iter().map(|&y| f.table[y]).collect() })
}

/// Normalized Hamming distance: |{x : f(x) ≠ g(x)}| / |carrier|, exact.
pub fn hamming(f: &FiniteMap, g: &FiniteMap) -> Result<Rational, FinError> {
    if f.size != g.size {
        return Err(FinError::CarrierMismatch(f.size, g.size));
    }
    let diff = f.table.iter().zip(&g.table).filter(|(a, b)| a != b).count();
    Ok(rational(diff as i64, f.size as i64))
}

/// Fraction of fixed points; equals `1 − hamming(f, id)`.
pub fn fix_fraction(f: &FiniteMap) -> Rational {
    let fixed = f.table.iter().enumerate().filter(|(i, &y)| *i == y).count();
    rational(fixed as i64, f.size as i64)
}

/// Coordinatewise k-th power on tuples, encoded most-significant-first in
/// mixed radix: the tuple (x_1, …, x_k) is the index Σ x_i · s^(k−i).
pub fn tensor_power(f: &FiniteMap, k: u32, cap: usize) -> Result<FiniteMap, FinError> {
    if k == 0 {
        return Err(FinError::InvalidSpec("tensor power needs k >= 1".into()));
    }
    let size = (f.size as u128).checked_pow(k).ok_or_else(|| {
        BudgetExceeded(format!("tensor carrier {}^{k} overflows", f.size))
    })?;
    check("tensor carrier", size, cap as u128)?;
    let size = size as usize;
    let mut table = vec![0usize; size];
    for (idx, entry) in table.iter_mut().enumerate() {
        let mut rest = idx;
        let mut image = 0usize;
        let mut scale = size; // s^k, divided down to s^(k-1), …, 1
        for _ in 0..k {
            scale /= f.size;
            let digit = rest / scale;
            rest %= scale;
            image += f.table[digit] * scale;
        }
        *entry = image;
    }
    Ok(FiniteMap { size, table })
}

/// A label-indexed family of maps on one carrier. The witness object all
/// checkers consume.
#[derive(Debug, Clone)]
pub struct MapAssignment {
    carrier: Carrier,
    entries: Vec<(String, FiniteMap)>,
    index: BTreeMap<String, usize>,
    identity_label: String,
}

impl MapAssignment {
    /// `entries` keep their given order; exactly one label is the identity
    /// label and must map to the identity table.
    pub fn new(
        carrier: Carrier,
        entries: Vec<(String, FiniteMap)>,
        identity_label: &str,
    ) -> Result<MapAssignment, FinError> {
        let mut index = BTreeMap::new();
        for (i, (name, map)) in entries.iter().enumerate() {
            if map.carrier() != carrier {
                return Err(FinError::CarrierMismatch(map.size, carrier.size()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(FinError::InvalidSpec(format!("duplicate label `{name}`")));
            }
        }
        let id_idx = *index
            .get(identity_label)
            .ok_or_else(|| FinError::MissingLabel(identity_label.to_string()))?;
        if !entries[id_idx].1.is_identity() {
            return Err(FinError::InvalidSpec(format!(
                "identity label `{identity_label}` does not map to the identity"
            )));
        }
        Ok(MapAssignment { carrier, entries, index, identity_label: identity_label.to_string() })
    }

    pub fn carrier(&self) -> Carrier {
        self.carrier
    }

    pub fn identity_label(&self) -> &str {
        &self.identity_label
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, label: &str) -> Result<&FiniteMap, FinError> {
        self.index
            .get(label)
            .map(|&i| &self.entries[i].1)
            .ok_or_else(|| FinError::MissingLabel(label.to_string()))
    }
}

/// Tensor-powers every label's map; the identity label stays the identity.
pub fn amplify_witness(
    theta: &MapAssignment,
    k: u32,
    cap: usize,
) -> Result<MapAssignment, FinError> {
    let mut entries = Vec::with_capacity(theta.entries.len());
    for (name, map) in &theta.entries {
        entries.push((name.clone(), tensor_power(map, k, cap)?));
    }
    let carrier = entries[0].1.carrier();
    MapAssignment::new(carrier, entries, &theta.identity_label)
}

/// Partial multiplication table on labels: `(f, g) ↦ fg`.
#[derive(Debug, Clone, Default)]
pub struct MultTable {
    products: BTreeMap<(String, String), String>,
}

impl MultTable {
    pub fn new() -> MultTable {
        MultTable::default()
    }

    pub fn insert(&mut self, f: &str, g: &str, fg: &str) {
        self.products.insert((f.to_string(), g.to_string()), fg.to_string());
    }

    pub fn product(&self, f: &str, g: &str) -> Option<&str> {
        self.products.get(&(f.to_string(), g.to_string())).map(|s| s.as_str())
    }

    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.products.iter().map(|((f, g), fg)| (f.as_str(), g.as_str(), fg.as_str()))
    }
}

/// Per-label identity-distance lower bounds plus one product tolerance.
#[derive(Debug, Clone)]
pub struct CompressedSpec {
    labels: Vec<(String, Rational)>,
    eps: Rational,
}

impl CompressedSpec {
    /// Each bound must lie in (0, 1]; the tolerance in (0, 1).
    pub fn new(labels: Vec<(String, Rational)>, eps: Rational) -> Result<CompressedSpec, FinError> {
        if labels.is_empty() {
            return Err(FinError::InvalidSpec("compressed spec needs at least one label".into()));
        }
        for (name, bound) in &labels {
            if *bound <= Rational::zero() || *bound > Rational::one() {
                return Err(FinError::InvalidSpec(format!(
                    "identity-distance bound for `{name}` must be in (0, 1]"
                )));
            }
        }
        if eps <= Rational::zero() || eps >= Rational::one() {
            return Err(FinError::InvalidSpec("product tolerance must be in (0, 1)".into()));
        }
        Ok(CompressedSpec { labels, eps })
    }

    pub fn range(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[(String, Rational)] {
        &self.labels
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }
}

/// Sofic witness check over a finite label set `f_set`:
/// every composable product defect is at most `eps`, and every non-identity
/// label is farther than `1 − eps` from the identity.
pub fn check_sofic(
    theta: &MapAssignment,
    f_set: &[String],
    eps: &Rational,
    mult: &MultTable,
) -> Result<Report, FinError> {
    let mut report = Report::new("check-sofic");
    report.param("eps", crate::ratio::render(eps));
    let id = FiniteMap::identity(theta.carrier());
    for f in f_set {
        for g in f_set {
            let Some(fg) = mult.product(f, g) else { continue };
            if !f_set.iter().any(|x| x == fg) {
                continue;
            }
            let defect = hamming(theta.get(fg)?, &compose(theta.get(f)?, theta.get(g)?)?)?;
            let pass = defect <= *eps;
            report.check(format!("product.{f}*{g}={fg}"), pass, Some(defect));
        }
    }
    for f in f_set {
        if f == theta.identity_label() {
            continue;
        }
        let dist = hamming(theta.get(f)?, &id)?;
        let pass = dist > Rational::one() - eps;
        report.check(format!("identity-distance.{f}"), pass, Some(dist));
    }
    Ok(report)
}

/// LEF check: exact multiplicativity (defect exactly 0) and every
/// non-identity label acts nontrivially.
pub fn check_lef(
    theta: &MapAssignment,
    f_set: &[String],
    mult: &MultTable,
) -> Result<Report, FinError> {
    let mut report = Report::new("check-lef");
    let id = FiniteMap::identity(theta.carrier());
    for f in f_set {
        for g in f_set {
            let Some(fg) = mult.product(f, g) else { continue };
            if !f_set.iter().any(|x| x == fg) {
                continue;
            }
            let defect = hamming(theta.get(fg)?, &compose(theta.get(f)?, theta.get(g)?)?)?;
            let pass = defect.is_zero();
            if pass {
                report.check(format!("product.{f}*{g}={fg}"), pass, Some(defect));
            } else {
                report.check_with_witness(
                    format!("product.{f}*{g}={fg}"),
                    pass,
                    Some(defect),
                    format!("theta({fg}) != theta({f})theta({g})"),
                );
            }
        }
    }
    for f in f_set {
        if f == theta.identity_label() {
            continue;
        }
        let dist = hamming(theta.get(f)?, &id)?;
        report.check(format!("nontrivial.{f}"), !dist.is_zero(), Some(dist));
    }
    Ok(report)
}

/// Compressed witness check: strict product defect `< eps` for every pair of
/// listed labels, strict identity distance `> bound_i` per label. Requires
/// the multiplication table to resolve every pair.
pub fn check_compressed(
    theta: &MapAssignment,
    spec: &CompressedSpec,
    mult: &MultTable,
) -> Result<Report, FinError> {
    let mut report = Report::new("check-compressed");
    report.param("eps", crate::ratio::render(spec.eps()));
    report.param("range", spec.range());
    let id = FiniteMap::identity(theta.carrier());
    for (f, _) in spec.labels() {
        for (g, _) in spec.labels() {
            let fg = mult
                .product(f, g)
                .ok_or_else(|| FinError::MissingLabel(format!("{f}*{g}")))?
                .to_string();
            let defect = hamming(theta.get(&fg)?, &compose(theta.get(f)?, theta.get(g)?)?)?;
            let pass = defect < *spec.eps();
            report.check(format!("product.{f}*{g}={fg}"), pass, Some(defect));
        }
    }
    for (f, bound) in spec.labels() {
        let dist = hamming(theta.get(f)?, &id)?;
        report.check(format!("identity-distance.{f}>{}", crate::ratio::render(bound)),
            dist > *bound, Some(dist));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Witness file format.
//
//   witness
//   carrier <size>
//   label <name> [identity]
//   image <x0> <x1> ... <x(size-1)>
//   mult <f> <g> <fg>
//
// `label` and its `image` line come in pairs; `mult` lines may appear
// anywhere after the header. Blank lines and `#` comments are ignored.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("witness file line {line}: {msg}")]
pub struct WitnessParseError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_witness(
    text: &str,
) -> Result<(MapAssignment, MultTable), WitnessParseError> {
    let err = |line: usize, msg: String| WitnessParseError { line, msg };
    let mut carrier: Option<Carrier> = None;
    let mut entries: Vec<(String, FiniteMap)> = Vec::new();
    let mut identity: Option<String> = None;
    let mut pending: Option<(usize, String)> = None;
    let mut mult = MultTable::new();
    let mut saw_header = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        match key {
            "witness" => saw_header = true,
            "carrier" => {
                let size: usize = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, "carrier needs a positive size".into()))?;
                carrier = Some(
                    Carrier::new(size).map_err(|e| err(line_no, e.to_string()))?,
                );
            }
            "label" => {
                if pending.is_some() {
                    return Err(err(line_no, "previous label has no image line".into()));
                }
                let name = parts
                    .next()
                    .ok_or_else(|| err(line_no, "label needs a name".into()))?
                    .to_string();
                if let Some(flag) = parts.next() {
                    if flag != "identity" {
                        return Err(err(line_no, format!("unknown label flag `{flag}`")));
                    }
                    if identity.is_some() {
                        return Err(err(line_no, "two identity labels".into()));
                    }
                    identity = Some(name.clone());
                }
                pending = Some((line_no, name));
            }
            "image" => {
                let (label_line, name) = pending
                    .take()
                    .ok_or_else(|| err(line_no, "image line without a label".into()))?;
                let carrier = carrier
                    .ok_or_else(|| err(label_line, "carrier must come before labels".into()))?;
                let mut table = Vec::with_capacity(carrier.size());
                for tok in parts {
                    table.push(
                        tok.parse::<usize>()
                            .map_err(|_| err(line_no, format!("bad image entry `{tok}`")))?,
                    );
                }
                let map =
                    FiniteMap::new(carrier, table).map_err(|e| err(line_no, e.to_string()))?;
                entries.push((name, map));
            }
            "mult" => {
                let f = parts.next();
                let g = parts.next();
                let fg = parts.next();
                match (f, g, fg) {
                    (Some(f), Some(g), Some(fg)) => mult.insert(f, g, fg),
                    _ => return Err(err(line_no, "mult needs three labels".into())),
                }
            }
            other => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(err(0, "missing `witness` header".into()));
    }
    if pending.is_some() {
        return Err(err(0, "trailing label without image".into()));
    }
    let carrier = carrier.ok_or_else(|| err(0, "missing carrier".into()))?;
    let identity = identity.ok_or_else(|| err(0, "no identity label declared".into()))?;
    let assignment = MapAssignment::new(carrier, entries, &identity)
        .map_err(|e| err(0, e.to_string()))?;
    Ok((assignment, mult))
}

pub fn render_witness(theta: &MapAssignment, mult: &MultTable) -> String {
    let mut out = String::from("witness\n");
    out.push_str(&format!("carrier {}\n", theta.carrier().size()));
    for (name, map) in &theta.entries {
        if name == theta.identity_label() {
            out.push_str(&format!("label {name} identity\n"));
        } else {
            out.push_str(&format!("label {name}\n"));
        }
        let cells: Vec<String> = map.table().iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("image {}\n", cells.join(" ")));
    }
    for (f, g, fg) in mult.triples() {
        out.push_str(&format!("mult {f} {g} {fg}\n"));
    }
    out
}
