//! Elements of the topological full group of a substitution subshift.
//!
//! An element is a total exponent table over the admissible centered words
//! of a fixed window radius `w`: on the cylinder of each word it acts as
//! that power of the shift. Totality over `language(2w+1)` makes
//! composition, inversion and equality decidable exactly. The module also
//! builds the finite LEF quotients: the orbit permutation of a basepoint,
//! reduced modulo a modulus `n` chosen so that the displacement data
//! repeats across the seam and every short element moves a point below `n`.
//!
//! All certificates are explicit: bijectivity produces the inverse element
//! and checks both compositions against the identity at table level; the
//! quotient checks that every image is a permutation, that the assignment
//! is injective, and that it is multiplicative on all composable pairs.

use crate::budget::{exceeded, Budget, BudgetExceeded};
use crate::finactions::{Carrier, FiniteMap, FinError, MapAssignment, MultTable};
use crate::subshift::{SubError, Substitution, TwoSidedPoint};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FgError {
    #[error("table is missing admissible word `{0}`")]
    IncompleteTable(String),
    #[error("table has non-admissible word `{0}`")]
    UnknownWord(String),
    #[error("not a bijection: {0}")]
    NotBijective(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error(transparent)]
    Sub(#[from] SubError),
    #[error(transparent)]
    Fin(#[from] FinError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A clopen-piecewise shift power, given by a total exponent table over the
/// admissible words of length 2w+1 (positions −w..w around the argument).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullGroupElement {
    sub: Arc<Substitution>,
    radius: usize,
    table: BTreeMap<String, i64>,
    bound: i64,
}

impl FullGroupElement {
    /// Validates totality: the table keys must be exactly
    /// `language(2·radius+1)`.
    pub fn from_table(
        sub: Arc<Substitution>,
        radius: usize,
        table: BTreeMap<String, i64>,
        budget: &Budget,
    ) -> Result<FullGroupElement, FgError> {
        let admissible = sub.language(2 * radius + 1, budget)?;
        for word in admissible.iter() {
            if !table.contains_key(word) {
                return Err(FgError::IncompleteTable(word.clone()));
            }
        }
        for word in table.keys() {
            if !admissible.contains(word) {
                return Err(FgError::UnknownWord(word.clone()));
            }
        }
        let bound = table.values().map(|n| n.abs()).max().unwrap_or(0);
        Ok(FullGroupElement { sub, radius, table, bound })
    }

    pub fn identity(sub: Arc<Substitution>, budget: &Budget) -> Result<FullGroupElement, FgError> {
        let table = sub.language(1, budget)?.into_iter().map(|w| (w, 0)).collect();
        FullGroupElement::from_table(sub, 0, table, budget)
    }

    pub fn substitution(&self) -> &Arc<Substitution> {
        &self.sub
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// The cocycle bound: the largest |exponent| in the table.
    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn table(&self) -> &BTreeMap<String, i64> {
        &self.table
    }

    pub fn is_identity_table(&self) -> bool {
        self.table.values().all(|&n| n == 0)
    }

    /// Exponent on the cylinder of a full centered word.
    pub fn exponent_for_word(&self, word: &str) -> Result<i64, FgError> {
        self.table
            .get(word)
            .copied()
            .ok_or_else(|| FgError::IncompleteTable(word.to_string()))
    }

    /// Exponent at an orbit position of the basepoint.
    pub fn exponent_at(&self, point: &TwoSidedPoint, pos: i64) -> Result<i64, FgError> {
        let w = self.radius as i64;
        let word = point.window_string(pos - w, pos + w)?;
        self.exponent_for_word(&word)
    }

    /// Orbit action: position + exponent at that position.
    pub fn apply(&self, point: &TwoSidedPoint, pos: i64) -> Result<i64, FgError> {
        Ok(pos + self.exponent_at(point, pos)?)
    }
}

fn central(chars: &[char], center: i64, radius: usize) -> String {
    let mid = chars.len() as i64 / 2;
    let lo = (mid + center - radius as i64) as usize;
    let hi = (mid + center + radius as i64) as usize;
    chars[lo..=hi].iter().collect()
}

/// `outer ∘ inner`: the element acting as `inner` first, then `outer`.
/// The result window radius is `r_inner + r_outer + bound_inner`, wide
/// enough to determine the outer exponent after the inner displacement.
pub fn compose_elements(
    outer: &FullGroupElement,
    inner: &FullGroupElement,
    budget: &Budget,
) -> Result<FullGroupElement, FgError> {
    if outer.sub != inner.sub {
        return Err(FgError::InvalidElement("elements over different substitutions".into()));
    }
    let radius = inner.radius + outer.radius + inner.bound.unsigned_abs() as usize;
    let words = inner.sub.language(2 * radius + 1, budget)?;
    let mut table = BTreeMap::new();
    for word in words {
        let chars: Vec<char> = word.chars().collect();
        let n1 = inner.exponent_for_word(&central(&chars, 0, inner.radius))?;
        let n2 = outer.exponent_for_word(&central(&chars, n1, outer.radius))?;
        table.insert(word, n1 + n2);
    }
    FullGroupElement::from_table(inner.sub.clone(), radius, table, budget)
}

/// Exact group-element equality: exponents agree on every admissible word
/// of the wider window.
pub fn element_equal(
    e1: &FullGroupElement,
    e2: &FullGroupElement,
    budget: &Budget,
) -> Result<bool, FgError> {
    if e1.sub != e2.sub {
        return Err(FgError::InvalidElement("elements over different substitutions".into()));
    }
    let radius = e1.radius.max(e2.radius);
    let words = e1.sub.language(2 * radius + 1, budget)?;
    for word in words {
        let chars: Vec<char> = word.chars().collect();
        let n1 = e1.exponent_for_word(&central(&chars, 0, e1.radius))?;
        let n2 = e2.exponent_for_word(&central(&chars, 0, e2.radius))?;
        if n1 != n2 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certifies bijectivity by constructing the inverse table: every
/// admissible target word must have exactly one preimage displacement.
/// The constructed inverse is then verified by composing on both sides.
pub fn check_bijection(
    e: &FullGroupElement,
    budget: &Budget,
) -> Result<FullGroupElement, FgError> {
    let a = e.bound.unsigned_abs() as usize;
    let radius = e.radius + a;
    let words = e.sub.language(2 * radius + 1, budget)?;
    let mut table = BTreeMap::new();
    for word in words {
        let chars: Vec<char> = word.chars().collect();
        let mut candidates = Vec::new();
        for d in -(a as i64)..=(a as i64) {
            let n = e.exponent_for_word(&central(&chars, d, e.radius))?;
            if n == -d {
                candidates.push(d);
            }
        }
        match candidates.as_slice() {
            [d] => {
                table.insert(word, *d);
            }
            [] => {
                return Err(FgError::NotBijective(format!(
                    "cylinder `{word}` is never hit"
                )))
            }
            many => {
                return Err(FgError::NotBijective(format!(
                    "cylinder `{word}` is hit {} times",
                    many.len()
                )))
            }
        }
    }
    let inverse = FullGroupElement::from_table(e.sub.clone(), radius, table, budget)?;
    let id = FullGroupElement::identity(e.sub.clone(), budget)?;
    if !element_equal(&compose_elements(&inverse, e, budget)?, &id, budget)? {
        return Err(FgError::CertificationFailed("inverse ∘ element != identity".into()));
    }
    if !element_equal(&compose_elements(e, &inverse, budget)?, &id, budget)? {
        return Err(FgError::CertificationFailed("element ∘ inverse != identity".into()));
    }
    Ok(inverse)
}

/// The transposition swapping the two halves of the cylinder of an
/// admissible two-letter word `fs` (radius-1 element): exponent +1 where
/// the word sits at (0, 1), −1 where it sits at (−1, 0), else 0. The two
/// cases are disjoint because a two-letter word with distinct letters
/// cannot overlap itself at shift one.
pub fn adjacent_transposition(
    sub: &Arc<Substitution>,
    first: char,
    second: char,
    budget: &Budget,
) -> Result<FullGroupElement, FgError> {
    if first == second {
        return Err(FgError::InvalidElement(
            "transposition pattern letters must differ".into(),
        ));
    }
    let words = sub.language(3, budget)?;
    let mut table = BTreeMap::new();
    for word in words {
        let c: Vec<char> = word.chars().collect();
        let exp = if c[1] == first && c[2] == second {
            1
        } else if c[0] == first && c[1] == second {
            -1
        } else {
            0
        };
        table.insert(word, exp);
    }
    FullGroupElement::from_table(sub.clone(), 1, table, budget)
}

/// An element evaluated along the orbit of a basepoint.
#[derive(Debug, Clone, Copy)]
pub struct OrbitPermutation<'a> {
    pub element: &'a FullGroupElement,
    pub point: &'a TwoSidedPoint,
}

impl OrbitPermutation<'_> {
    pub fn map(&self, pos: i64) -> Result<i64, FgError> {
        self.element.apply(self.point, pos)
    }
}

/// Per-position displacement tuples of a generator list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LSequence {
    pub lo: i64,
    /// `values[i]` is the tuple at position `lo + i`, one entry per
    /// generator.
    pub values: Vec<Vec<i64>>,
}

impl LSequence {
    pub fn tuple_at(&self, pos: i64) -> Option<&[i64]> {
        let idx = pos.checked_sub(self.lo)?;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).map(|v| v.as_slice())
    }
}

/// Evaluates the displacement tuple of each generator at every position of
/// `[lo, hi]`.
pub fn l_sequence(
    gens: &[FullGroupElement],
    point: &TwoSidedPoint,
    lo: i64,
    hi: i64,
) -> Result<LSequence, FgError> {
    let mut values = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for pos in lo..=hi {
        let mut tuple = Vec::with_capacity(gens.len());
        for g in gens {
            tuple.push(g.exponent_at(point, pos)?);
        }
        values.push(tuple);
    }
    Ok(LSequence { lo, values })
}

/// A finite quotient: each short product of generators is assigned a
/// permutation of Z_n, injectively and multiplicatively.
#[derive(Debug, Clone)]
pub struct LefQuotient {
    pub modulus: usize,
    pub radius: usize,
    pub entries: Vec<LefEntry>,
    pub identity_index: usize,
    /// `products[x][y]` indexes the element equal to entry x composed
    /// after entry y, when that product lies in the enumerated set.
    pub products: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone)]
pub struct LefEntry {
    pub name: String,
    pub element: FullGroupElement,
    pub perm: FiniteMap,
}

impl LefQuotient {
    /// Repackages the quotient for the generic witness checkers.
    pub fn to_assignment(&self) -> Result<(MapAssignment, MultTable, Vec<String>), FgError> {
        let carrier = Carrier::new(self.modulus)?;
        let entries: Vec<(String, FiniteMap)> =
            self.entries.iter().map(|e| (e.name.clone(), e.perm.clone())).collect();
        let identity = self.entries[self.identity_index].name.clone();
        let assignment = MapAssignment::new(carrier, entries, &identity)?;
        let mut mult = MultTable::new();
        for (x, row) in self.products.iter().enumerate() {
            for (y, entry) in row.iter().enumerate() {
                if let Some(z) = entry {
                    mult.insert(
                        &self.entries[x].name,
                        &self.entries[y].name,
                        &self.entries[*z].name,
                    );
                }
            }
        }
        let labels = self.entries.iter().map(|e| e.name.clone()).collect();
        Ok((assignment, mult, labels))
    }
}

/// Builds the finite quotient of the group generated by `gens` on products
/// of at most `r` generators.
///
/// Steps: certify every generator bijective (constructing inverses), close
/// the generating set under inverses, enumerate the distinct products of
/// length at most `r`, read off the displacement data around the
/// basepoint, and scan for the least modulus `n` strictly above `10·a^r`
/// such that (i) the displacement window of radius `a·r` repeats at offset
/// `n` and (ii) every non-identity product moves some position strictly
/// between 0 and n. The resulting permutation assignment is then verified:
/// genuine permutations, injective, multiplicative on composable pairs.
pub fn lef_quotient(
    gens: &[FullGroupElement],
    r: usize,
    point: &TwoSidedPoint,
    budget: &Budget,
) -> Result<LefQuotient, FgError> {
    if r == 0 {
        return Err(FgError::InvalidElement("quotient radius r must be positive".into()));
    }
    let sub = point.substitution().clone();
    for g in gens {
        if g.sub != sub {
            return Err(FgError::InvalidElement("generator over a different substitution".into()));
        }
    }
    let identity = FullGroupElement::identity(sub.clone(), budget)?;

    // Symmetric generating set: generators then their certified inverses,
    // deduplicated by table equality.
    let mut symmetric: Vec<(String, FullGroupElement)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let name = format!("g{}", i + 1);
        if !contains_element(&symmetric, g, budget)? {
            symmetric.push((name.clone(), g.clone()));
        }
        let inv = check_bijection(g, budget)?;
        if !contains_element(&symmetric, &inv, budget)? {
            symmetric.push((format!("{name}'"), inv));
        }
    }

    // Distinct products of at most r generators, breadth-first.
    let mut entries: Vec<(String, FullGroupElement)> = vec![("1".to_string(), identity.clone())];
    let mut frontier: Vec<usize> = vec![0];
    for _ in 0..r {
        let mut next = Vec::new();
        for &idx in &frontier {
            let base = entries[idx].1.clone();
            let base_name = entries[idx].0.clone();
            for (sname, s) in &symmetric {
                let prod = compose_elements(s, &base, budget)?;
                if !contains_element(&entries, &prod, budget)? {
                    let name = if base_name == "1" {
                        sname.clone()
                    } else {
                        format!("{sname}.{base_name}")
                    };
                    entries.push((name, prod));
                    next.push(entries.len() - 1);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }

    let a = symmetric.iter().map(|(_, g)| g.bound()).max().unwrap_or(0);
    let ar = a
        .checked_mul(r as i64)
        .ok_or_else(|| exceeded("displacement radius a*r overflows"))?;

    // Smallest moved position 0 < j per non-identity element; condition
    // (ii) for a candidate n is then just j < n.
    let mut least_moved: Vec<Option<i64>> = Vec::with_capacity(entries.len());
    for (name, e) in &entries {
        if e.is_identity_table() {
            least_moved.push(None);
            continue;
        }
        let mut found = None;
        for j in 1..=(budget.max_scan as i64) {
            if e.apply(point, j)? != j {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => least_moved.push(Some(j)),
            None => {
                return Err(exceeded(format!(
                    "element {name} fixes positions 1..={}",
                    budget.max_scan
                ))
                .into())
            }
        }
    }

    // Reference displacement window around the basepoint.
    let gen_elems: Vec<FullGroupElement> =
        symmetric.iter().map(|(_, g)| g.clone()).collect();
    let sigma = l_sequence(&gen_elems, point, -ar, ar)?;

    let start = 10i64
        .checked_mul(a.checked_pow(r as u32).ok_or_else(|| exceeded("a^r overflows"))?)
        .ok_or_else(|| exceeded("10*a^r overflows"))?
        + 1;
    let mut modulus: Option<i64> = None;
    'scan: for n in start..start + budget.max_scan as i64 {
        let shifted = l_sequence(&gen_elems, point, n - ar, n + ar)?;
        if shifted.values != sigma.values {
            continue;
        }
        for moved in least_moved.iter().flatten() {
            if *moved >= n {
                continue 'scan;
            }
        }
        modulus = Some(n);
        break;
    }
    let n = modulus.ok_or_else(|| {
        exceeded(format!("no valid modulus in [{start}, {})", start + budget.max_scan as i64))
    })?;

    // Permutation images, verified exactly.
    let carrier = Carrier::new(n as usize)?;
    let mut quotient_entries = Vec::with_capacity(entries.len());
    let mut identity_index = 0;
    for (idx, (name, e)) in entries.iter().enumerate() {
        let mut table = Vec::with_capacity(n as usize);
        for i in 0..n {
            table.push(e.apply(point, i)?.rem_euclid(n) as usize);
        }
        let perm = FiniteMap::new(carrier, table)?;
        if !perm.is_bijective() {
            return Err(FgError::CertificationFailed(format!(
                "image of {name} is not a permutation of Z_{n}"
            )));
        }
        if element_equal(e, &identity, budget)? {
            identity_index = idx;
        }
        quotient_entries.push(LefEntry { name: name.clone(), element: e.clone(), perm });
    }

    for i in 0..quotient_entries.len() {
        for j in i + 1..quotient_entries.len() {
            if quotient_entries[i].perm == quotient_entries[j].perm {
                return Err(FgError::CertificationFailed(format!(
                    "images of {} and {} coincide",
                    quotient_entries[i].name, quotient_entries[j].name
                )));
            }
        }
    }

    let mut products = vec![vec![None; entries.len()]; entries.len()];
    for (x, (xname, xe)) in entries.iter().enumerate() {
        for (y, (yname, ye)) in entries.iter().enumerate() {
            let prod = compose_elements(xe, ye, budget)?;
            let mut hit = None;
            for (z, (_, ze)) in entries.iter().enumerate() {
                if element_equal(&prod, ze, budget)? {
                    hit = Some(z);
                    break;
                }
            }
            if let Some(z) = hit {
                products[x][y] = Some(z);
                let composed =
                    crate::finactions::compose(&quotient_entries[x].perm, &quotient_entries[y].perm)?;
                if composed != quotient_entries[z].perm {
                    return Err(FgError::CertificationFailed(format!(
                        "images of {xname}*{yname} and {} differ",
                        entries[z].0
                    )));
                }
            }
        }
    }

    Ok(LefQuotient {
        modulus: n as usize,
        radius: r,
        entries: quotient_entries,
        identity_index,
        products,
    })
}

fn contains_element(
    list: &[(String, FullGroupElement)],
    e: &FullGroupElement,
    budget: &Budget,
) -> Result<bool, FgError> {
    for (_, known) in list {
        if element_equal(known, e, budget)? {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Element file format: blocks separated by blank lines. Each block:
//
//   element <name>        (optional; defaults to g1, g2, …)
//   radius <w>
//   <word> <exponent>     (one line per admissible word of length 2w+1)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("element file line {line}: {msg}")]
pub struct ElementParseError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_elements(
    text: &str,
    sub: &Arc<Substitution>,
    budget: &Budget,
) -> Result<Vec<(String, FullGroupElement)>, ElementParseError> {
    let err = |line: usize, msg: String| ElementParseError { line, msg };
    let mut out: Vec<(String, FullGroupElement)> = Vec::new();
    let mut name: Option<String> = None;
    let mut radius: Option<(usize, usize)> = None; // (line, value)
    let mut table: BTreeMap<String, i64> = BTreeMap::new();

    let mut flush = |name: &mut Option<String>,
                     radius: &mut Option<(usize, usize)>,
                     table: &mut BTreeMap<String, i64>,
                     out: &mut Vec<(String, FullGroupElement)>|
     -> Result<(), ElementParseError> {
        if radius.is_none() && table.is_empty() {
            return Ok(());
        }
        let (line, w) =
            radius.take().ok_or_else(|| err(0, "element block lacks a radius".into()))?;
        let element =
            FullGroupElement::from_table(sub.clone(), w, std::mem::take(table), budget)
                .map_err(|e| err(line, e.to_string()))?;
        let label = name.take().unwrap_or_else(|| format!("g{}", out.len() + 1));
        out.push((label, element));
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            flush(&mut name, &mut radius, &mut table, &mut out)?;
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        match head {
            "element" => {
                if radius.is_some() || !table.is_empty() {
                    return Err(err(line_no, "element name must start its block".into()));
                }
                name = Some(
                    parts
                        .next()
                        .ok_or_else(|| err(line_no, "element needs a name".into()))?
                        .to_string(),
                );
            }
            "radius" => {
                radius = Some((
                    line_no,
                    parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line_no, "radius needs a number".into()))?,
                ));
            }
            word => {
                let exp: i64 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, format!("word `{word}` needs an exponent")))?;
                if table.insert(word.to_string(), exp).is_some() {
                    return Err(err(line_no, format!("duplicate word `{word}`")));
                }
            }
        }
    }
    flush(&mut name, &mut radius, &mut table, &mut out)?;
    if out.is_empty() {
        return Err(err(0, "no elements in file".into()));
    }
    Ok(out)
}

pub fn render_element(name: &str, e: &FullGroupElement) -> String {
    let mut out = format!("element {name}\nradius {}\n", e.radius());
    for (word, exp) in e.table() {
        out.push_str(&format!("{word} {exp}\n"));
    }
    out
}
