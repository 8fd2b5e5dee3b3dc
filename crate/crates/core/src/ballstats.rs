//! Rooted labeled balls and empirical local statistics of finite actions.
//!
//! A [`LabeledAction`] is a finite set with one self-map per generator
//! symbol (maps need not be bijections) and a fixed-width bit label per
//! vertex. Around any vertex, [`ball_at`] extracts the radius-`t` ball in
//! the undirected shortest-path metric and produces a canonical byte code:
//! two balls receive equal codes exactly when a root-preserving isomorphism
//! matches all edge label sets and vertex labels.
//!
//! Canonicalization is exact: iterative refinement on (root distance,
//! vertex label, incident edge colors) followed by full branching over the
//! remaining symmetry classes, taking the lexicographically least
//! serialization. Codes are cached per (root, radius) behind one mutex.

use crate::finactions::FiniteMap;
use crate::ratio::{rational, Rational};
use crate::words::Symbol;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BallError {
    #[error("radius mismatch: {0} vs {1}")]
    RadiusMismatch(usize, usize),
    #[error("invalid action: {0}")]
    InvalidAction(String),
}

/// A finite action of a free alphabet with per-vertex bit labels.
#[derive(Debug)]
pub struct LabeledAction {
    carrier: usize,
    generators: Vec<(Symbol, FiniteMap)>,
    labels: Vec<u64>,
    label_width: u32,
    reverse: Vec<Vec<Vec<usize>>>,
    cache: Mutex<HashMap<(usize, usize), Arc<RootedBall>>>,
}

impl LabeledAction {
    /// Generators are stored sorted by symbol; all maps must share a
    /// carrier of size `labels.len()`, and labels must fit `label_width`
    /// bits (width at most 63).
    pub fn new(
        generators: Vec<(Symbol, FiniteMap)>,
        labels: Vec<u64>,
        label_width: u32,
    ) -> Result<LabeledAction, BallError> {
        let carrier = labels.len();
        if carrier == 0 {
            return Err(BallError::InvalidAction("empty carrier".into()));
        }
        if label_width > 63 {
            return Err(BallError::InvalidAction("label width above 63".into()));
        }
        if labels.iter().any(|&l| l >= (1u64 << label_width)) && label_width < 64 {
            return Err(BallError::InvalidAction("label exceeds declared width".into()));
        }
        let mut generators = generators;
        generators.sort_by_key(|(s, _)| *s);
        for w in generators.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(BallError::InvalidAction(format!("duplicate generator {}", w[0].0)));
            }
        }
        for (sym, map) in &generators {
            if map.carrier().size() != carrier {
                return Err(BallError::InvalidAction(format!(
                    "generator {sym} acts on carrier {} != {carrier}",
                    map.carrier().size()
                )));
            }
        }
        let mut reverse = vec![vec![Vec::new(); carrier]; generators.len()];
        for (g, (_, map)) in generators.iter().enumerate() {
            for x in 0..carrier {
                reverse[g][map.apply(x)].push(x);
            }
        }
        Ok(LabeledAction {
            carrier,
            generators,
            labels,
            label_width,
            reverse,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Action with all-zero labels of width 0.
    pub fn unlabeled(generators: Vec<(Symbol, FiniteMap)>) -> Result<LabeledAction, BallError> {
        let carrier = generators
            .first()
            .map(|(_, m)| m.carrier().size())
            .ok_or_else(|| BallError::InvalidAction("no generators".into()))?;
        LabeledAction::new(generators, vec![0; carrier], 0)
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn generators(&self) -> &[(Symbol, FiniteMap)] {
        &self.generators
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn label_width(&self) -> u32 {
        self.label_width
    }
}

/// The canonical code of a rooted labeled ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    radius: usize,
    code: Vec<u8>,
}

impl RootedBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn code_hex(&self) -> String {
        self.code.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The extracted ball as an explicit graph, before coding. Local vertex 0
/// is the root; vertices are listed in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct BallGraph {
    pub dist: Vec<usize>,
    pub labels: Vec<u64>,
    pub label_width: u32,
    pub symbols: Vec<Symbol>,
    /// `out[v][g]` is the local target of generator `g` at `v`, when the
    /// target lies inside the ball.
    pub out: Vec<Vec<Option<usize>>>,
}

impl BallGraph {
    pub fn size(&self) -> usize {
        self.dist.len()
    }
}

/// Extracts the radius-`t` ball around `x` as an explicit graph.
pub fn ball_graph(action: &LabeledAction, x: usize, t: usize) -> BallGraph {
    assert!(x < action.carrier, "root outside carrier");
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut verts: Vec<usize> = Vec::new();
    let mut dists: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    local.insert(x, 0);
    verts.push(x);
    dists.push(0);
    queue.push_back(0usize);
    while let Some(li) = queue.pop_front() {
        let d = dists[li];
        if d == t {
            continue;
        }
        let v = verts[li];
        let mut neighbors: Vec<usize> = Vec::new();
        for (g, (_, map)) in action.generators.iter().enumerate() {
            neighbors.push(map.apply(v));
            neighbors.extend(action.reverse[g][v].iter().copied());
        }
        for w in neighbors {
            if !local.contains_key(&w) {
                local.insert(w, verts.len());
                queue.push_back(verts.len());
                verts.push(w);
                dists.push(d + 1);
            }
        }
    }
    let out: Vec<Vec<Option<usize>>> = verts
        .iter()
        .map(|&v| {
            action
                .generators
                .iter()
                .map(|(_, map)| local.get(&map.apply(v)).copied())
                .collect()
        })
        .collect();
    BallGraph {
        dist: dists,
        labels: verts.iter().map(|&v| action.labels[v]).collect(),
        label_width: action.label_width,
        symbols: action.generators.iter().map(|(s, _)| *s).collect(),
        out,
    }
}

/// Canonical code of the ball of radius `t` around `x`. Cached.
pub fn ball_at(action: &LabeledAction, x: usize, t: usize) -> Arc<RootedBall> {
    if let Some(hit) = action.cache.lock().unwrap().get(&(x, t)) {
        return Arc::clone(hit);
    }
    let graph = ball_graph(action, x, t);
    let ball = Arc::new(RootedBall { radius: t, code: canonical_code(&graph) });
    Arc::clone(
        action
            .cache
            .lock()
            .unwrap()
            .entry((x, t))
            .or_insert_with(|| Arc::clone(&ball)),
    )
}

// --- canonical labeling ----------------------------------------------------

type Partition = Vec<Vec<usize>>;

fn initial_partition(g: &BallGraph) -> Partition {
    let mut by_key: BTreeMap<(usize, u64), Vec<usize>> = BTreeMap::new();
    for v in 0..g.size() {
        by_key.entry((g.dist[v], g.labels[v])).or_default().push(v);
    }
    by_key.into_values().collect()
}

/// One vertex signature under the current cell assignment: per generator,
/// the out-cell (or MAX) and the sorted in-cell list.
fn signature(g: &BallGraph, ins: &[Vec<Vec<usize>>], cell_of: &[usize], v: usize) -> Vec<usize> {
    let mut sig = Vec::with_capacity(g.symbols.len() * 3);
    for gen in 0..g.symbols.len() {
        sig.push(match g.out[v][gen] {
            Some(w) => cell_of[w],
            None => usize::MAX,
        });
        let mut in_cells: Vec<usize> = ins[gen][v].iter().map(|&u| cell_of[u]).collect();
        in_cells.sort_unstable();
        sig.push(in_cells.len());
        sig.extend(in_cells);
    }
    sig
}

fn refine(g: &BallGraph, ins: &[Vec<Vec<usize>>], mut partition: Partition) -> Partition {
    loop {
        let mut cell_of = vec![0usize; g.size()];
        for (ci, cell) in partition.iter().enumerate() {
            for &v in cell {
                cell_of[v] = ci;
            }
        }
        let mut next: Partition = Vec::with_capacity(partition.len());
        let mut split = false;
        for cell in &partition {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for &v in cell {
                groups.entry(signature(g, ins, &cell_of, v)).or_default().push(v);
            }
            if groups.len() > 1 {
                split = true;
            }
            next.extend(groups.into_values());
        }
        if !split {
            return next;
        }
        partition = next;
    }
}

fn serialize(g: &BallGraph, order: &[usize]) -> Vec<u8> {
    let mut pos = vec![0usize; g.size()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut code = Vec::with_capacity(16 + g.size() * (8 + 4 * g.symbols.len()));
    code.extend((g.size() as u32).to_be_bytes());
    code.extend(g.label_width.to_be_bytes());
    code.extend((g.symbols.len() as u32).to_be_bytes());
    for s in &g.symbols {
        let kind: u8 = match (s.is_involutive(), s.is_inverted()) {
            (true, _) => 2,
            (false, false) => 0,
            (false, true) => 1,
        };
        code.push(kind);
        code.extend(s.generator_id().to_be_bytes());
    }
    for &v in order {
        code.extend(g.labels[v].to_be_bytes());
    }
    for &v in order {
        for gen in 0..g.symbols.len() {
            let target = match g.out[v][gen] {
                Some(w) => pos[w] as u32,
                None => u32::MAX,
            };
            code.extend(target.to_be_bytes());
        }
    }
    code
}

/// Exact canonical code: refinement plus exhaustive branching over the
/// remaining symmetry classes, minimizing the serialized form.
pub fn canonical_code(g: &BallGraph) -> Vec<u8> {
    let mut ins: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); g.size()]; g.symbols.len()];
    for v in 0..g.size() {
        for gen in 0..g.symbols.len() {
            if let Some(w) = g.out[v][gen] {
                ins[gen][w].push(v);
            }
        }
    }
    let mut best: Option<Vec<u8>> = None;
    let start = refine(g, &ins, initial_partition(g));
    let mut stack = vec![start];
    while let Some(partition) = stack.pop() {
        match partition.iter().position(|c| c.len() > 1) {
            None => {
                let order: Vec<usize> = partition.iter().map(|c| c[0]).collect();
                let code = serialize(g, &order);
                if best.as_ref().is_none_or(|b| code < *b) {
                    best = Some(code);
                }
            }
            Some(ci) => {
                for &v in &partition[ci] {
                    let mut next = partition.clone();
                    let rest: Vec<usize> =
                        next[ci].iter().copied().filter(|&u| u != v).collect();
                    next[ci] = vec![v];
                    next.insert(ci + 1, rest);
                    stack.push(refine(g, &ins, next));
                }
            }
        }
    }
    best.expect("nonempty ball")
}

// --- distributions and distances -------------------------------------------

/// Empirical distribution of radius-`t` ball codes over uniform roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDistribution {
    radius: usize,
    weights: BTreeMap<Vec<u8>, Rational>,
}

impl BallDistribution {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &BTreeMap<Vec<u8>, Rational> {
        &self.weights
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> Rational {
        self.weights.values().fold(Rational::zero(), |acc, w| acc + w)
    }

    /// Lines `code-hex weight-p/q`, sorted by code.
    pub fn render_dump(&self) -> String {
        let mut out = String::new();
        for (code, w) in &self.weights {
            let hex: String = code.iter().map(|b| format!("{b:02x}")).collect();
            out.push_str(&format!("{hex} {}\n", crate::ratio::render(w)));
        }
        out
    }
}

pub fn ball_distribution(action: &LabeledAction, t: usize) -> BallDistribution {
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for x in 0..action.carrier {
        let ball = ball_at(action, x, t);
        *counts.entry(ball.code().to_vec()).or_default() += 1;
    }
    let n = action.carrier as i64;
    let weights = counts.into_iter().map(|(code, c)| (code, rational(c as i64, n))).collect();
    BallDistribution { radius: t, weights }
}

/// Total variation distance: half the L1 distance over the joint support.
pub fn tv_distance(d1: &BallDistribution, d2: &BallDistribution) -> Result<Rational, BallError> {
    if d1.radius != d2.radius {
        return Err(BallError::RadiusMismatch(d1.radius, d2.radius));
    }
    let zero = Rational::zero();
    let mut sum = Rational::zero();
    let mut seen: BTreeSet<&Vec<u8>> = BTreeSet::new();
    for code in d1.weights.keys().chain(d2.weights.keys()) {
        if !seen.insert(code) {
            continue;
        }
        let w1 = d1.weights.get(code).unwrap_or(&zero);
        let w2 = d2.weights.get(code).unwrap_or(&zero);
        sum += if w1 >= w2 { w1 - w2 } else { w2 - w1 };
    }
    Ok(sum / rational(2, 1))
}

/// An action with a distinguished root.
#[derive(Debug, Clone, Copy)]
pub struct Rooted<'a> {
    pub action: &'a LabeledAction,
    pub root: usize,
}

/// Value of the rooted local distance 1/2^k, where k is the largest radius
/// at which the balls are still isomorphic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootedDistance {
    /// Balls isomorphic at every radius up to the cap; the true distance is
    /// at most this value.
    AtMost(Rational),
    Exact(Rational),
}

impl RootedDistance {
    pub fn value(&self) -> &Rational {
        match self {
            RootedDistance::AtMost(v) | RootedDistance::Exact(v) => v,
        }
    }
}

/// Compares ball codes at radii 0..=t_max. Finite graphs cannot certify
/// agreement at all radii, so exhausting the cap reports an upper bound.
pub fn rooted_distance(g: Rooted<'_>, h: Rooted<'_>, t_max: usize) -> RootedDistance {
    let pow =
        |k: usize| Rational::new(num::BigInt::one(), num::BigInt::from(2u8).pow(k as u32));
    for t in 0..=t_max {
        let bg = ball_at(g.action, g.root, t);
        let bh = ball_at(h.action, h.root, t);
        if bg.code() != bh.code() {
            let k = t.saturating_sub(1);
            return RootedDistance::Exact(pow(k));
        }
    }
    RootedDistance::AtMost(pow(t_max))
}

// ---------------------------------------------------------------------------
// Action file format.
//
//   action
//   carrier <size>
//   labelwidth <w>
//   map <symbol> <img0> <img1> ...
//   vlabels <bits0> <bits1> ...        (low-endian bit strings; omit if w=0)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("action file line {line}: {msg}")]
pub struct ActionParseError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_action(text: &str) -> Result<LabeledAction, ActionParseError> {
    use crate::finactions::Carrier;
    let err = |line: usize, msg: String| ActionParseError { line, msg };
    let mut carrier: Option<usize> = None;
    let mut label_width: u32 = 0;
    let mut maps: Vec<(Symbol, FiniteMap)> = Vec::new();
    let mut labels: Option<Vec<u64>> = None;
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next().unwrap() {
            "action" => saw_header = true,
            "carrier" => {
                carrier = Some(
                    parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .filter(|&n: &usize| n > 0)
                        .ok_or_else(|| err(line_no, "carrier needs a positive size".into()))?,
                );
            }
            "labelwidth" => {
                label_width = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(line_no, "labelwidth needs a number".into()))?;
            }
            "map" => {
                let n = carrier.ok_or_else(|| err(line_no, "carrier must come first".into()))?;
                let sym_tok =
                    parts.next().ok_or_else(|| err(line_no, "map needs a symbol".into()))?;
                let sym = crate::words::parse_symbol(sym_tok)
                    .map_err(|e| err(line_no, e.to_string()))?;
                let mut table = Vec::with_capacity(n);
                for tok in parts {
                    table.push(
                        tok.parse::<usize>()
                            .map_err(|_| err(line_no, format!("bad image `{tok}`")))?,
                    );
                }
                let map = FiniteMap::new(
                    Carrier::new(n).map_err(|e| err(line_no, e.to_string()))?,
                    table,
                )
                .map_err(|e| err(line_no, e.to_string()))?;
                maps.push((sym, map));
            }
            "vlabels" => {
                let mut out = Vec::new();
                for tok in parts {
                    let mut value = 0u64;
                    for (bit, c) in tok.chars().enumerate() {
                        match c {
                            '0' => {}
                            '1' => value |= 1 << bit,
                            _ => return Err(err(line_no, format!("bad bit string `{tok}`"))),
                        }
                    }
                    if tok.len() != label_width as usize {
                        return Err(err(
                            line_no,
                            format!("bit string `{tok}` does not match labelwidth {label_width}"),
                        ));
                    }
                    out.push(value);
                }
                labels = Some(out);
            }
            other => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(err(0, "missing `action` header".into()));
    }
    let carrier = carrier.ok_or_else(|| err(0, "missing carrier".into()))?;
    let labels = match labels {
        Some(l) => {
            if l.len() != carrier {
                return Err(err(0, format!("{} labels for carrier {carrier}", l.len())));
            }
            l
        }
        None => {
            if label_width != 0 {
                return Err(err(0, "labelwidth > 0 but no vlabels line".into()));
            }
            vec![0; carrier]
        }
    };
    LabeledAction::new(maps, labels, label_width).map_err(|e| err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finactions::Carrier;
    use crate::ratio::one;
    use rand::{seq::SliceRandom, Rng, SeedableRng};

    fn shift_action(n: usize) -> LabeledAction {
        let c = Carrier::new(n).unwrap();
        let shift = FiniteMap::from_fn(c, |x| (x + 1) % n).unwrap();
        LabeledAction::unlabeled(vec![(Symbol::free(1), shift)]).unwrap()
    }

    fn binary_labeled_shift(n: usize, width: u32) -> LabeledAction {
        let c = Carrier::new(n).unwrap();
        let shift = FiniteMap::from_fn(c, |x| (x + 1) % n).unwrap();
        let labels: Vec<u64> = (0..n as u64).map(|x| x % (1 << width)).collect();
        LabeledAction::new(vec![(Symbol::free(1), shift)], labels, width).unwrap()
    }

    #[test]
    fn single_vertex_identity_ball() {
        let c = Carrier::new(1).unwrap();
        let id = FiniteMap::identity(c);
        let action = LabeledAction::unlabeled(vec![(Symbol::free(1), id)]).unwrap();
        for t in 0..3 {
            let g = ball_graph(&action, 0, t);
            assert_eq!(g.size(), 1);
            assert_eq!(g.out[0][0], Some(0)); // the loop carries the generator
        }
        assert_eq!(ball_at(&action, 0, 0).code(), ball_at(&action, 0, 2).code());
    }

    #[test]
    fn shift_radius_one_is_three_vertex_path() {
        let action = shift_action(8);
        let g = ball_graph(&action, 0, 1);
        assert_eq!(g.size(), 3);
        assert_eq!(g.dist, vec![0, 1, 1]);
        let edges: usize = g.out.iter().flatten().filter(|e| e.is_some()).count();
        assert_eq!(edges, 2);
    }

    #[test]
    fn distinct_labels_distinguish_roots() {
        let action = binary_labeled_shift(8, 3);
        let b0 = ball_at(&action, 0, 2);
        let b1 = ball_at(&action, 1, 2);
        assert_ne!(b0.code(), b1.code());
    }

    #[test]
    fn transitive_unlabeled_shift_is_a_point_mass() {
        let action = shift_action(9);
        let d = ball_distribution(&action, 2); // 9 > 2*2+1
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.total(), one());
    }

    #[test]
    fn distinct_labels_make_uniform_distribution() {
        let action = binary_labeled_shift(8, 3);
        let d = ball_distribution(&action, 1);
        assert_eq!(d.support_size(), 8);
        for w in d.weights().values() {
            assert_eq!(*w, rational(1, 8));
        }
        assert_eq!(d.total(), one());
    }

    #[test]
    fn labeled_shift_code_count_brute_force() {
        // With 1-bit labels x mod 2 on Z_8, a root sees (1,0,1) or (0,1,0)
        // depending on its parity: exactly two radius-1 classes.
        let action = binary_labeled_shift(8, 1);
        let d = ball_distribution(&action, 1);
        let mut codes = std::collections::BTreeSet::new();
        for x in 0..8 {
            codes.insert(ball_at(&action, x, 1).code().to_vec());
        }
        assert_eq!(d.support_size(), codes.len());
        assert_eq!(codes.len(), 2);
        for w in d.weights().values() {
            assert_eq!(*w, rational(1, 2));
        }
    }

    #[test]
    fn tv_distance_examples() {
        let a = binary_labeled_shift(8, 3);
        let b = binary_labeled_shift(8, 3);
        let da = ball_distribution(&a, 1);
        let db = ball_distribution(&b, 1);
        assert_eq!(tv_distance(&da, &db).unwrap(), rational(0, 1));

        let c = shift_action(9);
        let dc = ball_distribution(&c, 1);
        // Disjoint supports: labeled vs unlabeled actions differ at radius 1.
        assert_eq!(tv_distance(&da, &dc).unwrap(), one());

        assert!(tv_distance(&da, &ball_distribution(&a, 2)).is_err());
    }

    #[test]
    fn tv_distance_half_example() {
        // D1 = {A: 1/2, B: 1/2}, D2 = {A: 1} realized by labeled two-point
        // actions: identity generator, labels (0,1) vs (0,0).
        let c = Carrier::new(2).unwrap();
        let id = FiniteMap::identity(c);
        let a1 = LabeledAction::new(vec![(Symbol::free(1), id.clone())], vec![0, 1], 1).unwrap();
        let a2 = LabeledAction::new(vec![(Symbol::free(1), id)], vec![0, 0], 1).unwrap();
        let d1 = ball_distribution(&a1, 0);
        let d2 = ball_distribution(&a2, 0);
        assert_eq!(tv_distance(&d1, &d2).unwrap(), rational(1, 2));
    }

    #[test]
    fn rooted_distance_z4_vs_z8() {
        let z4 = shift_action(4);
        let z8 = shift_action(8);
        for root4 in 0..4 {
            for root8 in 0..8 {
                let d = rooted_distance(
                    Rooted { action: &z4, root: root4 },
                    Rooted { action: &z8, root: root8 },
                    4,
                );
                assert_eq!(d, RootedDistance::Exact(rational(1, 2)));
            }
        }
    }

    #[test]
    fn rooted_distance_equal_graphs_saturates() {
        let z8 = shift_action(8);
        let d = rooted_distance(
            Rooted { action: &z8, root: 0 },
            Rooted { action: &z8, root: 3 },
            5,
        );
        assert_eq!(d, RootedDistance::AtMost(rational(1, 32)));
    }

    #[test]
    fn rooted_distance_root_labels_differ() {
        let a = binary_labeled_shift(8, 1);
        let d = rooted_distance(
            Rooted { action: &a, root: 0 },
            Rooted { action: &a, root: 1 },
            3,
        );
        assert_eq!(d, RootedDistance::Exact(one()));
    }

    #[test]
    fn rooted_distance_monotone_in_cap() {
        let z4 = shift_action(4);
        let z8 = shift_action(8);
        let mut prev = one();
        for t_max in 0..5 {
            let d = rooted_distance(
                Rooted { action: &z4, root: 0 },
                Rooted { action: &z8, root: 0 },
                t_max,
            );
            assert!(*d.value() <= prev);
            prev = d.value().clone();
        }
    }

    /// Rebuilds the action with vertices renamed by `perm` (new = perm[old]).
    fn permuted(action: &LabeledAction, perm: &[usize]) -> LabeledAction {
        let n = action.carrier();
        let c = Carrier::new(n).unwrap();
        let generators: Vec<(Symbol, FiniteMap)> = action
            .generators()
            .iter()
            .map(|(s, m)| {
                let mut table = vec![0usize; n];
                for x in 0..n {
                    table[perm[x]] = perm[m.apply(x)];
                }
                (*s, FiniteMap::new(c, table).unwrap())
            })
            .collect();
        let mut labels = vec![0u64; n];
        for x in 0..n {
            labels[perm[x]] = action.label(x);
        }
        LabeledAction::new(generators, labels, action.label_width()).unwrap()
    }

    #[test]
    fn codes_invariant_under_relabeling_exhaustive_small() {
        // All 720 relabelings of a 6-vertex two-generator action.
        let c = Carrier::new(6).unwrap();
        let f = FiniteMap::new(c, vec![1, 2, 0, 4, 3, 3]).unwrap();
        let g = FiniteMap::new(c, vec![0, 0, 1, 5, 5, 2]).unwrap();
        let action = LabeledAction::new(
            vec![(Symbol::free(1), f), (Symbol::free(2), g)],
            vec![0, 1, 0, 1, 1, 0],
            1,
        )
        .unwrap();
        let reference: Vec<_> = (0..6).map(|x| ball_at(&action, x, 2).code().to_vec()).collect();
        fn heaps(k: usize, arr: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
            if k == 1 {
                visit(arr);
                return;
            }
            for i in 0..k {
                heaps(k - 1, arr, visit);
                if k % 2 == 0 {
                    arr.swap(i, k - 1);
                } else {
                    arr.swap(0, k - 1);
                }
            }
        }
        let mut perm = vec![0, 1, 2, 3, 4, 5];
        let mut count = 0usize;
        heaps(6, &mut perm, &mut |p| {
            count += 1;
            let moved = permuted(&action, p);
            for x in 0..6 {
                assert_eq!(
                    ball_at(&moved, p[x], 2).code(),
                    reference[x].as_slice(),
                    "relabeling changed a ball code"
                );
            }
        });
        assert_eq!(count, 720);
    }

    #[test]
    fn codes_invariant_under_relabeling_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = rng.gen_range(2..=8usize);
            let c = Carrier::new(n).unwrap();
            let gens: Vec<(Symbol, FiniteMap)> = (1..=2u32)
                .map(|id| {
                    (Symbol::free(id), FiniteMap::from_fn(c, |_| rng.gen_range(0..n)).unwrap())
                })
                .collect();
            let width = 2;
            let labels: Vec<u64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let action = LabeledAction::new(gens, labels, width).unwrap();
            let reference: Vec<_> =
                (0..n).map(|x| ball_at(&action, x, 2).code().to_vec()).collect();
            for _ in 0..10 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let moved = permuted(&action, &perm);
                for x in 0..n {
                    assert_eq!(ball_at(&moved, perm[x], 2).code(), reference[x].as_slice());
                }
            }
        }
    }

    #[test]
    fn permutation_action_balls_have_functional_degrees() {
        // Genuine permutation action with a mutually inverse generator pair:
        // inside balls every generator has in- and out-degree at most 1 and
        // the s/S edges coincide reversed.
        let n = 10;
        let c = Carrier::new(n).unwrap();
        let fwd = FiniteMap::from_fn(c, |x| (x + 1) % n).unwrap();
        let bwd = FiniteMap::from_fn(c, |x| (x + n - 1) % n).unwrap();
        let action = LabeledAction::unlabeled(vec![
            (Symbol::free(1), fwd),
            (Symbol::free_inverse(1), bwd),
        ])
        .unwrap();
        let g = ball_graph(&action, 0, 3);
        let s_idx = 0usize; // sorted order: s1 < S1
        let si_idx = 1usize;
        assert_eq!(g.symbols[s_idx], Symbol::free(1));
        assert_eq!(g.symbols[si_idx], Symbol::free_inverse(1));
        let mut in_deg = vec![vec![0usize; g.size()]; g.symbols.len()];
        for v in 0..g.size() {
            for gen in 0..g.symbols.len() {
                if let Some(w) = g.out[v][gen] {
                    in_deg[gen][w] += 1;
                }
            }
        }
        for v in 0..g.size() {
            for gen in 0..g.symbols.len() {
                assert!(in_deg[gen][v] <= 1);
            }
            if let Some(w) = g.out[v][s_idx] {
                assert_eq!(g.out[w][si_idx], Some(v));
            }
        }
    }

    #[test]
    fn parse_action_round_trip_and_errors() {
        let text = "action\ncarrier 4\nlabelwidth 2\nmap s1 1 2 3 0\nvlabels 00 10 01 11\n";
        let action = parse_action(text).unwrap();
        assert_eq!(action.carrier(), 4);
        assert_eq!(action.label(1), 1);
        assert_eq!(action.label(2), 2);

        assert!(parse_action("carrier 4\n").is_err());
        let err = parse_action("action\ncarrier 4\nmap s1 9 9 9 9\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_action("action\ncarrier 2\nlabelwidth 1\nmap s1 0 1\nvlabels 0 2\n").is_err());
    }
}
