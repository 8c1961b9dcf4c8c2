//! Backtracking search for weak and induced embeddings.
//!
//! A weak embedding is an injective map preserving every relation instance;
//! an induced embedding additionally reflects them (a tuple over the image is
//! an instance iff its preimage is). The search is exhaustive: it branches on
//! the source vertex with the most incident instances, prunes candidates by
//! per-symbol incidence counts, and visits assignments in a fixed order, so
//! the first embedding found is deterministic.

use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use crate::structure::{Point, RelStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmbeddingMode {
    /// Instances are preserved.
    Weak,
    /// Instances are preserved and reflected.
    Induced,
}

/// A concrete embedding: `map[p]` is the image of source point `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    map: Vec<Point>,
    mode: EmbeddingMode,
}

impl Embedding {
    pub fn new(map: Vec<Point>, mode: EmbeddingMode) -> Self {
        Embedding { map, mode }
    }

    pub fn map(&self) -> &[Point] {
        &self.map
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    pub fn apply(&self, p: Point) -> Point {
        self.map[p]
    }

    /// Re-checks the embedding from scratch. Certificates are data, not
    /// trust: every consumer can re-verify with this.
    pub fn verify(&self, a: &RelStructure, b: &RelStructure) -> bool {
        if a.signature() != b.signature() || self.map.len() != a.size() {
            return false;
        }
        if self.map.iter().any(|&q| q >= b.size()) {
            return false;
        }
        let mut seen = alloc::vec![false; b.size()];
        for &q in &self.map {
            if seen[q] {
                return false;
            }
            seen[q] = true;
        }
        for (sym, tuple) in a.iter_instances() {
            let image: Vec<Point> = tuple.iter().map(|&p| self.map[p]).collect();
            if !b.has_instance(sym, &image) {
                return false;
            }
        }
        if self.mode == EmbeddingMode::Induced {
            let mut inverse = alloc::vec![usize::MAX; b.size()];
            for (p, &q) in self.map.iter().enumerate() {
                inverse[q] = p;
            }
            for (sym, tuple) in b.iter_instances() {
                if tuple.iter().all(|&q| seen[q]) {
                    let pre: Vec<Point> = tuple.iter().map(|&q| inverse[q]).collect();
                    if !a.has_instance(sym, &pre) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedError {
    /// Source and target live over different signatures.
    SignatureMismatch,
    /// The given partial map is not injective or conflicts with the mode.
    InconsistentPartial,
    /// A partial-map point is out of range.
    PartialOutOfRange(Point),
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::SignatureMismatch => write!(f, "structures have different signatures"),
            EmbedError::InconsistentPartial => {
                write!(f, "partial map is not injective or violates the embedding mode")
            }
            EmbedError::PartialOutOfRange(p) => {
                write!(f, "partial map mentions out-of-range point {p}")
            }
        }
    }
}

impl core::error::Error for EmbedError {}

/// Outcome of a budgeted search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BudgetedSearch {
    Found(Embedding),
    NotFound,
    /// The node budget ran out before the search space was exhausted; this is
    /// explicitly distinct from `NotFound`.
    BudgetExceeded { nodes: u64 },
}

/// Finds some embedding of `a` into `b` extending `partial`, or `None`.
///
/// The search is sound and complete; with a partial map it returns the first
/// extension under the deterministic branching order.
pub fn find_embedding(
    a: &RelStructure,
    b: &RelStructure,
    mode: EmbeddingMode,
    partial: Option<&[(Point, Point)]>,
) -> Result<Option<Embedding>, EmbedError> {
    let mut found = None;
    run(a, b, mode, partial, None, |map| {
        found = Some(Embedding::new(map.to_vec(), mode));
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Like [`find_embedding`] but stops after `budget` search nodes.
pub fn find_embedding_budgeted(
    a: &RelStructure,
    b: &RelStructure,
    mode: EmbeddingMode,
    partial: Option<&[(Point, Point)]>,
    budget: u64,
) -> Result<BudgetedSearch, EmbedError> {
    let mut found = None;
    let exhausted = run(a, b, mode, partial, Some(budget), |map| {
        found = Some(Embedding::new(map.to_vec(), mode));
        ControlFlow::Break(())
    })?;
    Ok(match (found, exhausted) {
        (Some(e), _) => BudgetedSearch::Found(e),
        (None, true) => BudgetedSearch::NotFound,
        (None, false) => BudgetedSearch::BudgetExceeded { nodes: budget },
    })
}

/// Exact number of embeddings of `a` into `b` (not up to automorphism).
///
/// Both structures must share one signature.
pub fn count_embeddings(a: &RelStructure, b: &RelStructure, mode: EmbeddingMode) -> u64 {
    let mut count = 0u64;
    run(a, b, mode, None, None, |_| {
        count += 1;
        ControlFlow::Continue(())
    })
    .expect("count_embeddings requires equal signatures");
    count
}

/// Visits every embedding of `a` into `b` extending `partial`, in the
/// deterministic search order, until the visitor breaks.
pub fn for_each_embedding(
    a: &RelStructure,
    b: &RelStructure,
    mode: EmbeddingMode,
    partial: Option<&[(Point, Point)]>,
    mut visit: impl FnMut(&[Point]) -> ControlFlow<()>,
) -> Result<(), EmbedError> {
    run(a, b, mode, partial, None, |map| visit(map))?;
    Ok(())
}

/// Core search. Returns whether the space was fully explored (false only
/// when the budget ran out).
fn run(
    a: &RelStructure,
    b: &RelStructure,
    mode: EmbeddingMode,
    partial: Option<&[(Point, Point)]>,
    budget: Option<u64>,
    mut visit: impl FnMut(&[Point]) -> ControlFlow<()>,
) -> Result<bool, EmbedError> {
    if a.signature() != b.signature() {
        return Err(EmbedError::SignatureMismatch);
    }
    let mut state = State::new(a, b, mode, budget);
    if let Some(pairs) = partial {
        state.seed_partial(pairs)?;
    }
    if a.size() > b.size() {
        return Ok(true);
    }
    state.order_remaining();
    let complete = state.search(0, &mut visit).is_some();
    Ok(if complete { true } else { !state.out_of_budget })
}

struct State<'a> {
    a: &'a RelStructure,
    b: &'a RelStructure,
    mode: EmbeddingMode,
    // per-symbol incidence counts, used to prune candidates
    a_deg: Vec<Vec<u32>>,
    b_deg: Vec<Vec<u32>>,
    // b-point -> incident (symbol, instance index), for induced reflection
    b_incidence: Vec<Vec<(usize, usize)>>,
    a_incidence: Vec<Vec<(usize, usize)>>,
    assignment: Vec<Option<Point>>,
    inverse: Vec<Option<Point>>,
    order: Vec<Point>,
    budget: Option<u64>,
    nodes: u64,
    out_of_budget: bool,
}

impl<'a> State<'a> {
    fn new(a: &'a RelStructure, b: &'a RelStructure, mode: EmbeddingMode, budget: Option<u64>) -> Self {
        let nsym = a.signature().len();
        let degrees = |s: &RelStructure| -> Vec<Vec<u32>> {
            (0..nsym)
                .map(|sym| (0..s.size()).map(|p| s.incidence(sym, p) as u32).collect())
                .collect()
        };
        let incidence = |s: &RelStructure| -> Vec<Vec<(usize, usize)>> {
            let mut inc = alloc::vec![Vec::new(); s.size()];
            for sym in 0..nsym {
                for (idx, tuple) in s.instances(sym).iter().enumerate() {
                    for &p in tuple {
                        inc[p].push((sym, idx));
                    }
                }
            }
            inc
        };
        State {
            a,
            b,
            mode,
            a_deg: degrees(a),
            b_deg: degrees(b),
            b_incidence: incidence(b),
            a_incidence: incidence(a),
            assignment: alloc::vec![None; a.size()],
            inverse: alloc::vec![None; b.size()],
            order: Vec::new(),
            budget,
            nodes: 0,
            out_of_budget: false,
        }
    }

    fn seed_partial(&mut self, pairs: &[(Point, Point)]) -> Result<(), EmbedError> {
        for &(p, q) in pairs {
            if p >= self.a.size() {
                return Err(EmbedError::PartialOutOfRange(p));
            }
            if q >= self.b.size() {
                return Err(EmbedError::PartialOutOfRange(q));
            }
            if let Some(prev) = self.assignment[p] {
                if prev != q {
                    return Err(EmbedError::InconsistentPartial);
                }
                continue;
            }
            if self.inverse[q].is_some() {
                return Err(EmbedError::InconsistentPartial);
            }
            self.assignment[p] = Some(q);
            self.inverse[q] = Some(p);
        }
        // The partial map must already satisfy the mode on its domain.
        for (sym, tuple) in self.a.iter_instances() {
            if let Some(image) = tuple
                .iter()
                .map(|&p| self.assignment[p])
                .collect::<Option<Vec<Point>>>()
            {
                if !self.b.has_instance(sym, &image) {
                    return Err(EmbedError::InconsistentPartial);
                }
            }
        }
        if self.mode == EmbeddingMode::Induced {
            for (sym, tuple) in self.b.iter_instances() {
                if let Some(pre) = tuple
                    .iter()
                    .map(|&q| self.inverse[q])
                    .collect::<Option<Vec<Point>>>()
                {
                    if !self.a.has_instance(sym, &pre) {
                        return Err(EmbedError::InconsistentPartial);
                    }
                }
            }
        }
        Ok(())
    }

    /// Branch order: most incident instances first, then lowest index.
    fn order_remaining(&mut self) {
        let total = |p: Point| -> u32 { self.a_deg.iter().map(|d| d[p]).sum() };
        let mut rest: Vec<Point> =
            (0..self.a.size()).filter(|&p| self.assignment[p].is_none()).collect();
        rest.sort_by_key(|&p| (core::cmp::Reverse(total(p)), p));
        self.order = rest;
    }

    fn compatible(&self, p: Point, q: Point) -> bool {
        (0..self.a_deg.len()).all(|sym| self.b_deg[sym][q] >= self.a_deg[sym][p])
    }

    /// Checks instances decided by assigning `p -> q` (those with every
    /// coordinate mapped).
    fn consistent(&self, p: Point, q: Point) -> bool {
        for &(sym, idx) in &self.a_incidence[p] {
            let tuple = &self.a.instances(sym)[idx];
            let mut image: Vec<Point> = Vec::with_capacity(tuple.len());
            let mut complete = true;
            for &x in tuple {
                let y = if x == p { Some(q) } else { self.assignment[x] };
                match y {
                    Some(y) => image.push(y),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete && !self.b.has_instance(sym, &image) {
                return false;
            }
        }
        if self.mode == EmbeddingMode::Induced {
            for &(sym, idx) in &self.b_incidence[q] {
                let tuple = &self.b.instances(sym)[idx];
                let mut pre: Vec<Point> = Vec::with_capacity(tuple.len());
                let mut complete = true;
                for &y in tuple {
                    let x = if y == q { Some(p) } else { self.inverse[y] };
                    match x {
                        Some(x) => pre.push(x),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                if complete && !self.a.has_instance(sym, &pre) {
                    return false;
                }
            }
        }
        true
    }

    /// Returns `None` when the visitor broke or the budget ran out;
    /// `Some(())` when the subtree was exhausted.
    fn search(
        &mut self,
        depth: usize,
        visit: &mut impl FnMut(&[Point]) -> ControlFlow<()>,
    ) -> Option<()> {
        if depth == self.order.len() {
            let map: Vec<Point> =
                self.assignment.iter().map(|q| q.expect("full assignment")).collect();
            return match visit(&map) {
                ControlFlow::Continue(()) => Some(()),
                ControlFlow::Break(()) => None,
            };
        }
        let p = self.order[depth];
        for q in 0..self.b.size() {
            if self.inverse[q].is_some() {
                continue;
            }
            if let Some(budget) = self.budget {
                self.nodes += 1;
                if self.nodes > budget {
                    self.out_of_budget = true;
                    return None;
                }
            }
            if !self.compatible(p, q) || !self.consistent(p, q) {
                continue;
            }
            self.assignment[p] = Some(q);
            self.inverse[q] = Some(p);
            let result = self.search(depth + 1, visit);
            self.assignment[p] = None;
            self.inverse[q] = None;
            result?;
        }
        Some(())
    }
}
