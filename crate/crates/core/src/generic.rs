//! Finite approximations of the generic structure.
//!
//! The generic (Fraïssé) limit itself is infinite; what a finite tool can do
//! is saturate extension axioms: repeatedly find a small induced substructure
//! together with a free one-point extension type no point realises, and add a
//! fresh point realising exactly that type. [`generate`] runs this loop under
//! a seeded deterministic schedule until the size budget is reached or no
//! unrealised problem is left.
//!
//! [`extension_axiom_audit`] measures how close a structure is to generic:
//! it tallies extension problems up to isomorphism (base-with-extension-type
//! pairs) and reports how many are realised somewhere in the structure.
//! [`full_existence_check`] probes the full-existence axiom at the
//! quantifier-free level inside a concrete finite structure.

use alloc::vec::Vec;
use core::fmt;

use crate::amalgam::fa_independent;
use crate::canon::{canonical_form_with_cells, CanonicalCode};
use crate::embed::{for_each_embedding, Embedding, EmbeddingMode};
use crate::enumerate::extension_slots;
use crate::forbidden::{is_free, FamilyError, ForbiddenFamily, FreeVerdict, Irreducibility};
use crate::structure::{Point, PointSet, RelStructure, StructureError};
use core::ops::ControlFlow;

#[derive(Clone, Debug)]
pub enum GenericError {
    /// The family must be minimalised first.
    NotMinimal,
    /// A member is not 2-irreducible, so the class may lack amalgamation;
    /// callers must acknowledge this explicitly to generate anyway.
    NotClosed { member: usize, pair: Vec<Point> },
    /// A size budget of 0 cannot host depth > 0 extension problems.
    ContradictoryInputs,
    /// The structure under audit is not free over the family.
    NotFree { member: usize, embedding: Embedding },
    /// A subset argument violates its documented precondition.
    Precondition(&'static str),
    Structure(StructureError),
    Family(FamilyError),
    /// A state the closure theory rules out; indicates a bug, not a math gap.
    Internal(&'static str),
}

impl fmt::Display for GenericError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenericError::NotMinimal => {
                write!(f, "family must be minimalised before generation")
            }
            GenericError::NotClosed { member, .. } => write!(
                f,
                "member {member} is not 2-irreducible; the class may lack amalgamation \
                 (pass the explicit override to generate anyway)"
            ),
            GenericError::ContradictoryInputs => {
                write!(f, "size 0 with positive depth has no realisable extension problems")
            }
            GenericError::NotFree { member, .. } => {
                write!(f, "structure is not free: member {member} embeds weakly")
            }
            GenericError::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            GenericError::Structure(e) => write!(f, "{e}"),
            GenericError::Family(e) => write!(f, "{e}"),
            GenericError::Internal(msg) => write!(f, "internal inconsistency: {msg}"),
        }
    }
}

impl core::error::Error for GenericError {}

impl From<StructureError> for GenericError {
    fn from(e: StructureError) -> Self {
        GenericError::Structure(e)
    }
}

impl From<FamilyError> for GenericError {
    fn from(e: FamilyError) -> Self {
        GenericError::Family(e)
    }
}

/// Deterministic 64-bit generator (splitmix64). Hand-rolled so that seeds
/// mean the same thing on every platform and toolchain; reproducibility of
/// generated structures is part of the contract.
#[derive(Clone, Debug)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }
}

/// Generation parameters: target size, extension-problem depth, seed, and
/// whether to proceed when the class is not closed under free amalgamation.
#[derive(Clone, Copy, Debug)]
pub struct GenerateOptions {
    pub size: usize,
    pub depth: usize,
    pub seed: u64,
    pub allow_unclosed: bool,
}

/// Default saturation depth for a family: one less than the largest member,
/// the first scale at which forbidden configurations constrain extensions
/// (2 for the unconstrained family).
pub fn default_depth(f: &ForbiddenFamily) -> usize {
    if f.is_empty() {
        2
    } else {
        f.max_member_size().saturating_sub(1)
    }
}

/// Builds a free structure of size at most `opts.size` by extension-axiom
/// saturation: starting empty, repeatedly pick (seeded) an unrealised
/// problem — an induced base of at most `opts.depth` points plus a free
/// one-point extension type over it — and add a fresh point realising
/// exactly that type. Additions that would create a forbidden weak
/// substructure globally are skipped. Deterministic in all parameters.
pub fn generate(f: &ForbiddenFamily, opts: &GenerateOptions) -> Result<RelStructure, GenericError> {
    if !f.is_minimal() {
        return Err(GenericError::NotMinimal);
    }
    if opts.size == 0 && opts.depth > 0 {
        return Err(GenericError::ContradictoryInputs);
    }
    if !opts.allow_unclosed {
        for (i, member) in f.members().iter().enumerate() {
            if let Irreducibility::UnrelatedTuple(pair) = crate::forbidden::is_k_irreducible(member, 2)
            {
                return Err(GenericError::NotClosed { member: i, pair });
            }
        }
    }
    let mut m = RelStructure::empty(f.signature().clone(), 0)?;
    let mut rng = SplitMix64::new(opts.seed);
    let mut blocked: alloc::collections::BTreeSet<(u128, u64)> = alloc::collections::BTreeSet::new();
    while m.size() < opts.size {
        let mut pool: Vec<Problem> = Vec::new();
        for_each_problem(&m, f, opts.depth, |problem| {
            if !blocked.contains(&problem.key()) && !problem.realized(&m) {
                pool.push(problem);
            }
        })?;
        if pool.is_empty() {
            break;
        }
        let pick = &pool[rng.below(pool.len() as u64) as usize];
        let mut candidate = m.clone();
        let x = candidate.add_point()?;
        for (sym, local) in pick.link_instances() {
            let tuple: Vec<Point> = local
                .iter()
                .map(|&i| if i == pick.base.len() { x } else { pick.base[i] })
                .collect();
            candidate.add_instance(sym, &tuple)?;
        }
        match is_free(&candidate, f)? {
            FreeVerdict::Free => m = candidate,
            FreeVerdict::Violation { .. } => {
                // Impossible for 2-irreducible families: the fresh point only
                // relates into the base, so any violation sits inside the
                // locally-checked extension.
                if !opts.allow_unclosed {
                    return Err(GenericError::Internal(
                        "locally free extension failed the global check on a closed class",
                    ));
                }
                blocked.insert(pick.key());
            }
        }
    }
    match is_free(&m, f)? {
        FreeVerdict::Free => Ok(m),
        FreeVerdict::Violation { .. } => {
            Err(GenericError::Internal("generated structure failed the final freeness check"))
        }
    }
}

/// A concrete extension problem: a base subset (ascending) with the slot
/// list over it and the chosen links as a bitmask into the slots.
#[derive(Clone, Debug)]
struct Problem {
    base: Vec<Point>,
    slots: alloc::sync::Arc<Vec<(usize, Vec<Point>)>>,
    links: u64,
}

impl Problem {
    fn key(&self) -> (u128, u64) {
        let bits = self.base.iter().fold(0u128, |m, &p| m | (1u128 << p));
        (bits, self.links)
    }

    fn link_instances(&self) -> impl Iterator<Item = (usize, &Vec<Point>)> {
        self.slots
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.links & (1 << i) != 0)
            .map(|(_, (sym, t))| (*sym, t))
    }

    /// Some point of `m` outside the base whose instances over the base match
    /// the type exactly.
    fn realized(&self, m: &RelStructure) -> bool {
        'witness: for w in 0..m.size() {
            if self.base.contains(&w) {
                continue;
            }
            for (i, (sym, local)) in self.slots.iter().enumerate() {
                let tuple: Vec<Point> = local
                    .iter()
                    .map(|&l| if l == self.base.len() { w } else { self.base[l] })
                    .collect();
                if m.has_instance(*sym, &tuple) != (self.links & (1 << i) != 0) {
                    continue 'witness;
                }
            }
            return true;
        }
        false
    }

    /// The extension as a structure: the induced base re-indexed to
    /// `0..base.len()` plus the fresh point `base.len()` with its links.
    fn extension_structure(&self, m: &RelStructure) -> Result<RelStructure, GenericError> {
        let set: PointSet = self.base.iter().copied().collect();
        let (mut ext, _) = m.induced(set)?;
        ext.add_point()?;
        for (sym, local) in self.link_instances() {
            ext.add_instance(sym, local)?;
        }
        Ok(ext)
    }
}

/// Visits every free extension problem of `m` at bases of size <= depth.
fn for_each_problem(
    m: &RelStructure,
    f: &ForbiddenFamily,
    depth: usize,
    mut visit: impl FnMut(Problem),
) -> Result<(), GenericError> {
    let sig = m.signature().clone();
    for base in subsets_up_to(m.size(), depth) {
        let slots = alloc::sync::Arc::new(extension_slots(&sig, base.len()));
        if slots.len() >= 64 {
            return Err(GenericError::Precondition("extension depth too large: over 63 link slots"));
        }
        for links in 0u64..(1u64 << slots.len()) {
            let problem = Problem { base: base.clone(), slots: slots.clone(), links };
            let ext = problem.extension_structure(m)?;
            if is_free(&ext, f)?.is_free() {
                visit(problem);
            }
        }
    }
    Ok(())
}

/// All ascending subsets of `0..n` with at most `k` elements, smallest first.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut cur: Vec<Point> = Vec::new();
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for p in start..n {
            cur.push(p);
            go(p + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

/// An extension problem no point realises: the base (as concrete points in
/// the audited structure) and the extension as a pointed structure.
#[derive(Clone, Debug)]
pub struct UnrealizedProblem {
    pub base: Vec<Point>,
    pub extension: RelStructure,
}

/// How generic a structure looks at a given depth: extension problems are
/// counted up to isomorphism of the (base, extension-type) pair, and a class
/// counts as realised when any of its concrete occurrences is.
#[derive(Clone, Debug)]
pub struct GenericityAudit {
    pub depth: usize,
    pub total: u64,
    pub realized: u64,
    /// Up to ten representatives of unrealised classes.
    pub unrealized: Vec<UnrealizedProblem>,
}

impl GenericityAudit {
    pub fn fully_realized(&self) -> bool {
        self.realized == self.total
    }
}

/// Audits extension-axiom saturation of `m` over `f` at the given depth.
/// Errors when `m` is not free, carrying the violation.
pub fn extension_axiom_audit(
    m: &RelStructure,
    f: &ForbiddenFamily,
    depth: usize,
) -> Result<GenericityAudit, GenericError> {
    if let FreeVerdict::Violation { member, embedding } = is_free(m, f)? {
        return Err(GenericError::NotFree { member, embedding });
    }
    struct ClassState {
        realized: bool,
        base: Vec<Point>,
        extension: RelStructure,
    }
    let mut classes: alloc::collections::BTreeMap<CanonicalCode, ClassState> =
        alloc::collections::BTreeMap::new();
    for_each_problem(m, f, depth, |problem| {
        let ext = problem.extension_structure(m).expect("problem came from this structure");
        let mut cells: Vec<Vec<Point>> = Vec::new();
        if !problem.base.is_empty() {
            cells.push((0..problem.base.len()).collect());
        }
        cells.push(alloc::vec![problem.base.len()]);
        let code = canonical_form_with_cells(&ext, cells);
        let realized = problem.realized(m);
        classes
            .entry(code)
            .and_modify(|c| c.realized |= realized)
            .or_insert(ClassState { realized, base: problem.base.clone(), extension: ext });
    })?;
    let total = classes.len() as u64;
    let realized = classes.values().filter(|c| c.realized).count() as u64;
    let unrealized = classes
        .into_values()
        .filter(|c| !c.realized)
        .take(10)
        .map(|c| UnrealizedProblem { base: c.base, extension: c.extension })
        .collect();
    Ok(GenericityAudit { depth, total, realized, unrealized })
}

/// Re-verification entry for audit reports: does some point of `m` outside
/// `base` realise the extension type carried by `extension` (a pointed
/// structure: the base re-indexed ascending, the fresh point last)?
pub fn realizes_extension(
    m: &RelStructure,
    base: &[Point],
    extension: &RelStructure,
) -> Result<bool, GenericError> {
    if extension.size() != base.len() + 1 {
        return Err(GenericError::Precondition("extension must add exactly one point"));
    }
    if base.windows(2).any(|w| w[0] >= w[1]) || base.iter().any(|&p| p >= m.size()) {
        return Err(GenericError::Precondition("base must be ascending points of the structure"));
    }
    let set: PointSet = base.iter().copied().collect();
    let (induced_base, _) = m.induced(set)?;
    for (sym, tuple) in induced_base.iter_instances() {
        if !extension.has_instance(sym, tuple) {
            return Err(GenericError::Precondition("extension does not extend the induced base"));
        }
    }
    let slots = alloc::sync::Arc::new(extension_slots(m.signature(), base.len()));
    if slots.len() >= 64 {
        return Err(GenericError::Precondition("extension depth too large: over 63 link slots"));
    }
    let mut links = 0u64;
    for (i, (sym, t)) in slots.iter().enumerate() {
        if extension.has_instance(*sym, t) {
            links |= 1 << i;
        }
    }
    let problem = Problem { base: base.to_vec(), slots, links };
    Ok(problem.realized(m))
}

/// Full existence at the quantifier-free level inside `m`: finds `a'` with
/// the induced structure on `a'` isomorphic over `c` (pointwise) to the one
/// on `a`, and `fa`-independent from `b` over `c`. Requires `c ⊆ a`; the
/// found tuple may be `a` itself. Absence in a small structure witnesses
/// non-genericity of `m`, nothing more.
pub fn full_existence_check(
    m: &RelStructure,
    a: PointSet,
    b: PointSet,
    c: PointSet,
) -> Result<Option<PointSet>, GenericError> {
    let universe = m.universe();
    if !a.is_subset_of(universe) || !b.is_subset_of(universe) || !c.is_subset_of(universe) {
        return Err(GenericError::Precondition("subsets must lie inside the universe"));
    }
    if !c.is_subset_of(a) {
        return Err(GenericError::Precondition("the base must be part of the moved tuple"));
    }
    let (sub, back) = m.induced(a)?;
    let mut partial: Vec<(Point, Point)> = Vec::new();
    for p in c.iter() {
        let i = back.iter().position(|&x| x == p).expect("c inside a");
        partial.push((i, p));
    }
    let mut found: Option<PointSet> = None;
    let _ = for_each_embedding(&sub, m, EmbeddingMode::Induced, Some(&partial), |map| {
        let image: PointSet = map.iter().copied().collect();
        if fa_independent(m, image, b, c) {
            found = Some(image);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(found)
}
