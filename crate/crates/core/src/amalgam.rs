//! Free amalgamation and the independence predicate it induces.
//!
//! Two structures are glued over a common induced substructure without adding
//! any instance that mixes the two sides outside the common part. Inside an
//! ambient structure, `fa_independent(D, A, B, C)` holds when A and B sit
//! freely amalgamated over C: their intersection lies in C and every instance
//! touching both sides stays within one side plus C.
//!
//! [`check_axioms`] verifies, exhaustively over all structures up to a given
//! size (one per isomorphism class) and all subset triples, that the
//! predicate satisfies invariance, monotonicity, symmetry, full transitivity,
//! freedom, and the isomorphism form of stationarity. Counterexamples are
//! reported as data, never thrown, and re-verify against the predicate.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use crate::canon::automorphisms;
use crate::embed::{for_each_embedding, EmbeddingMode};
use crate::enumerate::{enumerate_up_to, EnumError};
use crate::structure::{Point, PointSet, RelStructure, Signature, StructureError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmalgamError {
    /// The glue map is not injective.
    GlueNotInjective,
    /// The glue map does not carry induced structure to induced structure.
    GlueNotIsomorphism,
    /// A glue point is outside its universe.
    GlueOutOfRange(Point),
    Structure(StructureError),
    Enumeration(EnumError),
}

impl fmt::Display for AmalgamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmalgamError::GlueNotInjective => write!(f, "glue correspondence is not injective"),
            AmalgamError::GlueNotIsomorphism => {
                write!(f, "glue is not an isomorphism of induced substructures")
            }
            AmalgamError::GlueOutOfRange(p) => write!(f, "glue mentions out-of-range point {p}"),
            AmalgamError::Structure(e) => write!(f, "{e}"),
            AmalgamError::Enumeration(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AmalgamError {}

impl From<StructureError> for AmalgamError {
    fn from(e: StructureError) -> Self {
        AmalgamError::Structure(e)
    }
}

impl From<EnumError> for AmalgamError {
    fn from(e: EnumError) -> Self {
        AmalgamError::Enumeration(e)
    }
}

/// Two structures and an injective correspondence identifying a common
/// induced substructure, over which they will be glued.
#[derive(Clone, Debug)]
pub struct AmalgamProblem {
    left: RelStructure,
    right: RelStructure,
    glue: Vec<(Point, Point)>,
}

impl AmalgamProblem {
    /// Validates that `glue` is injective and an isomorphism between the
    /// induced substructure of `left` on its domain and the induced
    /// substructure of `right` on its range.
    pub fn new(
        left: RelStructure,
        right: RelStructure,
        glue: Vec<(Point, Point)>,
    ) -> Result<Self, AmalgamError> {
        let mut dom = PointSet::EMPTY;
        let mut rng = PointSet::EMPTY;
        for &(a, b) in &glue {
            if a >= left.size() {
                return Err(AmalgamError::GlueOutOfRange(a));
            }
            if b >= right.size() {
                return Err(AmalgamError::GlueOutOfRange(b));
            }
            if dom.contains(a) || rng.contains(b) {
                return Err(AmalgamError::GlueNotInjective);
            }
            dom = dom.with(a);
            rng = rng.with(b);
        }
        let mut fwd = alloc::vec![usize::MAX; left.size()];
        let mut bwd = alloc::vec![usize::MAX; right.size()];
        for &(a, b) in &glue {
            fwd[a] = b;
            bwd[b] = a;
        }
        for (sym, tuple) in left.iter_instances() {
            if tuple.iter().all(|&p| dom.contains(p)) {
                let image: Vec<Point> = tuple.iter().map(|&p| fwd[p]).collect();
                if !right.has_instance(sym, &image) {
                    return Err(AmalgamError::GlueNotIsomorphism);
                }
            }
        }
        for (sym, tuple) in right.iter_instances() {
            if tuple.iter().all(|&q| rng.contains(q)) {
                let pre: Vec<Point> = tuple.iter().map(|&q| bwd[q]).collect();
                if !left.has_instance(sym, &pre) {
                    return Err(AmalgamError::GlueNotIsomorphism);
                }
            }
        }
        Ok(AmalgamProblem { left, right, glue })
    }

    pub fn left(&self) -> &RelStructure {
        &self.left
    }

    pub fn right(&self) -> &RelStructure {
        &self.right
    }

    pub fn glue(&self) -> &[(Point, Point)] {
        &self.glue
    }
}

/// A free amalgam: the glued structure together with the copies of both
/// sides and the image of the base inside it.
#[derive(Clone, Debug)]
pub struct FreeAmalgam {
    pub structure: RelStructure,
    /// left point -> amalgam point
    pub left_map: Vec<Point>,
    /// right point -> amalgam point
    pub right_map: Vec<Point>,
    /// image of the glued base
    pub base: PointSet,
}

impl FreeAmalgam {
    pub fn left_image(&self) -> PointSet {
        self.left_map.iter().copied().collect()
    }

    pub fn right_image(&self) -> PointSet {
        self.right_map.iter().copied().collect()
    }
}

/// Glues the two sides of `p` over the identified base, adding no instance
/// that mixes the sides outside the base. The copies of both sides are
/// induced substructures of the result, and the sides are `fa`-independent
/// over the base inside it.
pub fn free_amalgam(p: &AmalgamProblem) -> FreeAmalgam {
    let la = p.left.size();
    let mut right_map = alloc::vec![usize::MAX; p.right.size()];
    let mut base = PointSet::EMPTY;
    for &(a, b) in &p.glue {
        right_map[b] = a;
        base = base.with(a);
    }
    let mut next = la;
    for q in 0..p.right.size() {
        if right_map[q] == usize::MAX {
            right_map[q] = next;
            next += 1;
        }
    }
    let mut d = RelStructure::empty(p.left.signature().clone(), next)
        .expect("amalgam within point limit");
    for (sym, tuple) in p.left.iter_instances() {
        d.add_instance(sym, tuple).expect("left instances are valid");
    }
    for (sym, tuple) in p.right.iter_instances() {
        let mapped: Vec<Point> = tuple.iter().map(|&q| right_map[q]).collect();
        d.add_instance(sym, &mapped).expect("transported instances are valid");
    }
    FreeAmalgam { structure: d, left_map: (0..la).collect(), right_map, base }
}

/// The free-amalgamation independence predicate inside an ambient structure:
/// `A ∩ B ⊆ C`, and every instance with all coordinates in `A ∪ B ∪ C` has
/// all of them in `A ∪ C` or all in `B ∪ C`.
pub fn fa_independent(d: &RelStructure, a: PointSet, b: PointSet, c: PointSet) -> bool {
    if !a.intersect(b).is_subset_of(c) {
        return false;
    }
    let abc = a.union(b).union(c).bits();
    let ac = a.union(c).bits();
    let bc = b.union(c).bits();
    for (_, tuple) in d.iter_instances() {
        let mask = tuple.iter().fold(0u128, |m, &p| m | (1u128 << p));
        if mask & !abc == 0 && mask & !ac != 0 && mask & !bc != 0 {
            return false;
        }
    }
    true
}

/// Which axiom a counterexample refutes, with the data needed to re-check it.
#[derive(Clone, Debug)]
pub enum CounterexampleKind {
    /// `pred(A,B,C) != pred(σA,σB,σC)` for the recorded automorphism.
    Invariance { automorphism: Vec<Point> },
    /// `pred(A,B,C)` holds but fails for the recorded subsets.
    Monotonicity { a_sub: PointSet, b_sub: PointSet },
    /// `pred(A,B,C)` holds but `pred(B,A,C)` does not.
    Symmetry,
    /// For the chain `C ⊆ mid ⊆ B`: `pred(A,B,C)` differs from
    /// `pred(A,B,mid) && pred(A,mid,C)`.
    Transitivity { mid: PointSet },
    /// `pred(A,B,C)` holds, `C ∩ (A∪B) ⊆ D ⊆ C`, but `pred(A,B,D)` fails.
    Freedom { shrunk_base: PointSet },
    /// Both tuples are independent from `B` over `C` and isomorphic over `C`,
    /// yet the recorded isomorphism does not extend to `AB ≅ A'B` over `C`.
    Stationarity { a_prime: PointSet, iso: Vec<(Point, Point)> },
}

/// A concrete refutation: the ambient structure, the subset triple, and the
/// kind-specific data.
#[derive(Clone, Debug)]
pub struct AxiomCounterexample {
    pub ambient: RelStructure,
    pub a: PointSet,
    pub b: PointSet,
    pub c: PointSet,
    pub kind: CounterexampleKind,
}

impl AxiomCounterexample {
    /// Re-runs the refuted condition against `pred`; true means the
    /// counterexample is genuine.
    pub fn reverify(
        &self,
        pred: impl Fn(&RelStructure, PointSet, PointSet, PointSet) -> bool,
    ) -> bool {
        let d = &self.ambient;
        let (a, b, c) = (self.a, self.b, self.c);
        match &self.kind {
            CounterexampleKind::Invariance { automorphism } => {
                let map = |s: PointSet| -> PointSet { s.iter().map(|p| automorphism[p]).collect() };
                pred(d, a, b, c) != pred(d, map(a), map(b), map(c))
            }
            CounterexampleKind::Monotonicity { a_sub, b_sub } => {
                a_sub.is_subset_of(a)
                    && b_sub.is_subset_of(b)
                    && pred(d, a, b, c)
                    && !pred(d, *a_sub, *b_sub, c)
            }
            CounterexampleKind::Symmetry => pred(d, a, b, c) && !pred(d, b, a, c),
            CounterexampleKind::Transitivity { mid } => {
                c.is_subset_of(*mid)
                    && mid.is_subset_of(b)
                    && pred(d, a, b, c) != (pred(d, a, b, *mid) && pred(d, a, *mid, c))
            }
            CounterexampleKind::Freedom { shrunk_base } => {
                pred(d, a, b, c)
                    && c.intersect(a.union(b)).is_subset_of(*shrunk_base)
                    && shrunk_base.is_subset_of(c)
                    && !pred(d, a, b, *shrunk_base)
            }
            CounterexampleKind::Stationarity { a_prime, iso } => {
                pred(d, a, b, c)
                    && pred(d, *a_prime, b, c)
                    && is_iso_over_base(d, a, *a_prime, c, iso)
                    && !extends_to_iso(d, a, *a_prime, b, iso)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum AxiomOutcome {
    Holds { cases: u64 },
    CounterexampleFound(AxiomCounterexample),
}

impl AxiomOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, AxiomOutcome::Holds { .. })
    }

    pub fn counterexample(&self) -> Option<&AxiomCounterexample> {
        match self {
            AxiomOutcome::Holds { .. } => None,
            AxiomOutcome::CounterexampleFound(cx) => Some(cx),
        }
    }

    fn merge(self, other: AxiomOutcome) -> AxiomOutcome {
        match (self, other) {
            (AxiomOutcome::Holds { cases: x }, AxiomOutcome::Holds { cases: y }) => {
                AxiomOutcome::Holds { cases: x + y }
            }
            (c @ AxiomOutcome::CounterexampleFound(_), _) => c,
            (_, c @ AxiomOutcome::CounterexampleFound(_)) => c,
        }
    }
}

/// Per-axiom outcomes of the conformance harness.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub invariance: AxiomOutcome,
    pub monotonicity: AxiomOutcome,
    pub symmetry: AxiomOutcome,
    pub transitivity: AxiomOutcome,
    pub freedom: AxiomOutcome,
    pub stationarity: AxiomOutcome,
    pub structures_checked: u64,
}

impl AxiomReport {
    fn empty() -> Self {
        let holds = || AxiomOutcome::Holds { cases: 0 };
        AxiomReport {
            invariance: holds(),
            monotonicity: holds(),
            symmetry: holds(),
            transitivity: holds(),
            freedom: holds(),
            stationarity: holds(),
            structures_checked: 0,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.outcomes().iter().all(|(_, o)| o.holds())
    }

    pub fn outcomes(&self) -> [(&'static str, &AxiomOutcome); 6] {
        [
            ("invariance", &self.invariance),
            ("monotonicity", &self.monotonicity),
            ("symmetry", &self.symmetry),
            ("full-transitivity", &self.transitivity),
            ("freedom", &self.freedom),
            ("stationarity", &self.stationarity),
        ]
    }

    /// Folds two partial reports; the first counterexample per axiom wins.
    pub fn merge(self, other: AxiomReport) -> AxiomReport {
        AxiomReport {
            invariance: self.invariance.merge(other.invariance),
            monotonicity: self.monotonicity.merge(other.monotonicity),
            symmetry: self.symmetry.merge(other.symmetry),
            transitivity: self.transitivity.merge(other.transitivity),
            freedom: self.freedom.merge(other.freedom),
            stationarity: self.stationarity.merge(other.stationarity),
            structures_checked: self.structures_checked + other.structures_checked,
        }
    }
}

/// Runs the conformance harness for [`fa_independent`] over every structure
/// of size at most `max_size`, one representative per isomorphism class.
pub fn check_axioms(
    sig: &Arc<Signature>,
    max_size: usize,
    cap: usize,
) -> Result<AxiomReport, AmalgamError> {
    check_axioms_with(sig, max_size, cap, fa_independent)
}

/// As [`check_axioms`] for an arbitrary predicate. The harness can be turned
/// against a deliberately corrupted predicate to test itself.
pub fn check_axioms_with(
    sig: &Arc<Signature>,
    max_size: usize,
    cap: usize,
    pred: impl Fn(&RelStructure, PointSet, PointSet, PointSet) -> bool,
) -> Result<AxiomReport, AmalgamError> {
    let mut report = AxiomReport::empty();
    for d in enumerate_up_to(sig, max_size, cap)? {
        report = report.merge(check_axioms_on(&d, &pred));
    }
    Ok(report)
}

/// Checks every axiom on a single ambient structure. Building block for the
/// full harness; callers may partition isomorphism classes across workers and
/// [`AxiomReport::merge`] the results.
pub fn check_axioms_on(
    d: &RelStructure,
    pred: &impl Fn(&RelStructure, PointSet, PointSet, PointSet) -> bool,
) -> AxiomReport {
    let mut report = AxiomReport::empty();
    report.structures_checked = 1;
    let universe = d.universe();
    let subsets: Vec<PointSet> = universe.subsets().collect();
    let n2 = subsets.len();

    // Subsets of 0..n are exactly the masks 0..2^n, so the predicate over
    // all triples fits in one flat table.
    let mut table = alloc::vec![false; n2 * n2 * n2];
    for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                table[(a.bits() as usize * n2 + b.bits() as usize) * n2 + c.bits() as usize] =
                    pred(d, a, b, c);
            }
        }
    }
    let lookup = |a: PointSet, b: PointSet, c: PointSet| -> bool {
        table[(a.bits() as usize * n2 + b.bits() as usize) * n2 + c.bits() as usize]
    };
    let found = |a: PointSet, b: PointSet, c: PointSet, kind: CounterexampleKind| {
        AxiomOutcome::CounterexampleFound(AxiomCounterexample {
            ambient: d.clone(),
            a,
            b,
            c,
            kind,
        })
    };

    // invariance, over all non-identity automorphisms of the ambient
    let autos = automorphisms(d);
    let mut cases = 0u64;
    'inv: for auto in &autos {
        if auto.iter().enumerate().all(|(i, &p)| i == p) {
            continue;
        }
        let map = |s: PointSet| -> PointSet { s.iter().map(|p| auto[p]).collect() };
        for &a in &subsets {
            for &b in &subsets {
                for &c in &subsets {
                    cases += 1;
                    if lookup(a, b, c) != lookup(map(a), map(b), map(c)) {
                        report.invariance = found(
                            a,
                            b,
                            c,
                            CounterexampleKind::Invariance { automorphism: auto.clone() },
                        );
                        break 'inv;
                    }
                }
            }
        }
    }
    bump(&mut report.invariance, cases);

    // monotonicity
    let mut cases = 0u64;
    'mono: for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                if !lookup(a, b, c) {
                    continue;
                }
                for a_sub in a.subsets() {
                    for b_sub in b.subsets() {
                        cases += 1;
                        if !lookup(a_sub, b_sub, c) {
                            report.monotonicity =
                                found(a, b, c, CounterexampleKind::Monotonicity { a_sub, b_sub });
                            break 'mono;
                        }
                    }
                }
            }
        }
    }
    bump(&mut report.monotonicity, cases);

    // symmetry
    let mut cases = 0u64;
    'sym: for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                cases += 1;
                if lookup(a, b, c) && !lookup(b, a, c) {
                    report.symmetry = found(a, b, c, CounterexampleKind::Symmetry);
                    break 'sym;
                }
            }
        }
    }
    bump(&mut report.symmetry, cases);

    // full transitivity over chains C ⊆ mid ⊆ B
    let mut cases = 0u64;
    'trans: for &a in &subsets {
        for &b in &subsets {
            for mid in b.subsets() {
                for base in mid.subsets() {
                    cases += 1;
                    let whole = lookup(a, b, base);
                    let split = lookup(a, b, mid) && lookup(a, mid, base);
                    if whole != split {
                        report.transitivity =
                            found(a, b, base, CounterexampleKind::Transitivity { mid });
                        break 'trans;
                    }
                }
            }
        }
    }
    bump(&mut report.transitivity, cases);

    // freedom: shrink the base towards C ∩ (A∪B)
    let mut cases = 0u64;
    'free: for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                if !lookup(a, b, c) {
                    continue;
                }
                let floor = c.intersect(a.union(b));
                for dsub in c.subsets() {
                    if !floor.is_subset_of(dsub) {
                        continue;
                    }
                    cases += 1;
                    if !lookup(a, b, dsub) {
                        report.freedom =
                            found(a, b, c, CounterexampleKind::Freedom { shrunk_base: dsub });
                        break 'free;
                    }
                }
            }
        }
    }
    bump(&mut report.freedom, cases);

    // stationarity in isomorphism form: whenever a ≅_C a' and both are
    // independent from b over C, the isomorphism extends by id_b
    let mut cases = 0u64;
    'stat: for &c in &subsets {
        for &a in &subsets {
            if !c.is_subset_of(a) {
                continue;
            }
            for &b in &subsets {
                if !c.is_subset_of(b) || !lookup(a, b, c) {
                    continue;
                }
                for &a_prime in &subsets {
                    if a_prime.len() != a.len()
                        || !c.is_subset_of(a_prime)
                        || !lookup(a_prime, b, c)
                    {
                        continue;
                    }
                    let mut failure: Option<Vec<(Point, Point)>> = None;
                    for_each_iso_over_base(d, a, a_prime, c, |iso| {
                        cases += 1;
                        if extends_to_iso(d, a, a_prime, b, iso) {
                            ControlFlow::Continue(())
                        } else {
                            failure = Some(iso.to_vec());
                            ControlFlow::Break(())
                        }
                    });
                    if let Some(iso) = failure {
                        report.stationarity =
                            found(a, b, c, CounterexampleKind::Stationarity { a_prime, iso });
                        break 'stat;
                    }
                }
            }
        }
    }
    bump(&mut report.stationarity, cases);

    report
}

fn bump(outcome: &mut AxiomOutcome, cases: u64) {
    if let AxiomOutcome::Holds { cases: c } = outcome {
        *c += cases;
    }
}

/// Visits every isomorphism from the induced structure on `a` to the induced
/// structure on `a_prime` that fixes `base` pointwise, in ambient
/// coordinates.
pub fn for_each_iso_over_base(
    d: &RelStructure,
    a: PointSet,
    a_prime: PointSet,
    base: PointSet,
    mut visit: impl FnMut(&[(Point, Point)]) -> ControlFlow<()>,
) {
    if !base.is_subset_of(a) || !base.is_subset_of(a_prime) || a.len() != a_prime.len() {
        return;
    }
    let (sub_a, back_a) = d.induced(a).expect("subset of universe");
    let (sub_p, back_p) = d.induced(a_prime).expect("subset of universe");
    let mut partial: Vec<(Point, Point)> = Vec::new();
    for q in base.iter() {
        let i = back_a.iter().position(|&x| x == q).expect("base within a");
        let j = back_p.iter().position(|&x| x == q).expect("base within a'");
        partial.push((i, j));
    }
    let result = for_each_embedding(&sub_a, &sub_p, EmbeddingMode::Induced, Some(&partial), |map| {
        let ambient: Vec<(Point, Point)> =
            map.iter().enumerate().map(|(i, &j)| (back_a[i], back_p[j])).collect();
        visit(&ambient)
    });
    // A partial identity can conflict with the mode; then no isomorphism
    // respects it and there is nothing to visit.
    let _ = result;
}

/// True when `iso` is an isomorphism between the induced structures on `a`
/// and `a_prime` fixing `base` pointwise.
pub fn is_iso_over_base(
    d: &RelStructure,
    a: PointSet,
    a_prime: PointSet,
    base: PointSet,
    iso: &[(Point, Point)],
) -> bool {
    if iso.len() != a.len() {
        return false;
    }
    let mut fwd = alloc::vec![usize::MAX; d.size()];
    let mut covered = PointSet::EMPTY;
    let mut image = PointSet::EMPTY;
    for &(p, q) in iso {
        if !a.contains(p) || !a_prime.contains(q) || covered.contains(p) || image.contains(q) {
            return false;
        }
        if base.contains(p) && p != q {
            return false;
        }
        fwd[p] = q;
        covered = covered.with(p);
        image = image.with(q);
    }
    if covered != a || image != a_prime {
        return false;
    }
    let mut bwd = alloc::vec![usize::MAX; d.size()];
    for &(p, q) in iso {
        bwd[q] = p;
    }
    for (sym, tuple) in d.iter_instances() {
        if tuple.iter().all(|&p| a.contains(p)) {
            let mapped: Vec<Point> = tuple.iter().map(|&p| fwd[p]).collect();
            if !d.has_instance(sym, &mapped) {
                return false;
            }
        }
        if tuple.iter().all(|&q| a_prime.contains(q)) {
            let pre: Vec<Point> = tuple.iter().map(|&q| bwd[q]).collect();
            if !d.has_instance(sym, &pre) {
                return false;
            }
        }
    }
    true
}

/// Checks that `iso ∪ id_B` is an isomorphism between the induced structures
/// on `a ∪ b` and `a' ∪ b`.
fn extends_to_iso(
    d: &RelStructure,
    a: PointSet,
    a_prime: PointSet,
    b: PointSet,
    iso: &[(Point, Point)],
) -> bool {
    let mut fwd = alloc::vec![usize::MAX; d.size()];
    for p in b.iter() {
        fwd[p] = p;
    }
    for &(p, q) in iso {
        if fwd[p] != usize::MAX && fwd[p] != q {
            return false;
        }
        fwd[p] = q;
    }
    let ab = a.union(b);
    let ab_prime = a_prime.union(b);
    let mut seen = PointSet::EMPTY;
    for p in ab.iter() {
        let q = fwd[p];
        if q == usize::MAX || seen.contains(q) || !ab_prime.contains(q) {
            return false;
        }
        seen = seen.with(q);
    }
    if seen != ab_prime {
        return false;
    }
    let mut bwd = alloc::vec![usize::MAX; d.size()];
    for p in ab.iter() {
        bwd[fwd[p]] = p;
    }
    for (sym, tuple) in d.iter_instances() {
        if tuple.iter().all(|&p| ab.contains(p)) {
            let image: Vec<Point> = tuple.iter().map(|&p| fwd[p]).collect();
            if !d.has_instance(sym, &image) {
                return false;
            }
        }
        if tuple.iter().all(|&q| ab_prime.contains(q)) {
            let pre: Vec<Point> = tuple.iter().map(|&q| bwd[q]).collect();
            if !d.has_instance(sym, &pre) {
                return false;
            }
        }
    }
    true
}
