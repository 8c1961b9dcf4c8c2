//! Explicit finite witness configurations with re-verifiable certificates.
//!
//! Every builder here returns plain data: structures, designated point sets,
//! and embeddings that re-check from scratch using only the embedding and
//! forbidden modules. Nothing is taken on trust.
//!
//! - [`independent_sequence`]: iterated free amalgam of copies of a tuple
//!   over a base;
//! - [`dividing_witness`]: a spine tuple attached identically to every copy
//!   of an independent sequence — free whenever every forbidden member is
//!   3-irreducible;
//! - [`nonsimplicity_witness`]: the row construction (a half-graph for
//!   triangle-free graphs) whose rows make a single attached tuple divide,
//!   with an explicit contradiction embedding;
//! - [`sop3_certificate`]: the order-property certificate assembled from a
//!   non-simplicity witness, with exhaustive inconsistency proofs;
//! - [`sop_cycle`]: the n-cycle of a self-paired tuple pattern, free at n=4
//!   over any 2-irreducible family but possibly blocked at n=3.

use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use crate::amalgam::for_each_iso_over_base;
use crate::embed::{EmbedError, Embedding, EmbeddingMode};
use crate::forbidden::{
    is_free, is_k_irreducible, FamilyError, ForbiddenFamily, FreeVerdict, Irreducibility,
};
use crate::structure::{Point, PointSet, RelStructure, StructureError};

#[derive(Clone, Debug)]
pub enum WitnessError {
    /// The pattern's subsets do not satisfy the invariants
    /// (cover the carrier; left and right meet exactly in the base).
    PatternInvalid(&'static str),
    /// The pattern's carrier is not free over the family.
    PatternNotFree { member: usize },
    /// No isomorphism from left to right over the base: the pattern is not
    /// self-paired, so it cannot seed a cycle.
    NotSelfPaired,
    /// Cycles need at least three copies.
    CycleTooShort,
    /// A named hypothesis of the construction fails.
    HypothesisFailed(&'static str),
    /// Member index out of range.
    NoSuchMember(usize),
    /// A witness failed re-verification; its data was altered or corrupted.
    Tampered(&'static str),
    /// A state the theory rules out; indicates a bug, not a math gap.
    Internal(&'static str),
    Structure(StructureError),
    Family(FamilyError),
    Embed(EmbedError),
}

impl fmt::Display for WitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessError::PatternInvalid(msg) => write!(f, "invalid pattern: {msg}"),
            WitnessError::PatternNotFree { member } => {
                write!(f, "pattern carrier is not free: member {member} embeds")
            }
            WitnessError::NotSelfPaired => {
                write!(f, "pattern is not self-paired (left and right differ over the base)")
            }
            WitnessError::CycleTooShort => write!(f, "cycle length must be at least 3"),
            WitnessError::HypothesisFailed(msg) => write!(f, "hypothesis failed: {msg}"),
            WitnessError::NoSuchMember(i) => write!(f, "family has no member {i}"),
            WitnessError::Tampered(msg) => write!(f, "witness failed re-verification: {msg}"),
            WitnessError::Internal(msg) => write!(f, "internal inconsistency: {msg}"),
            WitnessError::Structure(e) => write!(f, "{e}"),
            WitnessError::Family(e) => write!(f, "{e}"),
            WitnessError::Embed(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WitnessError {}

impl From<StructureError> for WitnessError {
    fn from(e: StructureError) -> Self {
        WitnessError::Structure(e)
    }
}

impl From<FamilyError> for WitnessError {
    fn from(e: FamilyError) -> Self {
        WitnessError::Family(e)
    }
}

impl From<EmbedError> for WitnessError {
    fn from(e: EmbedError) -> Self {
        WitnessError::Embed(e)
    }
}

/// A two-sided tuple pattern inside a carrier structure: the left tuple, the
/// right tuple, and the base over which they are paired. Left and right
/// cover the carrier together and meet exactly in the base.
#[derive(Clone, Debug)]
pub struct PairPattern {
    carrier: RelStructure,
    left: PointSet,
    right: PointSet,
    base: PointSet,
}

impl PairPattern {
    pub fn new(
        carrier: RelStructure,
        left: PointSet,
        right: PointSet,
        base: PointSet,
    ) -> Result<Self, WitnessError> {
        let universe = carrier.universe();
        if !left.union(right).union(base).is_subset_of(universe) {
            return Err(WitnessError::PatternInvalid("subsets exceed the carrier"));
        }
        if left.union(right).union(base) != universe {
            return Err(WitnessError::PatternInvalid("left, right and base must cover the carrier"));
        }
        if left.intersect(right) != base {
            return Err(WitnessError::PatternInvalid(
                "left and right must overlap exactly in the base",
            ));
        }
        Ok(PairPattern { carrier, left, right, base })
    }

    pub fn carrier(&self) -> &RelStructure {
        &self.carrier
    }

    pub fn left(&self) -> PointSet {
        self.left
    }

    pub fn right(&self) -> PointSet {
        self.right
    }

    pub fn base(&self) -> PointSet {
        self.base
    }
}

/// The structure on base ∪ b⁰ ∪ … ∪ bᵏ⁻¹ where every bⁱ is a fresh copy of
/// the pattern's right tuple over the base, pairwise freely amalgamated.
#[derive(Clone, Debug)]
pub struct IndependentSequence {
    pub structure: RelStructure,
    pub base: PointSet,
    pub copies: Vec<PointSet>,
}

/// Builds the k-fold free amalgam of copies of (right over base).
pub fn independent_sequence(pattern: &PairPattern, k: usize) -> IndependentSequence {
    let (right_ind, right_back) = pattern
        .carrier
        .induced(pattern.right)
        .expect("pattern subsets are inside the carrier");
    // positions of base points within the right tuple's ordering
    let base_local: Vec<usize> = right_back
        .iter()
        .enumerate()
        .filter(|(_, &p)| pattern.base.contains(p))
        .map(|(i, _)| i)
        .collect();
    let free_local: Vec<usize> = right_back
        .iter()
        .enumerate()
        .filter(|(_, &p)| !pattern.base.contains(p))
        .map(|(i, _)| i)
        .collect();
    let b = base_local.len();
    let t = free_local.len();
    let size = b + k * t;
    let mut s = RelStructure::empty(pattern.carrier.signature().clone(), size)
        .expect("callers keep sequence sizes within the point limit");
    // local right index -> sequence point, per copy
    let locate = |copy: usize, local: usize| -> Point {
        if let Some(pos) = base_local.iter().position(|&i| i == local) {
            pos
        } else {
            let pos = free_local.iter().position(|&i| i == local).expect("partitioned");
            b + copy * t + pos
        }
    };
    for copy in 0..k.max(1) {
        if copy >= k {
            break;
        }
        for (sym, tuple) in right_ind.iter_instances() {
            let mapped: Vec<Point> = tuple.iter().map(|&i| locate(copy, i)).collect();
            s.add_instance(sym, &mapped).ok();
        }
    }
    if k == 0 {
        // just the base
        for (sym, tuple) in right_ind.iter_instances() {
            if tuple.iter().all(|&i| base_local.contains(&i)) {
                let mapped: Vec<Point> = tuple.iter().map(|&i| locate(0, i)).collect();
                s.add_instance(sym, &mapped).ok();
            }
        }
    }
    let base: PointSet = (0..b).collect();
    let copies: Vec<PointSet> = (0..k)
        .map(|copy| {
            let mut set = base;
            for pos in 0..t {
                set = set.with(b + copy * t + pos);
            }
            set
        })
        .collect();
    IndependentSequence { structure: s, base, copies }
}

/// A dividing witness: the spine tuple attached identically over every copy
/// of the independent sequence.
#[derive(Clone, Debug)]
pub struct DividingWitness {
    pub structure: RelStructure,
    pub base: PointSet,
    pub copies: Vec<PointSet>,
    /// the attached copy of the pattern's left tuple (base excluded)
    pub spine: PointSet,
}

#[derive(Clone, Debug)]
pub enum DividingOutcome {
    Witness(DividingWitness),
    Blocked { member: usize, embedding: Embedding },
}

/// Attaches a fresh copy of the pattern's left tuple to `k` independent
/// copies of its right tuple, each pair isomorphic to the pattern over the
/// base, with no other instance. Free for every 3-irreducible family;
/// otherwise the blocking member is returned with its embedding.
pub fn dividing_witness(
    pattern: &PairPattern,
    family: &ForbiddenFamily,
    k: usize,
) -> Result<DividingOutcome, WitnessError> {
    if let FreeVerdict::Violation { member, .. } = is_free(&pattern.carrier, family)? {
        return Err(WitnessError::PatternNotFree { member });
    }
    let seq = independent_sequence(pattern, k);
    let b = seq.base.len();
    let t_right = if k > 0 { (seq.copies[0].len() - b) as usize } else { 0 };
    let left_free: Vec<Point> = pattern.left.minus(pattern.base).iter().collect();
    let spine_start = b + k * t_right;
    let mut d = RelStructure::empty(
        pattern.carrier.signature().clone(),
        spine_start + left_free.len(),
    )?;
    for (sym, tuple) in seq.structure.iter_instances() {
        d.add_instance(sym, tuple)?;
    }
    // carrier point -> witness point, for the pairing with one copy
    let right_free: Vec<Point> = pattern.right.minus(pattern.base).iter().collect();
    let base_points: Vec<Point> = pattern.base.iter().collect();
    let map_for_copy = |copy: usize, p: Point| -> Point {
        if let Some(i) = base_points.iter().position(|&q| q == p) {
            i
        } else if let Some(i) = right_free.iter().position(|&q| q == p) {
            b + copy * t_right + i
        } else {
            let i = left_free.iter().position(|&q| q == p).expect("pattern covers the carrier");
            spine_start + i
        }
    };
    for copy in 0..k {
        for (sym, tuple) in pattern.carrier.iter_instances() {
            if tuple.iter().any(|&p| pattern.left.minus(pattern.base).contains(p)) {
                let mapped: Vec<Point> = tuple.iter().map(|&p| map_for_copy(copy, p)).collect();
                d.add_instance(sym, &mapped)?;
            }
        }
    }
    if k == 0 {
        // no copies: the spine over the base alone
        for (sym, tuple) in pattern.carrier.iter_instances() {
            if tuple.iter().all(|&p| pattern.left.contains(p)) {
                let mapped: Vec<Point> = tuple.iter().map(|&p| map_for_copy(0, p)).collect();
                d.add_instance(sym, &mapped)?;
            }
        }
    }
    let spine: PointSet = (spine_start..spine_start + left_free.len()).collect();
    match is_free(&d, family)? {
        FreeVerdict::Free => Ok(DividingOutcome::Witness(DividingWitness {
            structure: d,
            base: seq.base,
            copies: seq.copies,
            spine,
        })),
        FreeVerdict::Violation { member, embedding } => {
            Ok(DividingOutcome::Blocked { member, embedding })
        }
    }
}

/// The row construction refuting simplicity, with its contradiction
/// certificate. All points refer to [`Self::certificate_structure`]; `e` and
/// `e_plus` are its induced prefixes.
#[derive(Clone, Debug)]
pub struct NonSimplicityWitness {
    /// index of the member A in the family
    pub member: usize,
    /// the member structure itself (kept so the witness is self-contained)
    pub member_structure: RelStructure,
    /// three elements of the member no instance covers
    pub unrelated: [Point; 3],
    pub rows: usize,
    /// the row structure E: hat points first, then (b₂, b₃) per row
    pub e: RelStructure,
    pub hat: PointSet,
    pub row_pairs: Vec<(Point, Point)>,
    /// E with the attached point b₁
    pub e_plus: RelStructure,
    pub b1: Point,
    pub contradiction: ContradictionCertificate,
}

/// Adjoining a candidate b★ related to rows 0 and 1 the way b₁ is related to
/// row 0 forces a weak copy of the member: the embedding is explicit.
#[derive(Clone, Debug)]
pub struct ContradictionCertificate {
    /// E⁺ together with b★
    pub structure: RelStructure,
    pub b_star: Point,
    /// member -> certificate structure, with image inside b★, b⁰₂, b¹₃, hat
    pub embedding: Embedding,
}

/// Builds the non-simplicity witness for `family.members()[member]` with the
/// given number of rows. Requires every member 2-irreducible and the chosen
/// member not 3-irreducible.
pub fn nonsimplicity_witness(
    family: &ForbiddenFamily,
    member: usize,
    rows: usize,
) -> Result<NonSimplicityWitness, WitnessError> {
    if !family.is_minimal() {
        return Err(WitnessError::HypothesisFailed("family must be minimalised"));
    }
    for m in family.members() {
        if !is_k_irreducible(m, 2).is_irreducible() {
            return Err(WitnessError::HypothesisFailed(
                "every member must be 2-irreducible (class closed under free amalgamation)",
            ));
        }
    }
    let a = family
        .members()
        .get(member)
        .ok_or(WitnessError::NoSuchMember(member))?;
    let unrelated = match is_k_irreducible(a, 3) {
        Irreducibility::Irreducible => {
            return Err(WitnessError::HypothesisFailed(
                "member is 3-irreducible: it admits no unrelated triple",
            ))
        }
        Irreducibility::UnrelatedTuple(w) => [w[0], w[1], w[2]],
    };
    if rows < 2 {
        return Err(WitnessError::HypothesisFailed("need at least 2 rows"));
    }

    let layout = RowLayout::new(a, unrelated, rows);
    let e = layout.build_e()?;
    if let FreeVerdict::Violation { .. } = is_free(&e, family)? {
        return Err(WitnessError::Internal("row structure E is not free"));
    }
    let (e_plus, b1) = layout.attach_b1(&e)?;
    if let FreeVerdict::Violation { .. } = is_free(&e_plus, family)? {
        return Err(WitnessError::Internal("E plus b1 is not free"));
    }
    let (cert_structure, b_star) = layout.adjoin_b_star(&e_plus, b1)?;
    let embedding = layout.member_embedding(b_star);
    if !embedding.verify(a, &cert_structure) {
        return Err(WitnessError::Internal("contradiction embedding failed verification"));
    }
    Ok(NonSimplicityWitness {
        member,
        member_structure: a.clone(),
        unrelated,
        rows,
        hat: PointSet::full(layout.hat_len),
        row_pairs: layout.row_pairs(),
        e,
        e_plus,
        b1,
        contradiction: ContradictionCertificate { structure: cert_structure, b_star, embedding },
    })
}

/// Re-verifies a witness from scratch: the hypotheses, the exact instance
/// set of E (items (1)-(3): row patterns, cross pairs for l < m, nothing
/// else), freeness of E and E⁺, and the contradiction embedding.
pub fn verify_nonsimplicity_witness(
    family: &ForbiddenFamily,
    w: &NonSimplicityWitness,
) -> Result<(), WitnessError> {
    let a = family
        .members()
        .get(w.member)
        .ok_or(WitnessError::NoSuchMember(w.member))?;
    if a != &w.member_structure {
        return Err(WitnessError::Tampered("member structure differs from the family's"));
    }
    let [a1, a2, a3] = w.unrelated;
    let triple = PointSet::from_points([a1, a2, a3]);
    if triple.len() != 3 || !triple.is_subset_of(a.universe()) {
        return Err(WitnessError::Tampered("unrelated triple is not three points of the member"));
    }
    if a.instance_masks().iter().any(|&im| triple.bits() & !im == 0) {
        return Err(WitnessError::Tampered("the recorded triple is related in the member"));
    }
    let layout = RowLayout::new(a, w.unrelated, w.rows);
    let expected_e = layout.build_e()?;
    if expected_e != w.e {
        return Err(WitnessError::Tampered("E differs from the prescribed construction"));
    }
    if let FreeVerdict::Violation { .. } = is_free(&w.e, family)? {
        return Err(WitnessError::Tampered("E is not free"));
    }
    let (expected_e_plus, b1) = layout.attach_b1(&w.e)?;
    if expected_e_plus != w.e_plus || b1 != w.b1 {
        return Err(WitnessError::Tampered("E plus b1 differs from the prescribed construction"));
    }
    if let FreeVerdict::Violation { .. } = is_free(&w.e_plus, family)? {
        return Err(WitnessError::Tampered("E plus b1 is not free"));
    }
    let (expected_cert, b_star) = layout.adjoin_b_star(&w.e_plus, w.b1)?;
    if expected_cert != w.contradiction.structure || b_star != w.contradiction.b_star {
        return Err(WitnessError::Tampered("certificate structure differs from the construction"));
    }
    if !w.contradiction.embedding.verify(a, &w.contradiction.structure) {
        return Err(WitnessError::Tampered("contradiction embedding does not verify"));
    }
    // the image must lie inside b★ b⁰₂ b¹₃ hat
    let allowed: PointSet = w
        .hat
        .iter()
        .chain([w.row_pairs[0].0, w.row_pairs[1].1, w.contradiction.b_star])
        .collect();
    if !w.contradiction.embedding.map().iter().all(|&q| allowed.contains(q)) {
        return Err(WitnessError::Tampered("contradiction image leaves b★ b⁰₂ b¹₃ hat"));
    }
    Ok(())
}

/// Point bookkeeping shared by construction and re-verification.
struct RowLayout<'a> {
    member: &'a RelStructure,
    a1: Point,
    a2: Point,
    a3: Point,
    hat: Vec<Point>,
    hat_len: usize,
    rows: usize,
}

impl<'a> RowLayout<'a> {
    fn new(member: &'a RelStructure, unrelated: [Point; 3], rows: usize) -> Self {
        let [a1, a2, a3] = unrelated;
        let hat: Vec<Point> =
            (0..member.size()).filter(|&p| p != a1 && p != a2 && p != a3).collect();
        let hat_len = hat.len();
        RowLayout { member, a1, a2, a3, hat, hat_len, rows }
    }

    fn row_pairs(&self) -> Vec<(Point, Point)> {
        (0..self.rows)
            .map(|l| (self.hat_len + 2 * l, self.hat_len + 2 * l + 1))
            .collect()
    }

    /// member point -> E point, sending a2 and a3 into the given rows.
    /// a1 has no image; instances involving it must not be transported.
    fn map_into_rows(&self, row2: usize, row3: usize) -> impl Fn(Point) -> Option<Point> + '_ {
        let pairs2 = self.hat_len + 2 * row2;
        let pairs3 = self.hat_len + 2 * row3 + 1;
        move |p: Point| -> Option<Point> {
            if p == self.a2 {
                Some(pairs2)
            } else if p == self.a3 {
                Some(pairs3)
            } else if p == self.a1 {
                None
            } else {
                self.hat.iter().position(|&q| q == p)
            }
        }
    }

    /// E: hat first, then (b₂,b₃) per row; instances are exactly the
    /// transported row patterns (1), the cross pairs (2) for l < m, and the
    /// hat pattern they share — nothing else.
    fn build_e(&self) -> Result<RelStructure, WitnessError> {
        let size = self.hat_len + 2 * self.rows;
        let mut e = RelStructure::empty(self.member.signature().clone(), size)?;
        let hat_set: PointSet = self.member.universe().without(self.a1).without(self.a2).without(self.a3);
        for l in 0..self.rows {
            // (1) single-row patterns b₂ˡ hat and b₃ˡ hat
            for (which, avoid) in [(self.a2, self.a3), (self.a3, self.a2)] {
                let allowed = hat_set.with(which);
                let map = self.map_into_rows(l, l);
                for (sym, tuple) in self.member.iter_instances() {
                    if tuple.iter().all(|&p| allowed.contains(p)) {
                        debug_assert!(!tuple.contains(&avoid) && !tuple.contains(&self.a1));
                        let mapped: Vec<Point> =
                            tuple.iter().map(|&p| map(p).expect("a1 excluded")).collect();
                        e.add_instance(sym, &mapped)?;
                    }
                }
            }
            // (2) cross pairs b₂ˡ b₃ᵐ hat for l < m
            for m in (l + 1)..self.rows {
                let allowed = hat_set.with(self.a2).with(self.a3);
                let map = self.map_into_rows(l, m);
                for (sym, tuple) in self.member.iter_instances() {
                    if tuple.iter().all(|&p| allowed.contains(p)) {
                        let mapped: Vec<Point> =
                            tuple.iter().map(|&p| map(p).expect("a1 excluded")).collect();
                        e.add_instance(sym, &mapped)?;
                    }
                }
            }
        }
        Ok(e)
    }

    /// E⁺: one fresh point b₁ with b₁ b₂⁰ hat ≅ a₁ a₂ hat and
    /// b₁ b₃⁰ hat ≅ a₁ a₃ hat.
    fn attach_b1(&self, e: &RelStructure) -> Result<(RelStructure, Point), WitnessError> {
        let mut e_plus = e.clone();
        let b1 = e_plus.add_point()?;
        let hat_set: PointSet =
            self.member.universe().without(self.a1).without(self.a2).without(self.a3);
        for t in [self.a2, self.a3] {
            let allowed = hat_set.with(self.a1).with(t);
            let map = self.map_into_rows(0, 0);
            for (sym, tuple) in self.member.iter_instances() {
                if tuple.iter().all(|&p| allowed.contains(p)) && tuple.contains(&self.a1) {
                    let mapped: Vec<Point> = tuple
                        .iter()
                        .map(|&p| if p == self.a1 { b1 } else { map(p).expect("not a1") })
                        .collect();
                    e_plus.add_instance(sym, &mapped)?;
                }
            }
        }
        Ok((e_plus, b1))
    }

    /// The certificate structure: E⁺ plus b★ whose pattern over rows 0 and 1
    /// copies b₁'s pattern over row 0.
    fn adjoin_b_star(
        &self,
        e_plus: &RelStructure,
        b1: Point,
    ) -> Result<(RelStructure, Point), WitnessError> {
        let mut cert = e_plus.clone();
        let b_star = cert.add_point()?;
        let hat_set: PointSet =
            self.member.universe().without(self.a1).without(self.a2).without(self.a3);
        for l in [0usize, 1] {
            for t in [self.a2, self.a3] {
                let allowed = hat_set.with(self.a1).with(t);
                let map = self.map_into_rows(l, l);
                for (sym, tuple) in self.member.iter_instances() {
                    if tuple.iter().all(|&p| allowed.contains(p)) && tuple.contains(&self.a1) {
                        let mapped: Vec<Point> = tuple
                            .iter()
                            .map(|&p| if p == self.a1 { b_star } else { map(p).expect("not a1") })
                            .collect();
                        cert.add_instance(sym, &mapped)?;
                    }
                }
            }
        }
        let _ = b1;
        Ok((cert, b_star))
    }

    /// a₁ -> b★, a₂ -> b₂⁰, a₃ -> b₃¹, hat -> hat.
    fn member_embedding(&self, b_star: Point) -> Embedding {
        let map: Vec<Point> = (0..self.member.size())
            .map(|p| {
                if p == self.a1 {
                    b_star
                } else if p == self.a2 {
                    self.hat_len
                } else if p == self.a3 {
                    self.hat_len + 2 + 1
                } else {
                    self.hat.iter().position(|&q| q == p).expect("hat point")
                }
            })
            .collect();
        Embedding::new(map, EmbeddingMode::Weak)
    }
}

/// One refuted completion: the structure extending the parameters by the new
/// point with a concrete choice of optional instances, and the member that
/// embeds into it.
#[derive(Clone, Debug)]
pub struct InconsistencyCase {
    pub completion: RelStructure,
    pub member: usize,
    pub embedding: Embedding,
}

/// Exhaustive proof that the paired types over rows i < j cannot be realised
/// together: every completion of the new point's type contains a member.
#[derive(Clone, Debug)]
pub struct InconsistencyProof {
    pub i: usize,
    pub j: usize,
    pub cases: Vec<InconsistencyCase>,
}

/// The order-property certificate assembled from a non-simplicity witness:
/// row players realised over the rows, the two patterns, and per-pair
/// inconsistency proofs.
#[derive(Clone, Debug)]
pub struct Sop3Certificate {
    /// E extended by one player per row
    pub carrier: RelStructure,
    pub hat: PointSet,
    pub row_pairs: Vec<(Point, Point)>,
    pub players: Vec<Point>,
    pub p_pattern: PairPattern,
    pub q_pattern: PairPattern,
    pub proofs: Vec<InconsistencyProof>,
}

/// Builds the certificate: re-verifies the witness, realises the row players
/// directly (player i paired with row j through the left pattern for i < j
/// and through the right pattern otherwise), and proves inconsistency of
/// each crossed pair of types by exhausting the new point's completions.
pub fn sop3_certificate(
    family: &ForbiddenFamily,
    w: &NonSimplicityWitness,
) -> Result<Sop3Certificate, WitnessError> {
    verify_nonsimplicity_witness(family, w)?;
    let a = &w.member_structure;
    let [a1, a2, a3] = w.unrelated;
    let layout = RowLayout::new(a, w.unrelated, w.rows);
    let rows = w.rows;

    // players sit after E
    let mut carrier = w.e.clone();
    let mut players = Vec::with_capacity(rows);
    for _ in 0..rows {
        players.push(carrier.add_point()?);
    }
    let hat_set: PointSet = a.universe().without(a1).without(a2).without(a3);
    for (i, &player) in players.iter().enumerate() {
        for j in 0..rows {
            let (t, avoid) = if j > i { (a2, a3) } else { (a3, a2) };
            let allowed = hat_set.with(a1).with(t);
            let map = layout.map_into_rows(j, j);
            for (sym, tuple) in a.iter_instances() {
                if tuple.iter().all(|&p| allowed.contains(p)) && tuple.contains(&a1) {
                    debug_assert!(!tuple.contains(&avoid));
                    let mapped: Vec<Point> = tuple
                        .iter()
                        .map(|&p| if p == a1 { player } else { map(p).expect("not a1") })
                        .collect();
                    carrier.add_instance(sym, &mapped)?;
                }
            }
        }
    }
    if let FreeVerdict::Violation { .. } = is_free(&carrier, family)? {
        return Err(WitnessError::Internal("player extension is not free"));
    }

    // patterns: p pairs the new point with a row's b₂ over hat, q with b₃
    let make_pattern = |other: Point| -> Result<PairPattern, WitnessError> {
        let keep = hat_set.with(a1).with(other);
        let (ind, back) = a.induced(keep)?;
        let pos = |p: Point| back.iter().position(|&q| q == p).expect("kept") as Point;
        let hat_local: PointSet = hat_set.iter().map(&pos).collect();
        PairPattern::new(ind, hat_local.with(pos(a1)), hat_local.with(pos(other)), hat_local)
    };
    let p_pattern = make_pattern(a2)?;
    let q_pattern = make_pattern(a3)?;

    // inconsistency of p(x, dᵢ) ∪ q(x, dⱼ) for i < j
    let mut proofs = Vec::new();
    for i in 0..rows {
        for j in (i + 1)..rows {
            proofs.push(prove_inconsistent(family, w, &layout, i, j)?);
        }
    }

    Ok(Sop3Certificate {
        carrier,
        hat: w.hat,
        row_pairs: w.row_pairs.clone(),
        players,
        p_pattern,
        q_pattern,
        proofs,
    })
}

/// Enumerates every completion of a new point x over the parameters
/// `dᵢ ∪ dⱼ ∪ hat` whose type contains both patterns (x to bᵢ₂ as a₁ to a₂,
/// x to bⱼ₃ as a₁ to a₃, and a₁'s hat pattern), and exhibits a member inside
/// each. Slots pinned by the two types stay fixed; all remaining instance
/// slots between x and the parameters range over every subset.
fn prove_inconsistent(
    family: &ForbiddenFamily,
    w: &NonSimplicityWitness,
    layout: &RowLayout<'_>,
    i: usize,
    j: usize,
) -> Result<InconsistencyProof, WitnessError> {
    let a = &w.member_structure;
    let [a1, a2, a3] = w.unrelated;
    let hat_set: PointSet = a.universe().without(a1).without(a2).without(a3);
    // parameters inside E: rows i and j plus hat
    let params: PointSet = w
        .hat
        .iter()
        .chain([w.row_pairs[i].0, w.row_pairs[i].1, w.row_pairs[j].0, w.row_pairs[j].1])
        .collect();
    let (mut base, back) = w.e.induced(params)?;
    let x = base.add_point()?;
    let epos = |p: Point| -> Point { back.iter().position(|&q| q == p).expect("parameter") };

    // required: the p-type towards row i's b₂ and the q-type towards row j's b₃
    let mut required: Vec<(usize, Vec<Point>)> = Vec::new();
    for (t, row) in [(a2, i), (a3, j)] {
        let allowed = hat_set.with(a1).with(t);
        let map = layout.map_into_rows(row, row);
        for (sym, tuple) in a.iter_instances() {
            if tuple.iter().all(|&p| allowed.contains(p)) && tuple.contains(&a1) {
                let mapped: Vec<Point> = tuple
                    .iter()
                    .map(|&p| if p == a1 { x } else { epos(map(p).expect("not a1")) })
                    .collect();
                required.push((sym, mapped));
            }
        }
    }
    // pinned slots: any tuple through x lying inside x + {bᵢ₂} + hat or
    // x + {bⱼ₃} + hat is fixed by the exactness of the types
    let pinned_zone_p: PointSet = PointSet::singleton(x)
        .with(epos(w.row_pairs[i].0))
        .union(w.hat.iter().map(&epos).collect());
    let pinned_zone_q: PointSet = PointSet::singleton(x)
        .with(epos(w.row_pairs[j].1))
        .union(w.hat.iter().map(&epos).collect());

    let slots = crate::enumerate::extension_slots(base.signature(), x);
    let mut free_slots: Vec<(usize, Vec<Point>)> = Vec::new();
    for (sym, tuple) in &slots {
        let mask: PointSet = tuple.iter().copied().collect();
        if mask.is_subset_of(pinned_zone_p) || mask.is_subset_of(pinned_zone_q) {
            continue;
        }
        free_slots.push((*sym, tuple.clone()));
    }
    if free_slots.len() >= 32 {
        return Err(WitnessError::Internal("too many free slots to exhaust"));
    }

    let mut cases = Vec::new();
    for choice in 0u64..(1u64 << free_slots.len()) {
        let mut completion = base.clone();
        for (sym, tuple) in &required {
            completion.add_instance(*sym, tuple)?;
        }
        for (idx, (sym, tuple)) in free_slots.iter().enumerate() {
            if choice & (1 << idx) != 0 {
                completion.add_instance(*sym, tuple)?;
            }
        }
        match is_free(&completion, family)? {
            FreeVerdict::Violation { member, embedding } => {
                cases.push(InconsistencyCase { completion, member, embedding });
            }
            FreeVerdict::Free => {
                return Err(WitnessError::Internal(
                    "a completion realising both types is free: inconsistency fails",
                ));
            }
        }
    }
    Ok(InconsistencyProof { i, j, cases })
}

/// A free cycle witness: the base, and the n copies in cycle order.
#[derive(Clone, Debug)]
pub struct CycleWitness {
    pub structure: RelStructure,
    pub base: PointSet,
    pub copies: Vec<PointSet>,
}

#[derive(Clone, Debug)]
pub enum CycleOutcome {
    Free(CycleWitness),
    Blocked { member: usize, embedding: Embedding },
}

/// Builds the n-cycle of a self-paired pattern: n fresh copies of the tuple
/// with every consecutive pair (and the wrap-around) isomorphic to
/// (left, right) over the base, all non-consecutive pairs free over the
/// base. Always free at n = 4 over a family of 2-irreducible members.
pub fn sop_cycle(
    pattern: &PairPattern,
    family: &ForbiddenFamily,
    n: usize,
) -> Result<CycleOutcome, WitnessError> {
    if n < 3 {
        return Err(WitnessError::CycleTooShort);
    }
    if let FreeVerdict::Violation { member, .. } = is_free(&pattern.carrier, family)? {
        return Err(WitnessError::PatternNotFree { member });
    }
    // self-pairing isomorphism left -> right over the base
    let mut pairing: Option<Vec<(Point, Point)>> = None;
    for_each_iso_over_base(
        &pattern.carrier,
        pattern.left,
        pattern.right,
        pattern.base,
        |iso| {
            pairing = Some(iso.to_vec());
            ControlFlow::Break(())
        },
    );
    let pairing = pairing.ok_or(WitnessError::NotSelfPaired)?;
    let into_left = |q: Point| -> Point {
        pairing.iter().find(|&&(_, y)| y == q).expect("pairing covers right").0
    };

    let base_points: Vec<Point> = pattern.base.iter().collect();
    let left_free: Vec<Point> = pattern.left.minus(pattern.base).iter().collect();
    let b = base_points.len();
    let t = left_free.len();
    let mut cycle =
        RelStructure::empty(pattern.carrier.signature().clone(), b + n * t)?;
    // carrier point -> cycle point for the consecutive pair (copy, copy+1)
    let locate = |copy: usize, p: Point| -> Point {
        if let Some(i) = base_points.iter().position(|&q| q == p) {
            i
        } else if pattern.left.contains(p) {
            let i = left_free.iter().position(|&q| q == p).expect("left point");
            b + (copy % n) * t + i
        } else {
            let pl = into_left(p);
            let i = left_free.iter().position(|&q| q == pl).expect("paired left point");
            b + ((copy + 1) % n) * t + i
        }
    };
    for copy in 0..n {
        for (sym, tuple) in pattern.carrier.iter_instances() {
            let mapped: Vec<Point> = tuple.iter().map(|&p| locate(copy, p)).collect();
            cycle.add_instance(sym, &mapped)?;
        }
    }
    let base: PointSet = (0..b).collect();
    let copies: Vec<PointSet> =
        (0..n).map(|c| (0..t).map(|i| b + c * t + i).collect::<PointSet>().union(base)).collect();
    match is_free(&cycle, family)? {
        FreeVerdict::Free => Ok(CycleOutcome::Free(CycleWitness { structure: cycle, base, copies })),
        FreeVerdict::Violation { member, embedding } => {
            Ok(CycleOutcome::Blocked { member, embedding })
        }
    }
}
