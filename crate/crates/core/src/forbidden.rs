//! Forbidden families: freeness, minimalisation, and k-irreducibility.
//!
//! A structure is free over a family when no member weakly embeds into it.
//! The minimal forbidden class keeps only those members into which no member
//! embeds properly; it defines the same free class and is the canonical
//! presentation. k-irreducibility — every k distinct elements sharing a
//! single relation instance — is the combinatorial pivot for everything in
//! [`crate::classify`].

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::canon::canonical_form;
use crate::embed::{find_embedding, EmbedError, Embedding, EmbeddingMode};
use crate::structure::{Point, RelStructure, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyError {
    /// A member is not over the family's signature.
    SignatureMismatch,
    /// Members must have at least one point.
    EmptyMember,
    /// The operation requires a minimalised family.
    NotMinimal,
    Embed(EmbedError),
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::SignatureMismatch => {
                write!(f, "structure and family have different signatures")
            }
            FamilyError::EmptyMember => write!(f, "forbidden members must be nonempty"),
            FamilyError::NotMinimal => {
                write!(f, "operation requires a minimalised family (apply minimalize first)")
            }
            FamilyError::Embed(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FamilyError {}

impl From<EmbedError> for FamilyError {
    fn from(e: EmbedError) -> Self {
        FamilyError::Embed(e)
    }
}

/// A finite set of forbidden structures over one signature, deduplicated by
/// canonical form. The `minimal` flag records whether [`minimalize`] has run.
#[derive(Clone, Debug)]
pub struct ForbiddenFamily {
    sig: Arc<Signature>,
    members: Vec<RelStructure>,
    minimal: bool,
}

impl ForbiddenFamily {
    pub fn new(sig: Arc<Signature>, members: Vec<RelStructure>) -> Result<Self, FamilyError> {
        let mut seen = Vec::new();
        let mut kept = Vec::new();
        for m in members {
            if m.signature() != &sig {
                return Err(FamilyError::SignatureMismatch);
            }
            if m.size() == 0 {
                return Err(FamilyError::EmptyMember);
            }
            let code = canonical_form(&m);
            if !seen.contains(&code) {
                seen.push(code);
                kept.push(m);
            }
        }
        // the empty family is vacuously minimal
        let minimal = kept.is_empty();
        Ok(ForbiddenFamily { sig, members: kept, minimal })
    }

    /// The empty (unconstrained) family.
    pub fn unconstrained(sig: Arc<Signature>) -> Self {
        ForbiddenFamily { sig, members: Vec::new(), minimal: true }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn members(&self) -> &[RelStructure] {
        &self.members
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_member_size(&self) -> usize {
        self.members.iter().map(RelStructure::size).max().unwrap_or(0)
    }
}

/// Verdict of a freeness check: either free or a concrete violation.
#[derive(Clone, Debug)]
pub enum FreeVerdict {
    Free,
    Violation { member: usize, embedding: Embedding },
}

impl FreeVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, FreeVerdict::Free)
    }
}

/// Is `s` free over `f`? Returns the first violating member with a concrete,
/// re-verifiable weak embedding otherwise.
pub fn is_free(s: &RelStructure, f: &ForbiddenFamily) -> Result<FreeVerdict, FamilyError> {
    if s.signature() != f.signature() {
        return Err(FamilyError::SignatureMismatch);
    }
    for (i, member) in f.members.iter().enumerate() {
        if let Some(embedding) = find_embedding(member, s, EmbeddingMode::Weak, None)? {
            return Ok(FreeVerdict::Violation { member: i, embedding });
        }
    }
    Ok(FreeVerdict::Free)
}

/// Convenience: freeness as a plain boolean.
pub fn is_free_bool(s: &RelStructure, f: &ForbiddenFamily) -> Result<bool, FamilyError> {
    Ok(is_free(s, f)?.is_free())
}

/// Computes the minimal forbidden class: keeps exactly the members admitting
/// no proper weak embedding from any member of the input (proper: not
/// surjective on points, or surjective with strictly fewer instances).
/// The result defines the same free class as the input.
pub fn minimalize(f: &ForbiddenFamily) -> ForbiddenFamily {
    let mut kept: Vec<RelStructure> = Vec::new();
    'candidates: for a in &f.members {
        for b in &f.members {
            let proper = b.size() < a.size()
                || (b.size() == a.size() && b.instance_count() < a.instance_count());
            if !proper {
                continue;
            }
            if find_embedding(b, a, EmbeddingMode::Weak, None)
                .expect("family members share a signature")
                .is_some()
            {
                continue 'candidates;
            }
        }
        kept.push(a.clone());
    }
    kept.sort_by_key(|s| (s.size(), s.instance_count(), canonical_form(s)));
    ForbiddenFamily { sig: f.sig.clone(), members: kept, minimal: true }
}

/// Verdict of a k-irreducibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    /// k distinct elements no single instance covers.
    UnrelatedTuple(Vec<Point>),
}

impl Irreducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Irreducible)
    }
}

/// Are any `k` distinct elements of `a` related in `a` (coordinates of one
/// instance)? Structures with fewer than `k` points are vacuously
/// irreducible. Requires `k >= 2`.
pub fn is_k_irreducible(a: &RelStructure, k: usize) -> Irreducibility {
    assert!(k >= 2, "irreducibility is defined for k >= 2");
    if a.size() < k {
        return Irreducibility::Irreducible;
    }
    let masks = a.instance_masks();
    let mut combo: Vec<Point> = (0..k).collect();
    loop {
        let mask = combo.iter().fold(0u128, |m, &p| m | (1u128 << p));
        if !masks.iter().any(|&im| mask & !im == 0) {
            return Irreducibility::UnrelatedTuple(combo);
        }
        if !next_combination(&mut combo, a.size()) {
            return Irreducibility::Irreducible;
        }
    }
}

/// Advances to the next lexicographic k-combination of `0..n`;
/// false when the last one was reached.
fn next_combination(combo: &mut [Point], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] != i + n - k {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::PointSet;

    fn graph_on(n: usize, edges: &[(usize, usize)]) -> RelStructure {
        let mut s = RelStructure::empty(Signature::graph(), n).unwrap();
        for &(a, b) in edges {
            s.add_instance(0, &[a, b]).unwrap();
        }
        s
    }

    fn k(n: usize) -> RelStructure {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        graph_on(n, &edges)
    }

    fn c5() -> RelStructure {
        graph_on(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    }

    fn bowtie() -> RelStructure {
        graph_on(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
    }

    fn family(members: Vec<RelStructure>) -> ForbiddenFamily {
        ForbiddenFamily::new(Signature::graph(), members).unwrap()
    }

    #[test]
    fn c5_is_triangle_free() {
        let f = family(alloc::vec![k(3)]);
        assert!(is_free(&c5(), &f).unwrap().is_free());
    }

    #[test]
    fn k4_contains_triangle() {
        let f = family(alloc::vec![k(3)]);
        match is_free(&k(4), &f).unwrap() {
            FreeVerdict::Violation { member, embedding } => {
                assert_eq!(member, 0);
                assert!(embedding.verify(&k(3), &k(4)));
            }
            FreeVerdict::Free => panic!("K4 contains K3"),
        }
    }

    #[test]
    fn bowtie_violates_bowtie_family() {
        let f = family(alloc::vec![bowtie()]);
        assert!(!is_free(&bowtie(), &f).unwrap().is_free());
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let f = ForbiddenFamily::new(
            Signature::hypergraph(3),
            alloc::vec![{
                let mut s = RelStructure::empty(Signature::hypergraph(3), 3).unwrap();
                s.add_instance(0, &[0, 1, 2]).unwrap();
                s
            }],
        )
        .unwrap();
        assert_eq!(is_free(&k(3), &f).unwrap_err(), FamilyError::SignatureMismatch);
    }

    #[test]
    fn minimalize_drops_k5_keeps_k4() {
        let f = family(alloc::vec![k(4), k(5)]);
        let min = minimalize(&f);
        assert_eq!(min.len(), 1);
        assert_eq!(min.members()[0].size(), 4);
        assert!(min.is_minimal());
    }

    #[test]
    fn minimalize_keeps_already_minimal() {
        let f = family(alloc::vec![k(3)]);
        assert_eq!(minimalize(&f).len(), 1);
    }

    #[test]
    fn minimalize_keeps_incomparable_members() {
        // brute-force both directions: neither K3 nor C5 embeds in the other
        assert!(find_embedding(&k(3), &c5(), EmbeddingMode::Weak, None).unwrap().is_none());
        assert!(find_embedding(&c5(), &k(3), EmbeddingMode::Weak, None).unwrap().is_none());
        let f = family(alloc::vec![k(3), c5()]);
        assert_eq!(minimalize(&f).len(), 2);
    }

    #[test]
    fn minimalize_handles_reducts() {
        // the edge embeds properly into the path (fewer points) and into the
        // two-point double... the path with an extra isolated instance level:
        // same universe, fewer instances is proper too
        let edge = graph_on(2, &[(0, 1)]);
        let two_edges = graph_on(3, &[(0, 1), (1, 2)]);
        let f = family(alloc::vec![edge, two_edges]);
        let min = minimalize(&f);
        assert_eq!(min.len(), 1);
        assert_eq!(min.members()[0].size(), 2);
    }

    #[test]
    fn empty_family_is_minimal_and_everything_is_free() {
        let f = ForbiddenFamily::unconstrained(Signature::graph());
        assert!(f.is_minimal());
        assert!(is_free(&k(5), &f).unwrap().is_free());
        assert_eq!(minimalize(&f).len(), 0);
    }

    #[test]
    fn dedupe_by_isomorphism() {
        let relabeled = k(3).relabel(&[2, 0, 1]);
        let f = family(alloc::vec![k(3), relabeled]);
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn k3_is_2_irreducible_not_3() {
        assert_eq!(is_k_irreducible(&k(3), 2), Irreducibility::Irreducible);
        // binary instances cannot contain 3 distinct coordinates
        match is_k_irreducible(&k(3), 3) {
            Irreducibility::UnrelatedTuple(w) => assert_eq!(w.len(), 3),
            Irreducibility::Irreducible => panic!("graphs are never 3-irreducible at size >= 3"),
        }
    }

    #[test]
    fn complete_hypergraph_is_3_irreducible() {
        let sig = Signature::hypergraph(3);
        let mut s = RelStructure::empty(sig, 4).unwrap();
        for a in 0..4 {
            for b in (a + 1)..4 {
                for c in (b + 1)..4 {
                    s.add_instance(0, &[a, b, c]).unwrap();
                }
            }
        }
        assert_eq!(is_k_irreducible(&s, 2), Irreducibility::Irreducible);
        assert_eq!(is_k_irreducible(&s, 3), Irreducibility::Irreducible);
    }

    #[test]
    fn small_structures_are_vacuously_irreducible() {
        assert_eq!(is_k_irreducible(&graph_on(2, &[]), 3), Irreducibility::Irreducible);
    }

    #[test]
    fn bowtie_unrelated_pair() {
        match is_k_irreducible(&bowtie(), 2) {
            Irreducibility::UnrelatedTuple(w) => {
                let mask: PointSet = w.iter().copied().collect();
                // the two outer vertices of different triangles
                assert!(!bowtie()
                    .instance_masks()
                    .iter()
                    .any(|&im| mask.bits() & !im == 0));
            }
            Irreducibility::Irreducible => panic!("bowtie is not 2-irreducible"),
        }
    }
}
