//! Class-level verdicts for forbidden-family classes.
//!
//! The free class of a minimal family is closed under free amalgamation
//! exactly when every member is 2-irreducible. On top of that sits the
//! simplicity decision: if every member is 3-irreducible the generic theory
//! is simple (no closure hypothesis needed); under closure, simplicity holds
//! if and only if every member is 3-irreducible. When neither direction
//! applies the verdict is `Undetermined` — the hypothesis is checked, never
//! assumed, so classes like the bowtie-free graphs cannot receive a wrong
//! answer from a theorem that does not cover them.

use alloc::string::String;
use alloc::vec::Vec;

use crate::amalgam::{free_amalgam, AmalgamProblem};
use crate::embed::{for_each_embedding, Embedding, EmbeddingMode};
use crate::enumerate::{enumerate_up_to, EnumError};
use crate::forbidden::{is_free, is_k_irreducible, FamilyError, ForbiddenFamily, FreeVerdict, Irreducibility};
use crate::structure::{Point, RelStructure};
use core::fmt;
use core::ops::ControlFlow;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassifyError {
    Family(FamilyError),
    Enumeration(EnumError),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::Family(e) => write!(f, "{e}"),
            ClassifyError::Enumeration(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ClassifyError {}

impl From<FamilyError> for ClassifyError {
    fn from(e: FamilyError) -> Self {
        ClassifyError::Family(e)
    }
}

impl From<EnumError> for ClassifyError {
    fn from(e: EnumError) -> Self {
        ClassifyError::Enumeration(e)
    }
}

/// Per-member irreducibility result at a fixed k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrreducibilityCertificate {
    pub member: usize,
    pub verdict: Irreducibility,
}

/// Whether the free class is closed under free amalgamation, decided by
/// 2-irreducibility of every member.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub closed: bool,
    pub certificates: Vec<IrreducibilityCertificate>,
    /// A member that is not 2-irreducible, with its unrelated pair.
    pub failing: Option<(usize, Vec<Point>)>,
}

/// Closure under free amalgamation holds iff every member is 2-irreducible.
/// Requires a minimalised family.
pub fn closure_under_free_amalgam(f: &ForbiddenFamily) -> Result<ClosureReport, ClassifyError> {
    require_minimal(f)?;
    let certificates: Vec<IrreducibilityCertificate> = f
        .members()
        .iter()
        .enumerate()
        .map(|(i, m)| IrreducibilityCertificate { member: i, verdict: is_k_irreducible(m, 2) })
        .collect();
    let failing = certificates.iter().find_map(|c| match &c.verdict {
        Irreducibility::Irreducible => None,
        Irreducibility::UnrelatedTuple(w) => Some((c.member, w.clone())),
    });
    Ok(ClosureReport { closed: failing.is_none(), certificates, failing })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplicityOutcome {
    Simple,
    NotSimple,
    Undetermined,
}

impl fmt::Display for SimplicityOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplicityOutcome::Simple => write!(f, "Simple"),
            SimplicityOutcome::NotSimple => write!(f, "NotSimple"),
            SimplicityOutcome::Undetermined => write!(f, "Undetermined"),
        }
    }
}

/// The simplicity verdict with its justifying certificates.
#[derive(Clone, Debug)]
pub struct SimplicityVerdict {
    pub outcome: SimplicityOutcome,
    /// 3-irreducibility of every member; a `Simple` verdict rests on these
    /// alone and needs no closure hypothesis.
    pub three_irreducibility: Vec<IrreducibilityCertificate>,
    /// 2-irreducibility of every member; a `NotSimple` verdict needs all of
    /// them irreducible (class closure) plus one member failing at 3.
    pub two_irreducibility: Vec<IrreducibilityCertificate>,
    /// For `NotSimple`: a member with its unrelated triple.
    pub nonsimple_witness: Option<(usize, Vec<Point>)>,
    /// For `Undetermined`: the member blocking the closure hypothesis.
    pub blocking_member: Option<(usize, Vec<Point>)>,
}

/// Decides simplicity of the generic theory of the free class.
/// Requires a minimalised family.
pub fn simplicity_verdict(f: &ForbiddenFamily) -> Result<SimplicityVerdict, ClassifyError> {
    require_minimal(f)?;
    let cert = |k: usize| -> Vec<IrreducibilityCertificate> {
        f.members()
            .iter()
            .enumerate()
            .map(|(i, m)| IrreducibilityCertificate { member: i, verdict: is_k_irreducible(m, k) })
            .collect()
    };
    let three = cert(3);
    let two = cert(2);
    let first_failure = |certs: &[IrreducibilityCertificate]| -> Option<(usize, Vec<Point>)> {
        certs.iter().find_map(|c| match &c.verdict {
            Irreducibility::Irreducible => None,
            Irreducibility::UnrelatedTuple(w) => Some((c.member, w.clone())),
        })
    };
    let three_failure = first_failure(&three);
    let two_failure = first_failure(&two);
    let (outcome, nonsimple_witness, blocking_member) = match (three_failure, two_failure) {
        (None, _) => (SimplicityOutcome::Simple, None, None),
        (Some(w), None) => (SimplicityOutcome::NotSimple, Some(w), None),
        (Some(_), Some(b)) => (SimplicityOutcome::Undetermined, None, Some(b)),
    };
    Ok(SimplicityVerdict {
        outcome,
        three_irreducibility: three,
        two_irreducibility: two,
        nonsimple_witness,
        blocking_member,
    })
}

/// Everything the classifier knows about a family.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub family: ForbiddenFamily,
    pub closure: ClosureReport,
    pub simplicity: SimplicityVerdict,
    pub notes: Vec<String>,
}

/// Minimalises nothing: the caller passes a minimalised family and gets the
/// closure report, the simplicity verdict, and diagnostic notes.
pub fn class_report(f: &ForbiddenFamily) -> Result<ClassReport, ClassifyError> {
    let closure = closure_under_free_amalgam(f)?;
    let simplicity = simplicity_verdict(f)?;
    let mut notes = Vec::new();
    notes.push(String::from(
        "hereditariness holds for every forbidden-family class; joint embedding \
         and amalgamation follow from free amalgamation when the class is closed",
    ));
    match simplicity.outcome {
        SimplicityOutcome::Simple => notes.push(String::from(
            "verdict rests on 3-irreducibility alone and does not use the closure flag",
        )),
        SimplicityOutcome::NotSimple => notes.push(String::from(
            "verdict uses closure (all members 2-irreducible) plus a non-3-irreducible member",
        )),
        SimplicityOutcome::Undetermined => notes.push(String::from(
            "closure hypothesis fails and some member is not 3-irreducible: \
             neither direction of the characterisation applies",
        )),
    }
    Ok(ClassReport { family: f.clone(), closure, simplicity, notes })
}

/// One failed amalgamation problem: the pieces, the glue, the amalgam, and
/// the violated member with a re-verifiable embedding.
#[derive(Clone, Debug)]
pub struct AuditViolation {
    pub left: RelStructure,
    pub right: RelStructure,
    pub glue: Vec<(Point, Point)>,
    pub amalgam: RelStructure,
    pub member: usize,
    pub embedding: Embedding,
}

/// Outcome of the bounded closure audit.
#[derive(Clone, Debug)]
pub struct AmalgamationAudit {
    pub problems_checked: u64,
    pub violations: u64,
    /// Up to ten concrete violations.
    pub examples: Vec<AuditViolation>,
}

/// Direct bounded verification of closure: every amalgamation problem with
/// free sides of size at most `max_size` is glued and the result checked for
/// freeness. Complements the irreducibility criterion with brute force.
pub fn bounded_amalgamation_audit(
    f: &ForbiddenFamily,
    max_size: usize,
    cap: usize,
) -> Result<AmalgamationAudit, ClassifyError> {
    let free_structures: Vec<RelStructure> = enumerate_up_to(f.signature(), max_size, cap)?
        .into_iter()
        .filter(|s| matches!(is_free(s, f), Ok(FreeVerdict::Free)))
        .collect();
    let mut audit = AmalgamationAudit { problems_checked: 0, violations: 0, examples: Vec::new() };
    for left in &free_structures {
        for right in &free_structures {
            for_each_glue(left, right, |glue| {
                let problem = AmalgamProblem::new(left.clone(), right.clone(), glue.to_vec())
                    .expect("enumerated glue is a valid identification");
                let am = free_amalgam(&problem);
                audit.problems_checked += 1;
                if let Ok(FreeVerdict::Violation { member, embedding }) = is_free(&am.structure, f)
                {
                    audit.violations += 1;
                    if audit.examples.len() < 10 {
                        audit.examples.push(AuditViolation {
                            left: left.clone(),
                            right: right.clone(),
                            glue: glue.to_vec(),
                            amalgam: am.structure.clone(),
                            member,
                            embedding,
                        });
                    }
                }
            });
        }
    }
    Ok(audit)
}

/// Enumerates every identification of an induced substructure of `left` with
/// one of `right`: subset pairs of equal size plus an isomorphism between
/// the induced structures.
fn for_each_glue(left: &RelStructure, right: &RelStructure, mut visit: impl FnMut(&[(Point, Point)])) {
    for sa in left.universe().subsets() {
        for sb in right.universe().subsets() {
            if sa.len() != sb.len() {
                continue;
            }
            let (ind_a, back_a) = left.induced(sa).expect("subset of universe");
            let (ind_b, back_b) = right.induced(sb).expect("subset of universe");
            let _ = for_each_embedding(&ind_a, &ind_b, EmbeddingMode::Induced, None, |map| {
                let glue: Vec<(Point, Point)> =
                    map.iter().enumerate().map(|(i, &j)| (back_a[i], back_b[j])).collect();
                visit(&glue);
                ControlFlow::Continue(())
            });
        }
    }
}

fn require_minimal(f: &ForbiddenFamily) -> Result<(), ClassifyError> {
    if f.is_minimal() {
        Ok(())
    } else {
        Err(ClassifyError::Family(FamilyError::NotMinimal))
    }
}
