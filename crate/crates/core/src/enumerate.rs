//! Bounded enumeration of structures up to isomorphism.
//!
//! Structures are grown point by point: each isomorphism class of size k is
//! extended by one fresh point in every possible way, and the results are
//! deduplicated level by level through canonical forms. The count of classes
//! is doubly exponential in general, so requests above a caller-supplied cap
//! are refused outright.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::canon::{canonical_form, CanonicalCode};
use crate::structure::{Point, RelStructure, Signature};

/// Default bound on enumeration size.
pub const DEFAULT_ENUMERATION_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnumError {
    /// The requested size exceeds the cap.
    CapExceeded { requested: usize, cap: usize },
}

impl fmt::Display for EnumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumError::CapExceeded { requested, cap } => write!(
                f,
                "refusing to enumerate structures of size {requested}: cap is {cap} \
                 (the class count grows doubly exponentially)"
            ),
        }
    }
}

impl core::error::Error for EnumError {}

/// One representative per isomorphism class of size-`n` structures over
/// `sig`, in canonical-code order.
pub fn enumerate_structures(
    sig: &Arc<Signature>,
    n: usize,
    cap: usize,
) -> Result<Vec<RelStructure>, EnumError> {
    enumerate_structures_filtered(sig, n, cap, |_| true)
}

/// As [`enumerate_structures`], keeping only structures passing the filter.
/// The filter is applied at the final size only, so it need not be
/// hereditary.
pub fn enumerate_structures_filtered(
    sig: &Arc<Signature>,
    n: usize,
    cap: usize,
    mut filter: impl FnMut(&RelStructure) -> bool,
) -> Result<Vec<RelStructure>, EnumError> {
    if n > cap {
        return Err(EnumError::CapExceeded { requested: n, cap });
    }
    let mut level = alloc::vec![RelStructure::empty(sig.clone(), 0).expect("size 0")];
    for k in 0..n {
        let mut next: alloc::collections::BTreeMap<CanonicalCode, RelStructure> =
            alloc::collections::BTreeMap::new();
        let slots = extension_slots(sig, k);
        for parent in &level {
            let mut base = parent.clone();
            base.add_point().expect("within cap");
            for choice in 0u64..(1u64 << slots.len()) {
                let mut s = base.clone();
                for (i, (sym, tuple)) in slots.iter().enumerate() {
                    if choice & (1 << i) != 0 {
                        s.add_instance(*sym, tuple).expect("slot tuples are valid");
                    }
                }
                let code = canonical_form(&s);
                next.entry(code).or_insert(s);
            }
        }
        level = next.into_values().collect();
    }
    Ok(level.into_iter().filter(|s| filter(s)).collect())
}

/// One representative per isomorphism class for every size `0..=n`.
pub fn enumerate_up_to(
    sig: &Arc<Signature>,
    n: usize,
    cap: usize,
) -> Result<Vec<RelStructure>, EnumError> {
    let mut out = Vec::new();
    for k in 0..=n {
        out.extend(enumerate_structures(sig, k, cap)?);
    }
    Ok(out)
}

/// All normalised tuples over `0..=k` that contain the fresh point `k`:
/// the instance slots available when extending a size-`k` structure.
pub(crate) fn extension_slots(sig: &Arc<Signature>, k: usize) -> Vec<(usize, Vec<Point>)> {
    let mut out = Vec::new();
    for (sym, decl) in sig.symbols().iter().enumerate() {
        if decl.arity > k + 1 {
            continue;
        }
        if decl.symmetric {
            // choose arity-1 old points; the sorted representative ends in k
            for combo in combinations(k, decl.arity - 1) {
                let mut t = combo;
                t.push(k);
                out.push((sym, t));
            }
        } else {
            // the fresh point can sit at any position, the rest is an
            // arrangement of old points
            for pos in 0..decl.arity {
                for arr in arrangements(k, decl.arity - 1) {
                    let mut t = Vec::with_capacity(decl.arity);
                    t.extend_from_slice(&arr[..pos]);
                    t.push(k);
                    t.extend_from_slice(&arr[pos..]);
                    out.push((sym, t));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn combinations(n: usize, r: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for p in start..n {
            cur.push(p);
            go(p + 1, n, r, cur, out);
            cur.pop();
        }
    }
    go(0, n, r, &mut cur, &mut out);
    out
}

fn arrangements(n: usize, r: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn go(n: usize, r: usize, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                go(n, r, cur, out);
                cur.pop();
            }
        }
    }
    go(n, r, &mut cur, &mut out);
    out
}
