//! Finite relational signatures and structures.
//!
//! A [`Signature`] is a finite list of relation symbols with arities and an
//! optional symmetry flag. A [`RelStructure`] is a finite universe
//! `0..size` together with a set of instances per symbol. Instances are
//! irreflexive (no repeated coordinates) and symmetric symbols store one
//! sorted representative per orbit; membership queries normalise, so any
//! coordinate order can be used when asking or inserting.
//!
//! Subsets of a universe are the bitset type [`PointSet`], which bounds the
//! universe size by [`MAX_POINTS`].

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Index of a point in a structure's universe.
pub type Point = usize;

/// Hard bound on universe sizes, from the 128-bit subset representation.
pub const MAX_POINTS: usize = 128;

/// Errors from building signatures and structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureError {
    /// A signature must contain at least one symbol.
    EmptySignature,
    /// Two symbols share a name.
    DuplicateSymbol(String),
    /// Symbol arity must be at least 1.
    ZeroArity(String),
    /// Universe size exceeds [`MAX_POINTS`].
    TooManyPoints(usize),
    /// Symbol index out of range for the signature.
    NoSuchSymbol(usize),
    /// Tuple length does not match the symbol's arity.
    ArityMismatch { symbol: String, expected: usize, got: usize },
    /// A tuple repeats a coordinate (instances are irreflexive).
    RepeatedCoordinate(Point),
    /// A point is outside the universe.
    PointOutOfRange(Point),
    /// A subset refers to points outside the universe.
    SubsetOutOfRange,
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureError::EmptySignature => write!(f, "signature has no symbols"),
            StructureError::DuplicateSymbol(name) => write!(f, "duplicate symbol `{name}`"),
            StructureError::ZeroArity(name) => write!(f, "symbol `{name}` has arity 0"),
            StructureError::TooManyPoints(n) => {
                write!(f, "universe of size {n} exceeds the {MAX_POINTS}-point limit")
            }
            StructureError::NoSuchSymbol(i) => write!(f, "no symbol with index {i}"),
            StructureError::ArityMismatch { symbol, expected, got } => {
                write!(f, "symbol `{symbol}` has arity {expected}, tuple has length {got}")
            }
            StructureError::RepeatedCoordinate(p) => {
                write!(f, "repeated coordinate {p} violates irreflexivity")
            }
            StructureError::PointOutOfRange(p) => write!(f, "point {p} is outside the universe"),
            StructureError::SubsetOutOfRange => write!(f, "subset contains out-of-range points"),
        }
    }
}

impl core::error::Error for StructureError {}

/// One relation symbol: a name, an arity and whether the interpretation is
/// closed under coordinate permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
    pub symmetric: bool,
}

impl RelSymbol {
    pub fn new(name: impl Into<String>, arity: usize, symmetric: bool) -> Self {
        RelSymbol { name: name.into(), arity, symmetric }
    }
}

/// A finite relational signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<RelSymbol>,
}

impl Signature {
    pub fn new(symbols: Vec<RelSymbol>) -> Result<Self, StructureError> {
        if symbols.is_empty() {
            return Err(StructureError::EmptySignature);
        }
        for (i, sym) in symbols.iter().enumerate() {
            if sym.arity == 0 {
                return Err(StructureError::ZeroArity(sym.name.clone()));
            }
            if symbols[..i].iter().any(|other| other.name == sym.name) {
                return Err(StructureError::DuplicateSymbol(sym.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    /// The signature of graphs: one symmetric binary symbol `E`.
    pub fn graph() -> Arc<Self> {
        Arc::new(Signature::new(alloc::vec![RelSymbol::new("E", 2, true)]).expect("valid"))
    }

    /// The signature of r-uniform hypergraphs: one symmetric r-ary symbol `H`.
    pub fn hypergraph(r: usize) -> Arc<Self> {
        Arc::new(Signature::new(alloc::vec![RelSymbol::new("H", r, true)]).expect("valid"))
    }

    pub fn symbols(&self) -> &[RelSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn arity(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    pub fn is_symmetric(&self, sym: usize) -> bool {
        self.symbols[sym].symmetric
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

/// A subset of a universe, as a 128-bit set.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PointSet(u128);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn singleton(p: Point) -> Self {
        debug_assert!(p < MAX_POINTS);
        PointSet(1u128 << p)
    }

    /// The full universe `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_POINTS);
        if n == MAX_POINTS {
            PointSet(u128::MAX)
        } else {
            PointSet((1u128 << n) - 1)
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(points: I) -> Self {
        let mut s = PointSet::EMPTY;
        for p in points {
            s = s.with(p);
        }
        s
    }

    pub fn from_bits(bits: u128) -> Self {
        PointSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, p: Point) -> bool {
        p < MAX_POINTS && self.0 & (1u128 << p) != 0
    }

    #[must_use]
    pub fn with(self, p: Point) -> Self {
        debug_assert!(p < MAX_POINTS);
        PointSet(self.0 | (1u128 << p))
    }

    #[must_use]
    pub fn without(self, p: Point) -> Self {
        PointSet(self.0 & !(1u128 << p))
    }

    #[must_use]
    pub fn union(self, other: Self) -> Self {
        PointSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersect(self, other: Self) -> Self {
        PointSet(self.0 & other.0)
    }

    #[must_use]
    pub fn minus(self, other: Self) -> Self {
        PointSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> PointSetIter {
        PointSetIter(self.0)
    }

    pub fn to_vec(self) -> Vec<Point> {
        self.iter().collect()
    }

    /// All subsets of this set, in increasing bit order (the empty set first,
    /// the set itself last).
    pub fn subsets(self) -> SubsetIter {
        SubsetIter { mask: self.0, next: Some(0) }
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PointSet::from_points(iter)
    }
}

pub struct PointSetIter(u128);

impl Iterator for PointSetIter {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        if self.0 == 0 {
            None
        } else {
            let p = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(p)
        }
    }
}

/// Iterates every submask of a fixed mask in increasing numeric order.
pub struct SubsetIter {
    mask: u128,
    next: Option<u128>,
}

impl Iterator for SubsetIter {
    type Item = PointSet;

    fn next(&mut self) -> Option<PointSet> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            // Standard submask step: skip straight to the next subset.
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(PointSet(cur))
    }
}

/// A finite structure: a universe `0..size` plus instance sets per symbol.
///
/// Instances are stored as sorted, deduplicated tuple lists; symmetric
/// symbols keep the sorted representative of each orbit. Structures are
/// plain values: build one, then share it freely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelStructure {
    sig: Arc<Signature>,
    size: usize,
    instances: Vec<Vec<Vec<Point>>>,
}

impl RelStructure {
    pub fn empty(sig: Arc<Signature>, size: usize) -> Result<Self, StructureError> {
        if size > MAX_POINTS {
            return Err(StructureError::TooManyPoints(size));
        }
        let instances = alloc::vec![Vec::new(); sig.len()];
        Ok(RelStructure { sig, size, instances })
    }

    /// Builds a structure from `(symbol, tuple)` pairs.
    pub fn from_instances(
        sig: Arc<Signature>,
        size: usize,
        instances: &[(usize, &[Point])],
    ) -> Result<Self, StructureError> {
        let mut s = RelStructure::empty(sig, size)?;
        for (sym, tuple) in instances {
            s.add_instance(*sym, tuple)?;
        }
        Ok(s)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> PointSet {
        PointSet::full(self.size)
    }

    fn normalize(&self, sym: usize, tuple: &[Point]) -> Result<Vec<Point>, StructureError> {
        let decl = self
            .sig
            .symbols()
            .get(sym)
            .ok_or(StructureError::NoSuchSymbol(sym))?;
        if tuple.len() != decl.arity {
            return Err(StructureError::ArityMismatch {
                symbol: decl.name.clone(),
                expected: decl.arity,
                got: tuple.len(),
            });
        }
        let mut out = Vec::with_capacity(tuple.len());
        for &p in tuple {
            if p >= self.size {
                return Err(StructureError::PointOutOfRange(p));
            }
            if out.contains(&p) {
                return Err(StructureError::RepeatedCoordinate(p));
            }
            out.push(p);
        }
        if decl.symmetric {
            out.sort_unstable();
        }
        Ok(out)
    }

    /// Inserts an instance; returns `false` if it was already present.
    pub fn add_instance(&mut self, sym: usize, tuple: &[Point]) -> Result<bool, StructureError> {
        let tuple = self.normalize(sym, tuple)?;
        let list = &mut self.instances[sym];
        match list.binary_search(&tuple) {
            Ok(_) => Ok(false),
            Err(pos) => {
                list.insert(pos, tuple);
                Ok(true)
            }
        }
    }

    pub fn has_instance(&self, sym: usize, tuple: &[Point]) -> bool {
        match self.normalize(sym, tuple) {
            Ok(tuple) => self.instances[sym].binary_search(&tuple).is_ok(),
            Err(_) => false,
        }
    }

    /// The stored (normalised) instances of one symbol, in sorted order.
    pub fn instances(&self, sym: usize) -> &[Vec<Point>] {
        &self.instances[sym]
    }

    pub fn iter_instances(&self) -> impl Iterator<Item = (usize, &[Point])> {
        self.instances
            .iter()
            .enumerate()
            .flat_map(|(sym, list)| list.iter().map(move |t| (sym, t.as_slice())))
    }

    pub fn instance_count(&self) -> usize {
        self.instances.iter().map(Vec::len).sum()
    }

    /// Coordinate masks of all instances, in iteration order.
    pub fn instance_masks(&self) -> Vec<u128> {
        self.iter_instances()
            .map(|(_, t)| t.iter().fold(0u128, |m, &p| m | (1u128 << p)))
            .collect()
    }

    /// Number of instances of `sym` containing point `p`.
    pub fn incidence(&self, sym: usize, p: Point) -> usize {
        self.instances[sym].iter().filter(|t| t.contains(&p)).count()
    }

    /// Adds a fresh point with no instances and returns its index.
    pub fn add_point(&mut self) -> Result<Point, StructureError> {
        if self.size >= MAX_POINTS {
            return Err(StructureError::TooManyPoints(self.size + 1));
        }
        self.size += 1;
        Ok(self.size - 1)
    }

    /// The induced substructure on `subset`, re-indexed order-preservingly to
    /// `0..subset.len()`, together with the map from new indices back to
    /// parent points.
    pub fn induced(&self, subset: PointSet) -> Result<(RelStructure, Vec<Point>), StructureError> {
        if !subset.is_subset_of(self.universe()) {
            return Err(StructureError::SubsetOutOfRange);
        }
        let back: Vec<Point> = subset.to_vec();
        let mut fwd = alloc::vec![usize::MAX; self.size];
        for (new, &old) in back.iter().enumerate() {
            fwd[old] = new;
        }
        let mut out = RelStructure::empty(self.sig.clone(), back.len())?;
        for (sym, tuple) in self.iter_instances() {
            if tuple.iter().all(|&p| subset.contains(p)) {
                let mapped: Vec<Point> = tuple.iter().map(|&p| fwd[p]).collect();
                out.add_instance(sym, &mapped)?;
            }
        }
        Ok((out, back))
    }

    /// The structure obtained by renaming point `p` to `perm[p]`.
    /// `perm` must be a permutation of the universe.
    pub fn relabel(&self, perm: &[Point]) -> RelStructure {
        debug_assert_eq!(perm.len(), self.size);
        let mut out = RelStructure::empty(self.sig.clone(), self.size).expect("same size");
        for (sym, tuple) in self.iter_instances() {
            let mapped: Vec<Point> = tuple.iter().map(|&p| perm[p]).collect();
            out.add_instance(sym, &mapped).expect("permutation preserves validity");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_on(n: usize, edges: &[(usize, usize)]) -> RelStructure {
        let mut s = RelStructure::empty(Signature::graph(), n).unwrap();
        for &(a, b) in edges {
            s.add_instance(0, &[a, b]).unwrap();
        }
        s
    }

    #[test]
    fn signature_validation() {
        assert_eq!(Signature::new(Vec::new()), Err(StructureError::EmptySignature));
        let dup = Signature::new(alloc::vec![
            RelSymbol::new("E", 2, true),
            RelSymbol::new("E", 3, false),
        ]);
        assert!(matches!(dup, Err(StructureError::DuplicateSymbol(_))));
        let zero = Signature::new(alloc::vec![RelSymbol::new("P", 0, false)]);
        assert!(matches!(zero, Err(StructureError::ZeroArity(_))));
    }

    #[test]
    fn symmetric_normalisation() {
        let mut s = RelStructure::empty(Signature::graph(), 3).unwrap();
        assert!(s.add_instance(0, &[2, 0]).unwrap());
        assert!(!s.add_instance(0, &[0, 2]).unwrap());
        assert!(s.has_instance(0, &[2, 0]));
        assert!(s.has_instance(0, &[0, 2]));
        assert_eq!(s.instances(0), &[alloc::vec![0, 2]]);
    }

    #[test]
    fn irreflexivity_rejected() {
        let mut s = RelStructure::empty(Signature::graph(), 3).unwrap();
        assert_eq!(s.add_instance(0, &[1, 1]), Err(StructureError::RepeatedCoordinate(1)));
    }

    #[test]
    fn arity_and_range_checked() {
        let mut s = RelStructure::empty(Signature::hypergraph(3), 3).unwrap();
        assert!(matches!(
            s.add_instance(0, &[0, 1]),
            Err(StructureError::ArityMismatch { .. })
        ));
        assert_eq!(s.add_instance(0, &[0, 1, 5]), Err(StructureError::PointOutOfRange(5)));
    }

    #[test]
    fn induced_triangle_edge() {
        // Triangle restricted to two points is a single edge.
        let k3 = graph_on(3, &[(0, 1), (0, 2), (1, 2)]);
        let (sub, back) = k3.induced(PointSet::from_points([0, 1])).unwrap();
        assert_eq!(sub.size(), 2);
        assert_eq!(sub.instance_count(), 1);
        assert!(sub.has_instance(0, &[0, 1]));
        assert_eq!(back, alloc::vec![0, 1]);
    }

    #[test]
    fn induced_full_universe_is_identity() {
        let p = graph_on(3, &[(0, 1), (1, 2)]);
        let (sub, back) = p.induced(p.universe()).unwrap();
        assert_eq!(sub, p);
        assert_eq!(back, alloc::vec![0, 1, 2]);
    }

    #[test]
    fn induced_nonadjacent_pair_is_edgeless() {
        let p = graph_on(3, &[(0, 1), (1, 2)]);
        let (sub, _) = p.induced(PointSet::from_points([0, 2])).unwrap();
        assert_eq!(sub.instance_count(), 0);
    }

    #[test]
    fn induced_is_idempotent() {
        let s = graph_on(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        for subset in s.universe().subsets() {
            let (once, _) = s.induced(subset).unwrap();
            let (twice, _) = once.induced(once.universe()).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn induced_rejects_out_of_range() {
        let s = graph_on(2, &[(0, 1)]);
        assert_eq!(s.induced(PointSet::singleton(7)), Err(StructureError::SubsetOutOfRange));
    }

    #[test]
    fn subset_iteration() {
        let s = PointSet::from_points([1, 3]);
        let subs: Vec<PointSet> = s.subsets().collect();
        assert_eq!(subs.len(), 4);
        assert_eq!(subs[0], PointSet::EMPTY);
        assert_eq!(subs[3], s);
    }

    #[test]
    fn size_cap_enforced() {
        assert!(RelStructure::empty(Signature::graph(), MAX_POINTS).is_ok());
        assert!(matches!(
            RelStructure::empty(Signature::graph(), MAX_POINTS + 1),
            Err(StructureError::TooManyPoints(_))
        ));
    }
}
