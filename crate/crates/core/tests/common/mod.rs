//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use std::sync::Arc;

use fraisse_core::embed::EmbeddingMode;
use fraisse_core::forbidden::{minimalize, ForbiddenFamily};
use fraisse_core::structure::{Point, RelStructure, RelSymbol, Signature};

pub fn graph_on(n: usize, edges: &[(usize, usize)]) -> RelStructure {
    let mut s = RelStructure::empty(Signature::graph(), n).unwrap();
    for &(a, b) in edges {
        s.add_instance(0, &[a, b]).unwrap();
    }
    s
}

pub fn complete_graph(n: usize) -> RelStructure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    graph_on(n, &edges)
}

pub fn cycle_graph(n: usize) -> RelStructure {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph_on(n, &edges)
}

/// Two triangles sharing one vertex.
pub fn bowtie() -> RelStructure {
    graph_on(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
}

/// The complete r-uniform hypergraph on n points.
pub fn complete_hypergraph(r: usize, n: usize) -> RelStructure {
    let sig = Signature::hypergraph(r);
    let mut s = RelStructure::empty(sig, n).unwrap();
    let mut combo: Vec<usize> = (0..r).collect();
    loop {
        s.add_instance(0, &combo).unwrap();
        let mut i = r;
        let mut moved = false;
        while i > 0 {
            i -= 1;
            if combo[i] != i + n - r {
                combo[i] += 1;
                for j in (i + 1)..r {
                    combo[j] = combo[j - 1] + 1;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            return s;
        }
    }
}

pub fn graph_family(members: Vec<RelStructure>) -> ForbiddenFamily {
    minimalize(&ForbiddenFamily::new(Signature::graph(), members).unwrap())
}

pub fn hypergraph_family(r: usize, members: Vec<RelStructure>) -> ForbiddenFamily {
    minimalize(&ForbiddenFamily::new(Signature::hypergraph(r), members).unwrap())
}

/// The metric signature with distance-1 and distance-3 relations.
pub fn urysohn_signature() -> Arc<Signature> {
    Arc::new(
        Signature::new(vec![RelSymbol::new("d1", 2, true), RelSymbol::new("d3", 2, true)])
            .unwrap(),
    )
}

/// The forbidden family of the {0,1,2,3}-spectrum Urysohn class: a pair
/// carrying both distance labels, and the (1,1,3) triangle.
pub fn urysohn_family() -> ForbiddenFamily {
    let sig = urysohn_signature();
    let mut double = RelStructure::empty(sig.clone(), 2).unwrap();
    double.add_instance(0, &[0, 1]).unwrap();
    double.add_instance(1, &[0, 1]).unwrap();
    let mut triangle = RelStructure::empty(sig.clone(), 3).unwrap();
    triangle.add_instance(0, &[0, 1]).unwrap();
    triangle.add_instance(0, &[0, 2]).unwrap();
    triangle.add_instance(1, &[1, 2]).unwrap();
    minimalize(&ForbiddenFamily::new(sig, vec![double, triangle]).unwrap())
}

/// Independent oracle: every injective map from `a` to `b` satisfying the
/// mode, found by unpruned enumeration and checked from first principles.
pub fn brute_force_embeddings(
    a: &RelStructure,
    b: &RelStructure,
    mode: EmbeddingMode,
) -> Vec<Vec<Point>> {
    let mut maps = Vec::new();
    let mut cur: Vec<Point> = Vec::new();
    all_injective(a.size(), b.size(), &mut cur, &mut maps);
    maps.into_iter().filter(|map| map_satisfies(a, b, mode, map)).collect()
}

fn all_injective(k: usize, n: usize, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for q in 0..n {
        if !cur.contains(&q) {
            cur.push(q);
            all_injective(k, n, cur, out);
            cur.pop();
        }
    }
}

fn map_satisfies(a: &RelStructure, b: &RelStructure, mode: EmbeddingMode, map: &[Point]) -> bool {
    for (sym, tuple) in a.iter_instances() {
        let image: Vec<Point> = tuple.iter().map(|&p| map[p]).collect();
        if !b.has_instance(sym, &image) {
            return false;
        }
    }
    if mode == EmbeddingMode::Induced {
        for (sym, tuple) in b.iter_instances() {
            let pre: Option<Vec<Point>> = tuple
                .iter()
                .map(|&q| map.iter().position(|&x| x == q))
                .collect();
            if let Some(pre) = pre {
                if !a.has_instance(sym, &pre) {
                    return false;
                }
            }
        }
    }
    true
}
