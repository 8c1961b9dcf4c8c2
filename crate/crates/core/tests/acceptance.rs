//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them). Every bound is
//! pinned in the assertions.

mod common;

use std::time::{Duration, Instant};

use common::*;
use fraisse_core::amalgam::check_axioms;
use fraisse_core::canon::are_isomorphic;
use fraisse_core::classify::{bounded_amalgamation_audit, simplicity_verdict, SimplicityOutcome};
use fraisse_core::embed::{count_embeddings, find_embedding, EmbeddingMode};
use fraisse_core::enumerate::{enumerate_structures, enumerate_up_to};
use fraisse_core::forbidden::{is_free, minimalize, ForbiddenFamily};
use fraisse_core::generic::{extension_axiom_audit, generate, GenerateOptions, SplitMix64};
use fraisse_core::structure::{PointSet, RelStructure, Signature};
use fraisse_core::witness::{
    dividing_witness, nonsimplicity_witness, sop_cycle, verify_nonsimplicity_witness,
    CycleOutcome, DividingOutcome, PairPattern, WitnessError,
};

#[test]
fn criterion_1_named_example_classification() {
    let t0 = Instant::now();
    let empty = ForbiddenFamily::unconstrained(Signature::graph());
    assert_eq!(simplicity_verdict(&empty).unwrap().outcome, SimplicityOutcome::Simple);
    for n in [3, 4, 5] {
        let f = graph_family(vec![complete_graph(n)]);
        assert_eq!(
            simplicity_verdict(&f).unwrap().outcome,
            SimplicityOutcome::NotSimple,
            "complete-graph family K{n}"
        );
    }
    for n in [4, 5] {
        let f = hypergraph_family(3, vec![complete_hypergraph(3, n)]);
        assert_eq!(
            simplicity_verdict(&f).unwrap().outcome,
            SimplicityOutcome::Simple,
            "complete-hypergraph family on {n} points"
        );
    }
    assert_eq!(
        simplicity_verdict(&urysohn_family()).unwrap().outcome,
        SimplicityOutcome::NotSimple
    );
    let f = graph_family(vec![bowtie()]);
    assert_eq!(simplicity_verdict(&f).unwrap().outcome, SimplicityOutcome::Undetermined);
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(5), "classification took {elapsed:?}");
    println!("criterion 1: PASS — 8 named families classified exactly in {elapsed:?}");
}

#[test]
fn criterion_2_axiom_conformance_exhaustive() {
    let t0 = Instant::now();
    let report = check_axioms(&Signature::graph(), 5, 6).unwrap();
    let elapsed = t0.elapsed();
    for (name, outcome) in report.outcomes() {
        assert!(outcome.holds(), "axiom {name} found a counterexample: {outcome:?}");
    }
    assert!(elapsed < Duration::from_secs(60), "harness took {elapsed:?}");
    println!(
        "criterion 2: PASS — six axioms hold over all {} graph classes up to 5 points in {elapsed:?}",
        report.structures_checked
    );
}

#[test]
fn criterion_3_closure_cross_check() {
    for (label, family) in [
        ("triangle", graph_family(vec![complete_graph(3)])),
        ("tetrahedral hypergraph", hypergraph_family(3, vec![complete_hypergraph(3, 4)])),
    ] {
        let audit = bounded_amalgamation_audit(&family, 4, 6).unwrap();
        assert_eq!(audit.violations, 0, "{label} family must audit clean at size 4");
    }
    let f = graph_family(vec![bowtie()]);
    let audit = bounded_amalgamation_audit(&f, 4, 6).unwrap();
    assert!(audit.violations >= 1);
    let witness = audit
        .examples
        .iter()
        .find(|v| {
            v.glue.len() == 1
                && are_isomorphic(&v.left, &complete_graph(3))
                && are_isomorphic(&v.right, &complete_graph(3))
        })
        .expect("a violation gluing two triangles over a point");
    assert!(are_isomorphic(&witness.amalgam, &bowtie()));
    assert!(witness.embedding.verify(&f.members()[witness.member], &witness.amalgam));
    println!(
        "criterion 3: PASS — clean audits for 2-irreducible families; bowtie rebuilt from \
         two triangles over a point ({} violations found)",
        audit.violations
    );
}

#[test]
fn criterion_4_half_graph_witness() {
    let family = graph_family(vec![complete_graph(3)]);
    let k3 = complete_graph(3);
    for rows in 2..=6usize {
        let w = nonsimplicity_witness(&family, 0, rows).unwrap();
        assert_eq!(
            w.e.instance_count(),
            rows * (rows - 1) / 2,
            "half-graph edge count at {rows} rows"
        );
        assert!(
            find_embedding(&k3, &w.e, EmbeddingMode::Weak, None).unwrap().is_none(),
            "E must be triangle-free by the embedding oracle"
        );
        assert!(w.contradiction.embedding.verify(&k3, &w.contradiction.structure));
        verify_nonsimplicity_witness(&family, &w).unwrap();
    }
    println!("criterion 4: PASS — half-graph witnesses verified for 2..=6 rows");
}

#[test]
fn criterion_5_dividing_witness_soundness() {
    let f = hypergraph_family(3, vec![complete_hypergraph(3, 4)]);
    let carriers = enumerate_up_to(&Signature::hypergraph(3), 4, 6).unwrap();
    let mut patterns = 0u64;
    for carrier in carriers {
        if !is_free(&carrier, &f).unwrap().is_free() {
            continue;
        }
        for_each_split(&carrier, |pattern| {
            for k in 1..=5usize {
                patterns += 1;
                match dividing_witness(pattern, &f, k).unwrap() {
                    DividingOutcome::Witness(w) => {
                        assert!(is_free(&w.structure, &f).unwrap().is_free());
                    }
                    DividingOutcome::Blocked { .. } => panic!(
                        "dividing witness blocked over a 3-irreducible family \
                         (carrier size {}, k {k})",
                        pattern.carrier().size()
                    ),
                }
            }
        });
    }
    println!(
        "criterion 5: PASS — {patterns} dividing witnesses over the tetrahedron-free family, \
         none blocked, all free"
    );
}

#[test]
fn criterion_6_cycle_dichotomy() {
    let family = graph_family(vec![complete_graph(3)]);
    let edge_pattern = PairPattern::new(
        graph_on(2, &[(0, 1)]),
        PointSet::singleton(0),
        PointSet::singleton(1),
        PointSet::EMPTY,
    )
    .unwrap();
    assert!(matches!(
        sop_cycle(&edge_pattern, &family, 3).unwrap(),
        CycleOutcome::Blocked { .. }
    ));
    for n in [4, 5, 6] {
        assert!(matches!(sop_cycle(&edge_pattern, &family, n).unwrap(), CycleOutcome::Free(_)));
    }
    // exhaustive: every self-paired free pattern of carrier size <= 4 cycles
    // freely at n = 4 over a 2-irreducible family
    let mut checked = 0u64;
    let carriers = enumerate_up_to(&Signature::graph(), 4, 6).unwrap();
    for carrier in carriers {
        if !is_free(&carrier, &family).unwrap().is_free() {
            continue;
        }
        for_each_split(&carrier, |pattern| match sop_cycle(pattern, &family, 4) {
            Ok(CycleOutcome::Free(_)) => checked += 1,
            Ok(CycleOutcome::Blocked { .. }) => {
                panic!("n=4 cycle blocked over a 2-irreducible family")
            }
            Err(WitnessError::NotSelfPaired) => {}
            Err(e) => panic!("unexpected error: {e}"),
        });
    }
    println!(
        "criterion 6: PASS — edge cycles blocked at n=3, free at n=4,5,6; \
         {checked} self-paired patterns free at n=4"
    );
}

#[test]
fn criterion_7_generator_quality() {
    let f = graph_family(vec![complete_graph(3)]);
    let k3 = complete_graph(3);
    for seed in 0..10u64 {
        let t0 = Instant::now();
        let m = generate(&f, &GenerateOptions { size: 40, depth: 2, seed, allow_unclosed: false })
            .unwrap();
        assert!(
            find_embedding(&k3, &m, EmbeddingMode::Weak, None).unwrap().is_none(),
            "output must be triangle-free (seed {seed})"
        );
        let audit = extension_axiom_audit(&m, &f, 2).unwrap();
        assert_eq!(
            audit.realized, audit.total,
            "all extension-problem classes must be realised at depth 2 (seed {seed})"
        );
        let elapsed = t0.elapsed();
        assert!(elapsed < Duration::from_secs(10), "seed {seed} took {elapsed:?}");
    }
    println!(
        "criterion 7: PASS — 10 seeds, every output triangle-free with realized/total = 1.0 \
         at depth 2"
    );
}

#[test]
fn criterion_8_embedding_oracle_equivalence() {
    let sig = Signature::graph();
    let mut pairs = 0u64;
    for na in 0..=4usize {
        for a in enumerate_structures(&sig, na, 6).unwrap() {
            for nb in 0..=5usize {
                for b in enumerate_structures(&sig, nb, 6).unwrap() {
                    for mode in [EmbeddingMode::Weak, EmbeddingMode::Induced] {
                        let oracle = brute_force_embeddings(&a, &b, mode);
                        let found = find_embedding(&a, &b, mode, None).unwrap();
                        assert_eq!(found.is_some(), !oracle.is_empty());
                        if let Some(e) = &found {
                            assert!(oracle.contains(&e.map().to_vec()));
                        }
                        assert_eq!(count_embeddings(&a, &b, mode), oracle.len() as u64);
                    }
                    pairs += 1;
                }
            }
        }
    }
    println!(
        "criterion 8: PASS — search agrees with the brute-force oracle on {pairs} pairs, \
         both modes, existence and counts"
    );
}

#[test]
fn criterion_9_minimalize_preserves_the_class() {
    let sig = Signature::graph();
    let probes: Vec<RelStructure> = (0..=5usize)
        .flat_map(|n| enumerate_structures(&sig, n, 6).unwrap())
        .collect();
    let mut rng = SplitMix64::new(2024);
    for trial in 0..200u32 {
        let member_count = 1 + rng.below(4) as usize;
        let mut members = Vec::with_capacity(member_count);
        for _ in 0..member_count {
            let n = 1 + rng.below(4) as usize;
            let mut s = RelStructure::empty(sig.clone(), n).unwrap();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.below(2) == 1 {
                        s.add_instance(0, &[i, j]).unwrap();
                    }
                }
            }
            members.push(s);
        }
        let family = ForbiddenFamily::new(sig.clone(), members).unwrap();
        let min = minimalize(&family);
        for probe in &probes {
            assert_eq!(
                is_free(probe, &family).unwrap().is_free(),
                is_free(probe, &min).unwrap().is_free(),
                "trial {trial}: membership changed under minimalisation"
            );
        }
    }
    println!(
        "criterion 9: PASS — 200 random families, class membership of all {} structures \
         up to size 5 preserved by minimalisation",
        probes.len()
    );
}

/// Every (left, right, base) split of a carrier with base = left ∩ right.
fn for_each_split(carrier: &RelStructure, mut visit: impl FnMut(&PairPattern)) {
    let n = carrier.size();
    let mut assignment = vec![0u8; n];
    loop {
        let mut left = PointSet::EMPTY;
        let mut right = PointSet::EMPTY;
        let mut base = PointSet::EMPTY;
        for (p, &cls) in assignment.iter().enumerate() {
            match cls {
                0 => left = left.with(p),
                1 => right = right.with(p),
                _ => {
                    left = left.with(p);
                    right = right.with(p);
                    base = base.with(p);
                }
            }
        }
        if let Ok(pattern) = PairPattern::new(carrier.clone(), left, right, base) {
            visit(&pattern);
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if assignment[i] < 2 {
                assignment[i] += 1;
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if n == 0 {
            return;
        }
    }
}
