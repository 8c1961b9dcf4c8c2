//! JSON views of core values. Reports carry whole structures and embeddings,
//! not just hashes, so a verifier needs nothing beyond the report and the
//! library's re-check entry points.

use serde_json::{json, Value};

use fraisse_core::amalgam::{AxiomOutcome, AxiomReport};
use fraisse_core::canon::canonical_form;
use fraisse_core::classify::{ClassReport, IrreducibilityCertificate, SimplicityVerdict};
use fraisse_core::embed::{Embedding, EmbeddingMode};
use fraisse_core::forbidden::{ForbiddenFamily, Irreducibility};
use fraisse_core::generic::GenericityAudit;
use fraisse_core::structure::{PointSet, RelStructure, Signature};
use fraisse_core::witness::{NonSimplicityWitness, Sop3Certificate};

pub fn signature_json(sig: &Signature) -> Value {
    let symbols: Vec<Value> = sig
        .symbols()
        .iter()
        .map(|s| json!({"name": s.name, "arity": s.arity, "symmetric": s.symmetric}))
        .collect();
    json!({ "symbols": symbols })
}

pub fn structure_json(s: &RelStructure) -> Value {
    let mut instances = serde_json::Map::new();
    for (sym, decl) in s.signature().symbols().iter().enumerate() {
        let tuples: Vec<Value> = s
            .instances(sym)
            .iter()
            .map(|t| Value::from(t.iter().map(|&p| p as u64).collect::<Vec<u64>>()))
            .collect();
        instances.insert(decl.name.clone(), Value::from(tuples));
    }
    json!({
        "points": s.size(),
        "instances": instances,
        "canonical_code": canonical_form(s).to_string(),
    })
}

pub fn points_json(s: PointSet) -> Value {
    Value::from(s.iter().map(|p| p as u64).collect::<Vec<u64>>())
}

pub fn embedding_json(e: &Embedding) -> Value {
    json!({
        "mode": match e.mode() { EmbeddingMode::Weak => "weak", EmbeddingMode::Induced => "induced" },
        "map": e.map().iter().map(|&p| p as u64).collect::<Vec<u64>>(),
    })
}

pub fn family_json(f: &ForbiddenFamily) -> Value {
    json!({
        "signature": signature_json(f.signature()),
        "minimal": f.is_minimal(),
        "members": f.members().iter().map(structure_json).collect::<Vec<Value>>(),
    })
}

pub fn irreducibility_json(cert: &IrreducibilityCertificate) -> Value {
    match &cert.verdict {
        Irreducibility::Irreducible => {
            json!({"member": cert.member, "verdict": "irreducible"})
        }
        Irreducibility::UnrelatedTuple(w) => json!({
            "member": cert.member,
            "verdict": "unrelated-tuple",
            "witness": w.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
        }),
    }
}

pub fn simplicity_json(v: &SimplicityVerdict) -> Value {
    json!({
        "outcome": v.outcome.to_string(),
        "three_irreducibility": v.three_irreducibility.iter().map(irreducibility_json).collect::<Vec<Value>>(),
        "two_irreducibility": v.two_irreducibility.iter().map(irreducibility_json).collect::<Vec<Value>>(),
        "nonsimple_witness": v.nonsimple_witness.as_ref().map(|(m, w)| json!({
            "member": m,
            "unrelated_triple": w.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
        })),
        "blocking_member": v.blocking_member.as_ref().map(|(m, w)| json!({
            "member": m,
            "unrelated_pair": w.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
        })),
    })
}

pub fn class_report_json(r: &ClassReport) -> Value {
    json!({
        "family": family_json(&r.family),
        "closed_under_free_amalgamation": {
            "closed": r.closure.closed,
            "certificates": r.closure.certificates.iter().map(irreducibility_json).collect::<Vec<Value>>(),
            "failing": r.closure.failing.as_ref().map(|(m, w)| json!({
                "member": m,
                "unrelated_pair": w.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
            })),
        },
        "simplicity": simplicity_json(&r.simplicity),
        "notes": r.notes,
    })
}

pub fn axiom_report_json(r: &AxiomReport) -> Value {
    let outcome = |o: &AxiomOutcome| -> Value {
        match o {
            AxiomOutcome::Holds { cases } => json!({"holds": true, "cases": cases}),
            AxiomOutcome::CounterexampleFound(cx) => json!({
                "holds": false,
                "ambient": structure_json(&cx.ambient),
                "a": points_json(cx.a),
                "b": points_json(cx.b),
                "c": points_json(cx.c),
                "detail": format!("{:?}", cx.kind),
            }),
        }
    };
    let mut obj = serde_json::Map::new();
    for (name, o) in r.outcomes() {
        obj.insert(name.into(), outcome(o));
    }
    obj.insert("structures_checked".into(), json!(r.structures_checked));
    Value::Object(obj)
}

pub fn genericity_audit_json(a: &GenericityAudit) -> Value {
    json!({
        "depth": a.depth,
        "total": a.total,
        "realized": a.realized,
        "unrealized_examples": a.unrealized.iter().map(|u| json!({
            "base": u.base.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
            "extension": structure_json(&u.extension),
        })).collect::<Vec<Value>>(),
    })
}

pub fn nonsimplicity_witness_json(w: &NonSimplicityWitness) -> Value {
    json!({
        "member": w.member,
        "member_structure": structure_json(&w.member_structure),
        "unrelated_triple": w.unrelated.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
        "rows": w.rows,
        "e": structure_json(&w.e),
        "hat": points_json(w.hat),
        "row_pairs": w.row_pairs.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<Value>>(),
        "e_plus": structure_json(&w.e_plus),
        "b1": w.b1,
        "contradiction": {
            "structure": structure_json(&w.contradiction.structure),
            "b_star": w.contradiction.b_star,
            "embedding": embedding_json(&w.contradiction.embedding),
        },
    })
}

pub fn sop3_certificate_json(c: &Sop3Certificate) -> Value {
    json!({
        "carrier": structure_json(&c.carrier),
        "hat": points_json(c.hat),
        "row_pairs": c.row_pairs.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<Value>>(),
        "players": c.players.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
        "p_pattern": pattern_json(&c.p_pattern),
        "q_pattern": pattern_json(&c.q_pattern),
        "inconsistency_proofs": c.proofs.iter().map(|proof| json!({
            "i": proof.i,
            "j": proof.j,
            "cases": proof.cases.iter().map(|case| json!({
                "completion": structure_json(&case.completion),
                "member": case.member,
                "embedding": embedding_json(&case.embedding),
            })).collect::<Vec<Value>>(),
        })).collect::<Vec<Value>>(),
    })
}

pub fn pattern_json(p: &fraisse_core::witness::PairPattern) -> Value {
    json!({
        "carrier": structure_json(p.carrier()),
        "left": points_json(p.left()),
        "right": points_json(p.right()),
        "base": points_json(p.base()),
    })
}
