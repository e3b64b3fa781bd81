//! JSON report shapes shared by the evaluation verbs. Every envelope
//! echoes the quiver name and content hashes of `T` and `T'` so results
//! can be traced back to the exact matrices they were computed from.

use crate::arquiver::{self, ARMatrix, ARQuiver};
use crate::ktheory::{Atom, GroupExpression, InjectivityCertificate, K1Presentation};
use crate::localization::{ExactSequenceReport, FiltrationReport};
use crate::zmodule::{FGAbelianGroup, FiniteAbelianGroup, IntegerMatrix};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

/// FNV-1a, 64-bit, hex encoded; stable across runs and platforms.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

pub fn matrix_hash(m: &IntegerMatrix) -> String {
    let mut repr = format!("{}x{};", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            repr.push_str(&m.get(i, j).to_string());
            repr.push(',');
        }
    }
    fnv1a_hex(repr.as_bytes())
}

fn bigint_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn group_value(g: &FGAbelianGroup) -> Value {
    let factors: Vec<Value> = g
        .invariant_factors()
        .iter()
        .map(|f| match f.to_u64() {
            Some(v) => json!(v),
            None => json!(f.to_string()),
        })
        .collect();
    json!({
        "free_rank": g.free_rank(),
        "invariant_factors": factors,
    })
}

/// Finite groups are reported in the same shape, canonicalized, with zero
/// free rank.
pub fn finite_group_value(g: &FiniteAbelianGroup) -> Value {
    json!({
        "free_rank": 0,
        "invariant_factors": g.canonical_invariants(),
    })
}

fn atom_value(a: &Atom) -> Value {
    match a {
        Atom::Free(r) => json!({"kind": "free", "rank": r}),
        Atom::Cyclic(d) => json!({"kind": "cyclic", "order": d}),
        Atom::Units(k) => json!({"kind": "units", "field": k}),
        Atom::Additive(k) => json!({"kind": "additive", "field": k}),
        Atom::ResidueUnits => json!({"kind": "residue_units"}),
        Atom::Quotient(base, d) => json!({"kind": "quotient", "base": atom_value(base), "by": d}),
        Atom::Opaque { name, constraints } => {
            json!({"kind": "opaque", "name": name, "constraints": constraints})
        }
    }
}

pub fn expression_value(e: &GroupExpression) -> Value {
    json!({
        "atoms": e.summands.iter().map(atom_value).collect::<Vec<_>>(),
        "display": e.to_string(),
    })
}

pub fn certificate_value(c: &InjectivityCertificate) -> Value {
    json!({
        "det_t_prime": bigint_value(&c.det_t_prime),
        "positive": c.positive,
        "sequences": c.sequences,
        "opaque_nodes": c.opaque_nodes.iter().map(atom_value).collect::<Vec<_>>(),
    })
}

pub fn k1_value(p: &K1Presentation) -> Value {
    json!({
        "expression": expression_value(&p.expression),
        "coker_part": expression_value(&p.coker_part),
        "certificate": certificate_value(&p.certificate),
    })
}

pub fn ar_matrix_value(t: &ARMatrix) -> Value {
    let entries: Vec<Vec<Value>> = (0..t.matrix.rows())
        .map(|i| {
            (0..t.matrix.cols())
                .map(|j| bigint_value(t.matrix.get(i, j)))
                .collect()
        })
        .collect();
    json!({
        "row_labels": t.row_labels,
        "col_labels": t.col_labels,
        "entries": entries,
    })
}

pub fn exact_sequence_value(r: &ExactSequenceReport) -> Value {
    json!({
        "nodes": r.node_groups.iter().map(group_value).collect::<Vec<_>>(),
        "exact_at": r.exact_at,
        "surjective_end": r.surjective_end,
        "exact": r.is_exact(),
    })
}

pub fn filtration_value(r: &FiltrationReport) -> Value {
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "subset": s.subset_ids,
                "subquotient": s.subquotient,
                "endo": {"residue": s.endo.residue, "radical_dim": s.endo.radical_dim},
                "k1": expression_value(&s.k1_expression),
            })
        })
        .collect();
    json!({ "steps": steps })
}

/// Wraps a result with the quiver name and the hashes of both relation
/// matrices.
pub fn envelope(q: &ARQuiver, result: Value) -> Value {
    let hashes = match (arquiver::ar_matrix(q), arquiver::deleted_ar_matrix(q)) {
        (Ok(t), Ok(tp)) => json!({
            "t": matrix_hash(&t.matrix),
            "t_prime": matrix_hash(&tp.matrix),
        }),
        _ => json!(null),
    };
    json!({
        "quiver": q.name,
        "matrix_hashes": hashes,
        "result": result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::a2n_quiver;

    #[test]
    fn hash_is_stable_and_shape_sensitive() {
        let m = IntegerMatrix::from_i64(2, 2, &[1, 2, 3, 4]);
        assert_eq!(matrix_hash(&m), matrix_hash(&m.clone()));
        let flat = IntegerMatrix::from_i64(1, 4, &[1, 2, 3, 4]);
        assert_ne!(matrix_hash(&m), matrix_hash(&flat));
    }

    #[test]
    fn group_json_shape() {
        let g = FGAbelianGroup::free(1);
        assert_eq!(
            serde_json::to_string(&group_value(&g)).unwrap(),
            r#"{"free_rank":1,"invariant_factors":[]}"#
        );
    }

    #[test]
    fn oversized_factors_serialize_as_strings() {
        use num_bigint::BigUint;
        let huge = BigUint::from(6u32).pow(40);
        let g = FGAbelianGroup::new(0, vec![huge.clone()]);
        let v = group_value(&g);
        assert_eq!(v["invariant_factors"][0], json!(huge.to_string()));
    }

    #[test]
    fn envelope_carries_hashes() {
        let q = a2n_quiver(2).unwrap();
        let v = envelope(&q, json!({"ok": true}));
        assert_eq!(v["quiver"], "A4");
        assert!(v["matrix_hashes"]["t"].is_string());
        assert!(v["matrix_hashes"]["t_prime"].is_string());
    }
}
