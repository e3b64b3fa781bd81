//! Data model for Auslander-Reiten quivers of finite CM type and the
//! construction of the relation matrix `T` and its deleted square form `T'`.
//!
//! A quiver here is combinatorial bookkeeping: a fixed-order list of
//! indecomposable modules (index 0 is the projective, the class of the ring
//! itself) and, for every non-projective indecomposable `M`, the almost
//! split sequence `0 -> N -> E -> M -> 0` ending in it, with the middle
//! term recorded as a multiset of indecomposables. Column `j` of `T` is the
//! relation vector `[M_j] - [E_j] + [N_j]` expanded in the basis of all
//! indecomposables.

use crate::zmodule::IntegerMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArQuiverError {
    #[error("unknown indecomposable id `{0}`")]
    UnknownId(String),
    #[error("invalid quiver: {0}")]
    InvalidQuiver(ValidationReport),
    #[error("sequence does not belong to this quiver")]
    ForeignSequence,
}

/// Endomorphism data of an indecomposable as seen in a designated
/// subquotient category: the residue division ring symbol and the dimension
/// of the radical of the subquotient endomorphism ring over it. 0 means the
/// subquotient endomorphism ring is the residue field itself; 1 means dual
/// numbers over it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndoDescriptor {
    pub residue: String,
    pub radical_dim: usize,
}

impl EndoDescriptor {
    pub fn field(symbol: &str) -> Self {
        EndoDescriptor {
            residue: symbol.to_string(),
            radical_dim: 0,
        }
    }

    pub fn dual_numbers(symbol: &str) -> Self {
        EndoDescriptor {
            residue: symbol.to_string(),
            radical_dim: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Indecomposable {
    pub id: String,
    #[serde(rename = "projective")]
    pub is_projective: bool,
    pub endo: EndoDescriptor,
}

/// Almost split sequence `0 -> left -> middle -> target -> 0`. The middle
/// term is a multiset of indecomposable ids; only multiplicities matter at
/// the level of relation vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ARSequence {
    pub target: String,
    pub middle: BTreeMap<String, u32>,
    pub left: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ARQuiver {
    pub name: String,
    pub indecomposables: Vec<Indecomposable>,
    #[serde(rename = "ar_sequences")]
    pub sequences: Vec<ARSequence>,
}

/// Relation matrix together with its labeling. Rows are indexed by all
/// indecomposables in quiver order; columns by the non-projective ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ARMatrix {
    pub matrix: IntegerMatrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(String),
    NoProjective,
    MultipleProjectives(Vec<String>),
    ProjectiveNotFirst(String),
    SequenceEndsInProjective(String),
    UnknownIdInSequence { target: String, id: String },
    MissingSequence(String),
    DuplicateSequence(String),
    ZeroMultiplicity { target: String, id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate indecomposable id `{id}`"),
            Violation::NoProjective => write!(f, "no projective indecomposable"),
            Violation::MultipleProjectives(ids) => {
                write!(f, "multiple projectives: {}", ids.join(", "))
            }
            Violation::ProjectiveNotFirst(id) => {
                write!(f, "projective `{id}` is not at index 0")
            }
            Violation::SequenceEndsInProjective(id) => {
                write!(f, "almost split sequence ends in the projective `{id}`")
            }
            Violation::UnknownIdInSequence { target, id } => {
                write!(f, "sequence ending in `{target}` references unknown id `{id}`")
            }
            Violation::MissingSequence(id) => {
                write!(f, "non-projective `{id}` without an almost split sequence")
            }
            Violation::DuplicateSequence(id) => {
                write!(f, "more than one sequence ends in `{id}`")
            }
            Violation::ZeroMultiplicity { target, id } => {
                write!(
                    f,
                    "sequence ending in `{target}` lists `{id}` with multiplicity 0"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl ARQuiver {
    pub fn ids(&self) -> Vec<&str> {
        self.indecomposables.iter().map(|m| m.id.as_str()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.indecomposables.iter().position(|m| m.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&Indecomposable> {
        self.indecomposables.iter().find(|m| m.id == id)
    }

    pub fn projective(&self) -> Option<&Indecomposable> {
        self.indecomposables.iter().find(|m| m.is_projective)
    }

    pub fn non_projectives(&self) -> Vec<&Indecomposable> {
        self.indecomposables.iter().filter(|m| !m.is_projective).collect()
    }

    pub fn sequence_ending_in(&self, id: &str) -> Option<&ARSequence> {
        self.sequences.iter().find(|s| s.target == id)
    }
}

/// Checks every structural invariant; an empty report means the quiver is
/// well formed.
pub fn validate(q: &ARQuiver) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    for m in &q.indecomposables {
        if !seen.insert(m.id.as_str()) {
            violations.push(Violation::DuplicateId(m.id.clone()));
        }
    }

    let projectives: Vec<&Indecomposable> =
        q.indecomposables.iter().filter(|m| m.is_projective).collect();
    match projectives.len() {
        0 => violations.push(Violation::NoProjective),
        1 => {
            if !q.indecomposables[0].is_projective {
                violations.push(Violation::ProjectiveNotFirst(projectives[0].id.clone()));
            }
        }
        _ => violations.push(Violation::MultipleProjectives(
            projectives.iter().map(|m| m.id.clone()).collect(),
        )),
    }

    let known: BTreeSet<&str> = q.indecomposables.iter().map(|m| m.id.as_str()).collect();
    let mut targets_seen: BTreeSet<&str> = BTreeSet::new();
    for s in &q.sequences {
        if let Some(m) = q.get(&s.target) {
            if m.is_projective {
                violations.push(Violation::SequenceEndsInProjective(s.target.clone()));
            }
        }
        for id in [s.target.as_str(), s.left.as_str()]
            .into_iter()
            .chain(s.middle.keys().map(|k| k.as_str()))
        {
            if !known.contains(id) {
                violations.push(Violation::UnknownIdInSequence {
                    target: s.target.clone(),
                    id: id.to_string(),
                });
            }
        }
        for (id, &mult) in &s.middle {
            if mult == 0 {
                violations.push(Violation::ZeroMultiplicity {
                    target: s.target.clone(),
                    id: id.clone(),
                });
            }
        }
        if !targets_seen.insert(s.target.as_str()) {
            violations.push(Violation::DuplicateSequence(s.target.clone()));
        }
    }

    for m in &q.indecomposables {
        if !m.is_projective && !targets_seen.contains(m.id.as_str()) {
            violations.push(Violation::MissingSequence(m.id.clone()));
        }
    }

    ValidationReport { violations }
}

pub(crate) fn ensure_valid(q: &ARQuiver) -> Result<(), ArQuiverError> {
    let report = validate(q);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ArQuiverError::InvalidQuiver(report))
    }
}

/// Number of summands of `l` in the multiset `q_mods`; every id mentioned
/// must exist in the quiver.
pub fn multiplicity(
    q: &ARQuiver,
    l: &str,
    q_mods: &BTreeMap<String, u32>,
) -> Result<u32, ArQuiverError> {
    if q.index_of(l).is_none() {
        return Err(ArQuiverError::UnknownId(l.to_string()));
    }
    for id in q_mods.keys() {
        if q.index_of(id).is_none() {
            return Err(ArQuiverError::UnknownId(id.clone()));
        }
    }
    Ok(q_mods.get(l).copied().unwrap_or(0))
}

/// Relation vector of an almost split sequence, indexed by all
/// indecomposables in quiver order: entry `l` is `#(l,M) - #(l,E) + #(l,N)`.
pub fn relation_vector(q: &ARQuiver, s: &ARSequence) -> Result<Vec<BigInt>, ArQuiverError> {
    if !q.sequences.iter().any(|t| t == s) {
        return Err(ArQuiverError::ForeignSequence);
    }
    for id in [s.target.as_str(), s.left.as_str()]
        .into_iter()
        .chain(s.middle.keys().map(|k| k.as_str()))
    {
        if q.index_of(id).is_none() {
            return Err(ArQuiverError::UnknownId(id.to_string()));
        }
    }
    let mut v = vec![BigInt::from(0); q.indecomposables.len()];
    let add = |id: &str, c: i64, v: &mut Vec<BigInt>| {
        let idx = q.index_of(id).expect("id checked above");
        v[idx] += c;
    };
    add(&s.target, 1, &mut v);
    for (id, &mult) in &s.middle {
        add(id, -(mult as i64), &mut v);
    }
    add(&s.left, 1, &mut v);
    Ok(v)
}

/// The full relation matrix `T`: one column per non-projective
/// indecomposable (in quiver order), one row per indecomposable.
pub fn ar_matrix(q: &ARQuiver) -> Result<ARMatrix, ArQuiverError> {
    ensure_valid(q)?;
    let row_labels: Vec<String> = q.indecomposables.iter().map(|m| m.id.clone()).collect();
    let seq_by_target: HashMap<&str, &ARSequence> =
        q.sequences.iter().map(|s| (s.target.as_str(), s)).collect();
    let mut columns = Vec::new();
    let mut col_labels = Vec::new();
    for m in q.non_projectives() {
        let s = seq_by_target
            .get(m.id.as_str())
            .expect("validation guarantees a sequence per non-projective");
        columns.push(relation_vector(q, s)?);
        col_labels.push(m.id.clone());
    }
    let matrix = IntegerMatrix::from_columns(row_labels.len(), &columns);
    Ok(ARMatrix {
        matrix,
        row_labels,
        col_labels,
    })
}

/// `T` with the projective's row removed; square of size `|I| - 1`.
pub fn deleted_ar_matrix(q: &ARQuiver) -> Result<ARMatrix, ArQuiverError> {
    let full = ar_matrix(q)?;
    let proj = q.projective().expect("validated quiver has a projective");
    let row = q.index_of(&proj.id).expect("projective is indexed");
    let matrix = full.matrix.remove_row(row);
    let row_labels = full
        .row_labels
        .iter()
        .filter(|l| *l != &proj.id)
        .cloned()
        .collect();
    Ok(ARMatrix {
        matrix,
        row_labels,
        col_labels: full.col_labels,
    })
}

/// Indices of `subset` members in quiver order; models the full additive
/// subcategory generated by the subset at the level of indecomposables.
pub fn full_subcategory_indices(
    q: &ARQuiver,
    subset: &BTreeSet<String>,
) -> Result<Vec<usize>, ArQuiverError> {
    for id in subset {
        if q.index_of(id).is_none() {
            return Err(ArQuiverError::UnknownId(id.clone()));
        }
    }
    Ok(q
        .indecomposables
        .iter()
        .enumerate()
        .filter(|(_, m)| subset.contains(&m.id))
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::a2n_quiver;

    fn middle(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn a4_is_valid() {
        let q = a2n_quiver(2).unwrap();
        assert!(validate(&q).is_valid());
    }

    #[test]
    fn two_projectives_flagged() {
        let mut q = a2n_quiver(2).unwrap();
        q.indecomposables[1].is_projective = true;
        let report = validate(&q);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MultipleProjectives(_))));
    }

    #[test]
    fn missing_sequence_flagged() {
        let mut q = a2n_quiver(2).unwrap();
        q.sequences.retain(|s| s.target != "M1");
        let report = validate(&q);
        assert_eq!(
            report.violations,
            vec![Violation::MissingSequence("M1".to_string())]
        );
    }

    #[test]
    fn projective_not_first_flagged() {
        let mut q = a2n_quiver(1).unwrap();
        q.indecomposables.swap(0, 1);
        let report = validate(&q);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ProjectiveNotFirst(_))));
    }

    #[test]
    fn multiplicity_counts() {
        let q = a2n_quiver(2).unwrap();
        let m = middle(&[("M0", 1), ("M1", 3)]);
        assert_eq!(multiplicity(&q, "M1", &m).unwrap(), 3);
        assert_eq!(multiplicity(&q, "M2", &middle(&[])).unwrap(), 0);
        assert_eq!(multiplicity(&q, "M0", &middle(&[("M0", 1), ("M2", 1)])).unwrap(), 1);
        assert!(multiplicity(&q, "M9", &middle(&[])).is_err());
    }

    #[test]
    fn relation_vectors_for_a4() {
        let q = a2n_quiver(2).unwrap();
        let s1 = q.sequence_ending_in("M1").unwrap();
        let v1 = relation_vector(&q, s1).unwrap();
        assert_eq!(v1, vec![BigInt::from(-1), BigInt::from(2), BigInt::from(-1)]);
        let s2 = q.sequence_ending_in("M2").unwrap();
        let v2 = relation_vector(&q, s2).unwrap();
        assert_eq!(v2, vec![BigInt::from(0), BigInt::from(-1), BigInt::from(1)]);
    }

    #[test]
    fn split_relation_vector_is_zero() {
        let q = ARQuiver {
            name: "split".to_string(),
            indecomposables: vec![
                Indecomposable {
                    id: "P".to_string(),
                    is_projective: true,
                    endo: EndoDescriptor::field("k"),
                },
                Indecomposable {
                    id: "N".to_string(),
                    is_projective: false,
                    endo: EndoDescriptor::field("k"),
                },
                Indecomposable {
                    id: "M".to_string(),
                    is_projective: false,
                    endo: EndoDescriptor::field("k"),
                },
            ],
            sequences: vec![ARSequence {
                target: "M".to_string(),
                middle: middle(&[("N", 1), ("M", 1)]),
                left: "N".to_string(),
            }],
        };
        let v = relation_vector(&q, &q.sequences[0]).unwrap();
        assert!(v.iter().all(|e| e == &BigInt::from(0)));
    }

    #[test]
    fn ar_matrix_a4() {
        let q = a2n_quiver(2).unwrap();
        let t = ar_matrix(&q).unwrap();
        assert_eq!(t.matrix, IntegerMatrix::from_i64(3, 2, &[-1, 0, 2, -1, -1, 1]));
        assert_eq!(t.row_labels, ["M0", "M1", "M2"]);
        assert_eq!(t.col_labels, ["M1", "M2"]);
    }

    #[test]
    fn ar_matrix_a2() {
        let q = a2n_quiver(1).unwrap();
        let t = ar_matrix(&q).unwrap();
        assert_eq!(t.matrix, IntegerMatrix::from_i64(2, 1, &[-1, 1]));
    }

    #[test]
    fn ar_matrix_regular_ring() {
        let q = ARQuiver {
            name: "regular".to_string(),
            indecomposables: vec![Indecomposable {
                id: "R".to_string(),
                is_projective: true,
                endo: EndoDescriptor::field("k"),
            }],
            sequences: vec![],
        };
        let t = ar_matrix(&q).unwrap();
        assert_eq!(t.matrix.rows(), 1);
        assert_eq!(t.matrix.cols(), 0);
    }

    #[test]
    fn ar_matrix_rejects_invalid() {
        let mut q = a2n_quiver(2).unwrap();
        q.sequences.clear();
        assert!(matches!(ar_matrix(&q), Err(ArQuiverError::InvalidQuiver(_))));
    }

    #[test]
    fn deleted_matrix_a4_and_a6() {
        let q = a2n_quiver(2).unwrap();
        let tp = deleted_ar_matrix(&q).unwrap();
        assert_eq!(tp.matrix, IntegerMatrix::from_i64(2, 2, &[2, -1, -1, 1]));
        assert_eq!(tp.row_labels, ["M1", "M2"]);

        let q = a2n_quiver(3).unwrap();
        let tp = deleted_ar_matrix(&q).unwrap();
        assert_eq!(
            tp.matrix,
            IntegerMatrix::from_i64(3, 3, &[2, -1, 0, -1, 2, -1, 0, -1, 1])
        );

        let q = a2n_quiver(1).unwrap();
        let tp = deleted_ar_matrix(&q).unwrap();
        assert_eq!(tp.matrix, IntegerMatrix::from_i64(1, 1, &[1]));
    }

    #[test]
    fn deleted_equals_full_minus_top_row() {
        for n in 1..=6 {
            let q = a2n_quiver(n).unwrap();
            let t = ar_matrix(&q).unwrap();
            let tp = deleted_ar_matrix(&q).unwrap();
            assert_eq!(tp.matrix, t.matrix.remove_row(0));
        }
    }

    #[test]
    fn subcategory_indices() {
        let q = a2n_quiver(2).unwrap();
        let subset: BTreeSet<String> = ["M0", "M1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(full_subcategory_indices(&q, &subset).unwrap(), vec![0, 1]);
        assert_eq!(
            full_subcategory_indices(&q, &BTreeSet::new()).unwrap(),
            Vec::<usize>::new()
        );
        let all: BTreeSet<String> = q.ids().iter().map(|s| s.to_string()).collect();
        assert_eq!(full_subcategory_indices(&q, &all).unwrap(), vec![0, 1, 2]);
        let bad: BTreeSet<String> = ["nope".to_string()].into_iter().collect();
        assert!(full_subcategory_indices(&q, &bad).is_err());
    }
}
