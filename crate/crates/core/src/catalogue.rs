//! The built-in `A_{2n}` family of AR quivers (one-dimensional curve
//! singularities `k[[t^2, t^{2n+1}]]`) and quiver file I/O.
//!
//! For `0 < j < n` the almost split sequence ending in `M_j` has middle
//! term `M_{j-1} ⊕ M_{j+1}`; for `j = n` it is `M_{n-1} ⊕ M_n`. These are
//! the unique middle-term multiplicities whose relation vectors reproduce
//! the closed-form relation matrix of the family, with entries −1 at
//! `j = l±1`, 2 at `j = l < n`, 1 at `j = l = n` and 0 elsewhere.
//! Subquotient endomorphism rings are the residue field except at `i = n`,
//! where dual numbers appear (radical_dim 1).

use crate::arquiver::{validate, ARQuiver, ARSequence, EndoDescriptor, Indecomposable};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogueError {
    #[error("family parameter must be at least 1, got {0}")]
    InvalidParameter(u32),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate indecomposable id `{id}` in {path}")]
    DuplicateId { path: String, id: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogueEntry {
    pub family: String,
    pub parameter: u32,
    pub quiver: ARQuiver,
}

/// Quiver of the `A_{2n}` singularity: indecomposables `M0` (projective)
/// through `Mn`, sequences `0 -> M_j -> M_{j-1} ⊕ M_{j+1} -> M_j -> 0` for
/// `0 < j < n` and `0 -> M_n -> M_{n-1} ⊕ M_n -> M_n -> 0` at the end.
pub fn a2n_quiver(n: u32) -> Result<ARQuiver, CatalogueError> {
    if n < 1 {
        return Err(CatalogueError::InvalidParameter(n));
    }
    let id = |i: u32| format!("M{i}");
    let indecomposables = (0..=n)
        .map(|i| Indecomposable {
            id: id(i),
            is_projective: i == 0,
            endo: if i == n {
                EndoDescriptor::dual_numbers("k")
            } else {
                EndoDescriptor::field("k")
            },
        })
        .collect();
    let sequences = (1..=n)
        .map(|j| {
            let mut middle: BTreeMap<String, u32> = BTreeMap::new();
            *middle.entry(id(j - 1)).or_insert(0) += 1;
            if j < n {
                *middle.entry(id(j + 1)).or_insert(0) += 1;
            } else {
                *middle.entry(id(n)).or_insert(0) += 1;
            }
            ARSequence {
                target: id(j),
                middle,
                left: id(j),
            }
        })
        .collect();
    let q = ARQuiver {
        name: format!("A{}", 2 * n),
        indecomposables,
        sequences,
    };
    debug_assert!(validate(&q).is_valid());
    Ok(q)
}

pub fn a2n_entry(n: u32) -> Result<CatalogueEntry, CatalogueError> {
    Ok(CatalogueEntry {
        family: "a2n".to_string(),
        parameter: n,
        quiver: a2n_quiver(n)?,
    })
}

/// Serializes a quiver in the interchange format, pretty-printed with keys
/// in declaration order so output is diff stable.
pub fn quiver_to_json(q: &ARQuiver) -> String {
    let mut s = serde_json::to_string_pretty(q).expect("quiver serialization is infallible");
    s.push('\n');
    s
}

/// Parses the interchange format. Unknown keys and duplicate ids are
/// rejected; malformed input reports line and column.
pub fn quiver_from_json(text: &str, origin: &str) -> Result<ARQuiver, CatalogueError> {
    let q: ARQuiver = serde_json::from_str(text).map_err(|e| CatalogueError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seen = std::collections::BTreeSet::new();
    for m in &q.indecomposables {
        if !seen.insert(m.id.as_str()) {
            return Err(CatalogueError::DuplicateId {
                path: origin.to_string(),
                id: m.id.clone(),
            });
        }
    }
    Ok(q)
}

pub fn load_quiver(path: &Path) -> Result<ARQuiver, CatalogueError> {
    let text = fs::read_to_string(path).map_err(|e| CatalogueError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    quiver_from_json(&text, &path.display().to_string())
}

pub fn save_quiver(q: &ARQuiver, path: &Path) -> Result<(), CatalogueError> {
    let mut file = fs::File::create(path).map_err(|e| CatalogueError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    file.write_all(quiver_to_json(q).as_bytes())
        .map_err(|e| CatalogueError::Io {
            path: path.display().to_string(),
            source: e,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arquiver;

    #[test]
    fn family_members_validate() {
        for n in 1..=20 {
            let q = a2n_quiver(n).unwrap();
            assert!(arquiver::validate(&q).is_valid(), "A{} invalid", 2 * n);
            assert_eq!(q.indecomposables.len(), n as usize + 1);
        }
    }

    #[test]
    fn rejects_zero() {
        assert!(matches!(a2n_quiver(0), Err(CatalogueError::InvalidParameter(0))));
    }

    #[test]
    fn entry_metadata() {
        let e = a2n_entry(3).unwrap();
        assert_eq!(e.family, "a2n");
        assert_eq!(e.parameter, 3);
        assert_eq!(e.quiver.name, "A6");
        assert!(arquiver::validate(&e.quiver).is_valid());
    }

    #[test]
    fn closed_form_entries() {
        // entry rule: -1 at j = l±1, 2 at j = l < n, 1 at j = l = n
        for n in 1..=8u32 {
            let q = a2n_quiver(n).unwrap();
            let t = arquiver::ar_matrix(&q).unwrap();
            for l in 0..=n as usize {
                for j in 1..=n as usize {
                    let expected: i64 = if j == l + 1 || l == j + 1 {
                        -1
                    } else if j == l && j < n as usize {
                        2
                    } else if j == l && j == n as usize {
                        1
                    } else {
                        0
                    };
                    assert_eq!(
                        t.matrix.get(l, j - 1),
                        &num_bigint::BigInt::from(expected),
                        "n={n} entry ({l},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = std::env::temp_dir();
        for n in [1u32, 2, 5] {
            let q = a2n_quiver(n).unwrap();
            let path = dir.join(format!("cmk-roundtrip-a{}.json", 2 * n));
            save_quiver(&q, &path).unwrap();
            let back = load_quiver(&path).unwrap();
            assert_eq!(q, back);
            std::fs::remove_file(&path).ok();
        }
    }

    #[test]
    fn duplicate_id_named_in_error() {
        let text = r#"{
            "name": "dup",
            "indecomposables": [
                {"id": "M0", "projective": true, "endo": {"residue": "k", "radical_dim": 0}},
                {"id": "M0", "projective": false, "endo": {"residue": "k", "radical_dim": 0}}
            ],
            "ar_sequences": []
        }"#;
        let err = quiver_from_json(text, "test").unwrap_err();
        match err {
            CatalogueError::DuplicateId { id, .. } => assert_eq!(id, "M0"),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = r#"{
            "name": "extra",
            "indecomposables": [],
            "ar_sequences": [],
            "surprise": 1
        }"#;
        let err = quiver_from_json(text, "test").unwrap_err();
        assert!(matches!(err, CatalogueError::Parse { .. }));
        assert!(err.to_string().contains("surprise"));
    }

    #[test]
    fn malformed_json_has_location() {
        let err = quiver_from_json("{\"name\": ", "broken.json").unwrap_err();
        match err {
            CatalogueError::Parse { line, path, .. } => {
                assert_eq!(path, "broken.json");
                assert!(line >= 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
