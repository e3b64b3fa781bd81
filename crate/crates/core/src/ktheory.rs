//! K-groups read off a quiver: `K0'(R)` as the cokernel of the relation
//! matrix `T`, `K0` of the matrix-factorization category as the cokernel of
//! `T'`, and symbolic `K1` presentations with coefficients in the unit
//! group of the residue field.
//!
//! `K1` results are formal direct sums of atoms (cyclic groups, `k^x`,
//! `k^+`, quotients, and opaque placeholders carrying exact-sequence
//! constraints). They can be instantiated over a finite field `F_q` for
//! desk-scale checks; instantiated output is labeled, since the underlying
//! theory assumes an algebraically closed residue field.

use crate::arquiver::{self, ARQuiver, ArQuiverError};
use crate::zmodule::{
    cokernel, smith_normal_form, FGAbelianGroup, FiniteAbelianGroup, IntegerMatrix, ZModuleError,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use std::fmt;
use thiserror::Error;

/// Label attached to every finite-field instantiation in reports.
pub const INSTANTIATION_NOTE: &str =
    "formal instantiation: a finite residue field lies outside the algebraically closed hypothesis";

#[derive(Debug, Error)]
pub enum KTheoryError {
    #[error(transparent)]
    Quiver(#[from] ArQuiverError),
    #[error("injectivity hypothesis unverified: det T' = {det} is not positive")]
    InjectivityUnverified { det: BigInt },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("expression is not instantiable; opaque atoms: {}", .0.join(", "))]
    NotInstantiable(Vec<String>),
    #[error("torsion order does not fit in working precision")]
    TorsionTooLarge,
    #[error(transparent)]
    ZModule(#[from] ZModuleError),
}

/// One formal summand of a group expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    /// Free abelian of the given rank.
    Free(usize),
    /// Cyclic of the given order.
    Cyclic(u64),
    /// Unit group `k^x` of the named field.
    Units(String),
    /// Additive group `k^+` of the named field.
    Additive(String),
    /// `R^x / k^x`; never instantiable.
    ResidueUnits,
    /// Quotient `A/dA` of an atom by the multiples of `d`.
    Quotient(Box<Atom>, u64),
    /// Named group known only through attached exact-sequence constraints.
    Opaque { name: String, constraints: Vec<String> },
}

impl Atom {
    pub fn opaque(name: &str, constraints: &[&str]) -> Self {
        Atom::Opaque {
            name: name.to_string(),
            constraints: constraints.iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Cyclic orders of the atom over `F_q` with `q = p^e`, or the display
    /// name of the first sub-atom refusing instantiation.
    fn instantiation_orders(&self, p: u64, e: u32, q: u64) -> Result<Vec<u64>, String> {
        match self {
            Atom::Free(0) => Ok(vec![]),
            Atom::Free(_) => Err(self.to_string()),
            Atom::Cyclic(d) => Ok(vec![*d]),
            Atom::Units(_) => Ok(vec![q - 1]),
            Atom::Additive(_) => Ok(vec![p; e as usize]),
            Atom::ResidueUnits => Err(self.to_string()),
            Atom::Quotient(base, d) => Ok(base
                .instantiation_orders(p, e, q)?
                .into_iter()
                .map(|o| gcd(o, *d))
                .collect()),
            Atom::Opaque { name, .. } => Err(name.clone()),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Free(1) => write!(f, "Z"),
            Atom::Free(r) => write!(f, "Z^{r}"),
            Atom::Cyclic(d) => write!(f, "Z/{d}"),
            Atom::Units(k) => write!(f, "{k}^x"),
            Atom::Additive(k) => write!(f, "{k}^+"),
            Atom::ResidueUnits => write!(f, "R^x/k^x"),
            Atom::Quotient(base, d) => write!(f, "{base}/{d}{base}"),
            Atom::Opaque { name, .. } => write!(f, "{name}"),
        }
    }
}

/// Formal direct sum of atoms; an empty sum is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GroupExpression {
    pub summands: Vec<Atom>,
}

impl GroupExpression {
    pub fn trivial() -> Self {
        GroupExpression::default()
    }

    pub fn of(summands: Vec<Atom>) -> Self {
        GroupExpression { summands }
    }

    pub fn direct_sum(mut self, other: GroupExpression) -> Self {
        self.summands.extend(other.summands);
        self
    }

    pub fn is_trivial_expression(&self) -> bool {
        self.summands.is_empty()
    }

    /// Names of atoms that refuse instantiation (opaque, residue units,
    /// infinite free parts).
    pub fn opaque_atom_names(&self) -> Vec<String> {
        self.summands
            .iter()
            .filter_map(|a| match a {
                Atom::Opaque { name, .. } => Some(name.clone()),
                Atom::ResidueUnits => Some(a.to_string()),
                Atom::Free(r) if *r > 0 => Some(a.to_string()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for GroupExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.summands.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Returns `(p, e)` with `q = p^e` when `q` is a prime power at least 2.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut n = q;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            return if n == 1 { Some((p, e)) } else { None };
        }
        p += if p == 2 { 1 } else { 2 };
    }
    Some((q, 1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientSpec {
    Symbolic,
    FiniteField(u64),
}

impl CoefficientSpec {
    pub fn finite_field(q: u64) -> Result<Self, KTheoryError> {
        if prime_power(q).is_none() {
            return Err(KTheoryError::NotPrimePower(q));
        }
        Ok(CoefficientSpec::FiniteField(q))
    }
}

/// Concrete finite group for an expression over `F_q`, in canonical
/// invariant-factor form. Refuses with the offending atom names when any
/// summand is opaque or infinite.
pub fn instantiate(e: &GroupExpression, q: u64) -> Result<FiniteAbelianGroup, KTheoryError> {
    let (p, exp) = prime_power(q).ok_or(KTheoryError::NotPrimePower(q))?;
    let mut orders = Vec::new();
    let mut refused = Vec::new();
    for atom in &e.summands {
        match atom.instantiation_orders(p, exp, q) {
            Ok(os) => orders.extend(os),
            Err(name) => refused.push(name),
        }
    }
    if !refused.is_empty() {
        return Err(KTheoryError::NotInstantiable(refused));
    }
    Ok(FiniteAbelianGroup::new(orders)?.canonicalized())
}

/// `K0'(R)`: cokernel of the relation matrix `T` as a map
/// `Z^{I_0} -> Z^I`.
pub fn k0_prime(q: &ARQuiver) -> Result<FGAbelianGroup, KTheoryError> {
    let t = arquiver::ar_matrix(q)?;
    Ok(cokernel(&t.matrix))
}

/// `K0'` of the Auslander algebra: free on the set of indecomposables.
pub fn k0_lambda(q: &ARQuiver) -> FGAbelianGroup {
    FGAbelianGroup::free(q.indecomposables.len())
}

#[derive(Clone, Debug)]
pub struct K0MfResult {
    pub group: FGAbelianGroup,
    /// Present when the caller did not assert the hypersurface hypothesis.
    pub warning: Option<String>,
}

/// `K0` of the matrix-factorization category: cokernel of `T'`. Only
/// meaningful when the ring is a hypersurface `S/(w)`; the caller asserts
/// that via `hypersurface`, otherwise a warning is attached.
pub fn k0_mf(q: &ARQuiver, hypersurface: bool) -> Result<K0MfResult, KTheoryError> {
    let tp = arquiver::deleted_ar_matrix(q)?;
    let warning = if hypersurface {
        None
    } else {
        Some(
            "hypersurface hypothesis not asserted; the matrix-factorization reading requires R = S/(w)"
                .to_string(),
        )
    };
    Ok(K0MfResult {
        group: cokernel(&tp.matrix),
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetDeleted {
    pub det: BigInt,
    pub positive: bool,
}

/// Exact determinant of `T'` and its sign gate.
pub fn det_deleted_matrix(q: &ARQuiver) -> Result<DetDeleted, KTheoryError> {
    let tp = arquiver::deleted_ar_matrix(q)?;
    let det = tp.matrix.determinant();
    let positive = det.is_positive();
    Ok(DetDeleted { det, positive })
}

/// Certificate for the exact sequences behind a `K1` presentation: the
/// determinant gate that makes the tail map injective, the sequences read
/// off, and any unresolved symbolic nodes they mention.
#[derive(Clone, Debug)]
pub struct InjectivityCertificate {
    pub det_t_prime: BigInt,
    pub positive: bool,
    pub sequences: Vec<String>,
    pub opaque_nodes: Vec<Atom>,
}

#[derive(Clone, Debug)]
pub struct K1Presentation {
    /// The assembled result.
    pub expression: GroupExpression,
    /// The `coker(T·id)` (resp. `coker(T'·id)`) term on its own, in the
    /// same coefficient mode as the expression.
    pub coker_part: GroupExpression,
    pub certificate: InjectivityCertificate,
}

/// Cokernel of `m ⊗ id` over the unit-group coefficients, symbolic or
/// instantiated: each Smith diagonal `d` contributes `k^x/d·k^x`, each free
/// row a full copy of `k^x`.
fn coker_units_expression(
    m: &IntegerMatrix,
    spec: &CoefficientSpec,
) -> Result<GroupExpression, KTheoryError> {
    let snf = smith_normal_form(m);
    let free_rows = m.rows() - snf.rank();
    let mut atoms = Vec::new();
    match spec {
        CoefficientSpec::Symbolic => {
            for d in snf.diagonal() {
                if d.is_one() {
                    continue;
                }
                let d = d.to_u64().ok_or(KTheoryError::TorsionTooLarge)?;
                atoms.push(Atom::Quotient(Box::new(Atom::Units("k".to_string())), d));
            }
            for _ in 0..free_rows {
                atoms.push(Atom::Units("k".to_string()));
            }
        }
        CoefficientSpec::FiniteField(q) => {
            let units_order = q - 1;
            for d in snf.diagonal() {
                let d = d
                    .mod_floor_u64(units_order)
                    .ok_or(KTheoryError::TorsionTooLarge)?;
                let o = gcd(d, units_order);
                if o > 1 {
                    atoms.push(Atom::Cyclic(o));
                }
            }
            if units_order > 1 {
                for _ in 0..free_rows {
                    atoms.push(Atom::Cyclic(units_order));
                }
            }
        }
    }
    Ok(GroupExpression::of(atoms))
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, m: u64) -> Option<u64>;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, m: u64) -> Option<u64> {
        debug_assert!(m > 0);
        num_integer::Integer::mod_floor(self, &BigInt::from(m)).to_u64()
    }
}

fn injectivity_gate(q: &ARQuiver) -> Result<DetDeleted, KTheoryError> {
    let d = det_deleted_matrix(q)?;
    if !d.positive {
        return Err(KTheoryError::InjectivityUnverified { det: d.det });
    }
    Ok(d)
}

fn opaque_g() -> Atom {
    Atom::opaque("G", &["exact: R^x/k^x -> G -> k^+ -> 0"])
}

/// Presentation of `K1'(R)` as `coker(T·id_{k^x}) ⊕ G`, where `G` is known
/// only through its attached exact sequence. Requires `det T' > 0`, which
/// is what makes the tail of the defining exact sequence injective.
pub fn k1_prime_presentation(
    q: &ARQuiver,
    spec: &CoefficientSpec,
) -> Result<K1Presentation, KTheoryError> {
    let gate = injectivity_gate(q)?;
    let t = arquiver::ar_matrix(q)?;
    let n = t.col_labels.len();
    let coker_part = coker_units_expression(&t.matrix, spec)?;
    let expression = coker_part.clone().direct_sum(GroupExpression::of(vec![opaque_g()]));
    let certificate = InjectivityCertificate {
        det_t_prime: gate.det.clone(),
        positive: true,
        sequences: vec![format!(
            "exact: (k^x)^{n} -> K1(C^⊕) -> K1'(R) -> Z^{n} --T--> Z^{} (tail injective: det T' = {} > 0)",
            n + 1,
            gate.det
        )],
        opaque_nodes: vec![],
    };
    Ok(K1Presentation {
        expression,
        coker_part,
        certificate,
    })
}

/// `K1` of the split-exact category of MCM modules:
/// `coker(T·id_{k^x}) ⊕ G`. No determinant gate is involved.
pub fn k1_additive_category(
    q: &ARQuiver,
    spec: &CoefficientSpec,
) -> Result<GroupExpression, KTheoryError> {
    let t = arquiver::ar_matrix(q)?;
    let coker_part = coker_units_expression(&t.matrix, spec)?;
    Ok(coker_part.direct_sum(GroupExpression::of(vec![opaque_g()])))
}

/// Presentation of `K1(MF)` as an extension
/// `0 -> coker(T'·id_{k^x}) -> K1(MF) -> k^+ -> 0`.
///
/// The extension is never split silently: it collapses only when the
/// kernel term is trivial, or (in finite-field mode) because the kernel
/// order divides a power of `q - 1` and is therefore coprime to `|k^+|`.
pub fn k1_mf_presentation(
    q: &ARQuiver,
    spec: &CoefficientSpec,
) -> Result<K1Presentation, KTheoryError> {
    let gate = injectivity_gate(q)?;
    let tp = arquiver::deleted_ar_matrix(q)?;
    let n = tp.col_labels.len();
    let kernel = coker_units_expression(&tp.matrix, spec)?;

    let expression = match spec {
        CoefficientSpec::Symbolic => {
            if kernel.is_trivial_expression() {
                GroupExpression::of(vec![Atom::Additive("k".to_string())])
            } else {
                GroupExpression::of(vec![Atom::opaque(
                    "K1(MF)",
                    &[&format!("exact: 0 -> {kernel} -> K1(MF) -> k^+ -> 0")],
                )])
            }
        }
        CoefficientSpec::FiniteField(q_val) => {
            let (p, e) = prime_power(*q_val).ok_or(KTheoryError::NotPrimePower(*q_val))?;
            let additive: Vec<Atom> = (0..e).map(|_| Atom::Cyclic(p)).collect();
            // kernel orders divide powers of q-1, coprime to p, so the
            // extension splits
            kernel.clone().direct_sum(GroupExpression::of(additive))
        }
    };

    let certificate = InjectivityCertificate {
        det_t_prime: gate.det.clone(),
        positive: true,
        sequences: vec![
            format!("exact: 0 -> {kernel} -> K1(MF) -> k^+ -> 0"),
            format!(
                "exact: (k^x)^{n} -> K1(X) -> K1(MF) -> Z^{n} --T'--> Z^{n} (tail injective: det T' = {} > 0)",
                gate.det
            ),
        ],
        opaque_nodes: vec![Atom::opaque(
            "K1(X)",
            &[
                "exact: (k^x)^n -> K1(X) -> k^+ -> 0 (head injective)",
                "exact: K1(C^⊕) -> K1(X) -> Z -> Z^(n+1)",
            ],
        )],
    };
    Ok(K1Presentation {
        expression,
        coker_part: kernel,
        certificate,
    })
}
