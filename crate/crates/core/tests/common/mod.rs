//! Self-contained oracles for the integration suites. Everything here is
//! deliberately independent of the library's normal-form code paths:
//! determinants come from cofactor expansion, diagonal forms from a plain
//! Euclidean row-echelon loop alternated with its transpose, invariant
//! factors from per-prime regrouping, and finite-field arithmetic from
//! brute-force polynomial tables.

use cmk::zmodule::IntegerMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn to_rows(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect())
        .collect()
}

/// Determinant by direct cofactor expansion along the first row.
pub fn det_cofactor(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    assert!(a.iter().all(|row| row.len() == n), "square input expected");
    if n == 1 {
        return a[0][0].clone();
    }
    let mut det = BigInt::zero();
    for (j, entry) in a[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = entry * det_cofactor(&minor);
        if j % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

fn transpose(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if a.is_empty() {
        return Vec::new();
    }
    let cols = a[0].len();
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Row echelon over Z by repeated Euclidean remainder steps; row swaps,
/// row negations, and integer row subtractions only.
fn row_echelon(mut a: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            // pull the smallest nonzero magnitude in this column up to row r
            let mut best: Option<usize> = None;
            for (i, row) in a.iter().enumerate().skip(r) {
                if row[c].is_zero() {
                    continue;
                }
                match best {
                    Some(b) if a[b][c].abs() <= row[c].abs() => {}
                    _ => best = Some(i),
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let pivot_row = a[r].clone();
            let mut any_left = false;
            for row in a.iter_mut().skip(r + 1) {
                if row[c].is_zero() {
                    continue;
                }
                let q = &row[c] / &pivot_row[c];
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst -= &q * src;
                }
                if !row[c].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                break;
            }
        }
        if !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for e in a[r].iter_mut() {
                    *e = -e.clone();
                }
            }
            r += 1;
        }
    }
    a
}

fn is_diagonal(a: &[Vec<BigInt>]) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, e)| i == j || e.is_zero()))
}

/// Diagonal form by alternating row and column echelon passes. Returns the
/// full main diagonal, zeros included.
pub fn diagonal_via_alternating_echelon(m: &IntegerMatrix) -> Vec<BigInt> {
    let mut a = to_rows(m);
    for _ in 0..1000 {
        a = row_echelon(a);
        if is_diagonal(&a) {
            break;
        }
        a = transpose(&row_echelon(transpose(&a)));
        if is_diagonal(&a) {
            break;
        }
    }
    assert!(is_diagonal(&a), "alternating echelon did not converge");
    let n = a.len().min(if a.is_empty() { 0 } else { a[0].len() });
    (0..n).map(|i| a[i][i].abs()).collect()
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Invariant factors (ascending) from an arbitrary list of cyclic orders,
/// by regrouping prime powers: independent reimplementation for
/// cross-checking.
pub fn regroup_invariants(orders: &[u64]) -> Vec<u64> {
    let mut per_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
    for &o in orders {
        if o > 1 {
            for (p, e) in factor(o) {
                per_prime.entry(p).or_default().push(e);
            }
        }
    }
    let width = per_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut chain = vec![1u64; width];
    for (p, mut exps) in per_prime {
        exps.sort_unstable();
        // align the largest exponent with the last invariant factor
        let offset = width - exps.len();
        for (i, e) in exps.into_iter().enumerate() {
            chain[offset + i] *= p.pow(e);
        }
    }
    chain.retain(|&d| d > 1);
    chain
}

/// `(free rank, ascending invariant factors)` of the cokernel of `m`,
/// through the alternating-echelon diagonal form and prime regrouping.
pub fn cokernel_via_echelon_oracle(m: &IntegerMatrix) -> (usize, Vec<u64>) {
    let diag = diagonal_via_alternating_echelon(m);
    let nonzero: Vec<u64> = diag
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| d.to_u64().expect("oracle diagonal fits u64"))
        .collect();
    let free_rank = m.rows() - nonzero.len();
    (free_rank, regroup_invariants(&nonzero))
}

/// Finite field of order `q = p^e` for small `q`, with arithmetic tables
/// built from a brute-force search for an irreducible polynomial.
pub struct SmallField {
    pub q: usize,
    add: Vec<Vec<usize>>,
    mul: Vec<Vec<usize>>,
}

fn poly_from_index(mut idx: usize, p: u64, len: usize) -> Vec<u64> {
    let mut coeffs = vec![0u64; len];
    for c in coeffs.iter_mut() {
        *c = (idx as u64) % p;
        idx /= p as usize;
    }
    coeffs
}

fn poly_index(coeffs: &[u64], p: u64) -> usize {
    coeffs
        .iter()
        .rev()
        .fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let e = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // reduce by the monic modulus
    for d in (e..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        for (k, &mc) in modulus.iter().enumerate().take(e) {
            let idx = d - e + k;
            prod[idx] = (prod[idx] + c * (p - mc % p)) % p;
        }
    }
    prod.truncate(e.max(1));
    prod
}

fn poly_divides(d: &[u64], n: &[u64], p: u64) -> bool {
    // polynomial remainder of n by monic-normalized d
    let mut rem: Vec<u64> = n.to_vec();
    let dd = d.len() - 1;
    let lead_inv = mod_inverse(d[dd], p);
    while rem.len() > dd {
        let c = (*rem.last().unwrap() * lead_inv) % p;
        let shift = rem.len() - 1 - dd;
        if c != 0 {
            for (k, &dc) in d.iter().enumerate() {
                rem[shift + k] = (rem[shift + k] + c * (p - dc % p)) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p is prime and a nonzero mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    result
}

fn find_irreducible(p: u64, e: u32) -> Vec<u64> {
    // monic degree-e polynomials with no monic divisor of degree 1..=e/2
    let count = (p as usize).pow(e);
    for idx in 0..count {
        let mut candidate = poly_from_index(idx, p, e as usize + 1);
        candidate[e as usize] = 1;
        let mut reducible = false;
        'outer: for d in 1..=(e / 2).max(1) {
            if d == e {
                break;
            }
            let dcount = (p as usize).pow(d);
            for didx in 0..dcount {
                let mut div = poly_from_index(didx, p, d as usize + 1);
                div[d as usize] = 1;
                if poly_divides(&div, &candidate, p) {
                    reducible = true;
                    break 'outer;
                }
            }
        }
        if !reducible {
            return candidate;
        }
    }
    panic!("no irreducible polynomial of degree {e} over F_{p}");
}

impl SmallField {
    pub fn new(q: u64) -> SmallField {
        let (p, e) = prime_power(q).expect("q must be a prime power");
        let qs = q as usize;
        let mut add = vec![vec![0usize; qs]; qs];
        let mut mul = vec![vec![0usize; qs]; qs];
        if e == 1 {
            for (a, row) in add.iter_mut().enumerate() {
                for (b, slot) in row.iter_mut().enumerate() {
                    *slot = (a + b) % qs;
                }
            }
            for (a, row) in mul.iter_mut().enumerate() {
                for (b, slot) in row.iter_mut().enumerate() {
                    *slot = a * b % qs;
                }
            }
        } else {
            let modulus = find_irreducible(p, e);
            for a in 0..qs {
                let pa = poly_from_index(a, p, e as usize);
                for b in 0..qs {
                    let pb = poly_from_index(b, p, e as usize);
                    let sum: Vec<u64> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % p).collect();
                    add[a][b] = poly_index(&sum, p);
                    let prod = poly_mul_mod(&pa, &pb, &modulus, p);
                    mul[a][b] = poly_index(&prod, p);
                }
            }
        }
        SmallField { q: qs, add, mul }
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
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
        p += 1;
    }
    Some((q, 1))
}

/// Number of units of `F_q[t]/(t^2)` by exhaustive search: an element is a
/// unit exactly when some other element multiplies with it to 1 on both
/// sides.
pub fn dual_numbers_unit_count(q: u64) -> u64 {
    let f = SmallField::new(q);
    let n = f.q;
    // (a, b) stands for a + b t; (a,b)(c,d) = (ac, ad + bc)
    let mult = |x: (usize, usize), y: (usize, usize)| {
        (f.mul(x.0, y.0), f.add(f.mul(x.0, y.1), f.mul(x.1, y.0)))
    };
    let one = (1usize, 0usize);
    let mut units = 0;
    for a in 0..n {
        for b in 0..n {
            let x = (a, b);
            let mut invertible = false;
            'search: for c in 0..n {
                for d in 0..n {
                    let y = (c, d);
                    if mult(x, y) == one && mult(y, x) == one {
                        invertible = true;
                        break 'search;
                    }
                }
            }
            if invertible {
                units += 1;
            }
        }
    }
    units
}
