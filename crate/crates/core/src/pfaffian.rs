//! Skew-symmetric matrices over GF(p) and their Pfaffians.

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeModulus};

/// Largest order accepted by [`pfaffian_combinatorial`]; (11)!! = 10395 terms.
pub const COMBINATORIAL_ORDER_LIMIT: usize = 12;

/// Dense skew-symmetric matrix of even order over GF(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMatrix {
    order: usize,
    entries: Vec<u64>,
    modulus: PrimeModulus,
}

impl SkewMatrix {
    pub fn zeros(order: usize, modulus: PrimeModulus) -> Result<Self> {
        if !order.is_multiple_of(2) {
            return Err(Error::OddOrder(order));
        }
        Ok(SkewMatrix {
            order,
            entries: vec![0; order * order],
            modulus,
        })
    }

    /// Builds a matrix from full rows, checking skew-symmetry.
    pub fn from_rows(modulus: PrimeModulus, rows: &[Vec<u64>]) -> Result<Self> {
        let order = rows.len();
        let mut m = SkewMatrix::zeros(order, modulus)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::NotSkewSymmetric { row: i, col: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m.entries[i * order + j] = modulus.reduce(v);
            }
        }
        for i in 0..order {
            for j in i..order {
                let (a, b) = (m.entries[i * order + j], m.entries[j * order + i]);
                if modulus.add(a, b) != 0 {
                    return Err(Error::NotSkewSymmetric { row: i, col: j });
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.modulus.element(self.entries[i * self.order + j])
    }

    /// Sets entry `(i, j)` to `value` and `(j, i)` to `-value`.
    pub fn set(&mut self, i: usize, j: usize, value: FieldElement) {
        assert_eq!(value.modulus(), self.modulus, "entry from a different field");
        assert!(i != j || value.is_zero(), "diagonal of a skew matrix is zero");
        let n = self.order;
        self.entries[i * n + j] = value.value();
        self.entries[j * n + i] = self.modulus.neg(value.value());
    }

    /// Simultaneous row and column permutation: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> SkewMatrix {
        assert_eq!(perm.len(), self.order);
        let n = self.order;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.entries[perm[i] * n + perm[j]];
            }
        }
        SkewMatrix {
            order: n,
            entries,
            modulus: self.modulus,
        }
    }

    /// Row-major residues.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries
            .chunks(self.order.max(1))
            .map(|r| r.to_vec())
            .take(self.order)
            .collect()
    }
}

/// Pfaffian by skew-symmetric elimination, O(n^3) field operations.
///
/// At step `k` the pivot `A[k][k+1]` is made nonzero by swapping index `k+1` with
/// some later index (each swap negates the result). Congruence updates then clear
/// rows `k` and `k+1`, leaving `Pf(A) = A[k][k+1] * Pf(A')` on the trailing block.
pub fn pfaffian(a: &SkewMatrix) -> FieldElement {
    let m = a.modulus;
    let n = a.order;
    let mut w = a.entries.clone();
    let mut acc = 1u64;
    let mut negate = false;

    for k in (0..n).step_by(2) {
        let row = k * n;
        let Some(piv) = (k + 1..n).find(|&j| w[row + j] != 0) else {
            return m.zero();
        };
        if piv != k + 1 {
            swap_index(&mut w, n, k + 1, piv);
            negate = !negate;
        }
        let pivot = w[row + k + 1];
        acc = m.mul(acc, pivot);
        if k + 2 == n {
            break;
        }
        let inv = m.inv(pivot).expect("pivot is nonzero");
        // A'[i][j] = A[i][j] + (A[k+1][i] A[k][j] - A[k][i] A[k+1][j]) / A[k][k+1]
        let next = (k + 1) * n;
        let scaled_k: Vec<u64> = (0..n).map(|j| m.mul(w[row + j], inv)).collect();
        let scaled_k1: Vec<u64> = (0..n).map(|j| m.mul(w[next + j], inv)).collect();
        for i in k + 2..n {
            let (ak1_i, ak_i) = (w[next + i], w[row + i]);
            if ak1_i == 0 && ak_i == 0 {
                continue;
            }
            let ri = i * n;
            for j in i + 1..n {
                let delta = m.sub(m.mul(ak1_i, scaled_k[j]), m.mul(ak_i, scaled_k1[j]));
                if delta != 0 {
                    let v = m.add(w[ri + j], delta);
                    w[ri + j] = v;
                    w[j * n + i] = m.neg(v);
                }
            }
        }
    }
    let pf = m.element(acc);
    if negate {
        -pf
    } else {
        pf
    }
}

// Exchanges index `a` and `b` in both rows and columns.
fn swap_index(w: &mut [u64], n: usize, a: usize, b: usize) {
    for j in 0..n {
        w.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        w.swap(i * n + a, i * n + b);
    }
}

/// Pfaffian as the signed sum over all perfect matchings of the index set.
///
/// Each matching `{i1,j1},...,{in,jn}` with `i_t < j_t` and `i1 < i2 < ...` is read
/// as the permutation `(i1 j1 i2 j2 ... in jn)`; its sign is the parity of that
/// sequence. Only for small orders: the sum has `(order-1)!!` terms.
pub fn pfaffian_combinatorial(a: &SkewMatrix) -> Result<FieldElement> {
    if a.order > COMBINATORIAL_ORDER_LIMIT {
        return Err(Error::OracleSizeLimit {
            order: a.order,
            limit: COMBINATORIAL_ORDER_LIMIT,
        });
    }
    let mut total = a.modulus.zero();
    let mut used = vec![false; a.order];
    let mut seq = Vec::with_capacity(a.order);
    accumulate_matchings(a, &mut used, &mut seq, &mut total);
    Ok(total)
}

fn accumulate_matchings(a: &SkewMatrix, used: &mut [bool], seq: &mut Vec<usize>, total: &mut FieldElement) {
    let Some(i) = used.iter().position(|&u| !u) else {
        let mut term = a.modulus.one();
        for pair in seq.chunks(2) {
            term *= a.get(pair[0], pair[1]);
        }
        if inversion_count(seq) % 2 == 1 {
            term = -term;
        }
        *total += term;
        return;
    };
    used[i] = true;
    for j in i + 1..used.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        seq.push(i);
        seq.push(j);
        accumulate_matchings(a, used, seq, total);
        seq.truncate(seq.len() - 2);
        used[j] = false;
    }
    used[i] = false;
}

fn inversion_count(seq: &[usize]) -> usize {
    let mut count = 0;
    for (x, &a) in seq.iter().enumerate() {
        count += seq[x + 1..].iter().filter(|&&b| b < a).count();
    }
    count
}
