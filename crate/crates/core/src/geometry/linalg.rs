//! Integer vector helpers for the homogenized cone representation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) type Int = BigInt;
pub(crate) type Vector = Vec<Int>;

pub(crate) fn dot(a: &[Int], b: &[Int]) -> Int {
    let mut acc = Int::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub(crate) fn is_zero(v: &[Int]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Divides by the gcd of the entries, keeping orientation.
pub(crate) fn normalize(v: &mut [Int]) {
    let mut g = Int::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x = &*x / &g;
        }
    }
}

/// Normalizes and flips so that the first nonzero entry is positive.
pub(crate) fn normalize_unsigned(v: &mut [Int]) {
    normalize(v);
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -&*x;
            }
        }
    }
}

/// `a_coef * a + b_coef * b`, normalized.
pub(crate) fn combine(a_coef: &Int, a: &[Int], b_coef: &Int, b: &[Int]) -> Vector {
    let mut out: Vector = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let mut acc = Int::zero();
            if !x.is_zero() {
                acc += a_coef * x;
            }
            if !y.is_zero() {
                acc += b_coef * y;
            }
            acc
        })
        .collect();
    normalize(&mut out);
    out
}

/// Integer basis of `{ y : row · y = 0 for every row }`.
pub(crate) fn nullspace(rows: &[Vector], dim: usize) -> Vec<Vector> {
    // Fraction-free Gauss-Jordan on a copy of the rows.
    let mut m: Vec<Vector> = rows.iter().filter(|r| !is_zero(r)).cloned().collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        let pv = pivot_row[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            let combined = combine(&pv, row, &(-f), &pivot_row);
            *row = combined;
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    let mut basis = Vec::new();
    for free in (0..dim).filter(|c| !pivots.contains(c)) {
        // y[free] = L, y[pivot_i] = -m[i][free] * L / m[i][pivot_i]
        let mut lcm = Int::one();
        for (i, &pc) in pivots.iter().enumerate() {
            if !m[i][free].is_zero() {
                lcm = lcm.lcm(&m[i][pc].abs());
            }
        }
        let mut y = vec![Int::zero(); dim];
        y[free] = lcm.clone();
        for (i, &pc) in pivots.iter().enumerate() {
            if !m[i][free].is_zero() {
                y[pc] = -(&m[i][free] * &lcm) / &m[i][pc];
            }
        }
        normalize_unsigned(&mut y);
        basis.push(y);
    }
    basis
}

/// Rank of a set of vectors.
pub(crate) fn rank(rows: &[Vector], dim: usize) -> usize {
    dim - nullspace(rows, dim).len()
}

/// Reduces a list of vectors to a linearly independent subset spanning the same space.
pub(crate) fn independent_subset(vectors: &[Vector], dim: usize) -> Vec<Vector> {
    let mut kept: Vec<Vector> = Vec::new();
    for v in vectors {
        if is_zero(v) {
            continue;
        }
        let mut trial = kept.clone();
        trial.push(v.clone());
        if rank(&trial, dim) == trial.len() {
            kept = trial;
        }
    }
    kept
}
