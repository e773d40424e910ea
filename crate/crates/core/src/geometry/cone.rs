//! Incremental double description (Motzkin/Chernikova) on homogenized cones.
//!
//! A polyhedron `P ⊆ Qⁿ` is encoded as the cone `C ⊆ Qⁿ⁺¹` with coordinate 0
//! the homogenizing variable ξ: `P = { x | (1, x) ∈ C }`. A constraint row `c`
//! means `c · y ≥ 0` (or `= 0`), a point `p` becomes the ray `(1, p)`, a ray `r`
//! becomes `(0, r)` and a line `l` becomes the line `(0, l)`.

use num_traits::{Signed, Zero};

use super::linalg::{combine, dot, normalize, normalize_unsigned, Int, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Row {
    pub coeffs: Vector,
    pub eq: bool,
}

impl Row {
    pub fn ineq(mut coeffs: Vector) -> Row {
        normalize(&mut coeffs);
        Row { coeffs, eq: false }
    }

    pub fn eq(mut coeffs: Vector) -> Row {
        normalize_unsigned(&mut coeffs);
        Row { coeffs, eq: true }
    }

    /// `ξ ≥ 0`.
    pub fn positivity(dim: usize) -> Row {
        let mut coeffs = vec![Int::zero(); dim];
        coeffs[0] = Int::from(1);
        Row { coeffs, eq: false }
    }

    /// `0 ≥ 1` in homogenized form, i.e. `-ξ ≥ 0`.
    pub fn falsum(dim: usize) -> Row {
        let mut coeffs = vec![Int::zero(); dim];
        coeffs[0] = Int::from(-1);
        Row { coeffs, eq: false }
    }

    /// True for rows with no variable part (`c₀ ξ ≥ 0` or `c₀ ξ = 0`).
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct BitSet(Vec<u64>);

impl BitSet {
    pub fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << b;
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn is_superset(&self, other: &BitSet) -> bool {
        other.0.iter().enumerate().all(|(i, b)| {
            let a = self.0.get(i).copied().unwrap_or(0);
            a & b == *b
        })
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Cone in double description form.
#[derive(Debug, Clone)]
pub(crate) struct Cone {
    pub dim: usize,
    pub rows: Vec<Row>,
    pub rays: Vec<Vector>,
    pub sat: Vec<BitSet>,
    pub lines: Vec<Vector>,
}

impl Cone {
    /// The whole space: no rows, a basis of lines.
    pub fn universe(dim: usize) -> Cone {
        let lines = (0..dim)
            .map(|i| {
                let mut v = vec![Int::zero(); dim];
                v[i] = Int::from(1);
                v
            })
            .collect();
        Cone { dim, rows: Vec::new(), rays: Vec::new(), sat: Vec::new(), lines }
    }

    /// Resumes from a known minimal double description.
    pub fn from_description(dim: usize, rows: Vec<Row>, rays: Vec<Vector>, lines: Vec<Vector>) -> Cone {
        let sat = rays
            .iter()
            .map(|r| {
                let mut s = BitSet::default();
                for (i, row) in rows.iter().enumerate() {
                    if dot(&row.coeffs, r).is_zero() {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        Cone { dim, rows, rays, sat, lines }
    }

    pub fn add_rows<'a>(&mut self, rows: impl IntoIterator<Item = &'a Row>) {
        let rows: Vec<&Row> = rows.into_iter().collect();
        // Equalities first: they only ever shrink the description.
        for row in rows.iter().filter(|r| r.eq) {
            self.add_row((*row).clone());
        }
        for row in rows.iter().filter(|r| !r.eq) {
            self.add_row((*row).clone());
        }
    }

    pub fn add_row(&mut self, row: Row) {
        let idx = self.rows.len();
        let a = row.coeffs.clone();
        let eq = row.eq;
        self.rows.push(row);

        if let Some(li) = self.lines.iter().position(|l| !dot(&a, l).is_zero()) {
            let line = self.lines.swap_remove(li);
            let al = dot(&a, &line);
            let al_abs = al.abs();
            for other in self.lines.iter_mut() {
                let ao = dot(&a, other);
                if !ao.is_zero() {
                    *other = combine(&al, other, &(-ao), &line);
                }
            }
            for (ray, sat) in self.rays.iter_mut().zip(self.sat.iter_mut()) {
                let ar = dot(&a, ray);
                if !ar.is_zero() {
                    let coef = if al.is_negative() { ar.clone() } else { -ar.clone() };
                    *ray = combine(&al_abs, ray, &coef, &line);
                }
                sat.insert(idx);
            }
            if !eq {
                let mut new_ray = line;
                if al.is_negative() {
                    for x in new_ray.iter_mut() {
                        *x = -&*x;
                    }
                }
                normalize(&mut new_ray);
                let mut s = BitSet::default();
                for i in 0..idx {
                    s.insert(i);
                }
                self.rays.push(new_ray);
                self.sat.push(s);
            }
            return;
        }

        let products: Vec<Int> = self.rays.iter().map(|r| dot(&a, r)).collect();
        let pos: Vec<usize> = (0..self.rays.len()).filter(|&i| products[i].is_positive()).collect();
        let neg: Vec<usize> = (0..self.rays.len()).filter(|&i| products[i].is_negative()).collect();
        if neg.is_empty() && (!eq || pos.is_empty()) {
            for (i, s) in self.sat.iter_mut().enumerate() {
                if products[i].is_zero() {
                    s.insert(idx);
                }
            }
            return;
        }

        let min_common = self.dim.saturating_sub(self.lines.len() + 2);
        let mut new_rays: Vec<Vector> = Vec::new();
        let mut new_sat: Vec<BitSet> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = self.sat[p].intersection(&self.sat[q]);
                if common.count() < min_common {
                    continue;
                }
                let adjacent = (0..self.rays.len())
                    .all(|r| r == p || r == q || !self.sat[r].is_superset(&common));
                if !adjacent {
                    continue;
                }
                let ray = combine(&products[p], &self.rays[q], &(-products[q].clone()), &self.rays[p]);
                let mut s = common;
                s.insert(idx);
                new_rays.push(ray);
                new_sat.push(s);
            }
        }

        let mut kept_rays = Vec::with_capacity(self.rays.len() + new_rays.len());
        let mut kept_sat = Vec::with_capacity(self.rays.len() + new_rays.len());
        let rays = std::mem::take(&mut self.rays);
        let sats = std::mem::take(&mut self.sat);
        for ((ray, mut s), prod) in rays.into_iter().zip(sats).zip(&products) {
            if prod.is_zero() {
                s.insert(idx);
                kept_rays.push(ray);
                kept_sat.push(s);
            } else if prod.is_positive() && !eq {
                kept_rays.push(ray);
                kept_sat.push(s);
            }
        }
        kept_rays.extend(new_rays);
        kept_sat.extend(new_sat);
        self.rays = kept_rays;
        self.sat = kept_sat;
    }

    /// Some ray has a positive homogenizing coordinate.
    pub fn has_point(&self) -> bool {
        self.rays.iter().any(|r| r[0].is_positive())
    }
}

/// Dual conversion: constraints (inequalities, equalities) of `cone(rays) + span(lines)`.
pub(crate) fn constraints_of(dim: usize, rays: &[Vector], lines: &[Vector]) -> (Vec<Vector>, Vec<Vector>) {
    let mut dual = Cone::universe(dim);
    for l in lines {
        dual.add_row(Row::eq(l.clone()));
    }
    for r in rays {
        dual.add_row(Row::ineq(r.clone()));
    }
    (dual.rays, dual.lines)
}
