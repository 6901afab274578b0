//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::expr::Q;

/// Row echelon basis built one row at a time. Rows are kept fully reduced
/// and sorted by pivot column, so the final state is the reduced row
/// echelon form of everything inserted.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<(usize, Vec<Q>)>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }

    fn reduce(&self, row: &mut [Q]) {
        for (p, r) in &self.rows {
            if row[*p].is_zero() {
                continue;
            }
            let k = row[*p].clone();
            for (x, y) in row.iter_mut().zip(r) {
                if !y.is_zero() {
                    *x -= &k * y;
                }
            }
        }
    }

    /// Adds a row; returns false if it was already in the span.
    pub fn insert(&mut self, mut row: Vec<Q>) -> bool {
        assert_eq!(row.len(), self.ncols);
        self.reduce(&mut row);
        let Some(p) = row.iter().position(|x| !x.is_zero()) else { return false };
        let lead = row[p].clone();
        for x in row.iter_mut() {
            *x /= &lead;
        }
        for (_, r) in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let k = r[p].clone();
                for (x, y) in r.iter_mut().zip(&row) {
                    if !y.is_zero() {
                        *x -= &k * y;
                    }
                }
            }
        }
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, row));
        true
    }

    /// Nullspace basis: one vector per free column, with that column set to
    /// one, in increasing column order.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let pivots = self.pivots();
        let mut out = Vec::new();
        for free in (0..self.ncols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Q::zero(); self.ncols];
            v[free] = Q::one();
            for (p, r) in &self.rows {
                v[*p] = -r[free].clone();
            }
            out.push(v);
        }
        out
    }
}

pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.nullspace()
}

pub fn rank(rows: &[Vec<Q>], ncols: usize) -> usize {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// A solution of `A x = b` (free variables set to zero), or `None` if the
/// system is inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let mut e = Echelon::new(ncols + 1);
    for (r, bi) in a.iter().zip(b) {
        let mut row = r.clone();
        row.push(bi.clone());
        e.insert(row);
    }
    if e.pivots().contains(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (p, r) in &e.rows {
        x[*p] = r[ncols].clone();
    }
    Some(x)
}

/// Scales a vector to coprime integers with a positive first non-zero entry.
pub fn integer_rescale(v: &[Q]) -> Vec<Q> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        g = -g;
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

pub type Matrix = Vec<Vec<Q>>;

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * &b[k][j];
            }
        }
    }
    out
}

pub fn is_zero_matrix(a: &Matrix) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// True if `a^n = 0` for the matrix size `n`.
pub fn is_nilpotent(a: &Matrix) -> bool {
    let mut p = a.clone();
    for _ in 1..a.len().max(1) {
        if is_zero_matrix(&p) {
            return true;
        }
        p = mat_mul(&p, a);
    }
    is_zero_matrix(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn row(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|x| q(*x)).collect()
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = vec![row(&[1, 2, 3, 4]), row(&[2, 4, 6, 8]), row(&[0, 1, 1, 0])];
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &a {
                let s: Q = r.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn empty_system_gives_identity_basis() {
        let ns = nullspace(&[], 3);
        assert_eq!(ns, vec![row(&[1, 0, 0]), row(&[0, 1, 0]), row(&[0, 0, 1])]);
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = vec![row(&[1, 1]), row(&[1, -1])];
        assert_eq!(solve(&a, &row(&[2, 0]), 2), Some(row(&[1, 1])));
        let b = vec![row(&[1, 1]), row(&[2, 2])];
        assert_eq!(solve(&b, &row(&[1, 3]), 2), None);
    }

    #[test]
    fn rescale() {
        let v = vec![Q::new(1.into(), 2.into()), Q::new((-1).into(), 3.into()), q(0)];
        assert_eq!(integer_rescale(&v), row(&[3, -2, 0]));
        assert_eq!(integer_rescale(&row(&[0, -4, 6])), row(&[0, 2, -3]));
    }

    #[test]
    fn nilpotency() {
        assert!(is_nilpotent(&vec![row(&[0, 1]), row(&[0, 0])]));
        assert!(!is_nilpotent(&vec![row(&[1, 0]), row(&[0, 0])]));
    }
}
