//! Small exact integer/rational linear algebra.

use num_traits::Zero;

use crate::rational::Q;

/// Column reduction of an integer relation matrix R (rows = relations).
///
/// Column operations V bring R to a form where each row has a single
/// pivot column and every non-pivot column is zero. Coordinates of a row
/// vector c modulo the row span are the non-pivot entries of c·V.
#[derive(Clone, Debug)]
pub struct ColumnReduction {
    pub n: usize,
    pub pivots: Vec<Option<usize>>,
    pub v: Vec<Vec<i64>>,
    pub vinv: Vec<Vec<i64>>,
    /// R·V, kept for solving.
    pub reduced: Vec<Vec<i64>>,
}

impl ColumnReduction {
    /// `prefs[i]` lists preferred pivot columns for row i, tried first when they hold a ±1.
    pub fn new(rel: &[Vec<i64>], n: usize, prefs: &[Vec<usize>]) -> Self {
        let mut r: Vec<Vec<i64>> = rel.to_vec();
        let mut v = identity(n);
        let mut vinv = identity(n);
        let mut used = vec![false; n];
        let mut pivots = Vec::new();
        for i in 0..r.len() {
            let pref: &[usize] = prefs.get(i).map(|p| p.as_slice()).unwrap_or(&[]);
            let rank_of = |c: usize| pref.iter().position(|&x| x == c).unwrap_or(pref.len() + c);
            let unit = (0..n)
                .filter(|&c| !used[c] && r[i][c].abs() == 1)
                .min_by_key(|&c| rank_of(c));
            let p = match unit {
                Some(p) => Some(p),
                None => loop {
                    let nz: Vec<usize> = (0..n).filter(|&c| !used[c] && r[i][c] != 0).collect();
                    if nz.is_empty() {
                        break None;
                    }
                    let p = *nz.iter().min_by_key(|&&c| (r[i][c].abs(), rank_of(c))).unwrap();
                    if nz.len() == 1 {
                        break Some(p);
                    }
                    for &c in &nz {
                        if c != p {
                            let f = r[i][c].div_euclid(r[i][p]);
                            col_add(&mut r, &mut v, &mut vinv, c, p, -f);
                        }
                    }
                },
            };
            if let Some(p) = p {
                let a = r[i][p];
                if a.abs() == 1 {
                    for c in 0..n {
                        if c != p && !used[c] && r[i][c] != 0 {
                            let f = r[i][c] * a;
                            col_add(&mut r, &mut v, &mut vinv, c, p, -f);
                        }
                    }
                }
                used[p] = true;
            }
            pivots.push(p);
        }
        ColumnReduction { n, pivots, v, vinv, reduced: r }
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.n).filter(|c| !self.pivots.contains(&Some(*c))).collect()
    }

    /// True when every pivot is ±1, i.e. the quotient is free with the free columns as basis.
    pub fn unimodular(&self) -> bool {
        self.pivots
            .iter()
            .enumerate()
            .all(|(i, p)| p.map(|p| self.reduced[i][p].abs() == 1).unwrap_or(false))
    }

    pub fn coords(&self, c: &[i64]) -> Vec<i64> {
        self.free_columns()
            .into_iter()
            .map(|j| (0..self.n).map(|k| c[k] * self.v[k][j]).sum())
            .collect()
    }

    pub fn basis_row(&self, j: usize) -> Vec<i64> {
        self.vinv[j].clone()
    }
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

/// col_c += f·col_p on r and v; matching row operation on vinv.
fn col_add(r: &mut [Vec<i64>], v: &mut [Vec<i64>], vinv: &mut [Vec<i64>], c: usize, p: usize, f: i64) {
    if f == 0 {
        return;
    }
    for row in r.iter_mut() {
        row[c] += f * row[p];
    }
    for row in v.iter_mut() {
        row[c] += f * row[p];
    }
    let n = vinv.len();
    for k in 0..n {
        let x = vinv[c][k];
        vinv[p][k] -= f * x;
    }
}

/// Integer solution of A x = b, if one exists.
pub fn solve_int(a: &[Vec<i64>], b: &[i64]) -> Option<Vec<i64>> {
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let red = ColumnReduction::new(a, n, &[]);
    // after reduction: row i = Σ_{pivots p of rows <= i} L[i][p] y_p
    let mut y = vec![0i64; n];
    for i in 0..a.len() {
        let mut rest = b[i];
        for (k, p) in red.pivots.iter().enumerate() {
            if k < i {
                if let Some(p) = p {
                    rest -= red.reduced[i][*p] * y[*p];
                }
            }
        }
        match red.pivots[i] {
            Some(p) => {
                let d = red.reduced[i][p];
                if rest % d != 0 {
                    return None;
                }
                y[p] = rest / d;
            }
            None => {
                if rest != 0 {
                    return None;
                }
            }
        }
    }
    Some((0..n).map(|k| (0..n).map(|j| red.v[k][j] * y[j]).sum()).collect())
}

/// Rank over Q.
pub fn rank_q(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &piv;
                for k in c..ncols {
                    let x = &m[rank][k] * &f;
                    m[r][k] -= x;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Basis of {c : Σ_j c_j·cols[j] = 0} over Q.
pub fn nullspace_q(cols: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = cols.len();
    let rows = cols.first().map(|c| c.len()).unwrap_or(0);
    let mut m: Vec<Vec<Q>> = (0..rows).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        for k in c..n {
            m[rank][k] = &m[rank][k] / &piv;
        }
        for r in 0..rows {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in c..n {
                    let x = &m[rank][k] * &f;
                    m[r][k] -= x;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); n];
            v[free] = Q::from_integer(1.into());
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

/// Determinant of a small integer matrix (Bareiss).
pub fn det(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    (sign * m[n - 1][n - 1]) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn reduction_without_unit_pivot() {
        // 5x = 3y + 2z  ->  quotient Z^2
        let red = ColumnReduction::new(&[vec![5, -3, -2]], 3, &[]);
        assert!(red.unimodular());
        assert_eq!(red.free_columns().len(), 2);
        assert_eq!(red.coords(&[5, -3, -2]), vec![0, 0]);
        for j in red.free_columns() {
            let b = red.basis_row(j);
            let c = red.coords(&b);
            let want: Vec<i64> = red.free_columns().iter().map(|&k| (k == j) as i64).collect();
            assert_eq!(c, want);
        }
    }

    #[test]
    fn solve_small() {
        let x = solve_int(&[vec![2, 3]], &[1]).unwrap();
        assert_eq!(2 * x[0] + 3 * x[1], 1);
        assert!(solve_int(&[vec![2, 4]], &[1]).is_none());
        let x = solve_int(&[vec![1, 1], vec![2, 2]], &[3, 6]).unwrap();
        assert_eq!(x[0] + x[1], 3);
        assert!(solve_int(&[vec![1, 1], vec![2, 2]], &[3, 5]).is_none());
    }

    #[test]
    fn rank_and_det() {
        assert_eq!(rank_q(&[vec![qi(1), qi(2)], vec![qi(2), qi(4)]]), 1);
        assert_eq!(det(&[vec![2, 1], vec![1, 1]]), 1);
        assert_eq!(det(&[vec![0, 1], vec![1, 0]]), -1);
    }

    #[test]
    fn nullspace_of_dependent_columns() {
        let cols = vec![vec![qi(1), qi(0)], vec![qi(2), qi(0)], vec![qi(0), qi(1)]];
        let ns = nullspace_q(&cols);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![qi(-2), qi(1), qi(0)]);
    }
}
