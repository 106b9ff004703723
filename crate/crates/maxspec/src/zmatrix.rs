//! Integer matrix normal forms for subgroup computations: row Hermite form
//! with a tracked unimodular transform (basis, rank, left kernel, membership
//! certificates) and Smith elementary divisors (freeness checks).
//!
//! Desk-scale matrices only; entries are widened to i128 so the Euclidean
//! reductions cannot overflow on any input this crate produces.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("computation cancelled")]
pub struct Cancelled;

/// Cooperative cancellation handle checked inside reduction loops.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> CancelToken {
        CancelToken::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }

    fn check(&self) -> Result<(), Cancelled> {
        if self.is_cancelled() {
            Err(Cancelled)
        } else {
            Ok(())
        }
    }
}

/// Row Hermite normal form `u * a = h` with `u` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    pub h: Vec<Vec<i128>>,
    pub u: Vec<Vec<i128>>,
    /// Pivot column of each of the first `rank` rows of `h`.
    pub pivots: Vec<usize>,
    pub rank: usize,
}

fn identity(m: usize) -> Vec<Vec<i128>> {
    (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn row_sub(rows: &mut [Vec<i128>], target: usize, source: usize, q: i128) {
    if q == 0 {
        return;
    }
    let (lo, hi) = if target < source {
        let (a, b) = rows.split_at_mut(source);
        (&mut a[target], &b[0])
    } else {
        let (a, b) = rows.split_at_mut(target);
        (&mut b[0], &a[source])
    };
    for (t, s) in lo.iter_mut().zip(hi.iter()) {
        *t -= q * *s;
    }
}

/// Reduces `a` to row echelon form over the integers: pivots positive,
/// entries above each pivot reduced into `[0, pivot)`, zero rows last.
pub fn hermite(a: &[Vec<i128>], cancel: &CancelToken) -> Result<Hnf, Cancelled> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut h: Vec<Vec<i128>> = a.to_vec();
    let mut u = identity(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        // euclidean elimination below row r in this column
        loop {
            cancel.check()?;
            let jmin = (r..m)
                .filter(|&j| h[j][col] != 0)
                .min_by_key(|&j| h[j][col].abs());
            let Some(jmin) = jmin else {
                break;
            };
            h.swap(r, jmin);
            u.swap(r, jmin);
            let mut done = true;
            for j in r + 1..m {
                if h[j][col] != 0 {
                    let q = h[j][col].div_euclid(h[r][col]);
                    row_sub(&mut h, j, r, q);
                    row_sub(&mut u, j, r, q);
                    if h[j][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[r][col] == 0 {
            continue;
        }
        if h[r][col] < 0 {
            for x in &mut h[r] {
                *x = -*x;
            }
            for x in &mut u[r] {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = h[i][col].div_euclid(h[r][col]);
            row_sub(&mut h, i, r, q);
            row_sub(&mut u, i, r, q);
        }
        pivots.push(col);
        r += 1;
    }
    Ok(Hnf {
        h,
        u,
        pivots,
        rank: r,
    })
}

impl Hnf {
    /// Nonzero echelon rows: a basis of the row space.
    pub fn basis(&self) -> &[Vec<i128>] {
        &self.h[..self.rank]
    }

    /// Basis of `{x : x * a = 0}`: the transform rows over the zero rows.
    pub fn left_kernel(&self) -> Vec<Vec<i128>> {
        self.u[self.rank..].to_vec()
    }

    /// Solves `x * a = b` over the integers; `None` when `b` is not in the
    /// row space. The solution is a certificate in the original row indices.
    pub fn solve_left(&self, b: &[i128]) -> Option<Vec<i128>> {
        let m = self.u.len();
        let mut rem: Vec<i128> = b.to_vec();
        let mut x = vec![0i128; m];
        for (row, &col) in self.pivots.iter().enumerate() {
            let p = self.h[row][col];
            if rem[col] % p != 0 {
                return None;
            }
            let c = rem[col] / p;
            if c != 0 {
                for (t, s) in rem.iter_mut().zip(&self.h[row]) {
                    *t -= c * *s;
                }
                for (t, s) in x.iter_mut().zip(&self.u[row]) {
                    *t += c * *s;
                }
            }
        }
        rem.iter().all(|&v| v == 0).then_some(x)
    }
}

/// Elementary divisors d_1 | d_2 | … (positive, one per nonzero Smith
/// diagonal entry).
pub fn smith_divisors(a: &[Vec<i128>], cancel: &CancelToken) -> Result<Vec<i128>, Cancelled> {
    let mut m: Vec<Vec<i128>> = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut divisors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        cancel.check()?;
        // move a minimal nonzero entry of the trailing block to (t,t)
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0
                    && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else {
            break;
        };
        m.swap(t, bi);
        for row in &mut m {
            row.swap(t, bj);
        }
        // clear row and column t; restart whenever a remainder appears
        let mut dirty = false;
        for i in t + 1..rows {
            if m[i][t] != 0 {
                let q = m[i][t].div_euclid(m[t][t]);
                row_sub(&mut m, i, t, q);
                if m[i][t] != 0 {
                    dirty = true;
                }
            }
        }
        for j in t + 1..cols {
            if m[t][j] != 0 {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    for row in m.iter_mut() {
                        let s = row[t];
                        row[j] -= q * s;
                    }
                }
                if m[t][j] != 0 {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // enforce divisibility of the trailing block by the pivot
        let d = m[t][t].abs();
        let offender = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| m[i][j] % d != 0);
        if let Some((i, _)) = offender {
            row_sub(&mut m, t, i, -1);
            continue;
        }
        divisors.push(d);
        t += 1;
    }
    Ok(divisors)
}

/// Matrix product of desk-scale integer matrices.
pub fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(&x, br)| x * br[j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wide(a: &[Vec<i64>]) -> Vec<Vec<i128>> {
        a.iter()
            .map(|r| r.iter().map(|&x| i128::from(x)).collect())
            .collect()
    }

    #[test]
    fn hermite_small_example() {
        let a = wide(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let hnf = hermite(&a, &CancelToken::new()).unwrap();
        assert_eq!(hnf.rank, 3);
        assert_eq!(mat_mul(&hnf.u, &a), hnf.h);
        // pivots positive, above-pivot entries reduced
        for (row, &col) in hnf.pivots.iter().enumerate() {
            let p = hnf.h[row][col];
            assert!(p > 0);
            for i in 0..row {
                assert!(hnf.h[i][col] >= 0 && hnf.h[i][col] < p);
            }
        }
    }

    #[test]
    fn kernel_annihilates() {
        let a = wide(&[vec![1, 2], vec![2, 4], vec![0, 1]]);
        let hnf = hermite(&a, &CancelToken::new()).unwrap();
        assert_eq!(hnf.rank, 2);
        let kernel = hnf.left_kernel();
        assert_eq!(kernel.len(), 1);
        for k in &kernel {
            let prod = mat_mul(&[k.clone()], &a);
            assert!(prod[0].iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn solve_left_examples() {
        let a = wide(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let hnf = hermite(&a, &CancelToken::new()).unwrap();
        let x = hnf.solve_left(&[1, 2, 1]).unwrap();
        assert_eq!(mat_mul(&[x], &a)[0], vec![1, 2, 1]);
        // (0,1,0) is not an integer combination
        assert!(hnf.solve_left(&[0, 1, 0]).is_none());
        // zero always solvable, certificate reconstructs zero
        let x = hnf.solve_left(&[0, 0, 0]).unwrap();
        assert!(mat_mul(&[x], &a)[0].iter().all(|&v| v == 0));
    }

    #[test]
    fn smith_examples() {
        let t = CancelToken::new();
        assert_eq!(
            smith_divisors(&wide(&[vec![2, 0], vec![0, 3]]), &t).unwrap(),
            vec![1, 6]
        );
        assert_eq!(
            smith_divisors(&wide(&[vec![2, 4], vec![6, 8]]), &t).unwrap(),
            vec![2, 4]
        );
        assert_eq!(
            smith_divisors(&wide(&[vec![1, 0], vec![0, 1]]), &t).unwrap(),
            vec![1, 1]
        );
        assert_eq!(
            smith_divisors(&wide(&[vec![0, 0], vec![0, 0]]), &t).unwrap(),
            Vec::<i128>::new()
        );
        // divisors of a rank-1 matrix
        assert_eq!(
            smith_divisors(&wide(&[vec![2, 4], vec![4, 8]]), &t).unwrap(),
            vec![2]
        );
    }

    #[test]
    fn cancel_stops_work() {
        let t = CancelToken::new();
        t.cancel();
        let a = wide(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(hermite(&a, &t), Err(Cancelled));
        assert_eq!(smith_divisors(&a, &t), Err(Cancelled));
    }

    fn arb_matrix() -> impl Strategy<Value = Vec<Vec<i128>>> {
        (1usize..5, 1usize..5).prop_flat_map(|(m, n)| {
            prop::collection::vec(prop::collection::vec(-9i128..=9, n..=n), m..=m)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hermite_invariants(a in arb_matrix()) {
            let t = CancelToken::new();
            let hnf = hermite(&a, &t).unwrap();
            prop_assert_eq!(mat_mul(&hnf.u, &a), hnf.h.clone());
            prop_assert_eq!(hnf.rank + hnf.left_kernel().len(), a.len());
            for k in hnf.left_kernel() {
                let prod = mat_mul(&[k], &a);
                prop_assert!(prod[0].iter().all(|&v| v == 0));
            }
            // echelon structure
            for (row, &col) in hnf.pivots.iter().enumerate() {
                prop_assert!(hnf.h[row][col] > 0);
                for before in 0..col {
                    prop_assert_eq!(hnf.h[row][before], 0);
                }
            }
            for zr in hnf.rank..a.len() {
                prop_assert!(hnf.h[zr].iter().all(|&v| v == 0));
            }
        }

        #[test]
        fn solve_roundtrip(a in arb_matrix(), coeff in prop::collection::vec(-4i128..=4, 1..5)) {
            let t = CancelToken::new();
            let hnf = hermite(&a, &t).unwrap();
            let m = a.len();
            let x: Vec<i128> = (0..m).map(|i| coeff.get(i).copied().unwrap_or(0)).collect();
            let b = mat_mul(&[x], &a)[0].clone();
            let solved = hnf.solve_left(&b).expect("combination must be solvable");
            prop_assert_eq!(mat_mul(&[solved], &a)[0].clone(), b);
        }

        #[test]
        fn smith_divides_in_chain(a in arb_matrix()) {
            let t = CancelToken::new();
            let divisors = smith_divisors(&a, &t).unwrap();
            let hnf = hermite(&a, &t).unwrap();
            prop_assert_eq!(divisors.len(), hnf.rank);
            for w in divisors.windows(2) {
                prop_assert!(w[0] > 0 && w[1] % w[0] == 0);
            }
        }
    }
}
