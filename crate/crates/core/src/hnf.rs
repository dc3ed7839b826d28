//! Row Hermite normal form over the integers with a unimodular transform.

pub type IMatrix = Vec<Vec<i128>>;

#[derive(Clone, Debug)]
pub struct Hnf {
    /// Echelon form; the first `rank` rows are nonzero.
    pub h: IMatrix,
    /// Unimodular transform with `u * m = h`.
    pub u: IMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

fn row_axpy(m: &mut IMatrix, dst: usize, src: usize, f: i128) {
    if f == 0 {
        return;
    }
    let (a, b) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x -= f * y;
    }
}

pub fn hnf(m: &IMatrix) -> Hnf {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut h = m.clone();
    let mut u: IMatrix = (0..rows).map(|i| (0..rows).map(|j| (i == j) as i128).collect()).collect();
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        if row == rows {
            break;
        }
        loop {
            let p = (row..rows).filter(|&r| h[r][col] != 0).min_by_key(|&r| h[r][col].abs());
            let Some(p) = p else { break };
            h.swap(row, p);
            u.swap(row, p);
            let mut clean = true;
            for r in row + 1..rows {
                if h[r][col] != 0 {
                    let f = h[r][col].div_euclid(h[row][col]);
                    row_axpy(&mut h, r, row, f);
                    row_axpy(&mut u, r, row, f);
                    if h[r][col] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if h[row][col] == 0 {
            continue;
        }
        if h[row][col] < 0 {
            for x in h[row].iter_mut() {
                *x = -*x;
            }
            for x in u[row].iter_mut() {
                *x = -*x;
            }
        }
        for r in 0..row {
            let f = h[r][col].div_euclid(h[row][col]);
            row_axpy(&mut h, r, row, f);
            row_axpy(&mut u, r, row, f);
        }
        pivots.push(col);
        row += 1;
    }
    Hnf { h, u, rank: row, pivots }
}

pub fn det(m: &IMatrix) -> i128 {
    // Bareiss fraction-free elimination.
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a = m.clone();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != 0) else { return 0 };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Whether `v` lies in the integer row span of the first `rank` rows of an echelon form.
pub fn in_row_lattice(hf: &Hnf, v: &[i128]) -> bool {
    let mut rest = v.to_vec();
    for (k, &col) in hf.pivots.iter().enumerate() {
        let p = hf.h[k][col];
        if rest[col] % p != 0 {
            return false;
        }
        let f = rest[col] / p;
        for (x, y) in rest.iter_mut().zip(&hf.h[k]) {
            *x -= f * y;
        }
    }
    rest.iter().all(|&x| x == 0)
}

pub fn mat_mul(a: &IMatrix, b: &IMatrix) -> IMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_example() {
        let m: IMatrix = vec![vec![2, 4], vec![3, 6], vec![1, 1]];
        let f = hnf(&m);
        assert_eq!(f.rank, 2);
        assert_eq!(mat_mul(&f.u, &m), f.h);
        assert_eq!(det(&f.u).abs(), 1);
        assert!(f.h[2].iter().all(|&x| x == 0));
    }

    proptest! {
        #[test]
        fn transform_is_unimodular(entries in proptest::collection::vec(-9i128..10, 12)) {
            let m: IMatrix = entries.chunks(3).map(|c| c.to_vec()).collect();
            let f = hnf(&m);
            prop_assert_eq!(mat_mul(&f.u, &m), f.h.clone());
            prop_assert_eq!(det(&f.u).abs(), 1);
            for r in f.rank..m.len() {
                prop_assert!(f.h[r].iter().all(|&x| x == 0));
            }
            for row in &m {
                prop_assert!(in_row_lattice(&f, row));
            }
        }
    }
}
