//! Diagonal reduction of matrices over `Z/p^E`.
//!
//! `Z/p^E` is a local principal ideal ring, so choosing as pivot an entry of
//! least valuation lets it clear both its row and its column. The result is
//! a diagonal `P A Q = diag(p^{a_1}, ...)`. Kernel orders and subgroup orders
//! read off the exponents `a_k`; kernel generators come from the rows of `P`.

use crate::modarith::{inv_mod, mul_mod, sub_mod, val_capped};

/// Outcome of [`reduce`].
#[derive(Debug, Clone)]
pub struct Reduction {
    /// `diag[k]` is the valuation of the `k`-th diagonal entry, capped at `E`
    /// (so `E` means a zero entry). Length `min(rows, cols)`.
    pub diag: Vec<u32>,
    /// The row transform `P` (rows x rows), when requested.
    pub left: Option<Vec<Vec<u64>>>,
}

/// Reduces `a` (rows x cols, entries in `[0, p^e)`) to diagonal form.
pub fn reduce(a: &[Vec<u64>], cols: usize, p: u64, e: u32, track_left: bool) -> Reduction {
    let q = p.pow(e);
    let rows = a.len();
    let mut m: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| x % q).collect()).collect();
    let mut left: Option<Vec<Vec<u64>>> = track_left.then(|| {
        (0..rows)
            .map(|i| (0..rows).map(|j| u64::from(i == j)).collect())
            .collect()
    });
    let steps = rows.min(cols);
    let mut diag = vec![e; steps];
    for k in 0..steps {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if x != 0 {
                    let v = val_capped(x, p, e);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, v)) = best else { break };
        m.swap(k, pi);
        if let Some(l) = left.as_mut() {
            l.swap(k, pi);
        }
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        let pv = p.pow(v);
        let unit_inv = inv_mod(m[k][k] / pv, q);
        for x in m[k].iter_mut() {
            *x = mul_mod(*x, unit_inv, q);
        }
        if let Some(l) = left.as_mut() {
            for x in l[k].iter_mut() {
                *x = mul_mod(*x, unit_inv, q);
            }
        }
        for i in k + 1..rows {
            let c = m[i][k];
            if c == 0 {
                continue;
            }
            let f = c / pv;
            for j in k..cols {
                let t = mul_mod(f, m[k][j], q);
                m[i][j] = sub_mod(m[i][j], t, q);
            }
            if let Some(l) = left.as_mut() {
                for j in 0..rows {
                    let t = mul_mod(f, l[k][j], q);
                    l[i][j] = sub_mod(l[i][j], t, q);
                }
            }
        }
        for j in k + 1..cols {
            m[k][j] = 0;
        }
        diag[k] = v;
    }
    Reduction { diag, left }
}

/// `log_p` of the order of the submodule of `(Z/p^e)^cols` spanned by the rows of `a`.
pub fn row_span_valuation(a: &[Vec<u64>], cols: usize, p: u64, e: u32) -> u32 {
    reduce(a, cols, p, e, false).diag.iter().map(|&d| e - d).sum()
}

/// Kernel of `x -> x a` on `(Z/p^e)^rows`: its `log_p`-order and a generating set.
pub fn left_kernel(a: &[Vec<u64>], cols: usize, p: u64, e: u32) -> (u32, Vec<Vec<u64>>) {
    let q = p.pow(e);
    let rows = a.len();
    let red = reduce(a, cols, p, e, true);
    let left = red.left.expect("tracked");
    let mut order = 0;
    let mut gens = Vec::new();
    for (k, row) in left.into_iter().enumerate() {
        let ak = red.diag.get(k).copied().unwrap_or(e);
        order += ak;
        if ak == 0 {
            continue;
        }
        let scale = p.pow(e - ak);
        let g: Vec<u64> = row.iter().map(|&x| mul_mod(x, scale, q)).collect();
        if g.iter().any(|&x| x != 0) {
            gens.push(g);
        }
    }
    debug_assert!(gens.iter().all(|g| g.len() == rows));
    (order, gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_kernel(a: &[Vec<u64>], cols: usize, p: u64, e: u32) -> u32 {
        let q = p.pow(e);
        let rows = a.len();
        let mut count = 0u64;
        let total = q.pow(rows as u32);
        for idx in 0..total {
            let mut x = vec![0u64; rows];
            let mut t = idx;
            for xi in x.iter_mut() {
                *xi = t % q;
                t /= q;
            }
            let zero = (0..cols).all(|c| (0..rows).map(|r| x[r] * a[r][c]).sum::<u64>() % q == 0);
            if zero {
                count += 1;
            }
        }
        count.ilog(p)
    }

    #[test]
    fn kernel_matches_enumeration() {
        let cases: Vec<(Vec<Vec<u64>>, usize, u64, u32)> = vec![
            (vec![vec![2, 0], vec![0, 2]], 2, 2, 2),
            (vec![vec![1, 1], vec![1, 1]], 2, 2, 2),
            (vec![vec![3, 6, 0], vec![0, 3, 0]], 3, 3, 2),
            (vec![vec![4, 2], vec![2, 6], vec![0, 0]], 2, 2, 3),
            (vec![vec![0, 0], vec![0, 0]], 2, 5, 1),
        ];
        for (a, cols, p, e) in cases {
            let (ord, gens) = left_kernel(&a, cols, p, e);
            assert_eq!(ord, brute_kernel(&a, cols, p, e), "{a:?}");
            let q = p.pow(e);
            for g in gens {
                for c in 0..cols {
                    let s: u64 = (0..a.len()).map(|r| g[r] * a[r][c]).sum();
                    assert_eq!(s % q, 0);
                }
            }
        }
    }

    #[test]
    fn spans() {
        assert_eq!(row_span_valuation(&[vec![2, 0], vec![0, 2]], 2, 2, 3), 4);
        assert_eq!(row_span_valuation(&[vec![4, 4], vec![2, 2]], 2, 2, 3), 2);
        assert_eq!(row_span_valuation(&[], 2, 2, 3), 0);
    }
}
