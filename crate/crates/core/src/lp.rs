//! Dense phase-one simplex for the small feasibility problems behind convex
//! down-set membership, plus the Carathéodory support reduction.

use crate::scalar::Scalar;

const MAX_PIVOTS: usize = 100_000;

/// Finds weights `w >= 0`, `sum w = 1` with `sum_i w_i points[i] >= target`
/// coordinatewise. Returns the dense weight vector, or `None` if the system is
/// infeasible (phase-one optimum above the feasibility tolerance).
///
/// Coordinates with `target <= 0` are dropped: points are nonnegative, so
/// those rows hold for any weights.
pub(crate) fn dominating_weights<T: Scalar>(points: &[&[T]], target: &[T]) -> Option<Vec<T>> {
    let n = points.len();
    if n == 0 {
        return None;
    }
    let active: Vec<usize> = (0..target.len()).filter(|&k| target[k] > T::zero()).collect();
    let nk = active.len();
    let rows = nk + 1;
    // columns: weights | surplus | artificial | rhs
    let cols = n + nk + rows;
    let rhs = cols;
    let mut tab = vec![vec![T::zero(); cols + 1]; rows];
    for (r, &k) in active.iter().enumerate() {
        for (i, p) in points.iter().enumerate() {
            tab[r][i] = p[k];
        }
        tab[r][n + r] = -T::one();
        tab[r][n + nk + r] = T::one();
        tab[r][rhs] = target[k];
    }
    tab[nk][..n].fill(T::one());
    tab[nk][n + nk + nk] = T::one();
    tab[nk][rhs] = T::one();

    let mut basis: Vec<usize> = (0..rows).map(|r| n + nk + r).collect();
    // phase-one reduced costs: artificials cost 1, priced out of the basis
    let mut obj = vec![T::zero(); cols + 1];
    for j in (0..n + nk).chain(std::iter::once(rhs)) {
        obj[j] = -tab.iter().map(|row| row[j]).sum::<T>();
    }

    let piv_tol = T::pivot_tol();
    let cost_tol = T::pivot_tol();
    for _ in 0..MAX_PIVOTS {
        // Bland: lowest-index improving column
        let Some(enter) = (0..cols).find(|&j| obj[j] < -cost_tol) else {
            break;
        };
        let mut leave: Option<(usize, T)> = None;
        for r in 0..rows {
            let a = tab[r][enter];
            if a > piv_tol {
                let ratio = tab[r][rhs] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio || (ratio == lratio && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            // unbounded direction cannot occur in phase one; bail out
            break;
        };
        pivot(&mut tab, &mut obj, pr, enter);
        basis[pr] = enter;
    }

    let infeasibility = -obj[rhs];
    if infeasibility > T::feas_tol() {
        return None;
    }
    let mut weights = vec![T::zero(); n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            weights[b] = tab[r][rhs].max(T::zero());
        }
    }
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) {
        return None;
    }
    for w in &mut weights {
        *w = *w / total;
    }
    Some(weights)
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], obj: &mut [T], pr: usize, pc: usize) {
    let p = tab[pr][pc];
    for v in tab[pr].iter_mut() {
        *v = *v / p;
    }
    let pivot_row = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == pr {
            continue;
        }
        let f = row[pc];
        if f != T::zero() {
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v = *v - f * pv;
            }
        }
    }
    let f = obj[pc];
    if f != T::zero() {
        for (v, &pv) in obj.iter_mut().zip(&pivot_row) {
            *v = *v - f * pv;
        }
    }
}

/// Shrinks the support of a convex combination to at most `dim + 1` points
/// without changing the combined point or the total weight.
///
/// Each round finds a null vector `mu` of the `(dim+1) x s` matrix whose
/// columns are `[point; 1]`, then moves along `-mu` until one weight hits
/// zero.
pub(crate) fn caratheodory_reduce<T: Scalar>(points: &[&[T]], weights: &mut Vec<(usize, T)>) {
    weights.retain(|&(_, w)| w > T::zero());
    let dim = points.first().map_or(0, |p| p.len());
    while weights.len() > dim + 1 {
        let s = weights.len();
        let mut a: Vec<Vec<T>> = (0..=dim)
            .map(|row| {
                weights
                    .iter()
                    .map(|&(i, _)| if row < dim { points[i][row] } else { T::one() })
                    .collect()
            })
            .collect();
        let mu = null_vector(&mut a, s);
        let mut best: Option<(usize, T)> = None;
        for (pos, &m) in mu.iter().enumerate() {
            if m > T::zero() {
                let ratio = weights[pos].1 / m;
                if best.is_none_or(|(_, r)| ratio < r) {
                    best = Some((pos, ratio));
                }
            }
        }
        let Some((drop, step)) = best else {
            // mu sums to zero, so it always has a positive entry
            unreachable!("null vector of an affine system has a positive entry");
        };
        for (pos, &m) in mu.iter().enumerate() {
            weights[pos].1 = (weights[pos].1 - step * m).max(T::zero());
        }
        weights[drop].1 = T::zero();
        weights.retain(|&(_, w)| w > T::zero());
    }
    let total: T = weights.iter().map(|&(_, w)| w).sum();
    for (_, w) in weights.iter_mut() {
        *w = *w / total;
    }
}

/// Nonzero vector in the null space of a `rows x cols` matrix with
/// `cols > rows`. Destroys `a`.
fn null_vector<T: Scalar>(a: &mut [Vec<T>], cols: usize) -> Vec<T> {
    let rows = a.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= T::pivot_tol() {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for v in a[r].iter_mut() {
            *v = *v / p;
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != T::zero() {
                    for (v, &pv) in row.iter_mut().zip(&prow) {
                        *v = *v - f * pv;
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free = (0..cols)
        .find(|c| !pivot_cols.contains(c))
        .expect("more columns than rows leaves a free column");
    let mut mu = vec![T::zero(); cols];
    mu[free] = T::one();
    for (row, &pc) in pivot_cols.iter().enumerate() {
        mu[pc] = -a[row][free];
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_midpoint_feasible() {
        let p = [[1.0, 0.0], [0.0, 1.0]];
        let pts: Vec<&[f64]> = p.iter().map(|x| &x[..]).collect();
        let w = dominating_weights(&pts, &[0.5, 0.5]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert!(dominating_weights(&pts, &[0.6, 0.6]).is_none());
    }

    #[test]
    fn nonpositive_targets_always_feasible() {
        let p = [[0.0, 0.0]];
        let pts: Vec<&[f64]> = p.iter().map(|x| &x[..]).collect();
        assert!(dominating_weights(&pts, &[0.0, -1.0]).is_some());
        assert!(dominating_weights::<f64>(&[], &[0.0, 0.0]).is_none());
    }

    #[test]
    fn caratheodory_keeps_point_and_mass() {
        // 6 points in the plane, uniform weights: support must drop to 3
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.2], [0.3, 0.9]];
        let pts: Vec<&[f64]> = p.iter().map(|x| &x[..]).collect();
        let mut w: Vec<(usize, f64)> = (0..6).map(|i| (i, 1.0 / 6.0)).collect();
        let before: Vec<f64> = (0..2).map(|k| w.iter().map(|&(i, x)| x * p[i][k]).sum()).collect();
        caratheodory_reduce(&pts, &mut w);
        assert!(w.len() <= 3);
        let total: f64 = w.iter().map(|&(_, x)| x).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let after: f64 = w.iter().map(|&(i, x)| x * p[i][k]).sum();
            assert!((after - before[k]).abs() < 1e-12);
        }
    }
}
