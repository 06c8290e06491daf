//! Sparse symmetric storage and the linear solvers: envelope Cholesky on a
//! reverse Cuthill–McKee ordering, with Jacobi-preconditioned CG for large or
//! memory-hungry systems.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};

/// Square sparse matrix in compressed rows; both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets (sorted, deduplicated here).
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern((0..n).map(|i| vec![i]).collect());
        m.vals.fill(1.0);
        m
    }

    pub fn from_dense(a: &nalgebra::DMatrix<f64>) -> Self {
        let rows = (0..a.nrows()).map(|i| (0..a.ncols()).filter(|&j| a[(i, j)] != 0.0 || i == j).collect()).collect();
        let mut m = Self::from_pattern(rows);
        for i in 0..a.nrows() {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.vals[k] = a[(i, m.cols[k])];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].binary_search(&j).ok().map(|k| a + k)
    }

    /// Adds `v` at (i, j); the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.vals[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.vals[k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Rows and columns listed in `keep` (map: old index → new index).
    pub fn principal_submatrix(&self, keep: &[usize], map: &[Option<usize>]) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &i in keep {
            for (j, v) in self.row(i) {
                if let Some(nj) = map[j] {
                    cols.push(nj);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n: keep.len(), row_ptr, cols, vals }
    }

    /// max |A − Aᵀ| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Direct below `direct_limit` unknowns, CG above.
    #[default]
    Auto,
    Direct,
    Cg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Relative residual ‖Ax − b‖ / ‖b‖ to reach.
    pub tol: f64,
    pub max_iterations: usize,
    pub direct_limit: usize,
    /// Largest envelope (stored entries of L) the direct solver may allocate.
    pub max_envelope: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { kind: SolverKind::Auto, tol: 1e-10, max_iterations: 20_000, direct_limit: 200_000, max_envelope: 60_000_000 }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

/// Reverse Cuthill–McKee ordering, `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(a, start, &degree);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root`; returns (level per node, reached nodes, depth).
fn bfs_levels(a: &CsrMatrix, root: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let mut level = vec![usize::MAX; a.n];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut reached = vec![root];
    while let Some(v) = queue.pop_front() {
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
                reached.push(j);
            }
        }
    }
    let depth = level[*reached.last().unwrap()];
    (level, reached, depth)
}

fn pseudo_peripheral(a: &CsrMatrix, start: usize, degree: &[usize]) -> usize {
    let mut root = start;
    let (mut level, mut reached, mut depth) = bfs_levels(a, root);
    for _ in 0..8 {
        let candidate = reached.iter().copied().filter(|&v| level[v] == depth).min_by_key(|&v| (degree[v], v)).unwrap_or(root);
        let (l2, r2, d2) = bfs_levels(a, candidate);
        if d2 <= depth {
            break;
        }
        root = candidate;
        (level, reached, depth) = (l2, r2, d2);
    }
    root
}

/// Envelope (profile) Cholesky factor of a permuted SPD matrix.
struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    fn envelope_size(a: &CsrMatrix, perm: &[usize]) -> (Vec<usize>, usize) {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let nj = inv[j];
                if nj < first[new] {
                    first[new] = nj;
                }
            }
        }
        let size = (0..n).map(|i| i - first[i] + 1).sum();
        (first, size)
    }

    fn factor(a: &CsrMatrix, perm: Vec<usize>, first: Vec<usize>, size: usize) -> Result<Self> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; size];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let nj = inv[j];
                if nj <= new {
                    data[offset[new] + nj - first[new]] = v;
                }
            }
        }
        let scale = (0..n).map(|i| data[offset[i + 1] - 1].abs()).fold(0.0, f64::max);
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let k0 = fi.max(first[j]);
                let (ri, rj) = (offset[i] - fi, offset[j] - first[j]);
                let mut s = data[ri + j];
                let dot: f64 = data[ri + k0..ri + j].iter().zip(&data[rj + k0..rj + j]).map(|(x, y)| x * y).sum();
                s -= dot;
                if j < i {
                    data[ri + j] = s / data[rj + j];
                } else {
                    if !(s > 1e-14 * scale) {
                        return Err(VemError::NotPositiveDefinite { row: perm[i], pivot: s });
                    }
                    data[ri + i] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky { perm, first, offset, data })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.offset[i] - fi;
            let s: f64 = self.data[ri + fi..ri + i].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.offset[i] - fi;
            y[i] /= self.data[ri + i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[ri + k] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradient starting from `x`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iterations: usize) -> Result<f64> {
    let bn = norm(b);
    if bn == 0.0 {
        x.fill(0.0);
        return Ok(0.0);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = residual(a, x, b);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut rel = norm(&r) / bn;
    for _ in 0..max_iterations {
        if rel <= tol {
            return Ok(rel);
        }
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(VemError::Solver { message: "matrix is not positive definite in CG".into(), residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..z.len() {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
        rel = norm(&r) / bn;
    }
    // recompute the true residual before giving up
    let rel = norm(&residual(a, x, b)) / bn;
    if rel <= tol {
        Ok(rel)
    } else {
        Err(VemError::Solver { message: format!("CG did not converge in {max_iterations} iterations"), residual: rel })
    }
}

/// Solves the SPD system `a x = b` to the configured relative residual.
pub fn solve_linear(a: &CsrMatrix, b: &[f64], config: &SolverConfig) -> Result<Vec<f64>> {
    let n = a.n;
    if b.len() != n {
        return Err(VemError::Solver { message: format!("right-hand side has length {} for {n} unknowns", b.len()), residual: f64::NAN });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let direct = match config.kind {
        SolverKind::Direct => true,
        SolverKind::Cg => false,
        SolverKind::Auto => n < config.direct_limit,
    };
    if direct {
        let perm = rcm_ordering(a);
        let (first, size) = EnvelopeCholesky::envelope_size(a, &perm);
        if size <= config.max_envelope || config.kind == SolverKind::Direct {
            let chol = EnvelopeCholesky::factor(a, perm, first, size)?;
            let mut x = chol.solve(b);
            let mut rel = f64::INFINITY;
            for _ in 0..4 {
                let r = residual(a, &x, b);
                rel = norm(&r) / bn;
                if rel <= config.tol {
                    return Ok(x);
                }
                let dx = chol.solve(&r);
                x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
            }
            log::debug!("direct solve stalled at residual {rel:.3e}, continuing with CG");
            pcg(a, b, &mut x, config.tol, config.max_iterations)?;
            return Ok(x);
        }
        log::debug!("envelope of {size} entries exceeds the limit, using CG");
    }
    let mut x = vec![0.0; n];
    pcg(a, b, &mut x, config.tol, config.max_iterations)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain(n: usize) -> CsrMatrix {
        let rows = (0..n).map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let x = solve_linear(&CsrMatrix::identity(3), &b, &SolverConfig::default()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn conduction_chain_matches_closed_form() {
        // −u'' = 0 with u(0) = 0, u(n+1) = 1 folded into the load
        let n = 50;
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        for kind in [SolverKind::Direct, SolverKind::Cg] {
            let cfg = SolverConfig { kind, ..Default::default() };
            let x = solve_linear(&chain(n), &b, &cfg).unwrap();
            for (i, xi) in x.iter().enumerate() {
                assert!((xi - (i + 1) as f64 / (n + 1) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_spd_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for _ in 0..120 {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            let v: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] += v;
            m[(j, i)] += v;
        }
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = a.clone().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b.clone()));
        let x = solve_linear(&CsrMatrix::from_dense(&a), &b, &SolverConfig::default()).unwrap();
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-9 * exact.amax());
        }
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_band() {
        // chain numbered in a scrambled order
        let n = 30;
        let order: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let mut rows = vec![Vec::new(); n];
        for w in order.windows(2) {
            rows[w[0]].extend([w[0], w[1]]);
            rows[w[1]].extend([w[0], w[1]]);
        }
        let a = CsrMatrix::from_pattern(rows);
        let mut p = rcm_ordering(&a);
        let (_, size) = EnvelopeCholesky::envelope_size(&a, &p);
        assert_eq!(size, 2 * n - 1);
        p.sort();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        let cfg = SolverConfig { kind: SolverKind::Direct, ..Default::default() };
        assert!(matches!(solve_linear(&a, &[1.0, 0.0], &cfg), Err(VemError::NotPositiveDefinite { .. })));
    }
}
