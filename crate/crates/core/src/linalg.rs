//! Dense kernels over node-indexed vectors.
//!
//! Reductions are split into fixed-size chunks whose partial sums are
//! combined in chunk order, so results are bit-identical for any thread
//! count.

use rayon::prelude::*;

use crate::graph::Graph;

pub(crate) const CHUNK: usize = 1 << 13;

/// Serial dot product with four interleaved accumulators.
fn dot_serial(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ah, at) = a.split_at(a.len() / 4 * 4);
    let (bh, bt) = b.split_at(ah.len());
    for (x, y) in ah.chunks_exact(4).zip(bh.chunks_exact(4)) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = at.iter().zip(bt).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return dot_serial(a, b);
    }
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| dot_serial(x, y))
        .collect();
    partial.iter().sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sum(a: &[f64]) -> f64 {
    if a.len() <= CHUNK {
        return a.iter().sum();
    }
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|c| c.iter().sum()).collect();
    partial.iter().sum()
}

pub(crate) fn scale(a: &mut [f64], s: f64) {
    a.par_chunks_mut(CHUNK).for_each(|c| c.iter_mut().for_each(|x| *x *= s));
}

/// Max-norm of `a - b`.
pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())))
        .reduce(|| 0.0, f64::max)
}

/// `y = (A + shift·I) x` for the adjacency operator of `g`.
pub(crate) fn adj_matvec(g: &Graph, shift: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, out)| {
        let base = ci * CHUNK;
        for (k, slot) in out.iter_mut().enumerate() {
            let i = base + k;
            let mut acc = 0.0;
            for &j in g.neighbors(i) {
                acc += x[j as usize];
            }
            *slot = acc + shift * x[i];
        }
    });
}

/// Row-major `n × p` block: row `i` holds entries `[i*p, (i+1)*p)`.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub n: usize,
    pub p: usize,
    pub data: Vec<f64>,
}

impl Block {
    pub fn zeros(n: usize, p: usize) -> Self {
        Block { n, p, data: vec![0.0; n * p] }
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.p + c]).collect()
    }

    /// `out = (A + shift·I) self`, row by row.
    pub fn adj_apply(&self, g: &Graph, shift: f64, out: &mut Block) {
        let p = self.p;
        let rows = (CHUNK / p).max(1);
        out.data.par_chunks_mut(rows * p).enumerate().for_each(|(ci, chunk)| {
            let base = ci * rows;
            for (k, row) in chunk.chunks_mut(p).enumerate() {
                let i = base + k;
                let own = &self.data[i * p..(i + 1) * p];
                for (r, &x) in row.iter_mut().zip(own) {
                    *r = shift * x;
                }
                for &j in g.neighbors(i) {
                    let src = &self.data[j as usize * p..(j as usize + 1) * p];
                    for (r, &x) in row.iter_mut().zip(src) {
                        *r += x;
                    }
                }
            }
        });
    }

    /// `selfᵀ other` as a dense `p × q` row-major matrix.
    pub fn gram(&self, other: &Block) -> Vec<f64> {
        let (p, q) = (self.p, other.p);
        let rows = (CHUNK / p.max(q)).max(1);
        let partial: Vec<Vec<f64>> = self
            .data
            .par_chunks(rows * p)
            .zip(other.data.par_chunks(rows * q))
            .map(|(a, b)| {
                let mut acc = vec![0.0; p * q];
                for (ra, rb) in a.chunks(p).zip(b.chunks(q)) {
                    for (x, &va) in ra.iter().enumerate() {
                        let dst = &mut acc[x * q..(x + 1) * q];
                        for (d, &vb) in dst.iter_mut().zip(rb) {
                            *d += va * vb;
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; p * q];
        for part in partial {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        total
    }

    /// `self · m` where `m` is a dense `p × q` row-major matrix.
    pub fn times(&self, m: &[f64], q: usize) -> Block {
        let p = self.p;
        debug_assert_eq!(m.len(), p * q);
        let mut out = Block::zeros(self.n, q);
        let rows = (CHUNK / q.max(1)).max(1);
        out.data.par_chunks_mut(rows * q).enumerate().for_each(|(ci, chunk)| {
            for (k, row) in chunk.chunks_mut(q).enumerate() {
                let i = ci * rows + k;
                let src = &self.data[i * p..(i + 1) * p];
                for (x, &v) in src.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    for (r, &mv) in row.iter_mut().zip(&m[x * q..(x + 1) * q]) {
                        *r += v * mv;
                    }
                }
            }
        });
        out
    }

    /// `selfᵀ self`. Each chunk is transposed so the column products run
    /// over contiguous memory.
    pub fn gram_self(&self) -> Vec<f64> {
        let p = self.p;
        let rows = (CHUNK / p).max(1);
        let partial: Vec<Vec<f64>> = self
            .data
            .par_chunks(rows * p)
            .map(|a| {
                let cols = transpose(a, p);
                let m = a.len() / p;
                let mut acc = vec![0.0; p * p];
                for x in 0..p {
                    let cx = &cols[x * m..(x + 1) * m];
                    for y in x..p {
                        let cy = &cols[y * m..(y + 1) * m];
                        acc[x * p + y] = dot_serial(cx, cy);
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; p * p];
        for part in partial {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        for x in 0..p {
            for y in 0..x {
                total[x * p + y] = total[y * p + x];
            }
        }
        total
    }

    /// `self ← self · u` for an upper-triangular `p × p` matrix `u`.
    fn times_upper_in_place(&mut self, u: &[f64]) {
        let p = self.p;
        let rows = (CHUNK / p).max(1);
        self.data.par_chunks_mut(rows * p).for_each(|chunk| {
            let cols = transpose(chunk, p);
            let m = chunk.len() / p;
            let mut out = vec![0.0; m * p];
            for c in 0..p {
                let dst = &mut out[c * m..(c + 1) * m];
                for x in 0..=c {
                    let coef = u[x * p + c];
                    for (d, &v) in dst.iter_mut().zip(&cols[x * m..(x + 1) * m]) {
                        *d += coef * v;
                    }
                }
            }
            for (i, row) in chunk.chunks_mut(p).enumerate() {
                for (c, r) in row.iter_mut().enumerate() {
                    *r = out[c * m + i];
                }
            }
        });
    }

    /// Orthonormalizes columns in place by `passes` rounds of Cholesky-QR,
    /// falling back to modified Gram–Schmidt when the Gram matrix is
    /// numerically singular. One pass leaves an orthogonality error of
    /// order `κ²ε`; two make it negligible. Returns false if a column could
    /// not be completed to an orthonormal basis.
    pub fn orthonormalize(&mut self, passes: usize, filler: &mut dyn FnMut(usize) -> Vec<f64>) -> bool {
        for _ in 0..passes {
            let g = self.gram_self();
            match cholesky_upper(&g, self.p) {
                Some(r) => {
                    let rinv = upper_inverse(&r, self.p);
                    self.times_upper_in_place(&rinv);
                }
                None => return self.gram_schmidt(filler),
            }
        }
        true
    }

    fn gram_schmidt(&mut self, filler: &mut dyn FnMut(usize) -> Vec<f64>) -> bool {
        let (n, p) = (self.n, self.p);
        let mut cols: Vec<Vec<f64>> = (0..p).map(|c| self.column(c)).collect();
        for c in 0..p {
            let mut attempts = 0;
            loop {
                let original = norm(&cols[c]);
                for _ in 0..2 {
                    for prev in 0..c {
                        let (done, rest) = cols.split_at_mut(c);
                        let d = dot(&done[prev], &rest[0]);
                        for (x, &y) in rest[0].iter_mut().zip(&done[prev]) {
                            *x -= d * y;
                        }
                    }
                }
                let nrm = norm(&cols[c]);
                if nrm > 1e-10 * original.max(f64::MIN_POSITIVE) && nrm > 0.0 {
                    scale(&mut cols[c], 1.0 / nrm);
                    break;
                }
                attempts += 1;
                if attempts > 3 || c >= n {
                    return false;
                }
                cols[c] = filler(c);
            }
        }
        for (c, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                self.data[i * p + c] = v;
            }
        }
        true
    }
}

/// Column-major copy of a row-major slice with `p` columns.
fn transpose(rows: &[f64], p: usize) -> Vec<f64> {
    let m = rows.len() / p;
    let mut cols = vec![0.0; rows.len()];
    for (i, row) in rows.chunks(p).enumerate() {
        for (c, &v) in row.iter().enumerate() {
            cols[c * m + i] = v;
        }
    }
    cols
}

/// Upper-triangular `R` with `RᵀR = g`, or `None` if `g` is not
/// numerically positive definite.
fn cholesky_upper(g: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut r = vec![0.0; p * p];
    let max_diag = (0..p).map(|i| g[i * p + i]).fold(0.0f64, f64::max);
    for j in 0..p {
        let mut d = g[j * p + j];
        for k in 0..j {
            d -= r[k * p + j] * r[k * p + j];
        }
        if !(d > 1e-14 * max_diag) {
            return None;
        }
        let rjj = d.sqrt();
        r[j * p + j] = rjj;
        for i in j + 1..p {
            let mut s = g[j * p + i];
            for k in 0..j {
                s -= r[k * p + j] * r[k * p + i];
            }
            r[j * p + i] = s / rjj;
        }
    }
    Some(r)
}

fn upper_inverse(r: &[f64], p: usize) -> Vec<f64> {
    let mut inv = vec![0.0; p * p];
    for j in 0..p {
        inv[j * p + j] = 1.0 / r[j * p + j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in i + 1..=j {
                s += r[i * p + k] * inv[k * p + j];
            }
            inv[i * p + j] = -s / r[i * p + i];
        }
    }
    inv
}

/// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order and the matching
/// eigenvectors as columns of a row-major `p × p` matrix.
pub(crate) fn symmetric_eigen(m: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = m.to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * p + j] * a[i * p + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                let aij = a[i * p + j];
                if aij == 0.0 {
                    continue;
                }
                let (aii, ajj) = (a[i * p + i], a[j * p + j]);
                let theta = (ajj - aii) / (2.0 * aij);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (aki, akj) = (a[k * p + i], a[k * p + j]);
                    a[k * p + i] = c * aki - s * akj;
                    a[k * p + j] = s * aki + c * akj;
                }
                for k in 0..p {
                    let (aik, ajk) = (a[i * p + k], a[j * p + k]);
                    a[i * p + k] = c * aik - s * ajk;
                    a[j * p + k] = s * aik + c * ajk;
                }
                for k in 0..p {
                    let (vki, vkj) = (v[k * p + i], v[k * p + j]);
                    v[k * p + i] = c * vki - s * vkj;
                    v[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| a[y * p + y].total_cmp(&a[x * p + x]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| a[i * p + i]).collect();
    let mut vecs = vec![0.0; p * p];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..p {
            vecs[k * p + new] = v[k * p + old];
        }
    }
    (values, vecs)
}
