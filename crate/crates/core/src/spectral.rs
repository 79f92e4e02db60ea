//! Dominant and top-k eigenpairs of the adjacency operator.
//!
//! Eigenvectors are L2-normalized and sign-canonical: the entry of largest
//! magnitude is positive, with ties resolved towards the smallest index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, Block};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Ratio `λ₂/λ₁` above which a convergence failure is attributed to a
/// near-degenerate dominant pair.
pub const NEAR_DEGENERATE_RATIO: f64 = 0.999;

/// Rayleigh–Ritz projection runs every this many block iterations.
const RITZ_INTERVAL: usize = 4;
const START_SEED: u64 = 0x5eed_0f_5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖A v − λ v‖₂` at return.
    pub residual: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Descending by algebraic eigenvalue.
    pub pairs: Vec<EigenPair>,
    pub k: usize,
    /// Spectral shift used internally, already removed from `pairs`.
    pub shift: f64,
    pub diagnostics: Vec<String>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }
}

/// Flips `v` so its largest-magnitude entry is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0;
    let mut best_abs = -1.0f64;
    for (i, x) in v.iter().enumerate() {
        // strictly-larger beyond rounding, so the earliest near-tie wins
        if x.abs() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = x.abs();
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(g: &Graph, value: f64, v: &[f64]) -> f64 {
    let mut av = vec![0.0; v.len()];
    linalg::adj_matvec(g, -value, v, &mut av);
    linalg::norm(&av)
}

fn degenerate_note(ratio: f64) -> String {
    format!("near-degenerate spectral gap: lambda2/lambda1 ~ {ratio:.6}; power-type iteration converges slowly")
}

/// Dominant eigenpair by power iteration from the uniform vector.
///
/// Iterates with `A + I`, which has the same eigenvectors as `A` but is
/// primitive on connected graphs, so bipartite components cannot make the
/// iteration oscillate.
pub fn power_iteration(g: &Graph, tol: f64, max_iter: usize) -> Result<EigenPair> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("power iteration on an empty graph".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    let (mut prev_diff, mut rate) = (f64::NAN, f64::NAN);
    while iterations < max_iter {
        linalg::adj_matvec(g, 1.0, &x, &mut y);
        let nrm = linalg::norm(&y);
        if nrm == 0.0 {
            break;
        }
        linalg::scale(&mut y, 1.0 / nrm);
        iterations += 1;
        let diff = linalg::max_diff(&x, &y);
        std::mem::swap(&mut x, &mut y);
        if diff < tol {
            converged = true;
            break;
        }
        if prev_diff > 0.0 {
            rate = diff / prev_diff;
        }
        prev_diff = diff;
    }
    linalg::adj_matvec(g, 0.0, &x, &mut y);
    let value = linalg::dot(&x, &y);
    canonicalize_sign(&mut x);
    let diagnostic = if converged {
        None
    } else {
        // the error contracts by (λ₂+1)/(λ₁+1) per step
        let ratio = if value > 0.0 && rate.is_finite() {
            (rate * (value + 1.0) - 1.0) / value
        } else {
            f64::NAN
        };
        Some(if ratio > NEAR_DEGENERATE_RATIO {
            degenerate_note(ratio)
        } else {
            format!("power iteration stopped after {iterations} iterations without converging")
        })
    };
    let res = residual(g, value, &x);
    Ok(EigenPair {
        value,
        vector: x,
        converged,
        iterations,
        residual: res,
        diagnostic,
    })
}

/// Upper bound on the spectral radius: the smaller of the maximum degree
/// and the Collatz–Wielandt bound `max_i (A x)_i / x_i` for a positive `x`
/// refined by a few power steps.
pub fn spectral_radius_bound(g: &Graph) -> f64 {
    let n = g.node_count();
    let dmax = g.max_degree() as f64;
    if n == 0 || dmax == 0.0 {
        return 0.0;
    }
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..30 {
        linalg::adj_matvec(g, 1.0, &x, &mut y);
        let m = y.iter().fold(0.0f64, |a, &b| a.max(b));
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / m;
        }
    }
    if x.iter().any(|&v| !(v > 0.0)) {
        return dmax;
    }
    let cw = collatz_wielandt(g, &x);
    // guard against rounding in the ratio
    dmax.min(cw * (1.0 + 1e-9) + 1e-12)
}

/// `max_i (A x)_i / x_i` for a positive `x`: an upper bound on `λ₁`.
fn collatz_wielandt(g: &Graph, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    linalg::adj_matvec(g, 0.0, x, &mut y);
    x.iter().zip(&y).map(|(&xi, &yi)| yi / xi).fold(0.0f64, f64::max)
}

/// Block size for `k` requested pairs: enough guard vectors that the
/// convergence rate is set by an eigenvalue well below the k-th.
pub fn block_size(k: usize, n: usize) -> usize {
    (2 * k).max(k + 8).min(n)
}

/// The `k` algebraically largest eigenpairs by orthogonal (subspace)
/// iteration on `A + s·I`, where `s` bounds the spectral radius so the
/// shifted spectrum is nonnegative and magnitude order equals algebraic
/// order. Ritz values and vectors come from periodic Rayleigh–Ritz
/// projection; a pair converges once its residual is within
/// `tol · max(|λ|, 1)`.
pub fn top_k_spectrum(g: &Graph, k: usize, tol: f64, max_iter: usize) -> Result<Spectrum> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut shift = spectral_radius_bound(g);
    let p = block_size(k, n);

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut filler = |_c: usize| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };
    let mut v = Block::zeros(n, p);
    let inv = 1.0 / (n as f64).sqrt();
    for c in 0..p {
        let col = if c == 0 { vec![inv; n] } else { filler(c) };
        for (i, x) in col.into_iter().enumerate() {
            v.data[i * p + c] = x;
        }
    }
    v.orthonormalize(2, &mut filler);

    let mut w = Block::zeros(n, p);
    let mut iterations = 0;
    let mut theta = vec![0.0; p];
    let mut residuals = vec![f64::INFINITY; p];
    let mut ritz = v.clone();
    loop {
        v.adj_apply(g, shift, &mut w);
        iterations += 1;
        let project = iterations % RITZ_INTERVAL == 0 || iterations >= max_iter || p == n;
        if project {
            // Rayleigh–Ritz on span(V): H = Vᵀ(A + sI)V
            let mut h = v.gram(&w);
            for i in 0..p {
                for j in 0..i {
                    let s = 0.5 * (h[i * p + j] + h[j * p + i]);
                    h[i * p + j] = s;
                    h[j * p + i] = s;
                }
            }
            let (vals, y) = linalg::symmetric_eigen(&h, p);
            theta = vals;
            ritz = v.times(&y, p);
            let wy = w.times(&y, p);
            residuals = ritz_residuals(&ritz, &wy, &theta);
            let done = (0..k).all(|i| residuals[i] <= tol * (theta[i] - shift).abs().max(1.0));
            if done || iterations >= max_iter {
                break;
            }
            v = wy;
            // the leading Ritz vector approximates the Perron vector, so it
            // usually gives a much tighter bound than the initial one
            if let Some(bound) = ritz_bound(g, &ritz) {
                if bound < shift {
                    // keep V = (A + sI)U consistent with the new shift
                    let delta = shift - bound;
                    for (vr, ur) in v.data.chunks_mut(p).zip(ritz.data.chunks(p)) {
                        for (a, b) in vr.iter_mut().zip(ur) {
                            *a -= delta * b;
                        }
                    }
                    shift = bound;
                }
            }
        } else {
            std::mem::swap(&mut v, &mut w);
        }
        let next_projects = (iterations + 1) % RITZ_INTERVAL == 0 || iterations + 1 >= max_iter || p == n;
        if !v.orthonormalize(if next_projects { 2 } else { 1 }, &mut filler) {
            break;
        }
    }

    let mut diagnostics = Vec::new();
    let mut pairs = Vec::with_capacity(k);
    for i in 0..k {
        let value = theta[i] - shift;
        let mut vector = ritz.column(i);
        canonicalize_sign(&mut vector);
        let converged = residuals[i] <= tol * value.abs().max(1.0);
        pairs.push(EigenPair {
            value,
            vector,
            converged,
            iterations,
            residual: residuals[i],
            diagnostic: None,
        });
    }
    if pairs.iter().any(|p| !p.converged) {
        let ratio = if k >= 2 && pairs[0].value > 0.0 {
            pairs[1].value / pairs[0].value
        } else if p >= 2 && theta[0] - shift > 0.0 {
            (theta[1] - shift) / (theta[0] - shift)
        } else {
            f64::NAN
        };
        let note = if ratio > NEAR_DEGENERATE_RATIO {
            degenerate_note(ratio)
        } else {
            format!("subspace iteration stopped after {iterations} iterations with unconverged pairs")
        };
        for pair in pairs.iter_mut().filter(|p| !p.converged) {
            pair.diagnostic = Some(note.clone());
        }
        diagnostics.push(note);
    }
    Ok(Spectrum {
        pairs,
        k,
        shift,
        diagnostics,
    })
}

/// Collatz–Wielandt bound from the magnitudes of the leading Ritz vector,
/// floored to keep every entry positive.
fn ritz_bound(g: &Graph, ritz: &Block) -> Option<f64> {
    let lead: Vec<f64> = ritz.column(0).iter().map(|x| x.abs()).collect();
    let floor = 1e-12 * lead.iter().fold(0.0f64, |m, &x| m.max(x));
    if !(floor > 0.0) {
        return None;
    }
    let lead: Vec<f64> = lead.into_iter().map(|x| x.max(floor)).collect();
    Some(collatz_wielandt(g, &lead) * (1.0 + 1e-9) + 1e-12)
}

fn ritz_residuals(u: &Block, bu: &Block, theta: &[f64]) -> Vec<f64> {
    let p = u.p;
    let mut acc = vec![0.0; p];
    for (ru, rb) in u.data.chunks(p).zip(bu.data.chunks(p)) {
        for c in 0..p {
            let r = rb[c] - theta[c] * ru[c];
            acc[c] += r * r;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// `λ₂ / λ₁` of a spectrum with at least two pairs.
pub fn eigen_gap(s: &Spectrum) -> Result<f64> {
    if s.pairs.len() < 2 {
        return Err(Error::InvalidArgument("eigen gap needs at least two eigenpairs".into()));
    }
    let l1 = s.pairs[0].value;
    if !(l1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "largest eigenvalue {l1} is not positive; cannot normalize"
        )));
    }
    Ok(s.pairs[1].value / l1)
}
