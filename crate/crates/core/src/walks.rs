//! Random walks on graphs: transition rows `P = D^-1 A`, t-step walk
//! profiles, the stationary distribution, the Diplacian
//! `Γ = Φ^{1/2} (I - P) Φ^{-1/2}`, and the two vertex embeddings built on them.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, IdMap};

/// Largest vertex count accepted by the dense SVD path.
pub const MAX_DENSE_VERTICES: usize = 5000;

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;

/// Row `u` of `P`: `A[u][v] / d_out(u)`.
pub fn transition_row(graph: &Graph, u: usize) -> Result<Vec<f64>> {
    if u >= graph.n() {
        return Err(Error::UnknownVertex(u));
    }
    let d = graph.out_degree(u);
    if d == 0 {
        return Err(Error::SinkVertex(u));
    }
    let mut row = vec![0.0; graph.n()];
    let p = 1.0 / d as f64;
    for &v in graph.out_neighbors(u) {
        row[v] = p;
    }
    Ok(row)
}

/// One step of the walk: returns `x P`.
pub(crate) fn step(graph: &Graph, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; graph.n()];
    for (u, &mass) in x.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let d = graph.out_degree(u);
        if d == 0 {
            return Err(Error::SinkVertex(u));
        }
        let share = mass / d as f64;
        for &v in graph.out_neighbors(u) {
            y[v] += share;
        }
    }
    Ok(y)
}

/// Row `u` of `P^t`, by `t` sparse vector-matrix products.
pub fn walk_profile(graph: &Graph, u: usize, t: usize) -> Result<Vec<f64>> {
    if u >= graph.n() {
        return Err(Error::UnknownVertex(u));
    }
    let mut x = vec![0.0; graph.n()];
    x[u] = 1.0;
    for _ in 0..t {
        x = step(graph, &x)?;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub residual: f64,
    /// Teleportation probability of the chain this was computed on (0 = plain walk).
    pub teleport: f64,
}

impl StationaryDistribution {
    pub fn get(&self, u: usize) -> f64 {
        self.phi[u]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOptions {
    pub tol: f64,
    /// `None` means `100 * n`.
    pub max_iter: Option<usize>,
    /// Mix `P` with the uniform jump: `(1 - α) P + α J / n`, sinks jump
    /// uniformly. Changes the chain; off by default.
    pub teleport: Option<f64>,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions { tol: DEFAULT_STATIONARY_TOL, max_iter: None, teleport: None }
    }
}

/// Stationary distribution of the walk on a strongly connected graph.
pub fn stationary_distribution(graph: &Graph, tol: f64, max_iter: usize) -> Result<StationaryDistribution> {
    stationary_with(graph, &StationaryOptions { tol, max_iter: Some(max_iter), teleport: None })
}

/// Power iteration on the lazy chain `(I + P) / 2`, started from the uniform
/// vector. The lazy chain has the same fixed point and is aperiodic. Stops
/// once both the largest relative step `|Δφ_u| / φ_u` and the extrapolated
/// remaining relative error are within `tol`.
pub fn stationary_with(graph: &Graph, opts: &StationaryOptions) -> Result<StationaryDistribution> {
    let n = graph.n();
    if n == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    let alpha = opts.teleport.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("teleport probability {alpha} not in [0, 1]")));
    }
    if alpha == 0.0 && !graph.is_strongly_connected() {
        return Err(Error::NotStronglyConnected("the stationary distribution"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", opts.tol)));
    }
    let max_iter = opts.max_iter.unwrap_or(100 * n);
    let uniform = 1.0 / n as f64;
    let mut x = vec![uniform; n];
    let mut residual = f64::INFINITY;
    let mut previous = f64::INFINITY;
    let floor = opts.tol * 1e-2;
    for it in 1..=max_iter {
        let mut y = vec![0.0; n];
        let mut jump = 0.0;
        for (u, &mass) in x.iter().enumerate() {
            let d = graph.out_degree(u);
            if d == 0 {
                jump += mass;
                continue;
            }
            jump += alpha * mass;
            let share = (1.0 - alpha) * mass / d as f64;
            for &v in graph.out_neighbors(u) {
                y[v] += share;
            }
        }
        let spread = jump * uniform;
        let mut total = 0.0;
        for (yv, &xv) in y.iter_mut().zip(&x) {
            *yv = 0.5 * (xv + *yv + spread);
            total += *yv;
        }
        residual = 0.0;
        let mut relative = 0.0f64;
        for (yv, &xv) in y.iter_mut().zip(&x) {
            *yv /= total;
            residual += (*yv - xv).abs();
            relative = relative.max((*yv - xv).abs() / *yv);
        }
        x = y;
        // geometric convergence at rate ρ leaves an error of about r ρ / (1 - ρ)
        let rate = relative / previous;
        let error = if rate < 1.0 { relative * rate / (1.0 - rate) } else { f64::INFINITY };
        if relative <= floor || (relative <= opts.tol && error <= opts.tol) {
            return Ok(StationaryDistribution { phi: x, iterations: it, residual, teleport: alpha });
        }
        previous = relative;
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingKind {
    WalkProfile { t: usize },
    Diplacian { k: usize },
}

/// One coordinate row per vertex, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub kind: EmbeddingKind,
    dim: usize,
    coords: Vec<f64>,
}

impl Embedding {
    pub fn from_rows(kind: EmbeddingKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("embedding rows differ in length".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("embedding has non-finite coordinates".into()));
        }
        Ok(Embedding { kind, dim, coords: rows.concat() })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.coords[u * self.dim..(u + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim.max(1))
    }

    /// CSV with a header `vertex,x0,x1,...` and one row per vertex.
    pub fn write_csv<W: Write>(&self, ids: &IdMap, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["vertex".to_string()];
        header.extend((0..self.dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (u, row) in self.rows().enumerate() {
            let mut rec = vec![ids.external(u).to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Walk-profile coordinates `D^{-1/2} P^t_{u•}`:
/// row `u` is `(P^t[u][v] / sqrt(d_v))_v`.
pub fn walktrap_embedding(graph: &Graph, t: usize) -> Result<Embedding> {
    if graph.is_directed() {
        return Err(Error::RequiresUndirected("the walk-profile embedding"));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("walk length t must be at least 1".into()));
    }
    if !graph.is_weakly_connected() {
        return Err(Error::NotConnected("the walk-profile embedding"));
    }
    let n = graph.n();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (graph.degree(v) as f64).sqrt()).collect();
    let rows = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut row = walk_profile(graph, u, t)?;
            for (x, s) in row.iter_mut().zip(&inv_sqrt) {
                *x *= s;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Embedding::from_rows(EmbeddingKind::WalkProfile { t }, rows)
}

fn check_dense(graph: &Graph) -> Result<()> {
    if graph.n() > MAX_DENSE_VERTICES {
        return Err(Error::TooLarge { n: graph.n(), max: MAX_DENSE_VERTICES });
    }
    Ok(())
}

/// Dense `Γ[u][v] = sqrt(φ_u) (δ_uv - P_uv) / sqrt(φ_v)`.
pub fn diplacian(graph: &Graph, phi: &StationaryDistribution) -> Result<DMatrix<f64>> {
    check_dense(graph)?;
    let n = graph.n();
    if phi.phi.len() != n {
        return Err(Error::UniverseMismatch(phi.phi.len(), n));
    }
    if let Some(u) = phi.phi.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter(format!("stationary probability of vertex {u} is not positive")));
    }
    let sqrt_phi: Vec<f64> = phi.phi.iter().map(|p| p.sqrt()).collect();
    let mut gamma = DMatrix::<f64>::identity(n, n);
    for u in 0..n {
        let d = graph.out_degree(u);
        if d == 0 {
            return Err(Error::SinkVertex(u));
        }
        let p = 1.0 / d as f64;
        for &v in graph.out_neighbors(u) {
            gamma[(u, v)] -= sqrt_phi[u] * p / sqrt_phi[v];
        }
    }
    Ok(gamma)
}

/// Full SVD `Γ = U Σ V^T` with singular values in ascending order.
#[derive(Debug, Clone)]
pub struct AscendingSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl AscendingSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        &self.u * sigma * self.v.transpose()
    }
}

pub fn ascending_svd(m: &DMatrix<f64>) -> Result<AscendingSvd> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Svd("did not converge".into()))?;
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Svd("singular vectors missing".into()));
    };
    let values = svd.singular_values;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let u_cols: Vec<_> = order.iter().map(|&i| u.column(i).into_owned()).collect();
    let v_cols: Vec<_> = order.iter().map(|&i| v_t.row(i).transpose()).collect();
    Ok(AscendingSvd {
        u: DMatrix::from_columns(&u_cols),
        singular_values: order.iter().map(|&i| values[i]).collect(),
        v: DMatrix::from_columns(&v_cols),
    })
}

/// Flips `x` so that its largest-magnitude entry (first one, on ties) is positive.
fn orient(x: &mut [f64]) {
    let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let slack = peak * 1e-9;
    if let Some(&lead) = x.iter().find(|v| v.abs() >= peak - slack) {
        if lead < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Diplacian coordinates
/// `(φ_u^{-1/2} V_1(u) .. φ_u^{-1/2} V_k(u), φ_u^{-1/2} U_1(u) .. φ_u^{-1/2} U_k(u))`
/// over the singular triplets with the k smallest singular values.
pub fn diplacian_embedding(graph: &Graph, k: usize) -> Result<Embedding> {
    if !graph.is_strongly_connected() {
        return Err(Error::NotStronglyConnected("the Diplacian embedding"));
    }
    check_dense(graph)?;
    let phi = stationary_with(graph, &StationaryOptions::default())?;
    diplacian_embedding_with(graph, &phi, k)
}

pub fn diplacian_embedding_with(graph: &Graph, phi: &StationaryDistribution, k: usize) -> Result<Embedding> {
    let n = graph.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("embedding dimension k = {k} must satisfy 1 <= k < n = {n}")));
    }
    let gamma = diplacian(graph, phi)?;
    let svd = ascending_svd(&gamma)?;
    let pick = |m: &DMatrix<f64>, i: usize| {
        let mut col: Vec<f64> = m.column(i).iter().copied().collect();
        orient(&mut col);
        col
    };
    let vs: Vec<Vec<f64>> = (0..k).map(|i| pick(&svd.v, i)).collect();
    let us: Vec<Vec<f64>> = (0..k).map(|i| pick(&svd.u, i)).collect();
    let rows = (0..n)
        .map(|u| {
            let scale = 1.0 / phi.phi[u].sqrt();
            vs.iter().chain(&us).map(|col| col[u] * scale).collect()
        })
        .collect();
    Embedding::from_rows(EmbeddingKind::Diplacian { k }, rows)
}
