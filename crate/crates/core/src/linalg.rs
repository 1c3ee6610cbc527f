//! Dense complex matrices, the sample-covariance (Gram) construction, and two
//! Hermitian eigensolvers.
//!
//! [`eigh`] is a cyclic complex Jacobi solver. It is unconditionally stable,
//! preserves the Hermitian structure exactly and can return eigenvectors, so it
//! is the reference solver. [`eigvalsh_tridiagonal`] reduces the matrix to real
//! symmetric tridiagonal form with Householder reflections and then runs the
//! implicit QL iteration; it computes eigenvalues only and is several times
//! faster for the larger `K` used by the Monte Carlo studies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default convergence tolerance: off-diagonal Frobenius mass relative to the
/// Frobenius norm of the input.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Cyclic sweep budget for [`eigh`].
pub const MAX_SWEEPS: usize = 100;

/// Relative tolerance used when validating Hermitian input.
const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in `[-PSD_CLAMP * trace, 0)` are treated as zero when forming
/// eigenvalue ratios.
pub const PSD_CLAMP: f64 = 1e-9;

/// Row-major dense complex matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Multiplies every entry by the real factor `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Self::new(self.rows, rhs.cols, out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Square Hermitian matrix stored densely.
///
/// On construction the upper triangle is taken as authoritative: the lower
/// triangle is rewritten as its conjugate and the diagonal is made real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
    samples: Option<usize>,
}

impl HermitianMatrix {
    /// Validates `M[i][j] == conj(M[j][i])` and a real diagonal to a relative
    /// tolerance of 1e-12 of the largest entry magnitude.
    pub fn new(dim: usize, mut data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension(
                "Hermitian matrix must be non-empty".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = HERMITIAN_TOL * scale;
        for i in 0..dim {
            let d = data[i * dim + i];
            if d.im.abs() > tol {
                return Err(Error::NotHermitian(format!(
                    "diagonal entry ({i},{i}) has imaginary part {}",
                    d.im
                )));
            }
            data[i * dim + i] = Complex64::new(d.re, 0.0);
            for j in i + 1..dim {
                let upper = data[i * dim + j];
                let lower = data[j * dim + i];
                if (upper - lower.conj()).norm() > tol {
                    return Err(Error::NotHermitian(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
                data[j * dim + i] = upper.conj();
            }
        }
        Ok(Self {
            dim,
            data,
            samples: None,
        })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = Complex64::new(v, 0.0);
        }
        Self::new(n, data)
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Self::new(m.rows(), m.as_slice().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Number of samples `N` when this matrix came from [`gram`].
    pub fn samples(&self) -> Option<usize> {
        self.samples
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
            samples: self.samples,
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    trace: f64,
    iterations: usize,
    samples: Option<usize>,
}

impl EigenSpectrum {
    /// Builds a spectrum from raw values. The trace is taken as the value sum.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("spectrum must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("eigenvalues must be finite"));
        }
        values.sort_by(f64::total_cmp);
        let trace = values.iter().sum();
        Ok(Self {
            values,
            trace,
            iterations: 0,
            samples: None,
        })
    }

    /// Attaches the sample count `N` of the Gram matrix these values came from.
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn samples(&self) -> Option<usize> {
        self.samples
    }

    /// `K/N` when the sample count is known.
    pub fn aspect_ratio(&self) -> Option<f64> {
        self.samples.map(|n| self.values.len() as f64 / n as f64)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `(λ_min, λ_max)` with a tiny negative `λ_min` (round-off on a PSD
    /// input) clamped to zero.
    pub fn extremes(&self) -> (f64, f64) {
        let mut lo = self.min();
        if lo < 0.0 && lo >= -PSD_CLAMP * self.trace.abs() {
            lo = 0.0;
        }
        (lo, self.max())
    }

    /// `λ_max/λ_min` after the PSD clamp; `+∞` when `λ_min` is zero.
    pub fn condition_ratio(&self) -> f64 {
        let (lo, hi) = self.extremes();
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }

    /// Multiplies every eigenvalue by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            trace: self.trace * c,
            iterations: self.iterations,
            samples: self.samples,
        }
    }
}

/// Which solver [`eigenvalues`] dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    /// Cyclic complex Jacobi ([`eigh`]).
    Jacobi,
    /// Householder tridiagonalization + implicit QL ([`eigvalsh_tridiagonal`]).
    #[default]
    Tridiagonal,
}

/// Sample covariance `(1/N)·Y·Yᴴ` of a `K×N` matrix.
pub fn gram(y: &ComplexMatrix) -> HermitianMatrix {
    let k = y.rows();
    let n = y.cols();
    let inv_n = 1.0 / n as f64;
    let mut data = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        let ri = y.row(i);
        let diag: f64 = ri.iter().map(|z| z.norm_sqr()).sum();
        data[i * k + i] = Complex64::new(diag * inv_n, 0.0);
        for j in i + 1..k {
            let rj = y.row(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in ri.iter().zip(rj) {
                acc += a * b.conj();
            }
            let v = acc * inv_n;
            data[i * k + j] = v;
            data[j * k + i] = v.conj();
        }
    }
    HermitianMatrix {
        dim: k,
        data,
        samples: Some(n),
    }
}

/// All eigenvalues of `g` by cyclic Jacobi, sorted ascending.
///
/// Iterates until the off-diagonal Frobenius norm is at most `tol` times the
/// Frobenius norm of `g`, within [`MAX_SWEEPS`] sweeps.
pub fn eigh(g: &HermitianMatrix, tol: f64) -> Result<EigenSpectrum> {
    let (values, sweeps) = jacobi(g, tol, None)?;
    Ok(spectrum(g, values, sweeps))
}

/// [`eigh`] plus the unitary `V` with `G = V·diag(values)·Vᴴ`; column `j` of
/// `V` belongs to `values[j]`.
pub fn eigh_with_vectors(g: &HermitianMatrix, tol: f64) -> Result<(EigenSpectrum, ComplexMatrix)> {
    let n = g.dim();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let (values, sweeps) = jacobi(g, tol, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]])?;
    Ok((spectrum(g, sorted, sweeps), vectors))
}

/// `(λ_min, λ_max)` of `g` via [`eigh`] with the default tolerance.
pub fn extreme_eigs(g: &HermitianMatrix) -> Result<(f64, f64)> {
    let s = eigh(g, DEFAULT_TOL)?;
    Ok((s.min(), s.max()))
}

/// Eigenvalues with the chosen solver.
pub fn eigenvalues(g: &HermitianMatrix, method: EigenMethod) -> Result<EigenSpectrum> {
    match method {
        EigenMethod::Jacobi => eigh(g, DEFAULT_TOL),
        EigenMethod::Tridiagonal => eigvalsh_tridiagonal(g),
    }
}

fn spectrum(g: &HermitianMatrix, mut values: Vec<f64>, iterations: usize) -> EigenSpectrum {
    values.sort_by(f64::total_cmp);
    EigenSpectrum {
        values,
        trace: g.trace(),
        iterations,
        samples: g.samples(),
    }
}

/// Cyclic Jacobi on a dense copy of `g`. Returns unsorted eigenvalues and the
/// number of sweeps performed. When `vectors` is given it is right-multiplied
/// by every rotation.
fn jacobi(
    g: &HermitianMatrix,
    tol: f64,
    mut vectors: Option<&mut Vec<Complex64>>,
) -> Result<(Vec<f64>, usize)> {
    if !(tol > 0.0) {
        return Err(Error::domain("eigensolver tolerance must be positive"));
    }
    let n = g.dim();
    let mut a = g.as_slice().to_vec();
    let norm = g.frobenius_norm();
    let diag = |a: &[Complex64]| (0..n).map(|i| a[i * n + i].re).collect::<Vec<_>>();

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j].norm_sqr();
                }
            }
        }
        if off.sqrt() <= tol * norm {
            return Ok((diag(&a), sweep));
        }

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Negligible pivot: drop it instead of rotating.
                if sweep > 3
                    && app.abs() + 100.0 * r == app.abs()
                    && aqq.abs() + 100.0 * r == aqq.abs()
                {
                    a[p * n + q] = Complex64::new(0.0, 0.0);
                    a[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }

                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let phase = apq / r;
                let sp = phase * s;
                let sp_conj = sp.conj();

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp * c - sp_conj * akq;
                    let new_kq = sp * akp + akq * c;
                    a[k * n + p] = new_kp;
                    a[k * n + q] = new_kq;
                    a[p * n + k] = new_kp.conj();
                    a[q * n + k] = new_kq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);

                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c - sp_conj * vkq;
                        v[k * n + q] = sp * vkp + vkq * c;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_SWEEPS,
    })
}

/// All eigenvalues of `g`, sorted ascending, by Householder reduction to a real
/// symmetric tridiagonal matrix followed by implicit QL with Wilkinson shifts.
/// `iterations` counts QL steps.
pub fn eigvalsh_tridiagonal(g: &HermitianMatrix) -> Result<EigenSpectrum> {
    let (mut d, mut e) = tridiagonalize(g);
    let steps = tql_eigenvalues(&mut d, &mut e)?;
    Ok(spectrum(g, d, steps))
}

/// Reduces `g` to tridiagonal form `T = QᴴGQ`. Returns the real diagonal and
/// the moduli of the subdiagonal (`e[i]` couples `i` and `i+1`, `e[n-1] = 0`);
/// a diagonal unitary similarity makes a complex tridiagonal matrix real, so
/// only the moduli matter.
fn tridiagonalize(g: &HermitianMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = g.dim();
    let mut a = g.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k].re;
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            e[k] = x0.norm();
            continue;
        }
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // v = x + phase·‖x‖·e1, so that Hx = -phase·‖x‖·e1.
        let v = &mut v[..m];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(k + 1 + i) * n + k];
        }
        v[0] += phase * xnorm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // p = β·A22·v
        let p = &mut p[..m];
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (aij, vj) in row.iter().zip(v.iter()) {
                acc += aij * vj;
            }
            p[i] = acc * beta;
        }
        // w = p - (β/2)(vᴴp)v ; vᴴp is real for Hermitian A22.
        let vhp: f64 = v
            .iter()
            .zip(p.iter())
            .map(|(vi, pi)| (vi.conj() * pi).re)
            .sum();
        let half = 0.5 * beta * vhp;
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi -= vi * half;
        }
        // A22 -= v·wᴴ + w·vᴴ
        for i in 0..m {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        e[k] = xnorm;
    }
    d[n - 1] = a[(n - 1) * n + n - 1].re;
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues overwrite `d`.
fn tql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<usize> {
    let n = d.len();
    let budget = 30 * n.max(1);
    let mut steps = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            steps += 1;
            if iter > budget {
                return Err(Error::NoConvergence { iterations: steps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(steps)
}
