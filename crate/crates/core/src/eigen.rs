//! Eigenface PCA over stacked feature vectors.
//!
//! Feature dimensions are far larger than the number of training images, so
//! the decomposition runs on the `M x M` Gram matrix `Phi Phi^T / M` of the
//! centered rows and maps each Gram eigenvector `v` back to feature space as
//! `Phi^T v`. The covariance divisor is `M`.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, symmetric_eigen, Matrix};

/// `M` feature vectors of length `N`, one class label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    data: Matrix,
    labels: Vec<u32>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<u32>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::size(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::size(format!(
                "row {bad} has length {} instead of {n}",
                rows[bad].len()
            )));
        }
        let m = rows.len();
        Ok(FeatureMatrix {
            data: Matrix::from_vec(m, n, rows.into_iter().flatten().collect())?,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], u32)> + '_ {
        (0..self.rows()).map(move |i| (self.row(i), self.labels[i]))
    }

    fn select(&self, indices: impl Iterator<Item = usize>) -> FeatureMatrix {
        let (rows, labels) = indices.map(|i| (self.row(i).to_vec(), self.labels[i])).unzip();
        FeatureMatrix::from_rows(rows, labels).expect("selected rows share a length")
    }
}

/// Odd rows (1st, 3rd, ...) train; even rows (2nd, 4th, ...) test.
pub fn split_train_test(m: &FeatureMatrix) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if m.rows() < 2 {
        return Err(Error::size(format!("cannot split {} rows", m.rows())));
    }
    Ok((m.select((0..m.rows()).step_by(2)), m.select((1..m.rows()).step_by(2))))
}

/// Mean vector plus the top-`k` principal axes.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenModel {
    pub mean: Vec<f64>,
    /// `k x N`, unit rows, descending eigenvalue order.
    pub components: Matrix,
    pub eigenvalues: Vec<f64>,
    /// Set when some kept components had no variance behind them and were
    /// completed from the standard basis.
    pub degenerate: bool,
}

const MODEL_MAGIC: &[u8; 8] = b"TFRSEIG1";

/// Gram eigenvalues at or below this fraction of the largest one carry no
/// usable direction.
const NULL_EIGENVALUE: f64 = 1e-10;

fn centered(train: &FeatureMatrix) -> (Vec<f64>, Matrix) {
    let (m, n) = (train.rows(), train.cols());
    let mut mean = vec![0.0; n];
    for i in 0..m {
        axpy(1.0, train.row(i), &mut mean);
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);
    let mut phi = train.data.clone();
    for i in 0..m {
        for (x, mu) in phi.row_mut(i).iter_mut().zip(&mean) {
            *x -= mu;
        }
    }
    (mean, phi)
}

fn gram(phi: &Matrix) -> Matrix {
    let m = phi.rows();
    let mut g = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = dot(phi.row(i), phi.row(j)) / m as f64;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Eigenpairs of the Gram matrix sorted by descending eigenvalue.
fn sorted_gram_eigen(phi: &Matrix) -> Result<Vec<(f64, Vec<f64>)>> {
    let e = symmetric_eigen(&gram(phi))?;
    let mut pairs: Vec<(f64, Vec<f64>)> = e
        .values
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, e.vectors.column(i)))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}

/// All `M` eigenvalues of the centered Gram matrix, descending.
pub fn gram_spectrum(train: &FeatureMatrix) -> Result<Vec<f64>> {
    let (_, phi) = centered(train);
    Ok(sorted_gram_eigen(&phi)?.into_iter().map(|(l, _)| l).collect())
}

/// Removes the projections onto `basis` (twice, for stability) and returns the residual norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
    norm(v)
}

/// Flips `v` so its largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits the mean and the top-`k` principal components of the training rows.
pub fn fit_pca(train: &FeatureMatrix, k: usize) -> Result<EigenModel> {
    let (m, n) = (train.rows(), train.cols());
    if m == 0 || n == 0 {
        return Err(Error::size(format!("cannot fit PCA on a {m}x{n} matrix")));
    }
    if k == 0 || k > m || k > n {
        return Err(Error::Rank {
            requested: k,
            available: m.min(n),
        });
    }

    let (mean, phi) = centered(train);
    let pairs = sorted_gram_eigen(&phi)?;
    let largest = pairs[0].0.max(0.0);

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut degenerate = false;

    for (lambda, v) in pairs.into_iter().take(k) {
        let lambda = lambda.max(0.0);
        let mut u = if lambda > NULL_EIGENVALUE * largest && lambda > 0.0 {
            phi.tr_mul_vec(&v)
        } else {
            Vec::new()
        };
        let residual = if u.is_empty() {
            0.0
        } else {
            orthogonalize(&mut u, &components)
        };
        if residual <= 1e-8 * (lambda * m as f64).sqrt() || residual == 0.0 {
            degenerate = true;
            u = basis_completion(&components, n);
        } else {
            u.iter_mut().for_each(|x| *x /= residual);
        }
        fix_sign(&mut u);
        components.push(u);
        eigenvalues.push(lambda);
    }

    Ok(EigenModel {
        mean,
        components: Matrix::from_vec(k, n, components.into_iter().flatten().collect())?,
        eigenvalues,
        degenerate,
    })
}

/// The first standard basis vector that is not already spanned, orthonormalized.
fn basis_completion(components: &[Vec<f64>], n: usize) -> Vec<f64> {
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let r = orthogonalize(&mut e, components);
        if r > 1e-6 {
            e.iter_mut().for_each(|x| *x /= r);
            return e;
        }
    }
    unreachable!("fewer than n components always leave a free basis direction")
}

impl EigenModel {
    pub fn k(&self) -> usize {
        self.components.rows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Coordinates of `x` in the eigenspace: `components * (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::size(format!(
                "vector has length {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        Ok(self.components.mul_vec(&centered))
    }

    /// Maps eigenspace coordinates back to feature space.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.k() {
            return Err(Error::size(format!(
                "{} coefficients for a {}-component model",
                coeffs.len(),
                self.k()
            )));
        }
        let mut out = self.mean.clone();
        axpy(1.0, &self.components.tr_mul_vec(coeffs), &mut out);
        Ok(out)
    }

    /// Projects every row of `m`, keeping labels.
    pub fn project_all(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        let rows = (0..m.rows())
            .map(|i| self.project(m.row(i)))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::from_rows(rows, m.labels().to_vec())
    }

    /// `TFRSEIG1`, `k`, `N` and the degenerate flag as little-endian `u32`,
    /// then the mean, eigenvalues and row-major components as little-endian
    /// `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * (self.dim() + self.k() * (1 + self.dim())));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(self.k() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&u32::from(self.degenerate).to_le_bytes());
        for v in self.mean.iter().chain(&self.eigenvalues).chain(self.components.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = crate::codec::Reader::new(bytes);
        r.magic(MODEL_MAGIC)?;
        let k = r.u32()? as usize;
        let n = r.u32()? as usize;
        let degenerate = match r.u32()? {
            0 => false,
            1 => true,
            f => return Err(Error::Format(format!("bad degenerate flag {f}"))),
        };
        let mean = r.f64s(n)?;
        let eigenvalues = r.f64s(k)?;
        let components = Matrix::from_vec(k, n, r.f64s(k * n)?)?;
        r.finish()?;
        Ok(EigenModel {
            mean,
            components,
            eigenvalues,
            degenerate,
        })
    }
}
