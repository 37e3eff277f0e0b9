//! Unnormalized Haar transform (pairwise mean and half-difference), the
//! one-level 2D quad split and the LL / detail-average fusion.
//!
//! A pair `(p, q)` maps to `mean = (p + q) / 2` and `detail = (p - q) / 2`, so
//! `p = mean + detail` and `q = mean - detail`. No `1/sqrt(2)` normalization is
//! applied; `[10, 4, 9, 5]` decomposes to `[7, 0, 3, 2]`.

use crate::error::{Error, Result};
use crate::image::RealImage;

/// One-level subbands of an `H x W` image, each `H/2 x W/2`.
///
/// `hl` is the top-right quadrant (row details), `lh` bottom-left (column
/// details of the row means) and `hh` bottom-right.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSet {
    pub ll: RealImage,
    pub hl: RealImage,
    pub lh: RealImage,
    pub hh: RealImage,
}

/// Scalar fusion weights with `alpha + beta = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionWeights {
    alpha: f64,
    beta: f64,
}

impl FusionWeights {
    /// Weights from the detail share `beta`; `alpha` is computed as `1.0 - beta`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::size(format!("beta {beta} outside [0, 1]")));
        }
        Ok(FusionWeights {
            alpha: 1.0 - beta,
            beta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// One analysis step over adjacent pairs.
pub fn haar1d_step(v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if v.is_empty() || !v.len().is_multiple_of(2) {
        return Err(Error::OddLength(v.len()));
    }
    let means = v.chunks_exact(2).map(|p| (p[0] + p[1]) / 2.0).collect();
    let details = v.chunks_exact(2).map(|p| (p[0] - p[1]) / 2.0).collect();
    Ok((means, details))
}

/// Inverse of [`haar1d_step`].
pub fn inverse_haar1d_step(means: &[f64], details: &[f64]) -> Result<Vec<f64>> {
    if means.len() != details.len() {
        return Err(Error::size(format!(
            "{} means vs {} details",
            means.len(),
            details.len()
        )));
    }
    Ok(means.iter().zip(details).flat_map(|(&m, &d)| [m + d, m - d]).collect())
}

fn require_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::size(format!("length {n} is not a power of two")));
    }
    Ok(())
}

/// Full recursive decomposition, laid out as
/// `[overall mean, coarsest detail, ..., finest details]`.
pub fn haar1d_full(v: &[f64]) -> Result<Vec<f64>> {
    require_power_of_two(v.len())?;
    let mut out = v.to_vec();
    let mut len = v.len();
    while len > 1 {
        let (means, details) = haar1d_step(&out[..len])?;
        let half = len / 2;
        out[..half].copy_from_slice(&means);
        out[half..len].copy_from_slice(&details);
        len = half;
    }
    Ok(out)
}

pub fn inverse_haar1d_full(coeffs: &[f64]) -> Result<Vec<f64>> {
    require_power_of_two(coeffs.len())?;
    let mut out = coeffs.to_vec();
    let mut len = 1;
    while len < coeffs.len() {
        let merged = inverse_haar1d_step(&out[..len], &out[len..2 * len])?;
        out[..2 * len].copy_from_slice(&merged);
        len *= 2;
    }
    Ok(out)
}

fn column(img: &RealImage, x: usize) -> Vec<f64> {
    (0..img.height()).map(|y| img.get(x, y)).collect()
}

/// Applies `f` to every row, then every column, in place.
fn separable(img: &RealImage, f: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<RealImage> {
    let (w, h) = (img.width(), img.height());
    let mut rows = Vec::with_capacity(w * h);
    for y in 0..h {
        rows.extend(f(img.row(y))?);
    }
    let mut out = RealImage::new(w, h, rows)?;
    for x in 0..w {
        for (y, v) in f(&column(&out, x))?.into_iter().enumerate() {
            out.set(x, y, v);
        }
    }
    Ok(out)
}

/// One-level 2D split: a Haar step on every row (means left, details right),
/// then on every column of the result.
pub fn dwt2_single(img: &RealImage) -> Result<SubbandSet> {
    let (w, h) = (img.width(), img.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::size(format!("dimensions {w}x{h} must both be even")));
    }
    let step = |v: &[f64]| -> Result<Vec<f64>> {
        let (mut means, details) = haar1d_step(v)?;
        means.extend(details);
        Ok(means)
    };
    let full = separable(img, step)?;
    let (hw, hh) = (w / 2, h / 2);
    let quadrant = |x0: usize, y0: usize| RealImage::from_fn(hw, hh, |x, y| full.get(x0 + x, y0 + y));
    Ok(SubbandSet {
        ll: quadrant(0, 0),
        hl: quadrant(hw, 0),
        lh: quadrant(0, hh),
        hh: quadrant(hw, hh),
    })
}

/// Reassembles the image from its four subbands.
pub fn idwt2_single(s: &SubbandSet) -> Result<RealImage> {
    let (hw, hh) = (s.ll.width(), s.ll.height());
    if [&s.hl, &s.lh, &s.hh].iter().any(|b| !b.same_dims(&s.ll)) {
        return Err(Error::size("subband dimensions differ"));
    }
    let (w, h) = (2 * hw, 2 * hh);
    let packed = RealImage::from_fn(w, h, |x, y| {
        let band = match (x < hw, y < hh) {
            (true, true) => &s.ll,
            (false, true) => &s.hl,
            (true, false) => &s.lh,
            (false, false) => &s.hh,
        };
        band.get(x % hw, y % hh)
    });
    let mut cols = packed.clone();
    for x in 0..w {
        let c = column(&packed, x);
        for (y, v) in inverse_haar1d_step(&c[..hh], &c[hh..])?.into_iter().enumerate() {
            cols.set(x, y, v);
        }
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let r = cols.row(y);
        data.extend(inverse_haar1d_step(&r[..hw], &r[hw..])?);
    }
    RealImage::new(w, h, data)
}

/// Full decomposition of every row, then every column.
pub fn standard_decomposition(img: &RealImage) -> Result<RealImage> {
    require_power_of_two(img.width())?;
    require_power_of_two(img.height())?;
    separable(img, haar1d_full)
}

pub fn inverse_standard_decomposition(coeffs: &RealImage) -> Result<RealImage> {
    require_power_of_two(coeffs.width())?;
    require_power_of_two(coeffs.height())?;
    let (w, h) = (coeffs.width(), coeffs.height());
    let mut cols = coeffs.clone();
    for x in 0..w {
        for (y, v) in inverse_haar1d_full(&column(coeffs, x))?.into_iter().enumerate() {
            cols.set(x, y, v);
        }
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        data.extend(inverse_haar1d_full(cols.row(y))?);
    }
    RealImage::new(w, h, data)
}

/// Pixel-wise mean of the three detail bands.
pub fn average_detail(s: &SubbandSet) -> RealImage {
    let (hl, lh, hh) = (s.hl.data(), s.lh.data(), s.hh.data());
    let data = (0..hl.len()).map(|i| (hl[i] + lh[i] + hh[i]) / 3.0).collect();
    RealImage::new(s.hl.width(), s.hl.height(), data).expect("subbands share dimensions")
}

/// Total confidence matrix `alpha * ll + beta * detail`.
pub fn confidence_matrix(ll: &RealImage, detail: &RealImage, w: FusionWeights) -> Result<RealImage> {
    if !ll.same_dims(detail) {
        return Err(Error::size(format!(
            "LL is {}x{} but the detail average is {}x{}",
            ll.width(),
            ll.height(),
            detail.width(),
            detail.height()
        )));
    }
    let data = ll
        .data()
        .iter()
        .zip(detail.data())
        .map(|(&l, &d)| w.alpha * l + w.beta * d)
        .collect();
    RealImage::new(ll.width(), ll.height(), data)
}

/// The eleven `(alpha, beta)` pairs `beta = 0.1 i`, `alpha = 1 - beta`, `i = 0..=10`.
///
/// ```
/// let w = tfrs::wavelet::sweep_weights();
/// assert_eq!(w.len(), 11);
/// assert_eq!((w[0].alpha(), w[0].beta()), (1.0, 0.0));
/// assert_eq!((w[10].alpha(), w[10].beta()), (0.0, 1.0));
/// ```
pub fn sweep_weights() -> Vec<FusionWeights> {
    (0..=10)
        .map(|i| FusionWeights::from_beta(0.1 * f64::from(i)).expect("beta within [0, 1]"))
        .collect()
}

/// Row-major concatenation into a feature vector.
pub fn flatten(t: &RealImage) -> Vec<f64> {
    t.data().to_vec()
}
