//! Raster containers shared by every pipeline stage, plus PNM I/O and the
//! RGB to 8-bit luminance conversion.
//!
//! All rasters are row-major with the origin at the top-left pixel. Storage
//! coordinates are 0-based `(x, y)` = `(column, row)`.

mod pnm;

pub use pnm::{load_pnm, save_pnm};

use crate::error::{Error, Result};

/// A row-major 2D grid of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit grayscale image.
pub type GrayImage = Plane<u8>;
/// Real-valued grayscale image, used after the wavelet and fusion stages.
pub type RealImage = Plane<f64>;
/// Foreground (`true`) / background (`false`) mask.
pub type BinaryImage = Plane<bool>;
/// 24-bit color image, one `[red, green, blue]` triple per pixel.
pub type RgbImage = Plane<[u8; 3]>;

impl<T> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::size(format!("empty raster {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::size(format!(
                "raster {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane { width, height, data })
    }

    /// Builds a plane by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "empty raster {width}x{height}");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Plane<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl<T: Copy> Plane<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Plane::from_fn(width, height, |_, _| value)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }
}

impl GrayImage {
    pub fn to_real(&self) -> RealImage {
        self.map(|&v| f64::from(v))
    }
}

impl RealImage {
    /// Rounds half away from zero and clamps into `[0, 255]`.
    pub fn quantize(&self) -> GrayImage {
        self.map(|&v| v.round().clamp(0.0, 255.0) as u8)
    }
}

impl BinaryImage {
    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Connected-component labels; 0 is background, foreground labels run `1..=label_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelImage {
    labels: Plane<u32>,
    label_count: u32,
}

impl LabelImage {
    /// Validates that every label in `1..=label_count` occurs and nothing exceeds it.
    pub fn new(labels: Plane<u32>, label_count: u32) -> Result<Self> {
        let mut seen = vec![false; label_count as usize + 1];
        for &l in labels.data() {
            if l > label_count {
                return Err(Error::size(format!("label {l} exceeds count {label_count}")));
            }
            seen[l as usize] = true;
        }
        if let Some(missing) = (1..=label_count as usize).find(|&l| !seen[l]) {
            return Err(Error::size(format!("label {missing} never occurs")));
        }
        Ok(LabelImage { labels, label_count })
    }

    pub(crate) fn new_unchecked(labels: Plane<u32>, label_count: u32) -> Self {
        LabelImage { labels, label_count }
    }

    pub fn width(&self) -> usize {
        self.labels.width()
    }

    pub fn height(&self) -> usize {
        self.labels.height()
    }

    pub fn label_count(&self) -> u32 {
        self.label_count
    }

    pub fn labels(&self) -> &Plane<u32> {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels.get(x, y)
    }

    /// Pixel count per label, indexed by label (entry 0 counts background).
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.label_count as usize + 1];
        for &l in self.labels.data() {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Any raster that can cross the PNM boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
    /// Real-valued intermediate; must be quantized before it can be saved.
    Real(RealImage),
}

impl Image {
    pub fn width(&self) -> usize {
        match self {
            Image::Gray(p) => p.width(),
            Image::Rgb(p) => p.width(),
            Image::Real(p) => p.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Image::Gray(p) => p.height(),
            Image::Rgb(p) => p.height(),
            Image::Real(p) => p.height(),
        }
    }

    /// 8-bit luminance view: RGB goes through [`to_grayscale`], real images are quantized.
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(rgb) => to_grayscale(&rgb),
            Image::Real(r) => r.quantize(),
        }
    }
}

const LUMA_RED: f64 = 0.2989;
const LUMA_GREEN: f64 = 0.5870;
const LUMA_BLUE: f64 = 0.1140;

/// Weighted luminance `0.2989 R + 0.5870 G + 0.1140 B`, rounded half away from
/// zero and clamped to `[0, 255]`.
///
/// ```
/// use tfrs::image::{to_grayscale, RgbImage};
///
/// let rgb = RgbImage::new(3, 1, vec![[255, 255, 255], [0, 0, 0], [255, 0, 0]]).unwrap();
/// assert_eq!(to_grayscale(&rgb).data(), &[255, 0, 76]);
/// ```
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    img.map(|&[r, g, b]| {
        let luma = LUMA_RED * f64::from(r) + LUMA_GREEN * f64::from(g) + LUMA_BLUE * f64::from(b);
        luma.round().clamp(0.0, 255.0) as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grayscale_reference_pixels() {
        let rgb = RgbImage::new(2, 1, vec![[255, 255, 255], [255, 0, 0]]).unwrap();
        assert_eq!(to_grayscale(&rgb).data(), &[255, 76]);
        let black = RgbImage::filled(1, 1, [0, 0, 0]);
        assert_eq!(to_grayscale(&black).data(), &[0]);
    }

    #[test]
    fn plane_rejects_bad_lengths() {
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn label_image_validation() {
        let p = Plane::new(3, 1, vec![0, 1, 2]).unwrap();
        assert!(LabelImage::new(p.clone(), 2).is_ok());
        assert!(LabelImage::new(p.clone(), 1).is_err());
        assert!(LabelImage::new(p, 3).is_err());
    }

    proptest! {
        #[test]
        fn grayscale_within_channel_range(r: u8, g: u8, b: u8) {
            let out = to_grayscale(&RgbImage::filled(1, 1, [r, g, b])).get(0, 0) as i32;
            let lo = r.min(g).min(b) as i32;
            let hi = r.max(g).max(b) as i32;
            prop_assert!(out >= lo - 1 && out <= hi + 1);
        }

        #[test]
        fn grayscale_is_pixel_local(pixels in proptest::collection::vec(any::<[u8; 3]>(), 2..40)) {
            let n = pixels.len();
            let img = RgbImage::new(n, 1, pixels.clone()).unwrap();
            let mut reversed = pixels;
            reversed.reverse();
            let rev = RgbImage::new(n, 1, reversed).unwrap();
            let a = to_grayscale(&img).into_data();
            let mut b = to_grayscale(&rev).into_data();
            b.reverse();
            prop_assert_eq!(a, b);
        }
    }
}
