//! Thermal face recognition pipeline.
//!
//! Raw thermal captures are reduced to an elliptically cropped 112x92 face,
//! described either by a fused Haar-wavelet confidence matrix or by block LBP
//! histograms, projected onto eigenfaces and classified by a small tanh
//! network or a nearest class-mean rule. The [`harness`] module runs the
//! odd/even train/test protocol over whole datasets and emits result tables.

pub mod classify;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod image;
pub mod lbp;
pub mod linalg;
pub mod preprocess;
pub mod wavelet;

mod codec;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/images.md")]
    mod images {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/wavelet.md")]
    mod wavelet {}
    #[doc = include_str!("../../../book/src/lbp.md")]
    mod lbp {}
    #[doc = include_str!("../../../book/src/eigenfaces.md")]
    mod eigenfaces {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
