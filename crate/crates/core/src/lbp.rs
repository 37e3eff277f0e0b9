//! Basic 3x3 local binary patterns and block-histogram features.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Plane};

/// Side of the square tiles histogrammed by [`block_features`].
pub const BLOCK_SIZE: usize = 8;
pub const BINS: usize = 256;

/// LBP codes of every interior pixel; `(H - 2) x (W - 2)` for an `H x W` source.
pub type LbpCodeImage = Plane<u8>;

/// Offsets of the eight neighbors, clockwise from the top-left. The first
/// entry lands in the most significant bit.
const NEIGHBORS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

/// Code of a 3x3 neighborhood given row-major.
///
/// Bit `k` (counting from the MSB) is set when neighbor `k` is at least the
/// center, neighbors running clockwise from the top-left corner:
///
/// ```text
/// 128  64  32
///   1   c  16
///   2   4   8
/// ```
///
/// ```
/// use tfrs::lbp::lbp_code;
///
/// assert_eq!(lbp_code(&[[6, 5, 2], [7, 6, 1], [9, 8, 7]]), 0b1000_1111);
/// ```
pub fn lbp_code(n: &[[u8; 3]; 3]) -> u8 {
    let center = n[1][1];
    NEIGHBORS.iter().fold(0u8, |code, &(dx, dy)| {
        let v = n[(1 + dy) as usize][(1 + dx) as usize];
        (code << 1) | u8::from(v >= center)
    })
}

/// Codes for every pixel that has a full 3x3 neighborhood.
pub fn lbp_image(img: &GrayImage) -> Result<LbpCodeImage> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::size(format!("LBP needs at least 3x3, got {w}x{h}")));
    }
    Ok(LbpCodeImage::from_fn(w - 2, h - 2, |x, y| {
        let mut n = [[0u8; 3]; 3];
        for (dy, row) in n.iter_mut().enumerate() {
            for (dx, v) in row.iter_mut().enumerate() {
                *v = img.get(x + dx, y + dy);
            }
        }
        lbp_code(&n)
    }))
}

/// Concatenated 256-bin histograms of non-overlapping square blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockHistogramFeature {
    pub blocks_y: usize,
    pub blocks_x: usize,
    /// Block histograms in row-major block order.
    pub data: Vec<f64>,
}

impl BlockHistogramFeature {
    pub fn block(&self, by: usize, bx: usize) -> &[f64] {
        let start = (by * self.blocks_x + bx) * BINS;
        &self.data[start..start + BINS]
    }

    pub fn block_count(&self) -> usize {
        self.blocks_y * self.blocks_x
    }
}

/// Tiles the code image into `block_size` squares, dropping partial tiles at
/// the right and bottom edges, and histograms each tile.
pub fn block_features(codes: &LbpCodeImage, block_size: usize) -> Result<BlockHistogramFeature> {
    if block_size == 0 || codes.width() < block_size || codes.height() < block_size {
        return Err(Error::size(format!(
            "{}x{} code image holds no {block_size}x{block_size} block",
            codes.width(),
            codes.height()
        )));
    }
    let blocks_x = codes.width() / block_size;
    let blocks_y = codes.height() / block_size;
    let mut data = vec![0.0; blocks_x * blocks_y * BINS];
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let hist = &mut data[(by * blocks_x + bx) * BINS..][..BINS];
            for y in by * block_size..(by + 1) * block_size {
                for &code in &codes.row(y)[bx * block_size..(bx + 1) * block_size] {
                    hist[code as usize] += 1.0;
                }
            }
        }
    }
    Ok(BlockHistogramFeature {
        blocks_y,
        blocks_x,
        data,
    })
}
