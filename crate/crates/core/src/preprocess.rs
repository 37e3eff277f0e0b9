//! Face-region extraction: global-mean binarization, connected-component
//! labeling, centroid, midpoint-ellipse mask and the final fixed-size crop.
//!
//! Formulas use 1-based `(x, y)` = `(column, row)` coordinates, the same as
//! [`Centroid`]. Storage is 0-based; the conversion happens only inside this
//! module.

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage, LabelImage, Plane};

/// Height of every normalized face crop.
pub const FACE_HEIGHT: usize = 112;
/// Width of every normalized face crop.
pub const FACE_WIDTH: usize = 92;

/// Mean foreground coordinate, 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Centroid {
    /// Column coordinate.
    pub x: f64,
    /// Row coordinate.
    pub y: f64,
}

impl Centroid {
    /// 0-based storage column and row of the pixel containing the centroid.
    fn pixel(&self) -> (i64, i64) {
        (self.x.round() as i64 - 1, self.y.round() as i64 - 1)
    }
}

/// Axis-aligned ellipse: `semi_minor` is horizontal, `semi_major` vertical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseSpec {
    pub center: Centroid,
    pub semi_minor: u32,
    pub semi_major: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

pub fn mean_gray(img: &GrayImage) -> f64 {
    let sum: u64 = img.data().iter().map(|&v| u64::from(v)).sum();
    sum as f64 / img.data().len() as f64
}

/// A pixel is foreground when its value is at least the image mean.
pub fn binarize(img: &GrayImage) -> BinaryImage {
    let mean = mean_gray(img);
    img.map(|&v| f64::from(v) >= mean)
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // Slot 0 is background and never merged.
        DisjointSet { parent: vec![0] }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grandparent = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grandparent;
            i = grandparent;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Smaller root wins so roots stay stable across runs.
        match ra.cmp(&rb) {
            std::cmp::Ordering::Less => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Greater => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Equal => {}
        }
    }
}

/// Two-pass connected-component labeling.
///
/// The first raster pass hands out provisional labels and records label
/// equivalences in a disjoint-set forest; the second pass resolves every
/// pixel to its class representative. Final labels are numbered `1..=K` in
/// order of first row-major appearance.
pub fn label_components(img: &BinaryImage, conn: Connectivity) -> LabelImage {
    let (w, h) = (img.width(), img.height());
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    let offsets: &[(isize, isize)] = match conn {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let mut label = 0u32;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize {
                    continue;
                }
                let neighbor = provisional[ny as usize * w + nx as usize];
                if neighbor == 0 {
                    continue;
                }
                if label == 0 {
                    label = neighbor;
                } else if neighbor != label {
                    sets.union(label, neighbor);
                    label = label.min(neighbor);
                }
            }
            if label == 0 {
                label = sets.make_set();
            }
            provisional[y * w + x] = label;
        }
    }

    let mut renumber = vec![0u32; sets.parent.len()];
    let mut next = 0u32;
    for label in provisional.iter_mut() {
        if *label == 0 {
            continue;
        }
        let root = sets.find(*label) as usize;
        if renumber[root] == 0 {
            next += 1;
            renumber[root] = next;
        }
        *label = renumber[root];
    }

    LabelImage::new_unchecked(
        Plane::new(w, h, provisional).expect("label plane matches input dims"),
        next,
    )
}

/// Mask of the component with the most pixels; ties go to the smaller label.
pub fn largest_component(labels: &LabelImage) -> Result<BinaryImage> {
    if labels.label_count() == 0 {
        return Err(Error::NoComponent);
    }
    let sizes = labels.sizes();
    let mut best = 1usize;
    for (label, &size) in sizes.iter().enumerate().skip(2) {
        if size > sizes[best] {
            best = label;
        }
    }
    Ok(labels.labels().map(|&l| l as usize == best))
}

pub fn centroid(mask: &BinaryImage) -> Result<Centroid> {
    let (mut sx, mut sy, mut n) = (0.0f64, 0.0f64, 0usize);
    for y in 0..mask.height() {
        for (x, &fg) in mask.row(y).iter().enumerate() {
            if fg {
                sx += (x + 1) as f64;
                sy += (y + 1) as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::NoComponent);
    }
    Ok(Centroid {
        x: sx / n as f64,
        y: sy / n as f64,
    })
}

/// Ellipse axes from the mask's extent through the centroid.
///
/// The horizontal semi-axis is the distance from the centroid to the rightmost
/// foreground pixel on the centroid's row (the "right ear"); the vertical one
/// is the distance to the topmost foreground pixel in the centroid's column
/// (the "forehead"). Both are rounded and clamped to at least 1. This is an
/// extent-based stand-in for landmark detection.
pub fn estimate_axes(mask: &BinaryImage, c: Centroid) -> Result<EllipseSpec> {
    let (col, row) = c.pixel();
    if col < 0 || row < 0 || col as usize >= mask.width() || row as usize >= mask.height() {
        return Err(Error::DegenerateMask(format!(
            "centroid ({:.2}, {:.2}) outside the mask",
            c.x, c.y
        )));
    }
    let (col, row) = (col as usize, row as usize);

    let rightmost = mask
        .row(row)
        .iter()
        .rposition(|&fg| fg)
        .ok_or_else(|| Error::DegenerateMask(format!("row {} has no foreground", row + 1)))?;
    let topmost = (0..mask.height())
        .find(|&y| mask.get(col, y))
        .ok_or_else(|| Error::DegenerateMask(format!("column {} has no foreground", col + 1)))?;

    let semi_minor = ((rightmost + 1) as f64 - c.x).round().max(1.0) as u32;
    let semi_major = (c.y - (topmost + 1) as f64).round().max(1.0) as u32;
    Ok(EllipseSpec {
        center: c,
        semi_minor,
        semi_major,
    })
}

/// First-quadrant boundary points of the midpoint ellipse algorithm with
/// horizontal radius `rx` and vertical radius `ry`.
///
/// Decision parameters are kept scaled by 4 so the quarter terms stay integral.
pub fn midpoint_ellipse_quadrant(rx: u32, ry: u32) -> Vec<(i64, i64)> {
    let (rx, ry) = (i64::from(rx), i64::from(ry));
    let (rx2, ry2) = (rx * rx, ry * ry);
    let mut points = Vec::new();

    let (mut x, mut y) = (0i64, ry);
    let (mut px, mut py) = (0i64, 2 * rx2 * y);
    points.push((x, y));

    let mut p = 4 * ry2 - 4 * rx2 * ry + rx2;
    while px < py {
        x += 1;
        px += 2 * ry2;
        if p < 0 {
            p += 4 * (ry2 + px);
        } else {
            y -= 1;
            py -= 2 * rx2;
            p += 4 * (ry2 + px - py);
        }
        points.push((x, y));
    }

    p = ry2 * (2 * x + 1) * (2 * x + 1) + 4 * rx2 * (y - 1) * (y - 1) - 4 * rx2 * ry2;
    while y > 0 {
        y -= 1;
        py -= 2 * rx2;
        if p > 0 {
            p += 4 * (rx2 - py);
        } else {
            x += 1;
            px += 2 * ry2;
            p += 4 * (rx2 - py + px);
        }
        points.push((x, y));
    }
    points
}

/// Half-width of the filled ellipse on each row offset `0..=ry`.
fn ellipse_spans(rx: u32, ry: u32) -> Vec<i64> {
    let mut spans = vec![0i64; ry as usize + 1];
    for (x, y) in midpoint_ellipse_quadrant(rx, ry) {
        let slot = &mut spans[y as usize];
        *slot = (*slot).max(x);
    }
    // Interior test: (dx/rx)^2 + (dy/ry)^2 <= 1, exact in integers.
    let (a2, b2) = (i64::from(rx).pow(2), i64::from(ry).pow(2));
    for (dy, span) in spans.iter_mut().enumerate() {
        let dy2 = (dy as i64).pow(2);
        let mut dx = *span + 1;
        while dx * dx * b2 + dy2 * a2 <= a2 * b2 {
            dx += 1;
        }
        *span = (*span).max(dx - 1);
    }
    spans
}

/// Filled ellipse rasterized with the midpoint algorithm, clipped to the image.
///
/// The center snaps to the pixel that contains the centroid. Each row is
/// filled between the rasterized boundary points, extended by any pixel that
/// passes the implicit interior test.
pub fn ellipse_mask(spec: &EllipseSpec, width: usize, height: usize) -> BinaryImage {
    let mut mask = BinaryImage::filled(width, height, false);
    let (cx, cy) = spec.center.pixel();
    let spans = ellipse_spans(spec.semi_minor, spec.semi_major);
    for (dy, &half) in spans.iter().enumerate() {
        for y in [cy - dy as i64, cy + dy as i64] {
            if y < 0 || y >= height as i64 {
                continue;
            }
            let lo = (cx - half).max(0);
            let hi = (cx + half).min(width as i64 - 1);
            for x in lo..=hi {
                mask.set(x as usize, y as usize, true);
            }
        }
    }
    mask
}

fn bilinear_resize(src: &GrayImage, out_w: usize, out_h: usize) -> GrayImage {
    // Corner-aligned sampling: equal sizes map every pixel onto itself.
    let scale = |out: usize, len: usize| {
        if out > 1 && len > 1 {
            (len - 1) as f64 / (out - 1) as f64
        } else {
            0.0
        }
    };
    let (sx, sy) = (scale(out_w, src.width()), scale(out_h, src.height()));
    GrayImage::from_fn(out_w, out_h, |x, y| {
        let fx = x as f64 * sx;
        let fy = y as f64 * sy;
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let x1 = (x0 + 1).min(src.width() - 1);
        let y1 = (y0 + 1).min(src.height() - 1);
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let p = |x: usize, y: usize| f64::from(src.get(x, y));
        let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
        let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
        (top * (1.0 - ty) + bottom * ty).round().clamp(0.0, 255.0) as u8
    })
}

/// Keeps gray values inside the ellipse, zeroes the rest, cuts out the
/// ellipse's (clipped) bounding box and resamples it bilinearly to
/// [`FACE_HEIGHT`] x [`FACE_WIDTH`].
pub fn crop_and_normalize(gray: &GrayImage, spec: &EllipseSpec) -> Result<GrayImage> {
    let mask = ellipse_mask(spec, gray.width(), gray.height());
    let (cx, cy) = spec.center.pixel();
    let (a, b) = (i64::from(spec.semi_minor), i64::from(spec.semi_major));
    let x0 = (cx - a).max(0);
    let x1 = (cx + a).min(gray.width() as i64 - 1);
    let y0 = (cy - b).max(0);
    let y1 = (cy + b).min(gray.height() as i64 - 1);
    if x0 > x1 || y0 > y1 || mask.count_foreground() == 0 {
        return Err(Error::DegenerateMask(
            "ellipse bounding box does not intersect the image".into(),
        ));
    }
    let (crop_w, crop_h) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let crop = GrayImage::from_fn(crop_w, crop_h, |x, y| {
        let (gx, gy) = (x0 + x, y0 + y);
        if mask.get(gx, gy) {
            gray.get(gx, gy)
        } else {
            0
        }
    });
    Ok(bilinear_resize(&crop, FACE_WIDTH, FACE_HEIGHT))
}

/// Every preprocessing stage in order: binarize, 8-connected labeling,
/// largest component, centroid, axis estimate, elliptic crop.
pub fn extract_face(gray: &GrayImage) -> Result<GrayImage> {
    let binary = binarize(gray);
    let labels = label_components(&binary, Connectivity::Eight);
    let face = largest_component(&labels)?;
    let c = centroid(&face)?;
    let spec = estimate_axes(&face, c)?;
    crop_and_normalize(gray, &spec)
}
