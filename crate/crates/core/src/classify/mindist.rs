use crate::codec::{put_f64s, put_u32, Reader};
use crate::eigen::FeatureMatrix;
use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};

/// One mean prototype per class.
#[derive(Clone, Debug, PartialEq)]
pub struct MinDistModel {
    /// `W x k`, row `j` is the mean of class `class_labels[j]`.
    pub prototypes: Matrix,
    pub class_labels: Vec<u32>,
    pub counts: Vec<u32>,
}

const MAGIC: &[u8; 8] = b"TFRSMDC1";

/// Per-class mean vectors, classes ordered by first appearance in `train`.
pub fn fit_min_distance(train: &FeatureMatrix) -> Result<MinDistModel> {
    if train.rows() == 0 {
        return Err(Error::size("no training vectors"));
    }
    let k = train.cols();
    let mut class_labels: Vec<u32> = Vec::new();
    let mut sums: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<u32> = Vec::new();
    for (x, label) in train.iter() {
        let j = match class_labels.iter().position(|&c| c == label) {
            Some(j) => j,
            None => {
                class_labels.push(label);
                sums.push(vec![0.0; k]);
                counts.push(0);
                class_labels.len() - 1
            }
        };
        axpy(1.0, x, &mut sums[j]);
        counts[j] += 1;
    }
    for (sum, &n) in sums.iter_mut().zip(&counts) {
        sum.iter_mut().for_each(|v| *v /= f64::from(n));
    }
    let w = class_labels.len();
    Ok(MinDistModel {
        prototypes: Matrix::from_vec(w, k, sums.into_iter().flatten().collect())?,
        class_labels,
        counts,
    })
}

impl MinDistModel {
    pub fn dim(&self) -> usize {
        self.prototypes.cols()
    }

    /// Euclidean distance from `x` to every prototype, in model order.
    pub fn distances(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::size(format!(
                "vector has length {}, prototypes have {}",
                x.len(),
                self.dim()
            )));
        }
        Ok((0..self.prototypes.rows())
            .map(|j| {
                self.prototypes
                    .row(j)
                    .iter()
                    .zip(x)
                    .map(|(m, v)| (v - m) * (v - m))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect())
    }

    /// Label of the nearest prototype; ties go to the earlier class.
    pub fn classify(&self, x: &[f64]) -> Result<u32> {
        let d = self.distances(x)?;
        let mut best = 0;
        for (j, &dj) in d.iter().enumerate().skip(1) {
            if dj < d[best] {
                best = j;
            }
        }
        Ok(self.class_labels[best])
    }

    /// `TFRSMDC1`, `W`, `k`, `W` labels, `W` counts (all `u32`), then the
    /// `W x k` prototypes as `f64`, little-endian throughout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        put_u32(&mut out, self.class_labels.len() as u32);
        put_u32(&mut out, self.dim() as u32);
        for &l in &self.class_labels {
            put_u32(&mut out, l);
        }
        for &c in &self.counts {
            put_u32(&mut out, c);
        }
        put_f64s(&mut out, self.prototypes.data());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        let w = r.u32()? as usize;
        let k = r.u32()? as usize;
        if w == 0 {
            return Err(Error::Format("model has no classes".into()));
        }
        let class_labels = r.u32s(w)?;
        let counts = r.u32s(w)?;
        let prototypes = Matrix::from_vec(w, k, r.f64s(w * k)?)?;
        r.finish()?;
        Ok(MinDistModel {
            prototypes,
            class_labels,
            counts,
        })
    }
}
