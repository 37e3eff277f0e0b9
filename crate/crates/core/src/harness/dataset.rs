use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{load_pnm, save_pnm, GrayImage, Image};
use crate::preprocess::extract_face;

const PNM_EXTENSIONS: [&str; 3] = ["pgm", "ppm", "pnm"];

/// One subject directory. `label` is the subject's index in sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subject {
    pub name: String,
    pub label: u32,
    pub images: Vec<PathBuf>,
}

/// A file left out of the manifest and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

/// Subjects and their images in the order that defines the odd/even split:
/// subject-major, both levels sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub subjects: Vec<Subject>,
    pub images_per_subject: usize,
    pub skipped: Vec<Skipped>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.subjects.len() * self.images_per_subject
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(label, path)` for every row.
    pub fn rows(&self) -> impl Iterator<Item = (u32, &Path)> + '_ {
        self.subjects
            .iter()
            .flat_map(|s| s.images.iter().map(move |p| (s.label, p.as_path())))
    }

    pub fn labels(&self) -> Vec<u32> {
        self.rows().map(|(l, _)| l).collect()
    }

    pub fn subject_names(&self) -> Vec<String> {
        self.subjects.iter().map(|s| s.name.clone()).collect()
    }

    /// Directory name of the root, used to label result rows.
    pub fn name(&self) -> String {
        self.root
            .file_name()
            .map_or_else(|| self.root.display().to_string(), |n| n.to_string_lossy().into_owned())
    }

    /// Keeps the first `n` images of every subject.
    pub fn truncated(mut self, n: usize) -> Result<Self> {
        if n > self.images_per_subject {
            return Err(Error::Manifest(format!(
                "asked for {n} images per subject, only {} available",
                self.images_per_subject
            )));
        }
        for s in &mut self.subjects {
            s.images.truncate(n);
        }
        self.images_per_subject = n;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.subjects.len() < 2 {
            return Err(Error::Manifest(format!(
                "{}: need at least 2 subjects, found {}",
                self.root.display(),
                self.subjects.len()
            )));
        }
        let n = self.images_per_subject;
        if let Some(s) = self.subjects.iter().find(|s| s.images.len() != n) {
            return Err(Error::Manifest(format!(
                "subject {:?} has {} images, expected {n}",
                s.name,
                s.images.len()
            )));
        }
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Manifest(format!(
                "images per subject must be even and nonzero, got {n}"
            )));
        }
        Ok(())
    }
}

fn is_pnm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| PNM_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Reads a `root/<subject>/<image>` tree.
///
/// Files that are not PNM images (by extension) and loose files directly under
/// `root` are recorded in [`DatasetManifest::skipped`] and logged.
pub fn scan_dataset(root: &Path) -> Result<DatasetManifest> {
    let mut subjects = Vec::new();
    let mut skipped = Vec::new();
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            skipped.push(Skipped {
                path: dir,
                reason: "not a subject directory".into(),
            });
            continue;
        }
        let mut images = Vec::new();
        for path in sorted_entries(&dir)? {
            if path.is_file() && is_pnm(&path) {
                images.push(path);
            } else {
                skipped.push(Skipped {
                    path,
                    reason: "not a PNM image".into(),
                });
            }
        }
        let name = dir
            .file_name()
            .expect("entry has a name")
            .to_string_lossy()
            .into_owned();
        subjects.push(Subject {
            name,
            label: subjects.len() as u32,
            images,
        });
    }
    for s in &skipped {
        log::warn!("skipping {}: {}", s.path.display(), s.reason);
    }
    let manifest = DatasetManifest {
        root: root.to_path_buf(),
        images_per_subject: subjects.first().map_or(0, |s| s.images.len()),
        subjects,
        skipped,
    };
    manifest.validate()?;
    Ok(manifest)
}

pub const SYNTH_SIZE: usize = 160;
const BACKGROUND: f64 = 20.0;
const FACE_LEVEL: f64 = 130.0;
const NOISE_SIGMA: f64 = 8.0;
const JITTER: i64 = 2;

#[derive(Clone, Debug)]
struct Blob {
    x: f64,
    y: f64,
    sigma: f64,
    amplitude: f64,
}

/// The fixed pattern of one synthetic subject.
#[derive(Clone, Debug)]
struct SubjectPattern {
    rx: f64,
    ry: f64,
    blobs: Vec<Blob>,
}

impl SubjectPattern {
    fn draw(rng: &mut impl Rng) -> Self {
        let rx = rng.random_range(44.0..54.0);
        let ry = rng.random_range(58.0..68.0);
        let blobs = (0..rng.random_range(3..=6))
            .map(|_| Blob {
                x: rng.random_range(-0.7..0.7) * rx,
                y: rng.random_range(-0.7..0.7) * ry,
                sigma: rng.random_range(8.0..18.0),
                amplitude: rng.random_range(-45.0..75.0),
            })
            .collect();
        SubjectPattern { rx, ry, blobs }
    }

    /// Noise-free intensity at an offset from the face center.
    fn value(&self, dx: f64, dy: f64) -> f64 {
        let r = (dx / self.rx).powi(2) + (dy / self.ry).powi(2);
        if r > 1.0 {
            return BACKGROUND;
        }
        let heat: f64 = self
            .blobs
            .iter()
            .map(|b| {
                let d2 = (dx - b.x).powi(2) + (dy - b.y).powi(2);
                b.amplitude * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum();
        // Cooler toward the rim, like skin temperature.
        FACE_LEVEL + heat - 25.0 * r
    }

    fn render(&self, rng: &mut ChaCha8Rng) -> GrayImage {
        let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
        let cx = (SYNTH_SIZE / 2) as i64 + rng.random_range(-JITTER..=JITTER);
        let cy = (SYNTH_SIZE / 2) as i64 + rng.random_range(-JITTER..=JITTER);
        GrayImage::from_fn(SYNTH_SIZE, SYNTH_SIZE, |x, y| {
            let v = self.value((x as i64 - cx) as f64, (y as i64 - cy) as f64);
            (v + noise.sample(rng)).round().clamp(0.0, 255.0) as u8
        })
    }
}

fn digits(n: usize) -> usize {
    n.max(1).to_string().len().max(2)
}

/// Generates `n_subjects x per_subject` binary PGMs under `out` and scans them.
///
/// Each subject is a seeded set of Gaussian heat blobs on an elliptical face
/// over a dark background; each image adds Gaussian noise and shifts the face
/// by up to two pixels. Output bytes depend only on the arguments.
pub fn synth_dataset(seed: u64, n_subjects: usize, per_subject: usize, out: &Path) -> Result<DatasetManifest> {
    for (subject, images) in synth_images(seed, n_subjects, per_subject).into_iter().enumerate() {
        let dir = out.join(format!("s{:0w$}", subject + 1, w = digits(n_subjects)));
        fs::create_dir_all(&dir)?;
        for (i, img) in images.into_iter().enumerate() {
            let path = dir.join(format!("img{:0w$}.pgm", i + 1, w = digits(per_subject)));
            fs::write(path, save_pnm(&Image::Gray(img), true)?)?;
        }
    }
    scan_dataset(out)
}

/// The images [`synth_dataset`] writes, grouped by subject.
pub fn synth_images(seed: u64, n_subjects: usize, per_subject: usize) -> Vec<Vec<GrayImage>> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let patterns: Vec<SubjectPattern> = (0..n_subjects).map(|_| SubjectPattern::draw(&mut master)).collect();
    patterns
        .iter()
        .enumerate()
        .map(|(s, pattern)| {
            (0..per_subject)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((s * per_subject + i) as u64 + 1);
                    pattern.render(&mut rng)
                })
                .collect()
        })
        .collect()
}

/// How [`preprocess_all`] treats images that fail the pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FailureMode {
    /// The first failure aborts the run.
    #[default]
    Strict,
    /// Failed images are dropped together with their odd/even partner.
    Lenient,
}

/// Normalized faces in manifest row order.
#[derive(Clone, Debug)]
pub struct FaceSet {
    pub name: String,
    pub faces: Vec<GrayImage>,
    pub labels: Vec<u32>,
    /// Source path of each face, empty for in-memory sets.
    pub paths: Vec<PathBuf>,
    /// Failures skipped in lenient mode.
    pub failures: Vec<Skipped>,
}

impl FaceSet {
    pub fn from_faces(name: impl Into<String>, faces: Vec<GrayImage>, labels: Vec<u32>) -> Result<Self> {
        if faces.len() != labels.len() {
            return Err(Error::size(format!(
                "{} faces but {} labels",
                faces.len(),
                labels.len()
            )));
        }
        Ok(FaceSet {
            name: name.into(),
            faces,
            labels,
            paths: Vec::new(),
            failures: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    Ok(load_pnm(&bytes)?.into_gray())
}

/// Loads and normalizes one image file.
pub fn preprocess_file(path: &Path) -> Result<GrayImage> {
    load_gray(path)
        .and_then(|g| extract_face(&g))
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
}

/// Runs every manifest image through grayscale conversion and face
/// extraction, in parallel, keeping manifest order.
pub fn preprocess_all(manifest: &DatasetManifest, mode: FailureMode) -> Result<FaceSet> {
    let rows: Vec<(u32, &Path)> = manifest.rows().collect();
    let results: Vec<Result<GrayImage>> = rows.par_iter().map(|(_, p)| preprocess_file(p)).collect();

    let mut failed_pairs = vec![false; rows.len().div_ceil(2)];
    let mut failures = Vec::new();
    let mut faces = Vec::with_capacity(rows.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(face) => faces.push(Some(face)),
            Err(e) => {
                if mode == FailureMode::Strict {
                    return Err(e);
                }
                log::warn!("{e}; dropping its train/test pair");
                failed_pairs[i / 2] = true;
                failures.push(Skipped {
                    path: rows[i].1.to_path_buf(),
                    reason: e.to_string(),
                });
                faces.push(None);
            }
        }
    }

    let mut set = FaceSet {
        name: manifest.name(),
        faces: Vec::new(),
        labels: Vec::new(),
        paths: Vec::new(),
        failures,
    };
    for (i, (face, (label, path))) in faces.into_iter().zip(rows).enumerate() {
        if failed_pairs[i / 2] {
            continue;
        }
        set.faces.push(face.expect("pair has no failures"));
        set.labels.push(label);
        set.paths.push(path.to_path_buf());
    }
    Ok(set)
}
