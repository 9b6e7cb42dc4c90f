//! Synthetic 2D datasets, MNIST IDX ingestion and image preprocessing.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{normalize_grayscale, GrayscaleImage, PhaseVector};
use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// How raw features become input phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// `theta = (x1, x2)` on one qubit.
    Direct2d,
    /// `theta = (0, x1, x2, 0)` on two qubits; the last weight acts as a bias.
    Bias4d,
    /// Features already are phases (e.g. normalized pixels).
    Image,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    samples: Vec<Vec<f64>>,
    labels: Vec<u8>,
    encoding: Encoding,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Vec<f64>>, labels: Vec<u8>, encoding: Encoding) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: samples.len(),
                right: labels.len(),
            });
        }
        for (i, s) in samples.iter().enumerate() {
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {i} has a non-finite feature")));
            }
            let ok = match encoding {
                Encoding::Direct2d | Encoding::Bias4d => s.len() == 2,
                Encoding::Image => s.len() >= 2 && s.len().is_power_of_two(),
            };
            if !ok {
                return Err(Error::Shape(format!(
                    "sample {i} has {} features, incompatible with {encoding:?}",
                    s.len()
                )));
            }
        }
        Ok(Self {
            samples,
            labels,
            encoding,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn encode(&self, index: usize) -> PhaseVector {
        let s = &self.samples[index];
        match self.encoding {
            Encoding::Direct2d => encode_2d([s[0], s[1]]),
            Encoding::Bias4d => encode_2d_bias([s[0], s[1]]),
            Encoding::Image => PhaseVector::new(s.clone()).expect("validated at construction"),
        }
    }

    pub fn encoded(&self) -> Vec<PhaseVector> {
        (0..self.len()).map(|i| self.encode(i)).collect()
    }

    /// First `train_len` samples and the rest.
    pub fn split_at(&self, train_len: usize) -> (Self, Self) {
        let k = train_len.min(self.len());
        let part = |r: std::ops::Range<usize>| Self {
            samples: self.samples[r.clone()].to_vec(),
            labels: self.labels[r].to_vec(),
            encoding: self.encoding,
        };
        (part(0..k), part(k..self.len()))
    }

    /// CSV with header `x1,x2,label`; two-feature datasets only.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        if self.encoding == Encoding::Image {
            return Err(Error::Shape("CSV export holds two-feature datasets only".into()));
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x1", "x2", "label"])?;
        for (s, l) in self.samples.iter().zip(&self.labels) {
            w.write_record([s[0].to_string(), s[1].to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, encoding: Encoding) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            x1: f64,
            x2: f64,
            label: u8,
        }
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: Row = row?;
            samples.push(vec![row.x1, row.x2]);
            labels.push(row.label);
        }
        Self::new(samples, labels, encoding)
    }
}

/// `theta = (x1, x2)`.
pub fn encode_2d(x: [f64; 2]) -> PhaseVector {
    PhaseVector::new(x.to_vec()).expect("length 2")
}

/// `theta = (0, x1, x2, 0)`.
pub fn encode_2d_bias(x: [f64; 2]) -> PhaseVector {
    PhaseVector::new(vec![0.0, x[0], x[1], 0.0]).expect("length 4")
}

/// Weight vector `(0, phi1, phi2, b)` paired with [`encode_2d_bias`].
pub fn bias_weights(phi1: f64, phi2: f64, bias: f64) -> PhaseVector {
    PhaseVector::new(vec![0.0, phi1, phi2, bias]).expect("length 4")
}

/// Whether every feature lies in the recommended `[0, pi/2]` range.
pub fn in_phase_range(x: &[f64]) -> bool {
    x.iter().all(|v| (0.0..=FRAC_PI_2).contains(v))
}

/// Diagonal band: label 1 iff `|x1 - x2| < band`. Points with
/// `band <= |x1 - x2| < band + gap` are never emitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandParams {
    pub band: f64,
    pub gap: f64,
}

impl Default for BandParams {
    fn default() -> Self {
        Self { band: 0.35, gap: 0.2 }
    }
}

impl BandParams {
    pub fn label(&self, x: [f64; 2]) -> u8 {
        u8::from((x[0] - x[1]).abs() < self.band)
    }
}

/// Disk: label 1 iff `|x - center| < radius`. Points with
/// `radius <= |x - center| < radius + gap` are never emitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleParams {
    pub center: [f64; 2],
    pub radius: f64,
    pub gap: f64,
}

impl Default for CircleParams {
    fn default() -> Self {
        Self {
            center: [FRAC_PI_4, FRAC_PI_4],
            radius: 0.45,
            gap: 0.3,
        }
    }
}

impl CircleParams {
    pub fn distance(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.center[0]).hypot(x[1] - self.center[1])
    }

    pub fn label(&self, x: [f64; 2]) -> u8 {
        u8::from(self.distance(x) < self.radius)
    }
}

fn rejection_sample(
    m: usize,
    seed: u64,
    encoding: Encoding,
    mut accept: impl FnMut([f64; 2]) -> Option<u8>,
) -> Result<LabeledDataset> {
    if m < 2 {
        return Err(Error::InvalidParameter("a dataset needs at least 2 points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    let mut attempts = 0usize;
    while samples.len() < m {
        attempts += 1;
        if attempts > 1000 * m {
            return Err(Error::InvalidParameter("generator rejects almost every point".into()));
        }
        let x = [rng.random::<f64>() * FRAC_PI_2, rng.random::<f64>() * FRAC_PI_2];
        if let Some(label) = accept(x) {
            samples.push(x.to_vec());
            labels.push(label);
        }
    }
    LabeledDataset::new(samples, labels, encoding)
}

pub fn generate_2d_dataset(m: usize, seed: u64) -> Result<LabeledDataset> {
    generate_2d_dataset_with(m, &BandParams::default(), seed)
}

pub fn generate_2d_dataset_with(m: usize, params: &BandParams, seed: u64) -> Result<LabeledDataset> {
    rejection_sample(m, seed, Encoding::Direct2d, |x| {
        let d = (x[0] - x[1]).abs();
        (d < params.band || d >= params.band + params.gap).then(|| params.label(x))
    })
}

pub fn generate_circle_dataset(m: usize, seed: u64) -> Result<LabeledDataset> {
    generate_circle_dataset_with(m, &CircleParams::default(), seed)
}

pub fn generate_circle_dataset_with(m: usize, params: &CircleParams, seed: u64) -> Result<LabeledDataset> {
    rejection_sample(m, seed, Encoding::Bias4d, |x| {
        let r = params.distance(x);
        (r < params.radius || r >= params.radius + params.gap).then(|| params.label(x))
    })
}

/// Provenance record written next to exported datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub generator: String,
    pub params: serde_json::Value,
    pub m: usize,
    pub seed: u64,
}

impl DatasetManifest {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn new(generator: &str, params: impl Serialize, m: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            format_version: Self::FORMAT_VERSION,
            generator: generator.to_owned(),
            params: serde_json::to_value(params)?,
            m,
            seed,
        })
    }

    /// Re-runs the recorded generator.
    pub fn regenerate(&self) -> Result<LabeledDataset> {
        match self.generator.as_str() {
            "band-2d" => generate_2d_dataset_with(self.m, &serde_json::from_value(self.params.clone())?, self.seed),
            "circles" => {
                generate_circle_dataset_with(self.m, &serde_json::from_value(self.params.clone())?, self.seed)
            }
            other => Err(Error::InvalidParameter(format!("unknown generator {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------- MNIST / IDX

#[derive(Clone, Debug, PartialEq)]
pub struct MnistSet {
    pub images: Vec<GrayscaleImage>,
    pub labels: Vec<u8>,
}

impl MnistSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Indices of samples whose label is one of `digits`, in file order.
    pub fn indices_of(&self, digits: &[u8]) -> Vec<usize> {
        (0..self.len()).filter(|&i| digits.contains(&self.labels[i])).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> MnistSet {
        MnistSet {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            offset: bytes.len(),
            message: format!("truncated header: expected at least {} bytes, found {}", offset + 4, bytes.len()),
        })
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Format {
            offset: 0,
            message: format!("magic number {magic:#010x} does not match {what} magic {expected:#010x}"),
        });
    }
    Ok(())
}

fn check_len(bytes: &[u8], expected: usize) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::Format {
            offset: bytes.len().min(expected),
            message: if bytes.len() < expected {
                format!("truncated file: expected {expected} bytes, found {}", bytes.len())
            } else {
                format!("trailing data: expected {expected} bytes, found {}", bytes.len())
            },
        });
    }
    Ok(())
}

/// Parses an IDX3 image file (`0x00000803`, count, rows, cols, pixels).
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayscaleImage>> {
    check_magic(bytes, IDX_IMAGES_MAGIC, "image")?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let size = rows * cols;
    check_len(bytes, 16 + count * size)?;
    bytes[16..]
        .chunks_exact(size.max(1))
        .take(count)
        .map(|px| GrayscaleImage::new(cols, rows, px.to_vec()))
        .collect()
}

/// Parses an IDX1 label file (`0x00000801`, count, labels).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IDX_LABELS_MAGIC, "label")?;
    let count = read_u32(bytes, 4)? as usize;
    check_len(bytes, 8 + count)?;
    let labels = bytes[8..].to_vec();
    if let Some(pos) = labels.iter().position(|&l| l > 9) {
        return Err(Error::Format {
            offset: 8 + pos,
            message: format!("label {} is not a digit", labels[pos]),
        });
    }
    Ok(labels)
}

pub fn encode_idx_images(images: &[GrayscaleImage]) -> Result<Vec<u8>> {
    let (rows, cols) = images.first().map_or((0, 0), |i| (i.height(), i.width()));
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IDX_IMAGES_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        if (img.height(), img.width()) != (rows, cols) {
            return Err(Error::Shape("IDX images must share one shape".into()));
        }
        out.extend_from_slice(img.pixels());
    }
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn load_mnist_idx(image_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<MnistSet> {
    let images = parse_idx_images(&fs::read(image_path)?)?;
    let labels = parse_idx_labels(&fs::read(label_path)?)?;
    if images.len() != labels.len() {
        return Err(Error::Format {
            offset: 4,
            message: format!("{} images but {} labels", images.len(), labels.len()),
        });
    }
    Ok(MnistSet { images, labels })
}

/// Standard file names inside an MNIST directory.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<(MnistSet, MnistSet)> {
    let d = dir.as_ref();
    let train = load_mnist_idx(d.join("train-images-idx3-ubyte"), d.join("train-labels-idx1-ubyte"))?;
    let test = load_mnist_idx(d.join("t10k-images-idx3-ubyte"), d.join("t10k-labels-idx1-ubyte"))?;
    Ok((train, test))
}

/// Centers `img` on a `side x side` canvas filled with `pad_value`.
pub fn pad_centered(img: &GrayscaleImage, side: usize, pad_value: u8) -> Result<GrayscaleImage> {
    if img.width() > side || img.height() > side || !(side - img.width()).is_multiple_of(2) || !(side - img.height()).is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "cannot center {}x{} on {side}x{side}",
            img.width(),
            img.height()
        )));
    }
    let (dr, dc) = ((side - img.height()) / 2, (side - img.width()) / 2);
    let mut out = GrayscaleImage::filled(side, side, pad_value);
    for r in 0..img.height() {
        for c in 0..img.width() {
            out.set(r + dr, c + dc, img.get(r, c));
        }
    }
    Ok(out)
}

/// 28x28 to 32x32 with a 2-pixel border of `pad_value`.
pub fn pad_to_32(img: &GrayscaleImage, pad_value: u8) -> Result<GrayscaleImage> {
    if (img.width(), img.height()) != (28, 28) {
        return Err(Error::Shape(format!("expected 28x28, got {}x{}", img.width(), img.height())));
    }
    pad_centered(img, 32, pad_value)
}

fn pooling_blocks(img: &GrayscaleImage, out_side: usize) -> Result<(usize, usize)> {
    if out_side == 0 || !img.width().is_multiple_of(out_side) || !img.height().is_multiple_of(out_side) {
        return Err(Error::Shape(format!(
            "{}x{} does not split into {out_side}x{out_side} blocks",
            img.width(),
            img.height()
        )));
    }
    Ok((img.height() / out_side, img.width() / out_side))
}

/// Block means before rounding, row-major.
pub fn mean_pool_exact(img: &GrayscaleImage, out_side: usize) -> Result<Vec<f64>> {
    let (bh, bw) = pooling_blocks(img, out_side)?;
    let mut out = Vec::with_capacity(out_side * out_side);
    for br in 0..out_side {
        for bc in 0..out_side {
            let mut sum = 0u32;
            for r in br * bh..(br + 1) * bh {
                for c in bc * bw..(bc + 1) * bw {
                    sum += u32::from(img.get(r, c));
                }
            }
            out.push(f64::from(sum) / (bh * bw) as f64);
        }
    }
    Ok(out)
}

/// Mean pooling to `out_side x out_side`, rounding halves up.
pub fn mean_pool(img: &GrayscaleImage, out_side: usize) -> Result<GrayscaleImage> {
    let (bh, bw) = pooling_blocks(img, out_side)?;
    let n = (bh * bw) as u32;
    let mut px = Vec::with_capacity(out_side * out_side);
    for br in 0..out_side {
        for bc in 0..out_side {
            let mut sum = 0u32;
            for r in br * bh..(br + 1) * bh {
                for c in bc * bw..(bc + 1) * bw {
                    sum += u32::from(img.get(r, c));
                }
            }
            px.push(((2 * sum + n) / (2 * n)) as u8);
        }
    }
    GrayscaleImage::new(out_side, out_side, px)
}

/// Image preprocessing ahead of phase encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preprocess {
    /// Pad 28x28 to 32x32 (n = 10 qubits).
    Pad32 { pad_value: u8 },
    /// Mean-pool to `side x side`.
    Pool { side: usize },
}

impl Preprocess {
    pub fn apply(&self, img: &GrayscaleImage) -> Result<PhaseVector> {
        match *self {
            Self::Pad32 { pad_value } => normalize_grayscale(&pad_to_32(img, pad_value)?),
            Self::Pool { side } => normalize_grayscale(&mean_pool(img, side)?),
        }
    }
}

/// Binary dataset of encoded images: label 1 for `positive`, 0 otherwise.
pub fn mnist_binary_dataset(set: &MnistSet, positive: u8, pre: Preprocess) -> Result<LabeledDataset> {
    let samples = set
        .images
        .iter()
        .map(|img| pre.apply(img).map(PhaseVector::into_vec))
        .collect::<Result<Vec<_>>>()?;
    let labels = set.labels.iter().map(|&l| u8::from(l == positive)).collect();
    LabeledDataset::new(samples, labels, Encoding::Image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_image(w: usize, h: usize, seed: u64) -> GrayscaleImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayscaleImage::new(w, h, (0..w * h).map(|_| rng.random::<u8>()).collect()).unwrap()
    }

    #[test]
    fn idx_header_errors() {
        let labels = encode_idx_labels(&[1, 0, 1]);
        let err = parse_idx_images(&labels).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 0, .. }), "{err}");
        let imgs = encode_idx_images(&[rand_image(28, 28, 1)]).unwrap();
        assert!(parse_idx_labels(&imgs).unwrap_err().to_string().contains("magic"));

        let truncated = &imgs[..imgs.len() - 10];
        let msg = parse_idx_images(truncated).unwrap_err().to_string();
        assert!(msg.contains(&format!("expected {} bytes, found {}", imgs.len(), imgs.len() - 10)), "{msg}");
        assert!(parse_idx_images(&imgs[..7]).is_err());
        assert!(parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 1, 12]).is_err());
    }

    #[test]
    fn full_size_header_parses() {
        let mut bytes = Vec::new();
        for v in [IDX_IMAGES_MAGIC, 60_000, 28, 28] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        bytes.resize(16 + 60_000 * 784, 0);
        assert_eq!(parse_idx_images(&bytes).unwrap().len(), 60_000);
    }

    #[test]
    fn count_mismatch_between_files() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("i");
        let lp = dir.path().join("l");
        fs::write(&ip, encode_idx_images(&[rand_image(28, 28, 3), rand_image(28, 28, 4)]).unwrap()).unwrap();
        fs::write(&lp, encode_idx_labels(&[1])).unwrap();
        assert!(load_mnist_idx(&ip, &lp).unwrap_err().to_string().contains("2 images but 1 labels"));
        fs::write(&lp, encode_idx_labels(&[1, 0])).unwrap();
        let set = load_mnist_idx(&ip, &lp).unwrap();
        assert_eq!(set.indices_of(&[0]), vec![1]);
        assert_eq!(set.subset(&[1]).labels, vec![0]);
    }

    #[test]
    fn padding() {
        let z = pad_to_32(&GrayscaleImage::filled(28, 28, 0), 0).unwrap();
        assert!(z.pixels().iter().all(|&p| p == 0));
        let mut img = GrayscaleImage::filled(28, 28, 0);
        img.set(0, 0, 200);
        let p = pad_to_32(&img, 0).unwrap();
        assert_eq!((p.width(), p.height()), (32, 32));
        assert_eq!(p.get(2, 2), 200);
        assert_eq!(p.pixels().iter().filter(|&&v| v != 0).count(), 1);
        let white = pad_to_32(&img, 255).unwrap();
        assert_eq!(white.get(0, 0), 255);
        assert_eq!(white.get(2, 3), 0);
        assert!(pad_to_32(&GrayscaleImage::filled(32, 32, 0), 0).is_err());

        let phases = normalize_grayscale(&pad_to_32(&rand_image(28, 28, 5), 0).unwrap()).unwrap();
        assert_eq!(phases.len(), 1024);
        assert_eq!(phases.num_qubits(), 10);
        for r in 0..32 {
            for c in 0..32 {
                if !(2..30).contains(&r) || !(2..30).contains(&c) {
                    assert_eq!(phases.as_slice()[r * 32 + c], 0.0);
                }
            }
        }
    }

    #[test]
    fn pooling() {
        let p = mean_pool(&GrayscaleImage::filled(28, 28, 77), 4).unwrap();
        assert!(p.pixels().iter().all(|&v| v == 77));
        assert_eq!(p.pixels().len(), 16);

        // 7x7 blocks of a 0/255 checkerboard hold 25 of one colour and 24 of the other
        let mut cb = GrayscaleImage::filled(28, 28, 0);
        for r in 0..28 {
            for c in 0..28 {
                if (r + c) % 2 == 0 {
                    cb.set(r, c, 255);
                }
            }
        }
        let pooled = mean_pool(&cb, 4).unwrap();
        for br in 0..4 {
            for bc in 0..4 {
                let want = if (br + bc) % 2 == 0 { 130 } else { 125 };
                assert_eq!(pooled.get(br, bc), want);
            }
        }

        let img = rand_image(28, 28, 9);
        let pooled = mean_pool(&img, 4).unwrap();
        for br in 0..4 {
            for bc in 0..4 {
                let mut s = 0.0;
                for r in 0..7 {
                    for c in 0..7 {
                        s += f64::from(img.get(7 * br + r, 7 * bc + c));
                    }
                }
                assert_eq!(f64::from(pooled.get(br, bc)), (s / 49.0).round());
            }
        }
        assert!(mean_pool(&img, 5).is_err());
        assert!(mean_pool(&img, 0).is_err());
    }

    #[test]
    fn half_rounds_up() {
        let img = GrayscaleImage::new(2, 2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(mean_pool(&img, 1).unwrap().pixels(), &[1]);
        assert_eq!(mean_pool_exact(&img, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn band_generator() {
        let p = BandParams::default();
        assert_eq!(p.label([0.7, 0.7]), 1);
        let wide = BandParams { band: 0.4, gap: 0.0 };
        assert_eq!(wide.label([0.0, FRAC_PI_2]), 0);
        let ds = generate_2d_dataset(300, 4).unwrap();
        assert_eq!(ds.len(), 300);
        assert_eq!(ds, generate_2d_dataset(300, 4).unwrap());
        assert_ne!(ds, generate_2d_dataset(300, 5).unwrap());
        for (s, &l) in ds.samples().iter().zip(ds.labels()) {
            assert!(in_phase_range(s));
            let d = (s[0] - s[1]).abs();
            assert_eq!(l, u8::from(d < 0.35));
            assert!(!(0.35..0.55).contains(&d));
        }
        assert!(generate_2d_dataset(1, 0).is_err());
    }

    #[test]
    fn circle_generator() {
        let p = CircleParams::default();
        assert_eq!(p.label(p.center), 1);
        assert_eq!(p.label([p.center[0] + 0.5, p.center[1]]), 0);
        assert_eq!(p.label([0.0, 0.0]), 0);
        assert!((p.distance([0.0, 0.0]) - std::f64::consts::PI * 2f64.sqrt() / 4.0).abs() < 1e-15);
        let ds = generate_circle_dataset(200, 1).unwrap();
        assert_eq!(ds.encoding(), Encoding::Bias4d);
        assert_eq!(ds, generate_circle_dataset(200, 1).unwrap());
        assert!(ds.labels().contains(&1) && ds.labels().contains(&0));
    }

    #[test]
    fn encoders() {
        assert_eq!(encode_2d([0.0, 0.0]).as_slice(), &[0.0, 0.0]);
        assert_eq!(encode_2d([FRAC_PI_4, FRAC_PI_2]).as_slice(), &[FRAC_PI_4, FRAC_PI_2]);
        assert_eq!(encode_2d_bias([0.0, 0.0]).as_slice(), &[0.0; 4]);
        assert_eq!(encode_2d_bias([0.3, 0.7]).as_slice(), &[0.0, 0.3, 0.7, 0.0]);
        assert!(!in_phase_range(&[-0.1, 0.2]));
    }

    #[test]
    fn csv_and_manifest_round_trip() {
        let ds = generate_2d_dataset(20, 8).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x1,x2,label\n"));
        let back = LabeledDataset::read_csv(buf.as_slice(), Encoding::Direct2d).unwrap();
        assert_eq!(back, ds);

        let m = DatasetManifest::new("band-2d", BandParams::default(), 20, 8).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let parsed: DatasetManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.regenerate().unwrap(), ds);
        let c = DatasetManifest::new("circles", CircleParams::default(), 30, 2).unwrap();
        assert_eq!(c.regenerate().unwrap(), generate_circle_dataset(30, 2).unwrap());
    }

    #[test]
    fn dataset_validation() {
        assert!(LabeledDataset::new(vec![vec![0.0, 1.0]], vec![], Encoding::Direct2d).is_err());
        assert!(LabeledDataset::new(vec![vec![0.0, f64::NAN]], vec![1], Encoding::Direct2d).is_err());
        assert!(LabeledDataset::new(vec![vec![0.0; 3]], vec![1], Encoding::Image).is_err());
        let (a, b) = generate_2d_dataset(10, 0).unwrap().split_at(7);
        assert_eq!((a.len(), b.len()), (7, 3));
    }
}
