//! Image quality and segmentation metrics.

use std::collections::BTreeMap;
use std::path::Path;

use image::ImageEncoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::LabelMap;

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 100.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// RGB image with channels in [0, 1], raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Image {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
            .to_rgb8();
        let (w, h) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0.map(|c| c as f64 / 255.0)).collect();
        Image::new(w as usize, h as usize, pixels)
    }

    /// Quantizes to 8-bit RGB PNG.
    pub fn to_png(&self) -> Vec<u8> {
        let raw: Vec<u8> = self
            .pixels
            .iter()
            .flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect();
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(
                &raw,
                self.width as u32,
                self.height as u32,
                image::ExtendedColorType::Rgb8,
            )
            .expect("in-memory PNG encoding");
        out
    }

    pub fn luminance(&self) -> Vec<f64> {
        self.pixels
            .iter()
            .map(|p| LUMA[0] * p[0] + LUMA[1] * p[1] + LUMA[2] * p[2])
            .collect()
    }
}

fn same_shape(a: &Image, b: &Image) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    same_shape(a, b)?;
    let n = a.pixels.len() * 3;
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] - q[c]).powi(2)))
        .sum();
    Ok(sum / n as f64)
}

/// `10·log10(1 / MSE)`, capped at [`PSNR_CAP`].
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (1.0 / m).log10()).min(PSNR_CAP))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

/// Separable filtering over valid window positions only.
fn filter_valid(img: &[f64], width: usize, height: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (width + 1 - n, height + 1 - n);
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let line = &img[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&line[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(j, w)| w * rows[(y + j) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM of the luminance images, 11×11 Gaussian window with σ = 1.5,
/// averaged over all window positions that fit inside the image.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    same_shape(a, b)?;
    if a.width < SSIM_WINDOW || a.height < SSIM_WINDOW {
        return Err(Error::Size {
            width: a.width,
            height: a.height,
            window: SSIM_WINDOW,
        });
    }
    let (w, h) = (a.width, a.height);
    let k = gaussian_window();
    let x = a.luminance();
    let y = b.luminance();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let [mx, my, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|c| filter_valid(c, w, h, &k));
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Photometric loss `0.8·L1 + 0.2·(1 − SSIM)`. Reported only: geometry and
/// color are never optimized here.
pub fn rgb_loss(rendered: &Image, reference: &Image) -> Result<f64> {
    same_shape(rendered, reference)?;
    let n = (rendered.pixels.len() * 3).max(1);
    let l1: f64 = rendered
        .pixels
        .iter()
        .zip(&reference.pixels)
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] - q[c]).abs()))
        .sum::<f64>()
        / n as f64;
    Ok(0.8 * l1 + 0.2 * (1.0 - ssim(rendered, reference)?))
}

/// Pixel counts of one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub intersection: u64,
    pub pred: u64,
    pub gt: u64,
}

impl ClassCounts {
    pub fn union(&self) -> u64 {
        self.pred + self.gt - self.intersection
    }

    pub fn iou(&self) -> f64 {
        match self.union() {
            0 => 0.0,
            u => self.intersection as f64 / u as f64,
        }
    }

    /// Recall, `|pred ∩ gt| / |gt|`. `None` when the label is absent in gt.
    pub fn accuracy(&self) -> Option<f64> {
        (self.gt > 0).then(|| self.intersection as f64 / self.gt as f64)
    }
}

/// Label co-occurrence counts, accumulated over any number of map pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegCounts {
    classes: BTreeMap<u8, ClassCounts>,
    pixels: u64,
}

impl SegCounts {
    pub fn add(&mut self, pred: &LabelMap, gt: &LabelMap) -> Result<()> {
        if pred.width != gt.width || pred.height != gt.height {
            return Err(Error::Shape(format!(
                "prediction is {}x{}, ground truth is {}x{}",
                pred.width, pred.height, gt.width, gt.height
            )));
        }
        for (&p, &g) in pred.labels.iter().zip(&gt.labels) {
            self.classes.entry(p).or_default().pred += 1;
            let c = self.classes.entry(g).or_default();
            c.gt += 1;
            if p == g {
                c.intersection += 1;
            }
        }
        self.pixels += pred.labels.len() as u64;
        Ok(())
    }

    /// Per-class IoU and accuracy. With `present_labels_only` the means run
    /// over labels present in gt; otherwise IoU also averages labels that only
    /// appear in the prediction (each scoring 0). mAcc always averages
    /// gt-present labels, where recall is defined.
    pub fn report(&self, present_labels_only: bool) -> SegReport {
        let mut per_class = BTreeMap::new();
        let (mut iou_sum, mut acc_sum, mut n_iou, mut n_acc) = (0.0, 0.0, 0usize, 0usize);
        for (&label, c) in &self.classes {
            if present_labels_only && c.gt == 0 {
                continue;
            }
            let iou = c.iou();
            let acc = c.accuracy();
            iou_sum += iou;
            n_iou += 1;
            if let Some(a) = acc {
                acc_sum += a;
                n_acc += 1;
            }
            per_class.insert(label, ClassScore { iou, acc, counts: *c });
        }
        SegReport {
            miou: if n_iou > 0 { iou_sum / n_iou as f64 } else { 0.0 },
            macc: if n_acc > 0 { acc_sum / n_acc as f64 } else { 0.0 },
            pixels: self.pixels,
            per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub iou: f64,
    pub acc: Option<f64>,
    #[serde(flatten)]
    pub counts: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegReport {
    pub miou: f64,
    pub macc: f64,
    pub pixels: u64,
    pub per_class: BTreeMap<u8, ClassScore>,
}

pub fn miou_macc(pred: &LabelMap, gt: &LabelMap, present_labels_only: bool) -> Result<SegReport> {
    let mut counts = SegCounts::default();
    counts.add(pred, gt)?;
    Ok(counts.report(present_labels_only))
}

/// Mean PSNR and SSIM over a set of image pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub psnr: f64,
    pub ssim: f64,
    pub rgb_loss: f64,
    pub images: usize,
}

pub fn image_report(pairs: &[(Image, Image)]) -> Result<ImageReport> {
    let mut report = ImageReport {
        psnr: 0.0,
        ssim: 0.0,
        rgb_loss: 0.0,
        images: pairs.len(),
    };
    for (a, b) in pairs {
        report.psnr += psnr(a, b)?;
        report.ssim += ssim(a, b)?;
        report.rgb_loss += rgb_loss(a, b)?;
    }
    if !pairs.is_empty() {
        let n = pairs.len() as f64;
        report.psnr /= n;
        report.ssim /= n;
        report.rgb_loss /= n;
    }
    Ok(report)
}
