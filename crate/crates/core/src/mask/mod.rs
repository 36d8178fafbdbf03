//! Multiview label masks: PNG I/O and cleanup (closing + small-component relabeling).

mod components;
mod io;
mod morph;

pub use components::{boundary_counts, connected_components, relabel_small_components, Components};
pub use io::{decode_mask, encode_mask, load_mask, load_mask_dir, save_mask};
pub use morph::{close_binary, morphological_close};

use crate::error::{Error, Result};

/// H×W image of object ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: usize, height: usize, label: u8) -> Self {
        LabelMap {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        self.labels[y * self.width + x] = label;
    }

    /// Sorted distinct labels.
    pub fn label_set(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (0..=255u8).filter(|&l| seen[l as usize]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::Config(format!("connectivity must be 4 or 8, got {n}"))),
        }
    }
}

/// Mask cleanup parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanConfig {
    /// Side of the square structuring element; odd.
    pub kernel_size: usize,
    /// Components with fewer pixels than this are merged into a neighbor.
    pub area_threshold: usize,
    pub connectivity: Connectivity,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            kernel_size: 3,
            area_threshold: 500,
            connectivity: Connectivity::Eight,
        }
    }
}

impl CleanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "kernel size must be odd and >= 1, got {}",
                self.kernel_size
            )));
        }
        Ok(())
    }
}

/// Closing followed by small-component relabeling.
pub fn preprocess(map: &LabelMap, cfg: &CleanConfig) -> LabelMap {
    let closed = morphological_close(map, cfg);
    relabel_small_components(&closed, cfg)
}
