use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageFormat};

use super::LabelMap;
use crate::error::{Error, Result};
use crate::scene::Camera;

/// Decodes an 8-bit single-channel PNG. Pixel value = label id.
pub fn decode_mask(bytes: &[u8]) -> Result<LabelMap> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    match img.color() {
        ColorType::L8 => {}
        other => return Err(Error::Format(format!("expected 8-bit grayscale, got {other:?}"))),
    }
    let DynamicImage::ImageLuma8(gray) = img else {
        unreachable!("L8 color type decodes to ImageLuma8")
    };
    let (w, h) = gray.dimensions();
    LabelMap::new(w as usize, h as usize, gray.into_raw())
}

pub fn encode_mask(map: &LabelMap) -> Vec<u8> {
    let img = GrayImage::from_raw(map.width as u32, map.height as u32, map.labels.clone())
        .expect("label buffer matches dimensions");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding into memory");
    out.into_inner()
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn save_mask(map: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mask(map)).map_err(|e| Error::io(path, e))
}

/// Loads `<dir>/<camera id>.png` for every camera, checking dimensions.
pub fn load_mask_dir(dir: impl AsRef<Path>, cameras: &[Camera]) -> Result<Vec<LabelMap>> {
    let dir = dir.as_ref();
    cameras
        .iter()
        .map(|cam| {
            let map = load_mask(dir.join(format!("{}.png", cam.id)))?;
            if map.width != cam.width as usize || map.height != cam.height as usize {
                return Err(Error::Shape(format!(
                    "mask for view `{}` is {}x{}, camera is {}x{}",
                    cam.id, map.width, map.height, cam.width, cam.height
                )));
            }
            Ok(map)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::RgbImage;

    #[test]
    fn zero_mask_roundtrip() {
        let map = LabelMap::filled(4, 4, 0);
        assert_eq!(decode_mask(&encode_mask(&map)).unwrap(), map);
    }

    #[test]
    fn full_range_roundtrip() {
        let labels: Vec<u8> = (0..=255).collect();
        let map = LabelMap::new(16, 16, labels).unwrap();
        assert_eq!(decode_mask(&encode_mask(&map)).unwrap(), map);
    }

    #[test]
    fn rgb_png_rejected() {
        let img = RgbImage::new(3, 3);
        let mut bytes = Cursor::new(Vec::new());
        img.write_to(&mut bytes, ImageFormat::Png).unwrap();
        assert!(matches!(decode_mask(bytes.get_ref()), Err(Error::Format(_))));
    }

    #[test]
    fn sixteen_bit_png_rejected() {
        let img = image::ImageBuffer::<image::Luma<u16>, _>::new(2, 2);
        let mut bytes = Cursor::new(Vec::new());
        img.write_to(&mut bytes, ImageFormat::Png).unwrap();
        assert!(matches!(decode_mask(bytes.get_ref()), Err(Error::Format(_))));
    }
}
