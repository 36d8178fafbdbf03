//! Binary little-endian PLY scene files.
//!
//! Property names follow the reference 3D-GS export (`x y z`, `f_dc_*`,
//! `f_rest_*`, `opacity`, `scale_*`, `rot_*`) extended with `f_obj_0..15`
//! and a `uchar label`. Unknown properties and extra elements are skipped on
//! load. The writer is canonical: loading and re-saving a file it produced
//! yields identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::sh::coeff_count;
use super::{Gaussian, Scene, FEATURE_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: u64,
    properties: Vec<Property>,
}

struct Header {
    elements: Vec<Element>,
    data_start: usize,
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset: offset as u64,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Result<(usize, String)> {
        let start = *pos;
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| start + i)
            .ok_or_else(|| parse_error(start, "unterminated header"))?;
        *pos = end + 1;
        let line =
            std::str::from_utf8(&bytes[start..end]).map_err(|_| parse_error(start, "header is not ASCII"))?;
        Ok((start, line.trim_end_matches('\r').to_string()))
    };

    let (off, magic) = next_line(&mut pos)?;
    if magic != "ply" {
        return Err(parse_error(off, "missing `ply` magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    loop {
        let (off, line) = next_line(&mut pos)?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => match (tok.next(), tok.next()) {
                (Some("binary_little_endian"), Some("1.0")) => saw_format = true,
                (Some(f), _) => return Err(parse_error(off, format!("unsupported format `{f}`"))),
                _ => return Err(parse_error(off, "malformed format line")),
            },
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_error(off, "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse::<u64>().ok())
                    .ok_or_else(|| parse_error(off, "element count is not an integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(off, "property before any element"))?;
                let ty = tok
                    .next()
                    .ok_or_else(|| parse_error(off, "property without type"))?;
                let prop = if ty == "list" {
                    let count = tok.next().and_then(ScalarType::parse);
                    let item = tok.next().and_then(ScalarType::parse);
                    match (count, item, tok.next()) {
                        (Some(count), Some(item), Some(_)) => Property::List { count, item },
                        _ => return Err(parse_error(off, "malformed list property")),
                    }
                } else {
                    let ty = ScalarType::parse(ty)
                        .ok_or_else(|| parse_error(off, format!("unknown property type `{ty}`")))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| parse_error(off, "property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                element.properties.push(prop);
            }
            Some("end_header") => break,
            Some(other) => return Err(parse_error(off, format!("unexpected header keyword `{other}`"))),
            None => return Err(parse_error(off, "empty header line")),
        }
    }
    if !saw_format {
        return Err(parse_error(0, "missing format line"));
    }
    Ok(Header {
        elements,
        data_start: pos,
    })
}

/// Decodes a scene from PLY bytes.
pub fn read_scene(bytes: &[u8]) -> Result<Scene> {
    let header = parse_header(bytes)?;
    let mut pos = header.data_start;
    let mut scene = None;

    for element in &header.elements {
        if element.name == "vertex" {
            scene = Some(read_vertices(bytes, &mut pos, element)?);
        } else {
            skip_element(bytes, &mut pos, element)?;
        }
    }
    scene.ok_or_else(|| Error::Schema("vertex".into()))
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = pos
        .checked_add(n)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| parse_error(*pos, "unexpected end of data"))?;
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

fn skip_element(bytes: &[u8], pos: &mut usize, element: &Element) -> Result<()> {
    for _ in 0..element.count {
        for prop in &element.properties {
            match prop {
                Property::Scalar { ty, .. } => {
                    take(bytes, pos, ty.size())?;
                }
                Property::List { count, item } => {
                    let start = *pos;
                    let n = count.read(take(bytes, pos, count.size())?);
                    if n < 0.0 {
                        return Err(parse_error(start, "negative list length"));
                    }
                    take(bytes, pos, n as usize * item.size())?;
                }
            }
        }
    }
    Ok(())
}

/// Destination of one vertex property inside a [`Gaussian`].
#[derive(Clone, Copy)]
enum Slot {
    Position(usize),
    Scale(usize),
    Rotation(usize),
    Opacity,
    Dc(usize),
    Rest(usize),
    Feature(usize),
    Label,
    Ignore,
}

fn slot_for(name: &str) -> Slot {
    let indexed = |prefix: &str, limit: usize| {
        name.strip_prefix(prefix)
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&i| i < limit)
    };
    match name {
        "x" => return Slot::Position(0),
        "y" => return Slot::Position(1),
        "z" => return Slot::Position(2),
        "opacity" => return Slot::Opacity,
        "label" => return Slot::Label,
        _ => {}
    }
    if let Some(i) = indexed("scale_", 3) {
        Slot::Scale(i)
    } else if let Some(i) = indexed("rot_", 4) {
        Slot::Rotation(i)
    } else if let Some(i) = indexed("f_dc_", 3) {
        Slot::Dc(i)
    } else if let Some(i) = indexed("f_rest_", 45) {
        Slot::Rest(i)
    } else if let Some(i) = indexed("f_obj_", FEATURE_DIM) {
        Slot::Feature(i)
    } else {
        Slot::Ignore
    }
}

const REQUIRED: [&str; 11] = [
    "x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3",
];

fn read_vertices(bytes: &[u8], pos: &mut usize, element: &Element) -> Result<Scene> {
    let names: Vec<&str> = element
        .properties
        .iter()
        .filter_map(|p| match p {
            Property::Scalar { name, .. } => Some(name.as_str()),
            Property::List { .. } => None,
        })
        .collect();
    for req in REQUIRED {
        if !names.contains(&req) {
            return Err(Error::Schema(req.to_string()));
        }
    }
    let rest_count = names
        .iter()
        .filter(|n| matches!(slot_for(n), Slot::Rest(_)))
        .count();
    let sh_degree = match rest_count {
        0 => 0,
        9 => 1,
        24 => 2,
        45 => 3,
        n => {
            return Err(parse_error(
                *pos,
                format!("{n} f_rest properties do not match any SH degree"),
            ))
        }
    };
    // f_rest is stored channel-major: all R coefficients, then G, then B.
    let per_channel = coeff_count(sh_degree) - 1;

    let slots: Vec<_> = element
        .properties
        .iter()
        .map(|p| match p {
            Property::Scalar { name, ty } => (slot_for(name), Some(*ty)),
            Property::List { .. } => (Slot::Ignore, None),
        })
        .collect();

    let mut scene = Scene::new(sh_degree);
    scene.gaussians.reserve(element.count.min(1 << 24) as usize);
    for _ in 0..element.count {
        let mut g = Gaussian::default();
        for (prop, (slot, ty)) in element.properties.iter().zip(&slots) {
            let Some(ty) = ty else {
                let Property::List { count, item } = prop else {
                    unreachable!()
                };
                let start = *pos;
                let n = count.read(take(bytes, pos, count.size())?);
                if n < 0.0 {
                    return Err(parse_error(start, "negative list length"));
                }
                take(bytes, pos, n as usize * item.size())?;
                continue;
            };
            let start = *pos;
            let raw = take(bytes, pos, ty.size())?;
            let v = ty.read(raw);
            // exact for float properties, which is what round-trips rely on
            let f = if *ty == ScalarType::F32 {
                f32::from_le_bytes(raw.try_into().unwrap())
            } else {
                v as f32
            };
            match *slot {
                Slot::Position(i) => g.position[i] = f,
                Slot::Scale(i) => g.scale[i] = f,
                Slot::Rotation(i) => g.rotation[i] = f,
                Slot::Opacity => g.opacity = f,
                Slot::Dc(c) => g.sh[0][c] = f,
                Slot::Rest(i) => {
                    let (c, k) = (i / per_channel.max(1), i % per_channel.max(1));
                    if c < 3 && k < per_channel {
                        g.sh[k + 1][c] = f;
                    }
                }
                Slot::Feature(i) => g.obj_feature[i] = f,
                Slot::Label => {
                    if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                        return Err(parse_error(start, format!("label {v} outside [0, 255]")));
                    }
                    g.label = v as u8;
                }
                Slot::Ignore => {}
            }
        }
        g.normalize_rotation();
        scene.gaussians.push(g);
    }
    Ok(scene)
}

/// Encodes a scene as canonical PLY bytes.
pub fn write_scene(scene: &Scene, out: &mut impl Write) -> io::Result<()> {
    let degree = scene.sh_degree.min(3);
    let per_channel = coeff_count(degree) - 1;
    let mut header = String::new();
    header.push_str("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", scene.len()));
    for name in ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"] {
        header.push_str(&format!("property float {name}\n"));
    }
    for i in 0..3 * per_channel {
        header.push_str(&format!("property float f_rest_{i}\n"));
    }
    for name in [
        "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3",
    ] {
        header.push_str(&format!("property float {name}\n"));
    }
    for i in 0..FEATURE_DIM {
        header.push_str(&format!("property float f_obj_{i}\n"));
    }
    header.push_str("property uchar label\nend_header\n");
    out.write_all(header.as_bytes())?;

    let stride = 4 * (3 + 3 + 3 * per_channel + 1 + 3 + 4 + FEATURE_DIM) + 1;
    let mut buf = Vec::with_capacity(stride * scene.len());
    for g in &scene.gaussians {
        let mut put = |v: f32| buf.extend_from_slice(&v.to_le_bytes());
        g.position.iter().for_each(|&v| put(v));
        g.sh[0].iter().for_each(|&v| put(v));
        for c in 0..3 {
            for k in 0..per_channel {
                put(g.sh[k + 1][c]);
            }
        }
        put(g.opacity);
        g.scale.iter().for_each(|&v| put(v));
        g.rotation.iter().for_each(|&v| put(v));
        g.obj_feature.iter().for_each(|&v| put(v));
        buf.push(g.label);
    }
    out.write_all(&buf)
}

pub fn scene_to_bytes(scene: &Scene) -> Vec<u8> {
    let mut out = Vec::new();
    write_scene(scene, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_scene(&bytes)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, scene_to_bytes(scene)).map_err(|e| Error::io(path, e))
}
