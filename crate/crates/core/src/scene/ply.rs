//! Binary little-endian PLY point clouds with `x, y, z` and optional
//! `red, green, blue` (uchar) properties.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PropKind {
    F32,
    F64,
    U8,
}

impl PropKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "float" | "float32" => Some(Self::F32),
            "double" | "float64" => Some(Self::F64),
            "uchar" | "uint8" => Some(Self::U8),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            Self::F32 => 4,
            Self::F64 => 8,
            Self::U8 => 1,
        }
    }
}

/// Points plus optional per-point colors in [0, 1].
#[derive(Debug)]
pub struct PlyCloud<T> {
    pub positions: Vec<Vec3<T>>,
    pub colors: Option<Vec<Vec3<T>>>,
}

pub fn read_ply<T: Scalar>(path: &Path) -> Result<PlyCloud<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut line = String::new();
    let mut read_line = |reader: &mut BufReader<File>| -> Result<String> {
        line.clear();
        reader
            .read_line(&mut line)
            .map_err(|e| Error::io(path, e))?;
        Ok(line.trim_end().to_string())
    };

    if read_line(&mut reader)? != "ply" {
        return Err(Error::load(path, "not a PLY file"));
    }
    let format = read_line(&mut reader)?;
    if format != "format binary_little_endian 1.0" {
        return Err(Error::load(path, format!("unsupported format: {format}")));
    }

    let mut count = 0usize;
    let mut props: Vec<(String, PropKind)> = Vec::new();
    loop {
        let l = read_line(&mut reader)?;
        if l == "end_header" {
            break;
        }
        let mut parts = l.split_whitespace();
        match parts.next() {
            Some("comment") => {}
            Some("element") => {
                let name = parts.next().unwrap_or("");
                let n: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::load(path, "bad element line"))?;
                if name == "vertex" {
                    count = n;
                } else if n != 0 {
                    return Err(Error::load(path, format!("unsupported element {name}")));
                }
            }
            Some("property") => {
                let ty = parts.next().unwrap_or("");
                let name = parts.next().unwrap_or("").to_string();
                let kind = PropKind::parse(ty)
                    .ok_or_else(|| Error::load(path, format!("unsupported property type {ty}")))?;
                props.push((name, kind));
            }
            _ => return Err(Error::load(path, format!("unexpected header line: {l}"))),
        }
    }

    let stride: usize = props.iter().map(|(_, k)| k.size()).sum();
    let mut raw = vec![0u8; stride * count];
    reader.read_exact(&mut raw).map_err(|e| Error::io(path, e))?;

    let index_of = |name: &str| props.iter().position(|(n, _)| n == name);
    let (xi, yi, zi) = match (index_of("x"), index_of("y"), index_of("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::load(path, "missing x/y/z properties")),
    };
    let color_idx = match (index_of("red"), index_of("green"), index_of("blue")) {
        (Some(r), Some(g), Some(b)) => Some((r, g, b)),
        _ => None,
    };

    let offsets: Vec<usize> = props
        .iter()
        .scan(0usize, |acc, (_, k)| {
            let off = *acc;
            *acc += k.size();
            Some(off)
        })
        .collect();

    let read_scalar = |rec: &[u8], idx: usize| -> T {
        let off = offsets[idx];
        match props[idx].1 {
            PropKind::F32 => {
                let v = f32::from_le_bytes(rec[off..off + 4].try_into().unwrap());
                sc(v as f64)
            }
            PropKind::F64 => {
                let v = f64::from_le_bytes(rec[off..off + 8].try_into().unwrap());
                sc(v)
            }
            PropKind::U8 => sc(rec[off] as f64 / 255.0),
        }
    };

    let mut positions = Vec::with_capacity(count);
    let mut colors = color_idx.map(|_| Vec::with_capacity(count));
    for rec in raw.chunks_exact(stride) {
        positions.push(Vec3::new(
            read_scalar(rec, xi),
            read_scalar(rec, yi),
            read_scalar(rec, zi),
        ));
        if let (Some(cols), Some((r, g, b))) = (&mut colors, color_idx) {
            cols.push(Vec3::new(
                read_scalar(rec, r),
                read_scalar(rec, g),
                read_scalar(rec, b),
            ));
        }
    }

    Ok(PlyCloud { positions, colors })
}

pub fn write_ply<T: Scalar>(path: &Path, cloud: &PlyCloud<T>) -> Result<()> {
    if let Some(c) = &cloud.colors {
        if c.len() != cloud.positions.len() {
            return Err(Error::Other("color/position count mismatch".into()));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::new();
    header.push_str("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", cloud.positions.len()));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes()).map_err(|e| Error::io(path, e))?;

    for (i, p) in cloud.positions.iter().enumerate() {
        for v in [p.x, p.y, p.z] {
            w.write_all(&v.to_f64_c().to_le_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
        if let Some(cols) = &cloud.colors {
            let c = cols[i];
            for v in [c.x, c.y, c.z] {
                let b = (v.to_f64_c() * 255.0).round().clamp(0.0, 255.0) as u8;
                w.write_all(&[b]).map_err(|e| Error::io(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
