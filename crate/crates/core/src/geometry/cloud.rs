use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Points in the sensor frame, meters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
}

/// Size of one KITTI velodyne record: x, y, z, intensity as little-endian f32.
pub const KITTI_RECORD_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanFormat {
    /// Flat little-endian f32 records of (x, y, z, intensity).
    KittiBin,
    /// Whitespace-separated ASCII, one point per line.
    XyzText,
    /// ASCII PLY as written by [`PointCloud::to_ply`].
    PlyAscii,
}

impl ScanFormat {
    /// Picks a format from the file extension (`.bin`, `.ply`, anything else is text).
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("bin") => ScanFormat::KittiBin,
            Some("ply") => ScanFormat::PlyAscii,
            _ => ScanFormat::XyzText,
        }
    }
}

impl FromStr for ScanFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kitti-bin" => Ok(ScanFormat::KittiBin),
            "xyz-text" => Ok(ScanFormat::XyzText),
            "ply" => Ok(ScanFormat::PlyAscii),
            other => Err(Error::Config(format!("unknown scan format `{other}`"))),
        }
    }
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        check_finite(&points)?;
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point3> {
        self.points.iter()
    }

    /// Serializes as KITTI velodyne records with zero intensity.
    pub fn to_kitti_bin(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * KITTI_RECORD_BYTES);
        for p in &self.points {
            for v in [p[0] as f32, p[1] as f32, p[2] as f32, 0.0f32] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_kitti_bin(bytes: &[u8]) -> Result<Self> {
        let whole = bytes.len() / KITTI_RECORD_BYTES * KITTI_RECORD_BYTES;
        if whole != bytes.len() {
            return Err(Error::Parse {
                offset: whole as u64,
                message: format!(
                    "truncated record: {} trailing bytes, records are {KITTI_RECORD_BYTES} bytes",
                    bytes.len() - whole
                ),
            });
        }
        let points = bytes
            .chunks_exact(KITTI_RECORD_BYTES)
            .map(|rec| {
                let f =
                    |i: usize| f32::from_le_bytes(rec[i * 4..i * 4 + 4].try_into().unwrap()) as f64;
                [f(0), f(1), f(2)]
            })
            .collect();
        Self::new(points)
    }

    pub fn from_xyz_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut offset = 0u64;
        for line in text.split_inclusive('\n') {
            let body = line.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                points.push(parse_xyz(body.split_whitespace(), offset)?);
            }
            offset += line.len() as u64;
        }
        Self::new(points)
    }

    /// ASCII PLY with a single `vertex` element holding float x, y, z.
    pub fn to_ply(&self) -> String {
        let mut s = String::with_capacity(64 + self.len() * 32);
        s.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(s, "element vertex {}", self.len());
        s.push_str("property float x\nproperty float y\nproperty float z\nend_header\n");
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", p[0] as f32, p[1] as f32, p[2] as f32);
        }
        s
    }

    /// Reads ASCII PLY whose first three vertex properties are x, y, z.
    pub fn from_ply(text: &str) -> Result<Self> {
        let mut offset = 0u64;
        let mut lines = text.split_inclusive('\n');
        let mut vertices = None;
        let mut header_ok = false;
        for line in lines.by_ref() {
            let l = line.trim();
            offset += line.len() as u64;
            if l.starts_with("format") && l != "format ascii 1.0" {
                return Err(Error::Parse {
                    offset,
                    message: format!("unsupported PLY format `{l}`"),
                });
            }
            if let Some(n) = l.strip_prefix("element vertex ") {
                vertices = Some(n.trim().parse::<usize>().map_err(|e| Error::Parse {
                    offset,
                    message: format!("bad vertex count: {e}"),
                })?);
            }
            if l == "end_header" {
                header_ok = true;
                break;
            }
        }
        let n = match (header_ok, vertices) {
            (true, Some(n)) => n,
            _ => {
                return Err(Error::Parse {
                    offset,
                    message: "missing PLY header or vertex element".into(),
                })
            }
        };
        let mut points = Vec::with_capacity(n);
        for line in lines.take(n) {
            points.push(parse_xyz(line.split_whitespace(), offset)?);
            offset += line.len() as u64;
        }
        if points.len() != n {
            return Err(Error::Parse {
                offset,
                message: format!("expected {n} vertices, found {}", points.len()),
            });
        }
        Self::new(points)
    }
}

fn parse_xyz<'a>(mut tokens: impl Iterator<Item = &'a str>, offset: u64) -> Result<Point3> {
    let mut p = [0.0; 3];
    for v in &mut p {
        let tok = tokens.next().ok_or_else(|| Error::Parse {
            offset,
            message: "expected three coordinates".into(),
        })?;
        *v = tok.parse().map_err(|e| Error::Parse {
            offset,
            message: format!("bad coordinate `{tok}`: {e}"),
        })?;
    }
    Ok(p)
}

pub(crate) fn check_finite(points: &[Point3]) -> Result<()> {
    match points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        Some(i) => Err(Error::Input(format!(
            "point {i} has a non-finite coordinate"
        ))),
        None => Ok(()),
    }
}

/// Loads a scan from disk, preserving point order.
pub fn load_scan(path: impl AsRef<Path>, format: ScanFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        ScanFormat::KittiBin => PointCloud::from_kitti_bin(&bytes),
        ScanFormat::XyzText | ScanFormat::PlyAscii => {
            let text = String::from_utf8(bytes).map_err(|e| Error::Parse {
                offset: e.utf8_error().valid_up_to() as u64,
                message: "invalid UTF-8".into(),
            })?;
            if format == ScanFormat::XyzText {
                PointCloud::from_xyz_text(&text)
            } else {
                PointCloud::from_ply(&text)
            }
        }
    }
}
