//! Wavefront OBJ and Stanford PLY readers.
//!
//! Polygons with more than three corners are fan-triangulated from their
//! first vertex.

use std::path::Path;

use super::{GeometryError, Mesh, Vec3};
use crate::scalar::Real;

/// Load an `.obj` or `.ply` file, chosen by extension.
pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<Mesh<T>, GeometryError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let (vertices, faces) = match ext.as_deref() {
        Some("obj") => {
            let text = std::str::from_utf8(&bytes).map_err(|_| GeometryError::Parse {
                line: 0,
                message: "OBJ file is not valid UTF-8".into(),
            })?;
            parse_obj(text)?
        }
        Some("ply") => parse_ply(&bytes)?,
        _ => return Err(GeometryError::UnsupportedFormat(path.display().to_string())),
    };
    Mesh::new(vertices, faces)
}

fn fan(polygon: &[u32], line: usize) -> Result<impl Iterator<Item = [u32; 3]> + '_, GeometryError> {
    if polygon.len() < 3 {
        return Err(GeometryError::Parse {
            line,
            message: format!("face with {} vertices cannot be triangulated", polygon.len()),
        });
    }
    Ok((1..polygon.len() - 1).map(move |i| [polygon[0], polygon[i], polygon[i + 1]]))
}

/// Vertex positions and triangle indices read from a file.
pub type Parsed<T> = (Vec<Vec3<T>>, Vec<[u32; 3]>);

pub fn parse_obj<T: Real>(text: &str) -> Result<Parsed<T>, GeometryError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut polygon = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = || -> Result<T, GeometryError> {
                    let tok = tokens.next().ok_or_else(|| GeometryError::Parse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    tok.parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| GeometryError::Parse {
                            line,
                            message: format!("bad coordinate {tok:?}"),
                        })
                };
                let (x, y, z) = (coord()?, coord()?, coord()?);
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                polygon.clear();
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| GeometryError::Parse {
                        line,
                        message: format!("bad face index {tok:?}"),
                    })?;
                    let resolved = match idx {
                        0 => None,
                        i if i > 0 => Some(i - 1),
                        i => Some(vertices.len() as i64 + i),
                    };
                    match resolved {
                        Some(r) if r >= 0 && r <= u32::MAX as i64 => polygon.push(r as u32),
                        _ => {
                            return Err(GeometryError::Parse {
                                line,
                                message: format!("face index {idx} does not resolve"),
                            })
                        }
                    }
                }
                faces.extend(fan(&polygon, line)?);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Reads scalar values one at a time from the element body.
trait ValueSource {
    fn next(&mut self, ty: Scalar) -> Result<f64, GeometryError>;
}

struct AsciiSource<'a> {
    tokens: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl ValueSource for AsciiSource<'_> {
    fn next(&mut self, _ty: Scalar) -> Result<f64, GeometryError> {
        let tok = self.tokens.next().ok_or_else(|| GeometryError::Parse {
            line: 0,
            message: "PLY body ended early".into(),
        })?;
        tok.parse().map_err(|_| GeometryError::Parse {
            line: 0,
            message: format!("bad PLY value {tok:?}"),
        })
    }
}

struct BinarySource<'a> {
    data: &'a [u8],
    pos: usize,
}

impl ValueSource for BinarySource<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64, GeometryError> {
        let end = self.pos + ty.size();
        let bytes = self.data.get(self.pos..end).ok_or_else(|| GeometryError::Parse {
            line: 0,
            message: "PLY binary body truncated".into(),
        })?;
        self.pos = end;
        Ok(ty.read_le(bytes))
    }
}

pub fn parse_ply<T: Real>(bytes: &[u8]) -> Result<Parsed<T>, GeometryError> {
    let header_end = find_header_end(bytes).ok_or_else(|| GeometryError::Parse {
        line: 0,
        message: "missing end_header".into(),
    })?;
    let header = std::str::from_utf8(&bytes[..header_end.0]).map_err(|_| GeometryError::Parse {
        line: 0,
        message: "PLY header is not ASCII".into(),
    })?;
    let (format, elements) = parse_ply_header(header)?;
    let body = &bytes[header_end.1..];
    match format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| GeometryError::Parse {
                line: 0,
                message: "ASCII PLY body is not UTF-8".into(),
            })?;
            let mut src = AsciiSource {
                tokens: text.split_whitespace().peekable(),
            };
            read_ply_elements(&elements, &mut src)
        }
        PlyFormat::BinaryLittleEndian => {
            let mut src = BinarySource { data: body, pos: 0 };
            read_ply_elements(&elements, &mut src)
        }
    }
}

/// Returns (header length up to `end_header`, body start offset).
fn find_header_end(bytes: &[u8]) -> Option<(usize, usize)> {
    let marker = b"end_header";
    let at = bytes.windows(marker.len()).position(|w| w == marker)?;
    let mut body = at + marker.len();
    if bytes.get(body) == Some(&b'\r') {
        body += 1;
    }
    if bytes.get(body) == Some(&b'\n') {
        body += 1;
    }
    Some((at, body))
}

fn parse_ply_header(header: &str) -> Result<(PlyFormat, Vec<Element>), GeometryError> {
    let mut lines = header.lines().enumerate();
    let perr = |line: usize, message: String| GeometryError::Parse {
        line: line + 1,
        message,
    };
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(perr(0, "missing 'ply' magic".into())),
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for (i, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", _] => format = Some(PlyFormat::BinaryLittleEndian),
            ["format", other, _] => {
                return Err(GeometryError::UnsupportedFormat(format!("PLY format {other}")))
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| perr(i, format!("bad element count {count:?}")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| perr(i, "property before element".into()))?;
                let c = Scalar::parse(count_ty).ok_or_else(|| perr(i, format!("type {count_ty}")))?;
                let t = Scalar::parse(item_ty).ok_or_else(|| perr(i, format!("type {item_ty}")))?;
                el.properties.push(Property::List(name.to_string(), c, t));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| perr(i, "property before element".into()))?;
                let t = Scalar::parse(ty).ok_or_else(|| perr(i, format!("type {ty}")))?;
                el.properties.push(Property::Scalar(name.to_string(), t));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            _ => return Err(perr(i, format!("unrecognised header line {line:?}"))),
        }
    }
    let format = format.ok_or_else(|| perr(0, "missing format line".into()))?;
    Ok((format, elements))
}

fn read_ply_elements<T: Real>(
    elements: &[Element],
    src: &mut impl ValueSource,
) -> Result<Parsed<T>, GeometryError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut polygon = Vec::new();
    for el in elements {
        match el.name.as_str() {
            "vertex" => {
                let slot = |axis: &str| {
                    el.properties
                        .iter()
                        .position(|p| matches!(p, Property::Scalar(n, _) if n == axis))
                };
                let (Some(xi), Some(yi), Some(zi)) = (slot("x"), slot("y"), slot("z")) else {
                    return Err(GeometryError::Parse {
                        line: 0,
                        message: "vertex element lacks x/y/z".into(),
                    });
                };
                vertices.reserve(el.count);
                let mut row = vec![0.0; el.properties.len()];
                for _ in 0..el.count {
                    read_row(el, src, &mut row, &mut polygon)?;
                    vertices.push(Vec3::new(T::lit(row[xi]), T::lit(row[yi]), T::lit(row[zi])));
                }
            }
            "face" => {
                let has_list = el.properties.iter().any(|p| {
                    matches!(p, Property::List(n, ..) if n == "vertex_indices" || n == "vertex_index")
                });
                if !has_list {
                    return Err(GeometryError::Parse {
                        line: 0,
                        message: "face element lacks vertex_indices".into(),
                    });
                }
                let mut row = vec![0.0; el.properties.len()];
                for _ in 0..el.count {
                    read_row(el, src, &mut row, &mut polygon)?;
                    faces.extend(fan(&polygon, 0)?);
                }
            }
            _ => {
                let mut row = vec![0.0; el.properties.len()];
                let mut scratch = Vec::new();
                for _ in 0..el.count {
                    read_row(el, src, &mut row, &mut scratch)?;
                }
            }
        }
    }
    Ok((vertices, faces))
}

/// Read one element instance. Scalars land in `row`; the vertex index list
/// (if any) lands in `list`.
fn read_row(
    el: &Element,
    src: &mut impl ValueSource,
    row: &mut [f64],
    list: &mut Vec<u32>,
) -> Result<(), GeometryError> {
    list.clear();
    for (i, prop) in el.properties.iter().enumerate() {
        match prop {
            Property::Scalar(_, ty) => row[i] = src.next(*ty)?,
            Property::List(name, count_ty, item_ty) => {
                let n = src.next(*count_ty)?;
                if !(n >= 0.0 && n.fract() == 0.0) {
                    return Err(GeometryError::Parse {
                        line: 0,
                        message: format!("bad list length {n}"),
                    });
                }
                let keep = name == "vertex_indices" || name == "vertex_index";
                for _ in 0..n as usize {
                    let v = src.next(*item_ty)?;
                    if keep {
                        if !(v >= 0.0 && v <= u32::MAX as f64) {
                            return Err(GeometryError::Parse {
                                line: 0,
                                message: format!("bad vertex index {v}"),
                            });
                        }
                        list.push(v as u32);
                    }
                }
            }
        }
    }
    Ok(())
}
