//! Minimal NPY v1.0 reader/writer for little-endian `f4`/`f8`, C-order arrays.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE_LEN: usize = 10;

/// Element type of an NPY payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// A decoded array, always widened to `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    pub data: Vec<f64>,
}

#[derive(Debug)]
struct Header {
    dtype: Dtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

pub fn read_npy_file(path: &Path) -> Result<NpyArray> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_npy(&bytes)
}

pub fn parse_npy(bytes: &[u8]) -> Result<NpyArray> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \\x93NUMPY"));
    }
    if bytes.len() < PREAMBLE_LEN {
        return Err(Error::format(bytes.len(), "truncated preamble"));
    }
    if bytes[6] != 1 || bytes[7] != 0 {
        return Err(Error::format(
            6,
            format!("unsupported NPY version {}.{}, only 1.0 is read", bytes[6], bytes[7]),
        ));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = PREAMBLE_LEN + header_len;
    if bytes.len() < data_start {
        return Err(Error::format(bytes.len(), "truncated header"));
    }
    let text = std::str::from_utf8(&bytes[PREAMBLE_LEN..data_start])
        .map_err(|e| Error::format(PREAMBLE_LEN + e.valid_up_to(), "header is not ASCII"))?;
    let header = parse_header(text)?;
    if header.fortran_order {
        return Err(Error::format(
            PREAMBLE_LEN,
            "fortran_order=True is not supported",
        ));
    }

    let count: usize = header.shape.iter().product();
    let payload = &bytes[data_start..];
    let expected = count * header.dtype.size();
    if payload.len() != expected {
        return Err(Error::format(
            data_start,
            format!(
                "payload holds {} bytes but shape {:?} needs {expected}",
                payload.len(),
                header.shape
            ),
        ));
    }

    let data = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };

    Ok(NpyArray {
        shape: header.shape,
        dtype: header.dtype,
        data,
    })
}

/// Parses the Python-literal header dict, e.g.
/// `{'descr': '<f8', 'fortran_order': False, 'shape': (2, 4, 8), }`.
fn parse_header(text: &str) -> Result<Header> {
    let at = |pos: usize| PREAMBLE_LEN + pos;
    let trimmed = text.trim_end_matches(['\n', ' ', '\x00']);
    let inner = trimmed
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::format(at(0), "header is not a dict literal"))?;

    let mut descr = None;
    let mut fortran_order = None;
    let mut shape = None;

    let mut rest = inner;
    let mut offset = 1;
    loop {
        let skipped = rest.len() - rest.trim_start_matches([' ', ',']).len();
        rest = &rest[skipped..];
        offset += skipped;
        if rest.is_empty() {
            break;
        }
        let (key, after_key) = parse_quoted(rest).ok_or_else(|| Error::format(at(offset), "expected quoted key"))?;
        let consumed = rest.len() - after_key.len();
        let after_colon = after_key
            .trim_start()
            .strip_prefix(':')
            .ok_or_else(|| Error::format(at(offset + consumed), "expected `:`"))?
            .trim_start();
        let value_offset = offset + (rest.len() - after_colon.len());
        let value_end = if after_colon.starts_with('(') {
            after_colon
                .find(')')
                .map(|i| i + 1)
                .ok_or_else(|| Error::format(at(value_offset), "unterminated shape tuple"))?
        } else {
            after_colon.find(',').unwrap_or(after_colon.len())
        };
        let value = after_colon[..value_end].trim();
        match key {
            "descr" => {
                let (s, _) = parse_quoted(value)
                    .ok_or_else(|| Error::format(at(value_offset), "descr must be a string"))?;
                descr = Some(match s {
                    "<f4" => Dtype::F32,
                    "<f8" => Dtype::F64,
                    other => {
                        return Err(Error::format(
                            at(value_offset),
                            format!("unsupported descr `{other}`, expected <f4 or <f8"),
                        ))
                    }
                });
            }
            "fortran_order" => {
                fortran_order = Some(match value {
                    "False" => false,
                    "True" => true,
                    other => {
                        return Err(Error::format(
                            at(value_offset),
                            format!("fortran_order must be True or False, got `{other}`"),
                        ))
                    }
                });
            }
            "shape" => {
                let body = value
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::format(at(value_offset), "shape must be a tuple"))?;
                let dims = body
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>().map_err(|_| {
                            Error::format(at(value_offset), format!("bad shape entry `{s}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                shape = Some(dims);
            }
            other => {
                return Err(Error::format(at(offset), format!("unexpected header key `{other}`")));
            }
        }
        let used = rest.len() - after_colon.len() + value_end;
        rest = &rest[used..];
        offset += used;
    }

    let missing = |k: &str| Error::format(at(0), format!("header is missing `{k}`"));
    Ok(Header {
        dtype: descr.ok_or_else(|| missing("descr"))?,
        fortran_order: fortran_order.ok_or_else(|| missing("fortran_order"))?,
        shape: shape.ok_or_else(|| missing("shape"))?,
    })
}

fn parse_quoted(s: &str) -> Option<(&str, &str)> {
    let quote = s.chars().next().filter(|c| *c == '\'' || *c == '"')?;
    let body = &s[1..];
    let end = body.find(quote)?;
    Some((&body[..end], &body[end + 1..]))
}

/// Encodes `data` as an NPY v1.0 `<f8` array.
pub fn encode_npy_f64(shape: &[usize], data: &[f64]) -> Vec<u8> {
    encode(shape, "<f8", data.len() * 8, |out| {
        for v in data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    })
}

/// Encodes `data` as an NPY v1.0 `<f4` array.
pub fn encode_npy_f32(shape: &[usize], data: &[f32]) -> Vec<u8> {
    encode(shape, "<f4", data.len() * 4, |out| {
        for v in data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    })
}

fn encode(shape: &[usize], descr: &str, payload: usize, write: impl FnOnce(&mut Vec<u8>)) -> Vec<u8> {
    let dims = match shape {
        [single] => format!("({single},)"),
        _ => format!(
            "({})",
            shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut header = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': {dims}, }}");
    // total preamble + header is padded to a multiple of 64, newline-terminated
    let unpadded = PREAMBLE_LEN + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');

    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    write(&mut out);
    out
}

pub fn write_npy_f64(path: &Path, shape: &[usize], data: &[f64]) -> Result<()> {
    std::fs::write(path, encode_npy_f64(shape, data)).map_err(|e| Error::io(path, e))
}
