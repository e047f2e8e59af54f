//! Binary PGM (`P5`) decoding.

use crate::error::{Error, Result};

/// Decoded grey levels plus the declared maximum.
#[derive(Debug)]
pub struct Pgm {
    pub height: usize,
    pub width: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(b"P2") => return Err(Error::Unsupported("ASCII PGM (P2) is not supported, use P5".into())),
        _ => return Err(Error::format(0, "bad magic, expected P5")),
    }
    let mut pos = 2;
    let width = next_header_int(bytes, &mut pos)? as usize;
    let height = next_header_int(bytes, &mut pos)? as usize;
    let maxval = next_header_int(bytes, &mut pos)?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(pos, format!("maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(pos, "expected whitespace after maxval")),
    }

    let wide = maxval > 255;
    let count = width * height;
    let need = count * if wide { 2 } else { 1 };
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(Error::format(
            pos,
            format!("raster holds {} bytes, {width}x{height} needs {need}", raster.len()),
        ));
    }
    let samples: Vec<u32> = if wide {
        raster[..need]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    } else {
        raster[..need].iter().map(|&b| b as u32).collect()
    };
    if let Some(i) = samples.iter().position(|&s| s > maxval) {
        return Err(Error::format(pos + i, format!("sample exceeds maxval {maxval}")));
    }

    Ok(Pgm {
        height,
        width,
        maxval,
        samples,
    })
}

fn next_header_int(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::format(*pos, "truncated PGM header")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(start, "expected decimal integer in PGM header"))
}

/// Encodes an 8-bit or 16-bit binary PGM.
pub fn encode_pgm(width: usize, height: usize, maxval: u32, samples: &[u32]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    for &s in samples {
        if maxval > 255 {
            out.extend_from_slice(&(s as u16).to_be_bytes());
        } else {
            out.push(s as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[10, 20]);
        let pgm = parse_pgm(&bytes).unwrap();
        assert_eq!((pgm.width, pgm.height, pgm.maxval), (2, 1, 255));
        assert_eq!(pgm.samples, vec![10, 20]);
    }

    #[test]
    fn sixteen_bit_is_big_endian() {
        let bytes = encode_pgm(1, 1, 65535, &[0x1234]);
        assert_eq!(parse_pgm(&bytes).unwrap().samples, vec![0x1234]);
    }

    #[test]
    fn short_raster_is_a_format_error() {
        let bytes = b"P5 3 3 255\n\x00\x00".to_vec();
        assert!(matches!(parse_pgm(&bytes), Err(Error::Format { .. })));
    }
}
