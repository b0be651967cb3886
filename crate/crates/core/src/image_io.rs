//! Binary PGM (P5) and PPM (P6) with 8-bit samples.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::blur::{BlurError, ImageBuffer};

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported magic {0:?}; expected P5 or P6")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0}; only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Buffer(#[from] BlurError),
}

/// Byte to unit float.
pub fn from_u8(v: u8) -> f64 {
    f64::from(v) / 255.0
}

/// Unit float to byte, rounding half away from zero.
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn decode(bytes: &[u8]) -> Result<ImageBuffer, ImageIoError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(ImageIoError::BadMagic(other.to_string())),
    };
    let width = parse_dim(&next_token(bytes, &mut pos)?, "width")?;
    let height = parse_dim(&next_token(bytes, &mut pos)?, "height")?;
    let maxval = parse_dim(&next_token(bytes, &mut pos)?, "maxval")?;
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedMaxval(maxval as u32));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(ImageIoError::BadHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }

    let expected = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(ImageIoError::Truncated {
            expected,
            got: raster.len(),
        });
    }
    let data = raster[..expected].iter().copied().map(from_u8).collect();
    Ok(ImageBuffer::new(width, height, channels, data)?)
}

pub fn encode(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| to_u8(v)));
    out
}

pub fn read_from(mut reader: impl Read) -> Result<ImageBuffer, ImageIoError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn write_to(img: &ImageBuffer, mut writer: impl Write) -> Result<(), ImageIoError> {
    writer.write_all(&encode(img))?;
    Ok(())
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, ImageIoError> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(ImageIoError::BadHeader("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while let Some(b) = bytes.get(*pos) {
        if b.is_ascii_whitespace() {
            break;
        }
        *pos += 1;
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_dim(token: &str, what: &str) -> Result<usize, ImageIoError> {
    token.parse::<usize>().map_err(|_| {
        ImageIoError::BadHeader(format!("{what} {token:?} is not a non-negative integer"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_round_trips_every_byte() {
        for b in 0..=255u8 {
            assert_eq!(to_u8(from_u8(b)), b);
        }
        assert_eq!(to_u8(0.5), 128);
        assert_eq!(to_u8(-1.0), 0);
        assert_eq!(to_u8(2.0), 255);
    }

    #[test]
    fn canonical_bytes_survive_decode_encode() {
        let mut bytes = b"P6\n3 2\n255\n".to_vec();
        bytes.extend((0..18).map(|i| (i * 14) as u8));
        let img = decode(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (3, 2, 3));
        assert_eq!(encode(&img), bytes);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5 # gray\n# size next\n2 1\n255\n".to_vec();
        bytes.extend([0u8, 255]);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            decode(b"P3\n1 1\n255\n"),
            Err(ImageIoError::BadMagic(_))
        ));
        assert!(matches!(
            decode(b"P5\n1 1\n65535\n\0\0"),
            Err(ImageIoError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode(b"P5\n2 2\n255\n\0"),
            Err(ImageIoError::Truncated {
                expected: 4,
                got: 1
            })
        ));
        assert!(matches!(
            decode(b"P5\nx 2\n255\n"),
            Err(ImageIoError::BadHeader(_))
        ));
        assert!(matches!(decode(b"P5\n2"), Err(ImageIoError::BadHeader(_))));
    }
}
