//! Binary portable graymap (P5) and pixmap (P6) files.
//!
//! Images are read with 8-bit samples (maxval 1..=255, values kept as
//! stored). Label maps are 16-bit P5 files (maxval 65535, big-endian).

use std::fs;
use std::io::Write;
use std::path::Path;

use dgpyr_core::{Image, ImageError};

#[derive(Debug, thiserror::Error)]
pub enum PnmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(&'static str),
    #[error("unsupported magic number {0:?} (expected P5 or P6)")]
    Magic(String),
    #[error("unsupported maxval {0}")]
    Maxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("label map: {0}")]
    Labels(&'static str),
    #[error(transparent)]
    Image(#[from] ImageError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PnmError + '_ {
    move |source| PnmError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    channels: u8,
    width: u32,
    height: u32,
    maxval: u32,
    /// Offset of the first payload byte.
    offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PnmError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(PnmError::Header("missing magic number"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        _ => return Err(PnmError::Magic(String::from_utf8_lossy(&bytes[..2]).into_owned())),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(PnmError::Header("header ends early")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(PnmError::Header("expected a number"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PnmError::Header("number out of range"))?;
    }
    // exactly one whitespace byte before the payload
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(PnmError::Header("no separator before payload")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(PnmError::Header("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PnmError::Maxval(maxval));
    }
    Ok(Header {
        channels,
        width,
        height,
        maxval,
        offset: pos,
    })
}

fn payload<'a>(bytes: &'a [u8], h: &Header, sample_bytes: usize) -> Result<&'a [u8], PnmError> {
    let expected = h.width as usize * h.height as usize * h.channels as usize * sample_bytes;
    let found = bytes.len() - h.offset;
    if found < expected {
        return Err(PnmError::Truncated { expected, found });
    }
    Ok(&bytes[h.offset..h.offset + expected])
}

/// Decodes an 8-bit P5 or P6 file.
pub fn decode_image(bytes: &[u8]) -> Result<Image, PnmError> {
    let h = parse_header(bytes)?;
    if h.maxval > 255 {
        return Err(PnmError::Maxval(h.maxval));
    }
    let data = payload(bytes, &h, 1)?.to_vec();
    Ok(Image::new(h.width, h.height, h.channels, data)?)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image, PnmError> {
    let path = path.as_ref();
    decode_image(&fs::read(path).map_err(io_err(path))?)
}

/// P5 for grey images, P6 for colour.
pub fn encode_image(image: &Image) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<(), PnmError> {
    write_file(path.as_ref(), &encode_image(image))
}

/// Label map as a 16-bit graymap. Labels are renumbered densely in order of
/// first appearance.
pub fn encode_labels(width: u32, height: u32, labels: &[u32]) -> Result<Vec<u8>, PnmError> {
    if labels.len() != width as usize * height as usize {
        return Err(PnmError::Labels("length does not match the size"));
    }
    let mut dense = std::collections::HashMap::new();
    let ids: Vec<u32> = labels
        .iter()
        .map(|&l| {
            let next = dense.len() as u32;
            *dense.entry(l).or_insert(next)
        })
        .collect();
    if dense.len() > 65536 {
        return Err(PnmError::Labels("more than 65536 labels"));
    }
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for id in ids {
        out.extend_from_slice(&(id as u16).to_be_bytes());
    }
    Ok(out)
}

pub fn save_labels(width: u32, height: u32, labels: &[u32], path: impl AsRef<Path>) -> Result<(), PnmError> {
    write_file(path.as_ref(), &encode_labels(width, height, labels)?)
}

/// Reads a graymap of any depth as labels, with its size.
pub fn decode_labels(bytes: &[u8]) -> Result<(u32, u32, Vec<u32>), PnmError> {
    let h = parse_header(bytes)?;
    if h.channels != 1 {
        return Err(PnmError::Labels("label maps are graymaps"));
    }
    let labels = if h.maxval > 255 {
        payload(bytes, &h, 2)?
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    } else {
        payload(bytes, &h, 1)?.iter().map(|&v| v as u32).collect()
    };
    Ok((h.width, h.height, labels))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<(u32, u32, Vec<u32>), PnmError> {
    let path = path.as_ref();
    decode_labels(&fs::read(path).map_err(io_err(path))?)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PnmError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comments() {
        let bytes = b"P5\n# made by hand\n2 1 # size\n255\n\x07\x09";
        let img = decode_image(bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.data()), (2, 1, &[7u8, 9][..]));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(decode_image(b"P2\n1 1\n255\n0"), Err(PnmError::Magic(_))));
        assert!(matches!(decode_image(b"P5\n1 1\n"), Err(PnmError::Header(_))));
        assert!(matches!(decode_image(b"P5\n1 1\n65535\n\0\0"), Err(PnmError::Maxval(65535))));
        assert!(matches!(decode_image(b"P5\n1 1\n70000\n\0"), Err(PnmError::Maxval(70000))));
        assert!(matches!(
            decode_image(b"P6\n2 1\n255\n\0\0\0"),
            Err(PnmError::Truncated { expected: 6, found: 3 })
        ));
        assert!(matches!(decode_image(b"P5\n0 1\n255\n"), Err(PnmError::Header(_))));
    }

    #[test]
    fn label_maps_use_two_bytes() {
        let labels: Vec<u32> = (0..300).collect();
        let bytes = encode_labels(300, 1, &labels).unwrap();
        assert!(bytes.starts_with(b"P5\n300 1\n65535\n"));
        assert_eq!(bytes.len(), 15 + 600);
        assert_eq!(decode_labels(&bytes).unwrap().2, labels);
        let sparse = encode_labels(2, 1, &[70, 3]).unwrap();
        assert_eq!(decode_labels(&sparse).unwrap().2, [0, 1]);
    }
}
