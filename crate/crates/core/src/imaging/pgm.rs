//! PGM (P2/P5, maxval 255) reading and writing.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Read a binary (P5) or ASCII (P2) PGM file with maxval 255.
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    parse_pgm(&bytes).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Write `image` to `path` as binary PGM (P5, maxval 255).
pub fn write_pgm(image: &GrayImage, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    f.write_all(header.as_bytes())?;
    f.write_all(image.pixels())?;
    Ok(())
}

/// Decode PGM bytes. Exposed separately from [`read_pgm`] for tests.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token()?.to_vec();
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "not a PGM file (magic {:?})",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cur.int()? as usize;
    let height = cur.int()? as usize;
    let maxval = cur.int()?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} unsupported (only 255)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Parse("zero image dimension".into()));
    }
    let n = width * height;
    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the payload.
        cur.skip_single_whitespace()?;
        let rest = &cur.bytes[cur.pos..];
        if rest.len() < n {
            return Err(Error::Parse(format!(
                "truncated P5 payload: {} bytes, expected {n}",
                rest.len()
            )));
        }
        rest[..n].to_vec()
    } else {
        let mut px = Vec::with_capacity(n);
        for _ in 0..n {
            let v = cur.int()?;
            if v > 255 {
                return Err(Error::Parse(format!("pixel value {v} out of range")));
            }
            px.push(v as u8);
        }
        px
    };
    GrayImage::new(width, height, pixels)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skip whitespace and `#` comments, then return the next token.
    fn token(&mut self) -> Result<&[u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::Parse("unexpected end of header".into()));
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn int(&mut self) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "expected integer, found {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }

    fn skip_single_whitespace(&mut self) -> Result<()> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse("missing whitespace before P5 payload".into()))
        }
    }
}
