//! Input readers for the command-line tool: one-sample-per-line CSV signals
//! and PGM (P2/P5) images.

use crate::dft::{Complex, ComplexMatrix, ComplexVec};
use crate::error::{Error, Result};

/// Parses a signal with one sample per line, `re` or `re,im`.
///
/// Blank lines and lines starting with `#` are skipped. Line numbers in
/// errors are 1-based.
pub fn parse_signal_csv(text: &[u8]) -> Result<ComplexVec> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let line = text[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(line, "input is not valid UTF-8")
    })?;
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let number = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::parse(lineno, format!("not a number: {s:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite sample {s:?}")));
            }
            Ok(v)
        };
        let z = match fields.as_slice() {
            [re] => Complex::new(number(re)?, 0.0),
            [re, im] => Complex::new(number(re)?, number(im)?),
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("expected `re` or `re,im`, got {} fields", fields.len()),
                ))
            }
        };
        samples.push(z);
    }
    if samples.is_empty() {
        return Err(Error::domain("signal has no samples"));
    }
    ComplexVec::new(samples)
}

/// Decoded grayscale image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl GrayImage {
    pub fn pixel(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    /// Largest centered square, as a real matrix.
    pub fn center_square(&self) -> Result<ComplexMatrix> {
        let side = self.width.min(self.height);
        let x0 = (self.width - side) / 2;
        let y0 = (self.height - side) / 2;
        self.square_at(x0, y0, side)
    }

    /// `side x side` window with top-left corner `(x0, y0)`.
    pub fn square_at(&self, x0: usize, y0: usize, side: usize) -> Result<ComplexMatrix> {
        if x0 + side > self.width || y0 + side > self.height {
            return Err(Error::domain("crop window leaves the image"));
        }
        let mut data = Vec::with_capacity(side * side);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                data.push(Complex::new(self.pixel(x, y) as f64, 0.0));
            }
        }
        ComplexMatrix::from_row_major(side, data)
    }
}

/// Header tokenizer that tracks line numbers and skips `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                if b == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(self.line, "unexpected end of file"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let line = self.line;
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(line, format!("invalid {what}")))
    }
}

/// Decodes a binary (P5) or ASCII (P2) PGM image.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut h = Header {
        bytes,
        pos: 0,
        line: 1,
    };
    let binary = match h.token()? {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::parse(
                1,
                format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(h.line, "image has zero extent"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(h.line, format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::parse(h.line, "image dimensions overflow"))?;

    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(h.pos) {
            Some(b) if b.is_ascii_whitespace() => h.pos += 1,
            _ => return Err(Error::parse(h.line, "missing raster separator")),
        }
        let raster = &bytes[h.pos..];
        let wide = maxval > 255;
        let need = if wide { count * 2 } else { count };
        if raster.len() < need {
            return Err(Error::parse(
                h.line,
                format!("truncated raster: need {need} bytes, found {}", raster.len()),
            ));
        }
        if wide {
            raster[..need]
                .chunks_exact(2)
                .map(|p| u16::from_be_bytes([p[0], p[1]]))
                .collect()
        } else {
            raster[..need].iter().map(|&b| b as u16).collect()
        }
    } else {
        let mut px = Vec::with_capacity(count);
        for _ in 0..count {
            let line = h.line;
            let v = h.number("pixel value").map_err(|e| match e {
                Error::Parse { msg, .. } if msg == "unexpected end of file" => {
                    Error::parse(line, "truncated raster")
                }
                other => other,
            })?;
            px.push(v as u16);
            if v > maxval {
                return Err(Error::parse(h.line, format!("pixel {v} exceeds maxval {maxval}")));
            }
        }
        px
    };
    if let Some(&p) = pixels.iter().find(|&&p| p as usize > maxval) {
        return Err(Error::parse(h.line, format!("pixel {p} exceeds maxval {maxval}")));
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

/// Reads a PGM image and center-crops it to the largest square.
pub fn load_pgm(bytes: &[u8]) -> Result<ComplexMatrix> {
    decode_pgm(bytes)?.center_square()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_examples() {
        let v = parse_signal_csv(b"1\n2\n3\n4\n").unwrap();
        assert_eq!(v, ComplexVec::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap());
        let v = parse_signal_csv(b"1,0\n0,1\n").unwrap();
        assert_eq!(v.as_slice(), &[Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)]);
        match parse_signal_csv(b"1\nx\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_skips_comments_and_blanks() {
        let v = parse_signal_csv(b"# header\n\n 1.5 , -2 \n\n# x\n3e-1\n").unwrap();
        assert_eq!(v.as_slice(), &[Complex::new(1.5, -2.0), Complex::new(0.3, 0.0)]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_signal_csv(b"# nothing\n\n"), Err(Error::Domain(_))));
        assert!(matches!(
            parse_signal_csv(b"1,2,3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_signal_csv(b"1\n2\ninf\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_signal_csv(&[b'1', b'\n', 0xff]).is_err());
    }

    #[test]
    fn ascii_pgm() {
        let m = load_pgm(b"P2\n# tiny\n2 2\n255\n1 1\n1 1\n").unwrap();
        assert_eq!(m, ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap());
    }

    #[test]
    fn wide_image_is_center_cropped() {
        // width 3, height 2
        let m = load_pgm(b"P2 3 2 9\n1 2 3\n4 5 6\n").unwrap();
        assert_eq!(m, ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![4.0, 5.0]]).unwrap());
        // width 2, height 5: rows 1..3
        let m = load_pgm(b"P2 2 5 9\n1 2\n3 4\n5 6\n7 8\n9 0\n").unwrap();
        assert_eq!(m, ComplexMatrix::from_real_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap());
    }

    #[test]
    fn binary_pgm_8_and_16_bit() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0u8, 10, 20, 255]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0, 10, 20, 255]);

        let mut bytes = b"P5 1 2 65535\n".to_vec();
        bytes.extend([0x01, 0x02, 0xff, 0xff]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0x0102, 0xffff]);
    }

    #[test]
    fn malformed_pgm() {
        assert!(matches!(load_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::Parse { .. })));
        assert!(matches!(load_pgm(b"P2\n2 2\n255\n1 1 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(load_pgm(b"P5\n2 2\n255\n\x01\x02"), Err(Error::Parse { .. })));
        assert!(matches!(load_pgm(b"P2\n2 x\n255\n"), Err(Error::Parse { line: 2, .. })));
        assert!(load_pgm(b"P2\n1 1\n0\n0\n").is_err());
        assert!(load_pgm(b"P2\n1 1\n70000\n0\n").is_err());
        assert!(load_pgm(b"P2\n1 1\n10\n11\n").is_err());
        assert!(load_pgm(b"").is_err());
    }
}
