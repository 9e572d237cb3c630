//! 8-bit PNG reading and writing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{ColorSpace, ImageBuffer};
use crate::{Error, Result};

/// Reads an 8-bit (or lower, expanded) gray, gray+alpha, RGB, RGBA or palette PNG.
///
/// Gray+alpha input is widened to RGBA and palette input to RGB/RGBA.
pub fn read_png(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let malformed = |e: png::DecodingError| match e {
        png::DecodingError::IoError(io) if io.kind() != std::io::ErrorKind::UnexpectedEof => {
            Error::io(path, io)
        }
        other => Error::MalformedPng {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    };

    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(malformed)?;
    let depth = reader.info().bit_depth;
    if depth == png::BitDepth::Sixteen {
        return Err(Error::UnsupportedDepth {
            path: path.to_path_buf(),
            depth: 16,
        });
    }
    let size = reader.output_buffer_size().ok_or_else(|| Error::MalformedPng {
        path: path.to_path_buf(),
        reason: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(malformed)?;
    buf.truncate(frame.buffer_size());

    let (colorspace, data) = match frame.color_type {
        png::ColorType::Grayscale => (ColorSpace::Gray, buf),
        png::ColorType::Rgb => (ColorSpace::Rgb, buf),
        png::ColorType::Rgba => (ColorSpace::Rgba, buf),
        png::ColorType::GrayscaleAlpha => (
            ColorSpace::Rgba,
            buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0], p[1]]).collect(),
        ),
        png::ColorType::Indexed => {
            return Err(Error::MalformedPng {
                path: path.to_path_buf(),
                reason: "palette was not expanded".into(),
            })
        }
    };
    ImageBuffer::from_raw(frame.width, frame.height, colorspace, data)
}

pub fn write_png(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    write_with(image, path.as_ref(), png::Compression::Balanced)
}

/// Same as [`write_png`] with the fastest deflate setting; output is still
/// deterministic for a given raster.
pub fn write_png_fast(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    write_with(image, path.as_ref(), png::Compression::Fast)
}

fn write_with(image: &ImageBuffer, path: &Path, compression: png::Compression) -> Result<()> {
    let color = match image.colorspace() {
        ColorSpace::Gray => png::ColorType::Grayscale,
        ColorSpace::Rgb => png::ColorType::Rgb,
        ColorSpace::Rgba => png::ColorType::Rgba,
        ColorSpace::Hsv => {
            return Err(Error::ColorSpace {
                expected: "GRAY, RGB or RGBA",
                found: "HSV",
            })
        }
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let encode_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::InvalidParam(other.to_string()),
    };
    {
        let mut encoder = png::Encoder::new(&mut out, image.width(), image.height());
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(compression);
        let mut writer = encoder.write_header().map_err(encode_err)?;
        writer.write_image_data(image.data()).map_err(encode_err)?;
        writer.finish().map_err(encode_err)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient() -> ImageBuffer {
        let mut img = ImageBuffer::new(17, 9, ColorSpace::Rgb);
        for (i, v) in img.data_mut().iter_mut().enumerate() {
            *v = (i * 37 % 256) as u8;
        }
        img
    }

    #[test]
    fn round_trip_rgb_gray_rgba() {
        let dir = tempfile::tempdir().unwrap();
        let rgb = gradient();
        let gray = ImageBuffer::from_raw(3, 2, ColorSpace::Gray, vec![0, 50, 100, 150, 200, 250]).unwrap();
        let rgba = ImageBuffer::filled(4, 4, ColorSpace::Rgba, &[1, 2, 3, 4]);
        for (i, img) in [rgb, gray, rgba].into_iter().enumerate() {
            let p = dir.path().join(format!("{i}.png"));
            write_png(&img, &p).unwrap();
            assert_eq!(read_png(&p).unwrap(), img);
            write_png_fast(&img, &p).unwrap();
            assert_eq!(read_png(&p).unwrap(), img);
        }
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
        write_png(&gradient(), &a).unwrap();
        write_png(&read_png(&a).unwrap(), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn missing_file() {
        let err = read_png("/nonexistent/x.png").unwrap_err();
        assert!(matches!(err, Error::NotFound(_)), "{err:?}");
    }

    #[test]
    fn truncated_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.png");
        write_png(&gradient(), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        let err = read_png(&p).unwrap_err();
        assert!(matches!(err, Error::MalformedPng { .. }), "{err:?}");

        std::fs::write(&p, b"not a png at all").unwrap();
        assert!(matches!(read_png(&p).unwrap_err(), Error::MalformedPng { .. }));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("deep.png");
        {
            let f = File::create(&p).unwrap();
            let mut enc = png::Encoder::new(BufWriter::new(f), 2, 2);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0u8; 2 * 2 * 3 * 2]).unwrap();
        }
        let err = read_png(&p).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDepth { depth: 16, .. }), "{err:?}");
    }

    #[test]
    fn hsv_cannot_be_written() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageBuffer::new(2, 2, ColorSpace::Hsv);
        assert!(write_png(&img, dir.path().join("h.png")).is_err());
    }
}
