//! Raster images, PNG I/O and RGB/HSV conversion.

use std::io::Cursor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit RGB triple.
pub type Rgb = [u8; 3];

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Decoded 8-bit RGB pixel grid stored in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Decodes a PNG byte stream. Alpha is dropped, grayscale is replicated
    /// across channels and 16-bit samples keep their high byte.
    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PNG_SIGNATURE.len() || bytes[..8] != PNG_SIGNATURE {
            return Err(Error::UnsupportedFormat);
        }
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(|e| Error::MalformedImage(e.to_string()))?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::MalformedImage("image too large".into()))?;
        let mut buf = vec![0u8; size];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| Error::MalformedImage(e.to_string()))?;
        if info.bit_depth != png::BitDepth::Eight {
            return Err(Error::MalformedImage(format!(
                "unexpected output bit depth {:?}",
                info.bit_depth
            )));
        }
        let data = &buf[..info.buffer_size()];
        let (width, height) = (info.width as usize, info.height as usize);
        let stride = info.line_size;
        let channels = info.color_type.samples();
        let mut pixels = Vec::with_capacity(width * height);
        for row in data.chunks(stride).take(height) {
            for px in row[..width * channels].chunks_exact(channels) {
                pixels.push(match info.color_type {
                    png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => [px[0], px[0], px[0]],
                    png::ColorType::Rgb | png::ColorType::Rgba => [px[0], px[1], px[2]],
                    png::ColorType::Indexed => return Err(Error::MalformedImage("palette was not expanded".into())),
                });
            }
        }
        Self::new(width, height, pixels).map_err(|e| Error::MalformedImage(e.to_string()))
    }

    /// Encodes as 8-bit RGB PNG with pinned compression and filter settings so
    /// that equal images always produce equal bytes.
    pub fn encode_png(&self) -> Vec<u8> {
        let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        encode_raw(self.width, self.height, png::ColorType::Rgb, None, &data)
    }
}

/// Writes a palette-indexed 8-bit PNG whose sample values are `indices`.
pub fn encode_indexed_png(width: usize, height: usize, palette: &[Rgb], indices: &[u8]) -> Vec<u8> {
    assert_eq!(indices.len(), width * height, "index count must match dimensions");
    assert!(
        !palette.is_empty() && palette.len() <= 256,
        "palette must hold 1..=256 colors"
    );
    let flat: Vec<u8> = palette.iter().flatten().copied().collect();
    encode_raw(width, height, png::ColorType::Indexed, Some(flat), indices)
}

/// Writes an 8-bit grayscale PNG.
pub fn encode_gray_png(width: usize, height: usize, samples: &[u8]) -> Vec<u8> {
    assert_eq!(samples.len(), width * height, "sample count must match dimensions");
    encode_raw(width, height, png::ColorType::Grayscale, None, samples)
}

fn encode_raw(width: usize, height: usize, color: png::ColorType, palette: Option<Vec<u8>>, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        encoder.set_filter(png::Filter::Adaptive);
        if let Some(p) = palette {
            encoder.set_palette(p);
        }
        // Writing to a Vec cannot fail for a well-formed header and buffer.
        let mut writer = encoder.write_header().expect("png header");
        writer.write_image_data(data).expect("png data");
        writer.finish().expect("png finish");
    }
    out
}

/// Hue in degrees, saturation and value as fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV conversion of 8-bit channels.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    hsv_from_unit_rgb(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0)
}

/// Hexcone conversion on real-valued channels in `[0, 1]`.
///
/// Achromatic inputs (`s == 0`) get `h == 0`.
pub fn hsv_from_unit_rgb(r: f64, g: f64, b: f64) -> HsvPixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return HsvPixel { h: 0.0, s, v };
    }
    let sector = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

/// Inverse hexcone conversion, rounding to 8-bit channels.
pub fn hsv_to_rgb(hsv: HsvPixel) -> Rgb {
    let c = hsv.v * hsv.s;
    let hp = (hsv.h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = hsv.v - c;
    let to8 = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to8(r1), to8(g1), to8(b1)]
}
