//! PNG (8/16-bit gray and RGB) and binary PGM/PPM codecs.
//!
//! Integer codes map to intensities as `code / maxcode`; encoding uses
//! `floor(v * maxcode + 0.5)` after clamping to `[0, 1]`. Writes go to a
//! temporary file in the destination directory and are renamed into place,
//! so a failed write never leaves a partial file behind.

use std::io::Write;
use std::path::Path;

use super::{ColorImage, GrayImage, Plane};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_code(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// A decoded image, gray or color.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyImage {
    Gray(GrayImage),
    Color(ColorImage),
}

impl AnyImage {
    pub fn dimensions(&self) -> (usize, usize) {
        match self {
            AnyImage::Gray(g) => g.dimensions(),
            AnyImage::Color(c) => c.dimensions(),
        }
    }

    /// Gray images pass through; color images are reduced to luminance.
    pub fn to_gray(&self) -> GrayImage {
        match self {
            AnyImage::Gray(g) => g.clone(),
            AnyImage::Color(c) => c.to_luminance(),
        }
    }

    /// Color images pass through; gray images are replicated into three channels.
    pub fn to_color(&self) -> ColorImage {
        match self {
            AnyImage::Gray(g) => ColorImage::from_gray(g),
            AnyImage::Color(c) => c.clone(),
        }
    }
}

impl From<GrayImage> for AnyImage {
    fn from(g: GrayImage) -> Self {
        AnyImage::Gray(g)
    }
}

impl From<ColorImage> for AnyImage {
    fn from(c: ColorImage) -> Self {
        AnyImage::Color(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Container {
    Png,
    Pgm,
    Ppm,
}

fn container_for(path: &Path) -> Result<Container> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Container::Png),
        "pgm" => Ok(Container::Pgm),
        "ppm" | "pnm" => Ok(Container::Ppm),
        _ => Err(Error::format(
            path,
            "unsupported image extension (expected .png, .pgm or .ppm)",
        )),
    }
}

/// Read a PNG, PGM (P5) or PPM (P6) file, sniffing the format from its magic bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<AnyImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(path, &bytes)
    } else {
        Err(Error::format(path, "not a PNG or binary PGM/PPM file"))
    }
}

fn unit_from_u8(v: u8) -> f32 {
    (v as f64 / 255.0) as f32
}

fn unit_from_u16(v: u16) -> f32 {
    (v as f64 / 65535.0) as f32
}

fn planes_from_interleaved(
    w: usize,
    h: usize,
    samples: impl Iterator<Item = f32>,
    channels: usize,
    take: usize,
) -> Vec<Vec<f32>> {
    let mut planes = vec![Vec::with_capacity(w * h); take];
    for (i, s) in samples.enumerate() {
        let c = i % channels;
        if c < take {
            planes[c].push(s);
        }
    }
    planes
}

fn assemble(w: usize, h: usize, mut planes: Vec<Vec<f32>>) -> Result<AnyImage> {
    if planes.len() == 1 {
        Ok(AnyImage::Gray(Plane::from_vec(w, h, planes.pop().unwrap())?))
    } else {
        let b = Plane::from_vec(w, h, planes.pop().unwrap())?;
        let g = Plane::from_vec(w, h, planes.pop().unwrap())?;
        let r = Plane::from_vec(w, h, planes.pop().unwrap())?;
        Ok(AnyImage::Color(ColorImage::from_planes(r, g, b)?))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<AnyImage> {
    use image::DynamicImage as D;
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, format!("PNG decode failed: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let planes = match &img {
        D::ImageLuma8(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u8(v)), 1, 1),
        D::ImageLumaA8(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u8(v)), 2, 1),
        D::ImageRgb8(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u8(v)), 3, 3),
        D::ImageRgba8(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u8(v)), 4, 3),
        D::ImageLuma16(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u16(v)), 1, 1),
        D::ImageLumaA16(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u16(v)), 2, 1),
        D::ImageRgb16(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u16(v)), 3, 3),
        D::ImageRgba16(b) => planes_from_interleaved(w, h, b.iter().map(|&v| unit_from_u16(v)), 4, 3),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported PNG sample layout {:?}", other.color()),
            ))
        }
    };
    assemble(w, h, planes)
}

struct PnmHeader {
    channels: usize,
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_pnm_header(path: &Path, bytes: &[u8]) -> Result<PnmHeader> {
    let channels = if bytes.starts_with(b"P5") { 1 } else { 3 };
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // Whitespace and comments between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::format(path, "truncated PNM header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "malformed PNM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "PNM header value out of range"))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(path, "truncated PNM header")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format(path, "PNM image has zero size"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(
            path,
            format!("unsupported PNM maxval {maxval} (bit depth above 16)"),
        ));
    }
    Ok(PnmHeader {
        channels,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_offset: pos,
    })
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<AnyImage> {
    let hdr = parse_pnm_header(path, bytes)?;
    let bytes_per_sample = if hdr.maxval > 255 { 2 } else { 1 };
    let count = hdr.width * hdr.height * hdr.channels;
    let raster = &bytes[hdr.data_offset..];
    if raster.len() < count * bytes_per_sample {
        return Err(Error::format(
            path,
            format!(
                "truncated PNM raster: {} bytes, expected {}",
                raster.len(),
                count * bytes_per_sample
            ),
        ));
    }
    let max = hdr.maxval as f64;
    let codes: Vec<u32> = if bytes_per_sample == 1 {
        raster[..count].iter().map(|&b| b as u32).collect()
    } else {
        raster[..2 * count]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    };
    if let Some(bad) = codes.iter().find(|&&c| c > hdr.maxval) {
        return Err(Error::format(
            path,
            format!("sample {bad} exceeds maxval {}", hdr.maxval),
        ));
    }
    let planes = planes_from_interleaved(
        hdr.width,
        hdr.height,
        codes.iter().map(|&c| (c as f64 / max) as f32),
        hdr.channels,
        hdr.channels,
    );
    assemble(hdr.width, hdr.height, planes)
}

#[inline]
fn encode_sample(v: f32, max: u32) -> u32 {
    let v = if v.is_nan() { 0.0 } else { (v as f64).clamp(0.0, 1.0) };
    ((v * max as f64 + 0.5).floor() as u32).min(max)
}

fn interleave(img: &AnyImage) -> (usize, Vec<&[f32]>) {
    match img {
        AnyImage::Gray(g) => (1, vec![g.data()]),
        AnyImage::Color(c) => (3, c.planes().iter().map(|p| p.data()).collect()),
    }
}

fn encode(path: &Path, img: &AnyImage, depth: BitDepth) -> Result<Vec<u8>> {
    let container = container_for(path)?;
    let (w, h) = img.dimensions();
    let (channels, planes) = interleave(img);
    match (container, channels) {
        (Container::Pgm, 3) => return Err(Error::format(path, "cannot write a color image as PGM")),
        (Container::Ppm, 1) => return Err(Error::format(path, "cannot write a gray image as PPM")),
        _ => {}
    }
    let max = depth.max_code();
    let codes = (0..w * h).flat_map(|i| planes.iter().map(move |p| encode_sample(p[i], max)));
    match container {
        Container::Pgm | Container::Ppm => {
            let magic = if channels == 1 { "P5" } else { "P6" };
            let mut out = format!("{magic}\n{w} {h}\n{max}\n").into_bytes();
            match depth {
                BitDepth::Eight => out.extend(codes.map(|c| c as u8)),
                BitDepth::Sixteen => out.extend(codes.flat_map(|c| (c as u16).to_be_bytes())),
            }
            Ok(out)
        }
        Container::Png => {
            use image::ExtendedColorType as C;
            let (buf, color): (Vec<u8>, C) = match depth {
                BitDepth::Eight => (
                    codes.map(|c| c as u8).collect(),
                    if channels == 1 { C::L8 } else { C::Rgb8 },
                ),
                // PngEncoder takes native-endian u16 samples and byte-swaps itself.
                BitDepth::Sixteen => (
                    codes.flat_map(|c| (c as u16).to_ne_bytes()).collect(),
                    if channels == 1 { C::L16 } else { C::Rgb16 },
                ),
            };
            let mut out = Vec::new();
            let encoder = image::codecs::png::PngEncoder::new(&mut out);
            image::ImageEncoder::write_image(encoder, &buf, w as u32, h as u32, color)
                .map_err(|e| Error::format(path, format!("PNG encode failed: {e}")))?;
            Ok(out)
        }
    }
}

/// Write bytes to `path` via a sibling temporary file and an atomic rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".msfusion-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Encode by file extension (`.png`, `.pgm`, `.ppm`) and write atomically.
pub fn write_image(path: impl AsRef<Path>, img: &AnyImage, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(path, img, depth)?;
    write_atomic(path, &bytes)
}

pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage, depth: BitDepth) -> Result<()> {
    write_image(path, &AnyImage::Gray(img.clone()), depth)
}
