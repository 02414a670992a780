use std::io::Cursor;

use super::RenderError;
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// 16-bit grayscale PNG; intensity `[0, 1]` maps linearly to `[0, 65535]`.
pub fn encode_png_gray16<S: Scalar>(
    width: usize,
    height: usize,
    image: &[S],
) -> Result<Vec<u8>, RenderError> {
    let mut data = Vec::with_capacity(image.len() * 2);
    for v in image {
        let q = (v.as_f64().clamp(0.0, 1.0) * 65535.0).round() as u16;
        data.extend_from_slice(&q.to_be_bytes());
    }
    encode(width, height, png::BitDepth::Sixteen, &data)
}

/// 8-bit mask PNG, 255 where set.
pub fn encode_png_mask(width: usize, height: usize, mask: &[bool]) -> Result<Vec<u8>, RenderError> {
    let data: Vec<u8> = mask.iter().map(|m| if *m { 255 } else { 0 }).collect();
    encode(width, height, png::BitDepth::Eight, &data)
}

fn encode(
    width: usize,
    height: usize,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<Vec<u8>, RenderError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(depth);
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
    }
    Ok(out)
}

fn decode(bytes: &[u8]) -> Result<(usize, usize, png::BitDepth, Vec<u8>), RenderError> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    Ok((
        info.width as usize,
        info.height as usize,
        info.bit_depth,
        buf,
    ))
}

/// Returns `(width, height, raw 16-bit samples)`.
pub fn decode_png_gray16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>), RenderError> {
    let (w, h, depth, buf) = decode(bytes)?;
    if depth != png::BitDepth::Sixteen {
        return Err(RenderError::Pfm(format!(
            "expected a 16-bit PNG, found {depth:?}"
        )));
    }
    Ok((
        w,
        h,
        buf.chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    ))
}

pub fn decode_png_mask(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>), RenderError> {
    let (w, h, _, buf) = decode(bytes)?;
    Ok((w, h, buf.into_iter().map(|b| b != 0).collect()))
}

/// Three-channel little-endian PFM (`PF`, scale `-1.0`), rows written
/// bottom to top. Input is row-major with row 0 at the top.
pub fn write_pfm<S: Scalar>(width: usize, height: usize, normals: &[Vec3<S>]) -> Vec<u8> {
    let mut out = format!("PF\n{width} {height}\n-1.0\n").into_bytes();
    for row in (0..height).rev() {
        for n in &normals[row * width..(row + 1) * width] {
            for c in n.0 {
                out.extend_from_slice(&(c.as_f64() as f32).to_le_bytes());
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top.
    pub pixels: Vec<[f32; 3]>,
}

pub fn read_pfm(bytes: &[u8]) -> Result<PfmImage, RenderError> {
    let err = |m: &str| RenderError::Pfm(m.to_string());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(err("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("non-ASCII header"))?);
    }
    pos += 1;
    if fields[0] != "PF" {
        return Err(err("expected a three-channel `PF` file"));
    }
    let width: usize = fields[1].parse().map_err(|_| err("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| err("bad height"))?;
    let scale: f32 = fields[3].parse().map_err(|_| err("bad scale"))?;
    let data = &bytes[pos.min(bytes.len())..];
    if data.len() != width * height * 12 {
        return Err(err("pixel data length does not match header"));
    }
    let read = |c: &[u8]| {
        let b = [c[0], c[1], c[2], c[3]];
        if scale < 0.0 {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let mut pixels = vec![[0.0f32; 3]; width * height];
    for (k, px) in data.chunks(12).enumerate() {
        let (file_row, col) = (k / width, k % width);
        let row = height - 1 - file_row;
        pixels[row * width + col] = [read(&px[0..4]), read(&px[4..8]), read(&px[8..12])];
    }
    Ok(PfmImage {
        width,
        height,
        pixels,
    })
}
