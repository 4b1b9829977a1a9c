use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::depth_map::DepthMap;
use crate::error::{Error, Result};

/// Stored value per meter (the RGB-D `DepthMapFactor`).
pub const DEPTH_SCALE: f32 = 256.0;

/// Encodes a map as a single-channel 16-bit PNG, `round(depth * 256)`, 0 for invalid.
///
/// Valid depths that would quantize to 0 (below 1/512 m) or overflow 16 bits
/// (beyond 255.998 m) are rejected instead of silently changing validity.
pub fn encode_depth_png(map: &DepthMap) -> Result<Vec<u8>> {
    if map.width() == 0 || map.height() == 0 {
        return Err(Error::DepthEncode(format!(
            "cannot encode a {}x{} image",
            map.width(),
            map.height()
        )));
    }
    let mut raw = Vec::with_capacity(map.len() * 2);
    for (i, &d) in map.as_slice().iter().enumerate() {
        let stored = if d > 0.0 {
            let q = (d * DEPTH_SCALE).round();
            if q > u16::MAX as f32 {
                return Err(Error::DepthEncode(format!(
                    "pixel {i}: {d} m exceeds the 16-bit range at scale {DEPTH_SCALE}"
                )));
            }
            if q < 1.0 {
                return Err(Error::DepthEncode(format!(
                    "pixel {i}: {d} m is below the quantization step"
                )));
            }
            q as u16
        } else {
            0
        };
        raw.extend_from_slice(&stored.to_be_bytes());
    }

    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, map.width(), map.height());
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    let enc_err = |e: png::EncodingError| Error::DepthEncode(e.to_string());
    let mut writer = encoder.write_header().map_err(enc_err)?;
    writer.write_image_data(&raw).map_err(enc_err)?;
    writer.finish().map_err(enc_err)?;
    Ok(out)
}

pub fn decode_depth_png(bytes: &[u8]) -> Result<DepthMap> {
    let dec_err = |e: png::DecodingError| Error::DepthDecode(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(dec_err)?;
    let info = reader.info();
    let (width, height) = (info.width, info.height);
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(Error::DepthDecode(format!(
            "expected 16-bit single-channel PNG, got {:?} at {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::DepthDecode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(dec_err)?;
    let line = frame.line_size;
    let mut depth = Vec::with_capacity(width as usize * height as usize);
    for row in buf[..frame.buffer_size()].chunks_exact(line) {
        depth.extend(
            row[..width as usize * 2]
                .chunks_exact(2)
                .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / DEPTH_SCALE),
        );
    }
    Ok(DepthMap::from_vec_unchecked(width, height, depth))
}

pub fn write_depth_png(map: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_depth_png(map)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_depth_png(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_depth_png(&bytes).map_err(|e| Error::DepthDecode(format!("{}: {e}", path.display())))
}
