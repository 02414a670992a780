//! Deterministic software renderer producing shape-from-shading samples.
//!
//! An orthographic camera looks down its `−z` axis; a directional light of
//! unit intensity shades a white Lambertian surface with hard cast shadows.
//! There is no ambient term, no interreflection and one ray per pixel, so an
//! unshadowed pixel has intensity exactly `max(0, n·l)` for the emitted
//! camera-space normal `n`.

mod caster;
mod dataset;
mod image_io;
mod raster;
mod view;

pub use dataset::{read_view_json, write_dataset_view, write_shape_dataset, ViewFiles};
pub use image_io::{
    decode_png_gray16, decode_png_mask, encode_png_gray16, encode_png_mask, read_pfm, write_pfm,
    PfmImage,
};
pub use raster::{render, RenderSample};
pub use view::{sample_view, ViewSpec, DEFAULT_IMAGE_SIZE, MAX_LIGHT_ANGLE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("PNG encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("PNG decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("malformed PFM: {0}")]
    Pfm(String),
    #[error("malformed view file: {0}")]
    View(String),
    #[error("empty isosurface")]
    EmptyShape,
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
