//! Dataset layout consumed by external evaluators:
//!
//! ```text
//! <shape-id>/<k>.png           16-bit grayscale shading
//! <shape-id>/<k>.normals.pfm   camera-space normals, zero on background
//! <shape-id>/<k>.mask.png      8-bit foreground mask
//! <shape-id>/<k>.view.json     camera rotation, light direction, window
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{
    encode_png_gray16, encode_png_mask, render, sample_view, write_pfm, RenderError, RenderSample,
    ViewSpec,
};
use crate::geometry::{marching_cubes, Bounds};
use crate::graph::ShapeGraph;
use crate::linalg::{Mat3, Vec3};
use crate::rng::derived;

#[derive(Clone, Debug)]
pub struct ViewFiles {
    pub image: PathBuf,
    pub normals: PathBuf,
    pub mask: PathBuf,
    pub view: PathBuf,
}

impl ViewFiles {
    pub fn new(dir: &Path, index: usize) -> Self {
        ViewFiles {
            image: dir.join(format!("{index}.png")),
            normals: dir.join(format!("{index}.normals.pfm")),
            mask: dir.join(format!("{index}.mask.png")),
            view: dir.join(format!("{index}.view.json")),
        }
    }
}

fn view_json(view: &ViewSpec<f64>) -> Value {
    json!({
        "camera_rotation": view.rotation.0,
        "light_direction": view.light.0,
        "window": {
            "half_extent": view.half_extent,
            "width": view.width,
            "height": view.height,
        },
    })
}

pub fn write_dataset_view(
    dir: &Path,
    index: usize,
    sample: &RenderSample<f64>,
    view: &ViewSpec<f64>,
) -> Result<ViewFiles, RenderError> {
    fs::create_dir_all(dir)?;
    let files = ViewFiles::new(dir, index);
    fs::write(
        &files.image,
        encode_png_gray16(sample.width, sample.height, &sample.image)?,
    )?;
    fs::write(
        &files.normals,
        write_pfm(sample.width, sample.height, &sample.normals),
    )?;
    fs::write(
        &files.mask,
        encode_png_mask(sample.width, sample.height, &sample.mask)?,
    )?;
    let text = serde_json::to_string_pretty(&view_json(view)).expect("view serializes");
    fs::write(&files.view, text + "\n")?;
    Ok(files)
}

pub fn read_view_json(path: &Path) -> Result<ViewSpec<f64>, RenderError> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| RenderError::View(e.to_string()))?;
    let err = |f: &str| RenderError::View(format!("missing or malformed `{f}`"));
    let rotation: [[f64; 3]; 3] =
        serde_json::from_value(v["camera_rotation"].clone()).map_err(|_| err("camera_rotation"))?;
    let light: [f64; 3] =
        serde_json::from_value(v["light_direction"].clone()).map_err(|_| err("light_direction"))?;
    let window = &v["window"];
    Ok(ViewSpec {
        rotation: Mat3(rotation),
        light: Vec3(light),
        width: window["width"]
            .as_u64()
            .ok_or_else(|| err("window.width"))? as usize,
        height: window["height"]
            .as_u64()
            .ok_or_else(|| err("window.height"))? as usize,
        half_extent: window["half_extent"]
            .as_f64()
            .ok_or_else(|| err("window.half_extent"))?,
    })
}

/// Meshes `graph` at `mesh_resolution³` and writes `views` renders into
/// `dir`. View `k` is drawn from the stream derived from `(seed, k)`.
pub fn write_shape_dataset(
    graph: &ShapeGraph<f64>,
    dir: &Path,
    views: usize,
    seed: u64,
    image_size: usize,
    mesh_resolution: usize,
) -> Result<Vec<ViewSpec<f64>>, RenderError> {
    let mesh = marching_cubes(graph, mesh_resolution, Bounds::canonical())?;
    if mesh.is_empty() {
        return Err(RenderError::EmptyShape);
    }
    (0..views)
        .map(|k| {
            let view = sample_view(&mut derived(seed, &[k as u64]), image_size);
            let sample = render(&mesh, &view);
            write_dataset_view(dir, k, &sample, &view)?;
            Ok(view)
        })
        .collect()
}
