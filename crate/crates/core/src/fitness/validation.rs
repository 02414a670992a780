use std::path::Path;

use rand::Rng as _;

use crate::evolution::{random_transform, TransformRanges};
use crate::graph::{compose, transform, CsgOp, Primitive, PrimitiveKind};
use crate::render::{write_shape_dataset, RenderError};
use crate::rng::{derive_seed, derived};

/// Renders `shapes` held-out shapes to `dir/<k>/` in the dataset layout:
/// the four primitive kinds first, then random two-primitive composites.
/// Composites with an empty isosurface are redrawn.
pub fn write_validation_set(
    dir: &Path,
    seed: u64,
    shapes: usize,
    views: usize,
    image_size: usize,
    mesh_resolution: usize,
) -> Result<(), RenderError> {
    let mut rng = derived(seed, &[0x7661_6c69]);
    let ranges = TransformRanges::default();
    let mut k = 0;
    while k < shapes {
        let graph = if k < PrimitiveKind::ALL.len() {
            Primitive::sample(PrimitiveKind::ALL[k], &mut rng).graph()
        } else {
            let mut part = || {
                let kind = PrimitiveKind::ALL[rng.random_range(0..4)];
                let g = Primitive::sample(kind, &mut rng)
                    .graph()
                    .expect("sampled parameters are positive");
                transform(&g, &random_transform(&mut rng, &ranges))
            };
            let (a, b) = (part(), part());
            Ok(compose(&a, &b, CsgOp::ALL[rng.random_range(0..3)]))
        }
        .expect("sampled parameters are positive");
        let view_seed = derive_seed(seed, &[k as u64]);
        match write_shape_dataset(
            &graph,
            &dir.join(k.to_string()),
            views,
            view_seed,
            image_size,
            mesh_resolution,
        ) {
            Ok(_) => k += 1,
            Err(RenderError::EmptyShape) if k >= PrimitiveKind::ALL.len() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
