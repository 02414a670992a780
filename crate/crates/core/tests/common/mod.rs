#![allow(dead_code)]

use rand::Rng;
use shapevo::graph::{
    compose, transform, AffineTransform, CsgOp, Primitive, PrimitiveKind, ShapeGraph,
};
use shapevo::linalg::Vec3;
use shapevo::rng::{uniform_rotation, Rng as StreamRng};

/// Closed-form primitive values, written independently of the graph layouts.
pub fn closed_form(p: &Primitive<f64>, q: Vec3<f64>) -> f64 {
    let [x, y, z] = q.0;
    match *p {
        Primitive::Sphere { radius } => x * x + y * y + z * z - radius * radius,
        Primitive::Cylinder { radius, height } => {
            ((x * x + y * y) / (radius * radius)).max(z.abs() / height) - 1.0
        }
        Primitive::Cube { side } => x.abs().max(y.abs()).max(z.abs()) - side / 2.0,
        Primitive::Cone { radius, height } => ((x * x + y * y) / (radius * radius)
            - z * z / (height * height))
            .max(-z)
            .max(z - height),
    }
}

pub fn random_point(rng: &mut StreamRng, half: f64) -> Vec3<f64> {
    Vec3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

pub fn random_transform(rng: &mut StreamRng) -> AffineTransform<f64> {
    AffineTransform {
        rotation: uniform_rotation(rng),
        scale: (rng.random_range(0.5f64.ln()..2f64.ln())).exp(),
        translation: random_point(rng, 0.5),
    }
}

pub fn random_primitive(rng: &mut StreamRng) -> Primitive<f64> {
    let kind = PrimitiveKind::ALL[rng.random_range(0..4)];
    Primitive::sample(kind, rng)
}

/// Random shape of up to `depth` levels of transform + compose.
pub fn random_graph(rng: &mut StreamRng, depth: usize) -> ShapeGraph<f64> {
    if depth == 0 || rng.random_bool(0.3) {
        return random_primitive(rng).graph().unwrap();
    }
    let a = transform(&random_graph(rng, depth - 1), &random_transform(rng));
    let b = transform(&random_graph(rng, depth - 1), &random_transform(rng));
    compose(&a, &b, CsgOp::ALL[rng.random_range(0..3)])
}
