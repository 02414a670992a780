use super::{Activation, Node, Reduction, ShapeGraph, INPUT_COUNT};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Scalar;

/// Similarity transform: rotation `A`, uniform scale `λ > 0` and
/// translation `b`. A transformed shape evaluates `F((λA)⁻¹ p − b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform<S> {
    pub rotation: Mat3<S>,
    pub scale: S,
    pub translation: Vec3<S>,
}

impl<S: Scalar> AffineTransform<S> {
    pub fn identity() -> Self {
        AffineTransform {
            rotation: Mat3::identity(),
            scale: S::one(),
            translation: Vec3::zero(),
        }
    }

    pub fn translate(b: Vec3<S>) -> Self {
        AffineTransform {
            translation: b,
            ..Self::identity()
        }
    }

    pub fn scaling(scale: S) -> Self {
        AffineTransform {
            scale,
            ..Self::identity()
        }
    }

    /// Checks `A·Aᵀ = I`, `det A = +1` (both within `tol`) and `λ > 0`.
    pub fn is_valid(&self, tol: S) -> bool {
        self.scale > S::zero()
            && self.scale.is_finite()
            && self.rotation.orthonormality_error() <= tol
            && (self.rotation.det() - S::one()).abs() <= tol
            && self.translation.0.iter().all(|v| v.is_finite())
    }

    /// `(λA)⁻¹ = Aᵀ / λ` for a rotation `A`.
    pub fn inverse_linear(&self) -> Mat3<S> {
        self.rotation.transpose().scaled(S::one() / self.scale)
    }

    /// The map `T(p) = (λA)⁻¹ p − b`.
    pub fn apply(&self, p: Vec3<S>) -> Vec3<S> {
        self.inverse_linear() * p - self.translation
    }
}

/// Returns `G'` with `G'(p) = G(T(p))`.
///
/// Three fresh input nodes are inserted; the old inputs become `sum`/identity
/// nodes fed by the rows of `(λA)⁻¹` with biases `−b`.
pub fn transform<S: Scalar>(graph: &ShapeGraph<S>, t: &AffineTransform<S>) -> ShapeGraph<S> {
    let m = t.inverse_linear();
    let shift = INPUT_COUNT as u32;
    let mut nodes = Vec::with_capacity(graph.node_count() + INPUT_COUNT);
    nodes.extend((0..INPUT_COUNT).map(|_| Node::input()));
    for (i, old) in graph.nodes().iter().enumerate() {
        if i < INPUT_COUNT {
            nodes.push(Node {
                bias: -t.translation[i],
                reduction: Reduction::Sum,
                activation: Activation::Identity,
                inputs: (0..3).map(|j| (j as u32, m.0[i][j])).collect(),
            });
        } else {
            nodes.push(Node {
                inputs: old.inputs.iter().map(|(s, w)| (s + shift, *w)).collect(),
                ..old.clone()
            });
        }
    }
    ShapeGraph::from_canonical(nodes)
}
