use serde::{Deserialize, Serialize};

use super::{Activation, Node, Reduction, ShapeGraph, INPUT_COUNT};
use crate::scalar::Scalar;

/// Set operation between two solids. `Difference` is `a − b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsgOp {
    Union,
    Intersection,
    Difference,
}

impl CsgOp {
    pub const ALL: [CsgOp; 3] = [CsgOp::Union, CsgOp::Intersection, CsgOp::Difference];

    /// Combines two implicit values exactly as the composed graph does.
    #[inline]
    pub fn combine<S: Scalar>(self, a: S, b: S) -> S {
        match self {
            CsgOp::Union => a.min(b),
            CsgOp::Intersection => a.max(b),
            CsgOp::Difference => a.max(-b),
        }
    }

    /// Same operation on occupancy bits.
    #[inline]
    pub fn combine_occupancy(self, a: bool, b: bool) -> bool {
        match self {
            CsgOp::Union => a || b,
            CsgOp::Intersection => a && b,
            CsgOp::Difference => a && !b,
        }
    }
}

/// Merges the inputs of `a` and `b` and adds one output node:
/// `min(Fa, Fb)`, `max(Fa, Fb)` or `max(Fa, −Fb)`.
///
/// The result has `a.node_count() + b.node_count() − 2` nodes.
pub fn compose<S: Scalar>(a: &ShapeGraph<S>, b: &ShapeGraph<S>, op: CsgOp) -> ShapeGraph<S> {
    let mut nodes: Vec<Node<S>> = Vec::with_capacity(a.node_count() + b.node_count() - 2);
    nodes.extend(a.nodes().iter().cloned());
    let a_out = a.output_index() as u32;
    // b's non-input nodes are shifted past a; b's inputs map onto the shared inputs.
    let offset = (a.node_count() - INPUT_COUNT) as u32;
    let remap = |s: u32| {
        if (s as usize) < INPUT_COUNT {
            s
        } else {
            s + offset
        }
    };
    for node in &b.nodes()[INPUT_COUNT..] {
        nodes.push(Node {
            inputs: node.inputs.iter().map(|(s, w)| (remap(*s), *w)).collect(),
            ..node.clone()
        });
    }
    let b_out = remap(b.output_index() as u32);
    let (reduction, wb) = match op {
        CsgOp::Union => (Reduction::Min, S::one()),
        CsgOp::Intersection => (Reduction::Max, S::one()),
        CsgOp::Difference => (Reduction::Max, -S::one()),
    };
    nodes.push(Node {
        bias: S::zero(),
        reduction,
        activation: Activation::Identity,
        inputs: vec![(a_out, S::one()), (b_out, wb)],
    });
    ShapeGraph::from_canonical(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{transform, AffineTransform, Primitive};
    use crate::linalg::Vec3;

    fn pair() -> (ShapeGraph<f64>, ShapeGraph<f64>) {
        let s = Primitive::Sphere { radius: 1.0 }.graph().unwrap();
        let t = transform(&s, &AffineTransform::translate(Vec3::new(3.0, 0.0, 0.0)));
        (s, t)
    }

    #[test]
    fn union_and_intersection_at_origin() {
        let (s, t) = pair();
        let o = Vec3::zero();
        assert_eq!(compose(&s, &t, CsgOp::Union).evaluate(o), -1.0);
        assert_eq!(compose(&s, &t, CsgOp::Intersection).evaluate(o), 8.0);
    }

    #[test]
    fn self_difference_is_empty() {
        let (s, _) = pair();
        let d = compose(&s, &s, CsgOp::Difference);
        for p in [
            Vec3::zero(),
            Vec3::new(0.5, 0.1, -0.2),
            Vec3::new(2.0, 2.0, 2.0),
        ] {
            assert!(d.evaluate(p) >= 0.0);
        }
    }

    #[test]
    fn node_count_law() {
        let (s, t) = pair();
        let u = compose(&s, &t, CsgOp::Difference);
        assert_eq!(u.node_count(), s.node_count() + t.node_count() - 3 + 1);
    }
}
