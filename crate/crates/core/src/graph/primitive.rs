use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, GraphBuilder, GraphError, Reduction, ShapeGraph};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Sphere,
    Cylinder,
    Cube,
    Cone,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 4] = [
        PrimitiveKind::Sphere,
        PrimitiveKind::Cylinder,
        PrimitiveKind::Cube,
        PrimitiveKind::Cone,
    ];
}

/// Default sampling ranges keep every primitive inside `[-1, 1]^3`.
pub const RADIUS_RANGE: (f64, f64) = (0.3, 0.6);
pub const SIDE_RANGE: (f64, f64) = (0.6, 1.2);
pub const HEIGHT_RANGE: (f64, f64) = (0.4, 0.9);

/// A parameterised primitive solid.
///
/// * sphere: `x² + y² + z² − R²`
/// * cylinder: `max((x² + y²)/R², |z|/H) − 1`
/// * cube: `max(|x|, |y|, |z|) − L/2`
/// * cone: `max((x² + y²)/R² − z²/H², −z, z − H)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive<S> {
    Sphere { radius: S },
    Cylinder { radius: S, height: S },
    Cube { side: S },
    Cone { radius: S, height: S },
}

impl<S: Scalar> Primitive<S> {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Primitive::Sphere { .. } => PrimitiveKind::Sphere,
            Primitive::Cylinder { .. } => PrimitiveKind::Cylinder,
            Primitive::Cube { .. } => PrimitiveKind::Cube,
            Primitive::Cone { .. } => PrimitiveKind::Cone,
        }
    }

    /// Draws parameters uniformly from the default ranges.
    pub fn sample<R: Rng + ?Sized>(kind: PrimitiveKind, rng: &mut R) -> Self {
        let mut draw = |(lo, hi): (f64, f64)| S::lit(rng.random_range(lo..hi));
        match kind {
            PrimitiveKind::Sphere => Primitive::Sphere {
                radius: draw(RADIUS_RANGE),
            },
            PrimitiveKind::Cylinder => Primitive::Cylinder {
                radius: draw(RADIUS_RANGE),
                height: draw(HEIGHT_RANGE),
            },
            PrimitiveKind::Cube => Primitive::Cube {
                side: draw(SIDE_RANGE),
            },
            PrimitiveKind::Cone => Primitive::Cone {
                radius: draw(RADIUS_RANGE),
                height: draw(HEIGHT_RANGE),
            },
        }
    }

    fn check(name: &'static str, v: S) -> Result<S, GraphError> {
        if v > S::zero() && v.is_finite() {
            Ok(v)
        } else {
            Err(GraphError::InvalidParameter {
                name,
                value: v.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Builds the canonical computation graph.
    ///
    /// Node counts (inputs and output included): sphere 7, cylinder 8,
    /// cube 7, cone 9.
    pub fn graph(&self) -> Result<ShapeGraph<S>, GraphError> {
        let one = S::one();
        let zero = S::zero();
        let mut b = GraphBuilder::new();
        use Activation::{Abs, Identity, Square};
        use Reduction::{Max, Sum};
        match *self {
            Primitive::Sphere { radius } => {
                let r = Self::check("radius", radius)?;
                let sq: Vec<_> = (0..3)
                    .map(|i| b.add(Sum, Square, zero, vec![(i, one)]))
                    .collect();
                b.add(
                    Sum,
                    Identity,
                    -(r * r),
                    sq.into_iter().map(|s| (s, one)).collect(),
                );
            }
            Primitive::Cylinder { radius, height } => {
                let r = Self::check("radius", radius)?;
                let h = Self::check("height", height)?;
                let sx = b.add(Sum, Square, zero, vec![(0, one)]);
                let sy = b.add(Sum, Square, zero, vec![(1, one)]);
                let az = b.add(Sum, Abs, zero, vec![(2, one)]);
                let inv_r2 = one / (r * r);
                let radial = b.add(Sum, Identity, zero, vec![(sx, inv_r2), (sy, inv_r2)]);
                b.add(Max, Identity, -one, vec![(radial, one), (az, one / h)]);
            }
            Primitive::Cube { side } => {
                let l = Self::check("side", side)?;
                let abs: Vec<_> = (0..3)
                    .map(|i| b.add(Sum, Abs, zero, vec![(i, one)]))
                    .collect();
                b.add(
                    Max,
                    Identity,
                    -(l / S::lit(2.0)),
                    abs.into_iter().map(|s| (s, one)).collect(),
                );
            }
            Primitive::Cone { radius, height } => {
                let r = Self::check("radius", radius)?;
                let h = Self::check("height", height)?;
                let sq: Vec<_> = (0..3)
                    .map(|i| b.add(Sum, Square, zero, vec![(i, one)]))
                    .collect();
                let inv_r2 = one / (r * r);
                let quadric = b.add(
                    Sum,
                    Identity,
                    zero,
                    vec![(sq[0], inv_r2), (sq[1], inv_r2), (sq[2], -(one / (h * h)))],
                );
                let top = b.add(Sum, Identity, -h, vec![(2, one)]);
                b.add(
                    Max,
                    Identity,
                    zero,
                    vec![(quadric, one), (2, -one), (top, one)],
                );
            }
        }
        Ok(b.finish())
    }
}
