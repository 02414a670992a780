use thiserror::Error;

use crate::linalg::Vec3;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error(
        "normal maps and mask differ in size: {pred} predicted, {gt} ground truth, {mask} mask"
    )]
    SizeMismatch { pred: usize, gt: usize, mask: usize },
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("normal at pixel {0} has zero length")]
    ZeroNormal(usize),
}

/// Angular error statistics over the masked pixels of a normal map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalMetrics {
    /// Mean angle error in radians.
    pub n_mae: f64,
    /// Mean squared Euclidean distance between unit normals.
    pub n_mse: f64,
    pub frac_11_25: f64,
    pub frac_22_5: f64,
    pub frac_30: f64,
    pub pixels: usize,
}

/// Slack on the inclusive threshold tests, absorbing rounding in `acos`.
const THRESHOLD_SLACK: f64 = 1e-9;

/// Compares predicted and ground-truth normals over `mask`.
///
/// Both vectors are normalized, the angle is `acos` of their dot product
/// clamped to `[-1, 1]`, and a pixel counts toward a threshold fraction
/// when its angle is at most the threshold.
pub fn normal_metrics<S: Scalar>(
    pred: &[Vec3<S>],
    gt: &[Vec3<S>],
    mask: &[bool],
) -> Result<NormalMetrics, MetricsError> {
    if pred.len() != gt.len() || gt.len() != mask.len() {
        return Err(MetricsError::SizeMismatch {
            pred: pred.len(),
            gt: gt.len(),
            mask: mask.len(),
        });
    }
    let thresholds = [11.25f64, 22.5, 30.0].map(|d| d.to_radians() + THRESHOLD_SLACK);
    let (mut angle_sum, mut sq_sum, mut hits, mut count) = (0.0, 0.0, [0usize; 3], 0usize);
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let p = pred[i]
            .cast::<f64>()
            .normalized()
            .ok_or(MetricsError::ZeroNormal(i))?;
        let g = gt[i]
            .cast::<f64>()
            .normalized()
            .ok_or(MetricsError::ZeroNormal(i))?;
        let angle = p.dot(&g).clamp(-1.0, 1.0).acos();
        let d = p - g;
        angle_sum += angle;
        sq_sum += d.dot(&d);
        for (h, t) in hits.iter_mut().zip(thresholds) {
            *h += usize::from(angle <= t);
        }
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::EmptyMask);
    }
    let c = count as f64;
    Ok(NormalMetrics {
        n_mae: angle_sum / c,
        n_mse: sq_sum / c,
        frac_11_25: hits[0] as f64 / c,
        frac_22_5: hits[1] as f64 / c,
        frac_30: hits[2] as f64 / c,
        pixels: count,
    })
}
