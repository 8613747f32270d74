//! Statistical outlier removal: drop points whose mean distance to their
//! nearest neighbors exceeds the global mean plus a standard-deviation
//! multiple.

use serde::{Deserialize, Serialize};

use super::knn::KdTree;
use super::ColoredPointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierParams {
    /// Nearest-neighbor count used for each point's mean distance.
    pub n: usize,
    /// Standard-deviation multiple above the global mean.
    pub std_r: f64,
}

impl Default for OutlierParams {
    fn default() -> Self {
        OutlierParams { n: 16, std_r: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutlierOutcome {
    pub removed: usize,
    /// Set when the cloud was too small to filter and was returned unchanged.
    pub skipped_small_cloud: bool,
}

/// Filter the cloud. For each point the mean distance to its `n` nearest
/// neighbors is computed; with `dis_g` and `std_g` the mean and standard
/// deviation of those per-point means, points whose mean exceeds
/// `dis_g + std_r * std_g` are dropped. Clouds with at most `n` points are
/// returned unchanged with a warning flag.
pub fn remove_outliers(
    cloud: &ColoredPointCloud,
    params: &OutlierParams,
) -> (ColoredPointCloud, OutlierOutcome) {
    assert!(params.n >= 1, "neighbor count must be at least 1");
    assert!(params.std_r > 0.0, "std_r must be positive");
    let len = cloud.points.len();
    if len <= params.n {
        return (
            cloud.clone(),
            OutlierOutcome { removed: 0, skipped_small_cloud: true },
        );
    }

    let positions: Vec<_> = cloud.points.iter().map(|p| p.position).collect();
    let tree = KdTree::build(&positions);
    let means: Vec<f64> = positions
        .iter()
        .enumerate()
        .map(|(idx, p)| tree.mean_knn_distance(*p, idx, params.n))
        .collect();

    let dis_g = means.iter().sum::<f64>() / len as f64;
    let var = means.iter().map(|m| (m - dis_g).powi(2)).sum::<f64>() / len as f64;
    let std_g = var.sqrt();
    let threshold = dis_g + params.std_r * std_g;

    let mut kept = ColoredPointCloud::default();
    for (point, mean) in cloud.points.iter().zip(&means) {
        if *mean <= threshold {
            kept.points.push(point.clone());
        }
    }
    let removed = len - kept.points.len();
    (kept, OutlierOutcome { removed, skipped_small_cloud: false })
}
