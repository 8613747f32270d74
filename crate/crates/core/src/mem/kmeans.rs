//! Deterministic 2-means center positioning over pixel sets.
//!
//! Centroids are seeded from the lexicographically smallest and largest
//! pixels, so no RNG is involved and results are reproducible bit-for-bit.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CenterError {
    #[error("no observation: empty pixel set")]
    NoObservation,
}

const MAX_ITERS: usize = 20;
const CONVERGENCE_EPS: f64 = 1e-6;

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Deterministic cluster assignment. Exact distance ties go to the center
/// nearer in the row coordinate, then in the column, then to cluster 0.
fn assign(p: (f64, f64), centers: [(f64, f64); 2]) -> usize {
    let d0 = dist2(p, centers[0]);
    let d1 = dist2(p, centers[1]);
    if d0 != d1 {
        return usize::from(d1 < d0);
    }
    let row0 = (p.1 - centers[0].1).abs();
    let row1 = (p.1 - centers[1].1).abs();
    if row0 != row1 {
        return usize::from(row1 < row0);
    }
    let col0 = (p.0 - centers[0].0).abs();
    let col1 = (p.0 - centers[1].0).abs();
    usize::from(col1 < col0)
}

fn centroid(pixels: &[(u32, u32)], members: &[usize]) -> (f64, f64) {
    let mut sum = (0.0, 0.0);
    for &idx in members {
        sum.0 += pixels[idx].0 as f64;
        sum.1 += pixels[idx].1 as f64;
    }
    let n = members.len() as f64;
    (sum.0 / n, sum.1 / n)
}

/// Result of the two-cluster split: final centroids and member indices.
#[derive(Debug, Clone)]
pub struct TwoMeans {
    pub centers: [(f64, f64); 2],
    pub members: [Vec<usize>; 2],
}

/// Run deterministic 2-means on a pixel set (column `i`, row `j`).
pub fn two_means(pixels: &[(u32, u32)]) -> Result<TwoMeans, CenterError> {
    if pixels.is_empty() {
        return Err(CenterError::NoObservation);
    }
    let lo = *pixels.iter().min().expect("non-empty");
    let hi = *pixels.iter().max().expect("non-empty");
    let mut centers = [(lo.0 as f64, lo.1 as f64), (hi.0 as f64, hi.1 as f64)];

    let mut members: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for _ in 0..MAX_ITERS {
        members = [Vec::new(), Vec::new()];
        for (idx, &(i, j)) in pixels.iter().enumerate() {
            let p = (i as f64, j as f64);
            members[assign(p, centers)].push(idx);
        }
        let mut moved = 0.0f64;
        for c in 0..2 {
            if members[c].is_empty() {
                continue;
            }
            let next = centroid(pixels, &members[c]);
            moved = moved.max(dist2(next, centers[c]).sqrt());
            centers[c] = next;
        }
        if moved < CONVERGENCE_EPS {
            break;
        }
    }
    Ok(TwoMeans { centers, members })
}

/// Center-positioning over a pixel blob: split into two clusters; when the
/// cluster centers are farther apart than `zeta` the blob is treated as two
/// separate regions and the center of the dominant one (more members; ties
/// broken by lower mean row, then cluster order) is returned, otherwise the
/// midpoint of the two centers.
pub fn locate_pixel_center(pixels: &[(u32, u32)], zeta: f64) -> Result<(f64, f64), CenterError> {
    let split = two_means(pixels)?;
    let [c0, c1] = split.centers;
    let d = dist2(c0, c1).sqrt();
    if d > zeta {
        let pick = dominant_cluster(pixels, &split);
        Ok(split.centers[pick])
    } else {
        Ok(((c0.0 + c1.0) / 2.0, (c0.1 + c1.1) / 2.0))
    }
}

fn dominant_cluster(pixels: &[(u32, u32)], split: &TwoMeans) -> usize {
    let n0 = split.members[0].len();
    let n1 = split.members[1].len();
    if n0 != n1 {
        return usize::from(n1 > n0);
    }
    let mean_row = |members: &[usize]| -> f64 {
        members.iter().map(|&i| pixels[i].1 as f64).sum::<f64>() / members.len().max(1) as f64
    };
    let (r0, r1) = (mean_row(&split.members[0]), mean_row(&split.members[1]));
    usize::from(r1 < r0)
}
