//! Projection of the fused point cloud onto the floor plane, and raster
//! exports (binary PGM plus a colored PNG).

use serde::{Deserialize, Serialize};

use super::ColoredPointCloud;
use crate::geometry::Vec3;
use crate::simworld::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Unknown,
    Free,
    Occupied([u8; 3]),
}

/// 2D occupancy raster over the scene bounds. Cell (0, 0) sits at `origin`
/// (the bounds minimum corner); cell (cx, cy) covers the half-open square
/// `[origin + c*cell_size, origin + (c+1)*cell_size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub cell_size: f64,
    pub origin: Vec3,
    pub cols: usize,
    pub rows: usize,
    /// Row-major, index = cy * cols + cx.
    pub cells: Vec<Cell>,
}

impl FloorPlan {
    pub fn empty(bounds: &Rect, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let cols = (bounds.width() / cell_size).ceil().max(1.0) as usize;
        let rows = (bounds.height() / cell_size).ceil().max(1.0) as usize;
        FloorPlan {
            cell_size,
            origin: Vec3::new(bounds.min_x, bounds.min_y, 0.0),
            cols,
            rows,
            cells: vec![Cell::Unknown; cols * rows],
        }
    }

    pub fn cell_index(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let cx = ((x - self.origin.x) / self.cell_size).floor();
        let cy = ((y - self.origin.y) / self.cell_size).floor();
        if cx < 0.0 || cy < 0.0 || cx >= self.cols as f64 || cy >= self.rows as f64 {
            return None;
        }
        Some((cx as usize, cy as usize))
    }

    pub fn cell(&self, cx: usize, cy: usize) -> Cell {
        self.cells[cy * self.cols + cx]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, Cell::Occupied(_))).count()
    }

    /// World-coordinate centroid of the unknown cells, if any remain. Useful
    /// as a frontier-exploration hint.
    pub fn unknown_centroid(&self) -> Option<(f64, f64)> {
        let mut sum = (0.0, 0.0);
        let mut count = 0usize;
        for cy in 0..self.rows {
            for cx in 0..self.cols {
                if self.cell(cx, cy) == Cell::Unknown {
                    sum.0 += self.origin.x + (cx as f64 + 0.5) * self.cell_size;
                    sum.1 += self.origin.y + (cy as f64 + 0.5) * self.cell_size;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| (sum.0 / count as f64, sum.1 / count as f64))
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.occupied_count() as f64 / self.cells.len() as f64
    }

    /// Binary PGM (P5, maxval 255): unknown=0, free=128, occupied=255.
    /// Row 0 of the image is the bounds maximum y, so north is up.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        for row in (0..self.rows).rev() {
            for col in 0..self.cols {
                out.push(match self.cell(col, row) {
                    Cell::Unknown => 0,
                    Cell::Free => 128,
                    Cell::Occupied(_) => 255,
                });
            }
        }
        out
    }

    /// Colored PNG: occupied cells keep their point color, free cells are
    /// gray, unknown cells black. Same row order as the PGM.
    pub fn to_png(&self) -> Vec<u8> {
        let mut rgb = Vec::with_capacity(self.cols * self.rows * 3);
        for row in (0..self.rows).rev() {
            for col in 0..self.cols {
                let color = match self.cell(col, row) {
                    Cell::Unknown => [0, 0, 0],
                    Cell::Free => [128, 128, 128],
                    Cell::Occupied(c) => c,
                };
                rgb.extend_from_slice(&color);
            }
        }
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.cols as u32, self.rows as u32);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder.write_header().expect("png header");
            writer.write_image_data(&rgb).expect("png payload");
        }
        out
    }
}

/// Project cloud points within the height band onto the floor grid. A cell
/// with at least one in-band point is occupied and takes the color of its
/// lowest point; cells seen only below the band (floor returns) are free.
pub fn project_floor_plan(
    cloud: &ColoredPointCloud,
    bounds: &Rect,
    cell_size: f64,
    z_band: (f64, f64),
) -> FloorPlan {
    let mut plan = FloorPlan::empty(bounds, cell_size);
    let (z_lo, z_hi) = z_band;
    // Lowest in-band z seen per cell, used to pick the occupied color.
    let mut min_z = vec![f64::INFINITY; plan.cells.len()];
    for point in &cloud.points {
        let p = point.position;
        let Some((cx, cy)) = plan.cell_index(p.x, p.y) else { continue };
        let idx = cy * plan.cols + cx;
        if p.z >= z_lo && p.z <= z_hi {
            if p.z < min_z[idx] {
                min_z[idx] = p.z;
                plan.cells[idx] = Cell::Occupied(point.color);
            }
        } else if p.z < z_lo && matches!(plan.cells[idx], Cell::Unknown) {
            plan.cells[idx] = Cell::Free;
        }
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mem::ColoredPoint;

    fn bounds() -> Rect {
        Rect::new(0.0, 0.0, 8.0, 6.0)
    }

    fn cloud_of(points: &[(f64, f64, f64)]) -> ColoredPointCloud {
        ColoredPointCloud {
            points: points
                .iter()
                .map(|&(x, y, z)| ColoredPoint {
                    position: Vec3::new(x, y, z),
                    color: [200, 10, 10],
                })
                .collect(),
        }
    }

    #[test]
    fn empty_cloud_projects_to_all_unknown() {
        let plan = project_floor_plan(&ColoredPointCloud::default(), &bounds(), 0.5, (0.02, 1.8));
        assert!(plan.cells.iter().all(|c| *c == Cell::Unknown));
    }

    #[test]
    fn single_point_lands_in_the_expected_cell() {
        let plan = project_floor_plan(&cloud_of(&[(1.0, 2.0, 0.5)]), &bounds(), 0.5, (0.02, 1.8));
        assert_eq!(plan.cell(2, 4), Cell::Occupied([200, 10, 10]));
        assert_eq!(plan.occupied_count(), 1);
    }

    #[test]
    fn points_above_the_band_are_ignored() {
        let plan = project_floor_plan(&cloud_of(&[(1.0, 2.0, 2.5)]), &bounds(), 0.5, (0.02, 1.8));
        assert_eq!(plan.occupied_count(), 0);
        assert_eq!(plan.cell(2, 4), Cell::Unknown);
    }

    #[test]
    fn floor_returns_mark_free_without_overriding_occupied() {
        let plan = project_floor_plan(
            &cloud_of(&[(1.0, 2.0, 0.001), (1.1, 2.1, 0.9)]),
            &bounds(),
            0.5,
            (0.02, 1.8),
        );
        // Both points fall into cell (2, 4); the in-band one wins.
        assert_eq!(plan.cell(2, 4), Cell::Occupied([200, 10, 10]));
        let plan = project_floor_plan(&cloud_of(&[(3.0, 3.0, 0.001)]), &bounds(), 0.5, (0.02, 1.8));
        assert_eq!(plan.cell(6, 6), Cell::Free);
    }

    #[test]
    fn occupied_color_comes_from_the_lowest_point() {
        let cloud = ColoredPointCloud {
            points: vec![
                ColoredPoint { position: Vec3::new(0.2, 0.2, 1.0), color: [1, 1, 1] },
                ColoredPoint { position: Vec3::new(0.2, 0.2, 0.4), color: [2, 2, 2] },
            ],
        };
        let plan = project_floor_plan(&cloud, &bounds(), 0.5, (0.02, 1.8));
        assert_eq!(plan.cell(0, 0), Cell::Occupied([2, 2, 2]));
    }

    #[test]
    fn pgm_header_and_size() {
        let plan = project_floor_plan(&cloud_of(&[(1.0, 2.0, 0.5)]), &bounds(), 0.5, (0.02, 1.8));
        let pgm = plan.to_pgm();
        let header = b"P5\n16 12\n255\n";
        assert!(pgm.starts_with(header));
        assert_eq!(pgm.len(), header.len() + 16 * 12);
        // The occupied cell is at world (2, 4) -> image row rows-1-4 = 7.
        let offset = header.len() + 7 * 16 + 2;
        assert_eq!(pgm[offset], 255);
    }

    #[test]
    fn png_is_well_formed() {
        let plan = project_floor_plan(&cloud_of(&[(1.0, 2.0, 0.5)]), &bounds(), 0.5, (0.02, 1.8));
        let data = plan.to_png();
        assert!(data.starts_with(&[0x89, b'P', b'N', b'G']));
    }
}
