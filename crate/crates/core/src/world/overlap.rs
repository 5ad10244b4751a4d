//! Coverage-overlap degree of a set of ground disks, by rasterization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OverlapFormula {
    /// Area covered by two or more disks over the area covered by any.
    #[default]
    #[serde(rename = "multi-covered")]
    MultiCovered,
    /// One minus (area covered by every disk) over (area covered by any).
    #[serde(rename = "as-printed")]
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Raster estimate of the overlap degree over roughly `samples` cells
/// spanning the disks' joint bounding box. Returns 0 when the union is empty.
pub fn overlap_degree(disks: &[Disk], samples: usize, formula: OverlapFormula) -> f64 {
    let disks: Vec<Disk> = disks.iter().copied().filter(|d| d.r > 0.0).collect();
    if disks.is_empty() {
        return 0.0;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for d in &disks {
        x0 = x0.min(d.x - d.r);
        y0 = y0.min(d.y - d.r);
        x1 = x1.max(d.x + d.r);
        y1 = y1.max(d.y + d.r);
    }
    let side = (samples.max(1) as f64).sqrt().ceil() as usize;
    let (dx, dy) = ((x1 - x0) / side as f64, (y1 - y0) / side as f64);
    let r2: Vec<f64> = disks.iter().map(|d| d.r * d.r).collect();

    let (mut union, mut multi, mut all) = (0usize, 0usize, 0usize);
    for i in 0..side {
        let px = x0 + (i as f64 + 0.5) * dx;
        for j in 0..side {
            let py = y0 + (j as f64 + 0.5) * dy;
            let hits = disks
                .iter()
                .zip(&r2)
                .filter(|(d, r2)| (px - d.x).powi(2) + (py - d.y).powi(2) <= **r2)
                .count();
            if hits >= 1 {
                union += 1;
            }
            if hits >= 2 {
                multi += 1;
            }
            if hits == disks.len() {
                all += 1;
            }
        }
    }
    if union == 0 {
        return 0.0;
    }
    match formula {
        OverlapFormula::MultiCovered => multi as f64 / union as f64,
        OverlapFormula::AsPrinted => 1.0 - all as f64 / union as f64,
    }
}
