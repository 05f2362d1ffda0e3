//! Label products built on shadow masks: component cleanup, vegetation,
//! min/max agreement, and the false-negative shadow loss.
//!
//! Binary rasters hold `1.0` for set pixels and `0.0` otherwise.

use crate::error::{Error, Result};
use crate::raster::{Raster, DEFAULT_NODATA};

/// Default NDVI threshold for vegetation.
pub const DEFAULT_NDVI_THRESHOLD: f64 = 0.0;

#[inline]
fn is_set(r: &Raster, i: usize) -> bool {
    r.data()[i] == 1.0
}

fn binary(v: bool) -> f64 {
    if v {
        1.0
    } else {
        0.0
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass connected-component labeling. Returns per-pixel root labels
/// (`u32::MAX` for background) and the area of each root.
fn label_components(width: usize, height: usize, fg: impl Fn(usize) -> bool, eight: bool) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![u32::MAX; width * height];
    let mut uf = UnionFind::new();
    for row in 0..height {
        for col in 0..width {
            let i = row * width + col;
            if !fg(i) {
                continue;
            }
            let mut neighbours = [u32::MAX; 4];
            if col > 0 {
                neighbours[0] = labels[i - 1];
            }
            if row > 0 {
                neighbours[1] = labels[i - width];
                if eight && col > 0 {
                    neighbours[2] = labels[i - width - 1];
                }
                if eight && col + 1 < width {
                    neighbours[3] = labels[i - width + 1];
                }
            }
            let mut label = u32::MAX;
            for n in neighbours.into_iter().filter(|&n| n != u32::MAX) {
                if label == u32::MAX {
                    label = n;
                } else {
                    uf.union(label, n);
                }
            }
            labels[i] = if label == u32::MAX { uf.make() } else { label };
        }
    }
    let mut area = vec![0usize; uf.parent.len()];
    for l in labels.iter_mut().filter(|l| **l != u32::MAX) {
        *l = uf.find(*l);
        area[*l as usize] += 1;
    }
    (labels, area)
}

/// Clear 8-connected components of set pixels whose area is below
/// `min_area_px`. Components of exactly `min_area_px` survive.
pub fn remove_small_regions(mask: &Raster, min_area_px: usize) -> Raster {
    if min_area_px == 0 {
        return mask.clone();
    }
    let (labels, area) = label_components(mask.width(), mask.height(), |i| is_set(mask, i), true);
    let data = mask
        .data()
        .iter()
        .zip(&labels)
        .map(|(&v, &l)| if l != u32::MAX && area[l as usize] < min_area_px { 0.0 } else { v })
        .collect();
    Raster::new(mask.width(), mask.height(), data, mask.geotransform, mask.nodata, mask.crs)
        .expect("same shape as input")
}

/// Set enclosed background holes (4-connected, not touching the border)
/// smaller than `max_hole_px`. Pixels flagged in `blocked` are never filled
/// and any hole containing one is left alone.
pub fn fill_small_holes(mask: &Raster, max_hole_px: usize, blocked: Option<&Raster>) -> Result<Raster> {
    if let Some(b) = blocked {
        mask.same_shape(b)?;
    }
    if max_hole_px == 0 {
        return Ok(mask.clone());
    }
    let (w, h) = mask.dims();
    let (labels, area) = label_components(w, h, |i| !is_set(mask, i), false);
    let mut keep = vec![false; area.len()];
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let l = labels[i];
            if l == u32::MAX {
                continue;
            }
            let border = row == 0 || col == 0 || row + 1 == h || col + 1 == w;
            if border || blocked.is_some_and(|b| is_set(b, i)) {
                keep[l as usize] = true;
            }
        }
    }
    let data = mask
        .data()
        .iter()
        .zip(&labels)
        .map(|(&v, &l)| {
            if l != u32::MAX && !keep[l as usize] && area[l as usize] < max_hole_px {
                1.0
            } else {
                v
            }
        })
        .collect();
    mask.with_data(data, mask.nodata)
}

/// Binary dilation with a square structuring element of the given radius.
pub fn dilate(mask: &Raster, radius: usize) -> Raster {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    // separable: rows then columns
    let mut horiz = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let lo = col.saturating_sub(radius);
            let hi = (col + radius).min(w - 1);
            horiz[row * w + col] = (lo..=hi).any(|c| is_set(mask, row * w + c));
        }
    }
    let mut data = vec![0.0; w * h];
    for row in 0..h {
        let lo = row.saturating_sub(radius);
        let hi = (row + radius).min(h - 1);
        for col in 0..w {
            data[row * w + col] = binary((lo..=hi).any(|r| horiz[r * w + col]));
        }
    }
    mask.with_data(data, None).expect("same shape as input")
}

/// Normalized difference vegetation index. Nodata in either band or a zero
/// band sum gives nodata.
pub fn ndvi(nir: &Raster, red: &Raster) -> Result<Raster> {
    nir.same_shape(red)?;
    let data = nir
        .data()
        .iter()
        .zip(red.data())
        .map(|(&n, &r)| {
            if nir.is_nodata(n) || red.is_nodata(r) {
                return DEFAULT_NODATA;
            }
            let sum = n + r;
            if sum == 0.0 || !sum.is_finite() {
                DEFAULT_NODATA
            } else {
                (n - r) / sum
            }
        })
        .collect();
    nir.with_data(data, Some(DEFAULT_NODATA))
}

/// 1 where NDVI is strictly above `threshold`. Nodata maps to 0.
pub fn vegetation_mask(ndvi: &Raster, threshold: f64) -> Raster {
    let mut invalid = 0usize;
    let data = ndvi
        .data()
        .iter()
        .map(|&v| {
            if ndvi.is_nodata(v) {
                invalid += 1;
                0.0
            } else {
                binary(v > threshold)
            }
        })
        .collect();
    if invalid > 0 {
        log::info!("vegetation mask: {invalid} nodata NDVI pixels written as 0");
    }
    ndvi.with_data(data, None).expect("same shape as input")
}

/// Supervision labels derived from the DSM-min and DSM-max shadow masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionBundle {
    pub shadow_min: Raster,
    pub shadow_max: Raster,
    /// The agreed label where both masks agree and both are certain, else 0.
    pub supervision: Raster,
    /// 1 where the masks disagree or either is uncertain.
    pub ignore: Raster,
    pub vegetation: Option<Raster>,
}

/// Combine min/max shadow masks and their uncertainty masks.
pub fn agreement_masks(
    shadow_min: &Raster,
    shadow_max: &Raster,
    uncertainty_min: &Raster,
    uncertainty_max: &Raster,
) -> Result<SupervisionBundle> {
    shadow_min.same_shape(shadow_max)?;
    shadow_min.same_shape(uncertainty_min)?;
    shadow_min.same_shape(uncertainty_max)?;
    let n = shadow_min.len();
    let mut supervision = Vec::with_capacity(n);
    let mut ignore = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (is_set(shadow_min, i), is_set(shadow_max, i));
        let uncertain = is_set(uncertainty_min, i) || is_set(uncertainty_max, i);
        let ign = a != b || uncertain;
        ignore.push(binary(ign));
        supervision.push(binary(!ign && a));
    }
    Ok(SupervisionBundle {
        shadow_min: shadow_min.clone(),
        shadow_max: shadow_max.clone(),
        supervision: shadow_min.with_data(supervision, None)?,
        ignore: shadow_min.with_data(ignore, None)?,
        vegetation: None,
    })
}

/// False-negative shadow loss over a batch of rays.
///
/// `λ = Σ gt / N`; the loss is the batch mean of `λ · gt · (pred − gt)²`, so
/// rays with `gt = 0` never contribute.
pub fn shadow_loss(pred: &[f64], gt: &[f64]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::Argument("shadow loss needs at least one ray".into()));
    }
    if pred.len() != gt.len() {
        return Err(Error::Argument(format!(
            "prediction has {} rays, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    if let Some(v) = gt.iter().find(|&&g| g != 0.0 && g != 1.0) {
        return Err(Error::Argument(format!("ground truth must be binary, found {v}")));
    }
    if let Some(v) = pred.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Argument(format!("prediction {v} outside [0, 1]")));
    }
    let n = pred.len() as f64;
    let lambda = gt.iter().sum::<f64>() / n;
    let sum: f64 = pred.iter().zip(gt).map(|(p, g)| g * (p - g) * (p - g)).sum();
    Ok(lambda * sum / n)
}
