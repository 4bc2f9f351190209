//! Coarse segmentation of the pyramid top and the top-down expand-and-refine
//! loop that carries labels to every finer level.
//!
//! The top level is segmented by outlining information-rich border pixels,
//! growing similarity clusters over the rest, and folding the borders into
//! their nearest clusters. Each descent step expands the parent label and
//! intensity maps, detects pixels whose predicted intensity deviates from
//! the reference image, reassigns them to fitting neighbor regions, and
//! promotes leftover deviant blobs to newly emerging objects. Labels are
//! never renumbered once assigned; new labels are always minted above all
//! prior ones.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use crate::grid::ImageGrid;
use crate::lowlevel::{
    self, cumulative_histogram, local_info_map, prominence_thresholds, LowLevelError,
    DEFAULT_BIN_COUNT, DEFAULT_FRACTIONS,
};
use crate::pyramid;

/// Per-pixel characteristic intensities; same carrier as any gray map.
pub type IntensityMap = ImageGrid;

/// Signed per-pixel difference between an original and its reconstruction.
pub type ResidualMap = ImageGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentError {
    /// Segmentation needs at least a 3x3 grid.
    GridTooSmall { width: usize, height: usize },
    /// Paired maps (or a parent/reference pair) disagree on dimensions.
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    Info(LowLevelError),
}

impl fmt::Display for SegmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentError::GridTooSmall { width, height } => {
                write!(f, "grid {width}x{height} is smaller than 3x3")
            }
            SegmentError::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            SegmentError::Info(e) => write!(f, "{e}"),
        }
    }
}

impl From<LowLevelError> for SegmentError {
    fn from(e: LowLevelError) -> Self {
        match e {
            LowLevelError::GridTooSmall { width, height } => {
                SegmentError::GridTooSmall { width, height }
            }
            other => SegmentError::Info(other),
        }
    }
}

/// Per-pixel region labels. Every pixel carries a label >= 1 and each
/// label's pixel set forms one 4-connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    next_label: u32,
}

impl LabelMap {
    /// Assembles a label map from raw parts. Callers are responsible for
    /// the labeling invariants; this is the constructor used by tests and
    /// by deserialization.
    pub fn from_parts(width: usize, height: usize, labels: Vec<u32>, next_label: u32) -> Self {
        assert_eq!(labels.len(), width * height);
        LabelMap {
            width,
            height,
            labels,
            next_label,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        self.labels[y * self.width + x]
    }

    /// Row-major labels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// The smallest label never used at this or any coarser level.
    pub fn next_label(&self) -> u32 {
        self.next_label
    }

    /// Distinct labels present, ascending.
    pub fn distinct(&self) -> BTreeSet<u32> {
        self.labels.iter().copied().collect()
    }

    /// Nearest-neighbor upsampling: each target pixel takes the label of
    /// its parent (x/2, y/2). Target dimensions must ceil-halve back to
    /// this map.
    pub fn expand(&self, target_w: usize, target_h: usize) -> Result<LabelMap, SegmentError> {
        if ceil_half(target_w) != self.width || ceil_half(target_h) != self.height {
            return Err(SegmentError::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (ceil_half(target_w), ceil_half(target_h)),
            });
        }
        let mut labels = Vec::with_capacity(target_w * target_h);
        for y in 0..target_h {
            for x in 0..target_w {
                labels.push(self.get(x / 2, y / 2));
            }
        }
        Ok(LabelMap {
            width: target_w,
            height: target_h,
            labels,
            next_label: self.next_label,
        })
    }
}

/// One level's paired label and characteristic-intensity maps.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSegmentation {
    /// Pyramid level index this segmentation belongs to (0 = original).
    pub level: usize,
    pub label_map: LabelMap,
    pub intensity_map: IntensityMap,
}

fn ceil_half(n: usize) -> usize {
    n / 2 + n % 2
}

/// 4-neighbors of `i` in fixed (up, left, right, down) order.
fn neighbors4(i: usize, w: usize, h: usize, mut visit: impl FnMut(usize)) {
    let (x, y) = (i % w, i / w);
    if y > 0 {
        visit(i - w);
    }
    if x > 0 {
        visit(i - 1);
    }
    if x + 1 < w {
        visit(i + 1);
    }
    if y + 1 < h {
        visit(i + w);
    }
}

/// 4-connected components of the `true` cells, in raster order of each
/// component's first pixel.
fn mask_components(w: usize, h: usize, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = alloc::vec![false; mask.len()];
    let mut comps = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            neighbors4(i, w, h, |q| {
                if mask[q] && !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            });
        }
        comps.push(comp);
    }
    comps
}

/// Components of equal-label runs, grouped per label; components are in
/// raster order of their first pixel.
fn label_components(w: usize, h: usize, labels: &[u32]) -> BTreeMap<u32, Vec<Vec<usize>>> {
    let mut seen = alloc::vec![false; labels.len()];
    let mut by_label: BTreeMap<u32, Vec<Vec<usize>>> = BTreeMap::new();
    for start in 0..labels.len() {
        if seen[start] {
            continue;
        }
        let label = labels[start];
        let mut comp = Vec::new();
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            neighbors4(i, w, h, |q| {
                if labels[q] == label && !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            });
        }
        by_label.entry(label).or_default().push(comp);
    }
    by_label
}

fn intensity_from_labels(reference: &ImageGrid, labels: &[u32]) -> IntensityMap {
    let mut stats: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let e = stats.entry(l).or_insert((0.0, 0));
        e.0 += reference.values()[i];
        e.1 += 1;
    }
    let means: BTreeMap<u32, f64> = stats
        .into_iter()
        .map(|(l, (sum, n))| (l, sum / n as f64))
        .collect();
    ImageGrid::from_fn(reference.width(), reference.height(), |x, y| {
        means[&labels[y * reference.width() + x]]
    })
}

/// Segments the coarse pyramid top.
///
/// Information-rich pixels (local information at or above the 85% tier
/// threshold) are treated as region borders. Similarity clusters are grown
/// 4-connectedly over the remaining pixels, admitting a pixel while it
/// stays within `similarity_delta` of the cluster's running mean; border
/// pixels then join the 4-adjacent cluster with the nearest mean (ties to
/// the lowest label). Clusters are numbered 1..K in raster order of their
/// first pixel. `level` is the pyramid index recorded in the result.
pub fn top_level_segment(
    grid: &ImageGrid,
    level: usize,
    similarity_delta: f64,
) -> Result<LevelSegmentation, SegmentError> {
    let info = local_info_map(grid)?;
    let (w, h) = (grid.width(), grid.height());
    let n = w * h;

    // A fully flat top has no information anywhere and hence no borders.
    let border: Vec<bool> = if info.i_loc.values().iter().any(|&v| v > 0.0) {
        let hist = cumulative_histogram(&info, DEFAULT_BIN_COUNT)?;
        let t85 = prominence_thresholds(&hist, &DEFAULT_FRACTIONS[2..])?[0];
        info.i_loc
            .values()
            .iter()
            .map(|&v| v >= t85 && v > 0.0)
            .collect()
    } else {
        alloc::vec![false; n]
    };

    let mut labels = alloc::vec![0u32; n];
    // stats[k] = (value sum, pixel count) for cluster k + 1.
    let mut stats: Vec<(f64, usize)> = Vec::new();

    for seed in 0..n {
        if border[seed] || labels[seed] != 0 {
            continue;
        }
        let cluster = stats.len() as u32 + 1;
        labels[seed] = cluster;
        stats.push((grid.values()[seed], 1));
        let mut queue = VecDeque::new();
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            let mut admitted = Vec::new();
            neighbors4(i, w, h, |q| {
                if !border[q] && labels[q] == 0 {
                    let (sum, count) = stats[cluster as usize - 1];
                    let mean = sum / count as f64;
                    if (grid.values()[q] - mean).abs() <= similarity_delta {
                        admitted.push(q);
                    }
                }
            });
            for q in admitted {
                if labels[q] == 0 {
                    labels[q] = cluster;
                    let entry = &mut stats[cluster as usize - 1];
                    entry.0 += grid.values()[q];
                    entry.1 += 1;
                    queue.push_back(q);
                }
            }
        }
    }

    // Fold border pixels into adjacent clusters, nearest running mean
    // first; pixels resolved earlier in a pass are visible to later ones.
    loop {
        let mut progress = false;
        let mut remaining = false;
        for i in 0..n {
            if labels[i] != 0 {
                continue;
            }
            let mut best: Option<(f64, u32)> = None;
            neighbors4(i, w, h, |q| {
                let l = labels[q];
                if l != 0 {
                    let (sum, count) = stats[l as usize - 1];
                    let d = (grid.values()[i] - sum / count as f64).abs();
                    if best.map_or(true, |(bd, bl)| (d, l) < (bd, bl)) {
                        best = Some((d, l));
                    }
                }
            });
            if let Some((_, l)) = best {
                labels[i] = l;
                let entry = &mut stats[l as usize - 1];
                entry.0 += grid.values()[i];
                entry.1 += 1;
                progress = true;
            } else {
                remaining = true;
            }
        }
        if !remaining {
            break;
        }
        assert!(progress, "unassigned border pixels cannot be resolved");
    }

    // Renumber 1..K by raster order of each cluster's first pixel.
    let mut order: BTreeMap<u32, u32> = BTreeMap::new();
    for &l in labels.iter() {
        let next = order.len() as u32 + 1;
        order.entry(l).or_insert(next);
    }
    for l in labels.iter_mut() {
        *l = order[l];
    }
    let next_label = order.len() as u32 + 1;

    let intensity_map = intensity_from_labels(grid, &labels);
    Ok(LevelSegmentation {
        level,
        label_map: LabelMap {
            width: w,
            height: h,
            labels,
            next_label,
        },
        intensity_map,
    })
}

/// Pixels whose expanded characteristic intensity differs from the
/// reference image by more than `delta`, in raster order.
pub fn deviant_pixels(
    expanded_intensity: &IntensityMap,
    reference: &ImageGrid,
    delta: f64,
) -> Result<Vec<(usize, usize)>, SegmentError> {
    if expanded_intensity.width() != reference.width()
        || expanded_intensity.height() != reference.height()
    {
        return Err(SegmentError::DimensionMismatch {
            expected: (reference.width(), reference.height()),
            actual: (expanded_intensity.width(), expanded_intensity.height()),
        });
    }
    let w = reference.width();
    Ok(expanded_intensity
        .values()
        .iter()
        .zip(reference.values())
        .enumerate()
        .filter(|(_, (&e, &r))| (e - r).abs() > delta)
        .map(|(i, _)| (i % w, i / w))
        .collect())
}

/// Carries a parent segmentation one level down.
///
/// The parent label and intensity maps are expanded to the reference
/// dimensions; deviant pixels are reassigned, pass by pass, to the
/// 4-adjacent already-resolved label whose characteristic intensity is
/// nearest to their reference value — provided it fits within `delta`.
/// Deviant blobs no existing region can explain become new labels when
/// they reach `seed_min_size` pixels; smaller remnants are absorbed by the
/// nearest-intensity adjacent region. Region connectivity is restored by
/// splitting any label the reassignment cut apart. Characteristic
/// intensities are recomputed from the reference grid.
pub fn refine_level(
    parent: &LevelSegmentation,
    reference: &ImageGrid,
    delta: f64,
    seed_min_size: usize,
) -> Result<LevelSegmentation, SegmentError> {
    let (w, h) = (reference.width(), reference.height());
    let expanded_labels = parent.label_map.expand(w, h)?;
    let expanded_intensity =
        pyramid::expand(&parent.intensity_map, w, h).expect("checked by label expand");

    // Characteristic intensity per parent label.
    let mut label_mean: BTreeMap<u32, f64> = BTreeMap::new();
    for (i, &l) in parent.label_map.labels().iter().enumerate() {
        label_mean
            .entry(l)
            .or_insert(parent.intensity_map.values()[i]);
    }

    let mut labels = expanded_labels.labels().to_vec();
    let mut resolved: Vec<bool> = expanded_intensity
        .values()
        .iter()
        .zip(reference.values())
        .map(|(&e, &r)| (e - r).abs() <= delta)
        .collect();

    // Reassignment passes: deviants adopt a fitting neighbor region.
    loop {
        let mut progress = false;
        let mut remaining = false;
        for i in 0..labels.len() {
            if resolved[i] {
                continue;
            }
            let r = reference.values()[i];
            let mut best: Option<(f64, u32)> = None;
            neighbors4(i, w, h, |q| {
                if resolved[q] {
                    let l = labels[q];
                    let d = (r - label_mean[&l]).abs();
                    if d <= delta && best.map_or(true, |(bd, bl)| (d, l) < (bd, bl)) {
                        best = Some((d, l));
                    }
                }
            });
            if let Some((_, l)) = best {
                labels[i] = l;
                resolved[i] = true;
                progress = true;
            } else {
                remaining = true;
            }
        }
        if !remaining || !progress {
            break;
        }
    }

    let mut next_label = parent.label_map.next_label();

    // Remaining deviant blobs: seeds of newly emerging objects, or
    // remnants to be absorbed.
    let unresolved: Vec<bool> = resolved.iter().map(|&r| !r).collect();
    for comp in mask_components(w, h, &unresolved) {
        let mut adjacent: BTreeSet<u32> = BTreeSet::new();
        for &i in &comp {
            neighbors4(i, w, h, |q| {
                if resolved[q] {
                    adjacent.insert(labels[q]);
                }
            });
        }
        let target = if comp.len() >= seed_min_size || adjacent.is_empty() {
            let minted = next_label;
            next_label += 1;
            minted
        } else {
            let comp_mean =
                comp.iter().map(|&i| reference.values()[i]).sum::<f64>() / comp.len() as f64;
            adjacent
                .into_iter()
                .map(|l| ((comp_mean - label_mean[&l]).abs(), l))
                .min_by(|a, b| a.partial_cmp(b).expect("finite"))
                .expect("nonempty")
                .1
        };
        for &i in &comp {
            labels[i] = target;
            resolved[i] = true;
        }
    }

    // The reassignment may have cut an inherited region in two; every label
    // must remain one 4-connected component. The largest fragment keeps the
    // label, others become new objects or are absorbed like remnants.
    loop {
        let comps = label_components(w, h, &labels);
        let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            let e = sums.entry(l).or_insert((0.0, 0));
            e.0 += reference.values()[i];
            e.1 += 1;
        }
        let mut changed = false;
        for (label, mut parts) in comps {
            if parts.len() < 2 {
                continue;
            }
            changed = true;
            let keep = parts
                .iter()
                .enumerate()
                .max_by_key(|(idx, c)| (c.len(), core::cmp::Reverse(*idx)))
                .expect("nonempty")
                .0;
            parts.remove(keep);
            for comp in parts {
                let target = if comp.len() >= seed_min_size {
                    let minted = next_label;
                    next_label += 1;
                    minted
                } else {
                    let mut adjacent: BTreeSet<u32> = BTreeSet::new();
                    for &i in &comp {
                        neighbors4(i, w, h, |q| {
                            if labels[q] != label {
                                adjacent.insert(labels[q]);
                            }
                        });
                    }
                    let comp_mean = comp.iter().map(|&i| reference.values()[i]).sum::<f64>()
                        / comp.len() as f64;
                    adjacent
                        .into_iter()
                        .map(|l| {
                            let (s, n) = sums[&l];
                            ((comp_mean - s / n as f64).abs(), l)
                        })
                        .min_by(|a, b| a.partial_cmp(b).expect("finite"))
                        .map(|(_, l)| l)
                        .unwrap_or_else(|| {
                            let minted = next_label;
                            next_label += 1;
                            minted
                        })
                };
                for &i in &comp {
                    labels[i] = target;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let intensity_map = intensity_from_labels(reference, &labels);
    Ok(LevelSegmentation {
        level: parent.level.saturating_sub(1),
        label_map: LabelMap {
            width: w,
            height: h,
            labels,
            next_label,
        },
        intensity_map,
    })
}

/// Runs the whole top-down path: segments the pyramid top, then refines
/// level by level down to level 0. Results are ordered top level first.
pub fn segment_full(
    pyramid: &pyramid::Pyramid,
    similarity_delta: f64,
    refine_delta: f64,
    seed_min_size: usize,
) -> Result<Vec<LevelSegmentation>, SegmentError> {
    let top_index = pyramid.len() - 1;
    let mut segs = Vec::with_capacity(pyramid.len());
    segs.push(top_level_segment(
        pyramid.top(),
        top_index,
        similarity_delta,
    )?);
    for level in (0..top_index).rev() {
        let child = refine_level(
            segs.last().expect("nonempty"),
            pyramid.level(level),
            refine_delta,
            seed_min_size,
        )?;
        debug_assert_eq!(child.level, level);
        segs.push(child);
    }
    Ok(segs)
}

/// The indescribable remainder: `original - intensity_map`, elementwise.
/// Adding it back to the characteristic intensities reconstructs the
/// original exactly.
pub fn residual(
    original: &ImageGrid,
    seg: &LevelSegmentation,
) -> Result<ResidualMap, SegmentError> {
    if original.width() != seg.intensity_map.width()
        || original.height() != seg.intensity_map.height()
    {
        return Err(SegmentError::DimensionMismatch {
            expected: (original.width(), original.height()),
            actual: (seg.intensity_map.width(), seg.intensity_map.height()),
        });
    }
    Ok(ImageGrid::from_fn(
        original.width(),
        original.height(),
        |x, y| original.get(x, y) - seg.intensity_map.get(x, y),
    ))
}
