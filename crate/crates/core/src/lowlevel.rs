//! Per-pixel local information content and its derived products.
//!
//! A pixel's local information is the product of two 3x3-neighborhood
//! measures: the mean absolute intensity difference against its differing
//! neighbors (`i_int`) and a topological term `m * (8 - m)`, where `m`
//! counts neighbors sharing the pixel's binary status (`i_top`). On top of
//! the resulting map sit a cumulative value histogram, prominence tiers,
//! and a signed two-line edge map.
//!
//! All measures need full 3x3 support, so the one-pixel border of every
//! derived map is zero and border status is fixed to 1 (the constant-region
//! value).

use alloc::vec::Vec;
use core::fmt;

use crate::grid::{ImageGrid, Neighborhood3x3, NEIGHBOR_OFFSETS};

/// Default bin count for the cumulative histogram (1% threshold granularity).
pub const DEFAULT_BIN_COUNT: usize = 100;

/// Default prominence fractions: tiers carrying 50%, 70%, and 85% of the
/// total information mass.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.50, 0.70, 0.85];

#[derive(Debug, Clone, PartialEq)]
pub enum LowLevelError {
    /// Information measures need at least a 3x3 grid.
    GridTooSmall { width: usize, height: usize },
    /// Histogram needs at least two bins.
    TooFewBins { bin_count: usize },
    /// Every local information value is zero; the histogram axis would be
    /// degenerate.
    NoInformationContent,
    /// Prominence fraction outside the open interval (0, 1).
    InvalidFraction(f64),
    /// Tier thresholds must be non-increasing and non-negative.
    UnorderedThresholds([f64; 3]),
}

impl fmt::Display for LowLevelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowLevelError::GridTooSmall { width, height } => {
                write!(f, "grid {width}x{height} is smaller than 3x3")
            }
            LowLevelError::TooFewBins { bin_count } => {
                write!(f, "histogram needs at least 2 bins, got {bin_count}")
            }
            LowLevelError::NoInformationContent => write!(f, "no information content"),
            LowLevelError::InvalidFraction(v) => {
                write!(f, "fraction {v} is outside (0, 1)")
            }
            LowLevelError::UnorderedThresholds(t) => {
                write!(f, "thresholds {t:?} are not non-increasing and non-negative")
            }
        }
    }
}

/// Binary per-pixel state: 1 where a pixel is at or above its neighborhood
/// sum comparison, 0 where below. Border pixels are 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusMap {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl StatusMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x]
    }

    /// Row-major status bits, each exactly 0 or 1.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// The three per-pixel information maps over one grid. Borders are zero in
/// all three; `i_loc` is the elementwise product of the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMaps {
    pub i_int: ImageGrid,
    pub i_top: ImageGrid,
    pub i_loc: ImageGrid,
}

/// Computes the status bit for every pixel: 1 iff
/// `8 * center - sum(8 neighbors) >= 0`. Border pixels, which lack full
/// support, are set to 1 (the value a constant region produces).
pub fn status_map(grid: &ImageGrid) -> StatusMap {
    let (w, h) = (grid.width(), grid.height());
    let mut bits = alloc::vec![1u8; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w - 1 {
            let center = grid.get(x, y);
            let mut sum = 0.0;
            for (dx, dy) in NEIGHBOR_OFFSETS {
                sum += grid.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            }
            if 8.0 * center - sum < 0.0 {
                bits[y * w + x] = 0;
            }
        }
    }
    StatusMap {
        width: w,
        height: h,
        bits,
    }
}

/// Mean absolute difference between the center and its differing neighbors.
///
/// Zero differences are excluded from the mean; a fully constant
/// neighborhood (no differing neighbor) yields 0. Defined only for interior
/// neighborhoods; border neighborhoods yield 0 by the border policy.
pub fn intensity_info(nbhd: &Neighborhood3x3) -> f64 {
    let Some(neighbors) = nbhd.neighbors() else {
        return 0.0;
    };
    let center = nbhd.center();
    let mut sum = 0.0;
    let mut count = 0u32;
    for &n in neighbors {
        let d = (center - n).abs();
        if d > 0.0 {
            sum += d;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / f64::from(count)
    }
}

/// Topological information `m * (8 - m)`, where `m` is the number of the
/// eight neighbor status bits equal to the center's.
pub fn topology_info(center: u8, neighbors: [u8; 8]) -> u32 {
    let m = neighbors.iter().filter(|&&s| s == center).count() as u32;
    m * (8 - m)
}

/// Computes status, `i_int`, `i_top`, and their product `i_loc` for every
/// interior pixel; borders are zero in all three maps.
pub fn local_info_map(grid: &ImageGrid) -> Result<InfoMaps, LowLevelError> {
    let (w, h) = (grid.width(), grid.height());
    if w < 3 || h < 3 {
        return Err(LowLevelError::GridTooSmall {
            width: w,
            height: h,
        });
    }
    // The status map must be complete before any i_top lookup.
    let status = status_map(grid);
    let mut i_int = alloc::vec![0.0; w * h];
    let mut i_top = alloc::vec![0.0; w * h];
    let mut i_loc = alloc::vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let nbhd = grid.neighborhood(x, y).expect("in bounds");
            let intensity = intensity_info(&nbhd);
            let mut status_nbhd = [0u8; 8];
            for (slot, (dx, dy)) in status_nbhd.iter_mut().zip(NEIGHBOR_OFFSETS) {
                *slot = status.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            }
            let topology = f64::from(topology_info(status.get(x, y), status_nbhd));
            let i = y * w + x;
            i_int[i] = intensity;
            i_top[i] = topology;
            i_loc[i] = intensity * topology;
        }
    }
    Ok(InfoMaps {
        i_int: ImageGrid::new(w, h, i_int).expect("finite by construction"),
        i_top: ImageGrid::new(w, h, i_top).expect("finite by construction"),
        i_loc: ImageGrid::new(w, h, i_loc).expect("finite by construction"),
    })
}

/// Cumulative histogram of local information values.
///
/// The axis spans `[0, 3 * mean]` in `bin_count` equal bins; each value is
/// added (its value, not a count) to every bin whose lower bound it meets,
/// so `bins[0]` is the total information mass and values above the axis top
/// contribute to all bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeHistogram {
    bin_width: f64,
    bins: Vec<f64>,
    normalized: Vec<f64>,
}

impl CumulativeHistogram {
    /// Builds the histogram from a raw value collection (the full map,
    /// zeros included — they shape the mean but add no mass).
    pub fn from_values(values: &[f64], bin_count: usize) -> Result<Self, LowLevelError> {
        if bin_count < 2 {
            return Err(LowLevelError::TooFewBins { bin_count });
        }
        let total: f64 = values.iter().sum();
        if values.is_empty() || total <= 0.0 {
            return Err(LowLevelError::NoInformationContent);
        }
        let mean = total / values.len() as f64;
        let bin_width = 3.0 * mean / bin_count as f64;
        let mut bins = alloc::vec![0.0; bin_count];
        for &v in values {
            for (b, bin) in bins.iter_mut().enumerate() {
                if v >= b as f64 * bin_width {
                    *bin += v;
                }
            }
        }
        let normalized = bins.iter().map(|&b| b / bins[0]).collect();
        Ok(CumulativeHistogram {
            bin_width,
            bins,
            normalized,
        })
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    /// Lower bound of bin `b`.
    pub fn lower_bound(&self, b: usize) -> f64 {
        b as f64 * self.bin_width
    }

    /// Per-bin accumulated information mass, non-increasing in bin index.
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    /// `bins` divided by `bins[0]`.
    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }
}

/// Histogram over a full `i_loc` map (see [`CumulativeHistogram`]).
pub fn cumulative_histogram(
    info: &InfoMaps,
    bin_count: usize,
) -> Result<CumulativeHistogram, LowLevelError> {
    CumulativeHistogram::from_values(info.i_loc.values(), bin_count)
}

/// For each fraction `f`, the largest bin lower bound whose normalized mass
/// is still at least `f`: pixels at or above that threshold carry at least
/// that share of the total information content.
pub fn prominence_thresholds(
    hist: &CumulativeHistogram,
    fractions: &[f64],
) -> Result<Vec<f64>, LowLevelError> {
    let mut thresholds = Vec::with_capacity(fractions.len());
    for &f in fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(LowLevelError::InvalidFraction(f));
        }
        let b = (0..hist.bin_count())
            .rev()
            .find(|&b| hist.normalized()[b] >= f)
            .expect("bin 0 is normalized to 1.0");
        thresholds.push(hist.lower_bound(b));
    }
    Ok(thresholds)
}

/// Prominence class of a pixel, from most to least information-rich.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    None,
    Tier50,
    Tier70,
    Tier85,
}

/// Per-pixel prominence tiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierMap {
    width: usize,
    height: usize,
    tiers: Vec<Tier>,
}

impl TierMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Tier {
        self.tiers[y * self.width + x]
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }
}

/// Classifies every pixel by descending thresholds `[t50, t70, t85]`:
/// `Tier50` at or above `t50`, then `Tier70`, then `Tier85`, else `None`.
pub fn prominence_mark(info: &InfoMaps, thresholds: [f64; 3]) -> Result<TierMap, LowLevelError> {
    let [t50, t70, t85] = thresholds;
    if !(t50 >= t70 && t70 >= t85 && t85 >= 0.0) {
        return Err(LowLevelError::UnorderedThresholds(thresholds));
    }
    let tiers = info
        .i_loc
        .values()
        .iter()
        .map(|&v| {
            if v >= t50 {
                Tier::Tier50
            } else if v >= t70 {
                Tier::Tier70
            } else if v >= t85 {
                Tier::Tier85
            } else {
                Tier::None
            }
        })
        .collect();
    Ok(TierMap {
        width: info.i_loc.width(),
        height: info.i_loc.height(),
        tiers,
    })
}

/// Edge mark carrying the gradient side: `LowSide` on the darker side of a
/// discontinuity, `HighSide` on the brighter one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMark {
    None,
    LowSide,
    HighSide,
}

/// Signed two-line edge map: edges show up as a closely spaced line pair,
/// one mark on each intensity side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    marks: Vec<EdgeMark>,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> EdgeMark {
        self.marks[y * self.width + x]
    }

    pub fn marks(&self) -> &[EdgeMark] {
        &self.marks
    }
}

/// Marks every pixel whose local information reaches `threshold`, signed by
/// its status bit (0 -> `LowSide`, 1 -> `HighSide`). `threshold` must be
/// positive.
pub fn edge_map(info: &InfoMaps, status: &StatusMap, threshold: f64) -> EdgeMap {
    let marks = info
        .i_loc
        .values()
        .iter()
        .zip(status.bits())
        .map(|(&v, &s)| {
            if v >= threshold {
                if s == 0 {
                    EdgeMark::LowSide
                } else {
                    EdgeMark::HighSide
                }
            } else {
                EdgeMark::None
            }
        })
        .collect();
    EdgeMap {
        width: info.i_loc.width(),
        height: info.i_loc.height(),
        marks,
    }
}
