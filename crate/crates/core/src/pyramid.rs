//! Dyadic image pyramid: repeated 4-to-1 block averaging (Reduce) on the way
//! up, nearest-neighbor child assignment (Expand) on the way down.

use alloc::vec::Vec;
use core::fmt;

use crate::grid::ImageGrid;

/// Minimum top-level dimension used when no explicit target is given.
pub const DEFAULT_TOP_TARGET: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PyramidError {
    /// Expand target dimensions do not ceil-halve back to the source map.
    ExpandMismatch {
        map_width: usize,
        map_height: usize,
        target_width: usize,
        target_height: usize,
    },
}

impl fmt::Display for PyramidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PyramidError::ExpandMismatch {
                map_width,
                map_height,
                target_width,
                target_height,
            } => write!(
                f,
                "cannot expand {map_width}x{map_height} to {target_width}x{target_height}: \
                 target must ceil-halve back to the source"
            ),
        }
    }
}

fn ceil_half(n: usize) -> usize {
    n / 2 + n % 2
}

/// Ordered stack of grids; index 0 is the original image, each following
/// level is the Reduce of its predecessor.
#[derive(Debug, Clone)]
pub struct Pyramid {
    levels: Vec<ImageGrid>,
    top_target: usize,
}

impl Pyramid {
    pub fn levels(&self) -> &[ImageGrid] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> &ImageGrid {
        &self.levels[index]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The coarsest level.
    pub fn top(&self) -> &ImageGrid {
        self.levels.last().expect("pyramid has at least one level")
    }

    pub fn top_target(&self) -> usize {
        self.top_target
    }
}

/// One downsampling step: each output pixel is the mean of its 2x2 child
/// block. Output dimensions are the ceil-half of the input; for odd inputs
/// the missing child of the last row/column block is replicated from the
/// nearest in-range pixel of that block.
pub fn reduce(grid: &ImageGrid) -> ImageGrid {
    let (w, h) = (grid.width(), grid.height());
    let (out_w, out_h) = (ceil_half(w), ceil_half(h));
    ImageGrid::from_fn(out_w, out_h, |x, y| {
        let x0 = 2 * x;
        let y0 = 2 * y;
        let x1 = (2 * x + 1).min(w - 1);
        let y1 = (2 * y + 1).min(h - 1);
        (grid.get(x0, y0) + grid.get(x1, y0) + grid.get(x0, y1) + grid.get(x1, y1)) / 4.0
    })
}

/// Reversed Reduce: each target pixel (x, y) receives the value of parent
/// pixel (x/2, y/2). No interpolation.
///
/// The target dimensions are explicit because ceil-halving is not
/// invertible; they must ceil-halve back to the source map.
pub fn expand(
    map: &ImageGrid,
    target_w: usize,
    target_h: usize,
) -> Result<ImageGrid, PyramidError> {
    if ceil_half(target_w) != map.width() || ceil_half(target_h) != map.height() || target_w == 0 || target_h == 0 {
        return Err(PyramidError::ExpandMismatch {
            map_width: map.width(),
            map_height: map.height(),
            target_width: target_w,
            target_height: target_h,
        });
    }
    Ok(ImageGrid::from_fn(target_w, target_h, |x, y| {
        map.get(x / 2, y / 2)
    }))
}

/// Number of pyramid levels, counting level 0 (the original) through the
/// top. Halving stops once the next level's minimum dimension would drop
/// below `top_target` (or once halving no longer shrinks the grid).
pub fn level_count(width: usize, height: usize, top_target: usize) -> usize {
    assert!(width >= 1 && height >= 1 && top_target >= 1);
    let mut w = width;
    let mut h = height;
    let mut n = 1;
    loop {
        let (nw, nh) = (ceil_half(w), ceil_half(h));
        if nw.min(nh) < top_target || (nw, nh) == (w, h) {
            return n;
        }
        w = nw;
        h = nh;
        n += 1;
    }
}

/// Builds the full pyramid by repeated Reduce until the top level reaches
/// the target size (see [`level_count`]).
pub fn build_pyramid(grid: &ImageGrid, top_target: usize) -> Pyramid {
    let count = level_count(grid.width(), grid.height(), top_target);
    let mut levels = Vec::with_capacity(count);
    levels.push(grid.clone());
    for _ in 1..count {
        let next = reduce(levels.last().expect("nonempty"));
        levels.push(next);
    }
    Pyramid { levels, top_target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reduce_2x2_to_single_mean() {
        let g = ImageGrid::new(2, 2, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let r = reduce(&g);
        assert_eq!((r.width(), r.height()), (1, 1));
        assert_eq!(r.get(0, 0), 25.0);
    }

    #[test]
    fn reduce_constant_stays_constant() {
        let g = ImageGrid::constant(4, 4, 77.0).unwrap();
        let r = reduce(&g);
        assert_eq!((r.width(), r.height()), (2, 2));
        assert!(r.values().iter().all(|&v| v == 77.0));
    }

    #[test]
    fn reduce_odd_dims_replicates_block_edge() {
        let g = ImageGrid::new(3, 3, (1..=9).map(f64::from).collect::<Vec<_>>()).unwrap();
        let r = reduce(&g);
        assert_eq!((r.width(), r.height()), (2, 2));
        assert_eq!(r.values(), &[3.0, 4.5, 7.5, 9.0]);
    }

    #[test]
    fn expand_1x1_to_2x2() {
        let g = ImageGrid::new(1, 1, vec![25.0]).unwrap();
        let e = expand(&g, 2, 2).unwrap();
        assert_eq!(e.values(), &[25.0, 25.0, 25.0, 25.0]);
    }

    #[test]
    fn expand_reduce_identity_on_constants() {
        let g = ImageGrid::constant(6, 4, 13.5).unwrap();
        let back = expand(&reduce(&g), 6, 4).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn expand_2x1_to_4x2() {
        let g = ImageGrid::new(2, 1, vec![3.0, 9.0]).unwrap();
        let e = expand(&g, 4, 2).unwrap();
        assert_eq!(e.values(), &[3.0, 3.0, 9.0, 9.0, 3.0, 3.0, 9.0, 9.0]);
    }

    #[test]
    fn expand_rejects_bad_target() {
        let g = ImageGrid::constant(2, 2, 0.0).unwrap();
        assert!(expand(&g, 5, 4).is_err());
        assert!(expand(&g, 4, 5).is_err());
        assert!(expand(&g, 0, 0).is_err());
    }

    #[test]
    fn level_count_vga_is_six() {
        // 640x480 -> 320x240 -> 160x120 -> 80x60 -> 40x30 -> 20x15; next 10x8.
        assert_eq!(level_count(640, 480, 12), 6);
    }

    #[test]
    fn level_count_already_at_target() {
        assert_eq!(level_count(12, 12, 12), 1);
    }

    #[test]
    fn level_count_with_odd_halving() {
        // 100 -> 50 -> 25 -> 13; next would be 7 < 12.
        assert_eq!(level_count(100, 100, 12), 4);
    }

    #[test]
    fn level_count_terminates_at_1x1() {
        assert_eq!(level_count(1, 1, 1), 1);
        assert_eq!(level_count(2, 2, 1), 2);
    }

    #[test]
    fn build_pyramid_levels_and_dims() {
        let g = ImageGrid::constant(8, 8, 5.0).unwrap();
        let p = build_pyramid(&g, 2);
        assert_eq!(p.len(), 3);
        assert_eq!(
            p.levels()
                .iter()
                .map(|l| (l.width(), l.height()))
                .collect::<Vec<_>>(),
            vec![(8, 8), (4, 4), (2, 2)]
        );
        assert!(p.levels().iter().all(|l| l.values().iter().all(|&v| v == 5.0)));
    }

    #[test]
    fn build_pyramid_single_pixel() {
        let g = ImageGrid::new(1, 1, vec![9.0]).unwrap();
        let p = build_pyramid(&g, 12);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn build_pyramid_matches_level_count_and_reduce() {
        let g = ImageGrid::from_fn(13, 7, |x, y| ((x * 31 + y * 17) % 256) as f64);
        let p = build_pyramid(&g, 2);
        assert_eq!(p.len(), level_count(13, 7, 2));
        for l in 0..p.len() - 1 {
            assert_eq!(reduce(p.level(l)), *p.level(l + 1));
        }
    }

    #[test]
    fn mean_preserved_on_even_dims() {
        let g = ImageGrid::from_fn(16, 12, |x, y| ((x * 7 + y * 3) % 251) as f64);
        let r = reduce(&g);
        assert!((r.mean() - g.mean()).abs() < 1e-9);
    }
}
