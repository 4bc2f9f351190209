//! Row-major raster of real-valued gray levels, plus 3x3 neighborhood access.
//!
//! `ImageGrid` is the carrier for input images and every derived scalar map
//! (information measures, characteristic intensities, residuals). Values are
//! kept as `f64` end to end; quantization happens only at file export.

use alloc::vec::Vec;
use core::fmt;

/// Offsets of the eight neighbors, clockwise starting at the top-left.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    /// Width or height is zero.
    ZeroDimension { width: usize, height: usize },
    /// Value buffer length does not match `width * height`.
    LengthMismatch { expected: usize, actual: usize },
    /// A value is NaN or infinite; `index` is its row-major position.
    NonFinite { index: usize },
    /// Coordinate outside the grid.
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::ZeroDimension { width, height } => {
                write!(f, "grid dimensions must be positive, got {width}x{height}")
            }
            GridError::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} values, got {actual}")
            }
            GridError::NonFinite { index } => {
                write!(f, "non-finite value at index {index}")
            }
            GridError::OutOfBounds {
                x,
                y,
                width,
                height,
            } => {
                write!(f, "({x}, {y}) is outside a {width}x{height} grid")
            }
        }
    }
}

/// 2-D raster of gray levels, stored row-major with x growing right and
/// y growing down.
///
/// Invariants: positive dimensions, `values.len() == width * height`, and
/// every value finite. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    /// Builds a grid from row-major values. No normalization is applied.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::ZeroDimension { width, height });
        }
        if values.len() != width * height {
            return Err(GridError::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        Ok(ImageGrid {
            width,
            height,
            values,
        })
    }

    /// Grid filled with a single value.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, GridError> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    /// Grid computed per pixel. Intended for derived maps whose values are
    /// finite by construction.
    pub(crate) fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        debug_assert!(width > 0 && height > 0);
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ImageGrid {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major values, length `width * height`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    /// Value at (x, y). Panics if out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.index(x, y)]
    }

    /// True iff all eight neighbors of (x, y) exist inside the grid.
    pub fn is_interior(&self, x: usize, y: usize) -> bool {
        x >= 1 && y >= 1 && x + 1 < self.width && y + 1 < self.height
    }

    /// Mean over all pixels.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// The 3x3 neighborhood centered at (x, y).
    ///
    /// Border pixels (no full 3x3 support) yield `interior() == false` and
    /// carry no neighbor values; callers decide the border policy.
    pub fn neighborhood(&self, x: usize, y: usize) -> Result<Neighborhood3x3, GridError> {
        if x >= self.width || y >= self.height {
            return Err(GridError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let center = self.get(x, y);
        if !self.is_interior(x, y) {
            return Ok(Neighborhood3x3 {
                center,
                neighbors: None,
            });
        }
        let mut neighbors = [0.0; 8];
        for (slot, (dx, dy)) in neighbors.iter_mut().zip(NEIGHBOR_OFFSETS) {
            let nx = (x as isize + dx) as usize;
            let ny = (y as isize + dy) as usize;
            *slot = self.get(nx, ny);
        }
        Ok(Neighborhood3x3 {
            center,
            neighbors: Some(neighbors),
        })
    }
}

/// A pixel and its eight surrounding gray levels, clockwise from top-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighborhood3x3 {
    center: f64,
    neighbors: Option<[f64; 8]>,
}

impl Neighborhood3x3 {
    pub fn center(&self) -> f64 {
        self.center
    }

    /// The eight neighbor values; `None` for border pixels.
    pub fn neighbors(&self) -> Option<&[f64; 8]> {
        self.neighbors.as_ref()
    }

    pub fn is_interior(&self) -> bool {
        self.neighbors.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constructs_exact_values() {
        let g = ImageGrid::new(2, 2, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 0.0, 0.0]);

        let g = ImageGrid::new(1, 1, vec![255.0]).unwrap();
        assert_eq!(g.get(0, 0), 255.0);
    }

    #[test]
    fn row_major_indexing() {
        let g = ImageGrid::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(g.get(2, 1), 6.0);
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(2, 0), 3.0);
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(
            ImageGrid::new(0, 3, vec![]),
            Err(GridError::ZeroDimension { width: 0, height: 3 })
        );
        assert_eq!(
            ImageGrid::new(2, 2, vec![1.0; 3]),
            Err(GridError::LengthMismatch {
                expected: 4,
                actual: 3
            })
        );
        assert_eq!(
            ImageGrid::new(2, 2, vec![1.0, f64::NAN, 1.0, 1.0]),
            Err(GridError::NonFinite { index: 1 })
        );
        assert_eq!(
            ImageGrid::new(2, 2, vec![1.0, 1.0, f64::INFINITY, 1.0]),
            Err(GridError::NonFinite { index: 2 })
        );
    }

    #[test]
    fn interior_neighborhood_in_clockwise_order() {
        #[rustfmt::skip]
        let g = ImageGrid::new(3, 3, vec![
            1.0, 2.0, 3.0,
            4.0, 5.0, 6.0,
            7.0, 8.0, 9.0,
        ])
        .unwrap();
        let nb = g.neighborhood(1, 1).unwrap();
        assert!(nb.is_interior());
        assert_eq!(nb.center(), 5.0);
        assert_eq!(
            nb.neighbors().unwrap(),
            &[1.0, 2.0, 3.0, 6.0, 9.0, 8.0, 7.0, 4.0]
        );
    }

    #[test]
    fn corner_is_not_interior() {
        let g = ImageGrid::constant(3, 3, 1.0).unwrap();
        let nb = g.neighborhood(0, 0).unwrap();
        assert!(!nb.is_interior());
        assert!(nb.neighbors().is_none());
    }

    #[test]
    fn constant_grid_neighborhood() {
        let g = ImageGrid::constant(5, 5, 7.0).unwrap();
        let nb = g.neighborhood(2, 2).unwrap();
        assert_eq!(nb.center(), 7.0);
        assert_eq!(nb.neighbors().unwrap(), &[7.0; 8]);
    }

    #[test]
    fn neighborhood_out_of_bounds() {
        let g = ImageGrid::constant(3, 3, 0.0).unwrap();
        assert!(matches!(
            g.neighborhood(3, 0),
            Err(GridError::OutOfBounds { .. })
        ));
    }

    // The neighbor multiset equals the grid values at Chebyshev distance 1.
    #[test]
    fn neighbors_match_chebyshev_ring() {
        let g = ImageGrid::new(
            4,
            4,
            (0..16).map(|i| (i * 13 % 7) as f64).collect::<Vec<_>>(),
        )
        .unwrap();
        for y in 1..3 {
            for x in 1..3 {
                let mut expected: Vec<f64> = Vec::new();
                for ny in y - 1..=y + 1 {
                    for nx in x - 1..=x + 1 {
                        if (nx, ny) != (x, y) {
                            expected.push(g.get(nx, ny));
                        }
                    }
                }
                let mut got = g.neighborhood(x, y).unwrap().neighbors().unwrap().to_vec();
                expected.sort_by(f64::total_cmp);
                got.sort_by(f64::total_cmp);
                assert_eq!(got, expected);
            }
        }
    }
}
