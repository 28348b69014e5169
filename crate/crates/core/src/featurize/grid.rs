use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::ingest::Resolution;
use crate::vocab::Intersection;

/// Uniform grid of square cells laid over the frame. Cells are numbered from
/// 1 in row-major order; cells on the right and bottom border are clipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_size: u32,
    pub cols: u32,
    pub rows: u32,
    pub resolution: Resolution,
}

pub fn build_grid(resolution: Resolution, cell_size: u32) -> Result<GridSpec> {
    if cell_size == 0 {
        return Err(Error::Config("cell size must be at least 1".into()));
    }
    if cell_size > resolution.width.min(resolution.height) {
        return Err(Error::Config(format!(
            "cell size {cell_size} exceeds the smaller frame side of {}x{}",
            resolution.width, resolution.height
        )));
    }
    Ok(GridSpec {
        cell_size,
        cols: resolution.width.div_ceil(cell_size),
        rows: resolution.height.div_ceil(cell_size),
        resolution,
    })
}

/// Which cells of a box produce observations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoxMode {
    /// Only the row of cells touched by the bottom border.
    #[default]
    Bottom,
    /// Every cell the box overlaps.
    Whole,
}

impl GridSpec {
    /// `G_total`.
    pub fn cell_count(&self) -> u32 {
        self.cols * self.rows
    }

    pub fn cell_index(&self, col: u32, row: u32) -> u32 {
        row * self.cols + col + 1
    }

    /// `(col, row)` of a 1-based cell index.
    pub fn col_row(&self, cell: u32) -> (u32, u32) {
        ((cell - 1) % self.cols, (cell - 1) / self.cols)
    }

    /// Pixel rectangle of a cell, clipped to the frame.
    pub fn cell_box(&self, cell: u32) -> BBox {
        let (col, row) = self.col_row(cell);
        let s = self.cell_size as f64;
        BBox::new(
            col as f64 * s,
            row as f64 * s,
            ((col + 1) as f64 * s).min(self.resolution.width as f64),
            ((row + 1) as f64 * s).min(self.resolution.height as f64),
        )
    }

    /// Inclusive range of cell coordinates touched by `[lo, hi)`; an end
    /// that sits exactly on a cell boundary stays in the lower cell.
    fn span(&self, lo: f64, hi: f64, count: u32) -> (u32, u32) {
        let s = self.cell_size as f64;
        let last = count - 1;
        let first = ((lo / s).floor().max(0.0) as u32).min(last);
        let end = (((hi / s).ceil() as i64 - 1).max(first as i64) as u32).min(last);
        (first, end)
    }

    fn cols_of(&self, b: &BBox) -> (u32, u32) {
        self.span(b.x1, b.x2, self.cols)
    }

    /// Cells in the row holding the box's bottom border, left to right.
    pub fn bottom_edge_cells(&self, b: &BBox) -> Vec<u32> {
        let s = self.cell_size as f64;
        let row = (((b.y2 / s).ceil() as i64 - 1).max(0) as u32).min(self.rows - 1);
        let (c0, c1) = self.cols_of(b);
        (c0..=c1).map(|c| self.cell_index(c, row)).collect()
    }

    /// Every cell the box overlaps, row-major.
    pub fn whole_box_cells(&self, b: &BBox) -> Vec<u32> {
        let (r0, r1) = self.span(b.y1, b.y2, self.rows);
        let (c0, c1) = self.cols_of(b);
        (r0..=r1)
            .flat_map(|r| (c0..=c1).map(move |c| (c, r)))
            .map(|(c, r)| self.cell_index(c, r))
            .collect()
    }

    pub fn cells(&self, b: &BBox, mode: BoxMode) -> Vec<u32> {
        match mode {
            BoxMode::Bottom => self.bottom_edge_cells(b),
            BoxMode::Whole => self.whole_box_cells(b),
        }
    }
}

/// Bins the covered share of `cell`. `None` when the box misses the cell.
pub fn intersection_category(b: &BBox, cell: &BBox) -> Option<Intersection> {
    let inter = b.intersection_area(cell);
    if inter <= 0.0 {
        return None;
    }
    let phi = inter / cell.area();
    Some(if phi < 0.25 {
        Intersection::Small
    } else if phi < 0.5 {
        Intersection::Quarter
    } else if phi < 0.75 {
        Intersection::Half
    } else if phi < 1.0 {
        Intersection::ThreeQuarters
    } else {
        Intersection::Full
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: u32, h: u32, s: u32) -> GridSpec {
        build_grid(Resolution::new(w, h), s).unwrap()
    }

    #[test]
    fn grid_dimensions() {
        let g = grid(640, 360, 40);
        assert_eq!((g.cols, g.rows, g.cell_count()), (16, 9, 144));
        let g = grid(1280, 720, 40);
        assert_eq!((g.cols, g.rows, g.cell_count()), (32, 18, 576));
        let g = grid(640, 360, 20);
        assert_eq!((g.cols, g.rows), (32, 18));
        let g = grid(100, 90, 40);
        assert_eq!((g.cols, g.rows), (3, 3));
        assert_eq!(g.cell_box(9), BBox::new(80.0, 80.0, 100.0, 90.0));
    }

    #[test]
    fn bad_cell_sizes() {
        assert!(build_grid(Resolution::new(640, 360), 0).is_err());
        assert!(build_grid(Resolution::new(640, 360), 361).is_err());
        assert!(build_grid(Resolution::new(640, 360), 360).is_ok());
    }

    #[test]
    fn bottom_edge_examples() {
        let g = grid(640, 360, 40);
        assert_eq!(g.bottom_edge_cells(&BBox::new(10.0, 20.0, 30.0, 80.0)), vec![17]);
        assert_eq!(g.bottom_edge_cells(&BBox::new(0.0, 0.0, 40.0, 40.0)), vec![1]);
        assert_eq!(g.bottom_edge_cells(&BBox::new(0.0, 0.0, 120.0, 40.0)), vec![1, 2, 3]);
        assert_eq!(g.bottom_edge_cells(&BBox::new(600.0, 300.0, 640.0, 360.0)), vec![144]);
        assert_eq!(g.bottom_edge_cells(&BBox::new(39.5, 0.0, 40.5, 0.5)), vec![1, 2]);
    }

    #[test]
    fn whole_box_cells() {
        let g = grid(640, 360, 40);
        let b = BBox::new(10.0, 20.0, 50.0, 80.0);
        assert_eq!(g.whole_box_cells(&b), vec![1, 2, 17, 18]);
        assert_eq!(g.bottom_edge_cells(&b), vec![17, 18]);
    }

    #[test]
    fn intersection_bins() {
        let cell = BBox::new(0.0, 0.0, 40.0, 40.0);
        let cat = |b: BBox| intersection_category(&b, &cell);
        assert_eq!(cat(BBox::new(-5.0, -5.0, 50.0, 50.0)), Some(Intersection::Full));
        assert_eq!(cat(BBox::new(0.0, 20.0, 40.0, 40.0)), Some(Intersection::Half));
        assert_eq!(cat(BBox::new(0.0, 30.0, 40.0, 40.0)), Some(Intersection::Quarter));
        assert_eq!(cat(BBox::new(0.0, 31.0, 40.0, 40.0)), Some(Intersection::Small));
        assert_eq!(cat(BBox::new(0.0, 5.0, 40.0, 40.0)), Some(Intersection::ThreeQuarters));
        assert_eq!(cat(BBox::new(40.0, 0.0, 50.0, 40.0)), None);
    }
}
