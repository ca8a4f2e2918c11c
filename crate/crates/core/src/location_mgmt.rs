//! Reporting-cell location management over a rectangular cell grid.
//!
//! The room floor is partitioned into a grid of square cells, each served by
//! its own ceiling transceiver. A subset of cells is designated as *reporting
//! cells*: a mobile node performs a location update only when it enters one
//! of them, and a database keeps each node's most recent reported cell.
//!
//! When a data request arrives for a node, the node is searched in the
//! *vicinity* of its last recorded cell: the recorded cell itself plus every
//! non-reporting cell reachable from it through non-reporting cells. Because
//! the node must have reported the last reporting cell it entered, it cannot
//! have left that vicinity unnoticed, so the bounded search is sound.
//!
//! Cells are addressed as `(row, col)` pairs; probe order is breadth-first
//! distance from the recorded cell with row-major tie-breaking, which keeps
//! search traces deterministic.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::positioning::Point2D;

/// Grid cell address: `(row, col)`, zero-based.
pub type CellId = (u32, u32);

/// Errors from grid construction, cell mapping, and search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocationError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("position ({x}, {y}) is outside the grid bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("cell ({}, {}) is outside the grid", .cell.0, .cell.1)]
    InvalidCell { cell: CellId },
    #[error(
        "search miss: node {node} was not found in any of the {} probed cells — \
         it moved through a reporting cell without updating its location",
        .probed.len()
    )]
    SearchMiss { node: String, probed: Vec<CellId> },
}

/// Neighborhood shape used for vicinity flood fill and movement adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    /// Edge neighbors only (up/down/left/right).
    Four,
    /// Edge and corner neighbors.
    Eight,
}

/// A rectangular grid of square cells, some designated as reporting cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    rows: u32,
    cols: u32,
    cell_size: f64,
    reporting: BTreeSet<CellId>,
    adjacency: Adjacency,
}

impl CellGrid {
    /// Builds a grid, validating dimensions and that every reporting cell is
    /// a valid grid cell.
    pub fn new(
        rows: u32,
        cols: u32,
        cell_size: f64,
        reporting: BTreeSet<CellId>,
        adjacency: Adjacency,
    ) -> Result<Self, LocationError> {
        if rows == 0 || cols == 0 {
            return Err(LocationError::InvalidGrid(format!(
                "grid must have at least one row and one column, got {rows}×{cols}"
            )));
        }
        if !cell_size.is_finite() || cell_size <= 0.0 {
            return Err(LocationError::InvalidGrid(format!(
                "cell size must be positive and finite, got {cell_size}"
            )));
        }
        for &cell in &reporting {
            if cell.0 >= rows || cell.1 >= cols {
                return Err(LocationError::InvalidGrid(format!(
                    "reporting cell ({}, {}) is outside the {rows}×{cols} grid",
                    cell.0, cell.1
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            cell_size,
            reporting,
            adjacency,
        })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn adjacency(&self) -> Adjacency {
        self.adjacency
    }

    pub fn reporting(&self) -> &BTreeSet<CellId> {
        &self.reporting
    }

    /// Covered width of the grid in meters (`cols · cell_size`).
    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    /// Covered height of the grid in meters (`rows · cell_size`).
    pub fn height(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }

    pub fn contains(&self, cell: CellId) -> bool {
        cell.0 < self.rows && cell.1 < self.cols
    }

    pub fn is_reporting(&self, cell: CellId) -> bool {
        self.reporting.contains(&cell)
    }

    /// Center of a cell on the floor plane.
    pub fn cell_center(&self, cell: CellId) -> Point2D {
        Point2D::new(
            (cell.1 as f64 + 0.5) * self.cell_size,
            (cell.0 as f64 + 0.5) * self.cell_size,
        )
    }

    /// Distance from a cell center to its farthest corner — the radius the
    /// cell's transceiver must cover so that every in-cell position is served.
    pub fn cell_circumradius(&self) -> f64 {
        self.cell_size * std::f64::consts::SQRT_2 / 2.0
    }

    /// In-grid neighbors of a cell under the grid's adjacency, in row-major
    /// order.
    pub fn neighbors(&self, cell: CellId) -> Vec<CellId> {
        let (r, c) = (cell.0 as i64, cell.1 as i64);
        let offsets: &[(i64, i64)] = match self.adjacency {
            Adjacency::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Adjacency::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        };
        offsets
            .iter()
            .filter_map(|&(dr, dc)| {
                let (nr, nc) = (r + dr, c + dc);
                if nr >= 0 && nc >= 0 && (nr as u32) < self.rows && (nc as u32) < self.cols {
                    Some((nr as u32, nc as u32))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Every cell of the grid in row-major order — the fallback search order
    /// for nodes with no location record.
    pub fn all_cells_row_major(&self) -> Vec<CellId> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .collect()
    }
}

/// Maps a continuous position to its cell: `(floor(y / cell_size),
/// floor(x / cell_size))`. Boundary coordinates round down; positions on the
/// grid's top or right edge belong to the last row/column.
pub fn cell_of(grid: &CellGrid, position: Point2D) -> Result<CellId, LocationError> {
    let (x, y) = (position.x, position.y);
    if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 || x > grid.width() || y > grid.height() {
        return Err(LocationError::OutOfBounds { x, y });
    }
    let col = ((x / grid.cell_size).floor() as u32).min(grid.cols - 1);
    let row = ((y / grid.cell_size).floor() as u32).min(grid.rows - 1);
    Ok((row, col))
}

/// Breadth-first probe order from `start`: `start` itself, then every
/// non-reporting cell reachable from it through non-reporting cells, in
/// ascending breadth-first distance with row-major tie-breaking.
///
/// The traversal never expands through a reporting cell other than `start`,
/// so reporting cells bound the searched region.
pub fn search_order(grid: &CellGrid, start: CellId) -> Result<Vec<CellId>, LocationError> {
    if !grid.contains(start) {
        return Err(LocationError::InvalidCell { cell: start });
    }
    let mut visited: BTreeSet<CellId> = BTreeSet::new();
    visited.insert(start);
    let mut order = vec![start];
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let mut next: BTreeSet<CellId> = BTreeSet::new();
        for &cell in &frontier {
            for n in grid.neighbors(cell) {
                if !visited.contains(&n) && !grid.is_reporting(n) {
                    next.insert(n);
                }
            }
        }
        // BTreeSet iterates (row, col) ascending, which is row-major order.
        frontier = next.into_iter().collect();
        for &cell in &frontier {
            visited.insert(cell);
            order.push(cell);
        }
    }
    Ok(order)
}

/// The set of cells a node last seen in `c` can occupy without having
/// triggered another location update: `{c}` plus all non-reporting cells
/// reachable from `c` through non-reporting cells.
pub fn vicinity(grid: &CellGrid, c: CellId) -> Result<BTreeSet<CellId>, LocationError> {
    Ok(search_order(grid, c)?.into_iter().collect())
}

/// One node's entry in the location database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRecord {
    /// Last reported cell (or the initial-attach cell, see flag).
    pub cell: CellId,
    /// Simulation tick of the record.
    pub tick: u64,
    /// True when the record stems from the node's mandatory first
    /// registration rather than from entering a reporting cell.
    pub initial_attach: bool,
}

/// The backend's store of each node's most recent reported location.
///
/// Single-writer: all mutations happen on the simulation thread; reads may be
/// issued concurrently.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationDB {
    records: BTreeMap<String, LocationRecord>,
}

/// Update notification returned when a node's record changes.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationUpdate {
    pub node: String,
    pub cell: CellId,
    pub tick: u64,
}

/// Result of a successful bounded search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocateOutcome {
    /// The cell where the node answered the probe.
    pub found_cell: CellId,
    /// Every probed cell, in probe order, including the hit.
    pub probed: Vec<CellId>,
}

impl LocationDB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, node: &str) -> Option<&LocationRecord> {
        self.records.get(node)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records a node's mandatory first registration, used when a node first
    /// appears in a non-reporting cell so that later searches have a starting
    /// point. The record is flagged as an initial attach.
    pub fn register_initial(
        &mut self,
        grid: &CellGrid,
        node: &str,
        cell: CellId,
        tick: u64,
    ) -> Result<(), LocationError> {
        if !grid.contains(cell) {
            return Err(LocationError::InvalidCell { cell });
        }
        self.records.insert(
            node.to_string(),
            LocationRecord {
                cell,
                tick,
                initial_attach: true,
            },
        );
        Ok(())
    }
}

/// Handles a node's entry into `new_cell`.
///
/// Only entering a reporting cell that differs from the node's last recorded
/// cell updates the database (and returns the update); any other movement
/// leaves the database untouched and returns `None`. Re-entering the cell a
/// node last reported is deliberately idempotent.
pub fn on_move(
    db: &mut LocationDB,
    grid: &CellGrid,
    node: &str,
    new_cell: CellId,
    tick: u64,
) -> Result<Option<LocationUpdate>, LocationError> {
    if !grid.contains(new_cell) {
        return Err(LocationError::InvalidCell { cell: new_cell });
    }
    if !grid.is_reporting(new_cell) {
        return Ok(None);
    }
    if let Some(record) = db.records.get(node) {
        if record.cell == new_cell {
            return Ok(None);
        }
    }
    db.records.insert(
        node.to_string(),
        LocationRecord {
            cell: new_cell,
            tick,
            initial_attach: false,
        },
    );
    Ok(Some(LocationUpdate {
        node: node.to_string(),
        cell: new_cell,
        tick,
    }))
}

/// Searches for a node: probes the vicinity of its last recorded cell in
/// breadth-first order (row-major tie-break); nodes with no record are probed
/// over the whole grid in row-major order.
///
/// `probe` answers whether the node is currently present in the given cell.
/// Returns the found cell and the full probe list; if every probe fails the
/// search reports a miss, which signals a protocol violation (the node moved
/// through a reporting cell without updating).
pub fn locate(
    db: &LocationDB,
    grid: &CellGrid,
    node: &str,
    mut probe: impl FnMut(CellId) -> bool,
) -> Result<LocateOutcome, LocationError> {
    let order = match db.get(node) {
        Some(record) => search_order(grid, record.cell)?,
        None => grid.all_cells_row_major(),
    };
    let mut probed = Vec::new();
    for cell in order {
        probed.push(cell);
        if probe(cell) {
            return Ok(LocateOutcome {
                found_cell: cell,
                probed,
            });
        }
    }
    Err(LocationError::SearchMiss {
        node: node.to_string(),
        probed,
    })
}
