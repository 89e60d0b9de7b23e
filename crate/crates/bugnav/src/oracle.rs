//! Shortest-path reference used to normalize episode path lengths.
//!
//! The cell grid is subdivided into sub-cells, blocked sub-cells are
//! inflated by one sub-cell in the 8-neighborhood (so paths keep a margin
//! from walls and cannot cut corners), and an 8-connected A* with the
//! octile heuristic returns the optimal step counts. Costs are kept as
//! exact integer counts of straight and diagonal steps; the metric length
//! is `(straight + diagonal * sqrt(2)) * sub_size`, so equal-length paths
//! compare exactly and results are platform independent.

use crate::envgen::{Cell, GridMap};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Sub-cell resolution used when normalizing episode path lengths:
/// 0.25 m sub-cells for the default 1 m grid, which keeps 1-cell
/// corridors passable (two free sub-cells wide) after inflation.
pub const NORMALIZATION_SUBDIVISION: usize = 4;

/// Boolean occupancy at sub-cell resolution, already inflated.
#[derive(Clone, Debug)]
pub struct PaddedGrid {
    pub width: usize,
    pub height: usize,
    pub sub_size: f64,
    subdivision: usize,
    blocked: Vec<bool>,
}

impl PaddedGrid {
    /// Build directly from a blocked mask (no extra inflation). Useful
    /// for tests and custom occupancy sources.
    pub fn from_blocked(width: usize, height: usize, sub_size: f64, blocked: Vec<bool>) -> Self {
        assert_eq!(blocked.len(), width * height);
        PaddedGrid {
            width,
            height,
            sub_size,
            subdivision: 1,
            blocked,
        }
    }

    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.width + col]
    }

    /// Sub-cell containing the center of a full-resolution cell.
    pub fn cell_center_subcell(&self, cell: (usize, usize)) -> (usize, usize) {
        let k = self.subdivision;
        (cell.0 * k + k / 2, cell.1 * k + k / 2)
    }
}

/// Subdivide the grid and inflate wall sub-cells into their free
/// 8-neighbors. The grid boundary also counts as blocked, so free
/// sub-cells on the outermost ring are inflated too.
pub fn padded_occupancy(grid: &GridMap, subdivision: usize) -> PaddedGrid {
    assert!(subdivision >= 1);
    let w = grid.width * subdivision;
    let h = grid.height * subdivision;
    let mut wall = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            if grid.cell(c / subdivision, r / subdivision) == Cell::Wall {
                wall[r * w + c] = true;
            }
        }
    }
    let mut blocked = wall.clone();
    for r in 0..h {
        for c in 0..w {
            if wall[r * w + c] {
                continue;
            }
            let mut near = c == 0 || r == 0 || c == w - 1 || r == h - 1;
            'scan: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                    if cc >= 0
                        && rr >= 0
                        && (cc as usize) < w
                        && (rr as usize) < h
                        && wall[rr as usize * w + cc as usize]
                    {
                        near = true;
                        break 'scan;
                    }
                }
            }
            if near {
                blocked[r * w + c] = true;
            }
        }
    }
    PaddedGrid {
        width: w,
        height: h,
        sub_size: grid.cell_size / subdivision as f64,
        subdivision,
        blocked,
    }
}

/// Exact cost of an 8-connected path: counts of straight and diagonal
/// steps. Since sqrt(2) is irrational, distinct counts always map to
/// distinct metric lengths, so the key is a faithful total order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepCount {
    pub straight: u32,
    pub diagonal: u32,
}

impl StepCount {
    pub const ZERO: StepCount = StepCount {
        straight: 0,
        diagonal: 0,
    };

    pub fn key(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn length(self, sub_size: f64) -> f64 {
        self.key() * sub_size
    }

    fn plus(self, diagonal: bool) -> StepCount {
        if diagonal {
            StepCount {
                straight: self.straight,
                diagonal: self.diagonal + 1,
            }
        } else {
            StepCount {
                straight: self.straight + 1,
                diagonal: self.diagonal,
            }
        }
    }
}

const MOVES: [(i64, i64, bool); 8] = [
    (0, -1, false),
    (1, 0, false),
    (0, 1, false),
    (-1, 0, false),
    (1, -1, true),
    (1, 1, true),
    (-1, 1, true),
    (-1, -1, true),
];

#[derive(PartialEq)]
struct QueueEntry {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (f, g, node) via reversal; keys are always finite.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.g.total_cmp(&self.g))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(from: (usize, usize), to: (usize, usize)) -> f64 {
    let dx = (from.0 as i64 - to.0 as i64).unsigned_abs();
    let dy = (from.1 as i64 - to.1 as i64).unsigned_abs();
    let diag = dx.min(dy);
    let straight = dx.max(dy) - diag;
    straight as f64 + diag as f64 * std::f64::consts::SQRT_2
}

/// Optimal 8-connected step counts between two sub-cells, or None when no
/// path exists (including a blocked endpoint).
pub fn shortest_path(
    padded: &PaddedGrid,
    from: (usize, usize),
    to: (usize, usize),
) -> Option<StepCount> {
    search(padded, from, to, true)
}

fn search(
    padded: &PaddedGrid,
    from: (usize, usize),
    to: (usize, usize),
    use_heuristic: bool,
) -> Option<StepCount> {
    let (w, h) = (padded.width, padded.height);
    if from.0 >= w || from.1 >= h || to.0 >= w || to.1 >= h {
        return None;
    }
    if padded.is_blocked(from.0, from.1) || padded.is_blocked(to.0, to.1) {
        return None;
    }
    let idx = |c: usize, r: usize| r * w + c;
    let mut best: Vec<Option<StepCount>> = vec![None; w * h];
    let mut heap = BinaryHeap::new();
    best[idx(from.0, from.1)] = Some(StepCount::ZERO);
    let h0 = if use_heuristic { octile(from, to) } else { 0.0 };
    heap.push(QueueEntry {
        f: h0,
        g: 0.0,
        node: idx(from.0, from.1),
    });
    while let Some(QueueEntry { g, node, .. }) = heap.pop() {
        let cur = best[node].expect("queued nodes have a recorded cost");
        if g > cur.key() {
            continue; // stale entry
        }
        if node == idx(to.0, to.1) {
            return Some(cur);
        }
        let (c, r) = (node % w, node / w);
        for (dc, dr, diagonal) in MOVES {
            let (nc, nr) = (c as i64 + dc, r as i64 + dr);
            if nc < 0 || nr < 0 || nc as usize >= w || nr as usize >= h {
                continue;
            }
            let (nc, nr) = (nc as usize, nr as usize);
            if padded.is_blocked(nc, nr) {
                continue;
            }
            let cand = cur.plus(diagonal);
            let i = idx(nc, nr);
            let better = match best[i] {
                None => true,
                Some(prev) => cand.key() < prev.key(),
            };
            if better {
                best[i] = Some(cand);
                let hn = if use_heuristic {
                    octile((nc, nr), to)
                } else {
                    0.0
                };
                heap.push(QueueEntry {
                    f: cand.key() + hn,
                    g: cand.key(),
                    node: i,
                });
            }
        }
    }
    None
}

/// Normalized shortest-path length (meters) between grid start and target
/// at the standard subdivision, or None when padding seals the route.
pub fn shortest_path_length(grid: &GridMap) -> Option<f64> {
    let padded = padded_occupancy(grid, NORMALIZATION_SUBDIVISION);
    let from = padded.cell_center_subcell(grid.start);
    let to = padded.cell_center_subcell(grid.target);
    shortest_path(&padded, from, to).map(|sc| sc.length(padded.sub_size))
}
