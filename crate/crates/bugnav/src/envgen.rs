//! Procedural indoor environments.
//!
//! Two corridor-carving agents random-walk a cell grid from the start and
//! target cells until a corridor-density threshold is met, walls are laid
//! around the corridors, leftover pockets become rooms (split until no
//! dimension is too large), and every room gets a one-cell door onto a
//! corridor. A pocket around the target is kept clear of walls so the goal
//! cannot be reached by hugging a wall.
//!
//! Generation is a pure function of [`GenParams`]: the same parameters
//! (seed included) always produce the identical map.

use crate::geometry::{Pose, Segment, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Cell classes of the occupancy grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Wall,
    Free,
    Corridor,
    Room,
}

/// Occupancy grid with start/target cells. `(col, row)` indexing,
/// row-major storage, world coordinates put cell `(c, r)` at
/// `[c*s, (c+1)*s] x [r*s, (r+1)*s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    cells: Vec<Cell>,
    pub start: (usize, usize),
    pub target: (usize, usize),
}

impl GridMap {
    /// Boundary-walled grid with a free interior.
    pub fn new_open(
        width: usize,
        height: usize,
        cell_size: f64,
        start: (usize, usize),
        target: (usize, usize),
    ) -> Self {
        let mut g = GridMap {
            width,
            height,
            cell_size,
            cells: vec![Cell::Free; width * height],
            start,
            target,
        };
        for c in 0..width {
            g.set_cell(c, 0, Cell::Wall);
            g.set_cell(c, height - 1, Cell::Wall);
        }
        for r in 0..height {
            g.set_cell(0, r, Cell::Wall);
            g.set_cell(width - 1, r, Cell::Wall);
        }
        g
    }

    fn idx(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    pub fn cell(&self, col: usize, row: usize) -> Cell {
        self.cells[self.idx(col, row)]
    }

    pub fn set_cell(&mut self, col: usize, row: usize, c: Cell) {
        let i = self.idx(col, row);
        self.cells[i] = c;
    }

    /// World position of a cell center.
    pub fn cell_center(&self, cell: (usize, usize)) -> Vec2 {
        Vec2::new(
            (cell.0 as f64 + 0.5) * self.cell_size,
            (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    /// 4-neighbors inside the grid.
    fn neighbors4(&self, col: usize, row: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        const D: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];
        D.iter().filter_map(move |(dc, dr)| {
            let c = col as i64 + dc;
            let r = row as i64 + dr;
            if c >= 0 && r >= 0 && (c as usize) < self.width && (r as usize) < self.height {
                Some((c as usize, r as usize))
            } else {
                None
            }
        })
    }

    /// Number of cells of one kind.
    pub fn count(&self, kind: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == kind).count()
    }
}

/// Map-generation parameters. Defaults give a 14 m x 14 m arena of 1 m
/// cells, 0.4 corridor density and 0.75 straight-step probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub arena_size: f64,
    pub cell_size: f64,
    pub p_straight: f64,
    pub corridor_density: f64,
    pub room_split_max: usize,
    /// Cells of shared room/corridor wall per punched opening (>= 1).
    pub door_spacing: usize,
    pub retry_limit: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            arena_size: 14.0,
            cell_size: 1.0,
            p_straight: 0.65,
            corridor_density: 0.4,
            room_split_max: 5,
            door_spacing: 99,
            retry_limit: 100,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation parameter: {0}")]
    BadParams(String),
    #[error("generation retry limit ({0}) exceeded")]
    RetryLimit(usize),
}

/// A generated map plus everything an episode needs: wall segments, the
/// start pose (facing the target) and the target point.
#[derive(Clone, Debug)]
pub struct Environment {
    pub grid: GridMap,
    pub walls: Vec<Segment>,
    pub start_pose: Pose,
    pub target: Vec2,
}

impl Environment {
    pub fn from_grid(grid: GridMap) -> Self {
        let walls = grid_to_segments(&grid);
        let start = grid.cell_center(grid.start);
        let target = grid.cell_center(grid.target);
        let heading = (target - start).angle();
        Environment {
            grid,
            walls,
            start_pose: Pose::new(start, heading),
            target,
        }
    }
}

const DIRS: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

struct Walker {
    pos: (usize, usize),
    dir: usize,
}

impl Walker {
    /// One 4-connected step: keep heading with `p_straight`, else turn
    /// left/right with equal probability. Steps that would leave the
    /// interior re-draw uniformly among the in-bounds directions.
    fn step(&mut self, grid: &GridMap, p_straight: f64, rng: &mut ChaCha8Rng) {
        let u: f64 = rng.gen();
        let turn_half = (1.0 - p_straight) / 2.0;
        let dir = if u < p_straight {
            self.dir
        } else if u < p_straight + turn_half {
            (self.dir + 3) % 4 // left
        } else {
            (self.dir + 1) % 4 // right
        };
        let dest = |d: usize| -> Option<(usize, usize)> {
            let c = self.pos.0 as i64 + DIRS[d].0;
            let r = self.pos.1 as i64 + DIRS[d].1;
            let (w, h) = (grid.width as i64, grid.height as i64);
            if c >= 1 && r >= 1 && c < w - 1 && r < h - 1 {
                Some((c as usize, r as usize))
            } else {
                None
            }
        };
        if let Some(p) = dest(dir) {
            self.dir = dir;
            self.pos = p;
            return;
        }
        let legal: Vec<usize> = (0..4).filter(|&d| dest(d).is_some()).collect();
        if legal.is_empty() {
            return;
        }
        let d = legal[rng.gen_range(0..legal.len())];
        self.dir = d;
        self.pos = dest(d).unwrap();
    }
}

/// Generate an environment. Restarts the whole construction when the
/// corridor network comes out disconnected or a room cannot be given a
/// door, up to `retry_limit` attempts.
pub fn generate(params: &GenParams) -> Result<Environment, GenError> {
    validate(params)?;
    let n = (params.arena_size / params.cell_size).round() as usize;
    let start = (2, 2);
    let target = (n - 4, n - 4);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    for _ in 0..params.retry_limit {
        if let Some(grid) = try_generate(params, n, start, target, &mut rng) {
            debug_assert!(connectivity_check(&grid));
            return Ok(Environment::from_grid(grid));
        }
    }
    Err(GenError::RetryLimit(params.retry_limit))
}

fn validate(params: &GenParams) -> Result<(), GenError> {
    if !(params.cell_size > 0.0) || !params.cell_size.is_finite() {
        return Err(GenError::BadParams(format!(
            "cell_size must be positive, got {}",
            params.cell_size
        )));
    }
    let n = (params.arena_size / params.cell_size).round();
    if !(10.0..=400.0).contains(&n) {
        return Err(GenError::BadParams(format!(
            "arena must span 10..=400 cells, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&params.p_straight) {
        return Err(GenError::BadParams(format!(
            "p_straight must lie in [0, 1], got {}",
            params.p_straight
        )));
    }
    if !(params.corridor_density > 0.0 && params.corridor_density <= 0.8) {
        return Err(GenError::BadParams(format!(
            "corridor_density must lie in (0, 0.8], got {}",
            params.corridor_density
        )));
    }
    if params.room_split_max < 2 {
        return Err(GenError::BadParams(
            "room_split_max must be at least 2".into(),
        ));
    }
    if params.door_spacing == 0 {
        return Err(GenError::BadParams(
            "door_spacing must be at least 1".into(),
        ));
    }
    if params.retry_limit == 0 {
        return Err(GenError::BadParams("retry_limit must be positive".into()));
    }
    Ok(())
}

fn try_generate(
    params: &GenParams,
    n: usize,
    start: (usize, usize),
    target: (usize, usize),
    rng: &mut ChaCha8Rng,
) -> Option<GridMap> {
    let mut grid = GridMap::new_open(n, n, params.cell_size, start, target);

    // (a, b) Corridor-carving walk from both endpoints.
    let mut count = 0usize;
    let mark = |g: &mut GridMap, p: (usize, usize), count: &mut usize| {
        if g.cell(p.0, p.1) != Cell::Corridor {
            g.set_cell(p.0, p.1, Cell::Corridor);
            *count += 1;
        }
    };
    let mut wa = Walker {
        pos: start,
        dir: rng.gen_range(0..4),
    };
    let mut wb = Walker {
        pos: target,
        dir: rng.gen_range(0..4),
    };
    mark(&mut grid, wa.pos, &mut count);
    mark(&mut grid, wb.pos, &mut count);

    // (c) Walk until corridor cells / total cells >= corridor_density,
    // checking after each pair of steps.
    let total = n * n;
    let need = (params.corridor_density * total as f64).ceil() as usize;
    let mut guard = 0usize;
    while count < need {
        wa.step(&grid, params.p_straight, rng);
        mark(&mut grid, wa.pos, &mut count);
        wb.step(&grid, params.p_straight, rng);
        mark(&mut grid, wb.pos, &mut count);
        guard += 1;
        if guard > 200_000 {
            return None;
        }
    }

    // Corridor network must already connect start to target.
    if !corridor_connected(&grid) {
        return None;
    }

    // (d) Walls envelop the corridors (8-neighborhood).
    let snapshot = grid.clone();
    for r in 0..n {
        for c in 0..n {
            if snapshot.cell(c, r) != Cell::Free {
                continue;
            }
            let mut near_corridor = false;
            'scan: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                    if cc >= 0
                        && rr >= 0
                        && (cc as usize) < n
                        && (rr as usize) < n
                        && snapshot.cell(cc as usize, rr as usize) == Cell::Corridor
                    {
                        near_corridor = true;
                        break 'scan;
                    }
                }
            }
            if near_corridor {
                grid.set_cell(c, r, Cell::Wall);
            }
        }
    }

    // (e) Remaining free pockets become rooms, split while oversized.
    let regions = free_regions(&grid);
    let mut final_regions = Vec::new();
    for region in regions {
        split_region(&mut grid, region, params.room_split_max, &mut final_regions);
    }
    for region in &final_regions {
        for &(c, r) in region {
            grid.set_cell(c, r, Cell::Room);
        }
    }

    // (f) Openings along each shared room/corridor wall run.
    for region in &final_regions {
        if !punch_doors(&mut grid, region, params.door_spacing, rng) {
            return None;
        }
    }

    // Clear a pocket around the target so the goal sits away from walls.
    let (tc, tr) = target;
    for dr in -2i64..=2 {
        for dc in -2i64..=2 {
            let (c, r) = (tc as i64 + dc, tr as i64 + dr);
            if c >= 1 && r >= 1 && (c as usize) < n - 1 && (r as usize) < n - 1 {
                if grid.cell(c as usize, r as usize) == Cell::Wall {
                    grid.set_cell(c as usize, r as usize, Cell::Room);
                }
            }
        }
    }

    if !connectivity_check(&grid) {
        return None;
    }
    Some(grid)
}

/// Flood fill over corridor cells only (4-connected).
fn corridor_connected(grid: &GridMap) -> bool {
    flood_reaches(grid, |c| c == Cell::Corridor)
}

/// True iff a 4-connected flood fill over non-Wall cells connects the
/// start cell to the target cell.
pub fn connectivity_check(grid: &GridMap) -> bool {
    flood_reaches(grid, |c| c != Cell::Wall)
}

fn flood_reaches(grid: &GridMap, passable: impl Fn(Cell) -> bool) -> bool {
    let (sc, sr) = grid.start;
    let (tc, tr) = grid.target;
    if !passable(grid.cell(sc, sr)) || !passable(grid.cell(tc, tr)) {
        return false;
    }
    let mut seen = vec![false; grid.width * grid.height];
    let mut stack = vec![grid.start];
    seen[grid.idx(sc, sr)] = true;
    while let Some((c, r)) = stack.pop() {
        if (c, r) == (tc, tr) {
            return true;
        }
        for (nc, nr) in grid.neighbors4(c, r) {
            let i = grid.idx(nc, nr);
            if !seen[i] && passable(grid.cell(nc, nr)) {
                seen[i] = true;
                stack.push((nc, nr));
            }
        }
    }
    false
}

/// Connected components (4-connected) of Free cells, row-major order.
fn free_regions(grid: &GridMap) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; grid.width * grid.height];
    let mut out = Vec::new();
    for r in 0..grid.height {
        for c in 0..grid.width {
            if grid.cell(c, r) != Cell::Free || seen[grid.idx(c, r)] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![(c, r)];
            seen[grid.idx(c, r)] = true;
            while let Some((cc, rr)) = stack.pop() {
                comp.push((cc, rr));
                for (nc, nr) in grid.neighbors4(cc, rr) {
                    let i = grid.idx(nc, nr);
                    if !seen[i] && grid.cell(nc, nr) == Cell::Free {
                        seen[i] = true;
                        stack.push((nc, nr));
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
    }
    out
}

/// A region can host a door iff some wall cell touches both the region
/// and a corridor (4-adjacency on both sides).
fn has_door_site(grid: &GridMap, region: &[(usize, usize)]) -> bool {
    region.iter().any(|&(c, r)| {
        grid.neighbors4(c, r).any(|(wc, wr)| {
            grid.cell(wc, wr) == Cell::Wall
                && grid
                    .neighbors4(wc, wr)
                    .any(|(qc, qr)| grid.cell(qc, qr) == Cell::Corridor)
        })
    })
}

/// Recursively split an oversized free region with one-cell wall lines.
/// A split is taken only if every resulting part can still host a door;
/// otherwise the region is kept as-is.
fn split_region(
    grid: &mut GridMap,
    region: Vec<(usize, usize)>,
    split_max: usize,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let (min_c, max_c, min_r, max_r) = bbox(&region);
    let span_c = max_c - min_c + 1;
    let span_r = max_r - min_r + 1;
    if span_c <= split_max && span_r <= split_max {
        out.push(region);
        return;
    }
    let split_cols = span_c >= span_r;
    let (lo, hi) = if split_cols { (min_c, max_c) } else { (min_r, max_r) };
    let mid = (lo + hi) / 2;
    // Candidate lines ordered middle-out.
    let mut candidates: Vec<usize> = (lo + 1..hi).collect();
    candidates.sort_by_key(|&p| ((p as i64 - mid as i64).abs(), p));

    for p in candidates {
        let coord = |cell: &(usize, usize)| if split_cols { cell.0 } else { cell.1 };
        let line: Vec<(usize, usize)> =
            region.iter().copied().filter(|c| coord(c) == p).collect();
        let below: Vec<(usize, usize)> =
            region.iter().copied().filter(|c| coord(c) < p).collect();
        let above: Vec<(usize, usize)> =
            region.iter().copied().filter(|c| coord(c) > p).collect();
        if below.is_empty() || above.is_empty() {
            continue;
        }
        let parts = components_of(grid, &below, &above);
        if line.is_empty() && parts.len() < 2 {
            continue;
        }
        if !parts.iter().all(|part| has_door_site(grid, part)) {
            continue;
        }
        for &(c, r) in &line {
            grid.set_cell(c, r, Cell::Wall);
        }
        for part in parts {
            split_region(grid, part, split_max, out);
        }
        return;
    }
    out.push(region);
}

fn bbox(region: &[(usize, usize)]) -> (usize, usize, usize, usize) {
    let mut it = region.iter();
    let &(c0, r0) = it.next().expect("regions are non-empty");
    region.iter().fold((c0, c0, r0, r0), |acc, &(c, r)| {
        (acc.0.min(c), acc.1.max(c), acc.2.min(r), acc.3.max(r))
    })
}

/// 4-connected components of the union of two cell lists.
fn components_of(
    grid: &GridMap,
    a: &[(usize, usize)],
    b: &[(usize, usize)],
) -> Vec<Vec<(usize, usize)>> {
    let mut member = vec![false; grid.width * grid.height];
    for &(c, r) in a.iter().chain(b) {
        member[grid.idx(c, r)] = true;
    }
    let mut seen = vec![false; grid.width * grid.height];
    let mut out = Vec::new();
    let mut cells: Vec<(usize, usize)> = a.iter().chain(b).copied().collect();
    cells.sort_unstable();
    for &(c, r) in &cells {
        if seen[grid.idx(c, r)] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![(c, r)];
        seen[grid.idx(c, r)] = true;
        while let Some((cc, rr)) = stack.pop() {
            comp.push((cc, rr));
            for (nc, nr) in grid.neighbors4(cc, rr) {
                let i = grid.idx(nc, nr);
                if member[i] && !seen[i] {
                    seen[i] = true;
                    stack.push((nc, nr));
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Open doors along each maximal run of wall cells shared between this
/// region and a corridor: one per `spacing` cells of run, at least one.
/// Wall cells with a region cell on one side and a corridor cell
/// directly opposite are preferred; corner-adjacent sites are the
/// fallback. Returns false if the region cannot get a door.
fn punch_doors(
    grid: &mut GridMap,
    region: &[(usize, usize)],
    spacing: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut strict = Vec::new();
    let mut relaxed = Vec::new();
    let mut wall_seen = vec![false; grid.width * grid.height];
    for &(c, r) in region {
        for (wc, wr) in grid.neighbors4(c, r) {
            if grid.cell(wc, wr) != Cell::Wall || wall_seen[grid.idx(wc, wr)] {
                continue;
            }
            wall_seen[grid.idx(wc, wr)] = true;
            let opposite = {
                let (dc, dr) = (wc as i64 - c as i64, wr as i64 - r as i64);
                let (oc, or) = (wc as i64 + dc, wr as i64 + dr);
                oc >= 0
                    && or >= 0
                    && (oc as usize) < grid.width
                    && (or as usize) < grid.height
                    && grid.cell(oc as usize, or as usize) == Cell::Corridor
            };
            let touches_corridor = grid
                .neighbors4(wc, wr)
                .any(|(qc, qr)| grid.cell(qc, qr) == Cell::Corridor);
            if opposite {
                strict.push((wc, wr));
            } else if touches_corridor {
                relaxed.push((wc, wr));
            }
        }
    }
    // Keep determinism: candidate order is scan order over the sorted
    // region, de-duplicated by wall_seen.
    let candidates = if !strict.is_empty() { strict } else { relaxed };
    if candidates.is_empty() {
        return false;
    }
    for group in group_4connected(&candidates) {
        let want = (group.len() / spacing).max(1);
        // Partial Fisher-Yates: the first `want` slots end up a uniform
        // sample without replacement, picked in a stable order.
        let mut order: Vec<usize> = (0..group.len()).collect();
        for i in 0..want.min(group.len()) {
            let j = rng.gen_range(i..order.len());
            order.swap(i, j);
            let (c, r) = group[order[i]];
            grid.set_cell(c, r, Cell::Room);
        }
    }
    true
}

/// Group cells into 4-connected clusters, each sorted, clusters ordered
/// by their smallest cell.
fn group_4connected(cells: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut sorted: Vec<(usize, usize)> = cells.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut used = vec![false; sorted.len()];
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        if used[i] {
            continue;
        }
        let mut comp = vec![sorted[i]];
        used[i] = true;
        let mut k = 0;
        while k < comp.len() {
            let (c, r) = comp[k];
            k += 1;
            for (dc, dr) in DIRS {
                let cand = ((c as i64 + dc), (r as i64 + dr));
                if cand.0 < 0 || cand.1 < 0 {
                    continue;
                }
                let cand = (cand.0 as usize, cand.1 as usize);
                if let Ok(j) = sorted.binary_search(&cand) {
                    if !used[j] {
                        used[j] = true;
                        comp.push(cand);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by_key(|g| g[0]);
    out
}

/// Convert wall cells to boundary segments between wall and non-wall
/// cells, merging collinear contiguous faces. Out-of-grid counts as wall,
/// so only interior faces are emitted. Deterministic order.
pub fn grid_to_segments(grid: &GridMap) -> Vec<Segment> {
    let s = grid.cell_size;
    let mut vertical: Vec<(usize, usize)> = Vec::new(); // (x_line, row)
    let mut horizontal: Vec<(usize, usize)> = Vec::new(); // (y_line, col)
    for r in 0..grid.height {
        for c in 0..grid.width {
            if grid.cell(c, r) != Cell::Wall {
                continue;
            }
            if c + 1 < grid.width && grid.cell(c + 1, r) != Cell::Wall {
                vertical.push((c + 1, r));
            }
            if c > 0 && grid.cell(c - 1, r) != Cell::Wall {
                vertical.push((c, r));
            }
            if r + 1 < grid.height && grid.cell(c, r + 1) != Cell::Wall {
                horizontal.push((r + 1, c));
            }
            if r > 0 && grid.cell(c, r - 1) != Cell::Wall {
                horizontal.push((r, c));
            }
        }
    }
    let mut out = Vec::new();
    for (faces, is_vertical) in [(&mut vertical, true), (&mut horizontal, false)] {
        faces.sort_unstable();
        faces.dedup();
        let mut i = 0;
        while i < faces.len() {
            let (line, span_start) = faces[i];
            let mut span_end = span_start;
            while i + 1 < faces.len() && faces[i + 1] == (line, span_end + 1) {
                span_end += 1;
                i += 1;
            }
            i += 1;
            let (a, b) = if is_vertical {
                (
                    Vec2::new(line as f64 * s, span_start as f64 * s),
                    Vec2::new(line as f64 * s, (span_end + 1) as f64 * s),
                )
            } else {
                (
                    Vec2::new(span_start as f64 * s, line as f64 * s),
                    Vec2::new((span_end + 1) as f64 * s, line as f64 * s),
                )
            };
            out.push(Segment::new(a, b));
        }
    }
    out
}

/// Error from parsing the environment text format.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn perr(line: usize, col: usize, msg: impl fmt::Display) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.to_string(),
    }
}

/// Serialize a grid to the `bugnav-env v1` text format.
pub fn format_env(grid: &GridMap) -> String {
    let mut out = format!(
        "bugnav-env v1 {} {} {}\n",
        grid.width, grid.height, grid.cell_size
    );
    for r in 0..grid.height {
        for c in 0..grid.width {
            let ch = if (c, r) == grid.start {
                'S'
            } else if (c, r) == grid.target {
                'T'
            } else {
                match grid.cell(c, r) {
                    Cell::Wall => '#',
                    Cell::Free => '.',
                    Cell::Corridor => 'c',
                    Cell::Room => 'r',
                }
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

/// Parse the `bugnav-env v1` text format. Start/target map to corridor
/// cells. Errors carry 1-based line/column positions.
pub fn parse_env(text: &str) -> Result<GridMap, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr(1, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "bugnav-env" || fields[1] != "v1" {
        return Err(perr(
            1,
            1,
            "header must be 'bugnav-env v1 <width> <height> <cell_size>'",
        ));
    }
    let width: usize = fields[2]
        .parse()
        .map_err(|_| perr(1, 1, format!("bad width '{}'", fields[2])))?;
    let height: usize = fields[3]
        .parse()
        .map_err(|_| perr(1, 1, format!("bad height '{}'", fields[3])))?;
    let cell_size: f64 = fields[4]
        .parse()
        .map_err(|_| perr(1, 1, format!("bad cell_size '{}'", fields[4])))?;
    if width < 3 || height < 3 {
        return Err(perr(1, 1, "grid must be at least 3x3"));
    }
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return Err(perr(1, 1, format!("cell_size must be positive, got {cell_size}")));
    }

    let mut cells = vec![Cell::Free; width * height];
    let mut start = None;
    let mut target = None;
    let mut rows = 0usize;
    for (r, row) in lines.enumerate() {
        if r >= height {
            if row.is_empty() {
                continue; // tolerate one trailing blank line
            }
            return Err(perr(r + 2, 1, format!("expected {height} rows")));
        }
        let mut cols = 0usize;
        for (c, ch) in row.chars().enumerate() {
            if c >= width {
                return Err(perr(r + 2, c + 1, format!("row longer than {width} cells")));
            }
            let cell = match ch {
                '#' => Cell::Wall,
                '.' => Cell::Free,
                'c' => Cell::Corridor,
                'r' => Cell::Room,
                'S' => {
                    if start.replace((c, r)).is_some() {
                        return Err(perr(r + 2, c + 1, "duplicate start cell 'S'"));
                    }
                    Cell::Corridor
                }
                'T' => {
                    if target.replace((c, r)).is_some() {
                        return Err(perr(r + 2, c + 1, "duplicate target cell 'T'"));
                    }
                    Cell::Corridor
                }
                other => return Err(perr(r + 2, c + 1, format!("unknown cell character '{other}'"))),
            };
            cells[r * width + c] = cell;
            cols += 1;
        }
        if cols != width {
            return Err(perr(r + 2, cols + 1, format!("row has {cols} cells, expected {width}")));
        }
        rows += 1;
    }
    if rows != height {
        return Err(perr(rows + 2, 1, format!("file has {rows} rows, expected {height}")));
    }
    let start = start.ok_or_else(|| perr(rows + 1, 1, "missing start cell 'S'"))?;
    let target = target.ok_or_else(|| perr(rows + 1, 1, "missing target cell 'T'"))?;
    let grid = GridMap {
        width,
        height,
        cell_size,
        cells,
        start,
        target,
    };
    for c in 0..width {
        for r in [0, height - 1] {
            if grid.cell(c, r) != Cell::Wall {
                return Err(perr(r + 2, c + 1, "outer boundary must be wall"));
            }
        }
    }
    for r in 0..height {
        for c in [0, width - 1] {
            if grid.cell(c, r) != Cell::Wall {
                return Err(perr(r + 2, c + 1, "outer boundary must be wall"));
            }
        }
    }
    Ok(grid)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

/// Write an environment's grid to a file in the text format.
pub fn save_env(env: &Environment, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_env(&env.grid))
}

/// Load an environment from the text format.
pub fn load_env(path: &Path) -> Result<Environment, LoadError> {
    let text = std::fs::read_to_string(path)?;
    Ok(Environment::from_grid(parse_env(&text)?))
}
