//! Grid mazes: generation, diagnostic families, BFS oracle and the JSON file format.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::seed::{self, tag};
use crate::{Error, Result};

/// Retry bound for rejection-sampled obstacle layouts.
pub const MAX_RETRIES: usize = 10_000;

/// Highest obstacle density accepted by [`generate_maze`].
pub const MAX_DENSITY: f64 = 0.85;

/// A grid position, serialised as `[row, col]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// In-grid 4-neighbours in the fixed order up, down, left, right.
    pub fn neighbors(self, size: usize) -> impl Iterator<Item = Cell> {
        let Cell { row, col } = self;
        let up = (row > 0).then(|| Cell::new(row - 1, col));
        let down = (row + 1 < size).then(|| Cell::new(row + 1, col));
        let left = (col > 0).then(|| Cell::new(row, col - 1));
        let right = (col + 1 < size).then(|| Cell::new(row, col + 1));
        [up, down, left, right].into_iter().flatten()
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        manhattan(self, other) == 1
    }
}

impl From<[usize; 2]> for Cell {
    fn from([row, col]: [usize; 2]) -> Self {
        Cell { row, col }
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.row, c.col]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

pub fn manhattan(a: Cell, b: Cell) -> usize {
    a.row.abs_diff(b.row) + a.col.abs_diff(b.col)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Goal at the far corner.
    Norm,
    /// Goal placed uniformly at random.
    Vary,
    Trivial,
    Decoy,
    LakeHeavy,
    Detour,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Norm => "norm",
            Variant::Vary => "vary",
            Variant::Trivial => "trivial",
            Variant::Decoy => "decoy",
            Variant::LakeHeavy => "lake_heavy",
            Variant::Detour => "detour",
        }
    }

    fn code(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diagnostic maze families isolating one failure cause each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Trivial,
    Decoy,
    LakeHeavy,
    Detour,
}

impl DiagnosticKind {
    pub const ALL: [DiagnosticKind; 4] = [
        DiagnosticKind::Trivial,
        DiagnosticKind::Decoy,
        DiagnosticKind::LakeHeavy,
        DiagnosticKind::Detour,
    ];

    pub fn variant(self) -> Variant {
        match self {
            DiagnosticKind::Trivial => Variant::Trivial,
            DiagnosticKind::Decoy => Variant::Decoy,
            DiagnosticKind::LakeHeavy => Variant::LakeHeavy,
            DiagnosticKind::Detour => Variant::Detour,
        }
    }
}

/// A square Frozen-Lake style maze. Obstacles ("lakes") are stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MazeRecord", try_from = "MazeRecord")]
pub struct GridMaze {
    size: usize,
    blocked: Vec<bool>,
    start: Cell,
    goal: Cell,
    variant: Variant,
    density: f64,
    seed: u64,
}

/// On-disk layout of a maze; field order is the canonical serialisation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct MazeRecord {
    size: usize,
    start: Cell,
    goal: Cell,
    obstacles: Vec<Cell>,
    variant: Variant,
    density: f64,
    seed: u64,
}

impl From<GridMaze> for MazeRecord {
    fn from(m: GridMaze) -> Self {
        MazeRecord {
            size: m.size,
            start: m.start,
            goal: m.goal,
            obstacles: m.obstacles().collect(),
            variant: m.variant,
            density: m.density,
            seed: m.seed,
        }
    }
}

impl TryFrom<MazeRecord> for GridMaze {
    type Error = Error;

    fn try_from(r: MazeRecord) -> Result<Self> {
        let mut maze = GridMaze::new(r.size, r.start, r.goal, &r.obstacles, r.variant)?;
        if r.obstacles.len() != maze.obstacle_count() {
            return Err(Error::InvalidMaze("duplicate obstacle entries".into()));
        }
        maze.density = r.density;
        maze.seed = r.seed;
        Ok(maze)
    }
}

impl GridMaze {
    /// Build a maze from explicit parts. Checks structure but not solvability.
    pub fn new(
        size: usize,
        start: Cell,
        goal: Cell,
        obstacles: &[Cell],
        variant: Variant,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidMaze("size must be positive".into()));
        }
        let mut blocked = vec![false; size * size];
        for &c in obstacles.iter().chain([&start, &goal]) {
            check_in_grid(c, size)?;
        }
        for &c in obstacles {
            blocked[c.row * size + c.col] = true;
        }
        let mut maze = GridMaze {
            size,
            blocked,
            start,
            goal,
            variant,
            density: 0.0,
            seed: 0,
        };
        maze.density = maze.obstacle_fraction();
        maze.check_structure()?;
        Ok(maze)
    }

    fn check_structure(&self) -> Result<()> {
        if self.start == self.goal {
            return Err(Error::InvalidMaze("start equals goal".into()));
        }
        if self.is_obstacle(self.start) {
            return Err(Error::InvalidMaze("start is an obstacle".into()));
        }
        if self.is_obstacle(self.goal) {
            return Err(Error::InvalidMaze("goal is an obstacle".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Requested (or, for explicit and diagnostic mazes, realised) density.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.size && c.col < self.size
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.contains(c) && self.blocked[c.row * self.size + c.col]
    }

    /// Free, in-grid cell.
    pub fn is_open(&self, c: Cell) -> bool {
        self.contains(c) && !self.blocked[c.row * self.size + c.col]
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Cell> + '_ {
        let size = self.size;
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Cell::new(i / size, i % size))
    }

    pub fn obstacle_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    /// Obstacles over the cells that could hold one (all but start and goal).
    pub fn obstacle_fraction(&self) -> f64 {
        let denom = (self.size * self.size).saturating_sub(2);
        if denom == 0 {
            0.0
        } else {
            self.obstacle_count() as f64 / denom as f64
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let size = self.size;
        (0..size * size).map(move |i| Cell::new(i / size, i % size))
    }

    pub fn index(&self, c: Cell) -> usize {
        c.row * self.size + c.col
    }

    /// Same layout with a new start cell (used when reconditioning on a pivot).
    pub fn with_start(&self, start: Cell) -> Result<Self> {
        check_in_grid(start, self.size)?;
        let mut m = self.clone();
        m.start = start;
        m.check_structure()?;
        Ok(m)
    }

    /// Stable 64-bit identifier of the layout (size, start, goal, obstacles).
    pub fn fingerprint(&self) -> u64 {
        let mut words = vec![
            self.size as u64,
            self.index(self.start) as u64,
            self.index(self.goal) as u64,
        ];
        words.extend(self.blocked.chunks(64).map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
        }));
        seed::derive(tag::MAZE, &words)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("maze serialisation cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_in_grid(c: Cell, size: usize) -> Result<()> {
    if c.row < size && c.col < size {
        Ok(())
    } else {
        Err(Error::OutOfGrid {
            row: c.row,
            col: c.col,
            size,
        })
    }
}

/// An ordered cell sequence; `moves` counts edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<Cell>,
}

impl Path {
    pub fn moves(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }
}

/// Obstacle-avoiding BFS distances from `from` (None = unreachable).
pub fn bfs_distances(maze: &GridMaze, from: Cell) -> Vec<Option<u32>> {
    let mut dist = vec![None; maze.size * maze.size];
    if !maze.is_open(from) {
        return dist;
    }
    let mut queue = VecDeque::from([from]);
    dist[maze.index(from)] = Some(0);
    while let Some(c) = queue.pop_front() {
        let d = dist[maze.index(c)].unwrap();
        for n in c.neighbors(maze.size) {
            let i = maze.index(n);
            if !maze.blocked[i] && dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Shortest 4-connected obstacle-free path from start to goal, or `None`.
///
/// Neighbours are expanded up, down, left, right; the first discovery wins,
/// which fixes one path among equal-length alternatives.
pub fn bfs_shortest_path(maze: &GridMaze) -> Option<Path> {
    let n = maze.size * maze.size;
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut seen = vec![false; n];
    let (start, goal) = (maze.start, maze.goal);
    if !maze.is_open(start) || !maze.is_open(goal) {
        return None;
    }
    seen[maze.index(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c == goal {
            let mut cells = vec![goal];
            let mut cur = goal;
            while let Some(p) = parent[maze.index(cur)] {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Some(Path { cells });
        }
        for nb in c.neighbors(maze.size) {
            let i = maze.index(nb);
            if !maze.blocked[i] && !seen[i] {
                seen[i] = true;
                parent[i] = Some(c);
                queue.push_back(nb);
            }
        }
    }
    None
}

/// Number of distinct shortest start→goal paths (saturating).
pub fn count_shortest_paths(maze: &GridMaze) -> u64 {
    let dist = bfs_distances(maze, maze.start);
    let Some(target) = dist[maze.index(maze.goal)] else {
        return 0;
    };
    let mut order: Vec<Cell> = maze
        .cells()
        .filter(|&c| dist[maze.index(c)].is_some_and(|d| d <= target))
        .collect();
    order.sort_by_key(|&c| dist[maze.index(c)]);
    let mut count = vec![0u64; maze.size * maze.size];
    count[maze.index(maze.start)] = 1;
    for c in order {
        let d = dist[maze.index(c)].unwrap();
        for nb in c.neighbors(maze.size) {
            if dist[maze.index(nb)] == Some(d + 1) {
                count[maze.index(nb)] = count[maze.index(nb)].saturating_add(count[maze.index(c)]);
            }
        }
    }
    count[maze.index(maze.goal)]
}

/// Uniformly rejection-sampled maze.
///
/// `norm` fixes start (0,0) and goal (G-1,G-1); `vary` draws the goal among
/// non-start cells before any obstacle is placed. The obstacle count is
/// `round(density * (G*G - 2))`.
pub fn generate_maze(size: usize, density: f64, variant: Variant, seed: u64) -> Result<GridMaze> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("maze size {size} < 2")));
    }
    if !(0.0..=MAX_DENSITY).contains(&density) {
        return Err(Error::InvalidArgument(format!(
            "density {density} outside [0, {MAX_DENSITY}]"
        )));
    }
    let mut rng = seed::rng(
        seed,
        &[tag::MAZE, size as u64, density.to_bits(), variant.code()],
    );
    let start = Cell::new(0, 0);
    let goal = match variant {
        Variant::Norm => Cell::new(size - 1, size - 1),
        Variant::Vary => {
            let i = rng.gen_range(1..size * size);
            Cell::new(i / size, i % size)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "variant {other} is produced by generate_diagnostic"
            )))
        }
    };
    let free: Vec<Cell> = (0..size * size)
        .map(|i| Cell::new(i / size, i % size))
        .filter(|&c| c != start && c != goal)
        .collect();
    let n_obstacles = (density * free.len() as f64).round() as usize;

    for _ in 0..MAX_RETRIES {
        let picks: Vec<Cell> = sample(&mut rng, free.len(), n_obstacles)
            .into_iter()
            .map(|i| free[i])
            .collect();
        let mut maze = GridMaze::new(size, start, goal, &picks, variant)?;
        maze.density = density;
        maze.seed = seed;
        if bfs_shortest_path(&maze).is_some() {
            return Ok(maze);
        }
    }
    Err(Error::GenerationFailed {
        retries: MAX_RETRIES,
        reason: format!("no solvable {size}x{size} layout at density {density}"),
    })
}

/// Diagnostic maze of the given family. Sizes 4 and 6 only.
pub fn generate_diagnostic(kind: DiagnosticKind, size: usize, seed: u64) -> Result<GridMaze> {
    if size != 4 && size != 6 {
        return Err(Error::InvalidArgument(format!(
            "diagnostic mazes come in sizes 4 and 6, got {size}"
        )));
    }
    let mut rng = seed::rng(seed, &[tag::DIAGNOSTIC, size as u64, kind.variant().code()]);
    for _ in 0..MAX_RETRIES {
        let attempt = match kind {
            DiagnosticKind::Trivial => trivial_layout(size, &mut rng),
            DiagnosticKind::Decoy => decoy_layout(size, &mut rng),
            DiagnosticKind::LakeHeavy => lake_heavy_layout(size, &mut rng),
            DiagnosticKind::Detour => detour_layout(size, &mut rng),
        };
        let Some((start, goal, obstacles)) = attempt else {
            continue;
        };
        let Ok(mut maze) = GridMaze::new(size, start, goal, &obstacles, kind.variant()) else {
            continue;
        };
        maze.seed = seed;
        if diagnostic_holds(kind, &maze) {
            return Ok(maze);
        }
    }
    Err(Error::GenerationFailed {
        retries: MAX_RETRIES,
        reason: format!("could not build a {kind:?} maze of size {size}"),
    })
}

/// Structural contract of each diagnostic family.
pub fn diagnostic_holds(kind: DiagnosticKind, maze: &GridMaze) -> bool {
    let Some(path) = bfs_shortest_path(maze) else {
        return false;
    };
    let moves = path.moves();
    let md = manhattan(maze.start, maze.goal);
    match kind {
        DiagnosticKind::Trivial => (1..=2).contains(&moves),
        DiagnosticKind::Decoy => md <= 2 && (4..=5).contains(&moves),
        DiagnosticKind::LakeHeavy => {
            maze.obstacle_fraction() > 0.75 && count_shortest_paths(maze) == 1
        }
        DiagnosticKind::Detour => md == 2 && moves == 2 * maze.size,
    }
}

type Layout = (Cell, Cell, Vec<Cell>);

fn random_cell(size: usize, rng: &mut seed::Rng) -> Cell {
    Cell::new(rng.gen_range(0..size), rng.gen_range(0..size))
}

fn jitter(size: usize, keep: &[Cell], p: f64, rng: &mut seed::Rng) -> Vec<Cell> {
    (0..size * size)
        .map(|i| Cell::new(i / size, i % size))
        .filter(|c| !keep.contains(c))
        .filter(|_| rng.gen_bool(p))
        .collect()
}

fn trivial_layout(size: usize, rng: &mut seed::Rng) -> Option<Layout> {
    let start = random_cell(size, rng);
    let near: Vec<Cell> = (0..size * size)
        .map(|i| Cell::new(i / size, i % size))
        .filter(|&c| (1..=2).contains(&manhattan(start, c)))
        .collect();
    let goal = near[rng.gen_range(0..near.len())];
    let obstacles = jitter(size, &[start, goal], 0.3, rng);
    Some((start, goal, obstacles))
}

fn decoy_layout(size: usize, rng: &mut seed::Rng) -> Option<Layout> {
    let start = random_cell(size, rng);
    let (dr, dc): (isize, isize) = [(0, 2), (0, -2), (2, 0), (-2, 0)][rng.gen_range(0..4)];
    let goal = offset(start, dr, dc, size)?;
    let middle = offset(start, dr / 2, dc / 2, size)?;
    let mut obstacles = jitter(size, &[start, goal, middle], 0.25, rng);
    obstacles.push(middle);
    Some((start, goal, obstacles))
}

fn lake_heavy_layout(size: usize, rng: &mut seed::Rng) -> Option<Layout> {
    let max_moves = if size == 4 { 4 } else { 7 };
    let target = rng.gen_range(3..=max_moves);
    let start = random_cell(size, rng);
    let mut corridor = vec![start];
    while corridor.len() <= target {
        let cur = *corridor.last().unwrap();
        // Induced path: a new cell touches no corridor cell but its predecessor.
        let options: Vec<Cell> = cur
            .neighbors(size)
            .filter(|n| !corridor.contains(n))
            .filter(|n| {
                n.neighbors(size)
                    .all(|m| m == cur || !corridor.contains(&m))
            })
            .collect();
        if options.is_empty() {
            return None;
        }
        corridor.push(options[rng.gen_range(0..options.len())]);
    }
    let goal = *corridor.last().unwrap();
    let mut open = corridor.clone();
    if rng.gen_bool(0.5) {
        // One dead-end spur off an interior corridor cell.
        let spurs: Vec<Cell> = (0..size * size)
            .map(|i| Cell::new(i / size, i % size))
            .filter(|c| !open.contains(c))
            .filter(|c| c.neighbors(size).filter(|n| open.contains(n)).count() == 1)
            .collect();
        if !spurs.is_empty() {
            open.push(spurs[rng.gen_range(0..spurs.len())]);
        }
    }
    let obstacles = (0..size * size)
        .map(|i| Cell::new(i / size, i % size))
        .filter(|c| !open.contains(c))
        .collect();
    Some((start, goal, obstacles))
}

fn detour_layout(size: usize, rng: &mut seed::Rng) -> Option<Layout> {
    // Canonical frame: start (0,c), goal (0,c+2), a lake wall down column c+1
    // leaving only the bottom row open, so the route is 2*size moves long.
    let c = rng.gen_range(0..=size - 3);
    let start = Cell::new(0, c);
    let goal = Cell::new(0, c + 2);
    let wall: Vec<Cell> = (0..size - 1).map(|r| Cell::new(r, c + 1)).collect();
    let mut route: Vec<Cell> = (0..size).map(|r| Cell::new(r, c)).collect();
    route.push(Cell::new(size - 1, c + 1));
    route.extend((0..size).rev().map(|r| Cell::new(r, c + 2)));
    let keep: Vec<Cell> = route.iter().chain(&wall).copied().collect();
    let mut obstacles = jitter(size, &keep, 0.25, rng);
    obstacles.extend(wall);
    let sym = rng.gen_range(0..8);
    let t = |cell: Cell| dihedral(cell, size, sym);
    Some((t(start), t(goal), obstacles.into_iter().map(t).collect()))
}

fn offset(c: Cell, dr: isize, dc: isize, size: usize) -> Option<Cell> {
    let r = c.row as isize + dr;
    let col = c.col as isize + dc;
    (r >= 0 && col >= 0 && (r as usize) < size && (col as usize) < size)
        .then(|| Cell::new(r as usize, col as usize))
}

/// One of the eight symmetries of the square grid.
fn dihedral(c: Cell, size: usize, k: u32) -> Cell {
    let m = size - 1;
    let (r, col) = if k & 4 != 0 { (c.col, c.row) } else { (c.row, c.col) };
    let r = if k & 1 != 0 { m - r } else { r };
    let col = if k & 2 != 0 { m - col } else { col };
    Cell::new(r, col)
}
