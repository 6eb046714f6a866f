//! Synthetic frame stacks and the pixel-level extraction pipeline.
//!
//! Frames are 8-bit grayscale. Frame 0 is the conditioning image: the board,
//! the goal sprite and a small agent pose on the start cell. Later frames draw
//! the full agent sprite moving along the trajectory, an idle-animated goal and
//! any cheat artefacts. Everything downstream (motion energy, tracking, cell
//! mapping) reads pixels only; the per-frame annotations in [`FrameMeta`] exist
//! for tests.

use std::fs;
use std::io::{self, Write as _};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::maze::{Cell, GridMaze};
use crate::simgen::{Cheat, IntermediatePrediction};
use crate::{Error, Result};

pub const MARGIN_INTENSITY: u8 = 0;
pub const ICE_INTENSITY: u8 = 170;
pub const LAKE_INTENSITY: u8 = 70;
pub const AGENT_INTENSITY: u8 = 255;
/// Conditioning-frame pose; close enough to ice that its ghost stays below threshold.
pub const POSE_INTENSITY: u8 = 215;
/// Goal idle animation alternates between these two keys.
pub const GOAL_INTENSITY_A: u8 = 100;
pub const GOAL_INTENSITY_B: u8 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub cell_px: usize,
    pub margin_px: usize,
    /// Side of the moving agent sprite.
    pub agent_px: usize,
    /// Side of the agent pose in the conditioning frame.
    pub pose_px: usize,
    pub goal_px: usize,
    pub frames: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            cell_px: 24,
            margin_px: 8,
            agent_px: 10,
            pose_px: 6,
            goal_px: 6,
            frames: 25,
        }
    }
}

impl RenderOptions {
    /// Smallest frame count that samples every cell of an `moves`-move route
    /// at any pace.
    pub fn frames_for_moves(moves: usize) -> usize {
        2 * moves + 4
    }
}

/// Background-difference tracking parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackParams {
    pub intensity_threshold: u8,
    pub min_area: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            intensity_threshold: 60,
            min_area: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoardGeometry {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub grid: usize,
}

impl BoardGeometry {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, grid: usize) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min) || grid == 0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate board geometry ({x_min},{y_min})-({x_max},{y_max}) with grid {grid}"
            )));
        }
        Ok(BoardGeometry {
            x_min,
            y_min,
            x_max,
            y_max,
            grid,
        })
    }

    pub fn w_cell(&self) -> f64 {
        (self.x_max - self.x_min) / self.grid as f64
    }

    pub fn h_cell(&self) -> f64 {
        (self.y_max - self.y_min) / self.grid as f64
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            self.x_min + (c.col as f64 + 0.5) * self.w_cell(),
            self.y_min + (c.row as f64 + 0.5) * self.h_cell(),
        )
    }
}

/// Floor the centroid into a cell index and clamp to the grid.
pub fn centroid_to_cell(c: (f64, f64), geom: &BoardGeometry) -> Cell {
    let max = geom.grid as i64 - 1;
    let col = ((c.0 - geom.x_min) / geom.w_cell()).floor() as i64;
    let row = ((c.1 - geom.y_min) / geom.h_cell()).floor() as i64;
    Cell::new(row.clamp(0, max) as usize, col.clamp(0, max) as usize)
}

/// What a generated video shows: the agent route plus cheat artefacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub trajectory: Vec<Cell>,
    /// Relative dwell per trajectory cell; `None` walks at constant speed.
    #[serde(default)]
    pub pace: Option<Vec<f64>>,
    /// Goal sprite relocates here halfway through the video.
    pub goal_drift: Option<Cell>,
    /// A second agent appears halfway and walks this fragment.
    pub spawn: Option<Vec<Cell>>,
}

impl Scene {
    pub fn plain(trajectory: Vec<Cell>) -> Self {
        Scene {
            trajectory,
            pace: None,
            goal_drift: None,
            spawn: None,
        }
    }

    pub fn from_prediction(pred: &IntermediatePrediction, maze: &GridMaze) -> Self {
        let (goal_drift, spawn) = match pred.cheat {
            Cheat::None => (None, None),
            Cheat::GoalDrift { new_goal } => (Some(new_goal), None),
            Cheat::AgentSpawn { spawn } => (None, Some(vec![spawn, maze.goal()])),
        };
        Scene {
            trajectory: pred.trajectory.clone(),
            pace: Some(pred.pace.clone()),
            goal_drift,
            spawn,
        }
    }
}

/// Ground-truth annotations per frame, kept for tests.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FrameMeta {
    pub goal_cells: Vec<Cell>,
    pub agent_cells: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameStack {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<u8>>,
    pub geometry: BoardGeometry,
    /// Goal cell of the conditioning maze (known to the verifier).
    pub goal: Cell,
    pub meta: FrameMeta,
}

impl FrameStack {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Write one binary PGM per frame into `dir`.
    pub fn write_pgm_sequence(&self, dir: &FsPath, prefix: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (i, frame) in self.frames.iter().enumerate() {
            let mut f = fs::File::create(dir.join(format!("{prefix}{i:04}.pgm")))?;
            write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
            f.write_all(frame)?;
        }
        Ok(())
    }
}

struct Canvas<'a> {
    px: &'a mut [u8],
    width: usize,
    height: usize,
}

impl Canvas<'_> {
    fn square(&mut self, center: (f64, f64), side: usize, value: u8) {
        let half = side as f64 / 2.0;
        let x0 = (center.0 - half).round() as i64;
        let y0 = (center.1 - half).round() as i64;
        let xs = x0.max(0) as usize..((x0 + side as i64).max(0) as usize).min(self.width);
        for y in y0.max(0)..(y0 + side as i64).min(self.height as i64) {
            let row = y as usize * self.width;
            self.px[row + xs.start..row + xs.end].fill(value);
        }
    }
}

/// Sprite centre at `progress` in [0, 1] along `cells`.
///
/// Each move takes one time unit. With a pace, the agent also holds on cell
/// `i` for a time proportional to `pace[i]`, the holds summing to
/// `cells.len()` units.
fn lerp_route(geom: &BoardGeometry, cells: &[Cell], pace: Option<&[f64]>, progress: f64) -> (f64, f64) {
    let moves = cells.len() - 1;
    if moves == 0 {
        return geom.cell_center(cells[0]);
    }
    let holds: Vec<f64> = match pace {
        Some(p) if p.len() == cells.len() && p.iter().sum::<f64>() > 0.0 => {
            let scale = cells.len() as f64 / p.iter().sum::<f64>();
            p.iter().map(|w| w.max(0.0) * scale).collect()
        }
        _ => vec![0.0; cells.len()],
    };
    let total = holds.iter().sum::<f64>() + moves as f64;
    let mut s = progress.clamp(0.0, 1.0) * total;
    for i in 0..moves {
        if s <= holds[i] {
            return geom.cell_center(cells[i]);
        }
        s -= holds[i];
        if s < 1.0 {
            let a = geom.cell_center(cells[i]);
            let b = geom.cell_center(cells[i + 1]);
            return (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s);
        }
        s -= 1.0;
    }
    geom.cell_center(cells[moves])
}

/// Render `scene` on `maze` into `frames` frames.
///
/// Frame 0 is the conditioning image. Frames 1.. sample the trajectory
/// timeline evenly, reaching its last cell on the final frame;
/// [`RenderOptions::frames_for_moves`] frames show every cell at least once.
pub fn rasterize(
    maze: &GridMaze,
    scene: &Scene,
    frames: usize,
    opts: &RenderOptions,
) -> Result<FrameStack> {
    if frames < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 frames, got {frames}")));
    }
    if scene.trajectory.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let size = maze.size();
    let extra = scene.goal_drift.iter().chain(scene.spawn.iter().flatten());
    for &c in scene.trajectory.iter().chain(extra) {
        if !maze.contains(c) {
            return Err(Error::OutOfGrid {
                row: c.row,
                col: c.col,
                size,
            });
        }
    }
    if scene.spawn.as_ref().is_some_and(|s| s.is_empty()) {
        return Err(Error::InvalidArgument("empty spawn fragment".into()));
    }

    let board_px = size * opts.cell_px;
    let width = board_px + 2 * opts.margin_px;
    let height = width;
    let m = opts.margin_px as f64;
    let geometry = BoardGeometry::new(m, m, m + board_px as f64, m + board_px as f64, size)?;

    let mut board = vec![MARGIN_INTENSITY; width * height];
    for c in maze.cells() {
        let value = if maze.is_obstacle(c) {
            LAKE_INTENSITY
        } else {
            ICE_INTENSITY
        };
        let x0 = opts.margin_px + c.col * opts.cell_px;
        let y0 = opts.margin_px + c.row * opts.cell_px;
        for y in y0..y0 + opts.cell_px {
            board[y * width + x0..y * width + x0 + opts.cell_px].fill(value);
        }
    }

    let half = frames / 2;
    let mut out = Vec::with_capacity(frames);
    let mut meta = FrameMeta::default();
    for f in 0..frames {
        let mut px = board.clone();
        let mut canvas = Canvas {
            px: &mut px,
            width,
            height,
        };
        let goal_cell = match scene.goal_drift {
            Some(g) if f > 0 && f >= half => g,
            _ => maze.goal(),
        };
        let goal_value = if f % 2 == 1 {
            GOAL_INTENSITY_B
        } else {
            GOAL_INTENSITY_A
        };
        canvas.square(geometry.cell_center(goal_cell), opts.goal_px, goal_value);

        let mut agents = Vec::new();
        if f == 0 {
            let start = maze.start();
            canvas.square(geometry.cell_center(start), opts.pose_px, POSE_INTENSITY);
            agents.push(start);
        } else {
            let progress = if frames > 2 {
                (f - 1) as f64 / (frames - 2) as f64
            } else {
                1.0
            };
            let pos = lerp_route(&geometry, &scene.trajectory, scene.pace.as_deref(), progress);
            canvas.square(pos, opts.agent_px, AGENT_INTENSITY);
            agents.push(centroid_to_cell(pos, &geometry));
            if let Some(fragment) = scene.spawn.as_ref().filter(|_| f >= half) {
                let span = (frames - 1 - half).max(1) as f64;
                let pos = lerp_route(&geometry, fragment, None, (f - half) as f64 / span);
                canvas.square(pos, opts.agent_px, AGENT_INTENSITY);
                agents.push(centroid_to_cell(pos, &geometry));
            }
        }
        meta.goal_cells.push(goal_cell);
        meta.agent_cells.push(agents);
        out.push(px);
    }

    Ok(FrameStack {
        width,
        height,
        frames: out,
        geometry,
        goal: maze.goal(),
        meta,
    })
}

/// Per-cell motion energy: G x G non-negative counts, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyMap {
    pub size: usize,
    pub values: Vec<f64>,
}

impl EnergyMap {
    pub fn zeros(size: usize) -> Self {
        EnergyMap {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "energy map needs size*size non-negative entries".into(),
            ));
        }
        Ok(EnergyMap { size, values })
    }

    pub fn get(&self, c: Cell) -> f64 {
        self.values[c.row * self.size + c.col]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn support(&self) -> Vec<Cell> {
        (0..self.values.len())
            .filter(|&i| self.values[i] > 0.0)
            .map(|i| Cell::new(i / self.size, i % self.size))
            .collect()
    }

    /// Row-major CSV, one grid row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.values.chunks(self.size) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Pixel → cell lookup tables for the board region.
struct CellIndex {
    col_of_x: Vec<Option<usize>>,
    row_of_y: Vec<Option<usize>>,
}

impl CellIndex {
    fn new(fs: &FrameStack) -> Self {
        let g = &fs.geometry;
        let inside = |v: f64, lo: f64, hi: f64| v >= lo && v < hi;
        let col_of_x = (0..fs.width)
            .map(|x| {
                let cx = x as f64 + 0.5;
                inside(cx, g.x_min, g.x_max).then(|| centroid_to_cell((cx, g.y_min), g).col)
            })
            .collect();
        let row_of_y = (0..fs.height)
            .map(|y| {
                let cy = y as f64 + 0.5;
                inside(cy, g.y_min, g.y_max).then(|| centroid_to_cell((g.x_min, cy), g).row)
            })
            .collect();
        CellIndex { col_of_x, row_of_y }
    }
}

/// Motion energy with the default deviation threshold of 60.
pub fn motion_energy(fs: &FrameStack, mask_goal: bool) -> EnergyMap {
    motion_energy_with(fs, mask_goal, TrackParams::default().intensity_threshold)
}

/// Count, per cell, the pixels across all frames deviating from frame 0 by
/// more than `threshold`.
pub fn motion_energy_with(fs: &FrameStack, mask_goal: bool, threshold: u8) -> EnergyMap {
    let size = fs.geometry.grid;
    let idx = CellIndex::new(fs);
    let mut counts = vec![0u64; size * size];
    let background = &fs.frames[0];
    for frame in &fs.frames[1..] {
        for (y, row_cell) in idx.row_of_y.iter().enumerate() {
            let Some(r) = row_cell else { continue };
            let base = y * fs.width;
            let bg = &background[base..base + fs.width];
            let px = &frame[base..base + fs.width];
            for x in 0..fs.width {
                if px[x].abs_diff(bg[x]) > threshold {
                    if let Some(c) = idx.col_of_x[x] {
                        counts[r * size + c] += 1;
                    }
                }
            }
        }
    }
    let mut map = EnergyMap {
        size,
        values: counts.into_iter().map(|c| c as f64).collect(),
    };
    if mask_goal {
        let g = fs.goal;
        map.values[g.row * size + g.col] = 0.0;
    }
    map
}

/// Tracking output for one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    /// Centroid of the largest qualifying component.
    pub centroid: Option<(f64, f64)>,
    /// Number of components with area >= `min_area`.
    pub qualifying: usize,
}

/// Largest-component centroid per frame, or `None` when nothing qualifies.
pub fn background_diff_track(fs: &FrameStack, params: TrackParams) -> Vec<Option<(f64, f64)>> {
    track_frames(fs, params).into_iter().map(|d| d.centroid).collect()
}

/// Difference against frame 0, threshold, 4-connected components, keep the
/// largest component of at least `min_area` pixels (first in scan order on ties).
pub fn track_frames(fs: &FrameStack, params: TrackParams) -> Vec<Detection> {
    let n = fs.width * fs.height;
    let w = fs.width;
    let mut fg = vec![0u32; n];
    let mut seen = vec![0u32; n];
    let mut stack = Vec::new();
    let background = &fs.frames[0];
    fs.frames
        .iter()
        .enumerate()
        .map(|(f, frame)| {
            let stamp = f as u32 + 1;
            let mut seeds = Vec::new();
            for i in 0..n {
                if frame[i].abs_diff(background[i]) > params.intensity_threshold {
                    fg[i] = stamp;
                    seeds.push(i);
                }
            }
            let mut best: Option<(usize, (f64, f64))> = None;
            let mut qualifying = 0;
            for &s in &seeds {
                if seen[s] == stamp {
                    continue;
                }
                seen[s] = stamp;
                stack.push(s);
                let (mut area, mut sx, mut sy) = (0usize, 0f64, 0f64);
                while let Some(i) = stack.pop() {
                    area += 1;
                    let (x, y) = (i % w, i / w);
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    let mut visit = |j: usize| {
                        if fg[j] == stamp && seen[j] != stamp {
                            seen[j] = stamp;
                            stack.push(j);
                        }
                    };
                    if x > 0 {
                        visit(i - 1);
                    }
                    if x + 1 < w {
                        visit(i + 1);
                    }
                    if y > 0 {
                        visit(i - w);
                    }
                    if i + w < n {
                        visit(i + w);
                    }
                }
                if area >= params.min_area {
                    qualifying += 1;
                    if best.is_none_or(|(a, _)| area > a) {
                        best = Some((area, (sx / area as f64, sy / area as f64)));
                    }
                }
            }
            Detection {
                centroid: best.map(|(_, c)| c),
                qualifying,
            }
        })
        .collect()
}

/// Cell holding the goal sprite in frame `f`, located by its colour keys.
pub fn locate_goal(fs: &FrameStack, f: usize) -> Option<Cell> {
    let frame = &fs.frames[f];
    let (mut n, mut sx, mut sy) = (0usize, 0f64, 0f64);
    for (i, &p) in frame.iter().enumerate() {
        if p == GOAL_INTENSITY_A || p == GOAL_INTENSITY_B {
            n += 1;
            sx += (i % fs.width) as f64 + 0.5;
            sy += (i / fs.width) as f64 + 0.5;
        }
    }
    (n > 0).then(|| centroid_to_cell((sx / n as f64, sy / n as f64), &fs.geometry))
}

/// Cell-level reading of a frame stack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    /// Visited cells with consecutive repeats collapsed.
    pub cells: Vec<Cell>,
    /// Agent cell estimate per frame (`None` where tracking found nothing).
    pub per_frame: Vec<Option<Cell>>,
    pub absent_frames: usize,
    /// Agent absent in more than half of the frames.
    pub tracking_failed: bool,
    /// Where the goal sprite ended up, if it left the conditioning goal cell.
    pub goal_drift: Option<Cell>,
    /// A second agent-sized component was present in at least two frames.
    pub extra_agent: bool,
}

pub fn extract_trajectory(fs: &FrameStack) -> Extraction {
    extract_trajectory_with(fs, TrackParams::default())
}

pub fn extract_trajectory_with(fs: &FrameStack, params: TrackParams) -> Extraction {
    let detections = track_frames(fs, params);
    let per_frame: Vec<Option<Cell>> = detections
        .iter()
        .map(|d| d.centroid.map(|c| centroid_to_cell(c, &fs.geometry)))
        .collect();
    let mut cells: Vec<Cell> = Vec::new();
    for c in per_frame.iter().flatten() {
        if cells.last() != Some(c) {
            cells.push(*c);
        }
    }
    let absent_frames = per_frame.iter().filter(|c| c.is_none()).count();
    let multi = detections.iter().filter(|d| d.qualifying >= 2).count();
    let goal_drift = (0..fs.frame_count())
        .rev()
        .find_map(|f| locate_goal(fs, f))
        .filter(|&g| g != fs.goal);
    Extraction {
        cells,
        tracking_failed: 2 * absent_frames > fs.frame_count(),
        absent_frames,
        per_frame,
        goal_drift,
        extra_agent: multi >= 2,
    }
}
