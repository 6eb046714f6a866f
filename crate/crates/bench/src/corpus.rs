//! Deterministic maze corpora.

use std::path::Path;

use planlab::maze::{bfs_distances, generate_maze};
use planlab::seed;
use planlab::{GridMaze, Variant};
use serde::Serialize;

use crate::config::CorpusSpec;
use crate::error::{BenchError, Result};

const CORPUS_TAG: u64 = 0x636f7270;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    /// `s{size}-d{density%}-{variant}-{index}`; sorts by size, density, variant.
    pub id: String,
    pub size: usize,
    /// Requested density (the cell of the grid), not the realised fraction.
    pub density: f64,
    pub variant: Variant,
    pub bfs_moves: usize,
    pub maze: GridMaze,
}

#[derive(Serialize)]
struct IndexRow<'a> {
    id: &'a str,
    size: usize,
    density: f64,
    variant: &'a str,
    bfs_moves: usize,
    obstacles: usize,
    seed: u64,
}

fn density_pct(d: f64) -> u64 {
    (d * 100.0).round() as u64
}

pub fn maze_seed(master: u64, size: usize, density: f64, index: usize) -> u64 {
    seed::derive(master, &[CORPUS_TAG, size as u64, (density * 1000.0).round() as u64, index as u64])
}

pub fn entry(size: usize, density: f64, variant: Variant, index: usize, master: u64) -> Result<CorpusEntry> {
    let maze = generate_maze(size, density, variant, maze_seed(master, size, density, index))?;
    let bfs_moves = bfs_distances(&maze, maze.goal())[maze.index(maze.start())]
        .expect("generated mazes are solvable") as usize;
    Ok(CorpusEntry {
        id: format!("s{size:02}-d{:02}-{variant}-{index:03}", density_pct(density)),
        size,
        density,
        variant,
        bfs_moves,
        maze,
    })
}

/// Every maze of the grid, sorted by id.
pub fn generate(spec: &CorpusSpec, master: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::with_capacity(spec.total());
    for &size in &spec.sizes {
        for &density in &spec.densities {
            for i in 0..spec.per_cell {
                let variant = spec.variants[i % spec.variants.len()];
                out.push(entry(size, density, variant, i, master)?);
            }
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Write one JSON file per maze plus a CSV index.
pub fn write(entries: &[CorpusEntry], dir: &Path) -> Result<()> {
    let mazes = dir.join("mazes");
    std::fs::create_dir_all(&mazes).map_err(|e| BenchError::io(&mazes, e))?;
    for e in entries {
        let path = mazes.join(format!("{}.json", e.id));
        std::fs::write(&path, e.maze.to_json()).map_err(|err| BenchError::io(&path, err))?;
    }
    let index = dir.join("corpus.csv");
    let mut w = csv::Writer::from_path(&index)?;
    for e in entries {
        w.serialize(IndexRow {
            id: &e.id,
            size: e.size,
            density: e.density,
            variant: e.variant.as_str(),
            bfs_moves: e.bfs_moves,
            obstacles: e.maze.obstacle_count(),
            seed: e.maze.seed(),
        })?;
    }
    w.flush().map_err(|e| BenchError::io(&index, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_complete_sorted_and_deterministic() {
        let spec = CorpusSpec {
            sizes: vec![6, 4],
            densities: vec![0.3, 0.2],
            variants: vec![Variant::Norm, Variant::Vary],
            per_cell: 3,
        };
        let a = generate(&spec, 5).unwrap();
        assert_eq!(a.len(), 12);
        assert!(a.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(a[0].id, "s04-d20-norm-000");
        assert_eq!(a, generate(&spec, 5).unwrap());
        assert_ne!(a, generate(&spec, 6).unwrap());
        for e in &a {
            assert!(e.bfs_moves >= 1);
            if e.variant == Variant::Norm {
                assert!(e.bfs_moves >= 2 * (e.size - 1));
            }
        }
    }
}
