//! Structured grids, discrete fields, and observation sets.
//!
//! Everything here is immutable after construction and shared by both
//! solvers and the trainer. Pressures are carried in Pa, coordinates in
//! meters, times in seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

use crate::error::{AdjointNetError, Result};

/// Uniform 1D cell-centered grid: cell `i` spans `[i*dx, (i+1)*dx]` with its
/// center at `(i + 0.5)*dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n_cells: usize,
    pub length: f64,
    pub dx: f64,
    pub cell_centers: Vec<f64>,
}

impl Grid1D {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 1 {
            return Err(AdjointNetError::invalid("n_cells must be >= 1"));
        }
        if !(length > 0.0) {
            return Err(AdjointNetError::invalid(format!(
                "grid length must be positive, got {length}"
            )));
        }
        let dx = length / n_cells as f64;
        let cell_centers = (0..n_cells).map(|i| (i as f64 + 0.5) * dx).collect();
        Ok(Grid1D {
            n_cells,
            length,
            dx,
            cell_centers,
        })
    }

    /// Inverse of the center formula; exact for every cell by construction.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = (x / self.dx - 0.5).round();
        (i.max(0.0) as usize).min(self.n_cells - 1)
    }
}

/// Uniform 2D node grid: node `(i, j)` sits at `(i*dx, j*dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(AdjointNetError::invalid("need at least 2x2 nodes"));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(AdjointNetError::invalid("domain extents must be positive"));
        }
        Ok(Grid2D {
            nx,
            ny,
            lx,
            ly,
            dx: lx / (nx - 1) as f64,
            dy: ly / (ny - 1) as f64,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Row-major node index, `j` outer.
    pub fn node(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn node_xy(&self, idx: usize) -> (f64, f64) {
        let i = idx % self.nx;
        let j = idx / self.nx;
        (i as f64 * self.dx, j as f64 * self.dy)
    }
}

/// A state array (pressure or one velocity component) at a point in time.
///
/// Length is validated against the owning grid at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn uniform_1d(grid: &Grid1D, value: f64, time: f64) -> Field {
        Field {
            values: vec![value; grid.n_cells],
            time,
        }
    }

    pub fn from_values_1d(grid: &Grid1D, values: Vec<f64>, time: f64) -> Result<Field> {
        if values.len() != grid.n_cells {
            return Err(AdjointNetError::invalid(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.n_cells
            )));
        }
        Ok(Field { values, time })
    }

    pub fn zeros_2d(grid: &Grid2D, time: f64) -> Field {
        Field {
            values: vec![0.0; grid.n_nodes()],
            time,
        }
    }

    pub fn from_values_2d(grid: &Grid2D, values: Vec<f64>, time: f64) -> Result<Field> {
        if values.len() != grid.n_nodes() {
            return Err(AdjointNetError::invalid(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(Field { values, time })
    }

    /// Solver steps must never leak NaN/Inf into a field.
    pub fn check_finite(&self, context: &str, step: usize) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(AdjointNetError::Instability {
                context: context.to_string(),
                step,
            })
        }
    }
}

/// One sampled data point: a cell/node index and the observed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsEntry {
    pub index: usize,
    pub value: f64,
}

/// Sparse observations with the noise metadata that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub entries: Vec<ObsEntry>,
    pub noise_magnitude: f64,
    pub rng_seed: u64,
    pub obs_time: f64,
}

impl ObservationSet {
    /// Samples `field` at `indices`, perturbing each value by noise drawn
    /// uniformly from `[-noise_magnitude, +noise_magnitude]`. Bit-identical
    /// for a fixed seed.
    pub fn sample(
        field: &Field,
        indices: &[usize],
        noise_magnitude: f64,
        seed: u64,
    ) -> Result<ObservationSet> {
        if indices.is_empty() {
            return Err(AdjointNetError::invalid("observation index list is empty"));
        }
        if !(noise_magnitude >= 0.0) {
            return Err(AdjointNetError::invalid(
                "noise magnitude must be non-negative",
            ));
        }
        let mut seen = vec![false; field.values.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(indices.len());
        for &idx in indices {
            if idx >= field.values.len() {
                return Err(AdjointNetError::IndexError(format!(
                    "observation index {idx} outside field of length {}",
                    field.values.len()
                )));
            }
            if seen[idx] {
                return Err(AdjointNetError::invalid(format!(
                    "duplicate observation index {idx}"
                )));
            }
            seen[idx] = true;
            // draw in [-1, 1] so the zero-noise case is exact
            let unit: f64 = rng.gen::<f64>() * 2.0 - 1.0;
            entries.push(ObsEntry {
                index: idx,
                value: field.values[idx] + noise_magnitude * unit,
            });
        }
        Ok(ObservationSet {
            entries,
            noise_magnitude,
            rng_seed: seed,
            obs_time: field.time,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }
}

/// Draws `count` distinct indices from `0..n` with a seeded generator,
/// returned in increasing order.
pub fn draw_indices(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 || count > n {
        return Err(AdjointNetError::invalid(format!(
            "cannot draw {count} distinct indices from 0..{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    // partial Fisher-Yates
    for k in 0..count {
        let j = rng.gen_range(k..n);
        pool.swap(k, j);
    }
    let mut picked = pool[..count].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

fn fmt(v: f64) -> String {
    // 17 significant digits: exact f64 round-trip
    format!("{v:.16e}")
}

/// CSV export, header `index,x,value`.
pub fn write_observations_csv<W: Write>(
    obs: &ObservationSet,
    grid: &Grid1D,
    w: &mut W,
) -> Result<()> {
    writeln!(w, "index,x,value")?;
    for e in &obs.entries {
        writeln!(w, "{},{},{}", e.index, fmt(grid.cell_centers[e.index]), fmt(e.value))?;
    }
    Ok(())
}

/// CSV export of a 1D field, header `index,x,value`.
pub fn write_field_csv_1d<W: Write>(field: &Field, grid: &Grid1D, w: &mut W) -> Result<()> {
    writeln!(w, "index,x,value")?;
    for (i, v) in field.values.iter().enumerate() {
        writeln!(w, "{},{},{}", i, fmt(grid.cell_centers[i]), fmt(*v))?;
    }
    Ok(())
}
