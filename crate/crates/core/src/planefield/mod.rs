//! Planar vector-field measures on a staggered grid.
//!
//! `fx` lives on vertical faces and `fy` on horizontal faces, both as densities. The flux
//! through a face is its value times the face length, so the discrete divergence is a flux
//! balance and `Σ div · area = 0` holds exactly for compactly supported fields. Cell values are
//! face averages.
//!
//! Storage is row-major with rows indexed by `j` (the y index): `fx[j * (nx + 1) + i]` is the
//! face at `x = x₀ + i·hx` in row `j`, `fy[j * nx + i]` the face at `y = y₀ + j·hy` in column `i`.

pub mod checks;
pub mod curve;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

pub use checks::{check_det_simple, check_kak_bis, check_kak_tris, kak_bis_terms, KakBisTerms};
pub use curve::{crossing_tubes, from_curve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub origin: [f64; 2],
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, origin: [f64; 2]) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter(format!("grid {nx}x{ny} below 4x4")));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell size {hx}x{hy}")));
        }
        Ok(GridSpec { nx, ny, hx, hy, origin })
    }

    /// `n × n` square cells covering `[lo, hi]²`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let h = (hi - lo) / n as f64;
        Self::new(n, n, h, h, [lo, lo])
    }

    /// Square cells of side `(extent + 2·margin) / n` covering the box `[min, max]` with the
    /// given margin on every side.
    pub fn covering(min: Vec2, max: Vec2, n: usize, margin: f64) -> Result<Self> {
        let extent = (max - min).amax() + 2.0 * margin;
        let h = extent / n as f64;
        let centre = (min + max) * 0.5;
        Self::new(n, n, h, h, [centre[0] - 0.5 * extent, centre[1] - 0.5 * extent])
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin[0] + (i as f64 + 0.5) * self.hx,
            self.origin[1] + (j as f64 + 0.5) * self.hy,
        )
    }

    /// Midpoint of vertical face `i` in row `j`.
    pub fn xface_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin[0] + i as f64 * self.hx, self.origin[1] + (j as f64 + 0.5) * self.hy)
    }

    /// Midpoint of horizontal face `j` in column `i`.
    pub fn yface_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin[0] + (i as f64 + 0.5) * self.hx, self.origin[1] + j as f64 * self.hy)
    }

    /// Grid with cells merged in 2×2 blocks.
    pub fn coarsened(&self) -> Option<GridSpec> {
        if !self.nx.is_multiple_of(2) || !self.ny.is_multiple_of(2) || self.nx < 8 || self.ny < 8 {
            return None;
        }
        Some(GridSpec { nx: self.nx / 2, ny: self.ny / 2, hx: 2.0 * self.hx, hy: 2.0 * self.hy, origin: self.origin })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    pub fx: Vec<f64>,
    pub fy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, values: vec![0.0; grid.n_cells()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(Vec2) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.cell_center(i, j)));
            }
        }
        ScalarField { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn abs_integral(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }
}

impl GridField {
    pub fn zeros(grid: GridSpec) -> Self {
        GridField { grid, fx: vec![0.0; (grid.nx + 1) * grid.ny], fy: vec![0.0; grid.nx * (grid.ny + 1)] }
    }

    /// Samples a field at face midpoints; boundary faces are left at zero.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Vec2) -> Vec2) -> Self {
        let mut g = GridField::zeros(grid);
        for j in 0..grid.ny {
            for i in 1..grid.nx {
                g.fx[j * (grid.nx + 1) + i] = f(grid.xface_center(i, j))[0];
            }
        }
        for j in 1..grid.ny {
            for i in 0..grid.nx {
                g.fy[j * grid.nx + i] = f(grid.yface_center(i, j))[1];
            }
        }
        g
    }

    #[inline]
    pub fn xi(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx + 1) + i
    }

    #[inline]
    pub fn yi(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }

    /// Face-averaged cell value.
    pub fn cell(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            0.5 * (self.fx[self.xi(i, j)] + self.fx[self.xi(i + 1, j)]),
            0.5 * (self.fy[self.yi(i, j)] + self.fy[self.yi(i, j + 1)]),
        )
    }

    pub fn cells(&self) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.grid.n_cells());
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                out.push(self.cell(i, j));
            }
        }
        out
    }

    /// `∫|S|` from cell values.
    pub fn mass(&self) -> f64 {
        self.cells().iter().map(|c| c.norm()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn scale(&self, s: f64) -> GridField {
        GridField { grid: self.grid, fx: self.fx.iter().map(|v| v * s).collect(), fy: self.fy.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridField {
            grid: self.grid,
            fx: self.fx.iter().zip(&other.fx).map(|(a, b)| a + b).collect(),
            fy: self.fy.iter().zip(&other.fy).map(|(a, b)| a + b).collect(),
        })
    }

    /// Largest absolute value on a boundary face.
    pub fn boundary_max(&self) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for j in 0..g.ny {
            m = m.max(self.fx[self.xi(0, j)].abs()).max(self.fx[self.xi(g.nx, j)].abs());
        }
        for i in 0..g.nx {
            m = m.max(self.fy[self.yi(i, 0)].abs()).max(self.fy[self.yi(i, g.ny)].abs());
        }
        m
    }

    /// Net outward flux per unit cell area.
    pub fn divergence(&self) -> Result<ScalarField> {
        let b = self.boundary_max();
        if b != 0.0 {
            return Err(Error::SupportViolation(format!("boundary face value {b:e}")));
        }
        let g = self.grid;
        let mut values = Vec::with_capacity(g.n_cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let fx = (self.fx[self.xi(i + 1, j)] - self.fx[self.xi(i, j)]) * g.hy;
                let fy = (self.fy[self.yi(i, j + 1)] - self.fy[self.yi(i, j)]) * g.hx;
                values.push((fx + fy) / g.cell_area());
            }
        }
        Ok(ScalarField { grid: g, values })
    }

    pub fn div_tv(&self) -> Result<f64> {
        Ok(self.divergence()?.abs_integral())
    }

    /// Aggregates fluxes over 2×2 blocks; the coarse divergence is the block sum of the fine one.
    pub fn coarsen(&self) -> Option<GridField> {
        let c = self.grid.coarsened()?;
        let mut out = GridField::zeros(c);
        for jc in 0..c.ny {
            for ic in 0..=c.nx {
                let (i, j) = (2 * ic, 2 * jc);
                out.fx[jc * (c.nx + 1) + ic] = 0.5 * (self.fx[self.xi(i, j)] + self.fx[self.xi(i, j + 1)]);
            }
        }
        for jc in 0..=c.ny {
            for ic in 0..c.nx {
                let (i, j) = (2 * ic, 2 * jc);
                out.fy[jc * c.nx + ic] = 0.5 * (self.fy[self.yi(i, j)] + self.fy[self.yi(i + 1, j)]);
            }
        }
        Some(out)
    }
}

pub fn divergence(s: &GridField) -> Result<ScalarField> {
    s.divergence()
}

pub fn div_tv(s: &GridField) -> Result<f64> {
    s.div_tv()
}

/// `Σ det(S_cell, T_cell) · hx · hy`.
pub fn det_integral(s: &GridField, t: &GridField) -> Result<f64> {
    Ok(det_field(s, t)?.integral())
}

/// Cellwise `det(S, T)`.
pub fn det_field(s: &GridField, t: &GridField) -> Result<ScalarField> {
    if s.grid != t.grid {
        return Err(Error::GridMismatch);
    }
    let values = s.cells().iter().zip(t.cells()).map(|(a, b)| a[0] * b[1] - a[1] * b[0]).collect();
    Ok(ScalarField { grid: s.grid, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// `P = (S^axis − |S^other|)⁺`, `N = (S^axis − |S^other|)⁻` cellwise.
pub fn pos_neg_parts(s: &GridField, axis: Axis) -> (ScalarField, ScalarField) {
    let (mut p, mut n) = (Vec::with_capacity(s.grid.n_cells()), Vec::with_capacity(s.grid.n_cells()));
    for c in s.cells() {
        let d = match axis {
            Axis::X => c[0] - c[1].abs(),
            Axis::Y => c[1] - c[0].abs(),
        };
        p.push(d.max(0.0));
        n.push((-d).max(0.0));
    }
    (ScalarField { grid: s.grid, values: p }, ScalarField { grid: s.grid, values: n })
}

/// `(μ + ν − |μ − ν|) / 2` cellwise, evaluated as `min(μ, ν)` so that domination is exact.
pub fn min_measure(mu: &ScalarField, nu: &ScalarField) -> Result<ScalarField> {
    if mu.grid != nu.grid {
        return Err(Error::GridMismatch);
    }
    let values = mu.values.iter().zip(&nu.values).map(|(a, b)| a.min(*b)).collect();
    Ok(ScalarField { grid: mu.grid, values })
}
