use serde::{Deserialize, Serialize};

use super::ModelError;

/// How the solution is continued outside `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Boundary {
    /// `u = left` on `(-inf, x_left]` and `u = right` on `[x_right, inf)`;
    /// the two end nodes hold these values.
    #[serde(rename = "dirichlet")]
    DirichletExtension { left: f64, right: f64 },
    Periodic,
}

/// Uniform 1D grid.
///
/// Dirichlet grids carry `n_cells + 1` nodes including both end points.
/// Periodic grids identify `x_right` with `x_left` and carry `n_cells` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid1D {
    x_left: f64,
    x_right: f64,
    n_cells: usize,
    boundary: Boundary,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    x_left: f64,
    x_right: f64,
    n_cells: usize,
    boundary: Boundary,
}

impl TryFrom<GridSpec> for Grid1D {
    type Error = ModelError;

    fn try_from(s: GridSpec) -> Result<Self, ModelError> {
        Grid1D::new(s.x_left, s.x_right, s.n_cells, s.boundary)
    }
}

impl From<Grid1D> for GridSpec {
    fn from(g: Grid1D) -> Self {
        GridSpec {
            x_left: g.x_left,
            x_right: g.x_right,
            n_cells: g.n_cells,
            boundary: g.boundary,
        }
    }
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, boundary: Boundary) -> Result<Self, ModelError> {
        if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
            return Err(ModelError::InvalidGrid(format!(
                "need finite x_left < x_right, got [{x_left}, {x_right}]"
            )));
        }
        let min_cells = if matches!(boundary, Boundary::Periodic) { 3 } else { 2 };
        if n_cells < min_cells {
            return Err(ModelError::InvalidGrid(format!("need at least {min_cells} cells, got {n_cells}")));
        }
        if let Boundary::DirichletExtension { left, right } = boundary {
            if !(left.is_finite() && right.is_finite()) {
                return Err(ModelError::InvalidGrid("extension values must be finite".into()));
            }
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            boundary,
        })
    }

    pub fn periodic(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self, ModelError> {
        Self::new(x_left, x_right, n_cells, Boundary::Periodic)
    }

    pub fn dirichlet(x_left: f64, x_right: f64, n_cells: usize, left: f64, right: f64) -> Result<Self, ModelError> {
        Self::new(x_left, x_right, n_cells, Boundary::DirichletExtension { left, right })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.boundary, Boundary::Periodic)
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_cells as f64
    }

    pub fn node_count(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n_cells,
            Boundary::DirichletExtension { .. } => self.n_cells + 1,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count()).map(move |i| self.x(i))
    }

    /// Index of the node closest to `x` (clamped to the grid).
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = ((x - self.x_left) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.node_count() - 1)
    }

    /// Same grid with a different boundary policy.
    pub fn with_boundary(&self, boundary: Boundary) -> Result<Self, ModelError> {
        Self::new(self.x_left, self.x_right, self.n_cells, boundary)
    }

    /// Grid scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(self.x_left * factor, self.x_right * factor, self.n_cells, self.boundary)
    }
}

/// Nodal values of `u` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self, ModelError> {
        if values.len() != grid.node_count() {
            return Err(ModelError::LengthMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NonFinite { node, value });
        }
        Ok(Self { grid, values, time })
    }

    pub fn constant(grid: &Grid1D, value: f64) -> Self {
        let n = grid.node_count();
        Self::new(grid.clone(), vec![value; n], 0.0).expect("constant must be finite")
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<Self, ModelError> {
        Self::new(grid.clone(), grid.nodes().map(f).collect(), 0.0)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the largest `|u|`.
    pub fn argmax_abs(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
    }
}
