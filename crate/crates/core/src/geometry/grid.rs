use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis topology. The normal axis `t` is always an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Periodic,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

/// One flat boundary face of the box, with its node list and the
/// trapezoid area weights of those nodes.
#[derive(Debug, Clone)]
pub struct Face {
    pub axis: usize,
    pub side: Side,
    pub nodes: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Face {
    /// Sign of the outer normal along `axis`.
    pub fn outward(&self) -> f64 {
        match self.side {
            Side::Low => -1.0,
            Side::High => 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Tensor-product nodal grid on a flat box `Π [0, L_k]`.
///
/// The last axis is the normal coordinate `t`; it is the fastest index.
/// Periodic axes of length `L` carry `N` nodes at spacing `L/N`, interval
/// axes carry `N` nodes at spacing `L/(N-1)` including both endpoints.
#[derive(Debug, Clone)]
pub struct Grid {
    nodes: Vec<usize>,
    spacing: Vec<f64>,
    topology: Vec<Topology>,
    top_face: bool,
    strides: Vec<usize>,
    weights: Vec<f64>,
    faces: Vec<Face>,
    boundary_mask: Vec<bool>,
}

impl Grid {
    /// `lateral` gives the topology of the first `n-1` axes; the last axis
    /// is an interval whose `t = 0` face always belongs to the boundary and
    /// whose `t = L` face belongs to it when `top_face` is set.
    pub fn new(nodes: &[usize], lengths: &[f64], lateral: &[Topology], top_face: bool) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::config("space.n", format!("dimension must be at least 3, got {n}")));
        }
        if lengths.len() != n || lateral.len() != n - 1 {
            return Err(Error::config(
                "space",
                format!(
                    "expected {n} lengths and {} lateral topologies, got {} and {}",
                    n - 1,
                    lengths.len(),
                    lateral.len()
                ),
            ));
        }
        let mut topology = lateral.to_vec();
        topology.push(Topology::Interval);
        let mut spacing = Vec::with_capacity(n);
        for k in 0..n {
            if !(lengths[k] > 0.0 && lengths[k].is_finite()) {
                return Err(Error::config(
                    format!("space.lengths[{k}]"),
                    "axis length must be positive and finite",
                ));
            }
            let min_nodes = match topology[k] {
                Topology::Periodic => 3,
                Topology::Interval => 4,
            };
            if nodes[k] < min_nodes {
                return Err(Error::config(
                    format!("space.nodes[{k}]"),
                    format!("need at least {min_nodes} nodes on this axis"),
                ));
            }
            let h = match topology[k] {
                Topology::Periodic => lengths[k] / nodes[k] as f64,
                Topology::Interval => lengths[k] / (nodes[k] - 1) as f64,
            };
            spacing.push(h);
        }
        let mut strides = vec![1; n];
        for k in (0..n - 1).rev() {
            strides[k] = strides[k + 1] * nodes[k + 1];
        }
        let mut grid = Grid {
            nodes: nodes.to_vec(),
            spacing,
            topology,
            top_face,
            strides,
            weights: Vec::new(),
            faces: Vec::new(),
            boundary_mask: Vec::new(),
        };
        grid.weights = (0..grid.len()).map(|i| grid.weight_excluding(i, None)).collect();
        grid.faces = grid.build_faces();
        let mut mask = vec![false; grid.len()];
        for f in &grid.faces {
            for &i in &f.nodes {
                mask[i] = true;
            }
        }
        grid.boundary_mask = mask;
        Ok(grid)
    }

    /// Half-torus `T^{n-1} × [0, L]` with both `t` faces in the boundary.
    pub fn half_torus(nodes: &[usize], lengths: &[f64]) -> Result<Self> {
        let lateral = vec![Topology::Periodic; nodes.len().saturating_sub(1)];
        Grid::new(nodes, lengths, &lateral, true)
    }

    pub(crate) fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let h = self.spacing[axis];
        match self.topology[axis] {
            Topology::Periodic => h,
            Topology::Interval if i == 0 || i == self.nodes[axis] - 1 => 0.5 * h,
            Topology::Interval => h,
        }
    }

    fn weight_excluding(&self, idx: usize, skip: Option<usize>) -> f64 {
        (0..self.dim())
            .filter(|&k| Some(k) != skip)
            .map(|k| self.axis_weight(k, self.axis_index(idx, k)))
            .product()
    }

    fn build_faces(&self) -> Vec<Face> {
        let n = self.dim();
        let mut faces = Vec::new();
        let mut push = |axis: usize, side: Side| {
            let target = match side {
                Side::Low => 0,
                Side::High => self.nodes[axis] - 1,
            };
            let nodes: Vec<usize> = (0..self.len()).filter(|&i| self.axis_index(i, axis) == target).collect();
            let weights = nodes.iter().map(|&i| self.weight_excluding(i, Some(axis))).collect();
            faces.push(Face {
                axis,
                side,
                nodes,
                weights,
            });
        };
        push(n - 1, Side::Low);
        if self.top_face {
            push(n - 1, Side::High);
        }
        for k in 0..n - 1 {
            if self.topology[k] == Topology::Interval {
                push(k, Side::Low);
                push(k, Side::High);
            }
        }
        faces
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn topology(&self) -> &[Topology] {
        &self.topology
    }

    pub fn top_face(&self) -> bool {
        self.top_face
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn length(&self, axis: usize) -> f64 {
        match self.topology[axis] {
            Topology::Periodic => self.spacing[axis] * self.nodes[axis] as f64,
            Topology::Interval => self.spacing[axis] * (self.nodes[axis] - 1) as f64,
        }
    }

    /// Interior trapezoid quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Total number of (face, node) pairs; corner nodes count once per face.
    pub fn boundary_len(&self) -> usize {
        self.faces.iter().map(|f| f.nodes.len()).sum()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary_mask[idx]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.length(k)).product()
    }

    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.nodes[axis]
    }

    pub fn coord(&self, idx: usize, axis: usize) -> f64 {
        self.axis_index(idx, axis) as f64 * self.spacing[axis]
    }

    /// Writes the coordinates `(x_1, …, x_{n-1}, t)` of node `idx`.
    pub fn coords_into(&self, idx: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.coord(idx, k);
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        self.coords_into(idx, &mut c);
        c
    }

    /// Neighbor one step up along `axis`, wrapping on periodic axes.
    pub fn next(&self, idx: usize, axis: usize) -> Option<usize> {
        let i = self.axis_index(idx, axis);
        let s = self.strides[axis];
        let last = self.nodes[axis] - 1;
        if i < last {
            Some(idx + s)
        } else if self.topology[axis] == Topology::Periodic {
            Some(idx - last * s)
        } else {
            None
        }
    }

    /// Neighbor one step down along `axis`, wrapping on periodic axes.
    pub fn prev(&self, idx: usize, axis: usize) -> Option<usize> {
        let i = self.axis_index(idx, axis);
        let s = self.strides[axis];
        if i > 0 {
            Some(idx - s)
        } else if self.topology[axis] == Topology::Periodic {
            Some(idx + (self.nodes[axis] - 1) * s)
        } else {
            None
        }
    }

    /// First derivative along `axis`: central differences in the interior,
    /// second-order one-sided stencils at interval ends.
    pub fn derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let h = self.spacing[axis];
        let s = self.strides[axis];
        (0..self.len())
            .map(|idx| match (self.prev(idx, axis), self.next(idx, axis)) {
                (Some(a), Some(b)) => (f[b] - f[a]) / (2.0 * h),
                (None, _) => (-3.0 * f[idx] + 4.0 * f[idx + s] - f[idx + 2 * s]) / (2.0 * h),
                (_, None) => (3.0 * f[idx] - 4.0 * f[idx - s] + f[idx - 2 * s]) / (2.0 * h),
            })
            .collect()
    }

    /// Second derivative along `axis`; four-point one-sided at interval ends.
    pub fn second_derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let h2 = self.spacing[axis] * self.spacing[axis];
        let s = self.strides[axis];
        (0..self.len())
            .map(|idx| match (self.prev(idx, axis), self.next(idx, axis)) {
                (Some(a), Some(b)) => (f[b] - 2.0 * f[idx] + f[a]) / h2,
                (None, _) => (2.0 * f[idx] - 5.0 * f[idx + s] + 4.0 * f[idx + 2 * s] - f[idx + 3 * s]) / h2,
                (_, None) => (2.0 * f[idx] - 5.0 * f[idx - s] + 4.0 * f[idx - 2 * s] - f[idx - 3 * s]) / h2,
            })
            .collect()
    }

    /// Flat Laplacian.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for k in 0..self.dim() {
            for (o, d) in out.iter_mut().zip(self.second_derivative(f, k)) {
                *o += d;
            }
        }
        out
    }

    /// Per-axis gradient components.
    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|k| self.derivative(f, k)).collect()
    }

    /// Outer normal derivative of `f` on face `face`, one value per face node.
    pub fn normal_derivative(&self, f: &[f64], face: usize) -> Vec<f64> {
        let fc = &self.faces[face];
        let h = self.spacing[fc.axis];
        let s = self.strides[fc.axis] as isize;
        let dir: isize = match fc.side {
            Side::Low => 1,
            Side::High => -1,
        };
        fc.nodes
            .iter()
            .map(|&i| {
                let at = |k: isize| f[(i as isize + dir * k * s) as usize];
                // derivative into the domain, then flip to the outer normal
                let inward = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
                -inward
            })
            .collect()
    }
}
