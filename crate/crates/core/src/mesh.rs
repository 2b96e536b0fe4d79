//! Structured grids of square four-node cells.
//!
//! Nodes are numbered row-major starting at the supported edge (`y = 0`),
//! with `x` varying fastest. Each node carries two in-plane DOFs, `u_x` at
//! `2 * node` and `u_y` at `2 * node + 1`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Degrees of freedom per node (`u_x`, `u_y`).
pub const DOFS_PER_NODE: usize = 2;

/// Displacement direction of a nodal DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
}

/// Node to DOF addressing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap;

impl DofMap {
    #[inline]
    pub fn dof(node: usize, dir: Direction) -> usize {
        match dir {
            Direction::X => DOFS_PER_NODE * node,
            Direction::Y => DOFS_PER_NODE * node + 1,
        }
    }

    #[inline]
    pub fn node_dofs(node: usize) -> (usize, usize) {
        (DOFS_PER_NODE * node, DOFS_PER_NODE * node + 1)
    }

    /// Inverse of [`DofMap::dof`].
    #[inline]
    pub fn node_of(dof: usize) -> (usize, Direction) {
        let dir = if dof % DOFS_PER_NODE == 0 {
            Direction::X
        } else {
            Direction::Y
        };
        (dof / DOFS_PER_NODE, dir)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nx: usize,
    ny: usize,
    elem_size: f64,
    node_coords: Vec<[f64; 2]>,
    connectivity: Vec<[usize; 4]>,
    constrained_dofs: BTreeSet<usize>,
}

impl Mesh {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn elem_size(&self) -> f64 {
        self.elem_size
    }

    pub fn element_area(&self) -> f64 {
        self.elem_size * self.elem_size
    }

    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn element_count(&self) -> usize {
        self.connectivity.len()
    }

    pub fn ndof(&self) -> usize {
        DOFS_PER_NODE * self.node_count()
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    pub fn connectivity(&self) -> &[[usize; 4]] {
        &self.connectivity
    }

    pub fn constrained_dofs(&self) -> &BTreeSet<usize> {
        &self.constrained_dofs
    }

    /// Node index at grid position (`i` along x, `j` along y).
    pub fn node_at(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Replaces the constrained DOF set. Every DOF must exist.
    pub fn with_constraints(mut self, dofs: BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = dofs.iter().find(|&&d| d >= self.ndof()) {
            return Err(Error::Index {
                index: bad,
                len: self.ndof(),
            });
        }
        self.constrained_dofs = dofs;
        Ok(self)
    }

    pub fn element_node_ids(&self, e: usize) -> Result<[usize; 4]> {
        element_node_ids(self, e)
    }

    /// Outer dimensions of the plate `(width, height)` in meters.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.nx as f64 * self.elem_size,
            self.ny as f64 * self.elem_size,
        )
    }

    /// Nodes on the edge opposite the supports (`y = ny * elem_size`), left to right.
    pub fn free_edge_nodes(&self) -> Vec<usize> {
        (0..=self.nx).map(|i| self.node_at(i, self.ny)).collect()
    }
}

/// Builds an `nx` by `ny` grid of square cells of side `elem_size`, pinned
/// along the `y = 0` edge.
pub fn build_grid_mesh(nx: usize, ny: usize, elem_size: f64) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least one element per direction, got {nx}x{ny}"
        )));
    }
    if !(elem_size > 0.0) || !elem_size.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "element size must be positive, got {elem_size}"
        )));
    }

    let row = nx + 1;
    let mut node_coords = Vec::with_capacity(row * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            node_coords.push([i as f64 * elem_size, j as f64 * elem_size]);
        }
    }

    let mut connectivity = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let n0 = j * row + i;
            connectivity.push([n0, n0 + 1, n0 + 1 + row, n0 + row]);
        }
    }

    let mut mesh = Mesh {
        nx,
        ny,
        elem_size,
        node_coords,
        connectivity,
        constrained_dofs: BTreeSet::new(),
    };
    mesh.constrained_dofs = supported_edge_dofs(&mesh);
    Ok(mesh)
}

/// Both DOFs of every node on the `y = 0` edge (pinned supports).
pub fn supported_edge_dofs(mesh: &Mesh) -> BTreeSet<usize> {
    (0..=mesh.nx)
        .flat_map(|i| {
            let (ux, uy) = DofMap::node_dofs(mesh.node_at(i, 0));
            [ux, uy]
        })
        .collect()
}

/// Corner nodes of element `e`, counter-clockwise from the lower-left corner.
pub fn element_node_ids(mesh: &Mesh, e: usize) -> Result<[usize; 4]> {
    mesh.connectivity.get(e).copied().ok_or(Error::Index {
        index: e,
        len: mesh.connectivity.len(),
    })
}

/// Twice-signed polygon area of an element from its node coordinates, halved.
pub fn signed_area(mesh: &Mesh, e: usize) -> Result<f64> {
    let ids = element_node_ids(mesh, e)?;
    let mut acc = 0.0;
    for k in 0..4 {
        let [x0, y0] = mesh.node_coords[ids[k]];
        let [x1, y1] = mesh.node_coords[ids[(k + 1) % 4]];
        acc += x0 * y1 - x1 * y0;
    }
    Ok(0.5 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_plate_dimensions() {
        let mesh = build_grid_mesh(10, 20, 0.05).unwrap();
        assert_eq!(mesh.node_count(), 231);
        assert_eq!(mesh.element_count(), 200);
        let (w, h) = mesh.extent();
        assert!((w - 0.5).abs() < 1e-15);
        assert!((h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_element() {
        let mesh = build_grid_mesh(1, 1, 1.0).unwrap();
        assert_eq!(mesh.node_count(), 4);
        assert_eq!(mesh.connectivity(), &[[0, 1, 3, 2]]);
    }

    #[test]
    fn small_grid_connectivity() {
        let mesh = build_grid_mesh(2, 3, 0.5).unwrap();
        assert_eq!(mesh.node_count(), 12);
        assert_eq!(mesh.element_count(), 6);
        assert_eq!(mesh.element_node_ids(0).unwrap(), [0, 1, 4, 3]);
        assert_eq!(mesh.element_node_ids(5).unwrap(), [7, 8, 11, 10]);
        assert!(matches!(
            mesh.element_node_ids(6),
            Err(Error::Index { index: 6, len: 6 })
        ));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_grid_mesh(0, 2, 1.0).is_err());
        assert!(build_grid_mesh(2, 0, 1.0).is_err());
        assert!(build_grid_mesh(2, 2, 0.0).is_err());
        assert!(build_grid_mesh(2, 2, -1.0).is_err());
        assert!(build_grid_mesh(2, 2, f64::NAN).is_err());
    }

    #[test]
    fn supported_edge_counts() {
        let plate = build_grid_mesh(10, 20, 0.05).unwrap();
        let dofs = supported_edge_dofs(&plate);
        assert_eq!(dofs.len(), 22);
        let nodes: BTreeSet<_> = dofs.iter().map(|&d| DofMap::node_of(d).0).collect();
        assert_eq!(nodes.len(), 11);

        assert_eq!(supported_edge_dofs(&build_grid_mesh(1, 1, 1.0).unwrap()).len(), 4);
        assert_eq!(supported_edge_dofs(&build_grid_mesh(2, 2, 1.0).unwrap()).len(), 6);
    }

    #[test]
    fn dof_map_roundtrip() {
        for node in 0..50 {
            for dir in [Direction::X, Direction::Y] {
                assert_eq!(DofMap::node_of(DofMap::dof(node, dir)), (node, dir));
            }
        }
    }

    #[test]
    fn constraints_must_exist() {
        let mesh = build_grid_mesh(1, 1, 1.0).unwrap();
        assert!(mesh.clone().with_constraints([7].into()).is_ok());
        assert!(mesh.with_constraints([8].into()).is_err());
    }
}
