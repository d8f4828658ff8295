//! Nine-node quadrilateral meshes of planar domains with named boundary sets.

mod builders;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quad9;

pub use builders::{generate_rectangle, half_ellipse_two_holes, plate_with_half_hole};
pub use io::{load_mesh, parse_mesh, write_mesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

/// Connectivity of one element in the ordering documented in [`crate::quad9`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quad9Element {
    pub node_ids: [usize; 9],
}

impl Quad9Element {
    pub fn corners(&self) -> [usize; 4] {
        [
            self.node_ids[0],
            self.node_ids[1],
            self.node_ids[2],
            self.node_ids[3],
        ]
    }

    pub fn edge_nodes(&self, local_edge: usize) -> [usize; 3] {
        quad9::EDGE_NODES[local_edge].map(|a| self.node_ids[a])
    }
}

/// A named group of boundary nodes and the element edges lying entirely in it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub name: String,
    pub node_ids: Vec<usize>,
    /// `(element, local edge)` pairs.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Node>,
    elements: Vec<Quad9Element>,
    boundary_sets: BTreeMap<String, BoundarySet>,
    corner_node_ids: Vec<usize>,
    corner_index: Vec<Option<usize>>,
}

impl Mesh {
    /// Builds and validates a mesh. Boundary sets are given as node lists; the
    /// element edges of each set are derived from the connectivity.
    pub fn new(
        nodes: Vec<Node>,
        elements: Vec<Quad9Element>,
        boundary_nodes: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        if nodes.is_empty() || elements.is_empty() {
            return Err(Error::InvalidMesh(
                "mesh has no nodes or no elements".into(),
            ));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidMesh(format!(
                    "node ids must be dense and ordered: position {i} holds id {}",
                    n.id
                )));
            }
            if !n.x.is_finite() || !n.y.is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "node {i} has non-finite coordinates"
                )));
            }
        }
        let n_nodes = nodes.len();
        let mut used = vec![false; n_nodes];
        for (e, el) in elements.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &id in &el.node_ids {
                if id >= n_nodes {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references missing node {id}"
                    )));
                }
                if !seen.insert(id) {
                    return Err(Error::InvalidMesh(format!("element {e} repeats node {id}")));
                }
                used[id] = true;
            }
        }
        if let Some(orphan) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!(
                "node {orphan} is not referenced by any element"
            )));
        }

        let mut mesh = Mesh {
            nodes,
            elements,
            boundary_sets: BTreeMap::new(),
            corner_node_ids: Vec::new(),
            corner_index: Vec::new(),
        };

        for e in 0..mesh.elements.len() {
            let coords = mesh.element_coords(e);
            for (xi, eta, _) in quad9::gauss_3x3() {
                let det_j = quad9::point_geometry(&coords, xi, eta).det_j;
                if !(det_j > 0.0) {
                    return Err(Error::InvertedElement { element: e, det_j });
                }
            }
        }

        let corner_set: BTreeSet<usize> =
            mesh.elements.iter().flat_map(|el| el.corners()).collect();
        mesh.corner_node_ids = corner_set.into_iter().collect();
        mesh.corner_index = vec![None; n_nodes];
        for (i, &id) in mesh.corner_node_ids.iter().enumerate() {
            mesh.corner_index[id] = Some(i);
        }

        let boundary_edges = mesh.boundary_edges();
        let mut on_boundary = vec![false; n_nodes];
        for &(e, k) in &boundary_edges {
            for id in mesh.elements[e].edge_nodes(k) {
                on_boundary[id] = true;
            }
        }
        for (name, mut ids) in boundary_nodes {
            ids.sort_unstable();
            ids.dedup();
            for &id in &ids {
                if id >= n_nodes {
                    return Err(Error::InvalidMesh(format!(
                        "boundary set `{name}` references missing node {id}"
                    )));
                }
                if !on_boundary[id] {
                    return Err(Error::InvalidMesh(format!(
                        "boundary set `{name}` contains interior node {id}"
                    )));
                }
            }
            let member: BTreeSet<usize> = ids.iter().copied().collect();
            let edges = boundary_edges
                .iter()
                .copied()
                .filter(|&(e, k)| {
                    mesh.elements[e]
                        .edge_nodes(k)
                        .iter()
                        .all(|id| member.contains(id))
                })
                .collect();
            mesh.boundary_sets.insert(
                name.clone(),
                BoundarySet {
                    name,
                    node_ids: ids,
                    edges,
                },
            );
        }
        Ok(mesh)
    }

    /// Edges used by exactly one element, as `(element, local edge)`.
    fn boundary_edges(&self) -> Vec<(usize, usize)> {
        // The mid-edge node identifies an edge uniquely in a conforming mesh.
        let mut count: HashMap<usize, usize> = HashMap::new();
        for el in &self.elements {
            for k in 0..4 {
                *count.entry(el.edge_nodes(k)[1]).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for k in 0..4 {
                if count[&el.edge_nodes(k)[1]] == 1 {
                    out.push((e, k));
                }
            }
        }
        out
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Quad9Element] {
        &self.elements
    }

    pub fn boundary_sets(&self) -> &BTreeMap<String, BoundarySet> {
        &self.boundary_sets
    }

    pub fn boundary_set(&self, name: &str) -> Result<&BoundarySet> {
        self.boundary_sets
            .get(name)
            .ok_or_else(|| Error::UnknownBoundarySet(name.to_string()))
    }

    /// Node ids of element corners, ascending. Index into this list is the
    /// chromosome position of that node.
    pub fn corner_node_ids(&self) -> &[usize] {
        &self.corner_node_ids
    }

    pub fn corner_count(&self) -> usize {
        self.corner_node_ids.len()
    }

    pub fn corner_index(&self, node_id: usize) -> Option<usize> {
        self.corner_index.get(node_id).copied().flatten()
    }

    /// Chromosome positions of an element's four corners.
    pub fn element_corner_slots(&self, element: usize) -> [usize; 4] {
        self.elements[element]
            .corners()
            .map(|id| self.corner_index[id].expect("corner node"))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, element: usize) -> [[f64; 2]; 9] {
        self.elements[element]
            .node_ids
            .map(|id| [self.nodes[id].x, self.nodes[id].y])
    }

    pub fn element_area(&self, element: usize) -> f64 {
        let coords = self.element_coords(element);
        quad9::gauss_3x3()
            .iter()
            .map(|&(xi, eta, w)| w * quad9::point_geometry(&coords, xi, eta).det_j)
            .sum()
    }

    pub fn area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Squared Euclidean distances between the nodes listed in `a` and `b`.
    pub fn pairwise_sq_distances(&self, a: &[usize], b: &[usize]) -> Result<DMatrix<f64>> {
        let n = self.nodes.len();
        if let Some(&bad) = a.iter().chain(b).find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "node index {bad} out of range"
            )));
        }
        Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
            let p = &self.nodes[a[i]];
            let q = &self.nodes[b[j]];
            (p.x - q.x).powi(2) + (p.y - q.y).powi(2)
        }))
    }

    /// Elements whose centroid satisfies `pred`.
    pub fn elements_where(&self, pred: impl Fn(f64, f64) -> bool) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&e| {
                let c = self.nodes[self.elements[e].node_ids[8]];
                pred(c.x, c.y)
            })
            .collect()
    }
}
