use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Mesh, Node, Quad9Element};
use crate::error::{Error, Result};
use crate::quad9;

/// Structured `nx` x `ny` mesh of the rectangle `[0, width] x [0, height]`.
///
/// Boundary sets: `left`, `right`, `bottom`, `top`, plus single-node sets
/// `bottom_left`, `bottom_right`, `top_left`, `top_right`.
pub fn generate_rectangle(width: f64, height: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rectangle dimensions must be positive, got {width} x {height}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "rectangle needs at least one element per direction".into(),
        ));
    }
    let (ni, nj) = (2 * nx + 1, 2 * ny + 1);
    let id = |i: usize, j: usize| j * ni + i;
    let nodes = (0..nj)
        .flat_map(|j| (0..ni).map(move |i| (i, j)))
        .map(|(i, j)| Node {
            id: id(i, j),
            x: width * i as f64 / (2 * nx) as f64,
            y: height * j as f64 / (2 * ny) as f64,
        })
        .collect();
    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let (i, j) = (2 * ex, 2 * ey);
            elements.push(Quad9Element {
                node_ids: [
                    id(i, j),
                    id(i + 2, j),
                    id(i + 2, j + 2),
                    id(i, j + 2),
                    id(i + 1, j),
                    id(i + 2, j + 1),
                    id(i + 1, j + 2),
                    id(i, j + 1),
                    id(i + 1, j + 1),
                ],
            });
        }
    }
    let mut sets = BTreeMap::new();
    sets.insert("left".into(), (0..nj).map(|j| id(0, j)).collect());
    sets.insert("right".into(), (0..nj).map(|j| id(ni - 1, j)).collect());
    sets.insert("bottom".into(), (0..ni).map(|i| id(i, 0)).collect());
    sets.insert("top".into(), (0..ni).map(|i| id(i, nj - 1)).collect());
    sets.insert("bottom_left".into(), vec![id(0, 0)]);
    sets.insert("bottom_right".into(), vec![id(ni - 1, 0)]);
    sets.insert("top_left".into(), vec![id(0, nj - 1)]);
    sets.insert("top_right".into(), vec![id(ni - 1, nj - 1)]);
    Mesh::new(nodes, elements, sets)
}

/// One stretch of the outer boundary seen from the hole center.
struct Arc<'a> {
    name: &'a str,
    /// Angular extent in radians, counterclockwise.
    from: f64,
    to: f64,
    elements: usize,
    /// Point where the ray at a given angle leaves the domain.
    outer: &'a dyn Fn(f64) -> [f64; 2],
}

/// Raw structured block, before validation.
struct Block {
    coords: Vec<[f64; 2]>,
    elements: Vec<[usize; 9]>,
    sets: BTreeMap<String, Vec<usize>>,
}

/// O-grid around a circular hole: rays from the hole center sweep the listed
/// arcs, each ray divided uniformly between the circle and the outer boundary.
///
/// When `radial_edges` is given, the sweep is open and the first/last rays are
/// boundaries with the given set names; otherwise the arcs must close the circle.
fn ogrid(
    center: [f64; 2],
    radius: f64,
    arcs: &[Arc<'_>],
    radial_layers: usize,
    hole_name: &str,
    radial_edges: Option<(&str, &str)>,
) -> Block {
    let periodic = radial_edges.is_none();
    // Angular stations (2 per element) with the arc that owns each.
    let mut stations: Vec<(f64, usize)> = Vec::new();
    for (k, arc) in arcs.iter().enumerate() {
        let m = 2 * arc.elements;
        for s in 0..m {
            let t = s as f64 / m as f64;
            stations.push((arc.from + t * (arc.to - arc.from), k));
        }
    }
    if !periodic {
        let last = arcs.last().expect("at least one arc");
        stations.push((last.to, arcs.len() - 1));
    }
    let na = stations.len();
    let nr = 2 * radial_layers + 1;
    let id = |a: usize, r: usize| (a % na) * nr + r;

    let mut coords = vec![[0.0; 2]; na * nr];
    for (a, &(phi, k)) in stations.iter().enumerate() {
        let inner = [
            center[0] + radius * phi.cos(),
            center[1] + radius * phi.sin(),
        ];
        let outer = (arcs[k].outer)(phi);
        for r in 0..nr {
            let t = r as f64 / (nr - 1) as f64;
            coords[id(a, r)] = [
                inner[0] + t * (outer[0] - inner[0]),
                inner[1] + t * (outer[1] - inner[1]),
            ];
        }
    }

    let n_ang_el = if periodic { na / 2 } else { (na - 1) / 2 };
    let mut elements = Vec::with_capacity(n_ang_el * radial_layers);
    for ea in 0..n_ang_el {
        for er in 0..radial_layers {
            let (a, r) = (2 * ea, 2 * er);
            let mut el = [
                id(a, r),
                id(a + 2, r),
                id(a + 2, r + 2),
                id(a, r + 2),
                id(a + 1, r),
                id(a + 2, r + 1),
                id(a + 1, r + 2),
                id(a, r + 1),
                id(a + 1, r + 1),
            ];
            orient(&mut el, &coords);
            elements.push(el);
        }
    }
    // Rays evaluated at axis-aligned corners carry round-off; snap it away.
    for c in coords.iter_mut().flatten() {
        if c.abs() < 1e-12 {
            *c = 0.0;
        }
    }

    let mut sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    sets.insert(hole_name.into(), (0..na).map(|a| id(a, 0)).collect());
    for (k, arc) in arcs.iter().enumerate() {
        let lo = stations.iter().position(|s| s.1 == k).unwrap();
        let hi = lo + 2 * arc.elements;
        sets.entry(arc.name.into())
            .or_default()
            .extend((lo..=hi).map(|a| id(a, nr - 1)));
    }
    if let Some((first, last)) = radial_edges {
        sets.entry(first.into())
            .or_default()
            .extend((0..nr).map(|r| id(0, r)));
        sets.entry(last.into())
            .or_default()
            .extend((0..nr).map(|r| id(na - 1, r)));
    }
    Block {
        coords,
        elements,
        sets,
    }
}

/// Reverses the local orientation of an element whose Jacobian is negative.
fn orient(el: &mut [usize; 9], coords: &[[f64; 2]]) {
    let c = el.map(|i| coords[i]);
    if quad9::point_geometry(&c, 0.0, 0.0).det_j < 0.0 {
        el.swap(1, 3);
        el.swap(4, 7);
        el.swap(5, 6);
    }
}

fn block_into_mesh(block: Block) -> Result<Mesh> {
    let nodes = block
        .coords
        .iter()
        .enumerate()
        .map(|(id, c)| Node {
            id,
            x: c[0],
            y: c[1],
        })
        .collect();
    let elements = block
        .elements
        .into_iter()
        .map(|node_ids| Quad9Element { node_ids })
        .collect();
    Mesh::new(nodes, elements, block.sets)
}

fn ray_to_vertical(center: [f64; 2], x: f64) -> impl Fn(f64) -> [f64; 2] {
    move |phi: f64| [x, center[1] + (x - center[0]) * phi.tan()]
}

fn ray_to_horizontal(center: [f64; 2], y: f64) -> impl Fn(f64) -> [f64; 2] {
    move |phi: f64| {
        let (s, c) = phi.sin_cos();
        [center[0] + (y - center[1]) * c / s, y]
    }
}

fn ray_to_ellipse(center: [f64; 2], ax: f64, ay: f64) -> impl Fn(f64) -> [f64; 2] {
    move |phi: f64| {
        let (v, u) = phi.sin_cos();
        let a = (u / ax).powi(2) + (v / ay).powi(2);
        let b = 2.0 * (center[0] * u / (ax * ax) + center[1] * v / (ay * ay));
        let c = (center[0] / ax).powi(2) + (center[1] / ay).powi(2) - 1.0;
        let t = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        [center[0] + t * u, center[1] + t * v]
    }
}

/// Symmetric half of a square plate (`width` x `height`, modeled for x in
/// `[0, width/2]`) with a circular hole of `radius` centered on the symmetry edge.
///
/// `layers` radial element rings; `per_side` elements along the outer bottom
/// and top edges (twice that along the right edge). Boundary sets: `hole`,
/// `left` (symmetry edge), `bottom`, `right`, `top`, `bottom_left`.
pub fn plate_with_half_hole(
    width: f64,
    height: f64,
    radius: f64,
    per_side: usize,
    layers: usize,
) -> Result<Mesh> {
    let half = width / 2.0;
    if !(radius > 0.0 && radius < half.min(height / 2.0)) || per_side == 0 || layers == 0 {
        return Err(Error::InvalidArgument(
            "invalid plate-with-hole geometry".into(),
        ));
    }
    let center = [0.0, height / 2.0];
    let lo = (-center[1]).atan2(half);
    let hi = (height - center[1]).atan2(half);
    let bottom = ray_to_horizontal(center, 0.0);
    let right = ray_to_vertical(center, half);
    let top = ray_to_horizontal(center, height);
    let arcs = [
        Arc {
            name: "bottom",
            from: -PI / 2.0,
            to: lo,
            elements: per_side,
            outer: &bottom,
        },
        Arc {
            name: "right",
            from: lo,
            to: hi,
            elements: 2 * per_side,
            outer: &right,
        },
        Arc {
            name: "top",
            from: hi,
            to: PI / 2.0,
            elements: per_side,
            outer: &top,
        },
    ];
    let mut block = ogrid(
        center,
        radius,
        &arcs,
        layers,
        "hole",
        Some(("left", "left")),
    );
    // Snap the rays on the symmetry line exactly onto x = 0.
    for &id in &block.sets["left"] {
        block.coords[id][0] = 0.0;
    }
    let bl = block.sets["bottom"]
        .iter()
        .copied()
        .find(|&i| block.coords[i][0] == 0.0 && block.coords[i][1] == 0.0)
        .expect("bottom-left corner node");
    block.sets.insert("bottom_left".into(), vec![bl]);
    block_into_mesh(block)
}

/// Half ellipse `x >= 0, (x/ax)^2 + (y/ay)^2 <= 1` with two holes of `radius`
/// centered at `(hole_x, ±hole_y)`; built as an O-grid around each hole in the
/// upper and lower quarters and merged along y = 0.
///
/// Boundary sets: `curved`, `left` (straight edge), `holes`, `bottom_left`.
pub fn half_ellipse_two_holes(
    ax: f64,
    ay: f64,
    hole_x: f64,
    hole_y: f64,
    radius: f64,
    sweep_elements: [usize; 3],
    layers: usize,
) -> Result<Mesh> {
    if !(ax > 0.0 && ay > 0.0 && radius > 0.0) || layers == 0 {
        return Err(Error::InvalidArgument(
            "invalid half-ellipse geometry".into(),
        ));
    }
    let reach = ((hole_x + radius) / ax).powi(2) + ((hole_y + radius) / ay).powi(2);
    if hole_x - radius <= 0.0 || hole_y - radius <= 0.0 || reach >= 1.0 {
        return Err(Error::InvalidArgument(
            "holes must lie inside the quarter domains".into(),
        ));
    }
    let center = [hole_x, hole_y];
    let a_right = (-center[1]).atan2(ax - center[0]);
    let a_top = (ay - center[1]).atan2(-center[0]);
    let a_origin = (-center[1]).atan2(-center[0]) + 2.0 * PI;
    let curved = ray_to_ellipse(center, ax, ay);
    let left = ray_to_vertical(center, 0.0);
    let axis = ray_to_horizontal(center, 0.0);
    let arcs = [
        Arc {
            name: "curved",
            from: a_right,
            to: a_top,
            elements: sweep_elements[0],
            outer: &curved,
        },
        Arc {
            name: "left",
            from: a_top,
            to: a_origin,
            elements: sweep_elements[1],
            outer: &left,
        },
        Arc {
            name: "axis",
            from: a_origin,
            to: a_right + 2.0 * PI,
            elements: sweep_elements[2],
            outer: &axis,
        },
    ];
    let upper = ogrid(center, radius, &arcs, layers, "holes", None);

    // Mirror the upper quarter; nodes on y = 0 are shared.
    let n_up = upper.coords.len();
    let mut coords = upper.coords.clone();
    let mut mirror_id = vec![usize::MAX; n_up];
    for (i, c) in upper.coords.iter().enumerate() {
        if c[1] == 0.0 {
            mirror_id[i] = i;
        } else {
            mirror_id[i] = coords.len();
            coords.push([c[0], -c[1]]);
        }
    }
    let mut elements = upper.elements.clone();
    for el in &upper.elements {
        let mut m = el.map(|i| mirror_id[i]);
        orient(&mut m, &coords);
        elements.push(m);
    }
    let mut sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for name in ["curved", "left", "holes"] {
        let ids = &upper.sets[name];
        let mut all: Vec<usize> = ids.clone();
        all.extend(ids.iter().map(|&i| mirror_id[i]));
        sets.insert(name.into(), all);
    }
    let bl = (0..coords.len())
        .find(|&i| coords[i][0] == 0.0 && coords[i][1] == -ay)
        .or_else(|| {
            // Fall back to the lowest node on the straight edge.
            sets["left"]
                .iter()
                .copied()
                .min_by(|&a, &b| coords[a][1].total_cmp(&coords[b][1]))
        })
        .expect("bottom-left node");
    sets.insert("bottom_left".into(), vec![bl]);
    block_into_mesh(Block {
        coords,
        elements,
        sets,
    })
}
