//! Structured triangulations of squares and discs, with crease-aware topology.
//!
//! Conventions used throughout the crate:
//!
//! * triangles are stored counter-clockwise;
//! * local edge `e` of a triangle is the edge opposite local vertex `e`;
//! * every edge carries a frame `(z_S, n_S, t_S)` where the normal points out
//!   of the adjacent triangle with the lower index (outward on the boundary),
//!   `t_S` is `n_S` rotated by +90°, and the endpoints are ordered so that
//!   `t_S = (z_S² − z_S¹) / |S|`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{norm, signed_area, sub, Vec2};
use crate::{Error, Result};

/// Geometry of a crease separating the domain into a left (tag 1) and a
/// right (tag 2) subdomain. Creases are graphs `x = c(y)` running from the
/// bottom to the top boundary of a square.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CreaseSpec {
    #[default]
    None,
    /// The vertical line `{x} × [-a, a]`.
    Straight { x: f64 },
    /// `x = offset + amplitude · sin(π y / a)`; with `offset = 1/3`,
    /// `amplitude = 1/6` on `[-1, 1]²` this is the curved bilayer crease.
    Arc { offset: f64, amplitude: f64 },
}

impl CreaseSpec {
    /// The curved crease `C(t) = (sin(πt)/6 + 1/3, t)`.
    pub fn curved() -> Self {
        CreaseSpec::Arc {
            offset: 1.0 / 3.0,
            amplitude: 1.0 / 6.0,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, CreaseSpec::None)
    }

    /// Abscissa of the crease curve at height `y` on a square of half width `a`.
    pub fn x_at(&self, y: f64, half_width: f64) -> Option<f64> {
        match *self {
            CreaseSpec::None => None,
            CreaseSpec::Straight { x } => Some(x),
            CreaseSpec::Arc { offset, amplitude } => {
                Some(offset + amplitude * libm::sin(PI * y / half_width))
            }
        }
    }
}

/// A mesh edge with its frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints `z_S¹, z_S²` ordered along the tangent.
    pub nodes: [usize; 2],
    /// Adjacent triangles; the first is the lower index.
    pub triangles: [Option<usize>; 2],
    pub midpoint: Vec2,
    pub normal: Vec2,
    pub tangent: Vec2,
    pub length: f64,
    pub on_crease: bool,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }
}

/// Frame of a single edge as returned by [`Triangulation::edge_frames`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub midpoint: Vec2,
    pub normal: Vec2,
    pub tangent: Vec2,
}

/// A conforming triangulation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Triangulation {
    nodes: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    triangle_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    boundary: Vec<bool>,
    subdomain: Vec<u8>,
    crease_nodes: Vec<bool>,
    crease_polyline: Vec<usize>,
    crease_slot: Vec<Option<usize>>,
    num_crease_nodes: usize,
    areas: Vec<f64>,
    mesh_size: f64,
}

impl Triangulation {
    /// Builds a triangulation from raw tables.
    ///
    /// Triangles are reoriented counter-clockwise. `subdomain` defaults to
    /// tag 1 everywhere; `crease_polyline` lists the crease nodes in order and
    /// every consecutive pair must be a mesh edge.
    pub fn new(
        nodes: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        subdomain: Option<Vec<u8>>,
        crease_polyline: Vec<usize>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidInput("triangulation without triangles".into()));
        }
        let n = nodes.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut mesh_size: f64 = 0.0;
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "triangle {t} references a missing node"
                )));
            }
            let mut area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area < 0.0 {
                tri.swap(1, 2);
                area = -area;
            }
            let diam = (0..3)
                .map(|e| norm(sub(nodes[tri[(e + 1) % 3]], nodes[tri[(e + 2) % 3]])))
                .fold(0.0, f64::max);
            if !(area > 1e-14 * diam * diam) {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
            mesh_size = mesh_size.max(diam);
            areas.push(area);
        }

        let subdomain = match subdomain {
            Some(tags) => {
                if tags.len() != triangles.len() || tags.iter().any(|&s| s != 1 && s != 2) {
                    return Err(Error::InvalidInput(
                        "subdomain tags must be 1 or 2, one per triangle".into(),
                    ));
                }
                tags
            }
            None => vec![1; triangles.len()],
        };

        // Edge construction keyed by sorted node pair.
        let mut edge_map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (e, slot) in local.iter_mut().enumerate() {
                let p = tri[(e + 1) % 3];
                let q = tri[(e + 2) % 3];
                let key = (p.min(q), p.max(q));
                let idx = match edge_map.get(&key) {
                    Some(&idx) => {
                        let edge = &mut edges[idx];
                        if edge.triangles[1].is_some() {
                            return Err(Error::InvalidInput(format!(
                                "edge ({p}, {q}) shared by more than two triangles"
                            )));
                        }
                        edge.triangles[1] = Some(t);
                        idx
                    }
                    None => {
                        // First visit comes from the lower triangle index, whose
                        // counter-clockwise traversal p -> q gives an outward normal.
                        let d = sub(nodes[q], nodes[p]);
                        let length = norm(d);
                        let tangent = [d[0] / length, d[1] / length];
                        let normal = [tangent[1], -tangent[0]];
                        let midpoint = [
                            0.5 * (nodes[p][0] + nodes[q][0]),
                            0.5 * (nodes[p][1] + nodes[q][1]),
                        ];
                        edges.push(Edge {
                            nodes: [p, q],
                            triangles: [Some(t), None],
                            midpoint,
                            normal,
                            tangent,
                            length,
                            on_crease: false,
                        });
                        edge_map.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                *slot = idx;
            }
            triangle_edges.push(local);
        }

        let mut boundary = vec![false; n];
        for edge in edges.iter().filter(|e| e.is_boundary()) {
            boundary[edge.nodes[0]] = true;
            boundary[edge.nodes[1]] = true;
        }

        let mut crease_nodes = vec![false; n];
        let mut crease_slot = vec![None; n];
        let mut num_crease_nodes = 0;
        for &v in &crease_polyline {
            if v >= n {
                return Err(Error::InvalidInput("crease node out of range".into()));
            }
            if crease_nodes[v] {
                return Err(Error::InvalidInput(format!("crease node {v} listed twice")));
            }
            crease_nodes[v] = true;
            crease_slot[v] = Some(n + num_crease_nodes);
            num_crease_nodes += 1;
        }
        for pair in crease_polyline.windows(2) {
            let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            match edge_map.get(&key) {
                Some(&idx) => edges[idx].on_crease = true,
                None => {
                    return Err(Error::CreaseNotRepresentable(format!(
                        "consecutive crease nodes {} and {} are not joined by a mesh edge",
                        pair[0], pair[1]
                    )))
                }
            }
        }
        if let (Some(&first), Some(&last)) = (crease_polyline.first(), crease_polyline.last()) {
            if !boundary[first] || !boundary[last] {
                return Err(Error::CreaseNotRepresentable(
                    "crease endpoints must lie on the boundary".into(),
                ));
            }
        }

        Ok(Triangulation {
            nodes,
            triangles,
            triangle_edges,
            edges,
            boundary,
            subdomain,
            crease_nodes,
            crease_polyline,
            crease_slot,
            num_crease_nodes,
            areas,
            mesh_size,
        })
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Global edge indices of a triangle; local edge `e` is opposite vertex `e`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_coords(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&v| self.boundary[v])
    }

    pub fn subdomain(&self, t: usize) -> u8 {
        self.subdomain[t]
    }

    pub fn subdomains(&self) -> &[u8] {
        &self.subdomain
    }

    pub fn is_crease_node(&self, v: usize) -> bool {
        self.crease_nodes[v]
    }

    pub fn crease_polyline(&self) -> &[usize] {
        &self.crease_polyline
    }

    pub fn num_crease_nodes(&self) -> usize {
        self.num_crease_nodes
    }

    pub fn has_crease(&self) -> bool {
        self.num_crease_nodes > 0
    }

    /// Index of the gradient slot used by node `v` inside subdomain `side`.
    /// Off-crease nodes have one slot (`v`); crease nodes use an extra slot
    /// numbered after all nodes for the right subdomain.
    pub fn grad_slot(&self, v: usize, side: u8) -> usize {
        match (side, self.crease_slot[v]) {
            (2, Some(extra)) => extra,
            _ => v,
        }
    }

    /// Number of gradient slots (nodes plus one extra per crease node).
    pub fn num_grad_slots(&self) -> usize {
        self.nodes.len() + self.num_crease_nodes
    }

    /// Node owning a gradient slot.
    pub fn slot_node(&self, slot: usize) -> usize {
        if slot < self.nodes.len() {
            slot
        } else {
            self.crease_polyline[slot - self.nodes.len()]
        }
    }

    /// Maximum triangle diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        norm(sub(a, b)).max(norm(sub(b, c))).max(norm(sub(c, a)))
    }

    /// Midpoint and orthonormal frame of every edge.
    pub fn edge_frames(&self) -> Vec<EdgeFrame> {
        self.edges
            .iter()
            .map(|e| EdgeFrame {
                midpoint: e.midpoint,
                normal: e.normal,
                tangent: e.tangent,
            })
            .collect()
    }

    /// Node closest to `p` (ties resolved by lowest index).
    pub fn nearest_node(&self, p: Vec2) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, z) in self.nodes.iter().enumerate() {
            let d = norm(sub(*z, p));
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Copy of the mesh shifted by `offset`.
    pub fn translated(&self, offset: Vec2) -> Triangulation {
        let mut out = self.clone();
        for z in &mut out.nodes {
            z[0] += offset[0];
            z[1] += offset[1];
        }
        for e in &mut out.edges {
            e.midpoint[0] += offset[0];
            e.midpoint[1] += offset[1];
        }
        out
    }
}

/// Uniform grid on `[-a, a]²` with grid spacing at most `h`, each cell split
/// along its `/` diagonal. A crease is resolved along grid nodes.
pub fn make_square_mesh(half_width: f64, h: f64, crease: CreaseSpec) -> Result<Triangulation> {
    if !(half_width > 0.0) || !(h > 0.0) || !half_width.is_finite() || !h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "square mesh needs positive half width and mesh size (got {half_width}, {h})"
        )));
    }
    let cells = libm::ceil(2.0 * half_width / h - 1e-9).max(1.0) as usize;
    let spacing = 2.0 * half_width / cells as f64;
    let stride = cells + 1;
    let index = |row: usize, col: usize| row * stride + col;

    let mut nodes = Vec::with_capacity(stride * stride);
    for row in 0..=cells {
        for col in 0..=cells {
            nodes.push([
                -half_width + col as f64 * spacing,
                -half_width + row as f64 * spacing,
            ]);
        }
    }

    // Crease column per grid row; cells whose diagonal must follow a
    // descending crease are flipped to `\`.
    let mut crease_cols: Vec<usize> = Vec::new();
    match crease {
        CreaseSpec::None => {}
        CreaseSpec::Straight { x } => {
            let col_f = (x + half_width) / spacing;
            let col = libm::round(col_f);
            if (col_f - col).abs() > 1e-9 || col <= 0.0 || col >= cells as f64 {
                return Err(Error::CreaseNotRepresentable(format!(
                    "straight crease x = {x} is not an interior grid line (spacing {spacing})"
                )));
            }
            crease_cols = vec![col as usize; cells + 1];
        }
        CreaseSpec::Arc { .. } => {
            for row in 0..=cells {
                let y = nodes[index(row, 0)][1];
                let xc = crease.x_at(y, half_width).unwrap_or(0.0);
                let col = libm::round((xc + half_width) / spacing);
                if col <= 0.0 || col >= cells as f64 {
                    return Err(Error::CreaseNotRepresentable(format!(
                        "crease leaves the interior at y = {y}"
                    )));
                }
                let col = col as usize;
                nodes[index(row, col)][0] = xc;
                crease_cols.push(col);
            }
            for (row, w) in crease_cols.windows(2).enumerate() {
                if w[0].abs_diff(w[1]) > 1 {
                    return Err(Error::CreaseNotRepresentable(format!(
                        "crease moves more than one grid column between rows {row} and {}",
                        row + 1
                    )));
                }
            }
        }
    }

    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for row in 0..cells {
        for col in 0..cells {
            let (a, b, c, d) = (
                index(row, col),
                index(row, col + 1),
                index(row + 1, col + 1),
                index(row + 1, col),
            );
            let flip = !crease_cols.is_empty()
                && crease_cols[row + 1] + 1 == crease_cols[row]
                && crease_cols[row + 1] == col;
            if flip {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }

    let polyline: Vec<usize> = crease_cols
        .iter()
        .enumerate()
        .map(|(row, &col)| index(row, col))
        .collect();
    let subdomain = if polyline.is_empty() {
        None
    } else {
        let pts: Vec<Vec2> = polyline.iter().map(|&v| nodes[v]).collect();
        let tags = triangles
            .iter()
            .map(|tri| {
                let cx = (nodes[tri[0]][0] + nodes[tri[1]][0] + nodes[tri[2]][0]) / 3.0;
                let cy = (nodes[tri[0]][1] + nodes[tri[1]][1] + nodes[tri[2]][1]) / 3.0;
                if cx < polyline_x_at(&pts, cy) {
                    1
                } else {
                    2
                }
            })
            .collect();
        Some(tags)
    };
    Triangulation::new(nodes, triangles, subdomain, polyline)
}

/// Piecewise-linear interpolation of a polyline that is monotone in `y`.
fn polyline_x_at(pts: &[Vec2], y: f64) -> f64 {
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if y >= p[1] && y <= q[1] {
            let s = (y - p[1]) / (q[1] - p[1]);
            return p[0] + s * (q[0] - p[0]);
        }
    }
    pts[0][0]
}

/// Concentric-ring triangulation of the disc `B_radius(0)`.
///
/// Ring `j` carries `6j` equally spaced nodes; the ring count is the smallest
/// one for which every triangle diameter is at most `h`. The origin is node 0.
pub fn make_disc_mesh(radius: f64, h: f64) -> Result<Triangulation> {
    if !(radius > 0.0) || !(h > 0.0) || !radius.is_finite() || !h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "disc mesh needs positive radius and mesh size (got {radius}, {h})"
        )));
    }
    let mut rings = libm::ceil(radius / h - 1e-9).max(1.0) as usize;
    loop {
        let mesh = disc_with_rings(radius, rings)?;
        if mesh.mesh_size() <= h * (1.0 + 1e-12) {
            return Ok(mesh);
        }
        rings += 1;
    }
}

/// Disc mesh whose node angles are remapped by `φ ↦ φ + warp · sin 2φ`.
///
/// Radii, connectivity and the origin node are unchanged and the boundary
/// stays on the circle. The map keeps the reflections in both axes but
/// breaks the 60° rotational symmetry of the ring construction, which lets
/// a flow started from a symmetric state pick a cylinder axis aligned with
/// a coordinate direction. Element diameters grow by at most `1 + 2|warp|`.
/// Requires `|warp| < 1/2` so that the angular map stays monotone.
pub fn make_disc_mesh_warped(radius: f64, h: f64, warp: f64) -> Result<Triangulation> {
    if !(warp.abs() < 0.5) {
        return Err(Error::InvalidInput(format!("disc warp must satisfy |warp| < 1/2, got {warp}")));
    }
    let base = make_disc_mesh(radius, h)?;
    if warp == 0.0 {
        return Ok(base);
    }
    let nodes = base
        .nodes()
        .iter()
        .map(|z| {
            let r = libm::hypot(z[0], z[1]);
            let phi = libm::atan2(z[1], z[0]);
            let phi = phi + warp * libm::sin(2.0 * phi);
            [r * libm::cos(phi), r * libm::sin(phi)]
        })
        .collect();
    Triangulation::new(nodes, base.triangles().to_vec(), None, Vec::new())
}

fn disc_with_rings(radius: f64, rings: usize) -> Result<Triangulation> {
    let mut nodes: Vec<Vec2> = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for j in 1..=rings {
        ring_start.push(nodes.len());
        let r = radius * j as f64 / rings as f64;
        let count = 6 * j;
        for k in 0..count {
            let phi = 2.0 * PI * k as f64 / count as f64;
            nodes.push([r * libm::cos(phi), r * libm::sin(phi)]);
        }
    }

    let mut triangles = Vec::new();
    for j in 1..=rings {
        let outer = ring_start[j];
        let n_out = 6 * j;
        if j == 1 {
            for k in 0..n_out {
                triangles.push([0, outer + k, outer + (k + 1) % n_out]);
            }
            continue;
        }
        let inner = ring_start[j - 1];
        let n_in = 6 * (j - 1);
        let (mut i_in, mut i_out) = (0usize, 0usize);
        while i_in < n_in || i_out < n_out {
            let next_in = (i_in + 1) as f64 / n_in as f64;
            let next_out = (i_out + 1) as f64 / n_out as f64;
            let a = inner + i_in % n_in;
            let b = outer + i_out % n_out;
            if i_in >= n_in || (i_out < n_out && next_out <= next_in) {
                triangles.push([a, b, outer + (i_out + 1) % n_out]);
                i_out += 1;
            } else {
                triangles.push([a, b, inner + (i_in + 1) % n_in]);
                i_in += 1;
            }
        }
    }
    Triangulation::new(nodes, triangles, None, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polygon_area(mesh: &Triangulation, ring: &[usize]) -> f64 {
        let n = ring.len();
        (0..n)
            .map(|i| {
                let p = mesh.nodes()[ring[i]];
                let q = mesh.nodes()[ring[(i + 1) % n]];
                0.5 * (p[0] * q[1] - p[1] * q[0])
            })
            .sum()
    }

    #[test]
    fn warped_disc_keeps_boundary_on_circle() {
        let base = make_disc_mesh(1.0, 0.2).unwrap();
        let mesh = make_disc_mesh_warped(1.0, 0.2, 0.03).unwrap();
        assert_eq!(mesh.num_nodes(), base.num_nodes());
        assert_eq!(mesh.nodes()[0], [0.0, 0.0]);
        for v in mesh.boundary_nodes() {
            assert!((norm(mesh.nodes()[v]) - 1.0).abs() < 1e-14);
        }
        assert!(mesh.mesh_size() <= 0.2 * 1.06);
        assert!(make_disc_mesh_warped(1.0, 0.2, 0.5).is_err());
    }

    #[test]
    fn coarsest_square_has_two_triangles() {
        let mesh = make_square_mesh(1.0, 2.0, CreaseSpec::None).unwrap();
        assert_eq!(mesh.num_nodes(), 4);
        assert_eq!(mesh.num_triangles(), 2);
        assert!((mesh.total_area() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn straight_crease_marks_center_column() {
        let mesh = make_square_mesh(1.0, 0.05, CreaseSpec::Straight { x: 0.0 }).unwrap();
        let on_axis: Vec<usize> = (0..mesh.num_nodes())
            .filter(|&v| mesh.nodes()[v][0].abs() < 1e-12)
            .collect();
        assert_eq!(on_axis.len(), 41);
        for v in 0..mesh.num_nodes() {
            assert_eq!(mesh.is_crease_node(v), on_axis.contains(&v));
        }
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangle_coords(t);
            let cx = (a[0] + b[0] + c[0]) / 3.0;
            assert_eq!(mesh.subdomain(t), if cx < 0.0 { 1 } else { 2 });
        }
    }

    #[test]
    fn straight_crease_off_grid_is_rejected() {
        let err = make_square_mesh(1.0, 0.1, CreaseSpec::Straight { x: 0.03 }).unwrap_err();
        assert!(matches!(err, Error::CreaseNotRepresentable(_)));
        // odd number of cells: x = 0 is not a grid line
        let err = make_square_mesh(1.0, 2.0 / 3.0, CreaseSpec::Straight { x: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::CreaseNotRepresentable(_)));
    }

    #[test]
    fn arc_crease_follows_the_curve() {
        let mesh = make_square_mesh(1.0, 0.05, CreaseSpec::curved()).unwrap();
        let crease = CreaseSpec::curved();
        let poly = mesh.crease_polyline();
        assert_eq!(poly.len(), 41);
        for &v in poly {
            let z = mesh.nodes()[v];
            assert!((z[0] - crease.x_at(z[1], 1.0).unwrap()).abs() < 1e-14);
        }
        // segments stay within one element diameter of the analytic arc
        for w in poly.windows(2) {
            let (p, q) = (mesh.nodes()[w[0]], mesh.nodes()[w[1]]);
            for s in 0..=10 {
                let s = s as f64 / 10.0;
                let y = p[1] + s * (q[1] - p[1]);
                let x = p[0] + s * (q[0] - p[0]);
                assert!((x - crease.x_at(y, 1.0).unwrap()).abs() <= mesh.mesh_size());
            }
        }
        assert_eq!(mesh.num_grad_slots(), mesh.num_nodes() + 41);
    }

    #[test]
    fn coarsest_disc_is_a_hexagon_fan() {
        let mesh = make_disc_mesh(1.0, 10.0).unwrap();
        assert_eq!(mesh.num_nodes(), 7);
        assert_eq!(mesh.num_triangles(), 6);
        assert_eq!(mesh.nodes()[0], [0.0, 0.0]);
        assert!(mesh.triangles().iter().all(|t| t[0] == 0));
    }

    #[test]
    fn disc_mesh_size_and_boundary() {
        let mesh = make_disc_mesh(1.0, 0.05).unwrap();
        assert!(mesh.mesh_size() <= 0.05);
        for v in mesh.boundary_nodes() {
            let r = norm(mesh.nodes()[v]);
            assert!((r - 1.0).abs() < 1e-14);
        }
        assert_eq!(mesh.nearest_node([0.0, 0.0]), 0);
    }

    #[test]
    fn disc_node_count_grows_quadratically() {
        let counts: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| make_disc_mesh(1.0, h).unwrap().num_nodes() as f64)
            .collect();
        for w in counts.windows(2) {
            let ratio = w[1] / w[0];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn frames_of_axis_aligned_and_diagonal_edges() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let mesh = Triangulation::new(nodes, vec![[0, 1, 2]], None, Vec::new()).unwrap();
        let horizontal = mesh
            .edges()
            .iter()
            .find(|e| {
                let mut n = e.nodes;
                n.sort();
                n == [0, 1]
            })
            .unwrap();
        assert_eq!(horizontal.midpoint, [0.5, 0.0]);
        assert_eq!(horizontal.tangent[0].abs(), 1.0);
        assert_eq!(horizontal.tangent[1], 0.0);
        assert_eq!(horizontal.normal[1].abs(), 1.0);
        // boundary normal points outward (away from the third vertex)
        assert!(horizontal.normal[1] < 0.0);

        let diag = mesh
            .edges()
            .iter()
            .find(|e| {
                let mut n = e.nodes;
                n.sort();
                n == [0, 2]
            })
            .unwrap();
        assert_eq!(diag.midpoint, [0.5, 0.5]);
        assert!((norm(diag.normal) - 1.0).abs() < 1e-15);
        assert!((norm(diag.tangent) - 1.0).abs() < 1e-15);
        assert!(crate::linalg::dot(diag.normal, diag.tangent).abs() < 1e-15);
    }

    #[test]
    fn frame_invariants_on_disc() {
        let mesh = make_disc_mesh(1.0, 0.1).unwrap();
        for e in mesh.edges() {
            let [p, q] = e.nodes;
            let (zp, zq) = (mesh.nodes()[p], mesh.nodes()[q]);
            assert!((norm(e.normal) - 1.0).abs() < 1e-14);
            assert!((norm(e.tangent) - 1.0).abs() < 1e-14);
            assert!(crate::linalg::dot(e.normal, e.tangent).abs() < 1e-14);
            assert_eq!(e.midpoint, [0.5 * (zp[0] + zq[0]), 0.5 * (zp[1] + zq[1])]);
            let t = sub(zq, zp);
            assert!((t[0] / e.length - e.tangent[0]).abs() < 1e-14);
            assert!((t[1] / e.length - e.tangent[1]).abs() < 1e-14);
            // the normal points away from the lower-index triangle
            let tri = mesh.triangles()[e.triangles[0].unwrap()];
            let opposite = tri.iter().find(|&&v| v != p && v != q).unwrap();
            assert!(crate::linalg::dot(sub(mesh.nodes()[*opposite], e.midpoint), e.normal) < 0.0);
        }
    }

    #[test]
    fn areas_match_boundary_polygon() {
        let mesh = make_disc_mesh(1.0, 0.2).unwrap();
        let rings = libm::round(((1.0 + 4.0 * (mesh.num_nodes() as f64 - 1.0) / 3.0).sqrt() - 1.0) / 2.0) as usize;
        let start = 1 + 3 * (rings - 1) * rings;
        let ring: Vec<usize> = (start..mesh.num_nodes()).collect();
        let exact = polygon_area(&mesh, &ring);
        assert!((mesh.total_area() - exact).abs() <= 1e-12 * exact);

        let square = make_square_mesh(1.0, 0.1, CreaseSpec::curved()).unwrap();
        assert!((square.total_area() - 4.0).abs() <= 1e-12 * 4.0);
    }

    #[test]
    fn edges_shared_by_one_or_two_triangles() {
        let mesh = make_square_mesh(1.0, 0.25, CreaseSpec::None).unwrap();
        let mut count = vec![0usize; mesh.edges().len()];
        for t in 0..mesh.num_triangles() {
            for e in mesh.triangle_edges(t) {
                count[e] += 1;
            }
        }
        for (e, c) in mesh.edges().iter().zip(count) {
            assert_eq!(c, if e.is_boundary() { 1 } else { 2 });
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let err = Triangulation::new(nodes, vec![[0, 1, 2]], None, Vec::new()).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { .. }));
    }
}
