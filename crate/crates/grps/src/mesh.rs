//! Structured triangulations of the unit square and their uniform
//! refinement hierarchy.
//!
//! The coarse mesh subdivides [0,1]^2 into Nc x Nc squares, each split into
//! two triangles along the (1,1) direction. Refining J times connects edge
//! midpoints, which reproduces the same structured pattern at side 2^J * Nc,
//! so the fine mesh is generated directly on the finer lattice and the
//! parent/child maps are computed arithmetically.
//!
//! Vertex and triangle numbering is lexicographic by (row, column); within a
//! cell the lower-right triangle precedes the upper-left one.

use std::collections::HashMap;

use crate::error::{GrpsError, Result};

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoint vertex ids, ordered (min, max).
    pub vertices: [usize; 2],
    pub boundary: bool,
    tris: [usize; 2],
}

impl Edge {
    pub fn adjacent_tris(&self) -> &[usize] {
        if self.boundary {
            &self.tris[..1]
        } else {
            &self.tris[..]
        }
    }
}

/// Uniform triangulation of the unit square with `n` squares per side.
#[derive(Debug, Clone)]
pub struct StructuredMesh {
    pub n: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Vertex triples with positive signed area.
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub edges: Vec<Edge>,
    pub edge_lengths: Vec<f64>,
    /// tri_edges[t][k] is the edge between local vertices k and (k+1)%3.
    pub tri_edges: Vec<[usize; 3]>,
    vertex_tri_ptr: Vec<usize>,
    vertex_tri_dat: Vec<usize>,
    edge_map: HashMap<(usize, usize), usize>,
}

impl StructuredMesh {
    pub fn vertex_index(&self, ix: usize, iy: usize) -> usize {
        iy * (self.n + 1) + ix
    }

    pub fn lattice_of(&self, v: usize) -> (usize, usize) {
        (v % (self.n + 1), v / (self.n + 1))
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let (ix, iy) = self.lattice_of(v);
        ix == 0 || iy == 0 || ix == self.n || iy == self.n
    }

    pub fn tris_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_tri_dat[self.vertex_tri_ptr[v]..self.vertex_tri_ptr[v + 1]]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edge_map.get(&key).copied()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    pub fn interior_vertex_count(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.boundary).count()
    }

    /// Longest triangle diameter (the cell diagonal).
    pub fn max_diameter(&self) -> f64 {
        self.edge_lengths.iter().cloned().fold(0.0, f64::max)
    }
}

/// Build the structured triangulation with `n` squares per side.
pub fn build_coarse_mesh(n: usize) -> Result<StructuredMesh> {
    if n == 0 {
        return Err(GrpsError::InvalidArgument(
            "mesh must have at least one square per side".into(),
        ));
    }
    let nv = (n + 1) * (n + 1);
    let mut vertices = Vec::with_capacity(nv);
    for iy in 0..=n {
        for ix in 0..=n {
            vertices.push([ix as f64 / n as f64, iy as f64 / n as f64]);
        }
    }

    let ntri = 2 * n * n;
    let mut triangles = Vec::with_capacity(ntri);
    for cy in 0..n {
        for cx in 0..n {
            let v00 = cy * (n + 1) + cx;
            let v10 = v00 + 1;
            let v01 = v00 + (n + 1);
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let area = 1.0 / (2.0 * (n as f64) * (n as f64));
    let areas = vec![area; ntri];

    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut tri_edges = vec![[0usize; 3]; ntri];
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            let id = *edge_map.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    vertices: [key.0, key.1],
                    boundary: true,
                    tris: [usize::MAX; 2],
                });
                edges.len() - 1
            });
            let e = &mut edges[id];
            if e.tris[0] == usize::MAX {
                e.tris[0] = t;
            } else {
                e.tris[1] = t;
                e.boundary = false;
            }
            tri_edges[t][k] = id;
        }
    }

    let edge_lengths: Vec<f64> = edges
        .iter()
        .map(|e| {
            let pa = vertices[e.vertices[0]];
            let pb = vertices[e.vertices[1]];
            ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
        })
        .collect();

    // vertex -> incident triangles, CSR layout
    let mut counts = vec![0usize; nv];
    for tri in &triangles {
        for &v in tri {
            counts[v] += 1;
        }
    }
    let mut vertex_tri_ptr = vec![0usize; nv + 1];
    for v in 0..nv {
        vertex_tri_ptr[v + 1] = vertex_tri_ptr[v] + counts[v];
    }
    let mut cursor = vertex_tri_ptr.clone();
    let mut vertex_tri_dat = vec![0usize; vertex_tri_ptr[nv]];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            vertex_tri_dat[cursor[v]] = t;
            cursor[v] += 1;
        }
    }

    Ok(StructuredMesh {
        n,
        vertices,
        triangles,
        areas,
        edges,
        edge_lengths,
        tri_edges,
        vertex_tri_ptr,
        vertex_tri_dat,
        edge_map,
    })
}

/// Coarse mesh, its J-fold refinement, and the entity maps between them.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    pub coarse: StructuredMesh,
    pub j: u32,
    pub fine: StructuredMesh,
    /// Fine triangles covering each coarse triangle (ascending ids).
    pub coarse_tri_to_fine: Vec<Vec<usize>>,
    /// Ordered chain of 2^J fine edges along each coarse edge.
    pub coarse_edge_to_fine: Vec<Vec<usize>>,
    /// Interior dof id per fine vertex (None on the boundary).
    pub fine_interior_dofs: Vec<Option<usize>>,
    /// Fine vertex id per interior dof.
    pub interior_vertices: Vec<usize>,
}

/// Refine `coarse` uniformly `j` times by connecting edge midpoints.
pub fn refine(coarse: StructuredMesh, j: u32) -> MeshHierarchy {
    let nc = coarse.n;
    let m = 1usize << j;
    let nf = nc * m;
    let fine = if j == 0 {
        coarse.clone()
    } else {
        build_coarse_mesh(nf).expect("refined side is positive")
    };

    let mut coarse_tri_to_fine = vec![Vec::with_capacity(m * m); coarse.triangles.len()];
    for cy in 0..nc {
        for cx in 0..nc {
            let lower = 2 * (cy * nc + cx);
            let upper = lower + 1;
            for fy in 0..m {
                let gy = cy * m + fy;
                for fx in 0..m {
                    let gx = cx * m + fx;
                    let fl = 2 * (gy * nf + gx);
                    let fu = fl + 1;
                    if fy <= fx {
                        coarse_tri_to_fine[lower].push(fl);
                    } else {
                        coarse_tri_to_fine[upper].push(fl);
                    }
                    if fy < fx {
                        coarse_tri_to_fine[lower].push(fu);
                    } else {
                        coarse_tri_to_fine[upper].push(fu);
                    }
                }
            }
        }
    }

    let mut coarse_edge_to_fine = Vec::with_capacity(coarse.edges.len());
    for e in &coarse.edges {
        let (ax, ay) = coarse.lattice_of(e.vertices[0]);
        let (bx, by) = coarse.lattice_of(e.vertices[1]);
        let dx = bx as i64 - ax as i64;
        let dy = by as i64 - ay as i64;
        let mut chain = Vec::with_capacity(m);
        let mut prev = fine.vertex_index(ax * m, ay * m);
        for k in 1..=m {
            let vx = (ax * m) as i64 + k as i64 * dx;
            let vy = (ay * m) as i64 + k as i64 * dy;
            let cur = fine.vertex_index(vx as usize, vy as usize);
            chain.push(
                fine.edge_between(prev, cur)
                    .expect("refined edge chain stays on the lattice"),
            );
            prev = cur;
        }
        coarse_edge_to_fine.push(chain);
    }

    let nv = fine.vertices.len();
    let mut fine_interior_dofs = vec![None; nv];
    let mut interior_vertices = Vec::with_capacity((nf - 1) * (nf - 1));
    for v in 0..nv {
        if !fine.is_boundary_vertex(v) {
            fine_interior_dofs[v] = Some(interior_vertices.len());
            interior_vertices.push(v);
        }
    }

    MeshHierarchy {
        coarse,
        j,
        fine,
        coarse_tri_to_fine,
        coarse_edge_to_fine,
        fine_interior_dofs,
        interior_vertices,
    }
}

impl MeshHierarchy {
    pub fn n_dofs(&self) -> usize {
        self.interior_vertices.len()
    }

    /// Coordinates of an interior dof.
    pub fn dof_coords(&self, dof: usize) -> [f64; 2] {
        self.fine.vertices[self.interior_vertices[dof]]
    }

    /// Longest coarse triangle diameter.
    pub fn coarse_diameter(&self) -> f64 {
        self.coarse.max_diameter()
    }

    /// Longest fine triangle diameter; equals 2^-J times the coarse one.
    pub fn fine_diameter(&self) -> f64 {
        self.fine.max_diameter()
    }

    /// Fine lattice spacing 1/(2^J * Nc).
    pub fn fine_cell_size(&self) -> f64 {
        1.0 / self.fine.n as f64
    }

    pub fn coarse_cell_size(&self) -> f64 {
        1.0 / self.coarse.n as f64
    }
}

/// An l-layer neighborhood of a measurement's support.
#[derive(Debug, Clone)]
pub struct Patch {
    pub center_index: usize,
    pub level: usize,
    /// Coarse triangle ids, sorted ascending.
    pub coarse_tris: Vec<usize>,
    /// Interior dofs strictly inside the patch, sorted ascending.
    pub fine_dofs: Vec<usize>,
}

impl Patch {
    /// Grow the 0-th layer `support` by `level` rounds of vertex adjacency
    /// and collect the fine dofs strictly inside the union.
    pub fn build(
        h: &MeshHierarchy,
        center_index: usize,
        support: &[usize],
        level: usize,
    ) -> Patch {
        let ntri = h.coarse.triangles.len();
        let mut mark = vec![false; ntri];
        let mut frontier: Vec<usize> = Vec::new();
        for &t in support {
            if !mark[t] {
                mark[t] = true;
                frontier.push(t);
            }
        }
        for _ in 0..level {
            let mut next = Vec::new();
            for &t in &frontier {
                for &v in &h.coarse.triangles[t] {
                    for &t2 in h.coarse.tris_of_vertex(v) {
                        if !mark[t2] {
                            mark[t2] = true;
                            next.push(t2);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let coarse_tris: Vec<usize> = (0..ntri).filter(|&t| mark[t]).collect();

        let mut fine_mark = vec![false; h.fine.triangles.len()];
        for &ct in &coarse_tris {
            for &ft in &h.coarse_tri_to_fine[ct] {
                fine_mark[ft] = true;
            }
        }
        let mut seen = vec![false; h.fine.vertices.len()];
        let mut fine_dofs = Vec::new();
        for &ct in &coarse_tris {
            for &ft in &h.coarse_tri_to_fine[ct] {
                for &v in &h.fine.triangles[ft] {
                    if seen[v] {
                        continue;
                    }
                    seen[v] = true;
                    if let Some(dof) = h.fine_interior_dofs[v] {
                        if h.fine.tris_of_vertex(v).iter().all(|&t| fine_mark[t]) {
                            fine_dofs.push(dof);
                        }
                    }
                }
            }
        }
        fine_dofs.sort_unstable();

        Patch {
            center_index,
            level,
            coarse_tris,
            fine_dofs,
        }
    }

    pub fn covers_all(&self, h: &MeshHierarchy) -> bool {
        self.coarse_tris.len() == h.coarse.triangles.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_nc2() {
        let m = build_coarse_mesh(2).unwrap();
        assert_eq!(m.triangles.len(), 8);
        assert_eq!(m.edges.len(), 16);
        assert_eq!(m.interior_edge_count(), 8);
        assert_eq!(m.interior_vertex_count(), 1);
    }

    #[test]
    fn counts_nc1() {
        let m = build_coarse_mesh(1).unwrap();
        assert_eq!(m.triangles.len(), 2);
        assert_eq!(m.edges.len(), 5);
        assert_eq!(m.interior_edge_count(), 1);
        assert_eq!(m.interior_vertex_count(), 0);
    }

    #[test]
    fn uniform_geometry_nc4() {
        let m = build_coarse_mesh(4).unwrap();
        for &a in &m.areas {
            assert!((a - 1.0 / 32.0).abs() < 1e-15);
        }
        let diag = 2.0f64.sqrt() / 4.0;
        let mut saw_diag = false;
        for (e, &len) in m.edges.iter().zip(&m.edge_lengths) {
            let (ax, ay) = m.lattice_of(e.vertices[0]);
            let (bx, by) = m.lattice_of(e.vertices[1]);
            if ax != bx && ay != by {
                assert!((len - diag).abs() < 1e-15);
                saw_diag = true;
            }
        }
        assert!(saw_diag);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(
            build_coarse_mesh(0),
            Err(GrpsError::InvalidArgument(_))
        ));
    }

    #[test]
    fn entity_counts_closed_forms() {
        for nc in 1..=16usize {
            let m = build_coarse_mesh(nc).unwrap();
            assert_eq!(m.triangles.len(), 2 * nc * nc);
            assert_eq!(m.edges.len(), 3 * nc * nc + 2 * nc);
            assert_eq!(m.interior_edge_count(), 3 * nc * nc - 2 * nc);
            assert_eq!(m.interior_vertex_count(), (nc - 1) * (nc - 1));
            for e in &m.edges {
                assert_eq!(e.adjacent_tris().len(), if e.boundary { 1 } else { 2 });
            }
        }
    }

    #[test]
    fn split_along_diagonal() {
        // every triangle has a (1,1)-direction edge
        let m = build_coarse_mesh(3).unwrap();
        for tri in &m.triangles {
            let mut has_diag = false;
            for k in 0..3 {
                let a = m.vertices[tri[k]];
                let b = m.vertices[tri[(k + 1) % 3]];
                let d = [b[0] - a[0], b[1] - a[1]];
                if d[0].abs() > 1e-12 && (d[0] - d[1]).abs() < 1e-12 {
                    has_diag = true;
                }
                if d[0].abs() > 1e-12 && (d[0] + d[1]).abs() < 1e-12 {
                    panic!("found anti-diagonal edge");
                }
            }
            assert!(has_diag);
        }
    }

    #[test]
    fn positive_signed_areas() {
        let m = build_coarse_mesh(3).unwrap();
        for tri in &m.triangles {
            let (a, b, c) = (
                m.vertices[tri[0]],
                m.vertices[tri[1]],
                m.vertices[tri[2]],
            );
            let signed = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
            assert!(signed > 0.0);
        }
    }

    #[test]
    fn refine_counts() {
        let h = refine(build_coarse_mesh(2).unwrap(), 2);
        assert_eq!(h.fine.triangles.len(), 128);
        assert_eq!(h.fine.vertices.len(), 81);
        assert_eq!(h.n_dofs(), 49);
    }

    #[test]
    fn refine_identity_at_j0() {
        let h = refine(build_coarse_mesh(3).unwrap(), 0);
        assert_eq!(h.fine.triangles.len(), h.coarse.triangles.len());
        for (t, kids) in h.coarse_tri_to_fine.iter().enumerate() {
            assert_eq!(kids, &vec![t]);
        }
        for (e, chain) in h.coarse_edge_to_fine.iter().enumerate() {
            assert_eq!(chain, &vec![e]);
        }
    }

    #[test]
    fn paper_fine_resolution() {
        let h = refine(build_coarse_mesh(8).unwrap(), 5);
        assert!((h.fine_cell_size() - 2f64.powi(-8)).abs() < 1e-15);
        assert!((h.fine_diameter() - 2f64.powi(-5) * h.coarse_diameter()).abs() < 1e-15);
    }

    #[test]
    fn children_partition_parents() {
        let h = refine(build_coarse_mesh(3).unwrap(), 2);
        let mut covered = vec![false; h.fine.triangles.len()];
        for (ct, kids) in h.coarse_tri_to_fine.iter().enumerate() {
            assert_eq!(kids.len(), 16);
            let mut sum = 0.0;
            for &k in kids {
                assert!(!covered[k]);
                covered[k] = true;
                sum += h.fine.areas[k];
            }
            assert!((sum - h.coarse.areas[ct]).abs() < 1e-12);
        }
        assert!(covered.iter().all(|&c| c));
        let total: f64 = h.fine.areas.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_chains_connect_endpoints() {
        let h = refine(build_coarse_mesh(2).unwrap(), 3);
        for (ce, chain) in h.coarse_edge_to_fine.iter().enumerate() {
            assert_eq!(chain.len(), 8);
            let coarse_edge = &h.coarse.edges[ce];
            let (ax, ay) = h.coarse.lattice_of(coarse_edge.vertices[0]);
            let (bx, by) = h.coarse.lattice_of(coarse_edge.vertices[1]);
            let start = h.fine.vertex_index(ax * 8, ay * 8);
            let end = h.fine.vertex_index(bx * 8, by * 8);
            // walk the chain from start, each fine edge must contain the cursor
            let mut cursor = start;
            for &fe in chain {
                let ev = h.fine.edges[fe].vertices;
                cursor = if ev[0] == cursor {
                    ev[1]
                } else {
                    assert_eq!(ev[1], cursor);
                    ev[0]
                };
            }
            assert_eq!(cursor, end);
        }
    }

    #[test]
    fn patch_examples() {
        let h = refine(build_coarse_mesh(4).unwrap(), 2);
        // volume support, level 0
        let p = Patch::build(&h, 0, &[5], 0);
        assert_eq!(p.coarse_tris, vec![5]);
        // interior edge support, level 0: the two adjacent triangles
        let e = h
            .coarse
            .edges
            .iter()
            .position(|e| !e.boundary)
            .unwrap();
        let adj = h.coarse.edges[e].adjacent_tris().to_vec();
        let p = Patch::build(&h, 0, &adj, 0);
        let mut want = adj.clone();
        want.sort_unstable();
        assert_eq!(p.coarse_tris, want);
        // large level covers everything
        let p = Patch::build(&h, 0, &[0], 2 * 4);
        assert!(p.covers_all(&h));
    }

    #[test]
    fn patch_monotone_in_level() {
        let h = refine(build_coarse_mesh(5).unwrap(), 1);
        for support in [vec![12], vec![3, 8]] {
            let mut prev: Option<Patch> = None;
            for l in 0..=5 {
                let p = Patch::build(&h, 0, &support, l);
                if let Some(q) = &prev {
                    assert!(q.coarse_tris.iter().all(|t| p.coarse_tris.contains(t)));
                    assert!(q.fine_dofs.iter().all(|d| p.fine_dofs.contains(d)));
                }
                prev = Some(p);
            }
        }
    }

    #[test]
    fn patch_dofs_strictly_inside() {
        let h = refine(build_coarse_mesh(4).unwrap(), 2);
        let p = Patch::build(&h, 0, &[10], 1);
        // dofs on the patch relative boundary are excluded: every dof's
        // incident fine triangles must lie in the patch
        let mut fine_mark = vec![false; h.fine.triangles.len()];
        for &ct in &p.coarse_tris {
            for &ft in &h.coarse_tri_to_fine[ct] {
                fine_mark[ft] = true;
            }
        }
        for &d in &p.fine_dofs {
            let v = h.interior_vertices[d];
            assert!(h.fine.tris_of_vertex(v).iter().all(|&t| fine_mark[t]));
        }
    }
}
