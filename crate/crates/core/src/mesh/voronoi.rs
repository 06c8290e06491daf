//! Centroidal Voronoi meshes clipped to a polygonal domain.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::clip::{clip_convex, intersect_convex, HalfPlane};
use super::{dedup_cyclic, merge_close_nodes, Element, PolygonalMesh, MERGE_TOL_FACTOR};
use crate::error::{Result, VemError};
use crate::geometry::{self, Point};

const MAX_ATTEMPTS: u64 = 8;

/// One closed boundary loop; `tags[i]` names the edge from vertex i to i+1.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainLoop {
    pub vertices: Vec<Point>,
    pub tags: Vec<String>,
}

impl DomainLoop {
    pub fn new(vertices: Vec<Point>, tags: Vec<String>) -> Self {
        DomainLoop { vertices, tags }
    }

    pub fn uniform(vertices: Vec<Point>, tag: &str) -> Self {
        let tags = vec![tag.to_string(); vertices.len()];
        DomainLoop { vertices, tags }
    }

    fn reversed(&self) -> Self {
        let n = self.vertices.len();
        let vertices: Vec<Point> = self.vertices.iter().rev().copied().collect();
        // edge i of the reversed loop runs between old vertices n-1-i and n-2-i
        let tags = (0..n).map(|i| self.tags[(2 * n - 2 - i) % n].clone()).collect();
        DomainLoop { vertices, tags }
    }
}

/// Polygonal domain with optional holes.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub outer: DomainLoop,
    pub holes: Vec<DomainLoop>,
}

impl Domain {
    pub fn new(outer: DomainLoop, holes: Vec<DomainLoop>) -> Self {
        Domain { outer, holes }
    }

    /// Axis-aligned rectangle with edges tagged bottom, right, top, left.
    pub fn rectangle(x: [f64; 2], y: [f64; 2]) -> Self {
        let vertices = vec![[x[0], y[0]], [x[1], y[0]], [x[1], y[1]], [x[0], y[1]]];
        let tags = ["bottom", "right", "top", "left"].map(String::from).to_vec();
        Domain { outer: DomainLoop { vertices, tags }, holes: vec![] }
    }

    /// Annular sector between `theta[0]` and `theta[1]` with arcs split into
    /// straight segments. Tags: inner, outer, start (θ = theta[0]), end.
    pub fn annular_sector(r_inner: f64, r_outer: f64, theta: [f64; 2], inner_segments: usize, outer_segments: usize) -> Self {
        let mut vertices = Vec::new();
        let mut tags = Vec::new();
        for k in 0..=outer_segments {
            let t = theta[0] + (theta[1] - theta[0]) * k as f64 / outer_segments as f64;
            vertices.push(polar(r_outer, t));
            tags.push(if k < outer_segments { "outer" } else { "end" }.to_string());
        }
        for k in 0..=inner_segments {
            let t = theta[1] + (theta[0] - theta[1]) * k as f64 / inner_segments as f64;
            vertices.push(polar(r_inner, t));
            tags.push(if k < inner_segments { "inner" } else { "start" }.to_string());
        }
        // start from the inner point on theta[0] so the first edge is the start cut
        let n = vertices.len();
        vertices.rotate_left(n - 1);
        tags.rotate_left(n - 1);
        Domain { outer: DomainLoop { vertices, tags }, holes: vec![] }
    }

    fn normalized(&self) -> Result<Domain> {
        let check = |l: &DomainLoop, what: &str| -> Result<()> {
            if l.vertices.len() < 3 {
                return Err(VemError::InvalidDomain(format!("{what} loop has fewer than 3 vertices")));
            }
            if l.tags.len() != l.vertices.len() {
                return Err(VemError::InvalidDomain(format!("{what} loop needs one tag per edge")));
            }
            if l.vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return Err(VemError::InvalidDomain(format!("{what} loop has non-finite coordinates")));
            }
            if !geometry::is_simple(&l.vertices, 0.0) || geometry::signed_area(&l.vertices) == 0.0 {
                return Err(VemError::InvalidDomain(format!("{what} loop is not a simple polygon")));
            }
            Ok(())
        };
        check(&self.outer, "outer")?;
        let outer = if geometry::signed_area(&self.outer.vertices) > 0.0 { self.outer.clone() } else { self.outer.reversed() };
        let mut holes = Vec::new();
        for h in &self.holes {
            check(h, "hole")?;
            if !h.vertices.iter().all(|&p| geometry::point_in_polygon(p, &outer.vertices)) {
                return Err(VemError::InvalidDomain("hole is not inside the outer boundary".into()));
            }
            holes.push(if geometry::signed_area(&h.vertices) < 0.0 { h.clone() } else { h.reversed() });
        }
        Ok(Domain { outer, holes })
    }

    pub fn area(&self) -> f64 {
        geometry::signed_area(&self.outer.vertices).abs()
            - self.holes.iter().map(|h| geometry::signed_area(&h.vertices).abs()).sum::<f64>()
    }

    pub fn contains(&self, p: Point) -> bool {
        geometry::point_in_polygon(p, &self.outer.vertices)
            && !self.holes.iter().any(|h| geometry::point_in_polygon(p, &h.vertices))
    }

    fn loops(&self) -> impl Iterator<Item = &DomainLoop> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.outer.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

fn polar(r: f64, t: f64) -> Point {
    let (mut s, mut c) = t.sin_cos();
    // keep the symmetry cuts exactly on the axes
    if c.abs() < 1e-15 {
        c = 0.0;
    }
    if s.abs() < 1e-15 {
        s = 0.0;
    }
    [r * c, r * s]
}

/// Uniform bucket grid over the seeds for neighbour queries.
struct SeedGrid {
    origin: Point,
    size: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl SeedGrid {
    fn new(seeds: &[Point], lo: Point, hi: Point) -> Self {
        let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(f64::MIN_POSITIVE);
        let size = (area / seeds.len().max(1) as f64).sqrt();
        let dims = [
            (((hi[0] - lo[0]) / size).ceil() as usize).max(1),
            (((hi[1] - lo[1]) / size).ceil() as usize).max(1),
        ];
        let mut grid = SeedGrid { origin: lo, size, dims, buckets: vec![Vec::new(); dims[0] * dims[1]] };
        for (i, &p) in seeds.iter().enumerate() {
            let (cx, cy) = grid.cell(p);
            grid.buckets[cy * dims[0] + cx].push(i);
        }
        grid
    }

    fn cell(&self, p: Point) -> (usize, usize) {
        let cx = ((p[0] - self.origin[0]) / self.size).floor().clamp(0.0, (self.dims[0] - 1) as f64) as usize;
        let cy = ((p[1] - self.origin[1]) / self.size).floor().clamp(0.0, (self.dims[1] - 1) as f64) as usize;
        (cx, cy)
    }
}

/// Voronoi cell of `seeds[i]` restricted to the bounding box `frame`.
fn voronoi_cell(i: usize, seeds: &[Point], grid: &SeedGrid, frame: &[Point]) -> Vec<Point> {
    let p = seeds[i];
    let mut cell = frame.to_vec();
    let (cx, cy) = grid.cell(p);
    let max_ring = grid.dims[0].max(grid.dims[1]);
    for ring in 0..=max_ring {
        let (x0, x1) = (cx as i64 - ring as i64, cx as i64 + ring as i64);
        let (y0, y1) = (cy as i64 - ring as i64, cy as i64 + ring as i64);
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                let on_ring = gx == x0 || gx == x1 || gy == y0 || gy == y1;
                if !on_ring || gx < 0 || gy < 0 || gx >= grid.dims[0] as i64 || gy >= grid.dims[1] as i64 {
                    continue;
                }
                for &j in &grid.buckets[gy as usize * grid.dims[0] + gx as usize] {
                    if j == i {
                        continue;
                    }
                    let q = seeds[j];
                    let n = geometry::sub(q, p);
                    if n[0].hypot(n[1]) == 0.0 {
                        continue;
                    }
                    let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                    cell = clip_convex(&cell, &HalfPlane::new(mid, n));
                }
            }
        }
        // seeds beyond twice the cell radius cannot cut the cell any more
        let radius = cell.iter().map(|&v| geometry::dist(v, p)).fold(0.0, f64::max);
        if ring as f64 * grid.size > 2.0 * radius {
            break;
        }
    }
    cell
}

/// Clipped cells of every seed, one list of CCW pieces per seed.
fn clipped_cells(domain: &Domain, seeds: &[Point], eps: f64) -> Result<Vec<Vec<Vec<Point>>>> {
    let (lo, hi) = domain.bbox();
    let pad = 0.1 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let frame = [
        [lo[0] - pad, lo[1] - pad],
        [hi[0] + pad, lo[1] - pad],
        [hi[0] + pad, hi[1] + pad],
        [lo[0] - pad, hi[1] + pad],
    ];
    let grid = SeedGrid::new(seeds, lo, hi);
    let rings: Vec<Vec<Point>> = domain.loops().map(|l| l.vertices.clone()).collect();
    let min_area = eps * eps;
    let mut out = Vec::with_capacity(seeds.len());
    for i in 0..seeds.len() {
        let cell = voronoi_cell(i, seeds, &grid, &frame);
        let pieces = intersect_convex(&rings, &cell, eps, min_area)
            .ok_or_else(|| VemError::MeshGeneration(format!("clipping the cell of seed {i} failed")))?;
        out.push(pieces);
    }
    Ok(out)
}

fn sample_seeds(domain: &Domain, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let (lo, hi) = domain.bbox();
    let mut seeds = Vec::with_capacity(n);
    let mut tries = 0usize;
    while seeds.len() < n {
        tries += 1;
        if tries > 1000 * n + 1000 {
            return Err(VemError::MeshGeneration("could not place seeds inside the domain".into()));
        }
        let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        if domain.contains(p) {
            seeds.push(p);
        }
    }
    Ok(seeds)
}

fn pieces_centroid(pieces: &[Vec<Point>]) -> Option<Point> {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for p in pieces {
        let ar = geometry::signed_area(p);
        let c = geometry::centroid(p)?;
        a += ar;
        cx += ar * c[0];
        cy += ar * c[1];
    }
    (a > 0.0).then(|| [cx / a, cy / a])
}

fn build_mesh(domain: &Domain, cells: &[Vec<Vec<Point>>], region: &str, tol: f64) -> Result<PolygonalMesh> {
    let mut raw_nodes = Vec::new();
    let mut raw_elements = Vec::new();
    for pieces in cells {
        for piece in pieces {
            let start = raw_nodes.len();
            raw_nodes.extend_from_slice(piece);
            raw_elements.push((start..raw_nodes.len()).collect::<Vec<usize>>());
        }
    }
    let rep = merge_close_nodes(&raw_nodes, tol);
    let mut elements = Vec::new();
    for verts in raw_elements {
        let mut v: Vec<usize> = verts.into_iter().map(|i| rep[i]).collect();
        dedup_cyclic(&mut v);
        if v.len() >= 3 {
            elements.push(Element { vertices: v, region: region.to_string() });
        }
    }
    let mut mesh = PolygonalMesh { nodes: raw_nodes, elements, boundary: BTreeMap::new() };
    mesh.compact_nodes();
    tag_boundary(&mut mesh, domain, tol)?;
    Ok(mesh)
}

/// Tags every single-incidence edge with the tag of the nearest domain edge.
pub(crate) fn tag_boundary(mesh: &mut PolygonalMesh, domain: &Domain, tol: f64) -> Result<()> {
    let inc = mesh.edge_incidence();
    let segments: Vec<(Point, Point, &str)> = domain
        .loops()
        .flat_map(|l| {
            let n = l.vertices.len();
            (0..n).map(move |i| (l.vertices[i], l.vertices[(i + 1) % n], l.tags[i].as_str()))
        })
        .collect();
    let mut boundary: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();
    let far = 1e3 * tol.max(1e-12 * mesh.diameter());
    for el in &mesh.elements {
        let n = el.vertices.len();
        for i in 0..n {
            let (a, b) = (el.vertices[i], el.vertices[(i + 1) % n]);
            let key = if a < b { (a, b) } else { (b, a) };
            if inc.get(&key) != Some(&1) {
                continue;
            }
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let (d, tag) = segments
                .iter()
                .map(|&(s0, s1, tag)| (geometry::point_segment_distance(mid, s0, s1).0, tag))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .expect("domain has edges");
            if d > far {
                return Err(VemError::MeshGeneration(format!(
                    "edge ({a}, {b}) has a single element but lies {d:.3e} away from the domain boundary"
                )));
            }
            boundary.entry(tag.to_string()).or_default().push([a, b]);
        }
    }
    mesh.boundary = boundary;
    Ok(())
}

fn attempt(domain: &Domain, n_seeds: usize, lloyd_iterations: usize, seed: u64, region: &str) -> Result<PolygonalMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = domain.bbox();
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    let eps = 1e-12 * diam;
    let tol = MERGE_TOL_FACTOR * diam;
    let mut seeds = sample_seeds(domain, n_seeds, &mut rng)?;
    let mut cells = clipped_cells(domain, &seeds, eps)?;
    for _ in 0..lloyd_iterations {
        for (s, pieces) in seeds.iter_mut().zip(&cells) {
            if let Some(c) = pieces_centroid(pieces) {
                if domain.contains(c) {
                    *s = c;
                }
            }
        }
        cells = clipped_cells(domain, &seeds, eps)?;
    }
    if let Some(i) = cells.iter().position(|c| c.is_empty()) {
        return Err(VemError::MeshGeneration(format!("seed {i} has an empty cell after clipping")));
    }
    let mesh = build_mesh(domain, &cells, region, tol)?;
    mesh.validate()?;
    mesh.audit_topology()?;
    let area = mesh.total_area();
    if (area - domain.area()).abs() > 1e-8 * domain.area() {
        return Err(VemError::MeshGeneration(format!("element areas sum to {area}, domain area is {}", domain.area())));
    }
    Ok(mesh)
}

/// Centroidal Voronoi mesh of `domain` with `n_seeds` cells (cells split by
/// a non-convex boundary yield several elements). Seeds are drawn from a
/// ChaCha8 stream seeded with `seed`; a failed attempt is retried with the
/// next stream, up to a fixed number of times.
pub fn generate_polygonal_mesh(
    domain: &Domain,
    n_seeds: usize,
    lloyd_iterations: usize,
    seed: u64,
    region: &str,
) -> Result<PolygonalMesh> {
    if n_seeds == 0 {
        return Err(VemError::InvalidDomain("at least one seed is required".into()));
    }
    let domain = domain.normalized()?;
    let mut last = None;
    for k in 0..MAX_ATTEMPTS {
        match attempt(&domain, n_seeds, lloyd_iterations, seed.wrapping_add(k), region) {
            Ok(mesh) => return Ok(mesh),
            Err(e) => {
                log::debug!("voronoi attempt {k} failed: {e}");
                last = Some(e);
            }
        }
    }
    Err(VemError::MeshGeneration(format!(
        "no valid mesh after {MAX_ATTEMPTS} attempts: {}",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_seed_gives_the_square() {
        let m = generate_polygonal_mesh(&Domain::rectangle([0.0, 1.0], [0.0, 1.0]), 1, 0, 7, "a").unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.num_nodes(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(m.boundary.len(), 4);
    }

    #[test]
    fn hundred_seeds_cover_the_square() {
        let m = generate_polygonal_mesh(&Domain::rectangle([0.0, 1.0], [0.0, 1.0]), 100, 5, 1, "a").unwrap();
        assert_eq!(m.num_elements(), 100);
        assert!((m.total_area() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = Domain::rectangle([0.0, 2.0], [0.0, 1.0]);
        let a = generate_polygonal_mesh(&d, 40, 3, 11, "a").unwrap();
        let b = generate_polygonal_mesh(&d, 40, 3, 11, "a").unwrap();
        assert_eq!(a, b);
        let c = generate_polygonal_mesh(&d, 40, 3, 12, "a").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn annular_sector_centroids_inside() {
        let d = Domain::annular_sector(20.0, 60.0, [0.0, std::f64::consts::FRAC_PI_2], 24, 48);
        let m = generate_polygonal_mesh(&d, 500, 3, 5, "a").unwrap();
        for e in 0..m.num_elements() {
            let c = m.element_geometry(e).unwrap().centroid;
            assert!(geometry::point_in_polygon(c, &d.outer.vertices));
        }
        assert!((m.total_area() - d.area()).abs() < 1e-8 * d.area());
        for tag in ["inner", "outer", "start", "end"] {
            assert!(m.boundary.contains_key(tag), "missing tag {tag}");
        }
    }

    #[test]
    fn notched_domain_and_hole() {
        let notch = DomainLoop::uniform(
            vec![[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [1.6, 3.0], [1.6, 1.0], [1.4, 1.0], [1.4, 3.0], [0.0, 3.0]],
            "wall",
        );
        let m = generate_polygonal_mesh(&Domain::new(notch, vec![]), 30, 2, 3, "a").unwrap();
        assert!((m.total_area() - (9.0 - 0.4)).abs() < 1e-8);

        let outer = DomainLoop::uniform(vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]], "outer");
        let hole = DomainLoop::uniform(vec![[1.5, 1.5], [2.5, 1.5], [2.5, 2.5], [1.5, 2.5]], "hole");
        let m = generate_polygonal_mesh(&Domain::new(outer, vec![hole]), 4, 0, 3, "a").unwrap();
        assert!((m.total_area() - 15.0).abs() < 1e-8);
        assert!(m.boundary.contains_key("hole"));
    }

    #[test]
    fn reversed_loop_keeps_edge_tags() {
        let l = DomainLoop::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            vec!["a".into(), "b".into(), "c".into()],
        );
        let r = l.reversed();
        // reversed: (1,1) -> (1,0) is old edge b, (1,0) -> (0,0) is a, (0,0) -> (1,1) is c
        assert_eq!(r.vertices, vec![[1.0, 1.0], [1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(r.tags, vec!["b", "a", "c"]);
    }
}
