//! Discretized equivariant domains as gain graphs.
//!
//! A [`GainGraph`] is a finite weighted graph whose edges carry isometry
//! words (gains) of the target space; an [`EquivariantMap`] assigns one
//! target point per vertex. Equivariance under a representation is encoded
//! purely by the gains over this fundamental vertex set: the energy of an
//! edge compares the tail value with the gain-translated head value, so no
//! covering space is ever materialized.
//!
//! Edge weights stand in for the domain metric of the continuum energy;
//! vertex measures weight the L2 distance between maps.

use crate::error::{Error, Result};
use crate::space::{NpcSpace, SpacePoint};
use crate::wp::{apply_isometry_point, IsometryWord};

/// One undirected edge, stored once with an orientation.
///
/// The value of the head vertex seen from the tail is `gain * value(head)`;
/// traversing the edge backwards applies the inverse word.
#[derive(Clone, Debug)]
pub struct GainEdge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    pub gain: IsometryWord,
}

/// Structured-mesh metadata for grid-built graphs (used by the chart
/// diagnostics, which need a notion of grid neighbors and spacing).
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeta {
    pub cols: usize,
    pub rows: usize,
    pub spacing: f64,
    /// Columns wrap around (the wrap edges may carry a nontrivial gain).
    pub periodic: bool,
}

/// A connected weighted graph with group-element edge labels.
#[derive(Clone, Debug)]
pub struct GainGraph {
    target: NpcSpace,
    vertex_measures: Vec<f64>,
    edges: Vec<GainEdge>,
    pinned: Vec<bool>,
    /// Uniform geometric edge length (grid spacing when built as a mesh);
    /// the Lipschitz proxy of an energy report divides by it.
    edge_length: f64,
    /// incidence: per vertex, (edge index, vertex is tail)
    incidence: Vec<Vec<(usize, bool)>>,
    grid: Option<GridMeta>,
}

impl GainGraph {
    pub fn new(target: NpcSpace, vertex_measures: Vec<f64>, edges: Vec<GainEdge>) -> Result<Self> {
        let n = vertex_measures.len();
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        if vertex_measures.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::invalid("vertex measures must be positive"));
        }
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) out of range for {n} vertices",
                    e.tail, e.head
                )));
            }
            if !(e.weight > 0.0) {
                return Err(Error::invalid("edge weights must be positive"));
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.tail].push((i, true));
            incidence[e.head].push((i, false));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(ei, is_tail) in &incidence[v] {
                let w = if is_tail { edges[ei].head } else { edges[ei].tail };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("graph must be connected"));
        }
        Ok(GainGraph {
            target,
            pinned: vec![false; n],
            vertex_measures,
            edges,
            edge_length: 1.0,
            incidence,
            grid: None,
        })
    }

    /// An `n`-cycle with unit measures; `wrap_gain` labels the closing edge.
    pub fn cycle(target: NpcSpace, n: usize, wrap_gain: IsometryWord, weight: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("cycle needs at least 3 vertices"));
        }
        let mut edges = Vec::with_capacity(n);
        for i in 0..n - 1 {
            edges.push(GainEdge { tail: i, head: i + 1, weight, gain: IsometryWord::identity() });
        }
        edges.push(GainEdge { tail: n - 1, head: 0, weight, gain: wrap_gain });
        GainGraph::new(target, vec![1.0; n], edges)
    }

    /// A path on `n` vertices with unit weights and measures.
    pub fn path(target: NpcSpace, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("path needs at least 2 vertices"));
        }
        let edges = (0..n - 1)
            .map(|i| GainEdge { tail: i, head: i + 1, weight: 1.0, gain: IsometryWord::identity() })
            .collect();
        GainGraph::new(target, vec![1.0; n], edges)
    }

    /// A `cols x rows` grid with spacing `h`. When `wrap_gain` is given the
    /// columns close up into a cylinder and the wrap edges carry the gain.
    /// Vertex `(c, r)` has index `r * cols + c`.
    pub fn grid(
        target: NpcSpace,
        cols: usize,
        rows: usize,
        spacing: f64,
        wrap_gain: Option<IsometryWord>,
    ) -> Result<Self> {
        if cols < 2 || rows < 2 {
            return Err(Error::invalid("grid needs at least 2x2 vertices"));
        }
        if !(spacing > 0.0) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let idx = |c: usize, r: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push(GainEdge {
                        tail: idx(c, r),
                        head: idx(c + 1, r),
                        weight: 1.0,
                        gain: IsometryWord::identity(),
                    });
                } else if let Some(g) = &wrap_gain {
                    edges.push(GainEdge {
                        tail: idx(c, r),
                        head: idx(0, r),
                        weight: 1.0,
                        gain: g.clone(),
                    });
                }
                if r + 1 < rows {
                    edges.push(GainEdge {
                        tail: idx(c, r),
                        head: idx(c, r + 1),
                        weight: 1.0,
                        gain: IsometryWord::identity(),
                    });
                }
            }
        }
        let periodic = wrap_gain.is_some();
        let mut g = GainGraph::new(target, vec![1.0; cols * rows], edges)?;
        g.edge_length = spacing;
        g.grid = Some(GridMeta { cols, rows, spacing, periodic });
        Ok(g)
    }

    pub fn target(&self) -> &NpcSpace {
        &self.target
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_measures.len()
    }

    pub fn vertex_measures(&self) -> &[f64] {
        &self.vertex_measures
    }

    pub fn edges(&self) -> &[GainEdge] {
        &self.edges
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn grid_meta(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    /// Marks a vertex as pinned (held fixed by the solver).
    pub fn pin_vertex(&mut self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        self.pinned[v] = true;
        Ok(())
    }

    /// Pins the boundary of a grid graph: the first and last rows, plus the
    /// first and last columns when the grid does not wrap.
    pub fn pin_grid_boundary(&mut self) -> Result<()> {
        let Some(meta) = self.grid.clone() else {
            return Err(Error::invalid("not a grid graph"));
        };
        for r in 0..meta.rows {
            for c in 0..meta.cols {
                let boundary_row = r == 0 || r == meta.rows - 1;
                let boundary_col = !meta.periodic && (c == 0 || c == meta.cols - 1);
                if boundary_row || boundary_col {
                    self.pinned[r * meta.cols + c] = true;
                }
            }
        }
        Ok(())
    }

    pub fn is_pinned(&self, v: usize) -> bool {
        self.pinned[v]
    }

    /// Incident edges of a vertex as `(edge index, vertex is tail)`.
    pub fn incident(&self, v: usize) -> &[(usize, bool)] {
        &self.incidence[v]
    }

    /// Distinct nonidentity gains (the generator set used by displacement
    /// diagnostics).
    pub fn gain_generators(&self) -> Vec<IsometryWord> {
        let mut gens: Vec<IsometryWord> = Vec::new();
        for e in &self.edges {
            if !e.gain.is_identity() && !gens.contains(&e.gain) {
                gens.push(e.gain.clone());
            }
        }
        gens
    }

    /// The value of the neighbor of a vertex across edge `ei`, translated
    /// into that vertex's frame by the matching orientation of the gain.
    pub fn seen_value(&self, map: &EquivariantMap, ei: usize, v_is_tail: bool) -> Result<SpacePoint> {
        let e = &self.edges[ei];
        if v_is_tail {
            apply_isometry_point(&e.gain, &self.target, &map.values[e.head])
        } else {
            apply_isometry_point(&e.gain.inverse(), &self.target, &map.values[e.tail])
        }
    }

    pub fn validate_map(&self, map: &EquivariantMap) -> Result<()> {
        if map.values.len() != self.vertex_count() {
            return Err(Error::mismatch(format!(
                "map has {} values for {} vertices",
                map.values.len(),
                self.vertex_count()
            )));
        }
        for v in &map.values {
            self.target.validate_point(v)?;
        }
        Ok(())
    }

    /// A map constant at the basepoint.
    pub fn constant_map(&self) -> EquivariantMap {
        EquivariantMap { values: vec![self.target.basepoint(); self.vertex_count()] }
    }

    /// A random map (random initializations, audits).
    pub fn random_map<R: rand::Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> EquivariantMap {
        EquivariantMap {
            values: (0..self.vertex_count())
                .map(|_| self.target.sample_point(rng, scale))
                .collect(),
        }
    }
}

/// Assignment of a target point to each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantMap {
    pub values: Vec<SpacePoint>,
}

impl EquivariantMap {
    pub fn new(values: Vec<SpacePoint>) -> Self {
        EquivariantMap { values }
    }
}

/// Energy of a map together with its per-edge breakdown.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub total: f64,
    pub per_edge: Vec<f64>,
    /// max over edges of d(tail, gain * head) / edge length
    pub lipschitz: f64,
}

/// Discrete energy `E = 1/2 sum_e w_e d^2(u_tail, gain_e * u_head)`,
/// each undirected edge counted once.
pub fn energy(graph: &GainGraph, map: &EquivariantMap) -> Result<EnergyReport> {
    graph.validate_map(map)?;
    let mut per_edge = Vec::with_capacity(graph.edges().len());
    let mut max_stretch = 0.0f64;
    for e in graph.edges() {
        let seen = apply_isometry_point(&e.gain, graph.target(), &map.values[e.head])?;
        let d = graph.target().distance_unchecked(&map.values[e.tail], &seen);
        per_edge.push(0.5 * e.weight * d * d);
        max_stretch = max_stretch.max(d / graph.edge_length());
    }
    Ok(EnergyReport { total: pairwise_sum(&per_edge), per_edge, lipschitz: max_stretch })
}

/// Numerically stable pairwise summation.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// L2 distance between two maps: `(sum_v mu_v d^2(u_v, v_v))^(1/2)`.
pub fn d2_distance(graph: &GainGraph, u: &EquivariantMap, v: &EquivariantMap) -> Result<f64> {
    graph.validate_map(u)?;
    graph.validate_map(v)?;
    let terms: Vec<f64> = graph
        .vertex_measures()
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(mu, (a, b))| {
            let d = graph.target().distance_unchecked(a, b);
            mu * d * d
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// Vertexwise geodesic interpolation between two maps.
pub fn geodesic_homotopy(
    graph: &GainGraph,
    u: &EquivariantMap,
    v: &EquivariantMap,
    t: f64,
) -> Result<EquivariantMap> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("homotopy parameter {t} outside [0,1]")));
    }
    graph.validate_map(u)?;
    graph.validate_map(v)?;
    let values = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| graph.target().geodesic_point_unchecked(a, b, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivariantMap { values })
}

/// Interpolation defect of the energy against its quadratic comparison:
///
/// ```text
/// [(1-t) E(u) + t E(v) - E(u_t)] / [t (1-t)]
///   - 1/2 sum_e w_e [ d(gain*u_head, gain*v_head) - d(u_tail, v_tail) ]^2
/// ```
///
/// Nonnegative (up to arithmetic) in every NPC target; zero exactly for
/// aligned flat configurations.
pub fn convexity_deficit(
    graph: &GainGraph,
    u: &EquivariantMap,
    v: &EquivariantMap,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!(
            "deficit parameter {t} must lie strictly inside (0,1)"
        )));
    }
    let eu = energy(graph, u)?.total;
    let ev = energy(graph, v)?.total;
    let ut = geodesic_homotopy(graph, u, v, t)?;
    let eut = energy(graph, &ut)?.total;
    let chord = ((1.0 - t) * eu + t * ev - eut) / (t * (1.0 - t));
    let mut grad_terms = Vec::with_capacity(graph.edges().len());
    for e in graph.edges() {
        let gu = apply_isometry_point(&e.gain, graph.target(), &u.values[e.head])?;
        let gv = apply_isometry_point(&e.gain, graph.target(), &v.values[e.head])?;
        let d_head = graph.target().distance_unchecked(&gu, &gv);
        let d_tail = graph
            .target()
            .distance_unchecked(&u.values[e.tail], &v.values[e.tail]);
        let diff = d_head - d_tail;
        grad_terms.push(0.5 * e.weight * diff * diff);
    }
    Ok(chord - pairwise_sum(&grad_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e1() -> NpcSpace {
        NpcSpace::euclidean(1).unwrap()
    }

    fn ep(x: f64) -> SpacePoint {
        SpacePoint::Euclidean(vec![x])
    }

    #[test]
    fn constant_map_with_identity_gains_has_zero_energy() {
        let g = GainGraph::cycle(e1(), 5, IsometryWord::identity(), 1.0).unwrap();
        let m = g.constant_map();
        let r = energy(&g, &m).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r.per_edge.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn single_edge_energy_is_half_weight_distance_squared() {
        let g = GainGraph::new(
            e1(),
            vec![1.0, 1.0],
            vec![GainEdge { tail: 0, head: 1, weight: 1.0, gain: IsometryWord::identity() }],
        )
        .unwrap();
        let m = EquivariantMap::new(vec![ep(0.0), ep(2.0)]);
        let r = energy(&g, &m).unwrap();
        assert_eq!(r.total, 2.0);
        assert_eq!(r.lipschitz, 2.0);
    }

    #[test]
    fn translation_cycle_energy_at_equal_spacing() {
        // n-cycle in R with the closing edge gain a translation by T: at
        // equally spaced values every edge has length T/n, so with unit
        // weights E = 1/2 n (T/n)^2 = T^2/(2n). The expected value is
        // frozen from the closed-form quadratic minimization.
        let n = 8;
        let t_shift = 1.0;
        let g = GainGraph::cycle(e1(), n, IsometryWord::translation(0, t_shift), 1.0).unwrap();
        let m = EquivariantMap::new(
            (0..n).map(|i| ep(t_shift * i as f64 / n as f64)).collect(),
        );
        let r = energy(&g, &m).unwrap();
        let oracle = t_shift * t_shift / (2.0 * n as f64);
        assert!((r.total - oracle).abs() < 1e-14, "E = {}", r.total);
    }

    #[test]
    fn d2_distance_examples() {
        let g = GainGraph::path(NpcSpace::euclidean(2).unwrap(), 2).unwrap();
        let u = EquivariantMap::new(vec![
            SpacePoint::Euclidean(vec![0.0, 0.0]),
            SpacePoint::Euclidean(vec![1.0, 0.0]),
        ]);
        let v = EquivariantMap::new(vec![
            SpacePoint::Euclidean(vec![3.0, 0.0]),
            SpacePoint::Euclidean(vec![1.0, 4.0]),
        ]);
        assert_eq!(d2_distance(&g, &u, &u).unwrap(), 0.0);
        assert_eq!(d2_distance(&g, &u, &v).unwrap(), 5.0);
    }

    #[test]
    fn homotopy_endpoints_and_linearity() {
        let g = GainGraph::path(e1(), 3).unwrap();
        let u = EquivariantMap::new(vec![ep(0.0), ep(1.0), ep(2.0)]);
        let v = EquivariantMap::new(vec![ep(4.0), ep(3.0), ep(-2.0)]);
        assert_eq!(geodesic_homotopy(&g, &u, &v, 0.0).unwrap(), u);
        assert_eq!(geodesic_homotopy(&g, &u, &v, 1.0).unwrap(), v);
        let mid = geodesic_homotopy(&g, &u, &v, 0.5).unwrap();
        assert_eq!(mid.values[0], ep(2.0));
        assert!(geodesic_homotopy(&g, &u, &v, -0.1).is_err());
    }

    #[test]
    fn deficit_vanishes_for_identical_maps() {
        let g = GainGraph::cycle(e1(), 4, IsometryWord::identity(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = g.random_map(&mut rng, 1.0);
        assert_eq!(convexity_deficit(&g, &u, &u, 0.3).unwrap(), 0.0);
        assert!(convexity_deficit(&g, &u, &u, 0.0).is_err());
        assert!(convexity_deficit(&g, &u, &u, 1.0).is_err());
    }

    #[test]
    fn deficit_zero_for_aligned_affine_maps_on_path() {
        // Affine maps whose pointwise gap keeps one sign realize the
        // equality case of the flat quadrilateral comparison.
        let n = 6;
        let g = GainGraph::path(e1(), n).unwrap();
        let u = EquivariantMap::new((0..n).map(|i| ep(i as f64)).collect());
        let v = EquivariantMap::new((0..n).map(|i| ep(2.0 * i as f64 + 1.0)).collect());
        for t in [0.2, 0.5, 0.8] {
            let d = convexity_deficit(&g, &u, &v, t).unwrap();
            assert!(d.abs() <= 1e-10, "deficit {d} at t={t}");
        }
    }

    #[test]
    fn deficit_nonnegative_for_random_star_tree_maps() {
        let target = NpcSpace::star_tree(vec![1.0; 3]).unwrap();
        let g = GainGraph::cycle(target, 5, IsometryWord::identity(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = g.random_map(&mut rng, 1.0);
            let v = g.random_map(&mut rng, 1.0);
            for t in [0.25, 0.5, 0.75] {
                let d = convexity_deficit(&g, &u, &v, t).unwrap();
                assert!(d >= -1e-8, "deficit {d}");
            }
        }
    }

    #[test]
    fn energy_invariant_under_edge_reversal() {
        let target = NpcSpace::wp_model(2).unwrap();
        let gain = IsometryWord::twist_power(1, 3);
        let mut edges = vec![
            GainEdge { tail: 0, head: 1, weight: 1.3, gain: gain.clone() },
            GainEdge { tail: 1, head: 2, weight: 0.7, gain: IsometryWord::twist(2) },
            GainEdge { tail: 2, head: 0, weight: 2.0, gain: IsometryWord::identity() },
        ];
        let g1 = GainGraph::new(target.clone(), vec![1.0; 3], edges.clone()).unwrap();
        edges[0] = GainEdge { tail: 1, head: 0, weight: 1.3, gain: gain.inverse() };
        let g2 = GainGraph::new(target, vec![1.0; 3], edges).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = g1.random_map(&mut rng, 1.0);
        let e1 = energy(&g1, &m).unwrap().total;
        let e2 = energy(&g2, &m).unwrap().total;
        assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0), "{e1} vs {e2}");
    }

    #[test]
    fn energy_total_matches_per_edge_sum() {
        let g = GainGraph::cycle(NpcSpace::euclidean(3).unwrap(), 9, IsometryWord::identity(), 1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = g.random_map(&mut rng, 2.0);
        let r = energy(&g, &m).unwrap();
        let naive: f64 = r.per_edge.iter().sum();
        assert!((r.total - naive).abs() <= 1e-12 * naive.max(1.0));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let edges = vec![GainEdge { tail: 0, head: 1, weight: 1.0, gain: IsometryWord::identity() }];
        assert!(GainGraph::new(e1(), vec![1.0; 3], edges).is_err());
    }

    #[test]
    fn grid_builder_shapes() {
        let g = GainGraph::grid(e1(), 4, 3, 0.5, None).unwrap();
        assert_eq!(g.vertex_count(), 12);
        assert_eq!(g.edges().len(), 3 * 3 + 4 * 2);
        assert_eq!(g.edge_length(), 0.5);
        let wrapped = GainGraph::grid(e1(), 4, 3, 0.5, Some(IsometryWord::identity())).unwrap();
        assert_eq!(wrapped.edges().len(), 4 * 3 + 4 * 2);
        let mut pinned = wrapped.clone();
        pinned.pin_grid_boundary().unwrap();
        assert!(pinned.is_pinned(0));
        assert!(pinned.is_pinned(11));
        assert!(!pinned.is_pinned(5));
    }
}
