//! Energy minimization by vertexwise Fréchet-mean relaxation, plus chart
//! diagnostics on structured meshes.
//!
//! Each relaxation step replaces one vertex value by the weighted Fréchet
//! mean of its gain-translated neighbor values and keeps the move only if
//! the incident energy does not increase, so the energy trace is
//! nonincreasing by construction. All solver steps go through metric-space
//! primitives (geodesics and means); the chart-based diagnostics
//! ([`pde_residual`], [`subsolution_check`]) never drive the iteration.

use crate::error::{Error, Result};
use crate::graph::{energy, pairwise_sum, d2_distance, EquivariantMap, GainGraph};
use crate::space::{NpcSpace, SpacePoint};
use crate::wp::{self, delta_functional, ModelMetric, StratifiedPoint};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Vertex visiting order within a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum SweepOrder {
    /// Fresh random permutation every sweep, drawn from the run seed.
    #[default]
    SeededShuffle,
    /// Ascending vertex index.
    InOrder,
}

/// Stopping control for [`minimize`].
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub sweep_order: SweepOrder,
    pub max_sweeps: usize,
    /// Energy-decrease tolerance, relative to the initial energy.
    pub tol_energy_rel: f64,
    /// Maximum vertex movement tolerance (absolute, target metric).
    pub tol_move: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            sweep_order: SweepOrder::SeededShuffle,
            max_sweeps: 100_000,
            tol_energy_rel: 1e-10,
            tol_move: 1e-8,
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Energy decrease and maximum movement both fell below tolerance.
    Converged,
    /// Sweep budget exhausted.
    MaxSweeps,
    /// Vertices kept moving but the energy stopped changing at double
    /// precision for several consecutive sweeps.
    Stalled,
}

/// One row of the solve trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub energy: f64,
    pub max_move: f64,
    /// Smallest length coordinate over the image (stratified targets only).
    pub min_u: Option<f64>,
    /// Largest displacement over vertices under the graph's gain set
    /// (absent when every gain is the identity).
    pub delta_max: Option<f64>,
}

/// Per-sweep records and the termination reason.
#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub records: Vec<SweepRecord>,
    pub termination: Termination,
    /// Set when the image's smallest length coordinate fell below `1e-6`;
    /// the run continues in the completed space.
    pub stratum_collapsed: bool,
}

impl SolveTrace {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map(|r| r.energy).unwrap_or(0.0)
    }

    pub fn sweeps(&self) -> usize {
        self.records.len()
    }

    pub fn min_u_reached(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.min_u)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }
}

/// Smallest length coordinate over the image of a map, when the target has
/// cusp factors.
fn image_min_u(space: &NpcSpace, map: &EquivariantMap) -> Option<f64> {
    fn point_min_u(space: &NpcSpace, p: &SpacePoint) -> Option<f64> {
        match (space, p) {
            (NpcSpace::CuspFactor, SpacePoint::Cusp(c)) => Some(c.u()),
            (NpcSpace::Product(fs), SpacePoint::Product(xs)) => fs
                .iter()
                .zip(xs)
                .filter_map(|(f, x)| point_min_u(f, x))
                .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v)))),
            _ => None,
        }
    }
    map.values
        .iter()
        .filter_map(|p| point_min_u(space, p))
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
}

/// Internal relaxation state: per-edge energy terms are cached so the
/// accept test and the reported energy always see the same numbers.
struct RelaxState {
    edge_terms: Vec<f64>,
}

impl RelaxState {
    fn new(graph: &GainGraph, map: &EquivariantMap) -> Result<Self> {
        Ok(RelaxState { edge_terms: energy(graph, map)?.per_edge })
    }

    fn total(&self) -> f64 {
        pairwise_sum(&self.edge_terms)
    }

    /// Energy term of edge `ei` with the value of vertex `v` replaced by
    /// `candidate` (computed in energy orientation).
    fn term_with(
        &self,
        graph: &GainGraph,
        map: &EquivariantMap,
        ei: usize,
        v: usize,
        candidate: &SpacePoint,
    ) -> Result<f64> {
        let e = &graph.edges()[ei];
        let tail = if e.tail == v { candidate } else { &map.values[e.tail] };
        let head = if e.head == v { candidate } else { &map.values[e.head] };
        let seen = wp::apply_isometry_point(&e.gain, graph.target(), head)?;
        let d = graph.target().distance_unchecked(tail, &seen);
        Ok(0.5 * e.weight * d * d)
    }

    /// Relaxes vertex `v` in place; returns how far the value moved.
    fn relax_vertex(
        &mut self,
        graph: &GainGraph,
        map: &mut EquivariantMap,
        v: usize,
    ) -> Result<f64> {
        let incident = graph.incident(v);
        if incident.is_empty() || graph.is_pinned(v) {
            return Ok(0.0);
        }
        let mut targets = Vec::with_capacity(incident.len());
        let mut weights = Vec::with_capacity(incident.len());
        for &(ei, v_is_tail) in incident {
            targets.push(graph.seen_value(map, ei, v_is_tail)?);
            weights.push(graph.edges()[ei].weight);
        }
        let candidate = graph.target().frechet_mean_unchecked(&targets, &weights)?;

        let mut old = 0.0;
        let mut new_terms = Vec::with_capacity(incident.len());
        for &(ei, _) in incident {
            old += self.edge_terms[ei];
            new_terms.push(self.term_with(graph, map, ei, v, &candidate)?);
        }
        let new: f64 = new_terms.iter().sum();
        if new > old {
            // The mean is numerical; an uphill candidate is discarded so the
            // energy stays monotone.
            return Ok(0.0);
        }
        let moved = graph.target().distance_unchecked(&map.values[v], &candidate);
        map.values[v] = candidate;
        for (&(ei, _), term) in incident.iter().zip(new_terms) {
            self.edge_terms[ei] = term;
        }
        Ok(moved)
    }
}

/// One relaxation step at a single vertex: the vertex value is replaced by
/// the weighted Fréchet mean of its gain-translated neighbor values.
/// The energy never increases; pinned and isolated vertices are left alone.
pub fn relax_vertex(graph: &GainGraph, map: &EquivariantMap, vertex: usize) -> Result<EquivariantMap> {
    if vertex >= graph.vertex_count() {
        return Err(Error::invalid(format!("vertex {vertex} out of range")));
    }
    graph.validate_map(map)?;
    let mut out = map.clone();
    let mut state = RelaxState::new(graph, map)?;
    state.relax_vertex(graph, &mut out, vertex)?;
    Ok(out)
}

/// Minimizes the energy by relaxation sweeps.
///
/// Deterministic for fixed `(graph, init, schedule, seed)`. Stops when the
/// per-sweep energy decrease drops below `tol_energy_rel * E_init` and the
/// maximum vertex movement drops below `tol_move`, or at `max_sweeps`.
pub fn minimize(
    graph: &GainGraph,
    init: &EquivariantMap,
    schedule: &Schedule,
    seed: u64,
) -> Result<(EquivariantMap, SolveTrace)> {
    graph.validate_map(init)?;
    let mut map = init.clone();
    let mut state = RelaxState::new(graph, &map)?;
    let e_init = state.total();
    let tol_energy = schedule.tol_energy_rel * e_init.max(f64::MIN_POSITIVE);
    let gens = graph.gain_generators();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..graph.vertex_count()).collect();

    let mut records = Vec::new();
    let mut energy_prev = e_init;
    let mut stall_count = 0usize;
    let mut termination = Termination::MaxSweeps;
    let mut collapsed = false;

    for sweep in 1..=schedule.max_sweeps {
        if schedule.sweep_order == SweepOrder::SeededShuffle {
            order.shuffle(&mut rng);
        }
        let mut max_move = 0.0f64;
        for &v in &order {
            let moved = state.relax_vertex(graph, &mut map, v)?;
            max_move = max_move.max(moved);
        }
        let energy_now = state.total();
        let min_u = image_min_u(graph.target(), &map);
        if let Some(u) = min_u {
            if u < 1e-6 {
                collapsed = true;
            }
        }
        let delta_max = if gens.is_empty() {
            None
        } else {
            let mut worst = 0.0f64;
            for value in &map.values {
                worst = worst.max(delta_functional(graph.target(), value, &gens)?);
            }
            Some(worst)
        };
        records.push(SweepRecord { sweep, energy: energy_now, max_move, min_u, delta_max });

        let decrease = energy_prev - energy_now;
        if decrease < tol_energy && max_move < schedule.tol_move {
            termination = Termination::Converged;
            break;
        }
        if decrease == 0.0 && max_move >= schedule.tol_move {
            stall_count += 1;
            if stall_count >= 3 {
                termination = Termination::Stalled;
                break;
            }
        } else {
            stall_count = 0;
        }
        energy_prev = energy_now;
    }

    Ok((map, SolveTrace { records, termination, stratum_collapsed: collapsed }))
}

/// Per-vertex residual field of a chart diagnostic.
#[derive(Clone, Debug)]
pub struct ResidualField {
    /// One entry per vertex; `None` on non-interior vertices.
    pub values: Vec<Option<f64>>,
    pub sup_norm: f64,
}

/// Grid neighbors of an interior vertex in +x, -x, +y, -y order, each seen
/// through its connecting edge's gain.
fn grid_neighbor_values(
    graph: &GainGraph,
    map: &EquivariantMap,
    v: usize,
) -> Result<Option<[SpacePoint; 4]>> {
    let meta = graph.grid_meta().ok_or_else(|| {
        Error::invalid("chart diagnostics need a structured grid graph")
    })?;
    let (cols, rows) = (meta.cols, meta.rows);
    let (c, r) = (v % cols, v / cols);
    if r == 0 || r == rows - 1 {
        return Ok(None);
    }
    if !meta.periodic && (c == 0 || c == cols - 1) {
        return Ok(None);
    }
    let xp = r * cols + (c + 1) % cols;
    let xm = r * cols + (c + cols - 1) % cols;
    let yp = (r + 1) * cols + c;
    let ym = (r - 1) * cols + c;
    let mut out: [Option<SpacePoint>; 4] = [None, None, None, None];
    for &(ei, v_is_tail) in graph.incident(v) {
        let e = &graph.edges()[ei];
        let nbr = if v_is_tail { e.head } else { e.tail };
        let slot = if nbr == xp {
            0
        } else if nbr == xm {
            1
        } else if nbr == yp {
            2
        } else if nbr == ym {
            3
        } else {
            continue;
        };
        out[slot] = Some(graph.seen_value(map, ei, v_is_tail)?);
    }
    match out {
        [Some(a), Some(b), Some(c2), Some(d)] => Ok(Some([a, b, c2, d])),
        _ => Ok(None),
    }
}

/// Chart coordinates of a map value: interleaved `(u_i, theta_i)` for the
/// stratified model, plain coordinates for a Euclidean target.
fn chart_coords(space: &NpcSpace, p: &SpacePoint) -> Result<Vec<f64>> {
    match (space, p) {
        (NpcSpace::Euclidean { .. }, SpacePoint::Euclidean(x)) => Ok(x.clone()),
        (NpcSpace::Product(_), SpacePoint::Product(_)) => {
            let genus_from_len = |m: usize| (m + 3) / 3;
            let SpacePoint::Product(xs) = p else { unreachable!() };
            let genus = genus_from_len(xs.len());
            let sp = StratifiedPoint::from_space_point(genus, p)?;
            let mut coords = Vec::with_capacity(2 * xs.len());
            for c in sp.factors() {
                coords.push(c.u());
                coords.push(c.theta().ok_or_else(|| {
                    Error::degenerate("chart coordinates need every u_i > 0")
                })?);
            }
            Ok(coords)
        }
        _ => Err(Error::mismatch(
            "chart diagnostics support euclidean and stratified-model targets",
        )),
    }
}

fn min_u_of_map(space: &NpcSpace, map: &EquivariantMap) -> f64 {
    image_min_u(space, map).unwrap_or(f64::INFINITY)
}

/// Discrete residual of the first-coordinate harmonic-map equation on a
/// structured mesh:
///
/// ```text
/// r(x) = lap_h u^1 + sum_{i, a, b} Gamma^1_{a b}(u(x)) D_i u^a D_i u^b
/// ```
///
/// with the 5-point Laplacian and central differences of the map's chart
/// coordinates (gain-aware across periodic cuts). Euclidean targets have
/// vanishing Christoffel terms. The image must stay in the chart:
/// `min u >= 1e-2` for stratified targets.
pub fn pde_residual(
    graph: &GainGraph,
    map: &EquivariantMap,
    metric: &ModelMetric,
) -> Result<ResidualField> {
    graph.validate_map(map)?;
    let meta = graph
        .grid_meta()
        .ok_or_else(|| Error::invalid("chart diagnostics need a structured grid graph"))?
        .clone();
    let stratified = !matches!(graph.target(), NpcSpace::Euclidean { .. });
    if stratified && min_u_of_map(graph.target(), map) < wp::CHART_THRESHOLD {
        return Err(Error::degenerate(format!(
            "image reaches u < {} (too close to a stratum for the chart)",
            wp::CHART_THRESHOLD
        )));
    }
    let h = meta.spacing;
    let n = graph.vertex_count();
    let mut values: Vec<Option<f64>> = vec![None; n];
    let mut sup = 0.0f64;
    for v in 0..n {
        let Some([xp, xm, yp, ym]) = grid_neighbor_values(graph, map, v)? else {
            continue;
        };
        let center = chart_coords(graph.target(), &map.values[v])?;
        let cxp = chart_coords(graph.target(), &xp)?;
        let cxm = chart_coords(graph.target(), &xm)?;
        let cyp = chart_coords(graph.target(), &yp)?;
        let cym = chart_coords(graph.target(), &ym)?;
        let lap = (cxp[0] + cxm[0] + cyp[0] + cym[0] - 4.0 * center[0]) / (h * h);
        let mut r = lap;
        if stratified {
            let genus = (center.len() / 2 + 3) / 3;
            let gamma = wp::christoffel(
                &ModelMetric { genus, kind: metric.kind },
                &coords_to_point(genus, &center)?,
            )?;
            let dim = center.len();
            let mut dx = vec![0.0; dim];
            let mut dy = vec![0.0; dim];
            for a in 0..dim {
                dx[a] = (cxp[a] - cxm[a]) / (2.0 * h);
                dy[a] = (cyp[a] - cym[a]) / (2.0 * h);
            }
            for a in 0..dim {
                for b in 0..dim {
                    r += gamma[0][a][b] * (dx[a] * dx[b] + dy[a] * dy[b]);
                }
            }
        }
        sup = sup.max(r.abs());
        values[v] = Some(r);
    }
    Ok(ResidualField { values, sup_norm: sup })
}

fn coords_to_point(genus: usize, coords: &[f64]) -> Result<StratifiedPoint> {
    let pairs: Vec<(f64, f64)> = coords.chunks(2).map(|c| (c[0], c[1])).collect();
    StratifiedPoint::from_coords(genus, &pairs)
}

/// Subsolution fit: smallest `C >= 0` with `lap_h u^1 <= C u^1 + tol` at
/// every interior vertex.
#[derive(Clone, Debug)]
pub struct SubsolutionReport {
    pub c: f64,
    /// `C u^1 - lap_h u^1` per vertex (`None` off the interior).
    pub margins: Vec<Option<f64>>,
    /// Fraction of interior vertices satisfying the inequality at the
    /// fitted constant.
    pub fraction: f64,
    pub tol: f64,
}

/// Fits the subsolution inequality on a structured mesh.
///
/// Needs only the pulled-back first coordinate and its discrete Laplacian,
/// so it tolerates images down to `min u >= 1e-3`.
pub fn subsolution_check(
    graph: &GainGraph,
    map: &EquivariantMap,
    _metric: &ModelMetric,
) -> Result<SubsolutionReport> {
    graph.validate_map(map)?;
    let meta = graph
        .grid_meta()
        .ok_or_else(|| Error::invalid("chart diagnostics need a structured grid graph"))?
        .clone();
    let stratified = !matches!(graph.target(), NpcSpace::Euclidean { .. });
    if stratified && min_u_of_map(graph.target(), map) < 1e-3 {
        return Err(Error::degenerate(
            "image reaches u < 1e-3 (too close to a stratum for the subsolution fit)",
        ));
    }
    let h = meta.spacing;
    let n = graph.vertex_count();
    let tol = 1e-9;
    let mut laps: Vec<Option<(f64, f64)>> = vec![None; n]; // (lap, u1)
    for v in 0..n {
        let Some([xp, xm, yp, ym]) = grid_neighbor_values(graph, map, v)? else {
            continue;
        };
        let u1 = chart_coords(graph.target(), &map.values[v])?[0];
        let lap = (chart_coords(graph.target(), &xp)?[0]
            + chart_coords(graph.target(), &xm)?[0]
            + chart_coords(graph.target(), &yp)?[0]
            + chart_coords(graph.target(), &ym)?[0]
            - 4.0 * u1)
            / (h * h);
        laps[v] = Some((lap, u1));
    }
    let mut c = 0.0f64;
    for entry in laps.iter().flatten() {
        let (lap, u1) = *entry;
        if u1 > 0.0 {
            c = c.max((lap - tol) / u1);
        }
    }
    // keep the defining vertex on the feasible side of its own rounding
    c *= 1.0 + 1e-12;
    let mut satisfied = 0usize;
    let mut interior = 0usize;
    let margins: Vec<Option<f64>> = laps
        .iter()
        .map(|entry| {
            entry.map(|(lap, u1)| {
                interior += 1;
                if lap <= c * u1 + tol {
                    satisfied += 1;
                }
                c * u1 - lap
            })
        })
        .collect();
    if interior == 0 {
        return Err(Error::invalid("mesh has no interior vertices"));
    }
    Ok(SubsolutionReport { c, margins, fraction: satisfied as f64 / interior as f64, tol })
}

/// Outcome of the multi-seed empirical uniqueness experiment.
#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub max_pairwise_d2: f64,
    /// Final image of the first run lies within `1e-6` of one geodesic.
    pub image_on_geodesic: bool,
    /// Final image of the first run is a single point (within `1e-6`).
    pub constant_map: bool,
    pub final_energies: Vec<f64>,
    pub terminations: Vec<Termination>,
}

impl UniquenessReport {
    /// Degenerate cases carry no uniqueness assertion.
    pub fn is_degenerate(&self) -> bool {
        self.image_on_geodesic || self.constant_map
    }
}

/// Runs [`minimize`] from independent random initializations and measures
/// the maximum pairwise L2 distance between the minimizers.
///
/// Unpinned vertices are resampled per seed; pinned vertices keep the
/// values of `base_init`, so every run solves the same problem. When the
/// common image is a single point or lies inside one geodesic the report
/// flags it and the distance is informational, not an assertion.
pub fn uniqueness_test(
    graph: &GainGraph,
    base_init: &EquivariantMap,
    seeds: &[u64],
    schedule: &Schedule,
) -> Result<UniquenessReport> {
    if seeds.len() < 2 {
        return Err(Error::invalid("uniqueness test needs at least 2 seeds"));
    }
    graph.validate_map(base_init)?;
    let mut finals = Vec::with_capacity(seeds.len());
    let mut final_energies = Vec::with_capacity(seeds.len());
    let mut terminations = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut init = base_init.clone();
        for v in 0..graph.vertex_count() {
            if !graph.is_pinned(v) {
                init.values[v] = graph.target().sample_point(&mut rng, 0.8);
            }
        }
        let (map, trace) = minimize(graph, &init, schedule, seed)?;
        final_energies.push(trace.final_energy());
        terminations.push(trace.termination);
        finals.push(map);
    }
    let mut max_d2 = 0.0f64;
    for i in 0..finals.len() {
        for j in i + 1..finals.len() {
            max_d2 = max_d2.max(d2_distance(graph, &finals[i], &finals[j])?);
        }
    }
    let (constant_map, image_on_geodesic) = image_degeneracy(graph.target(), &finals[0])?;
    Ok(UniquenessReport {
        max_pairwise_d2: max_d2,
        image_on_geodesic,
        constant_map,
        final_energies,
        terminations,
    })
}

/// Flags whether the image of a map is (a) a single point or (b) contained
/// in the geodesic through its two most distant values, both within 1e-6.
fn image_degeneracy(space: &NpcSpace, map: &EquivariantMap) -> Result<(bool, bool)> {
    let vals = &map.values;
    let mut best = (0usize, 0usize, 0.0f64);
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = space.distance_unchecked(&vals[i], &vals[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    if best.2 <= 1e-6 {
        return Ok((true, true));
    }
    let (a, b, _) = best;
    let mut worst = 0.0f64;
    for x in vals {
        worst = worst.max(distance_to_geodesic(space, &vals[a], &vals[b], x)?);
        if worst > 1e-6 {
            break;
        }
    }
    Ok((false, worst <= 1e-6))
}

/// Distance from `x` to the geodesic segment from `p` to `q` by
/// golden-section search (the function is convex along the geodesic).
fn distance_to_geodesic(
    space: &NpcSpace,
    p: &SpacePoint,
    q: &SpacePoint,
    x: &SpacePoint,
) -> Result<f64> {
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let eval = |t: f64| -> Result<f64> {
        let g = space.geodesic_point_unchecked(p, q, t)?;
        Ok(space.distance_unchecked(x, &g))
    };
    let mut t1 = hi - phi * (hi - lo);
    let mut t2 = lo + phi * (hi - lo);
    let mut f1 = eval(t1)?;
    let mut f2 = eval(t2)?;
    for _ in 0..48 {
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - phi * (hi - lo);
            f1 = eval(t1)?;
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + phi * (hi - lo);
            f2 = eval(t2)?;
        }
    }
    Ok(f1.min(f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GainEdge;
    use crate::wp::IsometryWord;

    fn e1() -> NpcSpace {
        NpcSpace::euclidean(1).unwrap()
    }

    fn ep(x: f64) -> SpacePoint {
        SpacePoint::Euclidean(vec![x])
    }

    #[test]
    fn relax_moves_path_vertex_to_neighbor_mean() {
        let g = GainGraph::path(e1(), 3).unwrap();
        let m = EquivariantMap::new(vec![ep(0.0), ep(5.0), ep(2.0)]);
        let relaxed = relax_vertex(&g, &m, 1).unwrap();
        assert_eq!(relaxed.values[1], ep(1.0));
        // endpoints untouched
        assert_eq!(relaxed.values[0], ep(0.0));
        assert_eq!(relaxed.values[2], ep(2.0));
    }

    #[test]
    fn relax_fixed_point_stays_put() {
        let g = GainGraph::path(e1(), 3).unwrap();
        let m = EquivariantMap::new(vec![ep(0.0), ep(1.0), ep(2.0)]);
        let relaxed = relax_vertex(&g, &m, 1).unwrap();
        let d = g.target().distance_unchecked(&relaxed.values[1], &m.values[1]);
        assert!(d <= 1e-10);
    }

    #[test]
    fn relax_star_tree_center() {
        let target = NpcSpace::star_tree(vec![1.0; 3]).unwrap();
        let edges = vec![
            GainEdge { tail: 0, head: 1, weight: 1.0, gain: IsometryWord::identity() },
            GainEdge { tail: 0, head: 2, weight: 1.0, gain: IsometryWord::identity() },
            GainEdge { tail: 0, head: 3, weight: 1.0, gain: IsometryWord::identity() },
        ];
        let g = GainGraph::new(target, vec![1.0; 4], edges).unwrap();
        let m = EquivariantMap::new(vec![
            SpacePoint::Tree { branch: 1, arc: 0.7 },
            SpacePoint::Tree { branch: 1, arc: 1.0 },
            SpacePoint::Tree { branch: 2, arc: 1.0 },
            SpacePoint::Tree { branch: 3, arc: 1.0 },
        ]);
        let relaxed = relax_vertex(&g, &m, 0).unwrap();
        assert_eq!(relaxed.values[0], SpacePoint::Tree { branch: 0, arc: 0.0 });
    }

    #[test]
    fn euclidean_translation_cycle_reaches_quadratic_minimum() {
        let n = 8;
        let g = GainGraph::cycle(e1(), n, IsometryWord::translation(0, 1.0), 1.0).unwrap();
        let init = g.constant_map();
        let (map, trace) = minimize(&g, &init, &Schedule::default(), 7).unwrap();
        let expect = 1.0 / (2.0 * n as f64);
        assert!(
            (trace.final_energy() - expect).abs() < 1e-8,
            "E = {}, expect {expect}",
            trace.final_energy()
        );
        assert_eq!(trace.termination, Termination::Converged);
        // equally spaced increments
        let x0 = &map.values[0];
        let x1 = &map.values[1];
        let d = g.target().distance_unchecked(x0, x1);
        assert!((d - 1.0 / n as f64).abs() < 1e-6);
    }

    #[test]
    fn energy_is_monotone_across_sweeps() {
        let target = NpcSpace::wp_model(2).unwrap();
        let g = GainGraph::cycle(target, 6, IsometryWord::twist_power(1, 40), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let init = g.random_map(&mut rng, 1.0);
        let schedule = Schedule { max_sweeps: 60, ..Schedule::default() };
        let (_, trace) = minimize(&g, &init, &schedule, 11).unwrap();
        let mut prev = f64::INFINITY;
        for r in &trace.records {
            assert!(r.energy <= prev + 1e-12 * prev.abs().max(1.0), "sweep {}", r.sweep);
            prev = r.energy;
        }
        assert!(trace.records[0].min_u.is_some());
        assert!(trace.records[0].delta_max.is_some());
    }

    #[test]
    fn minimize_is_deterministic() {
        let g = GainGraph::cycle(NpcSpace::HyperbolicPlane, 8, IsometryWord::translation(0, 1.0), 1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let init = g.random_map(&mut rng, 0.5);
        let schedule = Schedule { max_sweeps: 40, ..Schedule::default() };
        let (m1, t1) = minimize(&g, &init, &schedule, 3).unwrap();
        let (m2, t2) = minimize(&g, &init, &schedule, 3).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(t1.records, t2.records);
    }

    #[test]
    fn conjugating_the_init_conjugates_the_output() {
        // The global isometry must commute with every gain.
        let gamma = IsometryWord::translation(0, 0.37);
        let g = GainGraph::cycle(e1(), 6, IsometryWord::translation(0, 1.0), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let init = g.random_map(&mut rng, 1.0);
        let mut conj_init = init.clone();
        for v in conj_init.values.iter_mut() {
            *v = wp::apply_isometry_point(&gamma, g.target(), v).unwrap();
        }
        let schedule = Schedule { max_sweeps: 600, ..Schedule::default() };
        let (m1, _) = minimize(&g, &init, &schedule, 9).unwrap();
        let (m2, _) = minimize(&g, &conj_init, &schedule, 9).unwrap();
        for (a, b) in m1.values.iter().zip(&m2.values) {
            let ga = wp::apply_isometry_point(&gamma, g.target(), a).unwrap();
            let d = g.target().distance_unchecked(&ga, b);
            assert!(d <= 1e-8, "conjugation defect {d}");
        }
    }

    #[test]
    fn pde_residual_vanishes_for_affine_flat_map() {
        let g = GainGraph::grid(NpcSpace::euclidean(1).unwrap(), 6, 6, 0.5, None).unwrap();
        let meta = g.grid_meta().unwrap().clone();
        let values: Vec<SpacePoint> = (0..g.vertex_count())
            .map(|v| {
                let (c, r) = (v % meta.cols, v / meta.cols);
                ep(1.3 * c as f64 * meta.spacing - 0.4 * r as f64 * meta.spacing + 2.0)
            })
            .collect();
        let m = EquivariantMap::new(values);
        let metric = ModelMetric::leading_order(2).unwrap();
        let field = pde_residual(&g, &m, &metric).unwrap();
        assert!(field.sup_norm <= 1e-10, "sup {}", field.sup_norm);
        // constant map likewise
        let field = pde_residual(&g, &g.constant_map(), &metric).unwrap();
        assert!(field.sup_norm == 0.0);
    }

    #[test]
    fn pde_residual_rejects_near_stratum_images() {
        let target = NpcSpace::wp_model(2).unwrap();
        let g = GainGraph::grid(target, 4, 4, 0.5, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut m = g.random_map(&mut rng, 1.0);
        // push one factor close to the stratum
        let SpacePoint::Product(xs) = &mut m.values[5] else { panic!() };
        xs[0] = SpacePoint::Cusp(crate::cusp::CuspPoint::new(5e-3, 0.0).unwrap());
        let metric = ModelMetric::leading_order(2).unwrap();
        assert!(matches!(pde_residual(&g, &m, &metric), Err(Error::ChartDegenerate(_))));
    }

    #[test]
    fn subsolution_fit_is_zero_for_harmonic_scalar() {
        // Discrete-harmonic positive scalar: linear in the column index.
        let g = GainGraph::grid(NpcSpace::euclidean(1).unwrap(), 7, 5, 1.0, None).unwrap();
        let meta = g.grid_meta().unwrap().clone();
        let values: Vec<SpacePoint> =
            (0..g.vertex_count()).map(|v| ep(1.0 + (v % meta.cols) as f64)).collect();
        let m = EquivariantMap::new(values);
        let metric = ModelMetric::leading_order(2).unwrap();
        let rep = subsolution_check(&g, &m, &metric).unwrap();
        assert_eq!(rep.c, 0.0);
        assert_eq!(rep.fraction, 1.0);
        for margin in rep.margins.iter().flatten() {
            assert!(*margin >= -rep.tol);
        }
    }

    #[test]
    fn uniqueness_on_strictly_convex_euclidean_problem() {
        let mut g = GainGraph::cycle(e1(), 8, IsometryWord::translation(0, 1.0), 1.0).unwrap();
        g.pin_vertex(0).unwrap();
        let base = g.constant_map();
        let schedule = Schedule { tol_move: 1e-11, tol_energy_rel: 1e-14, ..Schedule::default() };
        let rep = uniqueness_test(&g, &base, &[1, 2, 3, 4, 5], &schedule).unwrap();
        assert!(rep.max_pairwise_d2 <= 1e-8, "d2 {}", rep.max_pairwise_d2);
        assert!(!rep.constant_map);
    }

    #[test]
    fn uniqueness_flags_constant_flat_for_identity_gains() {
        let g = GainGraph::cycle(e1(), 6, IsometryWord::identity(), 1.0).unwrap();
        let base = g.constant_map();
        let schedule = Schedule { max_sweeps: 4000, ..Schedule::default() };
        let rep = uniqueness_test(&g, &base, &[1, 2], &schedule).unwrap();
        assert!(rep.constant_map);
        assert!(rep.is_degenerate());
        // the flat of constant minimizers: d2 is reported, not asserted
        assert!(rep.final_energies.iter().all(|&e| e < 1e-12));
    }
}
