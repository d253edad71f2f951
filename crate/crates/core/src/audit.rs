//! Randomized audits of the metric-space and map-space contracts.
//!
//! Each audit draws seeded samples and reports named checks with the
//! measured extremal value and its threshold, so scenario reports and the
//! command line can print one verdict per contract.

use crate::error::Result;
use crate::graph::{convexity_deficit, d2_distance, energy, geodesic_homotopy, GainGraph};
use crate::space::NpcSpace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Comparison direction of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    /// measured <= threshold
    Le,
    /// measured >= threshold
    Ge,
}

/// One named check with its measured value.
#[derive(Clone, Debug)]
pub struct AuditCheck {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub cmp: Cmp,
}

impl AuditCheck {
    pub fn passed(&self) -> bool {
        match self.cmp {
            Cmp::Le => self.measured <= self.threshold,
            Cmp::Ge => self.measured >= self.threshold,
        }
    }

    fn le(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        AuditCheck { name: name.into(), measured, threshold, cmp: Cmp::Le }
    }

    fn ge(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        AuditCheck { name: name.into(), measured, threshold, cmp: Cmp::Ge }
    }
}

/// Sample counts and seed for the space audit.
#[derive(Clone, Copy, Debug)]
pub struct AuditConfig {
    pub triples: usize,
    pub quadruples: usize,
    pub geodesic_pairs: usize,
    pub mean_candidates: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            triples: 10_000,
            quadruples: 10_000,
            geodesic_pairs: 50,
            mean_candidates: 100,
            seed: 0,
        }
    }
}

/// Metric axioms, geodesic speed, CAT(0) quadruple slack, and Fréchet-mean
/// optimality on one space.
pub fn audit_space(space: &NpcSpace, cfg: &AuditConfig) -> Result<Vec<AuditCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();

    // Metric axioms on sampled triples.
    let mut sym_worst = 0.0f64;
    let mut tri_worst = f64::INFINITY;
    for _ in 0..cfg.triples {
        let p = space.sample_point(&mut rng, 1.0);
        let q = space.sample_point(&mut rng, 1.0);
        let r = space.sample_point(&mut rng, 1.0);
        let dpq = space.distance_unchecked(&p, &q);
        let dqp = space.distance_unchecked(&q, &p);
        sym_worst = sym_worst.max((dpq - dqp).abs() / dpq.max(1.0));
        let dpr = space.distance_unchecked(&p, &r);
        let drq = space.distance_unchecked(&r, &q);
        tri_worst = tri_worst.min(dpr + drq - dpq);
        let dpp = space.distance_unchecked(&p, &p);
        sym_worst = sym_worst.max(dpp);
    }
    checks.push(AuditCheck::le("metric symmetry (relative)", sym_worst, 1e-9));
    checks.push(AuditCheck::ge("triangle inequality slack", tri_worst, -1e-8));

    // CAT(0) quadruple slack.
    let mut quad_worst = f64::INFINITY;
    let mut quad_abs_worst = 0.0f64;
    for _ in 0..cfg.quadruples {
        let p = space.sample_point(&mut rng, 1.0);
        let q = space.sample_point(&mut rng, 1.0);
        let w = space.sample_point(&mut rng, 1.0);
        let slack = space.check_npc_quadruple(&p, &q, &w)?;
        quad_worst = quad_worst.min(slack);
        quad_abs_worst = quad_abs_worst.max(slack.abs());
    }
    checks.push(AuditCheck::ge("cat(0) quadruple slack", quad_worst, -1e-6));
    if matches!(space, NpcSpace::Euclidean { .. }) {
        checks.push(AuditCheck::le(
            "euclidean quadruple slack (absolute)",
            quad_abs_worst,
            1e-12,
        ));
    }

    // Constant-speed parametrization on sampled pairs.
    let mut speed_worst = 0.0f64;
    for _ in 0..cfg.geodesic_pairs {
        let p = space.sample_point(&mut rng, 1.0);
        let q = space.sample_point(&mut rng, 1.0);
        let d = space.distance_unchecked(&p, &q);
        if d == 0.0 {
            continue;
        }
        for (s, t) in [(0.0, 0.5), (0.25, 0.75), (0.3, 1.0), (0.1, 0.6)] {
            let a = space.geodesic_point_unchecked(&p, &q, s)?;
            let b = space.geodesic_point_unchecked(&p, &q, t)?;
            let dd = space.distance_unchecked(&a, &b);
            speed_worst = speed_worst.max((dd - (t - s) * d).abs() / d);
        }
    }
    checks.push(AuditCheck::le("constant-speed deviation (relative)", speed_worst, 1e-6));

    // Fréchet mean: first-order optimality against perturbed candidates.
    let mut mean_margin = f64::INFINITY;
    for _ in 0..8 {
        let pts: Vec<_> = (0..4).map(|_| space.sample_point(&mut rng, 1.0)).collect();
        let ws = [1.0, 0.5, 2.0, 1.5];
        let mean = space.frechet_mean_unchecked(&pts, &ws)?;
        let objective = |x: &crate::space::SpacePoint| -> f64 {
            pts.iter()
                .zip(ws)
                .map(|(p, w)| {
                    let d = space.distance_unchecked(x, p);
                    w * d * d
                })
                .sum()
        };
        let f_mean = objective(&mean);
        for c in 0..cfg.mean_candidates {
            // perturb along the geodesic toward each input point in turn
            let toward = &pts[c % pts.len()];
            let t = 0.05 + 0.9 * (c as f64 / cfg.mean_candidates as f64);
            let cand = space.geodesic_point_unchecked(&mean, toward, t)?;
            mean_margin = mean_margin.min(objective(&cand) - f_mean);
        }
    }
    checks.push(AuditCheck::ge("mean optimality margin", mean_margin, -1e-9));

    if matches!(space, NpcSpace::Euclidean { .. }) {
        // Closed-form weighted average comparison.
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let pts: Vec<_> = (0..5).map(|_| space.sample_point(&mut rng, 1.0)).collect();
            let ws = [0.3, 1.0, 2.0, 0.7, 1.3];
            let mean = space.frechet_mean_unchecked(&pts, &ws)?;
            let total: f64 = ws.iter().sum();
            let crate::space::SpacePoint::Euclidean(m) = &mean else { unreachable!() };
            for (k, mk) in m.iter().enumerate() {
                let avg: f64 = pts
                    .iter()
                    .zip(ws)
                    .map(|(p, w)| {
                        let crate::space::SpacePoint::Euclidean(x) = p else { unreachable!() };
                        w * x[k]
                    })
                    .sum::<f64>()
                    / total;
                worst = worst.max((mk - avg).abs());
            }
        }
        checks.push(AuditCheck::le("euclidean mean vs weighted average", worst, 1e-9));
    }

    Ok(checks)
}

/// Sample counts for the map-space audit.
#[derive(Clone, Copy, Debug)]
pub struct MapAuditConfig {
    pub map_pairs: usize,
    pub seed: u64,
}

impl Default for MapAuditConfig {
    fn default() -> Self {
        MapAuditConfig { map_pairs: 1000, seed: 0 }
    }
}

/// Map-space contracts over random map pairs/triples on a graph: the L2
/// distance is a metric, the midpoint inequality holds for it, energy is
/// convex along geodesic homotopies, and the interpolation defect is
/// nonnegative.
pub fn audit_maps(graph: &GainGraph, cfg: &MapAuditConfig) -> Result<Vec<AuditCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut d2_sym = 0.0f64;
    let mut d2_tri = f64::INFINITY;
    let mut d2_quad = f64::INFINITY;
    let mut conv_worst = f64::INFINITY;
    let mut deficit_worst = f64::INFINITY;
    let t_grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

    for k in 0..cfg.map_pairs {
        let u = graph.random_map(&mut rng, 1.0);
        let v = graph.random_map(&mut rng, 1.0);
        let eu = energy(graph, &u)?.total;
        let ev = energy(graph, &v)?.total;
        for &t in &t_grid {
            let ut = geodesic_homotopy(graph, &u, &v, t)?;
            let eut = energy(graph, &ut)?.total;
            conv_worst = conv_worst.min((1.0 - t) * eu + t * ev - eut);
        }
        deficit_worst = deficit_worst.min(convexity_deficit(graph, &u, &v, 0.5)?);

        // metric axioms and the midpoint inequality need a third map; use a
        // fresh one every fourth pair to keep the budget flat
        if k % 4 == 0 {
            let w = graph.random_map(&mut rng, 1.0);
            let duv = d2_distance(graph, &u, &v)?;
            let dvu = d2_distance(graph, &v, &u)?;
            d2_sym = d2_sym.max((duv - dvu).abs() / duv.max(1.0));
            let duw = d2_distance(graph, &u, &w)?;
            let dwv = d2_distance(graph, &w, &v)?;
            d2_tri = d2_tri.min(duw + dwv - duv);
            let mid = geodesic_homotopy(graph, &u, &v, 0.5)?;
            let dwm = d2_distance(graph, &w, &mid)?;
            d2_quad = d2_quad.min(0.5 * duw * duw + 0.5 * dwv * dwv - 0.25 * duv * duv - dwm * dwm);
        }
    }

    Ok(vec![
        AuditCheck::le("d2 symmetry (relative)", d2_sym, 1e-9),
        AuditCheck::ge("d2 triangle slack", d2_tri, -1e-8),
        AuditCheck::ge("d2 midpoint-inequality slack", d2_quad, -1e-8),
        AuditCheck::ge("energy convexity slack", conv_worst, -1e-8),
        AuditCheck::ge("interpolation defect", deficit_worst, -1e-8),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wp::IsometryWord;

    #[test]
    fn euclidean_audit_is_clean() {
        let space = NpcSpace::euclidean(2).unwrap();
        let cfg = AuditConfig { triples: 500, quadruples: 500, ..Default::default() };
        let checks = audit_space(&space, &cfg).unwrap();
        for c in &checks {
            assert!(c.passed(), "{}: measured {}", c.name, c.measured);
        }
        assert!(checks.iter().any(|c| c.name.contains("euclidean quadruple")));
    }

    #[test]
    fn star_tree_audit_is_clean() {
        let space = NpcSpace::star_tree(vec![1.0; 4]).unwrap();
        let cfg = AuditConfig { triples: 500, quadruples: 500, ..Default::default() };
        for c in audit_space(&space, &cfg).unwrap() {
            assert!(c.passed(), "{}: measured {}", c.name, c.measured);
        }
    }

    #[test]
    fn map_audit_on_hyperbolic_cycle_is_clean() {
        let g = GainGraph::cycle(NpcSpace::HyperbolicPlane, 5, IsometryWord::identity(), 1.0)
            .unwrap();
        let cfg = MapAuditConfig { map_pairs: 60, seed: 1 };
        for c in audit_maps(&g, &cfg).unwrap() {
            assert!(c.passed(), "{}: measured {}", c.name, c.measured);
        }
    }
}
