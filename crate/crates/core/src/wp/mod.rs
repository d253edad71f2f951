//! The stratified model target.
//!
//! A genus-`g` model target is the l2 product of `3g - 3` completed cusp
//! factors, one per curve of a maximal disjoint curve system. Each factor
//! carries the degenerate warped metric of [`crate::cusp`]; pinching the
//! i-th curve means `u_i = 0`, and the set of pinched indices names the
//! boundary stratum containing a point.
//!
//! Chart operations (metric tensor, Christoffel symbols) are valid only
//! where every `u_i > 0`; they exist as diagnostics. All geometry that must
//! survive near the strata (distances, geodesics, means) goes through the
//! metric-space primitives instead.

pub mod isometry;

pub use isometry::{
    apply_isometry, apply_isometry_point, delta_functional, properness_probe, Generator,
    IsometryWord, ProbeReport, ProbeVerdict,
};

use crate::cusp::{self, CuspPoint};
use crate::error::{Error, Result};
use crate::space::{NpcSpace, SpacePoint};
use std::collections::BTreeSet;
use std::fmt;

/// Chart threshold below which Christoffel-based diagnostics refuse to run.
pub const CHART_THRESHOLD: f64 = 1e-2;

/// A boundary stratum: the set of pinched curve indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSystem {
    genus: usize,
    pinched: BTreeSet<usize>,
}

impl CurveSystem {
    /// Builds a curve system; indices are 1-based in `1..=3g-3`.
    pub fn new(genus: usize, pinched: impl IntoIterator<Item = usize>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        let max = 3 * genus - 3;
        let pinched: BTreeSet<usize> = pinched.into_iter().collect();
        if let Some(&bad) = pinched.iter().find(|&&i| i == 0 || i > max) {
            return Err(Error::invalid(format!(
                "curve index {bad} outside 1..={max} for genus {genus}"
            )));
        }
        Ok(CurveSystem { genus, pinched })
    }

    /// The interior stratum (nothing pinched).
    pub fn interior(genus: usize) -> Result<Self> {
        CurveSystem::new(genus, [])
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn pinched(&self) -> &BTreeSet<usize> {
        &self.pinched
    }

    pub fn is_interior(&self) -> bool {
        self.pinched.is_empty()
    }

    /// True when every curve is pinched; that stratum is a single point.
    pub fn is_maximal(&self) -> bool {
        self.pinched.len() == 3 * self.genus - 3
    }
}

impl fmt::Display for CurveSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pinched.is_empty() {
            return write!(f, "interior");
        }
        let items: Vec<String> = self.pinched.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A point of the completed model target: one `(u_i, theta_i)` per curve.
#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedPoint {
    genus: usize,
    factors: Vec<CuspPoint>,
}

impl StratifiedPoint {
    pub fn new(genus: usize, factors: Vec<CuspPoint>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        if factors.len() != 3 * genus - 3 {
            return Err(Error::invalid(format!(
                "genus {genus} needs {} factors, got {}",
                3 * genus - 3,
                factors.len()
            )));
        }
        Ok(StratifiedPoint { genus, factors })
    }

    /// Convenience constructor from raw `(u, theta)` pairs.
    pub fn from_coords(genus: usize, coords: &[(f64, f64)]) -> Result<Self> {
        let factors = coords
            .iter()
            .map(|&(u, t)| CuspPoint::new(u, t))
            .collect::<Result<Vec<_>>>()?;
        StratifiedPoint::new(genus, factors)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn factors(&self) -> &[CuspPoint] {
        &self.factors
    }

    /// Factor for 1-based curve index `i`.
    pub fn factor(&self, i: usize) -> Result<CuspPoint> {
        self.factors
            .get(i.checked_sub(1).ok_or_else(|| Error::invalid("curve index is 1-based"))?)
            .copied()
            .ok_or_else(|| Error::invalid(format!("curve index {i} out of range")))
    }

    pub fn to_space_point(&self) -> SpacePoint {
        SpacePoint::Product(self.factors.iter().map(|c| SpacePoint::Cusp(*c)).collect())
    }

    pub fn from_space_point(genus: usize, p: &SpacePoint) -> Result<Self> {
        let SpacePoint::Product(xs) = p else {
            return Err(Error::mismatch("expected a product point"));
        };
        let factors = xs
            .iter()
            .map(|x| match x {
                SpacePoint::Cusp(c) => Ok(*c),
                other => Err(Error::mismatch(format!("expected cusp factor, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        StratifiedPoint::new(genus, factors)
    }

    pub fn min_u(&self) -> f64 {
        self.factors.iter().map(|c| c.u()).fold(f64::INFINITY, f64::min)
    }
}

/// The stratum containing a point: exactly the factors with `u_i == 0`.
///
/// No snapping: tiny positive coordinates stay interior.
pub fn stratum_of(point: &StratifiedPoint) -> CurveSystem {
    let pinched: Vec<usize> = point
        .factors
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_cusp())
        .map(|(i, _)| i + 1)
        .collect();
    CurveSystem::new(point.genus, pinched).expect("indices in range")
}

/// Stratum of each interior sample of the geodesic from `p` to `q`
/// (parameters `t = j/(n+1)`, `j = 1..=n`).
pub fn geodesic_stratum_trace(
    p: &StratifiedPoint,
    q: &StratifiedPoint,
    sample_count: usize,
) -> Result<Vec<CurveSystem>> {
    if p.genus != q.genus {
        return Err(Error::mismatch("points of different genus"));
    }
    let geos: Vec<cusp::Geodesic> = p
        .factors
        .iter()
        .zip(&q.factors)
        .map(|(a, b)| cusp::geodesic(*a, *b))
        .collect();
    let mut out = Vec::with_capacity(sample_count);
    for j in 1..=sample_count {
        let t = j as f64 / (sample_count + 1) as f64;
        let factors = geos
            .iter()
            .map(|g| g.point_at(t))
            .collect::<Result<Vec<_>>>()?;
        out.push(stratum_of(&StratifiedPoint::new(p.genus, factors)?));
    }
    Ok(out)
}

/// Completed distance on one cusp factor (identical to [`cusp::distance`]).
pub fn cusp_distance(p: CuspPoint, q: CuspPoint) -> f64 {
    cusp::distance(p, q)
}

/// Which representative of the asymptotic metric classes to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKind {
    /// Exact leading term: `G_uu = 1`, `G_utheta = 0`, `G_thetatheta = u^6/4`.
    LeadingOrder,
    /// Adds `eps * u^4` to `G_uu` and multiplies `G_thetatheta` by
    /// `(1 + eps * u^4)`, staying inside the fourth-order classes.
    Perturbed(f64),
}

/// The model metric of a genus-`g` target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMetric {
    pub genus: usize,
    pub kind: MetricKind,
}

impl ModelMetric {
    pub fn leading_order(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        Ok(ModelMetric { genus, kind: MetricKind::LeadingOrder })
    }

    pub fn perturbed(genus: usize, eps: f64) -> Result<Self> {
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        Ok(ModelMetric { genus, kind: MetricKind::Perturbed(eps) })
    }

    /// Coordinate dimension `2 (3g - 3)`; coordinates are interleaved
    /// `(u_1, theta_1, u_2, theta_2, ...)`.
    pub fn dim(&self) -> usize {
        2 * (3 * self.genus - 3)
    }

    fn check_chart(&self, point: &StratifiedPoint) -> Result<()> {
        if point.genus != self.genus {
            return Err(Error::mismatch("metric and point genus differ"));
        }
        if point.factors.iter().any(|c| c.u() == 0.0) {
            return Err(Error::degenerate(
                "metric chart requires every u_i > 0 (point touches a stratum)",
            ));
        }
        Ok(())
    }

    /// `G_uu(u)` and its u-derivative for one factor.
    fn guu(&self, u: f64) -> (f64, f64) {
        match self.kind {
            MetricKind::LeadingOrder => (1.0, 0.0),
            MetricKind::Perturbed(eps) => {
                let u2 = u * u;
                let u4 = u2 * u2;
                (1.0 + eps * u4, 4.0 * eps * u2 * u)
            }
        }
    }

    /// `G_theta_theta(u)` and its u-derivative for one factor.
    fn gtt(&self, u: f64) -> (f64, f64) {
        let u2 = u * u;
        let u4 = u2 * u2;
        let u6 = u4 * u2;
        match self.kind {
            MetricKind::LeadingOrder => (0.25 * u6, 1.5 * u4 * u),
            MetricKind::Perturbed(eps) => (
                (1.0 + eps * u4) * 0.25 * u6,
                1.5 * u4 * u + 2.5 * eps * u4 * u4 * u,
            ),
        }
    }
}

/// Symmetric metric tensor at an interior chart point.
///
/// Rows/columns follow the interleaved coordinate order; factor blocks are
/// diagonal and cross-factor blocks vanish.
pub fn metric_tensor(metric: &ModelMetric, point: &StratifiedPoint) -> Result<Vec<Vec<f64>>> {
    metric.check_chart(point)?;
    let n = metric.dim();
    let mut g = vec![vec![0.0; n]; n];
    for (i, c) in point.factors.iter().enumerate() {
        let u = c.u();
        g[2 * i][2 * i] = metric.guu(u).0;
        g[2 * i + 1][2 * i + 1] = metric.gtt(u).0;
    }
    Ok(g)
}

/// Christoffel symbols `Gamma^k_{ij}` from analytic metric derivatives.
///
/// Indexable as `christoffel(...)[k][i][j]`.
pub fn christoffel(metric: &ModelMetric, point: &StratifiedPoint) -> Result<Vec<Vec<Vec<f64>>>> {
    metric.check_chart(point)?;
    let n = metric.dim();
    // Only d G / d u_f is nonzero; the tensor is block diagonal, so the
    // inverse is entrywise reciprocal on the diagonal.
    let mut partials = vec![vec![vec![0.0; n]; n]; n]; // [l][i][j] = dG_ij / dx_l
    let mut g_inv_diag = vec![0.0; n];
    for (f, c) in point.factors.iter().enumerate() {
        let u = c.u();
        let (guu, dguu) = metric.guu(u);
        let (gtt, dgtt) = metric.gtt(u);
        let ui = 2 * f;
        let ti = 2 * f + 1;
        partials[ui][ui][ui] = dguu;
        partials[ui][ti][ti] = dgtt;
        g_inv_diag[ui] = 1.0 / guu;
        g_inv_diag[ti] = 1.0 / gtt;
    }
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                // Gamma^k_ij = 1/2 G^{kl} (G_il,j + G_lj,i - G_ij,l), l = k.
                let v = partials[j][i][k] + partials[i][k][j] - partials[k][i][j];
                gamma[k][i][j] = 0.5 * g_inv_diag[k] * v;
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols from central finite differences of the metric
/// tensor (step `1e-5 * u_min`); an independent check of [`christoffel`].
pub fn christoffel_fd(metric: &ModelMetric, point: &StratifiedPoint) -> Result<Vec<Vec<Vec<f64>>>> {
    metric.check_chart(point)?;
    let n = metric.dim();
    let h = 1e-5 * point.min_u();
    let coords: Vec<(f64, f64)> = point
        .factors
        .iter()
        .map(|c| (c.u(), c.theta().unwrap_or(0.0)))
        .collect();
    let tensor_at = |shift: usize, delta: f64| -> Result<Vec<Vec<f64>>> {
        let mut moved = coords.clone();
        if shift % 2 == 0 {
            moved[shift / 2].0 += delta;
        } else {
            moved[shift / 2].1 += delta;
        }
        metric_tensor(metric, &StratifiedPoint::from_coords(metric.genus, &moved)?)
    };
    let mut partials = vec![vec![vec![0.0; n]; n]; n];
    for l in 0..n {
        let plus = tensor_at(l, h)?;
        let minus = tensor_at(l, -h)?;
        for i in 0..n {
            for j in 0..n {
                partials[l][i][j] = (plus[i][j] - minus[i][j]) / (2.0 * h);
            }
        }
    }
    let g = metric_tensor(metric, point)?;
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        let ginv = 1.0 / g[k][k];
        for i in 0..n {
            for j in 0..n {
                let v = partials[j][i][k] + partials[i][k][j] - partials[k][i][j];
                gamma[k][i][j] = 0.5 * ginv * v;
            }
        }
    }
    Ok(gamma)
}

/// Worst entrywise deviation between two Christoffel arrays, relative to
/// the entry with an absolute floor tied to the array scale (differences of
/// near-constant metric entries hit the rounding floor of central
/// differences, so a purely entrywise relative measure is not meaningful
/// for entries many orders below the largest symbol).
pub fn christoffel_deviation(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>]) -> f64 {
    let scale = a
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let mut worst = 0.0f64;
    for (ak, bk) in a.iter().zip(b) {
        for (ai, bi) in ak.iter().zip(bk) {
            for (x, y) in ai.iter().zip(bi) {
                let denom = x.abs().max(1e-8 * scale);
                worst = worst.max((x - y).abs() / denom);
            }
        }
    }
    worst
}

/// Gauss curvature of one factor of the leading-order metric, `-6/u^2`.
pub fn gauss_curvature_factor(metric: &ModelMetric, u: f64) -> Result<f64> {
    if metric.kind != MetricKind::LeadingOrder {
        return Err(Error::invalid(
            "factor curvature is defined for the leading-order representative",
        ));
    }
    cusp::gauss_curvature(u)
}

/// The completed model target as an [`NpcSpace`].
pub fn model_space(genus: usize) -> Result<NpcSpace> {
    NpcSpace::wp_model(genus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior_point(genus: usize, u: f64, theta: f64) -> StratifiedPoint {
        let m = 3 * genus - 3;
        StratifiedPoint::from_coords(genus, &vec![(u, theta); m]).unwrap()
    }

    #[test]
    fn metric_tensor_leading_order_values() {
        let metric = ModelMetric::leading_order(2).unwrap();
        let p = interior_point(2, 0.1, 0.3);
        let g = metric_tensor(&metric, &p).unwrap();
        // G_uu = 1, G_utheta = 0, G_thetatheta = u^6/4 = 2.5e-7 at u = 0.1.
        assert_eq!(g[0][0], 1.0);
        assert_eq!(g[0][1], 0.0);
        assert!((g[1][1] - 2.5e-7).abs() < 1e-20);
        assert_eq!(g[0][2], 0.0);
    }

    #[test]
    fn metric_tensor_perturbed_difference() {
        let eps = 0.3;
        let lead = ModelMetric::leading_order(2).unwrap();
        let pert = ModelMetric::perturbed(2, eps).unwrap();
        let p = interior_point(2, 0.1, 0.0);
        let gl = metric_tensor(&lead, &p).unwrap();
        let gp = metric_tensor(&pert, &p).unwrap();
        assert!((gp[0][0] - gl[0][0] - eps * 1e-4).abs() < 1e-16);
        assert!((gp[1][1] / gl[1][1] - (1.0 + eps * 1e-4)).abs() < 1e-12);
    }

    #[test]
    fn metric_chart_rejects_stratum_points() {
        let metric = ModelMetric::leading_order(2).unwrap();
        let p = StratifiedPoint::new(
            2,
            vec![CuspPoint::cusp(), CuspPoint::new(0.2, 0.0).unwrap(), CuspPoint::new(0.3, 0.0).unwrap()],
        )
        .unwrap();
        assert!(matches!(metric_tensor(&metric, &p), Err(Error::ChartDegenerate(_))));
    }

    #[test]
    fn christoffel_hand_values() {
        let metric = ModelMetric::leading_order(2).unwrap();
        let p = interior_point(2, 0.1, 0.0);
        let gamma = christoffel(&metric, &p).unwrap();
        // Gamma^u_tt = -(3/4) u^5 = -7.5e-6 at u = 0.1.
        assert!((gamma[0][1][1] + 7.5e-6).abs() < 1e-18);
        // Gamma^u_uu vanishes for the leading-order representative.
        assert_eq!(gamma[0][0][0], 0.0);
        // Gamma^theta_{u theta} = 3/u.
        assert!((gamma[1][0][1] - 30.0).abs() < 1e-10);
        // Cross-factor symbols vanish.
        assert_eq!(gamma[0][2][2], 0.0);
        assert_eq!(gamma[2][1][1], 0.0);
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let metric = ModelMetric::perturbed(2, 0.2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let p = StratifiedPoint::from_coords(
                2,
                &[
                    (rng.gen_range(0.01..1.0), rng.gen_range(-1.0..1.0)),
                    (rng.gen_range(0.01..1.0), rng.gen_range(-1.0..1.0)),
                    (rng.gen_range(0.01..1.0), rng.gen_range(-1.0..1.0)),
                ],
            )
            .unwrap();
            let a = christoffel(&metric, &p).unwrap();
            let b = christoffel_fd(&metric, &p).unwrap();
            let err = christoffel_deviation(&a, &b);
            assert!(err < 1e-4, "relative deviation {err}");
        }
    }

    #[test]
    fn order_exponents_from_loglog_regression() {
        let metric = ModelMetric::leading_order(2).unwrap();
        let us: Vec<f64> = (0..40).map(|i| 0.01 * (10.0f64).powf(i as f64 / 39.0)).collect();
        let fit = |ys: &[f64]| -> f64 {
            let xs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            xs.iter()
                .zip(ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum::<f64>()
                / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>()
        };
        let gtt: Vec<f64> = us
            .iter()
            .map(|&u| {
                let p = interior_point(2, u, 0.0);
                metric_tensor(&metric, &p).unwrap()[1][1].ln()
            })
            .collect();
        let gamma_utt: Vec<f64> = us
            .iter()
            .map(|&u| {
                let p = interior_point(2, u, 0.0);
                christoffel(&metric, &p).unwrap()[0][1][1].abs().ln()
            })
            .collect();
        let s_gtt = fit(&gtt);
        let s_gamma = fit(&gamma_utt);
        assert!((s_gtt - 6.0).abs() < 0.05, "G_tt slope {s_gtt}");
        assert!((s_gamma - 5.0).abs() < 0.05, "Gamma^u_tt slope {s_gamma}");
    }

    #[test]
    fn curvature_factor_values() {
        let metric = ModelMetric::leading_order(2).unwrap();
        assert_eq!(gauss_curvature_factor(&metric, 1.0).unwrap(), -6.0);
        assert_eq!(gauss_curvature_factor(&metric, 0.5).unwrap(), -24.0);
        for i in 1..20 {
            let u = i as f64 * 0.1;
            assert!(gauss_curvature_factor(&metric, u).unwrap() < 0.0);
        }
        let pert = ModelMetric::perturbed(2, 0.1).unwrap();
        assert!(gauss_curvature_factor(&pert, 1.0).is_err());
    }

    #[test]
    fn stratum_membership_is_exact_zero() {
        let p = StratifiedPoint::from_coords(2, &[(0.5, 0.0), (0.2, 1.0), (1e-14, 0.0)]).unwrap();
        assert!(stratum_of(&p).is_interior());
        let q = StratifiedPoint::new(
            2,
            vec![
                CuspPoint::new(0.5, 0.0).unwrap(),
                CuspPoint::cusp(),
                CuspPoint::new(0.3, 2.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(stratum_of(&q).pinched().iter().copied().collect::<Vec<_>>(), vec![2]);
        let maximal = StratifiedPoint::new(2, vec![CuspPoint::cusp(); 3]).unwrap();
        assert!(stratum_of(&maximal).is_maximal());
    }

    #[test]
    fn stratum_trace_constant_on_pinched_factor() {
        let p = StratifiedPoint::new(
            2,
            vec![
                CuspPoint::new(0.5, 0.0).unwrap(),
                CuspPoint::cusp(),
                CuspPoint::new(0.3, -1.0).unwrap(),
            ],
        )
        .unwrap();
        let q = StratifiedPoint::new(
            2,
            vec![
                CuspPoint::new(0.8, 1.0).unwrap(),
                CuspPoint::cusp(),
                CuspPoint::new(0.6, 2.0).unwrap(),
            ],
        )
        .unwrap();
        for s in geodesic_stratum_trace(&p, &q, 9).unwrap() {
            assert_eq!(s.pinched().iter().copied().collect::<Vec<_>>(), vec![2]);
        }
        // Interior endpoints stay interior.
        let a = StratifiedPoint::from_coords(2, &[(0.5, 0.0), (0.4, 1.0), (0.3, -1.0)]).unwrap();
        let b = StratifiedPoint::from_coords(2, &[(0.7, 2.0), (0.2, 0.0), (0.9, 1.0)]).unwrap();
        for s in geodesic_stratum_trace(&a, &b, 9).unwrap() {
            assert!(s.is_interior());
        }
        // Trivial segment.
        for s in geodesic_stratum_trace(&a, &a, 5).unwrap() {
            assert!(s.is_interior());
        }
    }

    #[test]
    fn curve_system_validation() {
        assert!(CurveSystem::new(1, []).is_err());
        assert!(CurveSystem::new(2, [4]).is_err());
        assert!(CurveSystem::new(2, [0]).is_err());
        let c = CurveSystem::new(2, [1, 3]).unwrap();
        assert_eq!(format!("{c}"), "{1,3}");
        assert_eq!(format!("{}", CurveSystem::interior(2).unwrap()), "interior");
    }
}
