//! Geodesic metric-space substrate.
//!
//! [`NpcSpace`] is a family of concrete nonpositively curved (CAT(0)) model
//! spaces sharing one interface: distance, constant-speed geodesics,
//! midpoints, Fréchet means, and the CAT(0) quadruple check. Products
//! combine factors with the l2 metric and factorwise geodesics.
//!
//! All values are immutable and every operation is a pure function.

pub mod hyperbolic;
pub mod star_tree;

use crate::cusp::{self, CuspPoint};
use crate::error::{Error, Result};
use rand::Rng;

/// A model space with the CAT(0) contract.
#[derive(Clone, Debug, PartialEq)]
pub enum NpcSpace {
    /// Flat `R^dim`.
    Euclidean { dim: usize },
    /// Hyperbolic plane in the hyperboloid model.
    HyperbolicPlane,
    /// Metric star with the given branch lengths.
    StarTree { branch_lengths: Vec<f64> },
    /// One completed cusp factor (degenerate warped half-plane).
    CuspFactor,
    /// Finite l2 product of factors.
    Product(Vec<NpcSpace>),
}

/// A point of an [`NpcSpace`].
#[derive(Clone, Debug, PartialEq)]
pub enum SpacePoint {
    Euclidean(Vec<f64>),
    Hyperboloid([f64; 3]),
    /// Canonical tree coordinates: center is `(0, 0.0)`.
    Tree { branch: usize, arc: f64 },
    Cusp(CuspPoint),
    Product(Vec<SpacePoint>),
}

/// Builds a product space; the metric is the l2 combination of the factor
/// metrics and geodesics are factorwise.
pub fn product_space(factors: Vec<NpcSpace>) -> Result<NpcSpace> {
    if factors.is_empty() {
        return Err(Error::invalid("product of no factors"));
    }
    Ok(NpcSpace::Product(factors))
}

impl NpcSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("euclidean dimension must be positive"));
        }
        Ok(NpcSpace::Euclidean { dim })
    }

    pub fn star_tree(branch_lengths: Vec<f64>) -> Result<Self> {
        if branch_lengths.is_empty() {
            return Err(Error::invalid("star tree needs at least one branch"));
        }
        if branch_lengths.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::invalid("branch lengths must be nonnegative and finite"));
        }
        Ok(NpcSpace::StarTree { branch_lengths })
    }

    /// The completed model target of a genus-`g` surface: one cusp factor per
    /// curve of a maximal system, `3g - 3` in total.
    pub fn wp_model(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        product_space(vec![NpcSpace::CuspFactor; 3 * genus - 3])
    }

    /// Factors of a product space (a non-product is its own single factor).
    pub fn factors(&self) -> &[NpcSpace] {
        match self {
            NpcSpace::Product(fs) => fs,
            _ => std::slice::from_ref(self),
        }
    }

    /// Validates that a point belongs to this space.
    pub fn validate_point(&self, p: &SpacePoint) -> Result<()> {
        match (self, p) {
            (NpcSpace::Euclidean { dim }, SpacePoint::Euclidean(x)) => {
                if x.len() != *dim {
                    return Err(Error::mismatch(format!(
                        "euclidean point has dim {}, space has dim {dim}",
                        x.len()
                    )));
                }
                if x.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("non-finite coordinate"));
                }
                Ok(())
            }
            (NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(x)) => hyperbolic::validate(x),
            (NpcSpace::StarTree { branch_lengths }, SpacePoint::Tree { branch, arc }) => {
                star_tree::validate(branch_lengths, *branch, *arc)
            }
            (NpcSpace::CuspFactor, SpacePoint::Cusp(_)) => Ok(()),
            (NpcSpace::Product(fs), SpacePoint::Product(xs)) => {
                if fs.len() != xs.len() {
                    return Err(Error::mismatch(format!(
                        "product point has {} factors, space has {}",
                        xs.len(),
                        fs.len()
                    )));
                }
                for (f, x) in fs.iter().zip(xs) {
                    f.validate_point(x)?;
                }
                Ok(())
            }
            _ => Err(Error::mismatch(format!("point {p:?} does not match space {self:?}"))),
        }
    }

    /// Length metric between two points of this space.
    pub fn distance(&self, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &SpacePoint, q: &SpacePoint) -> f64 {
        match (self, p, q) {
            (NpcSpace::Euclidean { .. }, SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            (NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(a), SpacePoint::Hyperboloid(b)) => {
                hyperbolic::distance(a, b)
            }
            (NpcSpace::StarTree { .. }, SpacePoint::Tree { branch: b1, arc: a1 }, SpacePoint::Tree { branch: b2, arc: a2 }) => {
                star_tree::distance((*b1, *a1), (*b2, *a2))
            }
            (NpcSpace::CuspFactor, SpacePoint::Cusp(a), SpacePoint::Cusp(b)) => {
                cusp::distance(*a, *b)
            }
            (NpcSpace::Product(fs), SpacePoint::Product(xs), SpacePoint::Product(ys)) => fs
                .iter()
                .zip(xs.iter().zip(ys))
                .map(|(f, (x, y))| {
                    let d = f.distance_unchecked(x, y);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            _ => unreachable!("validated"),
        }
    }

    /// Constant-speed geodesic point: `gamma(0) = p`, `gamma(1) = q`.
    pub fn geodesic_point(&self, p: &SpacePoint, q: &SpacePoint, t: f64) -> Result<SpacePoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("geodesic parameter {t} outside [0,1]")));
        }
        self.validate_point(p)?;
        self.validate_point(q)?;
        self.geodesic_point_unchecked(p, q, t)
    }

    pub(crate) fn geodesic_point_unchecked(
        &self,
        p: &SpacePoint,
        q: &SpacePoint,
        t: f64,
    ) -> Result<SpacePoint> {
        Ok(match (self, p, q) {
            (NpcSpace::Euclidean { .. }, SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
                SpacePoint::Euclidean(
                    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect(),
                )
            }
            (NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(a), SpacePoint::Hyperboloid(b)) => {
                SpacePoint::Hyperboloid(hyperbolic::geodesic_point(a, b, t))
            }
            (NpcSpace::StarTree { .. }, SpacePoint::Tree { branch: b1, arc: a1 }, SpacePoint::Tree { branch: b2, arc: a2 }) => {
                let (branch, arc) = star_tree::geodesic_point((*b1, *a1), (*b2, *a2), t);
                SpacePoint::Tree { branch, arc }
            }
            (NpcSpace::CuspFactor, SpacePoint::Cusp(a), SpacePoint::Cusp(b)) => {
                SpacePoint::Cusp(cusp::geodesic_point(*a, *b, t)?)
            }
            (NpcSpace::Product(fs), SpacePoint::Product(xs), SpacePoint::Product(ys)) => {
                let mut out = Vec::with_capacity(fs.len());
                for (f, (x, y)) in fs.iter().zip(xs.iter().zip(ys)) {
                    out.push(f.geodesic_point_unchecked(x, y, t)?);
                }
                SpacePoint::Product(out)
            }
            _ => unreachable!("validated"),
        })
    }

    /// Midpoint `gamma(1/2)`.
    pub fn midpoint(&self, p: &SpacePoint, q: &SpacePoint) -> Result<SpacePoint> {
        self.geodesic_point(p, q, 0.5)
    }

    /// CAT(0) quadruple slack at `(p, q, w)`:
    ///
    /// ```text
    /// slack = 1/2 d^2(w,p) + 1/2 d^2(w,q) - 1/4 d^2(p,q) - d^2(w, mid(p,q))
    /// ```
    ///
    /// Nonnegative in every CAT(0) space; identically zero in Euclidean
    /// space by the parallelogram identity.
    pub fn check_npc_quadruple(
        &self,
        p: &SpacePoint,
        q: &SpacePoint,
        w: &SpacePoint,
    ) -> Result<f64> {
        let m = self.midpoint(p, q)?;
        self.validate_point(w)?;
        let dwp = self.distance_unchecked(w, p);
        let dwq = self.distance_unchecked(w, q);
        let dpq = self.distance_unchecked(p, q);
        let dwm = self.distance_unchecked(w, &m);
        Ok(0.5 * dwp * dwp + 0.5 * dwq * dwq - 0.25 * dpq * dpq - dwm * dwm)
    }

    /// Weighted Fréchet mean: the minimizer of `sum_i w_i d^2(x, p_i)`.
    pub fn frechet_mean(&self, points: &[SpacePoint], weights: &[f64]) -> Result<SpacePoint> {
        if points.is_empty() {
            return Err(Error::invalid("mean of no points"));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid("points and weights lengths differ"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::invalid("at least one weight must be positive"));
        }
        for p in points {
            self.validate_point(p)?;
        }
        self.frechet_mean_unchecked(points, weights)
    }

    pub(crate) fn frechet_mean_unchecked(
        &self,
        points: &[SpacePoint],
        weights: &[f64],
    ) -> Result<SpacePoint> {
        let total: f64 = weights.iter().sum();
        Ok(match self {
            NpcSpace::Euclidean { dim } => {
                let mut acc = vec![0.0; *dim];
                for (p, w) in points.iter().zip(weights) {
                    let SpacePoint::Euclidean(x) = p else { unreachable!() };
                    for (a, c) in acc.iter_mut().zip(x) {
                        *a += w * c;
                    }
                }
                for a in acc.iter_mut() {
                    *a /= total;
                }
                SpacePoint::Euclidean(acc)
            }
            NpcSpace::HyperbolicPlane => {
                let pts: Vec<[f64; 3]> = points
                    .iter()
                    .map(|p| {
                        let SpacePoint::Hyperboloid(x) = p else { unreachable!() };
                        *x
                    })
                    .collect();
                SpacePoint::Hyperboloid(hyperbolic::frechet_mean(&pts, weights))
            }
            NpcSpace::StarTree { branch_lengths } => {
                let pts: Vec<(usize, f64)> = points
                    .iter()
                    .map(|p| {
                        let SpacePoint::Tree { branch, arc } = p else { unreachable!() };
                        (*branch, *arc)
                    })
                    .collect();
                let (branch, arc) = star_tree::frechet_mean(branch_lengths, &pts, weights);
                SpacePoint::Tree { branch, arc }
            }
            NpcSpace::CuspFactor => {
                let pts: Vec<CuspPoint> = points
                    .iter()
                    .map(|p| {
                        let SpacePoint::Cusp(c) = p else { unreachable!() };
                        *c
                    })
                    .collect();
                SpacePoint::Cusp(cusp::frechet_mean(&pts, weights)?)
            }
            NpcSpace::Product(fs) => {
                // The objective splits over factors, so the mean is factorwise.
                let mut out = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let fpts: Vec<SpacePoint> = points
                        .iter()
                        .map(|p| {
                            let SpacePoint::Product(xs) = p else { unreachable!() };
                            xs[i].clone()
                        })
                        .collect();
                    out.push(f.frechet_mean_unchecked(&fpts, weights)?);
                }
                SpacePoint::Product(out)
            }
        })
    }

    /// Draws a random point, used by audits and the properness probe.
    ///
    /// `scale` controls the spread around a canonical basepoint.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> SpacePoint {
        match self {
            NpcSpace::Euclidean { dim } => {
                SpacePoint::Euclidean((0..*dim).map(|_| scale * normal(rng)).collect())
            }
            NpcSpace::HyperbolicPlane => {
                let x1 = scale * normal(rng);
                let x2 = scale * normal(rng);
                SpacePoint::Hyperboloid(hyperbolic::normalize(&[0.0, x1, x2]))
            }
            NpcSpace::StarTree { branch_lengths } => {
                let b = rng.gen_range(0..branch_lengths.len()) + 1;
                let arc = rng.gen_range(0.0..=branch_lengths[b - 1]);
                let (branch, arc) = star_tree::canonical(b, arc);
                SpacePoint::Tree { branch, arc }
            }
            NpcSpace::CuspFactor => {
                let u = rng.gen_range(0.05..=1.0) * scale.min(1.5).max(0.1);
                let theta = 0.7 * normal(rng);
                SpacePoint::Cusp(CuspPoint::new(u, theta).expect("u > 0"))
            }
            NpcSpace::Product(fs) => {
                SpacePoint::Product(fs.iter().map(|f| f.sample_point(rng, scale)).collect())
            }
        }
    }

    /// A canonical basepoint of the space.
    pub fn basepoint(&self) -> SpacePoint {
        match self {
            NpcSpace::Euclidean { dim } => SpacePoint::Euclidean(vec![0.0; *dim]),
            NpcSpace::HyperbolicPlane => SpacePoint::Hyperboloid([1.0, 0.0, 0.0]),
            NpcSpace::StarTree { .. } => SpacePoint::Tree { branch: 0, arc: 0.0 },
            NpcSpace::CuspFactor => {
                SpacePoint::Cusp(CuspPoint::new(0.5, 0.0).expect("interior"))
            }
            NpcSpace::Product(fs) => {
                SpacePoint::Product(fs.iter().map(|f| f.basepoint()).collect())
            }
        }
    }
}

/// Standard normal via Box-Muller (keeps the rand dependency surface small).
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> NpcSpace {
        NpcSpace::euclidean(2).unwrap()
    }

    fn ep(coords: &[f64]) -> SpacePoint {
        SpacePoint::Euclidean(coords.to_vec())
    }

    #[test]
    fn euclidean_distance_pythagoras() {
        let s = e2();
        assert_eq!(s.distance(&ep(&[0.0, 0.0]), &ep(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(s.distance(&ep(&[1.0, 2.0]), &ep(&[1.0, 2.0])).unwrap(), 0.0);
    }

    #[test]
    fn star_tree_unit_branch_distance() {
        let s = NpcSpace::star_tree(vec![1.0; 3]).unwrap();
        let p = SpacePoint::Tree { branch: 1, arc: 0.5 };
        let q = SpacePoint::Tree { branch: 2, arc: 0.5 };
        assert_eq!(s.distance(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn geodesic_endpoint_contract() {
        let s = e2();
        let p = ep(&[0.0, 0.0]);
        let q = ep(&[2.0, 0.0]);
        assert_eq!(s.geodesic_point(&p, &q, 0.0).unwrap(), p);
        assert_eq!(s.geodesic_point(&p, &q, 1.0).unwrap(), q);
        assert_eq!(s.geodesic_point(&p, &q, 0.25).unwrap(), ep(&[0.5, 0.0]));
        assert!(s.geodesic_point(&p, &q, 1.5).is_err());
    }

    #[test]
    fn star_tree_symmetric_midpoint() {
        let s = NpcSpace::star_tree(vec![1.0; 3]).unwrap();
        let p = SpacePoint::Tree { branch: 1, arc: 1.0 };
        let q = SpacePoint::Tree { branch: 2, arc: 1.0 };
        assert_eq!(s.midpoint(&p, &q).unwrap(), SpacePoint::Tree { branch: 0, arc: 0.0 });
    }

    #[test]
    fn euclidean_midpoint() {
        let s = e2();
        assert_eq!(
            s.midpoint(&ep(&[0.0, 0.0]), &ep(&[4.0, 2.0])).unwrap(),
            ep(&[2.0, 1.0])
        );
        let p = ep(&[0.7, -0.3]);
        assert_eq!(s.midpoint(&p, &p).unwrap(), p);
    }

    #[test]
    fn cusp_factor_midpoint_on_radial_line() {
        let s = NpcSpace::CuspFactor;
        let p = SpacePoint::Cusp(CuspPoint::new(0.4, 0.0).unwrap());
        let q = SpacePoint::Cusp(CuspPoint::new(0.2, 0.0).unwrap());
        let SpacePoint::Cusp(m) = s.midpoint(&p, &q).unwrap() else { panic!() };
        assert!((m.u() - 0.3).abs() < 1e-15);
        assert_eq!(m.theta(), Some(0.0));
    }

    #[test]
    fn euclidean_quadruple_slack_is_parallelogram_zero() {
        let s = e2();
        let p = ep(&[0.3, -1.2]);
        let q = ep(&[2.5, 0.7]);
        let w = ep(&[-1.1, 0.4]);
        let slack = s.check_npc_quadruple(&p, &q, &w).unwrap();
        assert!(slack.abs() <= 1e-12, "slack = {slack}");
        let degenerate = s.check_npc_quadruple(&p, &p, &w).unwrap();
        assert!(degenerate.abs() <= 1e-12);
    }

    #[test]
    fn star_tree_quadruple_slack_hand_value() {
        // p, q, w at unit depth on three distinct branches: the midpoint of
        // p and q is the center, so
        //   1/2*4 + 1/2*4 - 1/4*4 - 1 = 2.
        let s = NpcSpace::star_tree(vec![1.0; 3]).unwrap();
        let p = SpacePoint::Tree { branch: 1, arc: 1.0 };
        let q = SpacePoint::Tree { branch: 2, arc: 1.0 };
        let w = SpacePoint::Tree { branch: 3, arc: 1.0 };
        let slack = s.check_npc_quadruple(&p, &q, &w).unwrap();
        assert!((slack - 2.0).abs() < 1e-15, "slack = {slack}");
    }

    #[test]
    fn frechet_mean_euclidean_weighted_average() {
        let s = NpcSpace::euclidean(2).unwrap();
        let m = s
            .frechet_mean(&[ep(&[0.0, 0.0]), ep(&[2.0, 0.0])], &[1.0, 1.0])
            .unwrap();
        assert_eq!(m, ep(&[1.0, 0.0]));
        let m = s
            .frechet_mean(&[ep(&[0.0, 0.0]), ep(&[3.0, 0.0])], &[2.0, 1.0])
            .unwrap();
        assert_eq!(m, ep(&[1.0, 0.0]));
        assert!(s
            .frechet_mean(&[ep(&[0.0, 0.0])], &[0.0])
            .is_err());
    }

    #[test]
    fn product_distance_is_l2() {
        let s = product_space(vec![
            NpcSpace::euclidean(1).unwrap(),
            NpcSpace::euclidean(1).unwrap(),
        ])
        .unwrap();
        let p = SpacePoint::Product(vec![ep(&[0.0]), ep(&[0.0])]);
        let q = SpacePoint::Product(vec![ep(&[3.0]), ep(&[4.0])]);
        assert_eq!(s.distance(&p, &q).unwrap(), 5.0);
        assert!(product_space(vec![]).is_err());
    }

    #[test]
    fn wp_model_is_cusp_product() {
        let s = NpcSpace::wp_model(2).unwrap();
        assert_eq!(s, NpcSpace::Product(vec![NpcSpace::CuspFactor; 3]));
        assert!(NpcSpace::wp_model(1).is_err());
    }

    #[test]
    fn mismatched_point_kind_is_rejected() {
        let s = e2();
        let bad = SpacePoint::Hyperboloid([1.0, 0.0, 0.0]);
        assert!(matches!(
            s.distance(&ep(&[0.0, 0.0]), &bad),
            Err(Error::KindMismatch(_))
        ));
    }
}
