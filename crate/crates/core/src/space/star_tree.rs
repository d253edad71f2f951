//! Metric star tree: a finite set of segments glued at a common center.
//!
//! Points are `(branch, arc)` in canonical form: the center is always
//! `(0, 0.0)`, and interior branch points have `branch` in `1..=n` with
//! `0 < arc <= length(branch)`. Coordinate equality is then point equality.

use crate::error::{Error, Result};

/// Canonicalizes raw coordinates (arc 0 on any branch is the center).
pub fn canonical(branch: usize, arc: f64) -> (usize, f64) {
    if arc == 0.0 {
        (0, 0.0)
    } else {
        (branch, arc)
    }
}

pub fn validate(lengths: &[f64], branch: usize, arc: f64) -> Result<()> {
    if branch == 0 {
        if arc != 0.0 {
            return Err(Error::invalid("tree center must have arc 0"));
        }
        return Ok(());
    }
    if branch > lengths.len() {
        return Err(Error::invalid(format!(
            "branch {branch} out of range (tree has {} branches)",
            lengths.len()
        )));
    }
    if !(arc > 0.0) || arc > lengths[branch - 1] {
        return Err(Error::invalid(format!(
            "arc {arc} outside (0, {}] on branch {branch}",
            lengths[branch - 1]
        )));
    }
    Ok(())
}

/// Path metric: same branch measures along it, otherwise through the center.
pub fn distance(p: (usize, f64), q: (usize, f64)) -> f64 {
    if p.0 == q.0 {
        (p.1 - q.1).abs()
    } else {
        // distinct branches (center has branch 0 and arc 0, so this is
        // correct when either point is the center too)
        p.1 + q.1
    }
}

/// Constant-speed geodesic point in canonical form.
pub fn geodesic_point(p: (usize, f64), q: (usize, f64), t: f64) -> (usize, f64) {
    if p.0 == q.0 {
        return canonical(p.0, p.1 + t * (q.1 - p.1));
    }
    let total = p.1 + q.1;
    let s = t * total;
    if s < p.1 {
        canonical(p.0, p.1 - s)
    } else {
        canonical(q.0, s - p.1)
    }
}

/// Weighted Fréchet mean, exact by per-branch quadratic minimization.
///
/// Restricted to a branch parametrized by depth `s >= 0`, the objective is
/// piecewise quadratic and convex, so each branch has a closed-form
/// candidate; the best candidate over all branches (and the center) wins.
pub fn frechet_mean(lengths: &[f64], points: &[(usize, f64)], weights: &[f64]) -> (usize, f64) {
    let total_w: f64 = weights.iter().sum();
    let objective = |cand: (usize, f64)| -> f64 {
        points
            .iter()
            .zip(weights)
            .map(|(p, w)| {
                let d = distance(*p, cand);
                w * d * d
            })
            .sum()
    };

    let mut best = (0usize, 0.0f64);
    let mut best_f = objective(best);
    for b in 1..=lengths.len() {
        // minimize sum_i w_i (s - a_i)^2 over points on branch b plus
        // sum_j w_j (s + a_j)^2 over the rest: s* = (sum_b w a - sum_!b w a) / W
        let mut num = 0.0;
        for (p, w) in points.iter().zip(weights) {
            if p.0 == b {
                num += w * p.1;
            } else {
                num -= w * p.1;
            }
        }
        let s = (num / total_w).clamp(0.0, lengths[b - 1]);
        let cand = canonical(b, s);
        let f = objective(cand);
        if f < best_f {
            best_f = f;
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT3: [f64; 3] = [1.0, 1.0, 1.0];

    #[test]
    fn paths_through_center_add() {
        assert_eq!(distance((1, 0.5), (2, 0.5)), 1.0);
        assert_eq!(distance((1, 0.25), (1, 0.75)), 0.5);
        assert_eq!(distance((0, 0.0), (3, 0.9)), 0.9);
    }

    #[test]
    fn symmetric_midpoint_is_center() {
        assert_eq!(geodesic_point((1, 1.0), (2, 1.0), 0.5), (0, 0.0));
        assert_eq!(geodesic_point((1, 1.0), (2, 1.0), 0.25), (1, 0.5));
        assert_eq!(geodesic_point((1, 1.0), (2, 1.0), 0.75), (2, 0.5));
    }

    #[test]
    fn mean_of_symmetric_unit_points_is_center() {
        let pts = [(1, 1.0), (2, 1.0), (3, 1.0)];
        let w = [1.0, 1.0, 1.0];
        assert_eq!(frechet_mean(&UNIT3, &pts, &w), (0, 0.0));
    }

    #[test]
    fn mean_on_single_branch_is_weighted_average() {
        let pts = [(1, 0.2), (1, 0.8)];
        let w = [1.0, 3.0];
        let m = frechet_mean(&UNIT3, &pts, &w);
        assert_eq!(m.0, 1);
        assert!((m.1 - 0.65).abs() < 1e-15);
    }
}
