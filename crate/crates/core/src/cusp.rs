//! Geometry of a single cusp factor.
//!
//! The factor is the surface `{ u > 0 } x R` carrying the degenerate warped
//! metric
//!
//! ```text
//!     ds^2 = du^2 + (u^6 / 4) dtheta^2
//! ```
//!
//! completed at `u = 0`, where the entire theta-line collapses to a single
//! point (the cusp). The warp factor `f(u) = u^3 / 2` vanishes to third order,
//! so twisting becomes free as `u -> 0`; the Gauss curvature `-6/u^2` blows
//! down near the cusp. Geodesics have no elementary closed form, so
//! boundary-value problems are solved by endpoint-pinned discrete-path
//! relaxation with dyadic refinement and Richardson extrapolation of the
//! path length.

use crate::error::{Error, Result};

/// Relative accuracy target for numerically computed geodesic lengths.
pub const LENGTH_TOL_REL: f64 = 1e-8;

/// Coarsest number of path segments used by the relaxation.
const K_MIN: usize = 8;

/// Finest level every numeric geodesic is carried to: point queries
/// Richardson-extrapolate between the two finest paths, and the
/// constant-speed contract needs both reasonably resolved even when the
/// length estimate settles earlier.
const K_POINT: usize = 64;

/// Hard cap on path refinement.
const K_MAX: usize = 4096;

/// A point of the completed cusp factor.
///
/// `u >= 0` is the length-like coordinate; `theta` is the twist-like
/// coordinate and is `None` exactly when `u == 0` (all twists are identified
/// at the cusp).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspPoint {
    u: f64,
    theta: Option<f64>,
}

impl CuspPoint {
    /// An interior point with `u > 0`.
    pub fn interior(u: f64, theta: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() || !theta.is_finite() {
            return Err(Error::invalid(format!(
                "interior cusp point needs finite u > 0, theta finite; got u={u}, theta={theta}"
            )));
        }
        Ok(CuspPoint { u, theta: Some(theta) })
    }

    /// The cusp point `u = 0` (theta undefined).
    pub fn cusp() -> Self {
        CuspPoint { u: 0.0, theta: None }
    }

    /// Builds a point from raw coordinates, mapping `u == 0` to the cusp.
    pub fn new(u: f64, theta: f64) -> Result<Self> {
        if u == 0.0 {
            Ok(CuspPoint::cusp())
        } else {
            CuspPoint::interior(u, theta)
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// Twist coordinate; `None` exactly on the cusp.
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn is_cusp(&self) -> bool {
        self.u == 0.0
    }

    /// Twist coordinate with the cusp mapped to 0 (for chart arithmetic).
    pub(crate) fn theta_or_zero(&self) -> f64 {
        self.theta.unwrap_or(0.0)
    }
}

/// Warp factor `f(u) = u^3 / 2`.
#[inline]
pub fn warp(u: f64) -> f64 {
    0.5 * u * u * u
}

/// Squared warp factor `f(u)^2 = u^6 / 4`.
#[inline]
fn warp_sq(u: f64) -> f64 {
    let f = warp(u);
    f * f
}

/// Gauss curvature of the factor, `K(u) = -6 / u^2`.
///
/// For `ds^2 = du^2 + f(u)^2 dtheta^2` the curvature is `-f''(u)/f(u)`;
/// with `f(u) = u^3/2` this is `-6/u^2`, strictly negative for all `u > 0`.
pub fn gauss_curvature(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::invalid(format!("curvature needs u > 0, got {u}")));
    }
    Ok(-6.0 / (u * u))
}

/// Chord length between two chart points under the midpoint-rule metric.
#[inline]
fn chord(u0: f64, t0: f64, u1: f64, t1: f64) -> f64 {
    let du = u1 - u0;
    let dt = t1 - t0;
    let m = 0.5 * (u0 + u1);
    (du * du + warp_sq(m) * dt * dt).sqrt()
}

/// A numerically solved geodesic between two completed points.
///
/// Holds the two finest relaxed discrete paths so that point queries can be
/// Richardson-extrapolated in the segment count.
#[derive(Clone, Debug)]
pub struct Geodesic {
    p: CuspPoint,
    q: CuspPoint,
    length: f64,
    /// Coarse converged path (half the segments of `fine`); empty for
    /// closed-form (radial / trivial) geodesics.
    coarse: Vec<(f64, f64)>,
    /// Finest converged path; empty for closed-form geodesics.
    fine: Vec<(f64, f64)>,
    kind: GeodesicKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum GeodesicKind {
    /// Endpoints coincide.
    Trivial,
    /// theta constant (or an endpoint is the cusp): the path is radial in u.
    Radial,
    /// Generic interior path from the relaxation.
    Numeric,
}

impl Geodesic {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn endpoints(&self) -> (CuspPoint, CuspPoint) {
        (self.p, self.q)
    }

    /// Segment count of the finest relaxed path (0 for closed forms).
    pub fn fine_segments(&self) -> usize {
        self.fine.len().saturating_sub(1)
    }

    /// Smallest `u` along the path (dive depth).
    pub fn min_u(&self) -> f64 {
        match self.kind {
            GeodesicKind::Trivial | GeodesicKind::Radial => self.p.u.min(self.q.u),
            GeodesicKind::Numeric => self
                .fine
                .iter()
                .map(|&(u, _)| u)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Constant-speed point at parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> Result<CuspPoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("geodesic parameter {t} outside [0,1]")));
        }
        if t == 0.0 {
            return Ok(self.p);
        }
        if t == 1.0 {
            return Ok(self.q);
        }
        match self.kind {
            GeodesicKind::Trivial => Ok(self.p),
            GeodesicKind::Radial => {
                let u = (1.0 - t) * self.p.u + t * self.q.u;
                // theta is shared by both interior endpoints; a cusp endpoint
                // contributes no twist.
                let theta = self.p.theta.or(self.q.theta).unwrap_or(0.0);
                CuspPoint::new(u, theta)
            }
            GeodesicKind::Numeric => {
                let (uc, tc) = sample_path(&self.coarse, t);
                let (uf, tf) = sample_path(&self.fine, t);
                // Richardson in the segment count: leading O(1/K^2) error.
                let u = uf + (uf - uc) / 3.0;
                let theta = tf + (tf - tc) / 3.0;
                let u = if u > 0.0 { u } else { uf.max(0.0) };
                CuspPoint::new(u, theta)
            }
        }
    }

    /// Initial direction of the geodesic at `p`, as chart components scaled
    /// so the metric norm equals the distance (a log map).
    ///
    /// Returns `None` for a trivial geodesic or when `p` is the cusp (the
    /// chart direction is still radial but theta is undefined there).
    pub fn log_at_start(&self) -> Option<(f64, f64)> {
        match self.kind {
            GeodesicKind::Trivial => None,
            GeodesicKind::Radial => {
                if self.p.is_cusp() {
                    None
                } else {
                    Some((self.q.u - self.p.u, 0.0))
                }
            }
            GeodesicKind::Numeric => {
                let (u0, t0) = self.fine[0];
                let (u1, t1) = self.fine[1];
                let du = u1 - u0;
                let dt = t1 - t0;
                let norm = chord(u0, t0, u1, t1);
                if norm == 0.0 {
                    return None;
                }
                let s = self.length / norm;
                Some((du * s, dt * s))
            }
        }
    }
}

/// Samples a discrete path at arc-length fraction `t`.
///
/// Piecewise-linear sampling would leave an O(1/K^2) chord-sag error whose
/// sawtooth shape survives Richardson extrapolation across levels, so the
/// path is interpolated by a cubic Lagrange polynomial in the cumulative
/// chord parameter through the four vertices around the target segment.
fn sample_path(path: &[(f64, f64)], t: f64) -> (f64, f64) {
    let k = path.len() - 1;
    let mut cum = Vec::with_capacity(k + 1);
    cum.push(0.0);
    let mut total = 0.0;
    for s in 1..=k {
        total += chord(path[s - 1].0, path[s - 1].1, path[s].0, path[s].1);
        cum.push(total);
    }
    if total == 0.0 {
        return path[0];
    }
    let target = t * total;
    let mut s = 1;
    while s < k && cum[s] < target {
        s += 1;
    }
    let linear = |s: usize| -> (f64, f64) {
        let seg = cum[s] - cum[s - 1];
        let alpha = if seg > 0.0 { (target - cum[s - 1]) / seg } else { 0.0 };
        let (u0, t0) = path[s - 1];
        let (u1, t1) = path[s];
        (u0 + alpha * (u1 - u0), t0 + alpha * (t1 - t0))
    };
    if k < 3 {
        return linear(s);
    }
    let lo = (s - 1).saturating_sub(1).min(k - 3);
    // degenerate (coincident) vertices make the Lagrange weights blow up
    let spacing_floor = 1e-9 * total / k as f64;
    if cum[lo..lo + 4].windows(2).any(|w| w[1] - w[0] < spacing_floor) {
        return linear(s);
    }
    let mut u = 0.0;
    let mut th = 0.0;
    for i in lo..lo + 4 {
        let mut w = 1.0;
        for j in lo..lo + 4 {
            if j != i {
                w *= (target - cum[j]) / (cum[i] - cum[j]);
            }
        }
        u += w * path[i].0;
        th += w * path[i].1;
    }
    (u, th)
}

/// Length of the true geodesic between two completed points.
///
/// Lighter than [`geodesic`]: refinement stops as soon as the extrapolated
/// length settles, without carrying the path to point-query resolution.
pub fn distance(p: CuspPoint, q: CuspPoint) -> f64 {
    solve(p, q, 2 * K_MIN).length
}

/// Solves the geodesic boundary-value problem between two completed points,
/// resolving the path finely enough for constant-speed point queries.
pub fn geodesic(p: CuspPoint, q: CuspPoint) -> Geodesic {
    solve(p, q, K_POINT)
}

/// Light solve for internal use (log directions, objective values).
pub(crate) fn geodesic_light(p: CuspPoint, q: CuspPoint) -> Geodesic {
    solve(p, q, 2 * K_MIN)
}

fn solve(p: CuspPoint, q: CuspPoint, min_fine_k: usize) -> Geodesic {
    // Identical points (cusp == cusp included).
    if p == q {
        return Geodesic { p, q, length: 0.0, coarse: vec![], fine: vec![], kind: GeodesicKind::Trivial };
    }
    // Any path must sweep |u_p - u_q| vertically, and radial segments are
    // geodesics, so an endpoint on the cusp or equal twists give closed forms.
    if p.is_cusp() || q.is_cusp() || p.theta == q.theta {
        let length = if p.is_cusp() || q.is_cusp() {
            (p.u - q.u).abs().max(p.u.max(q.u))
        } else {
            (p.u - q.u).abs()
        };
        return Geodesic { p, q, length, coarse: vec![], fine: vec![], kind: GeodesicKind::Radial };
    }

    let (up, tp) = (p.u, p.theta_or_zero());
    let (uq, tq) = (q.u, q.theta_or_zero());

    let mut path = initial_path(up, tp, uq, tq, K_MIN);
    relax(&mut path, 60);
    let mut len_prev = path_length(&path);
    let mut extrap_prev = f64::INFINITY;

    loop {
        let mut refined = refine(&path);
        relax(&mut refined, 25);
        let len = path_length(&refined);
        let extrap = len + (len - len_prev) / 3.0;
        let k = refined.len() - 1;
        let settled = (extrap - extrap_prev).abs() <= LENGTH_TOL_REL * extrap.abs().max(1e-12)
            || (len - len_prev).abs() <= 0.25 * LENGTH_TOL_REL * len.abs().max(1e-12);
        if (settled && k >= min_fine_k) || k >= K_MAX {
            // Concatenated radial segments through the cusp bound the
            // distance from above; clamp in the (rare) regime where the
            // relaxation has not fully resolved a deep dive.
            let through_cusp = up + uq;
            let length = extrap.min(through_cusp);
            return Geodesic { p, q, length, coarse: path, fine: refined, kind: GeodesicKind::Numeric };
        }
        path = refined;
        len_prev = len;
        extrap_prev = extrap;
    }
}

/// Straight chart interpolation, with a dive-shaped start when the twist gap
/// is so large that the optimal path must descend far toward the cusp.
fn initial_path(up: f64, tp: f64, uq: f64, tq: f64, k: usize) -> Vec<(f64, f64)> {
    let dtheta = (tq - tp).abs();
    let ulo = up.min(uq);
    let mut path = Vec::with_capacity(k + 1);
    // Asymptotic dive depth of the symmetric geodesic scales like
    // 1/sqrt(dtheta); triggered only when the level path is far longer than
    // the dive route.
    let dive = warp(ulo) * dtheta > 4.0 * (up + uq);
    let u_dive = if dive { (1.6 / dtheta.sqrt()).min(ulo) } else { ulo };
    for i in 0..=k {
        let s = i as f64 / k as f64;
        if dive {
            // Piecewise: descend, cross, ascend.
            let (u, t) = if s < 0.25 {
                (up + (u_dive - up) * (s / 0.25), tp)
            } else if s <= 0.75 {
                (u_dive, tp + (tq - tp) * ((s - 0.25) / 0.5))
            } else {
                (u_dive + (uq - u_dive) * ((s - 0.75) / 0.25), tq)
            };
            path.push((u, t));
        } else {
            path.push((up + (uq - up) * s, tp + (tq - tp) * s));
        }
    }
    path
}

/// Dyadic refinement by chord midpoint insertion.
fn refine(path: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * path.len() - 1);
    for s in 0..path.len() - 1 {
        let (u0, t0) = path[s];
        let (u1, t1) = path[s + 1];
        out.push((u0, t0));
        out.push((0.5 * (u0 + u1), 0.5 * (t0 + t1)));
    }
    out.push(*path.last().unwrap());
    out
}

fn path_length(path: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for s in 1..path.len() {
        total += chord(path[s - 1].0, path[s - 1].1, path[s].0, path[s].1);
    }
    total
}

/// Discrete path energy `sum_s [ (du_s)^2 + f(m_s)^2 (dtheta_s)^2 ]`.
fn path_energy(path: &[(f64, f64)]) -> f64 {
    let mut e = 0.0;
    for s in 1..path.len() {
        let (u0, t0) = path[s - 1];
        let (u1, t1) = path[s];
        let du = u1 - u0;
        let dt = t1 - t0;
        e += du * du + warp_sq(0.5 * (u0 + u1)) * dt * dt;
    }
    e
}

/// Endpoint-pinned relaxation of the discrete path energy by a damped
/// (Levenberg-style) block-tridiagonal Newton iteration.
///
/// The energy Hessian over interior vertices is block tridiagonal with 2x2
/// blocks, so each Newton step is a block Thomas solve. Damping handles the
/// indefinite region far from the solution; iterates keep `u >= 0`.
fn relax(path: &mut Vec<(f64, f64)>, max_iters: usize) {
    let k = path.len() - 1;
    if k < 2 {
        return;
    }
    let n = k - 1; // interior vertices
    let u_scale = path.iter().map(|&(u, _)| u).fold(0.0f64, f64::max).max(1e-300);
    let t_scale = {
        let (lo, hi) = path
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, t)| (lo.min(t), hi.max(t)));
        (hi - lo).max(1.0)
    };

    let mut energy = path_energy(path);
    let mut lambda = 1e-6;
    let mut grad = vec![[0.0f64; 2]; n];
    let mut diag = vec![[[0.0f64; 2]; 2]; n];
    let mut off = vec![[[0.0f64; 2]; 2]; n.saturating_sub(1)];
    let mut cand: Vec<(f64, f64)> = path.clone();

    for _iter in 0..max_iters {
        // Assemble gradient and Hessian blocks.
        for g in grad.iter_mut() {
            *g = [0.0; 2];
        }
        for d in diag.iter_mut() {
            *d = [[0.0; 2]; 2];
        }
        for o in off.iter_mut() {
            *o = [[0.0; 2]; 2];
        }
        for s in 1..=k {
            let (u0, t0) = path[s - 1];
            let (u1, t1) = path[s];
            let du = u1 - u0;
            let dt = t1 - t0;
            let m = 0.5 * (u0 + u1);
            let m2 = m * m;
            let m4 = m2 * m2;
            let m5 = m4 * m;
            let w = m4 * m2 / 4.0; // f(m)^2
            let dw_half = 0.75 * m5; // (1/2) dw/dm = (1/2) d(f^2)/du at each end
            let ddw_quarter = 1.875 * m4; // (1/4) d2w/dm2
            let g_u = dw_half * dt * dt;
            let g_t = 2.0 * w * dt;
            let h_uu = ddw_quarter * dt * dt;
            let h_ut = 1.5 * m5 * dt;
            // left end = vertex s-1, right end = vertex s (interior indices shift by 1)
            if s >= 2 {
                let i = s - 2;
                grad[i][0] += -2.0 * du + g_u;
                grad[i][1] += -g_t;
                diag[i][0][0] += 2.0 + h_uu;
                diag[i][1][1] += 2.0 * w;
                diag[i][0][1] += -h_ut;
                diag[i][1][0] += -h_ut;
            }
            if s <= k - 1 {
                let i = s - 1;
                grad[i][0] += 2.0 * du + g_u;
                grad[i][1] += g_t;
                diag[i][0][0] += 2.0 + h_uu;
                diag[i][1][1] += 2.0 * w;
                diag[i][0][1] += h_ut;
                diag[i][1][0] += h_ut;
            }
            if s >= 2 && s <= k - 1 {
                let i = s - 2; // coupling between interior vertices s-1 and s
                off[i][0][0] = -2.0 + h_uu;
                off[i][0][1] = h_ut;
                off[i][1][0] = -h_ut;
                off[i][1][1] = -2.0 * w;
            }
        }

        let gnorm = grad
            .iter()
            .map(|g| (g[0] * u_scale).abs().max((g[1] * t_scale).abs()))
            .fold(0.0f64, f64::max);
        if gnorm <= 1e-14 * energy.max(1e-280) / u_scale.min(1.0).max(1e-30) && gnorm <= 1e-18 {
            break;
        }

        // Damped solve with retry on energy increase.
        let mut accepted = false;
        for _try in 0..40 {
            let step = match thomas_solve(&diag, &off, &grad, lambda) {
                Some(s) => s,
                None => {
                    lambda = (lambda * 10.0).min(1e12);
                    continue;
                }
            };
            cand.copy_from_slice(path);
            let mut max_rel_step = 0.0f64;
            for i in 0..n {
                let (u, t) = cand[i + 1];
                let nu = (u - step[i][0]).max(0.0);
                let nt = t - step[i][1];
                max_rel_step = max_rel_step
                    .max((nu - u).abs() / u_scale)
                    .max((nt - t).abs() / t_scale);
                cand[i + 1] = (nu, nt);
            }
            let cand_energy = path_energy(&cand);
            if cand_energy <= energy {
                let improved = energy - cand_energy;
                std::mem::swap(path, &mut cand);
                energy = cand_energy;
                lambda = (lambda * 0.25).max(1e-14);
                accepted = true;
                if max_rel_step <= 1e-13 || improved <= 1e-15 * energy.max(1e-280) {
                    return;
                }
                break;
            }
            lambda = (lambda * 10.0).min(1e12);
        }
        if !accepted {
            break;
        }
    }
}

/// Solves `(H + lambda * M) x = g` for block-tridiagonal symmetric `H`
/// (Marquardt scaling `M` = |diagonal|). Returns `None` on a singular pivot.
fn thomas_solve(
    diag: &[[[f64; 2]; 2]],
    off: &[[[f64; 2]; 2]],
    grad: &[[f64; 2]],
    lambda: f64,
) -> Option<Vec<[f64; 2]>> {
    let n = diag.len();
    let mut d = Vec::with_capacity(n);
    for block in diag {
        let mut b = *block;
        b[0][0] += lambda * (b[0][0].abs() + 1e-30);
        b[1][1] += lambda * (b[1][1].abs() + 1e-30);
        d.push(b);
    }
    let mut rhs: Vec<[f64; 2]> = grad.to_vec();

    // Forward elimination.
    let mut inv_prev = inv2(&d[0])?;
    let mut invs = vec![inv_prev];
    for i in 1..n {
        // d[i] -= off[i-1]^T * inv(d[i-1]) * off[i-1]
        let a = off[i - 1];
        let tmp = mul2(&inv_prev, &a); // inv(d) * off
        let mut corr = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                corr[r][c] = a[0][r] * tmp[0][c] + a[1][r] * tmp[1][c]; // off^T * tmp
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                d[i][r][c] -= corr[r][c];
            }
        }
        // rhs[i] -= off[i-1]^T * inv(d[i-1]) * rhs[i-1]
        let w = matvec(&inv_prev, &rhs[i - 1]);
        rhs[i][0] -= a[0][0] * w[0] + a[1][0] * w[1];
        rhs[i][1] -= a[0][1] * w[0] + a[1][1] * w[1];
        inv_prev = inv2(&d[i])?;
        invs.push(inv_prev);
    }

    // Back substitution.
    let mut x = vec![[0.0f64; 2]; n];
    x[n - 1] = matvec(&invs[n - 1], &rhs[n - 1]);
    for i in (0..n - 1).rev() {
        let a = off[i];
        let b = [
            rhs[i][0] - (a[0][0] * x[i + 1][0] + a[0][1] * x[i + 1][1]),
            rhs[i][1] - (a[1][0] * x[i + 1][0] + a[1][1] * x[i + 1][1]),
        ];
        x[i] = matvec(&invs[i], &b);
    }
    Some(x)
}

fn inv2(m: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn matvec(a: &[[f64; 2]; 2], v: &[f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Constant-speed point on the geodesic from `p` to `q`.
pub fn geodesic_point(p: CuspPoint, q: CuspPoint, t: f64) -> Result<CuspPoint> {
    geodesic(p, q).point_at(t)
}

/// Weighted Fréchet mean of completed factor points.
///
/// Two points reduce to a geodesic point; the general case is a damped
/// first-order descent driven by log directions read off the relaxed
/// geodesics, stopping when the step length drops below `1e-10` (or after
/// 200 iterations). Objective decrease is enforced, so the result never
/// has a larger objective than the starting estimate.
pub fn frechet_mean(points: &[CuspPoint], weights: &[f64]) -> Result<CuspPoint> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::invalid("mean needs matching nonempty points and weights"));
    }
    if weights.iter().any(|w| *w < 0.0) || weights.iter().all(|w| *w == 0.0) {
        return Err(Error::invalid("mean needs nonnegative weights, not all zero"));
    }
    let total_w: f64 = weights.iter().sum();
    if points.iter().skip(1).all(|p| p == &points[0]) {
        return Ok(points[0]);
    }
    if points.len() == 2 {
        return geodesic_point(points[0], points[1], weights[1] / total_w);
    }

    // Tight clusters far from the cusp: the chord objective is accurate to
    // O((diameter/u)^2) relative, so a few Newton steps on it replace the
    // geodesic solves entirely. This is the regime mesh relaxation lives in
    // once it starts converging.
    if let Some(mean) = tight_cluster_mean(points, weights, total_w) {
        return Ok(mean);
    }

    // Start from the weighted chart average (cusp points pull u radially).
    let mut u0 = 0.0;
    let mut t0 = 0.0;
    let mut tw = 0.0;
    for (p, w) in points.iter().zip(weights) {
        u0 += w * p.u;
        if let Some(t) = p.theta {
            t0 += w * t;
            tw += w;
        }
    }
    u0 /= total_w;
    if tw > 0.0 {
        t0 /= tw;
    }
    let mut x = CuspPoint::new(u0.max(1e-12), t0)?;

    let objective = |y: CuspPoint| -> f64 {
        points
            .iter()
            .zip(weights)
            .map(|(p, w)| {
                let d = distance(y, *p);
                w * d * d
            })
            .sum()
    };
    let mut fx = objective(x);

    for _ in 0..200 {
        // Weighted mean log direction at x.
        let mut vu = 0.0;
        let mut vt = 0.0;
        for (p, w) in points.iter().zip(weights) {
            let geo = geodesic_light(x, *p);
            if let Some((lu, lt)) = geo.log_at_start() {
                vu += w * lu;
                vt += w * lt;
            } else if p.is_cusp() {
                vu += w * (0.0 - x.u);
            }
        }
        vu /= total_w;
        vt /= total_w;
        let step_norm = (vu * vu + warp_sq(x.u) * vt * vt).sqrt();
        if step_norm < 1e-10 {
            break;
        }
        let mut s = 1.0;
        let mut moved = false;
        for _bt in 0..30 {
            let cu = x.u + s * vu;
            let ct = x.theta_or_zero() + s * vt;
            if cu > 0.0 {
                let cand = CuspPoint::new(cu, ct)?;
                let fc = objective(cand);
                if fc < fx {
                    x = cand;
                    fx = fc;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
        if s * step_norm < 1e-10 {
            break;
        }
    }
    Ok(x)
}

/// Chord-metric mean for clusters whose diameter is small against their
/// distance to the cusp. Returns `None` when the cluster is not tight.
fn tight_cluster_mean(points: &[CuspPoint], weights: &[f64], total_w: f64) -> Option<CuspPoint> {
    let mut u_min = f64::INFINITY;
    for p in points {
        if p.is_cusp() {
            return None;
        }
        u_min = u_min.min(p.u);
    }
    let mut diameter = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max(chord(
                points[i].u,
                points[i].theta_or_zero(),
                points[j].u,
                points[j].theta_or_zero(),
            ));
        }
    }
    if diameter > 0.15 * u_min {
        return None;
    }

    let coords: Vec<(f64, f64, f64)> = points
        .iter()
        .zip(weights)
        .map(|(p, w)| (p.u, p.theta_or_zero(), *w))
        .collect();
    let objective = |u: f64, th: f64| -> f64 {
        coords
            .iter()
            .map(|&(ui, ti, w)| {
                let du = u - ui;
                let dt = th - ti;
                w * (du * du + warp_sq(0.5 * (u + ui)) * dt * dt)
            })
            .sum()
    };
    let mut u = coords.iter().map(|&(ui, _, w)| w * ui).sum::<f64>() / total_w;
    let mut th = coords.iter().map(|&(_, ti, w)| w * ti).sum::<f64>() / total_w;
    let mut f = objective(u, th);
    for _ in 0..6 {
        let mut gu = 0.0;
        let mut gt = 0.0;
        let mut huu = 0.0;
        let mut htt = 0.0;
        let mut hut = 0.0;
        for &(ui, ti, w) in &coords {
            let m = 0.5 * (u + ui);
            let m4 = m * m * m * m;
            let m5 = m4 * m;
            let wm = m4 * m * m / 4.0;
            let dt = th - ti;
            gu += w * (2.0 * (u - ui) + 0.75 * m5 * dt * dt);
            gt += w * (2.0 * wm * dt);
            huu += w * (2.0 + 1.875 * m4 * dt * dt);
            htt += w * (2.0 * wm);
            hut += w * (1.5 * m5 * dt);
        }
        let det = huu * htt - hut * hut;
        if det <= 0.0 {
            break;
        }
        let du = (htt * gu - hut * gt) / det;
        let dt = (huu * gt - hut * gu) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cu = u - step * du;
            let ct = th - step * dt;
            if cu > 0.0 {
                let fc = objective(cu, ct);
                if fc <= f {
                    let moved = (u - cu).abs().max(warp(u) * (th - ct).abs());
                    u = cu;
                    th = ct;
                    f = fc;
                    accepted = true;
                    if moved < 1e-14 * u_min {
                        return CuspPoint::new(u, th).ok();
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    CuspPoint::new(u, th).ok()
}

/// Dense-grid shortest-path estimates of the completed distance.
///
/// Independent of the relaxation route. Distances are computed in the
/// conformal coordinate `v = u^-2`, where the metric is
/// `(dv^2 + dtheta^2) / (4 v^3)`: square cells are metrically isotropic at
/// every point, so the direction-quantization error of the stencil is
/// uniform, and the conformal factor integrates in closed form along
/// straight segments. All `u = 0` states are identified with a single cusp
/// node reached radially from the deepest grid row. A coarse pass supplies
/// a corridor that confines the fine grid to a tube around the optimum.
pub mod oracle {
    use super::CuspPoint;
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    struct State {
        /// cost + admissible lower bound to the target (A* priority)
        prio: f64,
        cost: f64,
        node: usize,
    }
    impl PartialEq for State {
        fn eq(&self, other: &Self) -> bool {
            self.prio == other.prio
        }
    }
    impl Eq for State {}
    impl PartialOrd for State {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for State {
        fn cmp(&self, other: &Self) -> Ordering {
            other.prio.partial_cmp(&self.prio).unwrap_or(Ordering::Equal)
        }
    }

    /// Shortest grid-path length between `p` and `q`.
    ///
    /// `resolution` is the approximate number of metric cells across the
    /// path and `window` the edge stencil radius. A coarse full-box pass
    /// finds an initial path; the fine pass runs inside a corridor around
    /// it with a tight dive allowance.
    pub fn grid_distance(p: CuspPoint, q: CuspPoint, resolution: usize, window: usize) -> f64 {
        let du = (p.u() - q.u()).abs();
        let dtheta = (p.theta().unwrap_or(0.0)
            - q.theta().unwrap_or(p.theta().unwrap_or(0.0)))
        .abs();
        let level_route = du + super::warp(p.u().min(q.u())) * dtheta;
        let upper_bound = level_route.min(p.u() + q.u()) + 1e-12;
        let cell = (upper_bound / resolution.max(8) as f64)
            / super::warp(p.u().max(q.u())).max(1e-300);

        let coarse_cell = cell * (resolution.max(8) as f64 / 120.0).max(1.0);
        let (coarse_len, coarse_path) = solve_grid(p, q, upper_bound, coarse_cell, 4, None);
        let dive_bound = (1.05 * coarse_len + 1e-12).min(upper_bound);
        let corridor = coarse_path.map(|path| Corridor {
            polyline: path,
            radius: 5.0 * coarse_cell + 10.0 * cell,
        });
        let (len, _) = solve_grid(p, q, dive_bound, cell, window, corridor.as_ref());
        len.min(coarse_len)
    }

    /// Tube around a (v, theta) polyline; both coordinates share one scale.
    struct Corridor {
        polyline: Vec<(f64, f64)>,
        radius: f64,
    }

    fn solve_grid(
        p: CuspPoint,
        q: CuspPoint,
        dive_bound: f64,
        cell: f64,
        window: usize,
        corridor: Option<&Corridor>,
    ) -> (f64, Option<Vec<(f64, f64)>>) {
        let tp = p.theta().unwrap_or(0.0);
        let tq = q.theta().unwrap_or(tp);
        let u_hi = p.u().max(q.u());
        let u_lo = (0.5 * (p.u() + q.u() - dive_bound) - 1e-9).max(0.0);
        let t_pad = 1e-9 + 0.01 * (tp - tq).abs();
        let t_lo = tp.min(tq) - t_pad;
        let t_hi = tp.max(tq) + t_pad;

        // Conformal box: v = u^-2 increases toward the cusp. A vanishing
        // lower bound is replaced by a depth cap; the cusp itself is a
        // separate node reached radially from the deepest row.
        let v_lo = u_hi.powi(-2);
        let v_hi = u_lo.max(1e-4 * u_hi).powi(-2);
        let mut nv = (((v_hi - v_lo) / cell).ceil() as usize).clamp(24, 4000);
        let mut nt = (((t_hi - t_lo) / cell).ceil() as usize).clamp(24, 4000);
        const MAX_NODES: usize = 1_200_000;
        if nv * nt > MAX_NODES {
            let shrink = ((nv * nt) as f64 / MAX_NODES as f64).sqrt();
            nv = ((nv as f64 / shrink) as usize).max(24);
            nt = ((nt as f64 / shrink) as usize).max(24);
        }

        let mut vs: Vec<f64> = (0..nv)
            .map(|i| v_lo + (v_hi - v_lo) * i as f64 / (nv - 1) as f64)
            .collect();
        if !p.is_cusp() {
            vs.push(p.u().powi(-2));
        }
        if !q.is_cusp() {
            vs.push(q.u().powi(-2));
        }
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vs.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * a.abs().max(1.0));
        let mut ts: Vec<f64> = (0..nt)
            .map(|j| t_lo + (t_hi - t_lo) * j as f64 / (nt - 1) as f64)
            .collect();
        ts.push(tp);
        ts.push(tq);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

        let nv = vs.len();
        let nt = ts.len();
        let node_of = |iv: usize, it: usize| 1 + iv * nt + it;
        let n_nodes = 1 + nv * nt;

        // Per-column v-interval of the corridor (theta is monotone along
        // geodesics, so the polyline is a theta-graph and intervals suffice).
        let allowed: Option<Vec<(f64, f64)>> = corridor.map(|c| {
            let r = c.radius;
            ts.iter()
                .map(|&t| {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for seg in c.polyline.windows(2) {
                        let (v0, t0) = seg[0];
                        let (v1, t1) = seg[1];
                        let (ta, tb) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                        if t < ta - r || t > tb + r {
                            continue;
                        }
                        // v-range of the segment restricted to this column
                        let (sa, sb) = if (t1 - t0).abs() > 1e-300 {
                            let s0 = ((t - r - t0) / (t1 - t0)).clamp(0.0, 1.0);
                            let s1 = ((t + r - t0) / (t1 - t0)).clamp(0.0, 1.0);
                            (s0.min(s1), s0.max(s1))
                        } else {
                            (0.0, 1.0)
                        };
                        let va = v0 + sa * (v1 - v0);
                        let vb = v0 + sb * (v1 - v0);
                        lo = lo.min(va.min(vb) - r);
                        hi = hi.max(va.max(vb) + r);
                    }
                    (lo, hi)
                })
                .collect()
        });
        let in_corridor = |iv: usize, it: usize| -> bool {
            match &allowed {
                None => true,
                Some(cols) => {
                    let (lo, hi) = cols[it];
                    vs[iv] >= lo && vs[iv] <= hi
                }
            }
        };

        // Exact metric length of the straight segment between grid points:
        // |dx| * (u0 - u1) / (v1 - v0)  (mean of the conformal factor).
        let seg_len = |v0: f64, t0: f64, v1: f64, t1: f64| -> f64 {
            let dv = v1 - v0;
            let dt = t1 - t0;
            let euclid = (dv * dv + dt * dt).sqrt();
            let lam = if dv.abs() > 1e-12 * v0.abs().max(v1.abs()) {
                let u0 = v0.powf(-0.5);
                let u1 = v1.powf(-0.5);
                ((u0 - u1) / dv).abs()
            } else {
                let vm = 0.5 * (v0 + v1);
                0.5 * vm.powf(-1.5)
            };
            euclid * lam
        };

        let idx_of = |u: f64, t: f64| -> usize {
            if u == 0.0 {
                return 0;
            }
            let v = u.powi(-2);
            let iv = vs
                .iter()
                .position(|&x| (x - v).abs() < 1e-12 * v.abs().max(1.0))
                .expect("endpoint v not on grid");
            let it = ts
                .iter()
                .position(|&x| (x - t).abs() < 1e-14)
                .expect("endpoint theta not on grid");
            node_of(iv, it)
        };
        let src = idx_of(p.u(), tp);
        let dst = idx_of(q.u(), if q.is_cusp() { tp } else { tq });

        // Stencil offsets with coprime steps, plus long near-axis spokes
        // (slopes between (w, 1) and the axes would otherwise carry the
        // largest direction-quantization error).
        let w = window as isize;
        let mut offsets = Vec::new();
        for di in -w..=w {
            for dj in -w..=w {
                if di == 0 && dj == 0 {
                    continue;
                }
                if gcd(di.unsigned_abs(), dj.unsigned_abs()) == 1 {
                    offsets.push((di, dj));
                }
            }
        }
        for k in (w + 1)..=(3 * w + 4) {
            for (a, b) in [(k, 1), (k, -1), (-k, 1), (-k, -1)] {
                offsets.push((a, b));
                offsets.push((b, a));
            }
        }

        let deepest_u = vs[nv - 1].powf(-0.5);
        let u_of_row: Vec<f64> = vs.iter().map(|v| v.powf(-0.5)).collect();
        // A* lower bound: any path still has to sweep the remaining
        // vertical gap, so h(x) = |u(x) - u(dst)| is admissible/consistent.
        let u_dst = q.u();
        let h = |node: usize| -> f64 {
            let u = if node == 0 { 0.0 } else { u_of_row[(node - 1) / nt] };
            (u - u_dst).abs()
        };
        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut pred = vec![usize::MAX; n_nodes];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(State { prio: h(src), cost: 0.0, node: src });
        while let Some(State { cost, node, .. }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            if node == dst {
                break;
            }
            if node == 0 {
                for it in 0..nt {
                    let nb = node_of(nv - 1, it);
                    let c = cost + deepest_u;
                    if c < dist[nb] {
                        dist[nb] = c;
                        pred[nb] = 0;
                        heap.push(State { prio: c + h(nb), cost: c, node: nb });
                    }
                }
                continue;
            }
            let iv = (node - 1) / nt;
            let it = (node - 1) % nt;
            let (v0, t0) = (vs[iv], ts[it]);
            if iv == nv - 1 {
                let c = cost + deepest_u;
                if c < dist[0] {
                    dist[0] = c;
                    pred[0] = node;
                    heap.push(State { prio: c + h(0), cost: c, node: 0 });
                }
            }
            for &(di, dj) in &offsets {
                let ni = iv as isize + di;
                let nj = it as isize + dj;
                if ni < 0 || nj < 0 || ni >= nv as isize || nj >= nt as isize {
                    continue;
                }
                let (niu, nju) = (ni as usize, nj as usize);
                if !in_corridor(niu, nju) {
                    continue;
                }
                let (v1, t1) = (vs[niu], ts[nju]);
                let c = cost + seg_len(v0, t0, v1, t1);
                let nb = node_of(niu, nju);
                if c < dist[nb] {
                    dist[nb] = c;
                    pred[nb] = node;
                    heap.push(State { prio: c + h(nb), cost: c, node: nb });
                }
            }
        }

        // Reconstruct the (v, theta) polyline; a path through the cusp node
        // disables corridor reuse (returns None).
        let mut polyline = Vec::new();
        let mut cur = dst;
        let mut through_cusp = false;
        while cur != usize::MAX {
            if cur == 0 {
                through_cusp = true;
                break;
            }
            let iv = (cur - 1) / nt;
            let it = (cur - 1) % nt;
            polyline.push((vs[iv], ts[it]));
            if cur == src {
                break;
            }
            cur = pred[cur];
        }
        polyline.reverse();
        let path = if through_cusp || polyline.is_empty() { None } else { Some(polyline) };
        (dist[dst], path)
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a.max(1)
        } else {
            gcd(b, a % b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(u: f64, theta: f64) -> CuspPoint {
        CuspPoint::new(u, theta).unwrap()
    }

    #[test]
    fn radial_distances_are_exact() {
        assert_eq!(distance(pt(0.5, 1.3), pt(0.2, 1.3)), 0.3);
        assert_eq!(distance(pt(0.7, -2.0), CuspPoint::cusp()), 0.7);
        assert_eq!(distance(CuspPoint::cusp(), CuspPoint::cusp()), 0.0);
        assert_eq!(distance(pt(0.4, 0.1), pt(0.4, 0.1)), 0.0);
    }

    #[test]
    fn radial_midpoint_stays_on_theta_line() {
        let m = geodesic_point(pt(0.4, 0.0), pt(0.2, 0.0), 0.5).unwrap();
        assert!((m.u() - 0.3).abs() < 1e-15);
        assert_eq!(m.theta(), Some(0.0));
        let c = geodesic_point(CuspPoint::cusp(), pt(0.8, 2.0), 0.25).unwrap();
        assert!((c.u() - 0.2).abs() < 1e-15);
        assert_eq!(c.theta(), Some(2.0));
    }

    #[test]
    fn cusp_point_theta_sentinel() {
        assert!(CuspPoint::cusp().theta().is_none());
        assert!(pt(0.1, 0.0).theta().is_some());
        assert!(CuspPoint::new(0.0, 123.0).unwrap().theta().is_none());
        assert!(CuspPoint::interior(0.0, 1.0).is_err());
    }

    #[test]
    fn twist_distance_is_bounded_by_level_path() {
        // The straight level path at u = a has length f(a) * dtheta.
        for &(a, dt) in &[(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)] {
            let d = distance(pt(a, 0.0), pt(a, dt));
            let level = warp(a) * dt;
            assert!(d <= level + 1e-12, "d={d} level={level}");
            assert!(d > 0.8 * level, "geodesic should be close to level path: d={d} level={level}");
        }
    }

    #[test]
    fn curvature_closed_form() {
        assert_eq!(gauss_curvature(1.0).unwrap(), -6.0);
        assert_eq!(gauss_curvature(0.5).unwrap(), -24.0);
        assert!(gauss_curvature(0.0).is_err());
        assert!(gauss_curvature(-1.0).is_err());
    }
}
