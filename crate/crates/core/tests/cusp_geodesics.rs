//! Accuracy checks for the cusp-factor geodesic solver against two
//! independent routes: a turning-point quadrature for symmetric pairs and
//! the dense-grid shortest-path oracle for random pairs.

use harmlab::cusp::{self, oracle, CuspPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(u: f64) -> f64 {
    0.5 * u * u * u
}

/// Composite-Simpson integral of a smooth function on [0, 1].
fn simpson<F: Fn(f64) -> f64>(g: F, n: usize) -> f64 {
    let n = n + n % 2;
    let h = 1.0 / n as f64;
    let mut acc = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    acc * h / 3.0
}

/// Twist gap and length of the geodesic with turning level `b` between two
/// points at level `a` (Clairaut-type quadrature; `u = b + (a-b)s^2` removes
/// the square-root singularity at the turning point).
fn turning_point_arc(a: f64, b: f64) -> (f64, f64) {
    let c = f(b);
    let dtheta = 2.0
        * simpson(
            |s| {
                let u = b + (a - b) * s * s;
                let fu = f(u);
                let den = (fu * fu - c * c).max(0.0);
                if den == 0.0 {
                    // endpoint s = 0: integrable limit; evaluate via the
                    // derivative f^2 - c^2 ~ 2 c f'(b) (u - b)
                    let fp = 1.5 * b * b;
                    let lim = c / (f(b) * (2.0 * c * fp).sqrt());
                    return 2.0 * (a - b) * s * lim / (s * (a - b).sqrt()).max(f64::MIN_POSITIVE);
                }
                c / (fu * den.sqrt()) * 2.0 * (a - b) * s
            },
            1 << 14,
        );
    let length = 2.0
        * simpson(
            |s| {
                let u = b + (a - b) * s * s;
                let fu = f(u);
                let den = (fu * fu - c * c).max(0.0);
                if den == 0.0 {
                    let fp = 1.5 * b * b;
                    let lim = fu / (2.0 * c * fp).sqrt();
                    return 2.0 * (a - b) * s * lim / (s * (a - b).sqrt()).max(f64::MIN_POSITIVE);
                }
                fu / den.sqrt() * 2.0 * (a - b) * s
            },
            1 << 14,
        );
    (dtheta, length)
}

/// Quadrature distance between `(a, 0)` and `(a, dtheta)` by bisecting the
/// turning level.
fn quadrature_distance_symmetric(a: f64, dtheta: f64) -> f64 {
    let mut lo = 1e-300;
    let mut hi = a * (1.0 - 1e-12);
    // Twist gap is monotone decreasing in the turning level.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (dt, _) = turning_point_arc(a, mid);
        if dt > dtheta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    turning_point_arc(a, 0.5 * (lo + hi)).1
}

#[test]
fn symmetric_pairs_match_quadrature() {
    for &(a, dt) in &[
        (0.5, 0.25),
        (0.5, 1.0),
        (0.5, 4.0),
        (0.3, 2.0),
        (0.8, 0.7),
        (1.2, 1.5),
        (0.1, 1.0),
        (0.05, 0.5),
    ] {
        let p = CuspPoint::new(a, 0.0).unwrap();
        let q = CuspPoint::new(a, dt).unwrap();
        let got = cusp::distance(p, q);
        let want = quadrature_distance_symmetric(a, dt);
        let rel = (got - want).abs() / want;
        assert!(rel < 1e-6, "a={a} dt={dt}: got {got}, quadrature {want}, rel {rel:.2e}");
    }
}

#[test]
fn deep_dive_pairs_match_quadrature() {
    // Very large twist gaps force the geodesic far down toward the cusp.
    for &(a, dt) in &[(0.5, 30.0), (0.5, 300.0), (0.4, 3000.0), (0.3, 100000.0)] {
        let p = CuspPoint::new(a, 0.0).unwrap();
        let q = CuspPoint::new(a, dt).unwrap();
        let got = cusp::distance(p, q);
        let want = quadrature_distance_symmetric(a, dt);
        let rel = (got - want).abs() / want;
        assert!(rel < 1e-4, "a={a} dt={dt}: got {got}, quadrature {want}, rel {rel:.2e}");
        assert!(got < 2.0 * a, "dive must beat the through-cusp route");
    }
}

#[test]
fn random_pairs_match_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let up = rng.gen_range(0.05..1.0);
        let uq = rng.gen_range(0.05..1.0);
        let tp = rng.gen_range(-1.0..1.0);
        let tq = rng.gen_range(-1.0..1.0);
        let p = CuspPoint::new(up, tp).unwrap();
        let q = CuspPoint::new(uq, tq).unwrap();
        let got = cusp::distance(p, q);
        let want = oracle::grid_distance(p, q, 500, 6);
        let rel = (got - want).abs() / want.max(1e-12);
        worst = worst.max(rel);
        assert!(
            rel < 1e-3,
            "({up},{tp})-({uq},{tq}): got {got}, oracle {want}, rel {rel:.2e}"
        );
    }
    println!("grid-oracle worst relative deviation: {worst:.3e}");
}

#[test]
fn displacement_slope_is_cubic() {
    // d((a,0),(a,1)) ~ f(a) = a^3/2 as a -> 0: log-log slope 3.
    let levels: Vec<f64> = (0..12).map(|i| 0.01 * (10.0f64).powf(i as f64 / 11.0)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &a in &levels {
        let d = cusp::distance(
            CuspPoint::new(a, 0.0).unwrap(),
            CuspPoint::new(a, 1.0).unwrap(),
        );
        xs.push(a.ln());
        ys.push(d.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((slope - 3.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn constant_speed_parametrization() {
    let p = CuspPoint::new(0.6, -0.3).unwrap();
    let q = CuspPoint::new(0.25, 1.4).unwrap();
    let geo = cusp::geodesic(p, q);
    let d = geo.length();
    let samples = [0.0, 0.1, 0.35, 0.5, 0.62, 0.8, 1.0];
    for (i, &s) in samples.iter().enumerate() {
        for &t in &samples[i + 1..] {
            let a = geo.point_at(s).unwrap();
            let b = geo.point_at(t).unwrap();
            let dd = cusp::distance(a, b);
            let want = (t - s) * d;
            assert!(
                (dd - want).abs() <= 1e-6 * d,
                "s={s} t={t}: {dd} vs {want} (err {:.2e})",
                (dd - want).abs() / d
            );
        }
    }
}

#[test]
fn midpoint_sag_matches_asymptotics() {
    // For small twist gaps the midpoint of (a,0),(a,dt) sits at
    // u = a - 3 a^5 dt^2 / 32 + higher order.
    for &(a, dt) in &[(0.5f64, 0.2f64), (0.3, 0.1)] {
        let p = CuspPoint::new(a, 0.0).unwrap();
        let q = CuspPoint::new(a, dt).unwrap();
        let m = cusp::geodesic(p, q).point_at(0.5).unwrap();
        let sag = a - m.u();
        let want = 3.0 * a.powi(5) * dt * dt / 32.0;
        assert!(
            (sag - want).abs() < 0.05 * want + 1e-12,
            "a={a} dt={dt}: sag {sag:.3e} vs {want:.3e}"
        );
        let tm = m.theta().unwrap();
        assert!((tm - 0.5 * dt).abs() < 1e-9, "midpoint twist {tm}");
    }
}
