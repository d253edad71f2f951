//! Model isometries: twist generators on cusp factors, auxiliary axis
//! translations on hyperbolic-plane factors, words over both, the
//! displacement functional, and a randomized properness probe.
//!
//! One full twist about curve `i` translates `theta_i` by 1 and fixes all
//! other coordinates; on a pinched factor (`u_i = 0`) the twist acts as the
//! identity, which is how the action extends to the boundary strata. The
//! model twists about distinct curves commute, unlike twists about
//! intersecting curves; proper actions are exhibited on targets augmented
//! with a hyperbolic-plane factor and transversal axis translations.

use crate::cusp::CuspPoint;
use crate::error::{Error, Result};
use crate::space::{hyperbolic, NpcSpace, SpacePoint};
use crate::wp::StratifiedPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// A generating isometry of a target space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    /// Dehn-twist analog about curve `i` (1-based): `theta_i += 1`.
    Twist { curve: usize },
    /// Translation of the given length along a fixed coordinate axis: a
    /// boost on a hyperbolic-plane factor, a coordinate shift on a
    /// Euclidean factor.
    Translate { axis: u8, length: f64 },
}

/// A finite word of generator powers, applied left to right.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IsometryWord {
    letters: Vec<(Generator, i64)>,
}

impl IsometryWord {
    pub fn identity() -> Self {
        IsometryWord::default()
    }

    pub fn twist(curve: usize) -> Self {
        IsometryWord { letters: vec![(Generator::Twist { curve }, 1)] }
    }

    pub fn twist_power(curve: usize, power: i64) -> Self {
        if power == 0 {
            return IsometryWord::identity();
        }
        IsometryWord { letters: vec![(Generator::Twist { curve }, power)] }
    }

    pub fn translation(axis: u8, length: f64) -> Self {
        IsometryWord { letters: vec![(Generator::Translate { axis, length }, 1)] }
    }

    pub fn then(mut self, gen: Generator, power: i64) -> Self {
        if power != 0 {
            self.letters.push((gen, power));
        }
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        IsometryWord {
            letters: self.letters.iter().rev().map(|&(g, p)| (g, -p)).collect(),
        }
    }

    pub fn letters(&self) -> &[(Generator, i64)] {
        &self.letters
    }
}

impl fmt::Display for IsometryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "identity");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|(g, p)| match g {
                Generator::Twist { curve } => {
                    if *p == 1 {
                        format!("twist:{curve}")
                    } else {
                        format!("twist:{curve}^{p}")
                    }
                }
                Generator::Translate { axis, length } => {
                    if *p == 1 {
                        format!("translate:{axis}:{length}")
                    } else {
                        format!("translate:{axis}:{length}^{p}")
                    }
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Applies a word of twists to a stratified point.
///
/// Pinned factors are fixed; translation letters are rejected because the
/// bare model target has no hyperbolic factor.
pub fn apply_isometry(word: &IsometryWord, point: &StratifiedPoint) -> Result<StratifiedPoint> {
    let mut factors: Vec<CuspPoint> = point.factors().to_vec();
    for &(gen, power) in word.letters() {
        match gen {
            Generator::Twist { curve } => {
                apply_twist(&mut factors, point.genus(), curve, power)?;
            }
            Generator::Translate { .. } => {
                return Err(Error::mismatch(
                    "translation generator needs a hyperbolic-plane factor in the target",
                ));
            }
        }
    }
    StratifiedPoint::new(point.genus(), factors)
}

fn apply_twist(factors: &mut [CuspPoint], genus: usize, curve: usize, power: i64) -> Result<()> {
    let max = 3 * genus - 3;
    if curve == 0 || curve > max {
        return Err(Error::invalid(format!("twist curve {curve} outside 1..={max}")));
    }
    let c = factors[curve - 1];
    if let Some(theta) = c.theta() {
        factors[curve - 1] = CuspPoint::new(c.u(), theta + power as f64)?;
    }
    Ok(())
}

/// Applies a word to a point of an arbitrary target space.
///
/// Twist letters act on cusp factors by curve index (counting the cusp
/// factors of a product in order); translation letters act on the first
/// hyperbolic-plane factor. Kinds that admit no such action reject the word.
pub fn apply_isometry_point(
    word: &IsometryWord,
    space: &NpcSpace,
    point: &SpacePoint,
) -> Result<SpacePoint> {
    space.validate_point(point)?;
    let mut out = point.clone();
    for &(gen, power) in word.letters() {
        out = apply_generator(gen, power, space, out)?;
    }
    Ok(out)
}

fn apply_generator(
    gen: Generator,
    power: i64,
    space: &NpcSpace,
    point: SpacePoint,
) -> Result<SpacePoint> {
    match (gen, space, point) {
        (Generator::Twist { curve }, NpcSpace::CuspFactor, SpacePoint::Cusp(c)) => {
            if curve != 1 {
                return Err(Error::invalid(format!(
                    "cusp factor has a single curve; got twist index {curve}"
                )));
            }
            Ok(SpacePoint::Cusp(match c.theta() {
                Some(t) => CuspPoint::new(c.u(), t + power as f64)?,
                None => c,
            }))
        }
        (Generator::Translate { axis, length }, NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(x)) => {
            Ok(SpacePoint::Hyperboloid(hyperbolic::axis_translation(
                axis,
                length * power as f64,
                &x,
            )))
        }
        (Generator::Translate { axis, length }, NpcSpace::Euclidean { dim }, SpacePoint::Euclidean(mut x)) => {
            let axis = axis as usize;
            if axis >= *dim {
                return Err(Error::invalid(format!(
                    "translation axis {axis} outside euclidean dimension {dim}"
                )));
            }
            x[axis] += length * power as f64;
            Ok(SpacePoint::Euclidean(x))
        }
        (Generator::Twist { curve }, NpcSpace::Product(fs), SpacePoint::Product(mut xs)) => {
            let mut seen = 0usize;
            for (f, x) in fs.iter().zip(xs.iter_mut()) {
                if matches!(f, NpcSpace::CuspFactor) {
                    seen += 1;
                    if seen == curve {
                        let SpacePoint::Cusp(c) = x else { unreachable!() };
                        if let Some(t) = c.theta() {
                            *x = SpacePoint::Cusp(CuspPoint::new(c.u(), t + power as f64)?);
                        }
                        return Ok(SpacePoint::Product(xs));
                    }
                }
            }
            Err(Error::invalid(format!(
                "twist index {curve} exceeds the {seen} cusp factors of the target"
            )))
        }
        (Generator::Translate { axis, length }, NpcSpace::Product(fs), SpacePoint::Product(mut xs)) => {
            // Prefer a hyperbolic-plane factor, else the first euclidean one.
            for (f, x) in fs.iter().zip(xs.iter_mut()) {
                if matches!(f, NpcSpace::HyperbolicPlane) {
                    let SpacePoint::Hyperboloid(h) = x else { unreachable!() };
                    *x = SpacePoint::Hyperboloid(hyperbolic::axis_translation(
                        axis,
                        length * power as f64,
                        h,
                    ));
                    return Ok(SpacePoint::Product(xs));
                }
            }
            for (f, x) in fs.iter().zip(xs.iter_mut()) {
                if matches!(f, NpcSpace::Euclidean { .. }) {
                    let moved =
                        apply_generator(Generator::Translate { axis, length }, power, f, x.clone())?;
                    *x = moved;
                    return Ok(SpacePoint::Product(xs));
                }
            }
            Err(Error::mismatch("target has no factor a translation can act on"))
        }
        (g, s, _) => Err(Error::mismatch(format!(
            "generator {g:?} does not act on space {s:?}"
        ))),
    }
}

/// Displacement functional: `max_i d(x, g_i x)` over the generator list.
pub fn delta_functional(
    space: &NpcSpace,
    point: &SpacePoint,
    generators: &[IsometryWord],
) -> Result<f64> {
    if generators.is_empty() {
        return Err(Error::invalid("displacement functional needs at least one generator"));
    }
    let mut best = 0.0f64;
    for g in generators {
        let moved = apply_isometry_point(g, space, point)?;
        best = best.max(space.distance_unchecked(point, &moved));
    }
    Ok(best)
}

/// Verdict of the properness probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeVerdict {
    /// Every sampled sublevel point stayed within the search radius.
    BoundedWithinRadius,
    /// A point with displacement below the level was found beyond the
    /// search radius.
    Escaped,
}

/// Outcome of the randomized sublevel-set search.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub level: f64,
    pub search_radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub verdict: ProbeVerdict,
    /// Displacement values at accepted sublevel points (subsampled).
    pub delta_values: Vec<f64>,
    /// Largest distance from the basepoint reached inside the sublevel set.
    pub max_distance: f64,
    /// The probe is a heuristic: escaping is evidence the sublevel set is
    /// unbounded; not escaping is evidence, not proof, of properness.
    pub note: &'static str,
}

const PROBE_NOTE: &str = "heuristic evidence, not proof: 'escaped' exhibits a sublevel point \
beyond the radius; 'bounded_within_radius' only reports that the search found none";

/// Randomized expanding search of the sublevel set `{ delta < level }`.
///
/// A seeded random walk with momentum moves through the sublevel set
/// starting at the basepoint; the verdict is `Escaped` as soon as an
/// accepted point lies farther than `search_radius` from the basepoint.
/// Deterministic for a fixed `(seed, config)`.
pub fn properness_probe(
    space: &NpcSpace,
    generators: &[IsometryWord],
    level: f64,
    search_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if !(level > 0.0) {
        return Err(Error::invalid("probe level must be positive"));
    }
    if generators.is_empty() {
        return Err(Error::invalid("probe needs at least one generator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = space.basepoint();
    let mut x = base.clone();
    let mut delta_values = Vec::new();
    let mut max_distance = 0.0f64;
    let mut verdict = ProbeVerdict::BoundedWithinRadius;

    // Momentum: reuse the previous accepted step direction to make the walk
    // ballistic along flat directions of the sublevel set.
    let mut prev: Option<SpacePoint> = None;
    let restart_every = (samples / 4).max(200);

    for k in 0..samples {
        if k % restart_every == restart_every - 1 {
            x = base.clone();
            prev = None;
        }
        let step = 0.35 * 1.5f64.powi((k % 5) as i32 - 2);
        let candidate = propose(space, &x, prev.as_ref(), step, &mut rng);
        let delta = delta_functional(space, &candidate, generators)?;
        if delta < level {
            if delta_values.len() < 256 {
                delta_values.push(delta);
            }
            prev = Some(x.clone());
            let d = space.distance_unchecked(&base, &candidate);
            x = candidate;
            if d > max_distance {
                max_distance = d;
            }
            if d > search_radius {
                verdict = ProbeVerdict::Escaped;
                break;
            }
        }
    }

    Ok(ProbeReport {
        level,
        search_radius,
        samples,
        seed,
        verdict,
        delta_values,
        max_distance,
        note: PROBE_NOTE,
    })
}

/// Metric-scaled random proposal around `x`; with a previous position the
/// walk continues ballistically (reflect `prev` across `x`, then jitter),
/// which lets it run along flat directions of the sublevel set.
fn propose<R: Rng>(
    space: &NpcSpace,
    x: &SpacePoint,
    prev: Option<&SpacePoint>,
    step: f64,
    rng: &mut R,
) -> SpacePoint {
    match prev {
        None => perturb(space, x, step, rng),
        Some(p) => perturb(space, &extend(space, p, x), 0.7 * step, rng),
    }
}

/// A point beyond `x` on the geodesic from `p` through `x` (reflection of
/// `p` across `x`), computed per factor kind.
fn extend(space: &NpcSpace, p: &SpacePoint, x: &SpacePoint) -> SpacePoint {
    match (space, p, x) {
        (NpcSpace::Euclidean { .. }, SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
            SpacePoint::Euclidean(a.iter().zip(b).map(|(pa, xb)| 2.0 * xb - pa).collect())
        }
        (NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(a), SpacePoint::Hyperboloid(b)) => {
            let l = hyperbolic::log(b, a);
            SpacePoint::Hyperboloid(hyperbolic::exp(b, &[-l[0], -l[1], -l[2]]))
        }
        (NpcSpace::CuspFactor, SpacePoint::Cusp(a), SpacePoint::Cusp(b)) => {
            let (bu, bt) = (b.u(), b.theta().unwrap_or(0.0));
            let (au, at) = (a.u(), a.theta().unwrap_or(bt));
            let u = (2.0 * bu - au).max(5e-3);
            SpacePoint::Cusp(CuspPoint::new(u, 2.0 * bt - at).expect("u > 0"))
        }
        (NpcSpace::Product(fs), SpacePoint::Product(ps), SpacePoint::Product(xs)) => {
            SpacePoint::Product(
                fs.iter()
                    .zip(ps.iter().zip(xs))
                    .map(|(f, (pp, xx))| extend(f, pp, xx))
                    .collect(),
            )
        }
        // Trees and mismatches: stay at x.
        _ => x.clone(),
    }
}

fn perturb<R: Rng>(space: &NpcSpace, x: &SpacePoint, step: f64, rng: &mut R) -> SpacePoint {
    match (space, x) {
        (NpcSpace::Euclidean { .. }, SpacePoint::Euclidean(c)) => {
            SpacePoint::Euclidean(c.iter().map(|v| v + step * normal(rng)).collect())
        }
        (NpcSpace::HyperbolicPlane, SpacePoint::Hyperboloid(p)) => {
            // random tangent at p of metric norm ~ step
            let raw = [0.0, normal(rng), normal(rng)];
            let inner = hyperbolic::minkowski(p, &raw);
            let mut v = [
                raw[0] + inner * p[0],
                raw[1] + inner * p[1],
                raw[2] + inner * p[2],
            ];
            let n = hyperbolic::minkowski(&v, &v).max(1e-300).sqrt();
            let s = step * normal(rng).abs() / n;
            for c in v.iter_mut() {
                *c *= s;
            }
            SpacePoint::Hyperboloid(hyperbolic::exp(p, &v))
        }
        (NpcSpace::StarTree { branch_lengths }, SpacePoint::Tree { branch, arc }) => {
            let mut b = *branch;
            let mut a = arc + step * normal(rng);
            if a <= 0.0 || b == 0 {
                b = rng.gen_range(0..branch_lengths.len()) + 1;
                a = a.abs();
            }
            a = a.clamp(0.0, branch_lengths[b - 1]);
            let (branch, arc) = crate::space::star_tree::canonical(b, a);
            SpacePoint::Tree { branch, arc }
        }
        (NpcSpace::CuspFactor, SpacePoint::Cusp(c)) => {
            let u = c.u();
            let theta = c.theta().unwrap_or(0.0);
            let nu = (u + 0.3 * step * normal(rng)).max(5e-3);
            // theta step scaled by the inverse warp so the metric step size
            // stays comparable across levels, capped to keep the geodesic
            // solves cheap.
            let dtheta =
                (step * normal(rng) / crate::cusp::warp(0.5 * (u + nu))).clamp(-40.0, 40.0);
            SpacePoint::Cusp(CuspPoint::new(nu, theta + dtheta).expect("u > 0"))
        }
        (NpcSpace::Product(fs), SpacePoint::Product(xs)) => SpacePoint::Product(
            fs.iter()
                .zip(xs)
                .map(|(f, xx)| perturb(f, xx, step, rng))
                .collect(),
        ),
        _ => x.clone(),
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
