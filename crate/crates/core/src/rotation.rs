//! Rotation numbers and rotation intervals for degree-one lifts.
//!
//! For a nondecreasing lift the rotation number is unique and the n-step average
//! displacement approximates it with rigorous error at most 1/n. On top of the
//! numeric estimate we attempt an exact rational certification: rho = p/q for a
//! monotone lift if and only if m^q(x) = x + p has a solution, which for piecewise
//! affine lifts is decided exactly by symbolic self-composition.
//!
//! For a general (non-monotone) lift the rotation set is the closed interval
//! [rho(F-), rho(F+)] where F+ (x) = sup_{x-1 <= y <= x} f(y) and
//! F- (x) = inf_{x <= y <= x+1} f(y). Both envelopes are nondecreasing degree-one
//! lifts again. Because any window of length one dominates everything further left
//! (values drop by an integer per period), the upper envelope is simply the running
//! maximum sup_{y <= x} f(y), which for piecewise affine lifts is computed exactly
//! by a two-period sweep. The lower envelope is the reflection dual.

use crate::lift::{Lift, LiftError, LiftRepr, MonotoneLift};

#[derive(Debug, thiserror::Error)]
pub enum RotationError {
    #[error("tolerance must be positive and finite")]
    BadTolerance,
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("lift has no lower climbing interval (top of the turn is not high enough)")]
    LowerClimbingAbsent,
    #[error("forward point search did not reach the requested tolerance (best {0:e})")]
    ForwardPointNotFound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub n_iter: usize,
    /// Some((p, q)) when the rotation number was certified to equal p/q exactly.
    pub exact: Option<(i64, u32)>,
}

#[derive(Debug, Clone, Copy)]
pub struct RotationInterval {
    pub lo: RotationEstimate,
    pub hi: RotationEstimate,
}

#[derive(Debug, Clone, Copy)]
pub enum Side {
    Upper,
    Lower,
}

pub const DEFAULT_Q_MAX: u32 = 64;

/// Monotone envelope of a degree-one lift (the lift itself if already monotone).
pub fn envelope(lift: &Lift, side: Side) -> Result<MonotoneLift, RotationError> {
    if let Ok(m) = MonotoneLift::new(lift.clone()) {
        return Ok(m);
    }
    match side {
        Side::Upper => upper_envelope(lift),
        Side::Lower => {
            let refl = lift.reflect();
            let up = upper_envelope(&refl)?;
            Ok(MonotoneLift::new(up.lift().reflect())?)
        }
    }
}

fn upper_envelope(lift: &Lift) -> Result<MonotoneLift, RotationError> {
    match lift.repr() {
        LiftRepr::Affine { .. } => {
            let env = upper_envelope_affine(lift)?;
            Ok(MonotoneLift::new(env)?)
        }
        LiftRepr::Sine { .. } => {
            // water-poured hull: flat from the local max z0 to the point w0 of the
            // increasing branch at the same height, equal to the lift beyond
            let cl = climbing_intervals(lift)?;
            let (w0, top) = cl.efficient;
            Ok(MonotoneLift::new(Lift::poured(lift.clone(), w0, top))?)
        }
        LiftRepr::Poured { .. } => Ok(MonotoneLift::new(lift.clone())?),
    }
}

/// Exact running maximum sup_{y <= x} f(y) of a piecewise affine lift, computed over
/// two periods so that wrap-around contributions are fully absorbed.
fn upper_envelope_affine(lift: &Lift) -> Result<Lift, RotationError> {
    let (bp, vals) = match lift.repr() {
        LiftRepr::Affine { breakpoints, values } => (breakpoints, values),
        _ => unreachable!(),
    };
    let x0 = bp[0];
    // nodes over [x0, x0+2]
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(2 * bp.len());
    for (b, v) in bp.iter().zip(vals.iter()) {
        nodes.push((*b, *v));
    }
    for (b, v) in bp.iter().zip(vals.iter()).skip(1) {
        nodes.push((*b + 1.0, *v + 1.0));
    }
    let mut out: Vec<(f64, f64)> = vec![(x0, vals[0])];
    let mut rm = vals[0];
    for w in nodes.windows(2) {
        let (a, fa) = w[0];
        let (b, fb) = w[1];
        if b <= a {
            continue;
        }
        if fb <= rm {
            out.push((b, rm));
        } else {
            if fa < rm {
                let xc = a + (b - a) * (rm - fa) / (fb - fa);
                if xc > a && xc < b {
                    out.push((xc, rm));
                }
            }
            out.push((b, fb));
            rm = fb;
        }
    }
    // keep the second period [x0+1, x0+2] and shift it down by one
    let lo = x0 + 1.0;
    let hi = x0 + 2.0;
    let eval_nodes = |x: f64| -> f64 {
        // piecewise-linear interpolation over `out`
        let idx = out.partition_point(|(b, _)| *b <= x);
        if idx == 0 {
            return out[0].1;
        }
        if idx >= out.len() {
            return out[out.len() - 1].1;
        }
        let (a, va) = out[idx - 1];
        let (b, vb) = out[idx];
        if b == a {
            va
        } else {
            va + (x - a) * (vb - va) / (b - a)
        }
    };
    let mut bps = vec![x0];
    let mut vs = vec![eval_nodes(lo) - 1.0];
    for (b, v) in &out {
        if *b > lo + 1e-13 && *b < hi - 1e-13 {
            bps.push(*b - 1.0);
            vs.push(*v - 1.0);
        }
    }
    bps.push(x0 + 1.0);
    vs.push(vs[0] + 1.0);
    // drop duplicates / collinear noise
    let mut cb = vec![bps[0]];
    let mut cv = vec![vs[0]];
    for i in 1..bps.len() {
        if bps[i] - cb[cb.len() - 1] > 1e-12 {
            cb.push(bps[i]);
            cv.push(vs[i]);
        } else {
            let j = cv.len() - 1;
            cv[j] = cv[j].max(vs[i]);
        }
    }
    Ok(Lift::affine(cb, cv)?)
}

/// Symbolic composition f(g(x)) of two nondecreasing piecewise affine lifts.
pub fn compose_affine(f: &Lift, g: &Lift) -> Result<Lift, RotationError> {
    let (gbp, gvals) = match g.repr() {
        LiftRepr::Affine { breakpoints, values } => (breakpoints, values),
        _ => unreachable!("compose_affine needs affine lifts"),
    };
    let fbp = match f.repr() {
        LiftRepr::Affine { breakpoints, .. } => breakpoints,
        _ => unreachable!("compose_affine needs affine lifts"),
    };
    let x0 = gbp[0];
    let mut cuts: Vec<f64> = gbp[..gbp.len() - 1].to_vec();
    // preimages under g of f's breakpoints (all integer translates meeting g's range)
    let m = gbp.len() - 1;
    for i in 0..m {
        let (a, b) = (gbp[i], gbp[i + 1]);
        let (va, vb) = (gvals[i], gvals[i + 1]);
        if vb - va <= 1e-13 {
            continue; // flat: composition constant there regardless
        }
        for fb in &fbp[..fbp.len() - 1] {
            let k_lo = (va - fb).floor() as i64 - 1;
            let k_hi = (vb - fb).ceil() as i64 + 1;
            for k in k_lo..=k_hi {
                let target = fb + k as f64;
                if target > va + 1e-13 && target < vb - 1e-13 {
                    cuts.push(a + (b - a) * (target - va) / (vb - va));
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-13);
    cuts.retain(|x| *x >= x0 - 1e-13 && *x < x0 + 1.0 - 1e-13);
    let mut bps = cuts;
    bps.push(x0 + 1.0);
    let mut vs: Vec<f64> = bps.iter().map(|x| f.eval(g.eval(*x))).collect();
    // enforce the degree-one endpoint identity exactly
    let last = vs.len() - 1;
    vs[last] = vs[0] + 1.0;
    Ok(Lift::affine(bps, vs)?)
}

/// Rotation number of a nondecreasing lift: n-step displacement average with rigorous
/// error 1/n, plus exact rational certification for denominators up to q_max.
pub fn rot_monotone(
    m: &MonotoneLift,
    tol: f64,
    q_max: u32,
) -> Result<RotationEstimate, RotationError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(RotationError::BadTolerance);
    }
    let n = ((1.0 / tol).ceil() as usize).clamp(1_000, 50_000_000);
    let x0 = m.lift().domain_start();
    let est = (m.iterate(x0, n) - x0) / n as f64;
    let err = 1.0 / n as f64;
    // near-parabolic tangencies can poison the orbit estimate far beyond 1/n (a
    // diagonal touch that f64 misses by ~1e-16 turns into a slow drift), so every
    // denominator gets a certification attempt; the estimate only picks p
    for q in 1..=q_max {
        let p = (est * q as f64).round() as i64;
        if certify_rational(m, q, p)? {
            return Ok(RotationEstimate {
                value: p as f64 / q as f64,
                error_bound: 0.0,
                n_iter: n,
                exact: Some((p, q)),
            });
        }
    }
    Ok(RotationEstimate { value: est, error_bound: err, n_iter: n, exact: None })
}

/// Does m^q(x) = x + p have a solution? (Equivalent to rho(m) = p/q for monotone m.)
fn certify_rational(m: &MonotoneLift, q: u32, p: i64) -> Result<bool, RotationError> {
    let lift = m.lift();
    if lift.is_affine() {
        let mut comp = lift.clone();
        for _ in 1..q {
            comp = compose_affine(lift, &comp)?;
        }
        if let LiftRepr::Affine { breakpoints, values } = comp.repr() {
            let slack = 1e-9;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (b, v) in breakpoints.iter().zip(values.iter()) {
                let h = v - b - p as f64;
                lo = lo.min(h);
                hi = hi.max(h);
            }
            return Ok(lo <= slack && hi >= -slack);
        }
        unreachable!()
    }
    // closed-form / poured lifts: continuous h(x) = m^q(x) - x - p on a fine grid;
    // a sign change or a near-zero certifies a genuine fixed point by continuity
    let x0 = lift.domain_start();
    let n = 4096;
    let mut prev = m.iterate(x0, q as usize) - x0 - p as f64;
    if prev.abs() < 1e-11 {
        return Ok(true);
    }
    for i in 1..=n {
        let x = x0 + i as f64 / n as f64;
        let h = m.iterate(x, q as usize) - x - p as f64;
        if h.abs() < 1e-11 || (h > 0.0) != (prev > 0.0) {
            return Ok(true);
        }
        prev = h;
    }
    Ok(false)
}

/// Rotation interval [rho(F-), rho(F+)] of a general degree-one lift.
pub fn rotation_interval(
    lift: &Lift,
    tol: f64,
    q_max: u32,
) -> Result<RotationInterval, RotationError> {
    let up = envelope(lift, Side::Upper)?;
    let dn = envelope(lift, Side::Lower)?;
    let hi = rot_monotone(&up, tol, q_max)?;
    let lo = rot_monotone(&dn, tol, q_max)?;
    Ok(RotationInterval { lo, hi })
}

#[derive(Debug, Clone)]
pub struct PointwiseRotation {
    pub value: f64,
    /// spread of the late window averages (heuristic error indicator)
    pub spread: f64,
    pub n_iter: usize,
}

/// Pointwise rotation number limsup (1/n)(f^n(x) - x), approximated by the running
/// maximum of displacement averages over the last decade of checkpoints.
pub fn pointwise_rotation(lift: &Lift, x: f64, n: usize) -> PointwiseRotation {
    let n = n.max(100);
    let x0 = lift.domain_start();
    let k0 = (x - x0).floor();
    let mut frac = x - k0;
    let mut disp: i64 = 0;
    let mut best = f64::NEG_INFINITY;
    let mut worst = f64::INFINITY;
    let start = n / 10;
    for k in 1..=n {
        let y = lift.eval(frac);
        let sh = (y - x0).floor();
        frac = y - sh;
        disp += sh as i64;
        if k >= start {
            let avg = (disp as f64 + frac - (x - k0)) / k as f64;
            best = best.max(avg);
            worst = worst.min(avg);
        }
    }
    PointwiseRotation { value: best, spread: best - worst, n_iter: n }
}

#[derive(Debug, Clone, Copy)]
pub struct ClimbingIntervals {
    /// [w0, z0+1]: the arc of the increasing branch on which the lift agrees with its
    /// upper envelope (efficient climbing).
    pub efficient: (f64, f64),
    /// [y0, w0']: the dual arc for the lower envelope, when it exists.
    pub lower: Option<(f64, f64)>,
}

/// Climbing intervals of a two-turn lift (requires turn markers).
pub fn climbing_intervals(lift: &Lift) -> Result<ClimbingIntervals, RotationError> {
    let tm = lift.turns().ok_or(LiftError::MissingTurnMarkers)?;
    let fz = lift.eval(tm.z0);
    let fy = lift.eval(tm.y0);
    let top = tm.z0 + 1.0;
    // increasing branch [y0, z0+1] runs from fy up to fz+1; fz sits inside it
    let w0 = solve_on_branch(lift, tm.y0, top, fz, true);
    let lower = if fz > fy + 1e-12 {
        let w0p = solve_on_branch(lift, tm.y0, top, fy + 1.0, false);
        Some((tm.y0, w0p))
    } else {
        None
    };
    Ok(ClimbingIntervals { efficient: (w0, top), lower })
}

/// Root of f = target on the nondecreasing branch [lo, hi]; `rightmost` picks the sup
/// of the solution set, otherwise the inf (matters when the branch has flat pieces).
fn solve_on_branch(lift: &Lift, lo: f64, hi: f64, target: f64, rightmost: bool) -> f64 {
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = lift.eval(mid);
        let go_right = if rightmost { v <= target } else { v < target };
        if go_right {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone)]
pub struct BackwardOrbit {
    /// chosen forward point in the efficient climbing interval
    pub y0: f64,
    /// its forward pointwise rotation number
    pub forward: f64,
    /// rho(F+), the target both averages should match
    pub rho_upper: f64,
    /// orbit[k] = y_{-k}; orbit[0] = y0; f(orbit[k+1]) = orbit[k]
    pub orbit: Vec<f64>,
    /// translate index of each backward point: orbit[k] - m_k lies in [w0, z0+1]
    pub translates: Vec<i64>,
    pub backward_avg: f64,
}

/// Backward orbit staying in integer translates of the efficient climbing interval,
/// together with a forward point realizing sup rho.
pub fn backward_orbit_in_climbing(
    lift: &Lift,
    depth: usize,
    tol: f64,
) -> Result<BackwardOrbit, RotationError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(RotationError::BadTolerance);
    }
    let cl = climbing_intervals(lift)?;
    let (w0, top) = cl.efficient;
    let up = envelope(lift, Side::Upper)?;
    let rho = rot_monotone(&up, (tol * 0.1).max(1e-7), DEFAULT_Q_MAX)?.value;
    // forward point: scan the climbing interval for the best pointwise match
    let n_fwd = ((4.0 / tol) as usize).clamp(2_000, 400_000);
    let grid = 256;
    let mut best_x = w0;
    let mut best_gap = f64::INFINITY;
    for i in 0..=grid {
        let x = w0 + (top - w0) * i as f64 / grid as f64;
        let pr = pointwise_rotation(lift, x, n_fwd);
        let gap = (pr.value - rho).abs();
        if gap < best_gap {
            best_gap = gap;
            best_x = x;
        }
    }
    if best_gap > tol {
        return Err(RotationError::ForwardPointNotFound(best_gap));
    }
    let forward = pointwise_rotation(lift, best_x, n_fwd).value;
    let fz = lift.eval(lift.turns().unwrap().z0);
    let mut orbit = vec![best_x];
    let mut translates = vec![((best_x - w0).floor()) as i64];
    let mut cur = best_x;
    for _ in 0..depth {
        // f maps [w0, z0+1] + m increasingly onto [fz + m, fz + 1 + m]
        let raw = cur - fz;
        let mut mm = raw.floor();
        if raw - mm < 1e-9 {
            // boundary tie: prefer the translate nearest the rotation course
            let want = cur - rho;
            if (w0 + mm - 1.0 - want).abs() < (w0 + mm - want).abs() {
                mm -= 1.0;
            }
        }
        let t_local = cur - mm; // in [fz, fz+1]
        let x_local = solve_on_branch(lift, w0, top, t_local.clamp(fz, fz + 1.0), false);
        cur = x_local + mm;
        orbit.push(cur);
        translates.push(mm as i64);
    }
    let backward_avg = (best_x - cur) / depth as f64;
    Ok(BackwardOrbit { y0: best_x, forward, rho_upper: rho, orbit, translates, backward_avg })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_piece() -> Lift {
        Lift::affine(
            vec![0.0, 0.125, 0.25, 0.375, 0.5, 1.0],
            vec![0.0, -0.875, 1.25, -0.625, 0.5, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn rigid_rotation_estimate() {
        let f = Lift::affine(vec![0.0, 1.0], vec![0.25, 1.25]).unwrap();
        let m = MonotoneLift::new(f).unwrap();
        let r = rot_monotone(&m, 1e-4, 16).unwrap();
        assert_eq!(r.exact, Some((1, 4)));
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn upper_envelope_matches_window_sup() {
        let f = five_piece();
        let env = envelope(&f, Side::Upper).unwrap();
        for i in 0..200 {
            let x = -0.5 + i as f64 / 80.0;
            // brute-force sup over [x-1, x]
            let mut sup = f64::NEG_INFINITY;
            for j in 0..=4000 {
                let y = x - 1.0 + j as f64 / 4000.0;
                sup = sup.max(f.eval(y));
            }
            assert!((env.eval(x) - sup).abs() < 2e-3, "x={x} env={} sup={sup}", env.eval(x));
        }
    }

    #[test]
    fn five_piece_interval_is_plus_minus_one() {
        let f = five_piece();
        let ri = rotation_interval(&f, 1e-4, 8).unwrap();
        assert_eq!(ri.hi.exact, Some((1, 1)));
        assert_eq!(ri.lo.exact, Some((-1, 1)));
    }

    #[test]
    fn five_piece_pointwise_values() {
        let f = five_piece();
        assert!((pointwise_rotation(&f, 0.25, 10_000).value - 1.0).abs() < 1e-9);
        assert!((pointwise_rotation(&f, 0.125, 10_000).value + 1.0).abs() < 1e-9);
        assert!((pointwise_rotation(&f, 0.375, 10_000).value + 1.0).abs() < 1e-9);
        assert!(pointwise_rotation(&f, 0.75, 10_000).value.abs() < 1e-9);
    }

    #[test]
    fn sine_interval_is_odd_and_certified_at_zero() {
        let f = Lift::sine(0.5).unwrap();
        let ri = rotation_interval(&f, 1e-5, 8).unwrap();
        assert_eq!(ri.lo.exact, Some((0, 1)));
        assert_eq!(ri.hi.exact, Some((0, 1)));
        let g = Lift::sine(3.0).unwrap();
        let ri = rotation_interval(&g, 1e-5, 64).unwrap();
        assert!((ri.lo.value + ri.hi.value).abs() < 1e-6, "{ri:?}");
        // the envelope of g_3 still has a fixed point (the flat top crosses the
        // diagonal until t ~ 4.6), so the interval is degenerate there
        assert_eq!(ri.hi.exact, Some((0, 1)));
        // the interval genuinely opens once the flat top clears the diagonal
        let g5 = Lift::sine(5.0).unwrap();
        let ri5 = rotation_interval(&g5, 1e-5, 64).unwrap();
        assert!(ri5.hi.value > 0.4, "{ri5:?}");
        assert!((ri5.lo.value + ri5.hi.value).abs() < 1e-6);
    }

    #[test]
    fn climbing_intervals_of_sine() {
        let f = Lift::sine(4.0).unwrap();
        let cl = climbing_intervals(&f).unwrap();
        let tm = f.turns().unwrap();
        let (w0, top) = cl.efficient;
        assert!(w0 > tm.y0 && w0 < top);
        assert!((f.eval(w0) - f.eval(tm.z0)).abs() < 1e-9);
        let (y0, w0p) = cl.lower.unwrap();
        assert_eq!(y0, tm.y0);
        assert!((f.eval(w0p) - f.eval(tm.y0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn climbing_requires_markers() {
        assert!(matches!(
            climbing_intervals(&five_piece()),
            Err(RotationError::Lift(LiftError::MissingTurnMarkers))
        ));
    }

    #[test]
    fn backward_orbit_on_sine() {
        let f = Lift::sine(4.0).unwrap();
        let bo = backward_orbit_in_climbing(&f, 100, 1e-2).unwrap();
        let cl = climbing_intervals(&f).unwrap();
        let (w0, top) = cl.efficient;
        for (y, m) in bo.orbit.iter().zip(bo.translates.iter()) {
            let local = y - *m as f64;
            assert!(local >= w0 - 1e-10 && local <= top + 1e-10);
        }
        // consecutive points really are preimages
        for k in 1..bo.orbit.len() {
            assert!((f.eval(bo.orbit[k]) - bo.orbit[k - 1]).abs() < 1e-9);
        }
        assert!((bo.backward_avg - bo.rho_upper).abs() < 2.0 / 100.0 + 1e-2);
    }
}
