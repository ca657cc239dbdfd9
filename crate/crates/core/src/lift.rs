//! Lifts of degree-one circle endomorphisms to the real line.
//!
//! A lift satisfies f(x+1) = f(x)+1, so it is determined by its restriction to one
//! fundamental domain [x0, x0+1]. Three representations are supported:
//!
//! * piecewise affine, with explicit breakpoints (the workhorse — compositions and
//!   envelopes stay in this class, so rational rotation numbers can be certified
//!   exactly);
//! * the closed-form sine family x + (t/2pi) sin(2pi x);
//! * a "poured" monotone hull of another lift: equal to the base on a kept arc and
//!   constant on the complementary arc (used for envelopes of the sine family).
//!
//! Orbits are stored as (fractional part, integer displacement) so that long
//! iterations do not lose the integer part to rounding.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Comparison slack for breakpoint bookkeeping.
const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum LiftError {
    #[error("breakpoints must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("need at least two breakpoints spanning one period")]
    TooFewBreakpoints,
    #[error("breakpoints must span exactly one period (got {0})")]
    BadPeriod(f64),
    #[error("values must satisfy v(x0+1) = v(x0) + 1 (violation {0:e})")]
    DegreeViolation(f64),
    #[error("turn markers do not match the monotonicity pattern of the pieces")]
    InvalidTurnMarkers,
    #[error("operation needs two-turn markers but the lift has none")]
    MissingTurnMarkers,
    #[error("lift is not monotone (decreasing piece found)")]
    NotMonotone,
    #[error("sine-family parameter must be finite and nonnegative")]
    BadParameter,
}

/// Markers for a two-turn lift: decreasing exactly on [z0, y0], increasing on
/// [y0, z0+1] (z0 = local max, y0 = local min).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TurnMarkers {
    pub z0: f64,
    pub y0: f64,
}

#[derive(Debug, Clone)]
pub enum LiftRepr {
    /// breakpoints b0 < .. < bm with bm = b0 + 1; values[i] = f(b[i]),
    /// values[m] = values[0] + 1; affine in between.
    Affine { breakpoints: Vec<f64>, values: Vec<f64> },
    /// x + (t/2pi) sin(2pi x)
    Sine { t: f64 },
    /// Equal to `base` on [keep_lo, keep_hi], constant base(keep_hi) on
    /// [keep_hi, keep_lo + 1]; requires base(keep_hi) = base(keep_lo) + 1.
    Poured { base: Box<Lift>, keep_lo: f64, keep_hi: f64 },
}

#[derive(Debug, Clone)]
pub struct Lift {
    repr: LiftRepr,
    turns: Option<TurnMarkers>,
}

impl Lift {
    pub fn affine(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, LiftError> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(LiftError::TooFewBreakpoints);
        }
        for w in breakpoints.windows(2) {
            if w[1] <= w[0] {
                return Err(LiftError::UnsortedBreakpoints);
            }
        }
        let period = breakpoints[breakpoints.len() - 1] - breakpoints[0];
        if (period - 1.0).abs() > 1e-9 {
            return Err(LiftError::BadPeriod(period));
        }
        let deg = values[values.len() - 1] - values[0] - 1.0;
        if deg.abs() > 1e-9 {
            return Err(LiftError::DegreeViolation(deg));
        }
        Ok(Lift { repr: LiftRepr::Affine { breakpoints, values }, turns: None })
    }

    pub fn sine(t: f64) -> Result<Self, LiftError> {
        if !t.is_finite() || t < 0.0 {
            return Err(LiftError::BadParameter);
        }
        let turns = if t > 1.0 {
            // slope 1 + t cos(2pi x) vanishes at cos(2pi x) = -1/t
            let z0 = (-1.0 / t).acos() / (2.0 * PI);
            Some(TurnMarkers { z0, y0: 1.0 - z0 })
        } else {
            None
        };
        Ok(Lift { repr: LiftRepr::Sine { t }, turns })
    }

    pub(crate) fn poured(base: Lift, keep_lo: f64, keep_hi: f64) -> Self {
        Lift { repr: LiftRepr::Poured { base: Box::new(base), keep_lo, keep_hi }, turns: None }
    }

    /// Attach two-turn markers after validating them against the actual monotonicity.
    pub fn with_turns(mut self, z0: f64, y0: f64) -> Result<Self, LiftError> {
        if !(y0 > z0 && y0 < z0 + 1.0) {
            return Err(LiftError::InvalidTurnMarkers);
        }
        let probe = |a: f64, b: f64, want_up: bool| -> bool {
            let n = 64;
            (0..n).all(|i| {
                let x1 = a + (b - a) * i as f64 / n as f64;
                let x2 = a + (b - a) * (i + 1) as f64 / n as f64;
                let d = self.eval(x2) - self.eval(x1);
                if want_up {
                    d >= -1e-9
                } else {
                    d <= 1e-9
                }
            })
        };
        if !probe(z0, y0, false) || !probe(y0, z0 + 1.0, true) {
            return Err(LiftError::InvalidTurnMarkers);
        }
        self.turns = Some(TurnMarkers { z0, y0 });
        Ok(self)
    }

    pub fn turns(&self) -> Option<TurnMarkers> {
        self.turns
    }

    pub fn repr(&self) -> &LiftRepr {
        &self.repr
    }

    /// Left endpoint of the canonical fundamental domain.
    pub fn domain_start(&self) -> f64 {
        match &self.repr {
            LiftRepr::Affine { breakpoints, .. } => breakpoints[0],
            LiftRepr::Sine { .. } => 0.0,
            LiftRepr::Poured { keep_lo, .. } => *keep_lo,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x0 = self.domain_start();
        let k = (x - x0).floor();
        let xr = x - k; // in [x0, x0+1)
        k + self.eval_fund(xr)
    }

    /// Evaluate on the fundamental domain [x0, x0+1] (no reduction).
    fn eval_fund(&self, x: f64) -> f64 {
        match &self.repr {
            LiftRepr::Affine { breakpoints, values } => {
                let m = breakpoints.len() - 1;
                // binary search for the piece
                let mut lo = 0usize;
                let mut hi = m;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if breakpoints[mid] <= x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let (a, b) = (breakpoints[lo], breakpoints[lo + 1]);
                let (va, vb) = (values[lo], values[lo + 1]);
                if b == a {
                    va
                } else {
                    va + (x - a) * (vb - va) / (b - a)
                }
            }
            LiftRepr::Sine { t } => x + t / (2.0 * PI) * (2.0 * PI * x).sin(),
            LiftRepr::Poured { base, keep_lo: _, keep_hi } => {
                if x <= *keep_hi {
                    base.eval(x)
                } else {
                    base.eval(*keep_hi)
                }
            }
        }
    }

    /// n-th iterate, with the integer displacement tracked exactly.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        let (frac, disp) = self.iterate_parts(x, n);
        frac + disp as f64
    }

    /// Returns (fractional representative in [x0, x0+1), accumulated integer shift)
    /// such that f^n(x) = frac + shift.
    pub fn iterate_parts(&self, x: f64, n: usize) -> (f64, i64) {
        let x0 = self.domain_start();
        let mut k = (x - x0).floor();
        let mut frac = x - k;
        let mut disp = k as i64;
        for _ in 0..n {
            let y = self.eval_fund(frac);
            k = (y - x0).floor();
            frac = y - k;
            disp += k as i64;
        }
        (frac, disp)
    }

    /// Monotone pieces of the fundamental domain as (a, b, f(a), f(b)), maximal.
    pub fn monotone_pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let x0 = self.domain_start();
        let cuts: Vec<f64> = match &self.repr {
            LiftRepr::Affine { breakpoints, .. } => breakpoints.clone(),
            LiftRepr::Sine { t } => {
                if *t <= 1.0 {
                    vec![x0, x0 + 1.0]
                } else {
                    let tm = self.turns.unwrap();
                    vec![0.0, tm.z0, tm.y0, 1.0]
                }
            }
            LiftRepr::Poured { keep_lo, keep_hi, .. } => {
                vec![*keep_lo, *keep_hi, *keep_lo + 1.0]
            }
        };
        let mut raw: Vec<(f64, f64, f64, f64)> = cuts
            .windows(2)
            .filter(|w| w[1] - w[0] > GEOM_EPS)
            .map(|w| (w[0], w[1], self.eval(w[0]), self.eval(w[1])))
            .collect();
        // merge consecutive pieces with the same direction
        let dir = |p: &(f64, f64, f64, f64)| (p.3 - p.2).signum();
        let mut merged: Vec<(f64, f64, f64, f64)> = Vec::new();
        for p in raw.drain(..) {
            if let Some(last) = merged.last_mut() {
                if dir(last) == dir(&p) || p.3 == p.2 {
                    last.1 = p.1;
                    last.3 = p.3;
                    continue;
                }
            }
            merged.push(p);
        }
        merged
    }

    /// All x in [x0, x0+1) with f(x) = y + m for some integer m, reported as
    /// (x, m) so that f(x) - m = y exactly up to roundoff.
    pub fn preimages(&self, y: f64) -> Vec<(f64, i64)> {
        let mut out: Vec<(f64, i64)> = Vec::new();
        for (a, b, va, vb) in self.monotone_pieces() {
            let (lo, hi) = if va <= vb { (va, vb) } else { (vb, va) };
            let m_lo = (lo - y).ceil() as i64;
            let m_hi = (hi - y).floor() as i64;
            for m in m_lo..=m_hi {
                let target = y + m as f64;
                if target < lo - GEOM_EPS || target > hi + GEOM_EPS {
                    continue;
                }
                if (vb - va).abs() <= GEOM_EPS {
                    // flat piece at the target level: report the left endpoint
                    if (va - target).abs() <= GEOM_EPS {
                        out.push((a, m));
                    }
                    continue;
                }
                let x = self.solve_monotone(a, b, target);
                out.push((x, m));
            }
        }
        let x0 = self.domain_start();
        out.retain(|(x, _)| *x >= x0 - GEOM_EPS && *x < x0 + 1.0 - GEOM_EPS);
        out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        out.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-11 && p.1 == q.1);
        out
    }

    /// Solve f(x) = target on a monotone piece [a, b] (target within the value range).
    pub fn solve_monotone(&self, a: f64, b: f64, target: f64) -> f64 {
        match &self.repr {
            LiftRepr::Affine { .. } | LiftRepr::Poured { .. } => {
                // linear inside each sub-piece: bisect down to a single piece, then solve
                self.bisect(a, b, target)
            }
            LiftRepr::Sine { .. } => self.bisect(a, b, target),
        }
    }

    fn bisect(&self, mut a: f64, mut b: f64, target: f64) -> f64 {
        let up = self.eval(b) >= self.eval(a);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let v = self.eval(mid);
            let below = if up { v < target } else { v > target };
            if below {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Reflection conjugate r(x) = -f(-x); a degree-one lift again. Envelope duality:
    /// the lower envelope of f is the reflection of the upper envelope of reflect(f).
    pub fn reflect(&self) -> Lift {
        let repr = match &self.repr {
            LiftRepr::Affine { breakpoints, values } => {
                let mut bp: Vec<f64> = breakpoints.iter().rev().map(|x| -x).collect();
                let mut vals: Vec<f64> = values.iter().rev().map(|v| -v).collect();
                // keep exact one-period span
                if let (Some(&b0), Some(&bl)) = (bp.first(), bp.last()) {
                    let drift = (bl - b0) - 1.0;
                    if drift.abs() > 0.0 {
                        let n = bp.len();
                        bp[n - 1] = b0 + 1.0;
                        vals[n - 1] = vals[0] + 1.0;
                    }
                }
                LiftRepr::Affine { breakpoints: bp, values: vals }
            }
            LiftRepr::Sine { t } => LiftRepr::Sine { t: *t }, // odd map: self-dual
            LiftRepr::Poured { base, keep_lo, keep_hi } => LiftRepr::Poured {
                base: Box::new(base.reflect()),
                keep_lo: -keep_hi,
                keep_hi: -keep_lo,
            },
        };
        let turns = self.turns.map(|tm| TurnMarkers { z0: -tm.y0, y0: -tm.z0 + 0.0 });
        // reflected decreasing arc [z0,y0] becomes [-y0,-z0]; validity preserved
        Lift { repr, turns }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.repr, LiftRepr::Affine { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.repr {
            LiftRepr::Affine { breakpoints, values } => serde_json::json!({
                "breakpoints": breakpoints,
                "values": values,
                "turns": self.turns,
            }),
            LiftRepr::Sine { t } => serde_json::json!({
                "kind": "arnold",
                "t": t,
                "turns": self.turns,
            }),
            LiftRepr::Poured { base, keep_lo, keep_hi } => serde_json::json!({
                "kind": "poured",
                "base": base.to_json(),
                "keep": [keep_lo, keep_hi],
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, LiftError> {
        if v.get("kind").and_then(|k| k.as_str()) == Some("arnold") {
            let t = v["t"].as_f64().ok_or(LiftError::BadParameter)?;
            let lift = Lift::sine(t)?;
            return Ok(lift);
        }
        let bp: Vec<f64> = v["breakpoints"]
            .as_array()
            .ok_or(LiftError::TooFewBreakpoints)?
            .iter()
            .filter_map(|x| x.as_f64())
            .collect();
        let vals: Vec<f64> = v["values"]
            .as_array()
            .ok_or(LiftError::TooFewBreakpoints)?
            .iter()
            .filter_map(|x| x.as_f64())
            .collect();
        let lift = Lift::affine(bp, vals)?;
        if let Some(t) = v.get("turns").and_then(|t| t.as_object()) {
            let z0 = t["z0"].as_f64().ok_or(LiftError::InvalidTurnMarkers)?;
            let y0 = t["y0"].as_f64().ok_or(LiftError::InvalidTurnMarkers)?;
            return lift.with_turns(z0, y0);
        }
        Ok(lift)
    }
}

/// A lift checked to be nondecreasing; rotation numbers of these are unique.
#[derive(Debug, Clone)]
pub struct MonotoneLift(Lift);

impl MonotoneLift {
    pub fn new(lift: Lift) -> Result<Self, LiftError> {
        match lift.repr() {
            LiftRepr::Affine { values, .. } => {
                if values.windows(2).any(|w| w[1] < w[0] - 1e-9) {
                    return Err(LiftError::NotMonotone);
                }
            }
            LiftRepr::Sine { t } => {
                if *t > 1.0 {
                    return Err(LiftError::NotMonotone);
                }
            }
            LiftRepr::Poured { .. } => {
                let n = 512;
                let x0 = lift.domain_start();
                for i in 0..n {
                    let a = x0 + i as f64 / n as f64;
                    let b = x0 + (i + 1) as f64 / n as f64;
                    if lift.eval(b) < lift.eval(a) - 1e-9 {
                        return Err(LiftError::NotMonotone);
                    }
                }
            }
        }
        Ok(MonotoneLift(lift))
    }

    pub fn lift(&self) -> &Lift {
        &self.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        self.0.iterate(x, n)
    }
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
    fn eval_matches_node_values() {
        let f = five_piece();
        assert_eq!(f.eval(0.125), -0.875);
        assert_eq!(f.eval(0.25), 1.25);
        assert!((f.eval(0.75) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn degree_one_equivariance() {
        let f = five_piece();
        for i in 0..100 {
            let x = -3.0 + 0.061 * i as f64;
            assert!((f.eval(x + 1.0) - f.eval(x) - 1.0).abs() < 1e-9, "x={x}");
        }
        let g = Lift::sine(3.0).unwrap();
        for i in 0..100 {
            let x = -3.0 + 0.061 * i as f64;
            assert!((g.eval(x + 1.0) - g.eval(x) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn iterate_tracks_integer_displacement() {
        // rigid rotation by 1/3
        let f = Lift::affine(vec![0.0, 1.0], vec![1.0 / 3.0, 4.0 / 3.0]).unwrap();
        let y = f.iterate(0.0, 300);
        assert!((y - 100.0).abs() < 1e-9);
        let (frac, disp) = f.iterate_parts(0.0, 301);
        assert_eq!(disp, 100);
        assert!((frac - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn preimages_of_five_piece() {
        let f = five_piece();
        let pre = f.preimages(0.75);
        // exact lift-level solutions (m = 0): x = 0.75 on the identity arc plus the
        // two crossings on the wiggle part
        let exact: Vec<f64> = pre.iter().filter(|(_, m)| *m == 0).map(|(x, _)| *x).collect();
        assert_eq!(exact.len(), 3);
        assert!(exact.iter().any(|x| (*x - 0.75).abs() < 1e-12));
        // on the identity arc [1/2, 1] only x = 0.75 evaluates to 0.75
        assert_eq!(pre.iter().filter(|(x, _)| *x >= 0.5 && (f.eval(*x) - 0.75).abs() < 1e-12).count(), 1);
        for (x, m) in pre {
            assert!((f.eval(x) - m as f64 - 0.75).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_turn_markers() {
        let f = Lift::sine(4.0).unwrap();
        let tm = f.turns().unwrap();
        assert!(tm.z0 > 0.25 && tm.z0 < 0.5);
        assert!((tm.y0 - (1.0 - tm.z0)).abs() < 1e-12);
        assert!(Lift::sine(0.5).unwrap().turns().is_none());
    }

    #[test]
    fn monotone_rejects_decreasing() {
        assert!(MonotoneLift::new(five_piece()).is_err());
        assert!(MonotoneLift::new(Lift::sine(0.9).unwrap()).is_ok());
        assert!(MonotoneLift::new(Lift::sine(1.5).unwrap()).is_err());
    }

    #[test]
    fn reflect_is_involution_pointwise() {
        let f = five_piece();
        let r = f.reflect();
        for i in 0..50 {
            let x = -1.0 + 0.04 * i as f64;
            assert!((r.eval(x) + f.eval(-x)).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let f = five_piece().with_turns(0.25, 0.375).unwrap_or_else(|_| five_piece());
        let j = f.to_json();
        let g = Lift::from_json(&j).unwrap();
        for i in 0..20 {
            let x = 0.05 * i as f64;
            assert!((f.eval(x) - g.eval(x)).abs() < 1e-12);
        }
    }
}
