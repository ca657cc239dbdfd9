//! Disk dynamics in radial-chart coordinates.
//!
//! Two chart geometries are supported. The *pants* chart models a disk with two
//! holes whose spine is the wedge of two circles: boundary components C0 and C1
//! border the holes from inside, C2 is the outer boundary, and every boundary point
//! connects to the spine by a radial fiber parametrised by s in [0,1] (s = 1 on the
//! spine). The *annulus* chart has inner boundary C0, outer boundary C1, and a
//! single spine circle at s = 1 of both components.
//!
//! The dynamics is psi = smash ∘ unwrap: `unwrap_point` embeds the spine image into
//! a collar below the spine and extends radially, and `smash` collapses the collar
//! back onto the spine, so that psi restricted to the spine equals the underlying
//! circle/graph map. A soft-smash parameter keeps the collapse a homeomorphism for
//! picture-generating iteration (`soft = 0` is the exact collapse).

use crate::families::{self, ChainMap, ChainPoint, FamilyError};
use crate::lift::Lift;

#[derive(Debug, thiserror::Error)]
pub enum ChartError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("component {0:?} does not exist in this chart")]
    BadComponent(Component),
    #[error("point {0:?} has no anchor on side {1:?}")]
    NoAnchorOnSide(ChainPoint, Component),
    #[error("cannot parse chart point from {0:?} (expected c:u:s)")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    C0,
    C1,
    C2,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::C0 => 0,
            Component::C1 => 1,
            Component::C2 => 2,
        }
    }
}

/// Point in chart coordinates: boundary component, fiber parameter u in [0,1),
/// radial level s in [0,1] (s = 0 on the boundary, s = 1 on the spine).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub c: Component,
    pub u: f64,
    pub s: f64,
}

impl ChartPoint {
    pub fn new(c: Component, u: f64, s: f64) -> Self {
        ChartPoint { c, u: u.rem_euclid(1.0), s: s.clamp(0.0, 1.0) }
    }
}

impl std::str::FromStr for ChartPoint {
    type Err = ChartError;

    /// Text format `c:u:s`, e.g. `C2:0.25:0.5` (component case-insensitive).
    fn from_str(txt: &str) -> Result<Self, ChartError> {
        let mut it = txt.split(':');
        let bad = || ChartError::Parse(txt.to_string());
        let c = match it.next().map(|c| c.to_ascii_lowercase()).as_deref() {
            Some("c0") | Some("0") => Component::C0,
            Some("c1") | Some("1") => Component::C1,
            Some("c2") | Some("2") => Component::C2,
            _ => return Err(bad()),
        };
        let u: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let s: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if it.next().is_some() || !u.is_finite() || !(0.0..=1.0).contains(&s) {
            return Err(bad());
        }
        Ok(ChartPoint::new(c, u, s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Pants,
    Annulus,
}

/// Annulus collar half-width (fraction of the fiber used by the spine embedding).
pub const ANNULUS_COLLAR: f64 = 0.2;
/// Variant-B shear amplitude in the fiber parameter.
pub const SHEAR_B: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct DiskMap {
    pub kind: ChartKind,
    /// smash collar width (pants: the family parameter; annulus: [`ANNULUS_COLLAR`])
    pub eps: f64,
    /// soft-smash knee; 0 gives the exact collar collapse
    pub soft: f64,
    /// variant-B fiber shear amplitude (annulus only; 0 = variant A)
    pub shear: f64,
    lift: Lift,
    chain: Option<ChainMap>,
}

impl DiskMap {
    /// Pants chart over the two-circle chain family.
    pub fn pants(eps: f64) -> Result<Self, ChartError> {
        Ok(DiskMap {
            kind: ChartKind::Pants,
            eps,
            soft: 0.0,
            shear: 0.0,
            lift: families::quotient_lift(eps)?,
            chain: Some(families::make_phi_eps(eps)?),
        })
    }

    /// Annulus chart over an arbitrary circle-map lift; `shear > 0` switches on the
    /// variant-B fiber shear over the bump region.
    pub fn annulus(lift: Lift, shear: f64) -> Self {
        DiskMap {
            kind: ChartKind::Annulus,
            eps: ANNULUS_COLLAR,
            soft: 0.0,
            shear,
            lift,
            chain: None,
        }
    }

    pub fn with_soft(mut self, delta: f64) -> Self {
        self.soft = delta.clamp(0.0, 0.9);
        self
    }

    /// The underlying circle/graph map as a lift (pants: the quotient lift).
    pub fn lift(&self) -> &Lift {
        &self.lift
    }

    pub fn chain(&self) -> Option<&ChainMap> {
        self.chain.as_ref()
    }

    /// Spine point at the s = 1 end of the fiber (c, u).
    pub fn anchor(&self, c: Component, u: f64) -> Result<ChainPoint, ChartError> {
        let u = u.rem_euclid(1.0);
        match self.kind {
            ChartKind::Annulus => match c {
                Component::C0 | Component::C1 => Ok(ChainPoint::new(0, u)),
                Component::C2 => Err(ChartError::BadComponent(c)),
            },
            ChartKind::Pants => match c {
                // C0/C1 fibers reach their circle from inside, orientation reversed
                Component::C0 => Ok(ChainPoint::new(0, 1.0 - u)),
                Component::C1 => Ok(ChainPoint::new(1, 1.0 - u)),
                // C2 fibers traverse the whole spine in quotient parametrization
                Component::C2 => Ok(families::from_quotient(u)),
            },
        }
    }

    /// Smash collapse in the radial level, exact form: s/(1-eps) capped at 1, so the
    /// collar s in [1-eps, 1] lands on the spine.
    pub fn smash(&self, p: ChartPoint) -> ChartPoint {
        ChartPoint { s: (p.s / (1.0 - self.eps)).min(1.0), ..p }
    }

    /// Smash with the configured softening: a homeomorphism of [0,1] agreeing with
    /// the exact collapse below the knee and affine from the knee to (1,1).
    fn gamma(&self, s: f64) -> f64 {
        if self.soft == 0.0 {
            return (s / (1.0 - self.eps)).min(1.0);
        }
        let d = self.soft;
        let knee_s = (1.0 - self.eps) * (1.0 - d);
        if s <= knee_s {
            s / (1.0 - self.eps)
        } else {
            let t = (s - knee_s) / (1.0 - knee_s);
            (1.0 - d) + t * d
        }
    }

    /// Collar level over source quotient/fiber parameter u: the spine image is
    /// embedded at s(u) = 1 - eps(1/4 + u/2), strictly monotone so that colliding
    /// spine points stay distinguishable.
    fn embed_level(&self, u_src: f64) -> f64 {
        1.0 - self.eps * (0.25 + 0.5 * u_src.rem_euclid(1.0))
    }

    fn a0(&self) -> f64 {
        self.eps / 8.0
    }

    /// The unwrapping: spine points go to the embedded collar copy of their image;
    /// boundary fibers extend radially (pants C0/C1 boundaries pointwise fixed).
    pub fn unwrap_point(&self, p: ChartPoint) -> Result<ChartPoint, ChartError> {
        match self.kind {
            ChartKind::Pants => self.unwrap_pants(p),
            ChartKind::Annulus => Ok(self.unwrap_annulus(p)),
        }
    }

    fn unwrap_pants(&self, p: ChartPoint) -> Result<ChartPoint, ChartError> {
        match p.c {
            Component::C2 => {
                let img = self.lift.eval(p.u.rem_euclid(1.0));
                let a0 = self.a0();
                let s = a0 + p.s * (self.embed_level(p.u) - a0);
                Ok(ChartPoint::new(Component::C2, img, s))
            }
            Component::C0 | Component::C1 => {
                if p.s <= 0.5 {
                    // boundary half of the fiber stretches onto the full fiber,
                    // fixing the boundary pointwise
                    return Ok(ChartPoint { s: 2.0 * p.s, ..p });
                }
                // spine half dives into the C2 chart, sliding from the spine point
                // toward its embedded image
                let q = self.anchor(p.c, p.u)?;
                let uq = families::to_quotient(q);
                let sigma = 2.0 * p.s - 1.0;
                let x = uq + sigma * (self.lift.eval(uq) - uq);
                let level = 1.0 + sigma * (self.embed_level(uq) - 1.0);
                Ok(ChartPoint::new(Component::C2, x, level))
            }
        }
    }

    fn unwrap_annulus(&self, p: ChartPoint) -> ChartPoint {
        // global radial coordinate r in [-1,1]: C0 fibers are r = s-1, C1 fibers
        // r = 1-s, the spine is r = 0
        let sign = match p.c {
            Component::C0 => -1.0,
            _ => 1.0,
        };
        let u = p.u.rem_euclid(1.0);
        let a0 = self.a0();
        let r_e = self.eps * (0.25 + 0.5 * u); // exterior-side spine embedding
        let r = sign * (1.0 - a0) * (1.0 - p.s) + p.s * r_e;
        let theta = self.lift.eval(u) + self.shear * bump(u) * 4.0 * p.s * (1.0 - p.s);
        if r >= 0.0 {
            ChartPoint::new(Component::C1, theta, 1.0 - r)
        } else {
            ChartPoint::new(Component::C0, theta, 1.0 + r)
        }
    }

    /// The disk dynamics psi = smash ∘ unwrap (soft smash if configured; with
    /// `soft = 0` this is exactly `smash(unwrap_point(p))`).
    pub fn psi(&self, p: ChartPoint) -> Result<ChartPoint, ChartError> {
        let w = self.unwrap_point(p)?;
        Ok(ChartPoint { s: self.gamma(w.s), ..w })
    }

    pub fn psi_n(&self, p: ChartPoint, n: usize) -> Result<ChartPoint, ChartError> {
        let mut q = p;
        for _ in 0..n {
            q = self.psi(q)?;
        }
        Ok(q)
    }

    /// The radial fiber ending on q from the requested side.
    pub fn radial_arc(&self, q: ChainPoint, side: Component) -> Result<RadialArc, ChartError> {
        let u = match (self.kind, side) {
            (ChartKind::Annulus, Component::C0 | Component::C1) => q.t.rem_euclid(1.0),
            (ChartKind::Pants, Component::C2) => families::to_quotient(q),
            (ChartKind::Pants, Component::C0) if q.circle == 0 => (1.0 - q.t).rem_euclid(1.0),
            (ChartKind::Pants, Component::C1) if q.circle == 1 => (1.0 - q.t).rem_euclid(1.0),
            _ => return Err(ChartError::NoAnchorOnSide(q, side)),
        };
        Ok(RadialArc { c: side, u })
    }

    /// Render a chart point into drawing coordinates. Pants: outer circle radius 3,
    /// spine circles are unit circles at (∓1, 0) meeting at the origin, hole
    /// boundaries have radius 1/2. Annulus: spine radius 1, boundaries 1/2 and 2.
    pub fn render_xy(&self, p: ChartPoint) -> (f64, f64) {
        let tau = std::f64::consts::TAU;
        match self.kind {
            ChartKind::Annulus => {
                let r = match p.c {
                    Component::C0 => p.s - 1.0,
                    _ => 1.0 - p.s,
                };
                let rad = if r >= 0.0 { 1.0 + r } else { 1.0 + 0.5 * r };
                (rad * (tau * p.u).cos(), rad * (tau * p.u).sin())
            }
            ChartKind::Pants => match p.c {
                Component::C0 => {
                    let r = 0.5 + 0.5 * p.s;
                    (-1.0 + r * (tau * p.u).cos(), r * (tau * p.u).sin())
                }
                Component::C1 => {
                    let r = 0.5 + 0.5 * p.s;
                    (1.0 - r * (tau * p.u).cos(), -r * (tau * p.u).sin())
                }
                Component::C2 => {
                    let th = -0.25 * tau - tau * p.u;
                    let (ox, oy) = (3.0 * th.cos(), 3.0 * th.sin());
                    let (ax, ay) = chain_xy(families::from_quotient(p.u));
                    ((1.0 - p.s) * ox + p.s * ax, (1.0 - p.s) * oy + p.s * ay)
                }
            },
        }
    }
}

/// Spine point in pants drawing coordinates (clockwise unit circles at (∓1,0)).
pub fn chain_xy(q: ChainPoint) -> (f64, f64) {
    let tau = std::f64::consts::TAU;
    let t = q.t.rem_euclid(1.0);
    if q.circle == 0 {
        (-1.0 + (tau * t).cos(), -(tau * t).sin())
    } else {
        (1.0 - (tau * t).cos(), (tau * t).sin())
    }
}

/// C1 bump supported on (0.45, 1.05) mod 1, positive over the whole arc [1/2, 1];
/// carries the variant-B shear.
pub fn bump(u: f64) -> f64 {
    let u = u.rem_euclid(1.0);
    let d = if u >= 0.45 {
        u - 0.75
    } else if u <= 0.05 {
        u + 0.25
    } else {
        return 0.0;
    };
    if d.abs() >= 0.3 {
        0.0
    } else {
        let c = (std::f64::consts::PI * d / 0.6).cos();
        c * c
    }
}

/// A radial fiber {(c, u, s) : s in [0,1]}.
#[derive(Debug, Clone, Copy)]
pub struct RadialArc {
    pub c: Component,
    pub u: f64,
}

impl RadialArc {
    pub fn point(&self, s: f64) -> ChartPoint {
        ChartPoint::new(self.c, self.u, s)
    }

    pub fn sample(&self, n: usize) -> Vec<ChartPoint> {
        (0..=n).map(|i| self.point(i as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::EPS0;
    use crate::rotation;

    #[test]
    fn smash_examples() {
        let dm = DiskMap::pants(0.2).unwrap();
        let s = |x: f64| dm.smash(ChartPoint::new(Component::C2, 0.1, x)).s;
        assert!((s(0.4) - 0.5).abs() < 1e-15);
        assert_eq!(s(0.95), 1.0);
        assert_eq!(s(0.0), 0.0);
    }

    #[test]
    fn pants_boundary_fixed() {
        let dm = DiskMap::pants(0.25).unwrap();
        for i in 0..100 {
            let u = i as f64 / 100.0;
            for c in [Component::C0, Component::C1] {
                let p = ChartPoint::new(c, u, 0.0);
                assert_eq!(dm.unwrap_point(p).unwrap(), p);
                assert_eq!(dm.psi(p).unwrap(), p);
            }
        }
    }

    #[test]
    fn smash_after_unwrap_is_family_map_on_spine() {
        let dm = DiskMap::pants(0.22).unwrap();
        let cm = dm.chain().unwrap().clone();
        for i in 0..500 {
            let u = i as f64 / 500.0;
            let p = ChartPoint::new(Component::C2, u, 1.0);
            let img = dm.psi(p).unwrap();
            assert_eq!(img.s, 1.0);
            let want = cm.eval(families::from_quotient(u)).unwrap();
            let got = cm.canonical(dm.anchor(img.c, img.u).unwrap());
            let gap = (got.t - want.t).abs();
            assert!(
                got.circle == want.circle && gap.min(1.0 - gap) < 1e-10,
                "u={u} got={got:?} want={want:?}"
            );
        }
    }

    #[test]
    fn period_two_endpoint_at_eps0() {
        // the period-2 spine orbit maps across under psi exactly as under the chain map
        let dm = DiskMap::pants(EPS0).unwrap();
        let q0 = ChainPoint::new(0, std::f64::consts::FRAC_1_SQRT_2);
        let u0 = families::to_quotient(q0);
        let img = dm.psi(ChartPoint::new(Component::C2, u0, 1.0)).unwrap();
        let got = dm.anchor(img.c, img.u).unwrap();
        assert_eq!(got.circle, 1);
        assert!((got.t - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn outer_boundary_attracts_inward() {
        let dm = DiskMap::pants(0.2).unwrap();
        for i in 0..50 {
            let p = ChartPoint::new(Component::C2, i as f64 / 50.0, 0.0);
            let img = dm.psi(p).unwrap();
            assert!(img.s > 0.0);
        }
        // s-levels never decrease under iteration
        let mut p = ChartPoint::new(Component::C2, 0.3, 0.1);
        let mut last = p.s;
        for _ in 0..40 {
            p = dm.psi(p).unwrap();
            assert!(p.s >= last - 1e-12);
            last = p.s;
        }
    }

    #[test]
    fn psi_equals_smash_of_unwrap_when_exact() {
        let dm = DiskMap::pants(0.25).unwrap();
        for i in 0..200 {
            let u = (i as f64 * 0.713).rem_euclid(1.0);
            let s = (i as f64 * 0.371).rem_euclid(1.0);
            for c in [Component::C0, Component::C1, Component::C2] {
                let p = ChartPoint::new(c, u, s);
                let a = dm.psi(p).unwrap();
                let b = dm.smash(dm.unwrap_point(p).unwrap());
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn radial_fibers_map_into_fibers_monotonically() {
        let dm = DiskMap::pants(EPS0).unwrap();
        // climbing interval of the half-scale two-turn carrier, mapped to quotient u
        let half = families::quotient_half_lift(EPS0).unwrap();
        let ci = rotation::climbing_intervals(&half).unwrap();
        for i in 0..50 {
            let t = i as f64 / 49.0;
            let u = 0.5 * (ci.efficient.0 + t * (ci.efficient.1 - ci.efficient.0));
            let target = dm.lift().eval(u).rem_euclid(1.0);
            let mut prev = -1.0;
            for j in 0..=40 {
                let p = ChartPoint::new(Component::C2, u, j as f64 / 40.0);
                let w = dm.unwrap_point(p).unwrap();
                assert_eq!(w.c, Component::C2);
                assert!((w.u - target).abs() < 1e-9, "fiber drift {} vs {}", w.u, target);
                assert!(w.s > prev);
                prev = w.s;
            }
        }
    }

    #[test]
    fn annulus_variant_a_fibers_radial() {
        let dm = DiskMap::annulus(families::make_five_piece(), 0.0);
        for i in 0..200 {
            let u = i as f64 / 200.0;
            let img_u = dm.lift().eval(u).rem_euclid(1.0);
            for c in [Component::C0, Component::C1] {
                for j in 0..=10 {
                    let w = dm.unwrap_point(ChartPoint::new(c, u, j as f64 / 10.0)).unwrap();
                    let gap = (w.u - img_u).abs();
                    assert!(gap.min(1.0 - gap) < 1e-12);
                }
            }
        }
        // spine recovery through the smash
        for i in 0..200 {
            let u = i as f64 / 200.0;
            let w = dm.psi(ChartPoint::new(Component::C1, u, 1.0)).unwrap();
            assert_eq!(w.s, 1.0);
            let gap = (w.u - dm.lift().eval(u).rem_euclid(1.0)).abs();
            assert!(gap.min(1.0 - gap) < 1e-12);
        }
    }

    #[test]
    fn annulus_variant_b_shears_fixed_arc_fibers() {
        let dm = DiskMap::annulus(families::make_five_piece(), SHEAR_B);
        // spine and boundary levels keep the circle dynamics
        for i in 0..100 {
            let u = i as f64 / 100.0;
            let w = dm.psi(ChartPoint::new(Component::C1, u, 1.0)).unwrap();
            let gap = (w.u - dm.lift().eval(u).rem_euclid(1.0)).abs();
            assert!(gap.min(1.0 - gap) < 1e-12);
        }
        // mid-fiber images over the fixed arc leave the fiber
        for &u in &[0.55, 0.7, 0.85, 0.95] {
            let w = dm.unwrap_point(ChartPoint::new(Component::C1, u, 0.5)).unwrap();
            let gap = (w.u - u).abs();
            assert!(gap.min(1.0 - gap) > 0.01, "u={u} stayed radial");
        }
        assert!(bump(0.5) > 0.05 && bump(0.75) > 0.9 && bump(0.999) > 0.05);
        assert_eq!(bump(0.2), 0.0);
    }

    #[test]
    fn chart_point_parsing() {
        let p: ChartPoint = "C2:0.25:0.5".parse().unwrap();
        assert_eq!(p, ChartPoint::new(Component::C2, 0.25, 0.5));
        let p: ChartPoint = "c0:1.25:1".parse().unwrap();
        assert_eq!(p, ChartPoint::new(Component::C0, 0.25, 1.0));
        assert!("C3:0:0".parse::<ChartPoint>().is_err());
        assert!("C1:0:2".parse::<ChartPoint>().is_err());
    }

    #[test]
    fn render_anchors_agree() {
        // s = 1 render position of a C0 fiber equals the spine point position
        let dm = DiskMap::pants(0.2).unwrap();
        for i in 0..50 {
            let u = i as f64 / 50.0;
            for c in [Component::C0, Component::C1] {
                let (x1, y1) = dm.render_xy(ChartPoint::new(c, u, 1.0));
                let (x2, y2) = chain_xy(dm.anchor(c, u).unwrap());
                assert!((x1 - x2).hypot(y1 - y2) < 1e-12);
            }
            let (x1, y1) = dm.render_xy(ChartPoint::new(Component::C2, u, 1.0));
            let (x2, y2) = chain_xy(families::from_quotient(u));
            assert!((x1 - x2).hypot(y1 - y2) < 1e-12);
        }
    }
}
