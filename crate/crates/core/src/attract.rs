//! Attractor approximation and basin analysis on pixel grids.
//!
//! The attractor of the disk dynamics is approximated by nested forward images of
//! the domain boundary plus a mesh of chart circles. Basins of the complementary
//! regions are labeled by flood fill around a thin attractor band, the common-
//! boundary (Wada) property is scored with distance transforms, and accessible
//! arcs / translation lines are built from the rotation machinery.

use crate::chart::{ChartKind, ChartPoint, Component, DiskMap};
use crate::families;
use crate::rotation::{self, Side};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum AttractError {
    #[error(transparent)]
    Chart(#[from] crate::chart::ChartError),
    #[error(transparent)]
    Rotation(#[from] rotation::RotationError),
    #[error("resolution {0} out of range [64, 8192]")]
    BadResolution(usize),
    #[error("seed for region {0} landed inside the attractor band; raise the resolution")]
    SeedSwallowed(&'static str),
    #[error("mesh too coarse: adjacent image points separate by {0:.1} pixels")]
    MeshTooCoarse(f64),
    #[error("translation line left the outer region at segment {0}")]
    LineEscaped(usize),
}

/// Half-extent of the square drawing window for a chart kind.
pub fn half_extent(kind: ChartKind) -> f64 {
    match kind {
        ChartKind::Pants => 3.2,
        ChartKind::Annulus => 2.2,
    }
}

/// Boolean pixel set over a res x res window.
#[derive(Debug, Clone)]
pub struct Raster {
    pub res: usize,
    pub bits: Vec<bool>,
    pub half: f64,
}

impl Raster {
    pub fn new(res: usize, half: f64) -> Self {
        Raster { res, bits: vec![false; res * res], half }
    }

    pub fn pixel(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let n = self.res as f64;
        let i = ((x + self.half) / (2.0 * self.half) * n).floor();
        let j = ((y + self.half) / (2.0 * self.half) * n).floor();
        if i >= 0.0 && j >= 0.0 && i < n && j < n {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    pub fn set(&mut self, x: f64, y: f64) {
        if let Some((i, j)) = self.pixel(x, y) {
            self.bits[j * self.res + i] = true;
        }
    }

    /// Rasterize a polyline, stepping at sub-pixel increments along each segment.
    pub fn draw_polyline(&mut self, pts: &[(f64, f64)]) {
        let px = 2.0 * self.half / self.res as f64;
        for w in pts.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let len = (x1 - x0).hypot(y1 - y0);
            let steps = (len / (0.5 * px)).ceil().max(1.0) as usize;
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                self.set(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            }
        }
    }

    pub fn dilate(&self) -> Raster {
        let r = self.res as isize;
        let mut out = self.clone();
        for j in 0..r {
            for i in 0..r {
                if self.bits[(j * r + i) as usize] {
                    for (di, dj) in [(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let (ii, jj) = (i + di, j + dj);
                        if ii >= 0 && jj >= 0 && ii < r && jj < r {
                            out.bits[(jj * r + ii) as usize] = true;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Exact squared Euclidean distance transform (two-pass lower-envelope method).
/// Input true pixels are sources; output is squared distance in pixel units.
pub fn distance_sq(grid: &Raster) -> Vec<f64> {
    let n = grid.res;
    // large finite sentinel keeps the lower-envelope arithmetic NaN-free
    const INF: f64 = 1e12;
    let mut d: Vec<f64> = grid.bits.iter().map(|&b| if b { 0.0 } else { INF }).collect();
    // columns
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = (0..n).map(|j| d[j * n + i]).collect();
            dt_1d(&col)
        })
        .collect();
    for (i, col) in cols.iter().enumerate() {
        for j in 0..n {
            d[j * n + i] = col[j];
        }
    }
    // rows
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| dt_1d(&d[j * n..(j + 1) * n]))
        .collect();
    for (j, row) in rows.iter().enumerate() {
        d[j * n..(j + 1) * n].copy_from_slice(row);
    }
    d
}

fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let sep = |p: usize, q: usize| -> f64 {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
    };
    for q in 1..n {
        let mut s = sep(v[k], q);
        while k > 0 && s <= z[k] {
            k -= 1;
            s = sep(v[k], q);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut out = vec![0.0f64; n];
    let mut k2 = 0usize;
    for q in 0..n {
        while z[k2 + 1] < q as f64 {
            k2 += 1;
        }
        let p = v[k2];
        out[q] = ((q as f64 - p as f64) * (q as f64 - p as f64)) + f[p];
    }
    out
}

/// Symmetric Hausdorff distance between two pixel sets, in pixel units.
pub fn hausdorff(a: &Raster, b: &Raster) -> f64 {
    let da = distance_sq(a);
    let db = distance_sq(b);
    let n = a.res;
    let mut worst: f64 = 0.0;
    for idx in 0..n * n {
        if a.bits[idx] {
            worst = worst.max(db[idx]);
        }
        if b.bits[idx] {
            worst = worst.max(da[idx]);
        }
    }
    worst.sqrt()
}

/// Nested forward-image approximation of the attractor.
#[derive(Debug, Clone)]
pub struct AttractorApprox {
    pub depth: usize,
    pub polylines: Vec<Vec<ChartPoint>>,
    /// d_H(A_k, A_{k-1}) in pixels, one entry per completed step
    pub dh_history: Vec<f64>,
    pub res: usize,
}

fn lerp_chart(a: ChartPoint, b: ChartPoint, t: f64) -> Option<ChartPoint> {
    if a.c != b.c {
        return None;
    }
    let mut du = b.u - a.u;
    if du > 0.5 {
        du -= 1.0;
    }
    if du < -0.5 {
        du += 1.0;
    }
    Some(ChartPoint::new(a.c, a.u + t * du, a.s + t * (b.s - a.s)))
}

/// Push a polyline forward one step, bisecting segments whose images separate by
/// more than `tol` drawing units (up to 12 levels).
fn push_refine(dm: &DiskMap, pts: &[ChartPoint], tol: f64) -> Result<Vec<ChartPoint>, AttractError> {
    let imgs: Result<Vec<(ChartPoint, (f64, f64))>, AttractError> = pts
        .par_iter()
        .map(|p| {
            let q = dm.psi(*p)?;
            Ok((q, dm.render_xy(q)))
        })
        .collect();
    let imgs = imgs?;
    let mut out: Vec<ChartPoint> = Vec::with_capacity(pts.len() * 2);
    out.push(imgs[0].0);
    for i in 0..pts.len() - 1 {
        refine_segment(dm, pts[i], pts[i + 1], imgs[i].1, imgs[i + 1].1, tol, 0, &mut out)?;
        out.push(imgs[i + 1].0);
    }
    Ok(out)
}

fn refine_segment(
    dm: &DiskMap,
    a: ChartPoint,
    b: ChartPoint,
    fa: (f64, f64),
    fb: (f64, f64),
    tol: f64,
    level: u32,
    out: &mut Vec<ChartPoint>,
) -> Result<(), AttractError> {
    if level >= 12 || (fa.0 - fb.0).hypot(fa.1 - fb.1) <= tol {
        return Ok(());
    }
    let mid = match lerp_chart(a, b, 0.5) {
        Some(m) => m,
        None => return Ok(()),
    };
    let q = dm.psi(mid)?;
    let fm = dm.render_xy(q);
    refine_segment(dm, a, mid, fa, fm, tol, level + 1, out)?;
    out.push(q);
    refine_segment(dm, mid, b, fm, fb, tol, level + 1, out)?;
    Ok(())
}

fn seed_curves(dm: &DiskMap, mesh: usize) -> Vec<Vec<ChartPoint>> {
    let comps: &[Component] = match dm.kind {
        ChartKind::Pants => &[Component::C0, Component::C1, Component::C2],
        ChartKind::Annulus => &[Component::C0, Component::C1],
    };
    let mut curves = Vec::new();
    for &c in comps {
        // levels include s = 1: the spine is invariant and belongs to every nested
        // image, and it seals the corridors between basins at the junctions
        for lev in 0..=mesh + 1 {
            let s = lev as f64 / (mesh + 1) as f64;
            let n = 1024;
            let pts: Vec<ChartPoint> =
                (0..=n).map(|i| ChartPoint::new(c, i as f64 / n as f64, s)).collect();
            curves.push(pts);
        }
    }
    curves
}

pub fn rasterize_curves(dm: &DiskMap, curves: &[Vec<ChartPoint>], res: usize) -> Raster {
    let mut r = Raster::new(res, half_extent(dm.kind));
    for c in curves {
        let xy: Vec<(f64, f64)> = c.iter().map(|p| dm.render_xy(*p)).collect();
        r.draw_polyline(&xy);
    }
    r
}

/// Push the boundary-plus-mesh curves N steps, recording d_H between consecutive
/// pixel pictures.
pub fn attractor_approx(
    dm: &DiskMap,
    n: usize,
    mesh: usize,
    res: usize,
) -> Result<AttractorApprox, AttractError> {
    if !(64..=8192).contains(&res) {
        return Err(AttractError::BadResolution(res));
    }
    let px = 2.0 * half_extent(dm.kind) / res as f64;
    let mut curves = seed_curves(dm, mesh);
    let mut prev = rasterize_curves(dm, &curves, res);
    let mut history = Vec::new();
    for _step in 0..n {
        curves = curves
            .iter()
            .map(|c| push_refine(dm, c, 1.5 * px))
            .collect::<Result<Vec<_>, _>>()?;
        let cur = rasterize_curves(dm, &curves, res);
        history.push(hausdorff(&cur, &prev));
        prev = cur;
    }
    Ok(AttractorApprox { depth: n, polylines: curves, dh_history: history, res })
}

pub const LABEL_BAND: u8 = 0;
pub const LABEL_OUT: u8 = 1;
pub const LABEL_L0: u8 = 2;
pub const LABEL_L1: u8 = 3;
pub const LABEL_UNKNOWN: u8 = 4;

pub fn label_name(l: u8) -> &'static str {
    match l {
        LABEL_BAND => "band",
        LABEL_OUT => "out",
        LABEL_L0 => "l0",
        LABEL_L1 => "l1",
        _ => "unknown",
    }
}

#[derive(Debug, Clone)]
pub struct BasinGrid {
    pub res: usize,
    pub labels: Vec<u8>,
    pub depth: usize,
    pub dh_history: Vec<f64>,
}

impl BasinGrid {
    pub fn regions(&self) -> Vec<u8> {
        let mut seen = [false; 5];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        [LABEL_OUT, LABEL_L0, LABEL_L1]
            .into_iter()
            .filter(|&l| seen[l as usize])
            .collect()
    }
}

/// Smallest depth at which consecutive attractor pictures differ by under 2 pixels
/// (capped), per the resolution-matched truncation rule.
pub fn depth_by_pixel_rule(
    dm: &DiskMap,
    mesh: usize,
    res: usize,
    cap: usize,
) -> Result<AttractorApprox, AttractError> {
    if !(64..=8192).contains(&res) {
        return Err(AttractError::BadResolution(res));
    }
    let px = 2.0 * half_extent(dm.kind) / res as f64;
    let mut curves = seed_curves(dm, mesh);
    let mut prev = rasterize_curves(dm, &curves, res);
    let mut history = Vec::new();
    let mut depth = 0;
    for step in 1..=cap {
        curves = curves
            .iter()
            .map(|c| push_refine(dm, c, 1.5 * px))
            .collect::<Result<Vec<_>, _>>()?;
        let cur = rasterize_curves(dm, &curves, res);
        let dh = hausdorff(&cur, &prev);
        history.push(dh);
        prev = cur;
        depth = step;
        if step >= 2 && dh < 2.0 {
            break;
        }
    }
    Ok(AttractorApprox { depth, polylines: curves, dh_history: history, res })
}

/// Label complementary regions around the attractor band by flood fill from one
/// seed per boundary component.
pub fn basin_label(dm: &DiskMap, approx: &AttractorApprox) -> Result<BasinGrid, AttractError> {
    let res = approx.res;
    let band = rasterize_curves(dm, &approx.polylines, res).dilate();
    let mut labels = vec![LABEL_UNKNOWN; res * res];
    for (i, &b) in band.bits.iter().enumerate() {
        if b {
            labels[i] = LABEL_BAND;
        }
    }
    let seeds: Vec<(&'static str, u8, ChartPoint)> = match dm.kind {
        ChartKind::Pants => vec![
            // the C0/C1 boundary circles are pointwise fixed and stay in the band,
            // so their seeds sit a few pixels inside their annular basins
            ("out", LABEL_OUT, ChartPoint::new(Component::C2, 0.125, 0.01)),
            ("l0", LABEL_L0, ChartPoint::new(Component::C0, 0.25, 0.15)),
            ("l1", LABEL_L1, ChartPoint::new(Component::C1, 0.25, 0.15)),
        ],
        ChartKind::Annulus => vec![
            ("out", LABEL_OUT, ChartPoint::new(Component::C1, 0.1, 0.01)),
            ("l0", LABEL_L0, ChartPoint::new(Component::C0, 0.1, 0.01)),
        ],
    };
    let r = Raster::new(res, half_extent(dm.kind));
    for (name, lab, seed) in seeds {
        let (x, y) = dm.render_xy(seed);
        let (i, j) = r.pixel(x, y).ok_or(AttractError::SeedSwallowed(name))?;
        let idx = j * res + i;
        if labels[idx] == LABEL_BAND {
            return Err(AttractError::SeedSwallowed(name));
        }
        if labels[idx] != LABEL_UNKNOWN {
            continue; // merged with an earlier seed's region
        }
        flood(&mut labels, res, idx, lab);
    }
    Ok(BasinGrid { res, labels, depth: approx.depth, dh_history: approx.dh_history.clone() })
}

fn flood(labels: &mut [u8], res: usize, start: usize, lab: u8) {
    let mut stack = vec![start];
    labels[start] = lab;
    while let Some(idx) = stack.pop() {
        let (i, j) = (idx % res, idx / res);
        let mut push = |ii: usize, jj: usize, stack: &mut Vec<usize>, labels: &mut [u8]| {
            let nidx = jj * res + ii;
            if labels[nidx] == LABEL_UNKNOWN {
                labels[nidx] = lab;
                stack.push(nidx);
            }
        };
        if i > 0 {
            push(i - 1, j, &mut stack, labels);
        }
        if i + 1 < res {
            push(i + 1, j, &mut stack, labels);
        }
        if j > 0 {
            push(i, j - 1, &mut stack, labels);
        }
        if j + 1 < res {
            push(i, j + 1, &mut stack, labels);
        }
    }
}

/// Boundary pixels of a region: its pixels 8-adjacent to a differently labeled pixel.
fn region_boundary(bg: &BasinGrid, lab: u8) -> Raster {
    let res = bg.res;
    let mut r = Raster::new(res, 1.0);
    let n = res as isize;
    for j in 0..n {
        for i in 0..n {
            let idx = (j * n + i) as usize;
            if bg.labels[idx] != lab {
                continue;
            }
            'scan: for dj in -1..=1isize {
                for di in -1..=1isize {
                    let (ii, jj) = (i + di, j + dj);
                    if ii < 0 || jj < 0 || ii >= n || jj >= n {
                        continue;
                    }
                    if bg.labels[(jj * n + ii) as usize] != lab {
                        r.bits[idx] = true;
                        break 'scan;
                    }
                }
            }
        }
    }
    r
}

/// For each region, the fraction of its boundary pixels lying within k pixels of the
/// boundaries of every other region.
pub fn wada_score(bg: &BasinGrid, k: usize) -> Vec<(u8, f64)> {
    let regions = bg.regions();
    let bounds: Vec<Raster> = regions.iter().map(|&l| region_boundary(bg, l)).collect();
    let dts: Vec<Vec<f64>> = bounds.par_iter().map(distance_sq).collect();
    let kk = (k * k) as f64;
    let mut out = Vec::new();
    for (ri, &lab) in regions.iter().enumerate() {
        let mut total = 0usize;
        let mut common = 0usize;
        for idx in 0..bg.res * bg.res {
            if !bounds[ri].bits[idx] {
                continue;
            }
            total += 1;
            let near_all = (0..regions.len()).all(|rj| rj == ri || dts[rj][idx] <= kk);
            if near_all {
                common += 1;
            }
        }
        out.push((lab, if total == 0 { 0.0 } else { common as f64 / total as f64 }));
    }
    out
}

/// Control pattern that is deliberately not Wada: two concentric regions touching
/// directly along one semicircle and separated by a band much wider than 2k on the
/// other, so only about half of each boundary is common.
pub fn non_wada_control(res: usize, k: usize) -> BasinGrid {
    let mut labels = vec![LABEL_UNKNOWN; res * res];
    let c = res as f64 / 2.0;
    let r0 = res as f64 * 0.3;
    let half_width = (2 * k + 2) as f64;
    for j in 0..res {
        for i in 0..res {
            let (x, y) = (i as f64 - c, j as f64 - c);
            let rad = x.hypot(y);
            labels[j * res + i] = if x < 0.0 && (rad - r0).abs() <= half_width {
                LABEL_BAND
            } else if rad < r0 {
                LABEL_L0
            } else {
                LABEL_OUT
            };
        }
    }
    BasinGrid { res, labels, depth: 0, dh_history: Vec::new() }
}

/// Accessible-arc report: the terminal arc polyline in render coordinates plus the
/// rotation data of the accessed endpoint.
#[derive(Debug, Clone)]
pub struct AccessReport {
    pub endpoint_u: f64,
    pub polyline: Vec<(f64, f64)>,
    pub forward_rotation: f64,
    pub backward_average: Option<f64>,
    pub rho_side: f64,
    /// maximum fiber-parameter spread of the terminal quarter of the pushed arc
    pub tail_spread: f64,
    pub terminates_radially: bool,
    pub endpoint_fixed: bool,
}

/// Build the finite-depth accessible arc on the requested side: the radial arc
/// over the depth-k backward-orbit point, pushed forward k times.
pub fn accessible_arc(
    dm: &DiskMap,
    side: Component,
    depth: usize,
) -> Result<AccessReport, AttractError> {
    // pick the carrier lift and the targeted side; the pants machinery runs on the
    // half-scale two-turn carrier of the quotient (parameters scale back by 1/2)
    let interior = matches!((dm.kind, side), (ChartKind::Annulus, Component::C0));
    let (carrier, scale) = match dm.kind {
        ChartKind::Pants => (
            families::quotient_half_lift(dm.eps).map_err(crate::chart::ChartError::from)?,
            0.5,
        ),
        ChartKind::Annulus => (dm.lift().clone(), 1.0),
    };
    let two_turn = carrier.turns().is_some();
    let (start_u, endpoint_u, backward_average, rho) = if two_turn && !interior {
        let bo = rotation::backward_orbit_in_climbing(&carrier, depth, 1e-4)?;
        let start = bo.orbit.last().copied().unwrap_or(bo.y0);
        (
            (start * scale).rem_euclid(1.0),
            (bo.y0 * scale).rem_euclid(1.0),
            Some(bo.backward_avg * scale),
            bo.rho_upper * scale,
        )
    } else if two_turn {
        // interior side via the reflection duality
        let refl = carrier.reflect();
        let bo = rotation::backward_orbit_in_climbing(&refl, depth, 1e-4)?;
        let start = bo.orbit.last().copied().unwrap_or(bo.y0);
        (
            (-start * scale).rem_euclid(1.0),
            (-bo.y0 * scale).rem_euclid(1.0),
            Some(-bo.backward_avg * scale),
            -bo.rho_upper * scale,
        )
    } else {
        // not two-turn (five-piece): exterior targets the upper rotation endpoint;
        // the interior embedding accesses the fixed set, so it targets rotation 0
        let target = if interior {
            0.0
        } else {
            rotation::rot_monotone(&rotation::envelope(&carrier, Side::Upper)?, 1e-4, 64)?.value
        };
        let u = solve_displacement(&carrier, target);
        (u, u, None, target)
    };
    // push the radial arc over the backward point forward `depth` times
    let anchor_q = match dm.kind {
        ChartKind::Pants => families::from_quotient(start_u),
        ChartKind::Annulus => families::ChainPoint::new(0, start_u),
    };
    let side_eff = if dm.kind == ChartKind::Pants { Component::C2 } else { side };
    let arc = dm.radial_arc(anchor_q, side_eff)?;
    let mut pts = arc.sample(256);
    for _ in 0..depth.min(60) {
        let next: Result<Vec<ChartPoint>, _> = pts.iter().map(|p| dm.psi(*p)).collect();
        pts = next?;
    }
    // terminal-quarter fiber spread measures whether the arc stays radial
    let tail = &pts[(pts.len() * 3) / 4..];
    let mut spread: f64 = 0.0;
    for w in tail.windows(2) {
        let d = (w[0].u - w[1].u).abs();
        spread = spread.max(d.min(1.0 - d));
    }
    let fwd = rotation::pointwise_rotation(dm.lift(), endpoint_u, 20_000);
    let disp = dm.lift().eval(endpoint_u) - endpoint_u;
    Ok(AccessReport {
        endpoint_u,
        polyline: pts.iter().map(|p| dm.render_xy(*p)).collect(),
        forward_rotation: fwd.value,
        backward_average,
        rho_side: rho,
        tail_spread: spread,
        terminates_radially: spread < 5e-3,
        endpoint_fixed: disp.rem_euclid(1.0).min(1.0 - disp.rem_euclid(1.0)) < 1e-9,
    })
}

/// Leftmost circle point whose one-step displacement equals `target` (integer
/// displacements only; used for the non-two-turn families).
fn solve_displacement(lift: &crate::lift::Lift, target: f64) -> f64 {
    let n = 4096;
    let mut best = (f64::INFINITY, 0.0);
    let mut exact: Vec<f64> = Vec::new();
    for i in 0..n {
        let x = i as f64 / n as f64;
        let gap = (lift.eval(x) - x - target).abs();
        if gap < 1e-9 {
            exact.push(x);
        }
        if gap < best.0 {
            best = (gap, x);
        }
    }
    if !exact.is_empty() {
        // a whole arc may solve it (fixed arcs); take the middle representative
        return exact[exact.len() / 2];
    }
    // refine by bisection on the bracketing interval when a sign change exists
    let x = best.1;
    let h = 1.0 / n as f64;
    let f = |x: f64| lift.eval(x) - x - target;
    let (mut a, mut b) = (x - h, x + h);
    if f(a) * f(b) < 0.0 {
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    } else {
        x
    }
}

/// Translation-line approximation: an arc in the outer region joining a psi-preimage
/// chain, pushed forward; each forward image stays outside the attractor band and
/// approaches it.
#[derive(Debug, Clone)]
pub struct TranslationLine {
    pub segments: Vec<Vec<(f64, f64)>>,
    pub band_distance: Vec<f64>,
}

pub fn translation_line(
    dm: &DiskMap,
    segments: usize,
    approx: &AttractorApprox,
) -> Result<TranslationLine, AttractError> {
    assert_eq!(dm.kind, ChartKind::Pants);
    let res = approx.res;
    let band = rasterize_curves(dm, &approx.polylines, res).dilate();
    let band_dt = distance_sq(&band);
    // base point and one exact psi-preimage in the outer collar
    let z0 = ChartPoint::new(Component::C2, 0.3, 0.04);
    let z_back = psi_preimage_outer(dm, z0).ok_or(AttractError::LineEscaped(0))?;
    // the base arc joins z_back to z0 inside U_out (constant-s chart path then radial)
    let mut lambda: Vec<ChartPoint> = Vec::new();
    let m = 160;
    for i in 0..=m {
        let t = i as f64 / m as f64;
        let mut du = z0.u - z_back.u;
        if du > 0.5 {
            du -= 1.0;
        }
        if du < -0.5 {
            du += 1.0;
        }
        lambda.push(ChartPoint::new(
            Component::C2,
            z_back.u + t * du,
            z_back.s + t * (z0.s - z_back.s),
        ));
    }
    let mut segs = Vec::new();
    let mut dists = Vec::new();
    let mut cur = lambda;
    for seg in 0..segments {
        let xy: Vec<(f64, f64)> = cur.iter().map(|p| dm.render_xy(*p)).collect();
        let r = Raster::new(res, half_extent(dm.kind));
        let mut min_d = f64::INFINITY;
        for &(x, y) in &xy {
            if let Some((i, j)) = r.pixel(x, y) {
                min_d = min_d.min(band_dt[j * res + i]);
            }
        }
        if min_d == 0.0 {
            return Err(AttractError::LineEscaped(seg));
        }
        dists.push(min_d.sqrt());
        segs.push(xy);
        let next: Result<Vec<ChartPoint>, _> = cur.iter().map(|p| dm.psi(*p)).collect();
        cur = next?;
    }
    Ok(TranslationLine { segments: segs, band_distance: dists })
}

/// One psi-preimage of an outer-collar point, staying in the outer collar (inverts
/// the fiber map on the expanding branch and the radial affine map in s).
fn psi_preimage_outer(dm: &DiskMap, z: ChartPoint) -> Option<ChartPoint> {
    let lift = dm.lift();
    let pres = lift.preimages(z.u);
    for (x, _m) in pres {
        let u = x.rem_euclid(1.0);
        // invert s: psi_s = gamma(a0 + s*(level(u) - a0)); outer collar means small s,
        // below the soft knee, where gamma is exactly s/(1-eps)
        let a0 = dm.eps / 8.0;
        let level = 1.0 - dm.eps * (0.25 + 0.5 * u);
        let s = (z.s * (1.0 - dm.eps) - a0) / (level - a0);
        if (0.0..=1.0).contains(&s) {
            let cand = ChartPoint::new(Component::C2, u, s.max(0.0));
            let img = dm.psi(cand).ok()?;
            let gap = (img.u - z.u).abs();
            if gap.min(1.0 - gap) < 1e-9 && (img.s - z.s).abs() < 1e-9 {
                return Some(cand);
            }
        }
    }
    None
}

/// Fixed palette image output: PGM always, PNG alongside when the encoder works.
pub fn write_basin_images(bg: &BasinGrid, stem: &std::path::Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    let res = bg.res;
    let gray = |l: u8| match l {
        LABEL_BAND => 0u8,
        LABEL_OUT => 255,
        LABEL_L0 => 100,
        LABEL_L1 => 170,
        _ => 128,
    };
    let rgb = |l: u8| match l {
        LABEL_BAND => [0u8, 0, 0],
        LABEL_OUT => [255, 255, 255],
        LABEL_L0 => [200, 60, 60],
        LABEL_L1 => [60, 60, 200],
        _ => [128, 128, 128],
    };
    let mut outputs = Vec::new();
    let pgm_path = stem.with_extension("pgm");
    let mut pgm = Vec::with_capacity(res * res + 32);
    pgm.extend_from_slice(format!("P5\n{res} {res}\n255\n").as_bytes());
    pgm.extend(bg.labels.iter().map(|&l| gray(l)));
    std::fs::write(&pgm_path, &pgm)?;
    outputs.push(pgm_path);
    let png_path = stem.with_extension("png");
    let mut img = image::RgbImage::new(res as u32, res as u32);
    for (idx, &l) in bg.labels.iter().enumerate() {
        let [r, g, b] = rgb(l);
        img.put_pixel((idx % res) as u32, (idx / res) as u32, image::Rgb([r, g, b]));
    }
    if img.save(&png_path).is_ok() {
        outputs.push(png_path);
    }
    Ok(outputs)
}

/// Curve picture (attractor approximation) as a bilevel PGM/PNG pair.
pub fn write_curve_images(
    dm: &DiskMap,
    approx: &AttractorApprox,
    stem: &std::path::Path,
) -> std::io::Result<Vec<std::path::PathBuf>> {
    let r = rasterize_curves(dm, &approx.polylines, approx.res);
    let res = approx.res;
    let mut outputs = Vec::new();
    let pgm_path = stem.with_extension("pgm");
    let mut pgm = Vec::with_capacity(res * res + 32);
    pgm.extend_from_slice(format!("P5\n{res} {res}\n255\n").as_bytes());
    pgm.extend(r.bits.iter().map(|&b| if b { 0u8 } else { 255 }));
    std::fs::write(&pgm_path, &pgm)?;
    outputs.push(pgm_path);
    let png_path = stem.with_extension("png");
    let mut img = image::GrayImage::new(res as u32, res as u32);
    for (idx, &b) in r.bits.iter().enumerate() {
        img.put_pixel((idx % res) as u32, (idx / res) as u32, image::Luma([if b { 0 } else { 255 }]));
    }
    if img.save(&png_path).is_ok() {
        outputs.push(png_path);
    }
    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::EPS0;

    #[test]
    fn distance_transform_exact() {
        let mut r = Raster::new(64, 1.0);
        r.bits[10 * 64 + 20] = true;
        r.bits[50 * 64 + 40] = true;
        let d = distance_sq(&r);
        for (j, i, want) in [(10usize, 20usize, 0.0), (10, 25, 25.0), (12, 20, 4.0)] {
            assert_eq!(d[j * 64 + i], want);
        }
        // brute-force check on random pixels
        for idx in [0usize, 100, 2000, 4095] {
            let (i, j) = (idx % 64, idx / 64);
            let b1 = ((i as f64 - 20.0).powi(2) + (j as f64 - 10.0).powi(2))
                .min((i as f64 - 40.0).powi(2) + (j as f64 - 50.0).powi(2));
            assert!((d[idx] - b1).abs() < 1e-9, "at {idx}: {} vs {b1}", d[idx]);
        }
    }

    #[test]
    fn hausdorff_of_shifted_sets() {
        let mut a = Raster::new(64, 1.0);
        let mut b = Raster::new(64, 1.0);
        for i in 10..30 {
            a.bits[20 * 64 + i] = true;
            b.bits[25 * 64 + i] = true;
        }
        assert_eq!(hausdorff(&a, &b), 5.0);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }

    #[test]
    fn concentric_control_scores_one() {
        // two regions sharing a circle boundary (directly adjacent): both fractions 1.0
        let res = 256;
        let mut labels = vec![LABEL_UNKNOWN; res * res];
        let c = res as f64 / 2.0;
        for j in 0..res {
            for i in 0..res {
                let rad = (i as f64 - c).hypot(j as f64 - c);
                labels[j * res + i] = if rad < 60.0 { LABEL_L0 } else { LABEL_OUT };
            }
        }
        let bg = BasinGrid { res, labels, depth: 0, dh_history: vec![] };
        for (_, frac) in wada_score(&bg, 3) {
            assert!(frac > 0.999, "{frac}");
        }
    }

    #[test]
    fn non_wada_control_scores_half() {
        let bg = non_wada_control(512, 3);
        for (lab, frac) in wada_score(&bg, 3) {
            assert!((frac - 0.5).abs() < 0.1, "label {lab}: {frac}");
        }
    }

    #[test]
    fn pants_basins_three_regions() {
        let dm = DiskMap::pants(EPS0).unwrap();
        let approx = attractor_approx(&dm, 4, 1, 256).unwrap();
        let bg = basin_label(&dm, &approx).unwrap();
        assert_eq!(bg.regions(), vec![LABEL_OUT, LABEL_L0, LABEL_L1]);
    }

    #[test]
    fn annulus_basins_two_regions() {
        let dm = DiskMap::annulus(families::make_five_piece(), 0.0);
        let approx = attractor_approx(&dm, 4, 1, 256).unwrap();
        let bg = basin_label(&dm, &approx).unwrap();
        assert_eq!(bg.regions(), vec![LABEL_OUT, LABEL_L0]);
    }

    #[test]
    fn nested_images_contract() {
        let dm = DiskMap::pants(EPS0).unwrap();
        let approx = attractor_approx(&dm, 8, 1, 256).unwrap();
        let h = &approx.dh_history;
        assert!(h.len() == 8);
        // distances settle: the late steps move less than the early ones
        let early: f64 = h[..3].iter().sum();
        let late: f64 = h[5..].iter().sum();
        assert!(late < early, "history {h:?}");
    }

    #[test]
    fn five_piece_exterior_access_rotation_one() {
        let dm = DiskMap::annulus(families::make_five_piece(), 0.0);
        let rep = accessible_arc(&dm, Component::C1, 30).unwrap();
        assert!((rep.rho_side - 1.0).abs() < 1e-6, "rho {}", rep.rho_side);
        assert!((rep.endpoint_u - 0.25).abs() < 1e-6, "endpoint {}", rep.endpoint_u);
        assert!((rep.forward_rotation - 1.0).abs() < 1e-3);
        assert!(rep.terminates_radially);
    }

    #[test]
    fn five_piece_variant_b_not_radial() {
        let a = DiskMap::annulus(families::make_five_piece(), 0.0);
        let b = DiskMap::annulus(families::make_five_piece(), crate::chart::SHEAR_B);
        // fixed points of the fixed arc: radial in A, sheared in B
        for dm_pair in [(&a, true), (&b, false)] {
            let (dm, want_radial) = dm_pair;
            let rep = accessible_arc(dm, Component::C0, 30).unwrap();
            assert!(rep.endpoint_fixed, "endpoint {} not fixed", rep.endpoint_u);
            assert_eq!(rep.terminates_radially, want_radial, "spread {}", rep.tail_spread);
        }
    }
}
