//! Construction of the p -> infinity limit of Dirichlet and obstacle
//! problems as an explicit piecewise-affine (plus obstacle) profile.
//!
//! On each interval where the limit is not glued to the obstacle, the profile
//! has slope +1 where the accumulated datum stays below a threshold, slope -1
//! where it stays above, and a single intermediate slope `k` on the set where
//! it sits exactly at the threshold. The threshold is the largest level whose
//! strict sublevel set has measure at most a target fixed by the interval
//! length and the boundary values.

use serde::Serialize;

use crate::piecewise::{IntervalSet, PiecewisePoly, Poly, MERGE_TOL};
use crate::{Error, Result};

/// Threshold value for one component. The sublevel condition can hold for
/// every level, in which case the threshold is `PlusInfinity` and the profile
/// rises with slope 1 across the whole component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BetaStar {
    Finite(f64),
    PlusInfinity,
}

/// How a component of the non-contact set meets its surroundings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum ComponentKind {
    /// Contact set on both sides.
    Interior { d: f64, e: f64, phi_d: f64, phi_e: f64 },
    /// Boundary on the left, contact set on the right.
    Left { a: f64, c: f64, phi_c: f64 },
    /// Contact set on the left, boundary on the right.
    Right { d: f64, b: f64, phi_d: f64 },
    /// Boundary on both sides (no contact inside).
    Dirichlet { a: f64, b: f64, va: f64, vb: f64 },
    /// Center of a ball on the left (no boundary condition there), contact
    /// set or outer boundary on the right.
    BallCore { c: f64, phi_c: f64 },
}

/// Per-component record of the construction.
///
/// `Right` components are solved in mirrored coordinates; `beta_star` and the
/// level sets are reported back in original coordinates, and `k` is always
/// the actual slope of the limit on the level region.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub interval: (f64, f64),
    /// `None` when the affine connector replaced the variational profile
    /// because the boundary rise exceeds the interval length.
    pub beta_star: Option<BetaStar>,
    pub k: f64,
    pub below: IntervalSet,
    pub above: IntervalSet,
    pub level: IntervalSet,
}

/// What a single piece of the limit graph is.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PieceKind {
    /// Glued to the obstacle.
    Obstacle,
    /// Affine with this slope.
    Slope(f64),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitPiece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
    pub poly: Poly,
}

/// The assembled limit profile.
#[derive(Clone, Debug, Serialize)]
pub struct LimitFunction {
    domain: (f64, f64),
    pieces: Vec<LimitPiece>,
    components: Vec<Component>,
    function: PiecewisePoly,
}

impl LimitFunction {
    fn from_parts(
        domain: (f64, f64),
        mut pieces: Vec<LimitPiece>,
        components: Vec<Component>,
    ) -> Result<Self> {
        pieces.retain(|p| p.hi - p.lo > MERGE_TOL);
        pieces.sort_by(|p, q| p.lo.partial_cmp(&q.lo).unwrap());
        if pieces.is_empty() {
            return Err(Error::Inconsistency("limit profile has no pieces".into()));
        }
        // the pieces must tile the domain and agree at the seams
        let mut breaks = vec![domain.0];
        let mut polys = Vec::with_capacity(pieces.len());
        let mut cursor = domain.0;
        for p in &mut pieces {
            if (p.lo - cursor).abs() > 1e-9 {
                return Err(Error::Inconsistency(format!(
                    "gap in limit profile at {cursor}"
                )));
            }
            p.lo = cursor;
            cursor = p.hi;
            breaks.push(p.hi);
            polys.push(p.poly);
        }
        if (cursor - domain.1).abs() > 1e-9 {
            return Err(Error::Inconsistency(format!(
                "limit profile stops at {cursor}, domain ends at {}",
                domain.1
            )));
        }
        *breaks.last_mut().unwrap() = domain.1;
        if let Some(p) = pieces.last_mut() {
            p.hi = domain.1;
        }
        let function = PiecewisePoly::new(breaks, polys)?;
        if !function.is_continuous() {
            return Err(Error::Inconsistency(
                "limit profile is discontinuous at a seam".into(),
            ));
        }
        Ok(LimitFunction { domain, pieces, components, function })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.function.eval(x)
    }

    pub fn pieces(&self) -> &[LimitPiece] {
        &self.pieces
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn as_piecewise(&self) -> &PiecewisePoly {
        &self.function
    }

    /// Breakpoints of the assembled profile.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.domain.0];
        b.extend(self.pieces.iter().map(|p| p.hi));
        b
    }
}

/// Largest level whose strict sublevel set has measure at most `target`.
///
/// `big_f` must be continuous. A negative target is infeasible; a target at
/// least the domain length makes every level admissible.
pub fn beta_star(big_f: &PiecewisePoly, target: f64) -> Result<BetaStar> {
    let (lo, hi) = big_f.domain();
    let len = hi - lo;
    if target < -1e-12 * (1.0 + len) {
        return Err(Error::InfeasibleComponent { target });
    }
    let target = target.max(0.0);
    if target >= len - 1e-12 * (1.0 + len) {
        return Ok(BetaStar::PlusInfinity);
    }
    let (fmin, fmax) = big_f.range();
    let mut below = fmin - 1.0; // sublevel measure 0 here
    let mut over = fmax + 1.0; // sublevel measure len here
    for _ in 0..200 {
        let mid = 0.5 * (below + over);
        if mid <= below || mid >= over {
            break;
        }
        if big_f.sublevel_measure(mid) <= target {
            below = mid;
        } else {
            over = mid;
        }
    }
    // Bisection approaches the supremum from one side; when it lands next to
    // an exact level of the function (a plateau or a piece endpoint value),
    // snap to it so the level set comes out with its full measure.
    let tol = 1e-9 * (1.0 + below.abs());
    let mut snapped = below;
    let mut found = false;
    for c in big_f.critical_values() {
        if (c - below).abs() <= tol && big_f.sublevel_measure(c) <= target {
            snapped = if found { snapped.max(c) } else { c };
            found = true;
        }
    }
    Ok(BetaStar::Finite(snapped))
}

/// Slope on the level region, from the measures of the three regions and the
/// rise across the component. The construction guarantees the result lies in
/// `[-1, 1]`; anything outside that range (beyond roundoff) is an internal
/// error.
pub fn k_coefficient(
    below: &IntervalSet,
    above: &IntervalSet,
    level: &IntervalSet,
    rise: f64,
) -> Result<f64> {
    let m0 = level.measure();
    if m0 <= 0.0 {
        return Err(Error::Inconsistency(
            "slope coefficient requested for a level set of zero measure".into(),
        ));
    }
    let k = (above.measure() - below.measure() + rise) / m0;
    if k.abs() > 1.0 + 1e-9 {
        return Err(Error::Inconsistency(format!(
            "slope coefficient {k} falls outside [-1, 1]"
        )));
    }
    Ok(k.clamp(-1.0, 1.0))
}

/// Slope profile of one component before assembly.
struct Profile {
    /// Ordered runs `(x0, x1, slope)` tiling the component.
    runs: Vec<(f64, f64, f64)>,
    beta: BetaStar,
    k: f64,
    below: IntervalSet,
    above: IntervalSet,
    level: IntervalSet,
}

/// Compute the slope profile on `[lo, hi]` for accumulated datum `q` with
/// prescribed end values `v_lo`, `v_hi`. Requires `|v_hi - v_lo| <= hi - lo`
/// up to roundoff.
fn slope_profile(q: &PiecewisePoly, lo: f64, hi: f64, v_lo: f64, v_hi: f64) -> Result<Profile> {
    let len = hi - lo;
    let rise = v_hi - v_lo;
    if rise.abs() > len * (1.0 + 1e-12) {
        return Err(Error::SlopeTooSteep { slope: rise / len });
    }
    let restricted = q.restrict(lo, hi)?;
    let big_f = restricted.antiderivative(lo)?;
    let target = (len + rise) / 2.0;
    let beta = beta_star(&big_f, target)?;
    let (below, above, level, k) = match beta {
        BetaStar::PlusInfinity => (
            IntervalSet::interval(lo, hi),
            IntervalSet::empty(),
            IntervalSet::empty(),
            0.0,
        ),
        BetaStar::Finite(r) => {
            let (below, above, level) = big_f.level_sets(r);
            let k = if level.measure() > 1e-12 {
                k_coefficient(&below, &above, &level, rise)?
            } else {
                0.0
            };
            (below, above, level, k)
        }
    };
    let mut runs: Vec<(f64, f64, f64)> = Vec::new();
    for &(a, b) in below.intervals() {
        runs.push((a, b, 1.0));
    }
    for &(a, b) in above.intervals() {
        runs.push((a, b, -1.0));
    }
    for &(a, b) in level.intervals() {
        if b - a > MERGE_TOL {
            runs.push((a, b, k));
        }
    }
    let runs = tile_runs(runs, lo, hi)?;
    // end value reached by the profile must match the prescription
    let reached: f64 = runs.iter().map(|&(a, b, s)| s * (b - a)).sum();
    if (reached - rise).abs() > 1e-7 * (1.0 + rise.abs()) {
        return Err(Error::Inconsistency(format!(
            "profile rises by {reached}, boundary data needs {rise}"
        )));
    }
    Ok(Profile { runs, beta, k, below, above, level })
}

/// Sort, close micro-gaps, and merge equal-slope neighbors so the runs tile
/// `[lo, hi]` exactly.
fn tile_runs(mut runs: Vec<(f64, f64, f64)>, lo: f64, hi: f64) -> Result<Vec<(f64, f64, f64)>> {
    runs.retain(|r| r.1 - r.0 > MERGE_TOL);
    runs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    if runs.is_empty() {
        return Err(Error::Inconsistency("empty slope profile".into()));
    }
    let mut cursor = lo;
    for r in &mut runs {
        if (r.0 - cursor).abs() > 1e-9 {
            return Err(Error::Inconsistency(format!(
                "slope regions leave a gap near {cursor}"
            )));
        }
        r.0 = cursor;
        cursor = r.1;
    }
    if (cursor - hi).abs() > 1e-9 {
        return Err(Error::Inconsistency(format!(
            "slope regions end at {cursor}, component ends at {hi}"
        )));
    }
    runs.last_mut().unwrap().1 = hi;
    let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(runs.len());
    for r in runs {
        match merged.last_mut() {
            Some(last) if (last.2 - r.2).abs() <= 1e-12 => last.1 = r.1,
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Integrate the runs into affine pieces, pinned to the given value at one
/// end of the component.
fn assemble_runs(runs: &[(f64, f64, f64)], anchor_right: bool, anchor_value: f64) -> Vec<LimitPiece> {
    let mut start_vals = Vec::with_capacity(runs.len());
    let mut v = 0.0;
    for &(a, b, s) in runs {
        start_vals.push(v);
        v += s * (b - a);
    }
    let shift = if anchor_right { anchor_value - v } else { anchor_value };
    runs.iter()
        .zip(start_vals)
        .map(|(&(a, b, s), v0)| LimitPiece {
            lo: a,
            hi: b,
            kind: PieceKind::Slope(s),
            poly: Poly::affine_through(a, v0 + shift, s),
        })
        .collect()
}

/// Mirror image of a profile: runs reversed and negated, level sets
/// reflected, `k` negated.
fn reflect_profile(p: Profile, lo: f64, hi: f64) -> Profile {
    let s = lo + hi;
    let flip = |set: &IntervalSet| {
        IntervalSet::new(set.intervals().iter().map(|&(a, b)| (s - b, s - a)).collect())
    };
    let mut runs: Vec<(f64, f64, f64)> =
        p.runs.iter().map(|&(a, b, sl)| (s - b, s - a, -sl)).collect();
    runs.reverse();
    Profile {
        runs,
        beta: p.beta,
        k: -p.k,
        below: flip(&p.below),
        above: flip(&p.above),
        level: flip(&p.level),
    }
}

/// Build one component of the limit on `(lo, hi)` with end values `v_lo`,
/// `v_hi`. `Right` components are mirrored so the accumulated datum is always
/// anchored at the end away from the boundary condition.
fn build_component(
    q: &PiecewisePoly,
    kind: ComponentKind,
    lo: f64,
    hi: f64,
    v_lo: f64,
    v_hi: f64,
) -> Result<(Vec<LimitPiece>, Component)> {
    let len = hi - lo;
    let rise = v_hi - v_lo;
    if rise.abs() > len * (1.0 + 1e-12) {
        // boundary data steeper than any admissible profile: fall back to
        // the affine connector
        let slope = rise / len;
        let piece = LimitPiece {
            lo,
            hi,
            kind: PieceKind::Slope(slope),
            poly: Poly::affine_through(lo, v_lo, slope),
        };
        let comp = Component {
            kind,
            interval: (lo, hi),
            beta_star: None,
            k: slope,
            below: IntervalSet::empty(),
            above: IntervalSet::empty(),
            level: IntervalSet::empty(),
        };
        return Ok((vec![piece], comp));
    }
    let mirrored = matches!(kind, ComponentKind::Right { .. });
    let profile = if mirrored {
        let q_flipped = q.restrict(lo, hi)?.reflect();
        let p = slope_profile(&q_flipped, lo, hi, v_hi, v_lo)?;
        reflect_profile(p, lo, hi)
    } else {
        slope_profile(q, lo, hi, v_lo, v_hi)?
    };
    // Right components are pinned at the boundary end (the right); everything
    // else is pinned on the left.
    let pieces = if mirrored {
        assemble_runs(&profile.runs, true, v_hi)
    } else {
        assemble_runs(&profile.runs, false, v_lo)
    };
    let comp = Component {
        kind,
        interval: (lo, hi),
        beta_star: Some(profile.beta),
        k: profile.k,
        below: profile.below,
        above: profile.above,
        level: profile.level,
    };
    Ok((pieces, comp))
}

/// Limit of the Dirichlet problem with datum `f` and boundary values
/// `va`, `vb`. Fails with [`Error::SlopeTooSteep`] when
/// `|vb - va| > b - a`; use [`affine_limit`] in that regime.
pub fn dirichlet_limit(
    f: &PiecewisePoly,
    a: f64,
    b: f64,
    va: f64,
    vb: f64,
) -> Result<LimitFunction> {
    let (dlo, dhi) = f.domain();
    if (dlo - a).abs() > 1e-9 || (dhi - b).abs() > 1e-9 {
        return Err(Error::DomainMismatch);
    }
    if (vb - va).abs() > (b - a) * (1.0 + 1e-12) {
        return Err(Error::SlopeTooSteep { slope: (vb - va) / (b - a) });
    }
    let kind = ComponentKind::Dirichlet { a, b, va, vb };
    let (pieces, comp) = build_component(f, kind, a, b, va, vb)?;
    LimitFunction::from_parts((a, b), pieces, vec![comp])
}

/// The affine interpolant of the boundary data, as a limit profile. This is
/// the degenerate answer when the data rises faster than slope 1.
pub fn affine_limit(a: f64, b: f64, va: f64, vb: f64) -> Result<LimitFunction> {
    if !(b - a > 0.0) {
        return Err(Error::BadConstruction(format!("empty interval [{a}, {b}]")));
    }
    let slope = (vb - va) / (b - a);
    let piece = LimitPiece {
        lo: a,
        hi: b,
        kind: PieceKind::Slope(slope),
        poly: Poly::affine_through(a, va, slope),
    };
    let comp = Component {
        kind: ComponentKind::Dirichlet { a, b, va, vb },
        interval: (a, b),
        beta_star: None,
        k: slope,
        below: IntervalSet::empty(),
        above: IntervalSet::empty(),
        level: IntervalSet::empty(),
    };
    LimitFunction::from_parts((a, b), vec![piece], vec![comp])
}

/// Limit of the obstacle problem with zero boundary values: datum `f`,
/// obstacle `phi`, and prescribed limit contact set `gamma`.
///
/// The profile equals `phi` on `gamma`; each complementary component is built
/// from the datum accumulated across it. Obstacle values at interior contact
/// endpoints pin the component boundary values.
pub fn obstacle_limit(
    f: &PiecewisePoly,
    phi: &PiecewisePoly,
    gamma: &IntervalSet,
) -> Result<LimitFunction> {
    let (a, b) = f.domain();
    let (pa, pb) = phi.domain();
    if (pa - a).abs() > 1e-9 || (pb - b).abs() > 1e-9 {
        return Err(Error::DomainMismatch);
    }
    if !phi.is_continuous() {
        return Err(Error::BadSpec("obstacle must be continuous".into()));
    }
    if !gamma.is_subset_of(&IntervalSet::interval(a, b), 1e-9) {
        return Err(Error::BadSpec("contact set must lie inside the domain".into()));
    }
    let mut pieces = Vec::new();
    let mut components = Vec::new();
    // glued part
    for &(glo, ghi) in gamma.intervals() {
        if ghi - glo <= MERGE_TOL {
            continue;
        }
        if glo <= a + MERGE_TOL && phi.eval(a).abs() > 1e-9 {
            return Err(Error::BadSpec(
                "contact set touches the boundary but the obstacle is nonzero there".into(),
            ));
        }
        if ghi >= b - MERGE_TOL && phi.eval_left(b).abs() > 1e-9 {
            return Err(Error::BadSpec(
                "contact set touches the boundary but the obstacle is nonzero there".into(),
            ));
        }
        let glued = phi.restrict(glo, ghi)?;
        for (i, poly) in glued.pieces().iter().enumerate() {
            pieces.push(LimitPiece {
                lo: glued.breaks()[i],
                hi: glued.breaks()[i + 1],
                kind: PieceKind::Obstacle,
                poly: *poly,
            });
        }
    }
    // free components
    for &(lo, hi) in gamma.complement_in(a, b).intervals() {
        if hi - lo <= MERGE_TOL {
            continue;
        }
        let touches_a = lo <= a + MERGE_TOL;
        let touches_b = hi >= b - MERGE_TOL;
        let v_lo = if touches_a { 0.0 } else { phi.eval(lo) };
        let v_hi = if touches_b { 0.0 } else { phi.eval(hi) };
        let kind = match (touches_a, touches_b) {
            (true, true) => ComponentKind::Dirichlet { a, b, va: 0.0, vb: 0.0 },
            (true, false) => ComponentKind::Left { a, c: hi, phi_c: v_hi },
            (false, true) => ComponentKind::Right { d: lo, b, phi_d: v_lo },
            (false, false) => ComponentKind::Interior { d: lo, e: hi, phi_d: v_lo, phi_e: v_hi },
        };
        let (mut ps, comp) = build_component(f, kind, lo, hi, v_lo, v_hi)?;
        pieces.append(&mut ps);
        components.push(comp);
    }
    LimitFunction::from_parts((a, b), pieces, components)
}

/// Limit of the radially symmetric obstacle problem on the annulus
/// `r1 < |x| < r2` (ball when `r1 = 0`) in dimension `n`, written in the
/// radial variable.
///
/// `g` is the radial datum, `phi` the radial obstacle, `gamma` the prescribed
/// radial contact set. The datum is accumulated with the weight `t^(n-1)`;
/// the distance structure of the profile is unweighted.
pub fn radial_limit(
    g: &PiecewisePoly,
    phi: &PiecewisePoly,
    n: u32,
    r1: f64,
    r2: f64,
    gamma: &IntervalSet,
) -> Result<LimitFunction> {
    if n < 1 {
        return Err(Error::BadSpec("dimension must be at least 1".into()));
    }
    if r1 < 0.0 || r2 - r1 <= MERGE_TOL {
        return Err(Error::BadSpec(format!("bad radii ({r1}, {r2})")));
    }
    let (glo, ghi) = g.domain();
    if (glo - r1).abs() > 1e-9 || (ghi - r2).abs() > 1e-9 {
        return Err(Error::DomainMismatch);
    }
    let is_ball = r1 == 0.0;
    let q = g.mul_monomial(n - 1)?;
    let mut pieces = Vec::new();
    let mut components = Vec::new();
    for &(gl, gh) in gamma.intervals() {
        if gh - gl <= MERGE_TOL {
            continue;
        }
        if gh >= r2 - MERGE_TOL && phi.eval_left(r2).abs() > 1e-9 {
            return Err(Error::BadSpec(
                "contact set touches the outer boundary but the obstacle is nonzero there".into(),
            ));
        }
        if !is_ball && gl <= r1 + MERGE_TOL && phi.eval(r1).abs() > 1e-9 {
            return Err(Error::BadSpec(
                "contact set touches the inner boundary but the obstacle is nonzero there".into(),
            ));
        }
        let glued = phi.restrict(gl, gh)?;
        for (i, poly) in glued.pieces().iter().enumerate() {
            pieces.push(LimitPiece {
                lo: glued.breaks()[i],
                hi: glued.breaks()[i + 1],
                kind: PieceKind::Obstacle,
                poly: *poly,
            });
        }
    }
    for &(lo, hi) in gamma.complement_in(r1, r2).intervals() {
        if hi - lo <= MERGE_TOL {
            continue;
        }
        let touches_inner = lo <= r1 + MERGE_TOL;
        let touches_outer = hi >= r2 - MERGE_TOL;
        if is_ball && touches_inner {
            // no boundary condition at the center: the profile is pinned on
            // its right end only and follows the sign of the accumulated
            // datum, with no intermediate slope
            let phi_c = if touches_outer { 0.0 } else { phi.eval(hi) };
            let (mut ps, comp) = ball_core_component(&q, hi, phi_c)?;
            pieces.append(&mut ps);
            components.push(comp);
            continue;
        }
        let v_lo = if touches_inner { 0.0 } else { phi.eval(lo) };
        let v_hi = if touches_outer { 0.0 } else { phi.eval(hi) };
        let kind = match (touches_inner, touches_outer) {
            (true, true) => ComponentKind::Dirichlet { a: r1, b: r2, va: 0.0, vb: 0.0 },
            (true, false) => ComponentKind::Left { a: r1, c: hi, phi_c: v_hi },
            (false, true) => ComponentKind::Right { d: lo, b: r2, phi_d: v_lo },
            (false, false) => ComponentKind::Interior { d: lo, e: hi, phi_d: v_lo, phi_e: v_hi },
        };
        let (mut ps, comp) = build_component(&q, kind, lo, hi, v_lo, v_hi)?;
        pieces.append(&mut ps);
        components.push(comp);
    }
    LimitFunction::from_parts((r1, r2), pieces, components)
}

/// Component containing the center of a ball: threshold fixed at zero, no
/// intermediate slope, pinned at the right end `(c, phi_c)`.
pub(crate) fn ball_core_component(
    q: &PiecewisePoly,
    c: f64,
    phi_c: f64,
) -> Result<(Vec<LimitPiece>, Component)> {
    let (qlo, _) = q.domain();
    if qlo > MERGE_TOL {
        return Err(Error::BadSpec(
            "ball core requested but the datum does not reach the center".into(),
        ));
    }
    let restricted = q.restrict(qlo, c)?;
    let big_g = restricted.antiderivative(qlo)?;
    let (below, above, level) = big_g.level_sets(0.0);
    let mut runs: Vec<(f64, f64, f64)> = Vec::new();
    for &(a, b) in below.intervals() {
        runs.push((a, b, 1.0));
    }
    for &(a, b) in above.intervals() {
        runs.push((a, b, -1.0));
    }
    for &(a, b) in level.intervals() {
        if b - a > MERGE_TOL {
            runs.push((a, b, 0.0));
        }
    }
    let runs = tile_runs(runs, qlo, c)?;
    let pieces = assemble_runs(&runs, true, phi_c);
    let comp = Component {
        kind: ComponentKind::BallCore { c, phi_c },
        interval: (qlo, c),
        beta_star: Some(BetaStar::Finite(0.0)),
        k: 0.0,
        below,
        above,
        level,
    };
    Ok((pieces, comp))
}
