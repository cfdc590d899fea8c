//! Exact calculus on piecewise polynomials of degree at most 3, plus finite
//! unions of closed intervals.
//!
//! Polynomial coefficients are stored in global coordinates, so restricting,
//! splitting, and merging pieces never touches the coefficients. Degree 3 is
//! enough for every datum this crate handles (quadratic data times a monomial
//! weight), and the hard cap turns silent precision loss into an error.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Breakpoints closer than this are treated as one point.
pub const MERGE_TOL: f64 = 1e-12;

/// Tolerance for deciding that a constant piece sits exactly on a level.
const LEVEL_TOL: f64 = 1e-12;

/// Polynomial of degree at most 3: `c[0] + c[1] x + c[2] x^2 + c[3] x^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub c: [f64; 4],
}

impl Poly {
    pub fn new(c: [f64; 4]) -> Self {
        Poly { c }
    }

    pub fn constant(v: f64) -> Self {
        Poly { c: [v, 0.0, 0.0, 0.0] }
    }

    /// Affine polynomial with the given value at `x0` and slope `s`.
    pub fn affine_through(x0: f64, value: f64, s: f64) -> Self {
        Poly { c: [value - s * x0, s, 0.0, 0.0] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Horner
        ((self.c[3] * x + self.c[2]) * x + self.c[1]) * x + self.c[0]
    }

    pub fn degree(&self) -> usize {
        if self.c[3] != 0.0 {
            3
        } else if self.c[2] != 0.0 {
            2
        } else if self.c[1] != 0.0 {
            1
        } else {
            0
        }
    }

    pub fn derivative(&self) -> Poly {
        Poly { c: [self.c[1], 2.0 * self.c[2], 3.0 * self.c[3], 0.0] }
    }

    /// Antiderivative with zero constant term. Errors if the result would
    /// need degree 4.
    pub fn antiderivative(&self) -> Result<Poly> {
        if self.c[3] != 0.0 {
            return Err(Error::DegreeOverflow);
        }
        Ok(Poly { c: [0.0, self.c[0], self.c[1] / 2.0, self.c[2] / 3.0] })
    }

    /// Exact integral over `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let prim = |x: f64| {
            let x2 = x * x;
            self.c[0] * x + self.c[1] * x2 / 2.0 + self.c[2] * x2 * x / 3.0
                + self.c[3] * x2 * x2 / 4.0
        };
        prim(hi) - prim(lo)
    }

    /// Multiply by `x^k`, keeping the degree cap.
    pub fn mul_monomial(&self, k: u32) -> Result<Poly> {
        if k == 0 {
            return Ok(*self);
        }
        if self.degree() + k as usize > 3 {
            return Err(Error::DegreeOverflow);
        }
        let mut c = [0.0; 4];
        for (i, &ci) in self.c.iter().enumerate() {
            if ci != 0.0 {
                c[i + k as usize] = ci;
            }
        }
        Ok(Poly { c })
    }

    /// Composition with the reflection `x -> s - x`.
    pub fn reflect(&self, s: f64) -> Poly {
        // (s - x)^k expanded by binomials, accumulated per power of x
        let mut c = [0.0; 4];
        let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [
            1.0, 3.0, 3.0, 1.0,
        ]];
        for k in 0..4 {
            if self.c[k] == 0.0 {
                continue;
            }
            let mut spow = [1.0; 4];
            for j in 1..4 {
                spow[j] = spow[j - 1] * s;
            }
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                c[j] += self.c[k] * binom[k][j] * sign * spow[k - j];
            }
        }
        Poly { c }
    }

    /// Real roots in the open interval `(lo, hi)`, sorted, deduplicated.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self.degree() {
            0 => {}
            1 => {
                let r = -self.c[0] / self.c[1];
                if r > lo && r < hi {
                    out.push(r);
                }
            }
            2 => {
                let (a, b, c) = (self.c[2], self.c[1], self.c[0]);
                let disc = b * b - 4.0 * a * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    // Citardauq pairing avoids cancellation
                    let q = -0.5 * (b + b.signum() * sq);
                    let mut rs = if q == 0.0 {
                        vec![0.0]
                    } else {
                        vec![q / a, c / q]
                    };
                    rs.retain(|r| *r > lo && *r < hi);
                    rs.sort_by(|p, q| p.partial_cmp(q).unwrap());
                    out = rs;
                }
            }
            3 => {
                // split at critical points, then bisect each monotone span
                let mut knots = vec![lo];
                knots.extend(self.derivative().roots_in(lo, hi));
                knots.push(hi);
                for w in knots.windows(2) {
                    let (s0, s1) = (w[0], w[1]);
                    let (f0, f1) = (self.eval(s0), self.eval(s1));
                    if f0 == 0.0 && s0 > lo {
                        out.push(s0);
                        continue;
                    }
                    if f0 * f1 < 0.0 {
                        let (mut a, mut b) = (s0, s1);
                        let mut fa = f0;
                        for _ in 0..200 {
                            let m = 0.5 * (a + b);
                            if m <= a || m >= b {
                                break;
                            }
                            let fm = self.eval(m);
                            if fm == 0.0 {
                                a = m;
                                b = m;
                                break;
                            }
                            if fa * fm < 0.0 {
                                b = m;
                            } else {
                                a = m;
                                fa = fm;
                            }
                        }
                        out.push(0.5 * (a + b));
                    }
                }
            }
            _ => unreachable!(),
        }
        out.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        out
    }
}

/// Serialized form: domain, interior breakpoints, one coefficient row per
/// piece (low-order first, trailing zeros trimmed).
#[derive(Serialize, Deserialize)]
struct PwRepr {
    domain: [f64; 2],
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

/// Piecewise polynomial on `[breaks[0], breaks[last]]`, right-continuous at
/// interior breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PwRepr", into = "PwRepr")]
pub struct PiecewisePoly {
    /// Strictly increasing, length = pieces.len() + 1.
    breaks: Vec<f64>,
    pieces: Vec<Poly>,
    continuous: bool,
}

impl TryFrom<PwRepr> for PiecewisePoly {
    type Error = Error;

    fn try_from(r: PwRepr) -> Result<Self> {
        let mut breaks = Vec::with_capacity(r.breaks.len() + 2);
        breaks.push(r.domain[0]);
        breaks.extend(r.breaks);
        breaks.push(r.domain[1]);
        let mut pieces = Vec::with_capacity(r.coeffs.len());
        for row in &r.coeffs {
            if row.is_empty() || row.len() > 4 {
                return Err(Error::BadConstruction(format!(
                    "coefficient row of length {}",
                    row.len()
                )));
            }
            let mut c = [0.0; 4];
            c[..row.len()].copy_from_slice(row);
            pieces.push(Poly { c });
        }
        PiecewisePoly::new(breaks, pieces)
    }
}

impl From<PiecewisePoly> for PwRepr {
    fn from(f: PiecewisePoly) -> PwRepr {
        let coeffs = f
            .pieces
            .iter()
            .map(|p| {
                let n = p.degree() + 1;
                p.c[..n].to_vec()
            })
            .collect();
        PwRepr {
            domain: [f.breaks[0], *f.breaks.last().unwrap()],
            breaks: f.breaks[1..f.breaks.len() - 1].to_vec(),
            coeffs,
        }
    }
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return Err(Error::BadConstruction(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::BadConstruction("non-finite breakpoint".into()));
        }
        if breaks.windows(2).any(|w| w[1] - w[0] <= 0.0) {
            return Err(Error::BadConstruction(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let mut f = PiecewisePoly { breaks, pieces, continuous: false };
        f.continuous = f.check_continuity(1e-9);
        Ok(f)
    }

    pub fn constant(lo: f64, hi: f64, v: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![Poly::constant(v)])
    }

    pub fn from_poly(lo: f64, hi: f64, p: Poly) -> Result<Self> {
        Self::new(vec![lo, hi], vec![p])
    }

    /// Step function on `[lo, hi]`: the listed `(x0, x1, value)` intervals,
    /// zero elsewhere. Intervals must be disjoint and ordered.
    pub fn from_steps(lo: f64, hi: f64, steps: &[(f64, f64, f64)]) -> Result<Self> {
        let mut breaks = vec![lo];
        let mut pieces = Vec::new();
        let mut cursor = lo;
        for &(x0, x1, v) in steps {
            if x0 < cursor - MERGE_TOL || x1 <= x0 || x1 > hi + MERGE_TOL {
                return Err(Error::BadConstruction(format!(
                    "step ({x0}, {x1}) out of order or out of range"
                )));
            }
            if x0 > cursor + MERGE_TOL {
                breaks.push(x0);
                pieces.push(Poly::constant(0.0));
            }
            let end = x1.min(hi);
            breaks.push(end);
            pieces.push(Poly::constant(v));
            cursor = end;
        }
        if cursor < hi - MERGE_TOL {
            breaks.push(hi);
            pieces.push(Poly::constant(0.0));
        } else {
            *breaks.last_mut().unwrap() = hi;
        }
        Self::new(breaks, pieces)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    fn check_continuity(&self, tol: f64) -> bool {
        self.breaks[1..self.breaks.len() - 1]
            .iter()
            .zip(self.pieces.windows(2))
            .all(|(&x, w)| (w[0].eval(x) - w[1].eval(x)).abs() <= tol)
    }

    /// Index of the piece governing `x` under right-continuity. `x` is
    /// clamped to the domain.
    fn piece_index(&self, x: f64) -> usize {
        let n = self.pieces.len();
        // first break strictly greater than x, minus one
        let k = self.breaks.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(n - 1)
    }

    /// Value at `x`, taken from the right at interior breakpoints.
    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// One-sided value from the left; at the left endpoint this is the same
    /// as `eval`.
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b < x);
        let idx = k.saturating_sub(1).min(self.pieces.len() - 1);
        self.pieces[idx].eval(x)
    }

    /// Antiderivative vanishing at `base`, with constants chained so the
    /// result is continuous.
    pub fn antiderivative(&self, base: f64) -> Result<PiecewisePoly> {
        let (lo, hi) = self.domain();
        if base < lo - MERGE_TOL || base > hi + MERGE_TOL {
            return Err(Error::OutsideDomain { x: base, lo, hi });
        }
        let base = base.clamp(lo, hi);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut acc = 0.0; // running value at the left end of piece i
        for (i, p) in self.pieces.iter().enumerate() {
            let mut prim = p.antiderivative()?;
            prim.c[0] = acc - prim.eval(self.breaks[i]);
            acc = prim.eval(self.breaks[i + 1]);
            pieces.push(prim);
        }
        let mut out = PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces,
            continuous: true,
        };
        let shift = out.eval(base);
        for p in &mut out.pieces {
            p.c[0] -= shift;
        }
        Ok(out)
    }

    pub fn derivative(&self) -> PiecewisePoly {
        let pieces = self.pieces.iter().map(|p| p.derivative()).collect();
        let mut f = PiecewisePoly { breaks: self.breaks.clone(), pieces, continuous: false };
        f.continuous = f.check_continuity(1e-9);
        f
    }

    /// Exact integral over the whole domain.
    pub fn integrate(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| p.integral(self.breaks[i], self.breaks[i + 1]))
            .sum()
    }

    /// Exact integral of `self * other` over the common domain. The product
    /// is formed cell by cell, so its degree (up to 6) never meets the cap.
    pub fn integrate_product(&self, other: &PiecewisePoly) -> Result<f64> {
        let (a0, b0) = self.domain();
        let (a1, b1) = other.domain();
        if (a0 - a1).abs() > 1e-9 || (b0 - b1).abs() > 1e-9 {
            return Err(Error::DomainMismatch);
        }
        let mut cuts: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let p = &self.pieces[self.piece_index(mid)];
            let q = &other.pieces[other.piece_index(mid)];
            // convolve coefficients
            let mut prod = [0.0; 7];
            for (i, &pi) in p.c.iter().enumerate() {
                if pi == 0.0 {
                    continue;
                }
                for (j, &qj) in q.c.iter().enumerate() {
                    prod[i + j] += pi * qj;
                }
            }
            let prim = |x: f64| {
                let mut s = 0.0;
                let mut xp = x;
                for (k, &ck) in prod.iter().enumerate() {
                    s += ck * xp / (k as f64 + 1.0);
                    xp *= x;
                }
                s
            };
            total += prim(w[1]) - prim(w[0]);
        }
        Ok(total)
    }

    /// Exact integral of `t^nu * self` over `[lo, hi]`. The weight is applied
    /// during integration, so the degree cap does not apply.
    pub fn integrate_weighted(&self, nu: u32, lo: f64, hi: f64) -> f64 {
        let (a, b) = self.domain();
        let lo = lo.max(a);
        let hi = hi.min(b);
        if hi <= lo {
            return 0.0;
        }
        let mut total = 0.0;
        let mut x0 = lo;
        while x0 < hi - MERGE_TOL {
            let idx = self.piece_index(x0 + MERGE_TOL);
            let x1 = self.breaks[idx + 1].min(hi);
            let p = &self.pieces[idx];
            let prim = |x: f64| {
                let mut s = 0.0;
                for (k, &ck) in p.c.iter().enumerate() {
                    if ck != 0.0 {
                        let pow = (k as u32 + nu + 1) as f64;
                        s += ck * x.powi(pow as i32) / pow;
                    }
                }
                s
            };
            total += prim(x1) - prim(x0);
            x0 = x1;
        }
        total
    }

    /// Restriction to `[lo, hi]`, which must lie inside the domain.
    /// Endpoints within `MERGE_TOL` of a breakpoint snap to it.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<PiecewisePoly> {
        let (a, b) = self.domain();
        if lo < a - MERGE_TOL || hi > b + MERGE_TOL || hi - lo <= MERGE_TOL {
            return Err(Error::BadConstruction(format!(
                "restriction [{lo}, {hi}] does not fit inside [{a}, {b}]"
            )));
        }
        let lo = lo.clamp(a, b);
        let hi = hi.clamp(a, b);
        let mut breaks = vec![lo];
        let mut pieces = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (x0, x1) = (self.breaks[i], self.breaks[i + 1]);
            if x1 <= lo + MERGE_TOL || x0 >= hi - MERGE_TOL {
                continue;
            }
            breaks.push(x1.min(hi));
            pieces.push(*p);
        }
        *breaks.last_mut().unwrap() = hi;
        PiecewisePoly::new(breaks, pieces)
    }

    /// Reflection about the domain midpoint: the result g satisfies
    /// g(x) = f(lo + hi - x) on the same domain.
    pub fn reflect(&self) -> PiecewisePoly {
        let (lo, hi) = self.domain();
        let s = lo + hi;
        let breaks: Vec<f64> = self.breaks.iter().rev().map(|&x| s - x).collect();
        let pieces: Vec<Poly> = self.pieces.iter().rev().map(|p| p.reflect(s)).collect();
        PiecewisePoly { breaks, pieces, continuous: self.continuous }
    }

    /// Multiply every piece by `x^k`, subject to the degree cap.
    pub fn mul_monomial(&self, k: u32) -> Result<PiecewisePoly> {
        let pieces: Result<Vec<Poly>> = self.pieces.iter().map(|p| p.mul_monomial(k)).collect();
        Ok(PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces: pieces?,
            continuous: false,
        })
    }

    /// Minimum and maximum over the domain (one-sided limits included).
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.sample_values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Values at piece endpoints and interior stationary points; the extrema
    /// of every piece occur among these.
    fn sample_values(&self) -> Vec<f64> {
        let mut vals = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (x0, x1) = (self.breaks[i], self.breaks[i + 1]);
            vals.push(p.eval(x0));
            vals.push(p.eval(x1));
            for r in p.derivative().roots_in(x0, x1) {
                vals.push(p.eval(r));
            }
        }
        vals
    }

    /// Candidate critical levels: piece endpoint values, plateau values, and
    /// interior stationary values. Sorted and deduplicated.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut vals = self.sample_values();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + a.abs()));
        vals
    }

    /// Measure of the sublevel set `{f < r}` (strict), exact for the stored
    /// polynomials.
    pub fn sublevel_measure(&self, r: f64) -> f64 {
        self.sublevel_measure_impl(r, true)
    }

    /// Measure of `{f <= r}`.
    pub fn sublevel_measure_closed(&self, r: f64) -> f64 {
        self.sublevel_measure_impl(r, false)
    }

    fn sublevel_measure_impl(&self, r: f64, strict: bool) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let (x0, x1) = (self.breaks[i], self.breaks[i + 1]);
            if p.degree() == 0 {
                let below = if strict { p.c[0] < r } else { p.c[0] <= r };
                if below {
                    total += x1 - x0;
                }
                continue;
            }
            // {p = r} is finite here, so strictness does not matter
            let shifted = Poly { c: [p.c[0] - r, p.c[1], p.c[2], p.c[3]] };
            let mut cuts = vec![x0];
            cuts.extend(shifted.roots_in(x0, x1));
            cuts.push(x1);
            for w in cuts.windows(2) {
                if p.eval(0.5 * (w[0] + w[1])) < r {
                    total += w[1] - w[0];
                }
            }
        }
        total
    }

    /// Partition of the domain by sign of `f - r`: the sets where f < r,
    /// f > r, and f = r. Constant pieces within `1e-12` of `r` count as
    /// plateaus; isolated level points appear as degenerate intervals in the
    /// last set.
    pub fn level_sets(&self, r: f64) -> (IntervalSet, IntervalSet, IntervalSet) {
        let mut below = Vec::new();
        let mut above = Vec::new();
        let mut level = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (x0, x1) = (self.breaks[i], self.breaks[i + 1]);
            if p.degree() == 0 {
                let d = p.c[0] - r;
                if d.abs() <= LEVEL_TOL {
                    level.push((x0, x1));
                } else if d < 0.0 {
                    below.push((x0, x1));
                } else {
                    above.push((x0, x1));
                }
                continue;
            }
            let shifted = Poly { c: [p.c[0] - r, p.c[1], p.c[2], p.c[3]] };
            let mut cuts = vec![x0];
            cuts.extend(shifted.roots_in(x0, x1));
            cuts.push(x1);
            for w in cuts.windows(2) {
                let v = p.eval(0.5 * (w[0] + w[1])) - r;
                if v.abs() <= LEVEL_TOL {
                    level.push((w[0], w[1]));
                } else if v < 0.0 {
                    below.push((w[0], w[1]));
                } else {
                    above.push((w[0], w[1]));
                }
            }
            // interior tangencies and endpoint hits are isolated level points
            for c in &cuts[1..cuts.len() - 1] {
                level.push((*c, *c));
            }
            if shifted.eval(x0).abs() <= LEVEL_TOL {
                level.push((x0, x0));
            }
            if shifted.eval(x1).abs() <= LEVEL_TOL {
                level.push((x1, x1));
            }
        }
        (IntervalSet::new(below), IntervalSet::new(above), IntervalSet::new(level))
    }
}

/// Finite union of closed intervals, kept sorted and merged. Degenerate
/// intervals (single points) are allowed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    iv: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut iv: Vec<(f64, f64)>) -> Self {
        iv.retain(|&(a, b)| b >= a);
        iv.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 + MERGE_TOL => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        IntervalSet { iv: merged }
    }

    pub fn empty() -> Self {
        IntervalSet { iv: Vec::new() }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        IntervalSet::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.iv
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.iv.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.iv.iter().any(|&(a, b)| x >= a - tol && x <= b + tol)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut iv = self.iv.clone();
        iv.extend(other.iv.iter().copied());
        IntervalSet::new(iv)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.iv.len() && j < other.iv.len() {
            let (a0, b0) = self.iv[i];
            let (a1, b1) = other.iv[j];
            let lo = a0.max(a1);
            let hi = b0.min(b1);
            if hi >= lo {
                out.push((lo, hi));
            }
            if b0 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::new(out)
    }

    /// Closure of the complement within `[lo, hi]`.
    pub fn complement_in(&self, lo: f64, hi: f64) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.iv {
            if a > hi || b < lo {
                continue;
            }
            if a > cursor + MERGE_TOL {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi - MERGE_TOL {
            out.push((cursor, hi));
        }
        IntervalSet::new(out)
    }

    /// Each interval fattened by `r` on both sides.
    pub fn dilate(&self, r: f64) -> IntervalSet {
        IntervalSet::new(self.iv.iter().map(|&(a, b)| (a - r, b + r)).collect())
    }

    /// True if every point of `self` lies within `tol` of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet, tol: f64) -> bool {
        let fat = other.dilate(tol);
        self.iv
            .iter()
            .all(|&(a, b)| fat.iv.iter().any(|&(c, d)| a >= c && b <= d))
    }
}
