//! Finite-p solvers on uniform grids.
//!
//! The Dirichlet problem is solved by shooting: the derivative of a solution
//! is `psi(beta - F)` for an antiderivative `F` of the datum and a constant
//! `beta` fixed by the far boundary value, and the map from `beta` to that
//! value is strictly increasing. The obstacle problem is solved by a
//! projected nonlinear Gauss-Seidel iteration, accelerated by damped Newton
//! steps on the inactive set; plain Gauss-Seidel alone flattens out long
//! before useful tolerances on fine grids.

use serde::Serialize;

use crate::piecewise::{IntervalSet, PiecewisePoly, Poly, MERGE_TOL};
use crate::{Error, Result};

/// Hard cap for the iterative solver: beyond this the residual equation is
/// too ill-conditioned in f64 to be worth iterating on.
pub const MAX_ITERATIVE_P: f64 = 128.0;

/// One-dimensional problem on `[a, b]`, possibly carrying the monomial
/// weight `t^weight_exponent` from a radial reduction. When `natural_left`
/// is set the left end is the center of a ball: no boundary condition there.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub a: f64,
    pub b: f64,
    pub f: PiecewisePoly,
    pub obstacle: Option<PiecewisePoly>,
    pub bc: (f64, f64),
    pub p: f64,
    pub weight_exponent: u32,
    pub natural_left: bool,
}

impl ProblemSpec {
    pub fn flat(
        a: f64,
        b: f64,
        f: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
        bc: (f64, f64),
        p: f64,
    ) -> Result<Self> {
        Self::weighted(a, b, f, obstacle, bc, p, 0, false)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn weighted(
        a: f64,
        b: f64,
        f: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
        bc: (f64, f64),
        p: f64,
        weight_exponent: u32,
        natural_left: bool,
    ) -> Result<Self> {
        let spec = ProblemSpec { a, b, f, obstacle, bc, p, weight_exponent, natural_left };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::BadSpec(format!("p = {} must be finite and > 1", self.p)));
        }
        if !(self.b - self.a > 0.0) {
            return Err(Error::BadSpec(format!("empty interval [{}, {}]", self.a, self.b)));
        }
        let (flo, fhi) = self.f.domain();
        if (flo - self.a).abs() > 1e-9 || (fhi - self.b).abs() > 1e-9 {
            return Err(Error::BadSpec("datum domain does not match the interval".into()));
        }
        if self.natural_left && self.a.abs() > 1e-9 {
            return Err(Error::BadSpec(
                "a natural left end marks the center of a ball, so a = 0".into(),
            ));
        }
        if self.weight_exponent > 0 && self.a < -MERGE_TOL {
            return Err(Error::BadSpec("weighted problems live on r >= 0".into()));
        }
        if let Some(phi) = &self.obstacle {
            let (plo, phi_hi) = phi.domain();
            if (plo - self.a).abs() > 1e-9 || (phi_hi - self.b).abs() > 1e-9 {
                return Err(Error::BadSpec("obstacle domain does not match the interval".into()));
            }
            if !phi.is_continuous() {
                return Err(Error::BadSpec("obstacle must be continuous".into()));
            }
            if !self.natural_left && phi.eval(self.a) > self.bc.0 + 1e-9 {
                return Err(Error::BadSpec("obstacle sits above the left boundary value".into()));
            }
            if phi.eval_left(self.b) > self.bc.1 + 1e-9 {
                return Err(Error::BadSpec("obstacle sits above the right boundary value".into()));
            }
        }
        Ok(())
    }
}

/// Values on a uniform grid over `[a, b]`.
#[derive(Clone, Debug, Serialize)]
pub struct GridFunction {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn n_nodes(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.b
        } else {
            self.a + self.h() * i as f64
        }
    }

    /// Piecewise-linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.h();
        let t = ((x - self.a) / h).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Max over the nodes of `|u_i - g(x_i)|`.
    pub fn sup_distance_to(&self, g: impl Fn(f64) -> f64) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[i] - g(self.node(i))).abs())
            .fold(0.0, f64::max)
    }
}

/// `psi(p, s) = sign(s) |s|^(1/(p-1))`: inverse of the flux nonlinearity.
pub fn psi(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(1.0 / (p - 1.0))
    }
}

/// `psi_inv(p, s) = sign(s) |s|^(p-1)`: the flux nonlinearity itself.
pub fn psi_inv(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(p - 1.0)
    }
}

// -------------------------------------------------------------------------
// shooting

const GL20_NODES: [f64; 10] = [
    0.07652652113349734,
    0.22778585114164507,
    0.37370608871541955,
    0.5108670019508271,
    0.636053680726515,
    0.7463319064601508,
    0.8391169718222188,
    0.9122344282513259,
    0.9639719272779138,
    0.9931285991850949,
];
const GL20_WEIGHTS: [f64; 10] = [
    0.15275338713072584,
    0.14917298647260374,
    0.14209610931838204,
    0.13168863844917664,
    0.11819453196151841,
    0.10193011981724044,
    0.08327674157670475,
    0.06267204833410907,
    0.04060142980038694,
    0.017614007139152118,
];

fn gauss20(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let mut s = 0.0;
    for (x, w) in GL20_NODES.iter().zip(GL20_WEIGHTS) {
        s += w * (f(c + r * x) + f(c - r * x));
    }
    s * r
}

/// Exact or high-accuracy integral of `psi(p, v(t))` over `[s0, s1]`.
fn integral_psi(p: f64, v: &Poly, s0: f64, s1: f64) -> f64 {
    if s1 - s0 <= 0.0 {
        return 0.0;
    }
    match v.degree() {
        0 => psi(p, v.c[0]) * (s1 - s0),
        1 => {
            // primitive of psi along an affine argument
            let gamma = 1.0 / (p - 1.0);
            let prim = |w: f64| w.abs().powf(gamma + 1.0) / (gamma + 1.0);
            (prim(v.eval(s1)) - prim(v.eval(s0))) / v.c[1]
        }
        _ => {
            // split where v changes sign or direction, then integrate each
            // smooth sign-constant span
            let mut cuts = vec![s0];
            cuts.extend(v.roots_in(s0, s1));
            cuts.extend(v.derivative().roots_in(s0, s1));
            cuts.push(s1);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
            let mut total = 0.0;
            for w in cuts.windows(2) {
                total += psi_integral_span(p, v, w[0], w[1]);
            }
            total
        }
    }
}

/// Integral of `psi(p, v)` over a span where `v` keeps one sign; `v` may
/// vanish at either endpoint, where panels are graded geometrically.
fn psi_integral_span(p: f64, v: &Poly, s0: f64, s1: f64) -> f64 {
    if s1 - s0 <= 0.0 {
        return 0.0;
    }
    let mid = 0.5 * (s0 + s1);
    let scale = v
        .eval(s0)
        .abs()
        .max(v.eval(s1).abs())
        .max(v.eval(mid).abs())
        .max(1e-300);
    let vanish0 = v.eval(s0).abs() <= 1e-12 * scale;
    let vanish1 = v.eval(s1).abs() <= 1e-12 * scale;
    let f = |t: f64| psi(p, v.eval(t));
    match (vanish0, vanish1) {
        (false, false) => gauss20(&f, s0, s1),
        (true, false) => graded_left(&f, s0, s1),
        (false, true) => graded_right(&f, s0, s1),
        (true, true) => graded_left(&f, s0, mid) + graded_right(&f, mid, s1),
    }
}

/// Panels shrinking geometrically toward the left end, where the integrand
/// loses smoothness.
fn graded_left(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    let mut b = hi;
    for _ in 0..48 {
        let a = lo + (b - lo) * 0.5;
        total += gauss20(f, a, b);
        b = a;
    }
    total + gauss20(f, lo, b)
}

fn graded_right(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    let mut a = lo;
    for _ in 0..48 {
        let b = hi - (hi - a) * 0.5;
        total += gauss20(f, a, b);
        a = b;
    }
    total + gauss20(f, a, hi)
}

/// Solve the Dirichlet problem by shooting. Flat problems only. Returns the
/// solution on `n_nodes` uniform nodes together with the matched constant.
pub fn dirichlet_shoot(spec: &ProblemSpec, n_nodes: usize) -> Result<(GridFunction, f64)> {
    spec.validate()?;
    if spec.weight_exponent != 0 || spec.natural_left {
        return Err(Error::BadSpec("shooting handles flat problems only".into()));
    }
    if n_nodes < 2 {
        return Err(Error::BadSpec("need at least two nodes".into()));
    }
    let (a, b) = (spec.a, spec.b);
    let (va, vb) = spec.bc;
    let p = spec.p;
    let big_f = spec.f.antiderivative(a)?;
    let (fmin, fmax) = big_f.range();

    // end value of the shot trajectory as a function of beta
    let reach = |beta: f64| -> f64 {
        let mut s = va;
        for (i, piece) in big_f.pieces().iter().enumerate() {
            let v = Poly::new([
                beta - piece.c[0],
                -piece.c[1],
                -piece.c[2],
                -piece.c[3],
            ]);
            s += integral_psi(p, &v, big_f.breaks()[i], big_f.breaks()[i + 1]);
        }
        s
    };

    let mut delta = 1.0;
    let (mut lo, mut hi) = (fmin - delta, fmax + delta);
    let mut bracketed = false;
    for _ in 0..64 {
        let (rlo, rhi) = (reach(lo), reach(hi));
        if !rlo.is_finite() || !rhi.is_finite() {
            return Err(Error::ShootOverflow { p });
        }
        if rlo <= vb && vb <= rhi {
            bracketed = true;
            break;
        }
        delta *= 2.0;
        if delta > 1e18 {
            break;
        }
        lo = fmin - delta;
        hi = fmax + delta;
    }
    if !bracketed {
        return Err(Error::ShootOverflow { p });
    }
    let mut beta = 0.5 * (lo + hi);
    for _ in 0..200 {
        beta = 0.5 * (lo + hi);
        let r = reach(beta);
        if !r.is_finite() {
            return Err(Error::ShootOverflow { p });
        }
        if (r - vb).abs() <= 1e-13 {
            break;
        }
        if r < vb {
            lo = beta;
        } else {
            hi = beta;
        }
    }
    let residual = (reach(beta) - vb).abs();
    if residual > 1e-12 {
        return Err(Error::SolverStall { residual, iterations: 200 });
    }

    // accumulate node values at the matched constant
    let h = (b - a) / (n_nodes - 1) as f64;
    let mut values = Vec::with_capacity(n_nodes);
    values.push(va);
    let mut acc = va;
    for i in 0..n_nodes - 1 {
        let (x0, x1) = (a + h * i as f64, (a + h * (i + 1) as f64).min(b));
        // split the cell at breakpoints of F
        let mut t0 = x0;
        let mut cell = 0.0;
        while t0 < x1 - 1e-15 {
            let idx = big_f
                .breaks()
                .partition_point(|&bk| bk <= t0 + MERGE_TOL)
                .saturating_sub(1)
                .min(big_f.pieces().len() - 1);
            let t1 = big_f.breaks()[idx + 1].min(x1);
            let piece = big_f.pieces()[idx];
            let v = Poly::new([
                beta - piece.c[0],
                -piece.c[1],
                -piece.c[2],
                -piece.c[3],
            ]);
            cell += integral_psi(p, &v, t0, t1);
            t0 = t1;
        }
        acc += cell;
        values.push(acc);
    }
    Ok((GridFunction { a, b, values }, beta))
}

// -------------------------------------------------------------------------
// obstacle problem

/// Uniform-grid discretization with exact cell averages of the weight and
/// dual-cell averages of the weighted datum.
struct Disc {
    h: f64,
    n: usize,
    p: f64,
    /// mean of t^nu over each of the n-1 cells
    cw: Vec<f64>,
    /// integral of t^nu over each dual cell
    m: Vec<f64>,
    /// integral of t^nu f over each dual cell
    fm: Vec<f64>,
    phi: Vec<f64>,
    bc: (f64, f64),
    natural_left: bool,
}

impl Disc {
    fn build(spec: &ProblemSpec, n_nodes: usize) -> Result<Disc> {
        let (a, b) = (spec.a, spec.b);
        let nu = spec.weight_exponent;
        let n = n_nodes;
        let h = (b - a) / (n - 1) as f64;
        let node = |i: usize| if i + 1 == n { b } else { a + h * i as f64 };
        let mut cw = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let w = if nu == 0 {
                1.0
            } else {
                let (x0, x1) = (node(i), node(i + 1));
                let e = nu as i32 + 1;
                (x1.powi(e) - x0.powi(e)) / (e as f64 * (x1 - x0))
            };
            if w <= 0.0 {
                return Err(Error::BadSpec("weight vanishes on a cell".into()));
            }
            cw.push(w);
        }
        let mut m = Vec::with_capacity(n);
        let mut fm = Vec::with_capacity(n);
        for i in 0..n {
            let lo = if i == 0 { a } else { node(i) - 0.5 * h };
            let hi = if i + 1 == n { b } else { node(i) + 0.5 * h };
            let mass = if nu == 0 {
                hi - lo
            } else {
                let e = nu as i32 + 1;
                (hi.powi(e) - lo.powi(e)) / e as f64
            };
            m.push(mass.max(f64::MIN_POSITIVE));
            fm.push(spec.f.integrate_weighted(nu, lo, hi));
        }
        let phi = match &spec.obstacle {
            Some(ob) => (0..n).map(|i| ob.eval(node(i).min(b))).collect(),
            None => vec![f64::NEG_INFINITY; n],
        };
        Ok(Disc {
            h,
            n,
            p: spec.p,
            cw,
            m,
            fm,
            phi,
            bc: spec.bc,
            natural_left: spec.natural_left,
        })
    }

    fn is_free_index(&self, i: usize) -> bool {
        (i > 0 || self.natural_left) && i + 1 < self.n
    }

    /// Flux balance at node i: positive when the discrete operator exceeds
    /// the load. Zero at an unconstrained solution.
    fn balance(&self, u: &[f64], i: usize, v: f64) -> f64 {
        let mut s = -self.fm[i];
        if i > 0 {
            s += self.cw[i - 1] * psi_inv(self.p, (v - u[i - 1]) / self.h);
        }
        if i + 1 < self.n {
            s -= self.cw[i] * psi_inv(self.p, (u[i + 1] - v) / self.h);
        }
        s
    }

    /// `balance` divided by S^(p-1), S the larger adjacent slope magnitude.
    /// Same sign everywhere, but sub-unit slopes keep full precision at
    /// large p, where their raw fluxes underflow to zero. Slopes below the
    /// node-value resolution are rounding dust, not geometry; measuring in
    /// their units would amplify noise into an O(1) residual on flat
    /// regions, so those nodes fall back to raw units.
    fn balance_scaled(&self, u: &[f64], i: usize, v: f64) -> f64 {
        let sl = if i > 0 { (v - u[i - 1]) / self.h } else { 0.0 };
        let sr = if i + 1 < self.n { (u[i + 1] - v) / self.h } else { 0.0 };
        let scale = sl.abs().max(sr.abs());
        let mag = v.abs().max(self.dust_magnitude(u, i));
        let dust = 6.4e-14 * (1.0 + mag) / self.h;
        if !(scale > dust && scale.is_finite()) {
            return self.balance(u, i, v);
        }
        let d = scale.powf(self.p - 1.0);
        let mut s = if self.fm[i] == 0.0 { 0.0 } else { -self.fm[i] / d };
        if i > 0 {
            s += self.cw[i - 1] * psi_inv(self.p, sl / scale);
        }
        if i + 1 < self.n {
            s -= self.cw[i] * psi_inv(self.p, sr / scale);
        }
        s
    }

    fn dust_magnitude(&self, u: &[f64], i: usize) -> f64 {
        let mut m = 0.0f64;
        if i > 0 {
            m = m.max(u[i - 1].abs());
        }
        if i + 1 < self.n {
            m = m.max(u[i + 1].abs());
        }
        m
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let p = self.p;
        let mut e = 0.0;
        for i in 0..self.n - 1 {
            let s = (u[i + 1] - u[i]) / self.h;
            e += self.h * self.cw[i] * s.abs().powf(p) / p;
        }
        for i in 0..self.n {
            e -= self.fm[i] * u[i];
        }
        e
    }

    /// One projected Gauss-Seidel sweep. Each node solves its scalar
    /// optimality condition exactly (to bisection accuracy), clamped at the
    /// obstacle.
    fn gs_sweep(&self, u: &mut [f64]) {
        let start = if self.natural_left { 0 } else { 1 };
        for i in start..self.n - 1 {
            let floor = self.phi[i];
            if floor.is_finite() && self.balance_scaled(u, i, floor) >= 0.0 {
                u[i] = floor;
                continue;
            }
            // bracket the root from the obstacle (or from below) upward
            let mut lo = if floor.is_finite() {
                floor
            } else {
                let mut lo = u[i];
                let mut step = self.h;
                while self.balance_scaled(u, i, lo) > 0.0 {
                    lo -= step;
                    step *= 2.0;
                    if step > 1e12 {
                        break;
                    }
                }
                lo
            };
            let mut hi = lo.max(u[i]);
            let mut step = self.h;
            while self.balance_scaled(u, i, hi) < 0.0 {
                hi += step;
                step *= 2.0;
                if step > 1e12 {
                    break;
                }
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.balance_scaled(u, i, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                    break;
                }
            }
            u[i] = 0.5 * (lo + hi);
        }
    }

    /// Energy restricted to the cells and loads a run [start, end) touches,
    /// with node values taken from `trial` inside the run and `u` outside.
    fn run_energy(&self, u: &[f64], trial: &[f64], start: usize, end: usize) -> f64 {
        let val = |i: usize| {
            if i >= start && i < end {
                trial[i - start]
            } else {
                u[i]
            }
        };
        let mut en = 0.0;
        for cell in start.saturating_sub(1)..end.min(self.n - 1) {
            let s = (val(cell + 1) - val(cell)) / self.h;
            en += self.h * self.cw[cell] * s.abs().powf(self.p) / self.p;
        }
        for i in start..end {
            en -= self.fm[i] * val(i);
        }
        en
    }

    /// Damped Newton step on the currently inactive set. Each contiguous run
    /// of free nodes is solved and line-searched against its own local
    /// energy, so a bad step on one run cannot hide behind progress on
    /// another. The run system is assembled with slopes scaled by their own
    /// maximum, as in `balance_scaled`: otherwise sub-unit slopes at large p
    /// underflow and the invertibility clamp swamps the real curvature.
    /// Returns true if any run accepted a step.
    fn newton_step(&self, u: &mut [f64]) -> bool {
        let p = self.p;
        let h = self.h;
        let free: Vec<bool> = (0..self.n)
            .map(|i| self.is_free_index(i) && u[i] > self.phi[i])
            .collect();
        let mut moved = false;
        let mut i = 0;
        while i < self.n {
            if !free[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < self.n && free[i] {
                i += 1;
            }
            let end = i; // run is [start, end)
            let len = end - start;
            // tridiagonal system J delta = -g on the run, each row divided
            // by its own scale^(p-1) as in `balance_scaled`; delta is
            // unchanged by the row equilibration and Thomas does not need
            // the symmetry it breaks
            let mut diag = vec![0.0; len];
            let mut lower = vec![0.0; len];
            let mut upper = vec![0.0; len];
            let mut rhs = vec![0.0; len];
            for (j, node) in (start..end).enumerate() {
                let sl = if node > 0 { (u[node] - u[node - 1]) / h } else { 0.0 };
                let sr = if node + 1 < self.n { (u[node + 1] - u[node]) / h } else { 0.0 };
                let mut scale = sl.abs().max(sr.abs());
                let mag = u[node].abs().max(self.dust_magnitude(u, node));
                let dust = 6.4e-14 * (1.0 + mag) / h;
                if !(scale > dust && scale.is_finite()) {
                    scale = 1.0;
                }
                let weight = |s: f64| {
                    let t = (p - 1.0) * (s / scale).abs().powf(p - 2.0);
                    let t = if t.is_finite() { t.min(1e12) } else { 1e12 };
                    t.max(1e-8) / scale
                };
                let mut d = 0.0;
                if node > 0 {
                    let w = self.cw[node - 1] * weight(sl) / h;
                    d += w;
                    if j > 0 {
                        lower[j] = -w;
                    }
                }
                if node + 1 < self.n {
                    let w = self.cw[node] * weight(sr) / h;
                    d += w;
                    if j + 1 < len {
                        upper[j] = -w;
                    }
                }
                diag[j] = d;
                rhs[j] = -self.balance_scaled(u, node, u[node]);
            }
            // Thomas elimination
            let mut delta = rhs;
            for j in 1..len {
                let w = lower[j] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                let prev = delta[j - 1];
                delta[j] -= w * prev;
            }
            delta[len - 1] /= diag[len - 1];
            for j in (0..len - 1).rev() {
                delta[j] = (delta[j] - upper[j] * delta[j + 1]) / diag[j];
            }
            let norm = delta.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
            if norm == 0.0 {
                continue;
            }
            // cap the step; degenerate rows can propose wild corrections
            let cap = 1.0;
            let scale = if norm > cap { cap / norm } else { 1.0 };
            let mut trial = vec![0.0; len];
            let e0 = {
                trial.copy_from_slice(&u[start..end]);
                self.run_energy(u, &trial, start, end)
            };
            let mut theta = scale;
            for _ in 0..30 {
                for j in 0..len {
                    trial[j] = (u[start + j] + theta * delta[j]).max(self.phi[start + j]);
                }
                let e1 = self.run_energy(u, &trial, start, end);
                if e1.is_finite() && e1 <= e0 + 1e-14 * (1.0 + e0.abs()) {
                    u[start..end].copy_from_slice(&trial);
                    moved = true;
                    break;
                }
                theta *= 0.5;
            }
        }
        moved
    }

    /// Max complementarity residual, in units of the datum. Measured on the
    /// scaled balance so that stages at large p cannot converge vacuously
    /// where every raw flux underflows.
    fn kkt_residual(&self, u: &[f64]) -> f64 {
        let mut res: f64 = 0.0;
        for i in 0..self.n {
            if !self.is_free_index(i) {
                continue;
            }
            let g = self.balance_scaled(u, i, u[i]);
            let r = if u[i] <= self.phi[i] { (-g).max(0.0) } else { g.abs() };
            res = res.max(r / self.m[i]);
        }
        res
    }

    fn initial(&self) -> Vec<f64> {
        let (va, vb) = self.bc;
        let mut u = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let t = i as f64 / (self.n - 1) as f64;
            let base = if self.natural_left { vb } else { va * (1.0 - t) + vb * t };
            u.push(base.max(self.phi[i]));
        }
        if !self.natural_left {
            u[0] = va;
        }
        u[self.n - 1] = vb;
        u
    }
}

/// Continuation ladder: start at p = 4 and double toward the target.
fn p_stages(p: f64) -> Vec<f64> {
    if p <= 4.0 {
        return vec![p];
    }
    let mut stages = Vec::new();
    let mut q = 4.0;
    while q < p {
        stages.push(q);
        q *= 2.0;
    }
    stages.push(p);
    stages
}

fn solve_stage(
    disc: &Disc,
    u: &mut [f64],
    tol: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<f64> {
    let max_rounds = 500;
    let mut res = f64::INFINITY;
    for round in 0..max_rounds {
        disc.gs_sweep(u);
        for _ in 0..6 {
            if !disc.newton_step(u) {
                break;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(disc.energy(u));
        }
        res = disc.kkt_residual(u);
        if res <= tol {
            return Ok(res);
        }
        // occasional extra sweeps help the active set settle
        if round % 8 == 7 {
            disc.gs_sweep(u);
        }
    }
    Err(Error::SolverStall { residual: res, iterations: max_rounds })
}

/// Solve the obstacle problem to the given complementarity tolerance.
pub fn obstacle_solve(spec: &ProblemSpec, n_nodes: usize, tol: f64) -> Result<GridFunction> {
    if spec.obstacle.is_none() {
        return Err(Error::BadSpec("obstacle solver needs an obstacle".into()));
    }
    obstacle_solve_from(spec, n_nodes, tol, None).map(|(g, _)| g)
}

/// Solve a Dirichlet problem with the iterative machinery. Covers the
/// weighted and natural-left-boundary cases that shooting does not;
/// prefer [`dirichlet_shoot`] for flat problems, which matches the flux
/// constant exactly.
pub fn dirichlet_iterative(spec: &ProblemSpec, n_nodes: usize, tol: f64) -> Result<GridFunction> {
    if spec.obstacle.is_some() {
        return Err(Error::BadSpec("use the obstacle solver when an obstacle is present".into()));
    }
    obstacle_solve_from(spec, n_nodes, tol, None).map(|(g, _)| g)
}

/// Same as [`obstacle_solve`], also reporting the energy after every
/// iteration round of the final continuation stage.
pub fn obstacle_solve_traced(
    spec: &ProblemSpec,
    n_nodes: usize,
    tol: f64,
) -> Result<(GridFunction, Vec<f64>)> {
    if spec.obstacle.is_none() {
        return Err(Error::BadSpec("obstacle solver needs an obstacle".into()));
    }
    obstacle_solve_from(spec, n_nodes, tol, None)
}

/// Continuation ladder in p at a fixed grid size.
fn run_ladder(
    spec: &ProblemSpec,
    n_nodes: usize,
    tol: f64,
    init: Option<&[f64]>,
    trace: &mut Vec<f64>,
) -> Result<Vec<f64>> {
    let mut u: Option<Vec<f64>> = init.map(|v| v.to_vec());
    let stages = p_stages(spec.p);
    let last = stages.len() - 1;
    for (si, &pk) in stages.iter().enumerate() {
        let stage_spec = ProblemSpec { p: pk, ..spec.clone() };
        let disc = Disc::build(&stage_spec, n_nodes)?;
        let mut v = match u.take() {
            Some(mut prev) => {
                for (i, val) in prev.iter_mut().enumerate() {
                    *val = val.max(disc.phi[i]);
                }
                if !disc.natural_left {
                    prev[0] = disc.bc.0;
                }
                prev[n_nodes - 1] = disc.bc.1;
                prev
            }
            None => disc.initial(),
        };
        let stage_tol = if si == last { tol } else { (tol * 10.0).min(1e-4) };
        // only the final stage's energies are reported
        let stage_trace = if si == last { Some(trace.as_mut()) } else { None };
        solve_stage(&disc, &mut v, stage_tol, stage_trace)?;
        u = Some(v);
    }
    Ok(u.unwrap())
}

/// Values of a coarse solution resampled onto an `m`-node grid.
fn resample(g: &GridFunction, m: usize) -> Vec<f64> {
    let h = (g.b - g.a) / (m - 1) as f64;
    (0..m)
        .map(|i| {
            let x = if i + 1 == m { g.b } else { g.a + h * i as f64 };
            g.eval(x)
        })
        .collect()
}

/// Warm-startable entry point used by the sweep drivers.
pub(crate) fn obstacle_solve_from(
    spec: &ProblemSpec,
    n_nodes: usize,
    tol: f64,
    init: Option<&[f64]>,
) -> Result<(GridFunction, Vec<f64>)> {
    spec.validate()?;
    if spec.p > MAX_ITERATIVE_P {
        return Err(Error::PTooLarge { p: spec.p, max: MAX_ITERATIVE_P });
    }
    if n_nodes < 3 {
        return Err(Error::BadSpec("need at least three nodes".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::BadSpec("tolerance must be positive".into()));
    }
    let mut trace = Vec::new();
    let mut warm: Option<Vec<f64>> = init.map(|v| v.to_vec());
    if warm.is_none() {
        // Cold starts on fine grids would spend one sweep per node letting
        // the active set creep outward; seed them through a coarse-to-fine
        // cascade instead.
        let mut sizes = Vec::new();
        let mut m = n_nodes;
        while m > 129 {
            m = (m - 1) / 2 + 1;
            sizes.push(m);
        }
        sizes.reverse();
        let mut coarse: Option<GridFunction> = None;
        for &m in &sizes {
            let seed = coarse.as_ref().map(|g| resample(g, m));
            let mut scratch = Vec::new();
            let v = run_ladder(spec, m, tol.max(1e-6), seed.as_deref(), &mut scratch)?;
            coarse = Some(GridFunction { a: spec.a, b: spec.b, values: v });
        }
        warm = coarse.map(|g| resample(&g, n_nodes));
    }
    let values = run_ladder(spec, n_nodes, tol, warm.as_deref(), &mut trace)?;
    Ok((GridFunction { a: spec.a, b: spec.b, values }, trace))
}

/// Discrete weighted p-Laplacian of a grid function, in the units of the
/// datum. `NaN` at Dirichlet boundary nodes, where the operator has no
/// two-sided stencil.
pub fn discrete_p_laplacian(u: &GridFunction, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let disc = Disc::build(spec, u.n_nodes())?;
    let v = &u.values;
    let mut out = vec![f64::NAN; disc.n];
    for i in 0..disc.n {
        if !disc.is_free_index(i) {
            continue;
        }
        let mut s = 0.0;
        if i > 0 {
            s += disc.cw[i - 1] * psi_inv(disc.p, (v[i] - v[i - 1]) / disc.h);
        }
        if i + 1 < disc.n {
            s -= disc.cw[i] * psi_inv(disc.p, (v[i + 1] - v[i]) / disc.h);
        }
        out[i] = s / disc.m[i];
    }
    Ok(out)
}

/// Nodes where the solution touches the obstacle, as intervals. Single-node
/// gaps inside a contact run are bridged.
pub fn coincidence_set(u: &GridFunction, phi: &PiecewisePoly, gap_tol: f64) -> IntervalSet {
    let n = u.n_nodes();
    let mut on: Vec<bool> = (0..n)
        .map(|i| u.values[i] - phi.eval(u.node(i)) <= gap_tol)
        .collect();
    for i in 1..n - 1 {
        if !on[i] && on[i - 1] && on[i + 1] {
            on[i] = true;
        }
    }
    let mut iv = Vec::new();
    let mut i = 0;
    while i < n {
        if on[i] {
            let start = i;
            while i < n && on[i] {
                i += 1;
            }
            iv.push((u.node(start), u.node(i - 1)));
        } else {
            i += 1;
        }
    }
    IntervalSet::new(iv)
}

/// Two-sided bound check on the discrete operator of an obstacle solution:
/// the datum from below, the obstacle's operator (or the datum) from above.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OperatorBounds {
    pub lower_violation: f64,
    pub upper_violation: f64,
    pub ok: bool,
}

pub fn lewy_stampacchia_check(
    u: &GridFunction,
    spec: &ProblemSpec,
    tol: f64,
) -> Result<OperatorBounds> {
    let phi = spec
        .obstacle
        .as_ref()
        .ok_or_else(|| Error::BadSpec("bound check needs an obstacle".into()))?;
    let disc = Disc::build(spec, u.n_nodes())?;
    let lp_u = discrete_p_laplacian(u, spec)?;
    let phi_grid = GridFunction {
        a: spec.a,
        b: spec.b,
        values: (0..u.n_nodes()).map(|i| phi.eval(u.node(i))).collect(),
    };
    let lp_phi = discrete_p_laplacian(&phi_grid, spec)?;
    let mut lower: f64 = 0.0;
    let mut upper: f64 = 0.0;
    for i in 0..u.n_nodes() {
        if lp_u[i].is_nan() {
            continue;
        }
        let fi = disc.fm[i] / disc.m[i];
        lower = lower.max(fi - lp_u[i]);
        upper = upper.max(lp_u[i] - fi.max(lp_phi[i]));
    }
    Ok(OperatorBounds { lower_violation: lower, upper_violation: upper, ok: lower <= tol && upper <= tol })
}

/// Solve a family of obstacle problems (same data, increasing p) and bracket
/// the limit contact set: `lo` is the intersection and `hi` the union of the
/// contact sets over the larger half of the family. `stable` reports whether
/// `hi` is contained in `lo` fattened by one mesh width, i.e. whether the
/// family has settled at this resolution.
pub fn gamma_infty_estimate(
    specs: &[ProblemSpec],
    n_nodes: usize,
    gap_tol: f64,
) -> Result<(IntervalSet, IntervalSet, bool)> {
    if specs.len() < 3 {
        return Err(Error::BadSpec("need at least three values of p".into()));
    }
    for w in specs.windows(2) {
        if w[1].p <= w[0].p {
            return Err(Error::BadSpec("p values must increase".into()));
        }
    }
    let tail = specs.len().div_ceil(2);
    let mut sets = Vec::with_capacity(specs.len());
    let mut warm: Option<Vec<f64>> = None;
    for spec in specs {
        let (u, _) = obstacle_solve_from(spec, n_nodes, 1e-8, warm.as_deref())?;
        let phi = spec.obstacle.as_ref().unwrap();
        sets.push(coincidence_set(&u, phi, gap_tol));
        warm = Some(u.values);
    }
    let tail_sets = &sets[sets.len() - tail..];
    let mut lo = tail_sets[0].clone();
    let mut hi = tail_sets[0].clone();
    for s in &tail_sets[1..] {
        lo = lo.intersect(s);
        hi = hi.union(s);
    }
    let h = (specs[0].b - specs[0].a) / (n_nodes - 1) as f64;
    // degenerate specks have empty interior; ignore them for stability
    let solid = IntervalSet::new(
        hi.intervals()
            .iter()
            .copied()
            .filter(|&(x0, x1)| x1 - x0 > MERGE_TOL)
            .collect(),
    );
    let stable = solid.is_subset_of(&lo.dilate(h), MERGE_TOL);
    Ok((lo, hi, stable))
}
