//! Seven worked examples with closed-form solutions, both at finite p and in
//! the limit. They pin down every branch of the solvers and the limit
//! construction: detached profiles, plateau thresholds, tangency to a
//! quadratic obstacle, contact that switches on only beyond a finite p, and
//! radial problems with and without datum.
//!
//! Examples 1 to 5 are one-dimensional; 6 and 7 live on a ball of radius 2.
//! Example 7's finite-p profile is one-dimensional only (its limit holds in
//! any dimension).

use crate::limit::{obstacle_limit, radial_limit, LimitFunction};
use crate::piecewise::{IntervalSet, PiecewisePoly, Poly};
use crate::psolver::ProblemSpec;
use crate::radial::RadialSpec;
use crate::{Error, Result};

/// Which worked example, together with the space dimension for the radial
/// ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExampleId {
    id: u8,
    n: u32,
}

impl ExampleId {
    /// Examples 1 to 7 with their default dimensions (1 for the flat ones,
    /// 2 for example 6, 1 for example 7).
    pub fn new(id: u8) -> Result<Self> {
        let n = match id {
            1..=5 => 1,
            6 => 2,
            7 => 1,
            _ => return Err(Error::BadSpec(format!("no example {id}"))),
        };
        Ok(ExampleId { id, n })
    }

    /// Override the dimension of a radial example.
    pub fn with_dimension(id: u8, n: u32) -> Result<Self> {
        let mut ex = Self::new(id)?;
        if n == 0 {
            return Err(Error::BadSpec("dimension must be at least 1".into()));
        }
        if ex.id < 6 && n != 1 {
            return Err(Error::BadSpec(format!("example {id} is one-dimensional")));
        }
        ex.n = n;
        Ok(ex)
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn is_radial(&self) -> bool {
        self.id >= 6
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.id {
            1..=3 => (0.0, 3.0),
            4 => (-2.0, 2.0),
            5 => (-1.0, 1.0),
            _ => (0.0, 2.0),
        }
    }
}

/// Matched constants of a worked example at finite p.
#[derive(Clone, Copy, Debug)]
pub struct Constants {
    /// Contact endpoint (or tangency point) when the obstacle is touched.
    pub c: Option<f64>,
    /// Second constant of example 7 (the contact radius).
    pub h: Option<f64>,
    /// Whether the obstacle is touched at this p.
    pub contact: bool,
    /// The derived quantity that converges to a known limit, computed in a
    /// well-conditioned variable.
    pub gauge: Option<f64>,
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let glo = g(lo);
    let ghi = g(hi);
    if !glo.is_finite() || !ghi.is_finite() {
        return Err(Error::NoRoot { lo, hi });
    }
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if (glo > 0.0) == (ghi > 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    let neg_at_lo = glo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn e1_residual(p: f64, c: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    c.powf(b) + c.powf(b + 1.0) / (b + 1.0) - 2.0 * (0.5 - c).powf(b + 1.0) / (b + 1.0)
}

fn e1_constant(p: f64) -> Result<f64> {
    bisect(|c| e1_residual(p, c), 1e-300, 0.5)
}

/// Matching condition of the unconstrained Dirichlet counterpart of
/// example 1, written in the boundary slope s: the flux constant is
/// s^(p-1), which underflows at large p while s tends to 1/2.
fn e1_dirichlet_residual(p: f64, s: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    s + s.powf(p) / (b + 1.0) - (0.5 - s.powf(p - 1.0)).powf(b + 1.0) / (b + 1.0)
}

pub fn dirichlet_slope_e1(p: f64) -> Result<f64> {
    bisect(|s| e1_dirichlet_residual(p, s), 1e-300, 0.5)
}

fn e2_residual(p: f64, t: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    2.0 * t + t.powf(p) / (b + 1.0) - 0.5
}

/// Example 2 solved in the gauge variable t = (1-c)^(1/(p-1)); c itself is
/// 1 - t^(p-1), which underflows to 1 at large p while t stays put.
fn e2_constant(p: f64) -> Result<f64> {
    bisect(|t| e2_residual(p, t), 0.0, 1.0)
}

fn e3_residual(p: f64, s: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    -s.powf(b) + (1.0 - s).powf(b + 1.0) / (b + 1.0) - 2.0 * s.powf(b + 1.0) / (b + 1.0)
}

/// Example 3 solved in s = 1 - c.
fn e3_constant(p: f64) -> Result<f64> {
    bisect(|s| e3_residual(p, s), 1e-300, 1.0)
}

fn e4_residual(p: f64, c: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    let q = (2.0 * c).powf(p - 1.0);
    c * c + 1.0 - 3.0 * c
        - ((0.5 + q).powf(b + 1.0) - (2.0 * c).powf(p)) / (b + 1.0)
}

fn e4_constant(p: f64) -> Result<f64> {
    bisect(|c| e4_residual(p, c), 1e-12, 0.5)
}

/// Example 5 touches its obstacle only when the unconstrained solution dips
/// below the vertex of the parabola.
pub fn e5_has_contact(p: f64) -> bool {
    let b = 1.0 / (p - 1.0);
    let m = (1.0f64 / 3.0).powf(b);
    m * (2.0 / 3.0 + 1.0 / (3.0 * (b + 1.0))) > 0.75
}

fn e5_residual(p: f64, c: f64) -> f64 {
    let b = 1.0 / (p - 1.0);
    let q = (1.5 * c).powf(p - 1.0);
    0.75 * (c * c - 1.0)
        - ((1.5 * c).powf(p)
            - (1.0 / 3.0 + q - c).powf(b) * (1.0 + q - c + 2.0 * b / 3.0))
            / (b + 1.0)
}

fn e5_constant(p: f64) -> Result<f64> {
    bisect(|c| e5_residual(p, c), 1e-12, 1.0 / 3.0 - 1e-15)
}

fn e6_residual(p: f64, n: u32, c: f64) -> f64 {
    let a = (n - 1) as f64 / (p - 1.0);
    (1.0 + a) * c * c - 2.0f64.powf(2.0 - a) * c.powf(1.0 + a) + 1.0 - a
}

fn e6_constant(p: f64, n: u32) -> Result<f64> {
    if p <= n as f64 {
        return Err(Error::BadSpec(format!("example 6 needs p > n, got p = {p}, n = {n}")));
    }
    bisect(|c| e6_residual(p, n, c), 1e-12, 1.0)
}

/// Example 7: contact radius h and kink c solve a pair of matching
/// conditions. The inner equation is monotone in c, so the pair is solved by
/// bisection on h with an inner bisection for c.
fn e7_pair(p: f64) -> Result<(f64, f64)> {
    let b = 1.0 / (p - 1.0);
    let inner = |h: f64| -> Result<f64> {
        let gi = |c: f64| (c - h).powf(b) - 2.0 * h;
        if gi(2.0) < 0.0 {
            Ok(2.0)
        } else {
            bisect(gi, h + 1e-300, 2.0)
        }
    };
    let outer = |h: f64| -> Result<f64> {
        let c = inner(h)?;
        Ok((c - h).powf(b + 1.0) - (2.0 - c).powf(b + 1.0) - (b + 1.0) * (1.0 - h * h))
    };
    // the outer residual is continuous and changes sign on (0, 1)
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    let glo = outer(lo)?;
    let ghi = outer(hi)?;
    if (glo > 0.0) == (ghi > 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    let neg_at_lo = glo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = outer(mid)?;
        if (gm < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = 0.5 * (lo + hi);
    Ok((h, inner(h)?))
}

/// Solve the matching conditions of a worked example at finite p.
pub fn solve_constant(ex: ExampleId, p: f64) -> Result<Constants> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadSpec(format!("p = {p} must be finite and > 1")));
    }
    let b = 1.0 / (p - 1.0);
    let out = match ex.id {
        1 => {
            let c = e1_constant(p)?;
            Constants { c: Some(c), h: None, contact: true, gauge: Some(c.powf(b)) }
        }
        2 => {
            let t = e2_constant(p)?;
            let c = 1.0 - t.powf(p - 1.0);
            Constants { c: Some(c), h: None, contact: true, gauge: Some(t) }
        }
        3 => {
            let s = e3_constant(p)?;
            Constants {
                c: Some(1.0 - s),
                h: None,
                contact: true,
                gauge: Some(s.powf(b)),
            }
        }
        4 => {
            let c = e4_constant(p)?;
            Constants { c: Some(c), h: None, contact: true, gauge: Some(c) }
        }
        5 => {
            if !e5_has_contact(p) {
                Constants { c: None, h: None, contact: false, gauge: None }
            } else {
                let c = e5_constant(p)?;
                Constants { c: Some(c), h: None, contact: true, gauge: Some(c) }
            }
        }
        6 => {
            let c = e6_constant(p, ex.n)?;
            Constants { c: Some(c), h: None, contact: true, gauge: Some(c) }
        }
        7 => {
            if ex.n != 1 {
                return Err(Error::BadSpec(
                    "example 7 has closed-form constants in one dimension only".into(),
                ));
            }
            let (h, c) = e7_pair(p)?;
            Constants { c: Some(c), h: Some(h), contact: true, gauge: Some(c) }
        }
        _ => unreachable!(),
    };
    Ok(out)
}

fn check_domain(ex: ExampleId, x: f64) -> Result<()> {
    let (lo, hi) = ex.domain();
    if x < lo - 1e-12 || x > hi + 1e-12 {
        return Err(Error::OutsideDomain { x, lo, hi });
    }
    Ok(())
}

/// Closed-form solution of a worked example at finite p. For the radial
/// examples `x` is the radius.
pub fn closed_form_up(ex: ExampleId, p: f64, x: f64) -> Result<f64> {
    check_domain(ex, x)?;
    let b = 1.0 / (p - 1.0);
    let v = match ex.id {
        1 => {
            let c = e1_constant(p)?;
            if x <= 1.0 {
                c.powf(b) * x
            } else if x <= c + 1.0 {
                -(c + 1.0 - x).powf(b + 1.0) / (b + 1.0) + c.powf(b) + c.powf(b + 1.0) / (b + 1.0)
            } else if x <= 1.5 {
                -(x - c - 1.0).powf(b + 1.0) / (b + 1.0) + c.powf(b) + c.powf(b + 1.0) / (b + 1.0)
            } else if x <= 2.0 - c {
                (2.0 - c - x).powf(b + 1.0) / (b + 1.0)
            } else {
                0.0
            }
        }
        2 => {
            let t = e2_constant(p)?;
            let s = ((b + 1.0) / 2.0).powf(1.0 / (b + 1.0));
            let c = 1.0 - t.powf(p - 1.0);
            if x <= s {
                ((s - x).powf(b + 1.0) - (b + 1.0) / 2.0) / (b + 1.0)
            } else if x <= c {
                -0.5
            } else if x <= 1.0 {
                -0.5 + (x - c).powf(b + 1.0) / (b + 1.0)
            } else {
                t * (x - 3.0)
            }
        }
        3 => {
            let s = e3_constant(p)?;
            let c = 1.0 - s;
            let sb = s.powf(b);
            if x <= c {
                (c.powf(b + 1.0) - (c - x).powf(b + 1.0)) / (b + 1.0)
            } else if x <= 1.0 {
                (c.powf(b + 1.0) - (x - c).powf(b + 1.0)) / (b + 1.0)
            } else if x <= 2.0 {
                (1.0 - x) * sb + (c.powf(b + 1.0) - s.powf(b + 1.0)) / (b + 1.0)
            } else if x <= 3.0 - c {
                (3.0 - x - c).powf(b + 1.0) / (b + 1.0)
            } else {
                0.0
            }
        }
        4 => {
            let c = e4_constant(p)?;
            let q = (2.0 * c).powf(p - 1.0);
            let x = x.abs();
            if x <= c {
                1.0 - x * x
            } else if x <= 1.5 {
                -2.0 * c * x + 1.0 + c * c
            } else {
                (-(x - 1.5 + q).powf(b + 1.0) + (0.5 + q).powf(b + 1.0)) / (b + 1.0)
            }
        }
        5 => {
            let x = x.abs();
            if !e5_has_contact(p) {
                // unconstrained: the obstacle is never reached
                let m = (1.0f64 / 3.0).powf(b);
                if x <= 1.0 / 3.0 {
                    -m * (2.0 / 3.0 + (1.0 / 3.0) / (b + 1.0)) + x.powf(b + 1.0) / (b + 1.0)
                } else {
                    m * (x - 1.0)
                }
            } else {
                let c = e5_constant(p)?;
                let q = (1.5 * c).powf(p - 1.0);
                let a_val = 1.0 / 3.0 + q - c;
                if x <= c {
                    0.75 * (x * x - 1.0)
                } else if x <= 1.0 / 3.0 {
                    ((x + q - c).powf(b + 1.0) - a_val.powf(b) * (1.0 + q - c + 2.0 * b / 3.0))
                        / (b + 1.0)
                } else {
                    a_val.powf(b) * (x - 1.0)
                }
            }
        }
        6 => {
            let a = (ex.n - 1) as f64 / (p - 1.0);
            let c = e6_constant(p, ex.n)?;
            let x = x.abs();
            if x <= c {
                1.0 - x * x
            } else {
                -2.0 * c.powf(1.0 + a) / (1.0 - a) * (x.powf(1.0 - a) - 2.0f64.powf(1.0 - a))
            }
        }
        7 => {
            if ex.n != 1 {
                return Err(Error::BadSpec(
                    "example 7 has a closed-form profile in one dimension only".into(),
                ));
            }
            let (h, c) = e7_pair(p)?;
            let x = x.abs();
            if x <= h {
                1.0 - x * x
            } else if x <= c {
                ((c - x).powf(b + 1.0) - (2.0 - c).powf(b + 1.0)) / (b + 1.0)
            } else {
                ((x - c).powf(b + 1.0) - (2.0 - c).powf(b + 1.0)) / (b + 1.0)
            }
        }
        _ => unreachable!(),
    };
    Ok(v)
}

/// Closed-form limit profile of a worked example.
pub fn closed_form_limit(ex: ExampleId, x: f64) -> Result<f64> {
    check_domain(ex, x)?;
    let v = match ex.id {
        1 | 3 => {
            if x <= 1.0 {
                x
            } else if x <= 2.0 {
                2.0 - x
            } else {
                0.0
            }
        }
        2 => {
            if x <= 0.5 {
                -x
            } else if x <= 1.0 {
                -0.5
            } else {
                (x - 3.0) / 4.0
            }
        }
        4 => {
            let c = (3.0 - 7.0f64.sqrt()) / 2.0;
            let x = x.abs();
            if x <= c {
                1.0 - x * x
            } else if x <= 1.5 {
                -2.0 * c * x + 1.0 + c * c
            } else {
                2.0 - x
            }
        }
        5 => {
            let x = x.abs();
            if x <= 1.0 / 3.0 {
                0.75 * (x * x - 1.0)
            } else {
                x - 1.0
            }
        }
        6 => {
            let h = 2.0 - 3.0f64.sqrt();
            let x = x.abs();
            if x <= h {
                1.0 - x * x
            } else {
                -2.0 * h * x + 4.0 * h
            }
        }
        7 => {
            let x = x.abs();
            if x <= 0.5 {
                1.0 - x * x
            } else if x <= 13.0 / 8.0 {
                1.25 - x
            } else {
                x - 2.0
            }
        }
        _ => unreachable!(),
    };
    Ok(v)
}

/// A second admissible limit candidate for example 6: glued to the obstacle
/// on a larger set, affine down to zero, then flat. It is a uniform limit of
/// nothing; the solutions select the profile in [`closed_form_limit`]
/// instead.
pub fn v_star_example6(x: f64) -> f64 {
    let x = x.abs();
    if x <= 0.5 {
        1.0 - x * x
    } else if x <= 1.25 {
        1.25 - x
    } else {
        0.0
    }
}

/// Limit of the positive part of the unconstrained Dirichlet counterpart of
/// example 1 (zero boundary values, same datum, no obstacle).
pub fn u_plus_dirichlet_limit_e1() -> PiecewisePoly {
    PiecewisePoly::new(
        vec![0.0, 1.0, 1.5, 3.0],
        vec![
            Poly::new([0.0, 0.5, 0.0, 0.0]),
            Poly::new([1.5, -1.0, 0.0, 0.0]),
            Poly::constant(0.0),
        ],
    )
    .unwrap()
}

/// Closed-form solution of the unconstrained Dirichlet counterpart of
/// example 1 at finite p; antisymmetric about the midpoint.
pub fn closed_form_dirichlet_e1(p: f64, x: f64) -> Result<f64> {
    let ex = ExampleId::new(1)?;
    check_domain(ex, x)?;
    let b = 1.0 / (p - 1.0);
    let s = dirichlet_slope_e1(p)?;
    let c = s.powf(p - 1.0);
    let sp = s.powf(p);
    let half = |y: f64| -> f64 {
        if y <= 1.0 {
            s * y
        } else if y <= 1.0 + c {
            s + (sp - (c + 1.0 - y).powf(b + 1.0)) / (b + 1.0)
        } else {
            s + (sp - (y - 1.0 - c).powf(b + 1.0)) / (b + 1.0)
        }
    };
    Ok(if x <= 1.5 { half(x) } else { -half(3.0 - x) })
}

/// The problem data of a worked example at finite p.
#[derive(Clone, Debug)]
pub enum Problem {
    Flat(ProblemSpec),
    Radial(RadialSpec),
}

/// Data shared by the limit construction and the contact-set estimators.
#[derive(Clone, Debug)]
pub struct LimitData {
    pub domain: (f64, f64),
    /// Datum f (flat) or radial datum g.
    pub datum: PiecewisePoly,
    pub obstacle: PiecewisePoly,
    /// The limit contact set.
    pub gamma: IntervalSet,
    /// Dimension for the radial examples.
    pub dimension: Option<u32>,
}

fn steps(lo: f64, hi: f64, s: &[(f64, f64, f64)]) -> PiecewisePoly {
    PiecewisePoly::from_steps(lo, hi, s).unwrap()
}

/// Datum, obstacle, and limit contact set of a worked example.
pub fn example_data(ex: ExampleId) -> LimitData {
    let third = 1.0 / 3.0;
    match ex.id {
        1 => LimitData {
            domain: (0.0, 3.0),
            datum: steps(0.0, 3.0, &[(1.0, 1.5, 1.0), (1.5, 2.0, -1.0)]),
            obstacle: PiecewisePoly::constant(0.0, 3.0, 0.0).unwrap(),
            gamma: IntervalSet::interval(2.0, 3.0),
            dimension: None,
        },
        2 => LimitData {
            domain: (0.0, 3.0),
            datum: steps(0.0, 3.0, &[(0.0, 1.0, -1.0)]),
            obstacle: PiecewisePoly::constant(0.0, 3.0, -0.5).unwrap(),
            gamma: IntervalSet::interval(0.5, 1.0),
            dimension: None,
        },
        3 => LimitData {
            domain: (0.0, 3.0),
            datum: steps(0.0, 3.0, &[(0.0, 1.0, 1.0), (2.0, 3.0, -1.0)]),
            obstacle: PiecewisePoly::constant(0.0, 3.0, 0.0).unwrap(),
            gamma: IntervalSet::interval(2.0, 3.0),
            dimension: None,
        },
        4 => {
            let c = (3.0 - 7.0f64.sqrt()) / 2.0;
            LimitData {
                domain: (-2.0, 2.0),
                datum: steps(-2.0, 2.0, &[(-2.0, -1.5, 1.0), (1.5, 2.0, 1.0)]),
                obstacle: PiecewisePoly::from_poly(-2.0, 2.0, Poly::new([1.0, 0.0, -1.0, 0.0]))
                    .unwrap(),
                gamma: IntervalSet::interval(-c, c),
                dimension: None,
            }
        }
        5 => LimitData {
            domain: (-1.0, 1.0),
            datum: steps(-1.0, 1.0, &[(-third, third, -1.0)]),
            obstacle: PiecewisePoly::from_poly(-1.0, 1.0, Poly::new([-0.75, 0.0, 0.75, 0.0]))
                .unwrap(),
            gamma: IntervalSet::interval(-third, third),
            dimension: None,
        },
        6 => LimitData {
            domain: (0.0, 2.0),
            datum: PiecewisePoly::constant(0.0, 2.0, 0.0).unwrap(),
            obstacle: PiecewisePoly::from_poly(0.0, 2.0, Poly::new([1.0, 0.0, -1.0, 0.0]))
                .unwrap(),
            gamma: IntervalSet::interval(0.0, 2.0 - 3.0f64.sqrt()),
            dimension: Some(ex.n),
        },
        7 => LimitData {
            domain: (0.0, 2.0),
            datum: PiecewisePoly::constant(0.0, 2.0, -1.0).unwrap(),
            obstacle: PiecewisePoly::from_poly(0.0, 2.0, Poly::new([1.0, 0.0, -1.0, 0.0]))
                .unwrap(),
            gamma: IntervalSet::interval(0.0, 0.5),
            dimension: Some(ex.n),
        },
        _ => unreachable!(),
    }
}

/// The worked example as a solvable problem at finite p.
pub fn example_problem(ex: ExampleId, p: f64) -> Result<Problem> {
    let d = example_data(ex);
    Ok(match d.dimension {
        None => Problem::Flat(ProblemSpec::flat(
            d.domain.0,
            d.domain.1,
            d.datum,
            Some(d.obstacle),
            (0.0, 0.0),
            p,
        )?),
        Some(n) => Problem::Radial(RadialSpec {
            n,
            r1: d.domain.0,
            r2: d.domain.1,
            g: d.datum,
            obstacle: Some(d.obstacle),
            p,
        }),
    })
}

/// Build the limit profile of a worked example through the general
/// construction (not from its closed form).
pub fn construct_limit(ex: ExampleId) -> Result<LimitFunction> {
    let d = example_data(ex);
    match d.dimension {
        None => obstacle_limit(&d.datum, &d.obstacle, &d.gamma),
        Some(n) => radial_limit(&d.datum, &d.obstacle, n, d.domain.0, d.domain.1, &d.gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: u8) -> ExampleId {
        ExampleId::new(id).unwrap()
    }

    // Constants frozen from an independent high-precision solve of the same
    // matching conditions.
    #[test]
    fn example1_constant_ladder() {
        let frozen = [
            (4.0, 8.407483e-2),
            (8.0, 5.526844e-2),
            (16.0, 3.559925e-2),
            (32.0, 2.232295e-2),
            (64.0, 1.363629e-2),
            (128.0, 8.138350e-3),
            (256.0, 4.761347e-3),
            (512.0, 2.739292e-3),
            (1024.0, 1.553935e-3),
        ];
        for (p, want) in frozen {
            let c = solve_constant(ex(1), p).unwrap().c.unwrap();
            assert!((c - want).abs() < 1e-8, "p = {p}: {c} vs {want}");
        }
    }

    #[test]
    fn constants_at_large_p_approach_their_limits() {
        let p = 1024.0;
        let c4 = solve_constant(ex(4), p).unwrap().c.unwrap();
        assert!((c4 - 0.17743681).abs() < 1e-7);
        let c5 = solve_constant(ex(5), p).unwrap().c.unwrap();
        assert!((c5 - 0.32678).abs() < 2e-5);
        let c6 = solve_constant(ex(6), p).unwrap().c.unwrap();
        assert!((c6 - 0.26830).abs() < 2e-5);
        let k7 = solve_constant(ex(7), p).unwrap();
        assert!((k7.h.unwrap() - 0.50006).abs() < 2e-5);
        assert!((k7.c.unwrap() - 1.62512).abs() < 2e-5);
        let t2 = solve_constant(ex(2), p).unwrap().gauge.unwrap();
        assert!((t2 - 0.25).abs() < 1e-4);
        let s3 = solve_constant(ex(3), p).unwrap().c.unwrap();
        assert!((s3 - 0.99825).abs() < 2e-5);
    }

    #[test]
    fn constants_at_small_p_match_frozen_values() {
        let c1 = solve_constant(ex(1), 6.0).unwrap().c.unwrap();
        assert!((c1 - 0.06589).abs() < 1.5e-5);
        let c5 = solve_constant(ex(5), 6.0).unwrap().c.unwrap();
        assert!((c5 - 0.00728).abs() < 1.5e-5);
        let k7 = solve_constant(ex(7), 6.0).unwrap();
        assert!((k7.h.unwrap() - 0.51306).abs() < 1.5e-5);
        assert!((k7.c.unwrap() - 1.65061).abs() < 1.5e-5);
        let c1b = solve_constant(ex(1), 40.0).unwrap().c.unwrap();
        assert!((c1b - 0.01910).abs() < 1.5e-5);
        let c5b = solve_constant(ex(5), 40.0).unwrap().c.unwrap();
        assert!((c5b - 0.24818).abs() < 1.5e-5);
    }

    #[test]
    fn solved_constants_zero_their_residuals() {
        for p in [4.0, 32.0, 1024.0] {
            let c1 = solve_constant(ex(1), p).unwrap().c.unwrap();
            assert!(e1_residual(p, c1).abs() < 1e-13);
            let t = solve_constant(ex(2), p).unwrap().gauge.unwrap();
            assert!(e2_residual(p, t).abs() < 1e-13);
            let c3 = solve_constant(ex(3), p).unwrap().c.unwrap();
            assert!(e3_residual(p, 1.0 - c3).abs() < 1e-13);
            let c4 = solve_constant(ex(4), p).unwrap().c.unwrap();
            assert!(e4_residual(p, c4).abs() < 1e-13);
            let c5 = solve_constant(ex(5), p).unwrap();
            if let Some(c5) = c5.c {
                assert!(e5_residual(p, c5).abs() < 1e-13);
            }
            let c6 = solve_constant(ex(6), p).unwrap().c.unwrap();
            assert!(e6_residual(p, 2, c6).abs() < 1e-13);
            let k7 = solve_constant(ex(7), p).unwrap();
            let (h, c) = (k7.h.unwrap(), k7.c.unwrap());
            let b = 1.0 / (p - 1.0);
            assert!(((c - h).powf(b) - 2.0 * h).abs() < 1e-12);
            let second =
                (c - h).powf(b + 1.0) - (2.0 - c).powf(b + 1.0) - (b + 1.0) * (1.0 - h * h);
            assert!(second.abs() < 1e-12);
            let sd = dirichlet_slope_e1(p).unwrap();
            assert!(e1_dirichlet_residual(p, sd).abs() < 1e-13);
        }
    }

    #[test]
    fn contact_switches_on_at_finite_p() {
        assert!(!e5_has_contact(4.0));
        assert!(!e5_has_contact(5.0));
        assert!(e5_has_contact(6.5));
        assert!(e5_has_contact(100.0));
        let k = solve_constant(ex(5), 4.0).unwrap();
        assert!(!k.contact);
        assert!(k.c.is_none());
        // the profile still exists without contact
        let v = closed_form_up(ex(5), 4.0, 0.0).unwrap();
        assert!(v > -0.75 && v < 0.0);
    }

    #[test]
    fn closed_forms_are_continuous_and_zero_on_the_boundary() {
        let p = 8.0;
        for id in 1..=7u8 {
            let e = ex(id);
            let (lo, hi) = e.domain();
            let m = 4001;
            let mut prev = None;
            let mut max_jump: f64 = 0.0;
            for k in 0..=m {
                let x = lo + (hi - lo) * k as f64 / m as f64;
                let v = closed_form_up(e, p, x).unwrap();
                if let Some(pv) = prev {
                    max_jump = max_jump.max((v - pv) as f64).max(pv - v);
                }
                prev = Some(v);
            }
            let grid = (hi - lo) / m as f64;
            assert!(max_jump < 6.0 * grid, "example {id}: jump {max_jump}");
            // outer boundary value
            let vb = closed_form_up(e, p, hi).unwrap();
            assert!(vb.abs() < 1e-12, "example {id}: boundary value {vb}");
        }
    }

    #[test]
    fn closed_forms_stay_above_their_obstacles() {
        let p = 8.0;
        for id in 1..=7u8 {
            let e = ex(id);
            let d = example_data(e);
            let (lo, hi) = e.domain();
            for k in 0..=2000 {
                let x = lo + (hi - lo) * k as f64 / 2000.0;
                let up = closed_form_up(e, p, x).unwrap();
                let phi = d.obstacle.eval(x);
                assert!(up >= phi - 1e-12, "example {id} at {x}: {up} < {phi}");
            }
        }
    }

    #[test]
    fn constructed_limits_match_their_closed_forms() {
        for id in 1..=7u8 {
            let e = ex(id);
            let u = construct_limit(e).unwrap();
            let (lo, hi) = e.domain();
            for k in 0..=400 {
                let x = lo + (hi - lo) * k as f64 / 400.0;
                let want = closed_form_limit(e, x).unwrap();
                let got = u.eval(x);
                assert!(
                    (got - want).abs() < 1e-9,
                    "example {id} at {x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn closed_form_up_converges_toward_the_limit() {
        for id in 1..=7u8 {
            let e = ex(id);
            let (lo, hi) = e.domain();
            let dist = |p: f64| -> f64 {
                (0..=1000)
                    .map(|k| {
                        let x = lo + (hi - lo) * k as f64 / 1000.0;
                        (closed_form_up(e, p, x).unwrap() - closed_form_limit(e, x).unwrap())
                            .abs()
                    })
                    .fold(0.0, f64::max)
            };
            let d10 = dist(10.0);
            let d80 = dist(80.0);
            assert!(d80 < d10, "example {id}: {d80} !< {d10}");
            assert!(d80 < 0.08, "example {id}: {d80}");
        }
    }

    #[test]
    fn dirichlet_counterpart_is_antisymmetric() {
        let p = 8.0;
        for k in 0..=100 {
            let x = 3.0 * k as f64 / 100.0;
            let u = closed_form_dirichlet_e1(p, x).unwrap();
            let v = closed_form_dirichlet_e1(p, 3.0 - x).unwrap();
            assert!((u + v).abs() < 1e-12);
        }
        // positive part limit integrates the datum to 1/8
        let d = example_data(ex(1));
        let int = d
            .datum
            .integrate_product(&u_plus_dirichlet_limit_e1())
            .unwrap();
        assert!((int - 0.125).abs() < 1e-12);
    }

    #[test]
    fn example_ids_validate() {
        assert!(ExampleId::new(0).is_err());
        assert!(ExampleId::new(8).is_err());
        assert!(ExampleId::with_dimension(3, 2).is_err());
        let e6 = ExampleId::with_dimension(6, 4).unwrap();
        assert_eq!(e6.dimension(), 4);
        assert!(closed_form_up(ExampleId::with_dimension(7, 2).unwrap(), 8.0, 1.0).is_err());
        assert!(closed_form_up(ex(1), 8.0, 5.0).is_err());
    }
}
