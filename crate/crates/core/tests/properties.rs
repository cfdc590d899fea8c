//! Randomized invariants: measure bookkeeping of piecewise functions, the
//! shortness and boundary exactness of constructed limits, solver KKT
//! conditions on random data, and agreement between pipelines that must
//! coincide.

use plap_core::limit::{dirichlet_limit, k_coefficient, obstacle_limit, radial_limit};
use plap_core::piecewise::{IntervalSet, PiecewisePoly, Poly};
use plap_core::psolver::{
    dirichlet_shoot, discrete_p_laplacian, lewy_stampacchia_check, obstacle_solve,
    obstacle_solve_traced, psi, psi_inv, ProblemSpec,
};
use plap_core::radial::{reduce, RadialSpec};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// generators

/// Strictly increasing breakpoints on [lo, hi] from positive gap weights.
fn breaks_from_gaps(lo: f64, hi: f64, gaps: &[f64]) -> Vec<f64> {
    let total: f64 = gaps.iter().sum();
    let mut out = Vec::with_capacity(gaps.len() + 1);
    let mut acc = 0.0;
    out.push(lo);
    for g in &gaps[..gaps.len() - 1] {
        acc += g;
        out.push(lo + (hi - lo) * acc / total);
    }
    out.push(hi);
    out
}

fn domain() -> impl Strategy<Value = (f64, f64)> {
    (-2.0f64..2.0, 0.5f64..4.0).prop_map(|(lo, len)| (lo, lo + len))
}

fn gaps() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, 1..7)
}

/// Continuous piecewise-linear function through random node values.
fn continuous_pwl() -> impl Strategy<Value = PiecewisePoly> {
    (domain(), gaps()).prop_flat_map(|((lo, hi), gaps)| {
        let breaks = breaks_from_gaps(lo, hi, &gaps);
        let n = breaks.len();
        prop::collection::vec(-2.0f64..2.0, n).prop_map(move |vals| {
            let pieces = (0..n - 1)
                .map(|i| {
                    let s = (vals[i + 1] - vals[i]) / (breaks[i + 1] - breaks[i]);
                    Poly::affine_through(breaks[i], vals[i], s)
                })
                .collect();
            PiecewisePoly::new(breaks.clone(), pieces).unwrap()
        })
    })
}

/// Step function; roughly a third of the steps are exactly zero so that
/// antiderivatives get genuine plateaus.
fn step_fn_on(lo: f64, hi: f64) -> impl Strategy<Value = PiecewisePoly> {
    gaps().prop_flat_map(move |gaps| {
        let breaks = breaks_from_gaps(lo, hi, &gaps);
        let n = breaks.len();
        prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => -3.0f64..3.0], n - 1).prop_map(
            move |vals| {
                let pieces = vals.iter().map(|&v| Poly::constant(v)).collect();
                PiecewisePoly::new(breaks.clone(), pieces).unwrap()
            },
        )
    })
}

fn step_fn() -> impl Strategy<Value = PiecewisePoly> {
    domain().prop_flat_map(|(lo, hi)| step_fn_on(lo, hi))
}

/// Piecewise quadratics, not necessarily continuous.
fn quadratic_pw() -> impl Strategy<Value = PiecewisePoly> {
    (domain(), gaps()).prop_flat_map(|((lo, hi), gaps)| {
        let breaks = breaks_from_gaps(lo, hi, &gaps);
        let n = breaks.len();
        prop::collection::vec([-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0], n - 1).prop_map(
            move |coef| {
                let pieces = coef
                    .iter()
                    .map(|c| Poly::new([c[0], c[1], c[2], 0.0]))
                    .collect();
                PiecewisePoly::new(breaks.clone(), pieces).unwrap()
            },
        )
    })
}

// ---------------------------------------------------------------------------
// measure bookkeeping

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sublevel_measure_is_monotone_and_bounded(
        f in continuous_pwl(),
        r0 in -3.0f64..3.0,
        dr in 0.0f64..2.0,
    ) {
        let (lo, hi) = f.domain();
        let len = hi - lo;
        let m0 = f.sublevel_measure(r0);
        let m1 = f.sublevel_measure(r0 + dr);
        prop_assert!(m0 >= 0.0 && m1 <= len + 1e-12);
        prop_assert!(m0 <= m1 + 1e-12);
        // the closed variant dominates the strict one
        prop_assert!(f.sublevel_measure_closed(r0) >= m0 - 1e-12);
    }

    #[test]
    fn level_sets_partition_the_measure(f in continuous_pwl(), r in -2.5f64..2.5) {
        let (lo, hi) = f.domain();
        let len = hi - lo;
        let (below, level, above) = f.level_sets(r);
        let sum = below.measure() + level.measure() + above.measure();
        prop_assert!((sum - len).abs() <= 1e-12 * (1.0 + len), "sum {sum} vs {len}");
    }

    #[test]
    fn antiderivative_then_derivative_recovers(f in quadratic_pw()) {
        let (lo, _) = f.domain();
        let big = f.antiderivative(lo).unwrap();
        prop_assert!(big.is_continuous());
        prop_assert!(big.eval(lo).abs() <= 1e-12);
        let back = big.derivative();
        for i in 0..f.pieces().len() {
            let x = 0.5 * (f.breaks()[i] + f.breaks()[i + 1]);
            let (want, got) = (f.eval(x), back.eval(x));
            prop_assert!(
                (want - got).abs() <= 1e-13 * (1.0 + want.abs()),
                "{want} vs {got} at {x}"
            );
        }
    }

    #[test]
    fn interval_union_and_intersection_add_up(
        xs in prop::collection::vec((0.0f64..4.0, 0.01f64..1.0), 0..5),
        ys in prop::collection::vec((0.0f64..4.0, 0.01f64..1.0), 0..5),
    ) {
        let a = IntervalSet::new(xs.iter().map(|&(x, l)| (x, x + l)).collect());
        let b = IntervalSet::new(ys.iter().map(|&(x, l)| (x, x + l)).collect());
        let lhs = a.union(&b).measure() + a.intersect(&b).measure();
        let rhs = a.measure() + b.measure();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        let comp = a.complement_in(-1.0, 6.0);
        prop_assert!((comp.measure() + a.measure() - 7.0).abs() <= 1e-12 * 8.0);
        prop_assert!(a.intersect(&comp).measure() <= 1e-12);
    }
}

// ---------------------------------------------------------------------------
// limit construction

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn constructed_limits_are_short_and_hit_the_data(
        f in step_fn(),
        t in -0.9f64..0.9,
        va in -1.0f64..1.0,
    ) {
        let (a, b) = f.domain();
        let vb = va + t * (b - a);
        let u = dirichlet_limit(&f, a, b, va, vb).unwrap();
        prop_assert!((u.eval(a) - va).abs() <= 1e-10);
        prop_assert!((u.eval(b) - vb).abs() <= 1e-10);
        for c in u.components() {
            prop_assert!(c.k.abs() <= 1.0 + 1e-12, "slope {} out of range", c.k);
        }
        let pw = u.as_piecewise();
        for &bk in &pw.breaks()[1..pw.breaks().len() - 1] {
            prop_assert!((pw.eval_left(bk) - pw.eval(bk)).abs() <= 1e-10);
        }
        // shortness over every sampled pair
        let m = 60;
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let us: Vec<f64> = xs.iter().map(|&x| u.eval(x)).collect();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                prop_assert!(
                    (us[i] - us[j]).abs() <= (xs[i] - xs[j]).abs() + 1e-10,
                    "stretch between {} and {}", xs[i], xs[j]
                );
            }
        }
    }

    #[test]
    fn empty_contact_reduces_to_the_boundary_problem(f in step_fn()) {
        let (a, b) = f.domain();
        let low = PiecewisePoly::constant(a, b, -50.0).unwrap();
        let via_obstacle = obstacle_limit(&f, &low, &IntervalSet::empty()).unwrap();
        let direct = dirichlet_limit(&f, a, b, 0.0, 0.0).unwrap();
        for i in 0..=200 {
            let x = a + (b - a) * i as f64 / 200.0;
            prop_assert!((via_obstacle.eval(x) - direct.eval(x)).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn positive_datum_on_an_annulus_gives_the_distance(
        n in 1u32..4,
        r1 in 0.3f64..1.2,
        len in 0.8f64..2.5,
        seed_gaps in gaps(),
        raw_vals in prop::collection::vec(0.2f64..3.0, 7),
    ) {
        let r2 = r1 + len;
        let breaks = breaks_from_gaps(r1, r2, &seed_gaps);
        let pieces = (0..breaks.len() - 1)
            .map(|i| Poly::constant(raw_vals[i % raw_vals.len()]))
            .collect();
        let g = PiecewisePoly::new(breaks, pieces).unwrap();
        let low = PiecewisePoly::constant(r1, r2, -10.0).unwrap();
        let u = radial_limit(&g, &low, n, r1, r2, &IntervalSet::empty()).unwrap();
        for i in 0..=300 {
            let t = r1 + len * i as f64 / 300.0;
            let d = (t - r1).min(r2 - t);
            prop_assert!(
                (u.eval(t) - d).abs() <= 1e-6,
                "profile {} vs distance {d} at {t}", u.eval(t)
            );
        }
    }
}

// ---------------------------------------------------------------------------
// finite-p solvers

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn flux_map_inverts_and_orders(
        p in 1.3f64..64.0,
        s in -8.0f64..8.0,
        ds in 0.0f64..4.0,
    ) {
        let back = psi(p, psi_inv(p, s));
        prop_assert!((back - s).abs() <= 1e-9 * (1.0 + s.abs()), "{back} vs {s}");
        prop_assert!((psi(p, -s) + psi(p, s)).abs() <= 1e-12 * (1.0 + psi(p, s).abs()));
        prop_assert!(psi(p, s + ds) >= psi(p, s) - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn shot_values_do_not_depend_on_the_grid(
        f in step_fn(),
        // the matched-constant representation is exact at any p, but its
        // bisection resolves the boundary residual only while the flux
        // exponent keeps |F - beta| changes visible; large p flattens them
        p in 1.3f64..16.0,
        va in -1.0f64..1.0,
        dv in -1.0f64..1.0,
    ) {
        let (a, b) = f.domain();
        let spec = ProblemSpec::flat(a, b, f, None, (va, va + dv), p).unwrap();
        let (coarse, beta_c) = dirichlet_shoot(&spec, 101).unwrap();
        let (fine, beta_f) = dirichlet_shoot(&spec, 201).unwrap();
        prop_assert!((beta_c - beta_f).abs() <= 1e-10 * (1.0 + beta_c.abs()));
        for i in 0..101 {
            let (u0, u1) = (coarse.values[i], fine.values[2 * i]);
            prop_assert!((u0 - u1).abs() <= 1e-9, "{u0} vs {u1} at node {i}");
        }
    }

    #[test]
    fn obstacle_solutions_satisfy_the_optimality_conditions(
        f in step_fn(),
        phi_raw in continuous_pwl(),
        p in 2.0f64..6.0,
    ) {
        let (a, b) = f.domain();
        // rebase the obstacle onto the domain of f, pressed below the data
        let (plo, phi_hi) = phi_raw.domain();
        let scale = (b - a) / (phi_hi - plo);
        let breaks: Vec<f64> = phi_raw.breaks().iter().map(|&x| a + (x - plo) * scale).collect();
        let pieces: Vec<Poly> = (0..breaks.len() - 1)
            .map(|i| {
                let x0 = phi_raw.breaks()[i];
                let v = phi_raw.eval(x0) - 2.2;
                let s = phi_raw.pieces()[i].derivative().eval(x0) / scale;
                Poly::affine_through(breaks[i], v, s)
            })
            .collect();
        let phi = PiecewisePoly::new(breaks, pieces).unwrap();
        let spec = ProblemSpec::flat(a, b, f.clone(), Some(phi.clone()), (0.0, 0.0), p).unwrap();
        let tol = 1e-9;
        let (u, trace) = obstacle_solve_traced(&spec, 301, tol).unwrap();
        prop_assert!(u.values[0] == 0.0 && *u.values.last().unwrap() == 0.0);
        for i in 0..u.n_nodes() {
            prop_assert!(u.values[i] >= phi.eval(u.node(i)) - 1e-12);
        }
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()));
        }
        // free nodes carry the datum up to the raw-unit residual floor
        let lp = discrete_p_laplacian(&u, &spec).unwrap();
        let h = u.h();
        for i in 1..u.n_nodes() - 1 {
            let x = u.node(i);
            if u.values[i] - phi.eval(x) <= 1e-4 {
                continue;
            }
            let favg = f.integrate_weighted(0, x - 0.5 * h, x + 0.5 * h) / h;
            prop_assert!(
                (lp[i] - favg).abs() <= 1e-3 * (1.0 + favg.abs()),
                "operator {} vs datum {favg} at free node {i}", lp[i]
            );
        }
        let bounds = lewy_stampacchia_check(&u, &spec, 1e-3).unwrap();
        prop_assert!(bounds.ok, "{bounds:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn one_dimensional_reduction_is_bit_exact(
        r1 in 0.2f64..1.5,
        len in 0.5f64..3.0,
        p in 2.0f64..8.0,
        seed_gaps in gaps(),
        raw_vals in prop::collection::vec(-3.0f64..3.0, 7),
    ) {
        let r2 = r1 + len;
        let breaks = breaks_from_gaps(r1, r2, &seed_gaps);
        let pieces = (0..breaks.len() - 1)
            .map(|i| Poly::constant(raw_vals[i % raw_vals.len()]))
            .collect();
        let g = PiecewisePoly::new(breaks, pieces).unwrap();
        let phi = PiecewisePoly::constant(r1, r2, -0.3).unwrap();
        let radial = RadialSpec {
            n: 1,
            r1,
            r2,
            g: g.clone(),
            obstacle: Some(phi.clone()),
            p,
        };
        let reduced = reduce(&radial).unwrap();
        let flat = ProblemSpec::flat(r1, r2, g, Some(phi), (0.0, 0.0), p).unwrap();
        let a = obstacle_solve(&reduced, 201, 1e-8).unwrap();
        let b = obstacle_solve(&flat, 201, 1e-8).unwrap();
        for i in 0..201 {
            prop_assert!(a.values[i] == b.values[i], "node {i} differs");
        }
    }
}

// ---------------------------------------------------------------------------
// refusal paths

#[test]
fn malformed_requests_are_refused() {
    let f = PiecewisePoly::constant(0.0, 1.0, 1.0).unwrap();
    let phi = PiecewisePoly::constant(0.0, 1.0, -1.0).unwrap();

    assert!(ProblemSpec::flat(0.0, 1.0, f.clone(), Some(phi.clone()), (0.0, 0.0), 1.0).is_err());
    assert!(ProblemSpec::flat(1.0, 0.0, f.clone(), Some(phi.clone()), (0.0, 0.0), 4.0).is_err());

    // obstacle above the boundary data is incompatible
    let tall = PiecewisePoly::constant(0.0, 1.0, 0.5).unwrap();
    assert!(ProblemSpec::flat(0.0, 1.0, f.clone(), Some(tall), (0.0, 0.0), 4.0).is_err());

    let spec = ProblemSpec::flat(0.0, 1.0, f.clone(), Some(phi.clone()), (0.0, 0.0), 4.0).unwrap();
    assert!(obstacle_solve(&spec, 2, 1e-8).is_err());
    assert!(obstacle_solve(&spec, 11, 0.0).is_err());
    assert!(obstacle_solve(&spec, 11, -1.0).is_err());

    let dirichlet = ProblemSpec::flat(0.0, 1.0, f.clone(), None, (0.0, 0.0), 4.0).unwrap();
    assert!(obstacle_solve(&dirichlet, 11, 1e-8).is_err());

    // level-set slope on an empty level region is meaningless
    assert!(k_coefficient(
        &IntervalSet::interval(0.0, 1.0),
        &IntervalSet::empty(),
        &IntervalSet::empty(),
        0.1
    )
    .is_err());

    // domains must agree between datum and boundary interval
    assert!(dirichlet_limit(&f, 0.0, 2.0, 0.0, 0.0).is_err());
    // data rising faster than the interval length is not 1-Lipschitz
    assert!(dirichlet_limit(&f, 0.0, 1.0, 0.0, 1.5).is_err());
}
