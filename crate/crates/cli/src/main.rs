//! `plap-limit`: config-driven runner around the core solvers. Solves at
//! finite p, constructs the limit profile, sweeps p with a convergence
//! table, verifies the worked examples, and renders SVG overlays.
//!
//! Exit codes: 0 all requested checks passed, 1 a solve or a check failed,
//! 2 the request itself was unusable.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plap_core::limit::{affine_limit, dirichlet_limit, obstacle_limit, radial_limit, LimitFunction, PieceKind};
use plap_core::oracles::{construct_limit, example_data, example_problem, ExampleId, Problem};
use plap_core::piecewise::{IntervalSet, PiecewisePoly};
use plap_core::psolver::{
    coincidence_set, dirichlet_iterative, dirichlet_shoot, gamma_infty_estimate,
    lewy_stampacchia_check, obstacle_solve, GridFunction, ProblemSpec,
};
use plap_core::radial::{reduce, RadialSpec};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "plap-limit", version, about = "p-Laplacian solves and their explicit limits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem at a single p and write the profile as CSV.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Exponent p.
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        base: Base,
    },
    /// Construct the limit profile; print its pieces, write CSV and JSON.
    Limit {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: Run,
    },
    /// Solve along a p list and tabulate distances to the limit.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: Run,
    },
    /// Sweep a worked example and check that it converges to its limit.
    VerifyExample {
        /// Example number, 1 to 7.
        example: u8,
        /// Space dimension for the radial examples.
        #[arg(long)]
        dim: Option<u32>,
        #[command(flatten)]
        run: Run,
    },
    /// Everything at once: per-p profiles, limit files, table, plot.
    Report {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: Run,
    },
}

#[derive(Args)]
struct Source {
    /// JSON experiment config.
    #[arg(long, conflicts_with = "example")]
    config: Option<PathBuf>,
    /// Worked example number, 1 to 7.
    #[arg(long)]
    example: Option<u8>,
    /// Space dimension for the radial examples.
    #[arg(long, requires = "example")]
    dim: Option<u32>,
}

#[derive(Args)]
struct Base {
    /// Grid nodes (and sample count for limit profiles).
    #[arg(long)]
    nodes: Option<usize>,
    /// Solver complementarity tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render an SVG overlay of the swept profiles.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct Run {
    /// Comma-separated p values; overrides the config's list.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[command(flatten)]
    base: Base,
}

// ---------------------------------------------------------------------------
// config file

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    example: Option<u8>,
    dimension: Option<u32>,
    problem: Option<ProblemConfig>,
    p_list: Option<Vec<f64>>,
    n_nodes: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    svg: Option<bool>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProblemConfig {
    Flat {
        a: f64,
        b: f64,
        f: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
        bc: (f64, f64),
    },
    Radial {
        n: u32,
        r1: f64,
        r2: f64,
        g: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
    },
}

enum Fail {
    /// The request cannot be run: bad flags, bad config, bad problem data.
    Usage(String),
    /// The run itself failed: a solve stalled or a check did not pass.
    Run(String),
}

type CliResult<T> = Result<T, Fail>;

fn usage<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Usage(e.to_string())
}

fn run_err<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Run(e.to_string())
}

// ---------------------------------------------------------------------------
// resolved experiment

enum Target {
    Example(ExampleId),
    Flat {
        a: f64,
        b: f64,
        f: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
        bc: (f64, f64),
    },
    Radial {
        n: u32,
        r1: f64,
        r2: f64,
        g: PiecewisePoly,
        obstacle: Option<PiecewisePoly>,
    },
}

struct Experiment {
    target: Target,
    p_list: Vec<f64>,
    n_nodes: usize,
    tol: f64,
    out: PathBuf,
    svg: bool,
}

impl Experiment {
    fn resolve(source: &Source, run: &Run) -> CliResult<Experiment> {
        Self::resolve_parts(source, run.p.as_deref(), &run.base)
    }

    fn resolve_parts(source: &Source, p_flag: Option<&[f64]>, base: &Base) -> CliResult<Experiment> {
        let cfg = match &source.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| {
                    usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
                })?
            }
            None => ExperimentConfig::default(),
        };
        let target = match (source.example.or(cfg.example), &cfg.problem) {
            (Some(_), Some(_)) => {
                return Err(usage("give either an example number or an inline problem, not both"))
            }
            (None, None) => return Err(usage("nothing to run: no example and no problem")),
            (Some(id), None) => {
                let e = match source.dim.or(cfg.dimension) {
                    Some(n) => ExampleId::with_dimension(id, n),
                    None => ExampleId::new(id),
                }
                .map_err(usage)?;
                Target::Example(e)
            }
            (None, Some(ProblemConfig::Flat { a, b, f, obstacle, bc })) => {
                if obstacle.is_some() && (bc.0 != 0.0 || bc.1 != 0.0) {
                    return Err(usage(
                        "obstacle problems are posed with zero boundary values",
                    ));
                }
                Target::Flat {
                    a: *a,
                    b: *b,
                    f: f.clone(),
                    obstacle: obstacle.clone(),
                    bc: *bc,
                }
            }
            (None, Some(ProblemConfig::Radial { n, r1, r2, g, obstacle })) => Target::Radial {
                n: *n,
                r1: *r1,
                r2: *r2,
                g: g.clone(),
                obstacle: obstacle.clone(),
            },
        };
        let p_list = p_flag
            .map(|s| s.to_vec())
            .or(cfg.p_list)
            .unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0]);
        if p_list.is_empty() {
            return Err(usage("the p list is empty"));
        }
        if p_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(usage("the p list must be strictly increasing"));
        }
        let n_nodes = base.nodes.or(cfg.n_nodes).unwrap_or(2001);
        if n_nodes < 3 {
            return Err(usage("need at least three grid nodes"));
        }
        let tol = base.tol.or(cfg.tol).unwrap_or(1e-7);
        if !(tol > 0.0) {
            return Err(usage("the tolerance must be positive"));
        }
        Ok(Experiment {
            target,
            p_list,
            n_nodes,
            tol,
            out: base.out.clone().or(cfg.out).unwrap_or_else(|| PathBuf::from("plap-out")),
            svg: base.svg || cfg.svg.unwrap_or(false),
        })
    }

    /// Validate the problem once, at the smallest p of the sweep.
    fn check_problem(&self) -> CliResult<()> {
        self.spec_at(self.p_list[0]).map(|_| ())
    }

    /// The one-dimensional (possibly weighted) spec at a given p.
    fn spec_at(&self, p: f64) -> CliResult<ProblemSpec> {
        match &self.target {
            Target::Example(e) => match example_problem(*e, p).map_err(usage)? {
                Problem::Flat(s) => Ok(s),
                Problem::Radial(r) => reduce(&r).map_err(usage),
            },
            Target::Flat { a, b, f, obstacle, bc } => {
                ProblemSpec::flat(*a, *b, f.clone(), obstacle.clone(), *bc, p).map_err(usage)
            }
            Target::Radial { n, r1, r2, g, obstacle } => reduce(&RadialSpec {
                n: *n,
                r1: *r1,
                r2: *r2,
                g: g.clone(),
                obstacle: obstacle.clone(),
                p,
            })
            .map_err(usage),
        }
    }

    fn obstacle(&self) -> Option<PiecewisePoly> {
        match &self.target {
            Target::Example(e) => Some(example_data(*e).obstacle),
            Target::Flat { obstacle, .. } => obstacle.clone(),
            Target::Radial { obstacle, .. } => obstacle.clone(),
        }
    }

    fn solve_at(&self, p: f64) -> CliResult<GridFunction> {
        let spec = self.spec_at(p)?;
        if spec.obstacle.is_some() {
            obstacle_solve(&spec, self.n_nodes, self.tol).map_err(run_err)
        } else if spec.weight_exponent == 0 && !spec.natural_left {
            dirichlet_shoot(&spec, self.n_nodes).map(|(u, _)| u).map_err(run_err)
        } else {
            dirichlet_iterative(&spec, self.n_nodes, self.tol).map_err(run_err)
        }
    }

    /// Construct the limit profile. Inline obstacle problems first estimate
    /// the limit contact set from a bracketing sweep.
    fn limit(&self) -> CliResult<LimitFunction> {
        match &self.target {
            Target::Example(e) => construct_limit(*e).map_err(run_err),
            Target::Flat { a, b, f, obstacle: None, bc } => {
                match dirichlet_limit(f, *a, *b, bc.0, bc.1) {
                    Err(plap_core::Error::SlopeTooSteep { .. }) => {
                        affine_limit(*a, *b, bc.0, bc.1).map_err(run_err)
                    }
                    other => other.map_err(run_err),
                }
            }
            Target::Flat { f, obstacle: Some(phi), .. } => {
                let gamma = self.estimate_gamma()?;
                obstacle_limit(f, phi, &gamma).map_err(run_err)
            }
            Target::Radial { n, r1, r2, g, obstacle } => {
                let phi = obstacle
                    .clone()
                    .unwrap_or(PiecewisePoly::constant(*r1, *r2, f64::NEG_INFINITY).map_err(run_err)?);
                let gamma = if obstacle.is_some() {
                    self.estimate_gamma()?
                } else {
                    IntervalSet::empty()
                };
                radial_limit(g, &phi, *n, *r1, *r2, &gamma).map_err(run_err)
            }
        }
    }

    fn estimate_gamma(&self) -> CliResult<IntervalSet> {
        let ps = if self.p_list.len() >= 3 {
            self.p_list.clone()
        } else {
            vec![10.0, 20.0, 40.0, 80.0]
        };
        let specs: Vec<ProblemSpec> =
            ps.iter().map(|&p| self.spec_at(p)).collect::<CliResult<_>>()?;
        let nodes = self.n_nodes.min(1001);
        let h = {
            let s = &specs[0];
            (s.b - s.a) / (nodes - 1) as f64
        };
        let (lo, _hi, stable) =
            gamma_infty_estimate(&specs, nodes, (10.0 * self.tol).max(h)).map_err(run_err)?;
        if !stable {
            eprintln!("note: the contact set has not settled at this resolution; using the stable core");
        }
        Ok(lo)
    }
}

// ---------------------------------------------------------------------------
// output helpers

fn ensure_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| run_err(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| run_err(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn profile_csv(u: &GridFunction) -> String {
    let mut out = String::from("x,u\n");
    for i in 0..u.n_nodes() {
        let _ = writeln!(out, "{},{}", u.node(i), u.values[i]);
    }
    out
}

fn limit_csv(lim: &LimitFunction, samples: usize) -> String {
    let (a, b) = lim.domain();
    let mut out = String::from("x,U\n");
    for i in 0..samples {
        let x = if i + 1 == samples { b } else { a + (b - a) * i as f64 / (samples - 1) as f64 };
        let _ = writeln!(out, "{},{}", x, lim.eval(x));
    }
    out
}

/// One row of the convergence table.
struct SweepRow {
    p: f64,
    sup_dist: f64,
    gamma: Option<(f64, f64)>,
    ls: Option<(f64, f64)>,
    max_slope: f64,
}

fn sweep_rows(exp: &Experiment, lim: &LimitFunction) -> CliResult<(Vec<SweepRow>, Vec<GridFunction>)> {
    let phi = exp.obstacle();
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    for &p in &exp.p_list {
        let u = exp.solve_at(p)?;
        let sup_dist = (0..u.n_nodes())
            .map(|i| (u.values[i] - lim.eval(u.node(i))).abs())
            .fold(0.0f64, f64::max);
        let h = u.h();
        let max_slope = (0..u.n_nodes() - 1)
            .map(|i| ((u.values[i + 1] - u.values[i]) / h).abs())
            .fold(0.0f64, f64::max);
        let spec = exp.spec_at(p)?;
        let (gamma, ls) = match (&phi, spec.obstacle.is_some()) {
            (Some(phi), true) => {
                let cs = coincidence_set(&u, phi, 10.0 * exp.tol);
                // single-node touches (typically the boundary riding on the
                // obstacle) are not contact intervals
                let wide: Vec<(f64, f64)> =
                    cs.intervals().iter().copied().filter(|&(lo, hi)| hi - lo > h).collect();
                let hull = wide.first().map(|&(lo, _)| (lo, wide.last().unwrap().1));
                let b = lewy_stampacchia_check(&u, &spec, exp.tol).map_err(run_err)?;
                (hull, Some((b.lower_violation, b.upper_violation)))
            }
            _ => (None, None),
        };
        rows.push(SweepRow { p, sup_dist, gamma, ls, max_slope });
        profiles.push(u);
    }
    Ok((rows, profiles))
}

fn convergence_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,sup_dist,gamma_lo,gamma_hi,ls_lower,ls_upper,max_slope\n");
    for r in rows {
        let (glo, ghi) = match r.gamma {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        let (lsl, lsu) = match r.ls {
            Some((lo, up)) => (lo.to_string(), up.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.p, r.sup_dist, glo, ghi, lsl, lsu, r.max_slope
        );
    }
    out
}

fn print_table(rows: &[SweepRow]) {
    println!(
        "{:>8}  {:>12}  {:>10}  {:>10}  {:>10}  {:>10}  {:>9}",
        "p", "sup|u_p-U|", "gamma_lo", "gamma_hi", "ls_lower", "ls_upper", "max|u'|"
    );
    for r in rows {
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.4}"),
            None => "-".into(),
        };
        println!(
            "{:>8}  {:>12.4e}  {:>10}  {:>10}  {:>10}  {:>10}  {:>9.4}",
            r.p,
            r.sup_dist,
            fmt_opt(r.gamma.map(|g| g.0)),
            fmt_opt(r.gamma.map(|g| g.1)),
            match r.ls {
                Some((lo, _)) => format!("{lo:.2e}"),
                None => "-".into(),
            },
            match r.ls {
                Some((_, up)) => format!("{up:.2e}"),
                None => "-".into(),
            },
            r.max_slope
        );
    }
}

fn print_pieces(lim: &LimitFunction) {
    let (a, b) = lim.domain();
    println!(
        "U on [{a}, {b}]: {} pieces, {} free component(s)",
        lim.pieces().len(),
        lim.components().len()
    );
    for piece in lim.pieces() {
        match piece.kind {
            PieceKind::Obstacle => {
                println!("  [{:>8.4}, {:>8.4}]  obstacle", piece.lo, piece.hi)
            }
            PieceKind::Slope(s) => {
                println!("  [{:>8.4}, {:>8.4}]  slope {s:+.4}", piece.lo, piece.hi)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// svg

const BLUES: [&str; 8] = [
    "#a6c8e4", "#7fb0d6", "#5a98c8", "#3a80b9", "#2a689e", "#1f5181", "#163a61", "#0e2744",
];

struct Curve {
    label: String,
    color: String,
    width: f64,
    dash: Option<&'static str>,
    points: Vec<(f64, f64)>,
}

fn svg_overlay(curves: &[Curve]) -> String {
    let (w, h, ml, mr, mt, mb) = (800.0, 500.0, 60.0, 20.0, 20.0, 45.0);
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &(x, y) in &c.points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    let pad = 0.05 * (y1 - y0).max(1e-9);
    y0 -= pad;
    y1 += pad;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    // axes with four ticks each
    let _ = writeln!(
        s,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>",
        w - ml - mr,
        h - mt - mb
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#444\">{fx:.2}</text>",
            px(fx),
            h - mb + 16.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#444\">{fy:.2}</text>",
            ml - 6.0,
            py(fy) + 4.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>",
            px(fx),
            mt,
            px(fx),
            h - mb
        );
    }
    for c in curves {
        let mut pts = String::new();
        for &(x, y) in &c.points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let dash = match c.dash {
            Some(d) => format!(" stroke-dasharray=\"{d}\""),
            None => String::new(),
        };
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{dash}/>",
            pts.trim_end(),
            c.color,
            c.width
        );
    }
    // legend, top right
    for (i, c) in curves.iter().enumerate() {
        let y = mt + 18.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" fill=\"#333\">{}</text>",
            w - mr - 150.0,
            w - mr - 120.0,
            c.color,
            w - mr - 112.0,
            y + 4.0,
            c.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn overlay_curves(
    exp: &Experiment,
    lim: &LimitFunction,
    profiles: &[GridFunction],
) -> Vec<Curve> {
    let mut curves = Vec::new();
    if let Some(phi) = exp.obstacle() {
        let (a, b) = phi.domain();
        let pts = (0..=400)
            .map(|i| {
                let x = a + (b - a) * i as f64 / 400.0;
                (x, phi.eval(x))
            })
            .collect();
        curves.push(Curve {
            label: "obstacle".into(),
            color: "#888888".into(),
            width: 1.0,
            dash: Some("6,4"),
            points: pts,
        });
    }
    for (i, u) in profiles.iter().enumerate() {
        let pts = (0..u.n_nodes()).step_by((u.n_nodes() / 400).max(1)).map(|j| (u.node(j), u.values[j]));
        curves.push(Curve {
            label: format!("p = {}", exp.p_list[i]),
            color: BLUES[i * BLUES.len() / profiles.len().max(1)].into(),
            width: 1.2,
            dash: None,
            points: pts.collect(),
        });
    }
    let (a, b) = lim.domain();
    let pts = (0..=400)
        .map(|i| {
            let x = a + (b - a) * i as f64 / 400.0;
            (x, lim.eval(x))
        })
        .collect();
    curves.push(Curve {
        label: "limit U".into(),
        color: "#c0392b".into(),
        width: 2.0,
        dash: None,
        points: pts,
    });
    curves
}

// ---------------------------------------------------------------------------
// subcommands

fn fmt_p(p: f64) -> String {
    p.to_string().replace('.', "_")
}

fn cmd_solve(exp: &Experiment, p: f64) -> CliResult<()> {
    let u = exp.solve_at(p)?;
    ensure_out(&exp.out)?;
    let path = exp.out.join(format!("solution_p{}.csv", fmt_p(p)));
    write_file(&path, &profile_csv(&u))?;
    let (lo, hi) = u.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    println!("p = {p}, {} nodes, range [{lo:.6}, {hi:.6}]", u.n_nodes());
    Ok(())
}

fn cmd_limit(exp: &Experiment) -> CliResult<()> {
    let lim = exp.limit()?;
    print_pieces(&lim);
    ensure_out(&exp.out)?;
    let samples = if exp.n_nodes == 2001 { 1001 } else { exp.n_nodes };
    write_file(&exp.out.join("limit.csv"), &limit_csv(&lim, samples))?;
    let json = serde_json::to_string_pretty(&lim).map_err(run_err)?;
    write_file(&exp.out.join("limit.json"), &(json + "\n"))?;
    Ok(())
}

fn cmd_sweep(exp: &Experiment, with_profiles: bool) -> CliResult<()> {
    exp.check_problem()?;
    let lim = exp.limit()?;
    let (rows, profiles) = sweep_rows(exp, &lim)?;
    print_table(&rows);
    ensure_out(&exp.out)?;
    write_file(&exp.out.join("convergence.csv"), &convergence_csv(&rows))?;
    if with_profiles {
        for (i, u) in profiles.iter().enumerate() {
            let path = exp.out.join(format!("solution_p{}.csv", fmt_p(exp.p_list[i])));
            write_file(&path, &profile_csv(u))?;
        }
        let samples = if exp.n_nodes == 2001 { 1001 } else { exp.n_nodes };
        write_file(&exp.out.join("limit.csv"), &limit_csv(&lim, samples))?;
        let json = serde_json::to_string_pretty(&lim).map_err(run_err)?;
        write_file(&exp.out.join("limit.json"), &(json + "\n"))?;
    }
    if exp.svg {
        let svg = svg_overlay(&overlay_curves(exp, &lim, &profiles));
        write_file(&exp.out.join("overlay.svg"), &svg)?;
    }
    Ok(())
}

fn cmd_verify(exp: &Experiment) -> CliResult<()> {
    let lim = exp.limit()?;
    let (rows, profiles) = sweep_rows(exp, &lim)?;
    print_table(&rows);
    ensure_out(&exp.out)?;
    write_file(&exp.out.join("convergence.csv"), &convergence_csv(&rows))?;
    if exp.svg {
        let svg = svg_overlay(&overlay_curves(exp, &lim, &profiles));
        write_file(&exp.out.join("overlay.svg"), &svg)?;
    }
    let decreasing = rows.windows(2).all(|w| w[1].sup_dist < w[0].sup_dist);
    if decreasing {
        println!("sup-distance to the limit is strictly decreasing along the sweep");
        Ok(())
    } else {
        Err(run_err("sup-distance to the limit is not strictly decreasing"))
    }
}

fn dispatch(cmd: &Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Solve { source, p, base } => {
            let exp = Experiment::resolve_parts(source, None, base)?;
            cmd_solve(&exp, *p)
        }
        Cmd::Limit { source, run } => {
            let exp = Experiment::resolve(source, run)?;
            cmd_limit(&exp)
        }
        Cmd::Sweep { source, run } => {
            let exp = Experiment::resolve(source, run)?;
            cmd_sweep(&exp, false)
        }
        Cmd::VerifyExample { example, dim, run } => {
            let source = Source { config: None, example: Some(*example), dim: *dim };
            let exp = Experiment::resolve(&source, run)?;
            cmd_verify(&exp)
        }
        Cmd::Report { source, run } => {
            let exp = Experiment::resolve(source, run)?;
            cmd_sweep(&exp, true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(()) => ExitCode::from(0),
        Err(Fail::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
