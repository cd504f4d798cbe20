use serde::Serialize;
use serde_json::json;

use twistlab::aniso::WeightScheme;
use twistlab::ensemble::{build_eigenbasis, expected_trace_sq, monte_carlo_trace_sq, EnsembleConfig};
use twistlab::mixing::{
    correlation_direct, correlation_spectral, decay_rate_fit, decay_sweep, frequency_average, Bump,
    SweepConfig,
};
use twistlab::operator::{assemble, assemble_auto, k_stability, spectrum, TruncatedOperator};
use twistlab::orbits::periodic_points;
use twistlab::pressure::{pressure_table, rate_thresholds};
use twistlab::torus::{AnosovMap, TrigPoly};
use twistlab::Complex64;

use crate::args::*;
use crate::output::{num, Output};
use crate::specs::{parse_map, parse_trig};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or config; exit code 2.
    Config(String),
    /// A numerical gate did not pass; exit code 3.
    Gate(String),
    /// I/O and everything else; exit code 1.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Gate(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Gate(m) | Failure::Other(m) => m,
        }
    }
}

impl From<twistlab::Error> for Failure {
    fn from(e: twistlab::Error) -> Self {
        use twistlab::Error::*;
        let m = e.to_string();
        match e {
            NotHyperbolic(_) | InvalidShear(_) | InvalidInput(_) | Json(_) | RadiusTooSmall { .. }
            | GridTooSmall { .. } | PowerOverflow { .. } | TooManyPoints { .. }
            | WeightOverflow(_) => Failure::Config(m),
            Io(_) | Csv(_) => Failure::Other(m),
            _ => Failure::Gate(m),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

pub type Outcome = Result<String, Failure>;

fn c(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn run(exp: &Experiment, seed: u64, out: &mut Output) -> Outcome {
    match exp {
        Experiment::Spectrum(a) => run_spectrum(a, out),
        Experiment::Traces(a) => run_traces(a, out),
        Experiment::Pressure(a) => run_pressure(a, out),
        Experiment::Ensemble(a) => run_ensemble(a, seed, out),
        Experiment::Correlate(a) if a.sweep => run_sweep(a, seed, out),
        Experiment::Correlate(a) => run_correlate(a, out),
        Experiment::Average(a) => run_average(a, out),
        Experiment::Thresholds(a) => run_thresholds(a, out),
    }
}

fn operator(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    r: f64,
    k: usize,
    grid: Option<usize>,
    min_grid: usize,
) -> Result<TruncatedOperator, Failure> {
    let scheme = WeightScheme::new(map.matrix(), r)?;
    Ok(match grid {
        Some(g) => assemble(map, tau, q, &scheme, k, g)?,
        None => assemble_auto(map, tau, q, &scheme, k, min_grid)?,
    })
}

fn run_spectrum(a: &SpectrumArgs, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let tau = parse_trig(&a.tau)?;
    let t = operator(&map, &tau, a.q, a.r, a.k, a.grid, a.min_grid)?;
    let rep = spectrum(&t, a.nmax)?;
    let scheme = WeightScheme::new(map.matrix(), a.r)?;
    let stability = a.k_check.map(|k2| {
        k_stability(
            &map,
            &tau,
            a.q,
            &scheme,
            a.k,
            k2,
            a.min_grid,
            a.stability_count,
            a.stability_limit,
        )
    });
    // a failed gate still leaves the files behind for diagnosis
    let (stability, gate) = match stability {
        Some(Err(e @ twistlab::Error::Unstable { .. })) => (None, Some(e)),
        Some(other) => (Some(other?), None),
        None => (None, None),
    };

    #[derive(Serialize)]
    struct Result<'a> {
        assembly: &'a twistlab::operator::AssemblyInfo,
        spectrum: &'a twistlab::operator::SpectralReport,
        k_stability: Option<twistlab::operator::KStability>,
        gate_failure: Option<String>,
    }
    out.json(
        "spectrum.json",
        &Result {
            assembly: &t.info,
            spectrum: &rep,
            k_stability: stability,
            gate_failure: gate.as_ref().map(|e| e.to_string()),
        },
    )?;
    let rows: Vec<Vec<String>> = rep
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let [re, im] = c(*l);
            vec![(i + 1).to_string(), re, im, num(l.norm())]
        })
        .collect();
    out.csv("eigenvalues.csv", &["index", "re", "im", "modulus"], &rows)?;
    let rows: Vec<Vec<String>> = rep
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, s)| vec![(i + 1).to_string(), num(*s)])
        .collect();
    out.csv("singular_values.csv", &["index", "value"], &rows)?;
    let rows: Vec<Vec<String>> = rep
        .traces
        .iter()
        .zip(&rep.fredholm[1..])
        .enumerate()
        .map(|(i, (tr, f))| {
            let [a, b] = c(*tr);
            let [x, y] = c(*f);
            vec![(i + 1).to_string(), a, b, x, y]
        })
        .collect();
    out.csv("traces.csv", &["n", "trace_re", "trace_im", "fredholm_re", "fredholm_im"], &rows)?;

    if let Some(e) = gate {
        return Err(e.into());
    }
    if !(rep.trace_check_n2 <= a.trace_tol) {
        return Err(Failure::Gate(format!(
            "Tr T² from eigenvalues and from the matrix differ by {:.3e} (limit {:.1e})",
            rep.trace_check_n2, a.trace_tol
        )));
    }
    Ok(format!(
        "spectrum: q={} K={} grid={} rho={:.9} resolved={} aliasing={:.1e}",
        a.q, a.k, rep.grid, rep.spectral_radius, rep.resolved, rep.aliasing_tail
    ))
}

fn run_traces(a: &TracesArgs, out: &mut Output) -> Outcome {
    if a.nmax == 0 {
        return Err(Failure::Config("nmax must be at least 1".into()));
    }
    let map = parse_map(&a.map)?;
    let tau = parse_trig(&a.tau)?;
    let matrix = match a.k {
        Some(k) => {
            let t = operator(&map, &tau, a.q, a.r, k, None, a.min_grid)?;
            Some((spectrum(&t, a.nmax)?.traces, t.info.grid))
        }
        None => None,
    };

    let mut columns = vec!["n", "points", "weight_sum", "re", "im"];
    if matrix.is_some() {
        columns.extend(["matrix_re", "matrix_im", "gap"]);
    }
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=a.nmax {
        let set = periodic_points(&map, n)?.with_birkhoff(&map, &tau);
        let s = set.trace_sum(&map, &tau, a.q);
        let exact = set
            .rational_weight_sum()
            .map(|(p, w)| format!("{p}/{w}"))
            .unwrap_or_default();
        let [re, im] = c(s);
        let mut row = vec![n.to_string(), set.len().to_string(), exact, re, im];
        if let Some((traces, _)) = &matrix {
            let m = traces[n - 1];
            let gap = (m - s).norm();
            worst = worst.max(gap);
            let [mr, mi] = c(m);
            row.extend([mr, mi, num(gap)]);
        }
        rows.push(row);
        if a.dump_orbits {
            out.with_header(&format!("orbits_{n}.csv"), |w| set.write_csv(w))?;
        }
    }
    out.csv("traces.csv", &columns, &rows)?;
    out.json(
        "traces.json",
        &json!({
            "rows": rows.iter().map(|r| columns.iter().copied().zip(r.iter()).collect::<std::collections::BTreeMap<_, _>>()).collect::<Vec<_>>(),
            "matrix_grid": matrix.as_ref().map(|m| m.1),
            "max_gap": matrix.as_ref().map(|_| worst),
        }),
    )?;
    if matrix.is_some() && !(worst <= a.trace_tol) {
        return Err(Failure::Gate(format!(
            "orbit sums and matrix traces differ by {worst:.3e} (limit {:.1e}); raise K",
            a.trace_tol
        )));
    }
    let last = &rows[rows.len() - 1];
    Ok(format!(
        "traces: n=1..{} q={} last=({}, {}){}",
        a.nmax,
        a.q,
        last[3],
        last[4],
        matrix
            .map(|_| format!(" max gap vs matrix {worst:.1e}"))
            .unwrap_or_default()
    ))
}

fn run_pressure(a: &PressureArgs, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let table = pressure_table(&map, a.n, &a.sigma)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.sigma),
                num(r.estimate),
                num(r.closed_form),
                num(r.gap),
            ]
        })
        .collect();
    out.csv("pressure.csv", &["n", "sigma", "estimate", "closed_form", "gap"], &rows)?;
    out.json("pressure.json", &table)?;
    let summary: Vec<String> = table
        .iter()
        .map(|r| format!("P({})={:.6}", r.sigma, r.estimate))
        .collect();
    Ok(format!("pressure: n={} {}", a.n, summary.join(" ")))
}

fn run_ensemble(a: &EnsembleArgs, seed: u64, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let basis = build_eigenbasis(a.cutoff)?;
    let closed_form = expected_trace_sq(&basis, &map, a.q, a.n)?;
    let config = EnsembleConfig {
        cutoff: a.cutoff,
        samples: a.samples,
        seed,
        q: a.q,
        n: a.n,
    };
    let mc = monte_carlo_trace_sq(&config, &map)?;
    let diag_sum = periodic_points(&map, a.n)?.diagonal_sum();
    let z = if mc.std_error > 0.0 {
        (mc.mean - closed_form) / mc.std_error
    } else {
        0.0
    };
    out.json(
        "ensemble.json",
        &json!({
            "basis_dim": basis.dim(),
            "closed_form": closed_form,
            "mc_mean": mc.mean,
            "mc_stderr": mc.std_error,
            "samples": mc.samples,
            "z_score": z,
            "diag_sum": diag_sum,
        }),
    )?;
    out.csv(
        "ensemble.csv",
        &["n", "q", "closed_form", "mc_mean", "mc_stderr", "diag_sum"],
        &[vec![
            a.n.to_string(),
            a.q.to_string(),
            num(closed_form),
            num(mc.mean),
            num(mc.std_error),
            num(diag_sum),
        ]],
    )?;
    Ok(format!(
        "ensemble: n={} q={} closed form {:.6} MC {:.6} ± {:.6} ({} samples, seed {seed}) diagonal {:.6}",
        a.n, a.q, closed_form, mc.mean, mc.std_error, mc.samples, diag_sum
    ))
}

fn run_correlate(a: &CorrelateArgs, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let tau = parse_trig(&a.tau)?;
    let f = parse_trig(&a.f)?;
    let g = parse_trig(&a.g)?;
    let t = operator(&map, &tau, a.q, a.r, a.k, None, a.min_grid)?;
    let spectral = correlation_spectral(&t, &f, &g, a.n_max)?;
    let direct = match a.direct_grid {
        Some(grid) => Some(correlation_direct(&map, &tau, a.q, &f, &g, a.n_max, grid)?),
        None => None,
    };
    let fit = decay_rate_fit(&spectral.values)?;
    let (lower, upper) = rate_thresholds(map.matrix())?;

    let mut columns = vec!["N", "re", "im", "abs"];
    if direct.is_some() {
        columns.extend(["direct_re", "direct_im", "direct_abs", "route_gap"]);
    }
    let mut rows = Vec::new();
    let mut dat = Vec::new();
    let mut route_gap: f64 = 0.0;
    for (n, v) in spectral.values.iter().enumerate() {
        let [re, im] = c(*v);
        let mut row = vec![n.to_string(), re, im, num(v.norm())];
        if let Some(d) = &direct {
            let gap = (d[n] - v).norm();
            route_gap = route_gap.max(gap);
            let [dr, di] = c(d[n]);
            row.extend([dr, di, num(d[n].norm()), num(gap)]);
        }
        rows.push(row);
        dat.push(vec![n.to_string(), num(v.norm())]);
    }
    out.csv("correlation.csv", &columns, &rows)?;
    out.dat("correlation.dat", &["N", "abs"], &dat)?;
    if let Some(d) = &direct {
        let rows: Vec<Vec<String>> = d
            .iter()
            .enumerate()
            .map(|(n, v)| vec![n.to_string(), num(v.norm())])
            .collect();
        out.dat("correlation_direct.dat", &["N", "abs"], &rows)?;
    }
    out.json(
        "correlate.json",
        &json!({
            "fit": fit,
            "upper_threshold": upper,
            "lower_threshold": lower,
            "grid": t.info.grid,
            "input_tail": spectral.input_tail,
            "g_outside": spectral.g_outside,
            "flagged": spectral.flagged,
            "max_route_gap": direct.as_ref().map(|_| route_gap),
        }),
    )?;
    let base = fit
        .base()
        .map(|b| format!("{b:.6}"))
        .unwrap_or_else(|| "below noise floor".into());
    Ok(format!(
        "correlate: q={} N=0..{} base {base}; thresholds {upper:.6} / {lower:.4}{}{}",
        a.q,
        a.n_max,
        if spectral.flagged { " [truncation flagged]" } else { "" },
        direct
            .map(|_| format!("; route gap {route_gap:.1e}"))
            .unwrap_or_default()
    ))
}

fn run_sweep(a: &CorrelateArgs, seed: u64, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let config = SweepConfig {
        cutoff: a.sweep_cutoff,
        samples: a.sweep_samples,
        seed,
        q_max: a.sweep_q_max,
        k: a.sweep_k,
        r: a.r,
        min_grid: a.min_grid,
        n_max: a.sweep_n_max,
        bins: a.bins,
        ..SweepConfig::default()
    };
    let rep = decay_sweep(&config, &map)?;
    out.json("sweep.json", &rep)?;
    out.with_header("histogram.csv", |w| rep.histogram.write_csv(w))?;
    let dat: Vec<Vec<String>> = rep
        .histogram
        .counts
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mid = 0.5 * (rep.histogram.edges[i] + rep.histogram.edges[i + 1]);
            vec![num(mid), n.to_string()]
        })
        .collect();
    out.dat("histogram.dat", &["center", "count"], &dat)?;
    let rows: Vec<Vec<String>> = rep
        .cells
        .iter()
        .map(|c| {
            vec![
                c.sample.to_string(),
                c.q.to_string(),
                c.base.map(num).unwrap_or_default(),
                c.grid.to_string(),
                c.flagged.to_string(),
            ]
        })
        .collect();
    out.csv("sweep_cells.csv", &["sample", "q", "base", "grid", "flagged"], &rows)?;
    let max = match (rep.max_base, rep.argmax) {
        (Some(b), Some((s, q))) => format!("max base {b:.6} at sample {s} q {q}"),
        _ => "every cell below the noise floor".into(),
    };
    Ok(format!(
        "correlate sweep: {} cells, {max}; thresholds {:.6} / {:.4}; {} flagged",
        rep.cells.len(),
        rep.upper_threshold,
        rep.lower_threshold,
        rep.flagged_cells
    ))
}

fn run_average(a: &AverageArgs, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let tau = parse_trig(&a.tau)?;
    let rep = frequency_average(&map, &tau, a.n, a.t, a.bump_nodes)?;

    let bump = Bump::new(a.bump_nodes)?;
    let set = periodic_points(&map, a.n)?;
    let birkhoff = set.birkhoff_sums(&map, &tau);
    let q_max = (2.0 * a.t).floor() as i64;
    let mut rows = Vec::new();
    let mut dat = Vec::new();
    for q in -q_max..=q_max {
        let s2 = set.trace_sum_from(&birkhoff, q).norm_sqr();
        rows.push(vec![q.to_string(), num(bump.psi(q as f64 / a.t)), num(s2)]);
        dat.push(vec![q.to_string(), num(s2)]);
    }
    out.csv("average.csv", &["q", "psi", "trace_sum_abs2"], &rows)?;
    out.dat("average.dat", &["q", "trace_sum_abs2"], &dat)?;
    out.json("average.json", &rep)?;
    if !rep.passed {
        return Err(Failure::Gate(format!(
            "averaging inequality fails: {:.6e} < {:.6e}",
            rep.lhs, rep.rhs
        )));
    }
    Ok(format!(
        "average: n={} T={} lhs {:.6} >= rhs {:.6} (psi_hat(0) {:.6}, {} points)",
        a.n, a.t, rep.lhs, rep.rhs, rep.psi_hat0, rep.points
    ))
}

fn run_thresholds(a: &ThresholdsArgs, out: &mut Output) -> Outcome {
    let map = parse_map(&a.map)?;
    let (lower, upper) = rate_thresholds(map.matrix())?;
    let lambda = map.expansion();
    out.json(
        "thresholds.json",
        &json!({ "lambda": lambda, "upper": upper, "lower": lower }),
    )?;
    out.csv(
        "thresholds.csv",
        &["lambda", "upper", "lower"],
        &[vec![num(lambda), num(upper), num(lower)]],
    )?;
    Ok(format!(
        "thresholds: lambda={} lambda^(-1/2)={} (~{upper:.6}) lambda^(-5/2)={} (~{lower:.4})",
        num(lambda),
        num(upper),
        num(lower)
    ))
}
