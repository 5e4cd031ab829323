//! One function per subcommand. Each writes its files into `config.out` and
//! returns the run summary (also written as `summary.json`).

use std::f64::consts::PI;

use lmglab::evolve::{
    analytic_sum, correlation_fn, eigensystem, observable_series_many, projected_init, projected_solution, EigenSystem, TimeGrid,
    TimeSeries,
};
use lmglab::model::{build_hamiltonian, ground_m, trial_localized_state, LmgParams};
use lmglab::oracle::{full_space_correlation, sector_vs_full, MAX_CORRELATION_N};
use lmglab::par::Exec;
use lmglab::spectra::{
    classify_mode, cut_and_project_sequence, find_peaks, intrinsic_frequencies, line_spectrum, periodogram, quasicrystal_h, Spectrum,
};
use lmglab::spinspace::{collective_operators, CollectiveOperators, StateVector};
use lmglab::ssb::{default_kick, degenerate_pt_gap, exponential_decay_rate, gamma0_gap_scan_with, localize_ground_state, tunnelling_alpha, perturbed_splitting};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{peaks_out, Sink, Summary, Table};
use crate::CliError;

/// Agreement required of `oracle` before it exits with a mismatch.
pub const ORACLE_TOL: f64 = 1e-9;

fn exec(c: &RunConfig) -> Exec {
    if c.jobs > 1 {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn require_isotropic(c: &RunConfig, what: &str) -> Result<(), CliError> {
    if c.gamma != 1.0 {
        return Err(CliError::Usage(format!("{what} needs the isotropic model (--gamma 1), got gamma = {}", c.gamma)));
    }
    Ok(())
}

fn require_broken(h: f64) -> Result<(), CliError> {
    if h >= 1.0 {
        return Err(CliError::Usage(format!("h must be in [0, 1) here, got {h}")));
    }
    Ok(())
}

fn summary(command: &'static str, c: &RunConfig) -> Summary {
    let mut s = Summary {
        command,
        n: c.n,
        h: c.h,
        gamma: c.gamma,
        g: None,
        m0: None,
        nu: 1.0 / c.n as f64,
        omega0: None,
        mode: None,
        delta_e: None,
        peaks: Vec::new(),
        files: Vec::new(),
        details: Map::new(),
    };
    if c.gamma == 1.0 && c.h < 1.0 {
        if let (Ok(f), Ok(m)) = (intrinsic_frequencies(c.n, c.h), classify_mode(c.n, c.h)) {
            s.m0 = Some(f.m0);
            s.omega0 = Some(f.omega0);
            s.mode = Some(m.label.to_string());
        }
    }
    s
}

fn finish(mut sink: Sink, mut s: Summary) -> Result<Summary, CliError> {
    sink.files.push("summary.json".into());
    s.files = sink.files.clone();
    sink.files.pop();
    sink.json("summary.json", &s)?;
    Ok(s)
}

fn mx_of(series: &TimeSeries, n: usize) -> Vec<f64> {
    series.re().iter().map(|v| 2.0 * v / n as f64).collect()
}

fn spectrum_of(grid: TimeGrid, mx: &[f64], c: &RunConfig) -> Result<Spectrum, CliError> {
    let mut spec = periodogram(&TimeSeries::real(grid, mx, "m_x")?, c.window, c.n)?;
    spec.peaks = find_peaks(&spec, c.threshold);
    Ok(spec)
}

/// Localized initial state and the unperturbed eigensystem it evolves under.
struct Prepared {
    psi: StateVector,
    delta_e: f64,
    eig: EigenSystem,
    ops: CollectiveOperators,
}

fn prepare(c: &RunConfig, h: f64) -> Result<Prepared, CliError> {
    let params = LmgParams::new(c.n, c.gamma, h)?;
    let sector = params.sector();
    let (psi, delta_e) = if c.trial {
        require_isotropic(c, "--trial")?;
        let t = trial_localized_state(&sector, h)?;
        (t.state, t.delta_e)
    } else {
        let l = localize_ground_state(&params, c.g, c.phi_n)?;
        (l.state, l.delta_e)
    };
    let eig = eigensystem(&build_hamiltonian(&params, &sector, 0.0, 0.0)?)?;
    Ok(Prepared { psi, delta_e, eig, ops: collective_operators(&sector) })
}

/// Exact `m_x, m_y` plus the truncated analytic sum (NaN off the isotropic model).
fn evolve_columns(c: &RunConfig, p: &Prepared, grid: &TimeGrid) -> Result<[Vec<f64>; 4], CliError> {
    let series = observable_series_many(&p.eig, &p.psi, &[(&p.ops.sx, "sx"), (&p.ops.sy, "sy")], grid, exec(c))?;
    let (mx, my) = (mx_of(&series[0], c.n), mx_of(&series[1], c.n));
    let (ax, ay) = if c.gamma == 1.0 {
        let modes = projected_init(&p.eig, &p.psi, c.h)?;
        let (ax, ay) = analytic_sum(&modes, c.cutoff_k, grid);
        (mx_of(&ax, c.n), mx_of(&ay, c.n))
    } else {
        log::warn!("analytic columns need gamma = 1; writing NaN");
        (vec![f64::NAN; grid.len], vec![f64::NAN; grid.len])
    };
    Ok([mx, my, ax, ay])
}

fn run_evolution<'a>(command: &'static str, c: &'a RunConfig) -> Result<(Sink<'a>, Summary, Prepared, TimeGrid, Spectrum), CliError> {
    let grid = TimeGrid::new(c.tmax, c.samples)?;
    let p = prepare(c, c.h)?;
    let [mx, my, ax, ay] = evolve_columns(c, &p, &grid)?;
    let spec = spectrum_of(grid, &mx, c)?;
    let mut sink = Sink::new(&c.out, c.format)?;
    sink.table(
        "timeseries",
        &Table::from_columns(&["t", "mx_exact", "my_exact", "mx_analytic", "my_analytic"], &[&grid.points(), &mx, &my, &ax, &ay]),
    )?;
    let mut s = summary(command, c);
    s.g = (!c.trial).then_some(c.g);
    s.delta_e = Some(p.delta_e);
    s.peaks = peaks_out(&spec.peaks);
    let dev = mx.iter().zip(&ax).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = mx.iter().map(|v| v.abs()).fold(0.0, f64::max);
    s.details.insert("max_dev_exact_analytic".into(), json!(dev));
    s.details.insert("mx_full_scale".into(), json!(scale));
    s.details.insert("trial".into(), json!(c.trial));
    Ok((sink, s, p, grid, spec))
}

pub fn cmd_evolve(c: &RunConfig) -> Result<Summary, CliError> {
    let (sink, s, ..) = run_evolution("evolve", c)?;
    finish(sink, s)
}

pub fn cmd_spectrum(c: &RunConfig) -> Result<Summary, CliError> {
    let (mut sink, mut s, p, _, spec) = run_evolution("spectrum", c)?;
    sink.table("spectrum", &Table::from_columns(&["freq_over_nu", "magnitude"], &[&spec.freq_bins, &spec.magnitudes]))?;
    sink.json("peaks.json", &json!({ "peaks": peaks_out(&spec.peaks) }))?;

    let nf = c.n as f64;
    let lines = line_spectrum(&p.eig, &p.psi, &p.ops.sx, 1e-14 * nf)?.one_sided(1e-9 / nf);
    let top = lines.first().map_or(0.0, |l| l.1);
    let mut t = Table::new(&["freq_over_nu", "amplitude"]);
    for (f, a) in lines.into_iter().filter(|l| l.1 >= c.threshold * top) {
        t.push(vec![(f * nf).into(), (2.0 * a / nf).into()]);
    }
    s.details.insert("exact_lines".into(), json!(t.rows.len()));
    sink.table("lines", &t)?;
    finish(sink, s)
}

fn explicit_hs(c: &RunConfig) -> Option<Vec<f64>> {
    c.h_list.clone().or_else(|| c.h_set.then(|| vec![c.h]))
}

pub fn cmd_modes(c: &RunConfig) -> Result<Summary, CliError> {
    require_isotropic(c, "modes")?;
    let explicit = explicit_hs(c);
    let nf = c.n as f64;
    // half-integer steps of N h cover round, crescent and generic fields
    let hs = explicit.clone().unwrap_or_else(|| (0..2 * c.n).map(|j| j as f64 / (2.0 * nf)).collect());
    for &h in &hs {
        require_broken(h)?;
    }
    let mut table = Table::new(&["h", "mode", "m0", "degenerate", "omega0_over_nu", "low_over_nu", "high_over_nu"]);
    for &h in &hs {
        let f = intrinsic_frequencies(c.n, h)?;
        let m = classify_mode(c.n, h)?;
        table.push(vec![
            h.into(),
            m.label.to_string().into(),
            f.m0.into(),
            usize::from(f.degenerate).into(),
            (f.omega0 * nf).into(),
            (f.low * nf).into(),
            (f.high * nf).into(),
        ]);
    }
    let mut waves = Vec::new();
    if let Some(hs) = &explicit {
        let grid = TimeGrid::new(c.tmax, c.samples)?;
        for &h in hs {
            let p = prepare(c, h)?;
            let mode = projected_init(&p.eig, &p.psi, h)?.into_iter().find(|m| m.k == 0).expect("k = 0 always present");
            let (sx, sy) = projected_solution(&mode, &grid);
            waves.push((h, grid, mx_of(&sx, c.n), mx_of(&sy, c.n)));
        }
    }
    let mut sink = Sink::new(&c.out, c.format)?;
    sink.table("modes", &table)?;
    let mut s = summary("modes", c);
    for (h, grid, mx, my) in &waves {
        sink.table(&format!("waveform_h{h}"), &Table::from_columns(&["t", "mx_k0", "my_k0"], &[&grid.points(), mx, my]))?;
        if explicit.as_ref().is_some_and(|v| v.len() == 1) {
            s.peaks = peaks_out(&spectrum_of(*grid, mx, c)?.peaks);
        }
    }
    s.details.insert("fields".into(), json!(hs.len()));
    finish(sink, s)
}

pub fn cmd_correlation(c: &RunConfig) -> Result<Summary, CliError> {
    require_isotropic(c, "correlation")?;
    let sector = LmgParams::isotropic(c.n, c.h)?.sector();
    let grid = TimeGrid::new(c.tmax, c.samples)?;
    let members = correlation_fn(&sector, c.h, &grid)?;
    let oracle = if c.n <= MAX_CORRELATION_N { Some(full_space_correlation(c.n, c.h, &grid)?) } else { None };
    let mut sink = Sink::new(&c.out, c.format)?;
    let mut s = summary("correlation", c);
    let nf = c.n as f64;
    let mut info = Vec::new();
    for m in &members {
        let m0 = m.m0.value();
        let (d, cl) = (&m.direct.values, &m.closed.values);
        let mut names = vec!["t", "re_direct", "im_direct", "re_closed", "im_closed"];
        let mut cols: Vec<Vec<f64>> = vec![
            grid.points(),
            d.iter().map(|v| v.re).collect(),
            d.iter().map(|v| v.im).collect(),
            cl.iter().map(|v| v.re).collect(),
            cl.iter().map(|v| v.im).collect(),
        ];
        let mut entry = json!({
            "m0": m0,
            "max_dev_direct_closed": m.direct.max_abs_diff(&m.closed),
            "lines": m.lines.iter().map(|l| json!({"freq_over_nu": l.freq * nf, "weight": l.weight})).collect::<Vec<_>>(),
        });
        let full = oracle.as_ref().and_then(|o| o.iter().find(|(mz, _)| (mz - m0).abs() < 1e-6));
        if let Some((_, f)) = full {
            names.extend(["re_oracle", "im_oracle"]);
            cols.push(f.values.iter().map(|v| v.re).collect());
            cols.push(f.values.iter().map(|v| v.im).collect());
            entry["max_dev_direct_oracle"] = json!(m.direct.max_abs_diff(f));
        }
        let refs: Vec<&[f64]> = cols.iter().map(|v| v.as_slice()).collect();
        sink.table(&format!("correlation_m{m0}"), &Table::from_columns(&names, &refs))?;
        info.push(entry);
    }
    s.details.insert("members".into(), Value::Array(info));
    finish(sink, s)
}

pub fn cmd_gap(c: &RunConfig) -> Result<Summary, CliError> {
    let sector = LmgParams::isotropic(c.n, c.h)?.sector();
    let mut sink = Sink::new(&c.out, c.format)?;
    let mut s = summary("gap", c);

    if ground_m(c.n, c.h)?.is_degenerate() {
        let gs = if c.g_set { vec![c.g] } else { vec![1e-6, 1e-5, 1e-4, 1e-3] };
        let first = degenerate_pt_gap(&sector, c.h, 1.0)?;
        let mut t = Table::new(&["g", "splitting", "first_order", "residual"]);
        for g in gs {
            let num = perturbed_splitting(&sector, c.h, g)?;
            let pt = 2.0 * g * first.sx_updown.abs();
            t.push(vec![g.into(), num.into(), pt.into(), (num - pt).abs().into()]);
        }
        s.details.insert("sx_updown".into(), json!(first.sx_updown));
        sink.table("gap_pt", &t)?;
    } else {
        s.details.insert("gap_pt".into(), json!("ground level not degenerate"));
    }

    if c.h > 0.0 && c.h < 1.0 {
        let ns = c.n_list.clone().unwrap_or_else(|| (20..=60).step_by(4).collect());
        let scan = gamma0_gap_scan_with(&ns, c.h, exec(c))?;
        let mut t = Table::new(&["n", "splitting", "two_alpha"]);
        for &(n, gap) in &scan {
            t.push(vec![n.into(), gap.into(), tunnelling_alpha(n, c.h)?.gap.into()]);
        }
        sink.table("gap_gamma0", &t)?;
        if scan.len() >= 2 {
            let rate = exponential_decay_rate(&scan)?;
            s.details.insert("decay_rate".into(), json!(rate));
            s.details.insert("minus_ln_h".into(), json!(-c.h.ln()));
        }
    }
    finish(sink, s)
}

pub fn cmd_quasicrystal(c: &RunConfig) -> Result<Summary, CliError> {
    let nf = c.n as f64;
    let hs = quasicrystal_h(c.n, c.kappa)?;
    // a longer record than the default resolves the two lines to 1e-3 in ratio
    let tmax = if c.tmax_set { c.tmax } else { 200.0 * PI * nf };
    let grid = TimeGrid::new(tmax, c.samples)?;
    let iso = RunConfig { gamma: 1.0, ..c.clone() };
    let rows = exec(c).map(&hs, |&h| -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let p = prepare(&iso, h)?;
        let mode = projected_init(&p.eig, &p.psi, h)?.into_iter().find(|m| m.k == 0).expect("k = 0 always present");
        let mx = mx_of(&projected_solution(&mode, &grid).0, c.n);
        let spec = spectrum_of(grid, &mx, c)?;
        let f = intrinsic_frequencies(c.n, h)?;
        let ratio = match spec.peaks.as_slice() {
            [a, b, ..] => a.freq_over_nu.min(b.freq_over_nu) / a.freq_over_nu.max(b.freq_over_nu),
            _ => f64::NAN,
        };
        let row = vec![h, f.m0, f.low * nf, f.high * nf, f.low.min(f.high) / f.low.max(f.high), ratio, (ratio - c.kappa).abs()];
        Ok((row, mx))
    });
    let rows: Vec<(Vec<f64>, Vec<f64>)> = rows.into_iter().collect::<Result<_, _>>()?;
    let mut table = Table::new(&["h", "m0", "low_over_nu", "high_over_nu", "ratio_exact", "ratio_measured", "ratio_error"]);
    for (r, _) in &rows {
        table.push(r.iter().map(|&v| v.into()).collect());
    }
    let worst = rows.iter().map(|(r, _)| r[6]).fold(0.0, f64::max);

    let mut sink = Sink::new(&c.out, c.format)?;
    sink.table("quasicrystal", &table)?;
    let mut s = summary("quasicrystal", c);
    s.g = Some(c.g);
    if let Some((r, mx)) = rows.first() {
        sink.table("waveform", &Table::from_columns(&["t", "mx0"], &[&grid.points(), mx]))?;
        s.h = r[0];
        s.peaks = peaks_out(&spectrum_of(grid, mx, c)?.peaks);
        s.m0 = Some(r[1]);
        s.mode = classify_mode(c.n, r[0]).ok().map(|m| m.label.to_string());
        s.omega0 = intrinsic_frequencies(c.n, r[0]).ok().map(|f| f.omega0);
    }
    let word = cut_and_project_sequence(c.kappa, 100);
    sink.raw("sequence.txt", &format!("{word}\n"))?;
    s.details.insert("kappa".into(), json!(c.kappa));
    s.details.insert("fields".into(), json!(hs.len()));
    s.details.insert("worst_ratio_error".into(), json!(worst));
    finish(sink, s)
}

pub fn cmd_oracle(c: &RunConfig) -> Result<Summary, CliError> {
    let ns = c.n_list.clone().unwrap_or_else(|| if c.n_set { vec![c.n] } else { vec![4, 6, 8, 10] });
    let hs = explicit_hs(c).unwrap_or_else(|| vec![0.3, 0.5, 0.7]);
    if let Some(&n) = ns.iter().find(|&&n| n > MAX_CORRELATION_N) {
        return Err(CliError::Usage(format!("oracle supports N <= {MAX_CORRELATION_N}, got {n}")));
    }
    let samples = if c.samples_set { c.samples } else { 64 };
    let points: Vec<(usize, f64)> = ns.iter().flat_map(|&n| hs.iter().map(move |&h| (n, h))).collect();
    let reports = exec(c).map(&points, |&(n, h)| {
        let tmax = if c.tmax_set { c.tmax } else { 40.0 * PI * n as f64 };
        let g = if c.g_set { c.g } else { default_kick(n) };
        sector_vs_full(n, h, g, &TimeGrid::new(tmax, samples)?)
    });
    let mut table = Table::new(&["n", "h", "ground_energy", "correlation", "localized_mx", "worst", "status"]);
    let mut worst: f64 = 0.0;
    for r in reports {
        let r = r?;
        worst = worst.max(r.worst());
        let status = if r.worst() <= ORACLE_TOL { "ok" } else { "mismatch" };
        table.push(vec![
            r.n.into(),
            r.h.into(),
            r.ground_energy.into(),
            r.correlation.into(),
            r.localized_mx.into(),
            r.worst().into(),
            status.to_string().into(),
        ]);
    }
    let mut sink = Sink::new(&c.out, c.format)?;
    sink.table("oracle", &table)?;
    let mut s = summary("oracle", c);
    s.details.insert("worst".into(), json!(worst));
    s.details.insert("tolerance".into(), json!(ORACLE_TOL));
    let s = finish(sink, s)?;
    if !(worst <= ORACLE_TOL) {
        return Err(CliError::Mismatch(format!("sector and full space differ by {worst:.3e} (tolerance {ORACLE_TOL:e})")));
    }
    Ok(s)
}
