use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::thread;

use klein_core::oracle::{sharp_limit_with_tol, SharpLimit};
use klein_core::scatter::{solve_combined, unitarity_report, ZoneAmplitudes};
use klein_core::wavepacket::{
    build_gaussian, evolve, reflection_and_penetration, KleinTreatment, PacketDiagnostics,
    PacketState,
};
use klein_core::{
    classify_zone, solve, Channel, Complex64, EnergyZone, Error, Family, PhysParams,
    ScatterSolution,
};

use crate::output::{csv_number, emit, svg_line_plot, write_file, Json};
use crate::{
    Cli, CliError, Command, Format, PacketArgs, SolveArgs, SweepArgs, Treatment, VerifyArgs,
    OUT_DIR_ENV,
};

pub const SWEEP_HEADER: &str = "E,zone,R2,T2,Rv2,Tv2,unitarity_defect,J_left,J_right";
pub const SNAPSHOT_HEADER: &str = "x,re_upper,im_upper,re_lower,im_lower,density";

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let params = PhysParams::new(cli.mass, cli.height)?;
    let out = cli.out.as_deref().map(redirect);
    let out = out.as_deref();
    match &cli.command {
        Command::Solve(args) => cmd_solve(&params, args, out, cli.format),
        Command::Sweep(args) => cmd_sweep(&params, args, out, cli.format),
        Command::Packet(args) => cmd_packet(&params, args, out, cli.format),
        Command::Verify(args) => cmd_verify(&params, args, out, cli.format),
        Command::Zones => cmd_zones(&params, out, cli.format),
    }
}

/// Applies `KLEIN_OUT_DIR` to a user-supplied output path.
fn redirect(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => match path.file_name() {
            Some(name) => Path::new(&dir).join(name),
            None => PathBuf::from(dir),
        },
        _ => path.to_path_buf(),
    }
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Input(format!("`{command}` does not support --format {format:?}").to_lowercase())
}

fn params_json(params: &PhysParams) -> Json {
    Json::obj()
        .with("m", params.mass())
        .with("V", params.height())
}

fn channel_json(channel: &Channel) -> Json {
    match *channel {
        Channel::Particle { k, alpha } => Json::obj()
            .with("kind", "particle")
            .with("k", k)
            .with("alpha", alpha),
        Channel::Antiparticle { p, beta } => Json::obj()
            .with("kind", "antiparticle")
            .with("p", p)
            .with("beta", beta),
        Channel::Evanescent { kappa, gamma } => Json::obj()
            .with("kind", "evanescent")
            .with("kappa", kappa)
            .with("gamma", gamma),
    }
}

/// Full record of the stationary solution at one energy.
pub fn solution_json(
    params: &PhysParams,
    energy: f64,
    weight: Option<f64>,
) -> Result<Json, CliError> {
    let base = solve(params, energy, Family::Traditional)?;
    let kin = base.kin;
    let mut doc = params_json(params)
        .with("E", energy)
        .with("zone", kin.zone.as_str())
        .with("k", kin.k)
        .with("alpha", kin.alpha)
        .with("right_channel", channel_json(&kin.right));
    doc = match base.amps {
        ZoneAmplitudes::Klein(a) => {
            let report = unitarity_report(params, energy)?;
            let combined = solve_combined(params, energy, weight.map(|w| Complex64::new(w, 0.0)))?;
            let Family::Combined(w) = combined.family else {
                unreachable!("solve_combined always tags its family")
            };
            doc.with("A", a.a)
                .with("B", a.b)
                .with("C", a.c)
                .with("D", a.d)
                .with("R", a.r)
                .with("T", a.t)
                .with("R_virtual", a.r_virt)
                .with("T_virtual", a.t_virt)
                .with("R2", a.r.norm_sqr())
                .with("T2", a.t.norm_sqr())
                .with("Rv2", a.r_virt.norm_sqr())
                .with("Tv2", a.t_virt.norm_sqr())
                .with(
                    "unitarity",
                    Json::obj()
                        .with("electron_exit_sum", report.sum_traditional)
                        .with("antiparticle_exit_sum", report.sum_virtual)
                        .with("defect", unitarity_defect(&base)?)
                        .with("A_minus_C", report.a_eq_c_gap),
                )
                .with(
                    "combined",
                    Json::obj()
                        .with("weight", w)
                        .with("reflection", combined.left_coefficients().1)
                        .with("current", combined.current()),
                )
        }
        ZoneAmplitudes::Evanescent {
            reflected,
            decaying,
        } => doc
            .with("A", reflected)
            .with("B", decaying)
            .with("R", reflected)
            .with("R2", reflected.norm_sqr())
            .with("T2", 0.0)
            .with(
                "unitarity",
                Json::obj().with("defect", unitarity_defect(&base)?),
            ),
        ZoneAmplitudes::OverBarrier {
            reflected,
            transmitted,
            r,
            t,
        } => doc
            .with("A", reflected)
            .with("B", transmitted)
            .with("R", r)
            .with("T", t)
            .with("R2", r.norm_sqr())
            .with("T2", t.norm_sqr())
            .with(
                "unitarity",
                Json::obj().with("defect", unitarity_defect(&base)?),
            ),
    };
    Ok(doc
        .with("J_left", base.evaluate_left_limit().current())
        .with("J_right", base.evaluate_right_limit().current()))
}

fn unitarity_defect(sol: &ScatterSolution) -> Result<f64, CliError> {
    Ok(match sol.amps {
        ZoneAmplitudes::Klein(_) => {
            let report = unitarity_report(&sol.params, sol.energy())?;
            (report.sum_traditional - 1.0)
                .abs()
                .max((report.sum_virtual - 1.0).abs())
        }
        ZoneAmplitudes::Evanescent { reflected, .. } => (reflected.norm_sqr() - 1.0).abs(),
        ZoneAmplitudes::OverBarrier { r, t, .. } => (r.norm_sqr() + t.norm_sqr() - 1.0).abs(),
    })
}

/// One CSV row in [`SWEEP_HEADER`] order.
pub fn sweep_row(params: &PhysParams, energy: f64) -> Result<(EnergyZone, f64, String), CliError> {
    let sol = solve(params, energy, Family::Traditional)?;
    let (r2, t2, virt) = match sol.amps {
        ZoneAmplitudes::Klein(a) => (
            a.r.norm_sqr(),
            a.t.norm_sqr(),
            Some((a.r_virt.norm_sqr(), a.t_virt.norm_sqr())),
        ),
        ZoneAmplitudes::Evanescent { reflected, .. } => (reflected.norm_sqr(), 0.0, None),
        ZoneAmplitudes::OverBarrier { r, t, .. } => (r.norm_sqr(), t.norm_sqr(), None),
    };
    let (rv2, tv2) = virt.map_or((String::new(), String::new()), |(a, b)| {
        (csv_number(a), csv_number(b))
    });
    let row = [
        csv_number(energy),
        sol.zone().as_str().to_owned(),
        csv_number(r2),
        csv_number(t2),
        rv2,
        tv2,
        csv_number(unitarity_defect(&sol)?),
        csv_number(sol.evaluate_left_limit().current()),
        csv_number(sol.evaluate_right_limit().current()),
    ]
    .join(",");
    Ok((sol.zone(), r2, row))
}

fn cmd_solve(
    params: &PhysParams,
    args: &SolveArgs,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    match format.unwrap_or(Format::Json) {
        Format::Json => emit(
            out,
            &solution_json(params, args.energy, args.weight)?.render(),
        ),
        Format::Csv => {
            let (_, _, row) = sweep_row(params, args.energy)?;
            emit(out, &format!("{SWEEP_HEADER}\n{row}\n"))
        }
        f => Err(unsupported("solve", f)),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn cmd_sweep(
    params: &PhysParams,
    args: &SweepArgs,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    let m = params.mass();
    if !(args.emin > m && args.emin.is_finite()) {
        return Err(CliError::Input(format!(
            "--emin must exceed m = {m}, got {}",
            args.emin
        )));
    }
    if !(args.emax.is_finite() && args.emax >= args.emin) {
        return Err(CliError::Input(format!(
            "--emax must be finite and at least --emin, got {}",
            args.emax
        )));
    }
    if args.n < 2 {
        return Err(CliError::Input(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut curve = Vec::with_capacity(args.n);
    let mut skipped = Vec::new();
    for e in linspace(args.emin, args.emax, args.n) {
        match sweep_row(params, e) {
            Ok((_, r2, row)) => {
                csv.push_str(&row);
                csv.push('\n');
                curve.push((e, r2));
            }
            Err(CliError::Core(Error::BranchPoint { boundary, .. })) => {
                log::warn!("skipping E = {e}: within branch tolerance of {boundary}");
                skipped.push(Json::Num(e));
            }
            Err(err) => return Err(err),
        }
    }
    if curve.is_empty() {
        log::warn!(
            "no energy in [{}, {}] could be evaluated",
            args.emin,
            args.emax
        );
    }
    let svg = || {
        svg_line_plot(
            &curve,
            "E",
            "|R|^2",
            &format!("m = {m}, V = {}", params.height()),
        )
    };
    match format.unwrap_or(Format::Csv) {
        Format::Csv => emit(out, &csv)?,
        Format::Svg => emit(out, &svg())?,
        f => return Err(unsupported("sweep", f)),
    }
    if let Some(plot) = &args.plot {
        write_file(&redirect(plot), &svg())?;
    }
    if let Some(path) = out {
        let meta = params_json(params)
            .with("command", "sweep")
            .with("emin", args.emin)
            .with("emax", args.emax)
            .with("n", args.n)
            .with("accepted", curve.len())
            .with("skipped", skipped)
            .with("columns", SWEEP_HEADER)
            .with("generator", concat!("klein ", env!("CARGO_PKG_VERSION")));
        write_file(&sidecar(path), &meta.render())?;
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn snapshot_csv(state: &PacketState) -> String {
    let mut csv = String::with_capacity(state.x.len() * 128);
    csv.push_str(SNAPSHOT_HEADER);
    csv.push('\n');
    for (x, psi) in state.x.iter().zip(&state.field) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            csv_number(*x),
            csv_number(psi.upper.re),
            csv_number(psi.upper.im),
            csv_number(psi.lower.re),
            csv_number(psi.lower.im),
            csv_number(psi.density())
        );
    }
    csv
}

fn diagnostics_json(d: &PacketDiagnostics) -> Json {
    Json::obj()
        .with("refl_norm", d.refl_norm)
        .with("pen_prob", d.pen_prob)
        .with("trans_norm", d.trans_norm)
}

fn cmd_packet(
    params: &PhysParams,
    args: &PacketArgs,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    let format = format.unwrap_or(Format::Csv);
    if format == Format::Json {
        return Err(unsupported("packet", format));
    }
    if args.snapshots == 0 {
        return Err(CliError::Input("--snapshots must be at least 1".into()));
    }
    let treatment = match args.treatment {
        Treatment::Virtual => KleinTreatment::VirtualIncidence,
        Treatment::Traditional => KleinTreatment::Traditional,
    };
    let grid = build_gaussian(params, args.center, args.sigma, args.n)?.with_treatment(treatment);
    let t_final = match args.time {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => {
            return Err(CliError::Input(format!(
                "--t must be finite and non-negative, got {t}"
            )))
        }
        None => grid.asymptotic_time(),
    };
    let xs = grid.suggested_x_grid(t_final);
    let times: Vec<f64> = if args.snapshots == 1 {
        vec![t_final]
    } else {
        linspace(0.0, t_final, args.snapshots)
    };
    let states: Vec<Result<PacketState, Error>> = thread::scope(|s| {
        let handles: Vec<_> = times
            .iter()
            .map(|&t| {
                let (grid, xs) = (&grid, &xs);
                s.spawn(move || evolve(grid, t, xs))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("snapshot worker panicked"))
            .collect()
    });

    let dir = out.map_or_else(|| redirect(Path::new("packet")), Path::to_path_buf);
    let mut snapshots = Vec::with_capacity(states.len());
    let mut last = None;
    let mut max_pen = f64::NEG_INFINITY;
    for (i, state) in states.into_iter().enumerate() {
        let state = state?;
        let file = format!("snapshot_{i:03}.csv");
        write_file(&dir.join(&file), &snapshot_csv(&state))?;
        if format == Format::Svg {
            let curve: Vec<(f64, f64)> = state.x.iter().copied().zip(state.density()).collect();
            let title = format!("t = {:.3}", state.time);
            write_file(
                &dir.join(format!("snapshot_{i:03}.svg")),
                &svg_line_plot(&curve, "x", "density", &title),
            )?;
        }
        let d = reflection_and_penetration(&state);
        max_pen = max_pen.max(d.pen_prob);
        snapshots.push(
            diagnostics_json(&d)
                .with("time", state.time)
                .with("file", file),
        );
        last = Some(d);
    }
    let last = last.expect("at least one snapshot");
    let fractions = grid
        .zone_fractions()
        .into_iter()
        .fold(Json::obj(), |acc, (zone, f)| acc.with(zone.as_str(), f));
    let expected = grid
        .zones
        .iter()
        .all(|&z| z == EnergyZone::OverBarrier)
        .then(|| grid.spectral_transmission())
        .transpose()?;
    let summary = params_json(params)
        .with("E0", args.center)
        .with("sigma", args.sigma)
        .with("samples", grid.energies.len())
        .with(
            "treatment",
            match args.treatment {
                Treatment::Virtual => "virtual",
                Treatment::Traditional => "traditional",
            },
        )
        .with("launch", grid.launch)
        .with("straddles_zones", grid.straddles)
        .with("final_time", t_final)
        .with("refl_norm", last.refl_norm)
        .with("pen_prob", last.pen_prob)
        .with("trans_norm", last.trans_norm)
        .with("max_pen_prob", max_pen)
        .with("expected_transmission", expected)
        .with("zone_fractions", fractions)
        .with("snapshots", snapshots);
    write_file(&dir.join("summary.json"), &summary.render())?;
    emit(None, &summary.render())
}

/// Three interior points per zone; the Klein zone is omitted when absent.
pub fn default_verify_energies(params: &PhysParams) -> Vec<f64> {
    let m = params.mass();
    let mut energies = Vec::with_capacity(9);
    let interior = |lo: f64, hi: f64| [0.25, 0.5, 0.75].map(|f| lo + f * (hi - lo));
    if let Some((lo, hi)) = params.klein_interval() {
        energies.extend(interior(lo, hi));
    }
    let (lo, hi) = params.evanescent_interval();
    energies.extend(interior(lo, hi));
    let top = params.height() + m;
    energies.extend([0.5, 1.0, 2.0].map(|f| top + f * m));
    energies
}

struct VerifyRow {
    energy: f64,
    zone: EnergyZone,
    exact: Complex64,
    limit: SharpLimit,
    gap: f64,
}

fn verify_one(
    params: &PhysParams,
    energy: f64,
    widths: &[f64],
    tol: f64,
) -> Result<VerifyRow, CliError> {
    let zone = classify_zone(params, energy)?;
    if zone == EnergyZone::SubThreshold {
        return Err(Error::SubThresholdEnergy {
            energy,
            mass: params.mass(),
        }
        .into());
    }
    let exact_sol = solve(params, energy, Family::Traditional)?;
    let exact = exact_sol.left_coefficients().1;
    let limit = sharp_limit_with_tol(params, energy, widths, tol)?;
    let mut gap = (limit.reflection - exact).norm();
    if let (ZoneAmplitudes::Klein(a), Some(v)) = (exact_sol.amps, limit.virtual_reflection) {
        gap = gap.max((v - a.r_virt).norm());
    }
    Ok(VerifyRow {
        energy,
        zone,
        exact,
        limit,
        gap,
    })
}

fn cmd_verify(
    params: &PhysParams,
    args: &VerifyArgs,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    if !(args.amin > 0.0 && args.amin.is_finite()) {
        return Err(CliError::Input(format!(
            "--amin must be positive, got {}",
            args.amin
        )));
    }
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(CliError::Input(format!(
            "--tol must lie in (0, 1), got {}",
            args.tol
        )));
    }
    let energies = args
        .energies
        .clone()
        .unwrap_or_else(|| default_verify_energies(params));
    if energies.is_empty() {
        return Err(CliError::Input("no energies to verify".into()));
    }
    let widths = [4.0 * args.amin, 2.0 * args.amin, args.amin];
    let rows: Vec<Result<VerifyRow, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = energies
            .iter()
            .map(|&e| s.spawn(move || verify_one(params, e, &widths, args.tol)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verify worker panicked"))
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.gap <= args.threshold);

    let report = match format.unwrap_or(Format::Csv) {
        Format::Json => params_json(params)
            .with(
                "widths",
                widths.iter().map(|&a| Json::Num(a)).collect::<Vec<_>>(),
            )
            .with("tol", args.tol)
            .with("threshold", args.threshold)
            .with(
                "rows",
                rows.iter()
                    .map(|r| {
                        Json::obj()
                            .with("E", r.energy)
                            .with("zone", r.zone.as_str())
                            .with("exact", r.exact)
                            .with("extrapolated", r.limit.reflection)
                            .with("order", r.limit.order)
                            .with("gap", r.gap)
                            .with("pass", r.gap <= args.threshold)
                    })
                    .collect::<Vec<_>>(),
            )
            .with("max_gap", max_gap)
            .with("pass", pass)
            .render(),
        Format::Csv => {
            let mut table = format!(
                "{:>12} {:>12} {:>24} {:>24} {:>6} {:>10}  status\n",
                "E", "zone", "R exact", "R extrapolated", "order", "gap"
            );
            for r in &rows {
                let _ = writeln!(
                    table,
                    "{:>12.6} {:>12} {:>24} {:>24} {:>6.2} {:>10.2e}  {}",
                    r.energy,
                    r.zone.as_str(),
                    complex_cell(r.exact),
                    complex_cell(r.limit.reflection),
                    r.limit.order,
                    r.gap,
                    if r.gap <= args.threshold {
                        "PASS"
                    } else {
                        "FAIL"
                    }
                );
            }
            let _ = writeln!(
                table,
                "max gap {max_gap:.3e} (threshold {:.0e}): {}",
                args.threshold,
                if pass { "PASS" } else { "FAIL" }
            );
            table
        }
        f => return Err(unsupported("verify", f)),
    };
    emit(out, &report)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "max gap {max_gap:.3e} exceeds threshold {:.0e}",
            args.threshold
        )))
    }
}

fn complex_cell(z: Complex64) -> String {
    format!("{:+.8}{:+.8}i", z.re, z.im)
}

fn cmd_zones(
    params: &PhysParams,
    out: Option<&Path>,
    format: Option<Format>,
) -> Result<(), CliError> {
    let m = params.mass();
    let v = params.height();
    let (ev_lo, ev_hi) = params.evanescent_interval();
    let klein = params.klein_interval();
    match format.unwrap_or(Format::Csv) {
        Format::Json => {
            let interval = |lo: f64, hi: f64| Json::obj().with("lo", lo).with("hi", hi);
            let doc = params_json(params)
                .with(
                    "boundaries",
                    params
                        .boundaries()
                        .iter()
                        .map(|&b| Json::Num(b))
                        .collect::<Vec<_>>(),
                )
                .with("branch_tolerance", params.branch_tolerance())
                .with("subthreshold", interval(f64::NEG_INFINITY, m))
                .with("klein", klein.map(|(lo, hi)| interval(lo, hi)))
                .with("evanescent", interval(ev_lo, ev_hi))
                .with("overbarrier", interval(v + m, f64::INFINITY));
            emit(out, &doc.render())
        }
        Format::Csv => {
            let mut text = String::from("zone,lo,hi\n");
            let _ = writeln!(text, "subthreshold,,{}", csv_number(m));
            if let Some((lo, hi)) = klein {
                let _ = writeln!(text, "klein,{},{}", csv_number(lo), csv_number(hi));
            }
            let _ = writeln!(
                text,
                "evanescent,{},{}",
                csv_number(ev_lo),
                csv_number(ev_hi)
            );
            let _ = writeln!(text, "overbarrier,{},", csv_number(v + m));
            emit(out, &text)
        }
        f => Err(unsupported("zones", f)),
    }
}
