use std::fs::File;
use std::io::BufReader;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgkink_core::backlund::{backlund_residual, forward_transform, inverse_transform};
use sgkink_core::exact::{a_of_beta, kink_state, sample_state, BreatherParams, ExactSolution, KinkParams};
use sgkink_core::field::{pair_energy_norm, Field, Grid};
use sgkink_core::integrator::{conserved_quantities, evolve_observed, EvolveOptions, Stepper};
use sgkink_core::io::{read_rows, Snapshot};
use sgkink_core::scattering::{
    extract_w_at, free_evolution, gamma_profile, lorentz_boost_field, phase_law, predict_asymptotics,
    to_complex_u, ExtractionMethod, Prediction, PredictionTarget,
};
use sgkink_core::tracker::{exterior_decay_check, fit_decay_exponent, CenterMode, Tracker};
use sgkink_core::{State, Topology};

use crate::config::{ConservationCase, ExperimentConfig, ExperimentKind, Perturbation};
use crate::error::{Context, LabError, Result};
use crate::report::{Check, Report, Table};

/// Runs the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut r = Report::new(cfg.clone());
    match cfg.name {
        ExperimentKind::KinkStability => kink_stability(cfg, &mut r)?,
        ExperimentKind::BacklundRoundtrip => backlund_roundtrip(cfg, &mut r)?,
        ExperimentKind::Conservation => conservation(cfg, &mut r)?,
        ExperimentKind::SmallDataScattering => small_data_scattering(cfg, &mut r)?,
        ExperimentKind::Wobbler => wobbler(cfg, &mut r)?,
        ExperimentKind::ExteriorDecay => exterior_decay(cfg, &mut r)?,
    }
    Ok(r)
}

/// `eps * (u0, u1)` for the configured perturbation, centered at `x0`.
pub fn perturbation(cfg: &ExperimentConfig, grid: &Grid) -> Result<(Field, Field)> {
    let eps = cfg.epsilon;
    let x0 = cfg.x0;
    let (u0, u1) = match &cfg.perturbation {
        Perturbation::Gaussian => {
            let f = Field::from_fn(*grid, |x| eps * (-(x - x0) * (x - x0)).exp()).context("perturbation")?;
            (f.clone(), f)
        }
        Perturbation::OddSech => {
            let f = Field::from_fn(*grid, |x| {
                let z = x - x0;
                eps * z.tanh() / z.cosh()
            })
            .context("perturbation")?;
            (f.clone(), f)
        }
        Perturbation::Custom(p) => {
            let path = cfg.resolve(p);
            let file = File::open(&path).map_err(|source| LabError::Io {
                path: path.clone(),
                source,
            })?;
            let rows = read_rows(BufReader::new(file), 3).context("custom perturbation")?;
            if rows.len() != grid.len() {
                return Err(LabError::Config(format!(
                    "{} has {} rows, grid has {} nodes",
                    path.display(),
                    rows.len(),
                    grid.len()
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                if (row[0] - grid.x(i)).abs() > 1e-9 * grid.length() {
                    return Err(LabError::Config(format!("{}: row {i} is off the grid", path.display())));
                }
            }
            let u0 = Field::new(*grid, rows.iter().map(|r| eps * r[1]).collect()).context("custom u0")?;
            let u1 = Field::new(*grid, rows.iter().map(|r| eps * r[2]).collect()).context("custom u1")?;
            (u0, u1)
        }
    };
    Ok((u0, u1))
}

/// Kink `Q(.; beta0, x0)` plus the configured perturbation.
pub fn perturbed_kink(cfg: &ExperimentConfig) -> Result<State> {
    let grid = cfg.grid()?;
    let p = KinkParams::new(cfg.beta0, cfg.x0).context("kink parameters")?;
    let k = kink_state(&p, &grid, 0.0).context("kink state")?;
    let (u0, u1) = perturbation(cfg, &grid)?;
    State::new(
        k.phi().try_add(&u0).context("perturbed kink")?,
        k.phi_t().try_add(&u1).context("perturbed kink")?,
        0.0,
        Topology::Kink,
    )
    .context("perturbed kink")
}

/// Smooth random field with `H^1 x L^2` size `size`, drawn from `seed`.
pub fn random_small_field(grid: &Grid, seed: u64, size: f64) -> Result<State> {
    if size == 0.0 {
        return State::new(Field::zeros(*grid), Field::zeros(*grid), 0.0, Topology::Zero).context("zero field");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bumps = |k: usize| -> Result<Field> {
        let b: Vec<(f64, f64, f64)> = (0..k)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.5..3.0)))
            .collect();
        Field::from_fn(*grid, |x| b.iter().map(|(c, x0, w)| c * (-(x - x0) * (x - x0) / w).exp()).sum())
            .context("random field")
    };
    let p = bumps(4)?;
    let pt = bumps(4)?;
    let s = size / pair_energy_norm(&p, &pt).context("random field norm")?;
    State::new(p.scale(s), pt.scale(s), 0.0, Topology::Zero).context("random field")
}

fn snapshots_every(cfg: &ExperimentConfig) -> EvolveOptions {
    EvolveOptions {
        t_end: cfg.t_end,
        snapshot_every: cfg.snapshot_every,
        keep_states: false,
    }
}

fn save(cfg: &ExperimentConfig, r: &mut Report, name: &str, s: &State) {
    if cfg.save_snapshots {
        r.snapshots.push((name.to_string(), Snapshot::State(s.clone())));
    }
}

fn kink_stability(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let eps = cfg.epsilon;
    let scheme = cfg.scheme()?;
    let f0 = perturbed_kink(cfg)?;
    let inv = inverse_transform(&f0, cfg.beta0, cfg.x0).context("inverse transform")?;
    r.set("inverse_beta", inv.beta);
    r.set("inverse_delta", inv.delta);
    r.set("inverse_y0", inv.y0);
    r.set("inverse_residual", inv.residual_norm);
    r.set(
        "phi0_pair_energy",
        pair_energy_norm(inv.phi.phi(), inv.phi.phi_t()).context("phi norm")?,
    );
    let a = a_of_beta(inv.beta);
    let mut ortho = Tracker::new(inv.beta, inv.y0, CenterMode::Orthogonality)
        .context("tracker")?
        .with_radii(vec![cfg.exterior_radius]);
    let mut pi = Tracker::new(inv.beta, inv.y0, CenterMode::PiLevel).context("tracker")?;
    let mut fs = Stepper::new(&f0, scheme).context("stepper")?;
    let mut ps = Stepper::new(&inv.phi, scheme).context("stepper")?;
    let mut table = Table::new(&[
        "t",
        "center",
        "center_pi",
        "velocity",
        "diff_linf",
        "diff_deriv_l2plinf",
        "diff_pair_energy",
        "exterior_l2",
        "phi_linf",
        "phi_pair_energy",
        "backlund_residual",
    ]);
    let steps = (cfg.t_end / cfg.snapshot_every).round() as usize;
    let mut last = f0.clone();
    for k in 0..=steps {
        let t = k as f64 * cfg.snapshot_every;
        fs.advance_to(t).context("evolving f")?;
        ps.advance_to(t).context("evolving phi")?;
        let f = fs.state();
        let phi = ps.state();
        let p = ortho.observe(&f).context("orthogonality center")?.clone();
        let c_pi = pi.observe(&f).context("pi-level center")?.center;
        let (r1, r2) = backlund_residual(&f, &phi, a).context("Backlund residual")?;
        table.push(vec![
            t,
            p.center,
            c_pi,
            p.velocity,
            p.diff_linf,
            p.diff_deriv_l2plinf,
            p.diff_pair_energy,
            p.exterior_l2[0].1,
            phi.phi().sup_norm(),
            pair_energy_norm(phi.phi(), phi.phi_t()).context("phi norm")?,
            r1.sup_norm().max(r2.sup_norm()),
        ]);
        last = f;
    }
    save(cfg, r, "final", &last);
    let col = |n: &str| table.column(n).expect("column");
    let (ts, c, cpi, linf, pe) = (col("t"), col("center"), col("center_pi"), col("diff_linf"), col("diff_pair_energy"));
    let c0 = c[0];
    let dev = c.iter().map(|v| (v - c0).abs()).fold(0.0, f64::max);
    let pe_max = ts
        .iter()
        .zip(&pe)
        .filter(|(t, _)| **t <= 100.0)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    r.set("max_center_deviation", dev);
    r.set("max_pair_energy_t100", pe_max);
    if eps > 0.0 {
        // smallest C with |c_ortho - c_pi| <= 10 eps <t>^-1/2 C
        let cfit = ts
            .iter()
            .zip(c.iter().zip(&cpi))
            .map(|(t, (a, b))| (a - b).abs() / (10.0 * eps * (1.0 + t * t).powf(-0.25)))
            .fold(0.0, f64::max);
        r.set("mode_agreement_constant", cfit);
    }
    r.set(
        "max_mode_difference",
        c.iter().zip(&cpi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    );
    r.set("final_phi_linf", col("phi_linf").last().copied().unwrap_or(f64::NAN));
    r.set(
        "max_backlund_residual",
        col("backlund_residual").into_iter().fold(0.0, f64::max),
    );
    let at = |t0: f64| ts.iter().position(|t| (t - t0).abs() < 1e-9).map(|i| linf[i]);
    if let (Some(a5), Some(a100)) = (at(5.0), at(100.0)) {
        r.set("diff_linf_ratio_100_5", a100 / a5);
        r.check(Check::at_most(
            "diff_linf(100) / diff_linf(5)",
            a100 / a5,
            cfg.tolerances.diff_linf_decrease,
        ));
    }
    let tol = &cfg.tolerances;
    r.check(Check::at_most("center deviation", dev, tol.center_factor * eps));
    r.check(Check::at_most("pair energy distance (t <= 100)", pe_max, tol.pair_energy_factor * eps));
    r.tables.insert("track".into(), table);
    Ok(())
}

fn backlund_roundtrip(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let phi = random_small_field(&grid, cfg.seed, cfg.epsilon)?;
    let a = a_of_beta(cfg.beta0);
    let f = forward_transform(&phi, a, cfg.x0).context("forward transform")?;
    let (r1, r2) = backlund_residual(&f, &phi, a).context("Backlund residual")?;
    let fwd = r1.sup_norm().max(r2.sup_norm());
    let inv = inverse_transform(&f, cfg.beta0, cfg.x0).context("inverse transform")?;
    let e0 = inv.phi.phi().try_sub(phi.phi()).context("round trip")?.sup_norm();
    let e1 = inv.phi.phi_t().try_sub(phi.phi_t()).context("round trip")?.sup_norm();
    r.set("forward_residual", fwd);
    r.set("inverse_residual", inv.residual_norm);
    r.set("inverse_delta", inv.delta);
    r.set("inverse_y", inv.y);
    r.set("roundtrip_phi", e0);
    r.set("roundtrip_phi_t", e1);
    let tol = &cfg.tolerances;
    if cfg.epsilon == 0.0 {
        let k = kink_state(&KinkParams::new(cfg.beta0, cfg.x0).context("kink")?, &grid, 0.0).context("kink")?;
        let ke = f.phi().try_sub(k.phi()).context("kink error")?.sup_norm();
        r.set("kink_error", ke);
        r.check(Check::at_most("forward transform of zero vs kink", ke, tol.backlund_residual));
    }
    r.check(Check::at_most("forward Backlund residual", fwd, tol.backlund_residual));
    r.check(Check::at_most("inverse residual", inv.residual_norm, tol.backlund_residual));
    r.check(Check::at_most("round trip phi", e0, tol.roundtrip));
    r.check(Check::at_most("round trip phi_t", e1, tol.roundtrip));
    save(cfg, r, "f", &f);
    save(cfg, r, "phi", &inv.phi);
    Ok(())
}

fn conservation_initial(cfg: &ExperimentConfig, case: ConservationCase) -> Result<State> {
    let grid = cfg.grid()?;
    match case {
        ConservationCase::Kink => {
            let p = KinkParams::new(cfg.beta0, cfg.x0).context("kink")?;
            kink_state(&p, &grid, 0.0).context("kink")
        }
        ConservationCase::Breather => {
            let b = BreatherParams::new(0.0, 0.5, 0.0, cfg.x0).context("breather")?;
            sample_state(&ExactSolution::Breather(b), &grid, 0.0).context("breather")
        }
        ConservationCase::PerturbedKink => perturbed_kink(cfg),
    }
}

fn conservation(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let scheme = cfg.scheme()?;
    let tol = cfg.tolerances;
    for &case in &cfg.cases {
        let s0 = conservation_initial(cfg, case)?;
        let q0 = conserved_quantities(&s0).context("conserved quantities")?;
        let mut table = Table::new(&["t", "E0", "P", "E2", "E4"]);
        let mut worst = [0.0f64; 4];
        evolve_observed(&s0, scheme, snapshots_every(cfg), |s| {
            let q = conserved_quantities(s)?;
            let d = q.relative_drift(&q0);
            for i in 0..4 {
                worst[i] = worst[i].max(d[i]);
            }
            table.push(vec![s.time(), q.e0, q.p, q.e2, q.e4]);
            Ok(Vec::new())
        })
        .context(case.as_str())?;
        let name = case.as_str();
        for (i, (label, limit)) in [
            ("E0", tol.drift_e0_p),
            ("P", tol.drift_e0_p),
            ("E2", tol.drift_e2_e4),
            ("E4", tol.drift_e2_e4),
        ]
        .into_iter()
        .enumerate()
        {
            r.set(&format!("{name}_drift_{label}"), worst[i]);
            r.set(&format!("{name}_initial_{label}"), q0.as_array()[i]);
            r.check(Check::at_most(&format!("{name} {label} drift"), worst[i], limit));
        }
        r.tables.insert(format!("conservation_{name}"), table);
    }
    Ok(())
}

fn small_data_scattering(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let scheme = cfg.scheme()?;
    let spec = cfg.packet_spec()?;
    let tol = cfg.tolerances;
    let (u0, u1) = perturbation(cfg, &grid)?;
    let s0 = State::new(u0, u1, 0.0, Topology::Zero).context("initial data")?;
    let uc0 = to_complex_u(&s0).context("complex reduction")?;
    let i0 = grid.nearest(0.0);
    let half = 0.5 * cfg.t_end;
    let mut keep_times: Vec<f64> = cfg.probe_times.clone();
    keep_times.push(half);
    keep_times.push(cfg.t_end);
    let mut kept: Vec<State> = Vec::new();
    let mut table = Table::new(&["t", "phi_linf", "boost_linf", "u0_re", "u0_im", "free_re", "free_im", "gamma0_abs"]);
    let mut nl = Vec::new();
    let mut lin = Vec::new();
    evolve_observed(&s0, scheme, snapshots_every(cfg), |s| {
        let t = s.time();
        let u = to_complex_u(s)?;
        let fr = free_evolution(&uc0, t)?;
        let g0 = if t >= 1.0 {
            gamma_profile(&u, t, &[0.0], &spec)?[0].norm()
        } else {
            f64::NAN
        };
        let (a, b) = (u.values()[i0], fr.values()[i0]);
        nl.push((t, a));
        lin.push((t, b));
        table.push(vec![
            t,
            s.phi().sup_norm(),
            lorentz_boost_field(s)?.sup_norm(),
            a.re,
            a.im,
            b.re,
            b.im,
            g0,
        ]);
        if keep_times.iter().any(|k| (k - t).abs() < 1e-9) {
            kept.push(s.clone());
        }
        Ok(Vec::new())
    })
    .context("evolution")?;
    let state_at = |t: f64| kept.iter().find(|s| (s.time() - t).abs() < 1e-9);
    let last = state_at(cfg.t_end).expect("final state kept").clone();
    save(cfg, r, "final", &last);

    let col = |n: &str| table.column(n).expect("column");
    let ts = col("t");
    let window = (20.0, 200.0f64.min(cfg.t_end));
    let series = |name: &str| -> Vec<(f64, f64)> { ts.iter().copied().zip(col(name)).collect() };
    match fit_decay_exponent(&series("phi_linf"), window) {
        Ok(fit) => {
            r.set("decay_exponent", fit.exponent);
            r.set("decay_r_squared", fit.r_squared);
            r.check(Check::within("decay exponent of sup |phi|", fit.exponent, tol.decay_exponent, tol.decay_band));
        }
        Err(e) => r.set_note("decay_exponent", &e.to_string()),
    }
    match fit_decay_exponent(&series("boost_linf"), window) {
        Ok(fit) => {
            r.set("boost_exponent", fit.exponent);
            r.check(Check::at_most("decay exponent of sup |Z phi|", fit.exponent, tol.boost_exponent));
        }
        Err(e) => r.set_note("boost_exponent", &e.to_string()),
    }
    let g: Vec<f64> = ts
        .iter()
        .zip(col("gamma0_abs"))
        .filter(|(t, _)| **t >= 100.0)
        .map(|(_, v)| v)
        .collect();
    if !g.is_empty() {
        let (lo, hi) = g.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        r.set("gamma0_variation", (hi - lo) / hi);
        r.check(Check::at_most("variation of |gamma(t, 0)| for t >= 100", (hi - lo) / hi, tol.gamma_variation));
    }

    let law = phase_law(&nl, Some(&lin), (100.0, cfg.t_end)).context("phase law")?;
    r.set("phase_slope", law.slope);
    r.set("phase_predicted_slope", law.predicted_slope);
    r.set("phase_slope_ratio", law.slope / law.predicted_slope);
    r.set("phase_relative_error", law.relative_error);
    r.set("phase_r_squared", law.r_squared);
    r.set("w0_abs", law.w0_abs);
    r.check(Check::at_most("log-phase slope vs (1/32)|W(0)|^2", law.relative_error, tol.phase_law));

    let xi = cfg.xi_grid();
    let wp = extract_w_at(&last, &xi, &spec, ExtractionMethod::WavePacket).context("wave-packet extraction")?;
    let sp = extract_w_at(&last, &xi, &spec, ExtractionMethod::StationaryPhase).context("stationary-phase extraction")?;
    let agree = sp.relative_distance(&wp).context("method agreement")?;
    r.set("method_agreement", agree);
    r.set("w_sup", wp.sup_abs());
    r.check(Check::at_most("wave packet vs stationary phase", agree, tol.method_agreement));
    let env = wp.envelope_fit().context("envelope fit")?;
    r.set("envelope_exponent", env.exponent);
    r.set("envelope_constant", env.constant);
    r.check(Check::at_most("envelope exponent of |W|", env.exponent, tol.envelope_exponent));
    if half >= 100.0 {
        let s = state_at(half).expect("half-time state kept");
        let wh = extract_w_at(s, &xi, &spec, ExtractionMethod::WavePacket).context("half-time extraction")?;
        let d = wh.relative_distance(&wp).context("Cauchy distance")?;
        r.set("cauchy_distance", d);
        r.check(Check::at_most("W(t_end / 2) vs W(t_end)", d, tol.cauchy));
    }
    let mut prof = Table::new(&["xi", "re", "im", "abs", "sp_re", "sp_im"]);
    for i in 0..xi.len() {
        prof.push(vec![xi[i], wp.w[i].re, wp.w[i].im, wp.w[i].norm(), sp.w[i].re, sp.w[i].im]);
    }
    r.tables.insert("profile_w".into(), prof);

    // residual of U(0) built from the profile at the final time
    let mut pred = Table::new(&["t", "ratio"]);
    let mut probes = cfg.probe_times.clone();
    probes.sort_by(f64::total_cmp);
    for &t in &probes {
        let s = state_at(t).ok_or_else(|| {
            LabError::Config(format!("probe time {t} is not a snapshot time"))
        })?;
        let u = to_complex_u(s).context("complex reduction")?;
        let mut worst = 0.0f64;
        for (x, uv) in grid.points().zip(u.values()) {
            if x.abs() <= 0.5 * t {
                if let Prediction::Complex(p) =
                    predict_asymptotics(&wp, t, x, PredictionTarget::U { l: 0.0 }).context("prediction")?
                {
                    worst = worst.max((uv - p).norm());
                }
            }
        }
        let ratio = worst / (t.powf(-0.5) * wp.sup_abs());
        r.set(&format!("predictor_ratio_t{t}"), ratio);
        pred.push(vec![t, ratio]);
    }
    let ratios = pred.column("ratio").expect("column");
    if let (Some(first), Some(last)) = (ratios.first(), ratios.last()) {
        r.check(Check::at_most("predictor residual ratio at last probe", *last, tol.predictor_ratio));
        if ratios.len() > 1 {
            r.check(Check::below("predictor ratio last / first", last / first, 1.0));
        }
    }
    r.tables.insert("predictor".into(), pred);
    r.tables.insert("decay".into(), table);
    Ok(())
}

fn wobbler(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let grid = cfg.grid()?;
    let sol = ExactSolution::wobbling_kink(cfg.wobble).context("wobbling kink")?;
    let s0 = sample_state(&sol, &grid, 0.0).context("wobbling kink")?;
    let mut tr = Tracker::new(0.0, 0.0, CenterMode::Orthogonality).context("tracker")?;
    let mut table = Table::new(&["t", "center", "diff_pair_energy", "diff_linf", "exact_error"]);
    evolve_observed(&s0, cfg.scheme()?, snapshots_every(cfg), |s| {
        let p = tr.observe(s)?.clone();
        let ex = sample_state(&sol, s.grid(), s.time())?;
        let err = s.phi().try_sub(ex.phi())?.sup_norm();
        table.push(vec![s.time(), p.center, p.diff_pair_energy, p.diff_linf, err]);
        Ok(Vec::new())
    })
    .context("evolution")?;
    let ts = table.column("t").expect("column");
    let pe = table.column("diff_pair_energy").expect("column");
    let i20 = ts.iter().position(|t| *t >= 20.0).expect("t_end >= 20");
    let inf = pe[i20..].iter().copied().fold(f64::INFINITY, f64::min);
    r.set("pair_energy_t20", pe[i20]);
    r.set("pair_energy_inf", inf);
    r.set("ratio", inf / pe[i20]);
    r.set(
        "max_exact_error",
        table.column("exact_error").expect("column").into_iter().fold(0.0, f64::max),
    );
    r.check(Check::at_least(
        "inf distance to static kinks / value at t = 20",
        inf / pe[i20],
        cfg.tolerances.wobbler_fraction,
    ));
    r.tables.insert("wobbler".into(), table);
    Ok(())
}

fn exterior_decay(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let f0 = perturbed_kink(cfg)?;
    let inv = inverse_transform(&f0, cfg.beta0, cfg.x0).context("inverse transform")?;
    let beta = inv.beta;
    let mut tr = Tracker::new(beta, inv.y0, CenterMode::Orthogonality)
        .context("tracker")?
        .with_radii(vec![cfg.exterior_radius]);
    let mut table = Table::new(&["t", "lhs", "bound", "worst_x", "ratio_max", "exterior_l2"]);
    let t_hi = cfg.t_end.min(100.0);
    evolve_observed(&f0, cfg.scheme()?, snapshots_every(cfg), |s| {
        let p = tr.observe(s)?.clone();
        let t = s.time();
        if (10.0..=t_hi).contains(&t) {
            let k = kink_state(&KinkParams::new(beta, p.center)?, s.grid(), t)?;
            let e = exterior_decay_check(s, &k, cfg.exterior_radius, cfg.s)?;
            table.push(vec![t, e.lhs, e.bound, e.worst_x, e.ratio_max, p.exterior_l2[0].1]);
        }
        Ok(Vec::new())
    })
    .context("evolution")?;
    let ts = table.column("t").expect("column");
    let ratio = table.column("ratio_max").expect("column");
    let l2 = table.column("exterior_l2").expect("column");
    let mid = 0.5 * (10.0 + t_hi);
    let max_where = |keep: &dyn Fn(f64) -> bool| {
        ts.iter()
            .zip(&ratio)
            .filter(|(t, _)| keep(**t))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let early = max_where(&|t| t <= mid);
    let late = max_where(&|t| t > mid);
    let growth = l2
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max);
    r.set("fitted_constant", early.max(late));
    r.set("ratio_max_early", early);
    r.set("ratio_max_late", late);
    r.set("exterior_l2_max_growth", growth);
    r.check(Check::at_most("late / early exterior ratio", late / early, 1.0));
    r.check(Check::at_most(
        "exterior L2 step growth",
        growth,
        cfg.tolerances.exterior_l2_slack,
    ));
    r.tables.insert("exterior".into(), table);
    Ok(())
}
