//! Runners for the ten scenario kinds.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;

use skewlab::circle_reduction::{
    evaluation_conjugacy_check, find_common_critical_point, verify_reduction, write_residual_csv, ReductionError,
};
use skewlab::forcing::{BasePoint, ForcingField};
use skewlab::group_action::{smallest_period, GroupError};
use skewlab::pde::{solve_interval, solve_interval_by_extension, GridFunction, Integrator, OrbitSnapshot, PdeError, SamplePlan};
use skewlab::skew_product::{
    classify_trichotomy, cluster_modulo_shift, collect_omega_sample, report_lines, write_cluster_csv, ClassifierParams,
    OmegaSample, PersistenceCheck, SamplingSpec, SkewError, TrichotomyReport,
};
use skewlab::torus::{
    check_monotone, derived_equation, iterate_map, omega_limit_circle, rotation_number, write_iterate_csv,
    write_rotation_csv, DerivedEquation, OmegaClass, TorusError,
};
use skewlab::zero_number::{
    count_zeros, detect_drop_events, detect_increases, shifted_difference, track_difference, DifferenceTrack,
    DropEvent, WitnessKind, ZeroError, ZeroOutcome, ZeroSample,
};

use crate::config::{BoundaryName, FactorName, OmegaClassName, RandomFamily, ScenarioConfig, ScenarioKind, TrigName};
use crate::plot::{Plot, BLUE, ORANGE};
use crate::{Report, RunError};

pub(crate) fn run(c: &ScenarioConfig) -> Result<Report, RunError> {
    match c.kind {
        ScenarioKind::HeatDecay => heat_decay(c),
        ScenarioKind::ZeroMonotone => zero_monotone(c),
        ScenarioKind::DropWitness => drop_witness(c),
        ScenarioKind::ExtensionEquivalenceNeumann | ScenarioKind::ExtensionEquivalenceDirichlet => extension(c),
        ScenarioKind::ShiftConstancy => shift_constancy(c),
        ScenarioKind::CircleReduction => circle_reduction(c),
        ScenarioKind::SymmetricConjugacy => symmetric_conjugacy(c),
        ScenarioKind::TrichotomyScan => trichotomy_scan(c),
        ScenarioKind::FinkTorus => fink_torus(c),
    }
}

fn pde_error(e: PdeError) -> RunError {
    match e {
        PdeError::BlowUp { .. } | PdeError::Resolution { .. } => RunError::Numerical(e.to_string()),
        _ => RunError::Config(e.to_string()),
    }
}

fn skew_error(e: SkewError) -> RunError {
    match e {
        SkewError::Pde(p) => pde_error(p),
        SkewError::InsufficientReturns { .. } | SkewError::InvalidParameter(_) => RunError::Config(e.to_string()),
        _ => RunError::Numerical(e.to_string()),
    }
}

fn zero_error(e: ZeroError) -> RunError {
    match e {
        ZeroError::Pde(p) => pde_error(p),
        _ => RunError::Numerical(e.to_string()),
    }
}

fn group_error(e: GroupError) -> RunError {
    RunError::Numerical(e.to_string())
}

fn reduction_error(e: ReductionError) -> RunError {
    RunError::Numerical(e.to_string())
}

fn torus_error(e: TorusError) -> RunError {
    match e {
        TorusError::NotMonotone { .. } => RunError::Numerical(e.to_string()),
        _ => RunError::Config(e.to_string()),
    }
}

fn require(cond: bool, field: &str, message: &str) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(RunError::Config(format!("{field}: {message}")))
    }
}

fn require_circle(c: &ScenarioConfig) -> Result<(), RunError> {
    require(
        c.domain.bc == BoundaryName::Periodic,
        "domain.bc",
        &format!("{} runs on the circle (periodic)", c.kind),
    )
}

fn base(c: &ScenarioConfig) -> BasePoint {
    BasePoint::new(c.base_phase())
}

fn trajectory(c: &ScenarioConfig, u0: &GridFunction, field: &ForcingField) -> Result<Vec<OrbitSnapshot>, RunError> {
    let i = &c.integration;
    Integrator::for_profile(u0)
        .integrate(u0, &base(c), field, i.t_end, i.dt, i.sample_every)
        .map_err(pde_error)
}

fn rows(snaps: &[OrbitSnapshot]) -> Vec<Vec<f64>> {
    snaps.iter().map(|s| s.profile.values().to_vec()).collect()
}

/// Linear autonomous coefficients `f = a + b·u + c·p`.
fn linear_coefficients(c: &ScenarioConfig) -> Result<(f64, f64, f64), RunError> {
    let (mut a, mut b, mut v) = (0.0, 0.0, 0.0);
    for (i, t) in c.forcing.terms.iter().enumerate() {
        let field = format!("forcing.terms[{i}]");
        require(t.mode.iter().all(|&m| m == 0), &field, "heat_decay needs autonomous terms")?;
        let w = match t.trig {
            TrigName::Cos => t.coeff,
            TrigName::Sin => 0.0,
        };
        match t.factor {
            FactorName::One => a += w,
            FactorName::U => b += w,
            FactorName::P => v += w,
            _ => return Err(RunError::Config(format!("{field}.factor: heat_decay needs one, u or p"))),
        }
    }
    Ok((a, b, v))
}

/// Amplitude of the mode `cos, sin(κkx)` by discrete projection.
fn mode_amplitude(u: &GridFunction, kappa: f64, k: f64) -> f64 {
    let n = u.len() as f64;
    let (mut ca, mut sa) = (0.0, 0.0);
    for (x, v) in u.nodes().iter().zip(u.values()) {
        ca += v * (kappa * k * x).cos();
        sa += v * (kappa * k * x).sin();
    }
    2.0 / n * ca.hypot(sa)
}

fn heat_decay(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    let (a, b, v) = linear_coefficients(c)?;
    let init = &c.initial;
    let modes: Vec<f64> = init.cos.iter().chain(&init.sin).map(|m| m.0).collect();
    require(
        modes.iter().all(|&k| k.fract() == 0.0 && k >= 1.0 && k < c.domain.n as f64 / 2.0),
        "initial",
        "heat_decay modes must be integers in [1, n/2)",
    )?;
    let kappa = TAU / c.domain.length;
    let mean = |t: f64| {
        if b == 0.0 {
            init.constant + a * t
        } else {
            init.constant * (b * t).exp() + a * ((b * t).exp() - 1.0) / b
        }
    };
    let exact = |x: f64, t: f64| {
        let modes = |list: &[(f64, f64)], trig: fn(f64) -> f64| {
            list.iter()
                .map(|&(k, amp)| amp * ((b - kappa * kappa * k * k) * t).exp() * trig(kappa * k * (x + v * t)))
                .sum::<f64>()
        };
        mean(t) + modes(&init.cos, f64::cos) + modes(&init.sin, f64::sin)
    };

    let field = c.field()?;
    let u0 = c.initial_profile()?;
    let snaps = trajectory(c, &u0, &field)?;
    let k_low = modes.iter().copied().fold(f64::INFINITY, f64::min);
    let mut csv = String::from("t,max_error,amplitude\n");
    let mut max_error = 0.0f64;
    for s in &snaps {
        let err = s
            .profile
            .nodes()
            .iter()
            .zip(s.profile.values())
            .map(|(&x, u)| (u - exact(x, s.t)).abs())
            .fold(0.0, f64::max);
        max_error = max_error.max(err);
        let amp = if k_low.is_finite() { mode_amplitude(&s.profile, kappa, k_low) } else { 0.0 };
        writeln!(csv, "{},{},{}", s.t, err, amp).expect("string write");
    }
    let mut r = Report::default();
    r.metric("max_error", max_error);
    r.check(
        "analytic_error",
        max_error < c.analysis.tolerance,
        format!("max error {max_error:e} vs tolerance {:e}", c.analysis.tolerance),
    );
    if k_low.is_finite() {
        let (first, last) = (&snaps[0], snaps.last().expect("nonempty"));
        let rate = (mode_amplitude(&first.profile, kappa, k_low) / mode_amplitude(&last.profile, kappa, k_low)).ln()
            / (last.t - first.t);
        let predicted = kappa * kappa * k_low * k_low - b;
        r.metric("decay_rate", rate);
        r.metric("predicted_rate", predicted);
        r.check(
            "decay_rate",
            (rate - predicted).abs() < c.analysis.rate_tolerance,
            format!("measured {rate} vs {predicted} (tolerance {:e})", c.analysis.rate_tolerance),
        );
    }
    r.file("heat.csv", csv.into_bytes());
    r.plot("spacetime.png", Plot::Spacetime(rows(&snaps)));
    Ok(r)
}

struct TrackResult {
    series: Vec<ZeroSample>,
    drops: Vec<DropEvent>,
    increases: usize,
    tail_constant: bool,
    tail_count: Option<usize>,
}

fn track_pair(c: &ScenarioConfig, u: &GridFunction, v: &GridFunction, field: &ForcingField) -> Result<TrackResult, RunError> {
    let integ = Integrator::for_profile(u);
    let keep = |o: Vec<OrbitSnapshot>| -> Vec<OrbitSnapshot> {
        o.into_iter().filter(|s| s.t >= c.analysis.t_start - 1e-12).collect()
    };
    let o1 = keep(trajectory(c, u, field)?);
    let o2 = keep(trajectory(c, v, field)?);
    let series = track_difference(&o1, &o2, 0.0).map_err(zero_error)?;
    let increases = detect_increases(&series).len();
    let track = DifferenceTrack {
        orbit1: &o1,
        orbit2: &o2,
        shift: 0.0,
        field,
        integrator: &integ,
        dt: c.integration.dt,
    };
    let drops = track.resolve_drops(detect_drop_events(&series)).map_err(zero_error)?;
    let m = ((c.analysis.tail_fraction * series.len() as f64).ceil() as usize).clamp(1, series.len());
    let tail = &series[series.len() - m..];
    let tail_count = tail[0].outcome.count();
    let tail_constant = tail.iter().all(|s| match &s.outcome {
        ZeroOutcome::Report(rep) => rep.all_simple() && Some(rep.count) == tail_count,
        ZeroOutcome::Unresolved { .. } => false,
    });
    Ok(TrackResult {
        series,
        drops,
        increases,
        tail_constant,
        tail_count,
    })
}

fn count_cell(o: &ZeroOutcome) -> String {
    o.count().map_or_else(|| "NaN".to_string(), |n| n.to_string())
}

const DROP_HEADER: &str = "track,t_lo,t_hi,z_before,z_after,witness_t,witness_x,witness_kind";

fn drop_rows(csv: &mut String, track: usize, drops: &[DropEvent]) {
    for d in drops {
        let (t, x, kind) = match d.witness {
            Some(w) => (w.t.to_string(), w.x.to_string(), w.kind.label()),
            None => ("NaN".into(), "NaN".into(), "none"),
        };
        writeln!(csv, "{track},{},{},{},{},{t},{x},{kind}", d.t_lo, d.t_hi, d.before, d.after).expect("string write");
    }
}

fn zero_checks(r: &mut Report, results: &[TrackResult]) {
    let increases: usize = results.iter().map(|t| t.increases).sum();
    let drops: usize = results.iter().map(|t| t.drops.len()).sum();
    let multiple = results
        .iter()
        .flat_map(|t| &t.drops)
        .filter(|d| d.witness.is_some_and(|w| w.kind == WitnessKind::MultipleZero))
        .count();
    let unwitnessed: usize = results.iter().map(|t| t.drops.iter().filter(|d| d.is_anomaly()).count()).sum();
    let tails_bad = results.iter().filter(|t| !t.tail_constant).count();
    r.metric("tracks", results.len());
    r.metric("increases", increases);
    r.metric("drops", drops);
    r.metric("drops_multiple_zero_witness", multiple);
    r.metric("drops_unresolved_cluster_witness", drops - unwitnessed - multiple);
    r.metric("drops_without_witness", unwitnessed);
    r.check("no_increase", increases == 0, format!("{increases} increases between witness-free samples"));
    r.check(
        "drops_witnessed",
        multiple == drops,
        format!("{} of {drops} drops lack a multiple-zero witness", drops - multiple),
    );
    r.check(
        "tail_constant_simple",
        tails_bad == 0,
        format!("{tails_bad} of {} tracks have a non-constant or non-simple tail", results.len()),
    );
}

fn zero_monotone(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    let field = c.field()?;
    let fam = c.analysis.random_family;
    let results = (0..c.analysis.n_random)
        .into_par_iter()
        .map(|i| {
            let u = c.profile(&c.random_initial(2 * i as u64, fam))?;
            let v = c.profile(&c.random_initial(2 * i as u64 + 1, fam))?;
            track_pair(c, &u, &v, &field)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts = String::from("track,t,z\n");
    let mut drops = format!("{DROP_HEADER}\n");
    for (i, t) in results.iter().enumerate() {
        for s in &t.series {
            writeln!(counts, "{i},{},{}", s.t, count_cell(&s.outcome)).expect("string write");
        }
        drop_rows(&mut drops, i, &t.drops);
    }
    let mut r = Report::default();
    zero_checks(&mut r, &results);
    r.file("zero_counts.csv", counts.into_bytes());
    r.file("drops.csv", drops.into_bytes());
    Ok(r)
}

fn drop_witness(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    let field = c.field()?;
    let u = c.initial_profile()?;
    let v = c.partner_profile()?;
    let result = track_pair(c, &u, &v, &field)?;
    let mut r = Report::default();
    let mut counts = String::from("t,z\n");
    for s in &result.series {
        writeln!(counts, "{},{}", s.t, count_cell(&s.outcome)).expect("string write");
    }
    let mut drops = format!("{DROP_HEADER}\n");
    drop_rows(&mut drops, 0, &result.drops);
    r.check("drop_observed", !result.drops.is_empty(), format!("{} drops", result.drops.len()));
    if let Some(expected) = c.analysis.expected_drop_time {
        let nearest = result
            .drops
            .iter()
            .filter_map(|d| d.witness.map(|w| w.t))
            .min_by(|a, b| (a - expected).abs().total_cmp(&(b - expected).abs()));
        r.metric("expected_drop_time", expected);
        match nearest {
            Some(t) => {
                r.metric("witness_time", t);
                r.check(
                    "drop_time",
                    (t - expected).abs() < c.analysis.drop_time_tolerance,
                    format!("witness at t = {t}, expected {expected} (tolerance {:e})", c.analysis.drop_time_tolerance),
                );
            }
            None => r.check("drop_time", false, "no witnessed drop"),
        }
    }
    zero_checks(&mut r, std::slice::from_ref(&result));
    if let Some(n) = result.tail_count {
        r.metric("final_zero_count", n);
    }
    let integ = Integrator::for_profile(&u);
    let diff: Vec<Vec<f64>> = trajectory(c, &u, &field)?
        .iter()
        .zip(&integ.integrate(&v, &base(c), &field, c.integration.t_end, c.integration.dt, c.integration.sample_every).map_err(pde_error)?)
        .map(|(p, q)| p.profile.values().iter().zip(q.profile.values()).map(|(a, b)| a - b).collect())
        .collect();
    r.file("zero_counts.csv", counts.into_bytes());
    r.file("drops.csv", drops.into_bytes());
    r.plot("spacetime.png", Plot::Spacetime(diff));
    Ok(r)
}

fn extension(c: &ScenarioConfig) -> Result<Report, RunError> {
    let neumann = c.kind == ScenarioKind::ExtensionEquivalenceNeumann;
    let (bc, family) = if neumann {
        (BoundaryName::Neumann, RandomFamily::Cosine)
    } else {
        (BoundaryName::Dirichlet, RandomFamily::Sine)
    };
    require(c.domain.bc == bc, "domain.bc", &format!("{} needs the {bc:?} interval", c.kind))?;
    let sym = c.forcing.symmetry;
    if neumann {
        require(sym.even_in_p, "forcing.symmetry.even_in_p", "the even extension needs a field even in u_x")?;
    } else {
        require(sym.odd_in_u, "forcing.symmetry.odd_in_u", "the odd extension needs a field odd in u")?;
    }
    let field = c.field()?;
    let b = base(c);
    let i = &c.integration;
    let per_datum = (0..c.analysis.n_random)
        .into_par_iter()
        .map(|k| {
            let u0 = c.profile(&c.random_initial(k as u64, family))?;
            let direct = solve_interval(&u0, &b, &field, i.t_end, i.dt, i.sample_every).map_err(pde_error)?;
            let ext = solve_interval_by_extension(&u0, &b, &field, i.t_end, i.dt, i.sample_every).map_err(pde_error)?;
            direct
                .iter()
                .zip(&ext)
                .map(|(p, q)| Ok((p.t, p.profile.max_distance(&q.profile).map_err(pde_error)?)))
                .collect::<Result<Vec<_>, RunError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("datum,t,discrepancy\n");
    let mut worst = 0.0f64;
    let mut at_end = 0.0f64;
    for (k, rows) in per_datum.iter().enumerate() {
        for &(t, d) in rows {
            writeln!(csv, "{k},{t},{d}").expect("string write");
            worst = worst.max(d);
        }
        at_end = at_end.max(rows.last().map_or(0.0, |r| r.1));
    }
    let mut r = Report::default();
    r.metric("data", per_datum.len());
    r.metric("max_discrepancy", worst);
    r.metric("max_discrepancy_final", at_end);
    r.check(
        "extension_agreement",
        worst < c.analysis.tolerance,
        format!("max discrepancy {worst:e} vs tolerance {:e}", c.analysis.tolerance),
    );
    r.file("discrepancy.csv", csv.into_bytes());
    Ok(r)
}

fn sampling_spec(c: &ScenarioConfig) -> SamplingSpec {
    SamplingSpec {
        dt: c.integration.dt,
        t_max: c.integration.t_end,
        delta: c.analysis.delta_base,
        transient: c.analysis.transient_fraction * c.integration.t_end,
    }
}

fn classify(
    c: &ScenarioConfig,
    sample: &OmegaSample,
    eps: f64,
    field: &ForcingField,
    integ: &Integrator,
) -> Result<TrichotomyReport, RunError> {
    let clusters = cluster_modulo_shift(sample, eps).map_err(skew_error)?;
    let params = ClassifierParams {
        high_score: c.analysis.high_score,
        ..ClassifierParams::new(eps, c.analysis.recheck_horizon, c.integration.dt)
    };
    classify_trichotomy(sample, &clusters, field, integ, &params).map_err(skew_error)
}

/// Sample, cluster and classify; three or more high-score clusters are
/// re-examined at half the threshold over twice the horizon.
fn persistent_classification(
    c: &ScenarioConfig,
    u0: &GridFunction,
    field: &ForcingField,
) -> Result<(OmegaSample, PersistenceCheck), RunError> {
    let integ = Integrator::for_profile(u0);
    let spec = sampling_spec(c);
    let sample = collect_omega_sample(u0, &base(c), field, &integ, &spec).map_err(skew_error)?;
    let eps = c.analysis.eps_cluster.unwrap_or(c.analysis.eps_factor * sample.max_amplitude());
    let first = classify(c, &sample, eps, field, &integ)?;
    let refined = if first.high_score_clusters >= 3 {
        let spec2 = SamplingSpec {
            t_max: 2.0 * spec.t_max,
            transient: 2.0 * spec.transient,
            ..spec
        };
        let sample2 = collect_omega_sample(u0, &base(c), field, &integ, &spec2).map_err(skew_error)?;
        Some(classify(c, &sample2, 0.5 * eps, field, &integ)?)
    } else {
        None
    };
    Ok((sample, PersistenceCheck { first, refined }))
}

fn record_classification(r: &mut Report, check: &PersistenceCheck) -> Result<(), RunError> {
    for line in report_lines(&check.first) {
        if let Some((k, v)) = line.split_once('=') {
            r.metric(&format!("trichotomy.{k}"), v);
        }
    }
    if let Some(refined) = &check.refined {
        r.metric("refined.alternative", refined.alternative);
        r.metric("refined.high_score_clusters", refined.high_score_clusters);
    }
    r.check(
        "no_persistent_three_clusters",
        !check.is_red_flag(),
        format!(
            "{} high-score clusters, {} after refinement",
            check.first.high_score_clusters,
            check.refined.as_ref().map_or("no".to_string(), |x| x.high_score_clusters.to_string())
        ),
    );
    let mut csv = Vec::new();
    write_cluster_csv(&mut csv, &check.first)?;
    r.file("clusters.csv", csv);
    Ok(())
}

fn shift_constancy(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    require(c.analysis.n_shifts > 0, "analysis.n_shifts", "must be at least 1")?;
    let field = c.field()?;
    let u0 = c.initial_profile()?;
    let (sample, check) = persistent_classification(c, &u0, &field)?;
    let mut r = Report::default();
    record_classification(&mut r, &check)?;
    let top = check
        .first
        .clusters
        .first()
        .ok_or_else(|| RunError::Numerical("no clusters".into()))?;
    r.check(
        "near_minimal",
        top.score >= c.analysis.high_score,
        format!("largest cluster score {} vs {}", top.score, c.analysis.high_score),
    );

    let period = smallest_period(&top.representative, 1e-6).map_err(group_error)?;
    r.metric("smallest_period", period.length);
    let dense: Vec<OrbitSnapshot> = trajectory(c, &u0, &field)?
        .into_iter()
        .filter(|s| s.t > sample.transient)
        .collect();
    let m = c.analysis.n_shifts;
    let counts: Vec<Vec<Option<usize>>> = if period.homogeneous {
        Vec::new()
    } else {
        dense
            .par_iter()
            .map(|s| {
                (0..m)
                    .map(|k| {
                        let a = (k as f64 + 0.5) * period.length / m as f64;
                        shifted_difference(&s.profile, &s.profile, a)
                            .ok()
                            .and_then(|w| count_zeros(&w).ok())
                            .map(|z| z.count)
                    })
                    .collect()
            })
            .collect()
    };
    let reference = counts.first().and_then(|row| row.first().copied().flatten());
    let evaluations = counts.len() * m;
    let exceptions = counts.iter().flatten().filter(|&&z| z.is_none() || z != reference).count();
    let mut csv = String::from("t,shift_index,shift,z\n");
    for (s, row) in dense.iter().zip(&counts) {
        for (k, z) in row.iter().enumerate() {
            let a = (k as f64 + 0.5) * period.length / m as f64;
            let z = z.map_or_else(|| "NaN".to_string(), |n| n.to_string());
            writeln!(csv, "{},{k},{a},{z}", s.t).expect("string write");
        }
    }
    r.metric("constancy_value", reference.map_or("none".to_string(), |n| n.to_string()));
    r.metric("constancy_evaluations", evaluations);
    r.metric("constancy_exceptions", exceptions);
    r.check(
        "constancy",
        !period.homogeneous && evaluations > 0 && exceptions == 0,
        if period.homogeneous {
            "representative is spatially homogeneous".to_string()
        } else {
            format!("{exceptions} of {evaluations} counts differ from N = {reference:?}")
        },
    );
    r.file("constancy.csv", csv.into_bytes());
    r.plot("spacetime.png", Plot::Spacetime(rows(&dense)));
    Ok(r)
}

fn sample_window(
    c: &ScenarioConfig,
    u0: &GridFunction,
    field: &ForcingField,
    h: f64,
) -> Result<Vec<OrbitSnapshot>, RunError> {
    let (t0, t1) = c.analysis.window;
    let count = ((t1 - t0) / h).round() as usize;
    let times: Vec<f64> = (0..=count).map(|i| t0 + i as f64 * h).filter(|&t| t > 0.0).collect();
    let start = OrbitSnapshot::new(u0.clone(), base(c), 0.0);
    let mut out = Integrator::for_profile(u0)
        .run(&start, field, c.integration.dt, &SamplePlan::At(times))
        .map_err(pde_error)?;
    if t0 > 0.0 {
        out.remove(0);
    }
    Ok(out)
}

fn circle_reduction(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    require(!c.analysis.sampling_levels.is_empty(), "analysis.sampling_levels", "needs at least one level")?;
    require(c.analysis.window.0 >= 0.0, "analysis.window", "must start at t >= 0")?;
    let field = c.field()?;
    let u0 = c.initial_profile()?;
    let checks = c
        .analysis
        .sampling_levels
        .par_iter()
        .map(|&h| {
            let snaps = sample_window(c, &u0, &field, h)?;
            verify_reduction(&snaps, &field, None).map_err(reduction_error)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let residuals: Vec<f64> = checks.iter().map(|k| k.max_residual).collect();
    let mut r = Report::default();
    let mut levels = String::from("level,sample_interval,max_residual\n");
    for (i, (h, res)) in c.analysis.sampling_levels.iter().zip(&residuals).enumerate() {
        writeln!(levels, "{i},{h},{res}").expect("string write");
        r.metric(&format!("residual.{i}"), res);
        let mut csv = Vec::new();
        write_residual_csv(&mut csv, &checks[i].rows)?;
        r.file(&format!("residual_level{i}.csv"), csv);
    }
    r.metric("phase_period", checks[0].period);
    let bound = c.analysis.residual_bound;
    r.check(
        "residual_bound",
        residuals[0] < bound,
        format!("coarsest residual {:e} vs bound {bound:e}", residuals[0]),
    );
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let factor = c.analysis.halving_factor;
    r.metric("halving_ratios", format!("{ratios:?}"));
    r.check(
        "residual_halving",
        ratios.iter().all(|&q| q >= factor),
        format!("ratios {ratios:?} vs factor {factor}"),
    );
    let finest = checks.last().expect("nonempty").rows.as_slice();
    let c_series: Vec<(f64, f64)> = finest.iter().map(|row| (row.t, row.c_lifted)).collect();
    let mut integral = Vec::with_capacity(finest.len());
    let mut acc = finest[0].c_lifted;
    integral.push((finest[0].t, acc));
    for w in finest.windows(2) {
        acc += 0.5 * (w[0].g + w[1].g) * (w[1].t - w[0].t);
        integral.push((w[1].t, acc));
    }
    r.file("levels.csv", levels.into_bytes());
    r.plot("phase_vs_integral.png", Plot::Lines(vec![(c_series, BLUE), (integral, ORANGE)]));
    Ok(r)
}

fn symmetric_conjugacy(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    require(
        c.forcing.symmetry.even_in_p,
        "forcing.symmetry.even_in_p",
        "symmetric_conjugacy needs a field even in u_x",
    )?;
    let field = c.field()?;
    let transient = c.analysis.transient_fraction * c.integration.t_end;
    let mut data = vec![c.initial.clone()];
    data.extend((0..c.analysis.n_random).map(|k| c.random_initial(k as u64, c.analysis.random_family)));
    let runs = data
        .par_iter()
        .map(|spec| {
            let u0 = c.profile(spec)?;
            Ok(trajectory(c, &u0, &field)?
                .into_iter()
                .filter(|s| s.t >= transient)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let pool: Vec<OrbitSnapshot> = runs.into_iter().flatten().collect();
    let cp = find_common_critical_point(&pool).map_err(reduction_error)?;
    let report = evaluation_conjugacy_check(&pool, cp.x0, c.analysis.same_tolerance, c.analysis.separation_floor);
    let mut r = Report::default();
    r.metric("trajectories", data.len());
    r.metric("snapshots", pool.len());
    r.metric("critical_point", cp.x0);
    r.metric("critical_residual", cp.residual);
    r.metric("amplitude", cp.amplitude);
    r.metric("pairs_checked", report.pairs_checked);
    r.metric("modulus", report.modulus);
    r.metric("violations", report.violations.len());
    let limit = c.analysis.critical_tolerance * cp.amplitude;
    r.check(
        "common_critical_point",
        cp.residual < limit,
        format!("residual {:e} vs {limit:e}", cp.residual),
    );
    r.check("pairs_compared", report.pairs_checked > 0, format!("{} same-time pairs", report.pairs_checked));
    r.check(
        "evaluation_injective",
        report.is_injective(),
        format!("{} separation violations", report.violations.len()),
    );
    let mut csv = String::from("i,j,t,evaluation_gap,profile_distance\n");
    for v in &report.violations {
        writeln!(csv, "{},{},{},{},{}", v.i, v.j, pool[v.i].t, v.evaluation_gap, v.profile_distance)
            .expect("string write");
    }
    r.file("violations.csv", csv.into_bytes());
    r.file(
        "critical_point.csv",
        format!("x0,residual,amplitude\n{},{},{}\n", cp.x0, cp.residual, cp.amplitude).into_bytes(),
    );
    Ok(r)
}

fn trichotomy_scan(c: &ScenarioConfig) -> Result<Report, RunError> {
    require_circle(c)?;
    let field = c.field()?;
    let u0 = c.initial_profile()?;
    let (sample, check) = persistent_classification(c, &u0, &field)?;
    let mut r = Report::default();
    r.metric("returns", sample.len());
    record_classification(&mut r, &check)?;
    let alt = check.first.alternative.label();
    if !c.analysis.expected_alternatives.is_empty() {
        r.check(
            "expected_alternative",
            c.analysis.expected_alternatives.iter().any(|a| a == alt),
            format!("{alt} vs {:?}", c.analysis.expected_alternatives),
        );
    }
    let mut csv = String::from("index,t,forward_distance,backward_distance\n");
    for e in &check.first.connecting_evidence {
        writeln!(csv, "{},{},{},{}", e.index, e.t, e.forward_distance, e.backward_distance).expect("string write");
    }
    r.file("connecting.csv", csv.into_bytes());
    let mut history = sample.history.clone();
    history.extend(sample.snapshots.iter().cloned());
    r.plot("spacetime.png", Plot::Spacetime(rows(&history)));
    Ok(r)
}

fn class_matches(found: &OmegaClass, expected: OmegaClassName) -> bool {
    matches!(
        (found, expected),
        (OmegaClass::Dense, OmegaClassName::Dense)
            | (OmegaClass::Gapped, OmegaClassName::Gapped)
            | (OmegaClass::Undetermined, OmegaClassName::Undetermined)
            | (OmegaClass::Periodic { .. }, OmegaClassName::Periodic)
    )
}

fn fink_torus(c: &ScenarioConfig) -> Result<Report, RunError> {
    let (spec, vf) = c.torus_field()?;
    check_monotone(&vf, spec.dt, 200).map_err(torus_error)?;
    let est = rotation_number(&vf, spec.eta, spec.n_rotation, spec.dt).map_err(torus_error)?;
    let omega = omega_limit_circle(&vf, spec.eta, spec.n_omega, spec.dt).map_err(torus_error)?;
    let derived = derived_equation(&vf, est.rho, spec.eta, spec.derived_t_end, spec.dt).map_err(torus_error)?;
    let orbit = iterate_map(&vf, spec.eta, spec.n_omega, spec.dt).map_err(torus_error)?;
    let rigid = vf.is_rigid();

    let mut r = Report::default();
    r.metric("rho", est.rho);
    r.metric("seed_spread", est.spread);
    r.metric("locked", est.locked.map_or("none".to_string(), |(p, q)| format!("{p}/{q}")));
    r.metric("rigid", rigid);
    r.metric("omega_class", omega.classification.label());
    r.metric("gap_slope", omega.slope.map_or("none".to_string(), |s| s.to_string()));
    r.metric("derived_sup_deviation", derived.sup_deviation);
    if let Some(expected) = spec.expected_rho {
        let tol = 2.0 / spec.n_rotation as f64;
        let (ok, detail) = if rigid {
            (est.rho == expected, format!("rho {} vs {expected} exactly", est.rho))
        } else {
            ((est.rho - expected).abs() < tol, format!("rho {} vs {expected} (tolerance {tol:e})", est.rho))
        };
        r.check("rotation_number", ok, detail);
    }
    if let Some(expected) = spec.expected_class {
        r.check(
            "omega_class",
            class_matches(&omega.classification, expected),
            format!("{} vs {expected:?}", omega.classification.label()),
        );
    }
    r.check(
        "derived_bounded",
        derived.sup_deviation < spec.derived_bound,
        format!("sup deviation {} vs bound {}", derived.sup_deviation, spec.derived_bound),
    );
    if rigid {
        let eq = DerivedEquation::new(vf.clone(), est.rho);
        let worst = (0..64)
            .flat_map(|i| (0..64).map(move |j| (i as f64 / 8.0, j as f64 / 64.0)))
            .map(|(t, x)| eq.eval(t, x).abs())
            .fold(0.0, f64::max);
        r.metric("derived_field_max", worst);
        r.check(
            "derived_static",
            worst == 0.0 && derived.sup_deviation == 0.0,
            format!("field max {worst:e}, solution deviation {:e}", derived.sup_deviation),
        );
    }
    let mut it = Vec::new();
    write_iterate_csv(&mut it, &orbit)?;
    let mut rot = Vec::new();
    write_rotation_csv(&mut rot, &est.table)?;
    let mut gaps = String::from("n,largest_gap\n");
    for g in &omega.gaps {
        writeln!(gaps, "{},{}", g.n, g.largest_gap).expect("string write");
    }
    let mut dev = String::from("T,sup_deviation\n");
    for (t, d) in &derived.deviation_table {
        writeln!(dev, "{t},{d}").expect("string write");
    }
    r.file("iterates.csv", it);
    r.file("rotation.csv", rot);
    r.file("gaps.csv", gaps.into_bytes());
    r.file("derived.csv", dev.into_bytes());
    r.plot("iterates_histogram.png", Plot::Histogram(orbit, 100));
    Ok(r)
}
