//! ω-limit sampling at base returns, clustering modulo rotations and the
//! classification of ω-limit sets into one of three structural alternatives.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::forcing::{hull_distance, BasePoint, ForcingField};
use crate::group_action::{max_phase, orbit_distance, GroupError};
use crate::pde::{GridFunction, Integrator, OrbitSnapshot, PdeError, SamplePlan};

/// Minimum number of post-transient returns for any classification.
pub const MIN_RETURNS: usize = 20;
pub const DEFAULT_DELTA: f64 = 0.02;
pub const DEFAULT_EPS_FACTOR: f64 = 1e-3;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.2;
pub const HIGH_SCORE: f64 = 0.95;
pub const SINGLE_SHARE: f64 = 0.95;
pub const SEPARATION_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone)]
pub enum SkewError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("only {achieved} returns after the transient; at least {required} are needed (increase t_max)")]
    InsufficientReturns { achieved: usize, required: usize },
    #[error("invalid sampling parameter: {0}")]
    InvalidParameter(String),
    #[error("cluster is empty")]
    EmptyCluster,
}

fn lin_root(alpha: f64, slope: f64) -> Option<f64> {
    (slope != 0.0).then(|| -alpha / slope)
}

/// Times in `(t_from, t_to]` at which the base orbit through `start` (at time
/// `t0`) makes its closest approach to `target` during each visit of the
/// `delta`-ball around it. Distances use the max-of-circle-gaps hull metric.
pub fn return_times(
    start: &BasePoint,
    t0: f64,
    frequencies: &[f64],
    target: &BasePoint,
    delta: f64,
    t_from: f64,
    t_to: f64,
) -> Vec<f64> {
    let k = frequencies.len();
    let offset: Vec<f64> = (0..k).map(|i| start.phase()[i] - target.phase()[i]).collect();
    // phase difference of coordinate i at time t: offset_i + ω_i (t − t0)
    let coord = |i: usize, t: f64| offset[i] + frequencies[i] * (t - t0);
    let intervals_for = |i: usize, lo: f64, hi: f64| -> Vec<(f64, f64)> {
        if delta >= 0.5 {
            return vec![(lo, hi)];
        }
        let w = frequencies[i];
        let (p_lo, p_hi) = {
            let (a, b) = (coord(i, lo), coord(i, hi));
            (a.min(b), a.max(b))
        };
        let m_lo = (p_lo - delta).ceil() as i64;
        let m_hi = (p_hi + delta).floor() as i64;
        (m_lo..=m_hi)
            .filter_map(|m| {
                let ta = t0 + (m as f64 - delta - offset[i]) / w;
                let tb = t0 + (m as f64 + delta - offset[i]) / w;
                let (a, b) = (ta.min(tb).max(lo), ta.max(tb).min(hi));
                (a < b).then_some((a, b))
            })
            .collect()
    };
    let margin = 1.0;
    let mut visits = intervals_for(0, t_from - margin, t_to + margin);
    for i in 1..k {
        visits = visits
            .into_iter()
            .flat_map(|(a, b)| intervals_for(i, a, b))
            .collect();
    }
    visits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dist = |t: f64| (0..k).map(|i| {
        let p = coord(i, t);
        (p - p.round()).abs()
    }).fold(0.0, f64::max);
    visits
        .into_iter()
        .filter_map(|(a, b)| {
            let mid = 0.5 * (a + b);
            let lines: Vec<(f64, f64)> = (0..k)
                .map(|i| {
                    let m = coord(i, mid).round();
                    (offset[i] - frequencies[i] * t0 - m, frequencies[i])
                })
                .collect();
            let mut cands = vec![a, b];
            for (i, &(ai, wi)) in lines.iter().enumerate() {
                cands.extend(lin_root(ai, wi));
                for &(aj, wj) in &lines[i + 1..] {
                    cands.extend(lin_root(ai - aj, wi - wj));
                    cands.extend(lin_root(ai + aj, wi + wj));
                }
            }
            let best = cands
                .into_iter()
                .filter(|&t| t >= a && t <= b)
                .map(|t| (t, dist(t)))
                .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))?;
            (best.0 > t_from && best.0 <= t_to && best.1 < delta).then_some(best.0)
        })
        .collect()
}

/// Parameters for sampling an ω-limit set.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub dt: f64,
    pub t_max: f64,
    pub delta: f64,
    pub transient: f64,
}

impl SamplingSpec {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self {
            dt,
            t_max,
            delta: DEFAULT_DELTA,
            transient: DEFAULT_TRANSIENT_FRACTION * t_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSample {
    /// Returns after the transient.
    pub snapshots: Vec<OrbitSnapshot>,
    /// Returns during the transient, oldest first.
    pub history: Vec<OrbitSnapshot>,
    pub target_base: BasePoint,
    pub transient: f64,
    pub delta: f64,
}

impl OmegaSample {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.snapshots.iter().map(|s| s.profile.max_abs()).fold(0.0, f64::max)
    }

    /// Default clustering threshold `1e-3 · max amplitude`.
    pub fn default_eps(&self) -> f64 {
        DEFAULT_EPS_FACTOR * self.max_amplitude()
    }
}

/// Integrate from `(u0, base)` at `t = 0` and record the profile at every
/// base return to the `delta`-ball around `base`.
pub fn collect_omega_sample(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    integrator: &Integrator,
    spec: &SamplingSpec,
) -> Result<OmegaSample, SkewError> {
    if !(spec.delta > 0.0 && spec.t_max > 0.0 && spec.transient >= 0.0 && spec.transient < spec.t_max) {
        return Err(SkewError::InvalidParameter(format!(
            "need delta > 0 and 0 <= transient < t_max (delta {}, transient {}, t_max {})",
            spec.delta, spec.transient, spec.t_max
        )));
    }
    let times = return_times(base, 0.0, field.frequencies(), base, spec.delta, 0.0, spec.t_max);
    let achieved = times.iter().filter(|&&t| t > spec.transient).count();
    if achieved < MIN_RETURNS {
        return Err(SkewError::InsufficientReturns {
            achieved,
            required: MIN_RETURNS,
        });
    }
    let start = OrbitSnapshot::new(u0.clone(), base.clone(), 0.0);
    let mut run = integrator.run(&start, field, spec.dt, &SamplePlan::At(times))?;
    run.remove(0);
    let (history, snapshots): (Vec<_>, Vec<_>) = run.into_iter().partition(|s| s.t <= spec.transient);
    Ok(OmegaSample {
        snapshots,
        history,
        target_base: base.clone(),
        transient: spec.transient,
        delta: spec.delta,
    })
}

/// Grid and interpolant extrema of a profile. Rotated samples of `v` stay
/// inside the interpolant's range, which gives a lower bound on the quotient
/// distance without any shift search.
#[derive(Debug, Clone, Copy)]
struct Extrema {
    grid_max: f64,
    grid_min: f64,
    peak: f64,
    trough: f64,
}

impl Extrema {
    fn of(u: &GridFunction) -> Self {
        let (grid_min, grid_max) = u
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let negated = GridFunction::new(u.values().iter().map(|x| -x).collect(), u.domain().clone());
        let peak = max_phase(u, None).map_or(grid_max, |m| m.max_value.max(grid_max));
        let trough = negated
            .ok()
            .and_then(|w| max_phase(&w, None).ok())
            .map_or(grid_min, |m| (-m.max_value).min(grid_min));
        Self {
            grid_max,
            grid_min,
            peak,
            trough,
        }
    }
}

fn extrema_gap(u: &Extrema, v: &Extrema) -> f64 {
    let one_way = |a: &Extrema, b: &Extrema| (a.grid_max - b.peak).max(b.trough - a.grid_min);
    one_way(u, v).min(one_way(v, u)).max(0.0)
}

fn quotient_distance(u: &GridFunction, v: &GridFunction) -> Result<f64, GroupError> {
    orbit_distance(u, v, u.len())
}

/// Quotient distance from `u` to the nearest of `members`.
fn distance_to_set(u: &GridFunction, members: &[&GridFunction], ext: &[Extrema]) -> Result<f64, GroupError> {
    let eu = Extrema::of(u);
    let mut order: Vec<(f64, usize)> = ext
        .iter()
        .enumerate()
        .map(|(i, m)| (extrema_gap(&eu, m), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for (lb, i) in order {
        if lb >= best {
            break;
        }
        best = best.min(quotient_distance(u, members[i])?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the sample's snapshots, ascending.
    pub members: Vec<usize>,
    /// Medoid under the quotient metric.
    pub representative: usize,
    pub diameter: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Single-linkage clusters of profiles under the quotient metric with
/// threshold `eps`, largest first.
pub fn cluster_profiles(profiles: &[&GridFunction], eps: f64) -> Result<Vec<Cluster>, SkewError> {
    let m = profiles.len();
    let ext: Vec<Extrema> = profiles.par_iter().map(|p| Extrema::of(p)).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let links: Vec<(usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Option<(usize, usize)>, GroupError> {
            if extrema_gap(&ext[i], &ext[j]) > eps {
                return Ok(None);
            }
            Ok((quotient_distance(profiles[i], profiles[j])? <= eps).then_some((i, j)))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut uf = UnionFind((0..m).collect());
    for (i, j) in links {
        uf.union(i, j);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for i in 0..m {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let mut clusters = groups
        .into_iter()
        .map(|members| summarize(profiles, members))
        .collect::<Result<Vec<_>, _>>()?;
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members[0].cmp(&b.members[0])));
    Ok(clusters)
}

fn summarize(profiles: &[&GridFunction], members: Vec<usize>) -> Result<Cluster, SkewError> {
    let k = members.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let dists = pairs
        .par_iter()
        .map(|&(i, j)| quotient_distance(profiles[members[i]], profiles[members[j]]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sums = vec![0.0; k];
    let mut diameter: f64 = 0.0;
    for (&(i, j), d) in pairs.iter().zip(&dists) {
        sums[i] += d;
        sums[j] += d;
        diameter = diameter.max(*d);
    }
    let medoid = (0..k)
        .min_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)))
        .expect("nonempty cluster");
    Ok(Cluster {
        representative: members[medoid],
        members,
        diameter,
    })
}

/// Single-linkage clustering of an ω-limit sample modulo rotations.
pub fn cluster_modulo_shift(sample: &OmegaSample, eps: f64) -> Result<Vec<Cluster>, SkewError> {
    let profiles: Vec<&GridFunction> = sample.snapshots.iter().map(|s| &s.profile).collect();
    cluster_profiles(&profiles, eps)
}

/// Re-integration settings shared by scoring and connecting-orbit checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecheckSpec {
    pub dt: f64,
    pub horizon: f64,
    pub eps: f64,
}

fn recheck_returns(
    from: &OrbitSnapshot,
    sample: &OmegaSample,
    field: &ForcingField,
    integrator: &Integrator,
    recheck: &RecheckSpec,
) -> Result<Vec<OrbitSnapshot>, SkewError> {
    let times = return_times(
        &from.base,
        from.t,
        field.frequencies(),
        &sample.target_base,
        sample.delta,
        from.t,
        from.t + recheck.horizon,
    );
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let mut run = integrator.run(from, field, recheck.dt, &SamplePlan::At(times))?;
    run.remove(0);
    Ok(run)
}

/// Fraction of the representative's future returns (over the recheck horizon)
/// lying within `2·eps` of the cluster in the quotient metric.
pub fn near_minimality_score(
    sample: &OmegaSample,
    cluster: &Cluster,
    field: &ForcingField,
    integrator: &Integrator,
    recheck: &RecheckSpec,
) -> Result<f64, SkewError> {
    if cluster.members.is_empty() {
        return Err(SkewError::EmptyCluster);
    }
    let rep = &sample.snapshots[cluster.representative];
    let returns = recheck_returns(rep, sample, field, integrator, recheck)?;
    if returns.is_empty() {
        return Ok(0.0);
    }
    let members: Vec<&GridFunction> = cluster.members.iter().map(|&i| &sample.snapshots[i].profile).collect();
    let ext: Vec<Extrema> = members.par_iter().map(|p| Extrema::of(p)).collect();
    let close = returns
        .par_iter()
        .map(|r| distance_to_set(&r.profile, &members, &ext).map(|d| d <= 2.0 * recheck.eps))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(close.iter().filter(|&&c| c).count() as f64 / close.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    SingleMinimal,
    MinimalPlusConnecting,
    TwoMinimalPlusConnecting,
    Inconclusive,
}

impl Alternative {
    pub fn label(self) -> &'static str {
        match self {
            Self::SingleMinimal => "single_minimal",
            Self::MinimalPlusConnecting => "minimal_plus_connecting",
            Self::TwoMinimalPlusConnecting => "two_minimal_plus_connecting",
            Self::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub representative: GridFunction,
    pub representative_index: usize,
    pub size: usize,
    pub diameter: f64,
    pub score: f64,
}

/// A sample point outside every high-score cluster, with the distances its
/// forward re-integration and its stored past come to those clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectingEvidence {
    pub index: usize,
    pub t: f64,
    pub forward_distance: f64,
    pub backward_distance: f64,
}

impl ConnectingEvidence {
    pub fn connects(&self, eps: f64) -> bool {
        self.forward_distance <= 2.0 * eps && self.backward_distance <= 2.0 * eps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrichotomyReport {
    pub alternative: Alternative,
    pub clusters: Vec<ClusterSummary>,
    pub connecting_evidence: Vec<ConnectingEvidence>,
    pub high_score_clusters: usize,
    pub eps: f64,
    pub sample_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierParams {
    pub eps: f64,
    pub recheck_horizon: f64,
    pub dt: f64,
    pub high_score: f64,
    pub single_share: f64,
    pub separation_factor: f64,
}

impl ClassifierParams {
    pub fn new(eps: f64, recheck_horizon: f64, dt: f64) -> Self {
        Self {
            eps,
            recheck_horizon,
            dt,
            high_score: HIGH_SCORE,
            single_share: SINGLE_SHARE,
            separation_factor: SEPARATION_FACTOR,
        }
    }

    fn recheck(&self) -> RecheckSpec {
        RecheckSpec {
            dt: self.dt,
            horizon: self.recheck_horizon,
            eps: self.eps,
        }
    }
}

/// Decide which structural alternative the sample is consistent with.
///
/// Backward evidence for a point is read from the stored trajectory before
/// it; the parabolic flow is never run backwards.
pub fn classify_trichotomy(
    sample: &OmegaSample,
    clusters: &[Cluster],
    field: &ForcingField,
    integrator: &Integrator,
    params: &ClassifierParams,
) -> Result<TrichotomyReport, SkewError> {
    if sample.len() < MIN_RETURNS {
        return Err(SkewError::InsufficientReturns {
            achieved: sample.len(),
            required: MIN_RETURNS,
        });
    }
    let recheck = params.recheck();
    let scores = clusters
        .iter()
        .map(|c| near_minimality_score(sample, c, field, integrator, &recheck))
        .collect::<Result<Vec<_>, _>>()?;
    let summaries: Vec<ClusterSummary> = clusters
        .iter()
        .zip(&scores)
        .map(|(c, &score)| ClusterSummary {
            representative: sample.snapshots[c.representative].profile.clone(),
            representative_index: c.representative,
            size: c.members.len(),
            diameter: c.diameter,
            score,
        })
        .collect();
    let high: Vec<usize> = (0..clusters.len()).filter(|&i| scores[i] >= params.high_score).collect();
    let mut report = TrichotomyReport {
        alternative: Alternative::Inconclusive,
        clusters: summaries,
        connecting_evidence: Vec::new(),
        high_score_clusters: high.len(),
        eps: params.eps,
        sample_size: sample.len(),
    };
    let total = sample.len() as f64;
    if high.len() == 1 && clusters[high[0]].members.len() as f64 >= params.single_share * total {
        report.alternative = Alternative::SingleMinimal;
        return Ok(report);
    }
    let anchors: Vec<usize> = match high.len() {
        1 => high.clone(),
        2 => {
            let (a, b) = (&clusters[high[0]], &clusters[high[1]]);
            let sep = quotient_distance(
                &sample.snapshots[a.representative].profile,
                &sample.snapshots[b.representative].profile,
            )?;
            if sep <= params.separation_factor * params.eps {
                return Ok(report);
            }
            high.clone()
        }
        _ => return Ok(report),
    };
    let in_anchor: Vec<bool> = {
        let mut v = vec![false; sample.len()];
        for &a in &anchors {
            for &m in &clusters[a].members {
                v[m] = true;
            }
        }
        v
    };
    let members: Vec<&GridFunction> = (0..sample.len())
        .filter(|&i| in_anchor[i])
        .map(|i| &sample.snapshots[i].profile)
        .collect();
    let ext: Vec<Extrema> = members.par_iter().map(|p| Extrema::of(p)).collect();
    let outliers: Vec<usize> = (0..sample.len()).filter(|&i| !in_anchor[i]).collect();
    if outliers.is_empty() {
        return Ok(report);
    }
    let past: Vec<&OrbitSnapshot> = sample.history.iter().chain(&sample.snapshots).collect();
    let evidence = outliers
        .par_iter()
        .map(|&i| -> Result<ConnectingEvidence, SkewError> {
            let snap = &sample.snapshots[i];
            let forward = recheck_returns(snap, sample, field, integrator, &recheck)?
                .iter()
                .map(|r| distance_to_set(&r.profile, &members, &ext))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let mut backward = f64::INFINITY;
            for p in past.iter().filter(|p| p.t < snap.t) {
                backward = backward.min(distance_to_set(&p.profile, &members, &ext)?);
            }
            Ok(ConnectingEvidence {
                index: i,
                t: snap.t,
                forward_distance: forward,
                backward_distance: backward,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let all_connect = evidence.iter().all(|e| e.connects(params.eps));
    report.connecting_evidence = evidence;
    if all_connect {
        report.alternative = if anchors.len() == 1 {
            Alternative::MinimalPlusConnecting
        } else {
            Alternative::TwoMinimalPlusConnecting
        };
    }
    Ok(report)
}

/// Outcome of re-running a three-or-more cluster configuration at half the
/// threshold and twice the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceCheck {
    pub first: TrichotomyReport,
    pub refined: Option<TrichotomyReport>,
}

impl PersistenceCheck {
    /// Three or more high-score clusters survived refinement.
    pub fn is_red_flag(&self) -> bool {
        self.first.high_score_clusters >= 3
            && self.refined.as_ref().is_some_and(|r| r.high_score_clusters >= 3)
    }
}

/// Sample, cluster and classify; configurations with three or more high-score
/// clusters are re-examined at `(eps/2, 2·t_max)`.
pub fn classify_with_persistence(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    integrator: &Integrator,
    spec: &SamplingSpec,
    params: &ClassifierParams,
) -> Result<PersistenceCheck, SkewError> {
    let run = |spec: &SamplingSpec, params: &ClassifierParams| -> Result<TrichotomyReport, SkewError> {
        let sample = collect_omega_sample(u0, base, field, integrator, spec)?;
        let clusters = cluster_modulo_shift(&sample, params.eps)?;
        classify_trichotomy(&sample, &clusters, field, integrator, params)
    };
    let first = run(spec, params)?;
    let refined = if first.high_score_clusters >= 3 {
        let spec2 = SamplingSpec {
            t_max: 2.0 * spec.t_max,
            transient: 2.0 * spec.transient,
            ..spec.clone()
        };
        let params2 = ClassifierParams {
            eps: 0.5 * params.eps,
            ..*params
        };
        Some(run(&spec2, &params2)?)
    } else {
        None
    };
    Ok(PersistenceCheck { first, refined })
}

pub const CLUSTER_CSV_HEADER: &str = "cluster_id,size,diameter,score";

pub fn write_cluster_csv<W: Write>(mut w: W, report: &TrichotomyReport) -> io::Result<()> {
    writeln!(w, "{CLUSTER_CSV_HEADER}")?;
    for (i, c) in report.clusters.iter().enumerate() {
        writeln!(w, "{},{},{},{}", i, c.size, c.diameter, c.score)?;
    }
    Ok(())
}

/// Key-value rendering of a report, one `key=value` per line.
pub fn report_lines(report: &TrichotomyReport) -> Vec<String> {
    let mut out = vec![
        format!("alternative={}", report.alternative),
        format!("sample_size={}", report.sample_size),
        format!("eps_cluster={}", report.eps),
        format!("clusters={}", report.clusters.len()),
        format!("high_score_clusters={}", report.high_score_clusters),
        format!("connecting_points={}", report.connecting_evidence.len()),
    ];
    for (i, c) in report.clusters.iter().enumerate() {
        out.push(format!(
            "cluster.{i}=size:{};diameter:{};score:{};representative_max:{}",
            c.size,
            c.diameter,
            c.score,
            c.representative.max_abs()
        ));
    }
    out
}

/// Largest base distance between a sample's snapshots and its target.
pub fn max_base_offset(sample: &OmegaSample) -> f64 {
    sample
        .snapshots
        .iter()
        .chain(&sample.history)
        .map(|s| hull_distance(&s.base, &sample.target_base).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
