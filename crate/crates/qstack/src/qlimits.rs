//! Orbit measures, α/β density accounting, and the sweep experiment harness
//! that ties the whole pipeline together.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cutstack::{
    build_full_shift_program, build_iet, build_two_component, rotation_towers, ClassicalMap,
    CutStackProgram, FamilyMap, IetSpec, IntervalQ, StackFamily,
};
use crate::discretize::{
    delta_n, epsilon_n, glue, good_stacks, internal_segments, schedule_n_of_n, BlendParams,
    BlendReport, DeltaReport, GluingPolicy,
};
use crate::error::{Error, Result};
use crate::measure::{kolmogorov, wasserstein1, MeasureTarget};
use crate::qmap::{orbit_decompose, UnitaryMap};
use crate::skew::{bump_observable, BumpReport, FourierObservable};
use crate::util::{fnv1a64, parse_ratio, ratio_to_f64};
use crate::weyl::{expectation_orbit, qe_variance_spectrum};

/// The uniform atomic measure `δ_orbit` on a periodic orbit of `f̂_N`.
#[derive(Clone, Debug)]
pub struct OrbitMeasure {
    pub orbit_id: usize,
    pub n: usize,
    pub k: usize,
    /// Sorted lattice positions carrying mass `1/K` each.
    atoms: Vec<usize>,
}

pub fn orbit_measure(orbit: &[usize], orbit_id: usize, n: usize) -> OrbitMeasure {
    let mut atoms = orbit.to_vec();
    atoms.sort_unstable();
    OrbitMeasure { orbit_id, n, k: atoms.len(), atoms }
}

impl OrbitMeasure {
    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    /// `(position, mass)` pairs; masses are exactly `1/K` and sum to 1.
    pub fn atom_pairs(&self) -> Vec<(f64, f64)> {
        let mass = 1.0 / self.k as f64;
        self.atoms.iter().map(|&q| (q as f64 / self.n as f64, mass)).collect()
    }

    /// Exact mass bookkeeping: `K` atoms of `1/K` each.
    pub fn total_mass(&self) -> BigRational {
        BigRational::new(BigInt::from(self.atoms.len()), BigInt::from(self.k))
    }
}

/// Kolmogorov distance from an orbit measure to a target.
pub fn measure_distance(m: &OrbitMeasure, target: &MeasureTarget) -> f64 {
    kolmogorov(&m.atom_pairs(), target)
}

/// Wasserstein-1 distance (secondary metric).
pub fn wasserstein_distance(m: &OrbitMeasure, target: &MeasureTarget) -> f64 {
    wasserstein1(&m.atom_pairs(), target)
}

/* Densities *****************************************************************/

/// Selected orbit sizes at one sweep point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectionCount {
    pub n: usize,
    pub sizes: Vec<usize>,
}

/// α/β density estimates over a sweep: α tracks the largest selected orbit's
/// fraction of `N`, β the total selected fraction.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub n_values: Vec<usize>,
    pub max_fraction: Vec<f64>,
    pub total_fraction: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_fit_residual: f64,
    pub beta_fit_residual: f64,
}

/// Fit `y = a + b/N` on the sweep tail and report the intercept as the limit
/// estimate; no extrapolation model beyond that.
pub fn density_report(selection: &[SelectionCount]) -> Result<DensityReport> {
    if selection.len() < 3 {
        return Err(Error::ShortSweep { need: 3, got: selection.len() });
    }
    if !selection.windows(2).all(|w| w[0].n < w[1].n) {
        return Err(Error::Config("selection N-values must be strictly increasing".into()));
    }
    let n_values: Vec<usize> = selection.iter().map(|s| s.n).collect();
    let max_fraction: Vec<f64> = selection
        .iter()
        .map(|s| s.sizes.iter().max().copied().unwrap_or(0) as f64 / s.n as f64)
        .collect();
    let total_fraction: Vec<f64> = selection
        .iter()
        .map(|s| s.sizes.iter().sum::<usize>() as f64 / s.n as f64)
        .collect();

    let fit = |ys: &[f64]| -> (f64, f64) {
        let tail = ys.len().min(4);
        let xs: Vec<f64> = n_values[ys.len() - tail..].iter().map(|&n| 1.0 / n as f64).collect();
        let ys = &ys[ys.len() - tail..];
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let a = my - b * mx;
        let resid = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (a + b * x - y).abs())
            .fold(0.0f64, f64::max);
        (a.clamp(0.0, 1.0), resid)
    };
    let (alpha, ra) = fit(&max_fraction);
    let (beta, rb) = fit(&total_fraction);
    Ok(DensityReport {
        n_values,
        max_fraction,
        total_fraction,
        alpha,
        beta,
        alpha_fit_residual: ra,
        beta_fit_residual: rb,
    })
}

/* Experiment configuration **************************************************/

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    Iet { permutation: Vec<usize>, lengths: Vec<String> },
    RotationTowers { alpha: String, stages: usize },
    TwoComponent { alpha1: String, alpha2: String, stages: usize },
    FullShift { stages: usize },
    Program { program: CutStackProgram },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Lebesgue,
    Component { interval: [String; 2] },
    Atomic { atoms: Vec<[String; 2]> },
    Mix { parts: Vec<(f64, TargetSpec)> },
}

impl TargetSpec {
    pub fn build(&self) -> Result<MeasureTarget> {
        Ok(match self {
            TargetSpec::Lebesgue => MeasureTarget::Lebesgue,
            TargetSpec::Component { interval } => MeasureTarget::ComponentLebesgue(
                IntervalQ::new(parse_ratio(&interval[0])?, parse_ratio(&interval[1])?)?,
            ),
            TargetSpec::Atomic { atoms } => MeasureTarget::Atomic(
                atoms
                    .iter()
                    .map(|[p, m]| Ok((parse_ratio(p)?, parse_ratio(m)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            TargetSpec::Mix { parts } => MeasureTarget::Mixture(
                parts
                    .iter()
                    .map(|(w, t)| Ok((*w, t.build()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    PeriodicPerStack,
    SingleOrbitConcat,
    CrossStackBlend {
        mu1: TargetSpec,
        mu2: TargetSpec,
        alpha1: f64,
        alpha2: f64,
        q: u32,
        epsilon: f64,
    },
}

impl PolicySpec {
    pub fn build(&self) -> Result<GluingPolicy> {
        Ok(match self {
            PolicySpec::PeriodicPerStack => GluingPolicy::PeriodicPerStack,
            PolicySpec::SingleOrbitConcat => GluingPolicy::SingleOrbitConcat,
            PolicySpec::CrossStackBlend { mu1, mu2, alpha1, alpha2, q, epsilon } => {
                if !(alpha1 > &0.0 && alpha2 > &0.0) {
                    return Err(Error::Config("blend weights must be positive".into()));
                }
                if (alpha1 + alpha2 - 1.0).abs() > 1e-12 {
                    return Err(Error::Config("blend weights must sum to 1".into()));
                }
                GluingPolicy::CrossStackBlend(BlendParams {
                    mu1: mu1.build()?,
                    mu2: mu2.build()?,
                    alpha1: *alpha1,
                    alpha2: *alpha2,
                    q: *q,
                    epsilon: *epsilon,
                })
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    Const { value: f64 },
    CosQ { k: i64 },
    SinQ { k: i64 },
    Bump { support: [String; 2], margin: String, n_max: i64 },
    Modes { coeffs: FourierObservable },
}

impl ObservableSpec {
    pub fn build(&self) -> Result<(FourierObservable, Option<BumpReport>)> {
        Ok(match self {
            ObservableSpec::Const { value } => (FourierObservable::constant(*value), None),
            ObservableSpec::CosQ { k } => (FourierObservable::cos_q(*k), None),
            ObservableSpec::SinQ { k } => (FourierObservable::sin_q(*k), None),
            ObservableSpec::Bump { support, margin, n_max } => {
                let iv = IntervalQ::new(parse_ratio(&support[0])?, parse_ratio(&support[1])?)?;
                let (a, rep) = bump_observable(&iv, &parse_ratio(margin)?, *n_max)?;
                (a, Some(rep))
            }
            ObservableSpec::Modes { coeffs } => (coeffs.clone(), None),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionSpec {
    /// Every orbit.
    All,
    /// The single largest orbit per N.
    LargestOrbit,
    /// Orbits supported inside ε-q-good stacks for a target.
    GoodStacks { target: TargetSpec, q: u32, epsilon: f64 },
    /// Orbits supported inside the stack whose support contains a point.
    StackAt { point: String },
    /// Orbits supported inside a fixed interval.
    Window { interval: [String; 2] },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    pub sweep: Vec<usize>,
    pub policy: PolicySpec,
    pub kappa: usize,
    /// Cap the scheduled stage (fixed-scale diagnostics); absent = proper
    /// schedule.
    #[serde(default)]
    pub stage_cap: Option<usize>,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub density_selection: Option<SelectionSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Config("empty N sweep".into()));
        }
        if !self.sweep.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("N sweep must be strictly increasing".into()));
        }
        if self.kappa == 0 {
            return Err(Error::Config("kappa must be at least 1".into()));
        }
        for o in &self.observables {
            let (a, _) = o.build()?;
            if !a.is_q_only() {
                return Err(Error::Config(
                    "experiment observables must be q-only trigonometric polynomials".into(),
                ));
            }
        }
        for t in &self.targets {
            t.build()?;
        }
        self.policy.build()?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

/// A map spec turned into something runnable.
pub struct BuiltMap {
    pub program: CutStackProgram,
    pub classical: Box<dyn ClassicalMap + Send + Sync>,
    pub singular_image: Vec<BigRational>,
}

impl MapSpec {
    pub fn build(&self) -> Result<BuiltMap> {
        match self {
            MapSpec::Iet { permutation, lengths } => {
                let spec = IetSpec {
                    permutation: permutation.clone(),
                    lengths: lengths.iter().map(|s| parse_ratio(s)).collect::<Result<_>>()?,
                };
                let (map, family) = build_iet(&spec)?;
                let singular_image = map.singular_image();
                Ok(BuiltMap {
                    program: CutStackProgram {
                        initial: family.stacks().to_vec(),
                        stages: Vec::new(),
                    },
                    classical: Box::new(map),
                    singular_image,
                })
            }
            MapSpec::RotationTowers { alpha, stages } => {
                let alpha = parse_ratio(alpha)?;
                let program = rotation_towers(&alpha, *stages)?;
                let (map, _) = build_iet(&IetSpec::rotation(&alpha)?)?;
                let singular_image = map.singular_image();
                Ok(BuiltMap { program, classical: Box::new(map), singular_image })
            }
            MapSpec::TwoComponent { alpha1, alpha2, stages } => {
                let (map, program) =
                    build_two_component(&parse_ratio(alpha1)?, &parse_ratio(alpha2)?, *stages)?;
                let singular_image = map.singular_image();
                Ok(BuiltMap { program, classical: Box::new(map), singular_image })
            }
            MapSpec::FullShift { stages } => {
                let program = build_full_shift_program(*stages)?;
                Self::family_classical(program)
            }
            MapSpec::Program { program } => Self::family_classical(program.clone()),
        }
    }

    // Deepest-stage family map as the best available classical evaluator;
    // the singular image is the stage approximation: images of singular
    // points where defined, the points themselves otherwise.
    fn family_classical(program: CutStackProgram) -> Result<BuiltMap> {
        let deepest = program.refine(program.n_stages())?;
        let singular = program.singularity_points(program.n_stages())?;
        let fmap = FamilyMap(deepest);
        let mut singular_image = Vec::new();
        for s in singular {
            if s >= num_traits::One::one() {
                continue;
            }
            match fmap.eval(&s) {
                Some(y) => singular_image.push(y),
                None => singular_image.push(s),
            }
        }
        singular_image.sort();
        singular_image.dedup();
        Ok(BuiltMap { program, classical: Box::new(fmap), singular_image })
    }
}

/* Experiment report *********************************************************/

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    pub orbit_id: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub distance_lebesgue: f64,
    pub distance_target: Vec<f64>,
    /// `⟨ψ, Op[a] ψ⟩` for each configured observable, as `[re, im]`; shared
    /// by every eigenpair on the orbit.
    pub expectations: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionRow {
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub alpha_largest: f64,
    /// Lebesgue measure of the selected support.
    pub support_width: f64,
    /// Fraction of lattice points inside the selected support.
    pub lattice_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub stage: usize,
    pub epsilon_n: f64,
    #[serde(rename = "delta_N")]
    pub delta_n: f64,
    pub delta_report: DeltaReport,
    pub internal_fraction: f64,
    pub qe_variance: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blend: Option<BlendReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionRow>,
    pub orbits: Vec<OrbitRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceFit {
    pub target_index: usize,
    /// Designated-orbit distance per sweep point.
    pub values: Vec<f64>,
    pub decreasing: bool,
    pub log_slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fits {
    pub designated_distance: Vec<DistanceFit>,
    /// `qe_variance(first N) / qe_variance(last N)` per observable.
    pub qe_variance_ratio: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub bump_reports: Vec<Option<BumpReport>>,
    pub sweep: Vec<SweepRow>,
    pub fits: Fits,
}

fn log_slope(ns: &[usize], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(n, y)| ((*n as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Run the full pipeline over the sweep: build `f_N` and `U_N` per `N`,
/// decompose into orbits, measure distances, expectations, `δ_N`, the
/// ergodicity variance, and density accounting.
pub fn run_qlimit_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_qlimit_experiment_threads(cfg, 1)
}

/// Same, with the sweep points distributed over up to `threads` workers.
/// Each point is independent; the report is assembled in sweep order, so the
/// output is identical to the sequential run.
pub fn run_qlimit_experiment_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let built = cfg.map.build()?;
    let policy = cfg.policy.build()?;
    let observables: Vec<(FourierObservable, Option<BumpReport>)> =
        cfg.observables.iter().map(|o| o.build()).collect::<Result<_>>()?;
    let targets: Vec<MeasureTarget> = cfg.targets.iter().map(|t| t.build()).collect::<Result<_>>()?;

    let threads = threads.max(1).min(cfg.sweep.len().max(1));
    let mut results: Vec<Option<Result<SweepRow>>> = Vec::new();
    results.resize_with(cfg.sweep.len(), || None);
    if threads <= 1 {
        for (i, &n) in cfg.sweep.iter().enumerate() {
            results[i] = Some(run_sweep_point(cfg, &built, &policy, &observables, &targets, n));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<SweepRow>>>> =
            cfg.sweep.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= cfg.sweep.len() {
                        break;
                    }
                    let row =
                        run_sweep_point(cfg, &built, &policy, &observables, &targets, cfg.sweep[i]);
                    *slots[i].lock().unwrap() = Some(row);
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            results[i] = slot.into_inner().unwrap();
        }
    }
    let mut sweep_rows = Vec::with_capacity(cfg.sweep.len());
    let mut selections: Vec<SelectionCount> = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        let row = res.expect("every sweep point ran")?;
        if let Some(sel) = &row.selection {
            selections.push(SelectionCount { n: cfg.sweep[i], sizes: sel.sizes.clone() });
        }
        sweep_rows.push(row);
    }

    // Fits: the designated orbit is the largest one at each N.
    let ns: Vec<usize> = sweep_rows.iter().map(|r| r.n).collect();
    let mut designated = Vec::new();
    for ti in 0..targets.len() {
        let values: Vec<f64> = sweep_rows
            .iter()
            .map(|r| {
                r.orbits
                    .iter()
                    .max_by_key(|o| o.k)
                    .map(|o| o.distance_target[ti])
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let decreasing = values.windows(2).all(|w| w[1] <= w[0] * 1.05 + 1e-12)
            && values.last() < values.first();
        designated.push(DistanceFit {
            target_index: ti,
            log_slope: log_slope(&ns, &values),
            values,
            decreasing,
        });
    }
    let qe_ratio: Vec<f64> = (0..observables.len())
        .map(|oi| {
            let first = sweep_rows.first().map(|r| r.qe_variance[oi]).unwrap_or(0.0);
            let last = sweep_rows.last().map(|r| r.qe_variance[oi]).unwrap_or(0.0);
            if last > 0.0 {
                first / last
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let density = if selections.len() >= 3 { Some(density_report(&selections)?) } else { None };

    Ok(ExperimentReport {
        config_hash: cfg.hash(),
        bump_reports: observables.into_iter().map(|(_, r)| r).collect(),
        sweep: sweep_rows,
        fits: Fits { designated_distance: designated, qe_variance_ratio: qe_ratio, density },
    })
}

fn run_sweep_point(
    cfg: &ExperimentConfig,
    built: &BuiltMap,
    policy: &GluingPolicy,
    observables: &[(FourierObservable, Option<BumpReport>)],
    targets: &[MeasureTarget],
    n: usize,
) -> Result<SweepRow> {
    let mut stage = schedule_n_of_n(&built.program, n, cfg.kappa)?;
    if let Some(cap) = cfg.stage_cap {
        stage = stage.min(cap.max(1));
    }
    let family = built.program.refine(stage)?;
    let (partial, index) = internal_segments(&family, n);
    let out = glue(&partial, &index, policy, &family, built.classical.as_ref())?;
    let internal_fraction = out.map.fraction_internal();
    let eps = epsilon_n(&family);
    // δ_N against the stage map: points where the stage is undefined are
    // excluded and counted.
    let stage_map = FamilyMap(family.clone());
    let delta = delta_n(&stage_map, &out.map, eps, &built.singular_image);
    let u = UnitaryMap::new(out.map);
    let dec = orbit_decompose(u.map());

    let mut orbit_rows = Vec::with_capacity(dec.len());
    for (id, orbit) in dec.orbits().iter().enumerate() {
        let om = orbit_measure(orbit, id, n);
        let pairs = om.atom_pairs();
        let distance_lebesgue = kolmogorov(&pairs, &MeasureTarget::Lebesgue);
        let distance_target = targets.iter().map(|t| kolmogorov(&pairs, t)).collect();
        let expectations = observables
            .iter()
            .map(|(a, _)| {
                let e = expectation_orbit(a, orbit, n);
                [e.re, e.im]
            })
            .collect();
        orbit_rows.push(OrbitRow {
            orbit_id: id,
            k: om.k,
            distance_lebesgue,
            distance_target,
            expectations,
        });
    }

    let qe: Vec<f64> = observables
        .iter()
        .map(|(a, _)| qe_variance_spectrum(&u, a))
        .collect::<Result<_>>()?;

    let selection = match &cfg.density_selection {
        None => None,
        Some(spec) => Some(select_orbits(spec, &family, &dec, n)?),
    };

    Ok(SweepRow {
        n,
        stage,
        epsilon_n: eps,
        delta_n: delta.delta,
        delta_report: delta,
        internal_fraction,
        qe_variance: qe,
        blend: out.blend,
        selection,
        orbits: orbit_rows,
    })
}

fn select_orbits(
    spec: &SelectionSpec,
    family: &StackFamily,
    dec: &crate::qmap::OrbitDecomposition,
    n: usize,
) -> Result<SelectionRow> {
    // Selected lattice positions.
    let mut mask = vec![false; n];
    let mut support_width = 0.0f64;
    let mark_stack = |mask: &mut Vec<bool>, width: &mut f64, idx: usize| {
        for iv in family.stacks()[idx].intervals() {
            let (a, b) = iv.lattice_range(n);
            for q in a..b {
                mask[q] = true;
            }
            *width += ratio_to_f64(&iv.width());
        }
    };
    match spec {
        SelectionSpec::All => {
            mask.iter_mut().for_each(|m| *m = true);
            support_width = 1.0;
        }
        SelectionSpec::LargestOrbit => {
            let orbit = dec.orbits().iter().max_by_key(|o| o.len()).expect("nonempty");
            for &q in orbit {
                mask[q] = true;
            }
            support_width = orbit.len() as f64 / n as f64;
        }
        SelectionSpec::GoodStacks { target, q, epsilon } => {
            let mu = target.build()?;
            for idx in good_stacks(family, &mu, *q, *epsilon) {
                mark_stack(&mut mask, &mut support_width, idx);
            }
        }
        SelectionSpec::StackAt { point } => {
            let p = parse_ratio(point)?;
            let (idx, _) = family.locate(&p)?;
            mark_stack(&mut mask, &mut support_width, idx);
        }
        SelectionSpec::Window { interval } => {
            let iv = IntervalQ::new(parse_ratio(&interval[0])?, parse_ratio(&interval[1])?)?;
            let (a, b) = iv.lattice_range(n);
            for q in a..b {
                mask[q] = true;
            }
            support_width = ratio_to_f64(&iv.width());
        }
    }
    let sizes: Vec<usize> = dec
        .orbits()
        .iter()
        .filter(|orbit| orbit.iter().all(|&q| mask[q]))
        .map(|orbit| orbit.len())
        .collect();
    let total: usize = sizes.iter().sum();
    let largest = sizes.iter().max().copied().unwrap_or(0);
    let in_mask = mask.iter().filter(|m| **m).count();
    Ok(SelectionRow {
        beta: total as f64 / n as f64,
        alpha_largest: largest as f64 / n as f64,
        sizes,
        support_width,
        lattice_fraction: in_mask as f64 / n as f64,
    })
}
