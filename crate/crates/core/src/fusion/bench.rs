use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{annotate, Mask, VoxelGrid};
use crate::error::{Error, Result};
use crate::grid_ops::{compute_visibility, crop_to_range, downsample, observed_grid, relative_transform};
use crate::scene::{evaluated_classes, Agent, GridSpec, Scene, SemanticLabel};

use super::fuse::{fuse_with, select_collaborators, Fused, FusionMode, Neighbor};
use super::metrics::evaluate;
use super::noise::{perturb_transform, NoiseModel};

/// Where per-range ground truth comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GtSource {
    /// Cropped and downsampled from one fine master annotation per agent.
    #[default]
    Derived,
    /// Annotated directly at each range's resolution.
    Reannotate,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Range grids, each in the frame of the agent it is attached to.
    pub ranges: Vec<GridSpec>,
    /// Fine grid the ranges are derived from; by default the smallest grid
    /// at the finest range resolution covering every range.
    pub master: Option<GridSpec>,
    pub k_values: Vec<usize>,
    /// `(mu, sigma)` pairs. A noiseless pair is always evaluated as well.
    pub noise: Vec<(f64, f64)>,
    pub seed: u64,
    pub classes: Vec<SemanticLabel>,
    /// Ego agents to evaluate; every agent when `None`.
    pub egos: Option<Vec<u32>>,
    pub gt_source: GtSource,
    pub mode: FusionMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            ranges: GridSpec::benchmark_ranges().to_vec(),
            master: None,
            k_values: vec![0, 1],
            noise: vec![(0.0, 0.0)],
            seed: 0,
            classes: evaluated_classes(),
            egos: None,
            gt_source: GtSource::Derived,
            mode: FusionMode::FirstValid,
        }
    }
}

impl BenchConfig {
    /// Noise levels in evaluation order: the noiseless pair first, then the
    /// configured pairs in order, without duplicates.
    pub fn noise_levels(&self) -> Result<Vec<NoiseModel>> {
        let mut out = vec![NoiseModel::noiseless(self.seed)];
        for &(mu, sigma) in &self.noise {
            let m = NoiseModel::new(mu, sigma, self.seed)?;
            if !out.iter().any(|o| o.mu == mu && o.sigma == sigma) {
                out.push(m);
            }
        }
        Ok(out)
    }

    pub fn master_spec(&self) -> Result<GridSpec> {
        if let Some(m) = self.master {
            return Ok(m);
        }
        let first = self
            .ranges
            .first()
            .ok_or_else(|| Error::Config("no ranges configured".into()))?;
        let res = self.ranges.iter().map(|r| r.resolution()).fold(f64::INFINITY, f64::min);
        let mut b = first.bounds();
        for r in &self.ranges[1..] {
            b = b.union(&r.bounds());
        }
        GridSpec::from_bounds(b.min, b.max, res)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeInfo {
    pub range_m: f64,
    pub resolution_m: f64,
    pub shape: [usize; 3],
}

impl RangeInfo {
    fn of(spec: &GridSpec) -> Self {
        Self {
            range_m: round6(spec.extent().x),
            resolution_m: round6(spec.resolution()),
            shape: spec.shape(),
        }
    }
}

/// One evaluated cell of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub ego: u32,
    pub range_m: f64,
    pub k: usize,
    pub mu: f64,
    pub sigma: f64,
    pub collaborators: Vec<u32>,
    pub per_class_iou: BTreeMap<SemanticLabel, f64>,
    pub miou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub ego: u32,
    pub range_m: f64,
    pub k: usize,
    pub mu: f64,
    pub sigma: f64,
    pub error: String,
}

/// Deterministic part of a sweep: identical inputs give identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub gt_source: GtSource,
    pub classes: Vec<SemanticLabel>,
    pub ranges: Vec<RangeInfo>,
    pub records: Vec<CellRecord>,
    pub failures: Vec<CellFailure>,
}

/// Wall-clock cost of one cell, kept apart from the report so that reruns
/// stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTiming {
    pub ego: u32,
    pub range_m: f64,
    pub k: usize,
    pub mu: f64,
    pub sigma: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrepTiming {
    pub agent: u32,
    pub annotate_seconds: f64,
    pub visibility_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub report: BenchReport,
    pub cells: Vec<CellTiming>,
    pub prep: Vec<PrepTiming>,
}

/// Ground truth and single-agent observation of one agent at one range,
/// all in that agent's frame.
#[derive(Debug, Clone)]
pub struct RangeView {
    pub gt: VoxelGrid,
    pub observed: VoxelGrid,
    pub visible: Mask,
}

/// Per-range views of one agent, or the reason they could not be built.
#[derive(Debug, Clone)]
pub struct AgentViews {
    pub agent: Agent,
    pub ranges: Vec<std::result::Result<RangeView, String>>,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Ground truth for `range` derived from a fine master annotation: crop at
/// the master resolution, then downsample by the resolution ratio.
pub fn derive_range_gt(master: &VoxelGrid, range: &GridSpec) -> Result<VoxelGrid> {
    let fine_res = master.spec().resolution();
    let ratio = range.resolution() / fine_res;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "range resolution {} m is not an integer multiple of the master resolution {fine_res} m",
            range.resolution()
        )));
    }
    let fine = GridSpec::new(range.min(), range.extent(), fine_res)?;
    let cropped = crop_to_range(master, &fine)?;
    if factor == 1.0 {
        Ok(cropped)
    } else {
        downsample(&cropped, factor as usize)
    }
}

/// Builds every agent's per-range ground truth and observation.
pub fn prepare_views(scene: &Scene, config: &BenchConfig) -> Result<(Vec<AgentViews>, Vec<PrepTiming>)> {
    let master = match config.gt_source {
        GtSource::Derived => Some(config.master_spec()?),
        GtSource::Reannotate => None,
    };
    let out: Vec<(AgentViews, PrepTiming)> = scene
        .agents()
        .par_iter()
        .map(|a| -> Result<(AgentViews, PrepTiming)> {
            let local = scene.in_agent_frame(a.id)?;
            let agent = local.agent(a.id)?.clone();
            let t0 = Instant::now();
            let gts: Vec<std::result::Result<VoxelGrid, String>> = match &master {
                Some(m) => {
                    let (mg, _) = annotate(&local, m);
                    config
                        .ranges
                        .iter()
                        .map(|r| derive_range_gt(&mg, r).map_err(|e| e.to_string()))
                        .collect()
                }
                None => config.ranges.iter().map(|r| Ok(annotate(&local, r).0)).collect(),
            };
            let annotate_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let ranges = gts
                .into_iter()
                .map(|gt| {
                    let gt = gt?;
                    let visible = compute_visibility(&gt, &agent);
                    let (observed, _) = observed_grid(&gt, &visible).map_err(|e| e.to_string())?;
                    Ok(RangeView { gt, observed, visible })
                })
                .collect();
            let prep = PrepTiming {
                agent: a.id,
                annotate_seconds,
                visibility_seconds: t1.elapsed().as_secs_f64(),
            };
            Ok((
                AgentViews {
                    agent: a.clone(),
                    ranges,
                },
                prep,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().unzip())
}

/// Runs the sweep ego × range × k × noise over one scene.
pub fn run_benchmark(scene: &Scene, config: &BenchConfig) -> Result<BenchRun> {
    config.noise_levels()?;
    let (views, prep) = prepare_views(scene, config)?;
    let mut run = run_cells(&views, config)?;
    run.prep = prep;
    Ok(run)
}

/// Sweep over pre-built views. Views hold world poses in `agent`.
pub fn run_cells(views: &[AgentViews], config: &BenchConfig) -> Result<BenchRun> {
    if config.ranges.is_empty() {
        return Err(Error::Config("no ranges configured".into()));
    }
    let noise = config.noise_levels()?;
    let egos: Vec<u32> = match &config.egos {
        Some(ids) => {
            for id in ids {
                if !views.iter().any(|v| v.agent.id == *id) {
                    return Err(Error::Config(format!("ego agent {id} is not in the scene")));
                }
            }
            ids.clone()
        }
        None => views.iter().map(|v| v.agent.id).collect(),
    };
    let mut cells = Vec::new();
    for &ego in &egos {
        for r in 0..config.ranges.len() {
            for &k in &config.k_values {
                for n in &noise {
                    cells.push((ego, r, k, *n));
                }
            }
        }
    }
    let results: Vec<(std::result::Result<CellRecord, CellFailure>, CellTiming)> = cells
        .par_iter()
        .map(|&(ego, r, k, n)| {
            let t = Instant::now();
            let spec = &config.ranges[r];
            let res = evaluate_cell(views, ego, r, k, &n, spec, config);
            let range_m = round6(spec.extent().x);
            let timing = CellTiming {
                ego,
                range_m,
                k,
                mu: n.mu,
                sigma: n.sigma,
                seconds: t.elapsed().as_secs_f64(),
            };
            let res = res.map_err(|error| CellFailure {
                ego,
                range_m,
                k,
                mu: n.mu,
                sigma: n.sigma,
                error,
            });
            (res, timing)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (res, t) in results {
        match res {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
        timings.push(t);
    }
    Ok(BenchRun {
        report: BenchReport {
            seed: config.seed,
            gt_source: config.gt_source,
            classes: config.classes.clone(),
            ranges: config.ranges.iter().map(RangeInfo::of).collect(),
            records,
            failures,
        },
        cells: timings,
        prep: Vec::new(),
    })
}

/// Fuses one ego's view at range `r` with its `k` nearest collaborators
/// under `noise`. Returns the fused grid and the collaborator ids.
pub fn fuse_cell(
    views: &[AgentViews],
    ego: u32,
    r: usize,
    k: usize,
    noise: &NoiseModel,
    mode: FusionMode,
) -> std::result::Result<(Fused, Vec<u32>), String> {
    let view_of = |id: u32| {
        views
            .iter()
            .find(|v| v.agent.id == id)
            .ok_or_else(|| format!("no views for agent {id}"))
    };
    let ego_views = view_of(ego)?;
    let ego_view = ego_views
        .ranges
        .get(r)
        .ok_or_else(|| format!("no range {r}"))?
        .as_ref()
        .map_err(|e| e.clone())?;
    let agents: Vec<Agent> = views.iter().map(|v| v.agent.clone()).collect();
    let chosen = select_collaborators(&ego_views.agent, &agents, k);
    let mut neighbors = Vec::with_capacity(chosen.len());
    for a in &chosen {
        let v = view_of(a.id)?.ranges[r]
            .as_ref()
            .map_err(|e| format!("agent {}: {e}", a.id))?;
        let t = relative_transform(&ego_views.agent.pose, &a.pose);
        // One stream per (ego, range, collaborator), shared by all noise
        // levels so that the sweep compares like with like.
        let mut rng = noise.stream(&[ego as u64, r as u64, a.id as u64]);
        let transform = perturb_transform(&t, noise, &mut rng);
        neighbors.push(Neighbor {
            grid: &v.observed,
            observed: &v.visible,
            transform,
        });
    }
    let fused = fuse_with(
        &ego_view.observed,
        &ego_view.visible,
        &neighbors,
        ego_view.gt.spec(),
        mode,
    )
    .map_err(|e| e.to_string())?;
    Ok((fused, chosen.iter().map(|a| a.id).collect()))
}

fn evaluate_cell(
    views: &[AgentViews],
    ego: u32,
    r: usize,
    k: usize,
    noise: &NoiseModel,
    spec: &GridSpec,
    config: &BenchConfig,
) -> std::result::Result<CellRecord, String> {
    let (fused, collaborators) = fuse_cell(views, ego, r, k, noise, config.mode)?;
    let gt = &views.iter().find(|v| v.agent.id == ego).expect("ego has views").ranges[r]
        .as_ref()
        .expect("fused views exist")
        .gt;
    let report = evaluate(&fused.grid, gt, &config.classes).map_err(|e| e.to_string())?;
    Ok(CellRecord {
        ego,
        range_m: round6(spec.extent().x),
        k,
        mu: noise.mu,
        sigma: noise.sigma,
        collaborators,
        per_class_iou: report.per_class_iou,
        miou: report.miou,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Mean of the cell mIoUs over egos for one (range, k, mu, sigma)
    /// setting; cells without a defined mIoU are skipped.
    pub fn mean_miou(&self, range_m: f64, k: usize, mu: f64, sigma: f64) -> Option<f64> {
        mean(self.matching(range_m, k, mu, sigma).filter_map(|r| r.miou))
    }

    fn matching(&self, range_m: f64, k: usize, mu: f64, sigma: f64) -> impl Iterator<Item = &CellRecord> {
        self.records
            .iter()
            .filter(move |r| (r.range_m - range_m).abs() < 1e-6 && r.k == k && r.mu == mu && r.sigma == sigma)
    }

    fn mean_class(&self, range_m: f64, k: usize, mu: f64, sigma: f64, c: SemanticLabel) -> Option<f64> {
        mean(
            self.matching(range_m, k, mu, sigma)
                .filter_map(|r| r.per_class_iou.get(&c).copied()),
        )
    }

    fn settings(&self) -> (Vec<f64>, Vec<usize>, Vec<(f64, f64)>) {
        let mut ks: Vec<usize> = Vec::new();
        let mut noise: Vec<(f64, f64)> = Vec::new();
        for r in self
            .records
            .iter()
            .map(|r| (r.k, r.mu, r.sigma))
            .chain(self.failures.iter().map(|f| (f.k, f.mu, f.sigma)))
        {
            if !ks.contains(&r.0) {
                ks.push(r.0);
            }
            if !noise.contains(&(r.1, r.2)) {
                noise.push((r.1, r.2));
            }
        }
        (self.ranges.iter().map(|r| r.range_m).collect(), ks, noise)
    }

    /// Human-readable tables: per-class IoU by range and collaborator count
    /// on noiseless poses, then mIoU by noise level. Values are percentages
    /// averaged over ego agents; `-` marks classes absent from every cell.
    pub fn table(&self) -> String {
        let (ranges, ks, noise) = self.settings();
        let cols: Vec<(f64, usize)> = ranges.iter().flat_map(|&r| ks.iter().map(move |&k| (r, k))).collect();
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}", 100.0 * x));
        let mut out = String::new();
        let head: Vec<String> = cols.iter().map(|(r, k)| format!("{r}m k={k}")).collect();
        let width = head.iter().map(|h| h.len()).max().unwrap_or(6).max(6);
        let label_w = self.classes.iter().map(|c| c.name().len()).max().unwrap_or(4).max(12);

        let _ = writeln!(out, "Semantic occupancy IoU (%), noiseless poses");
        let _ = write!(out, "{:<label_w$}", "");
        for h in &head {
            let _ = write!(out, "  {h:>width$}");
        }
        out.push('\n');
        let mut row = |name: &str, vals: Vec<Option<f64>>| {
            let _ = write!(out, "{name:<label_w$}");
            for v in vals {
                let _ = write!(out, "  {:>width$}", fmt(v));
            }
            out.push('\n');
        };
        row(
            "mIoU",
            cols.iter().map(|&(r, k)| self.mean_miou(r, k, 0.0, 0.0)).collect(),
        );
        for &c in &self.classes {
            row(
                c.name(),
                cols.iter().map(|&(r, k)| self.mean_class(r, k, 0.0, 0.0, c)).collect(),
            );
        }

        let _ = writeln!(out, "\nmIoU (%) under pose noise");
        let _ = write!(out, "{:>8}  {:>8}", "mu", "sigma");
        for h in &head {
            let _ = write!(out, "  {h:>width$}");
        }
        out.push('\n');
        for &(mu, sigma) in &noise {
            let _ = write!(out, "{mu:>8.2}  {sigma:>8.2}");
            for &(r, k) in &cols {
                let _ = write!(out, "  {:>width$}", fmt(self.mean_miou(r, k, mu, sigma)));
            }
            out.push('\n');
        }
        if !self.failures.is_empty() {
            let _ = writeln!(
                out,
                "\n{} cell(s) failed; see the report for details",
                self.failures.len()
            );
        }
        out
    }
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Benchmark range grids for a list of side lengths in metres, each at the
/// 256-column benchmark resolution.
pub fn ranges_from_extents(extents: &[f64]) -> Result<Vec<GridSpec>> {
    extents
        .iter()
        .map(|&e| GridSpec::benchmark(e, GridSpec::benchmark_resolution(e)))
        .collect()
}
