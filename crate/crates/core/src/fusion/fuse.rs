use rayon::prelude::*;

use crate::annotate::{Mask, VoxelGrid};
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::grid_ops::WarpMap;
use crate::scene::{Agent, GridSpec, SemanticLabel, NUM_LABELS};

/// Upper bound on the number of collaborators fused into one ego view.
pub const MAX_COLLABORATORS: usize = 6;

/// The `min(k, |others|, 6)` agents closest to `ego` by translation
/// distance, nearest first, ties going to the lower id. An agent sharing
/// the ego's id is never selected.
pub fn select_collaborators<'a>(ego: &Agent, others: &'a [Agent], k: usize) -> Vec<&'a Agent> {
    let mut ranked: Vec<(f64, &Agent)> = others
        .iter()
        .filter(|a| a.id != ego.id)
        .map(|a| ((a.pose.translation - ego.pose.translation).norm(), a))
        .collect();
    ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.id.cmp(&y.1.id)));
    ranked
        .into_iter()
        .take(k.min(MAX_COLLABORATORS))
        .map(|(_, a)| a)
        .collect()
}

/// One collaborator's observation and the transform taking its grid frame
/// into the ego frame.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub grid: &'a VoxelGrid,
    pub observed: &'a Mask,
    pub transform: RigidTransform,
}

/// How neighbour labels are combined where the ego saw nothing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// The first neighbour, in collaborator order, whose hybrid mask holds.
    #[default]
    FirstValid,
    /// Most frequent label among neighbours whose hybrid mask holds; ties
    /// go to the label offered by the earlier neighbour.
    Vote,
}

/// Fused grid plus the voxels that received a label from some agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub grid: VoxelGrid,
    pub defined: Mask,
}

/// Fuses the ego observation with warped neighbour observations: observed
/// ego voxels keep the ego label, the rest take the first neighbour whose
/// hybrid mask (warp validity and warped observedness) is set, else `empty`.
pub fn fuse(
    ego_grid: &VoxelGrid,
    ego_observed: &Mask,
    neighbors: &[Neighbor<'_>],
    spec: &GridSpec,
) -> Result<VoxelGrid> {
    Ok(fuse_with(ego_grid, ego_observed, neighbors, spec, FusionMode::FirstValid)?.grid)
}

pub fn fuse_with(
    ego_grid: &VoxelGrid,
    ego_observed: &Mask,
    neighbors: &[Neighbor<'_>],
    spec: &GridSpec,
    mode: FusionMode,
) -> Result<Fused> {
    if !ego_grid.spec().approx_eq(spec) {
        return Err(Error::ShapeMismatch(format!(
            "ego grid shape {:?} does not match the fusion grid {:?}",
            ego_grid.shape(),
            spec.shape()
        )));
    }
    ego_observed.check_matches(spec)?;
    let mut warped = Vec::with_capacity(neighbors.len());
    for n in neighbors {
        n.observed.check_matches(n.grid.spec())?;
        let map = WarpMap::new(n.grid.spec(), &n.transform, spec);
        let labels = map.warp_labels(n.grid)?;
        let hybrid = map.warp_mask(n.observed)?;
        labels.check_same_spec(ego_grid)?;
        warped.push((labels, hybrid));
    }

    let ego = ego_grid.labels();
    let seen = ego_observed.bits();
    let (labels, defined): (Vec<SemanticLabel>, Vec<bool>) = (0..spec.voxel_count())
        .into_par_iter()
        .map(|l| {
            if seen[l] {
                return (ego[l], true);
            }
            let mut offers = warped.iter().filter(|(_, h)| h.get(l)).map(|(g, _)| g.labels()[l]);
            match mode {
                FusionMode::FirstValid => offers.next().map_or((SemanticLabel::EMPTY, false), |x| (x, true)),
                FusionMode::Vote => {
                    let mut counts = [0u32; NUM_LABELS];
                    let mut order = Vec::new();
                    for x in offers {
                        if counts[x.code() as usize] == 0 {
                            order.push(x);
                        }
                        counts[x.code() as usize] += 1;
                    }
                    let mut best: Option<SemanticLabel> = None;
                    for x in order {
                        if best.is_none_or(|b| counts[x.code() as usize] > counts[b.code() as usize]) {
                            best = Some(x);
                        }
                    }
                    best.map_or((SemanticLabel::EMPTY, false), |x| (x, true))
                }
            }
        })
        .unzip();
    Ok(Fused {
        grid: VoxelGrid::from_labels(*spec, labels)?,
        defined: Mask::from_bits(spec, defined)?,
    })
}
