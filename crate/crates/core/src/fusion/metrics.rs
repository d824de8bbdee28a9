use std::collections::BTreeMap;

use serde::Serialize;

use crate::annotate::VoxelGrid;
use crate::error::{Error, Result};
use crate::scene::{SemanticLabel, NUM_LABELS};

/// Voxel counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ClassCounts {
    pub fn union(&self) -> u64 {
        self.tp + self.fp + self.fn_
    }

    /// `TP / (TP + FP + FN)`, absent when the class appears in neither grid.
    pub fn iou(&self) -> Option<f64> {
        let u = self.union();
        (u > 0).then(|| self.tp as f64 / u as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub evaluated_classes: Vec<SemanticLabel>,
    pub counts: BTreeMap<SemanticLabel, ClassCounts>,
    /// Only classes present in the prediction or the ground truth.
    pub per_class_iou: BTreeMap<SemanticLabel, f64>,
    /// Mean of `per_class_iou`; `None` when no evaluated class is present.
    pub miou: Option<f64>,
}

/// Per-class IoU of `pred` against `gt`. Classes absent from both grids
/// are left out of the report and of the mean.
pub fn evaluate(pred: &VoxelGrid, gt: &VoxelGrid, classes: &[SemanticLabel]) -> Result<EvalReport> {
    if pred.shape() != gt.shape() {
        return Err(Error::ShapeMismatch(format!(
            "prediction shape {:?} differs from ground truth shape {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    pred.check_same_spec(gt)?;
    let mut tp = [0u64; NUM_LABELS];
    let mut in_pred = [0u64; NUM_LABELS];
    let mut in_gt = [0u64; NUM_LABELS];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        in_pred[p.code() as usize] += 1;
        in_gt[g.code() as usize] += 1;
        if p == g {
            tp[p.code() as usize] += 1;
        }
    }
    let mut counts = BTreeMap::new();
    let mut per_class_iou = BTreeMap::new();
    for &c in classes {
        let i = c.code() as usize;
        let cc = ClassCounts {
            tp: tp[i],
            fp: in_pred[i] - tp[i],
            fn_: in_gt[i] - tp[i],
        };
        if let Some(iou) = cc.iou() {
            per_class_iou.insert(c, iou);
        }
        counts.insert(c, cc);
    }
    let miou = (!per_class_iou.is_empty()).then(|| per_class_iou.values().sum::<f64>() / per_class_iou.len() as f64);
    Ok(EvalReport {
        evaluated_classes: classes.to_vec(),
        counts,
        per_class_iou,
        miou,
    })
}
