//! Random forest of gini decision trees.

use std::cmp::Ordering;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LabelClass;
use crate::embed::RepresentationId;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

pub const MODEL_SCHEMA: &str = "rf-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√feature_count⌉ candidates per node.
    SqrtTotal,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::SqrtTotal,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// One unrandomized tree over all features.
    pub fn single_tree() -> Self {
        ForestParams {
            n_trees: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::InvalidParams("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParams("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }

    fn candidates(&self, feature_count: usize) -> usize {
        match self.max_features {
            MaxFeatures::All => feature_count,
            MaxFeatures::SqrtTotal => ((feature_count as f64).sqrt().ceil() as usize).clamp(1, feature_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        related: u32,
        not_related: u32,
    },
}

/// Nodes in an arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn leaf(&self, row: &[f64]) -> &TreeNode {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    /// Majority class of the leaf; ties go to NotRelated.
    pub fn predict_row(&self, row: &[f64]) -> LabelClass {
        match self.leaf(row) {
            TreeNode::Leaf { related, not_related } if related > not_related => LabelClass::Related,
            _ => LabelClass::NotRelated,
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { related, not_related } => Some((*related, *not_related)),
            TreeNode::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub schema_version: String,
    pub params: ForestParams,
    pub feature_count: usize,
    #[serde(default)]
    pub representation: Option<RepresentationId>,
    pub trees: Vec<Tree>,
}

/// 1 − Σ p²; errors on an empty node.
pub fn gini_impurity(related: u64, not_related: u64) -> Result<f64> {
    let n = related + not_related;
    if n == 0 {
        return Err(Error::EmptyNode);
    }
    let (p, q) = (related as f64 / n as f64, not_related as f64 / n as f64);
    Ok(1.0 - (p * p + q * q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Split quality as the exact fraction `num / den` of
/// (aL²+bL²)/nL + (aR²+bR²)/nR; larger is purer.
#[derive(Debug, Clone, Copy)]
struct Quality {
    num: u128,
    den: u128,
}

impl Quality {
    fn of(left: [u64; 2], right: [u64; 2]) -> Self {
        let nl = u128::from(left[0] + left[1]);
        let nr = u128::from(right[0] + right[1]);
        let sq = |c: [u64; 2]| u128::from(c[0]) * u128::from(c[0]) + u128::from(c[1]) * u128::from(c[1]);
        Quality {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Quality) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    /// Whether the split is strictly purer than the unsplit node.
    fn improves(&self, total: [u64; 2]) -> bool {
        let n = u128::from(total[0] + total[1]);
        let sq = u128::from(total[0]) * u128::from(total[0]) + u128::from(total[1]) * u128::from(total[1]);
        self.num * n > sq * self.den
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    quality: Quality,
    left: [u64; 2],
    right: [u64; 2],
}

impl Candidate {
    /// Better quality first, then lower feature, then lower threshold.
    fn beats(&self, other: &Candidate) -> bool {
        match self.quality.cmp(&other.quality) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.feature, self.threshold) < (other.feature, other.threshold),
        }
    }

    fn decrease(&self) -> f64 {
        let total = [self.left[0] + self.right[0], self.left[1] + self.right[1]];
        let n = (total[0] + total[1]) as f64;
        let g = |c: [u64; 2]| gini_impurity(c[0], c[1]).unwrap_or(0.0) * (c[0] + c[1]) as f64 / n;
        gini_impurity(total[0], total[1]).unwrap_or(0.0) - g(self.left) - g(self.right)
    }
}

fn class_index(label: LabelClass) -> usize {
    usize::from(!label.is_related())
}

/// Best threshold on one column over `samples` (which it reorders).
/// Thresholds are midpoints between consecutive distinct values.
fn best_on_feature(
    column: &[f64],
    labels: &[LabelClass],
    samples: &mut [usize],
    feature: usize,
    total: [u64; 2],
) -> Option<Candidate> {
    samples.sort_unstable_by(|a, b| column[*a].total_cmp(&column[*b]));
    let mut left = [0u64; 2];
    let mut best: Option<Candidate> = None;
    for k in 0..samples.len() - 1 {
        left[class_index(labels[samples[k]])] += 1;
        let (lo, hi) = (column[samples[k]], column[samples[k + 1]]);
        if lo == hi {
            continue;
        }
        let mut threshold = lo / 2.0 + hi / 2.0;
        if threshold >= hi || !threshold.is_finite() {
            threshold = lo;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let cand = Candidate {
            feature,
            threshold,
            quality: Quality::of(left, right),
            left,
            right,
        };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    best
}

fn counts(labels: &[LabelClass], samples: &[usize]) -> [u64; 2] {
    let mut c = [0u64; 2];
    for &s in samples {
        c[class_index(labels[s])] += 1;
    }
    c
}

/// Exhaustive search over `candidate_features` for the split with the
/// largest gini decrease. `None` when no split strictly decreases impurity.
pub fn best_split(rows: &[Vec<f64>], labels: &[LabelClass], candidate_features: &[usize]) -> Option<Split> {
    if rows.len() < 2 {
        return None;
    }
    let columns = to_columns(rows, rows[0].len());
    let samples: Vec<usize> = (0..rows.len()).collect();
    let total = counts(labels, &samples);
    let mut best: Option<Candidate> = None;
    for &f in candidate_features {
        let mut s = samples.clone();
        if let Some(c) = best_on_feature(&columns[f], labels, &mut s, f, total) {
            if best.as_ref().is_none_or(|b| c.beats(b)) {
                best = Some(c);
            }
        }
    }
    best.filter(|c| c.quality.improves(total)).map(|c| Split {
        feature: c.feature,
        threshold: c.threshold,
        impurity_decrease: c.decrease(),
    })
}

fn to_columns(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    (0..width).map(|f| rows.iter().map(|r| r[f]).collect()).collect()
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    labels: &'a [LabelClass],
    params: &'a ForestParams,
    n_candidates: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn leaf(c: [u64; 2]) -> TreeNode {
        TreeNode::Leaf {
            related: c[0] as u32,
            not_related: c[1] as u32,
        }
    }

    /// Visits features in a fresh random order until `n_candidates`
    /// non-constant ones have been evaluated, so a node with any
    /// informative feature is never left unsplit by an unlucky draw.
    fn choose(&mut self, samples: &mut [usize], total: [u64; 2]) -> Option<Candidate> {
        let width = self.columns.len();
        let mut order: Vec<usize> = (0..width).collect();
        if self.n_candidates < width {
            order.shuffle(&mut self.rng);
        }
        let mut best: Option<Candidate> = None;
        let mut informative = 0;
        for f in order {
            if informative == self.n_candidates {
                break;
            }
            if let Some(c) = best_on_feature(&self.columns[f], self.labels, samples, f, total) {
                informative += 1;
                if best.as_ref().is_none_or(|b| c.beats(b)) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn grow(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let total = counts(self.labels, samples);
        self.nodes.push(Self::leaf(total));
        let pure = total[0] == 0 || total[1] == 0;
        if pure
            || samples.len() < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|d| depth >= d)
        {
            return id;
        }
        // impure nodes split on the best threshold even without a gini gain,
        // so leaves end up pure or too small to split
        let Some(best) = self.choose(samples, total) else {
            return id;
        };
        let column = &self.columns[best.feature];
        samples.sort_unstable_by(|a, b| column[*a].total_cmp(&column[*b]).then(a.cmp(b)));
        let cut = samples.partition_point(|s| column[*s] <= best.threshold);
        let (l, r) = samples.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }
}

/// Fits `params.n_trees` trees in parallel. Tree `t` draws its bootstrap
/// sample and feature candidates from a seed derived from
/// `(params.seed, t)`, so the result does not depend on scheduling.
pub fn fit_forest(x: &[Vec<f64>], y: &[LabelClass], params: &ForestParams) -> Result<RandomForestModel> {
    params.check()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParams("need at least two training rows".into()));
    }
    let width = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != width) {
        return Err(Error::WidthMismatch {
            expected: width,
            found: bad.len(),
        });
    }
    if y.iter().all(|l| *l == y[0]) {
        return Err(Error::SingleClass);
    }
    let columns = to_columns(x, width);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(derive_seed(params.seed, t as u64));
            let mut samples: Vec<usize> = if params.bootstrap {
                (0..x.len()).map(|_| r.random_range(0..x.len())).collect()
            } else {
                (0..x.len()).collect()
            };
            let mut b = Builder {
                columns: &columns,
                labels: y,
                params,
                n_candidates: params.candidates(width),
                rng: r,
                nodes: Vec::new(),
            };
            b.grow(&mut samples, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(RandomForestModel {
        schema_version: MODEL_SCHEMA.to_string(),
        params: params.clone(),
        feature_count: width,
        representation: None,
        trees,
    })
}

impl RandomForestModel {
    fn check_width(&self, x: &[Vec<f64>]) -> Result<()> {
        match x.iter().find(|r| r.len() != self.feature_count) {
            Some(bad) => Err(Error::WidthMismatch {
                expected: self.feature_count,
                found: bad.len(),
            }),
            None => Ok(()),
        }
    }

    fn votes(&self, row: &[f64]) -> usize {
        self.trees
            .iter()
            .filter(|t| t.predict_row(row) == LabelClass::Related)
            .count()
    }

    /// Fraction of trees voting Related.
    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_width(x)?;
        let n = self.trees.len() as f64;
        Ok(x.par_iter().map(|r| self.votes(r) as f64 / n).collect())
    }

    /// Majority vote; a tie is NotRelated.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<LabelClass>> {
        self.check_width(x)?;
        let n = self.trees.len();
        Ok(x.par_iter()
            .map(|r| {
                if 2 * self.votes(r) > n {
                    LabelClass::Related
                } else {
                    LabelClass::NotRelated
                }
            })
            .collect())
    }

    fn validate(&self) -> Result<()> {
        if self.trees.len() != self.params.n_trees {
            return Err(Error::CorruptModel(format!(
                "{} trees stored, params say {}",
                self.trees.len(),
                self.params.n_trees
            )));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(Error::CorruptModel(format!("tree {t} has no nodes")));
            }
            for node in &tree.nodes {
                match node {
                    TreeNode::Split {
                        feature, left, right, ..
                    } => {
                        if *feature >= self.feature_count || *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                            return Err(Error::CorruptModel(format!("tree {t} has a dangling reference")));
                        }
                    }
                    TreeNode::Leaf { related, not_related } => {
                        if related + not_related == 0 {
                            return Err(Error::CorruptModel(format!("tree {t} has an empty leaf")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn save_model(model: &RandomForestModel, path: &Path) -> Result<()> {
    let text = serde_json::to_string(model)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<RandomForestModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let version = value.get("schema_version").and_then(|v| v.as_str()).unwrap_or_default();
    if version != MODEL_SCHEMA {
        return Err(Error::VersionMismatch {
            expected: MODEL_SCHEMA.to_string(),
            found: version.to_string(),
        });
    }
    let model: RandomForestModel = serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))?;
    model.validate()?;
    Ok(model)
}
