//! Hierarchical near-duplicate detection over one or two datasets.
//!
//! Candidates come from an L-infinity range query on ADA vectors, then pass
//! through increasingly strong filters: ADA, ADA over orders 1-2, EMD on
//! PDA, and finally the max EMD over PDA orders 1-2. Every stage metric
//! lower-bounds the final one, so no near-duplicate pair is lost before the
//! last stage.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::PeriodicSet;
use crate::invariants::{self, WeightedRowDistribution};
use crate::kdtree::KdTree;
use crate::metrics::{self, GroundMetric, MetricError};

#[derive(Debug, Error)]
pub enum DedupError {
    #[error("threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("no usable entries after quarantine")]
    NoUsableEntries,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Precomputed invariants of one entry.
#[derive(Debug, Clone)]
pub struct EntryInvariants {
    pub id: String,
    pub ada1: Vec<f64>,
    pub ada2: Vec<f64>,
    pub pda1: WeightedRowDistribution,
    pub pda2: WeightedRowDistribution,
}

/// Spatial index over ADA(S; k) vectors of a dataset.
///
/// Range queries return a superset of all entries within the given
/// L-infinity threshold; entries whose invariants cannot be computed (for
/// example partially periodic sets without a packing coefficient) are
/// quarantined with the reason, never silently dropped.
pub struct AdaIndex {
    k: usize,
    entries: Vec<EntryInvariants>,
    tree: KdTree,
    pub quarantined: Vec<(String, String)>,
}

fn entry_id(set: &PeriodicSet, index: usize) -> String {
    set.id()
        .map(str::to_string)
        .unwrap_or_else(|| format!("entry-{index}"))
}

fn compute_entry(set: &PeriodicSet, index: usize, k: usize) -> Result<EntryInvariants, String> {
    let id = entry_id(set, index);
    let pda1 = invariants::pda_h(set, 1, k).map_err(|e| e.to_string())?;
    let pda2 = invariants::pda_h(set, 2, k).map_err(|e| e.to_string())?;
    Ok(EntryInvariants {
        id,
        ada1: pda1.column_means(),
        ada2: pda2.column_means(),
        pda1,
        pda2,
    })
}

/// Builds the ADA index for a dataset, quarantining entries that fail.
pub fn build_index(sets: &[PeriodicSet], k: usize) -> AdaIndex {
    let computed: Vec<Result<EntryInvariants, (String, String)>> = sets
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            compute_entry(set, i, k).map_err(|reason| (entry_id(set, i), reason))
        })
        .collect();
    let mut entries = Vec::new();
    let mut quarantined = Vec::new();
    for item in computed {
        match item {
            Ok(e) => entries.push(e),
            Err(q) => quarantined.push(q),
        }
    }
    let tree = KdTree::build(entries.iter().map(|e| e.ada1.clone()).collect());
    AdaIndex {
        k,
        entries,
        tree,
        quarantined,
    }
}

impl AdaIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[EntryInvariants] {
        &self.entries
    }

    /// Entries within L-infinity distance `radius` of the ADA vector.
    pub fn range_query(&self, ada: &[f64], radius: f64) -> Vec<usize> {
        self.tree.range_query(ada, radius)
    }
}

/// Progress of one pipeline stage.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub name: &'static str,
    pub pairs: usize,
    pub unique_entries: usize,
    pub percent: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct DedupReport {
    pub stages: Vec<StageReport>,
    pub threshold: f64,
    pub ground: GroundMetric,
    pub dataset_a: usize,
    pub dataset_b: Option<usize>,
    pub quarantined: Vec<(String, String)>,
}

/// One candidate pair with the distances it survived.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub id_a: String,
    pub id_b: String,
    /// 1-based index of the last stage the pair passed (4 = survived all).
    pub stage_reached: u8,
    pub d_ada: f64,
    pub d_ada2: Option<f64>,
    pub d_pda: Option<f64>,
    pub d_pda2: Option<f64>,
}

impl PairRecord {
    pub fn survived(&self) -> bool {
        self.stage_reached == 4
    }
}

fn stage1_radius(threshold: f64, k: usize, ground: GroundMetric) -> f64 {
    // L_inf(ada) <= L_q(ada) <= EMD_q for every finite q, so the query
    // radius equals the threshold. RMS needs the sqrt(k) inflation from
    // L_inf <= sqrt(k) RMS.
    match ground {
        GroundMetric::Rms => threshold * (k as f64).sqrt(),
        _ => threshold,
    }
}

fn vector_distance(u: &[f64], v: &[f64], ground: GroundMetric) -> f64 {
    metrics::ground_distance(u, v, ground).expect("equal lengths by construction")
}

/// Runs the staged pipeline at one threshold. With one dataset, pairs are
/// unordered (i < j); with two, pairs run from A to B.
pub fn hierarchical_dedup(
    dataset_a: &[PeriodicSet],
    dataset_b: Option<&[PeriodicSet]>,
    threshold: f64,
    k: usize,
    ground: GroundMetric,
) -> Result<(DedupReport, Vec<PairRecord>), DedupError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(DedupError::InvalidThreshold(threshold));
    }
    let t_index = Instant::now();
    let index_a = build_index(dataset_a, k);
    let index_b = dataset_b.map(|b| build_index(b, k));
    if index_a.is_empty() || index_b.as_ref().is_some_and(|b| b.is_empty()) {
        return Err(DedupError::NoUsableEntries);
    }
    let index_seconds = t_index.elapsed().as_secs_f64();

    let radius = stage1_radius(threshold, k, ground);
    let right = index_b.as_ref().unwrap_or(&index_a);

    // Stage 1: candidate generation plus the ADA filter.
    let t1 = Instant::now();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (j, entry) in right.entries().iter().enumerate() {
        for i in index_a.range_query(&entry.ada1, radius) {
            match index_b {
                Some(_) => candidates.push((i, j)),
                None => {
                    if i < j {
                        candidates.push((i, j));
                    }
                }
            }
        }
    }
    let mut pairs: Vec<PairRecord> = candidates
        .par_iter()
        .filter_map(|&(i, j)| {
            let a = &index_a.entries()[i];
            let b = &right.entries()[j];
            let d = vector_distance(&a.ada1, &b.ada1, ground);
            (d <= threshold).then(|| PairRecord {
                id_a: a.id.clone(),
                id_b: b.id.clone(),
                stage_reached: 1,
                d_ada: d,
                d_ada2: None,
                d_pda: None,
                d_pda2: None,
            })
        })
        .collect();
    let mut survivors: Vec<(usize, usize)> = candidates
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let a = &index_a.entries()[i];
            let b = &right.entries()[j];
            vector_distance(&a.ada1, &b.ada1, ground) <= threshold
        })
        .collect();
    let stage1_seconds = index_seconds + t1.elapsed().as_secs_f64();

    let mut stages = Vec::new();
    let denominator = index_a.len();
    push_stage(&mut stages, "ADA", &pairs, 1, denominator, stage1_seconds);

    // Stage 2: max of ADA distances over orders 1 and 2.
    let t2 = Instant::now();
    let stage2: Vec<f64> = survivors
        .par_iter()
        .map(|&(i, j)| {
            let a = &index_a.entries()[i];
            let b = &right.entries()[j];
            vector_distance(&a.ada1, &b.ada1, ground)
                .max(vector_distance(&a.ada2, &b.ada2, ground))
        })
        .collect();
    retain_stage(&mut pairs, &mut survivors, &stage2, threshold, 2, |p, d| {
        p.d_ada2 = Some(d)
    });
    push_stage(&mut stages, "ADA2", &pairs, 2, denominator, t2.elapsed().as_secs_f64());

    // Stage 3: EMD on order-1 deviations.
    let t3 = Instant::now();
    let stage3: Vec<f64> = survivors
        .par_iter()
        .map(|&(i, j)| {
            let a = &index_a.entries()[i];
            let b = &right.entries()[j];
            metrics::emd(&a.pda1, &b.pda1, ground)
                .map(|(d, _)| d)
                .expect("column counts agree")
        })
        .collect();
    retain_stage(&mut pairs, &mut survivors, &stage3, threshold, 3, |p, d| {
        p.d_pda = Some(d)
    });
    push_stage(&mut stages, "PDA", &pairs, 3, denominator, t3.elapsed().as_secs_f64());

    // Stage 4: max EMD over order-1 and order-2 deviations.
    let t4 = Instant::now();
    let stage4: Vec<f64> = survivors
        .par_iter()
        .map(|&(i, j)| {
            let a = &index_a.entries()[i];
            let b = &right.entries()[j];
            let d2 = metrics::emd(&a.pda2, &b.pda2, ground)
                .map(|(d, _)| d)
                .expect("column counts agree");
            let d1 = metrics::emd(&a.pda1, &b.pda1, ground)
                .map(|(d, _)| d)
                .expect("column counts agree");
            d1.max(d2)
        })
        .collect();
    retain_stage(&mut pairs, &mut survivors, &stage4, threshold, 4, |p, d| {
        p.d_pda2 = Some(d)
    });
    push_stage(&mut stages, "PDA2", &pairs, 4, denominator, t4.elapsed().as_secs_f64());

    pairs.sort_by(|a, b| (&a.id_a, &a.id_b).cmp(&(&b.id_a, &b.id_b)));

    let mut quarantined = index_a.quarantined.clone();
    if let Some(b) = &index_b {
        quarantined.extend(b.quarantined.clone());
    }
    let report = DedupReport {
        stages,
        threshold,
        ground,
        dataset_a: dataset_a.len(),
        dataset_b: dataset_b.map(<[PeriodicSet]>::len),
        quarantined,
    };
    Ok((report, pairs))
}

/// Applies one filtering stage: records distances on the surviving pairs
/// and bumps `stage_reached` for those within the threshold.
fn retain_stage(
    pairs: &mut [PairRecord],
    survivors: &mut Vec<(usize, usize)>,
    distances: &[f64],
    threshold: f64,
    stage: u8,
    set_distance: impl Fn(&mut PairRecord, f64),
) {
    let mut di = 0;
    let mut kept = Vec::with_capacity(survivors.len());
    for pair in pairs.iter_mut() {
        if pair.stage_reached == stage - 1 {
            let d = distances[di];
            let cell = survivors[di];
            di += 1;
            set_distance(pair, d);
            if d <= threshold {
                pair.stage_reached = stage;
                kept.push(cell);
            }
        }
    }
    *survivors = kept;
}

fn push_stage(
    stages: &mut Vec<StageReport>,
    name: &'static str,
    pairs: &[PairRecord],
    stage: u8,
    dataset_len: usize,
    seconds: f64,
) {
    let surviving: Vec<&PairRecord> = pairs
        .iter()
        .filter(|p| p.stage_reached >= stage)
        .collect();
    let mut ids: Vec<&str> = surviving
        .iter()
        .flat_map(|p| [p.id_a.as_str(), p.id_b.as_str()])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    stages.push(StageReport {
        name,
        pairs: surviving.len(),
        unique_entries: ids.len(),
        percent: 100.0 * ids.len() as f64 / dataset_len.max(1) as f64,
        seconds,
    });
}

/// Renders the per-stage table: pairs, unique entries, percentage, time.
pub fn report_summary(report: &DedupReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "threshold {} ground {} entries {}{}\n",
        report.threshold,
        report.ground,
        report.dataset_a,
        report
            .dataset_b
            .map(|b| format!(" vs {b}"))
            .unwrap_or_default()
    ));
    out.push_str("stage      pairs  entries  percent   time_s\n");
    for s in &report.stages {
        out.push_str(&format!(
            "{:<9} {:>6} {:>8} {:>8.2} {:>8.2}\n",
            s.name, s.pairs, s.unique_entries, s.percent, s.seconds
        ));
    }
    if !report.quarantined.is_empty() {
        out.push_str(&format!("quarantined {}\n", report.quarantined.len()));
        for (id, reason) in &report.quarantined {
            out.push_str(&format!("  {id}: {reason}\n"));
        }
    }
    out
}

/// CSV mirror of the report: one column per stage.
pub fn report_csv(report: &DedupReport) -> String {
    let mut out = String::from("metric");
    for s in &report.stages {
        out.push_str(&format!(",{}", s.name));
    }
    out.push('\n');
    for (label, field) in [
        ("pairs", 0usize),
        ("entries", 1),
        ("percent", 2),
        ("time_s", 3),
    ] {
        out.push_str(label);
        for s in &report.stages {
            match field {
                0 => out.push_str(&format!(",{}", s.pairs)),
                1 => out.push_str(&format!(",{}", s.unique_entries)),
                2 => out.push_str(&format!(",{:.2}", s.percent)),
                _ => out.push_str(&format!(",{:.3}", s.seconds)),
            }
        }
        out.push('\n');
    }
    out
}

/// CSV pair list: ids, last stage passed, and the stage distances.
pub fn pair_list_csv(pairs: &[PairRecord]) -> String {
    let mut out = String::from("idA,idB,stage_reached,d_ADA,d_ADA2,d_PDA,d_PDA2\n");
    for p in pairs {
        let opt = |v: Option<f64>| v.map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.id_a,
            p.id_b,
            p.stage_reached,
            p.d_ada,
            opt(p.d_ada2),
            opt(p.d_pda),
            opt(p.d_pda2)
        ));
    }
    out
}
