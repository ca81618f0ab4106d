//! Implementations of the CLI subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use perinv_core::dedup;
use perinv_core::geometry::PeriodicSet;
use perinv_core::invariants::{self, WeightedRowDistribution};
use perinv_core::metrics::{self, GroundMetric, InvariantKind, LndConfig};
use perinv_core::{native, psd};
use serde_json::json;

use crate::inputs::{load_all, load_file, load_lenient, sanitize_id};
use crate::{CliError, OutputFormat};

fn validate_params(order: usize, neighbors: usize) -> Result<(), CliError> {
    if order < 1 || neighbors < 1 {
        return Err(CliError::usage("order and neighbors must be at least 1"));
    }
    Ok(())
}

fn write_out(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::computation(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::computation(e.to_string()))
        }
    }
}

fn concat_distribution(
    set: &PeriodicSet,
    kind: InvariantKind,
    h: usize,
    k: usize,
) -> Result<WeightedRowDistribution, CliError> {
    let id = set.id().unwrap_or("unnamed");
    match kind {
        InvariantKind::Pdd => invariants::pdd_concat(set, h, k),
        InvariantKind::Pda => invariants::pda_concat(set, h, k),
    }
    .map_err(|e| CliError::computation(format!("{id}: {e}")))
}

#[allow(clippy::too_many_arguments)]
pub fn invariant(
    inputs: &[PathBuf],
    order: usize,
    neighbors: usize,
    kind: InvariantKind,
    moments: Option<usize>,
    collapse: bool,
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    validate_params(order, neighbors)?;
    let sets = load_all(inputs)?;
    if let Some(dir) = output {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::computation(format!("{}: {e}", dir.display())))?;
    }
    let mut stdout_payload = String::new();
    for set in &sets {
        let started = Instant::now();
        let id = set.id().unwrap_or("unnamed").to_string();
        let mut dist = concat_distribution(set, kind, order, neighbors)?;
        if collapse {
            dist = dist.collapse(invariants::COLLAPSE_TOL);
        }
        let record = match (format, moments) {
            (OutputFormat::Csv, None) => {
                format!(
                    "# id={id} invariant={kind} h={order} k={neighbors}\n{}",
                    dist.to_csv()
                )
            }
            (OutputFormat::Csv, Some(t)) => {
                let m = invariants::moments(&dist, t)
                    .map_err(|e| CliError::computation(format!("{id}: {e}")))?;
                let mut text = format!(
                    "# id={id} invariant={kind} h={order} k={neighbors} moments={t}\n"
                );
                for row in m.rows() {
                    let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                text
            }
            (OutputFormat::Json, maybe_t) => {
                let mut value = json!({
                    "id": id,
                    "invariant": kind.to_string(),
                    "h": order,
                    "k": neighbors,
                    "rows": dist.rows().iter().map(|r| json!({
                        "weight": r.weight,
                        "values": r.values,
                    })).collect::<Vec<_>>(),
                });
                if let Some(t) = maybe_t {
                    let m = invariants::moments(&dist, t)
                        .map_err(|e| CliError::computation(format!("{id}: {e}")))?
                        .with_provenance(kind.to_string(), order);
                    value["moments"] = serde_json::to_value(&m).unwrap();
                }
                let mut text = serde_json::to_string_pretty(&value).unwrap();
                text.push('\n');
                text
            }
        };
        eprintln!("computed {id} in {:.2?}", started.elapsed());
        match output {
            Some(dir) => {
                let ext = match format {
                    OutputFormat::Csv => "csv",
                    OutputFormat::Json => "json",
                };
                let path = dir.join(format!("{}.{ext}", sanitize_id(&id)));
                std::fs::write(&path, record)
                    .map_err(|e| CliError::computation(format!("{}: {e}", path.display())))?;
            }
            None => stdout_payload.push_str(&record),
        }
    }
    if output.is_none() {
        write_out(None, &stdout_payload)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn compare(
    file_a: &Path,
    file_b: &Path,
    order: usize,
    neighbors: usize,
    ground: GroundMetric,
    kind: InvariantKind,
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    validate_params(order, neighbors)?;
    let left = load_file(file_a).map_err(CliError::Usage)?;
    let right = load_file(file_b).map_err(CliError::Usage)?;
    if left.is_empty() || right.is_empty() {
        return Err(CliError::usage("comparison needs a structure on each side"));
    }
    let mut records: Vec<(String, String, String, usize, f64)> = Vec::new();
    for a in &left {
        for b in &right {
            let id_a = a.id().unwrap_or("a").to_string();
            let id_b = b.id().unwrap_or("b").to_string();
            let fail = |e: metrics::MetricError| {
                CliError::computation(format!("{id_a} vs {id_b}: {e}"))
            };

            // Vector filter: ground distance of the order-1 column means.
            let mean = |set: &PeriodicSet| -> Result<Vec<f64>, CliError> {
                match kind {
                    InvariantKind::Pdd => invariants::amd(set, neighbors),
                    InvariantKind::Pda => invariants::ada_h(set, 1, neighbors),
                }
                .map_err(|e| CliError::computation(format!("{e}")))
            };
            let v = metrics::ground_distance(&mean(a)?, &mean(b)?, ground).map_err(fail)?;
            records.push((id_a.clone(), id_b.clone(), "vector".into(), 1, v));

            let mut running_max = 0.0f64;
            for h in 1..=order {
                let d = metrics::emd_h(a, b, h, neighbors, ground, kind).map_err(fail)?;
                running_max = running_max.max(d);
                records.push((id_a.clone(), id_b.clone(), "emd".into(), h, d));
            }
            records.push((id_a, id_b, "emd_max".into(), order, running_max));
        }
    }
    let text = match format {
        OutputFormat::Csv => {
            let mut text = String::from("idA,idB,metric,h,k,ground,value\n");
            for (a, b, metric, h, v) in &records {
                text.push_str(&format!("{a},{b},{metric},{h},{neighbors},{ground},{v}\n"));
            }
            text
        }
        OutputFormat::Json => {
            let value: Vec<_> = records
                .iter()
                .map(|(a, b, metric, h, v)| {
                    json!({
                        "idA": a, "idB": b, "metric": metric, "h": h,
                        "k": neighbors, "ground": ground.to_string(), "value": v,
                    })
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&value).unwrap();
            text.push('\n');
            text
        }
    };
    write_out(output, &text)
}

#[allow(clippy::too_many_arguments)]
pub fn nn(
    query: &Path,
    corpus: &[PathBuf],
    top: usize,
    order: usize,
    neighbors: usize,
    ground: GroundMetric,
    kind: InvariantKind,
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    validate_params(order, neighbors)?;
    let query_sets = load_file(query).map_err(CliError::Usage)?;
    let query_set = query_sets
        .first()
        .ok_or_else(|| CliError::usage("query file holds no structures"))?;
    let corpus_sets = load_all(corpus)?;
    let config = LndConfig {
        h: order,
        k: neighbors,
        ground,
        invariant: kind,
        max_over_orders: true,
    };
    let started = Instant::now();
    let result = metrics::lnd(query_set, &corpus_sets, &config)
        .map_err(|e| CliError::computation(e.to_string()))?;
    eprintln!(
        "scanned {} corpus entries in {:.2?}",
        corpus_sets.len(),
        started.elapsed()
    );

    let mut ranked: Vec<(usize, f64)> = result
        .distances
        .iter()
        .copied()
        .enumerate()
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top.max(1));
    let query_id = query_set.id().unwrap_or("query");

    let text = match format {
        OutputFormat::Csv => {
            // min_perturbation: matching that entry exactly needs some atom
            // to move at least half the reported distance.
            let mut text = String::from("query,rank,id,distance,min_perturbation\n");
            for (rank, (idx, d)) in ranked.iter().enumerate() {
                let id = corpus_sets[*idx].id().unwrap_or("unnamed");
                text.push_str(&format!(
                    "{query_id},{},{id},{d},{}\n",
                    rank + 1,
                    0.5 * d
                ));
            }
            text
        }
        OutputFormat::Json => {
            let value = json!({
                "query": query_id,
                "lnd": result.distance,
                "min_perturbation": 0.5 * result.distance,
                "neighbors": ranked.iter().enumerate().map(|(rank, (idx, d))| json!({
                    "rank": rank + 1,
                    "id": corpus_sets[*idx].id().unwrap_or("unnamed"),
                    "distance": d,
                })).collect::<Vec<_>>(),
            });
            let mut text = serde_json::to_string_pretty(&value).unwrap();
            text.push('\n');
            text
        }
    };
    write_out(output, &text)
}

const THRESHOLD_LADDER: [f64; 6] = [1e-10, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

pub fn dedup(
    inputs: &[PathBuf],
    inputs_b: Option<&[PathBuf]>,
    thresholds: Option<Vec<f64>>,
    neighbors: usize,
    ground: GroundMetric,
    output: &Path,
) -> Result<(), CliError> {
    validate_params(1, neighbors)?;
    let (dataset_a, mut unreadable) = load_lenient(inputs)?;
    let dataset_b = match inputs_b {
        Some(paths) => {
            let (sets, mut failed) = load_lenient(paths)?;
            unreadable.append(&mut failed);
            Some(sets)
        }
        None => None,
    };
    let thresholds = thresholds.unwrap_or_else(|| THRESHOLD_LADDER.to_vec());
    if thresholds.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(CliError::usage("thresholds must be positive"));
    }
    std::fs::create_dir_all(output)
        .map_err(|e| CliError::computation(format!("{}: {e}", output.display())))?;
    for threshold in thresholds {
        let started = Instant::now();
        let (mut report, pairs) = dedup::hierarchical_dedup(
            &dataset_a,
            dataset_b.as_deref(),
            threshold,
            neighbors,
            ground,
        )
        .map_err(|e| CliError::computation(e.to_string()))?;
        report.quarantined.extend(unreadable.iter().cloned());
        eprintln!("threshold {threshold:e}: {:.2?}", started.elapsed());

        let tag = format!("{threshold:e}");
        let report_path = output.join(format!("report_{tag}.csv"));
        std::fs::write(&report_path, dedup::report_csv(&report))
            .map_err(|e| CliError::computation(format!("{}: {e}", report_path.display())))?;
        let pairs_path = output.join(format!("pairs_{tag}.csv"));
        std::fs::write(&pairs_path, dedup::pair_list_csv(&pairs))
            .map_err(|e| CliError::computation(format!("{}: {e}", pairs_path.display())))?;
        print!("{}", dedup::report_summary(&report));
    }
    Ok(())
}

pub fn reconstruct_1d(input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(input).map_err(|e| CliError::usage(format!("{e}")))?;
    let dist = WeightedRowDistribution::from_csv(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
    let set = psd::psd_reconstruct(&dist)
        .map_err(|e| CliError::computation(e.to_string()))?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("reconstructed");
    let mut text = native::write_native(&set.with_id(format!("{stem}-reconstructed")));
    text.push('\n');
    write_out(output, &text)
}

pub fn asymptote(
    inputs: &[PathBuf],
    order: usize,
    neighbors: usize,
    format: OutputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    validate_params(order, neighbors)?;
    let sets = load_all(inputs)?;
    let mut rows: Vec<(String, usize, usize, f64, f64, f64)> = Vec::new();
    for set in &sets {
        let id = set.id().unwrap_or("unnamed").to_string();
        for h in 1..=order {
            let dist = invariants::pdd_h(set, h, neighbors)
                .map_err(|e| CliError::computation(format!("{id}: {e}")))?;
            let means = dist.column_means();
            let c = invariants::fit_coefficient(set, h, neighbors)
                .map_err(|e| CliError::computation(format!("{id}: {e}")))?;
            for (j, a) in means.iter().enumerate() {
                let basis = invariants::asymptotic_basis(h, set.dim(), j + 1);
                rows.push((id.clone(), h, j + 1, *a, a / basis, a - c * basis));
            }
        }
    }
    let text = match format {
        OutputFormat::Csv => {
            let mut text = String::from("id,h,k,a,ratio,ada\n");
            for (id, h, j, a, ratio, ada) in &rows {
                text.push_str(&format!("{id},{h},{j},{a},{ratio},{ada}\n"));
            }
            text
        }
        OutputFormat::Json => {
            let value: Vec<_> = rows
                .iter()
                .map(|(id, h, j, a, ratio, ada)| {
                    json!({"id": id, "h": h, "k": j, "a": a, "ratio": ratio, "ada": ada})
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&value).unwrap();
            text.push('\n');
            text
        }
    };
    write_out(output, &text)
}
