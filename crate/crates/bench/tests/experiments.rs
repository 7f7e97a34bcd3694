// SPDX-License-Identifier: Apache-2.0

use cmcs_bench::data::{build_dataset, Dataset, Origin};
use cmcs_bench::experiments::{
    run_cluster_quality, run_quality_vs_oracle, run_runtime_scaling, run_strategy_tradeoff, RunStatus,
};
use cmcs_bench::pipeline::{build_artifacts, load_or_build_artifacts, Artifacts, PipelineConfig};
use cmcs_bench::spec::{ExperimentKind, ExperimentSpec};
use cmcs_core::cluster::modularity;
use cmcs_core::dataset::{ego_like_graph, EgoLikeConfig};
use cmcs_core::embed::TrainConfig;

fn small_dataset() -> Dataset {
    let g = ego_like_graph(&EgoLikeConfig { nodes: 200, edges: 1600, communities: 6, intra: 0.9, seed: 1 }).unwrap();
    build_dataset(g, Origin::Synthetic { seed: 1 }, 1).unwrap()
}

fn small_pipeline() -> PipelineConfig {
    let train = TrainConfig { dim: 8, epochs: 1, walks_per_node: 3, walk_length: 20, ..TrainConfig::default() };
    PipelineConfig {
        edge_k: 6,
        attr_k: 12,
        edge_train: train.clone(),
        attr_train: TrainConfig { dim: 12, ..train },
        reduce: None,
        seed: 0,
    }
}

fn artifacts(ds: &Dataset) -> Artifacts {
    build_artifacts(ds, &small_pipeline()).unwrap()
}

#[test]
fn strategies_coincide_on_cliques_without_noise() {
    let ds = small_dataset();
    let spec = ExperimentSpec {
        realizations: 20,
        workers: vec![8],
        skills: 3,
        densities: vec![1.0],
        sigma0: 0.0,
        ..ExperimentSpec::new(ExperimentKind::StrategyTradeoff)
    };
    let (table, points) = run_strategy_tradeoff(&spec, &ds).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(points[0].realizations, 20);
    assert!(points[0].max_objective_gap <= 1e-9);
    assert!((points[0].platform.skill - points[0].leader.skill).abs() <= 1e-9);
}

#[test]
fn aggregation_does_not_depend_on_thread_count() {
    let ds = small_dataset();
    let spec = ExperimentSpec {
        realizations: 12,
        workers: vec![8],
        skills: 3,
        densities: vec![0.2, 0.6],
        ..ExperimentSpec::new(ExperimentKind::StrategyTradeoff)
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_strategy_tradeoff(&spec, &ds).unwrap().1)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn exact_dominates_the_heuristics() {
    let ds = small_dataset();
    let art = artifacts(&ds);
    let spec = ExperimentSpec {
        realizations: 8,
        workers: vec![14],
        skills: 3,
        population: 60,
        iterations: 30,
        ..ExperimentSpec::new(ExperimentKind::QualityVsOracle)
    };
    let (table, records) = run_quality_vs_oracle(&spec, &ds, &art).unwrap();
    assert_eq!(table.rows.len(), 3);
    for r in &records {
        assert_eq!(r.violations, 0);
        assert!(r.exact.objective + 1e-9 >= r.edge_only.objective);
        assert!(r.exact.objective + 1e-9 >= r.edge_attribute.objective);
    }
    let again = run_quality_vs_oracle(&spec, &ds, &art).unwrap().1;
    assert_eq!(records, again);
}

#[test]
fn runtime_rows_mark_skipped_solvers() {
    let ds = small_dataset();
    let spec = ExperimentSpec {
        realizations: 2,
        workers: vec![8, 150],
        skills: 5,
        population: 20,
        iterations: 5,
        ..ExperimentSpec::new(ExperimentKind::RuntimeScaling)
    };
    let (table, points) = run_runtime_scaling(&spec, &ds, None).unwrap();
    assert_eq!(table.rows.len(), 4);
    let find = |m: &str, w: usize| points.iter().find(|p| p.method == m && p.workers == w).unwrap();
    assert_eq!(find("exact", 8).status, RunStatus::Ok);
    assert_eq!(find("exact", 8).skills, 2);
    assert!(find("exact", 8).seconds > 0.0);
    assert_eq!(find("exact", 150).status, RunStatus::Skipped);
    assert!(find("exact", 150).seconds.is_nan());
    assert_eq!(find("ga-edge-attribute", 8).status, RunStatus::Skipped);
    let art = artifacts(&ds);
    let (_, with_ga) = run_runtime_scaling(&spec, &ds, Some(&art)).unwrap();
    assert!(with_ga.iter().filter(|p| p.method == "ga-edge-attribute").all(|p| p.status == RunStatus::Ok));
}

#[test]
fn cluster_quality_and_artifact_cache() {
    let ds = small_dataset();
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_pipeline();
    let built = load_or_build_artifacts(&ds, &cfg, dir.path()).unwrap();
    let cached = load_or_build_artifacts(&ds, &cfg, dir.path()).unwrap();
    // The cluster file keeps labels only.
    for (a, b) in [(&built.edge, &cached.edge), (&built.attr, &cached.attr)] {
        assert_eq!((&a.ids, &a.labels, a.k), (&b.ids, &b.labels, b.k));
    }
    let (table, q) = run_cluster_quality(&ds, &built).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(q.edge_only, modularity(&ds.graph, &built.edge).unwrap());
    assert_eq!(q.edge_attribute, modularity(&ds.graph, &built.attr).unwrap());
    assert_eq!(table.rows[1][1], "12");
}

#[test]
fn csv_ends_with_config_hash() {
    let ds = small_dataset();
    let spec = ExperimentSpec {
        realizations: 2,
        workers: vec![6],
        skills: 2,
        densities: vec![0.5],
        ..ExperimentSpec::new(ExperimentKind::StrategyTradeoff)
    };
    let (table, _) = run_strategy_tradeoff(&spec, &ds).unwrap();
    let mut out = Vec::new();
    table.write_csv(&mut out, &spec.config_hash(&ds.hash)).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with(&table.header.join(",")));
    assert!(text.ends_with(&format!("# config_hash={}\n", spec.config_hash(&ds.hash))));
}
