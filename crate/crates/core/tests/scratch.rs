use gbary::annealing::ScheduleParams;
use gbary::bench::exact_barycenter;
use gbary::graph::MetricGraph;
use gbary::multiscale::*;
use gbary::partition::extract_subgraphs;
use gbary::stream::{ObservationStream, ReplayMode};
use gbary::Partition;
use std::path::Path;

#[test]
#[ignore]
fn diagnose_hat_landscape() {
    let g = MetricGraph::load_path(Path::new("../../data/metro.edges")).unwrap();
    let stream = ObservationStream::load_path(
        Path::new("../../data/metro_uniform.obs"),
        &g,
        ReplayMode::ShuffleReplay,
        0,
    )
    .unwrap();
    let p = Partition::load_path(Path::new("/tmp/metro20.part"), &g).unwrap();
    let oracle_g = exact_barycenter(&g, &stream.empirical_measure(&g)).unwrap();
    println!(
        "oracle on G: {:?}",
        oracle_g
            .argmins
            .iter()
            .map(|&n| g.label(n))
            .collect::<Vec<_>>()
    );

    for seed in 0..10u64 {
        let params = ScheduleParams::with_seed(seed);
        let mut data = extract_subgraphs(&g, &p);
        let reps =
            choose_representatives(&g, &p, &data, RepStrategy::Random, Some(&stream), &params)
                .unwrap();
        boundary_distances(&g, &p, &reps, &mut data).unwrap();
        let central = p.cluster_of(g.node("c000").unwrap()).unwrap();
        let hat = build_multiscale_graph(&g, &p, &data, &reps, central).unwrap();
        let hat_stream = stream
            .project_to(&g, &hat.graph, 0, |y| {
                gbary::stream::project_multiscale(y, &p, central, &reps)
            })
            .unwrap();
        let m = hat_stream.empirical_measure(&hat.graph);
        let oracle_hat = exact_barycenter(&hat.graph, &m).unwrap();
        let labels: Vec<&str> = oracle_hat.argmins.iter().map(|&n| hat.graph.label(n)).collect();
        // runner-up gap
        let mut vals: Vec<(f64, &str)> = hat
            .graph
            .nodes()
            .map(|n| (oracle_hat.values[n.index()], hat.graph.label(n)))
            .collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        println!(
            "seed {seed}: hat nodes={} argmin={:?} top3={:?}",
            hat.graph.node_count(),
            labels,
            &vals[..3]
        );
    }
}
