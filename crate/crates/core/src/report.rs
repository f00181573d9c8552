//! Text output formats: report files, bench summaries, trajectory dumps,
//! and plot exports.

use std::io::Write;

use crate::annealing::EstimationReport;
use crate::bench::BenchResult;
use crate::graph::MetricGraph;
use crate::Result;

/// Version stamp embedded in every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// Trajectory dump: one `<t> <position> <nearest-node>` line per drift
/// step.
pub fn write_trajectory<W: Write>(
    mut w: W,
    g: &MetricGraph,
    report: &EstimationReport,
) -> Result<()> {
    for (t, pos) in &report.trajectory {
        let nearest = g.position_nearest_node(pos);
        writeln!(w, "{} {} {}", t, pos.display(g), g.label(nearest))?;
    }
    Ok(())
}

/// Human-oriented key-value summary of a bench sweep.
pub fn write_bench_text<W: Write>(mut w: W, bench: &BenchResult) -> Result<()> {
    writeln!(w, "schema_version: {SCHEMA_VERSION}")?;
    writeln!(w, "mode: {}", bench.mode)?;
    writeln!(w, "runs: {}", bench.runs)?;
    writeln!(w, "successes: {}", bench.successes)?;
    writeln!(w, "success_ratio: {:.4}", bench.success_ratio())?;
    writeln!(w, "oracle: {}", bench.oracle.join(" "))?;
    writeln!(w, "oracle_value: {}", bench.oracle_value)?;
    writeln!(w, "mean_pairwise_distance: {}", bench.mean_pairwise_distance)?;
    let freqs: Vec<String> = bench
        .frequencies
        .iter()
        .map(|(node, count)| format!("{node}:{count}"))
        .collect();
    writeln!(w, "returned: {}", freqs.join(" "))?;
    Ok(())
}

/// Machine-readable per-run records: `run,seed,returned,success,wall_ms`.
pub fn write_bench_csv<W: Write>(mut w: W, bench: &BenchResult) -> Result<()> {
    writeln!(w, "run,seed,returned,success,wall_ms")?;
    for r in &bench.per_run {
        writeln!(
            w,
            "{},{},{},{},{:.3}",
            r.run,
            r.seed,
            r.returned,
            r.success as u8,
            r.wall.as_secs_f64() * 1e3
        )?;
    }
    Ok(())
}

/// Plot export: `node x y flag` rows, flag = 1 on marked nodes.
pub fn write_plot_export<W: Write>(
    mut w: W,
    g: &MetricGraph,
    coords: &std::collections::HashMap<String, (f64, f64)>,
    marked: &std::collections::HashSet<String>,
) -> Result<()> {
    writeln!(w, "# node x y barycenter")?;
    for node in g.nodes() {
        let label = g.label(node);
        let (x, y) = coords.get(label).copied().unwrap_or((f64::NAN, f64::NAN));
        let flag = marked.contains(label) as u8;
        writeln!(w, "{label} {x} {y} {flag}")?;
    }
    Ok(())
}
