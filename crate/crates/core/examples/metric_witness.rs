//! A metric EPPA-witness without three points pairwise at distance one, and
//! the shortest path completion of an edge-labelled graph.

use eppa::metric::{build_metric_witness_over, detect_non_metric_cycle, metric_structure, shortest_path_completion, EdgeLabelledGraph};
use eppa::verify::{verify_eppa_witness, verify_metric};
use eppa::witness::Witness;
use eppa::Limits;

fn main() -> eppa::Result<()> {
    // x, y at distance 1 and z at distance 2 from both
    let a = EdgeLabelledGraph::from_edges(3, &[(0, 1, 1), (0, 2, 2), (1, 2, 2)])?;
    let base = EdgeLabelledGraph::from_edges(4, &[(0, 1, 1), (2, 3, 1), (0, 2, 2), (0, 3, 2), (1, 2, 2), (1, 3, 2)])?;
    let limits = Limits::default();
    let w = build_metric_witness_over(&a, 3, &base, &[0, 1, 2], &limits)?;
    let metric = verify_metric(w.structure(), 3);
    let eppa = verify_eppa_witness(&metric_structure(&a)?, w.structure(), w.embedding(), Some(&w), &limits)?;
    println!("|B| = {}, metric and K3-free {}, EPPA {}", w.structure().len(), metric.pass, eppa.pass);

    let path = EdgeLabelledGraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)])?;
    let done = shortest_path_completion(&path);
    println!("path completes to {:?}", done.edges().collect::<Vec<_>>());

    let bad = EdgeLabelledGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 3)])?;
    println!("non-metric cycle: {:?}", detect_non_metric_cycle(&bad));
    Ok(())
}
