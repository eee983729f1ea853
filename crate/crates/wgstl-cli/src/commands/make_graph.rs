//! `wgstl make-graph`: spatial graphs from coordinates by connecting
//! every pair of nodes within a great-circle radius.

use indexmap::IndexMap;

use wgstl::{radius_graph, Error, Result};

use crate::output::write_text;
use crate::MakeGraphArgs;

pub fn run(args: MakeGraphArgs) -> Result<()> {
    let text = super::read_text(&args.coords)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let coords: IndexMap<String, [f64; 2]> =
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: format!("{}: {}", args.coords.display(), e.path()),
            message: e.inner().to_string(),
        })?;

    let graph = radius_graph(&coords, args.radius_km)?;
    let json = serde_json::to_string_pretty(&graph).expect("graph serializes");
    write_text(&args.out, &format!("{json}\n"))?;

    println!(
        "graph with {} nodes and {} edges written to {}",
        graph.node_count(),
        graph.edges().count(),
        args.out.display()
    );
    for node in graph.nodes() {
        let neighbors = graph.neighbors(node)?;
        if neighbors.is_empty() {
            println!("  {node}: (no neighbors)");
        } else {
            println!("  {node}: {}", neighbors.join(", "));
        }
    }
    Ok(())
}
