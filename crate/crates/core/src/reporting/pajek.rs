use std::io::Write;
use std::path::Path;

use super::{write_file, ReportError, Result};
use crate::inference::ComparisonGraph;

/// Pajek `.net` file: `*Vertices N` with 1-based quoted labels in label
/// order, then `*Edges` with one id pair per line.
pub fn write_pajek<W: Write>(graph: &ComparisonGraph, out: &mut W) -> Result<()> {
    if graph.nodes.is_empty() {
        return Err(ReportError::EmptyGraph);
    }
    let mut order: Vec<usize> = (0..graph.nodes.len()).collect();
    order.sort_by(|&a, &b| graph.nodes[a].cmp(&graph.nodes[b]));
    let mut id = vec![0; graph.nodes.len()];
    for (pos, &node) in order.iter().enumerate() {
        id[node] = pos + 1;
    }

    writeln!(out, "*Vertices {}", graph.nodes.len())?;
    for &node in &order {
        writeln!(out, "{} \"{}\"", id[node], graph.nodes[node].replace('"', "'"))?;
    }
    writeln!(out, "*Edges")?;
    let mut edges: Vec<(usize, usize)> = graph
        .edges
        .iter()
        .map(|e| {
            let (x, y) = (id[e.a], id[e.b]);
            (x.min(y), x.max(y))
        })
        .collect();
    edges.sort_unstable();
    for (a, b) in edges {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

pub fn emit_pajek(graph: &ComparisonGraph, path: &Path) -> Result<()> {
    if graph.nodes.is_empty() {
        return Err(ReportError::EmptyGraph);
    }
    write_file(path, |out| write_pajek(graph, out))
}

/// Edges with their p-values as CSV `unit_a,unit_b,p`.
pub fn write_edge_list<W: Write>(graph: &ComparisonGraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["unit_a", "unit_b", "p"])?;
    for e in &graph.edges {
        w.write_record([
            graph.nodes[e.a].as_str(),
            graph.nodes[e.b].as_str(),
            &format!("{:.6e}", e.p),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{core_numbers, PairTest};

    fn graph(nodes: &[&str], edges: &[(usize, usize)]) -> ComparisonGraph {
        ComparisonGraph {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges.iter().map(|&(a, b)| PairTest { a, b, u: 0.0, p: 0.5 }).collect(),
            alpha_family: 0.05,
            core_number: core_numbers(nodes.len(), edges),
        }
    }

    fn render(g: &ComparisonGraph) -> String {
        let mut buf = Vec::new();
        write_pajek(g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimal_graph() {
        assert_eq!(
            render(&graph(&["A", "B"], &[(0, 1)])),
            "*Vertices 2\n1 \"A\"\n2 \"B\"\n*Edges\n1 2\n"
        );
    }

    #[test]
    fn isolated_node_has_no_edge_line() {
        assert_eq!(
            render(&graph(&["A", "B", "C"], &[(0, 2)])),
            "*Vertices 3\n1 \"A\"\n2 \"B\"\n3 \"C\"\n*Edges\n1 3\n"
        );
    }

    #[test]
    fn triangle_with_pendant_golden() {
        let g = graph(&["d", "c", "b", "a"], &[(3, 2), (2, 1), (1, 3), (0, 1)]);
        assert_eq!(g.core_number, [1, 2, 2, 2]);
        let golden = "*Vertices 4\n1 \"a\"\n2 \"b\"\n3 \"c\"\n4 \"d\"\n*Edges\n1 2\n1 3\n2 3\n3 4\n";
        assert_eq!(render(&g), golden);
        assert_eq!(render(&g), render(&g.clone()));
    }

    #[test]
    fn vertices_sorted_by_label() {
        let text = render(&graph(&["Zeta", "Alpha"], &[(0, 1)]));
        assert_eq!(text, "*Vertices 2\n1 \"Alpha\"\n2 \"Zeta\"\n*Edges\n1 2\n");
    }

    #[test]
    fn empty_graph_is_rejected() {
        let mut buf = Vec::new();
        assert!(matches!(
            write_pajek(&graph(&[], &[]), &mut buf),
            Err(ReportError::EmptyGraph)
        ));
    }

    #[test]
    fn edge_list_csv() {
        let mut buf = Vec::new();
        write_edge_list(&graph(&["A", "B"], &[(0, 1)]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "unit_a,unit_b,p\nA,B,5.000000e-1\n");
    }
}
