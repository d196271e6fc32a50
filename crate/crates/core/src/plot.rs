//! Matrix plots of a network with units grouped by cluster: black cells are
//! links, lines separate clusters.

use std::fmt::Write;

use crate::blockmodel::Partition;
use crate::error::{Error, Result};
use crate::network::BinaryNetwork;

/// Units sorted by cluster, keeping the original order within a cluster,
/// together with the positions where a new cluster starts.
pub fn cluster_order(p: &Partition) -> (Vec<usize>, Vec<usize>) {
    let mut order = Vec::with_capacity(p.n());
    let mut breaks = Vec::new();
    for members in p.clusters() {
        if !order.is_empty() {
            breaks.push(order.len());
        }
        order.extend(members);
    }
    (order, breaks)
}

fn check(net: &BinaryNetwork, p: &Partition) -> Result<()> {
    if net.n() != p.n() {
        return Err(Error::Partition(format!(
            "partition covers {} units, network has {}",
            p.n(),
            net.n()
        )));
    }
    Ok(())
}

/// Plain PBM (P1). Each matrix cell is `scale` x `scale` pixels and a
/// one-pixel black line is drawn between clusters.
pub fn to_pbm(net: &BinaryNetwork, p: &Partition, scale: usize) -> Result<String> {
    check(net, p)?;
    let scale = scale.max(1);
    let (order, breaks) = cluster_order(p);
    // pixel row layout: for each matrix row either a divider or `scale` copies
    let mut layout: Vec<Option<usize>> = Vec::new();
    for (pos, &u) in order.iter().enumerate() {
        if breaks.contains(&pos) {
            layout.push(None);
        }
        layout.extend(std::iter::repeat_n(Some(u), scale));
    }
    let size = layout.len();
    let mut out = format!("P1\n{size} {size}\n");
    for row in &layout {
        let line: Vec<&str> = layout
            .iter()
            .map(|col| match (row, col) {
                (Some(i), Some(j)) if net.has_link(*i, *j) => "1",
                (Some(_), Some(_)) => "0",
                _ => "1",
            })
            .collect();
        // PBM lines should stay under 70 characters
        for chunk in line.chunks(34) {
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn to_svg(net: &BinaryNetwork, p: &Partition, cell: usize) -> Result<String> {
    check(net, p)?;
    let cell = cell.max(1);
    let n = net.n();
    let (order, breaks) = cluster_order(p);
    let size = n * cell;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>"#
    );
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            if net.has_link(i, j) {
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="black"/>"#,
                    c * cell,
                    r * cell
                );
            }
        }
    }
    for b in breaks {
        let at = b * cell;
        let _ = writeln!(
            s,
            r#"<line x1="{at}" y1="0" x2="{at}" y2="{size}" stroke="red" stroke-width="1"/>"#
        );
        let _ = writeln!(
            s,
            r#"<line x1="0" y1="{at}" x2="{size}" y2="{at}" stroke="red" stroke-width="1"/>"#
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
