//! Reading and writing networks: CSV matrices (counts or 0/1) and a
//! minimal Pajek text format.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{BinaryNetwork, CountNetwork};

/// Parses a square integer matrix from CSV text. A first row that does not
/// parse as integers is treated as a header of unit labels and skipped.
fn parse_matrix(text: &str) -> Result<Vec<Vec<u64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<u64>, _> =
            record.iter().map(|f| f.parse::<u64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!(
                    "line {}: {e} in {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(rows)
}

pub fn parse_counts_csv(text: &str) -> Result<CountNetwork> {
    CountNetwork::from_rows(parse_matrix(text)?)
}

/// Parses a 0/1 CSV matrix. With `directed = None`, a symmetric matrix is read
/// as undirected and anything else as directed.
pub fn parse_binary_csv(text: &str, directed: Option<bool>) -> Result<BinaryNetwork> {
    let rows = parse_matrix(text)?;
    let mut bytes = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let row: Result<Vec<u8>> = row
            .into_iter()
            .enumerate()
            .map(|(j, v)| match v {
                0 | 1 => Ok(v as u8),
                _ => Err(Error::Parse(format!("entry ({i}, {j}) is {v}, expected 0 or 1"))),
            })
            .collect();
        bytes.push(row?);
    }
    let directed = match directed {
        Some(d) => d,
        None => {
            let as_directed = BinaryNetwork::from_rows(&bytes, true)?;
            !as_directed.is_symmetric()
        }
    };
    BinaryNetwork::from_rows(&bytes, directed)
}

pub fn to_csv(net: &BinaryNetwork) -> String {
    let mut out = String::with_capacity(net.n() * net.n() * 2);
    for i in 0..net.n() {
        let line: Vec<&str> = net
            .row(i)
            .iter()
            .map(|&v| if v == 1 { "1" } else { "0" })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Minimal Pajek: `*Vertices n`, optional vertex label lines, then `*Arcs`
/// (directed) or `*Edges` (undirected) sections of 1-based endpoint pairs.
/// A trailing weight column is accepted and ignored.
pub fn parse_pajek(text: &str) -> Result<BinaryNetwork> {
    let mut n: Option<usize> = None;
    let mut arcs = Vec::new();
    let mut edges = Vec::new();
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Vertices,
        Arcs,
        Edges,
    }
    let mut section = Section::Preamble;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('*') {
            let mut parts = rest.split_whitespace();
            let keyword = parts.next().unwrap_or("").to_ascii_lowercase();
            section = match keyword.as_str() {
                "vertices" => {
                    let count = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("line {}: bad *Vertices", lineno + 1)))?;
                    n = Some(count);
                    Section::Vertices
                }
                "arcs" => Section::Arcs,
                "edges" => Section::Edges,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unsupported section *{other}",
                        lineno + 1
                    )))
                }
            };
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(Error::Parse(format!(
                    "line {}: data before *Vertices",
                    lineno + 1
                )))
            }
            Section::Vertices => {}
            Section::Arcs | Section::Edges => {
                let mut parts = line.split_whitespace();
                let mut endpoint = || -> Result<usize> {
                    let v: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("line {}: bad link", lineno + 1)))?;
                    if v == 0 {
                        return Err(Error::Parse(format!(
                            "line {}: endpoints are 1-based",
                            lineno + 1
                        )));
                    }
                    Ok(v - 1)
                };
                let pair = (endpoint()?, endpoint()?);
                if section == Section::Arcs {
                    arcs.push(pair);
                } else {
                    edges.push(pair);
                }
            }
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing *Vertices line".into()))?;
    if !arcs.is_empty() && !edges.is_empty() {
        return Err(Error::Parse("mixed *Arcs and *Edges are not supported".into()));
    }
    if edges.is_empty() {
        BinaryNetwork::from_links(n, true, &arcs)
    } else {
        BinaryNetwork::from_links(n, false, &edges)
    }
}

pub fn to_pajek(net: &BinaryNetwork) -> String {
    let n = net.n();
    let mut out = format!("*Vertices {n}\n");
    if net.is_directed() {
        out.push_str("*Arcs\n");
        for i in 0..n {
            for j in 0..n {
                if net.has_link(i, j) {
                    out.push_str(&format!("{} {}\n", i + 1, j + 1));
                }
            }
        }
    } else {
        out.push_str("*Edges\n");
        for i in 0..n {
            for j in (i + 1)..n {
                if net.has_link(i, j) {
                    out.push_str(&format!("{} {}\n", i + 1, j + 1));
                }
            }
        }
    }
    out
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn is_pajek(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("net") | Some("paj")
    )
}

/// Reads a network file, choosing Pajek for `.net`/`.paj` and CSV otherwise.
pub fn read_network(path: &Path) -> Result<BinaryNetwork> {
    let text = read_text(path)?;
    if is_pajek(path) {
        parse_pajek(&text)
    } else {
        parse_binary_csv(&text, None)
    }
}

pub fn write_network(path: &Path, net: &BinaryNetwork) -> Result<()> {
    if is_pajek(path) {
        write_text(path, &to_pajek(net))
    } else {
        write_text(path, &to_csv(net))
    }
}

pub fn read_counts(path: &Path) -> Result<CountNetwork> {
    parse_counts_csv(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_with_header() {
        let c = parse_counts_csv("a,b,c\n0,1,2\n3,0,4\n5,6,0\n").unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.get(2, 1), 6);
    }

    #[test]
    fn counts_bad_cell() {
        assert!(matches!(
            parse_counts_csv("0,1\nx,0\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn binary_csv_infers_direction() {
        let und = parse_binary_csv("0,1\n1,0\n", None).unwrap();
        assert!(!und.is_directed());
        let dir = parse_binary_csv("0,1\n0,0\n", None).unwrap();
        assert!(dir.is_directed());
        assert!(parse_binary_csv("0,2\n0,0\n", None).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let net = BinaryNetwork::from_links(4, true, &[(0, 1), (2, 3), (3, 0)]).unwrap();
        assert_eq!(parse_binary_csv(&to_csv(&net), Some(true)).unwrap(), net);
    }

    #[test]
    fn pajek_roundtrip_both_kinds() {
        let dir = BinaryNetwork::from_links(5, true, &[(0, 1), (1, 0), (4, 2)]).unwrap();
        assert_eq!(parse_pajek(&to_pajek(&dir)).unwrap(), dir);
        let und = BinaryNetwork::from_links(5, false, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(parse_pajek(&to_pajek(&und)).unwrap(), und);
    }

    #[test]
    fn pajek_with_labels_and_weights() {
        let text = "% comment\n*Vertices 3\n1 \"a\"\n2 \"b\"\n3 \"c\"\n*Edges\n1 2 1.0\n2 3 2\n";
        let net = parse_pajek(text).unwrap();
        assert!(!net.is_directed());
        assert_eq!(net.link_count(), 2);
        assert!(net.has_link(2, 1));
    }

    #[test]
    fn pajek_errors() {
        assert!(parse_pajek("*Arcs\n1 2\n").is_err());
        assert!(parse_pajek("*Vertices 2\n*Arcs\n0 1\n").is_err());
        assert!(parse_pajek("*Vertices 2\n*Arcs\n1 3\n").is_err());
    }
}
