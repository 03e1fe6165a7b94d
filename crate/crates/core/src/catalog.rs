//! Text catalog format for array codes, so externally constructed codes
//! can be imported and shipped codes exported.
//!
//! Uniform codes:
//!
//! ```text
//! arraycode 5 2 2 2        <- n k b sigma
//! 1 1 : 1                  <- node proc : sources summed by that cell
//! 1 2 : 2+3
//! ...                      <- n*b cell lines, 1-based indices
//! ```
//!
//! Asymmetric codes:
//!
//! ```text
//! asymcode 7 4 2           <- n k b (sigma is derived from the cells)
//! col 1 3 :                <- column index, cell count
//! 1
//! 2
//! 1+5
//! col 2 2 :
//! ...
//! ```
//!
//! Parsing skips blank lines and `#` comments; serialization emits the
//! canonical form above, and parse followed by serialize reproduces a
//! canonical input byte for byte.

use crate::arraycode::{ArrayCode, CellEquation};
use crate::asymcode::AsymArrayCode;
use crate::error::Error;
use crate::Result;

/// A parsed catalog entry: either code family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Catalog {
    Array(ArrayCode),
    Asym(AsymArrayCode),
}

fn parse_err(line: usize, detail: impl Into<String>) -> Error {
    Error::Parse {
        line,
        detail: detail.into(),
    }
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: expected a positive integer, got {token:?}")))
}

fn parse_sources(text: &str, line: usize) -> Result<CellEquation> {
    let mut sources = Vec::new();
    for part in text.split('+') {
        let part = part.trim();
        if part.is_empty() {
            return Err(parse_err(line, "empty source index in equation"));
        }
        sources.push(parse_usize(part, line, "source index")?);
    }
    Ok(CellEquation::new(sources))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        (!line.is_empty() && !line.starts_with('#')).then_some((i + 1, line))
    })
}

/// Parse either catalog format, dispatching on the header keyword.
pub fn parse_catalog(text: &str) -> Result<Catalog> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| parse_err(0, "empty catalog"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    match tokens.first().copied() {
        Some("arraycode") => {
            if tokens.len() != 5 {
                return Err(parse_err(header_line, "arraycode header needs: arraycode n k b sigma"));
            }
            let n = parse_usize(tokens[1], header_line, "n")?;
            let k = parse_usize(tokens[2], header_line, "k")?;
            let b = parse_usize(tokens[3], header_line, "b")?;
            let sigma = parse_usize(tokens[4], header_line, "sigma")?;
            parse_array_cells(lines, n, k, b, sigma)
        }
        Some("asymcode") => {
            if tokens.len() != 4 {
                return Err(parse_err(header_line, "asymcode header needs: asymcode n k b"));
            }
            let n = parse_usize(tokens[1], header_line, "n")?;
            let k = parse_usize(tokens[2], header_line, "k")?;
            let b = parse_usize(tokens[3], header_line, "b")?;
            parse_asym_columns(lines, n, k, b)
        }
        _ => Err(parse_err(
            header_line,
            format!(
                "unknown catalog kind {:?}; expected arraycode or asymcode",
                tokens.first().unwrap_or(&"")
            ),
        )),
    }
}

fn parse_array_cells<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    n: usize,
    k: usize,
    b: usize,
    sigma: usize,
) -> Result<Catalog> {
    let mut grid: Vec<Vec<Option<CellEquation>>> = vec![vec![None; b]; n];
    let mut count = 0usize;
    let mut last_line = 0usize;
    for (line, text) in lines {
        last_line = line;
        let (coords, eq) = text
            .split_once(':')
            .ok_or_else(|| parse_err(line, "cell line needs the form: node proc : i1+i2"))?;
        let coords: Vec<&str> = coords.split_whitespace().collect();
        if coords.len() != 2 {
            return Err(parse_err(line, "cell line needs exactly a node and a processor index"));
        }
        let node = parse_usize(coords[0], line, "node")?;
        let proc = parse_usize(coords[1], line, "processor")?;
        if node == 0 || node > n || proc == 0 || proc > b {
            return Err(parse_err(line, format!("cell ({node}, {proc}) outside the {n} x {b} grid")));
        }
        if grid[node - 1][proc - 1].replace(parse_sources(eq, line)?).is_some() {
            return Err(parse_err(line, format!("cell ({node}, {proc}) defined twice")));
        }
        count += 1;
    }
    if count != n * b {
        return Err(parse_err(last_line, format!("expected {} cell lines, found {count}", n * b)));
    }
    let grid: Vec<Vec<CellEquation>> = grid
        .into_iter()
        .map(|col| col.into_iter().map(Option::unwrap).collect())
        .collect();
    Ok(Catalog::Array(ArrayCode::new(n, k, b, sigma, grid)?))
}

fn parse_asym_columns<'a>(lines: impl Iterator<Item = (usize, &'a str)>, n: usize, k: usize, b: usize) -> Result<Catalog> {
    let mut lines = lines.peekable();
    let mut columns: Vec<Vec<CellEquation>> = Vec::with_capacity(n);
    let mut last_line = 0usize;
    while let Some((line, text)) = lines.next() {
        last_line = line;
        let tokens: Vec<&str> = text.trim_end_matches(':').split_whitespace().collect();
        if tokens.first() != Some(&"col") || tokens.len() != 3 {
            return Err(parse_err(line, "column header needs the form: col i b_i :"));
        }
        let index = parse_usize(tokens[1], line, "column index")?;
        if index != columns.len() + 1 {
            return Err(parse_err(
                line,
                format!("column {index} out of order; expected col {}", columns.len() + 1),
            ));
        }
        let b_i = parse_usize(tokens[2], line, "column size")?;
        let mut cells = Vec::with_capacity(b_i);
        for _ in 0..b_i {
            let (eq_line, eq) = lines
                .next()
                .ok_or_else(|| parse_err(line, format!("column {index} promises {b_i} cells; input ended early")))?;
            last_line = eq_line;
            cells.push(parse_sources(eq, eq_line)?);
        }
        columns.push(cells);
    }
    if columns.len() != n {
        return Err(parse_err(last_line, format!("expected {n} columns, found {}", columns.len())));
    }
    Ok(Catalog::Asym(AsymArrayCode::new(n, k, b, columns)?))
}

fn sources_text(cell: &CellEquation) -> String {
    cell.sources.iter().map(usize::to_string).collect::<Vec<_>>().join("+")
}

/// Canonical text form of a uniform code.
pub fn serialize_array(code: &ArrayCode) -> String {
    let mut out = format!("arraycode {} {} {} {}\n", code.n(), code.k(), code.b(), code.sigma());
    for node in 0..code.n() {
        for proc in 0..code.b() {
            out.push_str(&format!(
                "{} {} : {}\n",
                node + 1,
                proc + 1,
                sources_text(code.cell(node, proc))
            ));
        }
    }
    out
}

/// Canonical text form of an asymmetric code.
pub fn serialize_asym(code: &AsymArrayCode) -> String {
    let mut out = format!("asymcode {} {} {}\n", code.n(), code.k(), code.b());
    for (i, col) in code.columns().iter().enumerate() {
        out.push_str(&format!("col {} {} :\n", i + 1, col.len()));
        for cell in col {
            out.push_str(&format!("{}\n", sources_text(cell)));
        }
    }
    out
}

pub fn serialize_catalog(catalog: &Catalog) -> String {
    match catalog {
        Catalog::Array(code) => serialize_array(code),
        Catalog::Asym(code) => serialize_asym(code),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraycode::{builtin_5222, search_code};
    use crate::asymcode::build_asym_code;

    #[test]
    fn builtin_round_trips_byte_for_byte() {
        let text = serialize_array(&builtin_5222());
        assert!(text.starts_with("arraycode 5 2 2 2\n1 1 : 1\n1 2 : 2+3\n"));
        let parsed = parse_catalog(&text).unwrap();
        assert_eq!(parsed, Catalog::Array(builtin_5222()));
        assert_eq!(serialize_catalog(&parsed), text);
    }

    #[test]
    fn searched_codes_round_trip() {
        for seed in [3u64, 17, 29] {
            let code = search_code(4, 2, 2, 2, seed).unwrap();
            let text = serialize_array(&code);
            assert_eq!(parse_catalog(&text).unwrap(), Catalog::Array(code));
        }
    }

    #[test]
    fn asym_codes_round_trip_with_derived_degree() {
        let code = build_asym_code(7, 4, 2, 2, 0.5, 11).unwrap();
        let text = serialize_asym(&code);
        let parsed = parse_catalog(&text).unwrap();
        assert_eq!(parsed, Catalog::Asym(code.clone()));
        match parsed {
            Catalog::Asym(back) => assert_eq!(back.sigma(), code.sigma(), "max degree is derived on parse"),
            Catalog::Array(_) => panic!("wrong catalog kind"),
        }
        assert_eq!(serialize_catalog(&Catalog::Asym(code.clone())), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# shipped example\n\n{}", serialize_array(&builtin_5222()));
        assert_eq!(parse_catalog(&text).unwrap(), Catalog::Array(builtin_5222()));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_catalog("arraycode 2 2\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("want header arity error on line 1, got {other:?}"),
        }
        let text = "arraycode 2 2 1 1\n1 1 : 1\n1 1 : 2\n";
        match parse_catalog(text) {
            Err(Error::Parse { line: 3, detail }) => assert!(detail.contains("twice")),
            other => panic!("want duplicate-cell error on line 3, got {other:?}"),
        }
        match parse_catalog("asymcode 2 2 1\ncol 2 1 :\n1\n") {
            Err(Error::Parse { line: 2, detail }) => assert!(detail.contains("out of order")),
            other => panic!("want column-order error on line 2, got {other:?}"),
        }
        match parse_catalog("arraycode 2 2 1 1\n1 1 : 1\n2 1 : x\n") {
            Err(Error::Parse { line: 3, detail }) => assert!(detail.contains("source index")),
            other => panic!("want source parse error on line 3, got {other:?}"),
        }
    }

    #[test]
    fn missing_cells_are_reported() {
        match parse_catalog("arraycode 2 2 1 1\n1 1 : 1\n") {
            Err(Error::Parse { detail, .. }) => assert!(detail.contains("expected 2 cell lines")),
            other => panic!("want cell-count error, got {other:?}"),
        }
    }
}
