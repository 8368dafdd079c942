//! Writer for the human-readable LP text format.

use std::fmt::Write;

use crate::model::{ConstraintSystem, LinearRow, RowTag};

const MAX_LINE: usize = 100;

/// Renders `sys` as LP text: constant zero objective, rows sorted by tag
/// (stable, so build order within a tag), then every variable declared binary.
///
/// Row names are `<tag>_<k>`, `k` counting from 0 within the tag; the anchor
/// and cardinality rows are named `anchor` and `card`. Output is a pure
/// function of the system.
pub fn export_lp(sys: &ConstraintSystem) -> String {
    let names: Vec<String> = sys.variables.iter().map(|v| v.name()).collect();
    let mut out = String::new();
    out.push_str("\\ binary tiling model\n");
    let _ = writeln!(out, "\\ n = {}, n_A = {}, n_B = {}", sys.n, sys.n_a, sys.n_b);
    out.push_str("Minimize\n obj: 0\nSubject To\n");

    let mut order: Vec<usize> = (0..sys.rows.len()).collect();
    order.sort_by_key(|&k| sys.rows[k].tag);
    let mut current: Option<RowTag> = None;
    let mut counter = 0usize;
    for k in order {
        let row = &sys.rows[k];
        if current != Some(row.tag) {
            current = Some(row.tag);
            counter = 0;
        }
        let label = match row.tag {
            RowTag::Anchor if counter == 0 => "anchor".to_string(),
            RowTag::Cardinality if counter == 0 => "card".to_string(),
            tag => format!("{tag}_{counter}"),
        };
        counter += 1;
        write_row(&mut out, &label, row, &names);
    }

    out.push_str("Binary\n");
    let mut line = String::new();
    for name in &names {
        if line.len() + name.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(name);
    }
    if !line.is_empty() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn write_row(out: &mut String, label: &str, row: &LinearRow, names: &[String]) {
    let mut line = format!(" {label}:");
    let mut first = true;
    for &(c, v) in &row.terms {
        let mut term = String::new();
        match (first, c < 0) {
            (true, false) => {}
            (true, true) => term.push('-'),
            (false, false) => term.push_str("+ "),
            (false, true) => term.push_str("- "),
        }
        if c.abs() != 1 {
            let _ = write!(term, "{} ", c.abs());
        }
        term.push_str(&names[v.0]);
        first = false;
        if line.len() + term.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = "   ".to_string();
        }
        line.push(' ');
        line.push_str(&term);
    }
    if row.terms.is_empty() {
        // LP readers need at least one term on the left
        line.push_str(" 0 ");
        line.push_str(&names[0]);
    }
    let _ = write!(line, " {} {}", row.relation.symbol(), row.rhs);
    out.push_str(&line);
    out.push('\n');
}
