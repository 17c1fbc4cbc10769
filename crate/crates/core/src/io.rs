//! On-disk formats: grid functions as flat binary arrays with a text sidecar
//! header, CSV slice export for plotting, and the group/grid config blocks.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::group::{GroupSpec, LawTerm};
use crate::weights::Weight;

fn fmt_num(x: f64) -> String {
    // shortest roundtrip formatting keeps headers readable and exact
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("nan") {
        s.push_str(".0");
    }
    s
}

fn fmt_powers(p: &[(usize, u32)]) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter()
        .map(|(i, e)| format!("{i}^{e}"))
        .collect::<Vec<_>>()
        .join("*")
}

fn parse_powers(s: &str) -> Result<Vec<(usize, u32)>> {
    if s == "-" {
        return Ok(vec![]);
    }
    s.split('*')
        .map(|tok| {
            let (i, e) = tok
                .split_once('^')
                .ok_or_else(|| Error::invalid(format!("bad monomial '{tok}'")))?;
            Ok((
                i.parse().map_err(|_| Error::invalid(format!("bad coordinate '{i}'")))?,
                e.parse().map_err(|_| Error::invalid(format!("bad exponent '{e}'")))?,
            ))
        })
        .collect()
}

/// Key-value config block describing a group (name, dimension, exponents,
/// law coefficients, gauge coefficient).
pub fn group_config_block(spec: &GroupSpec) -> String {
    let mut s = String::from("[group]\n");
    s.push_str(&format!("name = {}\n", spec.name()));
    s.push_str(&format!("n = {}\n", spec.dim()));
    s.push_str(&format!(
        "exponents = {}\n",
        spec.exponents().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
    ));
    if !spec.law().is_empty() {
        let terms: Vec<String> = spec
            .law()
            .iter()
            .map(|t| {
                format!(
                    "{}|{}|{}|{}",
                    t.target,
                    fmt_num(t.coeff),
                    fmt_powers(&t.x_powers),
                    fmt_powers(&t.y_powers)
                )
            })
            .collect();
        s.push_str(&format!("law = {}\n", terms.join(" ; ")));
    }
    s.push_str(&format!("gauge_coeff = {}\n", fmt_num(spec.gauge_coeff())));
    s
}

/// Rebuilds a group from block fields (see [`group_config_block`]).
pub fn group_from_fields(
    name: &str,
    exponents: &[u32],
    law: Option<&str>,
    gauge_coeff: f64,
) -> Result<GroupSpec> {
    let mut terms = Vec::new();
    if let Some(law) = law {
        for term in law.split(';') {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let parts: Vec<&str> = term.split('|').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::invalid(format!("law term '{term}' must have 4 fields")));
            }
            terms.push(LawTerm {
                target: parts[0]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad law target '{}'", parts[0])))?,
                coeff: parts[1]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad law coefficient '{}'", parts[1])))?,
                x_powers: parse_powers(parts[2])?,
                y_powers: parse_powers(parts[3])?,
            });
        }
    }
    GroupSpec::new(name, exponents.to_vec(), terms, gauge_coeff)
}

/// Grid descriptor block.
pub fn grid_config_block(grid: &Grid) -> String {
    let mut s = String::from("[grid]\n");
    s.push_str(&format!(
        "half_widths = {}\n",
        grid.half_widths().iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(", ")
    ));
    s.push_str(&format!(
        "points = {}\n",
        grid.points().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
    ));
    s
}

/// Writes `<base>.gfbin` (raw little-endian f64, C order) and `<base>.gfhdr`
/// (group + grid descriptor blocks).
pub fn write_grid_function(f: &GridFunction, base: &Path) -> Result<()> {
    let grid = f.grid();
    let mut header = String::from("stratlab-grid v1\n\n");
    header.push_str(&group_config_block(grid.spec()));
    header.push('\n');
    header.push_str(&grid_config_block(grid));
    std::fs::write(base.with_extension("gfhdr"), header)?;

    let mut bytes = Vec::with_capacity(8 * f.len());
    for v in f.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(base.with_extension("gfbin"), bytes)?;
    Ok(())
}

/// Reads a grid function written by [`write_grid_function`], rebuilding the
/// grid from the sidecar header.
pub fn read_grid_function(base: &Path) -> Result<GridFunction> {
    let header = std::fs::read_to_string(base.with_extension("gfhdr"))?;
    let mut lines = header.lines();
    match lines.next() {
        Some("stratlab-grid v1") => {}
        other => {
            return Err(Error::invalid(format!(
                "unrecognised grid header signature {other:?}"
            )))
        }
    }
    let parsed = crate::config::parse_sections(&header)?;
    let group = crate::config::group_from_sections(&parsed)?;
    let (half_widths, points) = crate::config::grid_from_sections(&parsed)?;
    let grid = Grid::new(Arc::new(group), &half_widths, &points)?;

    let mut file = std::fs::File::open(base.with_extension("gfbin"))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::invalid(format!(
            "binary payload has {} bytes, grid expects {}",
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values: Array1<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GridFunction::new(grid, values)
}

/// Loads a weight from the grid-function binary format.
pub fn read_weight(base: &Path) -> Result<Weight> {
    Weight::new(read_grid_function(base)?)
}

/// CSV export of the 2-D slice spanned by `axis_a` and `axis_b` through the
/// origin: first row/column carry coordinates, cells the values.
pub fn write_slice_csv(f: &GridFunction, axis_a: usize, axis_b: usize, path: &Path) -> Result<()> {
    let grid = f.grid();
    let dim = grid.dim();
    if axis_a >= dim || axis_b >= dim || axis_a == axis_b {
        return Err(Error::invalid("slice axes must be distinct and in range"));
    }
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# stratlab slice axes=({axis_a},{axis_b}), other axes at the origin")?;
    let mut head = format!("x{axis_a}\\x{axis_b}");
    for jb in 0..grid.points()[axis_b] {
        head.push_str(&format!(",{}", fmt_num(grid.axis_coord(axis_b, jb))));
    }
    writeln!(file, "{head}")?;
    let mut multi: Vec<usize> = grid.points().iter().map(|&m| (m - 1) / 2).collect();
    for ia in 0..grid.points()[axis_a] {
        multi[axis_a] = ia;
        let mut row = fmt_num(grid.axis_coord(axis_a, ia));
        for jb in 0..grid.points()[axis_b] {
            multi[axis_b] = jb;
            row.push_str(&format!(",{}", crate::experiments::fmt_f64(f.values()[grid.flat_index(&multi)])));
        }
        writeln!(file, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_function_roundtrip() {
        let dir = std::env::temp_dir().join("stratlab-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let grid = Grid::new(spec, &[1.0, 1.5, 2.0], &[5, 7, 9]).unwrap();
        let f = GridFunction::from_fn(grid, |x| x[0] + 2.0 * x[1] * x[2]);
        let base = dir.join("roundtrip");
        write_grid_function(&f, &base).unwrap();
        let g = read_grid_function(&base).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(g.grid().points(), &[5, 7, 9]);
        assert_eq!(g.grid().spec().name(), "h1");
        assert_eq!(g.grid().spec().homogeneous_dim(), 4);
    }

    #[test]
    fn group_block_roundtrips_the_law() {
        let spec = GroupSpec::heisenberg(8.0);
        let block = group_config_block(&spec);
        assert!(block.contains("gauge_coeff = 8.0"));
        let parsed = crate::config::parse_sections(&block).unwrap();
        let back = crate::config::group_from_sections(&parsed).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.gauge_coeff(), 8.0);
        let p = back.multiply(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn slice_csv_shape() {
        let dir = std::env::temp_dir().join("stratlab-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let grid = Grid::new(spec, &[1.0, 1.0, 1.0], &[5, 5, 5]).unwrap();
        let f = GridFunction::from_fn(grid, |x| x[0] * x[2]);
        let path = dir.join("slice.csv");
        write_slice_csv(&f, 0, 2, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // comment + header + 5 rows
        assert_eq!(text.lines().count(), 7);
        assert!(write_slice_csv(&f, 0, 0, &path).is_err());
    }
}
