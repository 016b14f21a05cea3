//! Sweep tables as CSV.
//!
//! Columns are fixed; reals carry exactly six fractional digits so that a
//! table written, read back and written again is byte-identical.

use std::io::{Read, Write};
use std::path::Path;

use mtm_core::measure::{Outcome, SweepRow, SweepTable, Variant};

use crate::error::{Result, SimError};

pub const HEADER: [&str; 9] = [
    "load",
    "variant",
    "seed",
    "traffic_requirement_proxy",
    "max_hops",
    "total_mtm",
    "rounds",
    "shortfall",
    "termination",
];

fn real(x: f64) -> String {
    let s = format!("{x:.6}");
    // -0.000000 and 0.000000 must not differ.
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        "0.000000".to_owned()
    } else {
        s
    }
}

pub fn write_table<W: Write>(table: &SweepTable, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for row in &table.rows {
        w.write_record([
            real(row.load),
            row.variant.as_str().to_owned(),
            row.seed.to_string(),
            real(row.traffic_requirement_proxy),
            row.max_hops.to_string(),
            real(row.total_mtm),
            row.rounds.to_string(),
            real(row.shortfall),
            row.outcome.as_str().to_owned(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    write_table(table, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::io(path, io),
        other => SimError::Parse {
            path: path.to_owned(),
            message: format!("{other:?}"),
        },
    })
}

/// Parses a table written by [`write_table`]; `origin` names the source in errors.
pub fn read_table<R: Read>(input: R, origin: &Path) -> Result<SweepTable> {
    let fail = |line: u64, message: String| SimError::Parse {
        path: origin.to_owned(),
        message: format!("line {line}: {message}"),
    };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| fail(1, e.to_string()))?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(fail(1, format!("expected header {}", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| fail(line, e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|e| fail(line, format!("{}: {e}", HEADER[k])))
        };
        let int = |k: usize| -> Result<u64> {
            field(k)
                .parse::<u64>()
                .map_err(|e| fail(line, format!("{}: {e}", HEADER[k])))
        };
        rows.push(SweepRow {
            load: num(0)?,
            variant: Variant::parse(field(1))
                .ok_or_else(|| fail(line, format!("unknown variant {:?}", field(1))))?,
            seed: int(2)?,
            traffic_requirement_proxy: num(3)?,
            max_hops: int(4)? as usize,
            total_mtm: num(5)?,
            rounds: int(6)? as usize,
            shortfall: num(7)?,
            outcome: Outcome::parse(field(8))
                .ok_or_else(|| fail(line, format!("unknown termination {:?}", field(8))))?,
        });
    }
    Ok(SweepTable { rows })
}

pub fn load_csv(path: &Path) -> Result<SweepTable> {
    let file = std::fs::File::open(path).map_err(|e| SimError::io(path, e))?;
    read_table(std::io::BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            load: 20.0,
            variant: Variant::WithMtm,
            seed: 7,
            traffic_requirement_proxy: 1.0 / 3.0,
            max_hops: 4,
            total_mtm: 12.5,
            rounds: 31,
            shortfall: 0.0,
            outcome: Outcome::FixedPoint,
        }
    }

    fn text(table: &SweepTable) -> String {
        let mut buf = Vec::new();
        write_table(table, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(text(&SweepTable::default()), format!("{}\n", HEADER.join(",")));
    }

    #[test]
    fn one_row_is_two_lines() {
        let t = text(&SweepTable { rows: vec![row()] });
        assert_eq!(t.lines().count(), 2);
        assert!(t.ends_with('\n'));
        assert_eq!(
            t.lines().nth(1).unwrap(),
            "20.000000,with_mtm,7,0.333333,4,12.500000,31,0.000000,fixed_point"
        );
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(real(-0.0), "0.000000");
        assert_eq!(real(-1e-9), "0.000000");
        assert_eq!(real(-0.5), "-0.500000");
    }

    #[test]
    fn wrong_header_is_a_parse_error() {
        let err = read_table("load,variant\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, SimError::Parse { .. }));
    }
}
