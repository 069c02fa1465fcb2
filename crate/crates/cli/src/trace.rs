//! Trace CSV: one row per iterate, header [`HEADER`], numbers in `{:.16e}`
//! (17 significant digits), `dist_p` empty when no reference is known.

use std::io::{Read, Write};

use splitvi::diagnostics::TraceRecord;

use crate::error::CliError;

pub const HEADER: [&str; 9] = ["n", "res_split", "res_yz", "bound_yz", "ratio_cond2", "dist_x0", "dist_p", "sigma_n", "alpha_n"];

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace<W: Write>(out: W, records: &[TraceRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            fmt_num(r.res_split),
            fmt_num(r.res_yz),
            fmt_num(r.bound_yz),
            fmt_num(r.ratio_cond2),
            fmt_num(r.dist_x0),
            r.dist_p.map(fmt_num).unwrap_or_default(),
            fmt_num(r.sigma_n),
            fmt_num(r.alpha_n),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a trace, rejecting a wrong header or unparsable fields. Errors
/// name the 0-based data row.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| format!("row {i}: {e}"))?;
        let num = |j: usize| -> Result<f64, String> {
            row[j].trim().parse::<f64>().map_err(|_| format!("row {i}: bad `{}` value `{}`", HEADER[j], &row[j]))
        };
        let n = row[0].trim().parse::<usize>().map_err(|_| format!("row {i}: bad `n` value `{}`", &row[0]))?;
        let dist_p = if row[6].trim().is_empty() { None } else { Some(num(6)?) };
        records.push(TraceRecord {
            n,
            res_split: num(1)?,
            res_yz: num(2)?,
            bound_yz: num(3)?,
            ratio_cond2: num(4)?,
            dist_x0: num(5)?,
            dist_p,
            sigma_n: num(7)?,
            alpha_n: num(8)?,
        });
    }
    Ok(records)
}
