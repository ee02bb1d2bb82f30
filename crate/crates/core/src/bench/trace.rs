use std::io::{BufRead, Write};

use crate::solvers::IterationRecord;

pub const TRACE_CSV_HEADER: &str = "k,f,gap,grad_norm,alpha,gamma,lambda,dist_to_opt,wall_ns";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// One row per record, floats in shortest round-trip form, empty field for
/// missing values.
pub fn write_trace_csv<W: Write>(trace: &[IterationRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{:?},{},{:?},{:?},{:?},{:?},{},{}",
            r.k,
            r.f,
            opt(r.gap),
            r.grad_norm,
            r.alpha,
            r.gamma,
            r.lambda,
            opt(r.dist_to_opt),
            r.wall_ns
        )?;
    }
    Ok(())
}

/// Reads a trace written by [`write_trace_csv`]. Columns not stored in the CSV
/// (`f_y`, `gamma_prev`, `beta_gamma_sum`, `feasibility_bound`) come back as NaN.
pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<Vec<IterationRecord>, String> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h == TRACE_CSV_HEADER => {}
        Some((_, Ok(h))) => return Err(format!("line 1: unexpected header {h:?}")),
        Some((_, Err(e))) => return Err(e.to_string()),
        None => return Err("empty file (header missing)".into()),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| e.to_string())?;
        let n = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("line {n}: expected 9 fields, got {}", fields.len()));
        }
        let num = |j: usize| -> Result<f64, String> {
            fields[j]
                .parse::<f64>()
                .map_err(|_| format!("line {n}: bad number {:?} in column {}", fields[j], j + 1))
        };
        let maybe = |j: usize| -> Result<Option<f64>, String> {
            if fields[j].is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        out.push(IterationRecord {
            k: fields[0].parse().map_err(|_| format!("line {n}: bad iteration {:?}", fields[0]))?,
            f: num(1)?,
            gap: maybe(2)?,
            grad_norm: num(3)?,
            alpha: num(4)?,
            gamma: num(5)?,
            lambda: num(6)?,
            dist_to_opt: maybe(7)?,
            wall_ns: fields[8].parse().map_err(|_| format!("line {n}: bad wall time {:?}", fields[8]))?,
            f_y: f64::NAN,
            gamma_prev: f64::NAN,
            beta_gamma_sum: f64::NAN,
            feasibility_bound: f64::NAN,
        });
    }
    Ok(out)
}
