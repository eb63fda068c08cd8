use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::driver::IterationRecord;
use crate::error::Result;

/// `iter,J,L,ctrn_err,t_end,steps,Btt,wall_ms,lambda_k…,mu_k…,z_k…,C_k…,delta`.
pub fn csv_header(nc: usize) -> String {
    let mut h = String::from("iter,J,L,ctrn_err,t_end,steps,Btt,wall_ms");
    for prefix in ["lambda", "mu", "z", "C"] {
        for k in 0..nc {
            let _ = write!(h, ",{prefix}_{k}");
        }
    }
    h.push_str(",delta");
    h
}

/// One CSV row; `wall_ms` is written as 0 unless `include_timing`.
pub fn csv_row(r: &IterationRecord, include_timing: bool) -> String {
    let mut s = format!(
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.3}",
        r.iter,
        r.cost,
        r.lagrangian,
        r.ctrn_err,
        r.t_end,
        r.steps,
        r.btt,
        if include_timing { r.wall_ms } else { 0.0 }
    );
    for v in r.lambda.iter().chain(&r.mu).chain(&r.z).chain(&r.constraints) {
        let _ = write!(s, ",{v:.16e}");
    }
    let _ = write!(s, ",{:.16e}", r.delta);
    s
}

pub fn history_csv(records: &[IterationRecord], nc: usize, include_timing: bool) -> String {
    let mut out = csv_header(nc);
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r, include_timing));
        out.push('\n');
    }
    out
}

/// Appends rows to a history file, flushing after each so that a failing
/// run leaves the completed iterations on disk.
pub struct HistoryWriter {
    out: BufWriter<File>,
    include_timing: bool,
}

impl HistoryWriter {
    pub fn create(path: impl AsRef<Path>, nc: usize, include_timing: bool) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", csv_header(nc))?;
        out.flush()?;
        Ok(Self { out, include_timing })
    }

    pub fn append(&mut self, r: &IterationRecord) -> Result<()> {
        writeln!(self.out, "{}", csv_row(r, self.include_timing))?;
        self.out.flush()?;
        Ok(())
    }
}
