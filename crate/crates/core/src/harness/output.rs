use std::io::{Read, Write};

use serde::Serialize;

use super::sim::TraceRecord;
use crate::error::Result;

pub const TRACE_SCHEMA: &str = "sigroute-trace/1";

/// Writes a `#schema=…` line followed by one CSV row per record.
pub fn write_trace_csv<W: Write>(mut w: W, records: &[TraceRecord]) -> Result<()> {
    writeln!(w, "#schema={TRACE_SCHEMA}")?;
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Plain CSV with a header row, for summaries and tables.
pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_replication, ExperimentConfig, InitSpec};
    use crate::model::ModelParams;
    use crate::policy::PolicyKind;

    fn trace(policy: PolicyKind) -> Vec<TraceRecord> {
        let cfg = ExperimentConfig::new(
            ModelParams::new(0.3, 0.5).unwrap(),
            policy,
            &InitSpec::parse("[[0,0.5,0.5],[0,0,1]]").unwrap(),
            40,
        );
        run_replication(&cfg, 2).unwrap().0
    }

    #[test]
    fn csv_round_trip() {
        for p in PolicyKind::ALL {
            let t = trace(p);
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &t).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with("#schema=sigroute-trace/1\nreplication,t,x1,x2,"));
            assert_eq!(read_trace_csv(&buf[..]).unwrap(), t);
        }
    }

    #[test]
    fn csv_is_byte_identical_across_runs() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trace_csv(&mut a, &trace(PolicyKind::Ghat)).unwrap();
        write_trace_csv(&mut b, &trace(PolicyKind::Ghat)).unwrap();
        assert_eq!(a, b);
    }
}
