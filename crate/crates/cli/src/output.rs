//! CSV and JSON emission.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use pidmap_core::sim::SimResult;
use serde::{Deserialize, Serialize};

/// One grid point of a simulation, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub q: f64,
    pub qdot: f64,
    pub e1: f64,
    pub e2: f64,
    #[serde(rename = "qI")]
    pub qi: f64,
    pub u: f64,
    pub u0: f64,
    pub dhat: f64,
    pub d: f64,
    pub dtilde: f64,
}

pub fn series_rows(r: &SimResult) -> impl Iterator<Item = SeriesRow> + '_ {
    (0..r.len()).map(move |k| SeriesRow {
        t: r.times[k],
        q: r.q[k],
        qdot: r.qdot[k],
        e1: r.e1[k],
        e2: r.e2[k],
        qi: r.qi[k],
        u: r.u[k],
        u0: r.u0[k],
        dhat: r.dhat[k],
        d: r.d[k],
        dtilde: r.dtilde[k],
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub ultimate_bound: f64,
    pub settling_time: f64,
    pub max_control: f64,
    /// `null` when the controller has no unique decomposition.
    pub max_dhat: f64,
    pub settled: bool,
}

impl Summary {
    pub fn of(r: &SimResult) -> Self {
        Self {
            ultimate_bound: r.ultimate_bound.epsilon,
            settling_time: r.ultimate_bound.settling_time,
            max_control: r.max_abs_control(),
            max_dhat: r.max_abs_dhat(),
            settled: r.ultimate_bound.settled,
        }
    }
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes rows with a header taken from the field names; stdout when `path` is `None`.
pub fn write_csv<T: Serialize>(path: Option<&Path>, rows: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline; stdout when `path` is `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
