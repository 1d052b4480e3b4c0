//! CSV and JSON writers. Every file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::io::{BufWriter, Write};
use std::path::Path;

use polarize_core::dynamics::Trajectory;
use polarize_core::metrics::{polarization_report, RhoOptions};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Shortest decimal that parses back to the same `f64`; exponent form
/// for very small and very large magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn atomic_write(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| CliError::io(path, e))?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes a header plus rows; every row must match the header width.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    atomic_write(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for r in rows {
            out.write_record(&r)?;
        }
        out.flush()
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    atomic_write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

pub fn coord_header(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|k| format!("coord_{k}"))
}

pub fn trajectory_header(d: usize) -> Vec<String> {
    ["t".to_string(), "agent_id".to_string()].into_iter().chain(coord_header(d)).collect()
}

pub fn metrics_header(d: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "rho_total".to_string()];
    h.extend((1..=d).map(|k| format!("rho_{k}")));
    h.extend(
        ["max_pair_disagreement", "cluster_size_a", "cluster_size_b", "exact_flag"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let d = traj.last().opinions.first().map_or(0, |u| u.dim());
    let rows = traj.snapshots.iter().flat_map(|s| {
        s.opinions.iter().enumerate().map(move |(i, u)| {
            let mut r = vec![s.t.to_string(), i.to_string()];
            r.extend(u.as_slice().iter().map(|&x| num(x)));
            r
        })
    });
    write_csv(path, &trajectory_header(d), rows)
}

pub fn metrics_rows(traj: &Trajectory, opts: &RhoOptions) -> CliResult<Vec<Vec<String>>> {
    traj.snapshots
        .iter()
        .map(|s| {
            let rep = polarization_report(&s.opinions, opts)?;
            let mut r = vec![s.t.to_string(), num(rep.rho_total)];
            r.extend(rep.rho_per_topic.iter().map(|&x| num(x)));
            r.push(num(rep.max_pair_disagreement));
            r.push(rep.cluster_sizes.0.to_string());
            r.push(rep.cluster_sizes.1.to_string());
            r.push(rep.exact.to_string());
            Ok(r)
        })
        .collect()
}

pub fn write_metrics(path: &Path, traj: &Trajectory, opts: &RhoOptions) -> CliResult<()> {
    let d = traj.last().opinions.first().map_or(0, |u| u.dim());
    write_csv(path, &metrics_header(d), metrics_rows(traj, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, 7f64.sqrt() / 4.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.75), "0.75");
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(4.5e-17), "4.5e-17");
    }

    #[test]
    fn headers() {
        assert_eq!(trajectory_header(2), ["t", "agent_id", "coord_1", "coord_2"]);
        assert_eq!(
            metrics_header(2),
            [
                "t",
                "rho_total",
                "rho_1",
                "rho_2",
                "max_pair_disagreement",
                "cluster_size_a",
                "cluster_size_b",
                "exact_flag"
            ]
        );
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/out.csv");
        write_csv(&p, &["a".into()], vec![vec!["1".into()], vec!["2".into()]]).unwrap();
        write_csv(&p, &["a".into()], vec![vec!["3".into()]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a\n3\n");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
