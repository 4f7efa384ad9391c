// Copyright 2026 The duoqubit Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV layouts for sampled trajectories.
//!
//! Map trajectories use the header `t,u11,…,u33,v11,…,v33,w111,…,w333`
//! (indices 1-based, row-major) and mean-value trajectories `t,s1,s2,s3`.
//! Values are written with 17 significant digits so a round trip is exact.

use std::io::{Read, Write};

use thiserror::Error;

use crate::dynamics::{MapCoefficients, MapSnapshot, MAP_ENTRIES};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unexpected header: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

pub fn trajectory_header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for block in ["u", "v"] {
        for n in 1..=3 {
            for j in 1..=3 {
                h.push(format!("{block}{n}{j}"));
            }
        }
    }
    for n in 1..=3 {
        for j in 1..=3 {
            for k in 1..=3 {
                h.push(format!("w{n}{j}{k}"));
            }
        }
    }
    h
}

pub fn means_header() -> Vec<String> {
    ["t", "s1", "s2", "s3"].map(String::from).to_vec()
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(w: W, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.into_iter().map(fmt))?;
    }
    out.flush()?;
    Ok(())
}

fn read_rows<R: Read>(r: R, header: &[String]) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut input = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let found: Vec<String> = input.headers()?.iter().map(String::from).collect();
    if found != header {
        return Err(CsvError::Header {
            expected: header.to_vec(),
            found,
        });
    }
    let mut rows = Vec::new();
    for (i, record) in input.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CsvError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
            return Err(CsvError::Row {
                row: i + 1,
                message: format!("non-finite value {bad}"),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_trajectory_csv<W: Write>(w: W, snapshots: &[MapSnapshot]) -> Result<(), CsvError> {
    write_rows(
        w,
        &trajectory_header(),
        snapshots.iter().map(|s| {
            let mut row = vec![s.t];
            row.extend_from_slice(&s.maps.to_flat());
            row
        }),
    )
}

pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Vec<MapSnapshot>, CsvError> {
    read_rows(r, &trajectory_header())?
        .into_iter()
        .map(|row| {
            let mut flat = [0.0; MAP_ENTRIES];
            flat.copy_from_slice(&row[1..]);
            Ok(MapSnapshot {
                t: row[0],
                maps: MapCoefficients::from_flat(&flat),
            })
        })
        .collect()
}

pub fn write_means_csv<W: Write>(w: W, times: &[f64], means: &[[f64; 3]]) -> Result<(), CsvError> {
    write_rows(
        w,
        &means_header(),
        times.iter().zip(means).map(|(t, m)| vec![*t, m[0], m[1], m[2]]),
    )
}

pub fn read_means_csv<R: Read>(r: R) -> Result<Vec<(f64, [f64; 3])>, CsvError> {
    Ok(read_rows(r, &means_header())?
        .into_iter()
        .map(|row| (row[0], [row[1], row[2], row[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{map_trajectory, time_grid};
    use crate::hamiltonian::CanonicalHamiltonian;

    #[test]
    fn header_layout() {
        let h = trajectory_header();
        assert_eq!(h.len(), 1 + MAP_ENTRIES);
        assert_eq!(h[1], "u11");
        assert_eq!(h[9], "u33");
        assert_eq!(h[10], "v11");
        assert_eq!(h[19], "w111");
        assert_eq!(h[20], "w112");
        assert_eq!(h[45], "w333");
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let h = CanonicalHamiltonian::new([0.3, 0.1, -0.2], [0.5, 0.2, 0.1], [0.7, 1.1, 1.3]);
        let snaps = map_trajectory(&h, &time_grid(1.0, 7));
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &snaps).unwrap();
        assert_eq!(read_trajectory_csv(buf.as_slice()).unwrap(), snaps);
    }

    #[test]
    fn means_round_trip() {
        let times = [0.0, 0.5];
        let means = [[0.1, 0.2, 0.3], [1.0 / 3.0, -0.25, 0.0]];
        let mut buf = Vec::new();
        write_means_csv(&mut buf, &times, &means).unwrap();
        let back = read_means_csv(buf.as_slice()).unwrap();
        assert_eq!(back, vec![(0.0, means[0]), (0.5, means[1])]);
    }

    #[test]
    fn wrong_header_rejected() {
        let text = "t,a,b,c\n0,1,2,3\n";
        assert!(matches!(read_means_csv(text.as_bytes()), Err(CsvError::Header { .. })));
    }

    #[test]
    fn bad_number_rejected() {
        let text = "t,s1,s2,s3\n0,1,x,3\n";
        assert!(matches!(read_means_csv(text.as_bytes()), Err(CsvError::Row { row: 1, .. })));
    }
}
