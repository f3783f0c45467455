use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AnalyzerSetting, CountRecord, CountingError, JointSetting};

/// One CSV row of the dataset interchange format.
#[derive(Debug, Serialize, Deserialize)]
struct Row {
    setting_index: usize,
    hwp_s: f64,
    qwp_s: f64,
    hwp_i: f64,
    qwp_i: f64,
    cc: u64,
    ac: u64,
    integration_time: f64,
}

pub fn write_dataset_csv<W: Write>(writer: W, records: &[CountRecord]) -> Result<(), CountingError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(Row {
            setting_index: r.setting_index,
            hwp_s: r.setting.signal.hwp,
            qwp_s: r.setting.signal.qwp,
            hwp_i: r.setting.idler.hwp,
            qwp_i: r.setting.idler.qwp,
            cc: r.coincidences,
            ac: r.accidentals,
            integration_time: r.integration_time_s,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>, CountingError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        if !(row.integration_time > 0.0) {
            return Err(CountingError::Malformed(format!(
                "setting {} has non-positive integration time",
                row.setting_index
            )));
        }
        out.push(CountRecord {
            setting_index: row.setting_index,
            setting: JointSetting {
                signal: AnalyzerSetting {
                    hwp: row.hwp_s,
                    qwp: row.qwp_s,
                },
                idler: AnalyzerSetting {
                    hwp: row.hwp_i,
                    qwp: row.qwp_i,
                },
            },
            coincidences: row.cc,
            accidentals: row.ac,
            integration_time_s: row.integration_time,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{simulate_dataset, CountingConfig};
    use crate::qstate::bell_state;

    #[test]
    fn csv_header_and_roundtrip() {
        let cfg = CountingConfig {
            accidental_rate: 100.0,
            rng_seed: 11,
            ..CountingConfig::default()
        };
        let data = simulate_dataset(&bell_state::<f64>(), &cfg, 0.5).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&mut buf, &data).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting_index,hwp_s,qwp_s,hwp_i,qwp_i,cc,ac,integration_time\n"));
        assert_eq!(read_dataset_csv(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn rejects_bad_rows() {
        let text = "setting_index,hwp_s,qwp_s,hwp_i,qwp_i,cc,ac,integration_time\n0,0,0,0,0,5,1,0\n";
        assert!(read_dataset_csv(text.as_bytes()).is_err());
        let text = "setting_index,hwp_s\n0,abc\n";
        assert!(read_dataset_csv(text.as_bytes()).is_err());
    }
}
