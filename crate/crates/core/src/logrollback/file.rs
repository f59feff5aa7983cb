//! Line-oriented log files: a header object, then one transaction per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConfigId, LogModel, Transaction, DIGEST_ALGORITHM};

pub const LOG_FORMAT: &str = "LogModel/1";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<ConfigId>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn io_unnamed(source: std::io::Error) -> Error {
    Error::Io {
        path: "<stream>".into(),
        source,
    }
}

pub fn write_log(mut out: impl Write, log: &LogModel) -> Result<()> {
    let header = Header {
        format: LOG_FORMAT.into(),
        digest: DIGEST_ALGORITHM.into(),
        origin: log.origin.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(io_unnamed)?;
    for txn in &log.transactions {
        serde_json::to_writer(&mut out, txn)?;
        out.write_all(b"\n").map_err(io_unnamed)?;
    }
    out.flush().map_err(io_unnamed)
}

/// Reads a log, checks that consecutive transactions chain, and rebuilds
/// the checkpoint index.
pub fn read_log(input: impl BufRead) -> Result<LogModel> {
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let Some((_, first)) = lines.next() else {
        return Err(Error::Format {
            expected: LOG_FORMAT.into(),
            found: "empty input".into(),
        });
    };
    let header: Header = serde_json::from_str(&first.map_err(io_unnamed)?)?;
    if header.format != LOG_FORMAT || header.digest != DIGEST_ALGORITHM {
        return Err(Error::Format {
            expected: LOG_FORMAT.into(),
            found: format!("{} ({})", header.format, header.digest),
        });
    }
    let mut log = LogModel {
        origin: header.origin,
        ..LogModel::default()
    };
    for (n, line) in lines {
        let txn: Transaction = serde_json::from_str(&line.map_err(io_unnamed)?)?;
        if let Some(head) = log.head() {
            if *head != txn.from_config {
                return Err(Error::invalid(
                    "log",
                    format!(
                        "line {}: transaction {} does not start at {}",
                        n + 1,
                        txn.id,
                        head.short()
                    ),
                ));
            }
        }
        if !txn.is_committed() && txn.from_config != txn.to_config {
            return Err(Error::invalid(
                "log",
                format!(
                    "line {}: aborted transaction {} moves the head",
                    n + 1,
                    txn.id
                ),
            ));
        }
        log.transactions.push(txn);
    }
    log.rebuild_checkpoints();
    Ok(log)
}

pub fn write_log_file(path: &Path, log: &LogModel) -> Result<()> {
    let file = File::create(path).map_err(io(path))?;
    write_log(BufWriter::new(file), log)
}

pub fn read_log_file(path: &Path) -> Result<LogModel> {
    let file = File::open(path).map_err(io(path))?;
    read_log(BufReader::new(file))
}

/// Appends one transaction line to an existing log file.
pub fn append_transaction(path: &Path, txn: &Transaction) -> Result<()> {
    let mut file = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(io(path))?;
    let mut line = serde_json::to_vec(txn)?;
    line.push(b'\n');
    file.write_all(&line).map_err(io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{config_hash, Phase, SystemConfiguration, Trigger, TxnStatus};

    fn txn(from: &str, to: &str) -> Transaction {
        Transaction {
            id: 0,
            from_config: ConfigId(from.into()),
            to_config: ConfigId(to.into()),
            trigger: Trigger {
                package: None,
                action: None,
                script_kind: None,
                phase: Phase::Script,
            },
            executed: Vec::new(),
            status: TxnStatus::Committed,
        }
    }

    fn sample() -> LogModel {
        let mut log = LogModel::starting_at(config_hash(&SystemConfiguration::new()));
        let origin = log.origin.clone().unwrap();
        crate::logrollback::record_transaction(&mut log, txn(origin.as_str(), "b")).unwrap();
        crate::logrollback::record_transaction(&mut log, txn("b", "c")).unwrap();
        log
    }

    #[test]
    fn round_trip_is_lossless() {
        let log = sample();
        let mut buf = Vec::new();
        write_log(&mut buf, &log).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(r#"{"format":"LogModel/1","digest":"sha256""#));
        assert_eq!(read_log(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn broken_chains_and_headers_are_rejected() {
        let mut log = sample();
        log.transactions[1].from_config = ConfigId("x".into());
        let mut buf = Vec::new();
        write_log(&mut buf, &log).unwrap();
        assert!(read_log(buf.as_slice()).is_err());
        assert!(matches!(
            read_log(&b"{\"format\":\"Other/1\",\"digest\":\"sha256\"}\n"[..]),
            Err(Error::Format { .. })
        ));
        assert!(read_log(&b""[..]).is_err());
    }

    #[test]
    fn append_extends_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let mut log = sample();
        write_log_file(&path, &log).unwrap();
        let mut next = txn("c", "d");
        next.id = log.next_id();
        append_transaction(&path, &next).unwrap();
        crate::logrollback::record_transaction(&mut log, txn("c", "d")).unwrap();
        assert_eq!(read_log_file(&path).unwrap(), log);
    }
}
