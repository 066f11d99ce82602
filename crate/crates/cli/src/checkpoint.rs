//! Resumable pipeline runs.
//!
//! The checkpoint records the shard, the last fully processed manifest
//! index, and the committed lengths of the ledger and stats files. Bytes
//! past a committed length belong to a configuration that was interrupted
//! and are dropped on resume; a file shorter than its committed length
//! means data was lost and the run refuses to continue.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use steiner_core::pipeline::{LEDGER_HEADER, STATS_HEADER};

use crate::{data, Failure};

pub struct Checkpoint {
    path: PathBuf,
    shard: usize,
    total: usize,
    v: usize,
    pub last: Option<usize>,
}

fn file_len(p: &Path) -> Result<u64, Failure> {
    Ok(fs::metadata(p)?.len())
}

fn nonempty(p: &Path) -> bool {
    fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false)
}

impl Checkpoint {
    pub fn open(path: &Path, shard: usize, total: usize, v: usize, ledger: &Path, stats: &Path) -> Result<Self, Failure> {
        if !path.exists() {
            if nonempty(ledger) || nonempty(stats) {
                return Err(data(format!(
                    "{} or {} already has content but there is no checkpoint at {}",
                    ledger.display(),
                    stats.display(),
                    path.display()
                )));
            }
            fs::write(ledger, format!("{LEDGER_HEADER}\n"))?;
            fs::write(stats, format!("{STATS_HEADER}\n"))?;
            let ck = Checkpoint {
                path: path.to_path_buf(),
                shard,
                total,
                v,
                last: None,
            };
            ck.write(ledger, stats)?;
            return Ok(ck);
        }
        let text = fs::read_to_string(path)?;
        let get = |key: &str| -> Result<&str, Failure> {
            text.lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| data(format!("checkpoint {} lacks {key}", path.display())))
        };
        let shard_field = get("shard")?;
        if shard_field != format!("{shard}/{total}") {
            return Err(data(format!("checkpoint is for shard {shard_field}, not {shard}/{total}")));
        }
        if get("v")? != v.to_string() {
            return Err(data(format!("checkpoint is for order {}, not {v}", get("v")?)));
        }
        let last = match get("last")? {
            "-" => None,
            s => Some(s.parse().map_err(|_| data(format!("bad checkpoint index {s:?}")))?),
        };
        for (key, file) in [("ledger_bytes", ledger), ("stats_bytes", stats)] {
            let want: u64 = get(key)?
                .parse()
                .map_err(|_| data(format!("bad checkpoint field {key}")))?;
            let have = if file.exists() { file_len(file)? } else { 0 };
            if have < want {
                return Err(data(format!(
                    "{} has {have} bytes but the checkpoint committed {want}; refusing to resume",
                    file.display()
                )));
            }
            if have > want {
                OpenOptions::new().write(true).open(file)?.set_len(want)?;
            }
        }
        Ok(Checkpoint {
            path: path.to_path_buf(),
            shard,
            total,
            v,
            last,
        })
    }

    pub fn commit(&mut self, index: usize, ledger: &Path, stats: &Path) -> Result<(), Failure> {
        self.last = Some(index);
        self.write(ledger, stats)
    }

    fn write(&self, ledger: &Path, stats: &Path) -> Result<(), Failure> {
        let last = self.last.map_or("-".to_string(), |i| i.to_string());
        let text = format!(
            "shard={}/{}\nv={}\nlast={last}\nledger_bytes={}\nstats_bytes={}\n",
            self.shard,
            self.total,
            self.v,
            file_len(ledger)?,
            file_len(stats)?
        );
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        fs::write(&tmp, text)?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}
