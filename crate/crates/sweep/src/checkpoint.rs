//! Record log persisted by whole-file atomic replacement.
//!
//! Layout: `"QFCK"`, format version (u32), plan JSON length (u32) and bytes,
//! then one entry per completed cell: payload length (u32), CRC-32 of the
//! payload (u32), payload. All integers little-endian. Entries keep their
//! completion order, so a later checkpoint always extends an earlier one.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Result, SweepError};
use crate::plan::SweepPlan;
use crate::record::MeasureRecord;

const MAGIC: &[u8; 4] = b"QFCK";
const VERSION: u32 = 1;

#[derive(Debug)]
pub struct Checkpoint {
    path: PathBuf,
    fingerprint: String,
    records: Vec<MeasureRecord>,
    done: HashSet<usize>,
}

impl Checkpoint {
    /// Loads the log at `path`, or starts an empty one if the file does not
    /// exist. A log written for a different plan is rejected.
    pub fn open(path: impl Into<PathBuf>, plan: &SweepPlan) -> Result<Self> {
        let path = path.into();
        let mut cp = Self {
            fingerprint: plan.fingerprint(),
            path,
            records: Vec::new(),
            done: HashSet::new(),
        };
        match fs::read(&cp.path) {
            Ok(bytes) => cp.parse(&bytes, plan)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(SweepError::io(&cp.path)(e)),
        }
        Ok(cp)
    }

    fn corrupt(&self, reason: impl Into<String>) -> SweepError {
        SweepError::Checkpoint {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn parse(&mut self, bytes: &[u8], plan: &SweepPlan) -> Result<()> {
        let u32_at = |at: usize| -> Option<u32> {
            bytes.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        };
        if bytes.get(..4) != Some(MAGIC.as_slice()) {
            return Err(self.corrupt("bad magic"));
        }
        if u32_at(4) != Some(VERSION) {
            return Err(self.corrupt("unsupported version"));
        }
        let plan_len = u32_at(8).ok_or_else(|| self.corrupt("truncated header"))? as usize;
        let plan_json = bytes.get(12..12 + plan_len).ok_or_else(|| self.corrupt("truncated header"))?;
        if plan_json != self.fingerprint.as_bytes() {
            return Err(self.corrupt("written for a different sweep plan"));
        }
        let mut at = 12 + plan_len;
        while at < bytes.len() {
            let (Some(len), Some(crc)) = (u32_at(at), u32_at(at + 4)) else {
                break;
            };
            let Some(payload) = bytes.get(at + 8..at + 8 + len as usize) else {
                // A truncated final entry is dropped; the cell is recomputed.
                break;
            };
            if crc32fast::hash(payload) != crc {
                return Err(self.corrupt(format!("CRC mismatch in entry at byte {at}")));
            }
            let record = MeasureRecord::decode(payload).ok_or_else(|| self.corrupt("malformed entry"))?;
            if plan.cell(record.cell_index).is_none() || !self.done.insert(record.cell_index) {
                return Err(self.corrupt(format!("unexpected or duplicate cell {}", record.cell_index)));
            }
            self.records.push(record);
            at += 8 + len as usize;
        }
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records in completion order.
    pub fn records(&self) -> &[MeasureRecord] {
        &self.records
    }

    pub fn contains(&self, cell_index: usize) -> bool {
        self.done.contains(&cell_index)
    }

    /// Adds a record in memory; [`Checkpoint::commit`] persists it.
    pub fn push(&mut self, record: MeasureRecord) -> Result<()> {
        if !self.done.insert(record.cell_index) {
            return Err(self.corrupt(format!("cell {} recorded twice", record.cell_index)));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.fingerprint.len() as u32).to_le_bytes());
        out.extend_from_slice(self.fingerprint.as_bytes());
        for r in &self.records {
            let payload = r.encode();
            out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
            out.extend_from_slice(&payload);
        }
        out
    }

    /// Writes the whole log to a sibling temporary file and renames it over
    /// the checkpoint.
    pub fn commit(&self) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(SweepError::io(dir))?;
        }
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let mut f = fs::File::create(&tmp).map_err(SweepError::io(&tmp))?;
        f.write_all(&self.to_bytes()).map_err(SweepError::io(&tmp))?;
        f.sync_all().map_err(SweepError::io(&tmp))?;
        fs::rename(&tmp, &self.path).map_err(SweepError::io(&self.path))
    }
}
