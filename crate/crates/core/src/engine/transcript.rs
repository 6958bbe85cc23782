use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Behavior,
    Report,
    Compression,
}

/// One line of a transcript. `t` is the period index, starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub run_id: String,
    pub agent_id: String,
    pub t: u32,
    pub kind: EventKind,
    pub payload: serde_json::Value,
    pub prompt_hash: String,
}

impl TranscriptEvent {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("transcript events always serialize")
    }
}

/// Where a run writes its events. Appends from one call stay contiguous.
pub trait TranscriptSink: Send + Sync {
    fn append(&self, events: &[TranscriptEvent]) -> Result<()>;
}

#[derive(Debug, Default)]
pub struct MemorySink {
    events: Mutex<Vec<TranscriptEvent>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<TranscriptEvent> {
        self.events.lock().expect("sink lock").clone()
    }
}

impl TranscriptSink for MemorySink {
    fn append(&self, events: &[TranscriptEvent]) -> Result<()> {
        self.events.lock().expect("sink lock").extend_from_slice(events);
        Ok(())
    }
}

/// Append-only JSON-lines file, flushed after every append.
#[derive(Debug)]
pub struct JsonlSink {
    path: PathBuf,
    file: Mutex<File>,
}

impl JsonlSink {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CoreError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl TranscriptSink for JsonlSink {
    fn append(&self, events: &[TranscriptEvent]) -> Result<()> {
        let mut buf = String::new();
        for e in events {
            buf.push_str(&e.to_line());
            buf.push('\n');
        }
        let mut file = self.file.lock().expect("sink lock");
        file.write_all(buf.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| CoreError::io(&self.path, e))
    }
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptEvent>> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CoreError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CoreError::Format {
            path: path.display().to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_transcript(path: &Path, events: &[TranscriptEvent]) -> Result<()> {
    let mut text = String::new();
    for e in events {
        text.push_str(&e.to_line());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CoreError::io(path, e))
}

/// Orders events by agent and period, keeping emission order otherwise.
pub fn merge_by_agent(events: &[TranscriptEvent]) -> Vec<TranscriptEvent> {
    let mut out = events.to_vec();
    out.sort_by(|a, b| a.agent_id.cmp(&b.agent_id).then(a.t.cmp(&b.t)));
    out
}
