//! On-disk layout of a run directory.
//!
//! * `events.jsonl`: every event, appended period by period
//! * `checkpoints.jsonl`: one full run state per completed period
//! * `transcript.jsonl`: the events ordered by agent and period, written at the end
//! * `final_states.json`: the last developmental state of every agent

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::run::{run_from, Checkpoint, RunOutcome, Services, SimulationRun};
use super::transcript::{merge_by_agent, read_transcript, write_transcript, JsonlSink};
use crate::domain::DevelopmentalState;
use crate::{CoreError, Result};

pub const EVENTS_FILE: &str = "events.jsonl";
pub const CHECKPOINTS_FILE: &str = "checkpoints.jsonl";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const FINAL_STATES_FILE: &str = "final_states.json";

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn events(&self) -> PathBuf {
        self.root.join(EVENTS_FILE)
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.root.join(CHECKPOINTS_FILE)
    }

    pub fn transcript(&self) -> PathBuf {
        self.root.join(TRANSCRIPT_FILE)
    }

    pub fn final_states(&self) -> PathBuf {
        self.root.join(FINAL_STATES_FILE)
    }

    /// The latest complete checkpoint. A torn last line is ignored.
    pub fn last_checkpoint(&self) -> Result<Option<Checkpoint>> {
        let path = self.checkpoints();
        if !path.exists() {
            return Ok(None);
        }
        let file = std::fs::File::open(&path).map_err(|e| CoreError::io(&path, e))?;
        let mut last = None;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| CoreError::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Checkpoint>(&line) {
                Ok(c) => last = Some(c),
                Err(e) => log::warn!("{}: skipping unreadable checkpoint line ({e})", path.display()),
            }
        }
        Ok(last)
    }

    fn append_checkpoint(&self, c: &Checkpoint) -> Result<()> {
        let path = self.checkpoints();
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CoreError::io(&path, e))?;
        let line = serde_json::to_string(c).map_err(|e| CoreError::json("checkpoint", e))?;
        writeln!(file, "{line}")
            .and_then(|_| file.flush())
            .map_err(|e| CoreError::io(&path, e))
    }
}

pub fn read_final_states(path: &Path) -> Result<BTreeMap<String, DevelopmentalState>> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CoreError::json(path.display().to_string(), e))
}

/// Runs into `dir`. With `resume`, continues after the last checkpoint and
/// drops any events written past it; otherwise starts over.
pub fn run_in_dir(
    run: &SimulationRun,
    services: &Services<'_>,
    dir: &Path,
    resume: bool,
) -> Result<RunOutcome> {
    std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
    let files = RunDir::new(dir);
    let start = match resume.then(|| files.last_checkpoint()).transpose()?.flatten() {
        Some(c) => {
            if c.run_id != run.config.run_id {
                return Err(CoreError::invalid(
                    "resume",
                    format!("checkpoint belongs to run `{}`", c.run_id),
                ));
            }
            let kept: Vec<_> = if files.events().exists() {
                read_transcript(&files.events())?
                    .into_iter()
                    .filter(|e| e.t < c.completed_periods)
                    .collect()
            } else {
                Vec::new()
            };
            write_transcript(&files.events(), &kept)?;
            c
        }
        None => {
            for p in [files.events(), files.checkpoints()] {
                if p.exists() {
                    std::fs::remove_file(&p).map_err(|e| CoreError::io(&p, e))?;
                }
            }
            let c = Checkpoint::initial(run);
            files.append_checkpoint(&c)?;
            c
        }
    };
    let sink = JsonlSink::open(&files.events())?;
    let outcome = run_from(run, services, &sink, start, &mut |c| files.append_checkpoint(c))?;
    drop(sink);
    let merged = merge_by_agent(&read_transcript(&files.events())?);
    write_transcript(&files.transcript(), &merged)?;
    let states = serde_json::to_string_pretty(&outcome.final_states())
        .map_err(|e| CoreError::json("final states", e))?;
    std::fs::write(files.final_states(), states + "\n")
        .map_err(|e| CoreError::io(files.final_states(), e))?;
    Ok(outcome)
}
