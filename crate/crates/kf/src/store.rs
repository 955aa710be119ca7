//! Run directories: the persistent stage cache of a construction.
//!
//! A run directory holds `run.json` (theory and configuration),
//! `trace.jsonl` (one record per completed stage, append-only),
//! `pins.jsonl` (model world numbering, append-only) and `fkd.json` (the
//! latest diagram, rewritten after each command). Every command that
//! touches a run holds an exclusive lock on `.lock` for its duration.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use kf_core::fkd::{LinearFkd, WorldId};
use kf_core::henkin::{ConstructedModel, ConstructionConfig, ConstructionState, HenkinError, StageRecord};
use kf_core::oracle::Theory;
use kf_core::syntax::Signature;

use crate::format::{
    validate_stage_line, ConfigDto, FkdFile, FormatError, PinLine, RunFile, StageLine, TheoryFile, SCHEMA_VERSION,
};

pub const RUN_FILE: &str = "run.json";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const PINS_FILE: &str = "pins.jsonl";
pub const FKD_FILE: &str = "fkd.json";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}: {source}", path.display())]
    Replay { path: PathBuf, source: HenkinError },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Held for the duration of a command; dropping it releases the lock.
#[derive(Debug)]
pub struct RunLock {
    _file: File,
}

#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

/// A loaded run: the model with its stage cache, and how much of it is
/// already on disk.
#[derive(Debug)]
pub struct Session {
    pub model: ConstructedModel,
    saved_pins: usize,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Creates the directory when needed and takes the exclusive lock.
    pub fn lock(&self) -> Result<RunLock, StoreError> {
        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        let p = self.path(LOCK_FILE);
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(&p).map_err(io_err(&p))?;
        file.lock().map_err(io_err(&p))?;
        Ok(RunLock { _file: file })
    }

    /// Starts a fresh run; existing trace and pins are discarded.
    pub fn create(&self, _lock: &RunLock, theory: &Theory, config: &ConstructionConfig) -> Result<(), StoreError> {
        let run = RunFile {
            schema_version: SCHEMA_VERSION,
            theory: TheoryFile::from_theory(theory),
            config: ConfigDto::from_config(config),
        };
        self.write_atomic(RUN_FILE, &pretty(&run))?;
        for name in [TRACE_FILE, PINS_FILE] {
            let p = self.path(name);
            File::create(&p).map_err(io_err(&p))?;
        }
        Ok(())
    }

    /// Replays the stage cache.
    pub fn load(&self, _lock: &RunLock) -> Result<Session, StoreError> {
        let rp = self.path(RUN_FILE);
        let text = fs::read_to_string(&rp).map_err(io_err(&rp))?;
        let (theory, config) =
            RunFile::load(&text).map_err(|source| StoreError::Format { path: rp.clone(), source })?;
        let sig = theory.signature().clone();
        let tp = self.path(TRACE_FILE);
        let replay_err = |source| StoreError::Replay { path: tp.clone(), source };
        let mut state = ConstructionState::init(theory, config).map_err(replay_err)?;
        for_lines(&tp, |line| {
            let rec = decode_stage(line, &sig)?;
            state.apply_record(&rec).map_err(|e| FormatError::Invalid(e.to_string()))
        })?;

        let pp = self.path(PINS_FILE);
        let mut pins = Vec::new();
        for_lines(&pp, |line| {
            let pin: PinLine = serde_json::from_str(line)?;
            if pin.schema_version != SCHEMA_VERSION || pin.world != pins.len() {
                return Err(FormatError::Invalid("pins out of sequence".into()));
            }
            pins.push(WorldId(pin.id));
            Ok(())
        })?;
        let saved_pins = pins.len();
        let model = ConstructedModel::new(state)
            .recording(true)
            .with_pins(pins)
            .map_err(|source| StoreError::Replay { path: pp.clone(), source })?;
        Ok(Session { model, saved_pins })
    }

    /// Appends stages run since the last save, new pins, and rewrites the
    /// diagram.
    pub fn save(&self, lock: &RunLock, session: &mut Session) -> Result<(), StoreError> {
        self.append_stages(lock, &session.model.take_records())?;
        let pins = &session.model.pinned()[session.saved_pins..];
        let lines: Vec<String> = pins
            .iter()
            .enumerate()
            .map(|(k, id)| {
                serde_json::to_string(&PinLine {
                    schema_version: SCHEMA_VERSION,
                    world: session.saved_pins + k,
                    id: id.0,
                })
                .expect("pins serialize")
            })
            .collect();
        self.append_lines(PINS_FILE, &lines)?;
        session.saved_pins = session.model.pinned().len();
        let state = session.model.state();
        self.write_fkd(lock, state.fkd(), state.theory().signature())
    }

    pub fn append_stages(&self, _lock: &RunLock, records: &[StageRecord]) -> Result<(), StoreError> {
        let lines: Vec<String> = records.iter().map(|r| StageLine::from_record(r).to_line()).collect();
        self.append_lines(TRACE_FILE, &lines)
    }

    pub fn write_fkd(&self, _lock: &RunLock, d: &LinearFkd, sig: &Signature) -> Result<(), StoreError> {
        self.write_atomic(FKD_FILE, &pretty(&FkdFile::from_fkd(d, sig)))
    }

    fn append_lines(&self, name: &str, lines: &[String]) -> Result<(), StoreError> {
        if lines.is_empty() {
            return Ok(());
        }
        let p = self.path(name);
        let mut f = OpenOptions::new().create(true).append(true).open(&p).map_err(io_err(&p))?;
        let mut buf = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
        for l in lines {
            buf.push_str(l);
            buf.push('\n');
        }
        f.write_all(buf.as_bytes()).map_err(io_err(&p))?;
        f.sync_data().map_err(io_err(&p))
    }

    fn write_atomic(&self, name: &str, text: &str) -> Result<(), StoreError> {
        let p = self.path(name);
        let tmp = self.path(&format!("{name}.tmp"));
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &p).map_err(io_err(&p))
    }
}

pub fn decode_stage(line: &str, sig: &Signature) -> Result<StageRecord, FormatError> {
    validate_stage_line(line)?.to_record(sig)
}

fn for_lines(path: &Path, mut each: impl FnMut(&str) -> Result<(), FormatError>) -> Result<(), StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(path)(e)),
    };
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        each(&line).map_err(|source| StoreError::Format {
            path: path.to_path_buf(),
            source: FormatError::Invalid(format!("line {}: {source}", n + 1)),
        })?;
    }
    Ok(())
}

pub fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}
