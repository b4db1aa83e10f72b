//! On-disk project layout.
//!
//! A project directory holds `spec.csv`, `platform.json` and optionally
//! `answers.jsonl` (the append-only answer journal), `field_data.csv` and
//! `stages.json`. `state.json` is a cache the tool rewrites; the revision is
//! always the number of journal entries replayed.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::funnel::{default_stages, parse_stages, FunnelError, FunnelStageSpec};
use crate::heuristics::{Answer, AnswerParseError, TriageError, TriageState};
use crate::report::{analyze, AnalysisOptions, ReportError, SubsystemReport};
use crate::spec_model::{
    parse_field_data, parse_platform, parse_spec, DiagnosticSpec, FieldDataError,
    FieldFailureRecord, PlatformError, PlatformModel, SpecError,
};

pub const SPEC_FILE: &str = "spec.csv";
pub const PLATFORM_FILE: &str = "platform.json";
pub const ANSWERS_FILE: &str = "answers.jsonl";
pub const FIELD_DATA_FILE: &str = "field_data.csv";
pub const STAGES_FILE: &str = "stages.json";
pub const STATE_FILE: &str = "state.json";
pub const LOCK_FILE: &str = ".safescope.lock";

#[derive(Debug, thiserror::Error)]
pub enum ProjectError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Spec { path: PathBuf, source: SpecError },
    #[error("{path}: {source}")]
    Platform {
        path: PathBuf,
        source: PlatformError,
    },
    #[error("{path}: {source}")]
    FieldData {
        path: PathBuf,
        source: FieldDataError,
    },
    #[error("{path}: {source}")]
    Stages { path: PathBuf, source: FunnelError },
    #[error("{path} line {line}: {source}")]
    JournalParse {
        path: PathBuf,
        line: usize,
        source: AnswerParseError,
    },
    #[error("{path} line {line}: {source}")]
    JournalReplay {
        path: PathBuf,
        line: usize,
        source: TriageError,
    },
    #[error(transparent)]
    Triage(#[from] TriageError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("stale revision {expected}; project is at revision {current}")]
    StaleRevision { expected: u64, current: u64 },
    #[error("project is locked by another process ({0})")]
    Locked(PathBuf),
}

impl ProjectError {
    /// Domain errors (rejected answers, inconsistent inputs, conflicts) as
    /// opposed to I/O and parse failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            ProjectError::Triage(_)
                | ProjectError::Report(_)
                | ProjectError::StaleRevision { .. }
                | ProjectError::Locked(_)
        )
    }
}

/// The tool-managed cache written next to the journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCache {
    pub subsystem_id: String,
    pub revision: u64,
    pub journal_entries: u64,
    pub answered: usize,
    pub questions: usize,
}

/// A loaded project: inputs plus the state rebuilt from the journal.
#[derive(Debug, Clone)]
pub struct Project {
    root: PathBuf,
    state: TriageState,
    stages: Vec<FunnelStageSpec>,
    field_data: Vec<FieldFailureRecord>,
}

fn read(path: &Path) -> Result<String, ProjectError> {
    fs::read_to_string(path).map_err(|source| ProjectError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_optional(path: &Path) -> Result<Option<String>, ProjectError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(ProjectError::Io {
            path: path.to_owned(),
            source,
        }),
    }
}

/// Parses `spec.csv` and `platform.json` without cross-checking them.
pub fn load_inputs(root: &Path) -> Result<(DiagnosticSpec, PlatformModel), ProjectError> {
    let spec_path = root.join(SPEC_FILE);
    let spec = parse_spec(&read(&spec_path)?).map_err(|source| ProjectError::Spec {
        path: spec_path,
        source,
    })?;
    let platform_path = root.join(PLATFORM_FILE);
    let platform =
        parse_platform(&read(&platform_path)?).map_err(|source| ProjectError::Platform {
            path: platform_path,
            source,
        })?;
    Ok((spec, platform))
}

/// Parses a JSON-lines answer file; blank lines are skipped.
pub fn parse_answer_lines(text: &str, path: &Path) -> Result<Vec<Answer>, ProjectError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Answer::from_json_line(l).map_err(|source| ProjectError::JournalParse {
                path: path.to_owned(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

/// Holds the advisory project lock until dropped.
pub struct ProjectLock {
    _file: File,
}

impl ProjectLock {
    /// Fails immediately with [`ProjectError::Locked`] if another process
    /// holds the lock.
    pub fn acquire(root: &Path) -> Result<Self, ProjectError> {
        let path = root.join(LOCK_FILE);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|source| ProjectError::Io {
                path: path.clone(),
                source,
            })?;
        match file.try_lock() {
            Ok(()) => Ok(Self { _file: file }),
            Err(TryLockError::WouldBlock) => Err(ProjectError::Locked(path)),
            Err(TryLockError::Error(source)) => Err(ProjectError::Io { path, source }),
        }
    }
}

impl Project {
    /// Loads the inputs and replays the journal.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ProjectError> {
        let root = root.into();
        let (spec, platform) = load_inputs(&root)?;

        let stages_path = root.join(STAGES_FILE);
        let stages = match read_optional(&stages_path)? {
            Some(text) => parse_stages(&text).map_err(|source| ProjectError::Stages {
                path: stages_path,
                source,
            })?,
            None => default_stages(),
        };

        let fd_path = root.join(FIELD_DATA_FILE);
        let field_data = match read_optional(&fd_path)? {
            Some(text) => parse_field_data(&text).map_err(|source| ProjectError::FieldData {
                path: fd_path,
                source,
            })?,
            None => Vec::new(),
        };

        let mut state = TriageState::new(spec, platform)?;
        let journal_path = root.join(ANSWERS_FILE);
        if let Some(text) = read_optional(&journal_path)? {
            for (i, line) in text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
            {
                let answer =
                    Answer::from_json_line(line).map_err(|source| ProjectError::JournalParse {
                        path: journal_path.clone(),
                        line: i + 1,
                        source,
                    })?;
                state
                    .apply_answer(answer)
                    .map_err(|source| ProjectError::JournalReplay {
                        path: journal_path.clone(),
                        line: i + 1,
                        source,
                    })?;
            }
        }

        Ok(Self {
            root,
            state,
            stages,
            field_data,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn state(&self) -> &TriageState {
        &self.state
    }

    pub fn revision(&self) -> u64 {
        self.state.revision()
    }

    /// Stage configuration from `stages.json`, or the default.
    pub fn stages(&self) -> &[FunnelStageSpec] {
        &self.stages
    }

    /// Replaces the stage configuration for this session only.
    pub fn set_stages(&mut self, stages: Vec<FunnelStageSpec>) {
        self.stages = stages;
    }

    pub fn field_data(&self) -> &[FieldFailureRecord] {
        &self.field_data
    }

    pub fn cache(&self) -> StateCache {
        StateCache {
            subsystem_id: self.state.spec().subsystem_id.clone(),
            revision: self.state.revision(),
            journal_entries: self.state.revision(),
            answered: self.state.answers().len(),
            questions: self.state.questions().len(),
        }
    }

    /// Builds the report with the project's stages and field data.
    pub fn report(&self, options: &AnalysisOptions) -> Result<SubsystemReport, ProjectError> {
        Ok(analyze(
            &self.state,
            &self.stages,
            &self.field_data,
            options,
        )?)
    }

    /// Rewrites `state.json` if it does not match the current state.
    pub fn refresh_cache(&self) -> Result<(), ProjectError> {
        let path = self.root.join(STATE_FILE);
        let wanted = self.cache();
        let current =
            read_optional(&path)?.and_then(|t| serde_json::from_str::<StateCache>(&t).ok());
        if current.as_ref() == Some(&wanted) {
            return Ok(());
        }
        let text = serde_json::to_string_pretty(&wanted).unwrap_or_default() + "\n";
        fs::write(&path, text).map_err(|source| ProjectError::Io { path, source })
    }

    /// Appends answers to the journal. Either every answer is accepted and
    /// written, or none is. Returns the new revision.
    pub fn append_answers(&mut self, answers: &[Answer]) -> Result<u64, ProjectError> {
        let _lock = ProjectLock::acquire(&self.root)?;
        self.reload()?;
        self.append_locked(answers)
    }

    /// Appends one answer if the project on disk is still at
    /// `expected_revision`.
    pub fn append_answer_at(
        &mut self,
        answer: &Answer,
        expected_revision: u64,
    ) -> Result<u64, ProjectError> {
        let _lock = ProjectLock::acquire(&self.root)?;
        self.reload()?;
        if expected_revision != self.state.revision() {
            return Err(ProjectError::StaleRevision {
                expected: expected_revision,
                current: self.state.revision(),
            });
        }
        self.append_locked(std::slice::from_ref(answer))
    }

    /// Picks up journal entries written by other processes.
    fn reload(&mut self) -> Result<(), ProjectError> {
        *self = Project::open(self.root.clone())?;
        Ok(())
    }

    fn append_locked(&mut self, answers: &[Answer]) -> Result<u64, ProjectError> {
        let mut next = self.state.clone();
        for a in answers {
            next.apply_answer(a.clone())?;
        }

        let path = self.root.join(ANSWERS_FILE);
        let io_err = |source| ProjectError::Io {
            path: path.clone(),
            source,
        };
        let mut text = String::new();
        // Keep the journal line-oriented even if it was edited by hand.
        if let Some(existing) = read_optional(&path)? {
            if !existing.is_empty() && !existing.ends_with('\n') {
                text.push('\n');
            }
        }
        for a in answers {
            text.push_str(&a.to_json_line());
            text.push('\n');
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        file.write_all(text.as_bytes()).map_err(io_err)?;
        file.sync_data().map_err(io_err)?;

        self.state = next;
        self.refresh_cache()?;
        Ok(self.state.revision())
    }
}
