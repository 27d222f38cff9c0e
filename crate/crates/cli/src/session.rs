//! Curation sessions persisted as append-only JSON-lines decision logs.
//!
//! Each session lives in `<dir>/<session_id>.jsonl`. The first line records
//! the expansion; every later line is one accept/reject decision. Replaying
//! the log rebuilds the session exactly.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use anyhow::{bail, Context};
use lexpand_core::annotation::{AnnotationSet, Label};
use lexpand_core::{Expansion, Word, WordList};
use serde::{Deserialize, Serialize};

pub const DEFAULT_RATER: &str = "curator";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum LogEvent {
    Created {
        session_id: String,
        method: String,
        params: serde_json::Value,
        seeds: Vec<Word>,
        expanded: Vec<Word>,
        unmatched: Vec<Word>,
    },
    Decide {
        word: Word,
        decision: Decision,
        rater: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionState {
    pub session_id: String,
    pub method: String,
    pub params: serde_json::Value,
    pub seeds: WordList,
    pub expanded: WordList,
    pub unmatched: WordList,
    /// Latest decision per word, with its rater.
    pub decisions: BTreeMap<Word, (Decision, String)>,
}

impl SessionState {
    fn from_created(event: &LogEvent) -> anyhow::Result<Self> {
        let LogEvent::Created {
            session_id,
            method,
            params,
            seeds,
            expanded,
            unmatched,
        } = event
        else {
            bail!("session log must start with a created event");
        };
        Ok(SessionState {
            session_id: session_id.clone(),
            method: method.clone(),
            params: params.clone(),
            seeds: WordList::from_words("seeds", seeds.iter().cloned()),
            expanded: WordList::from_words("expanded", expanded.iter().cloned()),
            unmatched: WordList::from_words("unmatched", unmatched.iter().cloned()),
            decisions: BTreeMap::new(),
        })
    }

    fn apply(&mut self, event: &LogEvent) -> anyhow::Result<()> {
        match event {
            LogEvent::Decide { word, decision, rater } => {
                if !self.expanded.contains(word.as_str()) {
                    bail!("word {word:?} is not a candidate of this session");
                }
                self.decisions.insert(word.clone(), (*decision, rater.clone()));
                Ok(())
            }
            LogEvent::Created { .. } => bail!("duplicate created event"),
        }
    }

    /// Replays a full log.
    pub fn replay(events: &[LogEvent]) -> anyhow::Result<Self> {
        let (first, rest) = events.split_first().context("empty session log")?;
        let mut state = SessionState::from_created(first)?;
        for e in rest {
            state.apply(e)?;
        }
        Ok(state)
    }

    /// Expanded words in order, rejected ones removed.
    pub fn curated(&self) -> WordList {
        WordList::from_words(
            "curated",
            self.expanded
                .iter()
                .filter(|w| !matches!(self.decisions.get(*w), Some((Decision::Reject, _))))
                .cloned(),
        )
    }

    pub fn annotations(&self) -> AnnotationSet {
        let mut set = AnnotationSet::new();
        for (word, (decision, rater)) in &self.decisions {
            let label = match decision {
                Decision::Accept => Label::Relevant,
                Decision::Reject => Label::Irrelevant,
            };
            set.add(word.clone(), rater.clone(), label);
        }
        set
    }

    pub fn export(&self) -> anyhow::Result<Export> {
        let mut list = Vec::new();
        self.curated().write(&mut list)?;
        let mut csv = Vec::new();
        self.annotations().write_csv(&mut csv)?;
        Ok(Export {
            session_id: self.session_id.clone(),
            word_list: String::from_utf8(list)?,
            annotations_csv: String::from_utf8(csv)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Export {
    pub session_id: String,
    pub word_list: String,
    pub annotations_csv: String,
}

struct Session {
    state: SessionState,
    log: File,
}

impl Session {
    fn append(&mut self, event: &LogEvent) -> anyhow::Result<()> {
        let mut line = serde_json::to_vec(event)?;
        line.push(b'\n');
        self.log.write_all(&line)?;
        self.log.flush()?;
        Ok(())
    }
}

/// All sessions, each guarded by its own lock so log writes are serialized
/// per session.
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

pub fn read_log(path: &Path) -> anyhow::Result<Vec<LogEvent>> {
    let file = File::open(path)?;
    let mut events = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), idx + 1))?,
        );
    }
    Ok(events)
}

fn open_append(path: &Path) -> anyhow::Result<File> {
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

impl SessionStore {
    /// Opens `dir`, replaying every existing session log.
    pub fn open(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "jsonl") {
                continue;
            }
            let state = SessionState::replay(&read_log(&path)?)
                .with_context(|| format!("replaying {}", path.display()))?;
            let log = open_append(&path)?;
            sessions.insert(state.session_id.clone(), Arc::new(Mutex::new(Session { state, log })));
        }
        Ok(SessionStore {
            dir: dir.to_path_buf(),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn create(&self, method: &str, params: serde_json::Value, expansion: &Expansion) -> anyhow::Result<SessionState> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let event = LogEvent::Created {
            session_id: id.clone(),
            method: method.to_string(),
            params,
            seeds: expansion.seeds.iter().cloned().collect(),
            expanded: expansion.expanded().iter().cloned().collect(),
            unmatched: expansion.unmatched.iter().cloned().collect(),
        };
        let state = SessionState::from_created(&event)?;
        let mut session = Session {
            state: state.clone(),
            log: open_append(&self.log_path(&id))?,
        };
        session.append(&event)?;
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(state)
    }

    fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().expect("session map lock").get(id).cloned()
    }

    pub fn state(&self, id: &str) -> Option<SessionState> {
        self.get(id).map(|s| s.lock().expect("session lock").state.clone())
    }

    /// `Ok(None)` when the session does not exist.
    pub fn decide(&self, id: &str, word: Word, decision: Decision, rater: &str) -> anyhow::Result<Option<SessionState>> {
        let Some(session) = self.get(id) else {
            return Ok(None);
        };
        let mut session = session.lock().expect("session lock");
        let event = LogEvent::Decide {
            word,
            decision,
            rater: rater.to_string(),
        };
        let mut next = session.state.clone();
        next.apply(&event)?;
        session.append(&event)?;
        session.state = next;
        Ok(Some(session.state.clone()))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
