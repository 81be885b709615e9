//! On-disk editing sessions for the interactive rule workbench.
//!
//! A session pairs a training corpus (and optionally a test corpus) with a
//! committed rule list and, while the user is experimenting, a tentative
//! one. Every commit writes the new list as plain text plus an updated
//! history index, so a restarted [`SessionManager`] sees exactly the
//! committed state. Tentative lists live only in memory.
//!
//! Layout under the manager's root:
//!
//! ```text
//! s-000001/
//!   session.json        id and whether a test corpus exists
//!   train.slash         gold training corpus
//!   test.slash          gold test corpus (optional)
//!   history.json        one entry per committed version
//!   rules/v0001.rules   rule list text of each committed version
//! ```
//!
//! Sessions are independent. Within a session, edits (propose, commit,
//! rollback) are serialized; evaluation of a proposal runs without holding
//! the state lock, so pages and reports stay readable meanwhile, and its
//! result is installed atomically.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_slash, write_slash, ChunkSpan, Corpus, CorpusFormat};
use crate::error::{Error, Result};
use crate::eval::{classify_spans, freq_recall, score, CategorizedSpan, EvalReport, FreqTable, SpanCategory};
use crate::ruledsl::{
    apply_rule_list, apply_rule_list_to_sentence, diff_rule_lists, parse_rule_list, RuleList, RuleListDelta,
};

/// Where a corpus for a new session comes from.
#[derive(Debug, Clone)]
pub enum CorpusSource {
    /// A file; the format is guessed from its extension.
    Path(PathBuf),
    Text {
        text: String,
        format: CorpusFormat,
    },
}

impl CorpusSource {
    fn load(&self, label: &str) -> Result<Corpus> {
        match self {
            CorpusSource::Path(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                CorpusFormat::from_path(path).parse(&text, label)
            }
            CorpusSource::Text { text, format } => format.parse(text, label),
        }
    }
}

/// Which rule list a page is rendered with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    #[default]
    Committed,
    Tentative,
}

impl FromStr for Which {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "committed" => Ok(Which::Committed),
            "tentative" => Ok(Which::Tentative),
            other => Err(format!("expected committed or tentative, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub version: u64,
    pub rules: usize,
    /// Training-set score of this version.
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub version: u64,
    pub rules: usize,
    pub has_tentative: bool,
    pub train_sentences: usize,
    pub test_sentences: Option<usize>,
}

/// Result of running a proposed list on the training corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proposal {
    pub version: u64,
    pub report: EvalReport,
    pub delta: RuleListDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenView {
    pub word: String,
    pub pos: String,
    pub category: SpanCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceView {
    pub index: usize,
    pub tokens: Vec<TokenView>,
    pub truth_spans: Vec<ChunkSpan>,
    pub predicted_spans: Vec<ChunkSpan>,
    pub spans: Vec<CategorizedSpan>,
}

/// Everything needed to draw a range of training sentences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Page {
    pub which: Which,
    pub version: u64,
    pub start: usize,
    pub end: usize,
    pub total: usize,
    pub sentences: Vec<SentenceView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reports {
    pub history: Vec<HistoryEntry>,
    /// Recall on the test corpus by training frequency, for the committed list.
    pub freq: Option<FreqTable>,
    pub rules_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalReport {
    pub version: u64,
    pub train: EvalReport,
    pub test: EvalReport,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    id: String,
    has_test: bool,
}

struct Corpora {
    train_truth: Corpus,
    train_raw: Corpus,
    test_truth: Option<Corpus>,
}

struct Tentative {
    list: Arc<RuleList>,
    report: EvalReport,
}

struct State {
    committed: Arc<RuleList>,
    tentative: Option<Tentative>,
    history: Vec<HistoryEntry>,
}

struct Session {
    id: String,
    dir: PathBuf,
    corpora: Arc<Corpora>,
    state: RwLock<State>,
    writer: Mutex<()>,
}

impl Session {
    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    fn edit(&self) -> MutexGuard<'_, ()> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn info(&self) -> SessionInfo {
        let st = self.read();
        SessionInfo {
            id: self.id.clone(),
            version: st.committed.version,
            rules: st.committed.len(),
            has_tentative: st.tentative.is_some(),
            train_sentences: self.corpora.train_truth.len(),
            test_sentences: self.corpora.test_truth.as_ref().map(Corpus::len),
        }
    }
}

/// Owns every session stored under one root directory.
pub struct SessionManager {
    root: PathBuf,
    sessions: RwLock<BTreeMap<String, Arc<Session>>>,
    next_id: Mutex<u64>,
}

fn rules_file(dir: &Path, version: u64) -> PathBuf {
    dir.join("rules").join(format!("v{version:04}.rules"))
}

fn store_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Store {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes via a temporary sibling and a rename, so readers never observe a
/// half-written file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("session documents serialize");
    out.push(b'\n');
    out
}

fn parse_id(name: &str) -> Option<u64> {
    name.strip_prefix("s-")?.parse().ok()
}

impl SessionManager {
    /// Opens (creating if needed) a session store and restores every
    /// committed session found in it.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let mut sessions = BTreeMap::new();
        let mut max_id = 0;
        for entry in fs::read_dir(&root).map_err(|e| Error::io(&root, e))? {
            let entry = entry.map_err(|e| Error::io(&root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(n) = parse_id(&name) else { continue };
            max_id = max_id.max(n);
            let session = Self::load(&entry.path())?;
            sessions.insert(name, Arc::new(session));
        }
        Ok(SessionManager {
            root,
            sessions: RwLock::new(sessions),
            next_id: Mutex::new(max_id + 1),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn load(dir: &Path) -> Result<Session> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
        };
        let manifest: Manifest = serde_json::from_str(&read("session.json")?)
            .map_err(|e| store_err(&dir.join("session.json"), e.to_string()))?;
        let history: Vec<HistoryEntry> = serde_json::from_str(&read("history.json")?)
            .map_err(|e| store_err(&dir.join("history.json"), e.to_string()))?;
        let Some(last) = history.last() else {
            return Err(store_err(&dir.join("history.json"), "empty history"));
        };
        if history.windows(2).any(|w| w[0].version >= w[1].version) {
            return Err(store_err(&dir.join("history.json"), "versions not strictly increasing"));
        }
        let rules_path = rules_file(dir, last.version);
        let text = fs::read_to_string(&rules_path).map_err(|e| Error::io(&rules_path, e))?;
        let mut committed = parse_rule_list(&text).map_err(|e| store_err(&rules_path, e.to_string()))?;
        committed.version = last.version;
        let train_truth = parse_slash(&read("train.slash")?, "train")?;
        let test_truth = if manifest.has_test {
            Some(parse_slash(&read("test.slash")?, "test")?)
        } else {
            None
        };
        Ok(Session {
            id: manifest.id,
            dir: dir.to_path_buf(),
            corpora: Arc::new(Corpora {
                train_raw: train_truth.stripped(),
                train_truth,
                test_truth,
            }),
            state: RwLock::new(State {
                committed: Arc::new(committed),
                tentative: None,
                history,
            }),
            writer: Mutex::new(()),
        })
    }

    fn get(&self, id: &str) -> Result<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect()
    }

    /// Starts a session with an empty rule list. Nothing is written and no id
    /// is consumed if a corpus fails to load.
    pub fn create_session(&self, train: &CorpusSource, test: Option<&CorpusSource>) -> Result<SessionInfo> {
        let train_truth = train.load("train")?;
        if train_truth.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let test_truth = test.map(|t| t.load("test")).transpose()?;
        let train_raw = train_truth.stripped();
        let committed = RuleList::default();
        let report = score(&train_truth, &apply_rule_list(&committed, &train_raw))?;
        let history = vec![HistoryEntry {
            version: committed.version,
            rules: 0,
            report,
        }];

        let mut next = self.next_id.lock().unwrap_or_else(|e| e.into_inner());
        let id = format!("s-{:06}", *next);
        let dir = self.root.join(&id);
        // Build the directory under a hidden name, then rename it into place.
        let staging = self.root.join(format!(".{id}.staging"));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        fs::create_dir_all(staging.join("rules")).map_err(|e| Error::io(&staging, e))?;
        let manifest = Manifest {
            id: id.clone(),
            has_test: test_truth.is_some(),
        };
        write_atomic(&staging.join("session.json"), &to_json(&manifest))?;
        write_atomic(&staging.join("train.slash"), write_slash(&train_truth).as_bytes())?;
        if let Some(test) = &test_truth {
            write_atomic(&staging.join("test.slash"), write_slash(test).as_bytes())?;
        }
        write_atomic(&rules_file(&staging, committed.version), committed.to_text().as_bytes())?;
        write_atomic(&staging.join("history.json"), &to_json(&history))?;
        fs::rename(&staging, &dir).map_err(|e| Error::io(&dir, e))?;
        *next += 1;
        drop(next);

        let session = Arc::new(Session {
            id: id.clone(),
            dir,
            corpora: Arc::new(Corpora {
                train_truth,
                train_raw,
                test_truth,
            }),
            state: RwLock::new(State {
                committed: Arc::new(committed),
                tentative: None,
                history,
            }),
            writer: Mutex::new(()),
        });
        let info = session.info();
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, session);
        Ok(info)
    }

    pub fn info(&self, id: &str) -> Result<SessionInfo> {
        Ok(self.get(id)?.info())
    }

    /// Parses `text` as the tentative list and scores it on the training
    /// corpus against the committed list. A parse error discards any previous
    /// tentative list; the committed list is never touched.
    pub fn propose_rules(&self, id: &str, text: &str) -> Result<Proposal> {
        let session = self.get(id)?;
        let _edit = session.edit();
        let committed = Arc::clone(&session.read().committed);
        let mut list = match parse_rule_list(text) {
            Ok(list) => list,
            Err(e) => {
                session.write().tentative = None;
                return Err(e);
            }
        };
        list.version = committed.version + 1;
        let corpora = &session.corpora;
        let delta = diff_rule_lists(&committed, &list, &corpora.train_truth, &corpora.train_raw)?;
        let proposal = Proposal {
            version: list.version,
            report: delta.new,
            delta,
        };
        session.write().tentative = Some(Tentative {
            list: Arc::new(list),
            report: proposal.report,
        });
        Ok(proposal)
    }

    /// Promotes the tentative list. The new version is on disk before it
    /// becomes visible in memory.
    pub fn commit(&self, id: &str) -> Result<SessionInfo> {
        let session = self.get(id)?;
        let _edit = session.edit();
        let (list, report, mut history) = {
            let st = session.read();
            let t = st.tentative.as_ref().ok_or(Error::NoTentative)?;
            (Arc::clone(&t.list), t.report, st.history.clone())
        };
        history.push(HistoryEntry {
            version: list.version,
            rules: list.len(),
            report,
        });
        write_atomic(&rules_file(&session.dir, list.version), list.to_text().as_bytes())?;
        write_atomic(&session.dir.join("history.json"), &to_json(&history))?;
        {
            let mut st = session.write();
            st.committed = list;
            st.tentative = None;
            st.history = history;
        }
        Ok(session.info())
    }

    pub fn rollback(&self, id: &str) -> Result<SessionInfo> {
        let session = self.get(id)?;
        let _edit = session.edit();
        if session.write().tentative.take().is_none() {
            return Err(Error::NoTentative);
        }
        Ok(session.info())
    }

    /// Renders training sentences `start..end` under the chosen list.
    pub fn view_page(&self, id: &str, start: usize, end: usize, which: Which) -> Result<Page> {
        let session = self.get(id)?;
        let list = {
            let st = session.read();
            match which {
                Which::Committed => Arc::clone(&st.committed),
                Which::Tentative => Arc::clone(&st.tentative.as_ref().ok_or(Error::NoTentative)?.list),
            }
        };
        let truth = &session.corpora.train_truth;
        if start > end || end > truth.len() {
            return Err(Error::Range {
                start,
                end,
                len: truth.len(),
            });
        }
        let sentences = (start..end)
            .map(|index| {
                let gold = &truth.sentences[index];
                let predicted = apply_rule_list_to_sentence(&list, &session.corpora.train_raw.sentences[index]);
                let classes = classify_spans(gold, &predicted)?;
                Ok(SentenceView {
                    index,
                    tokens: gold
                        .tokens()
                        .iter()
                        .zip(&classes.tokens)
                        .map(|(t, &category)| TokenView {
                            word: t.word().to_string(),
                            pos: t.pos().to_string(),
                            category,
                        })
                        .collect(),
                    truth_spans: gold.spans().to_vec(),
                    predicted_spans: predicted.spans().to_vec(),
                    spans: classes.spans,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Page {
            which,
            version: list.version,
            start,
            end,
            total: truth.len(),
            sentences,
        })
    }

    pub fn reports(&self, id: &str) -> Result<Reports> {
        let session = self.get(id)?;
        let (committed, history) = {
            let st = session.read();
            (Arc::clone(&st.committed), st.history.clone())
        };
        let corpora = &session.corpora;
        let freq = match &corpora.test_truth {
            Some(test) => {
                let predicted = apply_rule_list(&committed, &test.stripped());
                Some(freq_recall(&corpora.train_truth, test, &predicted)?)
            }
            None => None,
        };
        Ok(Reports {
            history,
            freq,
            rules_text: committed.to_text(),
        })
    }

    /// Scores the committed list on the held-out test corpus.
    pub fn final_report(&self, id: &str) -> Result<FinalReport> {
        let session = self.get(id)?;
        let (committed, train) = {
            let st = session.read();
            let last = st.history.last().expect("history is never empty");
            (Arc::clone(&st.committed), last.report)
        };
        let test_truth = session.corpora.test_truth.as_ref().ok_or(Error::NoTestCorpus)?;
        let test = score(test_truth, &apply_rule_list(&committed, &test_truth.stripped()))?;
        Ok(FinalReport {
            version: committed.version,
            train,
            test,
        })
    }
}
