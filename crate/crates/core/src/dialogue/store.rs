//! Tracker store: one tracker per sender, turns serialized per sender in
//! arrival (ticket) order, distinct senders fully concurrent. Optionally
//! persisted as an append-only JSON-lines event log per sender.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use super::tracker::{Event, OrderingError, Tracker};
use crate::domain::{DomainSpec, SlotValue};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("tracker store i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt event log {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Ordering(#[from] OrderingError),
}

#[derive(Debug, Default)]
struct LaneState {
    next_ticket: u64,
    serving: u64,
    abandoned: BTreeSet<u64>,
    tracker: Option<Tracker>,
    /// Events of `tracker` already on disk.
    persisted: usize,
}

impl LaneState {
    fn advance(&mut self) {
        self.serving += 1;
        while self.abandoned.remove(&self.serving) {
            self.serving += 1;
        }
    }
}

#[derive(Debug, Default)]
struct Lane {
    state: Mutex<LaneState>,
    turn: Condvar,
}

impl Lane {
    fn lock(&self) -> MutexGuard<'_, LaneState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Debug)]
struct Inner {
    dir: Option<PathBuf>,
    initial: BTreeMap<String, SlotValue>,
    lanes: Mutex<HashMap<String, Arc<Lane>>>,
}

#[derive(Debug, Clone)]
pub struct TrackerStore {
    inner: Arc<Inner>,
}

fn log_file_name(sender: &str) -> String {
    let hex: String = sender.bytes().map(|b| format!("{b:02x}")).collect();
    format!("{hex}.jsonl")
}

fn sender_from_file_name(name: &str) -> Option<String> {
    let hex = name.strip_suffix(".jsonl")?;
    if hex.len() % 2 != 0 {
        return None;
    }
    let bytes: Option<Vec<u8>> = (0..hex.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
        .collect();
    String::from_utf8(bytes?).ok()
}

impl TrackerStore {
    /// Volatile store.
    pub fn in_memory(spec: &DomainSpec) -> Self {
        Self::build(None, spec)
    }

    /// Persistent store under `dir`; existing logs are replayed eagerly so
    /// corrupt files are reported at startup.
    pub fn open(dir: &Path, spec: &DomainSpec) -> Result<Self, StoreError> {
        let io_err = |source| StoreError::Io {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(io_err)?;
        let store = Self::build(Some(dir.to_path_buf()), spec);
        let mut lanes = HashMap::new();
        for entry in fs::read_dir(dir).map_err(io_err)? {
            let entry = entry.map_err(io_err)?;
            let Some(sender) = entry.file_name().to_str().and_then(sender_from_file_name) else {
                continue;
            };
            let tracker = store.load(&sender)?;
            let lane = Lane::default();
            {
                let mut st = lane.lock();
                st.persisted = tracker.events().len();
                st.tracker = Some(tracker);
            }
            lanes.insert(sender, Arc::new(lane));
        }
        *store.inner.lanes.lock().unwrap_or_else(|e| e.into_inner()) = lanes;
        Ok(store)
    }

    fn build(dir: Option<PathBuf>, spec: &DomainSpec) -> Self {
        TrackerStore {
            inner: Arc::new(Inner {
                dir,
                initial: Tracker::new("", spec).initial_slots().clone(),
                lanes: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.inner.dir.as_deref()
    }

    /// Senders with a tracker (loaded or created).
    pub fn senders(&self) -> Vec<String> {
        let mut v: Vec<String> = self.inner.lanes.lock().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        v.sort();
        v
    }

    fn path_for(&self, sender: &str) -> Option<PathBuf> {
        self.inner.dir.as_ref().map(|d| d.join(log_file_name(sender)))
    }

    fn load(&self, sender: &str) -> Result<Tracker, StoreError> {
        let fresh = || Tracker::with_initial_slots(sender, self.inner.initial.clone());
        let Some(path) = self.path_for(sender) else {
            return Ok(fresh());
        };
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(fresh()),
            Err(source) => return Err(StoreError::Io { path, source }),
        };
        let mut events = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| StoreError::Io {
                path: path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(event);
        }
        Ok(Tracker::replay(sender, self.inner.initial.clone(), events)?)
    }

    /// Reserves the next turn for `sender`. Tickets are served strictly in
    /// the order they were taken.
    pub fn ticket(&self, sender: &str) -> Ticket {
        let lane = {
            let mut lanes = self.inner.lanes.lock().unwrap_or_else(|e| e.into_inner());
            lanes.entry(sender.to_string()).or_default().clone()
        };
        let number = {
            let mut st = lane.lock();
            let n = st.next_ticket;
            st.next_ticket += 1;
            n
        };
        Ticket {
            store: self.clone(),
            sender: sender.to_string(),
            lane: Some(lane),
            number,
        }
    }

    /// Blocks until it is this caller's turn for `sender`.
    pub fn lease(&self, sender: &str) -> Result<Lease, StoreError> {
        self.ticket(sender).wait()
    }

    /// Copy of the sender's current tracker (waits for in-flight turns).
    pub fn snapshot(&self, sender: &str) -> Result<Tracker, StoreError> {
        Ok(self.lease(sender)?.tracker().clone())
    }
}

/// A place in a sender's queue.
#[derive(Debug)]
pub struct Ticket {
    store: TrackerStore,
    sender: String,
    lane: Option<Arc<Lane>>,
    number: u64,
}

impl Ticket {
    pub fn sender(&self) -> &str {
        &self.sender
    }

    /// Waits for this ticket to be served, then lends out the tracker.
    pub fn wait(mut self) -> Result<Lease, StoreError> {
        let lane = self.lane.take().expect("ticket used once");
        let mut st = lane.lock();
        while st.serving != self.number {
            st = lane.turn.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        let tracker = match st.tracker.take() {
            Some(t) => t,
            None => match self.store.load(&self.sender) {
                Ok(t) => {
                    st.persisted = t.events().len();
                    t
                }
                Err(e) => {
                    st.advance();
                    lane.turn.notify_all();
                    return Err(e);
                }
            },
        };
        let persisted = st.persisted;
        drop(st);
        Ok(Lease {
            store: self.store.clone(),
            lane: Some(lane),
            tracker: Some(tracker),
            persisted,
            rewrite: false,
        })
    }
}

impl Drop for Ticket {
    fn drop(&mut self) {
        // An unused ticket must not block the tickets behind it.
        if let Some(lane) = self.lane.take() {
            let mut st = lane.lock();
            if st.serving == self.number {
                st.advance();
                lane.turn.notify_all();
            } else {
                st.abandoned.insert(self.number);
            }
        }
    }
}

/// Exclusive access to one sender's tracker. Dropping the lease persists
/// new events and admits the next ticket.
#[derive(Debug)]
pub struct Lease {
    store: TrackerStore,
    lane: Option<Arc<Lane>>,
    tracker: Option<Tracker>,
    persisted: usize,
    rewrite: bool,
}

impl Lease {
    pub fn tracker(&self) -> &Tracker {
        self.tracker.as_ref().expect("lease holds a tracker")
    }

    pub fn tracker_mut(&mut self) -> &mut Tracker {
        self.tracker.as_mut().expect("lease holds a tracker")
    }

    /// Swaps in a new tracker (e.g. after a reset); the log is rewritten.
    pub fn replace(&mut self, tracker: Tracker) {
        self.tracker = Some(tracker);
        self.persisted = 0;
        self.rewrite = true;
    }

    /// Writes events not yet on disk. Idempotent.
    pub fn commit(&mut self) -> Result<(), StoreError> {
        let Some(path) = self.store.path_for(self.tracker().sender_id()) else {
            return Ok(());
        };
        let events = &self.tracker().events()[self.persisted..];
        if events.is_empty() && !self.rewrite {
            return Ok(());
        }
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e).expect("events serialize");
            buf.push(b'\n');
        }
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut file = OpenOptions::new()
            .create(true)
            .write(true)
            .append(!self.rewrite)
            .truncate(self.rewrite)
            .open(&path)
            .map_err(io_err)?;
        file.write_all(&buf).map_err(io_err)?;
        self.persisted = self.tracker().events().len();
        self.rewrite = false;
        Ok(())
    }
}

impl Drop for Lease {
    fn drop(&mut self) {
        if let Err(e) = self.commit() {
            tracing::error!(error = %e, "failed to persist tracker");
        }
        if let Some(lane) = self.lane.take() {
            let mut st = lane.lock();
            st.tracker = self.tracker.take();
            st.persisted = self.persisted;
            st.advance();
            lane.turn.notify_all();
        }
    }
}
