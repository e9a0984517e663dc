use std::collections::HashMap;
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, Instant};

use tokio::sync::Mutex;
use uniact_core::catalog::Catalog;
use uniact_core::session::{Session, SessionError};
use uuid::Uuid;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

/// A session plus the time it was last touched. The async mutex is what
/// queues requests against one session.
pub struct Slot {
    pub session: Arc<Mutex<Session>>,
    last_used: StdMutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().expect("clock lock") = Instant::now();
    }

    fn idle_since(&self) -> Instant {
        *self.last_used.lock().expect("clock lock")
    }
}

pub struct SessionStore {
    catalog: Catalog,
    sessions: StdMutex<HashMap<String, Arc<Slot>>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub fn new(catalog: Catalog, idle_timeout: Duration) -> Self {
        SessionStore {
            catalog,
            sessions: StdMutex::new(HashMap::new()),
            idle_timeout,
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn create(&self, app: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let bundle = self
            .catalog
            .app(app)
            .map_err(|_| SessionError::UnknownApp(app.to_string()))?;
        let id = Uuid::new_v4().simple().to_string();
        let session = Arc::new(Mutex::new(Session::new(id.clone(), bundle.clone())));
        let slot = Arc::new(Slot {
            session: session.clone(),
            last_used: StdMutex::new(Instant::now()),
        });
        self.sessions.lock().expect("session map").insert(id, slot);
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let sessions = self.sessions.lock().expect("session map");
        let slot = sessions
            .get(id)
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()))?;
        slot.touch();
        Ok(slot.session.clone())
    }

    pub fn remove(&self, id: &str) -> Result<(), SessionError> {
        match self.sessions.lock().expect("session map").remove(id) {
            Some(_) => Ok(()),
            None => Err(SessionError::UnknownSession(id.to_string())),
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions untouched since `now - idle_timeout`. Returns how many went.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.lock().expect("session map");
        let before = sessions.len();
        sessions.retain(|_, slot| now.saturating_duration_since(slot.idle_since()) < self.idle_timeout);
        before - sessions.len()
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }
}
