use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Interned-ish identifier. Cloning is a reference count bump.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The user-facing stem, i.e. the name without a `.N` freshening suffix.
    pub fn stem(&self) -> &str {
        match self.0.rfind('.') {
            Some(i) if i > 0 && self.0[i + 1..].bytes().all(|b| b.is_ascii_digit()) => &self.0[..i],
            _ => &self.0,
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Name {
        Name(Arc::from(s))
    }
}

/// Fresh-name supply. Names are `stem.N`; the counter starts at the seed so
/// dumps are reproducible for a fixed seed.
#[derive(Debug)]
pub struct Fresh {
    next: AtomicU64,
}

impl Fresh {
    pub fn new(seed: u64) -> Fresh {
        Fresh { next: AtomicU64::new(seed) }
    }

    pub fn name(&self, stem: &str) -> Name {
        let n = self.next.fetch_add(1, Ordering::Relaxed);
        let stem = Name::new(stem);
        Name::from(format!("{}.{}", stem.stem(), n))
    }

    pub fn rename(&self, x: &Name) -> Name {
        self.name(x.stem())
    }

    /// The next counter value, without consuming it.
    pub fn peek(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }
}

impl Default for Fresh {
    fn default() -> Fresh {
        Fresh::new(0)
    }
}

static CAPTURE: AtomicU64 = AtomicU64::new(0);

/// A globally fresh variant of `x`, used only when a substitution would
/// otherwise capture a binder.
pub fn capture_avoiding(x: &Name) -> Name {
    Name::from(format!("{}.c{}", x.stem(), CAPTURE.fetch_add(1, Ordering::Relaxed)))
}
