use chrono::{DateTime, Duration, Utc};
use parking_lot::Mutex;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Test clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock {
    now: Mutex<DateTime<Utc>>,
}

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self {
            now: Mutex::new(start),
        }
    }

    pub fn advance(&self, by: Duration) {
        *self.now.lock() += by;
    }

    pub fn set(&self, to: DateTime<Utc>) {
        *self.now.lock() = to;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.now.lock()
    }
}

/// Never hands out the same instant twice; successive readings are at least
/// one microsecond apart.
pub struct MonotoneClock<C> {
    inner: C,
    last: Mutex<Option<DateTime<Utc>>>,
}

impl<C: Clock> MonotoneClock<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            last: Mutex::new(None),
        }
    }

    pub fn observe(&self, seen: DateTime<Utc>) {
        let mut last = self.last.lock();
        if last.is_none_or(|l| seen > l) {
            *last = Some(seen);
        }
    }
}

impl<C: Clock> Clock for MonotoneClock<C> {
    fn now(&self) -> DateTime<Utc> {
        let mut last = self.last.lock();
        let mut t = self.inner.now();
        if let Some(l) = *last {
            if t <= l {
                t = l + Duration::microseconds(1);
            }
        }
        *last = Some(t);
        t
    }
}

impl<C: Clock + ?Sized> Clock for std::sync::Arc<C> {
    fn now(&self) -> DateTime<Utc> {
        (**self).now()
    }
}
