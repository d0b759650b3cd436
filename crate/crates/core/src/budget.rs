use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Optional wall-clock limit checked at loop boundaries.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Self(None)
    }

    pub fn after(limit: Option<Duration>) -> Self {
        Self(limit.map(|d| Instant::now() + d))
    }

    pub fn check(&self) -> Result<()> {
        match self.0 {
            Some(t) if Instant::now() >= t => Err(Error::TimeLimitExceeded),
            _ => Ok(()),
        }
    }
}
