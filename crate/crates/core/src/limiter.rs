//! Slope limiters for the linear reconstruction, looked up by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Limited slope from the backward and forward differences of a cell.
pub trait SlopeLimiter: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;
    fn slope(&self, backward: f64, forward: f64) -> f64;
}

/// Central differences, no limiting.
#[derive(Debug, Default)]
pub struct Unlimited;

impl SlopeLimiter for Unlimited {
    fn name(&self) -> &'static str {
        "none"
    }

    fn slope(&self, backward: f64, forward: f64) -> f64 {
        0.5 * (backward + forward)
    }
}

#[derive(Debug, Default)]
pub struct Minmod;

impl SlopeLimiter for Minmod {
    fn name(&self) -> &'static str {
        "minmod"
    }

    fn slope(&self, backward: f64, forward: f64) -> f64 {
        if backward * forward <= 0.0 {
            0.0
        } else if backward.abs() < forward.abs() {
            backward
        } else {
            forward
        }
    }
}

/// Name → limiter table.
#[derive(Debug, Clone)]
pub struct LimiterRegistry {
    entries: BTreeMap<&'static str, Arc<dyn SlopeLimiter>>,
}

impl Default for LimiterRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(Unlimited));
        r.register(Arc::new(Minmod));
        r
    }
}

impl LimiterRegistry {
    pub fn register(&mut self, limiter: Arc<dyn SlopeLimiter>) {
        self.entries.insert(limiter.name(), limiter);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SlopeLimiter>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "limiter",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// Shorthand for a lookup in the default registry.
pub fn by_name(name: &str) -> Result<Arc<dyn SlopeLimiter>> {
    LimiterRegistry::default().get(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minmod_cases() {
        let m = Minmod;
        assert_eq!(m.slope(1.0, 2.0), 1.0);
        assert_eq!(m.slope(-3.0, -2.0), -2.0);
        assert_eq!(m.slope(1.0, -2.0), 0.0);
        assert_eq!(m.slope(0.0, 5.0), 0.0);
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(by_name("none").unwrap().slope(1.0, 3.0), 2.0);
        assert_eq!(by_name("minmod").unwrap().name(), "minmod");
        assert!(matches!(by_name("superbee"), Err(Error::Unknown { .. })));
        let names: Vec<_> = LimiterRegistry::default().names().collect();
        assert_eq!(names, ["minmod", "none"]);
    }
}
