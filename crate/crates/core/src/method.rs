//! Membership procedures behind one interface, looked up by name.

use thiserror::Error;

use crate::log::TimedWord;
use crate::model::Lha;
use crate::monitor::{run_monitor, MonitorConfig, MonitorError, MonitorVerdict};
use crate::translate::{method1_verdict, TranslateError};

#[derive(Debug, Error)]
pub enum MethodError {
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("unknown method `{0}`; known: {1}")]
    Unknown(String, String),
}

/// Computes `C(w, M)` together with per-index verdicts.
pub trait MembershipMethod: Send + Sync {
    /// Canonical name.
    fn name(&self) -> &'static str;
    /// Other accepted spellings.
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }
    fn verdicts(&self, m: &Lha, w: &TimedWord, cfg: &MonitorConfig) -> Result<MonitorVerdict, MethodError>;
}

/// Incremental reachability between samples.
pub struct Direct;

impl MembershipMethod for Direct {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["2", "method2"]
    }

    fn verdicts(&self, m: &Lha, w: &TimedWord, cfg: &MonitorConfig) -> Result<MonitorVerdict, MethodError> {
        Ok(run_monitor(m, w, cfg)?)
    }
}

/// Reachability in the product with the word automaton.
pub struct Product;

impl MembershipMethod for Product {
    fn name(&self) -> &'static str {
        "product"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["1", "method1"]
    }

    fn verdicts(&self, m: &Lha, w: &TimedWord, cfg: &MonitorConfig) -> Result<MonitorVerdict, MethodError> {
        Ok(method1_verdict(m, w, cfg)?)
    }
}

pub struct MethodRegistry {
    methods: Vec<Box<dyn MembershipMethod>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = MethodRegistry::empty();
        r.register(Box::new(Direct));
        r.register(Box::new(Product));
        r
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry { methods: Vec::new() }
    }

    /// Adds a method; a later registration shadows earlier ones with the same name.
    pub fn register(&mut self, method: Box<dyn MembershipMethod>) {
        self.methods.insert(0, method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MembershipMethod, MethodError> {
        let wanted = name.trim().to_ascii_lowercase();
        self.methods
            .iter()
            .find(|m| m.name() == wanted || m.aliases().contains(&wanted.as_str()))
            .map(|m| m.as_ref())
            .ok_or_else(|| MethodError::Unknown(name.to_string(), self.names().join(", ")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = self.methods.iter().map(|m| m.name()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
