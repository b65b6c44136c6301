use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: Value) -> Self {
        Check { name: name.into(), pass, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Precision {
    pub prec: usize,
    pub tolerance_bits: usize,
}

/// Everything a command prints on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub precision: Option<Precision>,
    pub rigorous: bool,
    pub seed: Option<u64>,
    pub timing_ms: u128,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            results: Value::Null,
            checks: Vec::new(),
            pass: true,
            precision: None,
            rigorous: true,
            seed: None,
            timing_ms: 0,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }
}
