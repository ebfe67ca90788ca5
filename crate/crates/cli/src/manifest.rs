//! Run manifests, written as `#` comment lines ahead of every CSV body.

use std::time::Instant;

use sha2::{Digest, Sha256};

pub struct Manifest {
    command: String,
    input: String,
    digest: String,
    threads: usize,
    seed: u64,
    extra: Vec<String>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(argv: &[String], input: &str, bytes: &[u8], threads: usize, seed: u64) -> Self {
        Manifest {
            command: argv.join(" "),
            input: input.to_string(),
            digest: sha256_hex(bytes),
            threads,
            seed,
            extra: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.extra.push(line.into());
    }

    /// Header lines without the leading `# `.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("lyapspec {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("input: {} sha256={}", self.input, self.digest),
            format!("threads: {}", self.threads),
            format!("seed: {}", self.seed),
        ];
        out.extend(self.extra.iter().cloned());
        out.push(format!("wall_time_s: {:.3}", self.started.elapsed().as_secs_f64()));
        out
    }

    pub fn render(&self, body: &str) -> String {
        let mut s: String = self.lines().iter().map(|l| format!("# {l}\n")).collect();
        s.push_str(body);
        s
    }
}
