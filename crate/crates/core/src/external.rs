//! Command plug-ins speaking a line protocol over stdin/stdout.
//!
//! Each plug-in is a long-running child process started with `sh -c`. The
//! engine writes one UTF-8 request line and reads one response line per call;
//! a malformed response, early exit, or timeout is a protocol failure
//! (CLI exit code 4).
//!
//! Protocols:
//! - duration command: request `lang<TAB>tok1 tok2 ...`, response one decimal
//!   seconds value. Implementations must be deterministic and additive over
//!   token concatenation, like the built-in character model.
//! - scorer command: request `feature<TAB>field...`, response one decimal
//!   score in (0, 1].
//! - transcriber command: request header `clip<TAB>sentence<TAB>N` followed by
//!   `N` lines `word<TAB>rate`, response one line of hypothesis words.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use crate::duration::DurationOracle;
use crate::error::Error;
use crate::metrics::Transcriber;
use crate::time::Micros;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// One child process plus a reader thread feeding response lines through a
/// channel, so reads can time out.
pub struct LineProtocolClient {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    cmd: String,
}

impl LineProtocolClient {
    pub fn spawn(cmd: &str, timeout: Duration) -> Result<LineProtocolClient, Error> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Plugin(format!("cannot start '{cmd}': {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, lines) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(LineProtocolClient { child, stdin, lines, timeout, cmd: cmd.to_string() })
    }

    pub fn send_line(&mut self, line: &str) -> Result<(), Error> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Plugin(format!("'{}' rejected a request: {e}", self.cmd)))
    }

    pub fn recv_line(&mut self) -> Result<String, Error> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::Plugin(format!("'{}' read failed: {e}", self.cmd))),
            Err(RecvTimeoutError::Timeout) => {
                Err(Error::Plugin(format!("'{}' timed out after {:?}", self.cmd, self.timeout)))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::Plugin(format!("'{}' exited before responding", self.cmd)))
            }
        }
    }

    pub fn request(&mut self, line: &str) -> Result<String, Error> {
        self.send_line(line)?;
        self.recv_line()
    }
}

impl Drop for LineProtocolClient {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Duration oracle backed by an external command.
pub struct CommandDurationOracle {
    client: Mutex<LineProtocolClient>,
}

impl CommandDurationOracle {
    pub fn spawn(cmd: &str, timeout: Duration) -> Result<CommandDurationOracle, Error> {
        Ok(CommandDurationOracle { client: Mutex::new(LineProtocolClient::spawn(cmd, timeout)?) })
    }
}

impl DurationOracle for CommandDurationOracle {
    fn duration(&self, tokens: &[String], language: &str) -> Result<Micros, Error> {
        if tokens.is_empty() {
            return Ok(0);
        }
        let mut client = self.client.lock().expect("plug-in mutex poisoned");
        let line = client.request(&format!("{language}\t{}", tokens.join(" ")))?;
        let secs: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Plugin(format!("duration command returned '{line}', expected seconds")))?;
        if !secs.is_finite() || secs < 0.0 {
            return Err(Error::Plugin(format!("duration command returned invalid seconds {secs}")));
        }
        Ok((secs * 1e6).round() as Micros)
    }
}

/// Feature scorer backed by an external command.
pub struct CommandScorer {
    client: Mutex<LineProtocolClient>,
}

impl CommandScorer {
    pub fn spawn(cmd: &str, timeout: Duration) -> Result<CommandScorer, Error> {
        Ok(CommandScorer { client: Mutex::new(LineProtocolClient::spawn(cmd, timeout)?) })
    }

    /// Requests a score for `feature` over tab-separated `fields`; the
    /// response must be a decimal in (0, 1].
    pub fn score(&self, feature: &str, fields: &[&str]) -> Result<f64, Error> {
        let mut client = self.client.lock().expect("plug-in mutex poisoned");
        let mut req = feature.to_string();
        for f in fields {
            req.push('\t');
            req.push_str(f);
        }
        let line = client.request(&req)?;
        let score: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Plugin(format!("scorer returned '{line}', expected a decimal")))?;
        if !(score > 0.0 && score <= 1.0) {
            return Err(Error::Plugin(format!("scorer returned {score}, outside (0, 1]")));
        }
        Ok(score)
    }
}

/// Transcriber backed by an external command.
pub struct CommandTranscriber {
    client: Mutex<LineProtocolClient>,
}

impl CommandTranscriber {
    pub fn spawn(cmd: &str, timeout: Duration) -> Result<CommandTranscriber, Error> {
        Ok(CommandTranscriber { client: Mutex::new(LineProtocolClient::spawn(cmd, timeout)?) })
    }
}

impl Transcriber for CommandTranscriber {
    fn transcribe(
        &self,
        clip_id: &str,
        sentence: usize,
        words: &[String],
        rates: &[f64],
    ) -> Result<Vec<String>, Error> {
        if words.len() != rates.len() {
            return Err(Error::InvalidInput("one rate per word required".into()));
        }
        let mut client = self.client.lock().expect("plug-in mutex poisoned");
        client.send_line(&format!("{clip_id}\t{sentence}\t{}", words.len()))?;
        for (w, r) in words.iter().zip(rates) {
            client.send_line(&format!("{w}\t{r}"))?;
        }
        let line = client.recv_line()?;
        Ok(line.split_whitespace().map(|w| w.to_string()).collect())
    }
}
