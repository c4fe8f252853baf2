//! Out-of-process detectors speaking newline-delimited JSON over stdio.
//!
//! One process serves exactly one task: `hello`, a single `fit` with every
//! training region, one `score` per evaluation target, then `shutdown`. The
//! process's stderr is forwarded to the log and never parsed.

pub mod protocol;

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::Dataset;
use crate::schemas::Task;
use crate::series::{validate_scores, ScoreSeries, SeriesError};
use protocol::{decode_reply, encode, Reply, Request, SeriesPayload, PROTOCOL_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExternError {
    #[error("invalid external detector spec: {0}")]
    InvalidSpec(String),
    #[error("failed to start '{command}': {message}")]
    Spawn { command: String, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("detector reported an error: {0}")]
    Detector(String),
    #[error("timed out after {0:?} waiting for {1}")]
    Timeout(Duration, &'static str),
    #[error("detector exited with {0}")]
    NonZeroExit(String),
    #[error(transparent)]
    Scores(#[from] SeriesError),
}

fn default_startup_timeout() -> f64 {
    30.0
}

fn default_message_timeout() -> f64 {
    300.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalDetectorSpec {
    pub command: Vec<String>,
    /// Seconds allowed for the hello handshake.
    #[serde(default = "default_startup_timeout")]
    pub startup_timeout: f64,
    /// Seconds allowed for each fit or score reply.
    #[serde(default = "default_message_timeout")]
    pub message_timeout: f64,
}

impl ExternalDetectorSpec {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            startup_timeout: default_startup_timeout(),
            message_timeout: default_message_timeout(),
        }
    }

    pub fn validate(&self) -> Result<(), ExternError> {
        if self.command.is_empty() || self.command[0].is_empty() {
            return Err(ExternError::InvalidSpec("command is empty".into()));
        }
        for t in [self.startup_timeout, self.message_timeout] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ExternError::InvalidSpec(format!("timeouts must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Scores and timings from one external task.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRun {
    pub detector_name: String,
    pub scores: Vec<ScoreSeries>,
    pub fit_seconds: f64,
    pub score_seconds: f64,
}

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl Session {
    fn spawn(spec: &ExternalDetectorSpec) -> Result<Self, ExternError> {
        let mut child = Command::new(&spec.command[0])
            .args(&spec.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ExternError::Spawn {
                command: spec.command.join(" "),
                message: e.to_string(),
            })?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let stderr = child.stderr.take().expect("stderr is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let name = spec.command[0].clone();
        thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(Result::ok) {
                log::info!("[{name}] {line}");
            }
        });
        Ok(Self {
            stdin: child.stdin.take(),
            child,
            lines,
        })
    }

    fn send(&mut self, request: &Request) -> Result<(), ExternError> {
        let line = encode(request);
        let result = match self.stdin.as_mut() {
            Some(stdin) => stdin.write_all(line.as_bytes()).and_then(|()| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        result.map_err(|e| self.exit_error().unwrap_or_else(|| ExternError::Protocol(format!("write failed: {e}"))))
    }

    fn receive(&mut self, timeout: Duration, waiting_for: &'static str) -> Result<Reply, ExternError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => match decode_reply(&line).map_err(ExternError::Protocol)? {
                Reply::Error { message } => Err(ExternError::Detector(message)),
                reply => Ok(reply),
            },
            Ok(Err(e)) => Err(ExternError::Protocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(ExternError::Timeout(timeout, waiting_for)),
            Err(RecvTimeoutError::Disconnected) => Err(self
                .exit_error()
                .unwrap_or_else(|| ExternError::Protocol(format!("stdout closed while waiting for {waiting_for}")))),
        }
    }

    /// Waits briefly for the process to finish and reports a failing exit.
    fn exit_error(&mut self) -> Option<ExternError> {
        let status = self.wait_for(Duration::from_secs(2))?;
        (!status.success()).then(|| ExternError::NonZeroExit(status.to_string()))
    }

    fn wait_for(&mut self, limit: Duration) -> Option<ExitStatus> {
        let deadline = Instant::now() + limit;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return Some(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => return None,
            }
        }
    }

    /// Sends `shutdown`, closes stdin and reaps the process, killing it if
    /// it does not exit within `grace`.
    fn finish(mut self, grace: Duration) -> Result<(), ExternError> {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.write_all(encode(&Request::Shutdown).as_bytes());
            let _ = stdin.flush();
        }
        match self.wait_for(grace) {
            Some(status) if status.success() => Ok(()),
            Some(status) => Err(ExternError::NonZeroExit(status.to_string())),
            None => {
                let _ = self.child.kill();
                let _ = self.child.wait();
                Err(ExternError::Timeout(grace, "process exit after shutdown"))
            }
        }
    }

    fn kill(mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s)
}

/// Runs one task against an external detector process.
pub fn drive(spec: &ExternalDetectorSpec, task: &Task, dataset: &Dataset) -> Result<ExternalRun, ExternError> {
    spec.validate()?;
    let lookup = |id: &str| {
        dataset
            .get(id)
            .ok_or_else(|| ExternError::InvalidSpec(format!("task references unknown series '{id}'")))
    };
    let mut session = Session::spawn(spec)?;
    let outcome = converse(&mut session, spec, task, &lookup);
    match outcome {
        Ok(run) => {
            session.finish(secs(spec.message_timeout.min(10.0)))?;
            Ok(run)
        }
        Err(err @ ExternError::Timeout(..)) => {
            session.kill();
            Err(err)
        }
        Err(err) => {
            // A clean shutdown cannot rescue the task; only reap.
            let _ = session.finish(Duration::from_secs(2));
            Err(err)
        }
    }
}

fn converse<'a>(
    session: &mut Session,
    spec: &ExternalDetectorSpec,
    task: &Task,
    lookup: &dyn Fn(&str) -> Result<&'a crate::series::TimeSeries, ExternError>,
) -> Result<ExternalRun, ExternError> {
    session.send(&Request::Hello {
        protocol: PROTOCOL_VERSION,
    })?;
    let detector_name = match session.receive(secs(spec.startup_timeout), "hello")? {
        Reply::Hello { name, protocol } if protocol == PROTOCOL_VERSION => name,
        Reply::Hello { protocol, .. } => {
            return Err(ExternError::Protocol(format!("unsupported protocol version {protocol}")))
        }
        other => return Err(ExternError::Protocol(format!("expected hello, got {other:?}"))),
    };

    let mut series = Vec::with_capacity(task.train_refs.len());
    for r in &task.train_refs {
        let s = lookup(&r.series_id)?;
        series.push(SeriesPayload {
            id: r.series_id.clone(),
            values: s.values()[r.start..r.end].to_vec(),
        });
    }
    let started = Instant::now();
    session.send(&Request::Fit { series })?;
    match session.receive(secs(spec.message_timeout), "fit_done")? {
        Reply::FitDone => {}
        other => return Err(ExternError::Protocol(format!("expected fit_done, got {other:?}"))),
    }
    let fit_seconds = started.elapsed().as_secs_f64();

    let mut scores = Vec::with_capacity(task.eval_refs.len());
    let mut score_seconds = 0.0;
    for r in &task.eval_refs {
        let s = lookup(&r.series_id)?;
        let started = Instant::now();
        session.send(&Request::Score {
            id: r.series_id.clone(),
            context: s.values()[..r.start].to_vec(),
            values: s.values()[r.start..r.end].to_vec(),
        })?;
        let reply = session.receive(secs(spec.message_timeout), "scores")?;
        score_seconds += started.elapsed().as_secs_f64();
        match reply {
            Reply::Scores { id, scores: values } if id == r.series_id => {
                let series_scores = ScoreSeries::new(id, values);
                validate_scores(&series_scores, s)?;
                scores.push(series_scores);
            }
            other => {
                return Err(ExternError::Protocol(format!(
                    "expected scores for '{}', got {other:?}",
                    r.series_id
                )))
            }
        }
    }
    Ok(ExternalRun {
        detector_name,
        scores,
        fit_seconds,
        score_seconds,
    })
}
