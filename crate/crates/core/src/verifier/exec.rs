//! Subprocess oracle for the external Verus binary.

use super::output::parse_output;
use super::{Oracle, VerificationOutcome, VerifyOptions};
use crate::lynette::with_loop_isolation_disabled;
use crate::program::{render, VerusProgram};
use std::io::Read;
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, thiserror::Error)]
pub enum VerifierError {
    #[error("verifier not found at `{0}`")]
    NotFound(String),
    #[error("verifier io error: {0}")]
    Io(String),
}

/// Runs the configured verifier binary on rendered programs. Safe for
/// concurrent use: every call gets its own temp directory.
pub struct VerusOracle {
    options: VerifyOptions,
    version: Mutex<Option<String>>,
}

impl VerusOracle {
    pub fn new(options: VerifyOptions) -> Self {
        VerusOracle { options, version: Mutex::new(None) }
    }

    pub fn options(&self) -> &VerifyOptions {
        &self.options
    }

    fn run(&self, source: &str) -> Result<(String, Option<i32>, bool), VerifierError> {
        let dir = tempfile::tempdir().map_err(|e| VerifierError::Io(e.to_string()))?;
        let file = dir.path().join("task.rs");
        std::fs::write(&file, source).map_err(|e| VerifierError::Io(e.to_string()))?;

        let mut cmd = Command::new(&self.options.verifier_path);
        cmd.arg(&file)
            .args(&self.options.extra_flags)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .stdin(Stdio::null());
        let mut child = cmd.spawn().map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                VerifierError::NotFound(self.options.verifier_path.display().to_string())
            } else {
                VerifierError::Io(e.to_string())
            }
        })?;

        // drain both pipes off-thread so a chatty verifier cannot deadlock
        let mut stdout_pipe = child.stdout.take().expect("piped");
        let mut stderr_pipe = child.stderr.take().expect("piped");
        let out_handle = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout_pipe.read_to_string(&mut buf);
            buf
        });
        let err_handle = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr_pipe.read_to_string(&mut buf);
            buf
        });

        let deadline = Instant::now() + Duration::from_secs(self.options.timeout_s.max(1));
        let mut timed_out = false;
        let status = loop {
            match child.try_wait().map_err(|e| VerifierError::Io(e.to_string()))? {
                Some(status) => break Some(status),
                None => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        timed_out = true;
                        break None;
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
            }
        };

        let stdout = out_handle.join().unwrap_or_default();
        let stderr = err_handle.join().unwrap_or_default();
        let combined = format!("{stdout}\n{stderr}");
        Ok((combined, status.and_then(|s| s.code()), timed_out))
    }
}

impl Oracle for VerusOracle {
    fn verify(&self, program: &VerusProgram) -> Result<VerificationOutcome, VerifierError> {
        let caller_frame = render(program);
        let actual = if self.options.loop_isolation {
            render(&with_loop_isolation_disabled(program))
        } else {
            caller_frame.clone()
        };

        let (raw, exit_code, timed_out) = self.run(&actual)?;
        if timed_out {
            return Ok(VerificationOutcome {
                verified_count: 0,
                error_count: 0,
                diagnostics: Vec::new(),
                timed_out: true,
                compiled: false,
                raw_output: raw,
            });
        }

        let mut parsed = parse_output(&raw, &actual);

        // report spans in the caller's render frame even when the adapter
        // injected the loop-isolation attribute
        if actual != caller_frame {
            if let Some((pos, len, lines)) = inserted_chunk(&caller_frame, &actual) {
                for d in &mut parsed.diagnostics {
                    adjust_span(&mut d.primary_span, pos, len, lines);
                    for r in &mut d.related_spans {
                        adjust_span(r, pos, len, lines);
                    }
                }
            }
        }

        Ok(super::output::assemble(parsed, exit_code, raw))
    }

    fn version(&self) -> String {
        let mut cached = self.version.lock().expect("poisoned");
        if let Some(v) = cached.as_ref() {
            return v.clone();
        }
        let v = Command::new(&self.options.verifier_path)
            .arg("--version")
            .output()
            .ok()
            .and_then(|o| {
                let s = String::from_utf8_lossy(&o.stdout);
                s.lines().next().map(|l| l.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        *cached = Some(v.clone());
        v
    }
}

/// Locates the single inserted chunk that turns `original` into `modified`:
/// (position, byte length, line count).
fn inserted_chunk(original: &str, modified: &str) -> Option<(usize, usize, usize)> {
    if modified.len() <= original.len() {
        return None;
    }
    let ob = original.as_bytes();
    let mb = modified.as_bytes();
    let mut start = 0usize;
    while start < ob.len() && ob[start] == mb[start] {
        start += 1;
    }
    let len = mb.len() - ob.len();
    let chunk = &modified[start..start + len];
    let lines = chunk.bytes().filter(|b| *b == b'\n').count();
    Some((start, len, lines))
}

fn adjust_span(span: &mut super::SpanInfo, pos: usize, len: usize, lines: usize) {
    let (s, e) = span.byte_range;
    if s >= pos + len {
        span.byte_range = (s - len, e - len);
        span.line = span.line.saturating_sub(lines);
    } else if s >= pos {
        // points into the injected chunk itself; collapse to the insertion
        span.byte_range = (pos, pos);
    }
}
