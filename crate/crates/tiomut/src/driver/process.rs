//! A SUT as a child process speaking the wire protocol over its
//! standard streams. A dedicated thread watches stdout; stderr is
//! captured verbatim for crash diagnostics.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num::rational::Ratio;
use num::Zero;

use super::exec::{CrashReport, GrantReply, Sut, TimeMode};
use super::wire::{format_time, parse_time, DELAYED_PREFIX, DELAY_PREFIX};

/// Wall-clock patience for a simulated-mode reply; a SUT that computes
/// longer than this is treated as a protocol violation.
const REPLY_PATIENCE: Duration = Duration::from_secs(30);
/// Real-mode polling slice.
const POLL_SLICE: Duration = Duration::from_millis(10);

pub struct ProcessSut {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    stderr: Arc<Mutex<String>>,
    mode: TimeMode,
    exited: Option<Option<i32>>,
}

impl ProcessSut {
    pub fn spawn(command: &[String], mode: TimeMode) -> io::Result<ProcessSut> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty SUT command"))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        let err_stream = child.stderr.take().expect("stderr piped");
        std::thread::spawn(move || {
            for line in BufReader::new(err_stream).lines().map_while(Result::ok) {
                let mut buf = sink.lock().expect("stderr sink");
                buf.push_str(&line);
                buf.push('\n');
            }
        });
        Ok(ProcessSut { child, stdin, lines: rx, stderr, mode, exited: None })
    }

    fn write_line(&mut self, line: &str) -> bool {
        let Some(stdin) = self.stdin.as_mut() else {
            return false;
        };
        let ok = writeln!(stdin, "{line}").and_then(|_| stdin.flush()).is_ok();
        if !ok {
            self.stdin = None;
        }
        ok
    }

    fn note_exit(&mut self) {
        if self.exited.is_none() {
            if let Ok(status) = self.child.wait() {
                self.exited = Some(status.code());
            }
        }
    }

    fn grant_simulated(&mut self, d: Ratio<i64>) -> GrantReply {
        if !self.write_line(&format!("{DELAY_PREFIX}{}", format_time(d))) {
            self.note_exit();
            return GrantReply::Terminated { elapsed: Ratio::zero() };
        }
        let reply = match self.lines.recv_timeout(REPLY_PATIENCE) {
            Ok(l) => l,
            Err(RecvTimeoutError::Disconnected) => {
                self.note_exit();
                return GrantReply::Terminated { elapsed: Ratio::zero() };
            }
            Err(RecvTimeoutError::Timeout) => {
                return GrantReply::Violation("no reply to a delay grant".into());
            }
        };
        let Some(text) = reply.strip_prefix(DELAYED_PREFIX) else {
            return GrantReply::Violation(format!("expected a delay reply, got {reply:?}"));
        };
        let Some(elapsed) = parse_time(text) else {
            return GrantReply::Violation(format!("malformed delay reply {reply:?}"));
        };
        if elapsed > d {
            return GrantReply::Violation(format!("SUT delayed {elapsed} on a grant of {d}"));
        }
        if elapsed == d {
            return GrantReply::Elapsed { elapsed, output: None };
        }
        // Shorter than the grant: exactly one output line is attached.
        match self.lines.recv_timeout(REPLY_PATIENCE) {
            Ok(output) => GrantReply::Elapsed { elapsed, output: Some(output) },
            Err(RecvTimeoutError::Disconnected) => {
                self.note_exit();
                GrantReply::Terminated { elapsed }
            }
            Err(RecvTimeoutError::Timeout) => {
                GrantReply::Violation("missing output after a short delay reply".into())
            }
        }
    }

    fn grant_real(&mut self, d: Ratio<i64>, unit_ms: u64) -> GrantReply {
        let to_units = |dur: Duration| -> Ratio<i64> {
            // Quantized to the nearest half unit: model constants are
            // integers and the driver reasons at half-unit granularity,
            // so finer wall-clock jitter is measurement noise rather
            // than SUT behavior.
            let ms = dur.as_millis() as i64;
            let halves = (2 * ms + unit_ms as i64 / 2) / unit_ms as i64;
            Ratio::new(halves, 2)
        };
        let total_ms = (d * Ratio::from_integer(unit_ms as i64)).ceil().to_integer() as u64;
        let start = Instant::now();
        let deadline = start + Duration::from_millis(total_ms);
        loop {
            let now = Instant::now();
            if now >= deadline {
                return GrantReply::Elapsed { elapsed: d, output: None };
            }
            let slice = POLL_SLICE.min(deadline - now);
            match self.lines.recv_timeout(slice) {
                Ok(line) => {
                    // Timestamp taken when the line is read.
                    let elapsed = to_units(start.elapsed()).min(d);
                    return GrantReply::Elapsed { elapsed, output: Some(line) };
                }
                Err(RecvTimeoutError::Timeout) => continue,
                Err(RecvTimeoutError::Disconnected) => {
                    self.note_exit();
                    let elapsed = to_units(start.elapsed()).min(d);
                    return GrantReply::Terminated { elapsed };
                }
            }
        }
    }
}

impl Sut for ProcessSut {
    fn grant(&mut self, d: Ratio<i64>) -> GrantReply {
        match self.mode {
            TimeMode::Simulated => self.grant_simulated(d),
            TimeMode::Real { unit_ms } => self.grant_real(d, unit_ms),
        }
    }

    fn send_input(&mut self, action: &str) -> bool {
        let ok = self.write_line(action);
        if !ok {
            self.note_exit();
        }
        ok
    }

    fn crash_report(&mut self) -> Option<CrashReport> {
        if self.exited.is_none() {
            // Not observed as terminated; check without blocking.
            if let Ok(Some(status)) = self.child.try_wait() {
                self.exited = Some(status.code());
            }
        }
        match self.exited {
            Some(Some(0)) | None => None,
            Some(code) => Some(CrashReport {
                exit_code: code,
                stderr: self.stderr.lock().expect("stderr sink").clone(),
            }),
        }
    }
}

impl Drop for ProcessSut {
    fn drop(&mut self) {
        // Closing stdin asks a protocol-abiding SUT to exit; kill covers
        // the rest.
        self.stdin = None;
        if self.exited.is_none() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}
