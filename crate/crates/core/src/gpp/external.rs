//! Line protocol for engines running in a child process.
//!
//! UTF-8, LF-terminated, space-separated tokens on stdin/stdout:
//!
//! ```text
//! -> init <game-name> <black|white> <seed>    <- ok
//! -> opponent <move|none>                     <- move <move>
//! -> result <0|0.5|1>                         <- ok
//! ```
//!
//! `opponent` carries the opponent's previous move (`none` before Black's
//! first move); `result` carries the receiving engine's own score and ends
//! the session.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use super::engine::{GameEngine, Move};
use super::mcts::{choose_move, MctsParams};
use super::GppSpec;
use crate::error::{Error, Result};
use crate::portfolio::Role;

pub struct ExternalSession {
    engine: GameEngine,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    stderr: Arc<Mutex<String>>,
    timeout: Duration,
    program: String,
}

fn failure(message: String) -> Error {
    Error::EngineFailure {
        message,
        partial: None,
    }
}

impl ExternalSession {
    /// Spawns the spec's command and completes the `init` handshake.
    pub fn start(engine: &GameEngine, spec: &GppSpec, role: Role) -> Result<Self> {
        let argv = spec
            .external_command
            .as_deref()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::InvalidConfig("external agent has no command".into()))?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| failure(format!("cannot spawn {:?}: {e}", argv[0])))?;

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let stderr_buf = Arc::new(Mutex::new(String::new()));
        let mut stderr = child.stderr.take().expect("piped stderr");
        let sink = Arc::clone(&stderr_buf);
        thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            sink.lock().expect("stderr buffer").push_str(&s);
        });

        let stdin = child.stdin.take();
        let mut session = Self {
            engine: *engine,
            child,
            stdin,
            lines: rx,
            stderr: stderr_buf,
            timeout: Duration::from_millis(spec.move_timeout_ms),
            program: argv[0].clone(),
        };
        session.send(&format!(
            "init {} {} {}",
            engine.name(),
            role.name(),
            spec.seed
        ))?;
        session.expect_ok()?;
        Ok(session)
    }

    fn send(&mut self, line: &str) -> Result<()> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(failure("session already closed".into()));
        };
        let res = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        if let Err(e) = res {
            return Err(self.dead(format!("write failed: {e}")));
        }
        Ok(())
    }

    fn recv(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line.trim_end_matches('\r').to_owned()),
            Ok(Err(e)) => Err(self.dead(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                let _ = self.child.wait();
                Err(failure(format!(
                    "{} did not answer within {} ms",
                    self.program,
                    self.timeout.as_millis()
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(self.dead("process closed its output".into()))
            }
        }
    }

    /// Builds an engine-failure error with exit status and captured stderr.
    fn dead(&mut self, what: String) -> Error {
        self.stdin = None;
        let status = match self.child.wait_timeout_ms(500) {
            Some(s) => format!("exit status {s}"),
            None => {
                let _ = self.child.kill();
                let _ = self.child.wait();
                "killed".to_owned()
            }
        };
        // Give the stderr reader a moment to drain.
        thread::sleep(Duration::from_millis(20));
        let stderr = self
            .stderr
            .lock()
            .map(|s| s.trim().to_owned())
            .unwrap_or_default();
        failure(format!(
            "{}: {what}; {status}; stderr: {stderr:?}",
            self.program
        ))
    }

    fn expect_ok(&mut self) -> Result<()> {
        let line = self.recv()?;
        if line.trim() != "ok" {
            return Err(Error::Protocol {
                message: "expected `ok`".into(),
                line,
            });
        }
        Ok(())
    }

    /// Reports the opponent's last move and returns the engine's move token.
    pub fn request_move(&mut self, opponent: Option<Move>) -> Result<String> {
        let tok = opponent.map_or_else(|| "none".to_owned(), |m| self.engine.format_move(m));
        self.send(&format!("opponent {tok}"))?;
        let line = self.recv()?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some("move"), Some(mv), None) => Ok(mv.to_owned()),
            _ => Err(Error::Protocol {
                message: "expected `move <move>`".into(),
                line,
            }),
        }
    }

    /// Sends the final score and waits for the closing `ok`.
    pub fn finish(&mut self, own_score: f64) -> Result<()> {
        self.send(&format!("result {}", format_score(own_score)))?;
        self.expect_ok()?;
        self.stdin = None;
        if self.child.wait_timeout_ms(1000).is_none() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
        Ok(())
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        self.stdin = None;
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

trait WaitTimeout {
    fn wait_timeout_ms(&mut self, ms: u64) -> Option<std::process::ExitStatus>;
}

impl WaitTimeout for Child {
    fn wait_timeout_ms(&mut self, ms: u64) -> Option<std::process::ExitStatus> {
        let step = 10;
        for _ in 0..=ms / step {
            if let Ok(Some(s)) = self.try_wait() {
                return Some(s);
            }
            thread::sleep(Duration::from_millis(step));
        }
        None
    }
}

pub fn format_score(x: f64) -> &'static str {
    if x >= 1.0 {
        "1"
    } else if x <= 0.0 {
        "0"
    } else {
        "0.5"
    }
}

/// Reference engine: answers the line protocol with the built-in MCTS agent.
///
/// The seed from `init` keys the agent, so a served engine plays exactly
/// the moves the in-process agent with the same spec would.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W, simulations: u32) -> Result<()> {
    let mut game: Option<(GameEngine, super::BoardState, MctsParams)> = None;
    let protocol = |msg: &str, line: &str| Error::Protocol {
        message: msg.into(),
        line: line.into(),
    };
    for line in input.lines() {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["init", name, role, seed] => {
                let engine: GameEngine = name.parse()?;
                let _: Role = role.parse()?;
                let seed: u64 = seed.parse().map_err(|_| protocol("bad seed", &line))?;
                let spec = GppSpec::mcts(seed, simulations);
                game = Some((engine, engine.initial_state(), spec.mcts_params()));
                writeln!(output, "ok")?;
            }
            ["opponent", mv] => {
                let (engine, state, params) = game
                    .as_mut()
                    .ok_or_else(|| protocol("opponent before init", &line))?;
                if *mv != "none" {
                    let m = engine.parse_move(mv)?;
                    engine.apply_in_place(state, m)?;
                }
                let reply = choose_move(engine, state, params, state.plies() as u64)?;
                engine.apply_in_place(state, reply)?;
                writeln!(output, "move {}", engine.format_move(reply))?;
            }
            ["result", _] => {
                writeln!(output, "ok")?;
                output.flush()?;
                return Ok(());
            }
            _ => return Err(protocol("unknown command", &line)),
        }
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serve_scripted_session() {
        let input = "init hex3 black 5\nopponent none\nopponent 2,2\nresult 1\n";
        let mut out = Vec::new();
        serve(input.as_bytes(), &mut out, 30).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ok");
        assert!(lines[1].starts_with("move "));
        assert!(lines[2].starts_with("move "));
        assert_eq!(lines[3], "ok");
    }

    #[test]
    fn serve_rejects_unknown_commands() {
        let mut out = Vec::new();
        let err = serve("hello\n".as_bytes(), &mut out, 10).unwrap_err();
        assert!(matches!(err, Error::Protocol { .. }));
        let err = serve("opponent none\n".as_bytes(), &mut out, 10).unwrap_err();
        assert!(matches!(err, Error::Protocol { .. }));
    }

    #[test]
    fn score_tokens() {
        assert_eq!(format_score(1.0), "1");
        assert_eq!(format_score(0.0), "0");
        assert_eq!(format_score(0.5), "0.5");
    }
}
