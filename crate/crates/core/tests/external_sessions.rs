//! External engines driven through small shell scripts.

#![cfg(unix)]

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::PathBuf;

use seedfolio_core::gpp::play_game;
use seedfolio_core::{Error, GameEngine, GppSpec, Role};

fn script(dir: &tempfile::TempDir, name: &str, body: &str) -> Vec<String> {
    let path: PathBuf = dir.path().join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}")).unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    vec![path.to_string_lossy().into_owned()]
}

fn builtin() -> GppSpec {
    GppSpec::mcts(1, 20)
}

#[test]
fn garbage_reply_is_a_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = script(
        &dir,
        "garbage.sh",
        "read line; echo ok\nread line; echo 'hello there'\nsleep 1\n",
    );
    let err = play_game(
        &GameEngine::DEFAULT_CONNECT_FOUR,
        &GppSpec::external(1, cmd),
        &builtin(),
    )
    .unwrap_err();
    match err {
        Error::Protocol { line, .. } => assert_eq!(line, "hello there"),
        other => panic!("expected a protocol error, got {other:?}"),
    }
}

#[test]
fn bad_handshake_is_a_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = script(&dir, "nope.sh", "read line; echo nope\nsleep 1\n");
    let err = play_game(
        &GameEngine::DEFAULT_HEX,
        &builtin(),
        &GppSpec::external(2, cmd),
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::Protocol { ref line, .. } if line == "nope"),
        "{err:?}"
    );
}

#[test]
fn exit_mid_game_keeps_the_partial_record() {
    let dir = tempfile::tempdir().unwrap();
    // Plays column 0 twice, then dies.
    let cmd = script(
        &dir,
        "quitter.sh",
        "read line; echo ok\nread line; echo 'move 0'\nread line; echo 'move 0'\nread line\necho 'giving up' >&2\nexit 3\n",
    );
    let err = play_game(
        &GameEngine::DEFAULT_CONNECT_FOUR,
        &GppSpec::external(1, cmd),
        &builtin(),
    )
    .unwrap_err();
    match err {
        Error::EngineFailure { message, partial } => {
            assert!(message.contains("giving up"), "{message}");
            let record = partial.expect("partial record");
            assert_eq!(record.moves.len(), 4);
            assert_eq!(record.moves[0], "0");
            assert_eq!(record.moves[2], "0");
        }
        other => panic!("expected an engine failure, got {other:?}"),
    }
}

#[test]
fn silent_engine_times_out() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = script(
        &dir,
        "sleepy.sh",
        "read line; echo ok\nread line; sleep 5\n",
    );
    let spec = GppSpec::external(1, cmd).with_timeout_ms(300);
    let start = std::time::Instant::now();
    let err = play_game(&GameEngine::DEFAULT_HEX, &spec, &builtin()).unwrap_err();
    assert!(start.elapsed().as_secs_f64() < 4.0);
    match err {
        Error::EngineFailure { message, partial } => {
            assert!(message.contains("300 ms"), "{message}");
            assert_eq!(partial.expect("partial record").moves.len(), 0);
        }
        other => panic!("expected an engine failure, got {other:?}"),
    }
}

#[test]
fn illegal_move_forfeits() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = script(
        &dir,
        "cheat.sh",
        "read line; echo ok\nread line; echo 'move 99'\nread line; echo ok\n",
    );
    let rec = play_game(
        &GameEngine::DEFAULT_CONNECT_FOUR,
        &builtin(),
        &GppSpec::external(4, cmd),
    )
    .unwrap();
    assert_eq!(rec.forfeit, Some(Role::White));
    assert_eq!(rec.black_score, 1.0);
    assert_eq!(rec.moves.len(), 1);
    rec.verify(&GameEngine::DEFAULT_CONNECT_FOUR).unwrap();
}

#[test]
fn missing_program_is_an_engine_failure() {
    let spec = GppSpec::external(1, vec!["/nonexistent/engine".into()]);
    let err = play_game(&GameEngine::DEFAULT_HEX, &spec, &builtin()).unwrap_err();
    assert!(matches!(err, Error::EngineFailure { .. }), "{err:?}");
}
