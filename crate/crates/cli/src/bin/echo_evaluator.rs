//! Test double for the evaluator protocol: scores candidate `id` as
//! `id mod 7` without reading its dataset.
//!
//! `--commit-log <path>` appends `iter candidate` per acknowledged commit;
//! `--fail-after <k>` exits with status 1 on the `k+1`-th evaluate request.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use shapevo::fitness::protocol::{Request, Response};

fn main() {
    let mut commit_log = None;
    let mut fail_after = None;
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--commit-log" => commit_log = args.next(),
            "--fail-after" => fail_after = args.next().and_then(|v| v.parse::<usize>().ok()),
            other => {
                eprintln!("echo-evaluator: unknown argument {other}");
                std::process::exit(2);
            }
        }
    }

    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    let mut seen: HashSet<String> = HashSet::new();
    let mut evaluated = 0usize;
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Err(e) => Response::Error {
                candidate: None,
                message: format!("bad request: {e}"),
            },
            Ok(Request::Hello { .. }) => Response::Ready,
            Ok(Request::Evaluate { candidate, .. }) => {
                if fail_after.is_some_and(|k| evaluated >= k) {
                    std::process::exit(1);
                }
                evaluated += 1;
                match candidate.parse::<u64>() {
                    Ok(id) => {
                        seen.insert(candidate.clone());
                        Response::Fitness {
                            candidate,
                            fitness: (id % 7) as f64,
                            aux: serde_json::json!({"echo": true}),
                        }
                    }
                    Err(_) => Response::Error {
                        candidate: Some(candidate),
                        message: "candidate id is not an integer".into(),
                    },
                }
            }
            Ok(Request::Commit { iter, candidate }) => {
                if seen.contains(&candidate) {
                    if let Some(path) = &commit_log {
                        let mut f = std::fs::OpenOptions::new()
                            .create(true)
                            .append(true)
                            .open(path)
                            .expect("commit log is writable");
                        writeln!(f, "{iter} {candidate}").expect("commit log is writable");
                    }
                    Response::Committed { candidate }
                } else {
                    Response::Error {
                        candidate: Some(candidate),
                        message: "unknown candidate".into(),
                    }
                }
            }
            Ok(Request::Shutdown) => break,
        };
        writeln!(stdout, "{}", response.to_line()).expect("stdout is open");
        stdout.flush().expect("stdout is open");
    }
}
