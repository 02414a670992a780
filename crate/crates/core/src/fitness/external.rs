use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::json;

use super::protocol::{Request, Response, PROTOCOL_VERSION};
use super::{write_validation_set, EvaluatorError, FitnessEvaluator, Score};
use crate::evolution::{Individual, IndividualId};
use crate::render::{write_shape_dataset, RenderError};
use crate::rng::derive_seed;

const RENDER_TAG: u64 = 0x7265_6e64;

#[derive(Clone, Debug)]
pub struct ExternalOptions {
    /// Candidate datasets go to `work_dir/datasets/<id>`.
    pub work_dir: PathBuf,
    pub views_per_shape: usize,
    pub image_size: usize,
    pub mesh_resolution: usize,
    pub seed: u64,
    /// Longest wait for any single response.
    pub timeout: Duration,
    /// Existing validation directory; when `None` a synthetic held-out set
    /// is rendered to `work_dir/validation`.
    pub validation: Option<PathBuf>,
    pub validation_shapes: usize,
}

impl ExternalOptions {
    pub fn new(work_dir: impl Into<PathBuf>) -> Self {
        ExternalOptions {
            work_dir: work_dir.into(),
            views_per_shape: 8,
            image_size: crate::render::DEFAULT_IMAGE_SIZE,
            mesh_resolution: crate::geometry::DEFAULT_MESH_RESOLUTION,
            seed: 0,
            timeout: Duration::from_secs(600),
            validation: None,
            validation_shapes: 10,
        }
    }
}

/// Client side of the evaluator protocol, talking to a subprocess started
/// with `sh -c <command>`. Candidates whose isosurface is empty score 0
/// without a request.
pub struct ExternalEvaluator {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    options: ExternalOptions,
    commits: Vec<(u64, IndividualId)>,
}

impl ExternalEvaluator {
    /// Starts the subprocess and completes the hello/ready handshake.
    pub fn spawn(command: &str, options: ExternalOptions) -> Result<Self, EvaluatorError> {
        std::fs::create_dir_all(options.work_dir.join("datasets"))?;
        let validation = match &options.validation {
            Some(dir) => dir.clone(),
            None => {
                let dir = options.work_dir.join("validation");
                write_validation_set(
                    &dir,
                    derive_seed(options.seed, &[0x686f_6c64]),
                    options.validation_shapes,
                    options.views_per_shape,
                    options.image_size,
                    options.mesh_resolution,
                )?;
                dir
            }
        };
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut me = ExternalEvaluator {
            child,
            stdin,
            lines: rx,
            options,
            commits: Vec::new(),
        };
        let config = json!({
            "work_dir": me.options.work_dir,
            "validation": validation,
            "views_per_shape": me.options.views_per_shape,
            "image_size": me.options.image_size,
            "seed": me.options.seed,
        });
        me.send(&Request::Hello {
            protocol: PROTOCOL_VERSION,
            config,
        })?;
        match me.receive("ready")? {
            Response::Ready => Ok(me),
            other => Err(unexpected("ready", &other)),
        }
    }

    /// `(iteration, id)` of every acknowledged commit, in order.
    pub fn commits(&self) -> &[(u64, IndividualId)] {
        &self.commits
    }

    fn send(&mut self, request: &Request) -> Result<(), EvaluatorError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| EvaluatorError::Exited("stdin already closed".into()))?;
        let line = request.to_line();
        log::debug!("-> {line}");
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| match self.child.try_wait() {
                Ok(Some(status)) => EvaluatorError::Exited(status.to_string()),
                _ => EvaluatorError::Io(e),
            })
    }

    fn receive(&mut self, waiting_for: &str) -> Result<Response, EvaluatorError> {
        let deadline = Instant::now() + self.options.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(left) {
                Ok(line) => line?,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(EvaluatorError::Timeout(
                        self.options.timeout,
                        waiting_for.to_string(),
                    ))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = self.child.wait()?;
                    return Err(EvaluatorError::Exited(format!(
                        "{status} while waiting for {waiting_for}"
                    )));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            log::debug!("<- {line}");
            return serde_json::from_str(&line)
                .map_err(|e| EvaluatorError::Malformed(line, e.to_string()));
        }
    }
}

/// Renders the candidate's dataset; `None` when its isosurface is empty.
fn render(o: &ExternalOptions, candidate: &Individual) -> Result<Option<PathBuf>, RenderError> {
    let dir = o.work_dir.join("datasets").join(candidate.id.to_string());
    let seed = derive_seed(o.seed, &[RENDER_TAG, candidate.id]);
    match write_shape_dataset(
        &candidate.genotype,
        &dir,
        o.views_per_shape,
        seed,
        o.image_size,
        o.mesh_resolution,
    ) {
        Ok(_) => Ok(Some(dir)),
        Err(RenderError::EmptyShape) => Ok(None),
        Err(e) => Err(e),
    }
}

fn unexpected(expected: &str, got: &Response) -> EvaluatorError {
    match got {
        Response::Error { message, .. } => EvaluatorError::Remote(message.clone()),
        other => EvaluatorError::Protocol(format!("expected {expected}, got {}", other.to_line())),
    }
}

impl FitnessEvaluator for ExternalEvaluator {
    fn evaluate(
        &mut self,
        candidates: &[&Individual],
        iteration: u64,
    ) -> Result<Vec<Score>, EvaluatorError> {
        let options = &self.options;
        let datasets = candidates
            .par_iter()
            .map(|c| render(options, c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut scores: Vec<Option<Score>> = vec![None; candidates.len()];
        let mut pending: HashMap<String, usize> = HashMap::new();
        for (i, (c, dataset)) in candidates.iter().zip(&datasets).enumerate() {
            match dataset {
                None => {
                    scores[i] = Some(Score {
                        id: c.id,
                        fitness: 0.0,
                        aux: json!({"empty_shape": true}),
                    })
                }
                Some(dir) => {
                    pending.insert(c.id.to_string(), i);
                    self.send(&Request::Evaluate {
                        iter: iteration,
                        candidate: c.id.to_string(),
                        dataset: dir.to_string_lossy().into_owned(),
                    })?;
                }
            }
        }
        while !pending.is_empty() {
            match self.receive("fitness")? {
                Response::Fitness {
                    candidate,
                    fitness,
                    aux,
                } => {
                    let i = pending.remove(&candidate).ok_or_else(|| {
                        EvaluatorError::Protocol(format!(
                            "fitness for unexpected candidate {candidate:?}"
                        ))
                    })?;
                    if !(fitness.is_finite() && fitness >= 0.0) {
                        return Err(EvaluatorError::Protocol(format!(
                            "candidate {candidate} got fitness {fitness}"
                        )));
                    }
                    scores[i] = Some(Score {
                        id: candidates[i].id,
                        fitness,
                        aux,
                    });
                }
                other => return Err(unexpected("fitness", &other)),
            }
        }
        Ok(scores
            .into_iter()
            .map(|s| s.expect("every candidate answered"))
            .collect())
    }

    fn commit(&mut self, id: IndividualId, iteration: u64) -> Result<(), EvaluatorError> {
        let candidate = id.to_string();
        self.send(&Request::Commit {
            iter: iteration,
            candidate: candidate.clone(),
        })?;
        match self.receive("committed")? {
            Response::Committed { candidate: c } if c == candidate => {
                self.commits.push((iteration, id));
                Ok(())
            }
            other => Err(unexpected(&format!("committed for {candidate}"), &other)),
        }
    }

    fn finish(&mut self) -> Result<(), EvaluatorError> {
        self.send(&Request::Shutdown)?;
        self.stdin = None;
        let deadline = Instant::now() + self.options.timeout;
        loop {
            if let Some(status) = self.child.try_wait()? {
                return if status.success() {
                    Ok(())
                } else {
                    Err(EvaluatorError::Exited(format!("{status} after shutdown")))
                };
            }
            if Instant::now() >= deadline {
                self.child.kill()?;
                return Err(EvaluatorError::Timeout(
                    self.options.timeout,
                    "exit after shutdown".into(),
                ));
            }
            std::thread::sleep(Duration::from_millis(10));
        }
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        self.stdin = None;
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}
