//! Subcommand bodies, kept out of `main` so tests can drive them in-process.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use super::config::{AuditConfig, AuditSource, EnumerateConfig, SimulateConfig};
use super::enumerate::{enumerate, ExactModel};
use super::log::read_log;
use super::simulate::{simulate, simulate_to_log, SimulationSummary};
use super::HarnessError;
use crate::audit::{audit, verify_embedding, AuditReport, CounterexampleKind, EmbeddingVerdict, StateMapper};
use crate::engine::Trajectory;

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            HarnessError::Io(io::Error::new(e.kind(), format!("cannot write {}: {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the log and returns its summary.
pub fn run_simulate(c: &SimulateConfig) -> Result<SimulationSummary, HarnessError> {
    let w = open_out(c.out.as_deref())?;
    simulate_to_log(w, c.spec, c.episodes, c.seed, c.p_accept)
}

pub struct AuditRun {
    pub report: AuditReport,
    /// Present for the embedded mapper.
    pub embedding: Option<EmbeddingVerdict>,
}

impl AuditRun {
    pub fn to_text(&self) -> String {
        let mut s = self.report.to_text();
        if let Some(v) = &self.embedding {
            let _ = writeln!(s, "\n[embedding]");
            match v {
                EmbeddingVerdict::Holds { report } => {
                    let _ = writeln!(s, "verdict = holds");
                    let _ = writeln!(s, "states_tested = {}", report.summary.states_tested);
                    let _ = writeln!(s, "low_power = {}", report.low_power());
                }
                EmbeddingVerdict::CounterexampleState { state, kind } => {
                    let kind = match kind {
                        CounterexampleKind::MultipleHistories => "multiple-histories",
                        CounterexampleKind::Heterogeneous => "heterogeneous",
                    };
                    let _ = writeln!(s, "verdict = counterexample");
                    let _ = writeln!(s, "kind = {kind}");
                    let _ = writeln!(s, "key = {state}");
                }
            }
        }
        s
    }
}

pub fn load_for_audit(source: &AuditSource) -> Result<(Vec<Trajectory>, String), HarnessError> {
    match source {
        AuditSource::Log(path) => {
            let f = File::open(path)
                .map_err(|e| HarnessError::Io(io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display()))))?;
            let (header, trajectories) = read_log(BufReader::new(f))?;
            if !header.policy.is_memoryless() {
                return Err(HarnessError::Refused(
                    "the log was produced by learning agents; their policies change between episodes, so the \
                     pooled transitions are not draws from one process and the audit would be meaningless"
                        .into(),
                ));
            }
            Ok((trajectories, header.policy.describe()))
        }
        AuditSource::Simulate(c) => Ok((
            simulate(c.spec, c.episodes, c.seed, c.p_accept)?,
            super::PolicySpec::Random { p_accept: c.p_accept }.describe(),
        )),
    }
}

pub fn run_audit(c: &AuditConfig) -> Result<AuditRun, HarnessError> {
    let (trajectories, policy) = load_for_audit(&c.source)?;
    let mut report = audit(&trajectories, c.mapper, c.classifier, c.alpha, c.min_samples)?;
    report.policy = Some(policy);
    let embedding = match c.mapper {
        StateMapper::Embedded => Some(verify_embedding(&trajectories, c.alpha, c.min_samples)?),
        StateMapper::Naive => None,
    };
    let run = AuditRun { report, embedding };
    let mut w = open_out(c.out.as_deref())?;
    w.write_all(run.to_text().as_bytes())?;
    w.flush()?;
    Ok(run)
}

pub fn run_enumerate(c: &EnumerateConfig, with_leaves: bool) -> Result<ExactModel, HarnessError> {
    let model = enumerate(&c.spec, c.p_accept, c.max_depth)?;
    model.write_json(open_out(c.out.as_deref())?, with_leaves)?;
    Ok(model)
}
