//! Training runs: learning curves and Q-table exports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::TrainConfig;
use super::log::{write_log, LogHeader};
use super::{HarnessError, PolicySpec};
use crate::agents::{run_learning, EpisodeStats, LearningOutcome};

/// Episodes aggregated into one row of a learning curve.
pub const BLOCK: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    /// Episodes completed at the end of the block.
    pub episode: u64,
    pub mean_reward: f64,
    pub mean_rounds: f64,
    pub proposals: u64,
    pub repeat_proposals: u64,
}

impl CurveRow {
    pub fn repeat_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.repeat_proposals as f64 / self.proposals as f64
        }
    }
}

pub fn learning_curve(stats: &[EpisodeStats], block: usize) -> Vec<CurveRow> {
    stats
        .chunks(block.max(1))
        .map(|chunk| {
            let k = chunk.len() as f64;
            CurveRow {
                episode: chunk.last().map_or(0, |s| s.episode + 1),
                mean_reward: chunk.iter().map(|s| s.mean_reward).sum::<f64>() / k,
                mean_rounds: chunk.iter().map(|s| s.rounds as f64).sum::<f64>() / k,
                proposals: chunk.iter().map(|s| s.proposals as u64).sum(),
                repeat_proposals: chunk.iter().map(|s| s.repeat_proposals as u64).sum(),
            }
        })
        .collect()
}

pub fn write_curve<W: Write>(mut w: W, rows: &[CurveRow]) -> std::io::Result<()> {
    writeln!(w, "episode,mean_reward,mean_rounds,repeat_rate")?;
    for r in rows {
        writeln!(w, "{},{:.6},{:.6},{:.6}", r.episode, r.mean_reward, r.mean_rounds, r.repeat_rate())?;
    }
    w.flush()
}

/// Repeat proposals and proposals over the last `window` episodes.
pub fn tail_repeat_counts(stats: &[EpisodeStats], window: usize) -> (u64, u64) {
    let tail = &stats[stats.len().saturating_sub(window)..];
    (
        tail.iter().map(|s| s.repeat_proposals as u64).sum(),
        tail.iter().map(|s| s.proposals as u64).sum(),
    )
}

#[derive(Debug)]
pub struct TrainResult {
    pub learned: LearningOutcome,
    pub baseline: Option<LearningOutcome>,
    pub files: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn train(config: &TrainConfig) -> Result<TrainResult, HarnessError> {
    config.check_size()?;
    let mut learning = config.learning.clone();
    learning.record_trajectories = config.log.is_some();
    let learned = run_learning(&learning)?;
    let baseline = if config.baseline { Some(run_learning(&config.learning.random_baseline())?) } else { None };

    fs::create_dir_all(&config.out)?;
    let mut files = Vec::new();
    let curve = config.out.join("learning_curve.csv");
    write_curve(create(&curve)?, &learning_curve(&learned.stats, BLOCK))?;
    files.push(curve);
    if let Some(b) = &baseline {
        let path = config.out.join("baseline_curve.csv");
        write_curve(create(&path)?, &learning_curve(&b.stats, BLOCK))?;
        files.push(path);
    }
    for (i, table) in learned.tables.iter().enumerate() {
        let path = config.out.join(format!("qtable_agent{i}.txt"));
        table.write_export(create(&path)?)?;
        files.push(path);
    }
    if let Some(path) = &config.log {
        let header = LogHeader::new(&learning.spec, learning.episodes, learning.seed, PolicySpec::of_learning(&learning));
        write_log(create(path)?, &header, &learned.trajectories)?;
        files.push(path.clone());
    }
    Ok(TrainResult { learned, baseline, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::LearningConfig;
    use crate::engine::TerminationReason;

    fn stat(episode: u64, rounds: u32, reward: f64, proposals: u32, repeats: u32) -> EpisodeStats {
        EpisodeStats {
            episode,
            rounds,
            termination: TerminationReason::Exhausted,
            mean_reward: reward,
            proposals,
            repeat_proposals: repeats,
            repeat_opportunities: 0,
        }
    }

    #[test]
    fn curve_blocks_and_format() {
        let stats = vec![stat(0, 2, 0.5, 2, 1), stat(1, 4, 1.0, 4, 0), stat(2, 1, 0.0, 1, 1)];
        let rows = learning_curve(&stats, 2);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].episode, 2);
        assert_eq!(rows[0].repeat_rate(), 1.0 / 6.0);
        let mut buf = Vec::new();
        write_curve(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "episode,mean_reward,mean_rounds,repeat_rate\n2,0.750000,3.000000,0.166667\n3,0.000000,1.000000,1.000000\n"
        );
        assert_eq!(tail_repeat_counts(&stats, 2), (1, 5));
    }

    #[test]
    fn refuses_seven_agents() {
        let mut learning = LearningConfig::new(3, 1, 0).unwrap();
        learning.spec = crate::engine::GameSpec::new(7, learning.spec.regime, learning.spec.eligibility).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let c = TrainConfig { learning, baseline: false, out: dir.path().into(), log: None };
        assert!(matches!(train(&c), Err(HarnessError::Refused(_))));
    }

    #[test]
    fn writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let learning = LearningConfig::new(2, 1500, 3).unwrap();
        let log = dir.path().join("train.jsonl");
        let c = TrainConfig { learning, baseline: true, out: dir.path().join("out"), log: Some(log.clone()) };
        let r = train(&c).unwrap();
        assert_eq!(r.files.len(), 5);
        let csv = fs::read_to_string(dir.path().join("out/learning_curve.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        let (header, trajs) = super::super::read_log(std::io::BufReader::new(File::open(log).unwrap())).unwrap();
        assert!(!header.policy.is_memoryless());
        assert_eq!(trajs.len(), 1500);
    }
}
