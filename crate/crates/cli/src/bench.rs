//! Per-unit latency measurement.

use std::fmt;
use std::time::Instant;

use ntccrt::dsl::ModelAst;
use ntccrt::engine::{Engine, EngineConfig, EngineError, Trace};
use ntccrt::events::EventStream;
use serde::Serialize;

/// Mean latency per time-unit that keeps a session interactive.
pub const LATENCY_BUDGET_MS: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchStats {
    pub units: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub mean_processes: f64,
    pub max_processes: usize,
    #[serde(skip)]
    pub latencies_ms: Vec<f64>,
    #[serde(skip)]
    pub processes: Vec<usize>,
}

impl BenchStats {
    pub fn from_samples(latencies_ms: Vec<f64>, processes: Vec<usize>) -> Self {
        let n = latencies_ms.len();
        let mut sorted = latencies_ms.clone();
        sorted.sort_by(f64::total_cmp);
        // nearest-rank percentile
        let pct = |p: f64| {
            if n == 0 {
                return 0.0;
            }
            let rank = ((p / 100.0) * n as f64).ceil().max(1.0) as usize;
            sorted[rank.min(n) - 1]
        };
        let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        let procs: Vec<f64> = processes.iter().map(|&p| p as f64).collect();
        BenchStats {
            units: n,
            mean_ms: mean(&latencies_ms),
            p50_ms: pct(50.0),
            p95_ms: pct(95.0),
            max_ms: sorted.last().copied().unwrap_or(0.0),
            mean_processes: mean(&procs),
            max_processes: processes.iter().copied().max().unwrap_or(0),
            latencies_ms,
            processes,
        }
    }

    pub fn within_budget(&self) -> bool {
        self.mean_ms < LATENCY_BUDGET_MS
    }
}

impl fmt::Display for BenchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "units      {}", self.units)?;
        writeln!(f, "mean       {:.3} ms", self.mean_ms)?;
        writeln!(f, "p50        {:.3} ms", self.p50_ms)?;
        writeln!(f, "p95        {:.3} ms", self.p95_ms)?;
        writeln!(f, "max        {:.3} ms", self.max_ms)?;
        writeln!(f, "processes  {:.1} mean, {} max", self.mean_processes, self.max_processes)
    }
}

/// Runs like [`ntccrt::engine::run`], timing each unit. A failed unit ends
/// the run with its error.
pub fn bench(
    model: &ModelAst,
    events: &EventStream,
    units: u64,
    config: EngineConfig,
) -> Result<(BenchStats, Trace), EngineError> {
    let mut engine = Engine::new(model, config)?;
    let mut trace = Trace::default();
    let mut latencies = Vec::with_capacity(units as usize);
    let mut processes = Vec::with_capacity(units as usize);
    for u in 1..=units {
        let tells = events.tells(u);
        let start = Instant::now();
        let rec = engine.run_time_unit(tells)?;
        latencies.push(start.elapsed().as_secs_f64() * 1000.0);
        processes.push(rec.processes);
        trace.records.push(rec);
    }
    Ok((BenchStats::from_samples(latencies, processes), trace))
}
