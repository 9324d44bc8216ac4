use qobs_core::{
    design_algorithm1, design_algorithm2, design_algorithm3, design_classical,
    evaluate_performance, make_cavity_plant, PerformanceReport, QuantumLinearSystem,
};
use rayon::prelude::*;

use crate::scenario::{Algorithm, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub trace: f64,
    pub frobenius: f64,
}

impl From<&PerformanceReport> for Metrics {
    fn from(r: &PerformanceReport) -> Self {
        Metrics {
            trace: r.trace,
            frobenius: r.frobenius,
        }
    }
}

/// Outcome of one designer at one grid point: `None` when the algorithm was
/// not requested, `Some(Err(_))` when the design or its evaluation failed.
pub type Outcome<T> = Option<std::result::Result<T, String>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentMetrics {
    pub metrics: Metrics,
    pub n_v2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alg2Metrics {
    pub metrics: Metrics,
    pub n_v2: usize,
    pub rho_opt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg3Metrics {
    pub metrics: Metrics,
    pub n_v2: usize,
    pub transformed: bool,
    pub failure_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k_n: f64,
    pub alg1: Outcome<CoherentMetrics>,
    pub alg2: Outcome<Alg2Metrics>,
    pub alg3: Outcome<Alg3Metrics>,
    pub classical: Outcome<Metrics>,
}

impl SweepRow {
    /// Errors recorded at this grid point, tagged with the algorithm.
    pub fn errors(&self) -> Vec<(Algorithm, &str)> {
        let mut out = Vec::new();
        if let Some(Err(e)) = &self.alg1 {
            out.push((Algorithm::Alg1, e.as_str()));
        }
        if let Some(Err(e)) = &self.alg2 {
            out.push((Algorithm::Alg2, e.as_str()));
        }
        if let Some(Err(e)) = &self.alg3 {
            out.push((Algorithm::Alg3, e.as_str()));
        }
        if let Some(Err(e)) = &self.classical {
            out.push((Algorithm::Classical, e.as_str()));
        }
        out
    }

    pub fn trace(&self, a: Algorithm) -> Option<f64> {
        match a {
            Algorithm::Alg1 => ok(&self.alg1).map(|m| m.metrics.trace),
            Algorithm::Alg2 => ok(&self.alg2).map(|m| m.metrics.trace),
            Algorithm::Alg3 => ok(&self.alg3).map(|m| m.metrics.trace),
            Algorithm::Classical => ok(&self.classical).map(|m| m.trace),
        }
    }
}

pub(crate) fn ok<T>(o: &Outcome<T>) -> Option<&T> {
    o.as_ref().and_then(|r| r.as_ref().ok())
}

fn run<T>(enabled: bool, f: impl FnOnce() -> qobs_core::Result<T>) -> Outcome<T> {
    enabled.then(|| f().map_err(|e| e.to_string()))
}

fn failed<T>(config: &ScenarioConfig, a: Algorithm, msg: &str) -> Outcome<T> {
    config.runs(a).then(|| Err(msg.to_string()))
}

pub fn sweep_point(config: &ScenarioConfig, k_n: f64) -> SweepRow {
    let plant = match make_cavity_plant(config.kappa1, config.kappa2, k_n) {
        Ok(p) => p,
        Err(e) => {
            let msg = e.to_string();
            return SweepRow {
                k_n,
                alg1: failed(config, Algorithm::Alg1, &msg),
                alg2: failed(config, Algorithm::Alg2, &msg),
                alg3: failed(config, Algorithm::Alg3, &msg),
                classical: failed(config, Algorithm::Classical, &msg),
            };
        }
    };
    evaluate_point(config, &plant, k_n)
}

fn evaluate_point(config: &ScenarioConfig, plant: &QuantumLinearSystem, k_n: f64) -> SweepRow {
    let alg1 = run(config.runs(Algorithm::Alg1), || {
        let obs = design_algorithm1(plant)?;
        let report = evaluate_performance(plant, &obs)?;
        Ok(CoherentMetrics {
            metrics: Metrics::from(&report),
            n_v2: obs.n_v2,
        })
    });
    let alg2 = run(config.runs(Algorithm::Alg2), || {
        let d = design_algorithm2(plant, &config.rho_search())?;
        Ok(Alg2Metrics {
            metrics: Metrics::from(&d.report),
            n_v2: d.observer.n_v2,
            rho_opt: d.rho_opt,
        })
    });
    let alg3 = run(config.runs(Algorithm::Alg3), || {
        let d = design_algorithm3(plant)?;
        let report = evaluate_performance(plant, &d.observer)?;
        Ok(Alg3Metrics {
            metrics: Metrics::from(&report),
            n_v2: d.observer.n_v2,
            transformed: d.fallback_reason.is_none(),
            failure_reason: d.fallback_reason.map(|e| e.to_string()),
        })
    });
    let classical = run(config.runs(Algorithm::Classical), || {
        let obs = design_classical(plant)?;
        Ok(Metrics::from(&evaluate_performance(plant, &obs)?))
    });
    SweepRow {
        k_n,
        alg1,
        alg2,
        alg3,
        classical,
    }
}

/// One row per grid point, in grid order. Points are evaluated in
/// parallel; failures are recorded in the row.
pub fn run_sweep(config: &ScenarioConfig) -> Vec<SweepRow> {
    config
        .kn_grid()
        .par_iter()
        .map(|&k| sweep_point(config, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_point_matches_oracle() {
        let cfg = ScenarioConfig::preset("s1")
            .unwrap()
            .with_kn_grid(vec![0.0])
            .unwrap();
        let rows = run_sweep(&cfg);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].trace(Algorithm::Alg1).unwrap() - 20.0).abs() < 1e-9);
        assert!((rows[0].trace(Algorithm::Classical).unwrap() - 2.0).abs() < 1e-9);
        assert!(rows[0].errors().is_empty());
    }

    #[test]
    fn unrequested_algorithms_are_absent() {
        let cfg = ScenarioConfig::preset("s2")
            .unwrap()
            .with_kn_grid(vec![69.0, 70.0])
            .unwrap()
            .with_algorithms(vec![Algorithm::Alg3]);
        let rows = run_sweep(&cfg);
        assert!(rows
            .iter()
            .all(|r| r.alg1.is_none() && r.alg2.is_none() && r.classical.is_none()));
        let flags: Vec<_> = rows
            .iter()
            .map(|r| ok(&r.alg3).unwrap().transformed)
            .collect();
        assert_eq!(flags, vec![true, false]);
        let fallback = ok(&rows[1].alg3).unwrap();
        assert_eq!(fallback.n_v2, 2);
        assert!(fallback.failure_reason.is_some());
    }
}
