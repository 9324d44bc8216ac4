use std::fmt;
use std::str::FromStr;

use qobs_core::RhoSearch;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
    Classical,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Alg1,
        Algorithm::Alg2,
        Algorithm::Alg3,
        Algorithm::Classical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Alg3 => "alg3",
            Algorithm::Classical => "classical",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!("unknown algorithm `{s}` (expected alg1, alg2, alg3 or classical)")
            })
    }
}

/// `count` points spaced evenly in log10 between `lo` and `hi`, both ends
/// included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Sorted, duplicate-free copy of `values`.
pub fn normalize_grid(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// 60 log-spaced intensities over `[0.01, 1e4]` plus the integers around
/// the known transformation boundaries.
pub fn default_kn_grid() -> Vec<f64> {
    let mut g = log_grid(0.01, 1e4, 60);
    g.extend([69.0, 70.0, 909.0, 910.0]);
    normalize_grid(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub kappa1: f64,
    pub kappa2: f64,
    kn_grid: Vec<f64>,
    pub rho_candidates: Vec<f64>,
    pub rho_refine_iterations: usize,
    pub algorithms: Vec<Algorithm>,
}

impl ScenarioConfig {
    pub fn new(name: &str, kappa1: f64, kappa2: f64, kn_grid: Vec<f64>) -> Result<Self> {
        if !(kappa1 > 0.0 && kappa2 > 0.0 && kappa1.is_finite() && kappa2.is_finite()) {
            return Err(Error::Usage(format!(
                "coupling rates must be positive and finite, got ({kappa1}, {kappa2})"
            )));
        }
        if kn_grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::Usage(
                "k_n values must be finite and non-negative".into(),
            ));
        }
        if kn_grid.is_empty() {
            return Err(Error::Usage("k_n grid is empty".into()));
        }
        let rho = RhoSearch::default();
        Ok(ScenarioConfig {
            name: name.to_string(),
            kappa1,
            kappa2,
            kn_grid: normalize_grid(kn_grid),
            rho_candidates: rho.candidates,
            rho_refine_iterations: rho.refine_iterations,
            algorithms: Algorithm::ALL.to_vec(),
        })
    }

    /// Presets `s1`, `s2`, `s3` with the default grid.
    pub fn preset(name: &str) -> Result<Self> {
        let (k1, k2) = match name {
            "s1" => (0.1, 0.1),
            "s2" => (0.5, 0.01),
            "s3" => (0.8, 0.01),
            other => return Err(Error::Usage(format!("unknown scenario `{other}`"))),
        };
        Self::new(name, k1, k2, default_kn_grid())
    }

    pub fn kn_grid(&self) -> &[f64] {
        &self.kn_grid
    }

    pub fn with_kn_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        let fresh = Self::new(&self.name, self.kappa1, self.kappa2, grid)?;
        self.kn_grid = fresh.kn_grid;
        Ok(self)
    }

    pub fn with_algorithms(mut self, mut algorithms: Vec<Algorithm>) -> Self {
        algorithms.sort();
        algorithms.dedup();
        self.algorithms = algorithms;
        self
    }

    pub fn rho_search(&self) -> RhoSearch {
        RhoSearch {
            candidates: self.rho_candidates.clone(),
            refine_iterations: self.rho_refine_iterations,
        }
    }

    pub fn runs(&self, a: Algorithm) -> bool {
        self.algorithms.contains(&a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_the_mirror_settings() {
        let s: Vec<_> = ["s1", "s2", "s3"]
            .iter()
            .map(|n| {
                let c = ScenarioConfig::preset(n).unwrap();
                (c.kappa1, c.kappa2)
            })
            .collect();
        assert_eq!(s, vec![(0.1, 0.1), (0.5, 0.01), (0.8, 0.01)]);
        assert!(ScenarioConfig::preset("s4").is_err());
    }

    #[test]
    fn default_grid_is_sorted_and_unique() {
        let g = default_kn_grid();
        assert_eq!(g.len(), 64);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], 0.01);
        assert_eq!(*g.last().unwrap(), 1e4);
        for k in [69.0, 70.0, 909.0, 910.0] {
            assert!(g.contains(&k));
        }
    }

    #[test]
    fn grid_is_normalized_on_construction() {
        let c = ScenarioConfig::new("x", 1.0, 1.0, vec![3.0, 0.0, 3.0, 1.0]).unwrap();
        assert_eq!(c.kn_grid(), &[0.0, 1.0, 3.0]);
        assert!(ScenarioConfig::new("x", 1.0, 1.0, vec![-1.0]).is_err());
        assert!(ScenarioConfig::new("x", 0.0, 1.0, vec![1.0]).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("alg4".parse::<Algorithm>().is_err());
    }
}
