use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{DssError, Result};

/// Reads one request token per line, ignoring blank lines. Tokens become
/// dense ids in order of first appearance.
pub fn parse_trace(text: &str) -> Vec<u64> {
    let mut ids: HashMap<&str, u64> = HashMap::new();
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|tok| {
            let next = ids.len() as u64;
            *ids.entry(tok).or_insert(next)
        })
        .collect()
}

pub fn load_trace(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| DssError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(parse_trace(&text))
}

/// Parameters of a synthetic trace with Zipf item popularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfTrace {
    pub requests: usize,
    pub items: u64,
    pub skew: f64,
}

impl Default for ZipfTrace {
    fn default() -> Self {
        Self {
            requests: 100_000,
            items: 50_000,
            skew: 1.0,
        }
    }
}

impl ZipfTrace {
    /// Item ids are popularity ranks starting at 0.
    pub fn generate(&self, seed: u64) -> Result<Vec<u64>> {
        let zipf = Zipf::new(self.items as f64, self.skew)
            .map_err(|e| DssError::Config(format!("zipf trace: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..self.requests)
            .map(|_| zipf.sample(&mut rng) as u64 - 1)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_interned() {
        let t = parse_trace("a\n\nb\n  a \nc\n\n");
        assert_eq!(t, vec![0, 1, 0, 2]);
        assert!(parse_trace("\n\n").is_empty());
    }

    #[test]
    fn zipf_rank_frequencies() {
        let spec = ZipfTrace {
            requests: 200_000,
            items: 1000,
            skew: 1.0,
        };
        let t = spec.generate(3).unwrap();
        assert_eq!(t, spec.generate(3).unwrap());
        assert!(t.iter().all(|&x| x < 1000));
        let count = |r| t.iter().filter(|&&x| x == r).count() as f64;
        // rank 1 is requested twice as often as rank 2
        let ratio = count(0) / count(1);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
        let harmonic: f64 = (1..=1000).map(|i| 1.0 / i as f64).sum();
        let top = count(0) / 200_000.0;
        assert!((top - 1.0 / harmonic).abs() < 0.01, "{top}");
    }

    #[test]
    fn rejects_bad_skew() {
        let spec = ZipfTrace {
            skew: -1.0,
            ..ZipfTrace::default()
        };
        assert!(spec.generate(0).is_err());
    }
}
