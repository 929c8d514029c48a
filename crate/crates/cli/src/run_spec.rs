use std::path::{Path, PathBuf};

use pressure_core::Error;
use serde::Deserialize;

/// Flags of one run. A `--config` file has the same fields in kebab case;
/// the fields it sets replace the flags.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunSpec {
    pub system: Option<PathBuf>,
    pub quantity: Vec<String>,
    pub set: Vec<String>,
    pub measure: Vec<String>,
    pub m_list: Option<Vec<usize>>,
    pub n_max: Option<usize>,
    pub delta_list: Option<Vec<f64>>,
    pub depth_cap: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
    }

    pub fn overlay(&mut self, other: RunSpec) {
        fn take<T>(dst: &mut Option<T>, src: Option<T>) {
            if src.is_some() {
                *dst = src;
            }
        }
        fn take_list<T>(dst: &mut Vec<T>, src: Vec<T>) {
            if !src.is_empty() {
                *dst = src;
            }
        }
        take(&mut self.system, other.system);
        take_list(&mut self.quantity, other.quantity);
        take_list(&mut self.set, other.set);
        take_list(&mut self.measure, other.measure);
        take(&mut self.m_list, other.m_list);
        take(&mut self.n_max, other.n_max);
        take(&mut self.delta_list, other.delta_list);
        take(&mut self.depth_cap, other.depth_cap);
        take(&mut self.seed, other.seed);
        take(&mut self.tol, other.tol);
        take(&mut self.out, other.out);
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::Input(msg));
        if let Some(m) = &self.m_list {
            if m.is_empty() || m.contains(&0) || m.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("--m-list must be positive and strictly increasing, got {m:?}"));
            }
        }
        if let Some(d) = &self.delta_list {
            if d.is_empty() || d.iter().any(|&x| !(x > 0.0 && x < 1.0)) || d.windows(2).any(|w| w[0] <= w[1]) {
                return bad(format!("--delta-list must lie in (0, 1) and strictly decrease, got {d:?}"));
            }
        }
        if let Some(n) = self.n_max {
            if n < 4 {
                return bad(format!("--n-max must be at least 4, got {n}"));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("--tol must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_fields_replace_flags() {
        let mut flags = RunSpec { n_max: Some(16), seed: Some(1), quantity: vec!["bowen".into()], ..RunSpec::default() };
        let config: RunSpec = serde_json::from_str(r#"{ "seed": 9, "m-list": [1, 2] }"#).unwrap();
        flags.overlay(config);
        assert_eq!(flags.seed, Some(9));
        assert_eq!(flags.n_max, Some(16));
        assert_eq!(flags.m_list, Some(vec![1, 2]));
        assert_eq!(flags.quantity, vec!["bowen".to_string()]);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunSpec>(r#"{ "seeds": 9 }"#).is_err());
    }

    #[test]
    fn schedules_must_increase() {
        let spec = RunSpec { m_list: Some(vec![2, 1]), ..RunSpec::default() };
        assert!(spec.validate().is_err());
        let spec = RunSpec { delta_list: Some(vec![0.25, 0.5]), ..RunSpec::default() };
        assert!(spec.validate().is_err());
        let spec = RunSpec { tol: Some(0.0), ..RunSpec::default() };
        assert!(spec.validate().is_err());
    }
}
