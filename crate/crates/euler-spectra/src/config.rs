//! Configuration file ingestion (TOML or JSON, chosen by extension).
//!
//! Flow mode:
//! ```toml
//! mode = "flow"
//! p = [2, 3]
//! q = [2, -1]
//! window = 128
//! ```
//!
//! General mode supplies the lambda-linear factors of `b_n` and the `c_n`
//! values on `[-window, window]` (arrays of length `2*window + 1`,
//! treated as zero outside); `unit_rho = true` additionally exposes
//! `rho = 1` so the continued fractions stay defined:
//! ```toml
//! mode = "general"
//! window = 2
//! b_re = [0.0, 0.0, 0.0, 0.0, 0.0]
//! b_im = [0.0, 0.0, 0.0, 0.0, 0.0]
//! c = [0.0, 0.0, 0.0, 0.0, 0.0]
//! unit_rho = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SpectraError;
use crate::flow::{CoefficientSequence, FlowConfig};
use crate::{Result, C64};

pub const DEFAULT_WINDOW: i64 = 128;

/// On-disk problem description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub mode: Mode,
    #[serde(default)]
    pub p: Option<[i64; 2]>,
    #[serde(default)]
    pub q: Option<[i64; 2]>,
    #[serde(default)]
    pub window: Option<i64>,
    #[serde(default)]
    pub b_re: Option<Vec<f64>>,
    #[serde(default)]
    pub b_im: Option<Vec<f64>>,
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    #[serde(default)]
    pub unit_rho: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Flow,
    General,
}

impl ProblemConfig {
    pub fn flow(p: [i64; 2], q: [i64; 2], window: i64) -> Self {
        ProblemConfig {
            mode: Mode::Flow,
            p: Some(p),
            q: Some(q),
            window: Some(window),
            b_re: None,
            b_im: None,
            c: None,
            unit_rho: None,
        }
    }

    /// Builds the coefficient sequence this configuration describes.
    pub fn coefficients(&self) -> Result<CoefficientSequence> {
        let window = self.window.unwrap_or(DEFAULT_WINDOW);
        match self.mode {
            Mode::Flow => {
                let p = self
                    .p
                    .ok_or_else(|| SpectraError::InvalidInput("flow mode requires p".into()))?;
                let q = self
                    .q
                    .ok_or_else(|| SpectraError::InvalidInput("flow mode requires q".into()))?;
                CoefficientSequence::from_flow(FlowConfig::new(p, q)?, window)
            }
            Mode::General => {
                let len = (2 * window + 1) as usize;
                let b_re = self.b_re.clone().unwrap_or_else(|| vec![0.0; len]);
                let b_im = self.b_im.clone().unwrap_or_else(|| vec![0.0; len]);
                let c = self.c.clone().unwrap_or_else(|| vec![0.0; len]);
                if b_re.len() != len || b_im.len() != len || c.len() != len {
                    return Err(SpectraError::InvalidInput(format!(
                        "general mode arrays must have length 2*window+1 = {len}"
                    )));
                }
                let beta: Vec<C64> = b_re
                    .iter()
                    .zip(&b_im)
                    .map(|(&re, &im)| C64::new(re, im))
                    .collect();
                CoefficientSequence::general(beta, c, window, self.unit_rho.unwrap_or(false))
            }
        }
    }
}

/// Parses a config file, dispatching on the `.toml` / `.json` extension.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpectraError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let ext = path
        .extension()
        .and_then(|s| s.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "json" => serde_json::from_str(&text)
            .map_err(|e| SpectraError::InvalidInput(format!("bad JSON config: {e}"))),
        "toml" | "" => toml::from_str(&text)
            .map_err(|e| SpectraError::InvalidInput(format!("bad TOML config: {e}"))),
        other => Err(SpectraError::InvalidInput(format!(
            "unsupported config extension .{other}"
        ))),
    }
}
