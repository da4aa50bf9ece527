use std::path::Path;

use serde::Deserialize;

use wikigame_core::wiki_sim::{leveled_efforts, ARTICLE_PAGES};
use wikigame_core::EffortProfile;

/// Reads effort values: one per line or comma separated. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_betas(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| format!("line {}: {field:?} is not a number", lineno + 1))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(format!(
                    "line {}: effort must be positive, got {field}",
                    lineno + 1
                ));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("no effort values found".into());
    }
    Ok(out)
}

pub fn read_betas(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_betas(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Simulation config, e.g.
///
/// ```toml
/// levels = [1, 2, 3, 4, 5]
///
/// [[page]]
/// name = "aikido"
/// editors = 62
/// edits = 72
///
/// [[page]]
/// name = "small"
/// editors = 3
/// edits = 12
/// betas = [1.0, 1.5, 2.0]
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Effort levels for pages that do not list betas.
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(rename = "page")]
    pub pages: Vec<PageConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageConfig {
    pub name: String,
    pub editors: usize,
    pub edits: usize,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
}

pub const DEFAULT_LEVELS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: SimConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if config.pages.is_empty() {
            return Err("config lists no pages".into());
        }
        for (k, p) in config.pages.iter().enumerate() {
            let bad_name = p.name.is_empty()
                || p.name.starts_with('.')
                || !p
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c));
            if bad_name {
                return Err(format!(
                    "page {}: name {:?} is not a plain directory name",
                    k + 1,
                    p.name
                ));
            }
            if config.pages[..k].iter().any(|q| q.name == p.name) {
                return Err(format!("duplicate page name {:?}", p.name));
            }
            if p.betas.is_some() && p.levels.is_some() {
                return Err(format!(
                    "page {:?}: give either betas or levels, not both",
                    p.name
                ));
            }
        }
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The nine article shapes with leveled efforts.
    pub fn articles() -> Self {
        Self {
            levels: None,
            pages: ARTICLE_PAGES
                .iter()
                .map(|&(name, edits, editors)| PageConfig {
                    name: name.to_string(),
                    editors,
                    edits,
                    betas: None,
                    levels: None,
                })
                .collect(),
        }
    }

    pub fn efforts(&self, page: &PageConfig, seed: u64) -> Result<EffortProfile, String> {
        let profile = match (&page.betas, &page.levels) {
            (Some(b), _) => {
                if b.len() != page.editors {
                    return Err(format!(
                        "page {:?}: {} betas for {} editors",
                        page.name,
                        b.len(),
                        page.editors
                    ));
                }
                EffortProfile::new(b.clone())
            }
            (None, levels) => {
                let levels = levels
                    .as_deref()
                    .or(self.levels.as_deref())
                    .unwrap_or(&DEFAULT_LEVELS);
                leveled_efforts(page.editors, levels, seed)
            }
        };
        profile.map_err(|e| format!("page {:?}: {e}", page.name))
    }
}
