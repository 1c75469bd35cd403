//! Versioned TOML configuration for the whole pipeline.
//!
//! ```toml
//! version = 1
//!
//! [lexicons]            # omitted paths use the bundled data
//! homoglyphs = "homoglyphs.tsv"
//! names = "names.tsv"
//! abbreviations = "abbreviations.txt"
//!
//! [years]
//! min = 1500
//! max = 2026            # default: next calendar year
//!
//! [segment]
//! headings = ["Список литературы", "References"]
//! min_fallback_entries = 3
//!
//! [intext]
//! context_width = 200
//! expand_lists = true
//!
//! [link]
//! fuzzy = false
//! fuzzy_threshold = 0.95
//! ```
//!
//! Relative lexicon paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docingest::SegmentConfig;
use crate::features::YearRange;
use crate::intext::InTextConfig;
use crate::lexicons::{AbbreviationList, LexiconError, Lexicons, NameLexicon};
use crate::linker::LinkConfig;
use crate::normalize::{HomoglyphTable, NormalizeError};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config version {0} is not supported (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Homoglyphs(#[from] NormalizeError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub homoglyphs: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YearsSection {
    pub min: Option<u32>,
    pub max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub lexicons: LexiconPaths,
    pub years: YearsSection,
    pub segment: SegmentConfig,
    pub intext: InTextConfig,
    pub link: LinkConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            version: CONFIG_VERSION,
            lexicons: LexiconPaths::default(),
            years: YearsSection::default(),
            segment: SegmentConfig::default(),
            intext: InTextConfig::default(),
            link: LinkConfig::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(ConfigError::Version(cfg.version));
        }
        let years = cfg.year_range();
        if years.min > years.max {
            return Err(ConfigError::Invalid(format!("years.min {} exceeds years.max {}", years.min, years.max)));
        }
        if !(0.0..=1.0).contains(&cfg.link.fuzzy_threshold) {
            return Err(ConfigError::Invalid("link.fuzzy_threshold must be within [0, 1]".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.lexicons.homoglyphs, &mut cfg.lexicons.names, &mut cfg.lexicons.abbreviations]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn year_range(&self) -> YearRange {
        let d = YearRange::default();
        YearRange::new(self.years.min.unwrap_or(d.min), self.years.max.unwrap_or(d.max))
    }

    /// Bundled lexicons with any configured file swapped in.
    pub fn load_lexicons(&self) -> Result<Lexicons, ConfigError> {
        let mut lex = Lexicons::bundled();
        if let Some(p) = &self.lexicons.homoglyphs {
            lex.homoglyphs = HomoglyphTable::load(p)?;
        }
        if let Some(p) = &self.lexicons.names {
            lex.names = NameLexicon::load(p)?;
        }
        if let Some(p) = &self.lexicons.abbreviations {
            lex.abbreviations = AbbreviationList::load(p)?;
        }
        Ok(lex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn module_doc_example_parses() {
        let doc = include_str!("config.rs");
        let example: String = doc
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| format!("{}\n", l.trim_start_matches("//!").trim_start_matches(' ')))
            .collect();
        let mut cfg = Config::parse(&example).unwrap();
        assert_eq!(cfg.year_range(), YearRange::new(1500, 2026));
        assert_eq!(cfg.segment.headings.len(), 2);
        assert_eq!(cfg.intext.context_width, 200);
        cfg.lexicons = LexiconPaths::default();
        assert!(cfg.load_lexicons().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(Config::parse("version = 2"), Err(ConfigError::Version(2))));
        assert!(matches!(Config::parse("colour = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(Config::parse("[years]\nmin = 2000\nmax = 1999"), Err(ConfigError::Invalid(_))));
        assert!(matches!(Config::parse("[link]\nfuzzy_threshold = 1.5"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("abbr.txt"), "т.\nсб.\n").unwrap();
        let path = dir.path().join("gostcite.toml");
        std::fs::write(&path, "version = 1\n[lexicons]\nabbreviations = \"abbr.txt\"\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.lexicons.abbreviations.as_deref(), Some(dir.path().join("abbr.txt").as_path()));
        let lex = cfg.load_lexicons().unwrap();
        assert!(lex.abbreviations.is_abbreviation("сб.", &lex.homoglyphs));
        assert!(!lex.abbreviations.is_abbreviation("изд.", &lex.homoglyphs));
    }
}
