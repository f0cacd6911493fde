//! Experiment manifests.
//!
//! A manifest is JSON lines. One line may be a `{"config": {...}}` block
//! naming the model files and settings; every other non-blank line is an
//! utterance `{"id", "emissions_path", "reference"}` with an optional
//! `uw_emissions_path`. Relative paths resolve against the manifest's
//! directory.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use homodecode_core::{DecoderConfig, MinMethods, UwConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Greedy CTC decoding, no LM.
    Baseline,
    Lm,
    LmHe,
    LmUw,
    LmHeUw,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Baseline,
        Variant::Lm,
        Variant::LmHe,
        Variant::LmUw,
        Variant::LmHeUw,
    ];

    pub fn all() -> Vec<Variant> {
        Self::ALL.to_vec()
    }

    pub fn uses_he(self) -> bool {
        matches!(self, Variant::LmHe | Variant::LmHeUw)
    }

    pub fn uses_uw(self) -> bool {
        matches!(self, Variant::LmUw | Variant::LmHeUw)
    }

    pub fn key(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Lm => "lm",
            Variant::LmHe => "lm_he",
            Variant::LmUw => "lm_uw",
            Variant::LmHeUw => "lm_he_uw",
        }
    }

    /// Label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Lm => "+lm",
            Variant::LmHe => "+lm+HE",
            Variant::LmUw => "+lm+UW",
            Variant::LmHeUw => "+lm+HE+UW",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.key() == s || v.label() == s)
            .ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderSettings {
    pub alpha: f64,
    pub beta: f64,
    pub beam: usize,
    pub gamma: f64,
    pub rescore: bool,
}

impl Default for DecoderSettings {
    fn default() -> Self {
        let d = DecoderConfig::default();
        Self {
            alpha: d.alpha,
            beta: d.beta,
            beam: d.beam_size,
            gamma: d.gamma,
            rescore: d.rescore_enabled,
        }
    }
}

impl DecoderSettings {
    pub fn to_config(&self, he_enabled: bool) -> DecoderConfig {
        DecoderConfig {
            beam_size: self.beam,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            he_enabled,
            nbest: 1,
            rescore_enabled: self.rescore,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UwSettings {
    pub jyutping_max_distance: f64,
    pub glyph_max_distance: f64,
    pub cosine_min: f64,
    pub checker_min: f64,
    /// Glyph methods that must pass; `None` means every shared method.
    pub min_methods: Option<usize>,
}

impl Default for UwSettings {
    fn default() -> Self {
        let d = UwConfig::default();
        Self {
            jyutping_max_distance: d.jyutping_max_distance,
            glyph_max_distance: d.glyph_max_distance,
            cosine_min: d.cosine_min,
            checker_min: d.checker_min,
            min_methods: None,
        }
    }
}

impl UwSettings {
    pub fn to_config(&self) -> UwConfig {
        UwConfig {
            jyutping_max_distance: self.jyutping_max_distance,
            glyph_max_distance: self.glyph_max_distance,
            cosine_min: self.cosine_min,
            checker_min: self.checker_min,
            min_methods: match self.min_methods {
                None => MinMethods::AllShared,
                Some(n) => MinMethods::AtLeast(n),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub lexicon: PathBuf,
    pub vocab: PathBuf,
    pub lm: PathBuf,
    #[serde(default)]
    pub cin_dir: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub frequency: Option<PathBuf>,
    /// Precomputed pairs; discovered from `cin_dir` + `embeddings` when absent.
    #[serde(default)]
    pub pairs: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub decoder: DecoderSettings,
    #[serde(default)]
    pub uw: UwSettings,
    #[serde(default = "Variant::all")]
    pub variants: Vec<Variant>,
    /// Also normalize references for the UW rows.
    #[serde(default)]
    pub uw_on_references: bool,
}

impl ToolConfig {
    pub fn needs_uw(&self) -> bool {
        self.variants.iter().any(|v| v.uses_uw())
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.lexicon, &mut self.vocab, &mut self.lm] {
            *p = base.join(&*p);
        }
        for p in [
            &mut self.cin_dir,
            &mut self.embeddings,
            &mut self.frequency,
            &mut self.pairs,
            &mut self.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            *p = base.join(&*p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtteranceSpec {
    pub id: String,
    pub emissions_path: PathBuf,
    pub reference: String,
    #[serde(default)]
    pub uw_emissions_path: Option<PathBuf>,
    #[serde(skip)]
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub path: PathBuf,
    pub config: ToolConfig,
    pub config_line: usize,
    pub utterances: Vec<UtteranceSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub reason: String,
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.reason),
            None => write!(f, "{}: {}", self.path.display(), self.reason),
        }
    }
}

impl std::error::Error for ManifestError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigLine {
    config: ToolConfig,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|e| ManifestError {
            path: path.to_path_buf(),
            line: None,
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, path, base)
    }

    /// Parses manifest text; `base` is the directory relative paths resolve against.
    pub fn parse(text: &str, path: &Path, base: &Path) -> Result<Self, ManifestError> {
        let err = |line: Option<usize>, reason: String| ManifestError {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut config: Option<(ToolConfig, usize)> = None;
        let mut utterances = Vec::new();
        let mut ids = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(raw).map_err(|e| err(Some(line), e.to_string()))?;
            if value.get("config").is_some() {
                if config.is_some() {
                    return Err(err(Some(line), "second config block".into()));
                }
                let mut c = serde_json::from_value::<ConfigLine>(value)
                    .map_err(|e| err(Some(line), format!("config: {e}")))?
                    .config;
                if c.variants.is_empty() {
                    return Err(err(Some(line), "config lists no variants".into()));
                }
                c.resolve(base);
                config = Some((c, line));
                continue;
            }
            let mut utt: UtteranceSpec =
                serde_json::from_value(value).map_err(|e| err(Some(line), e.to_string()))?;
            if utt.reference.is_empty() {
                return Err(err(
                    Some(line),
                    format!("utterance {:?} has an empty reference", utt.id),
                ));
            }
            if !ids.insert(utt.id.clone()) {
                return Err(err(
                    Some(line),
                    format!("duplicate utterance id {:?}", utt.id),
                ));
            }
            utt.line = line;
            utt.emissions_path = base.join(&utt.emissions_path);
            utt.uw_emissions_path = utt.uw_emissions_path.map(|p| base.join(p));
            utterances.push(utt);
        }
        if utterances.is_empty() {
            return Err(err(None, "manifest lists no utterances".into()));
        }
        let (config, config_line) =
            config.ok_or_else(|| err(None, "missing {\"config\": ...} line".into()))?;
        Ok(Self {
            path: path.to_path_buf(),
            config,
            config_line,
            utterances,
        })
    }

    /// Checks that every referenced input exists; run before any work starts.
    pub fn validate_paths(&self) -> Result<(), ManifestError> {
        let missing = |line: usize, what: &str, p: &Path| ManifestError {
            path: self.path.clone(),
            line: Some(line),
            reason: format!("{what} {} does not exist", p.display()),
        };
        let c = &self.config;
        let files = [
            ("lexicon", Some(&c.lexicon)),
            ("vocab", Some(&c.vocab)),
            ("lm", Some(&c.lm)),
        ];
        let optional = [
            ("embeddings", c.embeddings.as_ref()),
            ("frequency", c.frequency.as_ref()),
            ("pairs", c.pairs.as_ref()),
        ];
        for (what, p) in files.into_iter().chain(optional) {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(missing(self.config_line, what, p));
                }
            }
        }
        if let Some(dir) = &c.cin_dir {
            if !dir.is_dir() {
                return Err(missing(self.config_line, "cin_dir", dir));
            }
        }
        if c.needs_uw() {
            if c.embeddings.is_none() {
                return Err(ManifestError {
                    path: self.path.clone(),
                    line: Some(self.config_line),
                    reason: "UW variants need `embeddings` for the rewrite checker".into(),
                });
            }
            if c.pairs.is_none() && c.cin_dir.is_none() {
                return Err(ManifestError {
                    path: self.path.clone(),
                    line: Some(self.config_line),
                    reason: "UW variants need `pairs` or `cin_dir`".into(),
                });
            }
        }
        for u in &self.utterances {
            if !u.emissions_path.is_file() {
                return Err(missing(u.line, "emissions", &u.emissions_path));
            }
            if let Some(p) = &u.uw_emissions_path {
                if !p.is_file() {
                    return Err(missing(u.line, "uw emissions", p));
                }
            }
        }
        Ok(())
    }
}
