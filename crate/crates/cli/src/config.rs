//! JSON run configuration.
//!
//! Sections: `atom`, `pulse`, `channels`, `ensemble`, `volume`, `scan`,
//! `output`. Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use ionkin_core::kinetics::{ChannelMode, KineticsOptions};
use ionkin_core::model::{
    build_channel_table, ChannelTable, CrossSectionConfig, IonizationPotentialTable, SpeciesIndex,
};
use ionkin_core::pulse::{ChaoticPulseSpec, DeterministicPulseSpec, MIN_OVERSAMPLE};
use ionkin_core::volume::{VolumeKind, VolumeModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

const FS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Deterministic,
    Chaotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StochasticMethod {
    Ensemble,
    Decorrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    SequentialOnly,
    SequentialPlusDirect,
    Both,
}

impl PulseKind {
    pub fn name(self) -> &'static str {
        match self {
            PulseKind::Deterministic => "deterministic",
            PulseKind::Chaotic => "chaotic",
        }
    }
}

impl ModeSelection {
    pub fn modes(self) -> Vec<ChannelMode> {
        match self {
            ModeSelection::SequentialOnly => vec![ChannelMode::SequentialOnly],
            ModeSelection::SequentialPlusDirect => vec![ChannelMode::SequentialPlusDirect],
            ModeSelection::Both => vec![
                ChannelMode::SequentialOnly,
                ChannelMode::SequentialPlusDirect,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomSection {
    #[serde(rename = "photon_energy_eV")]
    pub photon_energy_ev: f64,
    /// Optional replacement for the shipped neon table.
    pub ip_table_file: Option<PathBuf>,
}

impl Default for AtomSection {
    fn default() -> Self {
        Self {
            photon_energy_ev: 93.0,
            ip_table_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub kind: PulseKind,
    pub fwhm_fs: f64,
    /// Simulated span; six FWHM when absent.
    pub window_fs: Option<f64>,
    /// Chaotic pulses only.
    pub coherence_time_fs: Option<f64>,
    pub samples_per_fwhm: u32,
    pub oversample: u32,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            kind: PulseKind::Deterministic,
            fwhm_fs: 30.0,
            window_fs: None,
            coherence_time_fs: None,
            samples_per_fwhm: ionkin_core::pulse::DEFAULT_SAMPLES_PER_FWHM,
            oversample: ionkin_core::pulse::DEFAULT_OVERSAMPLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub mode: ModeSelection,
    /// Inline cross-section object.
    pub cross_sections: Option<Value>,
    /// Or a JSON file with the same content.
    pub cross_section_file: Option<PathBuf>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            mode: ModeSelection::Both,
            cross_sections: None,
            cross_section_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    /// Chaotic pulses only; `ensemble` when absent.
    pub method: Option<StochasticMethod>,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            method: None,
            n_realizations: ionkin_core::ensemble::DEFAULT_REALIZATIONS,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolumeSection {
    pub kind: String,
    pub w0_cm: f64,
    #[serde(rename = "zR_cm")]
    pub zr_cm: f64,
    pub fmin: f64,
    /// Density of the single-point yield grid that is averaged.
    pub points_per_decade: usize,
}

impl Default for VolumeSection {
    fn default() -> Self {
        let m = VolumeModel::default();
        Self {
            kind: m.kind.name().to_string(),
            w0_cm: m.w0_cm,
            zr_cm: m.zr_cm,
            fmin: m.fmin,
            points_per_decade: ionkin_core::volume::DEFAULT_POINTS_PER_DECADE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    #[serde(rename = "i_min_W_cm2")]
    pub i_min: f64,
    #[serde(rename = "i_max_W_cm2")]
    pub i_max: f64,
    pub points_per_decade: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(rename = "histogram_intensities_W_cm2")]
    pub histogram_intensities: Vec<f64>,
    /// `max_peak` or a species label such as `Ne2+`.
    pub histogram_normalization: String,
}

impl Default for ScanSection {
    fn default() -> Self {
        let k = KineticsOptions::default();
        Self {
            i_min: 1e13,
            i_max: 1e18,
            points_per_decade: 10,
            rel_tol: k.rel_tol,
            abs_tol: k.abs_tol,
            histogram_intensities: vec![3e15],
            histogram_normalization: "max_peak".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub atom: AtomSection,
    pub pulse: PulseSection,
    pub channels: ChannelSection,
    pub ensemble: EnsembleSection,
    pub volume: VolumeSection,
    pub scan: ScanSection,
    pub output: OutputSection,
    /// Directory relative file references are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Histogram normalization rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    MaxPeak,
    Species(SpeciesIndex),
}

impl Normalization {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "max_peak" {
            return Ok(Normalization::MaxPeak);
        }
        let sp = SpeciesIndex::parse_label(s).map_err(|_| {
            CliError::Config(format!(
                "histogram normalization {s:?} is neither max_peak nor a species"
            ))
        })?;
        if sp.get() == 0 {
            return Err(CliError::Config(
                "histogram normalization must name an ion, not the neutral".into(),
            ));
        }
        Ok(Normalization::Species(sp))
    }
}

impl Config {
    /// Parses and validates a configuration text without touching the file
    /// system.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        if !v.is_object() {
            return Err(CliError::Config(
                "configuration must be a JSON object".into(),
            ));
        }
        let cfg: Config = serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, applies `key.path=value` overrides and the seed flag.
    pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        if let Some(s) = seed {
            apply_override(&mut v, &format!("ensemble.master_seed={s}"))?;
        }
        let mut cfg = Self::from_value(v)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        let a = &self.atom;
        if !(a.photon_energy_ev > 0.0 && a.photon_energy_ev.is_finite()) {
            return bad(format!(
                "atom.photon_energy_eV must be positive, got {}",
                a.photon_energy_ev
            ));
        }
        let p = &self.pulse;
        if !(p.fwhm_fs > 0.0 && p.fwhm_fs.is_finite()) {
            return bad(format!("pulse.fwhm_fs must be positive, got {}", p.fwhm_fs));
        }
        if let Some(w) = p.window_fs {
            if !(w >= 4.0 * p.fwhm_fs && w.is_finite()) {
                return bad(format!("pulse.window_fs {w} is shorter than four FWHM"));
            }
        }
        if p.samples_per_fwhm < 8 {
            return bad("pulse.samples_per_fwhm must be at least 8".into());
        }
        match p.kind {
            PulseKind::Deterministic => {
                if p.coherence_time_fs.is_some() {
                    return bad("pulse.coherence_time_fs applies only to chaotic pulses".into());
                }
                if let Some(m) = self.ensemble.method {
                    return bad(format!(
                        "ensemble.method {:?} applies only to chaotic pulses; remove it for deterministic runs",
                        m
                    ));
                }
            }
            PulseKind::Chaotic => {
                let tc = match p.coherence_time_fs {
                    Some(tc) => tc,
                    None => return bad("chaotic pulses need pulse.coherence_time_fs".into()),
                };
                if !(tc > 0.0 && tc <= p.fwhm_fs) {
                    return bad(format!(
                        "pulse.coherence_time_fs must lie in (0, fwhm_fs = {}], got {tc}",
                        p.fwhm_fs
                    ));
                }
                if p.oversample < MIN_OVERSAMPLE {
                    return bad(format!(
                        "pulse.oversample must be at least {MIN_OVERSAMPLE}"
                    ));
                }
                if self.method() == Some(StochasticMethod::Ensemble)
                    && self.ensemble.n_realizations
                        < ionkin_core::ensemble::MIN_CHAOTIC_REALIZATIONS
                {
                    return bad(format!(
                        "ensemble.n_realizations must be at least {}",
                        ionkin_core::ensemble::MIN_CHAOTIC_REALIZATIONS
                    ));
                }
            }
        }
        if self.channels.cross_sections.is_some() && self.channels.cross_section_file.is_some() {
            return bad(
                "give channels.cross_sections or channels.cross_section_file, not both".into(),
            );
        }
        if let Some(v) = &self.channels.cross_sections {
            CrossSectionConfig::from_json(v)
                .map_err(|e| CliError::Config(format!("channels.cross_sections: {e}")))?;
        }
        self.volume_model()?;
        if self.volume.points_per_decade < 2 {
            return bad("volume.points_per_decade must be at least 2".into());
        }
        let s = &self.scan;
        if !(s.i_min > 0.0 && s.i_max > s.i_min && s.i_max.is_finite()) {
            return bad(format!(
                "scan needs 0 < i_min_W_cm2 < i_max_W_cm2, got {} and {}",
                s.i_min, s.i_max
            ));
        }
        if s.points_per_decade == 0 {
            return bad("scan.points_per_decade must be positive".into());
        }
        self.kinetics_options(ChannelMode::SequentialPlusDirect)
            .validate()
            .map_err(|e| CliError::Config(format!("scan tolerances: {e}")))?;
        for i in &s.histogram_intensities {
            if !(*i >= s.i_min && *i <= s.i_max) {
                return bad(format!(
                    "histogram intensity {i:e} lies outside the scan range [{:e}, {:e}]",
                    s.i_min, s.i_max
                ));
            }
        }
        Normalization::parse(&s.histogram_normalization)?;
        Ok(())
    }

    /// Stochastic method in effect: `None` for deterministic pulses.
    pub fn method(&self) -> Option<StochasticMethod> {
        match self.pulse.kind {
            PulseKind::Deterministic => None,
            PulseKind::Chaotic => Some(self.ensemble.method.unwrap_or(StochasticMethod::Ensemble)),
        }
    }

    pub fn normalization(&self) -> Normalization {
        Normalization::parse(&self.scan.histogram_normalization).expect("validated")
    }

    pub fn volume_model(&self) -> Result<VolumeModel> {
        let kind: VolumeKind = self
            .volume
            .kind
            .parse()
            .map_err(|e: ionkin_core::Error| CliError::Config(format!("volume.kind: {e}")))?;
        let m = VolumeModel {
            kind,
            w0_cm: self.volume.w0_cm,
            zr_cm: self.volume.zr_cm,
            fmin: self.volume.fmin,
        };
        m.validate()
            .map_err(|e| CliError::Config(format!("volume: {e}")))?;
        Ok(m)
    }

    pub fn kinetics_options(&self, mode: ChannelMode) -> KineticsOptions {
        KineticsOptions {
            rel_tol: self.scan.rel_tol,
            abs_tol: self.scan.abs_tol,
            channel_mode: mode,
            ..KineticsOptions::default()
        }
    }

    pub fn ip_table(&self) -> Result<IonizationPotentialTable> {
        match &self.atom.ip_table_file {
            None => Ok(IonizationPotentialTable::neon()),
            Some(p) => {
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                IonizationPotentialTable::parse(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn cross_sections(&self) -> Result<CrossSectionConfig> {
        if let Some(v) = &self.channels.cross_sections {
            return CrossSectionConfig::from_json(v).map_err(|e| CliError::Config(e.to_string()));
        }
        if let Some(p) = &self.channels.cross_section_file {
            let path = self.resolve(p);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            return CrossSectionConfig::from_json_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        Ok(CrossSectionConfig::default())
    }

    pub fn channel_table(&self) -> Result<ChannelTable> {
        let ips = self.ip_table()?;
        let cs = self.cross_sections()?;
        build_channel_table(self.atom.photon_energy_ev, &ips, &cs)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Envelope for a peak flux, photons cm⁻² s⁻¹.
    pub fn envelope(&self, peak_flux: f64) -> DeterministicPulseSpec {
        let fwhm = self.pulse.fwhm_fs * FS;
        let window = self.pulse.window_fs.map(|w| w * FS).unwrap_or(6.0 * fwhm);
        let mut s = DeterministicPulseSpec::new(fwhm, peak_flux, window);
        s.samples_per_fwhm = self.pulse.samples_per_fwhm;
        s
    }

    /// Chaotic pulse spec for a peak flux; `None` for deterministic pulses.
    pub fn chaotic(&self, peak_flux: f64) -> Option<ChaoticPulseSpec> {
        let tc = self.pulse.coherence_time_fs?;
        if self.pulse.kind != PulseKind::Chaotic {
            return None;
        }
        let mut s =
            ChaoticPulseSpec::new(self.envelope(peak_flux), tc * FS, self.ensemble.master_seed);
        s.oversample = self.pulse.oversample;
        Some(s)
    }
}

/// Sets `a.b.c=value` in a JSON tree. The value is parsed as JSON when
/// possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!(
            "override {assignment:?} is not of the form key=value"
        ))
    })?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "override key {key:?} is malformed"
        )));
    }
    let value =
        serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "override {key:?}: {} is not a section",
                parts[..i].join(".")
            ))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("non-empty key path")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = Config::from_json_str("{}").unwrap();
        assert_eq!(c.pulse.kind, PulseKind::Deterministic);
        assert_eq!(c.channels.mode, ModeSelection::Both);
        assert_eq!(c.method(), None);
        assert_eq!(c.scan.histogram_intensities, vec![3e15]);
        assert_eq!(
            c.volume_model().unwrap().kind,
            VolumeKind::GaussianTransverse2d
        );
    }

    #[test]
    fn unknown_keys_and_bad_enums_are_rejected() {
        assert!(matches!(
            Config::from_json_str(r#"{"pulse": {"fwhm": 30}}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str(r#"{"extra": {}}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str(r#"{"pulse": {"kind": "square"}}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str(r#"{"volume": {"kind": "cone"}}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            Config::from_json_str("[]"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn mode_combinations() {
        let det_with_method = r#"{"ensemble": {"method": "decorrelated"}}"#;
        let e = Config::from_json_str(det_with_method)
            .unwrap_err()
            .to_string();
        assert!(e.contains("only to chaotic"), "{e}");
        let chaotic_no_tc = r#"{"pulse": {"kind": "chaotic"}}"#;
        assert!(Config::from_json_str(chaotic_no_tc).is_err());
        let long_tc = r#"{"pulse": {"kind": "chaotic", "coherence_time_fs": 40}}"#;
        assert!(Config::from_json_str(long_tc).is_err());
        let ok = r#"{"pulse": {"kind": "chaotic", "coherence_time_fs": 6}, "ensemble": {"method": "decorrelated"}}"#;
        let c = Config::from_json_str(ok).unwrap();
        assert_eq!(c.method(), Some(StochasticMethod::Decorrelated));
        let c = Config::from_json_str(r#"{"pulse": {"kind": "chaotic", "coherence_time_fs": 6}}"#)
            .unwrap();
        assert_eq!(c.method(), Some(StochasticMethod::Ensemble));
    }

    #[test]
    fn histogram_checks() {
        assert!(
            Config::from_json_str(r#"{"scan": {"histogram_intensities_W_cm2": [1e19]}}"#).is_err()
        );
        assert!(Config::from_json_str(r#"{"scan": {"histogram_normalization": "Ne"}}"#).is_err());
        let c = Config::from_json_str(r#"{"scan": {"histogram_normalization": "Ne2+"}}"#).unwrap();
        assert_eq!(
            c.normalization(),
            Normalization::Species(SpeciesIndex::new(2).unwrap())
        );
    }

    #[test]
    fn overrides_set_nested_keys() {
        let mut v: Value = serde_json::from_str(r#"{"scan": {"i_min_W_cm2": 1e13}}"#).unwrap();
        apply_override(&mut v, "scan.i_min_W_cm2=1e14").unwrap();
        apply_override(&mut v, "pulse.kind=chaotic").unwrap();
        apply_override(&mut v, "pulse.coherence_time_fs=6").unwrap();
        let c = Config::from_value(v.clone()).unwrap();
        assert_eq!(c.scan.i_min, 1e14);
        assert_eq!(c.pulse.kind, PulseKind::Chaotic);
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "scan..x=1").is_err());
        assert!(apply_override(&mut v, "scan.i_min_W_cm2.x=1").is_err());
    }

    #[test]
    fn inline_cross_sections() {
        let c = Config::from_json_str(
            r#"{"channels": {"cross_sections": {"sigma1_cm2": 2e-18, "0-4": 0}}}"#,
        )
        .unwrap();
        let t = c.channel_table().unwrap();
        assert!(t.get(0, 4).unwrap().sigma.is_zero());
        assert!(
            Config::from_json_str(r#"{"channels": {"cross_sections": {"bogus": 1}}}"#).is_err()
        );
    }
}
