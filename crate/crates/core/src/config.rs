//! Flat `key = value` configuration shared by the command-line tool.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is optional;
//! unset keys keep the library defaults. Values given later win, so command-line
//! overrides applied after loading a file take precedence over it.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::descriptor::{GradTolerance, Polarity};
use crate::error::{Error, Result};
use crate::eval::{Modality, SimulationSpec};
use crate::fusion::FusionConfig;
use crate::registration::RegistrationConfig;
use crate::transform::ModelKind;

/// Which registrar `eval` runs against the simulated pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RegistrarKind {
    #[default]
    Pipeline,
    /// Returns the planted transform; exercises the harness only.
    Oracle,
}

/// Every recognised key with a short description.
pub const KEYS: &[(&str, &str)] = &[
    ("harris.k", "Harris sensitivity k"),
    ("harris.window_sigma", "Gaussian sigma of the structure-tensor window"),
    ("harris.nms_window", "non-maximum suppression window side (odd)"),
    ("harris.max_corners", "maximum corners kept per image"),
    ("harris.min_score", "corner threshold as a fraction of the peak score"),
    ("canny.blur_sigma", "pre-smoothing sigma"),
    ("canny.low_ratio", "low hysteresis threshold, fraction of peak gradient"),
    ("canny.high_ratio", "high hysteresis threshold, fraction of peak gradient"),
    ("canny.bins", "gradient direction bins over 360 degrees"),
    ("descriptor.window", "descriptor window side (odd)"),
    ("descriptor.polarity", "signed | either (allow contrast reversal)"),
    ("descriptor.same_grad", "circular | literal direction tolerance"),
    ("ransac.model", "translation | similarity | affine"),
    ("ransac.samples", "hypotheses per RANSAC round"),
    ("ransac.rd1", "inlier distance, rounds 1 and 2 (px)"),
    ("ransac.rd2", "inlier distance, round 3 (px)"),
    ("ransac.md1", "match gate, round 2 (px)"),
    ("ransac.md2", "match gate, round 3 (px)"),
    ("ransac.seed", "RANSAC random seed"),
    ("fusion.alpha", "weight of the visible low-pass band"),
    ("fusion.gain", "high-pass gain"),
    ("fusion.sigma1", "first fusion scale"),
    ("fusion.sigma2", "second fusion scale"),
    ("fusion.sigma3", "third fusion scale"),
    ("fusion.color_eps", "luminance floor for colour restoration"),
    ("sim.translation_range", "planted translation range (+/- px)"),
    ("sim.scales", "comma-separated planted scales"),
    ("sim.modality", "identity | invert | gamma | invert_gamma"),
    ("sim.gamma", "gamma exponent for the gamma modalities"),
    ("sim.noise_sigma", "additive Gaussian noise sigma"),
    ("sim.trials", "trials per scale"),
    ("sim.seed", "simulation random seed"),
    ("sim.integer_translation", "draw integer translations only (true | false)"),
    ("eval.registrar", "pipeline | oracle"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub registration: RegistrationConfig,
    pub fusion: FusionConfig,
    pub sim: SimulationSpec,
    pub registrar: RegistrarKind,
    // Remembered separately so `sim.gamma` and `sim.modality` can come in either order.
    gamma: f64,
}

impl Default for Config {
    fn default() -> Self {
        let sim = SimulationSpec::default();
        Config {
            registration: RegistrationConfig::default(),
            fusion: FusionConfig::default(),
            gamma: sim.modality.gamma().unwrap_or(2.2),
            sim,
            registrar: RegistrarKind::default(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::param(format!("{key}: cannot parse {value:?} as a number")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::param(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    let lower = value.to_ascii_lowercase();
    options
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            Error::param(format!("{key}: expected one of {}, got {value:?}", names.join(" | ")))
        })
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl Config {
    /// Parse a config file's text on top of the defaults; `origin` labels error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.apply_text(text, origin)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse_str(&text, &path.display().to_string())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::param(format!("{origin}:{}: expected `key = value`, got {line:?}", n + 1))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Parameter(m) => Error::param(format!("{origin}:{}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::param(format!("override {spec:?} must look like key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let r = &mut self.registration;
        match key {
            "harris.k" => r.harris.k = parse_num(key, value)?,
            "harris.window_sigma" => r.harris.window_sigma = parse_num(key, value)?,
            "harris.nms_window" => r.harris.nms_window = parse_num(key, value)?,
            "harris.max_corners" => r.harris.max_corners = parse_num(key, value)?,
            "harris.min_score" => r.harris.min_score = parse_num(key, value)?,
            "canny.blur_sigma" => r.canny.blur_sigma = parse_num(key, value)?,
            "canny.low_ratio" => r.canny.low_ratio = parse_num(key, value)?,
            "canny.high_ratio" => r.canny.high_ratio = parse_num(key, value)?,
            "canny.bins" => r.canny.bins = parse_num(key, value)?,
            "descriptor.window" => r.window = parse_num(key, value)?,
            "descriptor.polarity" => {
                r.matching.polarity = choice(key, value, &[("signed", Polarity::Signed), ("either", Polarity::Either)])?
            }
            "descriptor.same_grad" => {
                r.matching.tolerance = choice(
                    key,
                    value,
                    &[("circular", GradTolerance::Circular), ("literal", GradTolerance::Literal)],
                )?
            }
            "ransac.model" => {
                r.ransac.model = ModelKind::from_str(value).map_err(|_| {
                    Error::param(format!("{key}: expected translation | similarity | affine, got {value:?}"))
                })?
            }
            "ransac.samples" => r.ransac.samples_per_iter = parse_num(key, value)?,
            "ransac.rd1" => r.ransac.rd1 = parse_num(key, value)?,
            "ransac.rd2" => r.ransac.rd2 = parse_num(key, value)?,
            "ransac.md1" => r.ransac.md1 = parse_num(key, value)?,
            "ransac.md2" => r.ransac.md2 = parse_num(key, value)?,
            "ransac.seed" => r.ransac.rng_seed = parse_num(key, value)?,
            "fusion.alpha" => self.fusion.alpha = parse_num(key, value)?,
            "fusion.gain" => self.fusion.gain = parse_num(key, value)?,
            "fusion.sigma1" => self.fusion.sigmas[0] = parse_num(key, value)?,
            "fusion.sigma2" => self.fusion.sigmas[1] = parse_num(key, value)?,
            "fusion.sigma3" => self.fusion.sigmas[2] = parse_num(key, value)?,
            "fusion.color_eps" => self.fusion.color_eps = parse_num(key, value)?,
            "sim.translation_range" => self.sim.translation_range = parse_num(key, value)?,
            "sim.scales" => {
                self.sim.scales = value
                    .split(',')
                    .map(|s| parse_num(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "sim.modality" => {
                self.sim.modality =
                    Modality::parse(value, self.gamma).map_err(|_| {
                        Error::param(format!(
                            "{key}: expected identity | invert | gamma | invert_gamma, got {value:?}"
                        ))
                    })?
            }
            "sim.gamma" => {
                self.gamma = parse_num(key, value)?;
                self.sim.modality = match self.sim.modality {
                    Modality::Gamma(_) => Modality::Gamma(self.gamma),
                    Modality::InvertGamma(_) => Modality::InvertGamma(self.gamma),
                    m => m,
                };
            }
            "sim.noise_sigma" => self.sim.noise_sigma = parse_num(key, value)?,
            "sim.trials" => self.sim.trials = parse_num(key, value)?,
            "sim.seed" => self.sim.rng_seed = parse_num(key, value)?,
            "sim.integer_translation" => self.sim.integer_translation = parse_bool(key, value)?,
            "eval.registrar" => {
                self.registrar = choice(
                    key,
                    value,
                    &[("pipeline", RegistrarKind::Pipeline), ("oracle", RegistrarKind::Oracle)],
                )?
            }
            _ => return Err(Error::param(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Current value of `key` in the same syntax `set` accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let r = &self.registration;
        Some(match key {
            "harris.k" => r.harris.k.to_string(),
            "harris.window_sigma" => r.harris.window_sigma.to_string(),
            "harris.nms_window" => r.harris.nms_window.to_string(),
            "harris.max_corners" => r.harris.max_corners.to_string(),
            "harris.min_score" => r.harris.min_score.to_string(),
            "canny.blur_sigma" => r.canny.blur_sigma.to_string(),
            "canny.low_ratio" => r.canny.low_ratio.to_string(),
            "canny.high_ratio" => r.canny.high_ratio.to_string(),
            "canny.bins" => r.canny.bins.to_string(),
            "descriptor.window" => r.window.to_string(),
            "descriptor.polarity" => match r.matching.polarity {
                Polarity::Signed => "signed",
                Polarity::Either => "either",
            }
            .into(),
            "descriptor.same_grad" => match r.matching.tolerance {
                GradTolerance::Circular => "circular",
                GradTolerance::Literal => "literal",
            }
            .into(),
            "ransac.model" => r.ransac.model.to_string(),
            "ransac.samples" => r.ransac.samples_per_iter.to_string(),
            "ransac.rd1" => r.ransac.rd1.to_string(),
            "ransac.rd2" => r.ransac.rd2.to_string(),
            "ransac.md1" => r.ransac.md1.to_string(),
            "ransac.md2" => r.ransac.md2.to_string(),
            "ransac.seed" => r.ransac.rng_seed.to_string(),
            "fusion.alpha" => self.fusion.alpha.to_string(),
            "fusion.gain" => self.fusion.gain.to_string(),
            "fusion.sigma1" => self.fusion.sigmas[0].to_string(),
            "fusion.sigma2" => self.fusion.sigmas[1].to_string(),
            "fusion.sigma3" => self.fusion.sigmas[2].to_string(),
            "fusion.color_eps" => self.fusion.color_eps.to_string(),
            "sim.translation_range" => self.sim.translation_range.to_string(),
            "sim.scales" => join_f64(&self.sim.scales),
            "sim.modality" => self.sim.modality.name().into(),
            "sim.gamma" => self.gamma.to_string(),
            "sim.noise_sigma" => self.sim.noise_sigma.to_string(),
            "sim.trials" => self.sim.trials.to_string(),
            "sim.seed" => self.sim.rng_seed.to_string(),
            "sim.integer_translation" => self.sim.integer_translation.to_string(),
            "eval.registrar" => match self.registrar {
                RegistrarKind::Pipeline => "pipeline",
                RegistrarKind::Oracle => "oracle",
            }
            .into(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.registration.validate()?;
        self.fusion.validate()?;
        self.sim.validate()
    }

    /// The full configuration as file text; parsing it reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, _) in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).unwrap_or_default());
        }
        out
    }

    /// One line per key: name, default, description.
    pub fn reference() -> String {
        let d = Config::default();
        let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (key, help) in KEYS {
            let _ = writeln!(out, "  {key:<width$}  [default: {}]  {help}", d.get(key).unwrap_or_default());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        let d = Config::default();
        for (key, _) in KEYS {
            let v = d.get(key).unwrap_or_else(|| panic!("no getter for {key}"));
            let mut c = Config::default();
            c.set(key, &v).unwrap_or_else(|e| panic!("{key}: {e}"));
            assert_eq!(c, d, "{key}");
        }
        assert_eq!(Config::parse_str(&d.to_text(), "t").unwrap(), d);
    }

    #[test]
    fn file_parsing() {
        let text = "# comment\n\nharris.k = 0.05\nransac.model=similarity\nsim.scales = 0.9, 1.1\nsim.modality = gamma\nsim.gamma = 1.8\n";
        let c = Config::parse_str(text, "cfg").unwrap();
        assert_eq!(c.registration.harris.k, 0.05);
        assert_eq!(c.registration.ransac.model, ModelKind::Similarity);
        assert_eq!(c.sim.scales, vec![0.9, 1.1]);
        assert_eq!(c.sim.modality, Modality::Gamma(1.8));
    }

    #[test]
    fn errors_name_the_key() {
        let e = Config::parse_str("harris.k = 0.05\nransac.rd1 = abc\n", "cfg").unwrap_err().to_string();
        assert!(e.contains("ransac.rd1") && e.contains("cfg:2"), "{e}");
        let e = Config::parse_str("nope.key = 1\n", "cfg").unwrap_err().to_string();
        assert!(e.contains("nope.key"), "{e}");
        let e = Config::parse_str("descriptor.polarity = both\n", "cfg").unwrap_err().to_string();
        assert!(e.contains("descriptor.polarity"), "{e}");

        for (key, bad) in [
            ("harris.k", "0.5"),
            ("harris.nms_window", "4"),
            ("canny.low_ratio", "0.5"),
            ("canny.bins", "1"),
            ("descriptor.window", "8"),
            ("ransac.rd2", "9"),
            ("ransac.samples", "0"),
            ("fusion.alpha", "2"),
            ("fusion.sigma2", "0.5"),
            ("sim.trials", "0"),
            ("sim.noise_sigma", "-1"),
        ] {
            let mut c = Config::default();
            c.set(key, bad).unwrap();
            let e = c.validate().unwrap_err().to_string();
            assert!(e.contains(key), "{key}: {e}");
        }
    }

    #[test]
    fn overrides_win() {
        let mut c = Config::parse_str("fusion.gain = 2\n", "cfg").unwrap();
        c.apply_override("fusion.gain=1").unwrap();
        assert_eq!(c.fusion.gain, 1.0);
        assert!(c.apply_override("fusion.gain").is_err());
    }

    #[test]
    fn reference_lists_all_keys() {
        let r = Config::reference();
        for (key, _) in KEYS {
            assert!(r.contains(key));
        }
        assert!(r.contains("[default: 0.04]"));
    }
}
