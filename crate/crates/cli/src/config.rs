//! The run configuration: one JSON document that pins everything a command
//! needs, so that every invocation is reproducible from the file alone.
//!
//! Schema (all five sections required, unknown keys rejected everywhere):
//!
//! ```text
//! {
//!   "imaging": { "d": 2.0e-3, "d_s": 2.0e-3, "x": 4.0e-4,
//!                "lambda_light": 1.0e-6, "f": 0.1 },
//!   "basis":   { "k": 10, "m": 200 },
//!   "profile": { "family": "gaussian", "r0": 1.0, "q_c": 12.566,
//!                "theta0": 0.0, "beta": 0.0, "phi0": 0.0 },
//!   "mc":      { "n": 5000, "seed": 42 },
//!   "output":  { "directory": "out", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! The `profile` section is either an inline profile document in the
//! library's own JSON schema (see `SqueezingProfile::from_json`) or a
//! reference `{"table": "relative/path.json"}` to such a document on disk.
//! Table paths resolve relative to the directory of the config file, so a
//! config and its companion data can be moved around together and invoked
//! from any working directory.
//!
//! Parsing and serialization round-trip losslessly: `from_json ∘ to_json`
//! is the identity on parsed configs (floats included — the serializer
//! emits shortest-round-trip literals).

use std::fs;
use std::path::{Path, PathBuf};

use prolate_squeeze::budget::ImagingConfig;
use prolate_squeeze::pswf::{BandParameter, ProlateBasis};
use prolate_squeeze::squeeze::SqueezingProfile;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Output rendering a command may emit; the config selects a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Geometry of the imaging path, mirroring `ImagingConfig` field for field
/// (the library type carries no serde support, so the schema lives here).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSection {
    /// Pupil size d in meters.
    pub d: f64,
    /// Source diaphragm size d_s in meters.
    pub d_s: f64,
    /// Object size X in meters.
    pub x: f64,
    /// Illumination wavelength λ in meters.
    pub lambda_light: f64,
    /// Objective focal length f in meters.
    pub f: f64,
}

/// How many prolate modes to carry and at what quadrature order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// Mode count K.
    pub k: usize,
    /// Nyström quadrature order M.
    pub m: usize,
}

/// Monte-Carlo controls for `simulate` (and the seed for `verify`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    /// Shots to draw.
    pub n: usize,
    /// Generator seed; identical seeds reproduce batches bit for bit.
    pub seed: u64,
}

/// Where artifacts go and which renderings to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory, created on demand; relative paths resolve against
    /// the working directory (`--out` overrides this entirely).
    pub directory: String,
    /// Non-empty set of renderings to emit; duplicates are rejected.
    pub formats: Vec<Format>,
}

/// The parsed run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub imaging: ImagingSection,
    pub basis: BasisSection,
    /// Inline profile document or `{"table": path}` reference; kept as raw
    /// JSON so the round-trip is lossless and the library stays the single
    /// authority on the profile schema.
    pub profile: serde_json::Value,
    pub mc: McSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parse and validate a configuration document.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to JSON. Feeding the result to [`from_json`]
    /// reproduces `self` exactly.
    ///
    /// [`from_json`]: Self::from_json
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("a validated config always serializes")
    }

    /// Read a configuration from disk, returning it together with the
    /// directory it lives in (the anchor for relative table paths).
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = Self::from_json(&text)?;
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        Ok((config, dir.unwrap_or(Path::new(".")).to_path_buf()))
    }

    /// Structural checks beyond what serde enforces. The physical ranges
    /// (positive lengths, resolvable modes, admissible profiles) stay with
    /// the library constructors, which report them with full context.
    pub fn validate(&self) -> CliResult<()> {
        if self.mc.n == 0 {
            return Err(CliError::Config("mc.n must be at least 1".into()));
        }
        if self.output.directory.is_empty() {
            return Err(CliError::Config("output.directory must be non-empty".into()));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Config(
                "output.formats must name at least one of \"csv\", \"json\"".into(),
            ));
        }
        if self.output.formats.len() > 2
            || (self.output.formats.len() == 2
                && self.output.formats[0] == self.output.formats[1])
        {
            return Err(CliError::Config("output.formats lists a format twice".into()));
        }
        Ok(())
    }

    /// True when the config asks for the given rendering.
    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// The validated imaging geometry.
    pub fn imaging(&self) -> CliResult<ImagingConfig> {
        let im = &self.imaging;
        Ok(ImagingConfig::new(im.d, im.d_s, im.x, im.lambda_light, im.f)?)
    }

    /// Build the prolate basis the config describes: the band parameter
    /// comes from the imaging geometry, K and M from the basis section.
    pub fn build_basis(&self) -> CliResult<ProlateBasis> {
        let c = self.imaging()?.c();
        let band = BandParameter::new(c)?;
        Ok(ProlateBasis::build(band, self.basis.k, self.basis.m)?)
    }

    /// Resolve the profile section to a validated [`SqueezingProfile`],
    /// reading a referenced table document relative to `config_dir`.
    pub fn resolve_profile(&self, config_dir: &Path) -> CliResult<SqueezingProfile> {
        if let Some(object) = self.profile.as_object() {
            if let Some(table) = object.get("table") {
                if object.len() != 1 {
                    return Err(CliError::Config(
                        "a profile table reference takes exactly one key, \"table\"".into(),
                    ));
                }
                let relative = table.as_str().ok_or_else(|| {
                    CliError::Config("profile.table must be a path string".into())
                })?;
                let path = config_dir.join(relative);
                let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                return Ok(SqueezingProfile::from_json(&text)?);
            }
        }
        Ok(SqueezingProfile::from_json(&self.profile.to_string())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> String {
        r#"{
            "imaging": {"d": 2.0e-3, "d_s": 2.0e-3, "x": 4.0e-4,
                        "lambda_light": 1.0e-6, "f": 0.1},
            "basis": {"k": 8, "m": 200},
            "profile": {"family": "gaussian", "r0": 1.0, "q_c": 12.566,
                        "theta0": 0.0, "beta": 0.0, "phi0": 0.0},
            "mc": {"n": 5000, "seed": 42},
            "output": {"directory": "out", "formats": ["csv", "json"]}
        }"#
        .to_string()
    }

    fn patched(pattern: &str, replacement: &str) -> String {
        let text = example();
        assert!(text.contains(pattern), "test patch target {pattern:?} missing");
        text.replace(pattern, replacement)
    }

    #[test]
    fn the_round_trip_is_lossless() {
        let config = RunConfig::from_json(&example()).unwrap();
        let again = RunConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(config, again);
        // a second pass changes nothing either
        assert_eq!(again.to_json(), RunConfig::from_json(&again.to_json()).unwrap().to_json());
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        for (pattern, replacement) in [
            ("\"imaging\"", "\"extraneous\": 1, \"imaging\""),
            ("\"d\": 2.0e-3,", "\"d\": 2.0e-3, \"tilt\": 0.1,"),
            ("\"k\": 8,", "\"k\": 8, \"basis_extra\": true,"),
            ("\"n\": 5000,", "\"n\": 5000, \"burn_in\": 10,"),
            ("\"directory\": \"out\",", "\"directory\": \"out\", \"compress\": false,"),
        ] {
            let err = RunConfig::from_json(&patched(pattern, replacement)).unwrap_err();
            assert!(
                err.to_string().contains("unknown field"),
                "patch {replacement:?} produced the wrong error: {err}"
            );
        }
    }

    #[test]
    fn an_inline_profile_resolves_through_the_library_schema() {
        let config = RunConfig::from_json(&example()).unwrap();
        let profile = config.resolve_profile(Path::new(".")).unwrap();
        assert_eq!(profile.r(0.0), 1.0);
        // the gaussian family's q_c is its 1/√e width
        assert!((profile.r(12.566) - (-0.5f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn a_table_profile_resolves_relative_to_the_config_directory() {
        let dir = tempfile::tempdir().unwrap();
        let table = r#"{"family": "tabulated",
                        "q": [-2.0, -1.0, 1.0, 2.0],
                        "r": [0.3, 1.1, 1.1, 0.3],
                        "theta": [0.0, 0.2, 0.2, 0.0],
                        "phi": [0.0, 0.0, 0.0, 0.0]}"#;
        fs::write(dir.path().join("profile.json"), table).unwrap();
        let config = RunConfig::from_json(&patched(
            r#"{"family": "gaussian", "r0": 1.0, "q_c": 12.566,
                        "theta0": 0.0, "beta": 0.0, "phi0": 0.0}"#,
            r#"{"table": "profile.json"}"#,
        ))
        .unwrap();
        let profile = config.resolve_profile(dir.path()).unwrap();
        assert_eq!(profile.r(-1.0), 1.1);
        // the same reference from a directory without the file fails with
        // the offending path in the message
        let missing = tempfile::tempdir().unwrap();
        let err = config.resolve_profile(missing.path()).unwrap_err();
        assert!(err.to_string().contains("profile.json"), "got: {err}");
    }

    #[test]
    fn a_table_reference_with_extra_keys_is_rejected() {
        let config = RunConfig::from_json(&patched(
            r#"{"family": "gaussian", "r0": 1.0, "q_c": 12.566,
                        "theta0": 0.0, "beta": 0.0, "phi0": 0.0}"#,
            r#"{"table": "profile.json", "family": "gaussian"}"#,
        ))
        .unwrap();
        let err = config.resolve_profile(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("exactly one key"), "got: {err}");
    }

    #[test]
    fn malformed_profiles_surface_the_library_diagnostic() {
        let config = RunConfig::from_json(&patched(
            "\"family\": \"gaussian\"",
            "\"family\": \"lorentzian\"",
        ))
        .unwrap();
        assert!(config.resolve_profile(Path::new(".")).is_err());
    }

    #[test]
    fn output_constraints_are_enforced() {
        for (pattern, replacement, needle) in [
            ("\"formats\": [\"csv\", \"json\"]", "\"formats\": []", "at least one"),
            ("\"formats\": [\"csv\", \"json\"]", "\"formats\": [\"csv\", \"csv\"]", "twice"),
            ("\"directory\": \"out\"", "\"directory\": \"\"", "non-empty"),
            ("\"n\": 5000", "\"n\": 0", "at least 1"),
        ] {
            let err = RunConfig::from_json(&patched(pattern, replacement)).unwrap_err();
            assert!(err.to_string().contains(needle), "{replacement:?} gave: {err}");
        }
        // an unknown format name fails in serde, before validate()
        let err =
            RunConfig::from_json(&patched("\"json\"", "\"parquet\"")).unwrap_err();
        assert!(err.to_string().contains("parquet") || err.to_string().contains("variant"));
    }

    #[test]
    fn the_basis_section_drives_the_library_constructor() {
        let config = RunConfig::from_json(&example()).unwrap();
        // c = (π/2) dX/(λf) = 4π for this geometry, so S = 8
        let basis = config.build_basis().unwrap();
        assert_eq!(basis.k_count(), 8);
        assert!((config.imaging().unwrap().shannon() - 8.0).abs() < 1e-12);
        // an unbuildable basis request propagates the library error
        let bad = RunConfig::from_json(&patched("\"m\": 200", "\"m\": 4")).unwrap();
        assert!(bad.build_basis().is_err());
    }
}
