//! Experiment configuration: a JSON document checked against a fixed schema.
//!
//! Schema problems are reported with the line (and, for syntax errors, the
//! column) of the offending key.

use std::fmt;
use std::fs;
use std::path::Path;

use fracbellman::harness::{Cutoff, OscillationParams};
use fracbellman::kernel::{Ellipticity, KernelPreset};
use fracbellman::presets::FieldPreset;
use serde::Deserialize;

/// Checks that can be toggled in the `checks` list.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Membership,
    Solve,
    Comparison,
    Spectral,
    Operators,
    BoundL,
    Comparability,
    Decay,
    Holder,
    PointEstimate,
    OscillationLemma,
    TimeRegularity,
    Subsolution,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Membership,
        Check::Solve,
        Check::Comparison,
        Check::Spectral,
        Check::Operators,
        Check::BoundL,
        Check::Comparability,
        Check::Decay,
        Check::Holder,
        Check::PointEstimate,
        Check::OscillationLemma,
        Check::TimeRegularity,
        Check::Subsolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Membership => "membership",
            Check::Solve => "solve",
            Check::Comparison => "comparison",
            Check::Spectral => "spectral",
            Check::Operators => "operators",
            Check::BoundL => "bound_l",
            Check::Comparability => "comparability",
            Check::Decay => "decay",
            Check::Holder => "holder",
            Check::PointEstimate => "point_estimate",
            Check::OscillationLemma => "oscillation_lemma",
            Check::TimeRegularity => "time_regularity",
            Check::Subsolution => "subsolution",
        }
    }

    /// P and N live on box grids containing `B_2`.
    fn needs_pn(self) -> bool {
        matches!(self, Check::Comparability | Check::Decay)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Finite,
    Pucci,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    pub kernel: String,
    #[serde(default)]
    pub drift: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    #[serde(default)]
    pub members: Vec<MemberConfig>,
}

/// Parameters of the regularity checks. Times are offsets from the final time.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessParams {
    pub kappa: f64,
    pub theta: f64,
    pub alpha: f64,
    /// Length of the time window on which P and N are computed.
    pub window: f64,
    pub comparability_radius: f64,
    pub region_radius: f64,
    pub holder_radius: f64,
    pub holder_min_alpha: f64,
    pub holder_spread: f64,
    pub pe_radius: f64,
    pub pe_time: f64,
    /// Levels as multiples of the measured infimum.
    pub pe_levels: Vec<f64>,
    pub supersolution_shift: f64,
    pub lemma_radius: f64,
    pub lemma_time: f64,
    pub subsolution_kernel: String,
    pub truncation: f64,
    pub cutoff: [f64; 2],
    pub subsolution_height: f64,
    pub comparison_shift: f64,
    pub comparison_horizon: f64,
    pub property_points: usize,
    pub refine_tolerance: f64,
    pub bound_tolerance: f64,
    pub spectral_tolerance: f64,
    pub spectral_gain: f64,
}

impl Default for HarnessParams {
    fn default() -> Self {
        Self {
            kappa: 0.25,
            theta: 0.05,
            alpha: 0.5,
            window: 1.0,
            comparability_radius: 0.125,
            region_radius: 0.5,
            holder_radius: 0.5,
            holder_min_alpha: 0.05,
            holder_spread: 5.0,
            pe_radius: 0.5,
            pe_time: -1.0,
            pe_levels: vec![1.02, 1.05, 1.1, 1.15, 1.2, 1.3],
            supersolution_shift: 0.5,
            lemma_radius: 0.5,
            lemma_time: -1.0,
            subsolution_kernel: "const".into(),
            truncation: 1.0,
            cutoff: [0.75, 0.5],
            subsolution_height: 0.25,
            comparison_shift: 0.1,
            comparison_horizon: 0.25,
            property_points: 1000,
            refine_tolerance: 0.2,
            bound_tolerance: 0.1,
            spectral_tolerance: 1e-2,
            spectral_gain: 1.5,
        }
    }
}

fn default_exterior() -> String {
    "zero".into()
}

fn default_cfl() -> f64 {
    0.9
}

fn default_checks() -> Vec<Check> {
    vec![Check::Membership, Check::Solve]
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    #[serde(rename = "R")]
    pub half_width: f64,
    pub h: f64,
    #[serde(default)]
    pub periodic: bool,
    #[serde(default)]
    pub t0: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub sigma: Vec<f64>,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub upper: f64,
    #[serde(default)]
    pub beta: f64,
    pub family: FamilyConfig,
    pub initial: String,
    #[serde(default = "default_exterior")]
    pub exterior: String,
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
    /// Constant source term `f`.
    #[serde(default)]
    pub source: f64,
    #[serde(default)]
    pub record_interval: Option<f64>,
    /// Repeat resolution-dependent checks at `h/2` and compare.
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub harness: HarnessParams,
    #[serde(default)]
    pub out: Option<String>,
    /// Seeds the choice of sample points for the operator identities.
    #[serde(default)]
    pub seed: u64,
}

/// A schema violation with its position in the source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.column > 0 {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"` (1 if absent).
fn locate(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map_or(1, |i| i + 1)
}

/// Line of the `idx`-th occurrence of `"key"`.
fn locate_nth(text: &str, key: &str, idx: usize) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.contains(&quoted))
        .nth(idx)
        .map_or_else(|| locate(text, key), |(i, _)| i + 1)
}

/// A parsed and validated configuration.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub initial: FieldPreset,
    pub exterior: FieldPreset,
    /// `(kernel, drift)` per member of a finite family.
    pub members: Vec<(KernelPreset, [f64; 2])>,
    pub subsolution_kernel: KernelPreset,
}

impl Experiment {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            column: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        validate(config, text)
    }

    pub fn enabled(&self, check: Check) -> bool {
        self.config.checks.contains(&check)
    }

    pub fn bounds(&self) -> Ellipticity<f64> {
        Ellipticity { lower: self.config.lambda, upper: self.config.upper, beta: self.config.beta }
    }

    /// Time at which every regularity check is anchored.
    pub fn final_time(&self) -> f64 {
        self.config.t0 + self.config.horizon
    }
}

fn validate(config: ExperimentConfig, text: &str) -> Result<Experiment, ConfigError> {
    let err = |key: &str, message: String| ConfigError { line: locate(text, key), column: 0, message };
    let c = &config;
    if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch)) {
        return Err(err("name", format!("`name` must be a nonempty [A-Za-z0-9._-] string, got `{}`", c.name)));
    }
    if c.n != 1 && c.n != 2 {
        return Err(err("n", format!("`n` must be 1 or 2, got {}", c.n)));
    }
    if !(c.h > 0.0 && c.h.is_finite()) {
        return Err(err("h", format!("`h` must be positive, got {}", c.h)));
    }
    if !(c.half_width > 0.0 && c.half_width.is_finite()) {
        return Err(err("R", format!("`R` must be positive, got {}", c.half_width)));
    }
    let grid = if c.periodic {
        fracbellman::field::Grid::<f64>::periodic(c.n, c.half_width, c.h)
    } else {
        fracbellman::field::Grid::<f64>::new(c.n, c.half_width, c.h)
    };
    grid.map_err(|e| err("h", e.to_string()))?;
    if !c.t0.is_finite() {
        return Err(err("t0", "`t0` must be finite".into()));
    }
    if !(c.horizon > 0.0 && c.horizon.is_finite()) {
        return Err(err("T", format!("`T` must be positive, got {}", c.horizon)));
    }
    if c.sigma.is_empty() {
        return Err(err("sigma", "`sigma` must list at least one order".into()));
    }
    for &s in &c.sigma {
        if !(s > 0.0 && s < 2.0) {
            return Err(err("sigma", format!("every sigma must lie in (0, 2), got {s}")));
        }
        if s < 1.0 {
            log::warn!("sigma = {s} lies outside [1, 2)");
        }
    }
    if !(c.lambda > 0.0) {
        return Err(err("lambda", format!("`lambda` must be positive, got {}", c.lambda)));
    }
    if !(c.lambda <= c.upper) || !c.upper.is_finite() {
        return Err(err("Lambda", format!("need lambda <= Lambda, got lambda = {}, Lambda = {}", c.lambda, c.upper)));
    }
    if !(c.beta >= 0.0 && c.beta.is_finite()) {
        return Err(err("beta", format!("`beta` must be nonnegative, got {}", c.beta)));
    }

    let mut members = Vec::new();
    match c.family.kind {
        FamilyKind::Pucci if !c.family.members.is_empty() => {
            return Err(err("members", "a pucci family takes no members".into()));
        }
        FamilyKind::Finite if c.family.members.is_empty() => {
            return Err(err("family", "a finite family needs at least one member".into()));
        }
        _ => {}
    }
    for (j, m) in c.family.members.iter().enumerate() {
        let line = locate_nth(text, "kernel", j);
        let here = |message: String| ConfigError { line, column: 0, message };
        let k: KernelPreset = m.kernel.parse().map_err(|e: fracbellman::Error| here(e.to_string()))?;
        if m.drift.len() > c.n || m.drift.iter().any(|d| !d.is_finite()) {
            return Err(here(format!("member {j}: `drift` needs at most {} finite components", c.n)));
        }
        let mut b = [0.0; 2];
        b[..m.drift.len()].copy_from_slice(&m.drift);
        members.push((k, b));
    }

    let initial: FieldPreset = c.initial.parse().map_err(|e: fracbellman::Error| err("initial", e.to_string()))?;
    let exterior: FieldPreset = c.exterior.parse().map_err(|e: fracbellman::Error| err("exterior", e.to_string()))?;
    let (_, gamma) = exterior.growth();
    if gamma > 0.5 {
        return Err(err("exterior", format!("exterior growth exponent {gamma} exceeds 1/2")));
    }
    if c.periodic && exterior != FieldPreset::Zero {
        return Err(err("exterior", "periodic grids take no exterior data; use \"zero\"".into()));
    }
    if !(c.cfl_fraction > 0.0 && c.cfl_fraction <= 1.0) {
        return Err(err("cfl_fraction", format!("`cfl_fraction` must lie in (0, 1], got {}", c.cfl_fraction)));
    }
    if !c.source.is_finite() {
        return Err(err("source", "`source` must be finite".into()));
    }
    if let Some(r) = c.record_interval {
        if !(r > 0.0 && r <= c.horizon) {
            return Err(err("record_interval", format!("`record_interval` must lie in (0, T], got {r}")));
        }
    }
    let mut seen = Vec::new();
    for &check in &c.checks {
        if seen.contains(&check) {
            return Err(err("checks", format!("check `{check}` is listed twice")));
        }
        seen.push(check);
        if check.needs_pn() && (c.periodic || c.half_width < 2.0) {
            return Err(err("checks", format!("check `{check}` needs a box grid with R >= 2")));
        }
    }
    if config.checks.contains(&Check::Spectral) {
        let ok_family = c.family.kind == FamilyKind::Finite
            && members.iter().all(|(k, b)| *k == KernelPreset::Const && *b == [0.0, 0.0]);
        if !c.periodic || !ok_family || !matches!(initial, FieldPreset::Cos(_)) || c.source != 0.0 {
            return Err(err(
                "checks",
                "check `spectral` needs a periodic grid, constant kernels without drift, a `cos(k)` initial field and no source".into(),
            ));
        }
        if let FieldPreset::Cos(k) = initial {
            let waves = k * c.half_width / std::f64::consts::PI;
            if (waves - waves.round()).abs() > 1e-9 {
                return Err(err(
                    "initial",
                    format!("cos({k}) is not periodic on the torus of half-width {}", c.half_width),
                ));
            }
        }
    }

    let hp = &c.harness;
    let subsolution_kernel: KernelPreset =
        hp.subsolution_kernel.parse().map_err(|e: fracbellman::Error| err("subsolution_kernel", e.to_string()))?;
    if config.checks.contains(&Check::Decay) {
        for &s in &c.sigma {
            OscillationParams::new(hp.kappa, hp.theta, hp.alpha)
                .validate(s)
                .map_err(|e| err("kappa", format!("sigma = {s}: {e}")))?;
        }
    }
    if !(hp.alpha > 0.0 && hp.alpha < 1.0) {
        return Err(err("alpha", format!("`alpha` must lie in (0, 1), got {}", hp.alpha)));
    }
    let positive = [
        ("window", hp.window),
        ("comparability_radius", hp.comparability_radius),
        ("region_radius", hp.region_radius),
        ("holder_radius", hp.holder_radius),
        ("holder_spread", hp.holder_spread),
        ("pe_radius", hp.pe_radius),
        ("lemma_radius", hp.lemma_radius),
        ("truncation", hp.truncation),
        ("subsolution_height", hp.subsolution_height),
        ("comparison_horizon", hp.comparison_horizon),
        ("refine_tolerance", hp.refine_tolerance),
        ("bound_tolerance", hp.bound_tolerance),
        ("spectral_tolerance", hp.spectral_tolerance),
        ("spectral_gain", hp.spectral_gain),
    ];
    for (key, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(key, format!("`{key}` must be positive, got {v}")));
        }
    }
    if !(hp.comparison_shift >= 0.0) || !(hp.supersolution_shift >= 0.0) || !(hp.holder_min_alpha >= 0.0) {
        return Err(err("harness", "shifts and holder_min_alpha must be nonnegative".into()));
    }
    if hp.pe_levels.is_empty() || hp.pe_levels.iter().any(|l| !(*l > 0.0)) {
        return Err(err("pe_levels", "`pe_levels` must be a nonempty list of positive multiples".into()));
    }
    Cutoff::new(hp.cutoff[0], hp.cutoff[1]).map_err(|e| err("cutoff", e.to_string()))?;
    if config.checks.contains(&Check::Operators) && hp.property_points == 0 {
        return Err(err("property_points", "`property_points` must be positive".into()));
    }

    Ok(Experiment { initial, exterior, members, subsolution_kernel, config })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "name": "zero",
  "n": 1,
  "R": 2.0,
  "h": 0.125,
  "T": 0.5,
  "sigma": [1.5],
  "lambda": 1.0,
  "Lambda": 2.0,
  "family": {"kind": "finite", "members": [{"kernel": "const"}]},
  "initial": "zero"
}"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let e = Experiment::parse(MINIMAL).unwrap();
        assert_eq!(e.config.cfl_fraction, 0.9);
        assert_eq!(e.exterior, FieldPreset::Zero);
        assert_eq!(e.config.checks, vec![Check::Membership, Check::Solve]);
        assert_eq!(e.members, vec![(KernelPreset::Const, [0.0, 0.0])]);
        assert_eq!(e.final_time(), 0.5);
    }

    #[test]
    fn lambda_above_upper_points_at_the_key() {
        let bad = MINIMAL.replace("\"lambda\": 1.0", "\"lambda\": 3.0");
        let e = Experiment::parse(&bad).unwrap_err();
        assert_eq!(e.line, 9);
        assert!(e.message.contains("lambda <= Lambda"));
    }

    #[test]
    fn unknown_keys_and_syntax_errors_carry_positions() {
        let bad = MINIMAL.replace("\"n\": 1,", "\"n\": 1,\n  \"dimension\": 1,");
        let e = Experiment::parse(&bad).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("dimension"));
        let e = Experiment::parse("{\n  \"name\": \"x\",\n  \"n\": ,\n}").unwrap_err();
        assert_eq!((e.line, e.column > 0), (3, true));
    }

    #[test]
    fn semantic_guards() {
        let cases = [
            ("\"sigma\": [1.5]", "\"sigma\": []", "sigma"),
            ("\"sigma\": [1.5]", "\"sigma\": [2.0]", "(0, 2)"),
            ("\"initial\": \"zero\"", "\"initial\": \"zero\",\n  \"exterior\": \"linear(1)\"", "exceeds 1/2"),
            ("\"initial\": \"zero\"", "\"initial\": \"zero\",\n  \"checks\": [\"spectral\"]", "spectral"),
            ("\"R\": 2.0", "\"R\": 1.0", "R >= 2"),
            (
                "{\"kind\": \"finite\", \"members\": [{\"kernel\": \"const\"}]}",
                "{\"kind\": \"pucci\", \"members\": [{\"kernel\": \"const\"}]}",
                "no members",
            ),
        ];
        for (from, to, needle) in cases {
            let mut text = MINIMAL.replace(from, to);
            if needle == "R >= 2" {
                text = text.replace("\"initial\": \"zero\"", "\"initial\": \"zero\",\n  \"checks\": [\"decay\"]");
            }
            let e = Experiment::parse(&text).unwrap_err();
            assert!(e.message.contains(needle), "{needle}: {e}");
        }
        let bad = MINIMAL.replace("\"const\"", "\"wobbly(2)\"");
        assert_eq!(Experiment::parse(&bad).unwrap_err().line, 10);
    }
}
