//! Scenario configuration: a sectioned `key = value` text format.
//!
//! Sections appear as `[scenario]`, `[target]`, `[graph]`, `[solve]`,
//! `[probe]`, `[uniqueness]`, `[audit]`; blank lines and `#` comments are
//! ignored. Unknown sections or keys are rejected with their line number,
//! as are malformed values. `scenario.name` is the only required key;
//! everything else has a default. [`ScenarioConfig::emit`] writes the
//! canonical form (every key explicit, fixed order, full-precision
//! numbers), and parsing that text reproduces the config exactly.

use crate::error::{Error, Result};
use crate::space::NpcSpace;
use crate::wp::IsometryWord;

/// The fixed catalog of scripted experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioName {
    NpcAudit,
    MetricOrders,
    Stratification,
    UniqueContinuation,
    Uniqueness,
    Properness,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::NpcAudit => "npc-audit",
            ScenarioName::MetricOrders => "metric-orders",
            ScenarioName::Stratification => "stratification",
            ScenarioName::UniqueContinuation => "unique-continuation",
            ScenarioName::Uniqueness => "uniqueness",
            ScenarioName::Properness => "properness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "npc-audit" => ScenarioName::NpcAudit,
            "metric-orders" => ScenarioName::MetricOrders,
            "stratification" => ScenarioName::Stratification,
            "unique-continuation" => ScenarioName::UniqueContinuation,
            "uniqueness" => ScenarioName::Uniqueness,
            "properness" => ScenarioName::Properness,
            _ => return None,
        })
    }
}

/// Target-space choice of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    Euclidean,
    HyperbolicPlane,
    StarTree,
    Cusp,
    WpModel,
}

impl TargetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetKind::Euclidean => "euclidean",
            TargetKind::HyperbolicPlane => "hyperbolic-plane",
            TargetKind::StarTree => "star-tree",
            TargetKind::Cusp => "cusp",
            TargetKind::WpModel => "wp-model",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "euclidean" => TargetKind::Euclidean,
            "hyperbolic-plane" => TargetKind::HyperbolicPlane,
            "star-tree" => TargetKind::StarTree,
            "cusp" => TargetKind::Cusp,
            "wp-model" => TargetKind::WpModel,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Cycle,
    Path,
    Grid,
}

impl GraphKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GraphKind::Cycle => "cycle",
            GraphKind::Path => "path",
            GraphKind::Grid => "grid",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinMode {
    None,
    First,
    Boundary,
}

impl PinMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PinMode::None => "none",
            PinMode::First => "first",
            PinMode::Boundary => "boundary",
        }
    }
}

/// Gain placed on the distinguished (wrap) edge of the domain graph.
#[derive(Clone, Debug, PartialEq)]
pub enum GainSpec {
    Identity,
    Twist { curve: usize, power: i64 },
    Translate { axis: u8, length: f64 },
}

impl GainSpec {
    pub fn to_word(&self) -> IsometryWord {
        match self {
            GainSpec::Identity => IsometryWord::identity(),
            GainSpec::Twist { curve, power } => IsometryWord::twist_power(*curve, *power),
            GainSpec::Translate { axis, length } => IsometryWord::translation(*axis, *length),
        }
    }

    pub fn emit(&self) -> String {
        match self {
            GainSpec::Identity => "identity".into(),
            GainSpec::Twist { curve, power } => {
                if *power == 1 {
                    format!("twist:{curve}")
                } else {
                    format!("twist:{curve}^{power}")
                }
            }
            GainSpec::Translate { axis, length } => format!("translate:{axis}:{length}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s == "identity" {
            return Some(GainSpec::Identity);
        }
        if let Some(rest) = s.strip_prefix("twist:") {
            return match rest.split_once('^') {
                Some((c, p)) => Some(GainSpec::Twist {
                    curve: c.parse().ok()?,
                    power: p.parse().ok()?,
                }),
                None => Some(GainSpec::Twist { curve: rest.parse().ok()?, power: 1 }),
            };
        }
        if let Some(rest) = s.strip_prefix("translate:") {
            let (a, l) = rest.split_once(':')?;
            return Some(GainSpec::Translate { axis: a.parse().ok()?, length: l.parse().ok()? });
        }
        None
    }
}

/// Fully resolved scenario configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    pub seed: u64,
    pub genus: usize,
    pub out_dir: String,

    pub target_kind: TargetKind,
    pub euclidean_dim: usize,
    pub branches: usize,
    pub branch_length: f64,

    pub graph_kind: GraphKind,
    pub size: usize,
    pub rows: usize,
    pub spacing: f64,
    pub weight: f64,
    pub gain: GainSpec,
    pub pin: PinMode,

    pub max_sweeps: usize,
    pub tol_energy_rel: f64,
    pub tol_move: f64,

    pub probe_level: f64,
    pub probe_radius: f64,
    pub probe_samples: usize,
    pub probe_translation_level: f64,
    pub probe_translation_radius: f64,

    pub uniqueness_seeds: Vec<u64>,

    pub audit_triples: usize,
    pub audit_quadruples: usize,
    pub audit_map_pairs: usize,
}

impl ScenarioConfig {
    /// Defaults for a scenario (everything except the name).
    pub fn defaults(name: ScenarioName) -> Self {
        ScenarioConfig {
            name,
            seed: 0,
            genus: 2,
            out_dir: "out".into(),
            target_kind: TargetKind::WpModel,
            euclidean_dim: 2,
            branches: 3,
            branch_length: 1.0,
            graph_kind: GraphKind::Cycle,
            size: 8,
            rows: 8,
            spacing: 1.0,
            weight: 1.0,
            gain: GainSpec::Identity,
            pin: PinMode::None,
            max_sweeps: 100_000,
            tol_energy_rel: 1e-10,
            tol_move: 1e-8,
            probe_level: 0.05,
            probe_radius: 6.0,
            probe_samples: 4000,
            probe_translation_level: 1.5,
            probe_translation_radius: 2.3,
            uniqueness_seeds: vec![1, 2, 3, 4, 5],
            audit_triples: 10_000,
            audit_quadruples: 10_000,
            audit_map_pairs: 1000,
        }
    }

    /// Builds the configured target space.
    pub fn target_space(&self) -> Result<NpcSpace> {
        match self.target_kind {
            TargetKind::Euclidean => NpcSpace::euclidean(self.euclidean_dim),
            TargetKind::HyperbolicPlane => Ok(NpcSpace::HyperbolicPlane),
            TargetKind::StarTree => {
                NpcSpace::star_tree(vec![self.branch_length; self.branches])
            }
            TargetKind::Cusp => Ok(NpcSpace::CuspFactor),
            TargetKind::WpModel => NpcSpace::wp_model(self.genus),
        }
    }

    /// Canonical text form; parsing it reproduces `self` exactly.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        s.push_str("[scenario]\n");
        s.push_str(&format!("name = {}\n", self.name.as_str()));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("genus = {}\n", self.genus));
        s.push_str(&format!("out_dir = {}\n", self.out_dir));
        s.push_str("\n[target]\n");
        s.push_str(&format!("kind = {}\n", self.target_kind.as_str()));
        s.push_str(&format!("dim = {}\n", self.euclidean_dim));
        s.push_str(&format!("branches = {}\n", self.branches));
        s.push_str(&format!("branch_length = {}\n", self.branch_length));
        s.push_str("\n[graph]\n");
        s.push_str(&format!("kind = {}\n", self.graph_kind.as_str()));
        s.push_str(&format!("size = {}\n", self.size));
        s.push_str(&format!("rows = {}\n", self.rows));
        s.push_str(&format!("spacing = {}\n", self.spacing));
        s.push_str(&format!("weight = {}\n", self.weight));
        s.push_str(&format!("gain = {}\n", self.gain.emit()));
        s.push_str(&format!("pin = {}\n", self.pin.as_str()));
        s.push_str("\n[solve]\n");
        s.push_str(&format!("max_sweeps = {}\n", self.max_sweeps));
        s.push_str(&format!("tol_energy_rel = {}\n", self.tol_energy_rel));
        s.push_str(&format!("tol_move = {}\n", self.tol_move));
        s.push_str("\n[probe]\n");
        s.push_str(&format!("level = {}\n", self.probe_level));
        s.push_str(&format!("radius = {}\n", self.probe_radius));
        s.push_str(&format!("samples = {}\n", self.probe_samples));
        s.push_str(&format!("translation_level = {}\n", self.probe_translation_level));
        s.push_str(&format!("translation_radius = {}\n", self.probe_translation_radius));
        s.push_str("\n[uniqueness]\n");
        let seeds: Vec<String> = self.uniqueness_seeds.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("seeds = {}\n", seeds.join(",")));
        s.push_str("\n[audit]\n");
        s.push_str(&format!("triples = {}\n", self.audit_triples));
        s.push_str(&format!("quadruples = {}\n", self.audit_quadruples));
        s.push_str(&format!("map_pairs = {}\n", self.audit_map_pairs));
        s
    }
}

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

/// Parses the sectioned `key = value` text into a validated config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut section = String::new();
    let mut name: Option<ScenarioName> = None;
    // collected raw assignments: (line, section, key, value)
    let mut entries: Vec<(usize, String, String, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(body) = line.strip_prefix('[') {
            let Some(sec) = body.strip_suffix(']') else {
                return Err(cfg_err(lineno, "unterminated section header"));
            };
            let sec = sec.trim();
            if !matches!(
                sec,
                "scenario" | "target" | "graph" | "solve" | "probe" | "uniqueness" | "audit"
            ) {
                return Err(cfg_err(lineno, format!("unknown section [{sec}]")));
            }
            section = sec.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(cfg_err(lineno, "expected `key = value`"));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if section.is_empty() {
            return Err(cfg_err(lineno, "key before any [section] header"));
        }
        if section == "scenario" && key == "name" {
            name = Some(ScenarioName::parse(&value).ok_or_else(|| {
                cfg_err(
                    lineno,
                    format!(
                        "unknown scenario `{value}` (expected one of npc-audit, metric-orders, \
                         stratification, unique-continuation, uniqueness, properness)"
                    ),
                )
            })?);
        } else {
            entries.push((lineno, section.clone(), key, value));
        }
    }

    let Some(name) = name else {
        return Err(cfg_err(
            text.lines().count().max(1),
            "missing required key `name` in section [scenario] \
             (required keys: scenario.name)",
        ));
    };
    let mut cfg = ScenarioConfig::scenario_defaults(name);

    for (lineno, section, key, value) in entries {
        apply_entry(&mut cfg, lineno, &section, &key, &value)?;
    }

    if cfg.genus < 2 {
        return Err(Error::invalid("genus must be >= 2"));
    }
    if cfg.uniqueness_seeds.is_empty() {
        return Err(Error::invalid("uniqueness seeds must be nonempty"));
    }
    Ok(cfg)
}

fn apply_entry(
    cfg: &mut ScenarioConfig,
    lineno: usize,
    section: &str,
    key: &str,
    value: &str,
) -> Result<()> {
    fn num<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| cfg_err(lineno, format!("bad value `{value}` for `{key}`")))
    }
    match (section, key) {
        ("scenario", "seed") => cfg.seed = num(lineno, key, value)?,
        ("scenario", "genus") => cfg.genus = num(lineno, key, value)?,
        ("scenario", "out_dir") => cfg.out_dir = value.to_string(),
        ("target", "kind") => {
            cfg.target_kind = TargetKind::parse(value)
                .ok_or_else(|| cfg_err(lineno, format!("unknown target kind `{value}`")))?;
        }
        ("target", "dim") => cfg.euclidean_dim = num(lineno, key, value)?,
        ("target", "branches") => cfg.branches = num(lineno, key, value)?,
        ("target", "branch_length") => cfg.branch_length = num(lineno, key, value)?,
        ("graph", "kind") => {
            cfg.graph_kind = match value {
                "cycle" => GraphKind::Cycle,
                "path" => GraphKind::Path,
                "grid" => GraphKind::Grid,
                _ => return Err(cfg_err(lineno, format!("unknown graph kind `{value}`"))),
            };
        }
        ("graph", "size") => cfg.size = num(lineno, key, value)?,
        ("graph", "rows") => cfg.rows = num(lineno, key, value)?,
        ("graph", "spacing") => cfg.spacing = num(lineno, key, value)?,
        ("graph", "weight") => cfg.weight = num(lineno, key, value)?,
        ("graph", "gain") => {
            cfg.gain = GainSpec::parse(value)
                .ok_or_else(|| cfg_err(lineno, format!("bad gain spec `{value}`")))?;
        }
        ("graph", "pin") => {
            cfg.pin = match value {
                "none" => PinMode::None,
                "first" => PinMode::First,
                "boundary" => PinMode::Boundary,
                _ => return Err(cfg_err(lineno, format!("unknown pin mode `{value}`"))),
            };
        }
        ("solve", "max_sweeps") => cfg.max_sweeps = num(lineno, key, value)?,
        ("solve", "tol_energy_rel") => cfg.tol_energy_rel = num(lineno, key, value)?,
        ("solve", "tol_move") => cfg.tol_move = num(lineno, key, value)?,
        ("probe", "level") => cfg.probe_level = num(lineno, key, value)?,
        ("probe", "radius") => cfg.probe_radius = num(lineno, key, value)?,
        ("probe", "samples") => cfg.probe_samples = num(lineno, key, value)?,
        ("probe", "translation_level") => cfg.probe_translation_level = num(lineno, key, value)?,
        ("probe", "translation_radius") => cfg.probe_translation_radius = num(lineno, key, value)?,
        ("uniqueness", "seeds") => {
            let seeds = value
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| cfg_err(lineno, format!("bad seed list `{value}`")))?;
            cfg.uniqueness_seeds = seeds;
        }
        ("audit", "triples") => cfg.audit_triples = num(lineno, key, value)?,
        ("audit", "quadruples") => cfg.audit_quadruples = num(lineno, key, value)?,
        ("audit", "map_pairs") => cfg.audit_map_pairs = num(lineno, key, value)?,
        _ => {
            return Err(cfg_err(
                lineno,
                format!("unknown key `{key}` in section [{section}]"),
            ))
        }
    }
    Ok(())
}

/// Parses a compact target spec used by `audit-space`:
/// `euclidean:<dim>`, `hyperbolic-plane`, `star-tree:<l1,l2,...>`, `cusp`,
/// `wp-model:<genus>`, or `product:(spec;spec;...)`.
pub fn parse_target_spec(spec: &str) -> Result<NpcSpace> {
    let spec = spec.trim();
    if spec == "hyperbolic-plane" {
        return Ok(NpcSpace::HyperbolicPlane);
    }
    if spec == "cusp" {
        return Ok(NpcSpace::CuspFactor);
    }
    if let Some(rest) = spec.strip_prefix("euclidean:") {
        let dim: usize = rest
            .parse()
            .map_err(|_| Error::invalid(format!("bad euclidean dimension `{rest}`")))?;
        return NpcSpace::euclidean(dim);
    }
    if let Some(rest) = spec.strip_prefix("star-tree:") {
        let lengths = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::invalid(format!("bad branch lengths `{rest}`")))?;
        return NpcSpace::star_tree(lengths);
    }
    if let Some(rest) = spec.strip_prefix("wp-model:") {
        let genus: usize = rest
            .parse()
            .map_err(|_| Error::invalid(format!("bad genus `{rest}`")))?;
        if genus < 2 {
            return Err(Error::invalid("genus must be >= 2"));
        }
        return NpcSpace::wp_model(genus);
    }
    if let Some(rest) = spec.strip_prefix("product:") {
        let inner = rest
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::invalid("product spec needs parentheses"))?;
        let factors = inner
            .split(';')
            .map(parse_target_spec)
            .collect::<Result<Vec<_>>>()?;
        return crate::space::product_space(factors);
    }
    Err(Error::invalid(format!(
        "unknown target spec `{spec}` (expected euclidean:<dim>, hyperbolic-plane, \
         star-tree:<l1,...>, cusp, wp-model:<genus>, or product:(...))"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("[scenario]\nname = stratification\n").unwrap();
        assert_eq!(cfg.name, ScenarioName::Stratification);
        assert_eq!(cfg.genus, 2);
        assert_eq!(cfg.size, 8);
        // stratification defaults to a high-power twist gain
        assert_eq!(cfg.gain, GainSpec::Twist { curve: 1, power: 300_000 });
        let cfg = parse_config("[scenario]\nname = npc-audit\n").unwrap();
        assert_eq!(cfg.gain, GainSpec::Identity);
    }

    #[test]
    fn emit_then_parse_roundtrips() {
        let mut cfg = ScenarioConfig::defaults(ScenarioName::Uniqueness);
        cfg.seed = 12345;
        cfg.gain = GainSpec::Twist { curve: 1, power: 300_000 };
        cfg.tol_move = 3.5e-9;
        cfg.uniqueness_seeds = vec![9, 8, 7];
        let text = cfg.emit();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn genus_one_is_rejected_with_message() {
        let err = parse_config("[scenario]\nname = metric-orders\ngenus = 1\n").unwrap_err();
        assert!(err.to_string().contains("genus must be >= 2"), "{err}");
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let err = parse_config("").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("required keys: scenario.name"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let err = parse_config("[scenario]\nname = npc-audit\n\n[graph]\nbogus = 3\n").unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("bogus"));
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn unknown_section_is_rejected() {
        let err = parse_config("[scenario]\nname = npc-audit\n[nope]\nx = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn type_mismatch_reports_line() {
        let err =
            parse_config("[scenario]\nname = npc-audit\nseed = banana\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn gain_specs_parse_and_emit() {
        for s in ["identity", "twist:1", "twist:2^-3", "twist:1^300000", "translate:0:1.5"] {
            let g = GainSpec::parse(s).unwrap();
            assert_eq!(g.emit(), s);
        }
        assert!(GainSpec::parse("twist").is_none());
        assert!(GainSpec::parse("translate:0").is_none());
    }

    #[test]
    fn target_specs_parse() {
        assert_eq!(
            parse_target_spec("euclidean:3").unwrap(),
            NpcSpace::euclidean(3).unwrap()
        );
        assert_eq!(parse_target_spec("cusp").unwrap(), NpcSpace::CuspFactor);
        assert_eq!(
            parse_target_spec("wp-model:2").unwrap(),
            NpcSpace::wp_model(2).unwrap()
        );
        assert!(parse_target_spec("wp-model:1").is_err());
        let p = parse_target_spec("product:(cusp;hyperbolic-plane)").unwrap();
        assert_eq!(
            p,
            NpcSpace::Product(vec![NpcSpace::CuspFactor, NpcSpace::HyperbolicPlane])
        );
        assert!(parse_target_spec("nonsense").is_err());
    }
}
