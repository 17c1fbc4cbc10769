//! Plain-text run configuration: `[section]` headers and `key = value` lines,
//! `#` comments. Parsed with line-number diagnostics and validated before any
//! compute, so every parameter combination the theorems exclude is rejected
//! with a message quoting the violated relation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::family::{FamilyKind, FamilyParams};
use crate::grid::Grid;
use crate::group::GroupSpec;

#[derive(Debug, Clone)]
pub struct Sections {
    entries: Vec<(String, Vec<(usize, String, String)>)>,
}

impl Sections {
    pub fn get(&self, name: &str) -> Option<&[(usize, String, String)]> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, kv)| kv.as_slice())
    }

    pub fn sections(&self) -> impl Iterator<Item = (&str, &[(usize, String, String)])> {
        self.entries.iter().map(|(n, kv)| (n.as_str(), kv.as_slice()))
    }

    fn value(&self, section: &str, key: &str) -> Option<(usize, &str)> {
        self.get(section)?
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }
}

pub fn parse_sections(text: &str) -> Result<Sections> {
    let mut entries: Vec<(String, Vec<(usize, String, String)>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with("stratlab-") {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(Some(lineno), "unterminated section header"))?
                .trim()
                .to_string();
            if entries.iter().any(|(n, _)| *n == name) {
                return Err(Error::config(Some(lineno), format!("duplicate section [{name}]")));
            }
            entries.push((name, Vec::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(Some(lineno), format!("expected 'key = value', got '{line}'"))
        })?;
        let section = entries
            .last_mut()
            .ok_or_else(|| Error::config(Some(lineno), "key-value pair before any [section]"))?;
        section.1.push((lineno, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(Sections { entries })
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(Some(line), format!("field '{key}': cannot parse '{v}'")))
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|tok| parse_num(line, key, tok.trim()))
        .collect()
}

pub fn group_from_sections(sections: &Sections) -> Result<GroupSpec> {
    let name = sections.value("group", "name").map(|(_, v)| v).unwrap_or("h1");
    let gauge = match sections.value("group", "gauge_coeff") {
        Some((l, v)) => parse_num::<f64>(l, "gauge_coeff", v)?,
        None => 16.0,
    };
    if let Some((l, v)) = sections.value("group", "exponents") {
        // fully data-driven reconstruction
        let exponents: Vec<u32> = parse_list(l, "exponents", v)?;
        let law = sections.value("group", "law").map(|(_, v)| v);
        return crate::io::group_from_fields(name, &exponents, law, gauge);
    }
    match name {
        "h1" | "heisenberg" => Ok(GroupSpec::heisenberg(gauge)),
        "euclidean" => {
            let dim = match sections.value("group", "dim") {
                Some((l, v)) => parse_num::<usize>(l, "dim", v)?,
                None => return Err(Error::config(None, "euclidean group needs 'dim'")),
            };
            Ok(GroupSpec::euclidean(dim))
        }
        other => Err(Error::config(None, format!("unknown group '{other}'"))),
    }
}

pub fn grid_from_sections(sections: &Sections) -> Result<(Vec<f64>, Vec<usize>)> {
    let (l, v) = sections
        .value("grid", "half_widths")
        .ok_or_else(|| Error::config(None, "missing [grid] half_widths"))?;
    let half_widths: Vec<f64> = parse_list(l, "half_widths", v)?;
    let (l, v) = sections
        .value("grid", "points")
        .ok_or_else(|| Error::config(None, "missing [grid] points"))?;
    let points: Vec<usize> = parse_list(l, "points", v)?;
    Ok((half_widths, points))
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightConfig {
    Unit,
    Power { alpha: f64, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    Poincare { id: String, s: f64 },
    StrongSobolev { id: String, q: f64 },
    WeakSobolev { id: String, q: f64, s: f64 },
    Glr { id: String, p: f64, q: f64, s1: f64, s: f64 },
    Pointwise { id: String, p: f64, q: f64, s1: f64, s: f64 },
    Weights { id: String, p: f64 },
    LpApprox { id: String, q: f64, j_max: u32 },
    ThresholdDiagnostics { id: String, q: f64, m: f64 },
}

impl ExperimentConfig {
    pub fn id(&self) -> &str {
        match self {
            ExperimentConfig::Poincare { id, .. }
            | ExperimentConfig::StrongSobolev { id, .. }
            | ExperimentConfig::WeakSobolev { id, .. }
            | ExperimentConfig::Glr { id, .. }
            | ExperimentConfig::Pointwise { id, .. }
            | ExperimentConfig::Weights { id, .. }
            | ExperimentConfig::LpApprox { id, .. }
            | ExperimentConfig::ThresholdDiagnostics { id, .. } => id,
        }
    }

    /// Checks the theorem-side parameter relations without any compute.
    pub fn validate(&self, group: &GroupSpec) -> Result<()> {
        match *self {
            ExperimentConfig::Poincare { s, .. } => {
                if !(0.0 <= s && s < 1.0) {
                    return Err(Error::invalid("semigroup-difference exponent requires s ∈ [0, 1)"));
                }
            }
            ExperimentConfig::StrongSobolev { q, .. } => {
                if !(q > 1.0) || q.is_infinite() {
                    return Err(Error::invalid("strong/weak improved inequalities require q ∈ (1,∞)"));
                }
            }
            ExperimentConfig::WeakSobolev { q, s, .. } => {
                if !(q > 1.0) || q.is_infinite() {
                    return Err(Error::invalid("strong/weak improved inequalities require q ∈ (1,∞)"));
                }
                if !(0.0 < s && s < 1.0 / q) {
                    return Err(Error::invalid("weak improved inequality requires s ∈ (0, 1/q)"));
                }
            }
            ExperimentConfig::Glr { p, q, s1, s, .. }
            | ExperimentConfig::Pointwise { p, q, s1, s, .. } => {
                if !(1.0 < p && p < q) || q.is_infinite() {
                    return Err(Error::invalid("interpolation inequality requires 1 < p < q < +∞"));
                }
                let theta = p / q;
                let beta = (theta * s1 - s) / (1.0 - theta);
                if !(beta > 0.0) || !(-beta < s && s < s1) {
                    return Err(Error::invalid("interpolation inequality requires −β < s < s₁ with β > 0"));
                }
            }
            ExperimentConfig::Weights { p, .. } => {
                if !(p >= 1.0) {
                    return Err(Error::invalid("Muckenhoupt class requires p ≥ 1"));
                }
            }
            ExperimentConfig::LpApprox { q, j_max, .. } => {
                if !(q >= 1.0) || q.is_infinite() {
                    return Err(Error::invalid("Littlewood–Paley norms require 1 ≤ q < ∞"));
                }
                if j_max < 3 {
                    return Err(Error::invalid("Littlewood–Paley check requires j_max ≥ 3"));
                }
            }
            ExperimentConfig::ThresholdDiagnostics { q, m, .. } => {
                if !(q > 1.0) || q.is_infinite() {
                    return Err(Error::invalid("threshold diagnostics require q ∈ (1,∞)"));
                }
                if !(m > 10.0) {
                    return Err(Error::invalid("thresholding requires M > 10"));
                }
            }
        }
        let _ = group;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BallConfig {
    /// Base radius; when absent, twice the smallest grid spacing.
    pub base_radius: Option<f64>,
    pub scales: usize,
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub group: GroupSpec,
    pub half_widths: Vec<f64>,
    pub points: Vec<usize>,
    pub dof_cap: usize,
    pub eig_cap: usize,
    pub weight: WeightConfig,
    pub family_kind: FamilyKind,
    pub family_params: FamilyParams,
    pub seed: u64,
    pub tgrid: (f64, f64, usize),
    pub balls: BallConfig,
    pub output_dir: PathBuf,
    pub cache: bool,
    pub experiments: Vec<ExperimentConfig>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let sections = parse_sections(text)?;
        let group = group_from_sections(&sections)?;

        let (half_widths, points) = if sections.get("grid").is_some() {
            grid_from_sections(&sections)?
        } else {
            (vec![2.0, 2.0, 2.5], vec![17, 17, 25])
        };

        let get_f64 = |sec: &str, key: &str, default: f64| -> Result<f64> {
            match sections.value(sec, key) {
                Some((l, v)) => parse_num(l, key, v),
                None => Ok(default),
            }
        };
        let get_usize = |sec: &str, key: &str, default: usize| -> Result<usize> {
            match sections.value(sec, key) {
                Some((l, v)) => parse_num(l, key, v),
                None => Ok(default),
            }
        };

        let dof_cap = get_usize("grid", "dof_cap", crate::grid::DEFAULT_DOF_CAP)?;
        let eig_cap = get_usize("spectral", "eig_cap", crate::spectral::DENSE_EIG_CAP)?;

        let weight = match sections.value("weight", "kind").map(|(_, v)| v) {
            None | Some("unit") => WeightConfig::Unit,
            Some("power") => WeightConfig::Power {
                alpha: get_f64("weight", "alpha", -2.0)?,
                p: get_f64("weight", "p", 1.0)?,
            },
            Some(other) => {
                return Err(Error::config(None, format!("unknown weight kind '{other}'")))
            }
        };

        let family_kind = match sections.value("family", "kind") {
            Some((_, v)) => FamilyKind::parse(v)?,
            None => FamilyKind::GaussianBump,
        };
        let defaults = FamilyParams::default();
        let family_params = FamilyParams {
            count: get_usize("family", "count", defaults.count)?,
            width_range: (
                get_f64("family", "width_min", defaults.width_range.0)?,
                get_f64("family", "width_max", defaults.width_range.1)?,
            ),
            chain_base_width: get_f64("family", "chain_base_width", defaults.chain_base_width)?,
            links: get_usize("family", "links", defaults.links)?,
            eig_cutoff: get_f64("family", "eig_cutoff", defaults.eig_cutoff)?,
            combo_size: get_usize("family", "combo_size", defaults.combo_size)?,
        };
        let seed = match sections.value("family", "seed") {
            Some((l, v)) => parse_num::<u64>(l, "seed", v)?,
            None => 42,
        };

        let tgrid = (
            get_f64("tgrid", "min", 1e-4)?,
            get_f64("tgrid", "max", 1e2)?,
            get_usize("tgrid", "count", 121)?,
        );
        if !(tgrid.0 > 0.0 && tgrid.1 > tgrid.0 && tgrid.2 >= 2) {
            return Err(Error::config(None, "tgrid requires 0 < min < max and count ≥ 2"));
        }

        let balls = BallConfig {
            base_radius: match sections.value("balls", "base_radius") {
                Some((l, v)) => Some(parse_num(l, "base_radius", v)?),
                None => None,
            },
            scales: get_usize("balls", "scales", 4)?,
            stride: get_usize("balls", "stride", 4)?,
        };

        let output_dir = PathBuf::from(
            sections.value("output", "dir").map(|(_, v)| v).unwrap_or("out"),
        );
        let cache = match sections.value("output", "cache") {
            Some((l, v)) => match v {
                "true" | "on" | "1" => true,
                "false" | "off" | "0" => false,
                other => {
                    return Err(Error::config(Some(l), format!("cache must be true/false, got '{other}'")))
                }
            },
            None => true,
        };

        let mut experiments = Vec::new();
        for (name, kv) in sections.sections() {
            let Some(id) = name.strip_prefix("experiment ") else { continue };
            let id = id.trim().to_string();
            if experiments.iter().any(|e: &ExperimentConfig| e.id() == id) {
                return Err(Error::config(None, format!("duplicate experiment id '{id}'")));
            }
            let field = |key: &str| -> Option<(usize, &str)> {
                kv.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
            };
            let need = |key: &str| -> Result<(usize, &str)> {
                field(key).ok_or_else(|| {
                    Error::config(None, format!("experiment '{id}' is missing field '{key}'"))
                })
            };
            let kind = need("kind")?.1;
            let num = |key: &str, default: Option<f64>| -> Result<f64> {
                match field(key) {
                    Some((l, v)) => parse_num(l, key, v),
                    None => default.ok_or_else(|| {
                        Error::config(None, format!("experiment '{id}' is missing field '{key}'"))
                    }),
                }
            };
            let exp = match kind {
                "poincare" => ExperimentConfig::Poincare { id, s: num("s", Some(0.0))? },
                "strong-sobolev" => ExperimentConfig::StrongSobolev { id, q: num("q", None)? },
                "weak-sobolev" => ExperimentConfig::WeakSobolev {
                    id,
                    q: num("q", None)?,
                    s: num("s", None)?,
                },
                "glr" => ExperimentConfig::Glr {
                    id,
                    p: num("p", None)?,
                    q: num("q", None)?,
                    s1: num("s1", None)?,
                    s: num("s", Some(0.0))?,
                },
                "pointwise" => ExperimentConfig::Pointwise {
                    id,
                    p: num("p", None)?,
                    q: num("q", None)?,
                    s1: num("s1", None)?,
                    s: num("s", Some(0.0))?,
                },
                "weights" => ExperimentConfig::Weights { id, p: num("p", Some(1.0))? },
                "lp-approx" => ExperimentConfig::LpApprox {
                    id,
                    q: num("q", Some(2.0))?,
                    j_max: num("j_max", Some(8.0))? as u32,
                },
                "threshold-diagnostics" => ExperimentConfig::ThresholdDiagnostics {
                    id,
                    q: num("q", None)?,
                    m: num("M", Some(12.0))?,
                },
                other => {
                    return Err(Error::config(None, format!("unknown experiment kind '{other}'")))
                }
            };
            experiments.push(exp);
        }

        let config = RunConfig {
            group,
            half_widths,
            points,
            dof_cap,
            eig_cap,
            weight,
            family_kind,
            family_params,
            seed,
            tgrid,
            balls,
            output_dir,
            cache,
            experiments,
        };
        config.validate()?;
        Ok(config)
    }

    /// Parameter-relation validation; runs before any compute.
    pub fn validate(&self) -> Result<()> {
        // grid shape errors surface here, without allocating values
        Grid::with_dof_cap(
            Arc::new(self.group.clone()),
            &self.half_widths,
            &self.points,
            self.dof_cap,
        )?;
        if let WeightConfig::Power { alpha, p } = self.weight {
            let n_hom = self.group.homogeneous_dim() as f64;
            if !(alpha > -n_hom) {
                return Err(Error::invalid(format!(
                    "power weight requires α > −N (got α = {alpha}, N = {n_hom})"
                )));
            }
            if !(p >= 1.0) {
                return Err(Error::invalid("Muckenhoupt class requires p ≥ 1"));
            }
        }
        if self.balls.scales < 3 {
            return Err(Error::invalid("ball family must cover ≥ 3 dyadic radius scales"));
        }
        for e in &self.experiments {
            e.validate(&self.group)
                .map_err(|err| Error::invalid(format!("experiment '{}': {err}", e.id())))?;
        }
        Ok(())
    }

    pub fn tgrid_values(&self) -> Vec<f64> {
        crate::norms::log_spaced(self.tgrid.0, self.tgrid.1, self.tgrid.2)
    }
}

/// The experiment kinds `list-experiments` documents, with their fields.
pub fn experiment_catalogue() -> Vec<(&'static str, &'static str)> {
    vec![
        ("poincare", "semigroup-difference scaling; fields: s ∈ [0,1)"),
        ("strong-sobolev", "‖f‖_{L^q(ω)} ≤ C‖∇f‖^θ‖f‖_B^{1−θ}; fields: q ∈ (1,∞)"),
        ("weak-sobolev", "weak-norm variant; fields: q ∈ (1,∞), s ∈ (0,1/q)"),
        ("glr", "‖f‖_{Ẇ^{s,q}} ≤ C‖f‖_{Ẇ^{s₁,p}}^θ‖f‖_B^{1−θ}; fields: p, q, s1, s"),
        ("pointwise", "pointwise interpolation bound; fields: p, q, s1, s"),
        ("weights", "A_p expression by dyadic radius + stability verdict; fields: p"),
        ("lp-approx", "Littlewood–Paley reconstruction and norm growth; fields: q, j_max"),
        ("threshold-diagnostics", "level-set integral tabulation; fields: q, M"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[group]
name = euclidean
dim = 1

[grid]
half_widths = 3.0
points = 33

[experiment smoke]
kind = poincare
s = 0.0
";

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.group.dim(), 1);
        assert_eq!(cfg.points, vec![33]);
        assert_eq!(cfg.experiments.len(), 1);
        assert_eq!(cfg.experiments[0].id(), "smoke");
        assert!(cfg.cache);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "[grid]\nhalf_widths = 1.0\npoints = oops\n";
        let err = parse_sections(bad).and_then(|s| grid_from_sections(&s)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("points"), "{msg}");

        let nokey = "[grid]\nnonsense line\n";
        let err = parse_sections(nokey).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn excluded_parameter_combinations_are_rejected() {
        let with = |extra: &str| format!("{MINIMAL}\n{extra}");
        // q ≤ 1 for the strong inequality
        let err = RunConfig::parse(&with("[experiment bad]\nkind = strong-sobolev\nq = 1.0\n"))
            .unwrap_err();
        assert!(err.to_string().contains("q ∈ (1,∞)"), "{err}");
        // s outside (0, 1/q) for the weak inequality
        let err = RunConfig::parse(&with("[experiment bad]\nkind = weak-sobolev\nq = 2.0\ns = 0.7\n"))
            .unwrap_err();
        assert!(err.to_string().contains("s ∈ (0, 1/q)"), "{err}");
        // p ≥ q for the interpolation inequality
        let err = RunConfig::parse(&with("[experiment bad]\nkind = glr\np = 4.0\nq = 2.0\ns1 = 1.0\n"))
            .unwrap_err();
        assert!(err.to_string().contains("1 < p < q"), "{err}");
        // α ≤ −N for a power weight
        let err = RunConfig::parse(&with("[weight]\nkind = power\nalpha = -1.5\np = 1.0\n"))
            .unwrap_err();
        assert!(err.to_string().contains("α > −N"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{MINIMAL}\n[experiment smoke]\nkind = poincare\n");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }
}
