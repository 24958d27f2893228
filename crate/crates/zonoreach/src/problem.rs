//! Problem-file schema (versioned `zonoreach/1`) and its mapping onto the
//! runtime model types.
//!
//! Numbers are serialized as decimal strings (shortest round-trip form), so
//! a save → load → save cycle is a byte-level fixed point and models
//! round-trip bit-for-bit. Loading accepts plain JSON numbers too.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::brs::{BrsOptions, ReducePolicy, SystemModel, UnderMethod};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{DisturbanceSet, HPolytope, HyperBox, VPolytope, Zonotope};

pub const SCHEMA_VERSION: &str = "zonoreach/1";

/// An `f64` that serializes as its shortest round-trip decimal string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dec(pub f64);

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}", self.0))
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Dec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal string or number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Dec, E> {
                v.parse::<f64>().map(Dec).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Dec, E> {
                Ok(Dec(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Dec, E> {
                Ok(Dec(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Dec, E> {
                Ok(Dec(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

pub type RowsSpec = Vec<Vec<Dec>>;

fn rows_to_matrix(rows: &RowsSpec, what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Schema(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Schema(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j].0))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> RowsSpec {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Dec(m[(i, j)])).collect())
        .collect()
}

fn vec_to_dvector(v: &[Dec]) -> DVector<f64> {
    DVector::from_fn(v.len(), |i, _| v[i].0)
}

fn dvector_to_vec(v: &DVector<f64>) -> Vec<Dec> {
    v.iter().map(|&x| Dec(x)).collect()
}

/// G-rep as stored on disk: generator matrix row-major (`n × N`), center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZonotopeSpec {
    pub generators: RowsSpec,
    pub center: Vec<Dec>,
}

impl ZonotopeSpec {
    pub fn from_zonotope(z: &Zonotope) -> Self {
        Self {
            generators: matrix_to_rows(z.generators()),
            center: dvector_to_vec(z.center()),
        }
    }

    pub fn to_zonotope(&self, what: &str) -> Result<Zonotope> {
        let center = vec_to_dvector(&self.center);
        let generators = if self.generators.is_empty()
            || self.generators.iter().all(|r| r.is_empty())
        {
            DMatrix::zeros(center.len(), 0)
        } else {
            rows_to_matrix(&self.generators, what)?
        };
        Zonotope::new(generators, center)
            .map_err(|e| Error::Schema(format!("{what}: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub a: RowsSpec,
    pub b: RowsSpec,
    pub e: RowsSpec,
    pub k: Vec<Dec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<Dec>,
    pub hi: Vec<Dec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HrepSpec {
    pub matrix: RowsSpec,
    pub rhs: Vec<Dec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VrepSpec {
    pub vertices: RowsSpec,
}

/// Either `box` or both `hrep` and `vrep`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_spec: Option<BoxSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hrep: Option<HrepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vrep: Option<VrepSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OptionsSpec {
    /// `min-out` or `sadraddini`.
    pub method: String,
    /// `never`, `always`, or `at-order-threshold`.
    pub reduce: String,
    /// Order threshold for `at-order-threshold` (defaults to `max_order`).
    pub reduce_threshold: Option<Dec>,
    pub max_order: Dec,
    pub seed: u64,
    /// Feasibility tolerance override.
    pub tol: Option<Dec>,
}

impl Default for OptionsSpec {
    fn default() -> Self {
        Self {
            method: "min-out".into(),
            reduce: "at-order-threshold".into(),
            reduce_threshold: None,
            max_order: Dec(6.0),
            seed: 0,
            tol: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    pub system: SystemSpec,
    pub u: ZonotopeSpec,
    pub w: DisturbanceSpec,
    pub target: ZonotopeSpec,
    pub horizon: usize,
    #[serde(default)]
    pub options: OptionsSpec,
}

/// A problem file resolved into runtime types.
#[derive(Debug)]
pub struct BuiltProblem {
    pub sys: SystemModel,
    pub target: Zonotope,
    pub horizon: usize,
    pub opts: BrsOptions,
    pub seed: u64,
    pub cfg: Config,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pf: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if pf.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "version: expected \"{SCHEMA_VERSION}\", got \"{}\"",
                pf.version
            )));
        }
        Ok(pf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    fn disturbance(&self, cfg: &Config) -> Result<DisturbanceSet> {
        match (&self.w.box_spec, &self.w.hrep, &self.w.vrep) {
            (Some(b), None, None) => {
                let lo = vec_to_dvector(&b.lo);
                let hi = vec_to_dvector(&b.hi);
                Ok(DisturbanceSet::Box(HyperBox::new(lo, hi).map_err(|e| {
                    Error::Schema(format!("w.box: {e}"))
                })?))
            }
            (None, Some(h), Some(v)) => {
                let hrep = HPolytope::new(
                    rows_to_matrix(&h.matrix, "w.hrep.matrix")?,
                    vec_to_dvector(&h.rhs),
                )
                .map_err(|e| Error::Schema(format!("w.hrep: {e}")))?;
                let vertices = v
                    .vertices
                    .iter()
                    .map(|row| vec_to_dvector(row))
                    .collect::<Vec<_>>();
                let vrep = VPolytope::new(vertices)
                    .map_err(|e| Error::Schema(format!("w.vrep: {e}")))?;
                let w = DisturbanceSet::Polytope { hrep, vrep };
                w.validate(cfg)
                    .map_err(|e| Error::Schema(format!("w: {e}")))?;
                Ok(w)
            }
            _ => Err(Error::Schema(
                "w: provide either `box` or both `hrep` and `vrep`".into(),
            )),
        }
    }

    fn brs_options(&self) -> Result<BrsOptions> {
        let method = match self.options.method.as_str() {
            "min-out" => UnderMethod::MinOut,
            "sadraddini" => UnderMethod::Sadraddini,
            other => {
                return Err(Error::Schema(format!(
                    "options.method: unknown \"{other}\" (want min-out | sadraddini)"
                )))
            }
        };
        let max_order = self.options.max_order.0;
        if !(max_order.is_finite() && max_order > 0.0) {
            return Err(Error::Schema("options.max_order must be positive".into()));
        }
        let reduce = match self.options.reduce.as_str() {
            "never" => ReducePolicy::Never,
            "always" => ReducePolicy::Always,
            "at-order-threshold" => ReducePolicy::AtOrderThreshold(
                self.options.reduce_threshold.map_or(max_order, |d| d.0),
            ),
            other => {
                return Err(Error::Schema(format!(
                    "options.reduce: unknown \"{other}\" (want never | always | at-order-threshold)"
                )))
            }
        };
        Ok(BrsOptions {
            method,
            reduce,
            max_order,
        })
    }

    /// Validate thoroughly and construct the runtime model.
    pub fn build(&self, base_cfg: &Config) -> Result<BuiltProblem> {
        let mut cfg = *base_cfg;
        if let Some(t) = self.options.tol {
            if !(t.0.is_finite() && t.0 > 0.0) {
                return Err(Error::Schema("options.tol must be positive".into()));
            }
            cfg.feas_tol = t.0;
        }
        let a = rows_to_matrix(&self.system.a, "system.a")?;
        let b = rows_to_matrix(&self.system.b, "system.b")?;
        let e = rows_to_matrix(&self.system.e, "system.e")?;
        let k = vec_to_dvector(&self.system.k);
        let u = self.u.to_zonotope("u")?;
        let w = self.disturbance(&cfg)?;
        let target = self.target.to_zonotope("target")?;
        let sys = SystemModel::new(a, b, e, k, u, w, &cfg)
            .map_err(|e| Error::Schema(format!("system: {e}")))?;
        if target.dim() != sys.dim() {
            return Err(Error::Schema("target: dimension mismatch with system".into()));
        }
        Ok(BuiltProblem {
            sys,
            target,
            horizon: self.horizon,
            opts: self.brs_options()?,
            seed: self.options.seed,
            cfg,
        })
    }
}

/// Write one zonotope of a computed chain as standalone JSON.
pub fn zonotope_to_json(z: &Zonotope) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ZonotopeSpec::from_zonotope(z))?;
    s.push('\n');
    Ok(s)
}

pub fn zonotope_from_json(text: &str) -> Result<Zonotope> {
    let spec: ZonotopeSpec =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    spec.to_zonotope("zonotope")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::builtin_case;

    #[test]
    fn round_trip_is_a_fixed_point() {
        let pf = builtin_case("demo1d").unwrap();
        let once = pf.to_json().unwrap();
        let reloaded = ProblemFile::from_json(&once).unwrap();
        let twice = reloaded.to_json().unwrap();
        assert_eq!(once, twice, "serialization must be canonical");
    }

    #[test]
    fn numbers_load_from_strings_or_literals() {
        let a: Dec = serde_json::from_str("\"1.004\"").unwrap();
        assert_eq!(a.0, 1.004);
        let b: Dec = serde_json::from_str("1.004").unwrap();
        assert_eq!(b.0, 1.004);
        let c: Dec = serde_json::from_str("-5.092e-5").unwrap();
        assert_eq!(c.0, -5.092e-5);
    }

    #[test]
    fn version_is_checked() {
        let mut pf = builtin_case("demo1d").unwrap();
        pf.version = "zonoreach/0".into();
        let text = serde_json::to_string(&pf).unwrap();
        match ProblemFile::from_json(&text) {
            Err(Error::Schema(msg)) => assert!(msg.contains("version")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn singular_a_fails_at_build_time() {
        let mut pf = builtin_case("demo1d").unwrap();
        pf.system.a = vec![vec![Dec(0.0)]];
        match pf.build(&Config::default()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("singular"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn w_requires_exactly_one_form() {
        let mut pf = builtin_case("demo1d").unwrap();
        pf.w = DisturbanceSpec::default();
        assert!(matches!(pf.build(&Config::default()), Err(Error::Schema(_))));
    }

    #[test]
    fn bad_method_is_schema_error() {
        let mut pf = builtin_case("demo1d").unwrap();
        pf.options.method = "exact".into();
        assert!(matches!(pf.build(&Config::default()), Err(Error::Schema(_))));
    }

    #[test]
    fn zonotope_json_round_trip() {
        let z = crate::geometry::HyperBox::symmetric(&nalgebra::dvector![1.0, 2.0])
            .unwrap()
            .to_zonotope();
        let text = zonotope_to_json(&z).unwrap();
        let back = zonotope_from_json(&text).unwrap();
        assert_eq!(back.generators(), z.generators());
        assert_eq!(back.center(), z.center());
    }
}
