//! JSON manifests for user-defined coordinate groupoids and actions.
//!
//! A manifest describes every structure map as an expression tree (see
//! [`super::expr`]); variables index the concatenated inputs. For the
//! multiplication map the variables are the two arrow charts in order;
//! for an action they are `(arrow, point)`. Loaded objects are checked
//! pointwise against the groupoid and action laws before use.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::chart::{ChartBox, CoordinateGroupoid, Side, SmoothAction, SmoothBibundle, VecFn};
use super::expr::Expr;
use super::fd::FdConfig;
use super::registry::PoissonExample;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupoidManifest {
    pub base_dim: usize,
    pub arrow_dim: usize,
    pub base_box: ChartBox,
    pub arrow_box: ChartBox,
    pub source: Vec<Expr>,
    pub target: Vec<Expr>,
    pub compose: Vec<Expr>,
    pub inverse: Vec<Expr>,
    pub unit: Vec<Expr>,
    /// Optional closed-form algebroid frame: `fiber_dim` columns, each a
    /// list of `arrow_dim` expressions in the base variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<Expr>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionManifest {
    pub side: Side,
    pub manifold_dim: usize,
    pub manifold_box: ChartBox,
    pub base_map: Vec<Expr>,
    /// Variables: the arrow chart then the point chart.
    pub act: Vec<Expr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub groupoid: GroupoidManifest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionManifest>,
    /// A right action turning `(action, right_action)` into a bibundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_action: Option<ActionManifest>,
}

fn exprs_to_fn(exprs: &[Expr], arity: usize) -> Result<VecFn> {
    for e in exprs {
        e.validate(arity)?;
    }
    let exprs = exprs.to_vec();
    Ok(Arc::new(move |vars: &[f64]| {
        exprs.iter().map(|e| e.eval(vars)).collect()
    }))
}

fn build_groupoid(m: &GroupoidManifest) -> Result<Arc<CoordinateGroupoid>> {
    let n0 = m.base_dim;
    let n1 = m.arrow_dim;
    if m.source.len() != n0 || m.target.len() != n0 {
        return Err(Error::Parse("source/target must output base coordinates".into()));
    }
    if m.compose.len() != n1 || m.inverse.len() != n1 || m.unit.len() != n1 {
        return Err(Error::Parse(
            "compose/inverse/unit must output arrow coordinates".into(),
        ));
    }
    let frame_fn = match &m.frame {
        None => None,
        Some(cols) => {
            if cols.is_empty() && n1 != n0 {
                return Err(Error::Parse("frame must have fiber_dim columns".into()));
            }
            if cols.len() != n1 - n0 || cols.iter().any(|c| c.len() != n1) {
                return Err(Error::Parse(
                    "frame must be fiber_dim columns of arrow_dim expressions".into(),
                ));
            }
            for col in cols {
                for e in col {
                    e.validate(n0)?;
                }
            }
            let cols = cols.clone();
            let k = n1 - n0;
            Some(Arc::new(move |q: &[f64]| {
                nalgebra::DMatrix::from_fn(n1, k, |r, c| cols[c][r].eval(q))
            })
                as Arc<dyn Fn(&[f64]) -> nalgebra::DMatrix<f64> + Send + Sync>)
        }
    };
    CoordinateGroupoid::new(
        "manifest",
        n0,
        n1,
        m.base_box.clone(),
        m.arrow_box.clone(),
        exprs_to_fn(&m.source, n1)?,
        exprs_to_fn(&m.target, n1)?,
        exprs_to_fn(&m.compose, 2 * n1)?,
        exprs_to_fn(&m.inverse, n1)?,
        exprs_to_fn(&m.unit, n0)?,
        frame_fn,
    )
    .map(Arc::new)
}

fn build_action(
    groupoid: &Arc<CoordinateGroupoid>,
    m: &ActionManifest,
) -> Result<SmoothAction> {
    if m.base_map.len() != groupoid.base_dim {
        return Err(Error::Parse("action base map must output base coordinates".into()));
    }
    if m.act.len() != m.manifold_dim {
        return Err(Error::Parse("action must output manifold coordinates".into()));
    }
    SmoothAction::new(
        groupoid.clone(),
        m.side,
        m.manifold_dim,
        m.manifold_box.clone(),
        exprs_to_fn(&m.base_map, m.manifold_dim)?,
        exprs_to_fn(&m.act, groupoid.arrow_dim + m.manifold_dim)?,
    )
}

/// Parse a manifest, build the example, and verify the groupoid (and
/// action) laws pointwise at seeded samples.
pub fn load_manifest(raw: &str, fd_cfg: &FdConfig) -> Result<PoissonExample> {
    let manifest: Manifest =
        serde_json::from_str(raw).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    let groupoid = build_groupoid(&manifest.groupoid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let identities = groupoid.check_identities(40, 1e-8, &mut rng, fd_cfg);
    if !identities.pass {
        let row = identities.rows.iter().find(|r| !r.pass).expect("failing row");
        return Err(Error::axiom(
            format!("groupoid law `{}`", row.name),
            format!("worst residual {:.3e} at sampled points", row.residual),
        ));
    }

    let action = match &manifest.action {
        None => None,
        Some(a) => {
            let act = build_action(&groupoid, a)?;
            let laws = act.check_action_identities(40, 1e-8, &mut rng, fd_cfg);
            if !laws.pass {
                let row = laws.rows.iter().find(|r| !r.pass).expect("failing row");
                return Err(Error::axiom(
                    format!("action law `{}`", row.name),
                    format!("worst residual {:.3e} at sampled points", row.residual),
                ));
            }
            Some(act)
        }
    };

    let bibundle = match (&action, &manifest.right_action) {
        (Some(left), Some(r)) => {
            let right = build_action(&groupoid, r)?;
            let laws = right.check_action_identities(40, 1e-8, &mut rng, fd_cfg);
            if !laws.pass {
                return Err(Error::axiom(
                    "right action laws",
                    "sampled residuals exceed tolerance".to_string(),
                ));
            }
            Some(SmoothBibundle::new(left.clone(), right)?)
        }
        _ => None,
    };

    Ok(PoissonExample {
        name: manifest.name,
        groupoid,
        action,
        bibundle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The additive line as a one-object groupoid, with its translation
    /// action on the line.
    pub fn translation_line_manifest() -> String {
        serde_json::json!({
            "name": "translation-line",
            "groupoid": {
                "base_dim": 0,
                "arrow_dim": 1,
                "base_box": {"lo": [], "hi": []},
                "arrow_box": {"lo": [-2.0], "hi": [2.0]},
                "source": [],
                "target": [],
                "compose": [{"op": "add", "args": [{"var": 0}, {"var": 1}]}],
                "inverse": [{"op": "neg", "args": [{"var": 0}]}],
                "unit": [{"const": 0.0}],
                "frame": [[{"const": 1.0}]]
            },
            "action": {
                "side": "Left",
                "manifold_dim": 1,
                "manifold_box": {"lo": [-2.0], "hi": [2.0]},
                "base_map": [],
                "act": [{"op": "add", "args": [{"var": 0}, {"var": 1}]}]
            }
        })
        .to_string()
    }

    #[test]
    fn translation_line_loads() {
        let ex = load_manifest(&translation_line_manifest(), &FdConfig::default()).unwrap();
        assert_eq!(ex.groupoid.fiber_dim(), 1);
        assert!(ex.action.is_some());
    }

    #[test]
    fn broken_inverse_is_rejected() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&translation_line_manifest()).unwrap();
        doc["groupoid"]["inverse"] = serde_json::json!([{"var": 0}]);
        let err = load_manifest(&doc.to_string(), &FdConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Axiom { .. }), "{err:?}");
    }

    #[test]
    fn malformed_manifest_is_parse_error() {
        assert!(matches!(
            load_manifest("{", &FdConfig::default()),
            Err(Error::Parse(_))
        ));
    }
}
