//! File formats: JSON with every real printed to 17 significant digits and
//! keys in sorted order, the VState document, and the CSV exports.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::contour::{sample_boundary, PatchShape, VState};
use crate::dynamics::CurveEnsemble;
use crate::equilibria::{ConfigParams, Lambda};
use crate::{Error, Result};

/// A real with 17 significant digits (`{:.16e}`).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) if !n.is_f64() => {
                let _ = write!(out, "{i}");
            }
            (_, Some(u)) if !n.is_f64() => {
                let _ = write!(out, "{u}");
            }
            _ => out.push_str(&fmt17(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Pretty JSON with reals at 17 significant digits. Non-finite reals become
/// `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaDoc {
    omega: f64,
    gamma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchDoc {
    j: usize,
    b: f64,
    fold: usize,
    /// `a_2, a_3, …`
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VStateDoc {
    epsilon: f64,
    lambda: LambdaDoc,
    patches: Vec<PatchDoc>,
}

/// `{epsilon, lambda: {omega, gamma2}, patches: [{j, b, fold, coeffs}]}`.
pub fn vstate_to_json(state: &VState, params: &ConfigParams) -> Result<String> {
    let doc = VStateDoc {
        epsilon: state.epsilon,
        lambda: LambdaDoc {
            omega: state.lambda.omega,
            gamma2: state.lambda.gamma2,
        },
        patches: state
            .shapes
            .iter()
            .map(|s| PatchDoc {
                j: s.j,
                b: params.b[s.j],
                fold: s.fold,
                coeffs: s.coeffs.clone(),
            })
            .collect(),
    };
    to_json(&doc)
}

/// A decoded VState with the patch scales it was stored with.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredVState {
    pub state: VState,
    pub b: [f64; 3],
}

/// Parse and validate a VState document: three patches labelled 0, 1, 2 in
/// order, rings with fold 1, equal mode counts, finite values, and no
/// coefficient on a mode the fold forbids.
pub fn vstate_from_json(text: &str) -> Result<StoredVState> {
    let doc: VStateDoc = serde_json::from_str(text)?;
    let bad = |m: String| Err(Error::ShapeValidity(m));
    if doc.patches.len() != 3 {
        return bad(format!("expected 3 patches, got {}", doc.patches.len()));
    }
    if !doc.epsilon.is_finite() || !doc.lambda.omega.is_finite() || !doc.lambda.gamma2.is_finite() {
        return bad("epsilon and lambda must be finite".into());
    }
    let n_coeffs = doc.patches[0].coeffs.len();
    if n_coeffs == 0 {
        return bad("patches carry no modes (need at least a_2)".into());
    }
    let mut shapes = Vec::with_capacity(3);
    let mut b = [0.0; 3];
    for (j, p) in doc.patches.iter().enumerate() {
        if p.j != j {
            return bad(format!("patch {j} is labelled {}", p.j));
        }
        if (j == 0 && p.fold < 2) || (j > 0 && p.fold != 1) {
            return bad(format!("patch {j} has invalid fold {}", p.fold));
        }
        if p.coeffs.len() != n_coeffs {
            return bad("patches carry different numbers of modes".into());
        }
        if !(p.b.is_finite() && p.b > 0.0) {
            return bad(format!("patch {j} has invalid scale {}", p.b));
        }
        b[j] = p.b;
        let shape = PatchShape {
            j,
            fold: p.fold,
            coeffs: p.coeffs.clone(),
        };
        shape.validate()?;
        shapes.push(shape);
    }
    let shapes: [PatchShape; 3] = shapes
        .try_into()
        .map_err(|_| Error::ShapeValidity("expected 3 patches".into()))?;
    Ok(StoredVState {
        state: VState {
            epsilon: doc.epsilon,
            shapes,
            lambda: Lambda {
                omega: doc.lambda.omega,
                gamma2: doc.lambda.gamma2,
            },
        },
        b,
    })
}

/// Boundary samples of every replica: `patch,replica,x,px,py`.
pub fn boundary_csv(state: &VState, params: &ConfigParams, nodes: usize) -> Result<String> {
    let mut out = String::from("patch,replica,x,px,py\n");
    for j in 0..3 {
        for k in 0..params.replicas(j) {
            let pts = sample_boundary(state, params, j, k, nodes)?;
            for (i, p) in pts.iter().enumerate() {
                let x = 2.0 * std::f64::consts::PI * i as f64 / nodes as f64;
                let _ = writeln!(out, "{j},{k},{},{},{}", fmt17(x), fmt17(p[0]), fmt17(p[1]));
            }
        }
    }
    Ok(out)
}

/// Snapshots `(t, ensemble)`: `t,patch,replica,node,px,py`.
pub fn trajectory_csv(snapshots: &[(f64, &CurveEnsemble)]) -> String {
    let mut out = String::from("t,patch,replica,node,px,py\n");
    for (t, e) in snapshots {
        for c in &e.curves {
            for (i, p) in c.nodes.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{i},{},{}",
                    fmt17(*t),
                    c.patch,
                    c.replica,
                    fmt17(p[0]),
                    fmt17(p[1])
                );
            }
        }
    }
    out
}

/// File-name friendly rendering of `ε` (shortest round-trip form).
pub fn eps_label(eps: f64) -> String {
    format!("{eps}")
}
