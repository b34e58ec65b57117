//! JSON document for [`SdpRepresentation`].
//!
//! Variables are written as `"1"`, `"x:i"` or `"y:k"` (zero-based); `k`
//! refers to the `aux` table. Pencil coefficients are upper-triangle
//! triplets `[i, j, c]`; inequality coefficients are exact rationals as
//! strings such as `"-3/2"`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::poly::{Exponent, LatticeSet, Rational};

use super::{AuxVar, LinearForm, LinearPencil, Provenance, SdpRepresentation, SparseBlock, Var};

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad variable `{0}`")]
    Var(String),
    #[error("bad coefficient `{0}`")]
    Coef(String),
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct AuxDoc {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatDoc {
    var: String,
    triplets: Vec<(usize, usize, i64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PencilDoc {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<Vec<u32>>>,
    mats: Vec<MatDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    var: String,
    coef: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockDoc {
    variables: Vec<usize>,
    lattice: Vec<Vec<u32>>,
    pencil: usize,
    aux: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SizeDoc {
    pencil_dims: Vec<usize>,
    aux_count: usize,
    aux_labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RepDoc {
    nvars: usize,
    names: Vec<String>,
    degree_bound: u32,
    provenance: Provenance,
    aux: Vec<AuxDoc>,
    pencils: Vec<PencilDoc>,
    inequalities: Vec<Vec<TermDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sizes: Option<SizeDoc>,
}

pub fn var_name(v: Var) -> String {
    match v {
        Var::One => "1".into(),
        Var::X(i) => format!("x:{i}"),
        Var::Y(k) => format!("y:{k}"),
    }
}

pub fn parse_var(s: &str) -> Option<Var> {
    if s == "1" {
        return Some(Var::One);
    }
    let (kind, idx) = s.split_once(':')?;
    let idx: usize = idx.parse().ok()?;
    match kind {
        "x" => Some(Var::X(idx)),
        "y" => Some(Var::Y(idx)),
        _ => None,
    }
}

fn to_doc(rep: &SdpRepresentation) -> RepDoc {
    RepDoc {
        nvars: rep.nvars,
        names: rep.names.clone(),
        degree_bound: rep.degree_bound,
        provenance: rep.provenance,
        aux: rep
            .aux
            .iter()
            .map(|a| AuxDoc {
                label: a.label.clone(),
                exponent: a.exponent.as_ref().map(|e| e.entries().to_vec()),
            })
            .collect(),
        pencils: rep
            .pencils
            .iter()
            .map(|p| PencilDoc {
                dim: p.dim(),
                rows: p
                    .labels()
                    .map(|l| l.iter().map(|e| e.entries().to_vec()).collect()),
                mats: p
                    .mats()
                    .iter()
                    .map(|(&v, m)| MatDoc {
                        var: var_name(v),
                        triplets: m.upper().collect(),
                    })
                    .collect(),
            })
            .collect(),
        inequalities: rep
            .linear_ineqs
            .iter()
            .map(|f| {
                f.coefs
                    .iter()
                    .map(|(&v, c)| TermDoc {
                        var: var_name(v),
                        coef: c.to_string(),
                    })
                    .collect()
            })
            .collect(),
        blocks: rep
            .blocks
            .iter()
            .map(|b| BlockDoc {
                variables: b.block.clone(),
                lattice: b.lattice.points().map(|e| e.entries().to_vec()).collect(),
                pencil: b.pencil,
                aux: rep.block_aux(b),
            })
            .collect(),
        sizes: Some(SizeDoc {
            pencil_dims: rep.pencil_dims(),
            aux_count: rep.aux_count(),
            aux_labels: rep.aux_labels(),
        }),
    }
}

pub fn to_json(rep: &SdpRepresentation) -> String {
    serde_json::to_string_pretty(&to_doc(rep)).expect("representation serializes")
}

pub fn to_value(rep: &SdpRepresentation) -> serde_json::Value {
    serde_json::to_value(to_doc(rep)).expect("representation serializes")
}

pub fn from_json(text: &str) -> Result<SdpRepresentation, JsonError> {
    let doc: RepDoc = serde_json::from_str(text)?;
    let n = doc.nvars;
    let check_var = |s: &str, naux: usize| -> Result<Var, JsonError> {
        let v = parse_var(s).ok_or_else(|| JsonError::Var(s.into()))?;
        match v {
            Var::X(i) if i >= n => Err(JsonError::Var(s.into())),
            Var::Y(k) if k >= naux => Err(JsonError::Var(s.into())),
            _ => Ok(v),
        }
    };
    let exponent = |e: Vec<u32>| -> Result<Exponent, JsonError> {
        if e.len() != n {
            return Err(JsonError::Shape(format!("exponent of length {} for {n} variables", e.len())));
        }
        Ok(Exponent::new(e))
    };
    let aux = doc
        .aux
        .into_iter()
        .map(|a| {
            Ok(AuxVar {
                label: a.label,
                exponent: a.exponent.map(exponent).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, JsonError>>()?;
    let naux = aux.len();
    let mut pencils = Vec::new();
    for p in doc.pencils {
        let mut pencil = match p.rows {
            Some(rows) => {
                if rows.len() != p.dim {
                    return Err(JsonError::Shape("row labels do not match dim".into()));
                }
                LinearPencil::with_labels(rows.into_iter().map(exponent).collect::<Result<_, _>>()?)
            }
            None => LinearPencil::new(p.dim),
        };
        for m in p.mats {
            let v = check_var(&m.var, naux)?;
            for (i, j, c) in m.triplets {
                if i > j || j >= p.dim {
                    return Err(JsonError::Shape(format!("triplet ({i}, {j}) outside the upper triangle")));
                }
                pencil.add(v, i, j, c);
            }
        }
        pencils.push(pencil);
    }
    let mut linear_ineqs = Vec::new();
    for row in doc.inequalities {
        let mut f = LinearForm::default();
        for t in row {
            let v = check_var(&t.var, naux)?;
            let c = Rational::from_str(t.coef.trim()).map_err(|_| JsonError::Coef(t.coef.clone()))?;
            f.add(v, c);
        }
        linear_ineqs.push(f);
    }
    let mut blocks = Vec::new();
    for b in doc.blocks {
        if b.pencil >= pencils.len() {
            return Err(JsonError::Shape("block refers to a missing pencil".into()));
        }
        let pts = b.lattice.into_iter().map(exponent).collect::<Result<Vec<_>, _>>()?;
        blocks.push(SparseBlock {
            block: b.variables,
            lattice: LatticeSet::from_points(n, pts),
            pencil: b.pencil,
        });
    }
    if doc.names.len() != n {
        return Err(JsonError::Shape("names do not match nvars".into()));
    }
    Ok(SdpRepresentation {
        nvars: n,
        names: doc.names,
        degree_bound: doc.degree_bound,
        aux,
        pencils,
        linear_ineqs,
        provenance: doc.provenance,
        blocks,
    })
}
