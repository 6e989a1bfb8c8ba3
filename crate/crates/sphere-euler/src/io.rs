//! Serialization: 17-significant-digit CSV and JSON documents.
//!
//! The CSV schemas are plot-ready tables with a single header row and `,`
//! separators; floats are printed with 17 significant digits so re-parsed
//! values are bit-identical. Solutions round-trip through a JSON document
//! carrying the grid shape and the four sampled fields.

use crate::families::{FamilyTag, HomogeneousSolution};
use crate::grid::{ScalarField, SphereGrid, TangentField};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// 17-significant-digit decimal form (bit-faithful on re-parse).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Scalar field rows `phi,theta,value`.
pub fn scalar_csv(s: &ScalarField) -> String {
    let g = &s.grid;
    let mut out = String::from("phi,theta,value\n");
    for i in 0..g.nlat {
        for j in 0..g.nlon {
            out.push_str(&format!(
                "{},{},{}\n",
                format_f64(g.phi_nodes[i]),
                format_f64(g.theta_nodes[j]),
                format_f64(s.values[g.idx(i, j)])
            ));
        }
    }
    out
}

/// Tangent field rows `phi,theta,a,b`.
pub fn tangent_csv(w: &TangentField) -> String {
    let g = &w.grid;
    let mut out = String::from("phi,theta,a,b\n");
    for i in 0..g.nlat {
        for j in 0..g.nlon {
            let k = g.idx(i, j);
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_f64(g.phi_nodes[i]),
                format_f64(g.theta_nodes[j]),
                format_f64(w.a[k]),
                format_f64(w.b[k])
            ));
        }
    }
    out
}

/// Generic numeric table with a header row.
pub fn table_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON document for a sampled solution.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub alpha: f64,
    pub family_tag: FamilyTag,
    pub params: serde_json::Value,
    pub grid: GridSpec,
    pub fields: FieldsDoc,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub nlat: usize,
    pub nlon: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldsDoc {
    pub f: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
}

/// Serialize a solution (with arbitrary constructor parameters as metadata).
pub fn solution_to_json(sol: &HomogeneousSolution, params: serde_json::Value) -> String {
    let doc = SolutionDoc {
        alpha: sol.alpha,
        family_tag: sol.family,
        params,
        grid: GridSpec { nlat: sol.grid().nlat, nlon: sol.grid().nlon },
        fields: FieldsDoc {
            f: sol.f.values.clone(),
            a: sol.v.a.clone(),
            b: sol.v.b.clone(),
            p: sol.p.values.clone(),
        },
    };
    serde_json::to_string(&doc).expect("solution serialization cannot fail")
}

/// Rebuild a solution from its JSON document.
pub fn solution_from_json(text: &str) -> Result<HomogeneousSolution> {
    let doc: SolutionDoc =
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
    let grid = SphereGrid::build(doc.grid.nlat, doc.grid.nlon)?;
    let f = ScalarField::new(grid.clone(), doc.fields.f)?;
    let v = TangentField::new(grid.clone(), doc.fields.a, doc.fields.b)?;
    let p = ScalarField::new(grid, doc.fields.p)?;
    Ok(HomogeneousSolution {
        alpha: doc.alpha,
        f,
        v,
        p,
        family: doc.family_tag,
        smooth_range_note: String::new(),
    })
}
