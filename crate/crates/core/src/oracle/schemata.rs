use alloc::vec::Vec;

use crate::semantics::{EvalError, LassoModel};
use crate::syntax::Formula;

/// The schemata axiomatizing discrete linear time over K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Schema {
    /// `[]φ -> φ`
    T,
    /// `[]φ -> [][]φ`
    Four,
    /// `[]([]φ -> ψ) | []([]ψ -> φ)`
    D2,
    /// `[]([](φ -> []φ) -> φ) -> (<>[]φ -> φ)`
    N1,
}

impl Schema {
    pub const ALL: [Schema; 4] = [Schema::T, Schema::Four, Schema::D2, Schema::N1];

    pub fn name(self) -> &'static str {
        match self {
            Schema::T => "T",
            Schema::Four => "4",
            Schema::D2 => "D2",
            Schema::N1 => "N1",
        }
    }

    /// The instance at `φ`, `ψ`; `ψ` only matters for D2.
    pub fn instance(self, phi: &Formula, psi: &Formula) -> Formula {
        let bx = |f: &Formula| Formula::boxed(f.clone());
        match self {
            Schema::T => Formula::implies(bx(phi), phi.clone()),
            Schema::Four => Formula::implies(bx(phi), Formula::boxed(bx(phi))),
            Schema::D2 => Formula::or(
                Formula::boxed(Formula::implies(bx(phi), psi.clone())),
                Formula::boxed(Formula::implies(bx(psi), phi.clone())),
            ),
            Schema::N1 => Formula::implies(
                Formula::boxed(Formula::implies(Formula::boxed(Formula::implies(phi.clone(), bx(phi))), phi.clone())),
                Formula::implies(Formula::dia(bx(phi)), phi.clone()),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaRow {
    pub schema: Schema,
    pub instance: Formula,
    /// Truth at each flat lasso position.
    pub truth: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemaReport {
    pub rows: Vec<SchemaRow>,
}

impl SchemaReport {
    pub fn all_true(&self) -> bool {
        self.rows.iter().all(|r| r.truth.iter().all(|&b| b))
    }

    pub fn failures(&self) -> impl Iterator<Item = &SchemaRow> {
        self.rows.iter().filter(|r| !r.truth.iter().all(|&b| b))
    }
}

/// Per-instance, per-position truth table.
pub fn check_schemata(m: &LassoModel, instances: &[(Schema, Formula, Formula)]) -> Result<SchemaReport, EvalError> {
    let mut ev = m.evaluator();
    let mut rows = Vec::with_capacity(instances.len());
    for (schema, phi, psi) in instances {
        let instance = schema.instance(phi, psi);
        let truth = ev.truth(&instance)?.to_vec();
        rows.push(SchemaRow { schema: *schema, instance, truth });
    }
    Ok(SchemaReport { rows })
}
