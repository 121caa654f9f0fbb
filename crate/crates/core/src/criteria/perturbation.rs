use ndarray::arr2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::{ContingencyTable, TableWithSingles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// All cells (and singles) times `alpha`.
    Scale,
    /// High husband row times `alpha`.
    Type1Row,
    /// High wife column times `alpha`.
    Type1Col,
    /// A share `alpha` of low husbands reclassified as high.
    Type2Row,
    /// A share `alpha` of low wives reclassified as high.
    Type2Col,
    /// Voluntary singles added.
    VoluntarySingles,
    /// Involuntary singles added.
    InvoluntarySingles,
}

/// A change in the marginal distributions of a 2x2 table (or a rescaling
/// of any table).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalPerturbation {
    pub kind: PerturbationKind,
    pub alpha: f64,
    /// Additions `[e, f, g, h]`: low men, high men, low women, high women.
    pub singles_delta: Option<[f64; 4]>,
}

impl MarginalPerturbation {
    pub fn new(kind: PerturbationKind, alpha: f64) -> Result<Self> {
        let p = MarginalPerturbation {
            kind,
            alpha,
            singles_delta: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn singles(kind: PerturbationKind, delta: [f64; 4]) -> Result<Self> {
        let p = MarginalPerturbation {
            kind,
            alpha: 1.0,
            singles_delta: Some(delta),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        use PerturbationKind::*;
        let ok = match self.kind {
            Scale | Type1Row | Type1Col => self.alpha.is_finite() && self.alpha > 0.0,
            Type2Row | Type2Col => self.alpha > 0.0 && self.alpha < 1.0,
            VoluntarySingles | InvoluntarySingles => self
                .singles_delta
                .is_some_and(|d| d.iter().all(|v| v.is_finite() && *v >= 0.0)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid perturbation {self:?}")))
        }
    }

    fn is_singles(&self) -> bool {
        matches!(
            self.kind,
            PerturbationKind::VoluntarySingles | PerturbationKind::InvoluntarySingles
        )
    }
}

/// Apply `p` to a couples table. Singles perturbations need singles counts.
pub fn perturb_table(t: &ContingencyTable, p: &MarginalPerturbation) -> Result<ContingencyTable> {
    p.validate()?;
    if p.is_singles() {
        return Err(Error::DegenerateInput(
            "singles perturbations need a table with singles".into(),
        ));
    }
    if p.kind == PerturbationKind::Scale {
        return Ok(t.scaled(p.alpha));
    }
    let [a, b, c, d] = t.cells_2x2()?;
    let x = p.alpha;
    let cells = match p.kind {
        PerturbationKind::Type1Row => [[a, b], [x * c, x * d]],
        PerturbationKind::Type1Col => [[a, x * b], [c, x * d]],
        PerturbationKind::Type2Row => [[(1.0 - x) * a, (1.0 - x) * b], [c + x * a, d + x * b]],
        PerturbationKind::Type2Col => [[(1.0 - x) * a, b + x * a], [(1.0 - x) * c, d + x * c]],
        _ => unreachable!(),
    };
    Ok(t.with_counts_unchecked(arr2(&cells)))
}

/// Apply `p` to a table with singles. Marginal changes leave singles
/// untouched; singles perturbations leave couples untouched.
pub fn apply_perturbation(t: &TableWithSingles, p: &MarginalPerturbation) -> Result<TableWithSingles> {
    p.validate()?;
    match p.kind {
        PerturbationKind::Scale => Ok(t.scaled(p.alpha)),
        PerturbationKind::VoluntarySingles | PerturbationKind::InvoluntarySingles => {
            t.couples().cells_2x2()?;
            let [e, f, g, h] = p.singles_delta.expect("validated");
            let men = t.single_men();
            let women = t.single_women();
            TableWithSingles::new(
                t.couples().clone(),
                vec![men[0] + e, men[1] + f],
                vec![women[0] + g, women[1] + h],
            )
        }
        _ => Ok(TableWithSingles::from_parts_unchecked(
            perturb_table(t.couples(), p)?,
            t.single_men().to_vec(),
            t.single_women().to_vec(),
        )),
    }
}
