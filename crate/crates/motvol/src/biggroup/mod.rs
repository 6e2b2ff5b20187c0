//! Supported groups, big-cell charts, translation maps and their Jacobians,
//! the invariant-form identity, Haar measures on `G((t))`, and the
//! invariance / chart-independence / canonical-restriction verifications.

mod chart;
mod haar;
mod invariance;

pub use chart::{
    chart_embed, invariance_identity_check, jacobian_det, parse_mat2, parse_mat2_with,
    sample_sl2_elements, translation_map, BigCellChart, ChartKind, IdentityReport, Mat2,
    RationalMap,
};
pub use haar::{
    canonical_restriction_check, haar_measure, pole_stratify, sl2_canonical_decomposition,
    sl2_solved_family, OmegaRepr, OmegaSet, PoleStratification, RestrictionLine,
    RestrictionReport,
};
pub use invariance::{
    chart_independence_check, decompose_translator, entry_as_chart_set, factor_product,
    invariance_check,
    sl2_entry_measure, translate_entry_set, translate_omega, ChartIndependenceReport,
    EntryCond, EntrySet, InvarianceReport, TranslationFactor,
};

use crate::{Error, Result};

/// A supported group: the additive group of affine d-space, a split torus,
/// or SL2.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupKind {
    Additive { d: usize },
    Torus { m: usize },
    Sl2,
}

/// Group data with the derived big-cell dimensions: n positive roots used,
/// torus rank m, and d = 2n + m chart coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

impl GroupSpec {
    pub fn additive(d: usize) -> Result<GroupSpec> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(GroupSpec {
            kind: GroupKind::Additive { d },
            n: 0,
            m: 0,
            d,
        })
    }

    pub fn torus(m: usize) -> Result<GroupSpec> {
        if m == 0 {
            return Err(Error::Domain("torus rank must be positive".into()));
        }
        Ok(GroupSpec {
            kind: GroupKind::Torus { m },
            n: 0,
            m,
            d: m,
        })
    }

    pub fn sl2() -> GroupSpec {
        GroupSpec {
            kind: GroupKind::Sl2,
            n: 1,
            m: 1,
            d: 3,
        }
    }
}
