//! Scenario files: the domain, index order, ideal, caps and the list of
//! checks to run.

use std::path::Path;

use foam_core::membership::{IdealDescriptor, MembershipConfig};
use foam_core::quadrature::QuadratureConfig;
use foam_core::{IndexOrder, OpenSet, Point};
use serde::{Deserialize, Serialize};

use crate::dto::{DomainDto, FamilyDto, OrderDto, SetDto};
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IdealSpec {
    /// `J_{L,Σ}` for one singular set.
    Sigma(SetDto),
    /// `J_{L,S}` for a family.
    Family(FamilyDto),
    /// `J_{L,∅}`.
    Regular,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    pub deriv_cap: Option<u32>,
    pub probes: Option<usize>,
    pub grid: Option<usize>,
    pub max_joins: Option<usize>,
    pub quadrature_order: Option<usize>,
    pub quadrature_subdivisions: Option<usize>,
    #[serde(default)]
    pub extra_points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainDto,
    pub order: OrderDto,
    pub ideal: IdealSpec,
    #[serde(default)]
    pub caps: Caps,
    /// Write a CSV table next to the report for checks that produce one.
    #[serde(default)]
    pub csv: bool,
    pub checks: Vec<CheckSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.checks.is_empty() {
            return Err(ScenarioError::Invalid("scenario has no checks".into()));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn open_set(&self) -> Result<OpenSet, ScenarioError> {
        self.domain.to_open_set()
    }

    pub fn index_order(&self) -> IndexOrder {
        self.order.into()
    }

    pub fn ideal_descriptor(&self) -> Result<IdealDescriptor, ScenarioError> {
        let domain = self.open_set()?;
        let order = self.index_order();
        Ok(match &self.ideal {
            IdealSpec::Sigma(s) => IdealDescriptor::single(order, s.to_set(&domain)?)?,
            IdealSpec::Family(f) => IdealDescriptor::family(order, f.to_family(&domain)?),
            IdealSpec::Regular => IdealDescriptor::regular(order, domain),
        })
    }

    pub fn membership_config(&self) -> Result<MembershipConfig, ScenarioError> {
        let d = MembershipConfig::default();
        let c = &self.caps;
        let cfg = MembershipConfig {
            deriv_cap: c.deriv_cap.unwrap_or(d.deriv_cap),
            probes: c.probes.unwrap_or(d.probes),
            grid: c.grid.unwrap_or(d.grid),
            max_joins: c.max_joins.unwrap_or(d.max_joins),
            ..d
        }
        .with_extra_points(c.extra_points.iter().cloned().map(Point).collect());
        if cfg.probes == 0 || cfg.grid == 0 {
            return Err(ScenarioError::Invalid("caps must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, ScenarioError> {
        let d = QuadratureConfig::default();
        let q = QuadratureConfig {
            order: self.caps.quadrature_order.unwrap_or(d.order),
            subdivisions: self.caps.quadrature_subdivisions.unwrap_or(d.subdivisions),
        };
        if q.order == 0 || q.subdivisions == 0 {
            return Err(ScenarioError::Invalid("caps must be positive".into()));
        }
        Ok(q)
    }
}
