//! System topology: components, request types, and their dependency
//! expressions, plus the differential-observability structure derived from
//! them (signatures, indistinguishability classes, merging, probes, and the
//! single-fault symptom table).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// What a diagnosable unit is, used only for default priors and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ComponentKind {
    Service,
    Replica,
    Host,
    Pod,
    Container,
    Process,
    /// Equivalence class of components that are not differentially
    /// observable; see [`Topology::merge_indistinguishable`].
    Merged,
}

impl ComponentKind {
    /// Default Beta prior pseudo-counts per kind. Infrastructure kinds carry
    /// a healthy-leaning prior (host failure is less likely than a bad code
    /// push); everything else starts at the weak bimodal Beta(0.1, 0.1).
    pub fn default_prior(self) -> (f64, f64) {
        match self {
            ComponentKind::Host | ComponentKind::Pod | ComponentKind::Container => (0.5, 0.1),
            _ => (0.1, 0.1),
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentKind::Service => "service",
            ComponentKind::Replica => "replica",
            ComponentKind::Host => "host",
            ComponentKind::Pod => "pod",
            ComponentKind::Container => "container",
            ComponentKind::Process => "process",
            ComponentKind::Merged => "merged",
        };
        f.write_str(s)
    }
}

/// An atomic (or merged) diagnosable unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    /// Human-facing name; for replicas this is the owning service's name,
    /// which is what groups them for service rollups at report time.
    pub display_name: String,
    /// Prior pseudo-successes, > 0.
    pub prior_alpha: f64,
    /// Prior pseudo-failures, > 0.
    pub prior_beta: f64,
    /// Original component ids; non-empty iff `kind == Merged`.
    pub members: Vec<String>,
}

impl Component {
    pub fn new(id: impl Into<String>, kind: ComponentKind) -> Self {
        let id = id.into();
        let (prior_alpha, prior_beta) = kind.default_prior();
        Component {
            display_name: id.clone(),
            id,
            kind,
            prior_alpha,
            prior_beta,
            members: Vec::new(),
        }
    }

    pub fn with_prior(mut self, alpha: f64, beta: f64) -> Self {
        self.prior_alpha = alpha;
        self.prior_beta = beta;
        self
    }

    pub fn with_display_name(mut self, name: impl Into<String>) -> Self {
        self.display_name = name.into();
        self
    }
}

/// One term of a dependency expression. An expression is a conjunction of
/// terms, so a request type needs every term to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DependencyTerm {
    /// The single component must be healthy.
    Atom(String),
    /// At least one member must be healthy (replicated stateless backends).
    AnyOf(Vec<String>),
    /// At least `k` members must be healthy (quorum systems). Repeated ids
    /// act as weights: a merged class standing in for several original
    /// members counts with its multiplicity.
    KOfN { k: usize, members: Vec<String> },
}

impl DependencyTerm {
    /// Ids mentioned by this term, in declaration order with repeats.
    pub fn component_ids(&self) -> impl Iterator<Item = &str> {
        let slice: &[String] = match self {
            DependencyTerm::Atom(id) => core::slice::from_ref(id),
            DependencyTerm::AnyOf(ids) => ids,
            DependencyTerm::KOfN { members, .. } => members,
        };
        slice.iter().map(String::as_str)
    }

    /// Boolean value of this term under a health assignment.
    pub fn holds(&self, healthy: &mut impl FnMut(&str) -> bool) -> bool {
        match self {
            DependencyTerm::Atom(id) => healthy(id),
            DependencyTerm::AnyOf(ids) => ids.iter().any(|id| healthy(id)),
            DependencyTerm::KOfN { k, members } => {
                members.iter().filter(|id| healthy(id)).count() >= *k
            }
        }
    }
}

/// Conjunction of dependency terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyExpr {
    pub terms: Vec<DependencyTerm>,
}

impl DependencyExpr {
    pub fn new(terms: Vec<DependencyTerm>) -> Self {
        DependencyExpr { terms }
    }

    /// Pure-AND expression over a set of component ids.
    pub fn all_of<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        DependencyExpr {
            terms: ids
                .into_iter()
                .map(|id| DependencyTerm::Atom(id.into()))
                .collect(),
        }
    }

    /// The flattened dependency set.
    pub fn component_set(&self) -> BTreeSet<&str> {
        self.terms.iter().flat_map(|t| t.component_ids()).collect()
    }

    /// Evaluates the expression under a health assignment.
    pub fn evaluate(&self, mut healthy: impl FnMut(&str) -> bool) -> bool {
        self.terms.iter().all(|t| t.holds(&mut healthy))
    }
}

/// A request type and the dependency expression its success requires.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestType {
    pub id: String,
    pub expr: DependencyExpr,
    /// Probes are synthetic singleton request types (pings, health checks)
    /// added to break indistinguishability.
    pub is_probe: bool,
}

impl RequestType {
    pub fn new(id: impl Into<String>, expr: DependencyExpr) -> Self {
        RequestType {
            id: id.into(),
            expr,
            is_probe: false,
        }
    }
}

/// Validation failures when assembling a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    DuplicateComponent(String),
    DuplicateRequestType(String),
    /// A request type references a component id that is not declared.
    DanglingReference { request_type: String, id: String },
    MergedWithoutMembers(String),
    EmptyDependencySet(String),
    KOfNBounds { request_type: String, k: usize, n: usize },
    /// A component id appears in two different terms of one expression;
    /// terms are assumed independent.
    RepeatedAcrossTerms { request_type: String, id: String },
    ProbeNotSingleton(String),
    NoRequestTypes,
    NonPositivePrior(String),
    MembersOnNonMerged(String),
    UnknownComponent(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::DuplicateComponent(id) => write!(f, "duplicate component id `{id}`"),
            ModelError::DuplicateRequestType(id) => write!(f, "duplicate request type id `{id}`"),
            ModelError::DanglingReference { request_type, id } => write!(
                f,
                "request type `{request_type}` references unknown component `{id}`"
            ),
            ModelError::MergedWithoutMembers(id) => {
                write!(f, "merged component `{id}` lists no members")
            }
            ModelError::EmptyDependencySet(id) => {
                write!(f, "request type `{id}` has an empty dependency set")
            }
            ModelError::KOfNBounds { request_type, k, n } => write!(
                f,
                "request type `{request_type}` has a k-of-n term with k={k} outside 1..={n}"
            ),
            ModelError::RepeatedAcrossTerms { request_type, id } => write!(
                f,
                "request type `{request_type}` mentions `{id}` in more than one term"
            ),
            ModelError::ProbeNotSingleton(id) => write!(
                f,
                "probe request type `{id}` must depend on exactly one component"
            ),
            ModelError::NoRequestTypes => write!(f, "topology declares no request types"),
            ModelError::NonPositivePrior(id) => write!(
                f,
                "component `{id}` has a non-positive prior pseudo-count"
            ),
            ModelError::MembersOnNonMerged(id) => write!(
                f,
                "component `{id}` lists members but is not of kind merged"
            ),
            ModelError::UnknownComponent(id) => write!(f, "unknown component `{id}`"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Binary request outcomes per request type: 1 = succeeds, 0 = fails.
/// May be partial (request types without traffic carry no bit).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymptomPattern {
    bits: BTreeMap<String, bool>,
}

impl SymptomPattern {
    pub fn new() -> Self {
        SymptomPattern::default()
    }

    pub fn from_bits<I, S>(bits: I) -> Self
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        SymptomPattern {
            bits: bits.into_iter().map(|(id, b)| (id.into(), b)).collect(),
        }
    }

    pub fn set(&mut self, request_type: impl Into<String>, succeeds: bool) {
        self.bits.insert(request_type.into(), succeeds);
    }

    pub fn get(&self, request_type: &str) -> Option<bool> {
        self.bits.get(request_type).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.bits.iter().map(|(id, b)| (id.as_str(), *b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// True when every request type of `t` has a bit.
    pub fn covers(&self, t: &Topology) -> bool {
        t.request_types()
            .iter()
            .all(|rt| self.bits.contains_key(&rt.id))
    }
}

/// A validated system topology. Components and request types are held sorted
/// by id, so every derived structure is deterministic. Immutable after
/// construction; all operations return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    components: Vec<Component>,
    request_types: Vec<RequestType>,
}

impl Topology {
    /// Validates and assembles a topology. Inputs may arrive in any order.
    pub fn new(
        components: Vec<Component>,
        request_types: Vec<RequestType>,
    ) -> Result<Self, ModelError> {
        let mut components = components;
        let mut request_types = request_types;
        components.sort_by(|a, b| a.id.cmp(&b.id));
        request_types.sort_by(|a, b| a.id.cmp(&b.id));

        if request_types.is_empty() {
            return Err(ModelError::NoRequestTypes);
        }
        let mut ids = BTreeSet::new();
        for c in &components {
            if !ids.insert(c.id.as_str()) {
                return Err(ModelError::DuplicateComponent(c.id.clone()));
            }
            if !(c.prior_alpha > 0.0 && c.prior_beta > 0.0) {
                return Err(ModelError::NonPositivePrior(c.id.clone()));
            }
            if c.kind == ComponentKind::Merged && c.members.is_empty() {
                return Err(ModelError::MergedWithoutMembers(c.id.clone()));
            }
            if c.kind != ComponentKind::Merged && !c.members.is_empty() {
                return Err(ModelError::MembersOnNonMerged(c.id.clone()));
            }
        }
        let mut rt_ids = BTreeSet::new();
        for rt in &request_types {
            if !rt_ids.insert(rt.id.as_str()) {
                return Err(ModelError::DuplicateRequestType(rt.id.clone()));
            }
            if rt.expr.terms.is_empty() {
                return Err(ModelError::EmptyDependencySet(rt.id.clone()));
            }
            let mut seen_in_terms: BTreeSet<&str> = BTreeSet::new();
            for term in &rt.expr.terms {
                let term_ids: BTreeSet<&str> = term.component_ids().collect();
                if term_ids.is_empty() {
                    return Err(ModelError::EmptyDependencySet(rt.id.clone()));
                }
                for id in &term_ids {
                    if !ids.contains(id) {
                        return Err(ModelError::DanglingReference {
                            request_type: rt.id.clone(),
                            id: id.to_string(),
                        });
                    }
                    if !seen_in_terms.insert(id) {
                        return Err(ModelError::RepeatedAcrossTerms {
                            request_type: rt.id.clone(),
                            id: id.to_string(),
                        });
                    }
                }
                if let DependencyTerm::KOfN { k, members } = term {
                    if *k < 1 || *k > members.len() {
                        return Err(ModelError::KOfNBounds {
                            request_type: rt.id.clone(),
                            k: *k,
                            n: members.len(),
                        });
                    }
                }
            }
            if rt.is_probe && rt.expr.component_set().len() != 1 {
                return Err(ModelError::ProbeNotSingleton(rt.id.clone()));
            }
        }
        Ok(Topology {
            components,
            request_types,
        })
    }

    /// Components, sorted by id.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Request types, sorted by id.
    pub fn request_types(&self) -> &[RequestType] {
        &self.request_types
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components
            .binary_search_by(|c| c.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.components[i])
    }

    pub fn request_type(&self, id: &str) -> Option<&RequestType> {
        self.request_types
            .binary_search_by(|rt| rt.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.request_types[i])
    }

    /// Per-component membership bit-vector over request types (bit order =
    /// sorted request-type ids). Two components with equal signatures cannot
    /// be told apart by any fail-stop observation.
    pub fn observability_signatures(&self) -> BTreeMap<String, Vec<bool>> {
        let mut out = BTreeMap::new();
        for c in &self.components {
            let sig: Vec<bool> = self
                .request_types
                .iter()
                .map(|rt| rt.expr.component_set().contains(c.id.as_str()))
                .collect();
            out.insert(c.id.clone(), sig);
        }
        out
    }

    /// Groups of two or more components sharing an observability signature,
    /// each group sorted, groups sorted by first member.
    pub fn indistinguishable_groups(&self) -> Vec<Vec<String>> {
        let mut by_sig: BTreeMap<Vec<bool>, Vec<String>> = BTreeMap::new();
        for (id, sig) in self.observability_signatures() {
            by_sig.entry(sig).or_default().push(id);
        }
        let mut groups: Vec<Vec<String>> = by_sig
            .into_values()
            .filter(|members| members.len() >= 2)
            .collect();
        groups.sort();
        groups
    }

    /// Replaces every indistinguishability class by a single merged
    /// component (id = member ids joined with `+`, prior = element-wise sum
    /// of member pseudo-counts) and rewrites request-type expressions to the
    /// merged ids. Idempotent.
    pub fn merge_indistinguishable(&self) -> Topology {
        let mut rename: BTreeMap<&str, String> = BTreeMap::new();
        let mut merged_components: Vec<Component> = Vec::new();
        let mut consumed: BTreeSet<&str> = BTreeSet::new();

        let mut by_sig: BTreeMap<Vec<bool>, Vec<&Component>> = BTreeMap::new();
        let sigs = self.observability_signatures();
        for c in &self.components {
            by_sig.entry(sigs[&c.id].clone()).or_default().push(c);
        }
        for group in by_sig.values() {
            if group.len() < 2 {
                continue;
            }
            let mut members: Vec<String> = Vec::new();
            let mut alpha = 0.0;
            let mut beta = 0.0;
            for c in group {
                if c.kind == ComponentKind::Merged {
                    members.extend(c.members.iter().cloned());
                } else {
                    members.push(c.id.clone());
                }
                alpha += c.prior_alpha;
                beta += c.prior_beta;
                consumed.insert(c.id.as_str());
            }
            members.sort();
            members.dedup();
            let id = members.join("+");
            for c in group {
                rename.insert(c.id.as_str(), id.clone());
            }
            let mut mc = Component::new(id.clone(), ComponentKind::Merged)
                .with_prior(alpha, beta)
                .with_display_name(id);
            mc.members = members;
            merged_components.push(mc);
        }
        if merged_components.is_empty() {
            return self.clone();
        }

        let mut components: Vec<Component> = self
            .components
            .iter()
            .filter(|c| !consumed.contains(c.id.as_str()))
            .cloned()
            .collect();
        components.extend(merged_components);

        let renamed = |id: &str| -> String {
            rename
                .get(id)
                .cloned()
                .unwrap_or_else(|| id.to_string())
        };
        let request_types = self
            .request_types
            .iter()
            .map(|rt| {
                let mut atoms: BTreeSet<String> = BTreeSet::new();
                let mut groups: Vec<DependencyTerm> = Vec::new();
                for term in &rt.expr.terms {
                    match term {
                        DependencyTerm::Atom(id) => {
                            atoms.insert(renamed(id));
                        }
                        DependencyTerm::AnyOf(ids) => {
                            let mut mapped: Vec<String> =
                                ids.iter().map(|id| renamed(id)).collect();
                            mapped.sort();
                            mapped.dedup();
                            groups.push(DependencyTerm::AnyOf(mapped));
                        }
                        DependencyTerm::KOfN { k, members } => {
                            let mut mapped: Vec<String> =
                                members.iter().map(|id| renamed(id)).collect();
                            mapped.sort();
                            groups.push(DependencyTerm::KOfN {
                                k: *k,
                                members: mapped,
                            });
                        }
                    }
                }
                // Resolve overlap between atoms and groups. An atom already
                // requires the shared component, so an AnyOf containing it is
                // absorbed wholesale and a KOfN sheds that member's weight.
                let mut terms: Vec<DependencyTerm> = Vec::new();
                for group in groups {
                    match group {
                        DependencyTerm::AnyOf(ids) => {
                            if ids.iter().any(|id| atoms.contains(id)) {
                                continue;
                            }
                            if ids.len() == 1 {
                                atoms.insert(ids.into_iter().next().unwrap());
                            } else {
                                terms.push(DependencyTerm::AnyOf(ids));
                            }
                        }
                        DependencyTerm::KOfN { k, members } => {
                            let (dup, rest): (Vec<String>, Vec<String>) =
                                members.into_iter().partition(|id| atoms.contains(id));
                            let k = k.saturating_sub(dup.len());
                            if k == 0 || rest.is_empty() {
                                continue;
                            }
                            let distinct: BTreeSet<&String> = rest.iter().collect();
                            if distinct.len() == 1 {
                                atoms.insert(rest.into_iter().next().unwrap());
                            } else {
                                terms.push(DependencyTerm::KOfN { k, members: rest });
                            }
                        }
                    }
                }
                terms.extend(atoms.into_iter().map(DependencyTerm::Atom));
                RequestType {
                    id: rt.id.clone(),
                    expr: DependencyExpr::new(terms),
                    is_probe: rt.is_probe,
                }
            })
            .collect();

        Topology::new(components, request_types)
            .expect("merging preserves topology validity")
    }

    /// Adds a probe request type with the singleton dependency set
    /// `{component_id}`. The probe id is derived as `probe:<component_id>`.
    pub fn add_probe(&self, component_id: &str) -> Result<Topology, ModelError> {
        if self.component(component_id).is_none() {
            return Err(ModelError::UnknownComponent(component_id.to_string()));
        }
        let mut request_types = self.request_types.clone();
        request_types.push(RequestType {
            id: format!("probe:{component_id}"),
            expr: DependencyExpr::all_of([component_id]),
            is_probe: true,
        });
        Topology::new(self.components.clone(), request_types)
    }

    /// Symptom pattern induced by failing exactly the given components.
    pub fn induced_pattern<'a, I>(&self, failed: I) -> SymptomPattern
    where
        I: IntoIterator<Item = &'a str>,
    {
        let failed: BTreeSet<&str> = failed.into_iter().collect();
        SymptomPattern::from_bits(self.request_types.iter().map(|rt| {
            let ok = rt.expr.evaluate(|id| !failed.contains(id));
            (rt.id.clone(), ok)
        }))
    }

    /// One row per component: the symptom pattern observed when exactly that
    /// component has failed and everything else is healthy.
    pub fn symptom_table(&self) -> Vec<(String, SymptomPattern)> {
        self.components
            .iter()
            .map(|c| (c.id.clone(), self.induced_pattern([c.id.as_str()])))
            .collect()
    }
}
