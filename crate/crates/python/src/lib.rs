use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use softquota::generator::{random_instance, GenParams};
use softquota::oracle::{self, DEFAULT_CAP};
use softquota::{
    axioms, io, solver, AxiomReport as CoreReport, Committee, Instance as CoreInstance,
    RawInstance, TieBreakPolicy, TraceEvent, TypeDistribution, TypeSelection,
};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated committee selection instance.
#[pyclass(frozen, skip_from_py_object, module = "softquota")]
#[derive(Clone)]
struct Instance {
    inner: CoreInstance,
}

impl Instance {
    fn committee(&self, members: &[String]) -> PyResult<Committee> {
        self.inner.committee_from_ids(members).map_err(value_error)
    }

    fn candidate(&self, id: &str) -> PyResult<usize> {
        self.inner.candidate_index(id).map_err(value_error)
    }

    fn ids(&self, committee: &Committee) -> Vec<String> {
        self.inner.committee_ids(committee)
    }
}

#[pymethods]
impl Instance {
    /// `membership` is one 0/1 row per candidate, one column per type.
    #[new]
    fn new(
        candidates: Vec<String>,
        priority: Vec<Vec<String>>,
        types: Vec<String>,
        membership: Vec<Vec<i64>>,
        quotas: Vec<i64>,
        k: i64,
    ) -> PyResult<Self> {
        let inner = CoreInstance::validate(RawInstance {
            candidates,
            priority_tiers: priority,
            types,
            membership,
            lower_quotas: quotas,
            committee_size: k,
        })
        .map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = io::parse_instance(text).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        io::serialize_instance(&self.inner)
    }

    #[getter]
    fn candidates(&self) -> Vec<String> {
        self.inner.candidates().to_vec()
    }

    #[getter]
    fn types(&self) -> Vec<String> {
        self.inner.types().to_vec()
    }

    #[getter]
    fn quotas(&self) -> Vec<u32> {
        self.inner.lower_quotas().to_vec()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.committee_size()
    }

    #[getter]
    fn priority(&self) -> Vec<Vec<String>> {
        self.inner.to_raw().priority_tiers
    }

    fn candidate_types(&self, candidate: &str) -> PyResult<Vec<String>> {
        let types = self.inner.candidate_types(candidate).map_err(value_error)?;
        Ok(types.into_iter().map(str::to_owned).collect())
    }

    fn type_distribution(&self, members: Vec<String>) -> PyResult<Vec<u32>> {
        let committee = self.committee(&members)?;
        let dist = self
            .inner
            .type_distribution(&committee)
            .map_err(value_error)?;
        Ok(dist.counts().to_vec())
    }

    #[pyo3(signature = (types, bound, name = None))]
    fn expand_group_quota(
        &self,
        types: Vec<String>,
        bound: u32,
        name: Option<&str>,
    ) -> PyResult<Self> {
        let inner = match name {
            Some(name) => self.inner.expand_group_quota_named(name, &types, bound),
            None => self.inner.expand_group_quota(&types, bound),
        }
        .map_err(value_error)?;
        Ok(Self { inner })
    }

    fn top_k(&self) -> Vec<String> {
        self.ids(&self.inner.top_k())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(m={}, types={}, k={})",
            self.inner.num_candidates(),
            self.inner.num_types(),
            self.inner.committee_size()
        )
    }
}

#[pyclass(frozen, get_all, module = "softquota")]
struct AxiomReport {
    type_optimal: bool,
    jef: bool,
    /// `(out, in)` candidate ids of a dominating swap.
    optimality_witness: Option<(String, String)>,
    /// `(envier, envied)` candidate ids.
    envy_witness: Option<(String, String)>,
}

impl AxiomReport {
    fn from_core(instance: &CoreInstance, report: &CoreReport) -> Self {
        let id = |c: usize| instance.candidate_id(c).to_owned();
        Self {
            type_optimal: report.type_optimal,
            jef: report.jef,
            optimality_witness: report
                .optimality_witness
                .map(|s| (id(s.out), id(s.incoming))),
            envy_witness: report.envy_witness.map(|p| (id(p.envier), id(p.envied))),
        }
    }
}

#[pymethods]
impl AxiomReport {
    fn holds(&self) -> bool {
        self.type_optimal && self.jef
    }

    fn __repr__(&self) -> String {
        let show = |pair: &Option<(String, String)>| match pair {
            Some((a, b)) => format!("('{a}', '{b}')"),
            None => "None".to_owned(),
        };
        let py_bool = |b: bool| if b { "True" } else { "False" };
        format!(
            "AxiomReport(type_optimal={}, jef={}, optimality_witness={}, envy_witness={})",
            py_bool(self.type_optimal),
            py_bool(self.jef),
            show(&self.optimality_witness),
            show(&self.envy_witness)
        )
    }
}

#[pyclass(frozen, module = "softquota")]
struct Solution {
    instance: CoreInstance,
    inner: solver::Solution,
}

#[pymethods]
impl Solution {
    #[getter]
    fn members(&self) -> Vec<String> {
        self.instance.committee_ids(&self.inner.committee)
    }

    #[getter]
    fn report(&self) -> AxiomReport {
        AxiomReport::from_core(&self.instance, &self.inner.report)
    }

    /// Trace events as tuples: `("greedy_add", type, candidate)`,
    /// `("top_up_add", candidate)`, `("dominance_swap", out, in)` and
    /// `("envy_swap", out, in)`.
    #[getter]
    fn events(&self, py: Python<'_>) -> PyResult<Vec<Py<PyAny>>> {
        let inst = &self.instance;
        let id = |c: usize| inst.candidate_id(c).to_owned();
        self.inner
            .trace
            .events
            .iter()
            .map(|event| {
                let obj = match *event {
                    TraceEvent::GreedyAdd {
                        type_index,
                        candidate,
                    } => (
                        "greedy_add",
                        inst.type_id(type_index).to_owned(),
                        id(candidate),
                    )
                        .into_pyobject(py)?
                        .into_any(),
                    TraceEvent::TopUpAdd { candidate } => {
                        ("top_up_add", id(candidate)).into_pyobject(py)?.into_any()
                    }
                    TraceEvent::DominanceSwap { out, incoming, .. } => {
                        ("dominance_swap", id(out), id(incoming))
                            .into_pyobject(py)?
                            .into_any()
                    }
                    TraceEvent::EnvySwap { out, incoming } => ("envy_swap", id(out), id(incoming))
                        .into_pyobject(py)?
                        .into_any(),
                };
                Ok(obj.unbind())
            })
            .collect()
    }

    /// Stage-2/stage-3 rounds the solver needed.
    #[getter]
    fn rounds(&self) -> usize {
        self.inner.trace.counters.rounds
    }

    #[pyo3(signature = (trace = true))]
    fn to_json(&self, trace: bool) -> String {
        io::serialize_result(
            &self.instance,
            &self.inner.committee,
            trace.then_some(&self.inner.trace),
            &self.inner.report,
        )
    }

    fn __repr__(&self) -> String {
        format!("Solution(members={:?})", self.members())
    }
}

fn policy_from(
    instance: &CoreInstance,
    policy: &str,
    type_order: Option<Vec<String>>,
) -> PyResult<TieBreakPolicy> {
    let type_selection = match policy {
        "lexicographic" => TypeSelection::Lexicographic,
        "largest-deficit" | "largest_deficit" => TypeSelection::LargestDeficit,
        other => return Err(value_error(format!("unknown policy `{other}`"))),
    };
    let type_order = type_order
        .map(|order| {
            order
                .iter()
                .map(|t| instance.type_index(t))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()
        .map_err(value_error)?;
    Ok(TieBreakPolicy {
        type_selection,
        type_order,
    })
}

/// Selects a committee. `single_pass=True` runs each stage exactly once.
#[pyfunction]
#[pyo3(signature = (instance, policy = "lexicographic", type_order = None, single_pass = false))]
fn solve(
    instance: &Instance,
    policy: &str,
    type_order: Option<Vec<String>>,
    single_pass: bool,
) -> PyResult<Solution> {
    let policy = policy_from(&instance.inner, policy, type_order)?;
    let inner = if single_pass {
        solver::solve_single_pass(&instance.inner, &policy)
    } else {
        solver::solve(&instance.inner, &policy)
    };
    Ok(Solution {
        instance: instance.inner.clone(),
        inner,
    })
}

#[pyfunction]
fn audit(instance: &Instance, members: Vec<String>) -> PyResult<AxiomReport> {
    let committee = instance.committee(&members)?;
    let report = axioms::audit(&instance.inner, &committee).map_err(value_error)?;
    Ok(AxiomReport::from_core(&instance.inner, &report))
}

#[pyfunction]
fn dominates(x: Vec<u32>, y: Vec<u32>, quotas: Vec<u32>) -> PyResult<bool> {
    axioms::dominates(
        &TypeDistribution::new(x),
        &TypeDistribution::new(y),
        &quotas,
    )
    .map_err(value_error)
}

#[pyfunction]
fn find_dominating_swap(
    instance: &Instance,
    members: Vec<String>,
) -> PyResult<Option<(String, String)>> {
    let committee = instance.committee(&members)?;
    let swap = axioms::find_dominating_swap(&instance.inner, &committee).map_err(value_error)?;
    let id = |c: usize| instance.inner.candidate_id(c).to_owned();
    Ok(swap.map(|s| (id(s.out), id(s.incoming))))
}

#[pyfunction]
fn find_jef_violation(
    instance: &Instance,
    members: Vec<String>,
) -> PyResult<Option<(String, String)>> {
    let committee = instance.committee(&members)?;
    let pair = axioms::find_jef_violation(&instance.inner, &committee).map_err(value_error)?;
    let id = |c: usize| instance.inner.candidate_id(c).to_owned();
    Ok(pair.map(|p| (id(p.envier), id(p.envied))))
}

#[pyfunction]
fn has_justified_envy(
    instance: &Instance,
    members: Vec<String>,
    envier: &str,
    envied: &str,
) -> PyResult<bool> {
    let committee = instance.committee(&members)?;
    let (envier, envied) = (instance.candidate(envier)?, instance.candidate(envied)?);
    axioms::has_justified_envy(&instance.inner, &committee, envier, envied).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (seed, m, l, k, density = 0.5, tightness = 0.5, ties = 0.0))]
fn generate(
    seed: u64,
    m: usize,
    l: usize,
    k: usize,
    density: f64,
    tightness: f64,
    ties: f64,
) -> PyResult<Instance> {
    let inner = random_instance(&GenParams {
        m,
        types: l,
        k,
        density,
        tightness,
        tie_probability: ties,
        seed,
    })
    .map_err(value_error)?;
    Ok(Instance { inner })
}

/// Whether the solver's output lies in the oracle's set of committees
/// satisfying both axioms.
#[pyfunction]
#[pyo3(signature = (instance, cap = DEFAULT_CAP))]
fn certify(instance: &Instance, cap: u64) -> PyResult<bool> {
    let cert = oracle::certify_solver(&instance.inner, &TieBreakPolicy::default(), cap)
        .map_err(value_error)?;
    Ok(cert.passed)
}

#[pyfunction]
#[pyo3(signature = (instance, members, swap_size_limit, cap = DEFAULT_CAP))]
fn global_type_optimality_check(
    instance: &Instance,
    members: Vec<String>,
    swap_size_limit: usize,
    cap: u64,
) -> PyResult<bool> {
    let committee = instance.committee(&members)?;
    oracle::global_type_optimality_check(&instance.inner, &committee, swap_size_limit, cap)
        .map_err(value_error)
}

#[pymodule]
#[pyo3(name = "softquota")]
fn softquota_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Solution>()?;
    m.add_class::<AxiomReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(dominates, m)?)?;
    m.add_function(wrap_pyfunction!(find_dominating_swap, m)?)?;
    m.add_function(wrap_pyfunction!(find_jef_violation, m)?)?;
    m.add_function(wrap_pyfunction!(has_justified_envy, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(global_type_optimality_check, m)?)?;
    Ok(())
}
