//! Python bindings: parse, split, solve and transform formulas, and
//! classify constraint languages.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qbd_core::affine::kernelize_formula;
use qbd_core::algebra::classify as classify_language;
use qbd_core::backdoor::{detect_cc_backdoor, partition, BaseClass};
use qbd_core::io::{parse_qdimacs_with, parse_relations, write_qdimacs, ParseOptions};
use qbd_core::oracle::{eval_bruteforce_capped, DEFAULT_CAP};
use qbd_core::reductions::{self, GenParams, PartitionedGraph, PrefixPattern};
use qbd_core::special::{dispatch, Algorithm, DispatchConfig};
use qbd_core::QbfFormula;

create_exception!(qbd, QbdError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    QbdError::new_err(e.to_string())
}

fn class_arg(tag: Option<&str>) -> PyResult<Option<BaseClass>> {
    tag.map(|t| t.parse::<BaseClass>().map_err(err)).transpose()
}

/// A quantified Boolean formula split into a tractable and a backdoor part.
#[pyclass(frozen, module = "qbd")]
struct Formula {
    inner: QbfFormula,
}

#[pymethods]
impl Formula {
    /// Reads QDIMACS text. `base_class` re-splits the matrix against a class tag.
    #[staticmethod]
    #[pyo3(signature = (text, base_class=None))]
    fn parse(text: &str, base_class: Option<&str>) -> PyResult<Formula> {
        let opts = ParseOptions {
            class: class_arg(base_class)?,
        };
        let parsed = parse_qdimacs_with(text, &opts).map_err(err)?;
        Ok(Formula { inner: parsed.formula })
    }

    fn to_qdimacs(&self) -> String {
        write_qdimacs(&self.inner)
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    /// Number of variables in the backdoor part.
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn base_class(&self) -> Option<String> {
        self.inner.base_class.map(|c| c.to_string())
    }

    /// Smallest backdoor to the class, as sorted variable ids.
    fn detect(&self, base_class: &str) -> PyResult<Vec<u32>> {
        let cls = base_class.parse::<BaseClass>().map_err(err)?;
        let atoms: Vec<_> = self.inner.matrix.atoms().collect();
        let d = detect_cc_backdoor(&atoms, cls).map_err(err)?;
        Ok(d.backdoor_vars.iter().map(|v| v.id()).collect())
    }

    fn partition(&self, base_class: &str) -> PyResult<Formula> {
        let cls = base_class.parse::<BaseClass>().map_err(err)?;
        Ok(Formula {
            inner: partition(&self.inner, cls).map_err(err)?,
        })
    }

    /// Solves with the named algorithm, or picks one when `algorithm` is None.
    #[pyo3(signature = (algorithm=None, brute_cap=DEFAULT_CAP))]
    fn solve(&self, algorithm: Option<&str>, brute_cap: usize) -> PyResult<SolveResult> {
        let forced = algorithm.map(|a| a.parse::<Algorithm>().map_err(err)).transpose()?;
        let cfg = DispatchConfig {
            brute_cap,
            ..DispatchConfig::default()
        };
        let v = dispatch(&self.inner, forced, &cfg).map_err(err)?;
        Ok(SolveResult {
            value: v.value,
            algorithm: v.algorithm.to_string(),
            k: v.k,
            leaves: v.stats.leaves,
            branch_nodes: v.stats.branch_nodes,
        })
    }

    #[pyo3(signature = (cap=DEFAULT_CAP))]
    fn eval_bruteforce(&self, cap: usize) -> PyResult<bool> {
        eval_bruteforce_capped(&self.inner, cap).map_err(err)
    }

    fn dualize(&self) -> Formula {
        Formula {
            inner: reductions::dualize(&self.inner),
        }
    }

    fn to_3horn(&self) -> PyResult<Formula> {
        Ok(Formula {
            inner: reductions::horn_to_3horn(&self.inner).map_err(err)?,
        })
    }

    /// Kernel of the parity part against the backdoor variables.
    fn kernelize(&self) -> PyResult<Formula> {
        Ok(Formula {
            inner: kernelize_formula(&self.inner).map_err(err)?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(num_vars={}, k={}, base_class={:?})",
            self.inner.num_vars(),
            self.inner.k(),
            self.base_class()
        )
    }

    fn __eq__(&self, other: &Formula) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(frozen, get_all, module = "qbd")]
struct SolveResult {
    value: bool,
    algorithm: String,
    k: usize,
    leaves: u64,
    branch_nodes: u64,
}

#[pymethods]
impl SolveResult {
    fn __bool__(&self) -> bool {
        self.value
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(value={}, algorithm='{}', k={}, leaves={})",
            if self.value { "True" } else { "False" },
            self.algorithm,
            self.k,
            self.leaves
        )
    }
}

/// Witness function name and the relation it breaks, if any.
type WitnessSummary = (String, Option<String>);

/// Classifies a language given in relation-file text. Returns the verdict
/// and, per witness function, `None` if it preserves every relation or the
/// name of a relation it breaks.
#[pyfunction]
#[pyo3(signature = (text, max_d=None))]
fn classify(text: &str, max_d: Option<usize>) -> PyResult<(String, Vec<WitnessSummary>)> {
    let file = parse_relations(text).map_err(err)?;
    let gamma = file.relations();
    let widest = gamma.iter().map(|r| r.arity()).max().unwrap_or(1);
    let v = classify_language(&gamma, max_d.unwrap_or(widest.max(3))).map_err(err)?;
    let witnesses = v
        .witnesses
        .iter()
        .map(|w| {
            (
                w.function.name().to_string(),
                w.broken.as_ref().map(|(i, _)| file.entries[*i].name.clone()),
            )
        })
        .collect();
    Ok((v.status.to_string(), witnesses))
}

/// Seeded random formula with its tractable part in `base_class`.
#[pyfunction]
#[pyo3(signature = (n, k, base_class="2cnf", seed=0, atoms=8, backdoor_clauses=2, max_width=4, forall=0.3))]
#[allow(clippy::too_many_arguments)]
fn generate_random(
    n: usize,
    k: usize,
    base_class: &str,
    seed: u64,
    atoms: usize,
    backdoor_clauses: usize,
    max_width: usize,
    forall: f64,
) -> PyResult<Formula> {
    let params = GenParams {
        n,
        k,
        class: base_class.parse().map_err(err)?,
        tractable_atoms: atoms,
        backdoor_clauses,
        max_width,
        prefix: PrefixPattern::Random { forall },
    };
    Ok(Formula {
        inner: reductions::gen_random(&params, seed).map_err(err)?,
    })
}

/// Horn encoding of a partitioned graph given as `parts 1 2 | 3` plus edge lines.
#[pyfunction]
fn mis_to_horn(graph: &str) -> PyResult<Formula> {
    let g: PartitionedGraph = graph.parse().map_err(err)?;
    Ok(Formula {
        inner: reductions::mis_to_horn(&g).map_err(err)?,
    })
}

#[pyfunction]
fn mis_bruteforce(graph: &str) -> PyResult<bool> {
    let g: PartitionedGraph = graph.parse().map_err(err)?;
    reductions::mis_bruteforce(&g).map_err(err)
}

#[pymodule]
fn qbd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QbdError", m.py().get_type::<QbdError>())?;
    m.add_class::<Formula>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(generate_random, m)?)?;
    m.add_function(wrap_pyfunction!(mis_to_horn, m)?)?;
    m.add_function(wrap_pyfunction!(mis_bruteforce, m)?)?;
    Ok(())
}
