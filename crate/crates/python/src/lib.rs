//! Python bindings: dataset records, the knowledge base, prompt rendering, CoT
//! annotation, the retrieval inquirer, metrics and the pipeline runner.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde_json::Value;

use domforge::corpus::{read_dataset, records_from_source, FunctionRecord};
use domforge::generation::{ApiInquirer, RetrievalInquirer};
use domforge::knowledge::{build_kb_from_library_source, KnowledgeBase};
use domforge::metrics::{self, CodeBleuWeights};
use domforge::pipeline::{run_pipeline as run, PipelineConfig, Stage};
use domforge::prompts::{self, PromptKind, PromptSpec};
use domforge::{cot, SubjectLanguage};

create_exception!(domforge, DomforgeError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    DomforgeError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn json_to_py(py: Python<'_>, value: serde_json::Result<Value>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &value.map_err(err)?)
}

fn language(name: &str) -> PyResult<SubjectLanguage> {
    name.parse().map_err(err)
}

/// One mined function.
#[pyclass(name = "FunctionRecord", module = "domforge", frozen, from_py_object)]
#[derive(Clone)]
struct PyFunctionRecord(FunctionRecord);

#[pymethods]
impl PyFunctionRecord {
    #[getter]
    fn id(&self) -> &str {
        &self.0.id
    }

    #[getter]
    fn repo_id(&self) -> &str {
        &self.0.repo_id
    }

    #[getter]
    fn path(&self) -> &str {
        &self.0.path
    }

    #[getter]
    fn language(&self) -> &str {
        self.0.subject_language.as_str()
    }

    #[getter]
    fn library(&self) -> &str {
        &self.0.library
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    /// Signature without trailing whitespace, as shown in prompts.
    #[getter]
    fn signature(&self) -> &str {
        self.0.prompt_signature()
    }

    #[getter]
    fn body(&self) -> &str {
        &self.0.body
    }

    /// Qualified names of the library APIs called, in source order.
    #[getter]
    fn apis(&self) -> Vec<String> {
        self.0.api_names()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "FunctionRecord(id={:?}, name={:?}, apis={:?})",
            self.0.id,
            self.0.name,
            self.0.api_names()
        )
    }
}

/// API name to docstring map for one library.
#[pyclass(name = "KnowledgeBase", module = "domforge", frozen)]
struct PyKnowledgeBase(KnowledgeBase);

#[pymethods]
impl PyKnowledgeBase {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        KnowledgeBase::load(&path).map(Self).map_err(err)
    }

    /// Builds from documented functions under `lib_src` for a builtin library.
    #[staticmethod]
    fn build(lib_src: Vec<PathBuf>, library: &str) -> PyResult<Self> {
        let cfg = PipelineConfig::new(library, ".");
        let lib = cfg.library_spec().map_err(err)?;
        let (kb, _) = build_kb_from_library_source(&lib_src, &lib, cfg.built_at).map_err(err)?;
        Ok(Self(kb))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(err)
    }

    #[getter]
    fn library(&self) -> &str {
        &self.0.library
    }

    fn api_names(&self) -> Vec<String> {
        self.0.entries().map(|e| e.api_name.clone()).collect()
    }

    /// Full docstring of `api`, or None.
    fn lookup(&self, api: &str) -> Option<String> {
        self.0.lookup(api).map(|e| e.docstring.clone())
    }

    /// One-sentence description of `api` as used in prompts, or None.
    fn summary(&self, api: &str) -> Option<String> {
        self.0.lookup(api).map(|e| e.summary())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, api: &str) -> bool {
        self.0.lookup(api).is_some()
    }
}

/// Recommends API sequences from the most similar indexed signature.
#[pyclass(name = "RetrievalInquirer", module = "domforge", frozen)]
struct PyRetrievalInquirer(RetrievalInquirer);

#[pymethods]
impl PyRetrievalInquirer {
    #[new]
    fn new(records: Vec<PyFunctionRecord>) -> Self {
        Self(RetrievalInquirer::build(records.iter().map(|r| &r.0)))
    }

    #[pyo3(signature = (signature, history = Vec::new()))]
    fn recommend(&self, signature: &str, history: Vec<String>) -> Vec<String> {
        self.0.recommend(signature, &history)
    }

    /// `(record id, similarity)` of the best match, optionally leaving one record out.
    #[pyo3(signature = (signature, exclude = None))]
    fn nearest(&self, signature: &str, exclude: Option<&str>) -> Option<(String, f64)> {
        self.0
            .nearest(signature, exclude)
            .map(|(id, s)| (id.to_string(), s))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Functions in `source` that call `library`.
#[pyfunction]
#[pyo3(signature = (source, library, repo_id = "local", path = "input"))]
fn extract_functions(
    source: &str,
    library: &str,
    repo_id: &str,
    path: &str,
) -> PyResult<Vec<PyFunctionRecord>> {
    let lib = PipelineConfig::new(library, ".")
        .library_spec()
        .map_err(err)?;
    Ok(records_from_source(source, repo_id, path, &lib)
        .into_iter()
        .map(PyFunctionRecord)
        .collect())
}

#[pyfunction]
fn load_dataset(path: PathBuf) -> PyResult<Vec<PyFunctionRecord>> {
    Ok(read_dataset(&path)
        .map_err(err)?
        .into_iter()
        .map(PyFunctionRecord)
        .collect())
}

#[pyfunction]
#[pyo3(signature = (kind, signature, apis = Vec::new(), library = None, kb = None))]
fn render_prompt(
    kind: &str,
    signature: &str,
    apis: Vec<String>,
    library: Option<&str>,
    kb: Option<&PyKnowledgeBase>,
) -> PyResult<String> {
    let kind: PromptKind = kind.parse().map_err(err)?;
    let mut spec = PromptSpec::new(kind, signature).apis(apis);
    if let Some(l) = library {
        spec = spec.library(l);
    }
    if let Some(kb) = kb {
        spec = spec.kb(&kb.0);
    }
    prompts::render_prompt(&spec).map_err(err)
}

/// The function body with knowledge-state comments above each API-calling statement.
#[pyfunction]
#[pyo3(signature = (record, kb = None))]
fn annotate_function(record: &PyFunctionRecord, kb: Option<&PyKnowledgeBase>) -> String {
    cot::annotate_function(&record.0, kb.map(|k| &k.0))
}

#[pyfunction]
fn strip_states(text: &str) -> String {
    cot::strip_states(text)
}

#[pyfunction]
fn tokenize_code(text: &str) -> Vec<String> {
    metrics::tokenize_code(text)
}

/// Sentence BLEU over token lists.
#[pyfunction]
#[pyo3(signature = (candidate, reference, max_n = 4))]
fn bleu(candidate: Vec<String>, reference: Vec<String>, max_n: usize) -> f64 {
    metrics::bleu(&candidate, &reference, max_n)
}

/// CodeBLEU with equal weights; returns the score and its four components.
#[pyfunction]
#[pyo3(signature = (candidate, reference, lang = "go"))]
fn codebleu<'py>(
    py: Python<'py>,
    candidate: &str,
    reference: &str,
    lang: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cb = metrics::codebleu(
        candidate,
        reference,
        language(lang)?,
        &CodeBleuWeights::default(),
    )
    .map_err(err)?;
    json_to_py(py, serde_json::to_value(cb))
}

#[pyfunction]
fn hit_ratio(predicted: Vec<String>, reference: Vec<String>) -> f64 {
    metrics::hit_ratio(&predicted, &reference)
}

/// Runs pipeline stages from a JSON config; returns the evaluation report when the
/// `eval` stage ran.
#[pyfunction]
#[pyo3(signature = (config, stages = None, out_dir = None))]
fn run_pipeline<'py>(
    py: Python<'py>,
    config: PathBuf,
    stages: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = PipelineConfig::load(&config).map_err(err)?;
    if let Some(d) = out_dir {
        cfg.out_dir = d;
    }
    let stages = match stages {
        Some(names) => names
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Stage>, _>>()
            .map_err(err)?,
        None => Stage::ALL.to_vec(),
    };
    let outcome = py.detach(|| run(&cfg, &stages)).map_err(err)?;
    match &outcome.report {
        Some(report) => json_to_py(py, serde_json::to_value(report)),
        None => Ok(py.None().into_bound(py)),
    }
}

#[pymodule]
#[pyo3(name = "domforge")]
fn domforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DomforgeError", m.py().get_type::<DomforgeError>())?;
    m.add_class::<PyFunctionRecord>()?;
    m.add_class::<PyKnowledgeBase>()?;
    m.add_class::<PyRetrievalInquirer>()?;
    for f in [
        wrap_pyfunction!(extract_functions, m)?,
        wrap_pyfunction!(load_dataset, m)?,
        wrap_pyfunction!(render_prompt, m)?,
        wrap_pyfunction!(annotate_function, m)?,
        wrap_pyfunction!(strip_states, m)?,
        wrap_pyfunction!(tokenize_code, m)?,
        wrap_pyfunction!(bleu, m)?,
        wrap_pyfunction!(codebleu, m)?,
        wrap_pyfunction!(hit_ratio, m)?,
        wrap_pyfunction!(run_pipeline, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
