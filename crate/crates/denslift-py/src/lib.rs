use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use engine::equivariance::{
    adx_variation_defect, divfree_tensor_lift_check as tensor_check, sdiff_equivariant_maps, LiftingHandle,
};
use engine::lift::{self, VolLiftParams, VolumeForm};
use engine::operator::generic_field;
use engine::proj::{self, DiffeoJet1D};
use engine::syntax::{self, parse_lambda0, parse_volume, SessionConfig};
use engine::{DensityOperator, Scalar};

fn err(e: engine::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn weight(l0: &str) -> PyResult<Scalar> {
    parse_lambda0(l0).map_err(err)
}

fn volume(v: &str) -> PyResult<VolumeForm> {
    parse_volume(v).map_err(err)
}

fn constant(src: &str) -> PyResult<Scalar> {
    let cfg = SessionConfig::new(1);
    let b = syntax::parse_bindings(&format!("v={src}"), &cfg).map_err(err)?;
    Ok(b["v"].clone())
}

/// Differential operator on the algebra of densities.
#[pyclass(name = "Operator", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyOperator {
    inner: DensityOperator,
}

fn wrap(inner: DensityOperator) -> PyOperator {
    PyOperator { inner }
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (src, dim = 1, params = Vec::new()))]
    fn new(src: &str, dim: usize, params: Vec<String>) -> PyResult<Self> {
        let cfg = SessionConfig::new(dim).with_params(params.iter().map(String::as_str));
        syntax::parse_operator(src, &cfg).map(wrap).map_err(err)
    }

    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        syntax::from_json(src).map(wrap).map_err(err)
    }

    fn to_json(&self) -> String {
        syntax::to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn order(&self) -> Option<usize> {
        self.inner.total_order().ok()
    }

    fn adjoint(&self) -> Self {
        wrap(self.inner.adjoint())
    }

    fn compose(&self, other: &PyOperator) -> PyResult<Self> {
        self.inner.compose(&other.inner).map(wrap).map_err(err)
    }

    /// Member of the pencil at weight `l`.
    fn restrict(&self, l: &str) -> PyResult<Self> {
        Ok(wrap(self.inner.restrict(&weight(l)?)))
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn __matmul__(&self, other: &PyOperator) -> PyResult<Self> {
        self.compose(other)
    }

    fn __add__(&self, other: &PyOperator) -> Self {
        wrap(self.inner.add(&other.inner))
    }

    fn __sub__(&self, other: &PyOperator) -> Self {
        wrap(self.inner.sub(&other.inner))
    }

    fn __neg__(&self) -> Self {
        wrap(self.inner.neg())
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }

    fn __repr__(&self) -> String {
        format!("Operator({:?}, dim={})", self.inner.render(), self.inner.dim())
    }
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", volume = "coordinate"))]
fn canonical_lift(op: &PyOperator, l0: &str, volume: &str) -> PyResult<PyOperator> {
    lift::canonical_lift(&op.inner, &weight(l0)?, &self::volume(volume)?).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", volume = "coordinate", b = "0", c = Vec::new(), d = Vec::new()))]
fn vol_lift(op: &PyOperator, l0: &str, volume: &str, b: &str, c: Vec<String>, d: Vec<String>) -> PyResult<PyOperator> {
    let params = VolLiftParams {
        b: constant(b)?,
        c: c.iter().map(|s| constant(s)).collect::<PyResult<_>>()?,
        d: d.iter().map(|s| constant(s)).collect::<PyResult<_>>()?,
    };
    lift::vol_lift(&op.inner, &weight(l0)?, &self::volume(volume)?, &params).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", volume = "coordinate"))]
fn distinguished_lift(op: &PyOperator, l0: &str, volume: &str) -> PyResult<PyOperator> {
    lift::distinguished_lift(&op.inner, &weight(l0)?, &self::volume(volume)?).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", c = "0"))]
fn first_order_lift(op: &PyOperator, l0: &str, c: &str) -> PyResult<PyOperator> {
    lift::first_order_lift(&op.inner, &weight(l0)?, &constant(c)?).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic"))]
fn second_order_lift(op: &PyOperator, l0: &str) -> PyResult<PyOperator> {
    lift::second_order_canonical_lift(&op.inner, &weight(l0)?).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic"))]
fn proj_lift(op: &PyOperator, l0: &str) -> PyResult<PyOperator> {
    proj::proj_lift(&op.inner, &weight(l0)?).map(wrap).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", volume = "coordinate"))]
fn taylor_expand(op: &PyOperator, l0: &str, volume: &str) -> PyResult<Vec<PyOperator>> {
    let cs = lift::taylor_expand(&op.inner, &weight(l0)?, &self::volume(volume)?).map_err(err)?;
    Ok(cs.into_iter().map(wrap).collect())
}

/// Full symbol as text in xi (or xi1, …).
#[pyfunction]
#[pyo3(signature = (op, l = "symbolic"))]
fn full_symbol(op: &PyOperator, l: &str) -> PyResult<String> {
    Ok(proj::full_symbol(&op.inner, &weight(l)?).map_err(err)?.render())
}

#[pyfunction]
#[pyo3(signature = (symbol, dim = 1, l = "symbolic"))]
fn quantize(symbol: &str, dim: usize, l: &str) -> PyResult<PyOperator> {
    let p = syntax::parse_symbol(symbol, &SessionConfig::new(dim)).map_err(err)?;
    Ok(wrap(proj::quantize(&p, &weight(l)?)))
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic"))]
fn schwarzian(op: &PyOperator, l0: &str) -> PyResult<String> {
    Ok(proj::schwarzian_data(&op.inner, &weight(l0)?).map_err(err)?.render())
}

/// Cocycle law under a generic change of coordinate, plus invariance
/// under fractional linear ones.
#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic"))]
fn schwarzian_cocycle_check(op: &PyOperator, l0: &str) -> PyResult<bool> {
    let l0 = weight(l0)?;
    let generic = proj::schwarzian_cocycle_check(&op.inner, &l0, &DiffeoJet1D::generic()).map_err(err)?;
    let mobius = proj::schwarzian_cocycle_check(&op.inner, &l0, &DiffeoJet1D::mobius()).map_err(err)?;
    Ok(generic && mobius && DiffeoJet1D::mobius().schwarzian().is_zero())
}

#[pyfunction]
#[pyo3(signature = (op, l0 = "symbolic", volume = "generic"))]
fn check_adx_variation_identity(op: &PyOperator, l0: &str, volume: &str) -> PyResult<bool> {
    let h = LiftingHandle::Canonical { l0: weight(l0)?, rho: self::volume(volume)? };
    let x = generic_field("X", op.inner.dim());
    Ok(adx_variation_defect(&h, &op.inner, &x).map_err(err)?.is_zero())
}

/// Basis of the equivariant second-order maps, as rows (a1, a2, a3, b1, b2, c).
#[pyfunction]
#[pyo3(signature = (dim = 3))]
fn sdiff_kernel(dim: usize) -> PyResult<Vec<Vec<String>>> {
    let basis = sdiff_equivariant_maps(dim).map_err(err)?;
    Ok(basis.iter().map(|v| v.iter().map(Scalar::to_string).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (rank, dim, l0 = "symbolic", divergenceless = true))]
fn divfree_tensor_lift_check(rank: usize, dim: usize, l0: &str, divergenceless: bool) -> PyResult<bool> {
    tensor_check(rank, dim, &weight(l0)?, divergenceless).map_err(err)
}

#[pymodule]
fn denslift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(canonical_lift, m)?)?;
    m.add_function(wrap_pyfunction!(vol_lift, m)?)?;
    m.add_function(wrap_pyfunction!(distinguished_lift, m)?)?;
    m.add_function(wrap_pyfunction!(first_order_lift, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_lift, m)?)?;
    m.add_function(wrap_pyfunction!(proj_lift, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_expand, m)?)?;
    m.add_function(wrap_pyfunction!(full_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(schwarzian, m)?)?;
    m.add_function(wrap_pyfunction!(schwarzian_cocycle_check, m)?)?;
    m.add_function(wrap_pyfunction!(check_adx_variation_identity, m)?)?;
    m.add_function(wrap_pyfunction!(sdiff_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(divfree_tensor_lift_check, m)?)?;
    Ok(())
}
