use pyo3::prelude::*;

#[pymodule]
fn cxmart_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
