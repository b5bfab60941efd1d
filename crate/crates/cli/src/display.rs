use fractal_copula::{to_f64, Rational};

/// Exact value followed by a decimal approximation.
pub fn exact(x: &Rational) -> String {
    format!("{x} ({})", decimal(x))
}

pub fn decimal(x: &Rational) -> String {
    let v = to_f64(x);
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

/// 1-based index set, e.g. `{1, 3}`.
pub fn index_set(indices: &[usize]) -> String {
    let items: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
