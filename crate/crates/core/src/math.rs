pub const LN_10: f64 = core::f64::consts::LN_10;

/// `ln(exp(a) + exp(b))` without overflow. Either side may be `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}
