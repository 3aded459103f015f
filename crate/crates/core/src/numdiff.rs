//! Finite-difference derivatives.

/// Ridders' extrapolation of central differences.
///
/// Returns the derivative estimate and an error estimate, both componentwise
/// maxima taken over the tableau column that minimised the error.
pub fn ridders<const N: usize, E>(
    mut f: impl FnMut(f64) -> Result<[f64; N], E>,
    x: f64,
    h0: f64,
) -> Result<([f64; N], f64), E> {
    const SHRINK: f64 = 1.4;
    const SHRINK2: f64 = SHRINK * SHRINK;
    const LEVELS: usize = 10;

    let mut diff = |h: f64| -> Result<[f64; N], E> {
        let p = f(x + h)?;
        let m = f(x - h)?;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (p[i] - m[i]) / (2.0 * h);
        }
        Ok(d)
    };

    let mut table = vec![[[0.0; N]; LEVELS]; LEVELS];
    let mut h = h0;
    table[0][0] = diff(h)?;
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..LEVELS {
        h /= SHRINK;
        table[0][i] = diff(h)?;
        let mut fac = SHRINK2;
        for j in 1..=i {
            let mut next = [0.0; N];
            for k in 0..N {
                next[k] = (table[j - 1][i][k] * fac - table[j - 1][i - 1][k]) / (fac - 1.0);
            }
            table[j][i] = next;
            fac *= SHRINK2;
            let e = (0..N)
                .map(|k| {
                    (next[k] - table[j - 1][i][k])
                        .abs()
                        .max((next[k] - table[j - 1][i - 1][k]).abs())
                })
                .fold(0.0, f64::max);
            if e <= err {
                err = e;
                best = next;
            }
        }
        let drift = (0..N)
            .map(|k| (table[i][i][k] - table[i - 1][i - 1][k]).abs())
            .fold(0.0, f64::max);
        if drift >= 2.0 * err {
            break;
        }
    }
    Ok((best, err))
}

/// [`ridders`] from a first step `h0`, quartering it while `f` fails
/// somewhere on the stencil, at most ten times.
pub fn ridders_shrinking<const N: usize, E>(
    mut f: impl FnMut(f64) -> Result<[f64; N], E>,
    x: f64,
    h0: f64,
) -> Result<[f64; N], E> {
    let mut h = h0;
    for _ in 0..10 {
        match ridders(&mut f, x, h) {
            Ok((d, _)) => return Ok(d),
            Err(_) => h /= 4.0,
        }
    }
    ridders(&mut f, x, h).map(|(d, _)| d)
}

/// Scalar convenience wrapper over [`ridders`].
pub fn ridders_scalar(mut f: impl FnMut(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    let (d, e) = ridders::<1, std::convert::Infallible>(|t| Ok([f(t)]), x, h0)
        .unwrap_or_else(|e| match e {});
    (d[0], e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridders_is_accurate() {
        let (d, err) = ridders_scalar(|x| x.exp() * x.cos(), 1.0, 0.1);
        let exact = 1f64.exp() * (1f64.cos() - 1f64.sin());
        assert!((d - exact).abs() < 1e-12, "{d} vs {exact}");
        assert!(err < 1e-10);
    }
}
