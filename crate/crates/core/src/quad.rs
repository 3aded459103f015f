//! Adaptive Simpson quadrature and cubic Hermite interpolation.

/// Cubic Hermite interpolant on `[t0, t1]` through `(y0, d0)` and `(y1, d1)`.
pub fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    d0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    d1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    }
    out
}

/// Derivative of [`hermite`] at `t`.
pub fn hermite_derivative<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    d0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    d1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let g00 = (6.0 * s2 - 6.0 * s) / h;
    let g10 = 3.0 * s2 - 4.0 * s + 1.0;
    let g01 = (-6.0 * s2 + 6.0 * s) / h;
    let g11 = 3.0 * s2 - 2.0 * s;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = g00 * y0[i] + g10 * d0[i] + g01 * y1[i] + g11 * d1[i];
    }
    out
}

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre5<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<f64, E> {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    for (x, w) in X.iter().zip(W) {
        sum += w * f(m + r * x)?;
    }
    Ok(r * sum)
}

/// Adaptive Simpson integration of a vector integrand to absolute
/// tolerance `tol` (componentwise maximum).
pub fn adaptive_simpson<const N: usize, E>(
    mut f: impl FnMut(f64) -> Result<[f64; N], E>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<[f64; N], E> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, &fa, &fm, &fb);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, 40)
}

fn simpson<const N: usize>(
    a: f64,
    b: f64,
    fa: &[f64; N],
    fm: &[f64; N],
    fb: &[f64; N],
) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn recurse<const N: usize, E>(
    f: &mut impl FnMut(f64) -> Result<[f64; N], E>,
    a: f64,
    b: f64,
    fa: [f64; N],
    fm: [f64; N],
    fb: [f64; N],
    whole: [f64; N],
    tol: f64,
    depth: u32,
) -> Result<[f64; N], E> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, &fa, &flm, &fm);
    let right = simpson(m, b, &fm, &frm, &fb);
    let mut delta: f64 = 0.0;
    let mut out = [0.0; N];
    for i in 0..N {
        let d = left[i] + right[i] - whole[i];
        delta = delta.max(d.abs());
        out[i] = left[i] + right[i] + d / 15.0;
    }
    if depth == 0 || delta <= 15.0 * tol {
        return Ok(out);
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    let mut sum = [0.0; N];
    for i in 0..N {
        sum[i] = l[i] + r[i];
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_nine() {
        let v = gauss_legendre5(|x| Ok::<_, ()>(x.powi(9) + 3.0 * x.powi(8)), 0.0, 2.0).unwrap();
        assert!((v - (1024.0 / 10.0 + 3.0 * 512.0 / 9.0)).abs() < 1e-11);
    }

    #[test]
    fn simpson_integrates_sine() {
        let r =
            adaptive_simpson::<1, ()>(|x| Ok([x.sin()]), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| [t * t * t - 2.0 * t];
        let d = |t: f64| [3.0 * t * t - 2.0];
        let (a, b) = (0.5, 2.0);
        for t in [0.6, 1.0, 1.7] {
            let y = hermite(a, &f(a), &d(a), b, &f(b), &d(b), t);
            assert!((y[0] - f(t)[0]).abs() < 1e-14);
            let dy = hermite_derivative(a, &f(a), &d(a), b, &f(b), &d(b), t);
            assert!((dy[0] - d(t)[0]).abs() < 1e-13);
        }
    }
}
