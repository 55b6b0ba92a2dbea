use crate::linalg::{C64, ZERO};

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// `‖b − A x‖₂ / ‖b‖₂` recomputed from the returned `x`.
    pub relative_residual: f64,
    pub converged: bool,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Restarted GMRES with optional right preconditioning.
///
/// `x ↦ out` operator callback.
pub type LinearMap<'a> = dyn Fn(&[C64], &mut [C64]) + 'a;

/// `apply(x, out)` writes `A x`; `precond(x, out)` writes `M⁻¹ x`. Iterates
/// until the relative residual drops below `tol` or `max_iter` Arnoldi steps
/// have been taken.
pub fn gmres(
    apply: &LinearMap<'_>,
    precond: Option<&LinearMap<'_>>,
    b: &[C64],
    x0: Option<&[C64]>,
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> GmresOutcome {
    let n = b.len();
    let restart = restart.max(1);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![ZERO; n]);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut tmp = vec![ZERO; n];
    let mut z = vec![ZERO; n];
    let mut r = vec![ZERO; n];
    let mut iterations = 0;

    let residual = |x: &[C64], r: &mut [C64], tmp: &mut [C64]| {
        apply(x, tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
        norm(r)
    };

    let mut rnorm = residual(&x, &mut r, &mut tmp);
    while rnorm / bnorm > tol && iterations < max_iter {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / rnorm).collect());
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![ZERO; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(rnorm, 0.0);
        let mut k = 0;
        while k < restart && iterations < max_iter {
            match precond {
                Some(p) => {
                    p(&basis[k], &mut z);
                    apply(&z, &mut tmp);
                }
                None => apply(&basis[k], &mut tmp),
            }
            let mut w = tmp.clone();
            // modified Gram-Schmidt, twice
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dotc(v, &w);
                    h[i][k] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = C64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = ZERO;
            } else {
                cs[k] = a / denom;
                sn[k] = bb / denom;
            }
            h[k][k] = cs[k].conj() * a + sn[k].conj() * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            iterations += 1;
            k += 1;
            if g[k].norm() / bnorm <= tol * 0.5 || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k×k triangle
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![ZERO; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        match precond {
            Some(p) => {
                p(&update, &mut z);
                axpy(C64::new(1.0, 0.0), &z, &mut x);
            }
            None => axpy(C64::new(1.0, 0.0), &update, &mut x),
        }
        let previous = rnorm;
        rnorm = residual(&x, &mut r, &mut tmp);
        if !rnorm.is_finite() || (rnorm >= previous && k < restart) {
            break;
        }
    }
    let relative_residual = rnorm / bnorm;
    GmresOutcome {
        x,
        iterations,
        relative_residual,
        converged: relative_residual <= tol,
    }
}
