//! Matrix exponential and principal logarithm.

use super::mat::Mat;
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `exp(x)` by scaling and squaring with the degree-13 Padé approximant.
pub fn mat_exp(x: &Mat) -> Mat {
    let d = x.dim();
    let norm = x.norm1();
    if norm == 0.0 {
        return Mat::identity(d);
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = x.scale(0.5f64.powi(s));
    let id = Mat::identity(d);
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let b = &PADE13;

    let u_inner = a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = a * u_inner;
    let v = a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);

    // (V - U) is well conditioned for ‖a‖₁ ≤ θ₁₃.
    let p = v + u;
    let q = v - u;
    let mut r = match q.inverse() {
        Ok(qi) => qi * p,
        Err(_) => taylor_exp(&a),
    };
    for _ in 0..s {
        r = r * r;
    }
    r
}

fn taylor_exp(a: &Mat) -> Mat {
    let d = a.dim();
    let mut term = Mat::identity(d);
    let mut acc = Mat::identity(d);
    for k in 1..40 {
        term = (term * *a).scale(1.0 / k as f64);
        acc = acc + term;
    }
    acc
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Fails when the spectrum touches the closed negative real axis (no real
/// principal logarithm) or the square-root iteration does not converge.
pub fn mat_log(a: &Mat) -> Result<Mat> {
    let d = a.dim();
    for z in a.eigenvalues() {
        if z.im.abs() < 1e-12 && z.re <= 0.0 {
            return Err(Error::Domain(format!(
                "no real principal logarithm: eigenvalue {} on the closed negative axis",
                z.re
            )));
        }
    }
    let id = Mat::identity(d);
    let mut y = *a;
    let mut squarings = 0;
    while (y - id).norm1() > 0.25 {
        y = sqrtm_denman_beavers(&y)?;
        squarings += 1;
        if squarings > 60 {
            return Err(Error::Numerical("matrix logarithm: too many square roots".into()));
        }
    }
    let e = y - id;
    let mut power = e;
    let mut acc = Mat::zeros(d);
    for k in 1..60 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc = acc + power.scale(sign / k as f64);
        power = power * e;
        if power.norm1() < 1e-18 {
            break;
        }
    }
    Ok(acc.scale(2f64.powi(squarings)))
}

fn sqrtm_denman_beavers(a: &Mat) -> Result<Mat> {
    let mut y = *a;
    let mut z = Mat::identity(a.dim());
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let y_next = (y + zi).scale(0.5);
        let z_next = (z + yi).scale(0.5);
        let delta = (y_next - y).norm1() / y_next.norm1().max(1e-300);
        y = y_next;
        z = z_next;
        if delta < 1e-15 {
            return Ok(y);
        }
    }
    Ok(y)
}
