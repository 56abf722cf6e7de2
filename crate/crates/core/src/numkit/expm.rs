use num_traits::Float;

use super::{identity, CMatrix};
use crate::error::{bail, Result};

// Numerator coefficients of the [13/13] Padé approximant of exp.
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

// Largest 1-norm for which the [13/13] approximant meets unit roundoff backward error.
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &CMatrix) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around the degree-13 Padé approximant.
pub fn mat_exp(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        bail!(Dimension, "mat_exp needs a square matrix, got {}x{}", a.nrows(), a.ncols());
    }
    let n = a.nrows();
    if !super::is_finite(a) {
        bail!(Validation, "mat_exp input has non-finite entries");
    }
    let nrm = norm1(a);
    let squarings = if nrm > THETA13 { Float::ceil(Float::log2(nrm / THETA13)) as i32 } else { 0 };
    let a = a.scale(Float::powi(2.0, -squarings));

    let b = &PADE13;
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]));
    let u = &a * (inner_u + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + id.scale(b[1]));
    let inner_v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]));
    let v = inner_v + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + id.scale(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let Some(mut r) = q.lu().solve(&p) else {
        bail!(Numerical, "Padé denominator is singular");
    };
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
