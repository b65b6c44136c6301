//! Small helpers for 2x2 integer matrices.

pub type IMat2 = [[i64; 2]; 2];

pub const IDENTITY: IMat2 = [[1, 0], [0, 1]];

pub fn mul(a: &IMat2, b: &IMat2) -> IMat2 {
    let mut r = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0]
                .checked_mul(b[0][j])
                .and_then(|x| a[i][1].checked_mul(b[1][j]).and_then(|y| x.checked_add(y)))
                .expect("integer matrix product overflowed i64");
        }
    }
    r
}

pub fn det(a: &IMat2) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn transpose(a: &IMat2) -> IMat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn scalar(k: i64) -> IMat2 {
    [[k, 0], [0, k]]
}

pub fn add(a: &IMat2, b: &IMat2) -> IMat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

/// Inverse of a unimodular matrix; `None` when `|det| != 1`.
pub fn inverse_unimodular(a: &IMat2) -> Option<IMat2> {
    let d = det(a);
    if d != 1 && d != -1 {
        return None;
    }
    Some([[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]])
}

/// `a^k` for `k >= 0`; negative powers need a unimodular matrix.
pub fn pow(a: &IMat2, k: i64) -> Option<IMat2> {
    let base = if k < 0 { inverse_unimodular(a)? } else { *a };
    let mut e = k.unsigned_abs();
    let mut acc = IDENTITY;
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = mul(&sq, &sq);
        }
    }
    Some(acc)
}

pub fn apply(a: &IMat2, v: (i64, i64)) -> (i64, i64) {
    (a[0][0] * v.0 + a[0][1] * v.1, a[1][0] * v.0 + a[1][1] * v.1)
}
