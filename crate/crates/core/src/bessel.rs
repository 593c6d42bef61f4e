//! Integer-order Bessel functions of the first kind, J_n(z) for real z >= 0,
//! evaluated for a whole range of orders at once by Miller's backward
//! recurrence.

/// Orders are cut where J_N(z)^2 drops below this.
pub const TRUNCATION_EPS: f64 = 1e-16;
pub const MIN_ORDER: usize = 8;
pub const MAX_ORDER: usize = 512;

/// J_0(z) .. J_n(z), with negative orders reachable through `get`.
#[derive(Debug, Clone)]
pub struct BesselTable {
    z: f64,
    values: Vec<f64>,
}

impl BesselTable {
    /// Table of J_0(z) .. J_{n_max}(z).
    pub fn new(z: f64, n_max: usize) -> Self {
        assert!(
            z >= 0.0 && z.is_finite(),
            "bessel argument must be finite and >= 0"
        );
        BesselTable {
            z,
            values: miller(z, n_max),
        }
    }

    /// Table sized by `truncation_order(z)` plus `extra` orders.
    pub fn adaptive(z: f64, extra: usize) -> (Self, usize) {
        let n = truncation_order(z);
        (Self::new(z, n + extra), n)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// J_n(z) for any integer n within the table, using J_{-n} = (-1)^n J_n.
    pub fn get(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        let v = self.values.get(k).copied().unwrap_or(0.0);
        if n < 0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Smallest order N >= max(MIN_ORDER, ceil(z)) with J_N(z)^2 < TRUNCATION_EPS,
/// capped at MAX_ORDER.
///
/// Orders below z sit in the oscillatory region where J_N can vanish by
/// accident, so the search starts at ceil(z).
pub fn truncation_order(z: f64) -> usize {
    let start = (z.ceil() as usize).clamp(MIN_ORDER, MAX_ORDER);
    let table = miller(z, MAX_ORDER);
    (start..=MAX_ORDER)
        .find(|&n| table[n] * table[n] < TRUNCATION_EPS)
        .unwrap_or(MAX_ORDER)
}

pub fn bessel_j(n: i64, z: f64) -> f64 {
    BesselTable::new(z, n.unsigned_abs() as usize).get(n)
}

fn miller(z: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // Start well above both the requested order and the turning point z.
    let top = n_max.max(z.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let two_over_z = 2.0 / z;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let j_prev = k as f64 * two_over_z * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        let idx = k - 1;
        if idx <= n_max {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            let s = 1e-250;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
