//! Simultaneous approximation by orbit points `u_i·z_i^m`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::fixed::{arc_threshold, ArcThreshold, ThresholdError};
use super::{certify, Angle, TorusError};
use crate::exec::Exec;

/// Ceiling on `grid^k` for the covering search.
pub const MAX_CELLS: u64 = 1 << 24;

impl From<ThresholdError> for TorusError {
    fn from(e: ThresholdError) -> Self {
        match e {
            ThresholdError::InvalidEpsilon => TorusError::InvalidEpsilon,
            // The fixed-point routines escalate internally; this only fires for
            // ε within ~2^-256 of a chord value.
            ThresholdError::Indeterminate => TorusError::Indeterminate { precision: 0 },
        }
    }
}

fn common_precision(lists: &[&[Angle]]) -> Result<u32, TorusError> {
    let mut p = None;
    for a in lists.iter().flat_map(|l| l.iter()) {
        match p {
            None => p = Some(a.precision()),
            Some(q) if q != a.precision() => return Err(TorusError::PrecisionMismatch(q, a.precision())),
            _ => {}
        }
    }
    Ok(p.unwrap_or(super::DEFAULT_PRECISION))
}

/// Circular distance to the nearest integer over `[lo, hi]·2^-p`, as
/// numerators `(d_lo, d_hi)`, with `lo ∈ [0, 2^p)`.
fn circular_distance(lo: &BigInt, hi: &BigInt, p: u32) -> (BigInt, BigInt) {
    let one = BigInt::one() << p;
    let half = BigInt::one() << (p - 1);
    if hi - lo >= one {
        return (BigInt::zero(), half);
    }
    let tri = |x: &BigInt| {
        let r = x.mod_floor(&one);
        let s = &one - &r;
        r.min(s)
    };
    let contains_integer = lo.is_zero() || *hi >= one;
    let contains_half = (lo <= &half && hi >= &half) || *hi >= &one + &half;
    let (a, b) = (tri(lo), tri(hi));
    let d_lo = if contains_integer {
        BigInt::zero()
    } else {
        a.clone().min(b.clone())
    };
    let d_hi = if contains_half { half } else { a.max(b) };
    (d_lo, d_hi)
}

/// `Some(true)` inside, `Some(false)` outside, `None` undecided.
fn classify_m(u: &[Angle], v: &[Angle], z: &[Angle], m: u64, threshold: &ArcThreshold, p: u32) -> Option<bool> {
    let mb = BigInt::from(m);
    let mut all_inside = true;
    for ((u, v), z) in u.iter().zip(v).zip(z) {
        let x = u.add(&z.mul_int(&mb)).ok()?.sub(v).ok()?;
        let (d_lo, d_hi) = circular_distance(x.lo(), x.hi(), p);
        match threshold.classify(&d_lo, &d_hi) {
            Some(true) => {}
            Some(false) => return Some(false),
            None => all_inside = false,
        }
    }
    if all_inside {
        Some(true)
    } else {
        None
    }
}

/// Least `m < search_cap` with `|u_i·z_i^m − v_i| < ε` for every `i` under
/// the chordal metric, or `None` if the cap is reached. A returned `m` has
/// been re-checked through the independent rational route.
pub fn kronecker_m(
    u: &[Angle],
    v: &[Angle],
    z: &[Angle],
    epsilon: f64,
    search_cap: u64,
    exec: Exec,
) -> Result<Option<u64>, TorusError> {
    if u.len() != v.len() || u.len() != z.len() {
        return Err(TorusError::LengthMismatch);
    }
    let p = common_precision(&[u, v, z])?;
    let threshold = arc_threshold(epsilon, p)?;
    let hit = exec.find_first(0..search_cap, |m| match classify_m(u, v, z, m, &threshold, p) {
        Some(false) => None,
        Some(true) => Some(true),
        None => Some(false),
    });
    match hit {
        None => Ok(None),
        Some((_, false)) => Err(TorusError::Indeterminate { precision: p }),
        Some((m, true)) => {
            if certify::certify_within(u, v, z, m, epsilon) {
                Ok(Some(m))
            } else {
                Err(TorusError::CertificationFailed { m })
            }
        }
    }
}

/// [`kronecker_m`] with inputs rebuilt at doubling precision whenever a
/// comparison is undecided, up to `max_precision` bits.
pub fn kronecker_m_escalating<F>(
    build: F,
    epsilon: f64,
    search_cap: u64,
    start_precision: u32,
    max_precision: u32,
    exec: Exec,
) -> Result<(Option<u64>, u32), TorusError>
where
    F: Fn(u32) -> (Vec<Angle>, Vec<Angle>, Vec<Angle>),
{
    let mut p = start_precision;
    loop {
        let (u, v, z) = build(p);
        match kronecker_m(&u, &v, &z, epsilon, search_cap, exec) {
            Err(TorusError::Indeterminate { .. }) if p < max_precision => {
                p = (2 * p).min(max_precision);
            }
            other => return other.map(|m| (m, p)),
        }
    }
}

/// A covering of `𝕋^k` by `grid^k` half-open dyadic cells, each paired with
/// an orbit index whose point certainly lies in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringCertificate {
    pub grid_bits: u32,
    /// Row-major over cells, first coordinate slowest.
    pub hits: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KroneckerBound {
    /// Every `(u, v)` admits some `m < n` within `ε`.
    pub n: u64,
    pub certificate: Option<CoveringCertificate>,
}

impl KroneckerBound {
    /// Re-checks the certificate through the rational route: the cell width
    /// has chord below `ε`, every cell is hit by the recorded index, and `n`
    /// exceeds every recorded index.
    pub fn verify(&self, z: &[Angle], epsilon: f64) -> bool {
        let Some(cert) = &self.certificate else {
            return self.n >= 1 && epsilon > 2.0;
        };
        let k = z.len() as u32;
        let grid = 1u64 << cert.grid_bits;
        let Some(cells) = grid.checked_pow(k) else { return false };
        if cert.hits.len() as u64 != cells {
            return false;
        }
        let width = num_rational::BigRational::new(BigInt::one(), BigInt::one() << cert.grid_bits);
        let bits = 2 * z.iter().map(Angle::precision).max().unwrap_or(64) + 64;
        // Points sharing a cell are closer than its width; at width 1/2 that
        // already means a chord below 2.
        if !(epsilon >= 2.0 || certify::chord_below(&width, epsilon, bits)) {
            return false;
        }
        let mut max_hit = 0;
        for (index, &m) in cert.hits.iter().enumerate() {
            let mut rest = index as u64;
            for zi in z.iter().rev() {
                if certify::grid_cell(zi, m, cert.grid_bits) != Some(rest % grid) {
                    return false;
                }
                rest /= grid;
            }
            max_hit = max_hit.max(m);
        }
        self.n == max_hit + 1
    }
}

/// An `n` such that for all `u, v ∈ 𝕋^k` some `m < n` puts `u·z^m` within
/// `ε` of `v`. The orbit `m·z` is scanned until it has a certain point in
/// every cell of a dyadic grid whose cells have diameter below `ε`; the
/// translate `v − u` shares a cell with one of those points. Grids for larger
/// `ε` coarsen the ones for smaller `ε`, so `n` never grows with `ε`.
pub fn kronecker_bound(z: &[Angle], epsilon: f64, search_cap: u64) -> Result<KroneckerBound, TorusError> {
    let p = common_precision(&[z])?;
    let threshold = arc_threshold(epsilon, p)?;
    let tau_lo = match threshold {
        ArcThreshold::Everything => {
            return Ok(KroneckerBound {
                n: 1,
                certificate: None,
            })
        }
        ArcThreshold::Bracket { lo, .. } => lo,
    };
    if tau_lo.is_zero() {
        return Err(TorusError::Indeterminate { precision: p });
    }
    // Least j with 2^-j ≤ τ_lo·2^-p, i.e. 2^(p-j) ≤ τ_lo.
    let grid_bits = p - (tau_lo.bits() as u32 - 1);
    let k = z.len() as u32;
    let cells = 1u64
        .checked_shl(grid_bits)
        .and_then(|g| g.checked_pow(k))
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| TorusError::CapExceeded {
            cap: MAX_CELLS,
            detail: format!("grid 2^{grid_bits} in {k} dimensions"),
        })?;
    let shift = p - grid_bits;
    let grid = BigInt::one() << grid_bits;
    let mut hits: Vec<Option<u64>> = vec![None; cells as usize];
    let mut uncovered = cells;
    let mut point: Vec<Angle> = z.iter().map(|a| Angle::identity(a.precision())).collect();
    for m in 0..search_cap {
        let index = point.iter().try_fold(0u64, |acc, a| {
            let c = a.lo() >> shift;
            let upper = a.hi() >> shift;
            (c == upper && c < grid).then(|| acc * (1u64 << grid_bits) + c.to_u64().unwrap_or(0))
        });
        if let Some(i) = index {
            let slot = &mut hits[i as usize];
            if slot.is_none() {
                *slot = Some(m);
                uncovered -= 1;
                if uncovered == 0 {
                    return Ok(KroneckerBound {
                        n: m + 1,
                        certificate: Some(CoveringCertificate {
                            grid_bits,
                            hits: hits.into_iter().map(|h| h.unwrap_or(0)).collect(),
                        }),
                    });
                }
            }
        }
        for (a, zi) in point.iter_mut().zip(z) {
            *a = a.add(zi)?;
        }
    }
    Err(TorusError::CapExceeded {
        cap: search_cap,
        detail: format!("{uncovered} of {cells} cells unhit"),
    })
}
