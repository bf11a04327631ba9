//! Bit-level helpers for occupation-number basis states (spin orbital `k` is
//! bit `k`; spatial orbital `p` maps to `2p` for alpha and `2p + 1` for beta).

#[inline]
pub fn alpha(p: usize) -> usize {
    2 * p
}

#[inline]
pub fn beta(p: usize) -> usize {
    2 * p + 1
}

/// Jordan-Wigner sign `(-1)^(number of occupied modes below k)`.
#[inline]
pub fn sign_below(state: u64, k: usize) -> f64 {
    let mask = (1u64 << k) - 1;
    if (state & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies `a_k`; `None` when mode `k` is empty.
#[inline]
pub fn annihilate(state: u64, k: usize) -> Option<(u64, f64)> {
    if state >> k & 1 == 1 {
        Some((state ^ (1 << k), sign_below(state, k)))
    } else {
        None
    }
}

/// Applies `a†_k`; `None` when mode `k` is occupied.
#[inline]
pub fn create(state: u64, k: usize) -> Option<(u64, f64)> {
    if state >> k & 1 == 0 {
        Some((state ^ (1 << k), sign_below(state, k)))
    } else {
        None
    }
}

/// Applies a string of ladder operators, rightmost first.
pub fn apply_ladder(state: u64, ops: &[(usize, bool)]) -> Option<(u64, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(k, dagger) in ops.iter().rev() {
        let (t, f) = if dagger { create(s, k)? } else { annihilate(s, k)? };
        s = t;
        sign *= f;
    }
    Some((s, sign))
}

/// Parity encoding: bit `j` holds the parity of modes `0..=j`.
pub fn parity_encode(occ: u64, n_modes: usize) -> u64 {
    let mut out = 0u64;
    let mut acc = 0u64;
    for j in 0..n_modes {
        acc ^= occ >> j & 1;
        out |= acc << j;
    }
    out
}

pub fn parity_decode(enc: u64, n_modes: usize) -> u64 {
    let m = if n_modes >= 64 { !0 } else { (1u64 << n_modes) - 1 };
    (enc ^ (enc << 1)) & m
}

/// Bitstring with the listed modes set.
pub fn occupation_mask(modes: &[usize]) -> u64 {
    modes.iter().fold(0, |m, &k| m | 1 << k)
}

/// All `n`-bit strings with `k` bits set, ascending.
pub fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(0);
        return out;
    }
    let mut x: u64 = (1 << k) - 1;
    let limit = 1u64 << n;
    while x < limit {
        out.push(x);
        // Gosper's hack
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Interleaves alpha and beta spatial strings into a spin-orbital string.
pub fn interleave(a: u64, b: u64, n_spatial: usize) -> u64 {
    let mut out = 0;
    for p in 0..n_spatial {
        out |= (a >> p & 1) << alpha(p);
        out |= (b >> p & 1) << beta(p);
    }
    out
}

/// Splits a spin-orbital string into alpha and beta spatial strings.
pub fn deinterleave(s: u64, n_spatial: usize) -> (u64, u64) {
    let mut a = 0;
    let mut b = 0;
    for p in 0..n_spatial {
        a |= (s >> alpha(p) & 1) << p;
        b |= (s >> beta(p) & 1) << p;
    }
    (a, b)
}
