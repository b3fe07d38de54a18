//! Sign bookkeeping for wedge products of sorted index tuples.

/// `e_a ∧ e_b` for sorted tuples `a`, `b`: `None` if they share an index,
/// otherwise the sign and the sorted union.
pub fn merge(a: &[usize], b: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((if inversions.is_multiple_of(2) { 1 } else { -1 }, out))
}

/// Sorts an arbitrary index list: `None` on a repeat, otherwise the sign of
/// the sorting permutation and the sorted tuple.
pub fn sort_signed(idx: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

/// The tuple with position `p` removed.
pub fn without(idx: &[usize], p: usize) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.remove(p);
    v
}

pub fn sign_pow(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}
