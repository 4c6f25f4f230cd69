//! Row-major index arithmetic shared by factors, elimination and oracles.

/// Largest dense table any algorithm in the crate will allocate.
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;

pub(crate) fn row_major_strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

/// Product of cardinalities, `None` on overflow.
pub(crate) fn checked_size(cards: &[usize]) -> Option<usize> {
    cards.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c))
}

/// For every assignment of `outer` in row-major order, the row-major index of
/// its restriction to `inner`. Every element of `inner` must occur in `outer`.
pub(crate) fn projection_map<T: PartialEq>(
    outer: &[T],
    outer_cards: &[usize],
    inner: &[T],
    inner_cards: &[usize],
) -> Vec<usize> {
    let inner_strides = row_major_strides(inner_cards);
    let steps: Vec<usize> = outer
        .iter()
        .map(|v| {
            inner
                .iter()
                .position(|u| u == v)
                .map_or(0, |p| inner_strides[p])
        })
        .collect();
    debug_assert!(inner.iter().all(|u| outer.contains(u)));
    let size: usize = outer_cards.iter().product();
    let mut out = Vec::with_capacity(size);
    let mut counter = vec![0usize; outer.len()];
    let mut cur = 0usize;
    for _ in 0..size {
        out.push(cur);
        let mut k = outer.len();
        while k > 0 {
            k -= 1;
            counter[k] += 1;
            cur += steps[k];
            if counter[k] < outer_cards[k] {
                break;
            }
            cur -= steps[k] * outer_cards[k];
            counter[k] = 0;
        }
    }
    out
}

/// Decodes a row-major index into per-axis states.
pub(crate) fn unravel(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for k in (0..cards.len()).rev() {
        out[k] = index % cards[k];
        index /= cards[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_are_row_major() {
        assert_eq!(row_major_strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(row_major_strides(&[]), Vec::<usize>::new());
    }

    #[test]
    fn projection_drops_and_permutes_axes() {
        // outer (a, b, c) with cards (2, 3, 2); inner (c, a)
        let map = projection_map(&['a', 'b', 'c'], &[2, 3, 2], &['c', 'a'], &[2, 2]);
        let mut st = [0; 3];
        for (i, &j) in map.iter().enumerate() {
            unravel(i, &[2, 3, 2], &mut st);
            assert_eq!(j, st[2] * 2 + st[0]);
        }
    }

    #[test]
    fn checked_size_overflow() {
        assert_eq!(checked_size(&[usize::MAX, 2]), None);
        assert_eq!(checked_size(&[]), Some(1));
    }
}
