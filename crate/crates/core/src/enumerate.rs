//! Small enumeration helpers used by problem modules and oracles.

/// Advance `items` to its lexicographic successor. Returns false when `items`
/// was the last permutation. Starting from sorted input this visits every
/// distinct multiset permutation exactly once.
pub fn next_permutation<T: Ord>(items: &mut [T]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut pivot = items.len() - 1;
    while pivot > 0 && items[pivot - 1] >= items[pivot] {
        pivot -= 1;
    }
    if pivot == 0 {
        return false;
    }
    let mut swap = items.len() - 1;
    while items[swap] <= items[pivot - 1] {
        swap -= 1;
    }
    items.swap(pivot - 1, swap);
    items[pivot..].reverse();
    true
}

/// All distinct permutations of `items`, in lexicographic order.
pub fn multiset_permutations<T: Ord + Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> {
    let mut state: Vec<T> = items.to_vec();
    state.sort();
    let mut pending = Some(state);
    std::iter::from_fn(move || {
        let current = pending.take()?;
        let mut next = current.clone();
        if next_permutation(&mut next) {
            pending = Some(next);
        }
        Some(current)
    })
}

/// Lazy row-major Cartesian product over repeatable sequences; the first
/// factor varies slowest. One element per factor is live at a time.
pub fn lazy_product<T, F>(factories: Vec<F>) -> impl Iterator<Item = Vec<T>>
where
    T: Clone,
    F: Fn() -> Box<dyn Iterator<Item = T>>,
{
    let mut iters: Vec<Box<dyn Iterator<Item = T>>> = Vec::new();
    let mut current: Vec<T> = Vec::new();
    let mut primed = false;
    let mut done = factories.is_empty();
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        if !primed {
            primed = true;
            for factory in &factories {
                let mut iter = factory();
                match iter.next() {
                    Some(value) => {
                        current.push(value);
                        iters.push(iter);
                    }
                    None => {
                        done = true;
                        return None;
                    }
                }
            }
            return Some(current.clone());
        }
        for pos in (0..factories.len()).rev() {
            if let Some(value) = iters[pos].next() {
                current[pos] = value;
                return Some(current.clone());
            }
            let mut fresh = (factories[pos])();
            current[pos] = fresh.next().expect("factor was non-empty when primed");
            iters[pos] = fresh;
        }
        done = true;
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_of_distinct_items() {
        let perms: Vec<Vec<u8>> = multiset_permutations(&[1u8, 2, 3]).collect();
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], vec![1, 2, 3]);
        assert_eq!(perms[5], vec![3, 2, 1]);
    }

    #[test]
    fn permutations_of_a_multiset_are_distinct() {
        let perms: Vec<Vec<u8>> = multiset_permutations(&[1u8, 1, 2]).collect();
        assert_eq!(perms, vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
    }

    #[test]
    fn singleton_and_empty_inputs() {
        assert_eq!(multiset_permutations(&[7u8]).count(), 1);
        assert_eq!(multiset_permutations(&[] as &[u8]).count(), 1);
    }

    #[test]
    fn product_is_row_major() {
        let factories: Vec<Box<dyn Fn() -> Box<dyn Iterator<Item = u8>>>> = vec![
            Box::new(|| Box::new([0u8, 1].into_iter())),
            Box::new(|| Box::new([0u8, 1, 2].into_iter())),
        ];
        let rows: Vec<Vec<u8>> = lazy_product(factories).collect();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], vec![0, 0]);
        assert_eq!(rows[2], vec![0, 2]);
        assert_eq!(rows[3], vec![1, 0]);
    }
}
