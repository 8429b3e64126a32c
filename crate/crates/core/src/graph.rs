//! Dense bitset storage for undirected graphs and the memory matrix, plus
//! level-synchronous breadth-first search over bitset rows.

/// Distance marker for agents that cannot be reached.
pub const UNREACHABLE: u32 = u32::MAX;

/// Square 0/1 matrix stored row-major as packed `u64` words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    pub fn ones(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] &= !(1 << (j % 64));
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Raw words, suitable as a hash key for state-revisit detection.
    pub fn as_words(&self) -> &[u64] {
        &self.bits
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `true` when every set bit of `other` is also set here.
    pub fn contains(&self, other: &BitMatrix) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| b & !a == 0)
    }
}

/// Iterate the set bit positions of a row.
pub(crate) fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let b = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(w * 64 + b)
        })
    })
}

/// Reusable buffers for bitset BFS.
#[derive(Clone, Debug)]
pub struct BfsScratch {
    frontier: Vec<u64>,
    next: Vec<u64>,
    visited: Vec<u64>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BfsScratch { frontier: vec![0; words], next: vec![0; words], visited: vec![0; words] }
    }
}

/// Hop distances from `src`, written into `out` (length n). The optional
/// `skip` edge is treated as absent, which lets callers evaluate `g - ij`
/// without mutating the adjacency.
pub fn bfs(
    adj: &BitMatrix,
    src: usize,
    skip: Option<(usize, usize)>,
    scratch: &mut BfsScratch,
    out: &mut [u32],
) {
    let words = adj.words_per_row();
    out.fill(UNREACHABLE);
    out[src] = 0;
    let BfsScratch { frontier, next, visited } = scratch;
    frontier.fill(0);
    visited.fill(0);
    frontier[src / 64] |= 1 << (src % 64);
    visited[src / 64] |= 1 << (src % 64);

    let mut level = 0u32;
    loop {
        next.fill(0);
        for w in 0..words {
            let mut word = frontier[w];
            while word != 0 {
                let v = w * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                let row = adj.row(v);
                let masked = match skip {
                    Some((a, b)) if v == a => Some(b),
                    Some((a, b)) if v == b => Some(a),
                    _ => None,
                };
                for (w, (dst, &src_word)) in next.iter_mut().zip(row).enumerate() {
                    let mut word = src_word;
                    if let Some(m) = masked {
                        if m / 64 == w {
                            word &= !(1 << (m % 64));
                        }
                    }
                    *dst |= word;
                }
            }
        }
        let mut any = false;
        for w in 0..words {
            next[w] &= !visited[w];
            any |= next[w] != 0;
        }
        if !any {
            break;
        }
        level += 1;
        for (w, &word) in next.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let v = w * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                out[v] = level;
            }
            visited[w] |= next[w];
        }
        std::mem::swap(frontier, next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(n);
        for i in 1..n {
            m.set(i - 1, i);
            m.set(i, i - 1);
        }
        m
    }

    #[test]
    fn bfs_path_distances() {
        let adj = path(5);
        let mut out = vec![0; 5];
        bfs(&adj, 0, None, &mut BfsScratch::new(5), &mut out);
        assert_eq!(out, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn bfs_skip_cuts_path() {
        let adj = path(4);
        let mut out = vec![0; 4];
        bfs(&adj, 0, Some((1, 2)), &mut BfsScratch::new(4), &mut out);
        assert_eq!(out, vec![0, 1, UNREACHABLE, UNREACHABLE]);
    }

    #[test]
    fn bfs_skip_in_cycle_reroutes() {
        // 4-cycle 0-1-2-3-0, drop 0-1
        let mut adj = path(4);
        adj.set(0, 3);
        adj.set(3, 0);
        let mut out = vec![0; 4];
        bfs(&adj, 0, Some((0, 1)), &mut BfsScratch::new(4), &mut out);
        assert_eq!(out, vec![0, 3, 2, 1]);
    }

    #[test]
    fn wide_matrix_crosses_word_boundary() {
        let adj = path(130);
        let mut out = vec![0; 130];
        bfs(&adj, 0, None, &mut BfsScratch::new(130), &mut out);
        assert_eq!(out[129], 129);
        assert_eq!(iter_bits(adj.row(64)).collect::<Vec<_>>(), vec![63, 65]);
    }
}
