//! Occupation-number basis with Jordan-Wigner ordering.
//!
//! Mode 1 is the leftmost (most significant) bit of a basis index, so the
//! index of `|n_1 n_2 … n_M>` is the binary number `n_1 n_2 … n_M`. The
//! annihilator `a_j` carries the sign `(-1)^(n_1 + … + n_{j-1})`.

/// Basis index of an occupation list (mode 1 first).
pub fn index_of(occupation: &[bool]) -> usize {
    occupation.iter().fold(0, |acc, &n| (acc << 1) | n as usize)
}

/// Occupations of modes `1..=modes` for a basis index.
pub fn occupation_of(modes: usize, index: usize) -> Vec<bool> {
    (0..modes).map(|j| occupied(modes, index, j)).collect()
}

/// Bit of mode `j` (0-based) inside a basis index.
#[inline]
pub fn mode_bit(modes: usize, j: usize) -> usize {
    1 << (modes - 1 - j)
}

#[inline]
pub fn occupied(modes: usize, index: usize, j: usize) -> bool {
    index & mode_bit(modes, j) != 0
}

#[inline]
pub fn particle_number(index: usize) -> u32 {
    index.count_ones()
}

#[inline]
fn jw_sign(modes: usize, index: usize, j: usize) -> f64 {
    // modes before j occupy the bits above mode j's bit
    if (index >> (modes - j)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_j |index> = sign |result>`, or `None` when mode `j` is empty.
#[inline]
pub fn annihilate(modes: usize, index: usize, j: usize) -> Option<(f64, usize)> {
    if occupied(modes, index, j) {
        Some((jw_sign(modes, index, j), index ^ mode_bit(modes, j)))
    } else {
        None
    }
}

/// `a_j† |index> = sign |result>`, or `None` when mode `j` is occupied.
#[inline]
pub fn create(modes: usize, index: usize, j: usize) -> Option<(f64, usize)> {
    if occupied(modes, index, j) {
        None
    } else {
        Some((jw_sign(modes, index, j), index | mode_bit(modes, j)))
    }
}
