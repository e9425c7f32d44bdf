//! Walsh wavelet packets on dyadic squares.
//!
//! The 1D filters `w_{i,j}` are Haar sum/difference pairs applied
//! recursively; a 2D packet is the product of two of them, translated by
//! multiples of `2^i`. A node's coefficients form an `(L/2^i) x (L/2^i)`
//! block, so each depth of the complete tree holds exactly `L^2` numbers.
//!
//! Child coefficients come from substituting the filter recursion into the
//! inner product `<x, W_{i+1,2j+b,...,k}>`: the shifted copy at `2^i` lands on
//! parent shift `2k + 1`, giving
//!
//! ```text
//! low_k  = (p[2k] + p[2k+1]) / sqrt(2)
//! high_k = (p[2k] - p[2k+1]) / sqrt(2)
//! ```
//!
//! along each axis (axis 0 selected by `b0`, axis 1 by `b1`). Frequency
//! indices keep the natural (Paley) order of the recursion.

use crate::error::{Error, Result};
use crate::node::{check_depth, NodeId, MAX_DEPTH};
use crate::signal::{side_depth, Signal2D};
use crate::tree::QuadTreeModel;

/// `w_{i,j}(n)`, unrolled from the two-scale recursion.
///
/// Going down one level, the upper half of the support `[2^(i-1), 2^i)`
/// carries the sign of the lowest remaining bit of `j`.
pub fn walsh_filter_value(i: u32, j: u64, n: i64) -> Result<f64> {
    if i > 2 * MAX_DEPTH {
        return Err(Error::domain(format!("filter depth {i} is out of range")));
    }
    if j >= 1u64 << i {
        return Err(Error::domain(format!(
            "filter index j = {j} must be below 2^{i}"
        )));
    }
    if n < 0 || n >= 1i64 << i {
        return Ok(0.0);
    }
    let mut rest = n;
    let mut jj = j;
    let mut sign = 1.0;
    for level in (1..=i).rev() {
        let half = 1i64 << (level - 1);
        if rest >= half {
            rest -= half;
            if jj & 1 == 1 {
                sign = -sign;
            }
        }
        jj >>= 1;
    }
    debug_assert_eq!(rest, 0);
    Ok(sign * 0.5f64.powf(i as f64 / 2.0))
}

/// The packet `W_{i,j0,j1,k0,k1}` as an `L x L` signal.
pub fn basis_vector(d_max: u32, s: NodeId, k0: usize, k1: usize) -> Result<Signal2D> {
    check_depth(d_max)?;
    if s.depth > d_max {
        return Err(Error::domain(format!(
            "node {s} is deeper than d_max = {d_max}"
        )));
    }
    let side = 1usize << d_max;
    let shifts = side >> s.depth;
    if k0 >= shifts || k1 >= shifts {
        return Err(Error::domain(format!(
            "shift ({k0},{k1}) out of range for node {s}: must be below {shifts}"
        )));
    }
    let step = 1i64 << s.depth;
    let row: Vec<f64> = (0..side as i64)
        .map(|n| walsh_filter_value(s.depth, s.j0 as u64, n - step * k0 as i64))
        .collect::<Result<_>>()?;
    let col: Vec<f64> = (0..side as i64)
        .map(|n| walsh_filter_value(s.depth, s.j1 as u64, n - step * k1 as i64))
        .collect::<Result<_>>()?;
    Signal2D::from_fn(d_max, |r, c| row[r] * col[c])
}

/// Coefficient blocks for every node of the complete tree.
///
/// Depth `i` is stored as one contiguous buffer of `L^2` values: the
/// `4^i` node blocks in [`NodeId::index_in_depth`] order, each block in
/// raster order over its shifts `(k0, k1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketTable {
    d_max: u32,
    levels: Vec<Vec<f64>>,
}

impl PacketTable {
    pub fn zeros(d_max: u32) -> Self {
        let n = 1usize << (2 * d_max);
        PacketTable {
            d_max,
            levels: (0..=d_max).map(|_| vec![0.0; n]).collect(),
        }
    }

    /// Builds a table whose every block is filled with one value per node.
    pub fn constant_blocks(d_max: u32, mut value: impl FnMut(NodeId) -> f64) -> Self {
        let mut table = Self::zeros(d_max);
        for s in crate::node::all_nodes(d_max) {
            let v = value(s);
            table.block_mut(s).fill(v);
        }
        table
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn side(&self) -> usize {
        1 << self.d_max
    }

    /// Side length of the blocks at `depth`.
    pub fn block_side(&self, depth: u32) -> usize {
        self.side() >> depth
    }

    fn block_range(&self, s: NodeId) -> std::ops::Range<usize> {
        assert!(
            s.depth <= self.d_max,
            "node {s} is deeper than d_max = {}",
            self.d_max
        );
        let len = self.block_side(s.depth).pow(2);
        let start = s.index_in_depth() * len;
        start..start + len
    }

    pub fn block(&self, s: NodeId) -> &[f64] {
        let r = self.block_range(s);
        &self.levels[s.depth as usize][r]
    }

    pub fn block_mut(&mut self, s: NodeId) -> &mut [f64] {
        let r = self.block_range(s);
        &mut self.levels[s.depth as usize][r]
    }

    pub fn set_block(&mut self, s: NodeId, values: &[f64]) -> Result<()> {
        if s.depth > self.d_max {
            return Err(Error::domain(format!(
                "node {s} is deeper than d_max = {}",
                self.d_max
            )));
        }
        let dst = self.block_mut(s);
        if dst.len() != values.len() {
            return Err(Error::domain(format!(
                "block for node {s} needs {} values, got {}",
                dst.len(),
                values.len()
            )));
        }
        dst.copy_from_slice(values);
        Ok(())
    }

    /// All blocks at one depth, concatenated.
    pub fn level(&self, depth: u32) -> &[f64] {
        &self.levels[depth as usize]
    }

    #[cfg(test)]
    pub(crate) fn level_mut(&mut self, depth: u32) -> &mut [f64] {
        &mut self.levels[depth as usize]
    }

    /// The root block viewed as a signal.
    pub fn root_signal(&self) -> Signal2D {
        Signal2D::from_raw(self.side(), self.levels[0].clone())
    }
}

/// Offsets (within the next depth's buffer) of the four children of the
/// node at `index_in_depth` on `depth`, in canonical child order.
fn child_offsets(depth: u32, parent_index: usize, child_len: usize) -> [usize; 4] {
    let width = 1usize << depth;
    let (j0, j1) = (parent_index / width, parent_index % width);
    let cw = width * 2;
    let at = |b0: usize, b1: usize| ((2 * j0 + b0) * cw + 2 * j1 + b1) * child_len;
    [at(0, 0), at(0, 1), at(1, 0), at(1, 1)]
}

/// One analysis split of a `2h x 2h` parent into four `h x h` children,
/// written at `offsets` inside `out`.
fn split_into(parent: &[f64], h: usize, out: &mut [f64], offsets: [usize; 4]) {
    let n = 2 * h;
    for k0 in 0..h {
        let r0 = 2 * k0 * n;
        let r1 = r0 + n;
        for k1 in 0..h {
            let a = parent[r0 + 2 * k1];
            let b = parent[r0 + 2 * k1 + 1];
            let c = parent[r1 + 2 * k1];
            let d = parent[r1 + 2 * k1 + 1];
            let k = k0 * h + k1;
            out[offsets[0] + k] = 0.5 * (a + b + c + d);
            out[offsets[1] + k] = 0.5 * (a - b + c - d);
            out[offsets[2] + k] = 0.5 * (a + b - c - d);
            out[offsets[3] + k] = 0.5 * (a - b - c + d);
        }
    }
}

/// Inverse of [`split_into`]: accumulates `weight * parent` into `out`.
pub(crate) fn merge_into(children: [&[f64]; 4], h: usize, weight: f64, out: &mut [f64]) {
    let n = 2 * h;
    let w = 0.5 * weight;
    for k0 in 0..h {
        for k1 in 0..h {
            let k = k0 * h + k1;
            let (p, q, r, s) = (children[0][k], children[1][k], children[2][k], children[3][k]);
            let base = 2 * k0 * n + 2 * k1;
            out[base] += w * (p + q + r + s);
            out[base + 1] += w * (p - q + r - s);
            out[base + n] += w * (p + q - r - s);
            out[base + n + 1] += w * (p - q - r + s);
        }
    }
}

fn block_half_side(len: usize) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || n == 0 {
        return Err(Error::domain(format!(
            "block of {len} values is not square"
        )));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "block side {n} cannot be split in two"
        )));
    }
    Ok(n / 2)
}

/// Splits one square block into its four child blocks (canonical order).
pub fn split_one_level(block: &[f64]) -> Result<[Vec<f64>; 4]> {
    let h = block_half_side(block.len())?;
    let len = h * h;
    let mut out = vec![0.0; 4 * len];
    split_into(block, h, &mut out, [0, len, 2 * len, 3 * len]);
    let mut parts = out.chunks_exact(len).map(<[f64]>::to_vec);
    Ok([
        parts.next().unwrap(),
        parts.next().unwrap(),
        parts.next().unwrap(),
        parts.next().unwrap(),
    ])
}

/// Reassembles a parent block from its four children.
pub fn synthesize_one_level(children: [&[f64]; 4]) -> Result<Vec<f64>> {
    let len = children[0].len();
    if children.iter().any(|c| c.len() != len) {
        return Err(Error::domain("child blocks differ in size"));
    }
    let h = (len as f64).sqrt().round() as usize;
    if h * h != len || h == 0 {
        return Err(Error::domain(format!(
            "child block of {len} values is not square"
        )));
    }
    let mut out = vec![0.0; 4 * len];
    merge_into(children, h, 1.0, &mut out);
    Ok(out)
}

/// Full packet decomposition: every node's coefficient block, `O(L^2 d_max)`.
pub fn analyze_full(x: &Signal2D) -> PacketTable {
    let d_max = x.d_max();
    let mut table = PacketTable::zeros(d_max);
    table.levels[0].copy_from_slice(x.as_slice());
    for depth in 0..d_max {
        let parent_side = x.side() >> depth;
        let h = parent_side / 2;
        let parent_len = parent_side * parent_side;
        let (upper, lower) = table.levels.split_at_mut(depth as usize + 1);
        let parents = &upper[depth as usize];
        let next = &mut lower[0];
        for (q, parent) in parents.chunks_exact(parent_len).enumerate() {
            split_into(parent, h, next, child_offsets(depth, q, h * h));
        }
    }
    table
}

/// Same as [`analyze_full`] for a raw side/values pair, validating the shape.
pub fn analyze_values(side: usize, values: Vec<f64>) -> Result<PacketTable> {
    side_depth(side)?;
    Ok(analyze_full(&Signal2D::new(side, values)?))
}

/// `(W^m)^T theta`, where `theta` is read from the leaf blocks of `coeffs`.
/// Blocks of non-leaf nodes are ignored.
pub fn synthesize_tree(m: &QuadTreeModel, coeffs: &PacketTable) -> Result<Signal2D> {
    if m.d_max() != coeffs.d_max() {
        return Err(Error::domain(format!(
            "tree has d_max = {} but coefficient table has d_max = {}",
            m.d_max(),
            coeffs.d_max()
        )));
    }
    let data = synth_node(m, coeffs, NodeId::ROOT);
    Ok(Signal2D::from_raw(coeffs.side(), data))
}

fn synth_node(m: &QuadTreeModel, coeffs: &PacketTable, s: NodeId) -> Vec<f64> {
    if m.is_leaf(s) {
        return coeffs.block(s).to_vec();
    }
    let ch = s.children();
    let parts: Vec<Vec<f64>> = ch.iter().map(|&c| synth_node(m, coeffs, c)).collect();
    let h = coeffs.block_side(s.depth + 1);
    let mut out = vec![0.0; 4 * h * h];
    merge_into([&parts[0], &parts[1], &parts[2], &parts[3]], h, 1.0, &mut out);
    out
}

/// Lays the leaf blocks of `m` out as one `L x L` image: node `(i, j0, j1)`
/// occupies the dyadic square at block row `j0`, block column `j1` of size
/// `L / 2^i`. The leaves of a full tree tile the square exactly.
pub fn pack_leaf_blocks(m: &QuadTreeModel, coeffs: &PacketTable) -> Result<Signal2D> {
    if m.d_max() != coeffs.d_max() {
        return Err(Error::domain("tree and coefficient table disagree on d_max"));
    }
    let side = coeffs.side();
    let mut out = vec![0.0; side * side];
    for &s in m.leaves() {
        let n = coeffs.block_side(s.depth);
        let (r0, c0) = (s.j0 as usize * n, s.j1 as usize * n);
        for (k0, row) in coeffs.block(s).chunks_exact(n).enumerate() {
            let start = (r0 + k0) * side + c0;
            out[start..start + n].copy_from_slice(row);
        }
    }
    Ok(Signal2D::from_raw(side, out))
}

/// Inverse of [`pack_leaf_blocks`]; blocks of non-leaf nodes are left zero.
pub fn unpack_leaf_blocks(m: &QuadTreeModel, image: &Signal2D) -> Result<PacketTable> {
    if m.d_max() != image.d_max() {
        return Err(Error::domain("tree and coefficient image disagree on d_max"));
    }
    let side = image.side();
    let mut table = PacketTable::zeros(m.d_max());
    for &s in m.leaves() {
        let n = table.block_side(s.depth);
        let (r0, c0) = (s.j0 as usize * n, s.j1 as usize * n);
        let block = table.block_mut(s);
        for k0 in 0..n {
            let start = (r0 + k0) * side + c0;
            block[k0 * n..(k0 + 1) * n].copy_from_slice(&image.as_slice()[start..start + n]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::all_nodes;
    use std::f64::consts::FRAC_1_SQRT_2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(d_max: u32, rng: &mut impl Rng) -> Signal2D {
        Signal2D::from_fn(d_max, |_, _| rng.gen_range(-5.0..5.0)).unwrap()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn walsh_values() {
        assert_eq!(walsh_filter_value(0, 0, 0).unwrap(), 1.0);
        assert_eq!(walsh_filter_value(0, 0, 5).unwrap(), 0.0);
        let r = 2f64.powf(-0.5);
        assert!((walsh_filter_value(1, 0, 0).unwrap() - r).abs() < 1e-15);
        assert!((walsh_filter_value(1, 0, 1).unwrap() - r).abs() < 1e-15);
        let got: Vec<f64> = (0..4).map(|n| walsh_filter_value(2, 2, n).unwrap()).collect();
        assert_eq!(got, vec![0.5, -0.5, 0.5, -0.5]);
        assert!(walsh_filter_value(1, 2, 0).is_err());
        assert_eq!(walsh_filter_value(2, 1, -1).unwrap(), 0.0);
    }

    // Direct evaluation of the two-scale recursion, exponential but obvious.
    fn walsh_by_recursion(i: u32, j: u64, n: i64) -> f64 {
        if i == 0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let prev = |m| walsh_by_recursion(i - 1, j / 2, m);
        FRAC_1_SQRT_2 * prev(n) + sign * FRAC_1_SQRT_2 * prev(n - (1 << (i - 1)))
    }

    #[test]
    fn unrolled_filter_matches_recursion() {
        for i in 0..=5u32 {
            for j in 0..(1u64 << i) {
                for n in -2..(1i64 << i) + 2 {
                    let a = walsh_filter_value(i, j, n).unwrap();
                    let b = walsh_by_recursion(i, j, n);
                    assert!((a - b).abs() < 1e-14, "w_{{{i},{j}}}({n}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn root_basis_is_impulse() {
        let b = basis_vector(2, NodeId::ROOT, 2, 3).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if (r, c) == (2, 3) { 1.0 } else { 0.0 };
                assert_eq!(b.get(r, c), want);
            }
        }
        assert!(basis_vector(2, NodeId::ROOT, 4, 0).is_err());
        assert!(basis_vector(1, NodeId::new(2, 0, 0).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn random_basis_vectors_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nodes: Vec<NodeId> = all_nodes(3).collect();
        for _ in 0..50 {
            let s = nodes[rng.gen_range(0..nodes.len())];
            let shifts = 8 >> s.depth;
            let (k0, k1) = (rng.gen_range(0..shifts), rng.gen_range(0..shifts));
            let b = basis_vector(3, s, k0, k1).unwrap();
            assert!((b.norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_node_shifts_are_orthogonal_exhaustively() {
        for s in all_nodes(2) {
            let shifts = 4 >> s.depth;
            let vecs: Vec<Signal2D> = (0..shifts)
                .flat_map(|k0| (0..shifts).map(move |k1| (k0, k1)))
                .map(|(k0, k1)| basis_vector(2, s, k0, k1).unwrap())
                .collect();
            for (a, va) in vecs.iter().enumerate() {
                for (b, vb) in vecs.iter().enumerate() {
                    let ip = dot(va.as_slice(), vb.as_slice());
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12, "node {s}: <{a},{b}> = {ip}");
                }
            }
        }
    }

    #[test]
    fn constant_signal_concentrates_in_lowpass() {
        let c = 3.5;
        let t = analyze_full(&Signal2D::constant(2, c));
        assert!(t.block(NodeId::new(1, 0, 0).unwrap()).iter().all(|&v| (v - 2.0 * c).abs() < 1e-12));
        for (j0, j1) in [(0, 1), (1, 0), (1, 1)] {
            let b = t.block(NodeId::new(1, j0, j1).unwrap());
            assert!(b.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn blocks_are_inner_products_with_basis_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_signal(3, &mut rng);
        let t = analyze_full(&x);
        for s in all_nodes(3) {
            let n = t.block_side(s.depth);
            let block = t.block(s);
            for k0 in 0..n {
                for k1 in 0..n {
                    let b = basis_vector(3, s, k0, k1).unwrap();
                    let want = dot(x.as_slice(), b.as_slice());
                    assert!((block[k0 * n + k1] - want).abs() < 1e-10, "node {s} shift ({k0},{k1})");
                }
            }
        }
    }

    #[test]
    fn energy_per_depth_matches_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_signal(3, &mut rng);
        let t = analyze_full(&x);
        assert_eq!(t.level(0), x.as_slice());
        for d in 0..=3 {
            let e: f64 = t.level(d).iter().map(|v| v * v).sum();
            assert!((e - x.norm_sq()).abs() < 1e-9 * x.norm_sq());
        }
    }

    #[test]
    fn one_level_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let parts = split_one_level(&b).unwrap();
        let back = synthesize_one_level([&parts[0], &parts[1], &parts[2], &parts[3]]).unwrap();
        for (u, v) in b.iter().zip(&back) {
            assert!((u - v).abs() < 1e-14);
        }
        let z = vec![0.0; 4];
        assert!(synthesize_one_level([&z, &z, &z, &z]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_level_from_full_analysis() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_signal(2, &mut rng);
        let t = analyze_full(&x);
        let ch = NodeId::ROOT.children();
        let back = synthesize_one_level([t.block(ch[0]), t.block(ch[1]), t.block(ch[2]), t.block(ch[3])]).unwrap();
        for (u, v) in x.as_slice().iter().zip(&back) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn one_level_shape_errors() {
        let a = vec![0.0; 4];
        let b = vec![0.0; 9];
        assert!(synthesize_one_level([&a, &a, &a, &b]).is_err());
        assert!(synthesize_one_level([&b[..3], &b[..3], &b[..3], &b[..3]]).is_err());
        assert!(split_one_level(&b).is_err());
        assert!(split_one_level(&[1.0]).is_err());
    }

    #[test]
    fn root_only_tree_returns_root_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut table = PacketTable::zeros(2);
        for v in table.level_mut(0) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let m = QuadTreeModel::root_only(2);
        assert_eq!(synthesize_tree(&m, &table).unwrap(), table.root_signal());
    }

    #[test]
    fn synthesis_rejects_mismatched_depth() {
        let m = QuadTreeModel::root_only(3);
        assert!(synthesize_tree(&m, &PacketTable::zeros(2)).is_err());
    }

    #[test]
    fn packed_leaf_blocks_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_signal(3, &mut rng);
        let t = analyze_full(&x);
        let m = QuadTreeModel::from_bitstring(3, "1010000010000").unwrap();
        let img = pack_leaf_blocks(&m, &t).unwrap();
        assert!((img.norm_sq() - x.norm_sq()).abs() < 1e-9);
        let back = synthesize_tree(&m, &unpack_leaf_blocks(&m, &img).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn analyze_values_validates() {
        assert!(analyze_values(3, vec![0.0; 9]).is_err());
        assert!(analyze_values(2, vec![0.0; 4]).is_ok());
    }
}
