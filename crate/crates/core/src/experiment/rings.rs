use rand::seq::SliceRandom;
use rand::Rng;

use crate::scene::Ring;

/// Recorded transitions per ordered distance pair.
pub const PER_PAIR: usize = 13;

/// Ring sequence whose consecutive pairs contain each of LL, LS, SL and SS
/// exactly `per_pair` times, starting and ending on the same ring.
///
/// This is an Eulerian circuit of the two-node multigraph with `per_pair`
/// parallel edges for each ordered pair. The circuit is drawn with the
/// last-exit-arborescence construction: the non-root node's final exit
/// must lead to the root, every other exit order is shuffled, and the walk
/// then necessarily uses every edge before returning to the root.
pub fn ring_sequence<R: Rng + ?Sized>(rng: &mut R, per_pair: usize) -> Vec<Ring> {
    let nodes = [Ring::Short, Ring::Large];
    let root = if rng.random_bool(0.5) { 0 } else { 1 };
    let other = 1 - root;
    let mut exits: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (from, list) in exits.iter_mut().enumerate() {
        for to in 0..2 {
            list.extend(std::iter::repeat_n(to, per_pair));
        }
        if from == other && per_pair > 0 {
            let last = list.iter().position(|&t| t == root).unwrap();
            list.remove(last);
            list.shuffle(rng);
            list.push(root);
        } else {
            list.shuffle(rng);
        }
        // Consumed from the front.
        list.reverse();
    }
    let mut seq = vec![nodes[root]];
    let mut at = root;
    while let Some(next) = exits[at].pop() {
        seq.push(nodes[next]);
        at = next;
    }
    debug_assert!(exits.iter().all(Vec::is_empty));
    seq
}

/// The 53-ring sequence behind the 52 recorded transitions.
pub fn generate_ring_sequence(seed: u64) -> Vec<Ring> {
    ring_sequence(&mut crate::rng::stream(seed, &[crate::rng::purpose::RINGS]), PER_PAIR)
}

/// Counts of (LL, LS, SL, SS) transitions.
pub fn pair_histogram(seq: &[Ring]) -> [usize; 4] {
    let mut h = [0; 4];
    for w in seq.windows(2) {
        h[super::DistancePair::from_rings(w[0], w[1]) as usize] += 1;
    }
    h
}
