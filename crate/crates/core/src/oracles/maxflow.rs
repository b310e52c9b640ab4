//! Exact max-flow / min-cut over rational capacities (BFS augmenting paths).
//! Used as the separation oracle for the cut LPs.

use std::collections::VecDeque;

use num::traits::Zero;

use crate::rat::Rat;

pub struct FlowNetwork {
    n: usize,
    // Arc list: to, capacity, paired reverse arc index.
    to: Vec<usize>,
    cap: Vec<Rat>,
    head: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            to: vec![],
            cap: vec![],
            head: vec![vec![]; n],
        }
    }

    /// Directed arc u -> v with the given capacity (zero reverse capacity).
    pub fn add_arc(&mut self, u: usize, v: usize, capacity: Rat) {
        let i = self.to.len();
        self.to.push(v);
        self.cap.push(capacity);
        self.head[u].push(i);
        self.to.push(u);
        self.cap.push(Rat::zero());
        self.head[v].push(i + 1);
    }

    /// Max s-t flow; mutates residual capacities.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Rat {
        let mut total = Rat::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.n];
            let mut queue = VecDeque::new();
            queue.push_back(s);
            let mut seen = vec![false; self.n];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &ai in &self.head[u] {
                    let v = self.to[ai];
                    if !seen[v] && self.cap[ai].is_positive() {
                        seen[v] = true;
                        pred[v] = Some(ai);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            // Bottleneck along the path.
            let mut bottleneck: Option<Rat> = None;
            let mut v = t;
            while v != s {
                let ai = pred[v].unwrap();
                let c = &self.cap[ai];
                if bottleneck.as_ref().map(|b| c < b).unwrap_or(true) {
                    bottleneck = Some(c.clone());
                }
                v = self.to[ai ^ 1];
            }
            let b = bottleneck.unwrap();
            let mut v = t;
            while v != s {
                let ai = pred[v].unwrap();
                self.cap[ai] -= &b;
                self.cap[ai ^ 1] += &b;
                v = self.to[ai ^ 1];
            }
            total += b;
        }
    }

    /// Source side of the min cut in the residual network (call after
    /// `max_flow`).
    pub fn min_cut_source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &ai in &self.head[u] {
                let v = self.to[ai];
                if !seen[v] && self.cap[ai].is_positive() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

use num::traits::Signed;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn small_flow() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, rat_int(3));
        net.add_arc(0, 2, rat(1, 2));
        net.add_arc(1, 3, rat_int(2));
        net.add_arc(2, 3, rat_int(2));
        net.add_arc(1, 2, rat_int(5));
        assert_eq!(net.max_flow(0, 3), rat(7, 2));
        let side = net.min_cut_source_side(0);
        assert!(side[0] && !side[3]);
    }
}
