use serde::{Deserialize, Serialize};

use crate::params::Dims;

/// Decision triple (Φ, Ψ, P) for the whole network.
///
/// `assoc` is indexed `[c][s][k]`, `subch` and `power` `[c][s][k][n]`
/// (see [`Dims`]). Transmit power only counts where both the association
/// and the subchannel bit are set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub dims: Dims,
    pub assoc: Vec<bool>,
    pub subch: Vec<bool>,
    pub power: Vec<f64>,
}

impl Allocation {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            assoc: vec![false; dims.num_links()],
            subch: vec![false; dims.num_entries()],
            power: vec![0.0; dims.num_entries()],
        }
    }

    #[inline]
    pub fn is_associated(&self, c: usize, s: usize, k: usize) -> bool {
        self.assoc[self.dims.link(c, s, k)]
    }

    #[inline]
    pub fn is_active(&self, c: usize, s: usize, k: usize, n: usize) -> bool {
        self.assoc[self.dims.link(c, s, k)] && self.subch[self.dims.entry(c, s, k, n)]
    }

    /// φ·ψ·p for one entry.
    #[inline]
    pub fn effective_power(&self, c: usize, s: usize, k: usize, n: usize) -> f64 {
        if self.is_active(c, s, k, n) {
            self.power[self.dims.entry(c, s, k, n)]
        } else {
            0.0
        }
    }

    /// φ·ψ·p for every entry, `[m][k][n]` layout.
    pub fn effective_powers(&self) -> Vec<f64> {
        let d = self.dims;
        let mut out = vec![0.0; d.num_entries()];
        for link in 0..d.num_links() {
            if !self.assoc[link] {
                continue;
            }
            let base = link * d.subchannels;
            for n in 0..d.subchannels {
                if self.subch[base + n] {
                    out[base + n] = self.power[base + n];
                }
            }
        }
        out
    }

    pub fn associate(&mut self, c: usize, s: usize, k: usize) {
        let i = self.dims.link(c, s, k);
        self.assoc[i] = true;
    }

    /// Assigns subchannel `n` of RSC `(c, s)` to user `k` at `power` W.
    pub fn assign(&mut self, c: usize, s: usize, k: usize, n: usize, power: f64) {
        let i = self.dims.entry(c, s, k, n);
        self.subch[i] = true;
        self.power[i] = power;
    }

    /// First RSC `(c, s)` user `k` is associated with.
    pub fn serving_rsc(&self, k: usize) -> Option<(usize, usize)> {
        let d = self.dims;
        (0..d.total_rscs())
            .find(|&m| self.assoc[m * d.users + k])
            .map(|m| d.split_rsc(m))
    }

    /// Copies group `c`'s slice of `other` into `self`.
    pub fn copy_group_from(&mut self, other: &Allocation, c: usize) {
        assert_eq!(self.dims, other.dims);
        let d = self.dims;
        let links = d.rscs_per_group * d.users;
        let l0 = c * links;
        self.assoc[l0..l0 + links].copy_from_slice(&other.assoc[l0..l0 + links]);
        let e0 = l0 * d.subchannels;
        let e1 = e0 + links * d.subchannels;
        self.subch[e0..e1].copy_from_slice(&other.subch[e0..e1]);
        self.power[e0..e1].copy_from_slice(&other.power[e0..e1]);
    }

    /// Structural invariants: one association per user, powers zero off the
    /// Φ·Ψ mask, nonnegative powers, at most one user per (RSC, subchannel).
    pub fn is_well_formed(&self) -> bool {
        let d = self.dims;
        for k in 0..d.users {
            let count = (0..d.total_rscs())
                .filter(|&m| self.assoc[m * d.users + k])
                .count();
            if count > 1 {
                return false;
            }
        }
        for m in 0..d.total_rscs() {
            let (c, s) = d.split_rsc(m);
            for n in 0..d.subchannels {
                let mut users = 0;
                for k in 0..d.users {
                    let i = d.entry(c, s, k, n);
                    let active = self.assoc[d.link(c, s, k)] && self.subch[i];
                    if self.power[i] < 0.0 || (!active && self.power[i] != 0.0) {
                        return false;
                    }
                    if self.subch[i] {
                        users += 1;
                    }
                }
                if users > 1 {
                    return false;
                }
            }
        }
        true
    }
}
