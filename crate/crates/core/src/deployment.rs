//! Topology and channel generation.
//!
//! RSCs sit at the centres of a regular grid covering the square; the grid
//! lines double as walls for the LoS/NLoS decision. Positions, fading and
//! the initial (max-RSRP) association are all drawn from per-entity RNG
//! streams, so adding users or regrouping RSCs leaves every existing draw
//! untouched.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Dims, ScenarioParams, UserPlacement};
use crate::rng::{self, tag};

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Pathloss in dB at distance `d_m`. `walls` only matters for NLoS.
pub fn pathloss_db(d_m: f64, los: bool, walls: u32, offset_db: f64) -> f64 {
    if los {
        18.7 * d_m.log10() + 46.8 + offset_db
    } else {
        36.8 * d_m.log10() + 43.8 + offset_db + 5.0 * (walls as f64 - 1.0)
    }
}

/// Regular grid the RSCs are laid on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub cols: usize,
    pub rows: usize,
    pub side: f64,
}

impl Grid {
    pub fn for_rscs(total: usize, side: f64) -> Self {
        let cols = (total as f64).sqrt().ceil() as usize;
        let rows = total.div_ceil(cols);
        Self { cols, rows, side }
    }

    fn cell_w(&self) -> f64 {
        self.side / self.cols as f64
    }

    fn cell_h(&self) -> f64 {
        self.side / self.rows as f64
    }

    /// Cell `(col, row)` of RSC `m` (row-major).
    pub fn cell_of_rsc(&self, m: usize) -> (usize, usize) {
        (m % self.cols, m / self.cols)
    }

    pub fn centre(&self, m: usize) -> Point {
        let (col, row) = self.cell_of_rsc(m);
        Point {
            x: (col as f64 + 0.5) * self.cell_w(),
            y: (row as f64 + 0.5) * self.cell_h(),
        }
    }

    pub fn cell_of_point(&self, p: &Point) -> (usize, usize) {
        let col = ((p.x / self.cell_w()).floor() as usize).min(self.cols - 1);
        let row = ((p.y / self.cell_h()).floor() as usize).min(self.rows - 1);
        (col, row)
    }

    /// Grid lines strictly between two points' cells.
    pub fn walls_between(&self, a: &Point, b: &Point) -> u32 {
        let (ca, ra) = self.cell_of_point(a);
        let (cb, rb) = self.cell_of_point(b);
        (ca.abs_diff(cb) + ra.abs_diff(rb)) as u32
    }
}

/// Frozen Monte Carlo drop: geometry, channel gains, initial association.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub dims: Dims,
    pub rsc_pos: Vec<Point>,
    pub user_pos: Vec<Point>,
    /// Linear power gain, `[m][k][n]` with `m = c * S + s`.
    pub gains: Vec<f64>,
    /// Physical RSC each user is initially associated with (max RSRP).
    pub initial_rsc: Vec<usize>,
}

impl Deployment {
    #[inline]
    pub fn gain(&self, c: usize, s: usize, k: usize, n: usize) -> f64 {
        self.gains[self.dims.entry(c, s, k, n)]
    }

    #[inline]
    pub fn gain_m(&self, m: usize, k: usize, n: usize) -> f64 {
        self.gains[(m * self.dims.users + k) * self.dims.subchannels + n]
    }

    /// Hand-built drop from a gain tensor (`[m][k][n]`) and initial RSCs.
    /// Positions are left at the origin.
    pub fn from_gains(dims: Dims, gains: Vec<f64>, initial_rsc: Vec<usize>) -> Self {
        assert_eq!(gains.len(), dims.num_entries());
        assert_eq!(initial_rsc.len(), dims.users);
        Self {
            dims,
            rsc_pos: vec![Point { x: 0.0, y: 0.0 }; dims.total_rscs()],
            user_pos: vec![Point { x: 0.0, y: 0.0 }; dims.users],
            gains,
            initial_rsc,
        }
    }

    /// φ̄: whether user `k` starts on RSC `(c, s)`.
    pub fn initially_on(&self, c: usize, s: usize, k: usize) -> bool {
        self.initial_rsc[k] == self.dims.rsc(c, s)
    }

    /// Group of the RSC the user starts on; users are only managed by it.
    pub fn home_group(&self, k: usize) -> usize {
        self.dims.split_rsc(self.initial_rsc[k]).0
    }

    pub fn group_users(&self, c: usize) -> Vec<usize> {
        (0..self.dims.users)
            .filter(|&k| self.home_group(k) == c)
            .collect()
    }

    /// Same drop, RSCs regrouped into `groups` C-RANs. Gains and positions
    /// are indexed by physical RSC so nothing is redrawn.
    pub fn regrouped(&self, groups: usize) -> Self {
        let total = self.dims.total_rscs();
        assert!(groups > 0 && total % groups == 0, "groups must split RSCs");
        let mut d = self.clone();
        d.dims.groups = groups;
        d.dims.rscs_per_group = total / groups;
        d
    }
}

fn sample_user(
    rng: &mut impl Rng,
    lo: Point,
    hi: Point,
    rscs: &[Point],
    min_dist: f64,
    user: usize,
) -> Result<Point> {
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let p = Point {
            x: rng.gen_range(lo.x..hi.x),
            y: rng.gen_range(lo.y..hi.y),
        };
        if rscs.iter().all(|r| r.distance(&p) >= min_dist) {
            return Ok(p);
        }
    }
    Err(Error::GeometryInfeasible {
        user,
        min_distance_m: min_dist,
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

pub fn generate_deployment(params: &ScenarioParams, seed: u64) -> Result<Deployment> {
    params.validate()?;
    let dims = params.dims();
    let total = dims.total_rscs();
    let grid = Grid::for_rscs(total, params.area_side);
    let rsc_pos: Vec<Point> = (0..total).map(|m| grid.centre(m)).collect();

    let whole = (
        Point { x: 0.0, y: 0.0 },
        Point {
            x: params.area_side,
            y: params.area_side,
        },
    );
    let mut user_pos = Vec::with_capacity(dims.users);
    for k in 0..dims.users {
        let mut rng = rng::stream(seed, &[tag::USER_POSITION, k as u64]);
        let (lo, hi) = match params.placement {
            UserPlacement::OnePerRsc if k < total => {
                let (col, row) = grid.cell_of_rsc(k);
                let (w, h) = (grid.cell_w(), grid.cell_h());
                (
                    Point {
                        x: col as f64 * w,
                        y: row as f64 * h,
                    },
                    Point {
                        x: (col + 1) as f64 * w,
                        y: (row + 1) as f64 * h,
                    },
                )
            }
            _ => whole,
        };
        user_pos.push(sample_user(
            &mut rng,
            lo,
            hi,
            &rsc_pos,
            params.min_rsc_user_distance,
            k,
        )?);
    }

    let n_sub = dims.subchannels;
    let mut gains = vec![0.0; total * dims.users * n_sub];
    for m in 0..total {
        for (k, up) in user_pos.iter().enumerate() {
            let d = rsc_pos[m].distance(up).max(1e-3);
            let crossed = grid.walls_between(&rsc_pos[m], up);
            let los = params.all_los || crossed == 0;
            let walls = params.num_walls.unwrap_or(crossed.max(1));
            let pl = pathloss_db(d, los, walls, params.pathloss_offset_db);
            let mean = 10f64.powf(-pl / 10.0);
            let mut rng = rng::stream(seed, &[tag::FADING, m as u64, k as u64]);
            let base = (m * dims.users + k) * n_sub;
            for n in 0..n_sub {
                let fade: f64 = Exp1.sample(&mut rng);
                gains[base + n] = (mean * fade).max(f64::MIN_POSITIVE);
            }
        }
    }

    // RSRP: total received power over all subchannels at full power.
    let initial_rsc = (0..dims.users)
        .map(|k| {
            let mut best = 0;
            let mut best_rsrp = f64::NEG_INFINITY;
            for m in 0..total {
                let base = (m * dims.users + k) * n_sub;
                let rsrp: f64 = gains[base..base + n_sub]
                    .iter()
                    .map(|g| g * params.max_tx_power)
                    .sum();
                if rsrp > best_rsrp {
                    best_rsrp = rsrp;
                    best = m;
                }
            }
            best
        })
        .collect();

    Ok(Deployment {
        dims,
        rsc_pos,
        user_pos,
        gains,
        initial_rsc,
    })
}
