use std::cmp::Ordering;
use std::ops::Add;

use super::Problem;
use crate::model::{Schedule, MD_TOLERANCE_KW, SLOT_HOURS};

/// Costs closer than this are treated as ties.
pub(crate) const COST_EPS: f64 = 1e-10;

/// Objective contribution paired with shift distance; compared
/// lexicographically so equal-cost placements prefer smaller shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    pub cost: f64,
    pub shift: u64,
}

impl Score {
    pub const ZERO: Score = Score { cost: 0.0, shift: 0 };

    pub fn better_than(self, other: Score) -> bool {
        self.cmp_lex(other) == Ordering::Less
    }

    pub fn cmp_lex(self, other: Score) -> Ordering {
        if self.cost < other.cost - COST_EPS {
            Ordering::Less
        } else if self.cost > other.cost + COST_EPS {
            Ordering::Greater
        } else {
            self.shift.cmp(&other.shift)
        }
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, o: Score) -> Score {
        Score {
            cost: self.cost + o.cost,
            shift: self.shift + o.shift,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Device {
    pub rated: f64,
    pub duration: usize,
    pub start: usize,
    pub end: usize,
    pub interruptible: bool,
    pub baseline: Vec<usize>,
    /// Penalty per slot of displacement, $.
    pub shift_rate: f64,
}

/// Per-appliance placement tables for the current household state.
pub(crate) struct Tables {
    /// Slots the appliance may still use, ascending.
    pub slots: Vec<usize>,
    /// `step[k][j]`: score of using `slots[j]` as the k-th on-slot.
    pub step: Vec<Vec<Score>>,
    /// `value[k][j]`: best score of on-slots k.. given the k-th is `slots[j]`.
    pub value: Vec<Vec<Option<Score>>>,
}

impl Tables {
    /// Indices `j > after` usable as the k-th on-slot, best first.
    pub fn ranked(&self, k: usize, after: Option<usize>) -> Vec<(Score, usize)> {
        let from = after.map_or(0, |a| a + 1);
        let mut out: Vec<(Score, usize)> = (from..self.slots.len())
            .filter_map(|j| self.value[k][j].map(|v| (v, j)))
            .collect();
        out.sort_by(|a, b| a.0.cmp_lex(b.0).then(a.1.cmp(&b.1)));
        out
    }
}

/// Household state shared by both solvers: gross load so far and the
/// incremental cost of adding an appliance at each slot.
pub(crate) struct Workspace<'a> {
    price: &'a [f64],
    pv: Vec<f64>,
    load: Vec<f64>,
    md: f64,
    pub devices: Vec<Device>,
}

impl<'a> Workspace<'a> {
    pub fn new(problem: &Problem<'a>) -> Self {
        let h = problem.household;
        let pv = if h.pv_installed {
            problem.pv.output_kw.clone()
        } else {
            vec![0.0; h.horizon()]
        };
        let devices = h
            .appliances
            .iter()
            .map(|a| Device {
                rated: a.rated_power_kw,
                duration: a.duration_slots,
                start: a.window_start,
                end: a.window_end,
                interruptible: a.interruptible,
                baseline: a.baseline_on_slots.clone(),
                shift_rate: SLOT_HOURS * problem.penalty_price * a.rated_power_kw,
            })
            .collect();
        Self {
            price: &problem.price.price_per_kwh,
            pv,
            load: h.base_load_kw.clone(),
            md: h.md_kw,
            devices,
        }
    }

    pub fn horizon(&self) -> usize {
        self.load.len()
    }

    /// Extra billed cost of drawing `rated` kW more at slot `t`.
    #[inline]
    fn slot_cost(&self, rated: f64, t: usize) -> f64 {
        let net = self.load[t] - self.pv[t];
        SLOT_HOURS * self.price[t] * ((net + rated).max(0.0) - net.max(0.0))
    }

    #[inline]
    fn fits(&self, rated: f64, t: usize) -> bool {
        self.load[t] + rated <= self.md + MD_TOLERANCE_KW
    }

    pub fn place(&mut self, a: usize, slots: &[usize]) {
        let r = self.devices[a].rated;
        for &t in slots {
            self.load[t] += r;
        }
    }

    pub fn remove(&mut self, a: usize, slots: &[usize]) {
        let r = self.devices[a].rated;
        for &t in slots {
            self.load[t] -= r;
        }
    }

    /// Score of adding appliance `a` (not currently placed) at `slots`.
    pub fn score_of(&self, a: usize, slots: &[usize]) -> Score {
        let d = &self.devices[a];
        let shift = slots
            .iter()
            .zip(&d.baseline)
            .map(|(&n, &o)| n.abs_diff(o) as u64)
            .sum::<u64>();
        let cost = slots.iter().map(|&t| self.slot_cost(d.rated, t)).sum::<f64>()
            + d.shift_rate * shift as f64;
        Score { cost, shift }
    }

    pub fn fits_all(&self, a: usize, slots: &[usize]) -> bool {
        let r = self.devices[a].rated;
        slots.iter().all(|&t| self.fits(r, t))
    }

    /// Contiguous blocks for an uninterruptible appliance, best first.
    pub fn blocks(&self, a: usize) -> Vec<(Score, usize)> {
        let d = &self.devices[a];
        let origin = d.baseline[0];
        let mut out = Vec::new();
        let mut run = 0usize;
        let mut cost_in_run: Vec<f64> = Vec::with_capacity(d.end + 1 - d.start);
        for t in d.start..=d.end {
            if self.fits(d.rated, t) {
                run += 1;
            } else {
                run = 0;
            }
            cost_in_run.push(self.slot_cost(d.rated, t));
            if run >= d.duration {
                let s = t + 1 - d.duration;
                let energy: f64 = cost_in_run[s - d.start..].iter().sum();
                let shift = (d.duration * s.abs_diff(origin)) as u64;
                out.push((
                    Score {
                        cost: energy + d.shift_rate * shift as f64,
                        shift,
                    },
                    s,
                ));
            }
        }
        out.sort_by(|a, b| a.0.cmp_lex(b.0).then(a.1.cmp(&b.1)));
        out
    }

    pub fn tables(&self, a: usize) -> Option<Tables> {
        let d = &self.devices[a];
        let slots: Vec<usize> = (d.start..=d.end).filter(|&t| self.fits(d.rated, t)).collect();
        let n = slots.len();
        let dur = d.duration;
        if n < dur {
            return None;
        }
        let energy: Vec<f64> = slots.iter().map(|&t| self.slot_cost(d.rated, t)).collect();
        let step: Vec<Vec<Score>> = (0..dur)
            .map(|k| {
                slots
                    .iter()
                    .zip(&energy)
                    .map(|(&t, &e)| {
                        let shift = t.abs_diff(d.baseline[k]) as u64;
                        Score {
                            cost: e + d.shift_rate * shift as f64,
                            shift,
                        }
                    })
                    .collect()
            })
            .collect();
        let mut value = vec![vec![None; n]; dur];
        for k in (0..dur).rev() {
            // Best continuation among j' > j, computed right to left.
            let mut tail: Option<Score> = None;
            let lo = k;
            let hi = n - (dur - k);
            let mut j = n;
            while j > 0 {
                j -= 1;
                if j >= lo && j <= hi {
                    let v = if k + 1 == dur {
                        Some(step[k][j])
                    } else {
                        tail.map(|t| step[k][j] + t)
                    };
                    value[k][j] = v;
                }
                if k + 1 < dur {
                    if let Some(next) = value[k + 1][j] {
                        if tail.is_none_or(|t| !t.better_than(next)) {
                            tail = Some(next);
                        }
                    }
                }
            }
        }
        Some(Tables { slots, step, value })
    }

    /// Best placement of `a` against the current state, ties to the
    /// lexicographically earliest on-slots.
    pub fn best(&self, a: usize) -> Option<(Score, Vec<usize>)> {
        if self.devices[a].interruptible {
            let tables = self.tables(a)?;
            let mut chosen = Vec::with_capacity(self.devices[a].duration);
            let mut after = None;
            let mut total = None;
            for k in 0..self.devices[a].duration {
                let (v, j) = *tables.ranked(k, after).first()?;
                if k == 0 {
                    total = Some(v);
                }
                chosen.push(tables.slots[j]);
                after = Some(j);
            }
            Some((total?, chosen))
        } else {
            let (score, s) = *self.blocks(a).first()?;
            Some((score, (s..s + self.devices[a].duration).collect()))
        }
    }

    /// Lower bound on `a`'s contribution given the current state.
    pub fn best_score(&self, a: usize) -> Option<Score> {
        if self.devices[a].interruptible {
            let tables = self.tables(a)?;
            tables.value[0]
                .iter()
                .flatten()
                .copied()
                .reduce(|b, v| if v.better_than(b) { v } else { b })
        } else {
            self.blocks(a).first().map(|b| b.0)
        }
    }

    /// Incremental score of a complete placement, accumulated in `order`.
    /// `None` if the placement breaks the demand cap. Leaves the state as
    /// it found it.
    pub fn replay(&mut self, order: &[usize], placements: &[Vec<usize>]) -> Option<Score> {
        let mut total = Score::ZERO;
        let mut done = 0;
        for &a in order {
            if !self.fits_all(a, &placements[a]) {
                break;
            }
            total = total + self.score_of(a, &placements[a]);
            self.place(a, &placements[a]);
            done += 1;
        }
        for &a in order[..done].iter().rev() {
            self.remove(a, &placements[a]);
        }
        (done == order.len()).then_some(total)
    }

    pub fn to_schedule(&self, placements: &[Vec<usize>]) -> Schedule {
        Schedule::from_on_slots(self.horizon(), placements.iter().map(Vec::as_slice))
    }
}
