//! Tick engine. Time advances in half reaction ticks so that classically
//! controlled fixups can take their half-tick weight; movement, DOF and
//! factory cultivation are accounted per whole tick.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layout::{build_zone_layout, Layout, RowKind, Variant};
use super::template::{
    schedule_template_with, BridgeEvent, ControlKnobs, Mover, ScheduleTemplate, StepEntry, StepKind,
};
use super::trace::{QubitRecord, QubitRole, QubitStatus, TickFrame, TickTrace, TraceHeader};
use crate::error::{Error, Result};
use crate::params::{move_ticks, params_hash, validate_params, SystemParams};

/// Compute site of bit `i`: T states and control copies are delivered here.
const COMPUTE_ROW: RowKind = RowKind::DataB;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub variant: Variant,
    pub w: usize,
    pub controlled: bool,
    pub seed: u64,
    pub control: ControlKnobs,
    /// Resource-row width of the hosting zone; `None` sizes it to `w`.
    pub zone_width: Option<usize>,
}

impl RunSpec {
    pub fn new(variant: Variant, w: usize, controlled: bool, seed: u64) -> Self {
        Self {
            variant,
            w,
            controlled,
            seed,
            control: ControlKnobs::default(),
            zone_width: None,
        }
    }

    pub fn in_zone(mut self, zone_width: usize) -> Self {
        self.zone_width = Some(zone_width);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdderRunStats {
    pub variant: Variant,
    pub w: usize,
    pub controlled: bool,
    pub seed: u64,
    pub zone_width: usize,
    pub total_ticks: f64,
    pub footprint_patches: usize,
    pub dof_per_tick: Vec<u32>,
    pub peak_dof: u32,
    pub avg_dof: f64,
    pub moves_per_bit: f64,
    pub avg_move_spans: f64,
    pub factory_to_compute_avg_spans: f64,
    /// Ticks in which some action was deferred by the DOF cap.
    pub stalled_ticks: u32,
    /// Ticks in which a T injection waited for a delivered state.
    pub magic_wait_ticks: u32,
    /// Peak number of simultaneously entangled bridge qubits.
    pub max_active_bridges: u32,
    pub t_states: u32,
}

pub fn run_adder(
    variant: Variant,
    w: usize,
    controlled: bool,
    seed: u64,
    p: &SystemParams,
) -> Result<AdderRunStats> {
    run_adder_with(&RunSpec::new(variant, w, controlled, seed), p).map(|(s, _)| s)
}

pub fn run_adder_traced(
    variant: Variant,
    w: usize,
    controlled: bool,
    seed: u64,
    p: &SystemParams,
) -> Result<(AdderRunStats, TickTrace)> {
    let (stats, trace) = run_adder_inner(&RunSpec::new(variant, w, controlled, seed), p, true)?;
    Ok((stats, trace.expect("trace requested")))
}

pub fn run_adder_with(
    spec: &RunSpec,
    p: &SystemParams,
) -> Result<(AdderRunStats, Option<TickTrace>)> {
    run_adder_inner(spec, p, false)
}

pub fn run_adder_with_trace(
    spec: &RunSpec,
    p: &SystemParams,
) -> Result<(AdderRunStats, TickTrace)> {
    let (stats, trace) = run_adder_inner(spec, p, true)?;
    Ok((stats, trace.expect("trace requested")))
}

fn run_adder_inner(
    spec: &RunSpec,
    p: &SystemParams,
    record: bool,
) -> Result<(AdderRunStats, Option<TickTrace>)> {
    let report = validate_params(p);
    if !report.is_valid() {
        return Err(Error::Validation(report.violations));
    }
    let layout = build_zone_layout(
        spec.variant,
        spec.w,
        spec.zone_width.unwrap_or(spec.w),
        false,
    )?;
    let template = schedule_template_with(spec.variant, spec.controlled, spec.control)?;
    let mut engine = Engine::new(spec, p, &layout, &template)?;
    engine.run()?;
    let stats = engine.stats();
    let trace = record.then(|| engine.trace(p));
    Ok((stats, trace))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FactoryPhase {
    Cultivating,
    Ready,
    Delivering { until_h: u64 },
}

#[derive(Debug, Clone)]
struct Factory {
    pos: (i32, i32),
    phase: FactoryPhase,
}

#[derive(Debug, Clone)]
struct Flight {
    qubit: usize,
    start_h: u64,
    end_h: u64,
    dest: (i32, i32),
    spans: f64,
    delivery: bool,
}

#[derive(Debug, Clone)]
struct Qubit {
    role: QubitRole,
    home: (i32, i32),
    last_counted_tick: Option<u64>,
}

#[derive(Debug, Clone)]
struct Block {
    bit: usize,
    uma: bool,
    next: usize,
    ready_h: u64,
    starts: Vec<u64>,
    t_available: u32,
    done_h: Option<u64>,
    bridge_open_h: Option<u64>,
}

struct Engine<'a> {
    spec: RunSpec,
    p: &'a SystemParams,
    layout: &'a Layout,
    template: &'a ScheduleTemplate,
    rng: ChaCha8Rng,
    qubits: Vec<Qubit>,
    slots: HashMap<(RowKind, usize), usize>,
    factories: Vec<Factory>,
    blocks: Vec<Block>,
    queue: VecDeque<usize>,
    arrivals: Vec<(u64, usize)>,
    dof: Vec<u32>,
    flights: Vec<Flight>,
    events: Vec<(usize, u64, QubitStatus)>,
    bridge_spans: Vec<(u64, u64)>,
    stalled: BTreeSet<u64>,
    magic_wait: BTreeSet<u64>,
    t_delivered: u32,
    end_h: u64,
}

impl<'a> Engine<'a> {
    fn new(
        spec: &RunSpec,
        p: &'a SystemParams,
        layout: &'a Layout,
        template: &'a ScheduleTemplate,
    ) -> Result<Self> {
        let mut qubits = Vec::new();
        let mut slots = HashMap::new();
        for (r, &kind) in layout.rows.iter().enumerate() {
            let role = match kind {
                RowKind::DataA | RowKind::DataB => QubitRole::Data,
                RowKind::Bridge1 | RowKind::Bridge2 => QubitRole::Bridge,
                RowKind::LandAncilla => QubitRole::LandAncilla,
                RowKind::Pg => QubitRole::Pg,
                RowKind::Factory1 | RowKind::Factory2 => continue,
            };
            for c in 0..layout.row_width(kind) {
                slots.insert((kind, c), qubits.len());
                qubits.push(Qubit {
                    role,
                    home: (c as i32, r as i32),
                    last_counted_tick: None,
                });
            }
        }
        for step in template.maj_steps.iter().chain(&template.uma_steps) {
            for m in &step.movers {
                if let Mover::Row(kind) = m {
                    if !layout.has_row(*kind) {
                        return crate::error::domain(format!(
                            "step `{}` moves row {} absent from the layout",
                            step.label,
                            kind.name()
                        ));
                    }
                }
            }
        }
        let factories = layout
            .factory_slots()
            .into_iter()
            .map(|pos| Factory {
                pos,
                phase: FactoryPhase::Ready,
            })
            .collect();
        let w = spec.w;
        let mut blocks = Vec::with_capacity(2 * w);
        for (uma, bits) in [
            (false, (0..w).collect::<Vec<_>>()),
            (true, (0..w).rev().collect()),
        ] {
            for bit in bits {
                blocks.push(Block {
                    bit,
                    uma,
                    next: 0,
                    ready_h: 0,
                    starts: Vec::new(),
                    t_available: 0,
                    done_h: None,
                    bridge_open_h: None,
                });
            }
        }
        Ok(Self {
            spec: *spec,
            p,
            layout,
            template,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            qubits,
            slots,
            factories,
            blocks,
            queue: VecDeque::new(),
            arrivals: Vec::new(),
            dof: Vec::new(),
            flights: Vec::new(),
            events: Vec::new(),
            bridge_spans: Vec::new(),
            stalled: BTreeSet::new(),
            magic_wait: BTreeSet::new(),
            t_delivered: 0,
            end_h: 0,
        })
    }

    fn steps(&self, b: usize) -> &'a [StepEntry] {
        if self.blocks[b].uma {
            &self.template.uma_steps
        } else {
            &self.template.maj_steps
        }
    }

    fn compute_site(&self, bit: usize) -> (i32, i32) {
        let row = self
            .layout
            .row_index(COMPUTE_ROW)
            .expect("layouts carry data rows");
        (bit as i32, row)
    }

    fn run(&mut self) -> Result<()> {
        let depth_h = (2.0 * self.template.depth()).ceil() as u64;
        let patience = 10 * depth_h;
        let mut last_progress = 0u64;
        let mut h = 0u64;
        loop {
            let mut progress = false;
            if h.is_multiple_of(2) {
                progress |= self.factory_tick(h)?;
            }
            for b in 0..self.blocks.len() {
                progress |= self.try_start(b, h)?;
            }
            if progress {
                last_progress = h;
            }
            let finished = self.blocks.iter().all(|b| b.done_h.is_some_and(|d| d <= h));
            if finished && self.arrivals.is_empty() && self.queue.is_empty() {
                self.end_h = self
                    .blocks
                    .iter()
                    .filter_map(|b| b.done_h)
                    .max()
                    .unwrap_or(0);
                return Ok(());
            }
            if h - last_progress > patience {
                let stuck: Vec<String> = self
                    .blocks
                    .iter()
                    .filter(|b| b.done_h.is_none())
                    .take(4)
                    .map(|b| {
                        let steps = if b.uma {
                            &self.template.uma_steps
                        } else {
                            &self.template.maj_steps
                        };
                        format!(
                            "{} bit {} at step `{}`",
                            if b.uma { "UMA" } else { "MAJ" },
                            b.bit,
                            steps.get(b.next).map_or("<end>", |s| s.label.as_str())
                        )
                    })
                    .collect();
                return Err(Error::Deadlock(format!(
                    "no progress for {} ticks after tick {}: {}",
                    patience / 2,
                    last_progress / 2,
                    stuck.join(", ")
                )));
            }
            h += 1;
        }
    }

    /// Deliveries land, factories cultivate, queued T requests are served.
    fn factory_tick(&mut self, h: u64) -> Result<bool> {
        let mut progress = false;
        let mut k = 0;
        while k < self.arrivals.len() {
            if self.arrivals[k].0 <= h {
                let (_, b) = self.arrivals.swap_remove(k);
                self.blocks[b].t_available += 1;
                progress = true;
            } else {
                k += 1;
            }
        }
        let p_success = 1.0 / self.p.cult_mean_ticks;
        for f in &mut self.factories {
            if let FactoryPhase::Delivering { until_h } = f.phase {
                if until_h <= h {
                    f.phase = FactoryPhase::Cultivating;
                }
            }
            if f.phase == FactoryPhase::Cultivating && self.rng.gen::<f64>() < p_success {
                f.phase = FactoryPhase::Ready;
            }
        }
        while let Some(&b) = self.queue.front() {
            let dest = self.compute_site(self.blocks[b].bit);
            let metric = self.p.distance_metric;
            let best = self
                .factories
                .iter()
                .enumerate()
                .filter(|(_, f)| f.phase == FactoryPhase::Ready)
                .map(|(i, f)| (metric.distance(f.pos, dest), f.pos.0, f.pos.1, i))
                .min_by(|x, y| x.partial_cmp(y).expect("finite distances"));
            let Some((spans, _, _, fi)) = best else { break };
            let end_h = h + 2 * u64::from(move_ticks(spans, self.p)?);
            if !self.fits(&[None], h, end_h) {
                self.stalled.insert(h / 2);
                break;
            }
            let q = self.spawn(QubitRole::FactoryProduct, self.factories[fi].pos);
            self.reserve(&[q], h, end_h);
            self.flights.push(Flight {
                qubit: q,
                start_h: h,
                end_h,
                dest,
                spans,
                delivery: true,
            });
            self.factories[fi].phase = FactoryPhase::Delivering { until_h: end_h };
            self.arrivals.push((end_h, b));
            self.queue.pop_front();
            self.t_delivered += 1;
            progress = true;
        }
        Ok(progress)
    }

    fn predecessor(&self, b: usize) -> Option<usize> {
        let w = self.spec.w;
        (!b.is_multiple_of(w)).then(|| b - 1)
    }

    fn try_start(&mut self, b: usize, h: u64) -> Result<bool> {
        let steps = self.steps(b);
        let blk = &self.blocks[b];
        if blk.next >= steps.len() || h < blk.ready_h {
            return Ok(false);
        }
        let k = blk.next;
        let step = &steps[k];
        if let Some(pb) = self.predecessor(b) {
            match self.blocks[pb].starts.get(k) {
                Some(&s) if s + 2 <= h => {}
                _ => return Ok(false),
            }
        }
        if blk.uma && k == 0 {
            let maj = &self.blocks[blk.bit];
            if !maj.done_h.is_some_and(|d| d <= h) {
                return Ok(false);
            }
        }
        if blk.t_available < step.t_states {
            self.magic_wait.insert(h / 2);
            return Ok(false);
        }
        let bit = blk.bit;
        let flight_h = if step.movers.is_empty() {
            0
        } else {
            2 * u64::from(move_ticks(step.spans, self.p)?)
        };
        let movers: Vec<Option<usize>> = step
            .movers
            .iter()
            .map(|m| match m {
                Mover::Row(kind) => Some(self.slots[&(*kind, bit)]),
                Mover::Control => None,
            })
            .collect();
        if flight_h > 0 && !self.fits(&movers, h, h + flight_h) {
            self.stalled.insert(h / 2);
            return Ok(false);
        }

        let site = self.compute_site(bit);
        let mut ids = Vec::with_capacity(movers.len());
        for m in &movers {
            ids.push(match m {
                Some(q) => *q,
                None => {
                    let bridge_row = self.layout.row_index(RowKind::Bridge2).unwrap_or(0);
                    self.spawn(QubitRole::Control, (bit as i32, bridge_row))
                }
            });
        }
        if flight_h > 0 {
            self.reserve(&ids, h, h + flight_h);
            for &q in &ids {
                let dest = match self.qubits[q].role {
                    QubitRole::Control => site,
                    _ => self.qubits[q].home,
                };
                self.flights.push(Flight {
                    qubit: q,
                    start_h: h,
                    end_h: h + flight_h,
                    dest,
                    spans: step.spans,
                    delivery: false,
                });
            }
        }

        let weight_h = (2.0 * step.weight).round() as u64;
        let dur = if step.kind == StepKind::Move {
            weight_h.max(flight_h)
        } else {
            weight_h
        };
        let end = h + dur;
        let t_block: u32 = steps.iter().map(|s| s.t_states).sum();
        let gidney = self.layout.has_row(RowKind::LandAncilla);
        let bridges = [
            self.slots[&(RowKind::Bridge1, bit)],
            self.slots[&(RowKind::Bridge2, bit)],
        ];
        let anc = self.slots.get(&(RowKind::LandAncilla, bit)).copied();

        let blk = &mut self.blocks[b];
        if k == 0 {
            self.queue.extend(std::iter::repeat_n(b, t_block as usize));
        }
        blk.t_available -= step.t_states;
        blk.starts.push(h);
        blk.next += 1;
        blk.ready_h = end;
        match step.bridge {
            Some(BridgeEvent::Init) => {
                blk.bridge_open_h = Some(h);
                for q in bridges {
                    self.events.push((q, h, QubitStatus::Entangled));
                }
            }
            Some(BridgeEvent::Consume) => {
                let open = blk.bridge_open_h.take().unwrap_or(h);
                self.bridge_spans.push((open, end));
                for q in bridges {
                    self.events.push((q, end, QubitStatus::Consumed));
                    self.events.push((q, end + 2, QubitStatus::Reset));
                }
            }
            None => {}
        }
        if step.kind == StepKind::Measure && gidney {
            if let Some(a) = anc {
                self.events.push((a, end, QubitStatus::Consumed));
            }
        }
        if blk.next == steps.len() {
            blk.done_h = Some(end);
            if blk.uma {
                if let Some(a) = anc {
                    self.events.push((a, end, QubitStatus::Reset));
                }
            }
        }
        Ok(true)
    }

    fn spawn(&mut self, role: QubitRole, home: (i32, i32)) -> usize {
        self.qubits.push(Qubit {
            role,
            home,
            last_counted_tick: None,
        });
        self.qubits.len() - 1
    }

    /// `None` entries stand for qubits not yet spawned.
    fn fits(&self, movers: &[Option<usize>], start_h: u64, end_h: u64) -> bool {
        let cap = self.p.dof_cap;
        (start_h / 2..=(end_h - 1) / 2).all(|t| {
            let added = movers
                .iter()
                .filter(|m| match m {
                    Some(q) => self.qubits[*q].last_counted_tick.is_none_or(|l| l < t),
                    None => true,
                })
                .count() as u32;
            self.dof.get(t as usize).copied().unwrap_or(0) + added <= cap
        })
    }

    fn reserve(&mut self, ids: &[usize], start_h: u64, end_h: u64) {
        let last = ((end_h - 1) / 2) as usize;
        if self.dof.len() <= last {
            self.dof.resize(last + 1, 0);
        }
        for &q in ids {
            for t in start_h / 2..=(end_h - 1) / 2 {
                let qb = &mut self.qubits[q];
                if qb.last_counted_tick.is_none_or(|l| l < t) {
                    qb.last_counted_tick = Some(t);
                    self.dof[t as usize] += 1;
                }
            }
        }
    }

    fn n_ticks(&self) -> usize {
        (self.end_h as usize).div_ceil(2).max(self.dof.len())
    }

    fn stats(&self) -> AdderRunStats {
        let n = self.n_ticks();
        let mut dof = self.dof.clone();
        dof.resize(n, 0);
        let peak_dof = dof.iter().copied().max().unwrap_or(0);
        let avg_dof = if n == 0 {
            0.0
        } else {
            dof.iter().map(|&d| f64::from(d)).sum::<f64>() / n as f64
        };
        let mean = |it: &mut dyn Iterator<Item = f64>| {
            let (s, c) = it.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
            if c == 0 {
                0.0
            } else {
                s / c as f64
            }
        };
        let avg_move_spans = mean(&mut self.flights.iter().map(|f| f.spans));
        let factory_spans = mean(&mut self.flights.iter().filter(|f| f.delivery).map(|f| f.spans));

        let mut edges: Vec<(u64, i32)> = self
            .bridge_spans
            .iter()
            .flat_map(|&(a, b)| [(a, 2), (b, -2)])
            .collect();
        edges.sort();
        let mut active = 0i32;
        let mut max_active = 0i32;
        for (_, d) in edges {
            active += d;
            max_active = max_active.max(active);
        }

        AdderRunStats {
            variant: self.spec.variant,
            w: self.spec.w,
            controlled: self.spec.controlled,
            seed: self.spec.seed,
            zone_width: self.layout.zone_width,
            total_ticks: self.end_h as f64 / 2.0,
            footprint_patches: self.layout.total_patches(),
            dof_per_tick: dof,
            peak_dof,
            avg_dof,
            moves_per_bit: self.flights.len() as f64 / self.spec.w as f64,
            avg_move_spans,
            factory_to_compute_avg_spans: factory_spans,
            stalled_ticks: self.stalled.len() as u32,
            magic_wait_ticks: self.magic_wait.len() as u32,
            max_active_bridges: max_active as u32,
            t_states: self.t_delivered,
        }
    }

    fn trace(&self, p: &SystemParams) -> TickTrace {
        let n = self.n_ticks() as u64;
        // Merged in-flight tick runs per qubit: (first, last, dest).
        let mut runs: Vec<Vec<(u64, u64, (i32, i32))>> = vec![Vec::new(); self.qubits.len()];
        for f in &self.flights {
            let (a, b) = (f.start_h / 2, (f.end_h - 1) / 2);
            let r = &mut runs[f.qubit];
            match r.last_mut() {
                Some(last) if a <= last.1 + 1 => {
                    last.1 = last.1.max(b);
                    last.2 = f.dest;
                }
                _ => r.push((a, b, f.dest)),
            }
        }
        let mut events: Vec<Vec<(u64, QubitStatus)>> = vec![Vec::new(); self.qubits.len()];
        for &(q, h, s) in &self.events {
            events[q].push((h / 2, s));
        }
        for e in &mut events {
            e.sort_by_key(|&(t, _)| t);
        }

        let mut frames = Vec::with_capacity(n as usize);
        for t in 0..n {
            let mut qubits = Vec::new();
            for (id, q) in self.qubits.iter().enumerate() {
                let flight = runs[id].iter().find(|r| r.0 <= t && t <= r.1);
                if q.role.is_transient() {
                    let Some(&(a, b, dest)) = runs[id].first() else {
                        continue;
                    };
                    if t < a || t > b + 1 {
                        continue;
                    }
                    let (pos, status) = if t <= b {
                        (
                            q.home,
                            QubitStatus::InFlight {
                                remaining: (b - t + 1) as u32,
                                dest,
                            },
                        )
                    } else {
                        (dest, QubitStatus::Consumed)
                    };
                    qubits.push(QubitRecord {
                        id,
                        role: q.role,
                        col: pos.0,
                        row: pos.1,
                        status,
                    });
                    continue;
                }
                let status = match flight {
                    Some(&(_, b, dest)) => QubitStatus::InFlight {
                        remaining: (b - t + 1) as u32,
                        dest,
                    },
                    None => events[id]
                        .iter()
                        .take_while(|&&(et, _)| et <= t)
                        .last()
                        .map_or(QubitStatus::Idle, |&(_, s)| s),
                };
                qubits.push(QubitRecord {
                    id,
                    role: q.role,
                    col: q.home.0,
                    row: q.home.1,
                    status,
                });
            }
            frames.push(TickFrame { tick: t, qubits });
        }
        TickTrace {
            header: TraceHeader {
                variant: self.spec.variant,
                w: self.spec.w,
                controlled: self.spec.controlled,
                seed: self.spec.seed,
                params_hash: params_hash(p),
            },
            frames,
        }
    }
}
