use std::f64::consts::TAU;

use clap::ValueEnum;
use lbr_core::braid::{classify_bands, min_pair_gap, sweep, ClassLabel};
use lbr_core::ep::{duality_scan, scan_transitions};
use lbr_core::fcs::{pk, pn, rates, suggested_n_max};
use lbr_core::reduce::slowest_comparison;
use lbr_core::retrieve::{reconstruct, FitWindow, RetrievalSource};
use lbr_core::trajectories::{simulate_histogram, Sampler};

use crate::config::{RetrievalInput, RunConfig};
use crate::error::NumericalError;
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Classify,
    Epscan,
    Duality,
    Dynamics,
    Pn,
    Simulate,
    Retrieve,
    Reduce,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Classify => "classify",
            Command::Epscan => "epscan",
            Command::Duality => "duality",
            Command::Dynamics => "dynamics",
            Command::Pn => "pn",
            Command::Simulate => "simulate",
            Command::Retrieve => "retrieve",
            Command::Reduce => "reduce",
        }
    }

    pub fn run(&self, c: &RunConfig) -> Result<Table, NumericalError> {
        match self {
            Command::Spectrum => spectrum(c),
            Command::Classify => classify_point(c),
            Command::Epscan => epscan(c),
            Command::Duality => duality(c),
            Command::Dynamics => dynamics(c),
            Command::Pn => histogram(c),
            Command::Simulate => simulate(c),
            Command::Retrieve => retrieve(c),
            Command::Reduce => reduce(c),
        }
    }
}

pub const SPECTRUM_HEADER: &[&str] = &["k", "band", "re_lambda", "im_lambda"];
pub const CLASSIFY_HEADER: &[&str] = &["omega_d", "nu_total", "nu_12", "nu_13", "nu_23", "word", "class"];
pub const EPSCAN_HEADER: &[&str] = &["omega_d", "k", "gap", "order", "transition"];
pub const DUALITY_HEADER: &[&str] = &["gamma_d", "delta_omega_k0", "delta_omega_kpi"];
pub const DYNAMICS_HEADER: &[&str] = &["t", "t_over_tcl", "re_pk", "im_pk"];
pub const PN_HEADER: &[&str] = &["n", "p_n"];
pub const HISTOGRAM_HEADER: &[&str] = &["t", "n", "count"];
pub const RECORDS_HEADER: &[&str] = &["trajectory_id", "jump_time"];
pub const RETRIEVE_HEADER: &[&str] = &[
    "k",
    "re_l1",
    "im_l1",
    "re_l2",
    "im_l2",
    "err_re_l1",
    "err_im_l1",
    "err_re_l2",
    "err_im_l2",
    "window_lo",
    "window_hi",
    "verdict",
];
pub const REDUCE_HEADER: &[&str] =
    &["omega_d", "z", "re_full", "im_full", "re_reduced", "im_reduced", "relative_error"];

fn spectrum(c: &RunConfig) -> Result<Table, NumericalError> {
    let n = c.grid.k_points;
    let bands = sweep(&c.params(), n)?;
    let mut table = Table::new(SPECTRUM_HEADER);
    let mut next = 0;
    for (i, &k) in bands.k_grid.iter().enumerate() {
        if next < n && k == TAU * next as f64 / n as f64 {
            for (a, strand) in bands.strands.iter().enumerate() {
                table.push(vec![k.into(), (a + 1).into(), strand[i].re.into(), strand[i].im.into()]);
            }
            next += 1;
        }
    }
    Ok(table)
}

/// Tracked bands closer than this fraction of `Γ_B` mark an exceptional point.
const EP_PROXIMITY: f64 = 5e-3;

fn classify_point(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let bands = sweep(&p, c.grid.k_points)?;
    let closest = (0..bands.len()).map(|i| min_pair_gap(&bands.values_at(i))).fold(f64::INFINITY, f64::min);
    let cls = classify_bands(&bands)?;
    if cls.class_label == ClassLabel::Unknown || closest < EP_PROXIMITY * rates(&p).gamma_b {
        return Err(NumericalError::UnknownClass(c.model.omega_d));
    }
    let pair = |a, b| cls.nu_ab(a, b).map_or(Cell::Text(String::new()), Cell::from);
    let mut table = Table::new(CLASSIFY_HEADER);
    table.push(vec![
        c.model.omega_d.into(),
        cls.nu_total().into(),
        pair(0, 1),
        pair(0, 2),
        pair(1, 2),
        cls.word.to_string().into(),
        cls.class_label.to_string().into(),
    ]);
    Ok(table)
}

fn epscan(c: &RunConfig) -> Result<Table, NumericalError> {
    let [lo, hi] = c.grid.omega_range;
    let mut table = Table::new(EPSCAN_HEADER);
    for r in scan_transitions(&c.params(), (lo, hi))? {
        table.push(vec![
            r.omega_d_star.into(),
            r.k_star.into(),
            r.gap.into(),
            r.order.into(),
            r.transition_label().into(),
        ]);
    }
    Ok(table)
}

fn duality(c: &RunConfig) -> Result<Table, NumericalError> {
    let mut table = Table::new(DUALITY_HEADER);
    for r in duality_scan(&c.params(), &c.grid.gamma_d_values)? {
        table.push(vec![r.gamma_d.into(), r.delta_omega_k0.into(), r.delta_omega_kpi.into()]);
    }
    Ok(table)
}

fn dynamics(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let t_cl = rates(&p).t_cl;
    let times = c.grid.time_grid.times(c.time_scale());
    let series = pk(&p, c.grid.k, &c.model.initial_state, &times)?;
    let mut table = Table::new(DYNAMICS_HEADER);
    for (t, v) in series.times.iter().zip(&series.values) {
        table.push(vec![(*t).into(), (t / t_cl).into(), v.re.into(), v.im.into()]);
    }
    Ok(table)
}

fn histogram(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let time = c.grid.snapshot * c.time_scale();
    let n_max = match c.grid.n_max {
        Some(n) => n,
        None => suggested_n_max(&p, &c.model.initial_state, time)?,
    };
    let h = pn(&p, &c.model.initial_state, time, n_max)?;
    let mut table = Table::new(PN_HEADER);
    for (n, q) in h.probs.iter().enumerate() {
        table.push(vec![n.into(), (*q).into()]);
    }
    Ok(table)
}

fn simulate(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let s = &c.simulate;
    let times = c.grid.time_grid.times(c.time_scale());
    if s.records {
        let t_max = times.iter().cloned().fold(0.0, f64::max) + s.dt;
        let sampler = Sampler::new(&p, &c.model.initial_state, t_max, s.dt)?;
        let mut table = Table::new(RECORDS_HEADER);
        for r in sampler.ensemble(s.seed, s.n_trajectories) {
            for t in r.jump_times {
                table.push(vec![r.trajectory.into(), t.into()]);
            }
        }
        return Ok(table);
    }
    let h = simulate_histogram(&p, &c.model.initial_state, &times, s.dt, s.seed, s.n_trajectories)?;
    let mut table = Table::new(HISTOGRAM_HEADER);
    for (j, t) in h.times.iter().enumerate() {
        for (n, counts) in h.counts.iter().enumerate() {
            table.push(vec![(*t).into(), n.into(), counts[j].into()]);
        }
    }
    Ok(table)
}

fn retrieve(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let scale = c.time_scale();
    let times = c.retrieve.time_grid.times(scale);
    let window = FitWindow::new(c.retrieve.window[0] * scale, c.retrieve.window[1] * scale);
    let result = match c.retrieve.source {
        RetrievalInput::Exact => {
            let source = RetrievalSource::Exact { params: &p, initial: &c.model.initial_state, times: &times };
            reconstruct(source, &c.retrieve.k_list, window)?
        }
        RetrievalInput::Sampled => {
            let s = &c.simulate;
            let h = simulate_histogram(&p, &c.model.initial_state, &times, s.dt, s.seed, s.n_trajectories)?;
            reconstruct(RetrievalSource::Sampled(&h), &c.retrieve.k_list, window)?
        }
    };
    let mut table = Table::new(RETRIEVE_HEADER);
    for e in &result.eigen {
        table.push(vec![
            e.k.into(),
            e.lambda1.re.into(),
            e.lambda1.im.into(),
            e.lambda2.re.into(),
            e.lambda2.im.into(),
            e.err_lambda1.re.into(),
            e.err_lambda1.im.into(),
            e.err_lambda2.re.into(),
            e.err_lambda2.im.into(),
            e.fit_window.0.into(),
            e.fit_window.1.into(),
            result.verdict.to_string().into(),
        ]);
    }
    Ok(table)
}

fn reduce(c: &RunConfig) -> Result<Table, NumericalError> {
    let p = c.params();
    let [lo, hi] = c.reduce.omega_range;
    let n = c.reduce.omega_points;
    let omegas: Vec<f64> = match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    };
    let mut table = Table::new(REDUCE_HEADER);
    for &z in &c.reduce.z_values {
        for &omega in &omegas {
            let s = slowest_comparison(&p, omega, z)?;
            table.push(vec![
                omega.into(),
                z.into(),
                s.full.re.into(),
                s.full.im.into(),
                s.reduced.re.into(),
                s.reduced.im.into(),
                s.relative_error().into(),
            ]);
        }
    }
    Ok(table)
}
