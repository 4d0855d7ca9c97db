// SPDX-License-Identifier: Apache-2.0
//! Mode dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tfsr_core::estimate::{
    bootstrap, improvement_ratio, mle_pudtai, sample_counts, write_report_csv,
};
use tfsr_core::fft;
use tfsr_core::fisher::{
    f_di, f_di_noisy, f_pudtai, f_pudtai_ports, fisher_curves, fisher_numeric, write_curves_csv,
    TrinomialPorts,
};
use tfsr_core::model::port_probabilities;
use tfsr_core::output::{csv_row, fmt_f64};
use tfsr_core::processor::{
    calibrate_ports, lock_dark_fringe, phase_averaged_powers, pudtai_pipeline,
    pudtai_pipeline_traced,
};
use tfsr_core::signals::synthesize_two_source;
use tfsr_core::{Axis, DeviceCalibration, PortCalibration, ProcessorParams, TwoSourceSpec};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

/// Step of the finite differences behind the trinomial column.
const D_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub verbose_stages: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

struct Table {
    csv: String,
    extra: Value,
}

impl Table {
    fn from_rows(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut csv = format!("{header}\n");
        for r in rows {
            let cells: Vec<String> = r.into_iter().map(fmt_f64).collect();
            csv.push_str(&csv_row(&cells));
            csv.push('\n');
        }
        Table {
            csv,
            extra: Value::Null,
        }
    }

    fn with_extra(mut self, extra: Value) -> Self {
        self.extra = extra;
        self
    }
}

pub fn run(cfg: &RunConfig, opts: &Options) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let table = match cfg.mode {
        Mode::Synthesize => synthesize(cfg)?,
        Mode::Pipeline => pipeline(cfg, opts)?,
        Mode::Probabilities => probabilities(cfg)?,
        Mode::Fisher => fisher(cfg)?,
        Mode::Estimate => estimate(cfg)?,
        Mode::Bootstrap => boot(cfg)?,
        Mode::Sweep => sweep(cfg)?,
        Mode::Compare => compare(cfg)?,
    };
    write_outputs(cfg, &table)
}

fn write_outputs(cfg: &RunConfig, table: &Table) -> Result<RunSummary, CliError> {
    let dir = &cfg.output_path;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = format!("{}.csv", cfg.mode);
    let csv = dir.join(&name);
    fs::write(&csv, &table.csv).map_err(|e| CliError::io(&csv, e))?;
    let mut lines = table.csv.lines();
    let columns = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect();
    let output = OutputFile {
        file: name,
        columns,
        rows: lines.count(),
    };
    let manifest = json!({
        "tool": "tfsr",
        "version": env!("CARGO_PKG_VERSION"),
        "mode": cfg.mode,
        "seed": cfg.seed,
        "config": cfg,
        "outputs": [output],
        "results": table.extra,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(RunSummary {
        csv,
        manifest: path,
    })
}

fn axis(cfg: &RunConfig) -> Result<Axis, CliError> {
    Ok(Axis::centered(
        cfg.params.grid.points,
        cfg.params.grid.half_span,
    )?)
}

fn synthesize(cfg: &RunConfig) -> Result<Table, CliError> {
    let field = synthesize_two_source(&cfg.params.source, &axis(cfg)?)?;
    let spec = fft::forward(&field)?;
    let rows = (0..field.len()).map(|j| {
        let (u, s) = (field.samples[j], spec.samples[j]);
        vec![field.coord(j), u.re, u.im, spec.coord(j), s.re, s.im]
    });
    Ok(Table::from_rows(
        "t,re,im,omega,spectrum_re,spectrum_im",
        rows,
    ))
}

fn pipeline(cfg: &RunConfig, opts: &Options) -> Result<Table, CliError> {
    let p = &cfg.params;
    let axis = axis(cfg)?;
    let gaussian = p.source.gaussian;
    let mut params = p.processor;
    if p.pipeline.lock_dark_fringe {
        params.theta = lock_dark_fringe(&params, &axis, &gaussian)?;
        log::info!("locked theta = {}", params.theta);
    }
    let pc = if p.pipeline.calibrate {
        calibrate_ports(&params, &axis, &gaussian)?
    } else {
        PortCalibration {
            minus: 1.0,
            plus: 1.0,
        }
    };
    if opts.verbose_stages {
        trace_stages(&p.source, &axis, &params)?;
    }
    let model = DeviceCalibration::ideal().with_aperture(params.aperture.t_a_sigma);
    let mut rows = Vec::new();
    for eps in p.sweep.epsilons()? {
        let spec = TwoSourceSpec {
            epsilon: eps,
            ..p.source
        };
        let (m, pl) = phase_averaged_powers(&spec, &axis, p.pipeline.phases, |s| {
            Ok(pudtai_pipeline(s, &params)?.powers())
        })?;
        let want = port_probabilities(eps, &model)?;
        rows.push(vec![
            eps,
            m / pc.minus,
            pl / pc.plus,
            want.p_minus,
            want.p_plus,
        ]);
    }
    Ok(Table::from_rows(
        "epsilon,p_minus_sim,p_plus_sim,p_minus_model,p_plus_model",
        rows,
    )
    .with_extra(json!({
        "theta": params.theta,
        "port_calibration": pc,
    })))
}

fn trace_stages(
    source: &TwoSourceSpec,
    axis: &Axis,
    params: &ProcessorParams,
) -> Result<(), CliError> {
    let signal = synthesize_two_source(source, axis)?;
    let (ports, stages) = pudtai_pipeline_traced(&signal, params)?;
    for s in &stages {
        eprintln!(
            "stage {:<16} domain={:<10} points={:<7} norm={}",
            s.name,
            s.field.domain,
            s.field.len(),
            fmt_f64(s.field.norm_sqr())
        );
    }
    let (m, p) = ports.powers();
    eprintln!(
        "stage ports            minus={} plus={}",
        fmt_f64(m),
        fmt_f64(p)
    );
    Ok(())
}

fn probabilities(cfg: &RunConfig) -> Result<Table, CliError> {
    let cal = &cfg.params.calibration;
    let rows = cfg
        .params
        .sweep
        .epsilons()?
        .into_iter()
        .map(|e| {
            let p = port_probabilities(e, cal)?;
            Ok(vec![e, p.p_minus, p.p_plus, p.p_cross])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::from_rows("epsilon,p_minus,p_plus,p_cross", rows))
}

fn fisher(cfg: &RunConfig) -> Result<Table, CliError> {
    let cal = cfg.params.calibration;
    let rows = cfg
        .params
        .sweep
        .epsilons()?
        .into_iter()
        .map(|e| {
            let (m, p) = f_pudtai_ports(e, &cal)?;
            let tri = fisher_numeric(&TrinomialPorts(cal), e, D_EPS)?;
            Ok(vec![e, m, p, m + p, tri])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::from_rows(
        "epsilon,F_minus,F_plus,F_PuDTAI,F_trinomial",
        rows,
    ))
}

fn estimate(cfg: &RunConfig) -> Result<Table, CliError> {
    let (eps, cal) = (cfg.params.source.epsilon, &cfg.params.calibration);
    let n = cfg.params.estimate.photons_per_set;
    let c = sample_counts(eps, cal, n, cfg.seed)?;
    let hat = mle_pudtai(&c, cal)?;
    let mut csv = String::from("epsilon_true,n_total,n_minus,n_plus,n_cross,epsilon_hat\n");
    csv.push_str(&csv_row(&[
        fmt_f64(eps),
        c.n_total.to_string(),
        c.n_minus.to_string(),
        c.n_plus.to_string(),
        c.n_cross().to_string(),
        fmt_f64(hat),
    ]));
    csv.push('\n');
    Ok(Table {
        csv,
        extra: Value::Null,
    })
}

fn boot(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut rows = Vec::new();
    for &eps in &p.estimate.epsilons {
        let r = bootstrap(
            eps,
            &p.calibration,
            p.estimate.photons_per_set,
            p.estimate.n_boot,
            cfg.seed,
        )?;
        rows.push((
            r,
            f_pudtai(eps, &p.calibration)?,
            f_di_noisy(eps, &p.di_noise)?,
        ));
    }
    let mut buf = Vec::new();
    write_report_csv(&rows, &mut buf).map_err(|e| CliError::io(Path::new("<memory>"), e))?;
    let sem: Vec<f64> = rows.iter().map(|(r, _, _)| r.sem()).collect();
    Ok(Table {
        csv: String::from_utf8(buf).expect("ascii csv"),
        extra: json!({ "sem": sem }),
    })
}

fn sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let rows = p
        .sweep
        .epsilons()?
        .into_iter()
        .map(|e| {
            let f = f_pudtai(e, &p.calibration)?;
            let fq = f_di_noisy(e, &p.di_noise)?;
            let ratio = improvement_ratio(e, &p.calibration, &p.di_noise)?;
            Ok(vec![e, f, f_di(e), fq, f / f_di(e), ratio])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::from_rows(
        "epsilon,F_PuDTAI,F_DI,F_QMTI,ratio_di,improvement_ratio",
        rows,
    ))
}

fn compare(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let curves = fisher_curves(&p.sweep.epsilons()?, &p.calibration, &p.di_noise)?;
    let mut buf = Vec::new();
    write_curves_csv(&curves, &mut buf).map_err(|e| CliError::io(Path::new("<memory>"), e))?;
    Ok(Table {
        csv: String::from_utf8(buf).expect("ascii csv"),
        extra: Value::Null,
    })
}
