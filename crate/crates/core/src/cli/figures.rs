use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{csv, ensemble_csv, trajectory_csv, Sink};
use super::GridSpec;
use crate::analysis::{
    analysis_grid, detect_bursts, detect_plateaus, localization_metric, run_ensemble, BurstParams,
    BurstReport, PlateauParams, PlateauReport, DEFAULT_REALIZATIONS, MIN_POINTS_PER_UNIT,
};
use crate::chain::{coupling_for, ChainConfig, DisorderSpec, Fluctuation};
use crate::dynamics::{long_time_populations, propagate, steady_state, StateVector, Trajectory};
use crate::error::Result;

pub const FIGURES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];
const FIG5_SEED: u64 = 7;
const CHIRAL_RATIO: f64 = 0.9;
const LOCALIZATION_TIMES: (f64, f64) = (100.0, 1e4);

pub fn seed(name: &str) -> Option<u64> {
    (name == "fig5").then_some(FIG5_SEED)
}

struct Curve {
    label: String,
    chain: ChainConfig,
    disorder: DisorderSpec,
    grid: GridSpec,
}

impl Curve {
    fn new(label: String, chain: ChainConfig, disorder: DisorderSpec, grid: GridSpec) -> Curve {
        Curve {
            label,
            chain,
            disorder,
            grid,
        }
    }

    fn run(&self) -> Result<Trajectory> {
        let v = coupling_for(&self.chain, &self.disorder, 0)?;
        let init = StateVector::uniform(self.chain.n_atoms);
        match self.grid {
            GridSpec::Logarithmic { horizon, .. } => {
                long_time_populations(&v, &init, horizon, true)
            }
            _ => propagate(&v, &init, &self.grid.build()?),
        }
    }

    fn meta(&self, base: &[String]) -> Result<Vec<String>> {
        let mut meta = base.to_vec();
        meta.push(format!("curve: {}", self.label));
        meta.push(format!("chain: {}", serde_json::to_string(&self.chain)?));
        meta.push(format!(
            "disorder: {}",
            serde_json::to_string(&self.disorder)?
        ));
        meta.push(format!("grid: {}", serde_json::to_string(&self.grid)?));
        Ok(meta)
    }
}

fn linear() -> GridSpec {
    GridSpec::Linear {
        t_end: 20.0,
        n_points: 2000,
    }
}

fn analysis() -> GridSpec {
    GridSpec::Step {
        t_end: analysis_grid().end(),
        dt: 1.0 / MIN_POINTS_PER_UNIT,
    }
}

fn xi_label(xi_over_pi: f64) -> String {
    format!("xi{xi_over_pi}pi")
}

fn single_site(site: usize, shift_fraction: f64) -> DisorderSpec {
    DisorderSpec::SingleSite {
        site,
        shift_fraction,
    }
}

/// Gnuplot panel: every series is `(file, y column expression, title)`.
struct Panel {
    name: String,
    log_x: bool,
    log_y: bool,
    ylabel: &'static str,
    series: Vec<(String, String, String)>,
}

fn gnuplot(panels: &[Panel]) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset xlabel 'gamma t'\n",
    );
    for p in panels {
        let _ = writeln!(s, "\nset output '{}.png'", p.name);
        let _ = writeln!(s, "set ylabel '{}'", p.ylabel);
        let _ = writeln!(s, "{}set logscale x", if p.log_x { "" } else { "un" });
        let _ = writeln!(s, "{}set logscale y", if p.log_y { "" } else { "un" });
        let parts: Vec<String> = p
            .series
            .iter()
            .map(|(file, col, title)| format!("'{file}' using 1:{col} with lines title '{title}'"))
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    s
}

fn population_panel(name: &str, file: &str, n: usize, log_x: bool) -> Panel {
    let mut series: Vec<(String, String, String)> = (1..=n)
        .map(|m| (file.to_string(), format!("{}", m + 1), format!("P_{m}")))
        .collect();
    series.push((file.to_string(), format!("{}", n + 2), "P_tot".into()));
    Panel {
        name: name.into(),
        log_x,
        log_y: false,
        ylabel: "population",
        series,
    }
}

fn total_panel(name: &str, curves: &[&Curve]) -> Panel {
    Panel {
        name: name.into(),
        log_x: false,
        log_y: true,
        ylabel: "P_tot",
        series: curves
            .iter()
            .map(|c| {
                (
                    format!("{}.csv", c.label),
                    format!("{}", c.chain.n_atoms + 2),
                    c.label.clone(),
                )
            })
            .collect(),
    }
}

fn run_curves(curves: &[Curve]) -> Result<Vec<Trajectory>> {
    curves.par_iter().map(Curve::run).collect()
}

fn write_curves(
    curves: &[Curve],
    trajs: &[Trajectory],
    meta: &[String],
    sink: &mut Sink,
) -> Result<()> {
    for (c, t) in curves.iter().zip(trajs) {
        sink.file(
            &format!("{}.csv", c.label),
            &trajectory_csv(&c.meta(meta)?, t),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Labeled<T> {
    curve: String,
    count: usize,
    report: T,
}

fn plateau_reports(
    curves: &[Curve],
    trajs: &[Trajectory],
    params: PlateauParams,
) -> Result<Vec<Labeled<PlateauReport>>> {
    curves
        .iter()
        .zip(trajs)
        .map(|(c, t)| {
            let report = detect_plateaus(&t.times, &t.p_tot, &t.intensity, params)?;
            Ok(Labeled {
                curve: c.label.clone(),
                count: report.count(),
                report,
            })
        })
        .collect()
}

fn fig2(meta: &[String], sink: &mut Sink) -> Result<Vec<Panel>> {
    let mut curves = Vec::new();
    for n in [2, 3] {
        for x in [0.0, 1.0] {
            let chain =
                ChainConfig::uniform(n, super::config::xi_from_multiple_of_pi(x)?, 0.0, 1.0);
            curves.push(Curve::new(
                format!("n{n}_{}", xi_label(x)),
                chain,
                DisorderSpec::None,
                linear(),
            ));
        }
    }
    let trajs = run_curves(&curves)?;
    write_curves(&curves, &trajs, meta, sink)?;
    Ok(curves
        .iter()
        .map(|c| {
            population_panel(
                &c.label,
                &format!("{}.csv", c.label),
                c.chain.n_atoms,
                false,
            )
        })
        .collect())
}

fn fig3(meta: &[String], sink: &mut Sink) -> Result<Vec<Panel>> {
    let ratios = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut curves = Vec::new();
    for x in [0.0, 1.0] {
        for n in [2, 3] {
            for g in ratios {
                let chain =
                    ChainConfig::uniform(n, super::config::xi_from_multiple_of_pi(x)?, g, 1.0);
                curves.push(Curve::new(
                    format!("{}_n{n}_gl{g:.1}", xi_label(x)),
                    chain,
                    DisorderSpec::None,
                    linear(),
                ));
            }
        }
    }
    let trajs = run_curves(&curves)?;
    write_curves(&curves, &trajs, meta, sink)?;

    let sizes: Vec<usize> = (2..=30).collect();
    let limits: Vec<f64> = sizes
        .par_iter()
        .map(|&n| {
            let v = coupling_for(
                &ChainConfig::uniform(n, PI, 1.0, 1.0),
                &DisorderSpec::None,
                0,
            )?;
            Ok(steady_state(&v, &StateVector::uniform(n))?
                .state
                .populations()[0])
        })
        .collect::<Result<_>>()?;
    let header: Vec<String> = ["N", "P_1_inf", "inv_N"].map(String::from).to_vec();
    let rows = sizes
        .iter()
        .zip(&limits)
        .map(|(&n, &p)| vec![n as f64, p, 1.0 / n as f64]);
    let mut m = meta.to_vec();
    m.push("steady-state P_1 at xi = pi, gamma_left = gamma_right".into());
    sink.file("p1_steady_state.csv", &csv(&m, &header, rows))?;

    let mut panels = Vec::new();
    for x in [0.0, 1.0] {
        for n in [2, 3] {
            let group: Vec<&Curve> = curves
                .iter()
                .filter(|c| c.chain.n_atoms == n && c.label.starts_with(&xi_label(x)))
                .collect();
            panels.push(total_panel(&format!("{}_n{n}", xi_label(x)), &group));
        }
    }
    panels.push(Panel {
        name: "p1_steady_state".into(),
        log_x: false,
        log_y: false,
        ylabel: "P_1(inf)",
        series: vec![
            ("p1_steady_state.csv".into(), "2".into(), "P_1(inf)".into()),
            ("p1_steady_state.csv".into(), "3".into(), "1/N".into()),
        ],
    });
    Ok(panels)
}

fn fig4(meta: &[String], plateau: PlateauParams, sink: &mut Sink) -> Result<Vec<Panel>> {
    let sizes = [2, 3, 4, 5, 6, 7, 10, 11];
    let mut curves = Vec::new();
    for g in [0.0, CHIRAL_RATIO] {
        for n in sizes {
            curves.push(Curve::new(
                format!("gl{g:.1}_n{n}"),
                ChainConfig::uniform(n, PI, g, 1.0),
                DisorderSpec::None,
                analysis(),
            ));
        }
    }
    let trajs = run_curves(&curves)?;
    write_curves(&curves, &trajs, meta, sink)?;
    let reports = plateau_reports(&curves, &trajs, plateau)?;
    sink.file("plateaus.json", &serde_json::to_string_pretty(&reports)?)?;
    Ok([0.0, CHIRAL_RATIO]
        .iter()
        .map(|g| {
            let prefix = format!("gl{g:.1}_");
            let group: Vec<&Curve> = curves
                .iter()
                .filter(|c| c.label.starts_with(&prefix))
                .collect();
            total_panel(&format!("gl{g:.1}"), &group)
        })
        .collect())
}

fn fig5(meta: &[String], burst: BurstParams, sink: &mut Sink) -> Result<Vec<Panel>> {
    let curves: Vec<Curve> = [4, 5]
        .iter()
        .map(|&n| {
            Curve::new(
                format!("intensity_n{n}"),
                ChainConfig::uniform(n, PI, CHIRAL_RATIO, 1.0),
                DisorderSpec::None,
                analysis(),
            )
        })
        .collect();
    let trajs = run_curves(&curves)?;
    write_curves(&curves, &trajs, meta, sink)?;

    let mut bursts: Vec<Labeled<BurstReport>> = Vec::new();
    for (c, t) in curves.iter().zip(&trajs) {
        let report = detect_bursts(&t.times, &t.intensity, burst)?;
        bursts.push(Labeled {
            curve: c.label.clone(),
            count: report.count(),
            report,
        });
    }
    let chain = ChainConfig::uniform(5, PI, CHIRAL_RATIO, 1.0);
    let grid = analysis().build()?;
    let mut panels = vec![Panel {
        name: "intensity".into(),
        log_x: false,
        log_y: true,
        ylabel: "I_tot",
        series: curves
            .iter()
            .map(|c| {
                (
                    format!("{}.csv", c.label),
                    format!("{}", c.chain.n_atoms + 3),
                    c.label.clone(),
                )
            })
            .collect(),
    }];
    for (tag, width) in [("0.5pct", 0.005), ("1pct", 0.01)] {
        let disorder = DisorderSpec::Ensemble {
            fluctuation_fraction: width,
            n_realizations: DEFAULT_REALIZATIONS,
            seed: FIG5_SEED,
            distribution: Fluctuation::Gaussian,
        };
        let ens = run_ensemble(&chain, &disorder, &grid)?;
        let label = format!("ensemble_n5_{tag}");
        let mut m = meta.to_vec();
        m.push(format!("curve: {label}"));
        m.push(format!("chain: {}", serde_json::to_string(&chain)?));
        m.push(format!("disorder: {}", serde_json::to_string(&disorder)?));
        m.push(format!(
            "realizations used: {}, skipped: {}",
            ens.n_realizations, ens.n_skipped
        ));
        sink.file(&format!("{label}.csv"), &ensemble_csv(&m, &ens))?;
        let report = detect_bursts(&ens.times, &ens.mean_i_tot, burst)?;
        bursts.push(Labeled {
            curve: label.clone(),
            count: report.count(),
            report,
        });
        let file = format!("{label}.csv");
        panels.push(Panel {
            name: label,
            log_x: false,
            log_y: true,
            ylabel: "I_tot",
            series: vec![
                (file.clone(), "4".into(), "mean".into()),
                (file.clone(), "($4+$5)".into(), "mean + std".into()),
                (file, "($4-$5)".into(), "mean - std".into()),
            ],
        });
    }
    sink.file("bursts.json", &serde_json::to_string_pretty(&bursts)?)?;
    Ok(panels)
}

fn fig6(meta: &[String], plateau: PlateauParams, sink: &mut Sink) -> Result<Vec<Panel>> {
    let cases = [("centre_n5", 5, 3), ("second_n5", 5, 2), ("edge_n4", 4, 1)];
    let curves: Vec<Curve> = cases
        .iter()
        .map(|&(label, n, site)| {
            Curve::new(
                label.into(),
                ChainConfig::uniform(n, PI, CHIRAL_RATIO, 1.0),
                single_site(site, 0.05),
                analysis(),
            )
        })
        .collect();
    let trajs = run_curves(&curves)?;
    write_curves(&curves, &trajs, meta, sink)?;
    let reports = plateau_reports(&curves, &trajs, plateau)?;
    sink.file("plateaus.json", &serde_json::to_string_pretty(&reports)?)?;
    Ok(curves
        .iter()
        .map(|c| {
            let mut p = population_panel(
                &c.label,
                &format!("{}.csv", c.label),
                c.chain.n_atoms,
                false,
            );
            p.log_y = true;
            p
        })
        .collect())
}

fn fig7(meta: &[String], sink: &mut Sink) -> Result<Vec<Panel>> {
    let curve = Curve::new(
        "centre_n5_xi0.75pi".into(),
        ChainConfig::uniform(5, 0.75 * PI, CHIRAL_RATIO, 1.0),
        single_site(3, 0.3),
        GridSpec::Logarithmic {
            horizon: LOCALIZATION_TIMES.1,
            per_decade: 400,
        },
    );
    let traj = curve.run()?;
    write_curves(
        std::slice::from_ref(&curve),
        std::slice::from_ref(&traj),
        meta,
        sink,
    )?;
    let loc = localization_metric(&traj, LOCALIZATION_TIMES.0, LOCALIZATION_TIMES.1)?;
    let report = serde_json::json!({
        "curve": curve.label,
        "localization": loc,
        "share_sites_2_3": loc.share(&[2, 3]),
    });
    sink.file("localization.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(vec![population_panel(
        &curve.label,
        &format!("{}.csv", curve.label),
        5,
        true,
    )])
}

pub fn run(
    name: &str,
    plateau: PlateauParams,
    burst: BurstParams,
    meta: &[String],
    sink: &mut Sink,
) -> Result<()> {
    let mut meta = meta.to_vec();
    meta.push(format!(
        "plateau detector: {}",
        serde_json::to_string(&plateau)?
    ));
    meta.push(format!(
        "burst detector: {}",
        serde_json::to_string(&burst)?
    ));
    let panels = match name {
        "fig2" => fig2(&meta, sink)?,
        "fig3" => fig3(&meta, sink)?,
        "fig4" => fig4(&meta, plateau, sink)?,
        "fig5" => fig5(&meta, burst, sink)?,
        "fig6" => fig6(&meta, plateau, sink)?,
        "fig7" => fig7(&meta, sink)?,
        _ => unreachable!("figure names are validated"),
    };
    sink.file("plot.gp", &gnuplot(&panels))
}
