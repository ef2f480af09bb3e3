//! Hand-emitted SVG line charts for sweep output: no timestamps, no
//! generated ids, fixed coordinate formatting, so output bytes depend only
//! on the data.

use taskmarket::assignment::Executor;
use taskmarket::cutoff::SweepTable;
use taskmarket::model::{EconomyConfig, OccupationKind};

const WIDTH: f64 = 860.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 42.0;

fn color(executor: Executor) -> &'static str {
    match executor {
        Executor::Labor(OccupationKind::Phys) => "#d62728",
        Executor::Labor(OccupationKind::Aux) => "#ff7f0e",
        Executor::Labor(OccupationKind::Tech) => "#2ca02c",
        Executor::Labor(OccupationKind::Prof) => "#1f77b4",
        Executor::Labor(OccupationKind::Mgmt) => "#9467bd",
        Executor::Digital => "#7f7f7f",
    }
}

struct Panel {
    title: String,
    y_label: String,
    /// (legend label, color, points (theta, value) split into runs at gaps)
    series: Vec<(String, &'static str, Vec<Vec<(f64, f64)>>)>,
}

fn split_runs(points: Vec<(f64, Option<f64>)>) -> Vec<Vec<(f64, f64)>> {
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for (x, y) in points {
        match y {
            Some(y) => current.push((x, y)),
            None => {
                if !current.is_empty() {
                    runs.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

fn render_panel(out: &mut String, panel: &Panel, offset_y: f64, x_range: (f64, f64)) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let (x_lo, x_hi) = x_range;
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let to_x = |v: f64| MARGIN_LEFT + (v - x_lo) / x_span * plot_w;
    let to_y = |v: f64| offset_y + MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"15\" \
         font-weight=\"bold\">{}</text>\n",
        MARGIN_LEFT,
        offset_y + 20.0,
        panel.title
    ));

    // Frame.
    out.push_str(&format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT,
        offset_y + MARGIN_TOP,
        plot_w,
        plot_h
    ));

    // Y ticks at 0, 0.25, 0.5, 0.75, 1.
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let y = to_y(v);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\" \
             stroke-width=\"0.5\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{v:.2}</text>\n",
            MARGIN_LEFT - 6.0,
            y + 4.0
        ));
    }

    // X ticks: six evenly spaced.
    for i in 0..=5 {
        let v = x_lo + x_span * i as f64 / 5.0;
        let x = to_x(v);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\" \
             stroke-width=\"1\"/>\n",
            offset_y + MARGIN_TOP + plot_h,
            offset_y + MARGIN_TOP + plot_h + 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{v:.2}</text>\n",
            offset_y + MARGIN_TOP + plot_h + 17.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">theta</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        offset_y + MARGIN_TOP + plot_h + 33.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">{}</text>\n",
        16.0,
        offset_y + MARGIN_TOP + plot_h / 2.0,
        16.0,
        offset_y + MARGIN_TOP + plot_h / 2.0,
        panel.y_label
    ));

    // Series lines and legend.
    let mut legend_y = offset_y + MARGIN_TOP + 8.0;
    for (label, color, runs) in &panel.series {
        for run in runs {
            if run.len() == 1 {
                let (x, y) = run[0];
                out.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                    to_x(x),
                    to_y(y)
                ));
                continue;
            }
            let points: Vec<String> = run
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", to_x(*x), to_y(*y)))
                .collect();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                points.join(" ")
            ));
        }
        let lx = MARGIN_LEFT + plot_w + 12.0;
        out.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" \
             stroke=\"{color}\" stroke-width=\"2.5\"/>\n",
            lx + 18.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            lx + 24.0,
            legend_y + 4.0
        ));
        legend_y += 16.0;
    }
}

/// Two stacked panels: occupation cutoffs against capability, then hiring
/// shares plus the digital task mass.
pub fn sweep_svg(econ: &EconomyConfig, table: &SweepTable) -> String {
    let kinds: Vec<OccupationKind> = econ.occupations_ordered().iter().map(|o| o.kind).collect();
    let thetas: Vec<f64> = table.rows.iter().map(|r| r.theta).collect();
    let x_range = (
        thetas.first().copied().unwrap_or(0.0),
        thetas.last().copied().unwrap_or(1.0),
    );

    let cutoff_series = kinds
        .iter()
        .filter_map(|kind| {
            let points: Vec<(f64, Option<f64>)> = table
                .rows
                .iter()
                .map(|row| (row.theta, row.cutoffs.get(kind).copied()))
                .collect();
            let runs = split_runs(points);
            if runs.is_empty() {
                None
            } else {
                Some((
                    format!("cutoff {kind}"),
                    color(Executor::Labor(*kind)),
                    runs,
                ))
            }
        })
        .collect();

    let mut share_series: Vec<(String, &'static str, Vec<Vec<(f64, f64)>>)> = kinds
        .iter()
        .map(|kind| {
            let points: Vec<(f64, Option<f64>)> = table
                .rows
                .iter()
                .map(|row| (row.theta, row.shares.get(kind).copied()))
                .collect();
            (
                format!("share {kind}"),
                color(Executor::Labor(*kind)),
                split_runs(points),
            )
        })
        .collect();
    share_series.push((
        "digital mass".to_string(),
        color(Executor::Digital),
        split_runs(
            table
                .rows
                .iter()
                .map(|row| {
                    (
                        row.theta,
                        row.masses.get(&Executor::Digital).copied(),
                    )
                })
                .collect(),
        ),
    ));

    let panels = [
        Panel {
            title: "Task cutoffs by digital capability".to_string(),
            y_label: "cutoff z*".to_string(),
            series: cutoff_series,
        },
        Panel {
            title: "Hiring shares and digital task mass".to_string(),
            y_label: "share / mass".to_string(),
            series: share_series,
        },
    ];

    let total_height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{total_height:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {total_height:.0}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, i as f64 * PANEL_HEIGHT, x_range);
    }
    out.push_str("</svg>\n");
    out
}
