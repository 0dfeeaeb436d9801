//! Gantt chart rendering of a trace as standalone SVG: one lane per
//! machine, solid boxes for completed runs, hatched boxes for runs voided
//! by a replacement. Floating point appears here only for pixel layout.

use std::fmt::Write;

use crate::model::{SegmentOutcome, Trace};

const LANE_HEIGHT: f64 = 34.0;
const LANE_GAP: f64 = 10.0;
const LEFT_MARGIN: f64 = 60.0;
const TOP_MARGIN: f64 = 16.0;
const WIDTH: f64 = 900.0;

fn color(job_id: u64) -> String {
    // spread hues deterministically by id
    let hue = (job_id.wrapping_mul(47)) % 360;
    format!("hsl({hue}, 62%, 62%)")
}

pub fn render_svg(trace: &Trace) -> String {
    let machines = trace.instance.machines;
    let horizon = trace
        .segments
        .iter()
        .map(|s| s.end)
        .max()
        .map_or(1.0, |t| t.to_f64())
        .max(1e-9);
    let scale = (WIDTH - LEFT_MARGIN - 20.0) / horizon;
    let height = TOP_MARGIN + machines as f64 * (LANE_HEIGHT + LANE_GAP) + 30.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="monospace" font-size="12">"##
    );
    svg.push_str(
        r##"<defs><pattern id="hatch" width="6" height="6" patternTransform="rotate(45)" patternUnits="userSpaceOnUse"><line x1="0" y1="0" x2="0" y2="6" stroke="#555" stroke-width="2"/></pattern></defs>"##,
    );

    for m in 0..machines {
        let y = TOP_MARGIN + m as f64 * (LANE_HEIGHT + LANE_GAP);
        let _ = write!(
            svg,
            r##"<text x="4" y="{:.1}">M{m}</text><line x1="{LEFT_MARGIN}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ccc"/>"##,
            y + LANE_HEIGHT * 0.65,
            y + LANE_HEIGHT,
            WIDTH - 20.0,
            y + LANE_HEIGHT,
        );
    }

    for seg in &trace.segments {
        let x = LEFT_MARGIN + seg.start.to_f64() * scale;
        let w = (seg.end.to_f64() - seg.start.to_f64()) * scale;
        let y = TOP_MARGIN + seg.machine as f64 * (LANE_HEIGHT + LANE_GAP);
        let fill = color(seg.job_id);
        let _ = write!(
            svg,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{LANE_HEIGHT}" fill="{fill}" stroke="#333"/>"##
        );
        if matches!(seg.outcome, SegmentOutcome::Replaced { .. }) {
            let _ = write!(
                svg,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{LANE_HEIGHT}" fill="url(#hatch)" stroke="none"/>"##
            );
        }
        if w > 18.0 {
            let _ = write!(
                svg,
                r##"<text x="{:.2}" y="{:.2}">j{}</text>"##,
                x + 3.0,
                y + LANE_HEIGHT * 0.65,
                seg.job_id
            );
        }
    }

    // time axis labels at segment boundaries
    let mut ticks: Vec<f64> = trace
        .segments
        .iter()
        .flat_map(|s| [s.start.to_f64(), s.end.to_f64()])
        .collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup_by(|a, b| (*a - *b).abs() < horizon / 200.0);
    let axis_y = TOP_MARGIN + machines as f64 * (LANE_HEIGHT + LANE_GAP) + 14.0;
    for t in ticks {
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{axis_y:.1}" fill="#666">{t:.3}</text>"##,
            LEFT_MARGIN + t * scale
        );
    }
    svg.push_str("</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Instance, Job, PolicyConfig};
    use crate::rat::{rat, Rat};

    #[test]
    fn renders_completed_and_replaced_runs() {
        let inst = Instance::new(
            1,
            vec![
                Job::new(1, Rat::ZERO, Rat::ONE),
                Job::new(2, rat(1, 1000), rat(3, 2)),
            ],
        )
        .unwrap();
        let trace = crate::engine::run(&inst, &PolicyConfig::restart_default()).unwrap();
        let svg = render_svg(&trace);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert!(svg.contains("url(#hatch)"));
        assert!(svg.contains(">j2<"));
    }
}
