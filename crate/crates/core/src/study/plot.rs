//! Single-panel SVG of one impulse response with its bands.

use crate::error::{Error, Result};

use super::report::IrfRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub variant: String,
    pub impulse: String,
    pub response: String,
    pub theta: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Picks one (impulse, response) pair out of an IRF table.
pub fn panel_from_table(variant: &str, rows: &[IrfRow], impulse: &str, response: &str) -> Result<Panel> {
    for name in [impulse, response] {
        if !rows.iter().any(|r| r.response == name) {
            return Err(Error::UnknownName(name.to_string()));
        }
    }
    let mut pts: Vec<&IrfRow> = rows.iter().filter(|r| r.impulse == impulse && r.response == response).collect();
    pts.sort_by_key(|r| r.h);
    if pts.iter().enumerate().any(|(i, r)| r.h != i) {
        return Err(Error::InvalidArgument(format!("horizons for {response} <- {impulse} are not 0..H")));
    }
    Ok(Panel {
        variant: variant.to_string(),
        impulse: impulse.to_string(),
        response: response.to_string(),
        theta: pts.iter().map(|r| r.theta).collect(),
        lower: pts.iter().map(|r| r.lower).collect(),
        upper: pts.iter().map(|r| r.upper).collect(),
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

pub fn render_svg(p: &Panel) -> String {
    let horizon = p.theta.len().saturating_sub(1).max(1) as f64;
    let finite = p.theta.iter().chain(&p.lower).chain(&p.upper).copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((0.0f64, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo <= 0.0 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |h: usize| LEFT + (W - LEFT - RIGHT) * h as f64 / horizon;
    let y = |v: f64| {
        let v = if v.is_finite() { v } else if v > 0.0 { hi } else { lo };
        TOP + (H - TOP - BOTTOM) * (hi - v) / (hi - lo)
    };
    let line = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(h, &v)| format!("{:.3},{:.3}", x(h), y(v)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    s.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!("  <rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "  <rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n",
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">Response of {} to a {} shock ({})</text>\n",
        W / 2.0,
        escape(&p.response),
        escape(&p.impulse),
        escape(&p.variant)
    ));
    s.push_str(&format!(
        "  <line class=\"zero\" x1=\"{LEFT}\" y1=\"{:.3}\" x2=\"{}\" y2=\"{:.3}\" stroke=\"#888888\" stroke-width=\"1\"/>\n",
        y(0.0),
        W - RIGHT,
        y(0.0)
    ));
    s.push_str(&format!(
        "  <polyline class=\"point\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"{}\"/>\n",
        line(&p.theta)
    ));
    for (class, vals) in [("lower", &p.lower), ("upper", &p.upper)] {
        s.push_str(&format!(
            "  <polyline class=\"{class}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"2,3\" points=\"{}\"/>\n",
            line(vals)
        ));
    }
    let n = horizon as usize;
    let step = (n / 6).max(1);
    for h in (0..=n).step_by(step) {
        s.push_str(&format!(
            "  <text x=\"{:.3}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{h}</text>\n",
            x(h),
            H - BOTTOM + 16.0
        ));
    }
    for v in [lo + pad, 0.0, hi - pad] {
        s.push_str(&format!(
            "  <text x=\"{}\" y=\"{:.3}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            LEFT - 6.0,
            y(v) + 4.0,
            format_tick(v)
        ));
    }
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">horizon (days)</text>\n",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 12.0
    ));
    s.push_str(&format!(
        "  <text x=\"18\" y=\"{0:.3}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {0:.3})\">{1}</text>\n",
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(&p.response)
    ));
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.3e}")
    }
}
