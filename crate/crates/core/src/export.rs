//! CSV and SVG output of records. Every CSV starts with a `# schema=1`
//! comment line followed by the header row; numbers use the shortest
//! round-trip representation so identical runs give identical bytes.

use crate::functionals::FunctionalSample;
use crate::riemann::WaveKind;
use crate::solution::FrontSolution;
use crate::state::{PiecewiseState, State};
use std::fmt::Write as _;
use std::io::{self, Write};

pub const SCHEMA: u32 = 1;

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn state_cols(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn state_vals(u: &State) -> impl Iterator<Item = String> + '_ {
    u.iter().map(|&v| num(v))
}

fn writer<W: Write>(mut w: W, header: &[String]) -> io::Result<csv::Writer<W>> {
    writeln!(w, "# schema={SCHEMA}")?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn write_events<W: Write>(w: W, sol: &FrontSolution) -> io::Result<()> {
    let mut out = writer(w, &strings(&["t", "x", "kind", "action", "a", "b", "outgoing", "np_total"]))?;
    for e in &sol.events {
        out.write_record([
            num(e.t),
            num(e.x),
            e.kind.label().into(),
            e.action.label().into(),
            opt(e.a),
            opt(e.b),
            e.outgoing.to_string(),
            num(e.np_total),
        ])?;
    }
    out.flush()
}

pub fn write_fronts<W: Write>(w: W, sol: &FrontSolution) -> io::Result<()> {
    let mut header = strings(&["front", "family", "kind", "sigma", "gen", "defect", "t0", "x0", "t1", "x1", "speed"]);
    header.extend(state_cols("left_u", sol.n));
    header.extend(state_cols("right_u", sol.n));
    let mut out = writer(w, &header)?;
    for s in &sol.segments {
        let mut row = vec![
            s.front.to_string(),
            opt(s.family.map(|i| i + 1)),
            s.kind.label().into(),
            num(s.sigma),
            s.gen.to_string(),
            num(s.defect),
            num(s.t0),
            num(s.x0),
            num(s.t1),
            num(s.x1),
            num(s.speed),
        ];
        row.extend(state_vals(&sol.seg_left(s)));
        row.extend(state_vals(&sol.seg_right(s)));
        out.write_record(&row)?;
    }
    out.flush()
}

fn piece_rows(out: &mut csv::Writer<impl Write>, tag: &str, ps: &PiecewiseState) -> io::Result<()> {
    for k in 0..ps.states.len() {
        let lo = if k == 0 { ps.a } else { ps.breaks[k - 1] };
        let hi = if k == ps.breaks.len() { ps.b } else { ps.breaks[k] };
        let mut row = vec![tag.to_string(), num(lo), num(hi)];
        row.extend(state_vals(&ps.states[k]));
        out.write_record(&row)?;
    }
    Ok(())
}

/// Both boundary traces as pieces over the evolution interval.
pub fn write_traces<W: Write>(w: W, sol: &FrontSolution) -> io::Result<()> {
    let mut header = strings(&["side", "t0", "t1"]);
    header.extend(state_cols("u", sol.n));
    let mut out = writer(w, &header)?;
    piece_rows(&mut out, "left", &sol.left_trace)?;
    piece_rows(&mut out, "right", &sol.right_trace)?;
    out.flush()
}

/// A piecewise constant function as `x0, x1, u1..un` rows.
pub fn write_pieces<W: Write>(w: W, ps: &PiecewiseState) -> io::Result<()> {
    let mut header = strings(&["x0", "x1"]);
    header.extend(state_cols("u", ps.dim()));
    let mut out = writer(w, &header)?;
    for k in 0..ps.states.len() {
        let lo = if k == 0 { ps.a } else { ps.breaks[k - 1] };
        let hi = if k == ps.breaks.len() { ps.b } else { ps.breaks[k] };
        let mut row = vec![num(lo), num(hi)];
        row.extend(state_vals(&ps.states[k]));
        out.write_record(&row)?;
    }
    out.flush()
}

/// A step function as `t, value1..` rows, one per piece start.
pub fn write_step<W: Write>(w: W, g: &PiecewiseState) -> io::Result<()> {
    let mut header = strings(&["t"]);
    header.extend(state_cols("value", g.dim()));
    let mut out = writer(w, &header)?;
    for k in 0..g.states.len() {
        let t = if k == 0 { g.a } else { g.breaks[k - 1] };
        let mut row = vec![num(t)];
        row.extend(state_vals(&g.states[k]));
        out.write_record(&row)?;
    }
    out.flush()
}

/// Values after each sampled event.
pub fn write_functionals<W: Write>(w: W, samples: &[FunctionalSample]) -> io::Result<()> {
    let mut out = writer(w, &strings(&["t", "event_kind", "V", "Q", "Upsilon", "UpsilonL", "UpsilonR"]))?;
    for s in samples {
        let g = &s.after;
        out.write_record([num(s.t), s.kind.label().into(), num(g.v), num(g.q), num(g.upsilon), num(g.upsilon_l), num(g.upsilon_r)])?;
    }
    out.flush()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Front diagram: `x` horizontal, evolution variable vertical (upwards).
pub fn svg_diagram(sol: &FrontSolution) -> String {
    let (w, h, pad) = (640.0, 640.0, 40.0);
    let sx = |x: f64| pad + x / sol.length * (w - 2.0 * pad);
    let sy = |t: f64| h - pad - t / sol.horizon * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">{}</text>"#, pad, pad - 10.0, sol.system);
    for seg in &sol.segments {
        let (colour, dash) = match seg.kind {
            WaveKind::NonPhysical => ("#444444", r#" stroke-dasharray="6,3""#),
            WaveKind::Zero => ("#888888", r#" stroke-dasharray="1,3""#),
            _ => (PALETTE[seg.family.unwrap_or(0) % PALETTE.len()], ""),
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{colour}" stroke-width="0.8"{dash}/>"#,
            sx(seg.x0),
            sy(seg.t0),
            sx(seg.x1),
            sy(seg.t1)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `key = value` lines.
pub fn report(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_rows_and_schema_line() {
        let g = PiecewiseState::new(0.0, 2.0, vec![0.5], vec![State::from_vec(vec![0.0]), State::from_vec(vec![0.25])]);
        let mut buf = Vec::new();
        write_step(&mut buf, &g).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# schema=1\nt,value1\n0,0\n0.5,0.25\n");
    }

    #[test]
    fn pieces_cover_domain() {
        let ps = PiecewiseState::new(0.0, 1.0, vec![0.3], vec![State::from_vec(vec![1.0, 2.0]), State::from_vec(vec![3.0, 4.0])]);
        let mut buf = Vec::new();
        write_pieces(&mut buf, &ps).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# schema=1\nx0,x1,u1,u2\n0,0.3,1,2\n0.3,1,3,4\n");
    }

    #[test]
    fn report_lines() {
        assert_eq!(report(&[("a", "1".into()), ("b", "x".into())]), "a = 1\nb = x\n");
    }
}
