//! SVG rendering on the hexagonal dual: every occupied node becomes a
//! hexagon cell, flags color cells, and skeleton walks draw as arcs
//! (boundary arcs red, fusion-path arcs blue) with the splitting point
//! marked. Output is deterministic for fixed inputs.

use std::fmt::Write;

use amoebot_core::grid::{Direction, GridCoord};
use amoebot_core::skeleton::Skeleton;
use amoebot_core::AmoebotWorld;

const SCALE: f64 = 24.0;

fn center(c: GridCoord) -> (f64, f64) {
    let x = c.q as f64 * 3f64.sqrt() / 2.0;
    let y = c.q as f64 / 2.0 + c.r as f64;
    (x * SCALE, -y * SCALE)
}

fn hex_corners(cx: f64, cy: f64) -> [(f64, f64); 6] {
    let mut out = [(0.0, 0.0); 6];
    let r = SCALE / 3f64.sqrt();
    for (i, slot) in out.iter_mut().enumerate() {
        let a = std::f64::consts::PI / 3.0 * i as f64;
        *slot = (cx + r * a.cos(), cy + r * a.sin());
    }
    out
}

pub struct SvgDoc {
    body: String,
    min: (f64, f64),
    max: (f64, f64),
}

impl SvgDoc {
    pub fn new() -> Self {
        SvgDoc {
            body: String::new(),
            min: (f64::MAX, f64::MAX),
            max: (f64::MIN, f64::MIN),
        }
    }

    fn touch(&mut self, p: (f64, f64)) {
        self.min.0 = self.min.0.min(p.0 - SCALE);
        self.min.1 = self.min.1.min(p.1 - SCALE);
        self.max.0 = self.max.0.max(p.0 + SCALE);
        self.max.1 = self.max.1.max(p.1 + SCALE);
    }

    pub fn cells(&mut self, world: &AmoebotWorld, fill: impl Fn(usize) -> &'static str) {
        for i in 0..world.st.len() {
            let c = world.st.coord(i);
            let (cx, cy) = center(c);
            self.touch((cx, cy));
            let pts: Vec<String> = hex_corners(cx, cy)
                .iter()
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let _ = writeln!(
                self.body,
                r##"<polygon points="{}" fill="{}" stroke="#555" stroke-width="0.8"/>"##,
                pts.join(" "),
                fill(i)
            );
        }
    }

    /// Draw a skeleton walk: one arc per visit from the bond midpoint of the
    /// arrival to the bond midpoint of the departure, through the cell.
    pub fn skeleton(&mut self, world: &AmoebotWorld, sk: &Skeleton) {
        let (mut a, mut v) = sk.split;
        let total: usize = sk.visits.iter().map(|x| x.len()).sum();
        for step in 0..total {
            let visit = sk.visits[a][v];
            let c = world.st.coord(a);
            let (cx, cy) = center(c);
            let out_dir = Direction::main(visit.out_dir as usize);
            let nb = c.neighbor(out_dir).unwrap();
            let (nx, ny) = center(nb);
            let (mx, my) = ((cx + nx) / 2.0, (cy + ny) / 2.0);
            // Paths run straight through interiors; color those blue.
            let interior = world.st.degree(a) == 6;
            let color = if interior { "#1f5fd0" } else { "#c62828" };
            let _ = writeln!(
                self.body,
                r#"<line x1="{cx:.2}" y1="{cy:.2}" x2="{mx:.2}" y2="{my:.2}" stroke="{color}" stroke-width="2.2"/>"#,
            );
            let _ = writeln!(
                self.body,
                r#"<line x1="{mx:.2}" y1="{my:.2}" x2="{nx:.2}" y2="{ny:.2}" stroke="{color}" stroke-width="2.2"/>"#,
            );
            if step == 0 {
                let _ = writeln!(
                    self.body,
                    r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="4.5" fill="none" stroke="#111" stroke-width="1.8"/>"##,
                );
            }
            if world.st.len() == 1 {
                break;
            }
            let next = world.st.neighbor_index(a, visit.out_dir as usize).unwrap();
            let want = ((visit.out_dir + 3) % 6, !visit.out_plus);
            let nv = sk.visits[next]
                .iter()
                .position(|x| (x.in_dir, x.in_plus) == want)
                .unwrap();
            a = next;
            v = nv;
        }
    }

    /// Highlight tree edges.
    pub fn edges(&mut self, world: &AmoebotWorld, edges: &[(u32, u32)]) {
        for &(x, y) in edges {
            let (ax, ay) = center(world.st.coord(x as usize));
            let (bx, by) = center(world.st.coord(y as usize));
            let _ = writeln!(
                self.body,
                r##"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="#00695c" stroke-width="2.6"/>"##,
            );
        }
    }

    pub fn finish(self) -> String {
        let (w, h) = (self.max.0 - self.min.0, self.max.1 - self.min.1);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.2} {:.2} {:.2} {:.2}\">\n{}</svg>\n",
            self.min.0, self.min.1, w, h, self.body
        )
    }
}
