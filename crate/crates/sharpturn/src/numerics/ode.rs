//! Adaptive Dormand–Prince 8(5,3) integration with event localisation.

use super::{bracket_root, RootConfig};
use crate::{Error, Result};

const EVENT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest allowed step; `None` means the whole span.
    pub max_step: Option<f64>,
    pub event_tolerance: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            event_tolerance: 1e-10,
        }
    }
}

/// Scalar function of `(t, y)` whose sign changes are detected.
pub struct Event<'a> {
    func: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
    terminal: bool,
    direction: i8,
}

impl<'a> Event<'a> {
    pub fn new(func: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        Event {
            func: Box::new(func),
            terminal: false,
            direction: 0,
        }
    }

    /// Stop the integration at the first occurrence.
    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    /// Only fire on crossings from negative to positive (`1`) or from
    /// positive to negative (`-1`).
    pub fn direction(mut self, d: i8) -> Self {
        self.direction = d;
        self
    }

    fn eval(&self, t: f64, y: &[f64]) -> f64 {
        (self.func)(t, y)
    }

    fn fires(&self, g0: f64, g1: f64) -> bool {
        if g0 == 0.0 || !(g0 * g1 <= 0.0) {
            return false;
        }
        match self.direction {
            1 => g0 < 0.0,
            -1 => g0 > 0.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub events: Vec<EventRecord>,
    /// Index of the terminal event that stopped the run, if any.
    pub terminated_by: Option<usize>,
}

impl OdeSolution {
    pub fn final_state(&self) -> (f64, &[f64]) {
        (*self.t.last().unwrap(), self.y.last().unwrap())
    }
}

const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

const A: [[f64; 12]; 12] = [
    [0.0; 12],
    [
        5.26001519587677318785587544488e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.97250569845378994544595329183e-2,
        5.91751709536136983633785987549e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.95875854768068491816892993775e-2,
        0.0,
        8.87627564304205475450678981324e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.41365134159266685502369798665e-1,
        0.0,
        -8.84549479328286085344864962717e-1,
        9.24834003261792003115737966543e-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7037037037037037037037037037e-2,
        0.0,
        0.0,
        1.70828608729473871279604482173e-1,
        1.25467687566822425016691814123e-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7109375e-2,
        0.0,
        0.0,
        1.70252211019544039314978060272e-1,
        6.02165389804559606850219397283e-2,
        -1.7578125e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70920001185047927108779319836e-2,
        0.0,
        0.0,
        1.70383925712239993810214054705e-1,
        1.07262030446373284651809199168e-1,
        -1.53194377486244017527936158236e-2,
        8.27378916381402288758473766002e-3,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.24110958716075717114429577812e-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825,
        -8.68219346841726006818189891453e-1,
        2.75920996994467083049415600797e1,
        2.01540675504778934086186788979e1,
        -4.34898841810699588477366255144e1,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.77662536438264365890433908527e-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468,
        -5.90290826836842996371446475743e-1,
        2.12300514481811942347288949897e1,
        1.52792336328824235832596922938e1,
        -3.32882109689848629194453265587e1,
        -2.03312017085086261358222928593e-2,
        0.0,
        0.0,
        0.0,
    ],
    [
        -9.3714243008598732571704021658e-1,
        0.0,
        0.0,
        5.18637242884406370830023853209,
        1.09143734899672957818500254654,
        -8.14978701074692612513997267357,
        -1.85200656599969598641566180701e1,
        2.27394870993505042818970056734e1,
        2.49360555267965238987089396762,
        -3.0467644718982195003823669022,
        0.0,
        0.0,
    ],
    [
        2.27331014751653820792359768449,
        0.0,
        0.0,
        -1.05344954667372501984066689879e1,
        -2.00087205822486249909675718444,
        -1.79589318631187989172765950534e1,
        2.79488845294199600508499808837e1,
        -2.85899827713502369474065508674,
        -8.87285693353062954433549289258,
        1.23605671757943030647266201528e1,
        6.43392746015763530355970484046e-1,
        0.0,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363e-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

const E3_CORR: [(usize, f64); 3] = [
    (0, 0.244094488188976377952755905512),
    (8, 0.733846688281611857341361741547),
    (11, 0.220588235294117647058823529412e-1),
];

const E5: [f64; 12] = [
    0.1312004499419488073250102996e-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e+1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
];

struct Stepper<'f, F> {
    field: &'f F,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<'f, F: Fn(f64, &[f64], &mut [f64])> Stepper<'f, F> {
    fn new(field: &'f F, n: usize) -> Self {
        Stepper {
            field,
            k: vec![vec![0.0; n]; 12],
            tmp: vec![0.0; n],
        }
    }

    /// One explicit step of size `h` from `(t, y)` with `f0 = f(t, y)`.
    /// Returns the new state and the embedded error estimates (err5, err3).
    fn step(&mut self, t: f64, y: &[f64], f0: &[f64], h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = y.len();
        self.k[0].copy_from_slice(f0);
        for s in 1..12 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            (self.field)(t + C[s] * h, &self.tmp, &mut tail[0]);
        }
        let mut y_new = vec![0.0; n];
        let mut e5 = vec![0.0; n];
        let mut e3 = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            let mut a5 = 0.0;
            for j in 0..12 {
                acc += B[j] * self.k[j][i];
                a5 += E5[j] * self.k[j][i];
            }
            let mut a3 = acc;
            for &(j, c) in &E3_CORR {
                a3 -= c * self.k[j][i];
            }
            y_new[i] = y[i] + h * acc;
            e5[i] = a5;
            e3[i] = a3;
        }
        (y_new, e5, e3)
    }

    fn advance(&mut self, t: f64, y: &[f64], h: f64) -> Vec<f64> {
        let mut f0 = vec![0.0; y.len()];
        (self.field)(t, y, &mut f0);
        self.step(t, y, &f0, h).0
    }
}

/// Integrates `y' = field(t, y)` over `t_span` (forward or backward).
///
/// Every accepted step is stored. Sign changes of the event functions are
/// located by re-stepping from the start of the step, so event states carry
/// the full eighth-order accuracy.
pub fn integrate_ode<F>(
    field: F,
    initial: &[f64],
    t_span: (f64, f64),
    events: &[Event],
    cfg: &OdeConfig,
) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0 && cfg.event_tolerance > 0.0) {
        return Err(Error::InvalidInput(format!("bad OdeConfig {cfg:?}")));
    }
    let n = initial.len();
    let (t0, t1) = t_span;
    let span = (t1 - t0).abs();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let max_step = cfg.max_step.unwrap_or(span).min(span).max(f64::MIN_POSITIVE);

    let mut stepper = Stepper::new(&field, n);
    let mut t = t0;
    let mut y = initial.to_vec();
    let mut f = vec![0.0; n];
    field(t, &y, &mut f);

    let mut sol = OdeSolution {
        t: vec![t],
        y: vec![y.clone()],
        events: Vec::new(),
        terminated_by: None,
    };
    if span == 0.0 {
        return Ok(sol);
    }
    let mut g: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();

    let norm = |v: &[f64], scale: &[f64]| -> f64 { v.iter().zip(scale).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() };
    let mut h = {
        let scale: Vec<f64> = y.iter().map(|v| cfg.abs_tol + v.abs() * cfg.rel_tol).collect();
        let d0 = norm(&y, &scale).sqrt();
        let d1 = norm(&f, &scale).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(max_step)
    };

    let min_step = 1e-14 * span;
    while dir * (t1 - t) > 0.0 {
        if h < min_step {
            return Err(Error::StepUnderflow { t, h });
        }
        let mut step = h.min(max_step);
        if step > (t1 - t).abs() {
            step = (t1 - t).abs();
        }
        let hs = dir * step;
        let (y_new, e5, e3) = stepper.step(t, &y, &f, hs);
        let scale: Vec<f64> = y
            .iter()
            .zip(&y_new)
            .map(|(a, b)| cfg.abs_tol + a.abs().max(b.abs()) * cfg.rel_tol)
            .collect();
        let n5 = norm(&e5, &scale);
        let n3 = norm(&e3, &scale);
        let err = if n5 == 0.0 && n3 == 0.0 {
            0.0
        } else {
            step * n5 / (n5 + 0.01 * n3).sqrt()
        };
        if !err.is_finite() || err > 1.0 {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-1.0 / 8.0)).max(0.2)
            } else {
                0.2
            };
            h = step * factor;
            continue;
        }

        let t_new = if step == (t1 - t).abs() { t1 } else { t + hs };
        let g_new: Vec<f64> = events.iter().map(|e| e.eval(t_new, &y_new)).collect();
        let mut fired: Vec<EventRecord> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            if !ev.fires(g[i], g_new[i]) {
                continue;
            }
            let (ty, yy) = {
                let rc = RootConfig {
                    residual_tolerance: cfg.event_tolerance,
                    max_iterations: 200,
                    jacobian_step: 1e-7,
                };
                let theta = bracket_root(
                    |th| {
                        let ys = stepper.advance(t, &y, th * hs);
                        ev.eval(t + th * hs, &ys)
                    },
                    0.0,
                    1.0,
                    &rc,
                )
                .unwrap_or(1.0);
                (t + theta * hs, stepper.advance(t, &y, theta * hs))
            };
            fired.push(EventRecord { index: i, t: ty, y: yy });
        }
        fired.sort_by(|a, b| (dir * a.t).total_cmp(&(dir * b.t)));
        if let Some(pos) = fired.iter().position(|r| events[r.index].terminal) {
            fired.truncate(pos + 1);
            let last = fired.last().unwrap().clone();
            sol.events.extend(fired);
            sol.t.push(last.t);
            sol.y.push(last.y);
            sol.terminated_by = Some(last.index);
            return Ok(sol);
        }
        sol.events.extend(fired);
        if sol.events.len() > EVENT_LIMIT {
            return Err(Error::EventStorm { limit: EVENT_LIMIT });
        }

        t = t_new;
        y = y_new;
        field(t, &y, &mut f);
        g = g_new;
        sol.t.push(t);
        sol.y.push(y.clone());

        let factor = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-1.0 / 8.0)).min(10.0)
        };
        h = step * factor;
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], d: &mut [f64]) {
        d[0] = y[1];
        d[1] = -y[0];
    }

    #[test]
    fn harmonic_period() {
        let tau = 2.0 * std::f64::consts::PI;
        let s = integrate_ode(oscillator, &[1.0, 0.0], (0.0, tau), &[], &OdeConfig::default()).unwrap();
        let (t, y) = s.final_state();
        assert_eq!(t, tau);
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn energy_drift_over_hundred_periods() {
        let span = 200.0 * std::f64::consts::PI;
        let s = integrate_ode(oscillator, &[1.0, 0.0], (0.0, span), &[], &OdeConfig::default()).unwrap();
        let drift =
            s.y.iter()
                .map(|y| ((y[0] * y[0] + y[1] * y[1]) - 1.0).abs())
                .fold(0.0, f64::max);
        assert!(drift <= 1e-9, "drift {drift:e}");
    }

    #[test]
    fn backward_integration() {
        let s = integrate_ode(oscillator, &[1.0, 0.0], (0.0, -1.0), &[], &OdeConfig::default()).unwrap();
        let (t, y) = s.final_state();
        assert_eq!(t, -1.0);
        assert!((y[0] - 1f64.cos()).abs() < 1e-10 && (y[1] - 1f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn free_particle_event() {
        let ev = [Event::new(|_, y: &[f64]| y[0] - 1.0)];
        let s = integrate_ode(
            |_, y, d| {
                d[0] = y[1];
                d[1] = 0.0;
            },
            &[0.0, 1.0],
            (0.0, 3.0),
            &ev,
            &OdeConfig::default(),
        )
        .unwrap();
        assert_eq!(s.events.len(), 1);
        assert!((s.events[0].t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn terminal_event_stops() {
        let ev = [Event::new(|_, y: &[f64]| y[0]).terminal().direction(-1)];
        let s = integrate_ode(oscillator, &[1.0, 0.0], (0.0, 10.0), &ev, &OdeConfig::default()).unwrap();
        assert_eq!(s.terminated_by, Some(0));
        let (t, y) = s.final_state();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(y[0].abs() < 1e-9);
    }

    #[test]
    fn events_are_counted_in_both_directions() {
        let ev = [Event::new(|_, y: &[f64]| y[0])];
        let s = integrate_ode(oscillator, &[1.0, 0.0], (0.0, 20.0), &ev, &OdeConfig::default()).unwrap();
        // zeros of cos t in (0, 20): π/2 + kπ, k = 0..5
        assert_eq!(s.events.len(), 6);
    }
}
