//! Reference computations that share no code with the library.
#![allow(dead_code)]

use dashu_ratio::RBig;
use opquad::symfunc::SymFunc;

/// Gauss–Legendre nodes and weights on [0, 1], Newton iteration on P_n.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-17 {
                break;
            }
        }
        nodes.push((1.0 - x) / 2.0);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and |Kronrod − Gauss| on [a, b].
pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive bisection until each piece's GK error estimate is within its share of `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (value, err) = gk15(f, a, b);
    if err <= tol || (b - a) < 1e-6 {
        return (value, err);
    }
    let m = 0.5 * (a + b);
    let (l, el) = adaptive(f, a, m, tol / 2.0);
    let (r, er) = adaptive(f, m, b, tol / 2.0);
    (l + r, el + er)
}

/// `∫₀¹∫₀¹ f(x, y) dx dy` by nested adaptive Gauss–Kronrod; returns (value, error estimate).
pub fn adaptive_2d(f: &dyn Fn(f64, f64) -> f64, tol: f64) -> (f64, f64) {
    let inner_err = std::cell::Cell::new(0.0f64);
    let outer = |y: f64| {
        let (v, e) = adaptive(&|x| f(x, y), 0.0, 1.0, tol / 4.0);
        inner_err.set(inner_err.get().max(e));
        v
    };
    let (v, e) = adaptive(&outer, 0.0, 1.0, tol / 2.0);
    (v, e + inner_err.get())
}

/// Exact `∫_{[0,1]^d} a·g·b` expanded term by term, with no collecting of products.
pub fn unit_box_triple(a: &SymFunc, g: Option<&SymFunc>, b: &SymFunc) -> RBig {
    let one = SymFunc::one(a.dim());
    let g = g.unwrap_or(&one);
    let mut acc = RBig::ZERO;
    for ta in a.terms() {
        for tg in g.terms() {
            for tb in b.terms() {
                let mut term = &ta.coefficient * &tg.coefficient * &tb.coefficient;
                for k in 0..a.dim() {
                    let e = &ta.exponents[k] + &tg.exponents[k] + &tb.exponents[k] + RBig::ONE;
                    term /= e;
                }
                acc += term;
            }
        }
    }
    acc
}
