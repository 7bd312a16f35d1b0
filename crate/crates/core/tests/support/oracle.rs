//! Straightforward re-evaluation of the predictor equations with
//! floating-point ceilings, plus seeded generators of random inputs.

#![allow(dead_code)]

use oadse::{AcceleratorConfig, LayerKind, LayerShape, LoopOrder, MappingChoice, OcuType, TechParams};
use rand::Rng;

pub struct Derived {
    pub nb: f64,
    pub mac_scale: f64,
    pub latency_symbols: f64,
    pub area_mrs: f64,
}

pub fn derived(config: &AcceleratorConfig, tech: &TechParams) -> Derived {
    let n = config.n as f64;
    let b = config.b as f64;
    match config.ocu_type {
        OcuType::R => {
            let nb = (b / tech.n_b as f64).ceil();
            Derived {
                nb,
                mac_scale: 1.0,
                latency_symbols: 1.0,
                area_mrs: n * n * nb,
            }
        }
        OcuType::E => Derived {
            nb: 1.0,
            mac_scale: tech.beta,
            latency_symbols: n * b,
            area_mrs: tech.alpha,
        },
        OcuType::ZSvd => Derived {
            nb: 1.0,
            mac_scale: tech.beta,
            latency_symbols: 1.0,
            area_mrs: tech.alpha * n * (n - 1.0),
        },
        OcuType::ZFft => Derived {
            nb: 1.0,
            mac_scale: tech.beta,
            latency_symbols: 1.0,
            area_mrs: tech.alpha / 4.0 * n * (n - 1.0),
        },
    }
}

struct Dims {
    ef: f64,
    z2c: f64,
    d: f64,
    nb: f64,
    rows: f64,
    cols: f64,
    passes: f64,
}

fn dims(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> Dims {
    let nb = derived(c, t).nb;
    let n = c.n as f64;
    let z2c = (l.z * l.z * l.c) as f64;
    let d = l.d as f64;
    let rows = (z2c / n).ceil();
    let cols = (d * nb / n).ceil();
    Dims {
        ef: (l.e * l.f) as f64,
        z2c,
        d,
        nb,
        rows,
        cols,
        passes: (rows * cols / (c.k_t * c.k_ocu) as f64).ceil(),
    }
}

pub fn working_set(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> (f64, f64, f64) {
    let x = dims(l, c, t);
    let tile_d = c.mapping.tile_d as f64;
    let tile_c = c.mapping.tile_c as f64;
    let glb = match c.mapping.loop_order {
        LoopOrder::OutputStationary => tile_c * x.z2c + tile_d * x.d,
        LoopOrder::InputStationary => x.z2c + tile_c * tile_d * x.d,
    };
    (x.z2c + x.d * x.nb, glb, (l.h * l.w * l.c) as f64 + x.z2c * x.d)
}

pub fn access_energy(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> f64 {
    if l.kind == LayerKind::Pool {
        return 0.0;
    }
    let x = dims(l, c, t);
    let e_input = (t.e_glb_read + t.e_rf_read) * x.ef * x.z2c * x.cols;
    let mut e_psum_rf = (t.e_rf_read + t.e_rf_write) * x.ef * x.d * x.nb * x.rows;
    let mut e_psum_glb = (t.e_glb_read + t.e_glb_write) * x.ef * x.d * x.nb * (x.passes - 1.0).max(0.0);
    let e_output = t.e_glb_write * x.ef * x.d;
    let mut e_weight = 0.0;
    if c.ocu_type == OcuType::E {
        e_weight = (t.e_glb_read + t.e_rf_read) * x.ef * x.d * x.z2c;
        e_psum_glb += (t.e_glb_read + t.e_glb_write) * x.ef * x.d * x.rows;
        e_psum_rf = 0.0;
    }
    e_input + e_weight + e_psum_rf + e_psum_glb + e_output
}

pub fn compute_energy(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> f64 {
    if l.kind == LayerKind::Pool {
        return 0.0;
    }
    let x = dims(l, c, t);
    let scale = derived(c, t).mac_scale;
    (t.e_da + t.e_tx) * x.ef * x.z2c * x.cols
        + (t.e_r + t.e_tune) * scale * x.ef * x.d * x.nb * x.z2c
        + (t.e_rx + t.e_ad + t.e_sa) * x.ef * x.d * x.nb * x.rows
}

pub fn access_latency(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> f64 {
    if l.kind == LayerKind::Pool {
        return 0.0;
    }
    let (q_rf_req, q_glb_req, q_dram) = working_set(l, c, t);
    let ef = (l.e * l.f) as f64;
    let rf_cap = (c.q_rf * c.k_t * c.k_ocu) as f64;
    let glb_cap = (c.q_glb * c.k_t) as f64;
    let q_glb = c.q_glb as f64;
    let clamp0 = |v: f64| if v < 0.0 { 0.0 } else { v };
    let min = |a: f64, b: f64| if a < b { a } else { b };
    ef * (t.l_rf * min(rf_cap / q_rf_req, 1.0)
        + t.l_glb * (clamp0(min(q_glb, q_rf_req - rf_cap)) / q_rf_req + min(glb_cap / q_glb_req, 1.0))
        + t.l_dram
            * (clamp0(min(q_dram, q_rf_req - rf_cap - glb_cap)) / q_rf_req
                + clamp0(min(q_dram, q_glb_req - glb_cap)) / q_glb_req))
}

pub fn compute_latency(l: &LayerShape, c: &AcceleratorConfig, t: &TechParams) -> f64 {
    if l.kind == LayerKind::Pool {
        return 0.0;
    }
    let x = dims(l, c, t);
    x.ef * x.passes * derived(c, t).latency_symbols / t.r_r
}

pub fn area(c: &AcceleratorConfig, t: &TechParams) -> f64 {
    let k = (c.k_t * c.k_ocu) as f64;
    t.a_rf * c.q_rf as f64 * k + t.a_glb * c.q_glb as f64 * c.k_t as f64 + derived(c, t).area_mrs * t.a_r * k
}

pub struct NetworkTotals {
    pub energy_pj: f64,
    pub latency_ns: f64,
    pub throughput: f64,
    pub area: f64,
    pub compute_density: f64,
    pub throughput_per_energy: f64,
    pub fps: f64,
    pub fps_per_watt: f64,
}

pub fn network(layers: &[LayerShape], c: &AcceleratorConfig, t: &TechParams) -> NetworkTotals {
    let mut energy = 0.0;
    let mut latency: f64 = 0.0;
    let mut macs = 0.0;
    for l in layers {
        energy += access_energy(l, c, t) + compute_energy(l, c, t);
        latency = latency.max(access_latency(l, c, t).max(compute_latency(l, c, t)));
        if l.kind != LayerKind::Pool {
            macs += (l.e * l.f * l.z * l.z * l.c * l.d) as f64;
        }
    }
    let throughput = macs / (latency * 1e-9);
    let a = area(c, t);
    let energy_j = energy * 1e-12;
    NetworkTotals {
        energy_pj: energy,
        latency_ns: latency,
        throughput,
        area: a,
        compute_density: throughput / a,
        throughput_per_energy: throughput / energy_j,
        fps: 1.0 / (latency * 1e-9),
        fps_per_watt: 1.0 / energy_j,
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn random_layer<R: Rng>(rng: &mut R) -> LayerShape {
    if rng.random_bool(0.2) {
        return LayerShape::fc(rng.random_range(1..=1024), rng.random_range(1..=1024)).unwrap();
    }
    let z = rng.random_range(1..=7);
    let p = rng.random_range(0..=2);
    let h = rng.random_range(z.max(1)..=64);
    let w = rng.random_range(z.max(1)..=64);
    LayerShape::conv(
        rng.random_range(1..=128),
        rng.random_range(1..=256),
        h,
        w,
        z,
        rng.random_range(1..=3),
        p,
    )
    .unwrap()
}

pub fn random_config<R: Rng>(rng: &mut R) -> AcceleratorConfig {
    let orders = [LoopOrder::OutputStationary, LoopOrder::InputStationary];
    AcceleratorConfig {
        k_t: rng.random_range(1..=32),
        k_ocu: rng.random_range(1..=32),
        ocu_type: OcuType::ALL[rng.random_range(0..4)],
        n: rng.random_range(2..=64),
        q_rf: rng.random_range(1..=4096),
        q_glb: rng.random_range(1..=1 << 20),
        b: rng.random_range(1..=16),
        mapping: MappingChoice {
            loop_order: orders[rng.random_range(0..2)],
            tile_d: rng.random_range(1..=8),
            tile_c: rng.random_range(1..=8),
        },
    }
}

pub fn random_tech<R: Rng>(rng: &mut R) -> TechParams {
    let mut v = || rng.random_range(0.01..10.0);
    let mut t = TechParams {
        e_rf_read: v(),
        e_rf_write: v(),
        e_glb_read: v(),
        e_glb_write: v(),
        e_dram_read: v(),
        e_dram_write: v(),
        l_rf: v(),
        l_glb: v(),
        l_dram: v(),
        e_tx: v(),
        e_rx: v(),
        e_r: v(),
        e_tune: v(),
        e_da: v(),
        e_ad: v(),
        e_sa: v(),
        r_r: v(),
        a_r: v(),
        a_rf: v(),
        a_glb: v(),
        alpha: 1.0,
        beta: 1.0,
        n_b: 1,
    };
    t.alpha = rng.random_range(1.0..60.0);
    t.beta = rng.random_range(1.0..20.0);
    t.n_b = rng.random_range(1..=8);
    t
}
