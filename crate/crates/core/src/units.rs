//! Unit conversions. Internally energy is pJ, time is ns, area is mm².

pub const PJ_PER_J: f64 = 1e12;
pub const NS_PER_S: f64 = 1e9;

pub fn pj_to_j(pj: f64) -> f64 {
    pj / PJ_PER_J
}

pub fn j_to_pj(j: f64) -> f64 {
    j * PJ_PER_J
}

pub fn ns_to_s(ns: f64) -> f64 {
    ns / NS_PER_S
}

pub fn s_to_ns(s: f64) -> f64 {
    s * NS_PER_S
}

/// Events per second given a count and a duration in ns.
pub fn rate_per_s(count: f64, ns: f64) -> f64 {
    count / ns_to_s(ns)
}
