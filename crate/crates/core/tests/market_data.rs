mod common;

use chaos_oracles::{integrate, normal_pdf};
use chaos_rates::benchmarks::svensson::SvenssonParams;
use chaos_rates::market::{
    bootstrap_curve, cap_price, cap_strike, implied_rate, price_to_yield, read_snapshot, strip_caplet_vols,
    synthesize_snapshot, write_snapshot, yield_to_price, BondQuote, BootstrapOptions, CapVol, CurveInstrument,
    IngestOptions, InstrumentKind, SynthConfig,
};
use chaos_rates::pricing::Curve;
use chaos_rates::Model;
use proptest::prelude::*;

fn inst(kind: InstrumentKind, start: f64, end: f64, rate: f64) -> CurveInstrument {
    CurveInstrument { kind, start, end, rate }
}

#[test]
fn yield_of_a_seventy_cent_ten_year_strip() {
    let y = price_to_yield(&BondQuote::strip(10.0, 0.7).unwrap()).unwrap();
    assert!((y - 0.035_667_494_393_873_24).abs() < 1e-16);
    assert_eq!(price_to_yield(&BondQuote::strip(3.0, 1.0).unwrap()).unwrap(), 0.0);
    assert!(price_to_yield(&BondQuote { maturity: 0.0, price: 0.9, duration: 0.0 }).is_err());
}

#[test]
fn single_deposit_is_simple_rate() {
    let c = bootstrap_curve(&[inst(InstrumentKind::Deposit, 0.0, 0.5, 0.04)], &[], &[], &BootstrapOptions::default()).unwrap();
    assert!((c.df(0.5) - 1.0 / 1.02).abs() < 1e-16);
}

#[test]
fn flat_par_swaps_give_geometric_discounts() {
    let r = 0.05;
    let swaps: Vec<CurveInstrument> = (1..=10).map(|n| inst(InstrumentKind::Swap, 0.0, n as f64, r)).collect();
    let c = bootstrap_curve(&[], &[], &swaps, &BootstrapOptions { swap_frequency: 1 }).unwrap();
    // par condition solved forwards: P_n = (1 - r sum_{i<n} P_i) / (1 + r)
    let mut acc = 0.0;
    for n in 1..=10 {
        let p = (1.0 - r * acc) / (1.0 + r);
        acc += p;
        assert!((c.df(n as f64) - p).abs() < 1e-13, "n={n}");
        assert!((c.zero_yield(n as f64) - (1.0 + r).ln()).abs() < 1e-12);
    }
}

#[test]
fn bootstrap_rejects_empty_and_overlapping_input() {
    let opts = BootstrapOptions::default();
    assert!(bootstrap_curve(&[], &[], &[], &opts).is_err());
    let err = bootstrap_curve(
        &[inst(InstrumentKind::Deposit, 0.0, 1.0, 0.04)],
        &[inst(InstrumentKind::Future, 0.0, 1.0, 0.05)],
        &[],
        &opts,
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("Deposit") && err.contains("Future"), "{err}");
}

fn cdf(x: f64) -> f64 {
    0.5 + integrate(normal_pdf, 0.0, x, 1e-15, 1e-17)
}

fn black_oracle(k: f64, f: f64, v: f64) -> f64 {
    let d1 = (f / k).ln() / v + 0.5 * v;
    f * cdf(d1) - k * cdf(d1 - v)
}

fn curve() -> SvenssonParams {
    SvenssonParams::new(0.05, -0.01, 0.01, 0.0, 0.5, 1.0).unwrap()
}

/// Cap price from first principles; `vol(t)` is the vol of the caplet fixing at `t`.
fn cap_oracle(c: &SvenssonParams, maturity: f64, vol: impl Fn(f64) -> f64) -> f64 {
    let n = (maturity / 0.25).round() as usize;
    let annuity: f64 = (2..=n).map(|k| 0.25 * c.discount(k as f64 * 0.25)).sum();
    let k = (c.discount(0.25) - c.discount(maturity)) / annuity;
    (1..n)
        .map(|i| {
            let (t, m) = (i as f64 * 0.25, (i + 1) as f64 * 0.25);
            let f = (c.discount(t) / c.discount(m) - 1.0) / 0.25;
            0.25 * c.discount(m) * black_oracle(k, f, vol(t) * t.sqrt())
        })
        .sum()
}

#[test]
fn two_cap_strip_matches_bisection_oracle() {
    let c = curve();
    let caps = [CapVol { maturity: 1.0, vol: 0.22 }, CapVol { maturity: 2.0, vol: 0.19 }];
    let out = strip_caplet_vols(&caps, &c, 0.25).unwrap();
    let target = cap_oracle(&c, 2.0, |_| 0.19);
    let (mut lo, mut hi) = (0.01, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cap_oracle(&c, 2.0, |t| if t < 0.9 { 0.22 } else { mid }) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let want = 0.5 * (lo + hi);
    assert_eq!(out.len(), 7);
    assert!(out[..3].iter().all(|s| s.vol == 0.22));
    for s in &out[3..] {
        assert!((s.vol - want).abs() < 1e-9, "{} vs {want}", s.vol);
    }
    assert!(out[0].excluded_from_calibration && out[1].excluded_from_calibration && !out[2].excluded_from_calibration);
}

#[test]
fn synthetic_snapshots_are_deterministic_and_round_trip() {
    let spec = chaos_rates::ChaosSpec::third_one_var(common::e(&[1.0], 0.15), common::e(&[0.05], 0.03), common::e(&[0.25], 0.5)).unwrap();
    let model = Model::Chaos(spec);
    let cfg = SynthConfig { noise: 0.01, seed: 3, ..SynthConfig::default() };
    let a = synthesize_snapshot(&model, &cfg).unwrap();
    let b = synthesize_snapshot(&model, &cfg).unwrap();
    assert_eq!(a, b);
    let other = synthesize_snapshot(&model, &SynthConfig { seed: 4, ..cfg.clone() }).unwrap();
    assert_ne!(a, other);

    let tmp = tempfile::tempdir().unwrap();
    let dir = write_snapshot(tmp.path(), &a).unwrap();
    let opts = IngestOptions { outliers: None, ..IngestOptions::default() };
    let back = read_snapshot(&dir, &opts).unwrap();
    assert_eq!(back.yields, a.yields);
    assert_eq!(back.caplets.len(), a.caplets.len());
    assert_eq!(back.swaptions.len(), a.swaptions.len());
    let dir2 = write_snapshot(&tmp.path().join("again"), &a).unwrap();
    for f in std::fs::read_dir(&dir).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(std::fs::read(dir.join(&name)).unwrap(), std::fs::read(dir2.join(&name)).unwrap());
    }
}

fn instruments() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0..0.08f64, 3),
        prop::collection::vec(0.0..0.08f64, 3),
        prop::collection::vec(0.005..0.08f64, 1..8),
    )
}

proptest! {
    #[test]
    fn bootstrap_reprices_every_input((dep, fut, swp) in instruments(), freq in 1u32..=4) {
        let deps: Vec<CurveInstrument> = dep.iter().enumerate()
            .map(|(i, &r)| inst(InstrumentKind::Deposit, 0.0, 0.25 * (i + 1) as f64, r)).collect();
        let futs: Vec<CurveInstrument> = fut.iter().enumerate()
            .map(|(i, &r)| inst(InstrumentKind::Future, 0.75 + 0.25 * i as f64, 1.0 + 0.25 * i as f64, r)).collect();
        let swaps: Vec<CurveInstrument> = swp.iter().enumerate()
            .map(|(i, &r)| inst(InstrumentKind::Swap, 0.0, 2.0 + i as f64, r)).collect();
        let opts = BootstrapOptions { swap_frequency: freq };
        let c = bootstrap_curve(&deps, &futs, &swaps, &opts).unwrap();
        for i in deps.iter().chain(&futs).chain(&swaps) {
            prop_assert!((implied_rate(&c, i, &opts) - i.rate).abs() < 1e-10, "{i:?}");
        }
    }

    #[test]
    fn strip_reprices_every_cap(v0 in 0.1..0.3f64, steps in prop::collection::vec(0.9..1.1f64, 1..8)) {
        let c = curve();
        let mut vols = vec![v0];
        for s in steps {
            vols.push(vols.last().unwrap() * s);
        }
        let caps: Vec<CapVol> = vols.iter().enumerate()
            .map(|(i, &v)| CapVol { maturity: (i + 1) as f64, vol: v }).collect();
        let out = strip_caplet_vols(&caps, &c, 0.25).unwrap();
        let stripped: Vec<f64> = out.iter().map(|s| s.vol).collect();
        for cap in &caps {
            let k = cap_strike(&c, cap.maturity, 0.25).unwrap();
            let n = (cap.maturity / 0.25).round() as usize;
            let flat = cap_price(&c, cap.maturity, 0.25, k, &vec![cap.vol; n - 1]).unwrap();
            let back = cap_price(&c, cap.maturity, 0.25, k, &stripped).unwrap();
            prop_assert!((flat - back).abs() < 1e-8);
        }
    }

    #[test]
    fn yield_price_identity(y in -0.05..0.3f64, t in 0.01..50.0f64) {
        let q = BondQuote::strip(t, yield_to_price(y, t)).unwrap();
        prop_assert!((price_to_yield(&q).unwrap() - y).abs() < 1e-14);
    }
}

#[test]
fn curve_trait_matches_svensson() {
    let c = curve();
    assert_eq!(Curve::discount(&c, 3.0).unwrap(), c.discount(3.0));
}
