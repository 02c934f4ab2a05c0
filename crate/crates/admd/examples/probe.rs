use admd::adaptive::{AdmdConfig, FullRankFilter, SketchSpec};
use admd::datasets::*;
use admd::dmd::*;
use admd::evaluation::error_series;
use admd::filters::{DftFilterPolicy, RpcaParams};
use admd::*;
use std::time::Instant;

fn max_err(errs: &[Option<f64>]) -> f64 {
    errs.iter().flatten().fold(0.0f64, |a, &b| a.max(b))
}

fn main() {
    // --- double gyre desk scale ---
    let t0 = Instant::now();
    let dg = double_gyre_vorticity(&DoubleGyreParams::default()).unwrap();
    println!("gyre gen: {:?} dims {}x{}", t0.elapsed(), dg.state_dim(), dg.snapshot_count());
    let t0 = Instant::now();
    let model = fit_dmd(&dg, RankRule::Threshold(1e-12)).unwrap();
    println!("gyre fit: {:?} rank={}", t0.elapsed(), model.rank());
    let t0 = Instant::now();
    let errs = error_series(&model, &dg).unwrap();
    println!("gyre errors: {:?} max={:.3e} final={:.3e}", t0.elapsed(), max_err(&errs), errs.last().unwrap().unwrap());
    for q in [1usize, 3] {
        let (h1, _) = hankel_pair(&dg, q).unwrap();
        let t0 = Instant::now();
        let r = numeric_rank(h1.view(), 1e-12).unwrap();
        println!("gyre hankel q={q}: rank={r} ({:?})", t0.elapsed());
    }

    // --- sketched hidden dynamics over 20 seeds ---
    let hd = hidden_dynamics(&HiddenDynamicsParams::default()).unwrap();
    let full = fit_dmd(&hd, RankRule::Threshold(1e-12)).unwrap();
    let full_eigs: Vec<_> = full.discrete_eigs().to_vec();
    println!("hidden full rank={} max_err={:.3e}", full.rank(), max_err(&error_series(&full, &hd).unwrap()));
    let mut ok = 0;
    for seed in 0..20u64 {
        let cfg = AdmdConfig { sketch: SketchSpec::Gaussian { a: 10 }, seed, ..Default::default() };
        let rep = admd_fit(&hd, &cfg).unwrap();
        let sk: Vec<_> = rep.model.discrete_eigs().to_vec();
        // symmetric hausdorff over nonzero
        let d1 = full_eigs.iter().map(|w| sk.iter().map(|g| (g-w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max);
        let d2 = sk.iter().map(|w| full_eigs.iter().map(|g| (g-w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max);
        let me = max_err(&rep.error_series);
        let pass = d1.max(d2) <= 1e-6 && me <= 1e-6;
        if pass { ok += 1; }
        if seed < 5 || !pass {
            println!("  seed {seed}: rank={} haus={:.2e}/{:.2e} max_err={:.2e} pass={pass}", rep.rank_after, d1, d2, me);
        }
    }
    println!("hidden sketched: {ok}/20 seeds pass");

    // --- surrogate ordering over 10 seeds ---
    let t0 = Instant::now();
    let mut order_ok = 0;
    let mut rank_ok = 0;
    for seed in 0..10u64 {
        let sp = SurrogateParams { seed, ..Default::default() };
        let x = surrogate_turbulence(&sp).unwrap();
        let std_model = fit_dmd(&x, RankRule::Threshold(1e-12)).unwrap();
        let e_std = error_series(&std_model, &x).unwrap();
        let dft_rep = admd_fit(&x, &AdmdConfig { fullrank_filter: FullRankFilter::Dft(DftFilterPolicy::default()), ..Default::default() }).unwrap();
        let ialm_rep = admd_fit(&x, &AdmdConfig { fullrank_filter: FullRankFilter::Ialm(RpcaParams::default()), ..Default::default() }).unwrap();
        let f_std = e_std.last().unwrap().unwrap();
        let f_dft = dft_rep.error_series.last().unwrap().unwrap();
        let f_ialm = ialm_rep.error_series.last().unwrap().unwrap();
        let ord = f_ialm < f_dft && f_dft < f_std;
        if ord { order_ok += 1; }
        if ialm_rep.rank_after < std_model.rank() && ialm_rep.rank_before == x.snapshot_count() {
            rank_ok += 1;
        }
        println!("  seed {seed}: final std={f_std:.3e} dft={f_dft:.3e} ialm={f_ialm:.3e} ord={ord} ranks std={} dft={} ialm={} before={}",
            std_model.rank(), dft_rep.rank_after, ialm_rep.rank_after, ialm_rep.rank_before);
    }
    println!("surrogate ordering: {order_ok}/10, rank reduction {rank_ok}/10 ({:?})", t0.elapsed());
}
