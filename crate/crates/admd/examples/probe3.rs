use admd::datasets::*;
use admd::dmd::*;
use admd::evaluation::error_series;

fn max_err(errs: &[Option<f64>]) -> f64 {
    errs.iter().flatten().fold(0.0f64, |a, &b| a.max(b))
}

fn run(label: &str, p: &DoubleGyreParams, rule: RankRule) {
    let dg = double_gyre_vorticity(p).unwrap();
    match fit_dmd(&dg, rule) {
        Ok(model) => {
            let errs = error_series(&model, &dg).unwrap();
            println!(
                "{label}: rank={} max={:.3e} final={:.3e}",
                model.rank(),
                max_err(&errs),
                errs.last().unwrap().unwrap()
            );
        }
        Err(e) => println!("{label}: fit error {e}"),
    }
}

fn main() {
    let base = DoubleGyreParams::default();
    run("dt=0.1 nt=201 eps", &base, RankRule::Threshold(1e-12));
    run(
        "dt=0.05 nt=401 eps",
        &DoubleGyreParams { nt: 401, dt: 0.05, ..base.clone() },
        RankRule::Threshold(1e-12),
    );
    run(
        "dt=0.25 nt=81 eps",
        &DoubleGyreParams { nt: 81, dt: 0.25, ..base.clone() },
        RankRule::Threshold(1e-12),
    );
    for r in [2usize, 3, 4, 5, 6, 8, 10] {
        run(&format!("dt=0.1 fixed r={r}"), &base, RankRule::Fixed(r));
    }
    // smaller perturbation eps
    run(
        "eps=0.1 dt=0.1",
        &DoubleGyreParams { eps: 0.1, ..base.clone() },
        RankRule::Threshold(1e-12),
    );
    // one period only
    run(
        "one period nt=101",
        &DoubleGyreParams { nt: 101, ..base.clone() },
        RankRule::Threshold(1e-12),
    );
}
