use admd::datasets::*;
use admd::dmd::*;
use admd::evaluation::error_series;

fn main() {
    let dg = double_gyre_vorticity(&DoubleGyreParams::default()).unwrap();
    let model = fit_dmd(&dg, RankRule::Threshold(1e-12)).unwrap();
    let errs = error_series(&model, &dg).unwrap();
    println!("rank={} sigma ratios:", model.rank());
    let (x1, _) = split_snapshots(&dg);
    let f = SvdFactors::compute(x1, RankRule::Threshold(1e-12)).unwrap();
    for (i, s) in f.sigma().iter().enumerate() {
        println!("  sigma[{i}] = {:.3e}  rel {:.3e}", s, s / f.sigma()[0]);
    }
    println!("eig magnitudes / amplitudes:");
    for k in 0..model.rank() {
        println!(
            "  |mu|={:.6} |b|={:.3e}",
            model.discrete_eigs()[k].norm(),
            model.amplitudes()[k].norm()
        );
    }
    println!("error series (every 10th):");
    for (j, e) in errs.iter().enumerate() {
        if j % 10 == 0 || e.unwrap() > 0.2 {
            let nrm = dg.data().column(j).dot(&dg.data().column(j)).sqrt();
            println!("  j={j:3} t={:5.1} err={:.3e} |x|={:.3e}", j as f64 * 0.1, e.unwrap(), nrm);
        }
    }
}
