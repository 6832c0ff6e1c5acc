use expball::diagnostics::*;
use expball::euler1d::*;
use expball::model::*;
use expball::potential1d::{run_potential, to_flow};

fn run_records(bump: BumpProfile, n: usize, t_end: f64) -> (Vec<DiagnosticRecord>, FlowState) {
    let g = GasModel::new(1.2).unwrap();
    let p = ExpansionProfile::linear(0.1).unwrap();
    let cfg = DecayConfig::for_gas(&g);
    let data = InitialData::potential_bump(0.01, bump).unwrap();
    let grid = Grid::new(n).unwrap();
    let ctrl = RunControl::new(t_end, 0.4, Scheme::MusclMinmod, Cadence::DeltaLogR(0.02)).unwrap();
    let mut records = Vec::new();
    let (mut prev_cum, mut last_t) = (0.0, 0.0);
    let s = run(&g, &p, &grid, &data, &ctrl, &mut |_, s| {
        let r = record(s, &g, &p, &cfg, prev_cum, s.t - last_t).unwrap();
        prev_cum = r.cum_spacetime;
        last_t = s.t;
        records.push(r);
        Ok(())
    }).unwrap();
    (records, s)
}

fn main() {
    let g = GasModel::new(1.2).unwrap();
    let p = ExpansionProfile::linear(0.1).unwrap();

    // cum slope ratio at R=450 (t = 4490) for the ledger
    let (recs, _) = run_records(BumpProfile::poly(0.5, 0.40, 5), 200, 4490.0);
    let n = recs.len();
    let dcum = recs[n-1].cum_spacetime - recs[n-2].cum_spacetime;
    let dlog = (recs[n-1].radius / recs[n-2].radius).ln();
    println!("R=450: cum slope ratio {:.4e}", dcum / dlog / recs[n-1].cum_spacetime);

    // criterion 5 with w=0.45 p6
    let (recs2, _) = run_records(BumpProfile::poly(0.5, 0.45, 6), 200, 490.0);
    let v = velocity_convergence(&recs2).unwrap();
    println!("w=0.45 p6: velocity ratio {:.4}", v.ratio);
    let f1 = decay_fit(&recs2, RecordField::DevUSup, &DecayConfig::for_gas(&g)).unwrap();
    println!("w=0.45 p6: dev_u slope {:.4}", f1.exponent);

    // criterion 9 halving with w=0.40 p5
    let data = InitialData::potential_bump(0.01, BumpProfile::poly(0.5, 0.40, 5)).unwrap();
    let mut prev_du = 0.0;
    for nn in [400usize, 800] {
        let grid = Grid::new(nn).unwrap();
        let ctrl = RunControl::new(5.0, 0.4, Scheme::MusclMinmod, Cadence::EverySteps(1 << 30)).unwrap();
        let se = run(&g, &p, &grid, &data, &ctrl, &mut |_, _| Ok(())).unwrap();
        let sp = run_potential(&g, &p, &grid, &data, &ctrl, &mut |_, _| Ok(())).unwrap();
        let fp = to_flow(&sp, &g, &p).unwrap();
        let du = se.u.iter().zip(&fp.u).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("cross N={nn}: max|du| {du:.4e} ratio-to-prev {:.3}", if prev_du > 0.0 { du / prev_du } else { f64::NAN });
        prev_du = du;
    }
}
