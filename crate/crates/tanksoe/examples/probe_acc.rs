use tanksoe::vectors::var;
use tanksoe::*;

fn main() {
    let bench = ModelParameters::benchmark();
    let ss = solve_steady_state(&bench).unwrap();
    let d = hessians(&ss.params, &ss).unwrap();
    let v = ModelVectors::new();
    let fo = solve_first_order(&d, &v, &ss.params).unwrap();
    let cov = shock_covariance(&ss.params);
    let so = solve_second_order(&d, &fo, &cov).unwrap();

    for (label, sol) in [
        ("order1", PerturbationSolution::First(fo.clone())),
        ("order2", PerturbationSolution::Second(so)),
    ] {
        let irf = impulse_response(&sol, &ss, "eps_R", 1.0, 8).unwrap();
        println!(
            "{label}: c_R {:+.5} c_H {:+.5} s_tilde {:+.5} s {:+.5} pi {:+.5} r_d {:+.5}",
            irf.series[var::C_R][0],
            irf.series[var::C_H][0],
            irf.series[var::S_TILDE][0],
            irf.series[var::S][0],
            irf.series[var::PI][0],
            irf.series[var::R_D][0]
        );
    }

    let mut hom = bench.clone();
    hom.phi_Co = 0.0;
    let foreign = compare_irf(&bench, &hom, "eps_Rstar", 1.0, 20, 1).unwrap();
    println!(
        "eps_Rstar: P_CH amp {:.4}  P_CR amp {:.4}  ratio {:.4}",
        foreign.amplification[var::P_CH],
        foreign.amplification[var::P_CR],
        foreign.amplification[var::P_CH] / foreign.amplification[var::P_CR]
    );
    let commodity = compare_irf(&bench, &hom, "eps_P", 1.0, 20, 1).unwrap();
    println!(
        "eps_P: C_H amp {:.4}  C_R amp {:.4}  ratio {:.4}",
        commodity.amplification[var::C_H],
        commodity.amplification[var::C_R],
        commodity.amplification[var::C_H] / commodity.amplification[var::C_R]
    );
}
