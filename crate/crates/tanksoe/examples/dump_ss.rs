use tanksoe::params::ModelParameters;
use tanksoe::steady_state::{solve_steady_state, steady_state_report};
use tanksoe::vectors::ModelVectors;

fn main() {
    let ss = solve_steady_state(&ModelParameters::benchmark()).unwrap();
    let mv = ModelVectors::new();
    for (i, name) in mv.endogenous_names.iter().enumerate() {
        println!("{i:2}  {name:12} {:.12}", ss.values[i]);
    }
    println!("--- diagnostics: {:?}", ss.diagnostics);
    for (k, v) in steady_state_report(&ss) {
        println!("{k:30} {v:.9}");
    }
    println!("chi_R={:.12} chi_H={:.12} gbar={:.12} tau_H={:.12} psi_S={:.12} ybar={:.12}",
        ss.params.chi_R, ss.params.chi_H, ss.params.gbar, ss.params.tau_H_bar, ss.params.psi_S, ss.params.ybar);
}
