use esn_core::readout::*;
use esn_core::replica::*;
use esn_core::reservoir::*;
use esn_core::signals::gaussian_drive;
use esn_core::rng::derive_seed;
fn main() {
    // C6 probe: I_MC over the rho grid, 2 realizations, T=6000
    let rhos: Vec<f64> = (0..31).map(|k| 1.0 + 0.1 * k as f64).collect();
    let mut mean_imc = vec![0.0; rhos.len()];
    let mut transition = 0.0;
    for j in 0..2u64 {
        let base = build_network(&NetworkSpec { size: 500, wiring_p: 0.10, spectral_radius: 1.0, input_dim: 1, bias: 1.0, seed: derive_seed(141, j) }).unwrap();
        let drive = gaussian_drive(6000, 1, derive_seed(142, j));
        let mut tr_found = false;
        for (k, &rho) in rhos.iter().enumerate() {
            let ens = replica_run(&base.rescaled(rho).unwrap(), &drive, 2, 1000, 0.0, derive_seed(143, j)).unwrap();
            let g = consistency_report(&ens).unwrap().gamma_hat_sq;
            if !tr_found && g < 0.99 { transition += rho / 2.0; tr_found = true; }
            let prof = memory_profile(ens.trajectory(0), None, &drive, &MemoryTaskConfig::default()).unwrap();
            mean_imc[k] += prof.capacity / 2.0;
        }
    }
    let (kmax, imax) = mean_imc.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
    let imc1 = mean_imc[0]; let imc3 = mean_imc[20];
    println!("C6: transition≈{transition:.2} argmax_rho={:.1} (imc={imax:.2}) imc(1)={imc1:.2} imc(3)={imc3:.2} ratio={:.2}", rhos[kmax], imc3/imc1);

    // C7 probe: one pair
    let j = 0u64;
    let base = build_network(&NetworkSpec { size: 500, wiring_p: 0.10, spectral_radius: 1.0, input_dim: 1, bias: 1.0, seed: derive_seed(151, j) }).unwrap();
    let drive = gaussian_drive(6000, 1, derive_seed(152, j));
    let net3 = base.rescaled(3.0).unwrap();
    let g3 = consistency_report(&replica_run(&net3, &drive, 2, 1000, 0.0, derive_seed(153, j)).unwrap()).unwrap().gamma_hat_sq;
    let gamma_r = |r: f64| -> f64 {
        consistency_report(&replica_run(&base, &drive, 2, 1000, r, derive_seed(154, j)).unwrap()).unwrap().gamma_hat_sq
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut r_star = f64::NAN;
    for _ in 0..25 {
        let mid = 0.5 * (lo + hi);
        let g = gamma_r(mid);
        if (g - g3).abs() <= 0.01 { r_star = mid; break; }
        if g > g3 { lo = mid } else { hi = mid }
    }
    println!("C7: gamma3={g3:.4} matched r={r_star:.4} gamma_r={:.4}", gamma_r(r_star));
    let dl = gaussian_drive(21_000, 1, derive_seed(155, j));
    let ens_c = replica_run(&net3, &dl, 2, 1000, 0.0, derive_seed(156, j)).unwrap();
    let prof_c = memory_profile(ens_c.trajectory(0), Some(ens_c.trajectory(1)), &dl, &MemoryTaskConfig::default()).unwrap();
    let ens_n = replica_run(&base, &dl, 2, 1000, r_star, derive_seed(157, j)).unwrap();
    let prof_n = memory_profile(ens_n.trajectory(0), Some(ens_n.trajectory(1)), &dl, &MemoryTaskConfig::default()).unwrap();
    println!("C7: imc_chaos={:.2} imc_noise={:.2}", prof_c.capacity, prof_n.capacity);
    for tau in [5, 8, 10, 12, 15] {
        println!("  tau={tau}: M_chaos={:.3} M_noise={:.3} Gr_chaos={:.3}", prof_c.m[tau], prof_n.m[tau], prof_c.gamma_r().unwrap()[tau]);
    }
    let bound_ok = (0..=50).all(|t| prof_c.m[t] <= prof_c.gamma_r().unwrap()[t] + 0.05);
    println!("C8 bound at rho=3: {bound_ok}");
}
