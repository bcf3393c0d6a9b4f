use twocharge::verify::{self, CheckOutcome};

fn report(rows: Vec<CheckOutcome>) {
    assert!(!rows.is_empty());
    for row in &rows {
        println!("{row}");
    }
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    assert!(failed.is_empty(), "failed checks:\n{}", failed.join("\n"));
}

#[test]
fn criterion_01_partition_brute_force() {
    report(verify::partition_brute_force());
}

#[test]
fn criterion_02_moment_matrix() {
    report(verify::moment_matrix_consistency());
}

#[test]
fn criterion_03_mean_variance_limits() {
    report(verify::global_statistics());
}

#[test]
fn criterion_04_limiting_pgf() {
    report(verify::limiting_pgf_check());
}

#[test]
fn criterion_05_count_clt() {
    report(verify::count_clt());
}

#[test]
fn criterion_06_kernel_scaling() {
    report(verify::kernel_scaling_limits());
}

#[test]
fn criterion_07_density_identities() {
    report(verify::density_identities());
}

#[test]
fn criterion_08_coe_cse_endpoints() {
    report(verify::endpoint_recovery());
}

#[test]
fn criterion_09_pfaffian_engine() {
    report(verify::pfaffian_engine());
}

#[test]
fn criterion_10_two_particle_intensities() {
    report(verify::two_particle_end_to_end());
}

#[test]
fn criterion_11_sampler() {
    report(verify::sampler_correctness());
}
