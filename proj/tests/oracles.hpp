// Brute-force references used only by the tests. Nothing here calls the
// closed-form builders it is compared against.

#ifndef QFDR_TESTS_ORACLES_HPP
#define QFDR_TESTS_ORACLES_HPP

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "qfdr/quantum_kernel.hpp"

namespace qfdr::oracle {

/// thermalize -> measure -> re-prepare (|0>, pi-pulse if excited) -> rotate
/// -> measure, carried out on density matrices. Returns P(w) for w = e' - e.
inline std::map<int, double> density_matrix_step(double beta, double step_angle) {
    std::map<int, double> table{{-1, 0.0}, {0, 0.0}, {1, 0.0}};
    const QubitState thermal = gibbs_state(ThermalSpec::from_beta(beta));
    const auto [p0, p1] = measure_energy_basis(thermal);
    const double first[2] = {p0, p1};
    for (int e = 0; e < 2; ++e) {
        QubitState prepared = QubitState::ground();
        if (e == 1) prepared = prepared.evolved(rotation(std::numbers::pi));
        const QubitState rotated = prepared.evolved(rotation(step_angle));
        const auto [q0, q1] = measure_energy_basis(rotated);
        table[0 - e] += first[e] * q0;
        table[1 - e] += first[e] * q1;
    }
    return table;
}

/// Exact mean and variance of W = sum of N i.i.d. steps by enumerating all
/// 3^N outcome strings.
inline std::pair<double, double> enumerate_cumulants(const std::map<int, double>& step, int n) {
    const std::vector<std::pair<int, double>> outcomes(step.begin(), step.end());
    const std::size_t k = outcomes.size();
    std::size_t strings = 1;
    for (int i = 0; i < n; ++i) strings *= k;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t code = 0; code < strings; ++code) {
        std::size_t c = code;
        double prob = 1.0;
        int total = 0;
        for (int i = 0; i < n; ++i) {
            const auto& [w, pw] = outcomes[c % k];
            c /= k;
            prob *= pw;
            total += w;
        }
        m1 += prob * total;
        m2 += prob * total * total;
    }
    return {m1, m2 - m1 * m1};
}

/// Incoherent TPM at a quench omega_before -> omega_after with fixed
/// eigenbasis: thermal state of -omega_before sigma_z / 2, projective energy
/// readout before and after. Returns (work, probability) pairs per level.
inline std::vector<std::pair<double, double>> incoherent_tpm(double beta, double omega_before,
                                                              double omega_after) {
    const ComplexMatrix2 h_before = Complex(-0.5 * omega_before) * ComplexMatrix2::pauli_z();
    const ComplexMatrix2 h_after = Complex(-0.5 * omega_after) * ComplexMatrix2::pauli_z();
    const double w0 = std::exp(-beta * h_before(0, 0).real());
    const double w1 = std::exp(-beta * h_before(1, 1).real());
    const QubitState rho(ComplexMatrix2(w0 / (w0 + w1), 0.0, 0.0, w1 / (w0 + w1)));
    std::vector<std::pair<double, double>> out;
    for (int level = 0; level < 2; ++level) {
        const double prob = rho.rho()(level, level).real();
        const double e_before = h_before(level, level).real();
        // Collapsed state is unchanged by the quench, so the second readout agrees.
        const QubitState post = QubitState::collapsed(level);
        const double e_after = (h_after * post.rho()).trace().real();
        out.emplace_back(e_after - e_before, prob);
    }
    return out;
}

}  // namespace qfdr::oracle

#endif  // QFDR_TESTS_ORACLES_HPP
