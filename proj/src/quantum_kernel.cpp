#include "qfdr/quantum_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qfdr {

ComplexMatrix2::ComplexMatrix2(Complex a00, Complex a01, Complex a10, Complex a11)
    : entries_{a00, a01, a10, a11} {}

ComplexMatrix2 ComplexMatrix2::identity() { return {1.0, 0.0, 0.0, 1.0}; }
ComplexMatrix2 ComplexMatrix2::pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
ComplexMatrix2 ComplexMatrix2::pauli_y() {
    return {0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0};
}
ComplexMatrix2 ComplexMatrix2::pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

ComplexMatrix2 ComplexMatrix2::adjoint() const {
    return {std::conj(entries_[0]), std::conj(entries_[2]), std::conj(entries_[1]),
            std::conj(entries_[3])};
}

bool ComplexMatrix2::is_finite() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

bool ComplexMatrix2::is_hermitian(double tol) const { return max_abs_diff(adjoint()) <= tol; }

bool ComplexMatrix2::is_unitary(double tol) const {
    return ((*this) * adjoint()).max_abs_diff(identity()) <= tol;
}

double ComplexMatrix2::max_abs_diff(const ComplexMatrix2& other) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        worst = std::max(worst, std::abs(entries_[k] - other.entries_[k]));
    }
    return worst;
}

std::pair<double, double> ComplexMatrix2::hermitian_eigenvalues() const {
    const double a = entries_[0].real();
    const double d = entries_[3].real();
    const double mean = 0.5 * (a + d);
    const double radius = std::hypot(0.5 * (a - d), std::abs(entries_[1]));
    return {mean - radius, mean + radius};
}

ComplexMatrix2 operator+(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    ComplexMatrix2 out;
    for (int k = 0; k < 4; ++k) out.entries_[k] = a.entries_[k] + b.entries_[k];
    return out;
}

ComplexMatrix2 operator-(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    ComplexMatrix2 out;
    for (int k = 0; k < 4; ++k) out.entries_[k] = a.entries_[k] - b.entries_[k];
    return out;
}

ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

ComplexMatrix2 operator*(Complex s, const ComplexMatrix2& a) {
    ComplexMatrix2 out;
    for (int k = 0; k < 4; ++k) out.entries_[k] = s * a.entries_[k];
    return out;
}

// ---------------------------------------------------------------------------
// ThermalSpec
// ---------------------------------------------------------------------------

ThermalSpec ThermalSpec::from_beta(double beta, double beta_cap) {
    if (!std::isfinite(beta)) throw std::domain_error("beta must be finite");
    if (beta < 0.0) throw std::domain_error("beta must be non-negative");
    beta = std::min(beta, beta_cap);
    // p = e^-b / (1 + e^-b) stays accurate for large b.
    const double boltzmann = std::exp(-beta);
    return ThermalSpec(beta, boltzmann / (1.0 + boltzmann), std::tanh(0.5 * beta));
}

ThermalSpec ThermalSpec::from_population(double p) {
    if (!(p >= 0.0 && p <= 0.5)) {
        throw std::domain_error("excited population must lie in [0, 1/2]");
    }
    if (p == 0.0) return from_beta(kDefaultBetaCap);
    if (p == 0.5) return ThermalSpec(0.0, 0.5, 0.0);
    return ThermalSpec(population_to_beta(p), p, 1.0 - 2.0 * p);
}

// ---------------------------------------------------------------------------
// QubitState
// ---------------------------------------------------------------------------

QubitState::QubitState(const ComplexMatrix2& rho) : rho_(rho) {
    if (!rho.is_finite()) throw IntegrityError("density matrix has non-finite entries");
    if (!rho.is_hermitian()) throw IntegrityError("density matrix is not Hermitian");
    if (std::abs(rho.trace() - 1.0) > kMatrixTolerance) {
        throw IntegrityError("density matrix trace differs from 1");
    }
    if (rho.hermitian_eigenvalues().first < -kMatrixTolerance) {
        throw IntegrityError("density matrix has a negative eigenvalue");
    }
}

QubitState QubitState::evolved(const ComplexMatrix2& unitary) const {
    return QubitState(unitary * rho_ * unitary.adjoint());
}

QubitState QubitState::collapsed(int level) {
    if (level != 0 && level != 1) throw std::out_of_range("qubit level must be 0 or 1");
    return level == 0 ? ground() : excited();
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

QubitState gibbs_state(const ThermalSpec& spec) {
    if (!std::isfinite(spec.beta())) throw std::domain_error("beta must be finite");
    const double p = spec.excited_population();
    return QubitState(ComplexMatrix2(1.0 - p, 0.0, 0.0, p));
}

double population_to_beta(double p) {
    if (!(p > 0.0 && p < 0.5)) {
        throw std::domain_error("population_to_beta requires 0 < p < 1/2, got " +
                                std::to_string(p));
    }
    return std::log1p(-p) - std::log(p);
}

ComplexMatrix2 rotation(double theta) {
    if (!std::isfinite(theta)) throw std::domain_error("rotation angle must be finite");
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return {c, Complex(0.0, -s), Complex(0.0, -s), c};
}

ComplexMatrix2 effective_hamiltonian(double theta) {
    if (!std::isfinite(theta)) throw std::domain_error("angle must be finite");
    return Complex(0.5 * std::sin(theta)) * ComplexMatrix2::pauli_y() -
           Complex(0.5 * std::cos(theta)) * ComplexMatrix2::pauli_z();
}

std::pair<double, double> measure_energy_basis(const QubitState& state) {
    const double p0 = state.rho()(0, 0).real();
    const double p1 = state.rho()(1, 1).real();
    if (std::abs(p0 + p1 - 1.0) > kMatrixTolerance || p0 < -kMatrixTolerance ||
        p1 < -kMatrixTolerance) {
        throw IntegrityError("measurement probabilities are not normalized");
    }
    return {std::clamp(p0, 0.0, 1.0), std::clamp(p1, 0.0, 1.0)};
}

}  // namespace qfdr
