/**
 * Exact single-qubit linear algebra.
 *
 * Energies are dimensionless (the bare qubit gap is the unit), so the Gibbs
 * weight of the excited level is exp(-beta). |0> is the lower level of
 * -sigma_z/2.
 */

#ifndef QFDR_QUANTUM_KERNEL_HPP
#define QFDR_QUANTUM_KERNEL_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <utility>

namespace qfdr {

using Complex = std::complex<double>;

/// Tolerance for algebraic identities on 2x2 matrices.
inline constexpr double kMatrixTolerance = 1e-12;

/// Inverse temperatures are capped here instead of using infinity.
inline constexpr double kDefaultBetaCap = 1e3;

/// Raised when a state fails its density-matrix invariants.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major 2x2 complex matrix.
class ComplexMatrix2 {
public:
    constexpr ComplexMatrix2() = default;
    ComplexMatrix2(Complex a00, Complex a01, Complex a10, Complex a11);

    static ComplexMatrix2 identity();
    static ComplexMatrix2 zero() { return {}; }
    static ComplexMatrix2 pauli_x();
    static ComplexMatrix2 pauli_y();
    static ComplexMatrix2 pauli_z();

    Complex operator()(int row, int col) const { return entries_[2 * row + col]; }
    Complex& operator()(int row, int col) { return entries_[2 * row + col]; }

    ComplexMatrix2 adjoint() const;
    Complex trace() const { return entries_[0] + entries_[3]; }
    bool is_finite() const;
    bool is_hermitian(double tol = kMatrixTolerance) const;
    bool is_unitary(double tol = kMatrixTolerance) const;

    // Largest entrywise modulus of (*this - other).
    double max_abs_diff(const ComplexMatrix2& other) const;

    // Eigenvalues of a Hermitian matrix, ascending.
    std::pair<double, double> hermitian_eigenvalues() const;

    friend ComplexMatrix2 operator+(const ComplexMatrix2& a, const ComplexMatrix2& b);
    friend ComplexMatrix2 operator-(const ComplexMatrix2& a, const ComplexMatrix2& b);
    friend ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b);
    friend ComplexMatrix2 operator*(Complex s, const ComplexMatrix2& a);

private:
    std::array<Complex, 4> entries_{};
};

/// Inverse temperature together with the matching excited-state population.
class ThermalSpec {
public:
    /// Builds from beta (units of the inverse gap). Values above `beta_cap`
    /// are clamped; negative or non-finite beta is a domain error.
    static ThermalSpec from_beta(double beta, double beta_cap = kDefaultBetaCap);
    /// Builds from the excited population p in (0, 1/2].
    static ThermalSpec from_population(double p);

    double beta() const { return beta_; }
    double excited_population() const { return p_; }
    /// 1 - 2p = tanh(beta/2), computed without cancellation.
    double polarization() const { return polarization_; }

private:
    ThermalSpec(double beta, double p, double polarization)
        : beta_(beta), p_(p), polarization_(polarization) {}

    double beta_;
    double p_;
    double polarization_;
};

/// A validated density matrix in the logical basis {|0>, |1>}.
class QubitState {
public:
    /// Throws IntegrityError unless rho is Hermitian, unit trace and
    /// positive semidefinite within kMatrixTolerance.
    explicit QubitState(const ComplexMatrix2& rho);

    static QubitState ground() { return QubitState(ComplexMatrix2(1.0, 0.0, 0.0, 0.0)); }
    static QubitState excited() { return QubitState(ComplexMatrix2(0.0, 0.0, 0.0, 1.0)); }

    const ComplexMatrix2& rho() const { return rho_; }

    /// U rho U^dagger.
    QubitState evolved(const ComplexMatrix2& unitary) const;
    /// Post-measurement state for outcome `level` of the logical basis.
    static QubitState collapsed(int level);

private:
    ComplexMatrix2 rho_;
};

/// Thermal state diag(1, e^-beta)/Z with Z = 1 + e^-beta.
QubitState gibbs_state(const ThermalSpec& spec);

/// beta = 2 artanh(1 - 2p); throws std::domain_error unless 0 < p < 1/2.
double population_to_beta(double p);

/// exp(-i theta sigma_x / 2).
ComplexMatrix2 rotation(double theta);

/// (sin(theta) sigma_y - cos(theta) sigma_z) / 2.
ComplexMatrix2 effective_hamiltonian(double theta);

/// Born probabilities (P(|0>), P(|1>)) of a logical-basis measurement.
std::pair<double, double> measure_energy_basis(const QubitState& state);

}  // namespace qfdr

#endif  // QFDR_QUANTUM_KERNEL_HPP
