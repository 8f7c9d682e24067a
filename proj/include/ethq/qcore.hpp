// qcore.hpp: dense complex linear algebra and quantum-state primitives.
//
// Index convention for bipartite spaces C^{d1} ⊗ C^{d2}: the basis vector
// |a⟩⊗|b⟩ sits at position a*d2 + b (first factor major), matching kron().

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ethq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kDefaultEigenvalueFloor = 1e-10;

// A computed quantity failed its numerical tolerance. Carries the worst
// residual so callers can report it.
class NumericalToleranceError : public std::runtime_error {
public:
    NumericalToleranceError(const std::string& what, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Reproducible random stream. Identical (seed, stream_index) pairs yield
// identical draws; distinct stream indices give statistically independent
// streams, so Monte Carlo samples can be drawn in any order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_index = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }

    double normal();
    double uniform();
    // (x + i y)/sqrt(2) with x, y standard normal: E|z|^2 = 1.
    cplx complex_normal();
    std::uint64_t next_u64() { return engine_(); }

    // Independent child stream, e.g. one per Monte Carlo sample.
    RngStream substream(std::uint64_t index) const;

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Dense square operator. The hermitian flag is validated on construction.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix entries, bool hermitian = false);

    static Operator hermitian(Matrix entries) { return Operator(std::move(entries), true); }

    Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    bool is_hermitian() const noexcept { return hermitian_; }

    Operator adjoint() const { return Operator(entries_.adjoint(), hermitian_); }
    bool is_unitary(double tol = kStructuralTol) const;

private:
    Matrix entries_;
    bool hermitian_ = false;
};

class PureState {
public:
    PureState() = default;
    // Throws std::invalid_argument unless the norm is 1 within 1e-12.
    explicit PureState(Vector amplitudes);

    static PureState normalized(const Vector& v);
    static PureState basis(Index dim, Index i);

    Index dim() const noexcept { return amplitudes_.size(); }
    const Vector& amplitudes() const noexcept { return amplitudes_; }

private:
    Vector amplitudes_;
};

// Positive semidefinite, unit-trace operator.
class DensityMatrix {
public:
    // Full validation: Hermitian and unit trace within 1e-10, smallest
    // eigenvalue >= -eigenvalue_floor.
    explicit DensityMatrix(Matrix rho, double eigenvalue_floor = kDefaultEigenvalueFloor);

    static DensityMatrix from_pure(const PureState& psi);
    static DensityMatrix maximally_mixed(Index dim);
    static DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b);
    // For matrices that are positive by construction (outer products, block
    // sums of densities). Checks Hermiticity and trace only.
    static DensityMatrix trusted(Matrix rho, double eigenvalue_floor = kDefaultEigenvalueFloor);

    Index dim() const noexcept { return rho_.rows(); }
    const Matrix& matrix() const noexcept { return rho_; }
    double eigenvalue_floor() const noexcept { return floor_; }
    RealVector eigenvalues() const;

private:
    struct TrustedTag {};
    DensityMatrix(Matrix rho, double eigenvalue_floor, TrustedTag);

    Matrix rho_;
    double floor_ = kDefaultEigenvalueFloor;
};

enum class Factor { first, second };

// ---- matrix helpers ----------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);
double hermiticity_residual(const Matrix& m);
Matrix hermitian_part(const Matrix& m);
// Sum of |eigenvalues| of a Hermitian matrix (symmetrized before solving).
double trace_norm_hermitian(const Matrix& h);
// Orthogonal projector onto the column span of an isometry.
Matrix projector_onto(const Matrix& isometry);

// ---- state functionals -------------------------------------------------

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const PureState& a, const PureState& b);

Matrix partial_trace(const Matrix& rho, Index d1, Index d2, Factor keep);
DensityMatrix partial_trace(const DensityMatrix& rho, Index d1, Index d2, Factor keep);
// Reduced state of a pure bipartite vector without forming |psi><psi|.
Matrix reduced_from_amplitudes(const Vector& amplitudes, Index d1, Index d2, Factor keep);

// Natural-log units, eigenvalues at or below the floor are dropped.
double von_neumann_entropy(const DensityMatrix& rho);
double shannon_entropy(const std::vector<double>& weights);

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// ---- random sampling ---------------------------------------------------

// Haar unitary from the QR factorization of a complex Ginibre matrix with
// the phases of diag(R) absorbed into Q.
Operator haar_unitary(Index d, RngStream& rng);
// First n columns of a Haar unitary on C^m (thin QR of an m x n Ginibre).
Matrix haar_isometry(Index m, Index n, RngStream& rng);
PureState random_pure_state(Index d, RngStream& rng);
// Induced-measure mixed state: G G^dagger / tr with G a d x rank Ginibre.
DensityMatrix random_density(Index d, RngStream& rng, Index rank = -1);
Matrix random_hermitian(Index d, RngStream& rng);

}  // namespace ethq
