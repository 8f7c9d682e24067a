#include "ethq/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ethq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

void require_square(const Matrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(who) + ": matrix must be square and nonempty");
    }
}

}  // namespace

NumericalToleranceError::NumericalToleranceError(const std::string& what, double residual)
    : std::runtime_error(what), residual_(residual) {}

// ---- RngStream -----------------------------------------------------------

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_index_(stream_index), engine_(seeded_engine(seed, stream_index)) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

cplx RngStream::complex_normal() {
    const double x = normal_(engine_);
    const double y = normal_(engine_);
    return {x * M_SQRT1_2, y * M_SQRT1_2};
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(seed_, splitmix64(stream_index_) ^ splitmix64(~index));
}

// ---- Operator / PureState / DensityMatrix --------------------------------

Operator::Operator(Matrix entries, bool hermitian) : entries_(std::move(entries)), hermitian_(hermitian) {
    require_square(entries_, "Operator");
    if (hermitian_) {
        const double res = hermiticity_residual(entries_);
        if (res > kStructuralTol) {
            std::ostringstream os;
            os << "Operator: hermitian flag set but residual " << res << " > 1e-10";
            throw std::invalid_argument(os.str());
        }
    }
}

bool Operator::is_unitary(double tol) const {
    const Matrix id = Matrix::Identity(dim(), dim());
    return max_abs(entries_ * entries_.adjoint() - id) <= tol;
}

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
    const double n = amplitudes_.norm();
    if (std::abs(n - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "PureState: norm " << n << " differs from 1 by more than 1e-12";
        throw std::invalid_argument(os.str());
    }
}

PureState PureState::normalized(const Vector& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("PureState::normalized: zero vector");
    return PureState(v / n);
}

PureState PureState::basis(Index dim, Index i) {
    if (i < 0 || i >= dim) throw std::invalid_argument("PureState::basis: index out of range");
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    return PureState(std::move(v));
}

DensityMatrix::DensityMatrix(Matrix rho, double eigenvalue_floor, TrustedTag)
    : rho_(std::move(rho)), floor_(eigenvalue_floor) {
    require_square(rho_, "DensityMatrix");
    const double herm = hermiticity_residual(rho_);
    if (herm > kStructuralTol) {
        throw std::invalid_argument("DensityMatrix: not Hermitian (residual " + std::to_string(herm) + ")");
    }
    const double tr_err = std::abs(rho_.trace() - cplx(1.0, 0.0));
    if (tr_err > kStructuralTol) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
    }
    rho_ = hermitian_part(rho_);
}

DensityMatrix::DensityMatrix(Matrix rho, double eigenvalue_floor)
    : DensityMatrix(std::move(rho), eigenvalue_floor, TrustedTag{}) {
    const RealVector ev = eigenvalues();
    if (ev.minCoeff() < -floor_) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << ev.minCoeff();
        throw std::invalid_argument(os.str());
    }
}

DensityMatrix DensityMatrix::trusted(Matrix rho, double eigenvalue_floor) {
    return DensityMatrix(std::move(rho), eigenvalue_floor, TrustedTag{});
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
    return trusted(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
    if (dim <= 0) throw std::invalid_argument("maximally_mixed: dimension must be positive");
    return trusted(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::product(const DensityMatrix& a, const DensityMatrix& b) {
    return trusted(kron(a.matrix(), b.matrix()));
}

RealVector DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// ---- helpers -------------------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_residual(const Matrix& m) { return max_abs(m - m.adjoint()); }

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double trace_norm_hermitian(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

Matrix projector_onto(const Matrix& isometry) { return isometry * isometry.adjoint(); }

// ---- functionals ---------------------------------------------------------

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    return std::clamp(0.5 * trace_norm_hermitian(rho.matrix() - sigma.matrix()), 0.0, 1.0);
}

double trace_distance(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    const double overlap = std::norm(a.amplitudes().dot(b.amplitudes()));
    return std::sqrt(std::max(0.0, 1.0 - overlap));
}

Matrix partial_trace(const Matrix& rho, Index d1, Index d2, Factor keep) {
    if (d1 <= 0 || d2 <= 0 || rho.rows() != d1 * d2 || rho.cols() != d1 * d2) {
        throw std::invalid_argument("partial_trace: dimension is not d1*d2");
    }
    if (keep == Factor::first) {
        Matrix out = Matrix::Zero(d1, d1);
        for (Index a = 0; a < d1; ++a)
            for (Index c = 0; c < d1; ++c) out(a, c) = rho.block(a * d2, c * d2, d2, d2).trace();
        return out;
    }
    Matrix out = Matrix::Zero(d2, d2);
    for (Index a = 0; a < d1; ++a) out += rho.block(a * d2, a * d2, d2, d2);
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Index d1, Index d2, Factor keep) {
    return DensityMatrix::trusted(partial_trace(rho.matrix(), d1, d2, keep), rho.eigenvalue_floor());
}

Matrix reduced_from_amplitudes(const Vector& amplitudes, Index d1, Index d2, Factor keep) {
    if (amplitudes.size() != d1 * d2) throw std::invalid_argument("reduced_from_amplitudes: size is not d1*d2");
    // Row-major reshape: psi(a, b) = amplitudes(a*d2 + b).
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
        amplitudes.data(), d1, d2);
    if (keep == Factor::first) return psi * psi.adjoint();
    return (psi.transpose() * psi.conjugate()).eval();
}

double von_neumann_entropy(const DensityMatrix& rho) {
    const RealVector ev = rho.eigenvalues();
    double s = 0.0;
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > rho.eigenvalue_floor()) s -= ev(i) * std::log(ev(i));
    }
    return std::max(0.0, s);
}

double shannon_entropy(const std::vector<double>& weights) {
    double h = 0.0;
    for (double p : weights)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_rho = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> inner(hermitian_part(sqrt_rho * sigma.matrix() * sqrt_rho),
                                                Eigen::EigenvaluesOnly);
    const double f = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(f * f, 0.0, 1.0);
}

// ---- sampling ------------------------------------------------------------

Matrix haar_isometry(Index m, Index n, RngStream& rng) {
    if (m <= 0 || n <= 0 || n > m) throw std::invalid_argument("haar_isometry: need 0 < n <= m");
    Matrix g(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(m, n);
    const Matrix& r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        const double a = std::abs(d);
        q.col(j) *= (a > 0.0) ? d / a : cplx(1.0, 0.0);
    }
    return q;
}

Operator haar_unitary(Index d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("haar_unitary: d must be >= 1");
    return Operator(haar_isometry(d, d, rng));
}

PureState random_pure_state(Index d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("random_pure_state: d must be >= 1");
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = rng.complex_normal();
    return PureState::normalized(v);
}

DensityMatrix random_density(Index d, RngStream& rng, Index rank) {
    if (d < 1) throw std::invalid_argument("random_density: d must be >= 1");
    if (rank < 0) rank = d;
    Matrix g(d, rank);
    for (Index j = 0; j < rank; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix::trusted(hermitian_part(rho));
}

Matrix random_hermitian(Index d, RngStream& rng) {
    Matrix g(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
    return hermitian_part(g);
}

}  // namespace ethq
