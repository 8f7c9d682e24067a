#include "ethq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ethq {

double CoarseState::total_weight() const {
    double t = null_weight;
    for (const SectorBlock& s : sectors) t += s.weight;
    return t;
}

std::vector<double> CoarseState::weights() const {
    std::vector<double> w;
    for (const SectorBlock& s : sectors) w.push_back(s.weight);
    w.push_back(null_weight);
    return w;
}

CoarseState apply_cir(const DensityMatrix& rho, const GeneralizedBipartition& bp) {
    if (rho.dim() != bp.ambient_dim()) throw std::invalid_argument("apply_cir: dimension mismatch");
    CoarseState cs;
    cs.sectors.reserve(bp.sector_count());
    for (const Sector& s : bp.sectors()) {
        const Matrix block = s.iso.adjoint() * rho.matrix() * s.iso;
        SectorBlock out;
        out.weight = std::max(block.trace().real(), 0.0);
        if (out.weight >= kEmptySectorWeight) {
            out.state = DensityMatrix::trusted(hermitian_part(partial_trace(block, s.d1, s.d2, Factor::first)) / out.weight);
        }
        cs.sectors.push_back(std::move(out));
    }
    if (bp.null_dim() > 0) {
        const Matrix block = bp.null_iso().adjoint() * rho.matrix() * bp.null_iso();
        cs.null_weight = std::max(block.trace().real(), 0.0);
        if (cs.null_weight >= kEmptySectorWeight) cs.null_state = DensityMatrix::trusted(hermitian_part(block) / cs.null_weight);
    }
    return cs;
}

DensityMatrix lift(const CoarseState& cs, const GeneralizedBipartition& bp) {
    if (cs.sectors.size() != bp.sector_count()) throw std::invalid_argument("lift: sector count mismatch");
    const Index n = bp.ambient_dim();
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < cs.sectors.size(); ++i) {
        const SectorBlock& blk = cs.sectors[i];
        if (blk.empty()) continue;
        const Sector& s = bp.sector(i);
        if (blk.state->dim() != s.d1) throw std::invalid_argument("lift: sector state dimension mismatch");
        const Matrix mixed = Matrix::Identity(s.d2, s.d2) / static_cast<double>(s.d2);
        out += blk.weight * s.iso * kron(blk.state->matrix(), mixed) * s.iso.adjoint();
    }
    if (cs.null_state) {
        if (cs.null_state->dim() != bp.null_dim()) throw std::invalid_argument("lift: null state dimension mismatch");
        out += cs.null_weight * bp.null_iso() * cs.null_state->matrix() * bp.null_iso().adjoint();
    }
    return DensityMatrix::trusted(hermitian_part(out));
}

double coarse_state_distance(const CoarseState& a, const CoarseState& b) {
    if (a.sectors.size() != b.sectors.size()) throw std::invalid_argument("coarse_state_distance: sector count mismatch");
    auto weighted = [](double w, const std::optional<DensityMatrix>& s) -> Matrix {
        return s ? Matrix(w * s->matrix()) : Matrix();
    };
    auto gap = [](const Matrix& x, const Matrix& y) {
        if (x.size() == 0 && y.size() == 0) return 0.0;
        if (x.size() == 0) return max_abs(y);
        if (y.size() == 0) return max_abs(x);
        return max_abs(x - y);
    };
    double worst = std::abs(a.null_weight - b.null_weight);
    for (std::size_t i = 0; i < a.sectors.size(); ++i) {
        worst = std::max(worst, std::abs(a.sectors[i].weight - b.sectors[i].weight));
        worst = std::max(worst, gap(weighted(a.sectors[i].weight, a.sectors[i].state),
                                    weighted(b.sectors[i].weight, b.sectors[i].state)));
    }
    worst = std::max(worst, gap(weighted(a.null_weight, a.null_state), weighted(b.null_weight, b.null_state)));
    return worst;
}

RealVector algebra_expectations(const DensityMatrix& rho, const OperatorAlgebra& a) {
    if (rho.dim() != a.dim()) throw std::invalid_argument("algebra_expectations: dimension mismatch");
    RealVector r(a.size());
    // tr[B ρ] = <ρ, B> for Hermitian B.
    for (Index k = 0; k < a.size(); ++k) {
        r(k) = rho.matrix().cwiseProduct(a.basis()[static_cast<std::size_t>(k)].conjugate()).sum().real();
    }
    return r;
}

namespace {

// Gibbs state of H = Σ λ_k B_k in its eigenbasis.
struct Gibbs {
    RealVector energies;
    Matrix vecs;
    RealVector probs;
    double log_z = 0.0;
};

Gibbs gibbs_state(const RealVector& lambda, const OperatorAlgebra& a) {
    Gibbs g;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a.element(lambda)));
    g.energies = es.eigenvalues();
    g.vecs = es.eigenvectors();
    const double e0 = g.energies.minCoeff();
    g.probs = (-(g.energies.array() - e0)).exp().matrix();
    const double z = g.probs.sum();
    g.probs /= z;
    g.log_z = -e0 + std::log(z);
    return g;
}

Matrix gibbs_matrix(const Gibbs& g) { return g.vecs * g.probs.cast<cplx>().asDiagonal() * g.vecs.adjoint(); }

}  // namespace

MaxEntropyResult max_entropy_state(const RealVector& r, const OperatorAlgebra& a, const MaxEntropyOptions& opt) {
    const Index n = a.size();
    const Index d = a.dim();
    if (r.size() != n) throw std::invalid_argument("max_entropy_state: one expectation per basis element required");
    if (!r.allFinite()) throw std::invalid_argument("max_entropy_state: non-finite expectations");

    RealVector lambda = RealVector::Zero(n);
    auto dual = [&](const Gibbs& g, const RealVector& lam) { return g.log_z + lam.dot(r); };

    Gibbs g = gibbs_state(lambda, a);
    double residual = 0.0;
    for (int it = 0; it <= opt.max_iterations; ++it) {
        // gradient of F = r - <B>.
        std::vector<Matrix> rotated;
        rotated.reserve(static_cast<std::size_t>(n));
        RealVector mean(n);
        for (Index k = 0; k < n; ++k) {
            rotated.push_back(g.vecs.adjoint() * a.basis()[static_cast<std::size_t>(k)] * g.vecs);
            mean(k) = (rotated.back().diagonal().real().array() * g.probs.array()).sum();
        }
        const RealVector grad = r - mean;
        residual = grad.cwiseAbs().maxCoeff();
        if (residual <= opt.tolerance) {
            MaxEntropyResult res{lambda, -g.log_z, DensityMatrix::trusted(gibbs_matrix(g)), it, residual};
            return res;
        }
        if (it == opt.max_iterations) break;

        // Kubo–Mori covariance: H_kl = Re Σ_ij B_k,ij B_l,ji Λ_ij - <B_k><B_l>.
        Eigen::MatrixXd weights(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                const double de = g.energies(j) - g.energies(i);
                weights(i, j) = std::abs(de) > 1e-12 ? (g.probs(i) - g.probs(j)) / de : g.probs(i);
            }
        Matrix left(d * d, n);
        Matrix right(d * d, n);
        for (Index k = 0; k < n; ++k) {
            const Matrix& b = rotated[static_cast<std::size_t>(k)];
            Eigen::Map<Matrix>(left.col(k).data(), d, d) = b.cwiseProduct(weights.cast<cplx>());
            Eigen::Map<Matrix>(right.col(k).data(), d, d) = b.transpose();
        }
        Eigen::MatrixXd hess = (left.transpose() * right).real();
        hess = 0.5 * (hess + hess.transpose()) - mean * mean.transpose();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(hess);
        const double top = std::max(hs.eigenvalues().maxCoeff(), 1e-300);
        RealVector inv = RealVector::Zero(n);
        for (Index k = 0; k < n; ++k) {
            if (hs.eigenvalues()(k) > 1e-12 * top) inv(k) = 1.0 / hs.eigenvalues()(k);
        }
        const RealVector step = -(hs.eigenvectors() * inv.asDiagonal() * hs.eigenvectors().transpose() * grad);

        // Backtracking line search on the convex dual.
        const double f0 = dual(g, lambda);
        const double slope = grad.dot(step);
        double t = 1.0;
        Gibbs trial;
        RealVector next;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            next = lambda + t * step;
            trial = gibbs_state(next, a);
            if (dual(trial, next) <= f0 + 1e-4 * t * slope + 1e-14 * std::abs(f0)) break;
        }
        lambda = next;
        g = std::move(trial);
    }
    std::ostringstream os;
    os << "max_entropy_state: no convergence after " << opt.max_iterations << " iterations, residual " << residual;
    throw NumericalToleranceError(os.str(), residual);
}

JaynesReport verify_jaynes(const DensityMatrix& rho, const GeneralizedBipartition& bp, const OperatorAlgebra& a) {
    JaynesReport report;
    try {
        const DensityMatrix lifted = lift(apply_cir(rho, bp), bp);
        const MaxEntropyResult mes = max_entropy_state(algebra_expectations(rho, a), a);
        report.converged = true;
        report.iterations = mes.iterations;
        // Outside the support the algebra is silent: ρ_MES spreads the H_0
        // weight uniformly while the channel keeps ρ_0, so only the weight is compared there.
        const Matrix p = support_projection(a);
        report.deviation = max_abs(p * (lifted.matrix() - mes.mes.matrix()) * p);
        const Matrix p0 = Matrix::Identity(a.dim(), a.dim()) - p;
        report.deviation = std::max(report.deviation, std::abs((p0 * (lifted.matrix() - mes.mes.matrix())).trace()));
        report.message = "ok";
    } catch (const std::exception& e) {
        report.converged = false;
        report.deviation = std::numeric_limits<double>::infinity();
        report.message = e.what();
    }
    return report;
}

}  // namespace ethq
