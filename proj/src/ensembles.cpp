#include "ethq/ensembles.hpp"

#include <algorithm>
#include <cmath>

namespace ethq {

Matrix EthEnsemble::frame() const {
    const Index n = bp->ambient_dim();
    Matrix f(n, static_cast<Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) f.col(static_cast<Index>(i)) = states[i].amplitudes();
    return f;
}

namespace {

void require_sector(const std::shared_ptr<const GeneralizedBipartition>& bp, std::size_t sector) {
    if (!bp) throw std::invalid_argument("ensemble: null decomposition");
    if (sector >= bp->sector_count()) throw std::invalid_argument("ensemble: sector index out of range");
}

// PureState from a column that is unit norm up to rounding.
PureState column_state(const Vector& v) { return PureState::normalized(v); }

}  // namespace

EthEnsemble haar_sector_ensemble(std::shared_ptr<const GeneralizedBipartition> bp, std::size_t sector,
                                 std::size_t n_states, RngStream& rng) {
    require_sector(bp, sector);
    const Sector& s = bp->sector(sector);
    const Index m = s.d1 * s.d2;
    if (n_states == 0 || static_cast<Index>(n_states) > m) {
        throw std::invalid_argument("haar_sector_ensemble: need 1 <= n_states <= d1*d2");
    }
    const Matrix cols = s.iso * haar_isometry(m, static_cast<Index>(n_states), rng);
    EthEnsemble ens;
    ens.bp = std::move(bp);
    ens.sector = sector;
    ens.entropy_S = std::log(static_cast<double>(m));
    ens.energies.assign(n_states, 0.0);
    for (Index i = 0; i < cols.cols(); ++i) ens.states.push_back(column_state(cols.col(i)));
    return ens;
}

Operator synthetic_eth_observable(std::size_t n, const EthAnsatzParams& p, const std::vector<double>& energies,
                                  RngStream& rng) {
    if (energies.size() != n) throw std::invalid_argument("synthetic_eth_observable: need one energy per state");
    if (!(p.envelope >= 0.0)) throw std::invalid_argument("synthetic_eth_observable: envelope must be >= 0");
    const double amp = p.envelope * std::exp(-0.5 * p.entropy_S);
    const Index d = static_cast<Index>(n);
    Matrix m = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        m(i, i) = p.smooth_mean(energies[static_cast<std::size_t>(i)]) + amp * rng.normal();
        for (Index j = i + 1; j < d; ++j) {
            const cplx r = amp * rng.complex_normal();
            m(i, j) = r;
            m(j, i) = std::conj(r);
        }
    }
    return Operator::hermitian(std::move(m));
}

Operator embed_in_ensemble(const Operator& o, const EthEnsemble& ens) {
    if (o.dim() != static_cast<Index>(ens.size())) throw std::invalid_argument("embed_in_ensemble: dimension mismatch");
    const Matrix f = ens.frame();
    return Operator(hermitian_part(f * o.matrix() * f.adjoint()), o.is_hermitian());
}

EthStats measure_eth_stats(const Operator& obs, const EthEnsemble& ens) {
    if (!ens.bp || obs.dim() != ens.bp->ambient_dim()) throw std::invalid_argument("measure_eth_stats: dimension mismatch");
    if (ens.size() == 0) throw std::invalid_argument("measure_eth_stats: empty ensemble");
    const Matrix f = ens.frame();
    const Matrix m = f.adjoint() * obs.matrix() * f;
    const Index n = m.rows();
    EthStats st;
    const RealVector diag = m.diagonal().real();
    st.diag_mean = diag.mean();
    st.diag_spread = diag.maxCoeff() - diag.minCoeff();
    if (n > 1) {
        const double off = m.squaredNorm() - m.diagonal().squaredNorm();
        st.offdiag_rms = std::sqrt(std::max(off, 0.0) / static_cast<double>(n * (n - 1)));
    }
    const double scale = std::exp(0.5 * ens.entropy_S);
    st.fitted_envelope = st.offdiag_rms * scale;
    st.raw_A = (m - st.diag_mean * Matrix::Identity(n, n)) * scale;
    return st;
}

DensityMatrix microcanonical_density(const EthEnsemble& ens) {
    if (ens.size() == 0) throw std::invalid_argument("microcanonical_density: empty ensemble");
    const Matrix f = ens.frame();
    return DensityMatrix::trusted(f * f.adjoint() / static_cast<double>(ens.size()));
}

PureState rotated_pair(const EthEnsemble& ens, std::size_t i, std::size_t j, int sign, RotationPhase phase) {
    if (i >= ens.size() || j >= ens.size()) throw std::invalid_argument("rotated_pair: index out of range");
    if (i == j) throw std::invalid_argument("rotated_pair: indices must differ");
    if (sign != 1 && sign != -1) throw std::invalid_argument("rotated_pair: sign must be +1 or -1");
    const cplx c = phase == RotationPhase::real ? cplx(sign, 0.0) : cplx(0.0, sign);
    return PureState::normalized((ens.states[i].amplitudes() + c * ens.states[j].amplitudes()) * M_SQRT1_2);
}

DensityMatrix sector_reduced(const PureState& psi, const GeneralizedBipartition& bp, std::size_t sector) {
    const Sector& s = bp.sector(sector);
    if (psi.dim() != bp.ambient_dim()) throw std::invalid_argument("sector_reduced: dimension mismatch");
    const Vector local = s.iso.adjoint() * psi.amplitudes();
    const double w = local.squaredNorm();
    if (w < kStructuralTol) throw std::invalid_argument("sector_reduced: state has no weight in the sector");
    return DensityMatrix::trusted(hermitian_part(reduced_from_amplitudes(local, s.d1, s.d2, Factor::first)) / w);
}

DensityMatrix sector_reduced(const DensityMatrix& rho, const GeneralizedBipartition& bp, std::size_t sector) {
    const Sector& s = bp.sector(sector);
    if (rho.dim() != bp.ambient_dim()) throw std::invalid_argument("sector_reduced: dimension mismatch");
    const Matrix block = s.iso.adjoint() * rho.matrix() * s.iso;
    const double w = block.trace().real();
    if (w < kStructuralTol) throw std::invalid_argument("sector_reduced: state has no weight in the sector");
    return DensityMatrix::trusted(hermitian_part(partial_trace(block, s.d1, s.d2, Factor::first)) / w);
}

double page_bound(Index d1, Index d2) {
    if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("page_bound: dimensions must be positive");
    return 0.5 * std::sqrt(static_cast<double>(d1) / static_cast<double>(d2));
}

double haar_envelope(const Matrix& probe) {
    const double d = static_cast<double>(probe.rows());
    const double mean = probe.trace().real() / d;
    const double second = (probe * probe).trace().real() / d;
    return std::sqrt(std::max(second - mean * mean, 0.0));
}

EnergyWindowEnsemble energy_window_ensemble(std::shared_ptr<const GeneralizedBipartition> bp, std::size_t sector,
                                            std::size_t n_states, double width, double slope, RngStream& rng) {
    require_sector(bp, sector);
    if (!(width >= 0.0)) throw std::invalid_argument("energy_window_ensemble: width must be >= 0");
    const Sector& s = bp->sector(sector);
    const Index d1 = s.d1;
    const Index d2 = s.d2;

    RealVector z = RealVector::Zero(d1);
    for (Index a = 0; a < d1 - d1 % 2; ++a) z(a) = (a % 2 == 0) ? 1.0 : -1.0;
    EnergyWindowEnsemble out;
    out.slope = slope;
    out.probe = z.cast<cplx>().asDiagonal();

    if (width == 0.0 || slope == 0.0 || d1 == 1) {
        out.ensemble = haar_sector_ensemble(bp, sector, n_states, rng);
        out.slope = 0.0;
        if (width > 0.0) {
            for (double& e : out.ensemble.energies) e = width * (rng.uniform() - 0.5);
            std::sort(out.ensemble.energies.begin(), out.ensemble.energies.end());
        }
        return out;
    }
    if (n_states == 0 || static_cast<Index>(n_states) > d2) {
        throw std::invalid_argument("energy_window_ensemble: need 1 <= n_states <= d2");
    }
    const double zz = z.squaredNorm();
    if (std::abs(slope) * 0.5 * width / zz > 1.0 / static_cast<double>(d1)) {
        throw std::invalid_argument("energy_window_ensemble: slope * width too large for a valid weight profile");
    }

    std::vector<double> energies(n_states);
    for (double& e : energies) e = width * (rng.uniform() - 0.5);
    std::sort(energies.begin(), energies.end());

    const Index n = static_cast<Index>(n_states);
    Matrix local = Matrix::Zero(d1 * d2, n);
    for (Index a = 0; a < d1; ++a) {
        const Matrix phi = haar_isometry(d2, n, rng);
        for (Index i = 0; i < n; ++i) {
            const double q = 1.0 / static_cast<double>(d1) + slope * energies[static_cast<std::size_t>(i)] * z(a) / zz;
            local.block(a * d2, i, d2, 1) = std::sqrt(std::max(q, 0.0)) * phi.col(i);
        }
    }
    const Matrix cols = s.iso * local;
    EthEnsemble& ens = out.ensemble;
    ens.bp = std::move(bp);
    ens.sector = sector;
    ens.entropy_S = std::log(static_cast<double>(d1 * d2));
    ens.energies = std::move(energies);
    for (Index i = 0; i < n; ++i) ens.states.push_back(column_state(cols.col(i)));
    return out;
}

}  // namespace ethq
