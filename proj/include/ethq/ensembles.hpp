// ensembles.hpp: families of orthonormal "eigenstates" living in one sector
// of a generalized bipartition, synthetic observables obeying the ETH ansatz,
// and the statistics used to test ETH in both directions.

#pragma once

#include "ethq/algebra.hpp"

#include <memory>
#include <vector>

namespace ethq {

struct EthEnsemble {
    std::shared_ptr<const GeneralizedBipartition> bp;
    std::size_t sector = 0;
    std::vector<PureState> states;  // ambient vectors, orthonormal, supported on the sector
    std::vector<double> energies;   // ascending
    double entropy_S = 0.0;         // log(d1 d2) of the sector

    std::size_t size() const noexcept { return states.size(); }
    const Sector& sector_data() const { return bp->sector(sector); }
    // Ambient x n matrix whose columns are the states.
    Matrix frame() const;
};

struct EthAnsatzParams {
    double intercept = 0.0;  // smooth diagonal O(E) = intercept + slope * E
    double slope = 0.0;      // ignored when flat
    double envelope = 1.0;   // f, constant per sector; zero gives an exactly diagonal operator
    double entropy_S = 0.0;
    bool flat = true;

    double smooth_mean(double energy) const { return flat ? intercept : intercept + slope * energy; }
};

struct EthStats {
    double diag_mean = 0.0;
    double diag_spread = 0.0;  // max - min of the diagonal
    double offdiag_rms = 0.0;
    double fitted_envelope = 0.0;  // offdiag_rms * e^{S/2}
    Matrix raw_A;                  // (O_ij - δ_ij diag_mean) e^{S/2}
};

// Columns of one Haar isometry on the sector, embedded in the ambient space.
// Energies are all zero.
EthEnsemble haar_sector_ensemble(std::shared_ptr<const GeneralizedBipartition> bp, std::size_t sector,
                                 std::size_t n_states, RngStream& rng);

// n x n Hermitian matrix in the eigenbasis: O(E_i) + f e^{-S/2} R_ii on the
// diagonal, f e^{-S/2} R_ij off it. R_ii is real standard normal, R_ij is
// complex normal with E|R_ij|^2 = 1 and R_ji = conj(R_ij).
Operator synthetic_eth_observable(std::size_t n, const EthAnsatzParams& params, const std::vector<double>& energies,
                                  RngStream& rng);

// Ψ O Ψ^dagger: places an eigenbasis matrix into the ambient space.
Operator embed_in_ensemble(const Operator& eigenbasis_matrix, const EthEnsemble& ens);

EthStats measure_eth_stats(const Operator& obs, const EthEnsemble& ens);

// Uniform mixture of the ensemble states.
DensityMatrix microcanonical_density(const EthEnsemble& ens);

enum class RotationPhase { real, imaginary };

// (|E_i> ± |E_j>)/√2, or (|E_i> ± i|E_j>)/√2 for the imaginary phase.
PureState rotated_pair(const EthEnsemble& ens, std::size_t i, std::size_t j, int sign,
                       RotationPhase phase = RotationPhase::real);

// Reduced state on the first factor of `sector` of a state supported there.
DensityMatrix sector_reduced(const PureState& psi, const GeneralizedBipartition& bp, std::size_t sector);
DensityMatrix sector_reduced(const DensityMatrix& rho, const GeneralizedBipartition& bp, std::size_t sector);
inline DensityMatrix reduced_state(const EthEnsemble& ens, std::size_t i) {
    return sector_reduced(ens.states.at(i), *ens.bp, ens.sector);
}

// Upper bound ½ √(d1/d2) on the Haar-averaged distance of a reduced state from I/d1.
double page_bound(Index d1, Index d2);

// Standard deviation of the spectrum of a first-factor probe: the envelope f
// that Haar states give to matrix elements of probe ⊗ I.
double haar_envelope(const Matrix& probe);

struct EnergyWindowEnsemble {
    EthEnsemble ensemble;
    double slope = 0.0;  // tr[ρ̄_i probe] = slope * E_i
    Matrix probe;        // d1 x d1 diagonal, entries +1, -1, ... (+0 for odd d1)

    double smooth_mean(double energy) const { return slope * energy; }
};

// States whose first-factor expectation of the probe follows slope * E_i,
// with energies uniform in [-width/2, width/2]:
//   ψ_i = Σ_a √q_ia |a⟩ ⊗ φ_i^(a),  q_ia = 1/d1 + slope E_i z_a / Σ z^2,
// with φ^(a) the columns of independent Haar isometries. Requires
// n_states <= d2 and q_ia >= 0. Width or slope zero gives the flat ensemble.
EnergyWindowEnsemble energy_window_ensemble(std::shared_ptr<const GeneralizedBipartition> bp, std::size_t sector,
                                            std::size_t n_states, double width, double slope, RngStream& rng);

}  // namespace ethq
